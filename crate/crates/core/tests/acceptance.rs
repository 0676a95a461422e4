//! Acceptance gate. One test per criterion; each prints a single
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture` or on failure) and then
//! asserts. Oracles here are written from the defining formulas, independent
//! of the library's algorithms, so agreement is evidence rather than
//! tautology.

use std::collections::BTreeMap;
use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlncsim::coding::{innovation_probability_experiment, invertibility_probability};
use rlncsim::exponents::{chernoff_exponent_numeric, error_exponent, estimate_empirical_exponent};
use rlncsim::flows::{decompose_paths, max_flow, min_cut_capacity};
use rlncsim::fluidqueue::{check_fluid_convergence, PathQueueSystem};
use rlncsim::galois::{FieldElement, FieldSpec};
use rlncsim::network::{Network, NodeId};
use rlncsim::rate::Rate;
use rlncsim::simulator::{measure_achieved_rate, run_batch, SimConfig, SimMode};
use rlncsim::traffic::{InjectionModel, LossModel, ProcessSpec};

const ONE_MINUS_LN2: f64 = 1.0 - std::f64::consts::LN_2;

fn report(criterion: &str, ok: bool, detail: &str) {
    println!("[{}] criterion {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion}: {detail}");
}

// ---------------------------------------------------------------------------
// 1. Field axioms: exhaustive for GF(2) and GF(16), randomized for the rest.

fn axioms_hold(f: &FieldSpec, a: FieldElement, b: FieldElement, c: FieldElement) -> bool {
    f.add(a, b) == f.add(b, a)
        && f.mul(a, b) == f.mul(b, a)
        && f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
        && f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        && f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        && f.add(a, 0) == a
        && f.mul(a, 1) == a
        && f.add(a, a) == 0
        && f.mul(a, 0) == 0
        && (a == 0 || f.mul(a, f.inv(a).unwrap()) == 1)
}

#[test]
fn criterion_01_field_axioms() {
    let t0 = Instant::now();
    let mut ok = true;
    for m in [1u32, 4] {
        let f = FieldSpec::new(m).unwrap();
        let q = f.q() as u16;
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    ok &= axioms_hold(&f, a, b, c);
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for m in [8u32, 16] {
        let f = FieldSpec::new(m).unwrap();
        for _ in 0..10_000 {
            let (a, b, c) =
                (f.random_element(&mut rng), f.random_element(&mut rng), f.random_element(&mut rng));
            ok &= axioms_hold(&f, a, b, c);
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    ok &= elapsed < 5.0;
    report(
        "1",
        ok,
        &format!("field axioms, exhaustive GF(2)/GF(16) + 10^4 triples GF(256)/GF(65536) ({elapsed:.2}s)"),
    );
}

// ---------------------------------------------------------------------------
// 2. Invertibility of random K x K matrices.

/// Row rank by plain elimination; local to this file on purpose.
fn rank_of(f: &FieldSpec, rows: &mut [Vec<FieldElement>]) -> usize {
    let cols = rows[0].len();
    let mut r = 0;
    for col in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(r, pivot);
        let inv = f.inv(rows[r][col]).unwrap();
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let factor = f.mul(rows[i][col], inv);
                for c in col..cols {
                    let sub = f.mul(factor, rows[r][c]);
                    rows[i][c] = f.add(rows[i][c], sub);
                }
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

#[test]
fn criterion_02_invertibility_law() {
    let t0 = Instant::now();
    // Exact enumeration over all sixteen 2x2 matrices over GF(2): the
    // determinant ad + bc is pure bit arithmetic, no library involved.
    let invertible = (0u32..16)
        .filter(|bits| {
            let (a, b, c, d) = (bits & 1, (bits >> 1) & 1, (bits >> 2) & 1, (bits >> 3) & 1);
            (a & d) ^ (b & c) == 1
        })
        .count();
    let mut ok = invertible == 6;
    let mut detail = format!("enumeration {invertible}/16");

    let trials = 100_000u64;
    for (k, m) in [(2usize, 1u32), (4, 1), (4, 4), (8, 8)] {
        let f = FieldSpec::new(m).unwrap();
        let q = f.q() as f64;
        let expected: f64 = (1..=k).map(|i| 1.0 - q.powi(-(i as i32))).product();
        assert!((expected - invertibility_probability(k, f.q())).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(200 + k as u64 + m as u64);
        let mut hits = 0u64;
        for _ in 0..trials {
            let mut rows: Vec<Vec<FieldElement>> = (0..k)
                .map(|_| (0..k).map(|_| f.random_element(&mut rng)).collect())
                .collect();
            hits += (rank_of(&f, &mut rows) == k) as u64;
        }
        let p_hat = hits as f64 / trials as f64;
        let sigma = (expected * (1.0 - expected) / trials as f64).sqrt();
        ok &= (p_hat - expected).abs() <= 3.0 * sigma;
        detail.push_str(&format!("; ({k},{}) {p_hat:.4} vs {expected:.4}", f.q()));
    }
    let elapsed = t0.elapsed().as_secs_f64();
    ok &= elapsed < 30.0;
    detail.push_str(&format!(" ({elapsed:.2}s)"));
    report("2", ok, &detail);
}

// ---------------------------------------------------------------------------
// 3. Innovation bound: empirical frequency >= 1 - 1/q - 3 sigma.

#[test]
fn criterion_03_innovation_bound() {
    let t0 = Instant::now();
    let trials = 20_000u64;
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for m in [1u32, 8] {
        let f = FieldSpec::new(m).unwrap();
        let bound = 1.0 - 1.0 / f.q() as f64;
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(300 + m as u64);
        let mut done = 0;
        let mut attempts = 0;
        while done < 20 {
            attempts += 1;
            assert!(attempts < 1000, "instance generation should not stall");
            let dim = rng.random_range(3..=8);
            let k1 = rng.random_range(1..=dim);
            let k2 = rng.random_range(0..dim);
            let draw = |n: usize, rng: &mut ChaCha8Rng| -> Vec<Vec<FieldElement>> {
                (0..n).map(|_| (0..dim).map(|_| f.random_element(rng)).collect()).collect()
            };
            let v1 = draw(k1, &mut rng);
            let v2 = draw(k2, &mut rng);
            // Regenerate when span(V1) happens to land inside span(V2); the
            // lemma's hypothesis excludes that case.
            let Ok(p) = innovation_probability_experiment(&f, &v1, &v2, trials, &mut rng) else {
                continue;
            };
            ok &= p >= bound - 3.0 * sigma;
            worst = worst.min(p - bound);
            done += 1;
        }
    }
    let elapsed = t0.elapsed().as_secs_f64();
    ok &= elapsed < 30.0;
    report(
        "3",
        ok,
        &format!("innovation frequency vs 1 - 1/q, worst margin {worst:+.4} ({elapsed:.2}s)"),
    );
}

// ---------------------------------------------------------------------------
// 4. Min cut against exhaustive cut enumeration.

fn rational(rng: &mut ChaCha8Rng) -> String {
    format!("{}/{}", rng.random_range(1..=8), rng.random_range(1..=4))
}

/// Cut value by the defining formula, summed directly off the parsed data.
fn enumerated_min_cut(net: &Network, s: NodeId, t: NodeId) -> Rate {
    let n = net.node_count();
    let others: Vec<NodeId> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best: Option<Rate> = None;
    for choice in 0u32..(1 << others.len()) {
        let mut side = vec![false; n];
        side[s] = true;
        for (pos, &v) in others.iter().enumerate() {
            side[v] = choice & (1 << pos) != 0;
        }
        let mut cap = Rate::zero();
        for arc in net.arcs() {
            if side[arc.head] && !side[arc.tail] {
                cap += &arc.z;
            }
        }
        for ha in net.hyperarcs() {
            if !side[ha.head] {
                continue;
            }
            for (mask, z) in &ha.receptions {
                let crosses = (0..ha.tail_set.len())
                    .any(|pos| mask & (1 << pos) != 0 && !side[ha.tail_set[pos]]);
                if crosses {
                    cap += z;
                }
            }
        }
        best = match best {
            Some(b) if b <= cap => Some(b),
            _ => Some(cap),
        };
    }
    best.unwrap()
}

#[test]
fn criterion_04_min_cut_oracle() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut ok = true;

    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let mut text: Vec<String> = (0..n).map(|i| format!("node n{i}")).collect();
        for i in 0..n {
            for j in 0..n {
                if i != j && rng.random_bool(0.4) {
                    text.push(format!("arc n{i} n{j} {}", rational(&mut rng)));
                }
            }
        }
        let net = Network::parse(&text.join("\n")).unwrap();
        let (s, t) = (0, n - 1);
        ok &= min_cut_capacity(&net, s, t).unwrap() == enumerated_min_cut(&net, s, t);
    }

    for _ in 0..50 {
        let n = rng.random_range(2..=6);
        let mut text: Vec<String> = (0..n).map(|i| format!("node n{i}")).collect();
        let mut have = false;
        for i in 0..n {
            if !rng.random_bool(0.7) && (have || i < n - 1) {
                continue;
            }
            let mut tails: Vec<usize> = (0..n).filter(|&v| v != i).collect();
            for pos in (1..tails.len()).rev() {
                tails.swap(pos, rng.random_range(0..=pos));
            }
            tails.truncate(rng.random_range(1..=3.min(tails.len())));
            tails.sort_unstable();
            let full = (1u16 << tails.len()) - 1;
            let mut entries = Vec::new();
            for mask in 1..=full {
                if mask == full || rng.random_bool(0.6) {
                    let nodes: Vec<String> = (0..tails.len())
                        .filter(|pos| mask & (1 << pos) != 0)
                        .map(|pos| format!("n{}", tails[pos]))
                        .collect();
                    entries.push(format!("{{{}}}={}", nodes.join(" "), rational(&mut rng)));
                }
            }
            let tail_text: Vec<String> = tails.iter().map(|v| format!("n{v}")).collect();
            text.push(format!("hyperarc n{i} {{{}}} {}", tail_text.join(" "), entries.join(" ")));
            have = true;
        }
        let net = Network::parse(&text.join("\n")).unwrap();
        let (s, t) = (0, n - 1);
        ok &= min_cut_capacity(&net, s, t).unwrap() == enumerated_min_cut(&net, s, t);
    }

    let elapsed = t0.elapsed().as_secs_f64();
    ok &= elapsed < 60.0;
    report(
        "4",
        ok,
        &format!("min cut == enumerated cut on 200 wireline + 50 wireless nets ({elapsed:.2}s)"),
    );
}

// ---------------------------------------------------------------------------
// 5. Path decomposition reconstructs every arc flow exactly.

#[test]
fn criterion_05_path_decomposition() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut ok = true;
    for _ in 0..100 {
        let n = rng.random_range(4..=8);
        let mut text: Vec<String> = (0..n).map(|i| format!("node n{i}")).collect();
        // Arcs only go forward in the node order, so every flow is acyclic;
        // the spine guarantees a nonzero max flow.
        for i in 0..n - 1 {
            text.push(format!("arc n{i} n{} {}", i + 1, rational(&mut rng)));
        }
        for i in 0..n {
            for j in i + 2..n {
                if rng.random_bool(0.5) {
                    text.push(format!("arc n{i} n{j} {}", rational(&mut rng)));
                }
            }
        }
        let net = Network::parse(&text.join("\n")).unwrap();
        let flow = max_flow(&net, 0, n - 1).unwrap();
        let decomposition = decompose_paths(&flow).unwrap();
        let mut rebuilt: BTreeMap<(NodeId, NodeId), Rate> = BTreeMap::new();
        for path in &decomposition.paths {
            for hop in path.nodes.windows(2) {
                *rebuilt.entry((hop[0], hop[1])).or_insert_with(Rate::zero) += &path.rate;
            }
        }
        ok &= rebuilt == flow.flows && decomposition.total_rate() == flow.value;
        ok &= !flow.value.is_zero();
    }
    let elapsed = t0.elapsed().as_secs_f64();
    ok &= elapsed < 10.0;
    report("5", ok, &format!("100 acyclic flows reconstructed exactly ({elapsed:.2}s)"));
}

// ---------------------------------------------------------------------------
// 6 and 7. Capacity achievement on the butterfly and traffic generality.

fn butterfly() -> Network {
    Network::parse(
        "node s; node n1; node n2; node n3; node n4; node t1; node t2\n\
         arc s n1 1; arc s n2 1; arc n1 n3 1; arc n2 n3 1; arc n3 n4 1\n\
         arc n1 t1 1; arc n2 t2 1; arc n4 t1 1; arc n4 t2 1",
    )
    .unwrap()
}

fn butterfly_config(k: usize, spec: ProcessSpec, seed: u64) -> SimConfig {
    let net = butterfly();
    SimConfig {
        source: net.node_id("s").unwrap(),
        sinks: vec![net.node_id("t1").unwrap(), net.node_id("t2").unwrap()],
        traffic: vec![spec; net.arcs().len()],
        network: net,
        field_m: 16,
        k,
        rho: 4,
        mode: SimMode::Fixed { delta: 93.75 },
        seed,
        compact_memory: false,
    }
}

fn poisson_bernoulli() -> ProcessSpec {
    ProcessSpec {
        injection: InjectionModel::Poisson { rate: 1.25 },
        loss: LossModel::Bernoulli { p_loss: 0.2 },
    }
}

#[test]
fn criterion_06_capacity_achievement() {
    let t0 = Instant::now();
    // Multicast capacity 2 (criterion 4 vouches for the min-cut code), each
    // arc delivering at z = 1. K = 100 over Delta = 1.5 K / (0.8 C) = 93.75.
    let net = butterfly();
    let sinks = [net.node_id("t1").unwrap(), net.node_id("t2").unwrap()];
    let source = net.node_id("s").unwrap();
    assert_eq!(enumerated_min_cut(&net, source, sinks[0]), Rate::new(2.into(), 1.into()));
    assert_eq!(enumerated_min_cut(&net, source, sinks[1]), Rate::new(2.into(), 1.into()));

    let sub = run_batch(&butterfly_config(100, poisson_bernoulli(), 6), 200).unwrap();
    let sub_freq = sub.all_sinks_successes as f64 / 200.0;
    // Same horizon with K demanding 1.2 C: 225 = 1.2 * 2 * 93.75 messages
    // cannot fit through a cut of 2.
    let sup = run_batch(&butterfly_config(225, poisson_bernoulli(), 6), 200).unwrap();
    let sup_freq = sup.all_sinks_successes as f64 / 200.0;

    let elapsed = t0.elapsed().as_secs_f64();
    let ok = sub_freq >= 0.95 && sup_freq <= 0.05 && elapsed < 300.0;
    report(
        "6",
        ok,
        &format!("success {sub_freq:.3} at 0.8C, {sup_freq:.3} at 1.2C over 200 trials ({elapsed:.2}s)"),
    );
}

#[test]
fn criterion_07_general_arrivals() {
    let t0 = Instant::now();
    // Same z = 1 per arc as criterion 6, reached by two non-Poisson routes.
    let det_bernoulli = ProcessSpec {
        injection: InjectionModel::Deterministic { rate: 1.25 },
        loss: LossModel::Bernoulli { p_loss: 0.2 },
    };
    let det_ge = ProcessSpec {
        injection: InjectionModel::Deterministic { rate: 1.25 },
        loss: LossModel::GilbertElliott {
            p_loss_good: 0.0,
            p_loss_bad: 1.0,
            p_good_to_bad: 0.1,
            p_bad_to_good: 0.4,
        },
    };
    assert!((det_ge.loss.long_run_delivery() - 0.8).abs() < 1e-12);

    let bern = run_batch(&butterfly_config(100, det_bernoulli, 7), 200).unwrap();
    let bern_freq = bern.all_sinks_successes as f64 / 200.0;
    let ge = run_batch(&butterfly_config(100, det_ge, 7), 200).unwrap();
    let ge_freq = ge.all_sinks_successes as f64 / 200.0;

    let elapsed = t0.elapsed().as_secs_f64();
    let ok = bern_freq >= 0.95 && ge_freq >= 0.95 && elapsed < 300.0;
    report(
        "7",
        ok,
        &format!("success {bern_freq:.3} det+Bernoulli, {ge_freq:.3} det+Gilbert-Elliott ({elapsed:.2}s)"),
    );
}

// ---------------------------------------------------------------------------
// 8. Rateless mode achieves at least 0.9 of the arc rate.

#[test]
fn criterion_08_rateless_rate() {
    let t0 = Instant::now();
    let net = Network::parse("node s; node t; arc s t 1").unwrap();
    let cfg = SimConfig {
        source: net.node_id("s").unwrap(),
        sinks: vec![net.node_id("t").unwrap()],
        traffic: vec![ProcessSpec {
            injection: InjectionModel::Poisson { rate: 1.0 },
            loss: LossModel::None,
        }],
        network: net,
        field_m: 16,
        k: 200,
        rho: 4,
        mode: SimMode::rateless(),
        seed: 8,
        compact_memory: false,
    };
    let achieved = measure_achieved_rate(&cfg, 100).unwrap();
    let elapsed = t0.elapsed().as_secs_f64();
    let ok = achieved.completed == 100 && achieved.rate >= 0.9 && elapsed < 120.0;
    report(
        "8",
        ok,
        &format!(
            "mean K/T = {:.4} over {} completed trials, target 0.9 ({elapsed:.2}s)",
            achieved.rate, achieved.completed
        ),
    );
}

// ---------------------------------------------------------------------------
// 9. Fluid limit of the three-station path.

#[test]
fn criterion_09_fluid_limit() {
    let t0 = Instant::now();
    let sys = PathQueueSystem::from_path(1.0, &[1.0, 1.0, 1.0], 256, 10_000).unwrap();
    let report_ = check_fluid_convergence(&sys, &[100, 1_000, 10_000], 1.5, 20, 5).unwrap();
    let last = report_.entries.last().unwrap();
    let decreasing = report_.distances_decrease();
    let elapsed = t0.elapsed().as_secs_f64();
    let ok =
        last.sup_distance <= 0.05 && last.downstream_max <= 0.02 && decreasing && elapsed < 180.0;
    let dists: Vec<String> =
        report_.entries.iter().map(|e| format!("{:.4}", e.sup_distance)).collect();
    report(
        "9",
        ok,
        &format!(
            "station-1 sup {:.4}, downstream max {:.4}, distances [{}] ({elapsed:.2}s)",
            last.sup_distance,
            last.downstream_max,
            dists.join(", ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. Error exponent: closed form, exact Poisson tail, empirical slopes.

/// P[Poisson(lambda) < k] by the forward term recurrence. For the scales
/// here the first term e^-lambda is representable, so plain f64 suffices.
fn poisson_cdf_below(lambda: f64, k: usize) -> f64 {
    let mut term = (-lambda).exp();
    let mut acc = 0.0;
    for j in 0..k {
        acc += term;
        term *= lambda / (j + 1) as f64;
    }
    acc
}

fn exponent_config(arcs: &str, n_arcs: usize, seed: u64) -> SimConfig {
    let net = Network::parse(arcs).unwrap();
    SimConfig {
        source: net.node_id("s").unwrap(),
        sinks: vec![net.node_id("t").unwrap()],
        traffic: vec![
            ProcessSpec {
                injection: InjectionModel::Poisson { rate: 2.0 },
                loss: LossModel::None,
            };
            n_arcs
        ],
        network: net,
        field_m: 16,
        k: 1,
        rho: 2,
        mode: SimMode::Fixed { delta: 1.0 },
        seed,
        compact_memory: false,
    }
}

#[test]
fn criterion_10_error_exponent() {
    let t0 = Instant::now();

    // (a) Closed form against the numeric Chernoff optimum on a 100-point
    // (C, R) grid.
    let mut grid_ok = true;
    let mut worst_gap = 0.0f64;
    for i in 0..10 {
        for j in 0..10 {
            let c = 0.5 + 0.35 * i as f64;
            let r = c * (0.05 + 0.09 * j as f64);
            let gap = (error_exponent(c, r).unwrap() - chernoff_exponent_numeric(c, r).unwrap()).abs();
            worst_gap = worst_gap.max(gap);
            grid_ok &= gap <= 1e-9;
        }
    }

    // (c) Empirical slopes from simulation, single arc and two-arc tandem,
    // C = 2 and R = 1 so the analytic exponent is 1 - ln 2.
    let deltas = [5.0, 10.0, 15.0, 20.0, 25.0];
    let single = estimate_empirical_exponent(
        &exponent_config("node s; node t; arc s t 2", 1, 10),
        1.0,
        &deltas,
        20_000,
    )
    .unwrap();
    let tandem = estimate_empirical_exponent(
        &exponent_config("node s; node a; node t; arc s a 2; arc a t 2", 2, 10),
        1.0,
        &deltas,
        20_000,
    )
    .unwrap();
    let single_slope = single.per_sink[0].fitted_slope.expect("single-arc fit");
    let tandem_slope = tandem.per_sink[0].fitted_slope.expect("tandem fit");
    let single_dev = (single_slope - ONE_MINUS_LN2).abs() / ONE_MINUS_LN2;
    let tandem_dev = (tandem_slope - ONE_MINUS_LN2).abs() / ONE_MINUS_LN2;
    let empirical_ok = single_dev <= 0.25 && tandem_dev <= 0.25;

    // (b) Exact Poisson tail at Delta = 200, C = 2, R = 1: the slope of the
    // true lower bound, not an asymptote, so it still carries the
    // O(ln Delta / Delta) correction from the tail's polynomial prefactor.
    // At Delta = 200 that correction is 5.83%, which exceeds the 5% window
    // (it first dips under 5% near Delta = 240), so this sub-check fails and
    // the tolerance would have to move for it to pass. Kept as stated rather
    // than quietly widened.
    let delta = 200.0;
    let p_e = poisson_cdf_below(2.0 * delta, 200);
    let tail_slope = -p_e.ln() / delta;
    assert!((tail_slope - 0.3247444270609246).abs() < 1e-9, "oracle drifted: {tail_slope}");
    let tail_dev = (tail_slope - ONE_MINUS_LN2).abs() / ONE_MINUS_LN2;
    let tail_ok = tail_dev <= 0.05;

    let elapsed = t0.elapsed().as_secs_f64();
    let ok = grid_ok && empirical_ok && tail_ok && elapsed < 600.0;
    report(
        "10",
        ok,
        &format!(
            "closed vs numeric gap {worst_gap:.2e}; empirical slopes {single_slope:.4} (dev {:.1}%) single, \
             {tandem_slope:.4} (dev {:.1}%) tandem; exact tail slope {tail_slope:.6} dev {:.2}% vs 5% cap \
             ({elapsed:.2}s)",
            single_dev * 100.0,
            tandem_dev * 100.0,
            tail_dev * 100.0
        ),
    );
}

// ---------------------------------------------------------------------------
// 11. CLI reruns are byte-identical.

#[test]
fn criterion_11_reproducibility() {
    let bin = env!("CARGO_BIN_EXE_rlncsim");
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/butterfly.cfg");
    let run = || {
        std::process::Command::new(bin)
            .args(["simulate", "--config", cfg, "--trials", "5", "--seed", "3"])
            .output()
            .expect("binary should spawn")
    };
    let (first, second) = (run(), run());
    let ok = first.status.success()
        && first.stdout == second.stdout
        && first.stderr == second.stderr
        && !first.stdout.is_empty();
    report("11", ok, "repeated CLI run is byte-identical");
}
