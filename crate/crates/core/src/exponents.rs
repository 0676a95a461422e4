//! Error-exponent analytics and empirical exponent estimation.
//!
//! For a connection of min-cut capacity C run at rate R < C, the failure
//! probability decays in the coding delay Δ with exponent
//! C - R - R ln(C/R) nats per unit time. This module provides the closed
//! form, an independent numeric Chernoff optimization that must agree with
//! it, exact Poisson-tail bounds at finite Δ, and a Monte-Carlo estimator
//! that fits the exponent from simulated failure frequencies.
//!
//! All logarithms are natural; exponents are in nats per unit time. Tail
//! probabilities are computed and carried in log space so Δ in the hundreds
//! or thousands cannot underflow.

use crate::flows::min_cut_capacity;
use crate::network::NodeId;
use crate::rate::rate_to_f64;
use crate::simulator::{run_batch, SimConfig, SimError, SimMode};
use crate::stats::{least_squares_slope, wilson_interval};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("need 0 < R <= C with both finite, got C={c}, R={r}")]
    Domain { c: f64, r: f64 },
    #[error("rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("Δ must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("need at least one Δ point")]
    EmptyGrid,
    #[error("need at least one trial per Δ")]
    NoTrials,
    #[error(transparent)]
    Sim(#[from] SimError),
}

fn check_domain(c: f64, r: f64) -> Result<(), ExponentError> {
    if !(c.is_finite() && r.is_finite()) || c <= 0.0 || r <= 0.0 || r > c {
        return Err(ExponentError::Domain { c, r });
    }
    Ok(())
}

/// Closed-form exponent C - R - R ln(C/R); zero exactly when R = C.
pub fn error_exponent(c: f64, r: f64) -> Result<f64, ExponentError> {
    check_domain(c, r)?;
    if r == c {
        return Ok(0.0);
    }
    Ok(c - r - r * (c / r).ln())
}

/// The same exponent found by maximizing θ - R ln(C/(C-θ)) over θ in [0, C)
/// with golden-section search. Kept fully independent of the closed form so
/// the two can cross-check each other.
pub fn chernoff_exponent_numeric(c: f64, r: f64) -> Result<f64, ExponentError> {
    check_domain(c, r)?;
    let f = |theta: f64| theta - r * (c / (c - theta)).ln();
    let invphi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut a = 0.0;
    let mut b = c * (1.0 - 1e-12);
    let mut x1 = b - invphi * (b - a);
    let mut x2 = a + invphi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..300 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    Ok(f(0.5 * (a + b)))
}

/// ln P(N < count) for N ~ Poisson(mean), via log-space terms and Kahan
/// summation.
fn ln_poisson_cdf_below(mean: f64, count: u64) -> f64 {
    debug_assert!(mean > 0.0 && count >= 1);
    // ln of term l is -mean + l ln(mean) - ln l!, built incrementally.
    let ln_mean = mean.ln();
    let mut ln_terms = Vec::with_capacity(count as usize);
    let mut t = -mean;
    ln_terms.push(t);
    for l in 1..count {
        t += ln_mean - (l as f64).ln();
        ln_terms.push(t);
    }
    let max = ln_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &lt in &ln_terms {
        let y = (lt - max).exp() - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    max + sum.ln()
}

/// Finite-Δ sandwich around the failure probability, carried in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    /// ln P(Poisson(CΔ) < ⌈RΔ⌉): too few receptions across the min cut
    /// forces failure, so this lower-bounds p_e.
    pub ln_lower: f64,
    /// ln of the Chernoff bound exp(-Δ (C - R - R ln(C/R))).
    pub ln_upper: f64,
}

impl TailBounds {
    pub fn lower_pe(&self) -> f64 {
        self.ln_lower.exp()
    }

    pub fn upper_pe(&self) -> f64 {
        self.ln_upper.exp()
    }
}

/// ⌈RΔ⌉ with a one-part-per-billion slack so products that are integers in
/// exact arithmetic do not round up from float noise.
pub fn target_message_count(rate: f64, delta: f64) -> usize {
    ((rate * delta - 1e-9).ceil()).max(1.0) as usize
}

pub fn poisson_tail_bounds(c: f64, r: f64, delta: f64) -> Result<TailBounds, ExponentError> {
    check_domain(c, r)?;
    if !delta.is_finite() || delta <= 0.0 {
        return Err(ExponentError::BadDelta(delta));
    }
    let k = target_message_count(r, delta) as u64;
    let ln_lower = ln_poisson_cdf_below(c * delta, k);
    let ln_upper = -delta * error_exponent(c, r)?;
    Ok(TailBounds { ln_lower, ln_upper })
}

/// One Δ point of an empirical exponent estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPoint {
    pub delta: f64,
    /// Message count K = ⌈RΔ⌉ used at this Δ.
    pub k: usize,
    pub trials: u64,
    pub failures: u64,
    pub p_e: f64,
    pub wilson: (f64, f64),
    /// ln of the Poisson-tail lower bound at this Δ and this sink's C.
    pub ln_lower_pe: f64,
    /// In the fitting window: Wilson interval inside (1e-4, 0.5) and at
    /// least 10 observed failures.
    pub admissible: bool,
}

/// Per-sink exponent series and fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkExponentEstimate {
    pub sink: NodeId,
    pub capacity: f64,
    /// None when R >= C (no decay to measure).
    pub analytic_exponent: Option<f64>,
    pub points: Vec<ExponentPoint>,
    /// Least-squares slope of -ln p_e over Δ, admissible points only; None
    /// if fewer than two qualify.
    pub fitted_slope: Option<f64>,
}

/// Empirical exponent estimate across the Δ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub rate: f64,
    pub per_sink: Vec<SinkExponentEstimate>,
    /// Minimum fitted slope across sinks, available only when every sink
    /// produced a fit.
    pub system_exponent: Option<f64>,
}

/// Runs the configured experiment at each Δ with K = ⌈RΔ⌉ and fits the decay
/// of the per-sink failure frequency. Trial substreams are shared across Δ,
/// so the underlying event prefixes are coupled and the curves are monotone
/// trial by trial.
pub fn estimate_empirical_exponent(
    cfg: &SimConfig,
    rate: f64,
    deltas: &[f64],
    trials_per_delta: u64,
) -> Result<ExponentEstimate, ExponentError> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(ExponentError::BadRate(rate));
    }
    if deltas.is_empty() {
        return Err(ExponentError::EmptyGrid);
    }
    if trials_per_delta == 0 {
        return Err(ExponentError::NoTrials);
    }
    for &d in deltas {
        if !d.is_finite() || d <= 0.0 {
            return Err(ExponentError::BadDelta(d));
        }
    }

    let capacities: Vec<f64> = cfg
        .sinks
        .iter()
        .map(|&t| {
            min_cut_capacity(&cfg.network, cfg.source, t)
                .map(|c| rate_to_f64(&c))
                .map_err(SimError::from)
        })
        .collect::<Result<_, _>>()?;

    let mut series: Vec<Vec<ExponentPoint>> = vec![Vec::new(); cfg.sinks.len()];
    for &delta in deltas {
        let mut cfg_d = cfg.clone();
        cfg_d.k = target_message_count(rate, delta);
        cfg_d.mode = SimMode::Fixed { delta };
        let summary = run_batch(&cfg_d, trials_per_delta)?;
        for (sink_idx, sink_summary) in summary.per_sink.iter().enumerate() {
            let failures = trials_per_delta - sink_summary.successes;
            let p_e = failures as f64 / trials_per_delta as f64;
            let wilson = wilson_interval(failures, trials_per_delta);
            let admissible = wilson.0 > 1e-4 && wilson.1 < 0.5 && failures >= 10;
            let ln_lower_pe = if capacities[sink_idx] > 0.0 {
                ln_poisson_cdf_below(capacities[sink_idx] * delta, cfg_d.k as u64)
            } else {
                // No capacity: failure is certain.
                0.0
            };
            series[sink_idx].push(ExponentPoint {
                delta,
                k: cfg_d.k,
                trials: trials_per_delta,
                failures,
                p_e,
                wilson,
                ln_lower_pe,
                admissible,
            });
        }
    }

    let per_sink: Vec<SinkExponentEstimate> = cfg
        .sinks
        .iter()
        .zip(capacities)
        .zip(series)
        .map(|((&sink, capacity), points)| {
            let analytic_exponent = if rate < capacity {
                error_exponent(capacity, rate).ok()
            } else {
                None
            };
            let fit_points: Vec<(f64, f64)> = points
                .iter()
                .filter(|p| p.admissible)
                .map(|p| (p.delta, -p.p_e.ln()))
                .collect();
            let fitted_slope = if fit_points.len() >= 2 {
                least_squares_slope(&fit_points)
            } else {
                None
            };
            SinkExponentEstimate { sink, capacity, analytic_exponent, points, fitted_slope }
        })
        .collect();

    let system_exponent = per_sink
        .iter()
        .map(|s| s.fitted_slope)
        .collect::<Option<Vec<f64>>>()
        .map(|slopes| slopes.into_iter().fold(f64::INFINITY, f64::min));

    Ok(ExponentEstimate { rate, per_sink, system_exponent })
}
