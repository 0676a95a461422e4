//! Discrete-event engine tying traffic, network, and coding together.
//!
//! Every hyperarc injects on its own configured process. Processing an
//! injection is atomic: the head node encodes a fresh random combination of
//! its memory, and the packet lands in every receiving node's memory (and
//! sink decoders) at the same timestamp before any later event runs. Events
//! are ordered by (time, sequence number), so simultaneous events replay in
//! the order they were scheduled and receptions at time t are visible to any
//! injection processed later at t.
//!
//! Random draws come from named substreams of the master seed: one traffic
//! stream per hyperarc, one coding stream per node, one payload stream.
//! Because each stream's consumption depends only on that entity's own event
//! prefix, extending the horizon extends the event log without rewriting it;
//! success at some Δ then implies success at any larger Δ under the same
//! seed.

use crate::coding::{CodingError, DecoderState, MessageSet, NodeMemory};
use crate::flows::{multicast_capacity, FlowError};
use crate::galois::{FieldSpec, GaloisError};
use crate::network::{Network, NodeId};
use crate::rate::rate_to_f64;
use crate::rngstream::{substream, StreamKind};
use crate::stats::wilson_interval;
use crate::traffic::{EmpiricalRates, HyperarcProcess, ProcessSpec, TrafficError};
use rayon::prelude::*;
use std::collections::{BTreeMap, BinaryHeap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("node id {0} not in network")]
    MissingNode(NodeId),
    #[error("sink set is empty")]
    NoSinks,
    #[error("source may not be a sink")]
    SourceIsSink,
    #[error("duplicate sink")]
    DuplicateSink,
    #[error("need {expected} traffic specs (one per hyperarc), got {got}")]
    TrafficCount { expected: usize, got: usize },
    #[error("fixed-horizon Δ must be finite and non-negative, got {0}")]
    BadDelta(f64),
    #[error("rateless cap factor must be positive, got {0}")]
    BadCapFactor(f64),
    #[error("rateless mode needs positive min-cut capacity")]
    RatelessNeedsCapacity,
    #[error("all trials timed out before decoding")]
    AllTimedOut,
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
    #[error(transparent)]
    Coding(#[from] CodingError),
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// Stopping rule for a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimMode {
    /// Process every event with time <= delta, then evaluate the sinks.
    Fixed { delta: f64 },
    /// Run until every sink decodes, up to cap_factor * K / C time units.
    Rateless { cap_factor: f64 },
}

impl SimMode {
    pub const DEFAULT_CAP_FACTOR: f64 = 50.0;

    pub fn rateless() -> Self {
        SimMode::Rateless { cap_factor: Self::DEFAULT_CAP_FACTOR }
    }
}

/// Full description of one simulation experiment.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub network: Network,
    pub source: NodeId,
    pub sinks: Vec<NodeId>,
    /// Field exponent m, so q = 2^m.
    pub field_m: u32,
    pub k: usize,
    pub rho: usize,
    /// One process per hyperarc, in hyperarc order (arc order for wireline
    /// networks).
    pub traffic: Vec<ProcessSpec>,
    pub mode: SimMode,
    pub seed: u64,
    pub compact_memory: bool,
}

/// Result of one sink's decode attempt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkOutcome {
    pub node: NodeId,
    pub success: bool,
    pub rank: usize,
    /// Decoded payloads compared symbol-for-symbol against the originals.
    pub verified: bool,
}

/// Everything observed in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub sinks: Vec<SinkOutcome>,
    /// Rateless only: the time the last sink reached full rank.
    pub completion_time: Option<f64>,
    pub timed_out: bool,
    /// Fixed: Δ. Rateless: completion time, or the cap on timeout.
    pub horizon: f64,
    /// Injections per hyperarc, including lost ones.
    pub injected: Vec<u64>,
    /// Injections per hyperarc that reached at least one node.
    pub received: Vec<u64>,
    pub per_set_received: Vec<BTreeMap<u16, u64>>,
}

impl TrialOutcome {
    pub fn all_sinks_succeeded(&self) -> bool {
        self.sinks.iter().all(|s| s.success)
    }

    /// Per-hyperarc empirical reception rates over this trial's horizon.
    pub fn empirical_rates(&self) -> Vec<EmpiricalRates> {
        self.per_set_received
            .iter()
            .zip(&self.received)
            .map(|(per_set, &total)| {
                if self.horizon > 0.0 {
                    EmpiricalRates {
                        total: total as f64 / self.horizon,
                        per_mask: per_set
                            .iter()
                            .map(|(&m, &c)| (m, c as f64 / self.horizon))
                            .collect(),
                    }
                } else {
                    EmpiricalRates { total: 0.0, per_mask: BTreeMap::new() }
                }
            })
            .collect()
    }
}

/// Per-sink aggregate over a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkSummary {
    pub node: NodeId,
    pub successes: u64,
    pub frequency: f64,
    /// Wilson 95% interval for the success probability.
    pub wilson: (f64, f64),
    pub mean_rank: f64,
}

/// Aggregate over `run_batch`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeSummary {
    pub trials: u64,
    pub per_sink: Vec<SinkSummary>,
    /// Trials in which every sink decoded.
    pub all_sinks_successes: u64,
    pub all_sinks_wilson: (f64, f64),
    pub timeouts: u64,
    /// Mean over completed rateless trials; None in fixed mode or if none
    /// completed.
    pub mean_completion_time: Option<f64>,
    pub mean_injected: Vec<f64>,
    pub mean_received: Vec<f64>,
}

/// Rateless rate measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AchievedRate {
    /// Mean of K / completion-time over completed trials.
    pub rate: f64,
    pub mean_completion_time: f64,
    pub completed: u64,
    pub trials: u64,
}

/// Validated, immutable state shared by all trials of a batch.
struct Prepared {
    net: Network,
    source: NodeId,
    sinks: Vec<NodeId>,
    field: FieldSpec,
    k: usize,
    rho: usize,
    traffic: Vec<ProcessSpec>,
    set_rates: Vec<BTreeMap<u16, f64>>,
    seed: u64,
    compact_memory: bool,
    mode: SimMode,
    /// Rateless hard stop, cap_factor * K / C.
    time_cap: f64,
}

fn prepare(cfg: &SimConfig) -> Result<Prepared, SimError> {
    let net = cfg.network.as_wireless();
    let n = net.node_count();
    if cfg.source >= n {
        return Err(SimError::MissingNode(cfg.source));
    }
    if cfg.sinks.is_empty() {
        return Err(SimError::NoSinks);
    }
    let mut seen = vec![false; n];
    for &t in &cfg.sinks {
        if t >= n {
            return Err(SimError::MissingNode(t));
        }
        if t == cfg.source {
            return Err(SimError::SourceIsSink);
        }
        if std::mem::replace(&mut seen[t], true) {
            return Err(SimError::DuplicateSink);
        }
    }
    if cfg.traffic.len() != net.hyperarcs().len() {
        return Err(SimError::TrafficCount {
            expected: net.hyperarcs().len(),
            got: cfg.traffic.len(),
        });
    }
    let field = FieldSpec::new(cfg.field_m)?;
    if cfg.k == 0 {
        return Err(SimError::Coding(CodingError::EmptyMessageSet));
    }
    let mut set_rates = Vec::with_capacity(cfg.traffic.len());
    for (spec, ha) in cfg.traffic.iter().zip(net.hyperarcs()) {
        let rates: BTreeMap<u16, f64> =
            ha.receptions.iter().map(|(&m, z)| (m, rate_to_f64(z))).collect();
        // Constructing the process validates the spec against the declared
        // rates; the per-trial rebuild below cannot fail after this.
        HyperarcProcess::new(spec.clone(), &rates)?;
        set_rates.push(rates);
    }
    let time_cap = match cfg.mode {
        SimMode::Fixed { delta } => {
            if !delta.is_finite() || delta < 0.0 {
                return Err(SimError::BadDelta(delta));
            }
            delta
        }
        SimMode::Rateless { cap_factor } => {
            if !cap_factor.is_finite() || cap_factor <= 0.0 {
                return Err(SimError::BadCapFactor(cap_factor));
            }
            let capacity = rate_to_f64(&multicast_capacity(&net, cfg.source, &cfg.sinks)?);
            if capacity <= 0.0 {
                return Err(SimError::RatelessNeedsCapacity);
            }
            cap_factor * cfg.k as f64 / capacity
        }
    };
    Ok(Prepared {
        net,
        source: cfg.source,
        sinks: cfg.sinks.clone(),
        field,
        k: cfg.k,
        rho: cfg.rho,
        traffic: cfg.traffic.clone(),
        set_rates,
        seed: cfg.seed,
        compact_memory: cfg.compact_memory,
        mode: cfg.mode,
        time_cap,
    })
}

/// Pending injection, ordered so the BinaryHeap pops the earliest
/// (time, seq) first.
#[derive(Debug, Clone, Copy)]
struct QueuedEvent {
    time: f64,
    seq: u64,
    hyperarc: usize,
    mask: u16,
}

impl PartialEq for QueuedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl Eq for QueuedEvent {}

impl Ord for QueuedEvent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueuedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn run_one(p: &Prepared, trial: u64) -> TrialOutcome {
    let n_nodes = p.net.node_count();
    let n_arcs = p.net.hyperarcs().len();

    let mut payload_rng = substream(p.seed, trial, StreamKind::Payload, 0);
    let messages = MessageSet::random(&p.field, p.k, p.rho, &mut payload_rng)
        .expect("k validated in prepare");

    let mut memories: Vec<NodeMemory> = (0..n_nodes)
        .map(|node| {
            let mem = if node == p.source {
                NodeMemory::source(&messages)
            } else {
                NodeMemory::empty(p.k, p.rho)
            };
            if p.compact_memory { mem.compacted() } else { mem }
        })
        .collect();
    let mut decoders: Vec<Option<DecoderState>> = vec![None; n_nodes];
    for &t in &p.sinks {
        decoders[t] = Some(DecoderState::new(p.k, p.rho));
    }
    let mut incomplete = p.sinks.len();

    let mut coding_rngs: Vec<_> = (0..n_nodes)
        .map(|node| substream(p.seed, trial, StreamKind::Coding, node as u64))
        .collect();
    let mut traffic_rngs: Vec<_> = (0..n_arcs)
        .map(|h| substream(p.seed, trial, StreamKind::Traffic, h as u64))
        .collect();
    let mut processes: Vec<HyperarcProcess> = p
        .traffic
        .iter()
        .zip(&p.set_rates)
        .map(|(spec, rates)| {
            HyperarcProcess::new(spec.clone(), rates).expect("validated in prepare")
        })
        .collect();

    let mut heap: BinaryHeap<QueuedEvent> = BinaryHeap::new();
    let mut seq = 0u64;
    for h in 0..n_arcs {
        if let Some(ev) = processes[h].next_event(&mut traffic_rngs[h]) {
            heap.push(QueuedEvent { time: ev.time, seq, hyperarc: h, mask: ev.mask });
            seq += 1;
        }
    }

    let mut injected = vec![0u64; n_arcs];
    let mut received = vec![0u64; n_arcs];
    let mut per_set: Vec<BTreeMap<u16, u64>> = vec![BTreeMap::new(); n_arcs];
    let mut completion_time = None;
    #[cfg(debug_assertions)]
    let mut consistency_samples = 0u32;

    while let Some(ev) = heap.pop() {
        if ev.time > p.time_cap {
            break;
        }
        let h = ev.hyperarc;
        injected[h] += 1;
        if ev.mask != 0 {
            received[h] += 1;
            *per_set[h].entry(ev.mask).or_insert(0) += 1;
            let ha = &p.net.hyperarcs()[h];
            let head = ha.head;
            // Encoding only happens for delivered injections, so each node's
            // coding stream advances with its delivered prefix and horizon
            // extensions never reshuffle earlier draws.
            let packet = memories[head].encode(&p.field, &mut coding_rngs[head]);
            // Header invariant payload = sum gamma_k w_k, spot-checked on the
            // first packets of each trial.
            #[cfg(debug_assertions)]
            if consistency_samples < 8 {
                consistency_samples += 1;
                debug_assert!(packet.consistent_with(&p.field, &messages));
            }
            for receiver in ha.nodes_of_mask(ev.mask) {
                if let Some(dec) = decoders[receiver].as_mut() {
                    let was_complete = dec.is_complete();
                    dec.receive(&p.field, &packet).expect("dimensions fixed per trial");
                    if !was_complete && dec.is_complete() {
                        incomplete -= 1;
                    }
                }
                memories[receiver].store(&p.field, packet.clone());
            }
            if matches!(p.mode, SimMode::Rateless { .. }) && incomplete == 0 {
                completion_time = Some(ev.time);
                break;
            }
        }
        if let Some(next) = processes[h].next_event(&mut traffic_rngs[h]) {
            heap.push(QueuedEvent { time: next.time, seq, hyperarc: h, mask: next.mask });
            seq += 1;
        }
    }

    let rateless = matches!(p.mode, SimMode::Rateless { .. });
    let timed_out = rateless && completion_time.is_none();
    let horizon = match p.mode {
        SimMode::Fixed { delta } => delta,
        SimMode::Rateless { .. } => completion_time.unwrap_or(p.time_cap),
    };
    let sinks = p
        .sinks
        .iter()
        .map(|&t| {
            let dec = decoders[t].as_ref().expect("sink decoder installed");
            let success = dec.is_complete();
            let verified = match dec.try_decode() {
                Some(decoded) => decoded == messages,
                None => false,
            };
            debug_assert_eq!(success, verified);
            SinkOutcome { node: t, success, rank: dec.rank(), verified }
        })
        .collect();

    TrialOutcome {
        sinks,
        completion_time,
        timed_out,
        horizon,
        injected,
        received,
        per_set_received: per_set,
    }
}

/// Runs trial 0 of the configured experiment. Deterministic in the seed.
pub fn run_trial(cfg: &SimConfig) -> Result<TrialOutcome, SimError> {
    let p = prepare(cfg)?;
    Ok(run_one(&p, 0))
}

/// Runs `trials` independent trials (substreams indexed by trial number) and
/// aggregates. Trials execute in parallel; the summary does not depend on
/// scheduling.
pub fn run_batch(cfg: &SimConfig, trials: u64) -> Result<OutcomeSummary, SimError> {
    let p = prepare(cfg)?;
    let outcomes: Vec<TrialOutcome> =
        (0..trials).into_par_iter().map(|t| run_one(&p, t)).collect();
    Ok(summarize(&p, trials, &outcomes))
}

fn summarize(p: &Prepared, trials: u64, outcomes: &[TrialOutcome]) -> OutcomeSummary {
    let n_arcs = p.net.hyperarcs().len();
    let mut per_sink: Vec<SinkSummary> = p
        .sinks
        .iter()
        .map(|&node| SinkSummary {
            node,
            successes: 0,
            frequency: 0.0,
            wilson: (0.0, 0.0),
            mean_rank: 0.0,
        })
        .collect();
    let mut all_ok = 0u64;
    let mut timeouts = 0u64;
    let mut completion_acc = 0.0;
    let mut completed = 0u64;
    let mut injected_acc = vec![0.0; n_arcs];
    let mut received_acc = vec![0.0; n_arcs];
    for outcome in outcomes {
        for (summary, sink) in per_sink.iter_mut().zip(&outcome.sinks) {
            summary.successes += sink.success as u64;
            summary.mean_rank += sink.rank as f64;
        }
        all_ok += outcome.all_sinks_succeeded() as u64;
        timeouts += outcome.timed_out as u64;
        if let Some(t) = outcome.completion_time {
            completion_acc += t;
            completed += 1;
        }
        for h in 0..n_arcs {
            injected_acc[h] += outcome.injected[h] as f64;
            received_acc[h] += outcome.received[h] as f64;
        }
    }
    let n = trials as f64;
    for summary in &mut per_sink {
        summary.frequency = summary.successes as f64 / n;
        summary.wilson = wilson_interval(summary.successes, trials);
        summary.mean_rank /= n;
    }
    OutcomeSummary {
        trials,
        per_sink,
        all_sinks_successes: all_ok,
        all_sinks_wilson: wilson_interval(all_ok, trials),
        timeouts,
        mean_completion_time: (completed > 0)
            .then(|| completion_acc / completed as f64),
        mean_injected: injected_acc.iter().map(|&a| a / n).collect(),
        mean_received: received_acc.iter().map(|&a| a / n).collect(),
    }
}

/// Rateless-mode rate measurement: mean K / completion-time over trials that
/// decoded within the cap.
pub fn measure_achieved_rate(cfg: &SimConfig, trials: u64) -> Result<AchievedRate, SimError> {
    let p = prepare(cfg)?;
    if !matches!(p.mode, SimMode::Rateless { .. }) {
        return Err(SimError::BadDelta(f64::NAN));
    }
    let outcomes: Vec<TrialOutcome> =
        (0..trials).into_par_iter().map(|t| run_one(&p, t)).collect();
    let mut rate_acc = 0.0;
    let mut time_acc = 0.0;
    let mut completed = 0u64;
    for outcome in &outcomes {
        if let Some(t) = outcome.completion_time {
            rate_acc += p.k as f64 / t;
            time_acc += t;
            completed += 1;
        }
    }
    if completed == 0 {
        return Err(SimError::AllTimedOut);
    }
    Ok(AchievedRate {
        rate: rate_acc / completed as f64,
        mean_completion_time: time_acc / completed as f64,
        completed,
        trials,
    })
}

/// Trial outcomes for callers that need per-trial detail (exponent fitting).
pub fn run_batch_outcomes(cfg: &SimConfig, trials: u64) -> Result<Vec<TrialOutcome>, SimError> {
    let p = prepare(cfg)?;
    Ok((0..trials).into_par_iter().map(|t| run_one(&p, t)).collect())
}

/// Aggregates outcomes produced by [`run_batch_outcomes`] under the same
/// config.
pub fn summarize_outcomes(
    cfg: &SimConfig,
    outcomes: &[TrialOutcome],
) -> Result<OutcomeSummary, SimError> {
    let p = prepare(cfg)?;
    Ok(summarize(&p, outcomes.len() as u64, outcomes))
}
