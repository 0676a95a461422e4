//! Arrival and loss processes driving packet receptions.
//!
//! An arc's reception process is produced in two stages. An injection model
//! emits transmission times with a prescribed long-run rate; a loss model
//! then decides, per injection, whether a delivery opportunity exists at all
//! (Bernoulli for i.i.d. losses, Gilbert-Elliott for bursty ones). For
//! wireless hyperarcs a delivered injection finally draws which subset K of
//! the tail set receives it, from a categorical distribution proportional to
//! the declared per-set rates z_iJK; the leftover probability is a total
//! loss. The declared z values therefore remain the ground truth for
//! long-run rates while the loss model supplies correlation in time.
//!
//! The long-run reception rate of spec (injection, loss) with set rates z is
//! injection_rate * delivery_prob * (z_K / (injection_rate * delivery_prob))
//! = z_K per set, provided sum z_K <= injection_rate * delivery_prob; the
//! constructors validate exactly that.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TrafficError {
    #[error("injection rate must be finite and non-negative, got {0}")]
    BadRate(f64),
    #[error("uniform interarrival needs 0 <= lo <= hi with hi > 0, got [{0}, {1}]")]
    BadUniform(f64, f64),
    #[error("constant interarrival gap must be positive, got {0}")]
    BadGap(f64),
    #[error("probability out of range: {0}")]
    BadProbability(f64),
    #[error("Gilbert-Elliott transition probabilities must not both be zero")]
    FrozenChain,
    #[error("declared reception rates sum to {declared}, exceeding deliverable rate {deliverable}")]
    OverDeclared { declared: f64, deliverable: f64 },
    #[error("nonzero reception rates on an arc that never delivers")]
    DeadArcWithRates,
}

/// When packets are transmitted.
#[derive(Debug, Clone, PartialEq)]
pub enum InjectionModel {
    /// Poisson process: exponential interarrivals of mean 1/rate.
    Poisson { rate: f64 },
    /// Evenly spaced injections at times n/rate.
    Deterministic { rate: f64 },
    /// Renewal process with the given interarrival distribution.
    Renewal { interarrival: Interarrival },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Interarrival {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Constant { gap: f64 },
}

impl InjectionModel {
    /// Long-run injections per unit time.
    pub fn mean_rate(&self) -> f64 {
        match self {
            InjectionModel::Poisson { rate } | InjectionModel::Deterministic { rate } => *rate,
            InjectionModel::Renewal { interarrival } => match interarrival {
                Interarrival::Exponential { rate } => *rate,
                Interarrival::Uniform { lo, hi } => 2.0 / (lo + hi),
                Interarrival::Constant { gap } => 1.0 / gap,
            },
        }
    }

    fn validate(&self) -> Result<(), TrafficError> {
        match self {
            InjectionModel::Poisson { rate } | InjectionModel::Deterministic { rate } => {
                if !rate.is_finite() || *rate < 0.0 {
                    return Err(TrafficError::BadRate(*rate));
                }
            }
            InjectionModel::Renewal { interarrival } => match *interarrival {
                Interarrival::Exponential { rate } => {
                    if !rate.is_finite() || rate < 0.0 {
                        return Err(TrafficError::BadRate(rate));
                    }
                }
                Interarrival::Uniform { lo, hi } => {
                    if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo || hi == 0.0 {
                        return Err(TrafficError::BadUniform(lo, hi));
                    }
                }
                Interarrival::Constant { gap } => {
                    if !gap.is_finite() || gap <= 0.0 {
                        return Err(TrafficError::BadGap(gap));
                    }
                }
            },
        }
        Ok(())
    }
}

/// Whether an injection results in a delivery opportunity.
#[derive(Debug, Clone, PartialEq)]
pub enum LossModel {
    None,
    /// Each injection lost independently with probability `p_loss`.
    Bernoulli { p_loss: f64 },
    /// Two-state Markov-modulated losses; the chain steps once per injection
    /// and starts in its stationary distribution.
    GilbertElliott {
        p_loss_good: f64,
        p_loss_bad: f64,
        p_good_to_bad: f64,
        p_bad_to_good: f64,
    },
}

impl LossModel {
    /// Long-run fraction of injections that are deliverable.
    pub fn long_run_delivery(&self) -> f64 {
        match self {
            LossModel::None => 1.0,
            LossModel::Bernoulli { p_loss } => 1.0 - p_loss,
            LossModel::GilbertElliott {
                p_loss_good,
                p_loss_bad,
                p_good_to_bad,
                p_bad_to_good,
            } => {
                let pi_bad = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
                (1.0 - pi_bad) * (1.0 - p_loss_good) + pi_bad * (1.0 - p_loss_bad)
            }
        }
    }

    fn validate(&self) -> Result<(), TrafficError> {
        let check = |p: f64| {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                Err(TrafficError::BadProbability(p))
            } else {
                Ok(())
            }
        };
        match self {
            LossModel::None => Ok(()),
            LossModel::Bernoulli { p_loss } => check(*p_loss),
            LossModel::GilbertElliott {
                p_loss_good,
                p_loss_bad,
                p_good_to_bad,
                p_bad_to_good,
            } => {
                check(*p_loss_good)?;
                check(*p_loss_bad)?;
                check(*p_good_to_bad)?;
                check(*p_bad_to_good)?;
                if *p_good_to_bad + *p_bad_to_good == 0.0 {
                    return Err(TrafficError::FrozenChain);
                }
                Ok(())
            }
        }
    }
}

/// Complete per-arc process description.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSpec {
    pub injection: InjectionModel,
    pub loss: LossModel,
}

impl ProcessSpec {
    pub fn validate(&self) -> Result<(), TrafficError> {
        self.injection.validate()?;
        self.loss.validate()
    }

    /// Long-run rate of deliverable injections.
    pub fn delivery_rate(&self) -> f64 {
        self.injection.mean_rate() * self.loss.long_run_delivery()
    }
}

/// One transmission: when it happened and whether the loss model let it
/// through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injection {
    pub time: f64,
    pub delivered: bool,
}

/// A reception observed on a hyperarc: which tail subset got the packet.
/// `mask` indexes positions of the hyperarc's sorted tail set; 0 would mean
/// nobody, and such events are not receptions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReceptionEvent {
    pub time: f64,
    pub hyperarc: usize,
    pub mask: u16,
}

/// Mutable per-process state: injection count, last time, loss-chain state.
#[derive(Debug, Clone)]
struct ProcessState {
    count: u64,
    time: f64,
    ge_bad: bool,
    ge_initialized: bool,
}

/// Generator for one arc's injection/loss sequence.
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    spec: ProcessSpec,
    state: ProcessState,
}

impl ArrivalProcess {
    pub fn new(spec: ProcessSpec) -> Result<Self, TrafficError> {
        spec.validate()?;
        Ok(ArrivalProcess {
            spec,
            state: ProcessState { count: 0, time: 0.0, ge_bad: false, ge_initialized: false },
        })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// Advances to the next injection. `None` means the process never fires
    /// (zero rate).
    pub fn next_injection<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Injection> {
        let next_time = match &self.spec.injection {
            InjectionModel::Poisson { rate }
            | InjectionModel::Renewal { interarrival: Interarrival::Exponential { rate } } => {
                if *rate == 0.0 {
                    return None;
                }
                self.state.time + Exp::new(*rate).expect("validated rate").sample(rng)
            }
            InjectionModel::Deterministic { rate } => {
                if *rate == 0.0 {
                    return None;
                }
                // n/rate instead of repeated addition: no drift, and the
                // nominal times are hit exactly.
                (self.state.count + 1) as f64 / rate
            }
            InjectionModel::Renewal { interarrival: Interarrival::Constant { gap } } => {
                (self.state.count + 1) as f64 * gap
            }
            InjectionModel::Renewal { interarrival: Interarrival::Uniform { lo, hi } } => {
                let gap = if lo == hi { *lo } else { rng.random_range(*lo..*hi) };
                self.state.time + gap
            }
        };
        self.state.count += 1;
        self.state.time = next_time;
        let delivered = self.draw_delivery(rng);
        Some(Injection { time: next_time, delivered })
    }

    fn draw_delivery<R: Rng + ?Sized>(&mut self, rng: &mut R) -> bool {
        match &self.spec.loss {
            LossModel::None => true,
            LossModel::Bernoulli { p_loss } => !rng.random_bool(*p_loss),
            LossModel::GilbertElliott {
                p_loss_good,
                p_loss_bad,
                p_good_to_bad,
                p_bad_to_good,
            } => {
                if !self.state.ge_initialized {
                    let pi_bad = p_good_to_bad / (p_good_to_bad + p_bad_to_good);
                    self.state.ge_bad = rng.random_bool(pi_bad);
                    self.state.ge_initialized = true;
                }
                let p_loss = if self.state.ge_bad { *p_loss_bad } else { *p_loss_good };
                let delivered = !rng.random_bool(p_loss);
                self.state.ge_bad = if self.state.ge_bad {
                    !rng.random_bool(*p_bad_to_good)
                } else {
                    rng.random_bool(*p_good_to_bad)
                };
                delivered
            }
        }
    }
}

/// One hyperarc's full reception generator: arrival process plus the
/// categorical reception-set draw.
#[derive(Debug, Clone)]
pub struct HyperarcProcess {
    arrival: ArrivalProcess,
    /// (cumulative probability, mask), ascending in mask order.
    cumulative: Vec<(f64, u16)>,
}

/// An injection's outcome on a hyperarc. `mask == 0` is a loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionEvent {
    pub time: f64,
    pub mask: u16,
}

impl HyperarcProcess {
    /// `set_rates` gives the declared z_iJK per reception mask. Their sum
    /// must not exceed the deliverable rate; the remainder is total loss.
    pub fn new(spec: ProcessSpec, set_rates: &BTreeMap<u16, f64>) -> Result<Self, TrafficError> {
        let arrival = ArrivalProcess::new(spec)?;
        let deliverable = arrival.spec.delivery_rate();
        let declared: f64 = set_rates.values().sum();
        let mut cumulative = Vec::new();
        if deliverable == 0.0 {
            if declared > 0.0 {
                return Err(TrafficError::DeadArcWithRates);
            }
        } else {
            // Tolerate float round-off at the boundary, nothing more.
            if declared > deliverable * (1.0 + 1e-9) {
                return Err(TrafficError::OverDeclared { declared, deliverable });
            }
            let mut acc = 0.0;
            for (&mask, &z) in set_rates {
                if z < 0.0 {
                    return Err(TrafficError::BadRate(z));
                }
                if z == 0.0 || mask == 0 {
                    continue;
                }
                acc += z / deliverable;
                cumulative.push((acc.min(1.0), mask));
            }
        }
        Ok(HyperarcProcess { arrival, cumulative })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.arrival.spec
    }

    /// Next injection with its reception mask (0 = lost).
    pub fn next_event<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<InjectionEvent> {
        let injection = self.arrival.next_injection(rng)?;
        let mask = if injection.delivered && !self.cumulative.is_empty() {
            let u: f64 = rng.random_range(0.0..1.0);
            self.cumulative
                .iter()
                .find(|(cum, _)| u < *cum)
                .map(|&(_, m)| m)
                .unwrap_or(0)
        } else {
            0
        };
        Some(InjectionEvent { time: injection.time, mask })
    }
}

/// Empirical long-run rates from an event log.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalRates {
    /// Receptions (any non-empty mask) per unit time.
    pub total: f64,
    /// Per reception-set rates.
    pub per_mask: BTreeMap<u16, f64>,
}

/// Counts receptions up to `horizon` and divides by it.
pub fn empirical_rate(events: &[ReceptionEvent], horizon: f64) -> EmpiricalRates {
    assert!(horizon > 0.0, "horizon must be positive");
    let mut per_mask: BTreeMap<u16, u64> = BTreeMap::new();
    let mut total = 0u64;
    for e in events {
        if e.time <= horizon && e.mask != 0 {
            total += 1;
            *per_mask.entry(e.mask).or_insert(0) += 1;
        }
    }
    EmpiricalRates {
        total: total as f64 / horizon,
        per_mask: per_mask
            .into_iter()
            .map(|(m, c)| (m, c as f64 / horizon))
            .collect(),
    }
}
