//! Tandem-queue model of innovative-packet propagation along one
//! decomposition path, and its fluid limit.
//!
//! Each arc of the path is a single-server station. All N jobs start at
//! station 1; a reception on arc l is a candidate with the configured
//! thinning probability, and a candidate that finds the station non-empty
//! moves one job downstream. Candidates on every arc occur at the common
//! rate (1-1/q) R_m, so with time scaled by N and levels by N the station-1
//! trajectory approaches (1 - (1-1/q) R_m tau)^+ while downstream stations
//! vanish.
//!
//! The thinning probability (1-1/q) R_m / z is strictly below 1 for any
//! finite field, so the exactly-deterministic drain case is reachable only
//! through the explicit override constructor, which accepts any probability
//! in (0, 1].

use crate::rngstream::{substream, StreamKind};
use crate::traffic::{ArrivalProcess, InjectionModel, LossModel, ProcessSpec};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FluidError {
    #[error("path needs at least one station")]
    Empty,
    #[error("station {0}: reception rate must be positive and finite")]
    BadRate(usize),
    #[error("station {0}: thinning probability must be in (0, 1]")]
    BadThinning(usize),
    #[error("initial job count must be at least 1")]
    NoJobs,
    #[error("path rate must satisfy 0 < R <= z on every arc, violated at arc {0}")]
    Infeasible(usize),
    #[error("field size must be at least 2")]
    BadField,
    #[error("N grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("scaled horizon must be positive and finite")]
    BadHorizon,
    #[error("need at least one trial")]
    NoTrials,
}

/// One station: the reception stream on its arc and the candidate thinning.
#[derive(Debug, Clone, PartialEq)]
pub struct StationSpec {
    pub receptions: InjectionModel,
    pub thinning: f64,
}

/// A tandem of stations along one path, preloaded with `initial_jobs` jobs
/// at station 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PathQueueSystem {
    stations: Vec<StationSpec>,
    initial_jobs: u64,
}

impl PathQueueSystem {
    /// The proof's construction: Poisson receptions at each arc's rate z,
    /// thinned to candidates with probability (1-1/q) R / z.
    pub fn from_path(rate: f64, z: &[f64], q: u32, initial_jobs: u64) -> Result<Self, FluidError> {
        if q < 2 {
            return Err(FluidError::BadField);
        }
        let lemma_factor = 1.0 - 1.0 / q as f64;
        let stations = z
            .iter()
            .enumerate()
            .map(|(l, &zl)| {
                if !(rate.is_finite() && zl.is_finite()) || rate <= 0.0 || rate > zl {
                    return Err(FluidError::Infeasible(l));
                }
                Ok(StationSpec {
                    receptions: InjectionModel::Poisson { rate: zl },
                    thinning: lemma_factor * rate / zl,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::with_thinning(stations, initial_jobs)
    }

    /// Full control over reception models and thinning probabilities,
    /// including probability exactly 1.
    pub fn with_thinning(
        stations: Vec<StationSpec>,
        initial_jobs: u64,
    ) -> Result<Self, FluidError> {
        if stations.is_empty() {
            return Err(FluidError::Empty);
        }
        if initial_jobs == 0 {
            return Err(FluidError::NoJobs);
        }
        for (l, st) in stations.iter().enumerate() {
            let rate = st.receptions.mean_rate();
            if !rate.is_finite() || rate <= 0.0 {
                return Err(FluidError::BadRate(l));
            }
            if !(st.thinning > 0.0 && st.thinning <= 1.0) {
                return Err(FluidError::BadThinning(l));
            }
        }
        Ok(PathQueueSystem { stations, initial_jobs })
    }

    pub fn station_count(&self) -> usize {
        self.stations.len()
    }

    pub fn initial_jobs(&self) -> u64 {
        self.initial_jobs
    }

    /// Jobs are offered at each station at this long-run rate; the fluid
    /// drain slope.
    pub fn candidate_rate(&self) -> f64 {
        self.stations[0].receptions.mean_rate() * self.stations[0].thinning
    }

    /// Same system with a different initial job count.
    pub fn with_jobs(&self, initial_jobs: u64) -> Result<Self, FluidError> {
        Self::with_thinning(self.stations.clone(), initial_jobs)
    }
}

/// A simulated sample path: per-station service times plus candidate counts.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueTrajectory {
    initial_jobs: u64,
    /// Chronological service instants per station; Q_l is reconstructed as
    /// B_{l-1} - B_l from these counting processes.
    services: Vec<Vec<f64>>,
    /// Candidate arrivals seen per station (serving or not) up to the
    /// earlier of the horizon and the drain instant.
    pub candidates: Vec<u64>,
    pub horizon: f64,
}

impl QueueTrajectory {
    /// Q_l at time t (stations 0-based): services fed minus services done,
    /// with all jobs present at station 0 from time zero.
    pub fn level_at(&self, station: usize, t: f64) -> u64 {
        let fed = if station == 0 {
            self.initial_jobs
        } else {
            self.services[station - 1].partition_point(|&s| s <= t) as u64
        };
        let done = self.services[station].partition_point(|&s| s <= t) as u64;
        fed - done
    }

    /// Q_l(N tau) / N.
    pub fn scaled_level(&self, station: usize, tau: f64) -> f64 {
        let n = self.initial_jobs as f64;
        self.level_at(station, n * tau) as f64 / n
    }

    pub fn serviced(&self, station: usize) -> u64 {
        self.services[station].len() as u64
    }

    /// Instant the last job left the final station, if it did.
    pub fn drain_time(&self) -> Option<f64> {
        let last = self.services.last().expect("at least one station");
        (last.len() as u64 == self.initial_jobs).then(|| *last.last().expect("non-empty"))
    }
}

/// Runs one sample path to `horizon` (or until fully drained). Receptions
/// across stations interleave by time, ties resolved upstream-first.
pub fn simulate_path_queues<R: Rng + ?Sized>(
    sys: &PathQueueSystem,
    horizon: f64,
    rng: &mut R,
) -> QueueTrajectory {
    let l_count = sys.stations.len();
    let mut arrivals: Vec<ArrivalProcess> = sys
        .stations
        .iter()
        .map(|st| {
            ArrivalProcess::new(ProcessSpec {
                injection: st.receptions.clone(),
                loss: LossModel::None,
            })
            .expect("validated at construction")
        })
        .collect();
    let mut next_time: Vec<f64> = (0..l_count)
        .map(|l| arrivals[l].next_injection(rng).expect("positive rate").time)
        .collect();

    let mut levels: Vec<u64> = vec![0; l_count];
    levels[0] = sys.initial_jobs;
    let mut services: Vec<Vec<f64>> = vec![Vec::new(); l_count];
    let mut candidates = vec![0u64; l_count];

    loop {
        let (station, &t) = next_time
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("stations non-empty");
        if t > horizon {
            break;
        }
        if rng.random_bool(sys.stations[station].thinning) {
            candidates[station] += 1;
            // Complementarity: service only while the queue is non-empty.
            if levels[station] > 0 {
                levels[station] -= 1;
                services[station].push(t);
                if station + 1 < l_count {
                    levels[station + 1] += 1;
                } else if services[station].len() as u64 == sys.initial_jobs {
                    // Everything delivered; later candidates are irrelevant.
                    break;
                }
            }
        }
        next_time[station] = arrivals[station].next_injection(rng).expect("positive rate").time;
    }

    QueueTrajectory {
        initial_jobs: sys.initial_jobs,
        services,
        candidates,
        horizon,
    }
}

/// The closed-form fluid limit: scaled station-1 level
/// (1 - candidate_rate * tau)^+, zero at every later station.
pub fn fluid_solution(sys: &PathQueueSystem, tau: f64) -> Vec<f64> {
    assert!(tau >= 0.0, "tau must be non-negative");
    let mut levels = vec![0.0; sys.stations.len()];
    levels[0] = (1.0 - sys.candidate_rate() * tau).max(0.0);
    levels
}

/// Per-N convergence measurements on a common 200-point scaled-time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceEntry {
    pub n: u64,
    /// Sup over the grid of |mean scaled station-1 level - fluid level|.
    pub sup_distance: f64,
    /// Largest mean scaled level seen at any station past the first.
    pub downstream_max: f64,
    pub tau_grid: Vec<f64>,
    /// Mean scaled level per station per grid point, averaged over trials.
    pub mean_scaled: Vec<Vec<f64>>,
    pub fluid_station1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
}

impl ConvergenceReport {
    /// Whether the station-1 sup distances strictly decrease along the N
    /// grid.
    pub fn distances_decrease(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].sup_distance < w[0].sup_distance)
    }
}

/// Simulates the system at each job count in `n_grid` and compares averaged
/// scaled trajectories against the fluid limit. Trial randomness comes from
/// Fluid-kind substreams of `seed`, indexed by (trial, N index), so reports
/// are reproducible and independent of scheduling.
pub fn check_fluid_convergence(
    sys: &PathQueueSystem,
    n_grid: &[u64],
    scaled_horizon: f64,
    trials: u64,
    seed: u64,
) -> Result<ConvergenceReport, FluidError> {
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[1] <= w[0]) || n_grid[0] == 0 {
        return Err(FluidError::BadGrid);
    }
    if !scaled_horizon.is_finite() || scaled_horizon <= 0.0 {
        return Err(FluidError::BadHorizon);
    }
    if trials == 0 {
        return Err(FluidError::NoTrials);
    }
    const GRID_POINTS: usize = 200;
    let tau_grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| scaled_horizon * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let l_count = sys.stations.len();

    let mut entries = Vec::with_capacity(n_grid.len());
    for (n_idx, &n) in n_grid.iter().enumerate() {
        let scaled_sys = sys.with_jobs(n)?;
        let horizon = n as f64 * scaled_horizon;
        let acc: Vec<Vec<f64>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = substream(seed, trial, StreamKind::Fluid, n_idx as u64);
                let traj = simulate_path_queues(&scaled_sys, horizon, &mut rng);
                let mut levels = vec![vec![0.0; GRID_POINTS]; l_count];
                for (l, row) in levels.iter_mut().enumerate() {
                    for (i, &tau) in tau_grid.iter().enumerate() {
                        row[i] = traj.scaled_level(l, tau);
                    }
                }
                levels
            })
            .reduce(
                || vec![vec![0.0; GRID_POINTS]; l_count],
                |mut a, b| {
                    for (ra, rb) in a.iter_mut().zip(&b) {
                        for (va, vb) in ra.iter_mut().zip(rb) {
                            *va += vb;
                        }
                    }
                    a
                },
            );
        let mean_scaled: Vec<Vec<f64>> = acc
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / trials as f64).collect())
            .collect();
        let fluid_station1: Vec<f64> =
            tau_grid.iter().map(|&tau| fluid_solution(sys, tau)[0]).collect();
        let sup_distance = mean_scaled[0]
            .iter()
            .zip(&fluid_station1)
            .map(|(m, f)| (m - f).abs())
            .fold(0.0, f64::max);
        let downstream_max = mean_scaled[1..]
            .iter()
            .flatten()
            .cloned()
            .fold(0.0, f64::max);
        entries.push(ConvergenceEntry {
            n,
            sup_distance,
            downstream_max,
            tau_grid: tau_grid.clone(),
            mean_scaled,
            fluid_station1,
        });
    }
    Ok(ConvergenceReport { entries })
}
