//! Discrete-event simulation and analysis of random linear network coding
//! over lossy wireline and wireless packet networks.

pub mod coding;
pub mod config;
pub mod exponents;
pub mod flows;
pub mod fluidqueue;
pub mod galois;
pub mod network;
pub mod output;
pub mod rate;
pub mod rngstream;
pub mod simulator;
pub mod stats;
pub mod traffic;

pub use coding::{DecoderState, MessageSet, NodeMemory, Packet};
pub use config::ExperimentConfig;
pub use exponents::{ExponentEstimate, TailBounds};
pub use flows::{Cut, FlowDecomposition, FlowVector};
pub use fluidqueue::{ConvergenceReport, PathQueueSystem, QueueTrajectory};
pub use galois::{FieldElement, FieldSpec};
pub use network::{Arc, Hyperarc, Network, NetworkKind, NodeId};
pub use rate::Rate;
pub use rngstream::{substream, StreamKind};
pub use simulator::{OutcomeSummary, SimConfig, SimMode, TrialOutcome};
pub use traffic::{InjectionModel, Interarrival, LossModel, ProcessSpec, ReceptionEvent};

/// Version reported in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
