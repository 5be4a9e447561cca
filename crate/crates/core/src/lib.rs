//! Simulation and analysis of the wake-up problem on multi-channel
//! single-hop radio networks.
//!
//! * [`model`]: round semantics (collisions, no collision detection, jamming).
//! * [`schedules`]: section geometry, randomized transmission arrays and the
//!   array file format.
//! * [`protocols`]: Channel-Screening and the array-driven Wake-Up protocol.
//! * [`analysis`]: stage census, Ψ, interval classification, isolated
//!   positions, selectivity and blocking-set oracles, closed-form bounds.
//! * [`harness`]: seeded Monte Carlo experiments, CSV/JSON reports,
//!   generate-and-verify, jamming sweeps.
//! * [`cli`]: the `wakeup` command-line front end.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod harness;
pub mod model;
pub mod protocols;
pub mod rng;
pub mod schedules;

pub use error::{Error, Result};
pub use model::{
    ActivationPattern, ChannelFeedback, ChannelId, NetworkConfig, RoundOutcome, StationId,
    TimeStep, TransmissionDecision,
};
pub use protocols::{ScreeningConfig, SimulationResult};
pub use schedules::{ScaleConstant, ScheduleKind, SectionSchedule, StageIndex, TransmissionArray};
