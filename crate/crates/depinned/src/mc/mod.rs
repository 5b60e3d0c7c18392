//! Event-driven continuous-time Monte Carlo: heat-bath engines, the grand
//! monotone coupling, censoring schedules, hitting-time sampling, and the
//! statistics used to judge the runs.

pub mod censor;
pub mod coupling;
pub mod engine;
pub mod hitting;
pub mod rng;
pub mod stats;

pub use censor::{censored_run, three_phase_schedule, CensorSchedule};
pub use coupling::{
    extremal_coalescence_batch, gap_estimate_from_coalescence, CoalescenceBatch, GapEstimate,
    GrandCoupling,
};
pub use engine::{
    simulate_heatbath, DynamicsSpec, Engine, Observable, Simulation, TrajectoryRecord,
};
pub use hitting::{
    hitting_time_sample, tunnel_samples, HittingSample, OutsideSet, SignClassTable, Target,
};
pub use rng::StreamRng;
