//! Exact generator assembly and spectral analysis of the polymer dynamics:
//! gaps and principal eigenfunctions, killed processes and quasi-stationary
//! distributions, total-variation mixing profiles, the block decomposition
//! bound, and the projected sign-field chains.

mod crossings;
mod generator;
mod jerrum;
mod killed;
mod mixing;
mod sigma;
mod solve;

pub use crossings::{crossing_count_chain, CrossingCountChain};
pub use generator::{build_generator, PolymerChain, StateSpace};
pub use jerrum::{jerrum_bound, JerrumReport};
pub use killed::{qsd_analysis, KilledAnalysis, KilledSystem};
pub use mixing::{
    mixing_time, tv_distance, DistributionEvolver, MixingProfile, TvCurvePoint,
};
pub use sigma::{
    heat_bath_sigma_chain, projected_sigma_chain, projected_sigma_rate_formula, SigmaChain,
    SigmaKind,
};
pub use solve::{solve_spectrum, SolveOptions, SpectralResult};
