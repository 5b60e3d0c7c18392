//! Effective crossing dynamics: the single-crossing birth–death chain, the
//! n-particle conditional-resampling dynamics and its couplings, and the
//! variational machinery for the sign-chain relaxation time.

mod couplings;
mod particles;
mod sigma_quotient;
mod single_crossing;

pub use couplings::{block_coupling_experiment, epsilon1_experiment, BlockReport, Epsilon1Report};
pub use particles::{
    conditional_particle_law, particle_exact, ConditionalLaw, ParticleExact, ParticleSim,
};
pub use sigma_quotient::{
    sigma_quotient_exact, sigma_quotient_mc, zeta_band_probability, QuotientReport, SigmaSampler,
};
pub use single_crossing::{
    closed_form_single_crossing, from_sigma_chain, single_crossing_gap, BirthDeathChain,
};
