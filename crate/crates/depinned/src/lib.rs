//! Stochastic dynamics of a (1+1)-dimensional polymer over a repulsive line,
//! in the delocalized regime of the pinning strength.
//!
//! The state space is the set of lattice bridges `η: {-L,…,L} → ℤ` with
//! `η_{-L} = η_L = 0` and unit increments.  Each interior zero of the path
//! carries a weight `λ`; the heat-bath single-site dynamics is reversible for
//! that measure.  For `λ < 1` the equilibrium splits into a mostly-positive
//! and a mostly-negative phase, and the relaxation is governed by rare sign
//! changes whose effective dynamics is a heavy-tailed birth–death motion of
//! crossings.
//!
//! The crate provides four layers:
//!
//! - [`path`] / [`combin`]: configurations, the pointwise partial order,
//!   crossing/zero statistics, and phase classification.
//! - [`equilibrium`]: exact partition functions (free and wall), excursion
//!   kernels, and closed-form marginals validated against brute-force
//!   enumeration (an exact rational mode is available at small sizes).
//! - [`chain`] / [`spectral`] / [`linalg`]: exact generators, spectral gaps,
//!   principal eigenfunctions, killed processes and quasi-stationary
//!   distributions, total-variation mixing profiles, and decomposition
//!   bounds.  All semigroup evaluation is done by uniformization on the
//!   symmetrized generator with a controlled truncation error.
//! - [`mc`] / [`effective`]: event-driven continuous-time Monte Carlo with a
//!   grand monotone coupling and censoring schedules, plus the effective
//!   crossing dynamics (single-crossing chain, n-particle resampling
//!   dynamics, block couplings, variational quotients).
//!
//! Data-parallel inner loops (replica batches, sparse mat-vecs, pair sweeps)
//! go through [`par`], which uses rayon when the `parallel` feature (default)
//! is enabled and plain iterators otherwise.

pub mod chain;
pub mod combin;
pub mod effective;
pub mod equilibrium;
pub mod error;
pub mod linalg;
pub mod mc;
pub mod par;
pub mod path;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
