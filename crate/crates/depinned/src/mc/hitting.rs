//! Tunneling / hitting-time sampling with independent replica streams.

use crate::combin::BinomTable;
use crate::error::Result;
use crate::mc::engine::{DynamicsSpec, Simulation};
use crate::mc::rng::StreamRng;
use crate::par;
use crate::path::PathConfig;

/// Sign-class membership through the principal eigenfunction: a state is in
/// the negative class iff `g < -tol`, positive iff `g > tol`; states inside
/// the numerical dead band belong to neither.
pub struct SignClassTable {
    pub l: usize,
    g: Vec<f64>,
    tol_abs: f64,
    binom: BinomTable,
}

impl SignClassTable {
    /// `g` indexed by the canonical full-space rank; `zero_tol` is relative
    /// to `‖g‖_∞`.
    pub fn new(l: usize, g: Vec<f64>, zero_tol: f64) -> Self {
        let sup = g.iter().fold(0f64, |a, &x| a.max(x.abs()));
        Self {
            l,
            g,
            tol_abs: zero_tol * sup,
            binom: BinomTable::new(2 * l),
        }
    }

    #[inline]
    pub fn value(&self, mask: u32) -> f64 {
        self.g[self.binom.rank(mask, self.l) as usize]
    }

    /// -1, 0, +1.
    #[inline]
    pub fn class(&self, mask: u32) -> i8 {
        let v = self.value(mask);
        if v > self.tol_abs {
            1
        } else if v < -self.tol_abs {
            -1
        } else {
            0
        }
    }
}

/// Where the run is heading.
pub enum Target<'a> {
    /// Strictly negative on the bulk window.
    BulkMinus,
    BulkPlus,
    /// Negative sign class of the principal eigenfunction.
    SignMinus(&'a SignClassTable),
    SignPlus(&'a SignClassTable),
}

impl Target<'_> {
    fn hit(&self, sim: &Simulation) -> bool {
        match self {
            Target::BulkMinus => sim.in_bulk_minus(),
            Target::BulkPlus => sim.in_bulk_plus(),
            Target::SignMinus(t) => t.class(sim.mask) == -1,
            Target::SignPlus(t) => t.class(sim.mask) == 1,
        }
    }
}

/// How the "outside both phases" occupation time is measured along the run.
pub enum OutsideSet<'a> {
    None,
    /// Complement of the two bulk windows.
    Bulk,
    /// Numerical dead band of the sign classes.
    SignClasses(&'a SignClassTable),
}

impl OutsideSet<'_> {
    fn outside(&self, sim: &Simulation) -> bool {
        match self {
            OutsideSet::None => false,
            OutsideSet::Bulk => !sim.in_bulk_plus() && !sim.in_bulk_minus(),
            OutsideSet::SignClasses(t) => t.class(sim.mask) == 0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct HittingSample {
    pub tau: f64,
    /// True when the horizon ran out first (`tau` then holds the horizon).
    pub censored: bool,
    /// Time spent outside both phases before `tau`.
    pub outside_time: f64,
    pub events: u64,
}

/// i.i.d. hitting-time samples from independent substreams; censored runs
/// are flagged, never dropped.
pub fn hitting_time_sample(
    spec: &DynamicsSpec,
    eta0: &PathConfig,
    target: &(impl Sync + Fn(&Simulation) -> bool),
    outside: &(impl Sync + Fn(&Simulation) -> bool),
    horizon: f64,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<HittingSample>> {
    let ell = crate::path::default_ell(spec.l);
    // validate the spec once before fanning out
    Simulation::new(spec, eta0, ell)?;
    Ok(par::map_indexed_auto(n_runs, |r| {
        let mut rng = StreamRng::new(seed, r as u64);
        let mut sim = Simulation::new(spec, eta0, ell).expect("validated above");
        let mut outside_time = 0.0;
        if target(&sim) {
            return HittingSample {
                tau: 0.0,
                censored: false,
                outside_time: 0.0,
                events: 0,
            };
        }
        let mut was_outside = outside(&sim);
        let mut t_prev = 0.0;
        loop {
            let te = sim.next_event_time(&mut rng);
            if te > horizon {
                if was_outside {
                    outside_time += horizon - t_prev;
                }
                return HittingSample {
                    tau: horizon,
                    censored: true,
                    outside_time,
                    events: sim.events,
                };
            }
            let changed = sim.step(&mut rng);
            if was_outside {
                outside_time += sim.t - t_prev;
            }
            t_prev = sim.t;
            if changed {
                if target(&sim) {
                    return HittingSample {
                        tau: sim.t,
                        censored: false,
                        outside_time,
                        events: sim.events,
                    };
                }
                was_outside = outside(&sim);
            }
        }
    }))
}

/// Convenience wrapper for the named targets.
pub fn tunnel_samples(
    spec: &DynamicsSpec,
    eta0: &PathConfig,
    target: &Target<'_>,
    outside: &OutsideSet<'_>,
    horizon: f64,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<HittingSample>> {
    let tf = |sim: &Simulation| target.hit(sim);
    let of = |sim: &Simulation| outside.outside(sim);
    hitting_time_sample(spec, eta0, &tf, &of, horizon, n_runs, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::{maximal_path, minimal_path};

    #[test]
    fn immediate_hit_is_time_zero() {
        let spec = DynamicsSpec::free(4, 0.5);
        let samples = tunnel_samples(
            &spec,
            &minimal_path(4),
            &Target::BulkMinus,
            &OutsideSet::None,
            10.0,
            3,
            1,
        )
        .unwrap();
        assert!(samples.iter().all(|s| s.tau == 0.0 && !s.censored));
    }

    #[test]
    fn censoring_flagged_not_dropped() {
        // a tiny horizon censors every run from the top
        let spec = DynamicsSpec::free(8, 0.5);
        let samples = tunnel_samples(
            &spec,
            &maximal_path(8),
            &Target::BulkMinus,
            &OutsideSet::Bulk,
            1e-3,
            5,
            2,
        )
        .unwrap();
        assert_eq!(samples.len(), 5);
        assert!(samples.iter().all(|s| s.censored && s.tau == 1e-3));
    }

    #[test]
    fn small_l_tunnel_times_reasonable() {
        // L=2, λ=0.5: the chain crosses quickly; none should censor
        let spec = DynamicsSpec::free(2, 0.5);
        let samples = tunnel_samples(
            &spec,
            &maximal_path(2),
            &Target::BulkMinus,
            &OutsideSet::Bulk,
            1e4,
            50,
            3,
        )
        .unwrap();
        assert!(samples.iter().all(|s| !s.censored));
        let mean: f64 = samples.iter().map(|s| s.tau).sum::<f64>() / 50.0;
        assert!(mean > 0.0 && mean < 100.0);
        // occupation outside both phases never exceeds the hitting time
        assert!(samples.iter().all(|s| s.outside_time <= s.tau + 1e-12));
    }
}
