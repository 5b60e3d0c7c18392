//! Grand monotone coupling: all replicas consume one shared stream of
//! `(waiting time, site, uniform)` triples.  The shared-uniform update rule
//! preserves the pointwise partial order, and that is asserted — not
//! sampled — at every event.

use crate::error::{Error, Result};
use crate::mc::engine::{DynamicsSpec, Engine, Simulation};
use crate::mc::rng::StreamRng;
use crate::mc::stats::{linear_fit, LinearFit};
use crate::par;
use crate::path::{leq, maximal_path, minimal_path, PathConfig};

pub struct GrandCoupling {
    pub sims: Vec<Simulation>,
    /// Pairs `(i, j)` with `η_i(0) ≤ η_j(0)`; order is asserted for these.
    ordered_pairs: Vec<(usize, usize)>,
    /// Site discrepancy counts of each replica against replica 0.
    diffs: Vec<usize>,
    pub t: f64,
    pub events: u64,
    n_sites: u64,
    l: i64,
}

impl GrandCoupling {
    pub fn new(spec: &DynamicsSpec, initials: &[PathConfig], ell: usize) -> Result<Self> {
        if spec.engine != Engine::Naive {
            return Err(Error::InvalidConfig(
                "the grand coupling drives replicas through the naive engine".into(),
            ));
        }
        if initials.len() < 2 {
            return Err(Error::InvalidConfig("need at least two replicas".into()));
        }
        let sims: Vec<Simulation> = initials
            .iter()
            .map(|eta| Simulation::new(spec, eta, ell))
            .collect::<Result<_>>()?;
        let mut ordered_pairs = Vec::new();
        for i in 0..initials.len() {
            for j in 0..initials.len() {
                if i != j && leq(&initials[i], &initials[j])? {
                    ordered_pairs.push((i, j));
                }
            }
        }
        let diffs = sims
            .iter()
            .map(|s| {
                s.heights
                    .iter()
                    .zip(&sims[0].heights)
                    .filter(|(a, b)| a != b)
                    .count()
            })
            .collect();
        Ok(Self {
            n_sites: (2 * spec.l - 1) as u64,
            l: spec.l as i64,
            sims,
            ordered_pairs,
            diffs,
            t: 0.0,
            events: 0,
        })
    }

    /// One shared event.  Panics if the partial order between initially
    /// ordered replicas is ever violated (that would be an implementation
    /// bug, not randomness).
    pub fn step(&mut self, rng: &mut StreamRng) {
        self.t += rng.exponential(self.n_sites as f64);
        let x = rng.below(self.n_sites) as i64 + 1 - self.l;
        let u = rng.uniform();
        let p = (x + self.l) as usize;
        let h0_old = self.sims[0].heights[p];
        let mut h0_new = h0_old;
        for (r, sim) in self.sims.iter_mut().enumerate() {
            let old = sim.heights[p];
            sim.apply_update(x, u);
            let new = sim.heights[p];
            if r == 0 {
                h0_new = new;
            } else {
                let was = (old != h0_old) as usize;
                let is = (new != h0_new) as usize;
                self.diffs[r] = self.diffs[r] + is - was;
            }
        }
        self.events += 1;
        for &(i, j) in &self.ordered_pairs {
            assert!(
                self.sims[i].heights[p] <= self.sims[j].heights[p],
                "monotone coupling violated the order at site {x} (t = {})",
                self.t
            );
        }
    }

    /// All replicas identical?
    pub fn coalesced(&self) -> bool {
        self.diffs.iter().all(|&d| d == 0)
    }

    /// Run until coalescence or the horizon; returns the coalescence time.
    pub fn run_to_coalescence(&mut self, horizon: f64, rng: &mut StreamRng) -> Option<f64> {
        while !self.coalesced() {
            if self.t >= horizon {
                return None;
            }
            self.step(rng);
        }
        Some(self.t)
    }
}

/// Summary of a batch of coupled runs (spec-level record of one run is the
/// coalescence time plus the order flags, which are hard assertions here).
#[derive(Clone, Debug)]
pub struct CoalescenceBatch {
    pub times: Vec<Option<f64>>,
    pub events_total: u64,
}

/// Coalescence times of the extremal pair over independent replicas.
pub fn extremal_coalescence_batch(
    spec: &DynamicsSpec,
    horizon: f64,
    n_runs: usize,
    seed: u64,
) -> Result<CoalescenceBatch> {
    let ell = crate::path::default_ell(spec.l);
    let top = maximal_path(spec.l);
    let bot = minimal_path(spec.l);
    let runs = par::map_indexed_auto(n_runs, |r| {
        let mut rng = StreamRng::new(seed, r as u64);
        let mut gc = GrandCoupling::new(spec, &[bot.clone(), top.clone()], ell)
            .expect("coupling construction");
        let tau = gc.run_to_coalescence(horizon, &mut rng);
        (tau, gc.events)
    });
    Ok(CoalescenceBatch {
        times: runs.iter().map(|r| r.0).collect(),
        events_total: runs.iter().map(|r| r.1).sum(),
    })
}

#[derive(Clone, Debug)]
pub struct GapEstimate {
    pub gap: f64,
    /// ±2·(regression standard error) band on the slope.
    pub band: (f64, f64),
    pub fit: LinearFit,
    pub n_runs: usize,
    pub n_coalesced: usize,
}

/// Estimate the spectral gap from the decay of `P(extremal replicas still
/// differ at t)`: regression of the log survival curve on its linear tail
/// (survival between `win_hi` and `win_lo`, default 0.5 / 0.02).
pub fn gap_estimate_from_coalescence(
    spec: &DynamicsSpec,
    horizon: f64,
    n_runs: usize,
    seed: u64,
    window: Option<(f64, f64)>,
) -> Result<GapEstimate> {
    let (win_lo, win_hi) = window.unwrap_or((0.02, 0.5));
    let batch = extremal_coalescence_batch(spec, horizon, n_runs, seed)?;
    let mut finite: Vec<f64> = batch.times.iter().flatten().copied().collect();
    let n_coalesced = finite.len();
    finite.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = n_runs as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &t) in finite.iter().enumerate() {
        let surv = (n_runs - k - 1) as f64 / n;
        if surv >= win_lo && surv <= win_hi {
            xs.push(t);
            ys.push(surv.ln());
        }
    }
    if xs.len() < 10 {
        return Err(Error::SearchFailed(format!(
            "no linear tail: only {} survival points inside [{win_lo}, {win_hi}]",
            xs.len()
        )));
    }
    let fit = linear_fit(&xs, &ys);
    let gap = -fit.slope;
    let band = (
        -(fit.slope + 2.0 * fit.slope_se),
        -(fit.slope - 2.0 * fit.slope_se),
    );
    Ok(GapEstimate {
        gap,
        band,
        fit,
        n_runs,
        n_coalesced,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_initials_coalesce_immediately() {
        let spec = DynamicsSpec::free(4, 0.5);
        let eta = maximal_path(4);
        let gc = GrandCoupling::new(&spec, &[eta.clone(), eta], 1).unwrap();
        assert!(gc.coalesced());
    }

    #[test]
    fn order_preserved_over_many_events() {
        let spec = DynamicsSpec::free(6, 0.5);
        let mut gc = GrandCoupling::new(
            &spec,
            &[minimal_path(6), maximal_path(6)],
            1,
        )
        .unwrap();
        let mut rng = StreamRng::new(5, 0);
        for _ in 0..50_000 {
            gc.step(&mut rng); // panics on violation
        }
    }

    #[test]
    fn embedded_two_state_gap() {
        // L=1 is a two-state chain with rates ½, ½: gap = 1; the coupling
        // coalesces at the first shared ring, so τ ~ Exp(1)
        let spec = DynamicsSpec::free(1, 0.7);
        let est = gap_estimate_from_coalescence(&spec, 50.0, 4000, 99, None).unwrap();
        assert!(
            (est.gap - 1.0).abs() < 0.1,
            "two-state gap estimate {}",
            est.gap
        );
    }
}
