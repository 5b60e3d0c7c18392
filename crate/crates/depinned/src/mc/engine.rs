//! Event-driven continuous-time simulation of the heat-bath dynamics.
//!
//! The law: interior sites ring as independent rate-1 Poisson clocks; when
//! site `x` rings and its neighbours agree on `h`, the height resamples to
//! `h ± 1` — downward with probability `θ(h)` where `θ(±1)` carry the
//! pinning bias and `θ(h) = ½` otherwise; rings at frozen sites do nothing.
//!
//! The *naive* engine realizes exactly that: one global stream of rate
//! `2L-1`, a uniform site per ring, one uniform for the direction.  The
//! *active-set* engine skips sites that provably cannot change the state
//! (frozen neighbours, or the only alternative blocked by the floor/ceiling)
//! and rescales the waiting times by the active count, which leaves the law
//! of the state trajectory unchanged.  The naive engine is the oracle; the
//! two are cross-validated statistically.
//!
//! Every update goes through the shared-uniform rule `new = h - 1` iff
//! `u < θ(h)`, which is the monotone grand-coupling update: applying the
//! same `(site, u)` to ordered configurations preserves the order.

use crate::error::{Error, Result};
use crate::mc::rng::StreamRng;
use crate::path::{BoundaryPair, PathConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Naive,
    ActiveSet,
}

/// Dynamics parameters; two engines realize the same law.
#[derive(Clone)]
pub struct DynamicsSpec {
    pub l: usize,
    pub lambda: f64,
    pub bounds: Option<BoundaryPair>,
    /// Crossing/zero cap coefficient for the restricted dynamics
    /// (naive engine only).
    pub cap_coeff: Option<f64>,
    pub engine: Engine,
}

impl DynamicsSpec {
    pub fn free(l: usize, lambda: f64) -> Self {
        Self {
            l,
            lambda,
            bounds: None,
            cap_coeff: None,
            engine: Engine::Naive,
        }
    }

    pub fn interior_sites(&self) -> usize {
        2 * self.l - 1
    }
}

/// One replica of the dynamics.
pub struct Simulation {
    pub l: usize,
    lambda: f64,
    /// Heights indexed by `p = x + L`, length `2L+1`.
    pub heights: Vec<i32>,
    /// Step mask (bit `p` = step `+1`), maintained incrementally.
    pub mask: u32,
    floor: Option<Vec<i32>>,
    ceil: Option<Vec<i32>>,
    cap: Option<f64>,
    pub t: f64,
    /// Scheduled time of the next ring, if already drawn.
    pending: Option<f64>,
    pub events: u64,
    pub flips: u64,
    /// Number of window sites violating strict positivity / negativity
    /// (for O(1) phase-membership checks with the default window).
    viol_plus: usize,
    viol_minus: usize,
    win_lo: i64,
    win_hi: i64,
    active: Option<ActiveSet>,
}

struct ActiveSet {
    sites: Vec<u16>,
    pos: Vec<u16>, // pos[site index] = slot in `sites`, u16::MAX if absent
}

impl Simulation {
    pub fn new(spec: &DynamicsSpec, eta0: &PathConfig, ell: usize) -> Result<Self> {
        if eta0.half_len() != spec.l {
            return Err(Error::Mismatch("initial condition half-length".into()));
        }
        if let Some(b) = &spec.bounds {
            if !b.contains(eta0) {
                return Err(Error::InvalidConfig(
                    "initial condition violates the floor/ceiling".into(),
                ));
            }
        }
        if spec.cap_coeff.is_some() && spec.engine == Engine::ActiveSet {
            return Err(Error::InvalidConfig(
                "the active-set engine does not support the crossing/zero restriction".into(),
            ));
        }
        if 2 * spec.l > 28 {
            return Err(Error::Capacity {
                what: "half-length L",
                got: spec.l,
                bound_name: "step-mask width",
                bound: 14,
            });
        }
        let heights = eta0.heights();
        let l = spec.l as i64;
        let win_lo = -l + ell as i64 + 1;
        let win_hi = l - ell as i64 - 1;
        let mut sim = Self {
            l: spec.l,
            lambda: spec.lambda,
            mask: eta0.mask(),
            floor: spec.bounds.as_ref().map(|b| b.floor.heights()),
            ceil: spec.bounds.as_ref().map(|b| b.ceil.heights()),
            cap: spec.cap_coeff,
            t: 0.0,
            pending: None,
            events: 0,
            flips: 0,
            viol_plus: 0,
            viol_minus: 0,
            win_lo,
            win_hi,
            heights,
            active: None,
        };
        for x in win_lo..=win_hi {
            let v = sim.heights[(x + l) as usize];
            if v <= 0 {
                sim.viol_plus += 1;
            }
            if v >= 0 {
                sim.viol_minus += 1;
            }
        }
        if spec.engine == Engine::ActiveSet {
            let n_sites = 2 * spec.l - 1;
            let mut a = ActiveSet {
                sites: Vec::with_capacity(n_sites),
                pos: vec![u16::MAX; n_sites],
            };
            for s in 0..n_sites {
                if sim.site_active(s) {
                    a.pos[s] = a.sites.len() as u16;
                    a.sites.push(s as u16);
                }
            }
            sim.active = Some(a);
        }
        Ok(sim)
    }

    /// Down-move threshold: the shared-uniform rule moves down iff `u < θ(h)`.
    #[inline]
    fn theta(&self, h: i32) -> f64 {
        if h == 1 {
            self.lambda / (self.lambda + 1.0)
        } else if h == -1 {
            1.0 / (self.lambda + 1.0)
        } else {
            0.5
        }
    }

    /// Can the heat bath change the state at site slot `s` (0-based over
    /// interior sites)?
    fn site_active(&self, s: usize) -> bool {
        let p = s + 1;
        let h = self.heights[p - 1];
        if h != self.heights[p + 1] {
            return false;
        }
        let other = 2 * h - self.heights[p];
        if let Some(f) = &self.floor {
            if other < f[p] {
                return false;
            }
        }
        if let Some(c) = &self.ceil {
            if other > c[p] {
                return false;
            }
        }
        true
    }

    fn refresh_active(&mut self, p_changed: usize) {
        let n_sites = 2 * self.l - 1;
        // take the set out to appease the borrow checker
        let mut a = self.active.take().unwrap();
        for q in [p_changed.wrapping_sub(1), p_changed, p_changed + 1] {
            if q < 1 || q > n_sites {
                continue;
            }
            let s = q - 1;
            let now = self.site_active(s);
            let had = a.pos[s] != u16::MAX;
            if now && !had {
                a.pos[s] = a.sites.len() as u16;
                a.sites.push(s as u16);
            } else if !now && had {
                let slot = a.pos[s] as usize;
                let last = *a.sites.last().unwrap();
                a.sites[slot] = last;
                a.pos[last as usize] = slot as u16;
                a.sites.pop();
                a.pos[s] = u16::MAX;
            }
        }
        self.active = Some(a);
    }

    /// Apply the shared-uniform heat-bath update at interior site `x`
    /// (paper coordinates).  Returns true iff the state changed.
    pub fn apply_update(&mut self, x: i64, u: f64) -> bool {
        let l = self.l as i64;
        let p = (x + l) as usize;
        let h = self.heights[p - 1];
        if h != self.heights[p + 1] {
            return false;
        }
        let new = if u < self.theta(h) { h - 1 } else { h + 1 };
        let old = self.heights[p];
        if new == old {
            return false;
        }
        if let Some(f) = &self.floor {
            if new < f[p] {
                return false;
            }
        }
        if let Some(c) = &self.ceil {
            if new > c[p] {
                return false;
            }
        }
        if let Some(cap_coeff) = self.cap {
            if !self.flip_keeps_caps(p, cap_coeff) {
                return false;
            }
        }
        self.heights[p] = new;
        self.mask ^= 0b11 << (p - 1);
        self.flips += 1;
        if x >= self.win_lo && x <= self.win_hi {
            if old <= 0 {
                self.viol_plus -= 1;
            }
            if new <= 0 {
                self.viol_plus += 1;
            }
            if old >= 0 {
                self.viol_minus -= 1;
            }
            if new >= 0 {
                self.viol_minus += 1;
            }
        }
        if self.active.is_some() {
            self.refresh_active(p);
        }
        true
    }

    fn flip_keeps_caps(&self, p: usize, cap_coeff: f64) -> bool {
        // build the flipped configuration's statistics directly
        let mut h2 = self.heights.clone();
        h2[p] = 2 * h2[p - 1] - h2[p];
        let eta = PathConfig::from_heights(&h2).expect("flip of a valid path");
        crate::path::classify(&eta, 1, cap_coeff).few_crossings
    }

    /// Strictly positive on the bulk window?
    pub fn in_bulk_plus(&self) -> bool {
        self.viol_plus == 0
    }

    pub fn in_bulk_minus(&self) -> bool {
        self.viol_minus == 0
    }

    pub fn path(&self) -> PathConfig {
        PathConfig::from_heights(&self.heights).expect("simulation state is a valid path")
    }

    pub fn total_height(&self) -> i64 {
        self.heights.iter().map(|&h| h as i64).sum()
    }

    fn ring_rate(&self) -> f64 {
        match &self.active {
            None => (2 * self.l - 1) as f64,
            Some(a) => a.sites.len() as f64,
        }
    }

    /// Time of the next scheduled ring (drawn lazily, cached until consumed).
    pub fn next_event_time(&mut self, rng: &mut StreamRng) -> f64 {
        if let Some(t) = self.pending {
            return t;
        }
        let rate = self.ring_rate();
        let t = if rate > 0.0 {
            self.t + rng.exponential(rate)
        } else {
            f64::INFINITY
        };
        self.pending = Some(t);
        t
    }

    /// Consume the next ring and apply it.  Returns true iff the state
    /// changed.  Rings are consumed even when the update is null so the two
    /// engines stay exact-in-law.
    pub fn step(&mut self, rng: &mut StreamRng) -> bool {
        let te = self.next_event_time(rng);
        self.pending = None;
        self.t = te;
        self.events += 1;
        let x = match &self.active {
            None => {
                let s = rng.below((2 * self.l - 1) as u64) as i64;
                s + 1 - self.l as i64
            }
            Some(a) => {
                let slot = rng.below(a.sites.len() as u64) as usize;
                a.sites[slot] as i64 + 1 - self.l as i64
            }
        };
        let u = rng.uniform();
        self.apply_update(x, u)
    }

    /// Consume the next ring, applying the update only when the interior
    /// site index passes the filter (censoring; naive engine only — the
    /// discarded rings must keep consuming the clock).
    pub fn step_censored(
        &mut self,
        rng: &mut StreamRng,
        allowed: impl Fn(f64, usize) -> bool,
    ) -> bool {
        assert!(self.active.is_none(), "censoring drives the naive engine");
        let te = self.next_event_time(rng);
        self.pending = None;
        self.t = te;
        self.events += 1;
        let s = rng.below((2 * self.l - 1) as u64) as usize;
        let u = rng.uniform();
        if !allowed(te, s) {
            return false;
        }
        let x = s as i64 + 1 - self.l as i64;
        self.apply_update(x, u)
    }

    /// Advance the clock to `ts`, consuming every ring scheduled before it
    /// and calling the observer after each state change.
    pub fn advance_to(
        &mut self,
        ts: f64,
        rng: &mut StreamRng,
        mut on_change: impl FnMut(&Simulation),
    ) {
        loop {
            if self.next_event_time(rng) > ts {
                self.t = ts;
                return;
            }
            if self.step(rng) {
                on_change(self);
            }
        }
    }
}

/// Observables sampled along trajectories.
#[derive(Clone, Copy, Debug)]
pub enum Observable {
    TotalHeight,
    Height(i64),
    Zeros,
    Crossings,
    BulkPlus,
    BulkMinus,
}

impl Observable {
    pub fn eval(&self, sim: &Simulation) -> f64 {
        match self {
            Observable::TotalHeight => sim.total_height() as f64,
            Observable::Height(x) => sim.heights[(x + sim.l as i64) as usize] as f64,
            Observable::Zeros => {
                let st = crate::path::path_stats(&sim.path());
                st.zeros as f64
            }
            Observable::Crossings => {
                let st = crate::path::path_stats(&sim.path());
                st.crossings as f64
            }
            Observable::BulkPlus => sim.in_bulk_plus() as u8 as f64,
            Observable::BulkMinus => sim.in_bulk_minus() as u8 as f64,
        }
    }
}

/// Event log of one run: sampled observables, hitting data, final state.
#[derive(Clone, Debug)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub stream: u64,
    pub events: u64,
    pub flips: u64,
    /// `(t, observable values)` at the requested sample times.
    pub samples: Vec<(f64, Vec<f64>)>,
    pub final_path: PathConfig,
}

/// Simulate one trajectory, sampling the observables at the given times
/// (ascending).
pub fn simulate_heatbath(
    spec: &DynamicsSpec,
    eta0: &PathConfig,
    sample_times: &[f64],
    observables: &[Observable],
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    let ell = crate::path::default_ell(spec.l);
    let mut sim = Simulation::new(spec, eta0, ell)?;
    let mut rng = StreamRng::new(seed, stream);
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut last = 0.0;
    for &ts in sample_times {
        assert!(ts >= last, "sample times must be ascending");
        sim.advance_to(ts, &mut rng, |_| {});
        samples.push((ts, observables.iter().map(|o| o.eval(&sim)).collect()));
        last = ts;
    }
    Ok(TrajectoryRecord {
        seed,
        stream,
        events: sim.events,
        flips: sim.flips,
        samples,
        final_path: sim.path(),
    })
}
