//! Censored dynamics: updates at sites outside the scheduled region are
//! discarded (their rings are still consumed, so the clock structure is the
//! one of the uncensored run).

use crate::error::{Error, Result};
use crate::mc::engine::{DynamicsSpec, Engine, Observable, Simulation, TrajectoryRecord};
use crate::mc::rng::StreamRng;
use crate::path::PathConfig;

/// Consecutive windows `[t_start, t_end)` with an allowed-site mask over the
/// interior sites `x = -L+1..L-1` (index `x + L - 1`).
#[derive(Clone, Debug)]
pub struct CensorSchedule {
    pub l: usize,
    /// `(t_start, t_end, allowed)`, ascending and disjoint.
    pub windows: Vec<(f64, f64, Vec<bool>)>,
}

impl CensorSchedule {
    pub fn new(l: usize, windows: Vec<(f64, f64, Vec<bool>)>) -> Result<Self> {
        let n_sites = 2 * l - 1;
        let mut prev_end = 0.0;
        for (k, (a, b, mask)) in windows.iter().enumerate() {
            if mask.len() != n_sites {
                return Err(Error::Mismatch(format!(
                    "window {k}: allowed mask has {} entries for {n_sites} sites",
                    mask.len()
                )));
            }
            if *a < prev_end - 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "window {k} starting at {a} overlaps the previous one ending at {prev_end}"
                )));
            }
            if *b <= *a {
                return Err(Error::InvalidConfig(format!(
                    "window {k} is empty: [{a}, {b})"
                )));
            }
            if (*a - prev_end).abs() > 1e-12 {
                return Err(Error::InvalidConfig(format!(
                    "window {k} leaves a gap: starts at {a}, previous ended at {prev_end}"
                )));
            }
            prev_end = *b;
        }
        Ok(Self { l, windows })
    }

    pub fn horizon(&self) -> f64 {
        self.windows.last().map_or(0.0, |w| w.1)
    }

    fn allowed(&self, t: f64, site_idx: usize) -> bool {
        for (a, b, mask) in &self.windows {
            if t >= *a && t < *b {
                return mask[site_idx];
            }
        }
        true // past the schedule: unconstrained
    }

    /// All sites allowed for the whole horizon (null censoring).
    pub fn null(l: usize, horizon: f64) -> Self {
        Self {
            l,
            windows: vec![(0.0, horizon, vec![true; 2 * l - 1])],
        }
    }

    /// One site frozen forever.
    pub fn freeze_site(l: usize, horizon: f64, x: i64) -> Self {
        let mut allowed = vec![true; 2 * l - 1];
        allowed[(x + l as i64 - 1) as usize] = false;
        Self {
            l,
            windows: vec![(0.0, horizon, allowed)],
        }
    }
}

/// Three-phase schedule used for one-phase relaxation: run the bulk, then
/// only the two boundary collars, then the bulk again.  Window widths are
/// `ℓ` and `ℓ²` with `ℓ = max(1, round((ln L)^{1/4}))`; phase lengths are
/// `T₂ = L^{2+ε}` and `T₁ = L^{ε}`.
pub fn three_phase_schedule(l: usize, eps: f64) -> CensorSchedule {
    let ell = crate::path::default_ell(l);
    let li = l as i64;
    let t2 = (l as f64).powf(2.0 + eps);
    let t1 = (l as f64).powf(eps);
    let n_sites = 2 * l - 1;
    let site_x = |i: usize| i as i64 + 1 - li;
    let bulk: Vec<bool> = (0..n_sites)
        .map(|i| {
            let x = site_x(i);
            x >= -li + ell as i64 && x <= li - ell as i64
        })
        .collect();
    let collars: Vec<bool> = (0..n_sites)
        .map(|i| {
            let x = site_x(i);
            let e2 = (ell * ell) as i64;
            x <= -li + e2 || x >= li - e2
        })
        .collect();
    CensorSchedule {
        l,
        windows: vec![
            (0.0, t2, bulk.clone()),
            (t2, t2 + t1, collars),
            (t2 + t1, 2.0 * t2 + t1, bulk),
        ],
    }
}

/// Run the censored dynamics (naive engine), sampling observables at the
/// given times.
pub fn censored_run(
    spec: &DynamicsSpec,
    schedule: &CensorSchedule,
    eta0: &PathConfig,
    sample_times: &[f64],
    observables: &[Observable],
    seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    if spec.engine != Engine::Naive {
        return Err(Error::InvalidConfig(
            "censoring needs the naive engine (rings must be consumed)".into(),
        ));
    }
    if schedule.l != spec.l {
        return Err(Error::Mismatch("schedule half-length".into()));
    }
    let ell = crate::path::default_ell(spec.l);
    let mut sim = Simulation::new(spec, eta0, ell)?;
    let mut rng = StreamRng::new(seed, stream);
    let mut samples = Vec::with_capacity(sample_times.len());
    let mut sample_iter = sample_times.iter().copied().peekable();
    loop {
        let te = sim.next_event_time(&mut rng);
        while let Some(&ts) = sample_iter.peek() {
            if ts < te {
                samples.push((ts, observables.iter().map(|o| o.eval(&sim)).collect()));
                sample_iter.next();
            } else {
                break;
            }
        }
        if sample_iter.peek().is_none() {
            break;
        }
        let _ = sim.step_censored(&mut rng, |t, site_idx| schedule.allowed(t, site_idx));
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::engine::simulate_heatbath;
    use crate::path::maximal_path;

    #[test]
    fn null_censoring_is_identity() {
        let spec = DynamicsSpec::free(5, 0.5);
        let times = [0.5, 2.0, 7.5, 20.0];
        let obs = [Observable::TotalHeight, Observable::Zeros];
        let plain = simulate_heatbath(&spec, &maximal_path(5), &times, &obs, 42, 3).unwrap();
        let sched = CensorSchedule::null(5, 1e9);
        let cens = censored_run(&spec, &sched, &maximal_path(5), &times, &obs, 42, 3).unwrap();
        assert_eq!(plain.samples, cens.samples);
        assert_eq!(plain.final_path, cens.final_path);
    }

    #[test]
    fn frozen_site_never_flips() {
        let l = 4;
        let spec = DynamicsSpec::free(l, 0.5);
        let x = 1i64; // freeze site x=1
        let sched = CensorSchedule::freeze_site(l, 1e9, x);
        let eta0 = maximal_path(l);
        let h0 = eta0.heights()[(x + l as i64) as usize];
        let times = [50.0, 200.0];
        let obs = [Observable::Height(x)];
        let rec = censored_run(&spec, &sched, &eta0, &times, &obs, 7, 0).unwrap();
        for (_, vals) in &rec.samples {
            assert_eq!(vals[0] as i32, h0);
        }
    }

    #[test]
    fn overlapping_windows_rejected() {
        let l = 3;
        let a = vec![true; 5];
        assert!(CensorSchedule::new(
            l,
            vec![(0.0, 2.0, a.clone()), (1.5, 3.0, a.clone())]
        )
        .is_err());
        assert!(CensorSchedule::new(
            l,
            vec![(0.0, 2.0, a.clone()), (2.5, 3.0, a)]
        )
        .is_err());
    }
}
