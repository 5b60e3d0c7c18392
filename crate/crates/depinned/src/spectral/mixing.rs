//! Exact total-variation curves and mixing times via uniformization.

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::linalg::Propagator;

/// `½ Σ |a - b|`.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// Exact distribution evolution `ν_t = ν_0 P_t` for a reversible chain.
///
/// Work happens in symmetrized coordinates `φ = D^{-1/2} ν`, where the
/// propagator is symmetric; `ν_t = D^{1/2} e^{tA} φ`.
pub struct DistributionEvolver {
    prop: Propagator,
    sqrt_w: Vec<f64>,
    pub pi: Vec<f64>,
    phi: Vec<f64>,
    pub t: f64,
    tail_tol: f64,
}

impl DistributionEvolver {
    pub fn new(chain: &ReversibleChain, initial: &[f64]) -> Self {
        let (a, q) = chain.symmetrized();
        let prop = Propagator::new(&a, q);
        let sqrt_w: Vec<f64> = chain.weight.iter().map(|w| w.sqrt()).collect();
        let phi = initial
            .iter()
            .zip(&sqrt_w)
            .map(|(x, s)| x / s)
            .collect();
        Self {
            prop,
            sqrt_w,
            pi: chain.pi(),
            phi,
            t: 0.0,
            tail_tol: 1e-13,
        }
    }

    pub fn from_state(chain: &ReversibleChain, i: usize) -> Self {
        let mut mu = vec![0.0; chain.n];
        mu[i] = 1.0;
        Self::new(chain, &mu)
    }

    pub fn advance(&mut self, dt: f64) {
        assert!(dt >= 0.0);
        if dt > 0.0 {
            self.prop.apply(&mut self.phi, dt, self.tail_tol);
            self.t += dt;
        }
    }

    /// Current distribution `ν_t`.
    pub fn distribution(&self) -> Vec<f64> {
        self.phi
            .iter()
            .zip(&self.sqrt_w)
            .map(|(p, s)| p * s)
            .collect()
    }

    pub fn tv_to_pi(&self) -> f64 {
        tv_distance(&self.distribution(), &self.pi)
    }

    pub fn snapshot(&self) -> (f64, Vec<f64>) {
        (self.t, self.phi.clone())
    }

    pub fn restore(&mut self, snap: &(f64, Vec<f64>)) {
        self.t = snap.0;
        self.phi = snap.1.clone();
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TvCurvePoint {
    pub t: f64,
    pub tv: f64,
}

/// Worst-case mixing profile from the extremal starts.
pub struct MixingProfile {
    pub curve: Vec<TvCurvePoint>,
    pub t_mix: f64,
}

/// Mixing time to total-variation level `delta` from the given start, via
/// stepping on the monotone TV curve plus two refinement passes.  Errors out
/// if the curve stays above `delta` up to `horizon`.
pub fn mixing_time(
    chain: &ReversibleChain,
    start: usize,
    delta: f64,
    step: f64,
    horizon: f64,
) -> Result<MixingProfile> {
    let mut ev = DistributionEvolver::from_state(chain, start);
    let mut curve = vec![TvCurvePoint {
        t: 0.0,
        tv: ev.tv_to_pi(),
    }];
    if curve[0].tv <= delta {
        return Ok(MixingProfile { curve, t_mix: 0.0 });
    }
    let mut before;
    loop {
        before = ev.snapshot();
        ev.advance(step);
        let tv = ev.tv_to_pi();
        curve.push(TvCurvePoint { t: ev.t, tv });
        if tv <= delta {
            break;
        }
        if ev.t > horizon {
            return Err(Error::SearchFailed(format!(
                "TV still {tv:.3e} > {delta:.3e} at t = {:.3e} (horizon {horizon:.3e})",
                ev.t
            )));
        }
    }
    // two refinement passes on the bracketing interval
    let mut lo = before;
    let mut width = step;
    for _ in 0..2 {
        let fine = width / 16.0;
        ev.restore(&lo);
        loop {
            let prev = ev.snapshot();
            ev.advance(fine);
            if ev.tv_to_pi() <= delta {
                lo = prev;
                width = fine;
                break;
            }
        }
    }
    ev.restore(&lo);
    let mut t_mix = lo.0;
    let fine = width / 16.0;
    while ev.tv_to_pi() > delta {
        ev.advance(fine);
        t_mix = ev.t;
    }
    Ok(MixingProfile { curve, t_mix })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{build_generator, solve_spectrum, SolveOptions};

    #[test]
    fn tv_from_point_mass_at_time_zero() {
        // t=0 from the top state: TV = 1 - π(top)
        let pc = build_generator(3, 0.5, None, None, 12).unwrap();
        let ev = DistributionEvolver::from_state(&pc.chain, pc.top.unwrap());
        let pi = pc.chain.pi();
        assert!((ev.tv_to_pi() - (1.0 - pi[pc.top.unwrap()])).abs() < 1e-14);
    }

    #[test]
    fn two_state_mixing_time_closed_form() {
        // TV(t) = (1 - π(0))·e^{-(a+b)t} from state 0
        let (a, b) = (0.7, 0.3);
        let c = ReversibleChain::two_state(a, b);
        let pi0 = b / (a + b);
        let delta = 0.05;
        let expect = ((1.0 - pi0) / delta).ln() / (a + b);
        let prof = mixing_time(&c, 0, delta, 0.2, 1e4).unwrap();
        assert!(
            (prof.t_mix - expect).abs() < 2e-3 * expect,
            "{} vs {}",
            prof.t_mix,
            expect
        );
    }

    #[test]
    fn relaxation_bounds_mixing() {
        // T_rel ≤ T_mix(1/2e) ≤ (1 - ln π_*)·T_rel at a small size
        let pc = build_generator(4, 0.5, None, None, 12).unwrap();
        let spec = solve_spectrum(&pc.chain, &SolveOptions::default()).unwrap();
        let delta = 1.0 / (2.0 * std::f64::consts::E);
        let prof = mixing_time(
            &pc.chain,
            pc.top.unwrap(),
            delta,
            spec.t_rel / 4.0,
            1e5 * spec.t_rel,
        )
        .unwrap();
        let pi = pc.chain.pi();
        let pi_star = pi.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spec.t_rel <= prof.t_mix * (1.0 + 1e-9));
        assert!(prof.t_mix <= (1.0 - pi_star.ln()) * spec.t_rel);
    }
}
