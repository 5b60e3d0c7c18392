//! Killed processes and quasi-stationary distributions.
//!
//! Killing the chain on a set `Γ` restricts the symmetrized generator to the
//! principal submatrix on `Γ^c` (the diagonal keeps the *full* exit rates,
//! including jumps into `Γ`).  That submatrix is negative definite; its top
//! eigenpair gives the decay rate `γ_Γ` and the positive eigenfunction whose
//! `π`-tilt is the quasi-stationary distribution.  Starting from it, the
//! hitting time of `Γ` is exactly exponential with rate `γ_Γ`; the survival
//! curve below reproduces that by uniformization, which is the two-route
//! check used in the acceptance suite.

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::linalg::{cg, lowest_eigenpair, Csr, Propagator};

/// The killed system on `Γ^c`, in symmetrized coordinates.
pub struct KilledSystem {
    /// Full-space indices of the surviving states.
    pub alive: Vec<usize>,
    /// `-A_Γ` (positive definite).
    b: Csr,
    q: f64,
    sqrt_w: Vec<f64>,
}

impl KilledSystem {
    pub fn new(chain: &ReversibleChain, killed: &[bool]) -> Result<Self> {
        if killed.len() != chain.n {
            return Err(Error::Mismatch("killed mask length".into()));
        }
        let n_killed = killed.iter().filter(|&&k| k).count();
        if n_killed == 0 || n_killed == chain.n {
            return Err(Error::InvalidConfig(
                "the killed set must be a proper nonempty subset".into(),
            ));
        }
        let keep: Vec<bool> = killed.iter().map(|&k| !k).collect();
        let (triplets, weight, alive) = chain.sub_rates(&keep);
        // full-chain exit rates on the diagonal
        let full_exit = chain.exit_rates();
        let m = alive.len();
        let mut b_triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(triplets.len() + m);
        for (i, j, v) in &triplets {
            let a = v * (weight[*i as usize] / weight[*j as usize]).sqrt();
            b_triplets.push((*i, *j, -a));
        }
        let mut q = f64::MIN_POSITIVE;
        for (i, &old) in alive.iter().enumerate() {
            b_triplets.push((i as u32, i as u32, full_exit[old]));
            q = q.max(full_exit[old]);
        }
        let b = Csr::from_triplets(m, b_triplets);
        // irreducibility of the killed semigroup on Γ^c
        let sub = ReversibleChain::new("killed-sub", m, triplets, weight.clone())?;
        sub.check_irreducible().map_err(|_| {
            Error::Disconnected("the surviving set is not connected under killed dynamics".into())
        })?;
        let sqrt_w = weight.iter().map(|w| w.sqrt()).collect();
        Ok(Self {
            alive,
            b,
            q,
            sqrt_w,
        })
    }

    /// Survival probabilities `P^μ(τ_Γ > t)` at the given times (ascending),
    /// for an initial distribution on the full space (mass on `Γ` is dead on
    /// arrival).
    pub fn survival(&self, mu_full: &[f64], times: &[f64], tail_tol: f64) -> Vec<f64> {
        let m = self.alive.len();
        // φ = D^{-1/2} μ restricted to the survivors
        let mut phi: Vec<f64> = (0..m)
            .map(|i| mu_full[self.alive[i]] / self.sqrt_w[i])
            .collect();
        // e^{tA_Γ} = e^{-t B}
        let mut a = self.b.clone();
        for v in a.val.iter_mut() {
            *v = -*v;
        }
        let prop = Propagator::new(&a, self.q);
        let mut out = Vec::with_capacity(times.len());
        let mut t_cur = 0.0;
        for &t in times {
            assert!(t >= t_cur, "times must be ascending");
            if t > t_cur {
                prop.apply(&mut phi, t - t_cur, tail_tol);
                t_cur = t;
            }
            let mass: f64 = phi.iter().zip(&self.sqrt_w).map(|(p, s)| p * s).sum();
            out.push(mass);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct KilledAnalysis {
    /// Decay rate of the killed semigroup (top eigenvalue magnitude).
    pub gamma: f64,
    /// Positive eigenfunction on the survivors, zero on the killed set
    /// (full-space indexing).
    pub g_killed: Vec<f64>,
    /// Quasi-stationary distribution (full-space indexing; zero on `Γ`).
    pub qsd: Vec<f64>,
    /// Expected hitting times `E^x[τ_Γ]` (full-space indexing; zero on `Γ`).
    pub expected_hitting: Vec<f64>,
    pub residual: f64,
}

/// Top eigenpair of the killed generator, the quasi-stationary distribution
/// and exact expected hitting times.
pub fn qsd_analysis(chain: &ReversibleChain, killed: &[bool]) -> Result<KilledAnalysis> {
    let sys = KilledSystem::new(chain, killed)?;
    let m = sys.alive.len();
    let (gamma, w, residual) = lowest_eigenpair(&sys.b, &[], None, 3e-14, 400)?;
    // orient positive; the Perron eigenvector of the killed semigroup is
    // signless, so a sign flip fixes everything
    let total: f64 = w.iter().sum();
    let sgn = if total < 0.0 { -1.0 } else { 1.0 };
    let mut g_killed = vec![0.0; chain.n];
    for i in 0..m {
        g_killed[sys.alive[i]] = sgn * w[i] / sys.sqrt_w[i];
    }
    if g_killed.iter().any(|&x| x < -1e-9) {
        return Err(Error::Degenerate(
            "killed eigenfunction is not positive; the killed space may be nearly reducible"
                .into(),
        ));
    }
    // ν_Γ ∝ π·g_Γ
    let mut qsd = vec![0.0; chain.n];
    let mut z = 0.0;
    for i in 0..chain.n {
        qsd[i] = chain.weight[i] * g_killed[i];
        z += qsd[i];
    }
    for x in qsd.iter_mut() {
        *x /= z;
    }
    // E^x[τ_Γ]: solve B z = D^{1/2}·1
    let rhs: Vec<f64> = sys.sqrt_w.clone();
    let mut zvec = Vec::new();
    cg(&sys.b, &rhs, &mut zvec, &[], 1e-13, 200_000)?;
    let mut expected_hitting = vec![0.0; chain.n];
    for i in 0..m {
        expected_hitting[sys.alive[i]] = zvec[i] / sys.sqrt_w[i];
    }
    Ok(KilledAnalysis {
        gamma,
        g_killed,
        qsd,
        expected_hitting,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn absorbing_two_state() {
        // Γ = {1}, exit rate a from state 0: γ = a, E[τ] = 1/a
        let a = 0.37;
        let c = ReversibleChain::two_state(a, 0.9);
        let r = qsd_analysis(&c, &[false, true]).unwrap();
        assert!((r.gamma - a).abs() < 1e-12);
        assert!((r.expected_hitting[0] - 1.0 / a).abs() < 1e-10);
        assert!((r.qsd[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qsd_survival_is_exactly_exponential() {
        // three-state birth-death chain, killed at the right end
        let c = ReversibleChain::new(
            "bd3",
            3,
            vec![
                (0, 1, 1.0),
                (1, 0, 0.5),
                (1, 2, 0.8),
                (2, 1, 0.4),
            ],
            vec![1.0, 2.0, 4.0],
        )
        .unwrap();
        let killed = vec![false, false, true];
        let r = qsd_analysis(&c, &killed).unwrap();
        let sys = KilledSystem::new(&c, &killed).unwrap();
        let times: Vec<f64> = (0..40).map(|k| 0.25 * k as f64).collect();
        let surv = sys.survival(&r.qsd, &times, 1e-14);
        for (k, &t) in times.iter().enumerate() {
            let expect = (-r.gamma * t).exp();
            assert!(
                (surv[k] - expect).abs() < 1e-10,
                "t={t}: {} vs {expect}",
                surv[k]
            );
        }
    }

    #[test]
    fn rejects_trivial_killed_sets() {
        let c = ReversibleChain::two_state(1.0, 1.0);
        assert!(qsd_analysis(&c, &[false, false]).is_err());
        assert!(qsd_analysis(&c, &[true, true]).is_err());
    }
}
