//! The single-crossing birth–death chain.
//!
//! With exactly one crossing at `x ∈ E_L`, the sign field performs a
//! nearest-neighbour walk.  Two stationary laws are used: the projection of
//! the polymer equilibrium (exact, from the sign chain, small `L`) and the
//! closed-form surrogate `ρ₀(x) ∝ (L+x)^{-3/2}(L-x)^{-3/2}`, which scales to
//! `L ~ 10⁵` through Sturm bisection on the symmetrized tridiagonal matrix.
//! Both relax on the `L^{5/2}` scale; the ramp test function certifies the
//! matching upper bound.

use crate::error::{Error, Result};
use crate::linalg::tridiag_eigenvalue;
use crate::spectral::SigmaChain;

/// Tridiagonal reversible chain on the internal even sublattice.
#[derive(Clone, Debug)]
pub struct BirthDeathChain {
    pub l: usize,
    /// Site positions, ascending (paper coordinates).
    pub positions: Vec<i64>,
    /// Unnormalized stationary weights.
    pub weights: Vec<f64>,
    /// `up[i]`: rate `positions[i] → positions[i+1]`.
    pub up: Vec<f64>,
    /// `down[i]`: rate `positions[i+1] → positions[i]`.
    pub down: Vec<f64>,
}

impl BirthDeathChain {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Smallest nonzero eigenvalue of `-𝓛` via Sturm bisection on the
    /// symmetrized tridiagonal form.
    pub fn gap(&self) -> Result<f64> {
        let n = self.len();
        if n < 2 {
            return Err(Error::Degenerate(
                "birth-death chain needs at least two sites".into(),
            ));
        }
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n - 1];
        for i in 0..n {
            let u = if i + 1 < n { self.up[i] } else { 0.0 };
            let d = if i > 0 { self.down[i - 1] } else { 0.0 };
            diag[i] = u + d;
        }
        for i in 0..n - 1 {
            off[i] = -(self.up[i] * self.down[i]).sqrt();
        }
        Ok(tridiag_eigenvalue(&diag, &off, 1, 1e-15))
    }

    /// Variational upper bound from the ramp `φ(x) = clamp(2x/L, -1, 1)`
    /// (−1 below `-L/2`, +1 above `L/2`, linear in between):
    /// `𝓔(φ,φ)/Var(φ) ≥ gap`.
    pub fn ramp_upper_bound(&self) -> f64 {
        let l = self.l as f64;
        let phi: Vec<f64> = self
            .positions
            .iter()
            .map(|&x| (2.0 * x as f64 / l).clamp(-1.0, 1.0))
            .collect();
        let z: f64 = self.weights.iter().sum();
        let mean: f64 = self
            .weights
            .iter()
            .zip(&phi)
            .map(|(w, p)| w * p)
            .sum::<f64>()
            / z;
        let var: f64 = self
            .weights
            .iter()
            .zip(&phi)
            .map(|(w, p)| w * (p - mean) * (p - mean))
            .sum::<f64>()
            / z;
        let mut dirichlet = 0.0;
        for i in 0..self.len() - 1 {
            let d = phi[i + 1] - phi[i];
            dirichlet += self.weights[i] / z * self.up[i] * d * d;
        }
        dirichlet / var
    }
}

/// Closed-form chain: `ρ₀(x) ∝ (L+x)^{-3/2}(L-x)^{-3/2}` on the internal
/// even sublattice, up-rates 1, down-rates fixed by detailed balance.
pub fn closed_form_single_crossing(l: usize) -> Result<BirthDeathChain> {
    if l < 2 {
        return Err(Error::Degenerate("need L ≥ 2".into()));
    }
    let li = l as i64;
    let positions: Vec<i64> = (1..l).map(|j| -li + 2 * j as i64).collect();
    let weights: Vec<f64> = positions
        .iter()
        .map(|&x| ((li + x) as f64).powf(-1.5) * ((li - x) as f64).powf(-1.5))
        .collect();
    let n = positions.len();
    let up = vec![1.0; n - 1];
    let down: Vec<f64> = (0..n - 1).map(|i| weights[i] / weights[i + 1]).collect();
    Ok(BirthDeathChain {
        l,
        positions,
        weights,
        up,
        down,
    })
}

/// Exact single-crossing chain extracted from a projected sign chain:
/// states with one crossing and `+` on the left, with the chain's own
/// stationary weights and flip rates.
pub fn from_sigma_chain(sc: &SigmaChain) -> Result<BirthDeathChain> {
    let l = sc.l;
    if l < 2 {
        return Err(Error::Degenerate("need L ≥ 2".into()));
    }
    let li = l as i64;
    let mut positions = Vec::with_capacity(l - 1);
    let mut weights = Vec::with_capacity(l - 1);
    let mut idx = Vec::with_capacity(l - 1);
    for j in 1..l {
        // `+` on odd sites 0..j, `-` afterwards: crossing at -L + 2j
        let mask = (1u32 << j) - 1;
        let i = sc
            .index_of(mask)
            .ok_or_else(|| Error::Degenerate("single-crossing state pruned".into()))?;
        positions.push(-li + 2 * j as i64);
        weights.push(sc.chain.weight[i]);
        idx.push(i);
    }
    let n = positions.len();
    let mut up = Vec::with_capacity(n - 1);
    let mut down = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        up.push(sc.chain.rate(idx[i], idx[i + 1]));
        down.push(sc.chain.rate(idx[i + 1], idx[i]));
    }
    Ok(BirthDeathChain {
        l,
        positions,
        weights,
        up,
        down,
    })
}

/// Exact gap and ramp upper bound for either kind of single-crossing chain.
pub fn single_crossing_gap(chain: &BirthDeathChain) -> Result<(f64, f64)> {
    Ok((chain.gap()?, chain.ramp_upper_bound()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_small_instance() {
        // L=4: states {-2, 0, 2}; ρ₀(0)/ρ₀(±2) = (16·16)^{-3/2}/(12·... )
        let bd = closed_form_single_crossing(4).unwrap();
        assert_eq!(bd.positions, vec![-2, 0, 2]);
        let rho0 = 16f64.powf(-1.5);
        let rho2 = 6f64.powf(-1.5) * 2f64.powf(-1.5);
        assert!((bd.weights[1] / bd.weights[2] - rho0 / rho2).abs() < 1e-14);
        // ρ₀(0)/ρ₀(2) = (12/16)^{3/2} = (3/4)^{3/2}
        assert!((rho0 / rho2 - 0.75f64.powf(1.5)).abs() < 1e-15);
        // 3×3 gap is positive and below the ramp bound
        let (gap, bound) = single_crossing_gap(&bd).unwrap();
        assert!(gap > 0.0 && gap <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn gap_matches_dense_solver_small() {
        let bd = closed_form_single_crossing(8).unwrap();
        let n = bd.len();
        let mut triplets = Vec::new();
        for i in 0..n - 1 {
            triplets.push((i as u32, (i + 1) as u32, bd.up[i]));
            triplets.push(((i + 1) as u32, i as u32, bd.down[i]));
        }
        let chain =
            crate::chain::ReversibleChain::new("bd", n, triplets, bd.weights.clone()).unwrap();
        let dense =
            crate::spectral::solve_spectrum(&chain, &crate::spectral::SolveOptions::default())
                .unwrap();
        let sturm = bd.gap().unwrap();
        assert!((dense.gap - sturm).abs() < 1e-10 * dense.gap);
    }

    #[test]
    fn scaling_slope_is_minus_five_halves() {
        // quick pre-check at modest sizes; the acceptance suite runs 2^6..2^14
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 6..=10 {
            let l = 1usize << k;
            let bd = closed_form_single_crossing(l).unwrap();
            xs.push((l as f64).ln());
            ys.push(bd.gap().unwrap().ln());
        }
        let fit = crate::mc::stats::linear_fit(&xs, &ys);
        assert!(
            (fit.slope + 2.5).abs() < 0.15,
            "slope {} off the -5/2 law",
            fit.slope
        );
    }
}
