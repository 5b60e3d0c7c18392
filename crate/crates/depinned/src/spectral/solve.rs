//! Spectral gap and principal eigenfunction of a reversible chain.
//!
//! The generator is conjugated by `diag(√π̃)`; the resulting symmetric
//! matrix has the same spectrum, its kernel is spanned by `√π̃`, and the gap
//! is the smallest eigenvalue after deflating that mode.  Small problems go
//! through dense Jacobi; everything else through deflated inverse iteration.

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::linalg::{self, jacobi_eigen, lowest_eigenpair, Csr};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// Orient the eigenfunction to be positive at this state.
    pub orient_state: Option<usize>,
    /// Index involution `i ↦ flip(i)` of a weight-preserving symmetry
    /// (`η ↦ -η` for the polymer).  Enables the antisymmetry diagnostics and
    /// a clean fallback when the gap eigenvalue is degenerate.
    pub flip_map: Option<Vec<u32>>,
    /// Seed vector for the inverse iteration (symmetrized coordinates).
    pub seed: Option<Vec<f64>>,
    /// Relative eigen-residual target (× twice the max exit rate).
    pub rel_tol: f64,
    /// Force the dense path below this size.
    pub dense_cutoff: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            orient_state: None,
            flip_map: None,
            seed: None,
            rel_tol: 3e-14,
            dense_cutoff: 400,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralResult {
    /// Smallest nonzero eigenvalue of `-𝓛`.
    pub gap: f64,
    pub t_rel: f64,
    /// Eigenfunction at `-gap`, unit norm in `L²(π)`.
    pub g: Vec<f64>,
    /// `‖𝓛g + gap·g‖₂` in the symmetrized coordinates.
    pub residual: f64,
    /// `max_i |g(i) + g(flip(i))| / ‖g‖_∞` when a flip map was supplied.
    pub antisym_defect: Option<f64>,
    /// States with `|g| ≤ zero_tol`·‖g‖_∞ (excluded from both sign classes).
    pub near_zero_states: usize,
    /// Tolerance used for the sign classes.
    pub zero_tol: f64,
}

impl SpectralResult {
    /// Strict sign classes `{g > 0}` / `{g < 0}`; numerically-null states
    /// belong to neither.
    pub fn sign_class(&self, positive: bool) -> Vec<bool> {
        let sup = self.g.iter().fold(0f64, |a, &x| a.max(x.abs()));
        let tol = self.zero_tol * sup;
        self.g
            .iter()
            .map(|&x| if positive { x > tol } else { x < -tol })
            .collect()
    }
}

/// Smallest nonzero eigenvalue of `-𝓛` and its eigenfunction.
pub fn solve_spectrum(chain: &ReversibleChain, opts: &SolveOptions) -> Result<SpectralResult> {
    if chain.n < 2 {
        return Err(Error::Degenerate("chain needs at least two states".into()));
    }
    let (a, _q) = chain.symmetrized();
    let mut b = a;
    for v in b.val.iter_mut() {
        *v = -*v;
    }
    let sqrt_w: Vec<f64> = chain.weight.iter().map(|w| w.sqrt()).collect();
    let nv = linalg::norm2(&sqrt_w);
    let v0: Vec<f64> = sqrt_w.iter().map(|x| x / nv).collect();

    let (theta, w, residual) = if chain.n <= opts.dense_cutoff {
        dense_lowest(&b, &v0)?
    } else {
        lowest_eigenpair(&b, &[v0.clone()], opts.seed.as_deref(), opts.rel_tol, 400)?
    };
    if theta <= 0.0 {
        return Err(Error::Degenerate(format!(
            "nonpositive gap {theta}: chain not irreducible?"
        )));
    }

    // g = w / √π̃, normalized in L²(π)
    let z: f64 = chain.weight.iter().sum();
    let mut g: Vec<f64> = w
        .iter()
        .zip(&sqrt_w)
        .map(|(wi, sw)| wi / sw * z.sqrt())
        .collect();
    if let Some(i) = opts.orient_state {
        if g[i] < 0.0 {
            linalg::scale(&mut g, -1.0);
        }
    } else {
        let (imax, _) = g
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        if g[imax] < 0.0 {
            linalg::scale(&mut g, -1.0);
        }
    }

    let zero_tol = 1e-10;
    let antisym_defect = opts.flip_map.as_ref().map(|flip| {
        let sup = g.iter().fold(0f64, |a, &x| a.max(x.abs()));
        let mut worst = 0f64;
        for i in 0..chain.n {
            worst = worst.max((g[i] + g[flip[i] as usize]).abs());
        }
        worst / sup
    });
    let sup = g.iter().fold(0f64, |a, &x| a.max(x.abs()));
    let near_zero_states = g.iter().filter(|&&x| x.abs() <= zero_tol * sup).count();

    Ok(SpectralResult {
        gap: theta,
        t_rel: 1.0 / theta,
        g,
        residual,
        antisym_defect,
        near_zero_states,
        zero_tol,
    })
}

fn dense_lowest(b: &Csr, v0: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let n = b.n;
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        for k in b.row_ptr[i]..b.row_ptr[i + 1] {
            dense[i * n + b.col[k] as usize] += b.val[k];
        }
    }
    let (ev, vecs) = jacobi_eigen(&dense, n);
    // pick the smallest eigenvalue whose eigenvector is not the kernel mode
    for k in 0..n {
        let col: Vec<f64> = (0..n).map(|r| vecs[r * n + k]).collect();
        let overlap = linalg::dot(&col, v0).abs();
        if overlap < 0.5 {
            let mut bv = vec![0.0; n];
            b.mul_vec(&col, &mut bv);
            let mut r = bv;
            linalg::axpy(&mut r, -ev[k], &col);
            return Ok((ev[k], col, linalg::norm2(&r)));
        }
    }
    Err(Error::Degenerate("no non-kernel eigenvector found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::leq;
    use crate::spectral::build_generator;

    #[test]
    fn two_state_gap_is_rate_sum() {
        for &(a, b) in &[(0.5, 0.5), (0.2, 1.3), (2.0, 0.1)] {
            let c = ReversibleChain::two_state(a, b);
            let r = solve_spectrum(&c, &SolveOptions::default()).unwrap();
            assert!((r.gap - (a + b)).abs() < 1e-12, "{} vs {}", r.gap, a + b);
        }
    }

    #[test]
    fn polymer_gap_sparse_matches_dense() {
        let pc = build_generator(4, 0.5, None, None, 12).unwrap();
        let dense = solve_spectrum(&pc.chain, &SolveOptions::default()).unwrap();
        let sparse = solve_spectrum(
            &pc.chain,
            &SolveOptions {
                dense_cutoff: 0,
                orient_state: pc.top,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((dense.gap - sparse.gap).abs() < 1e-11 * dense.gap);
    }

    #[test]
    fn eigenfunction_antisymmetric_and_increasing() {
        // free boundaries, L=4, λ=0.5: g(-η) = -g(η) and g monotone
        let pc = build_generator(4, 0.5, None, None, 12).unwrap();
        let flip = pc.space.reflection_map().unwrap();
        let r = solve_spectrum(
            &pc.chain,
            &SolveOptions {
                orient_state: pc.top,
                flip_map: Some(flip),
                dense_cutoff: 0,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(r.antisym_defect.unwrap() < 1e-10, "{:?}", r.antisym_defect);
        assert!(r.g[pc.top.unwrap()] > 0.0);
        // non-strict monotonicity over all comparable pairs
        let n = pc.chain.n;
        let paths: Vec<_> = (0..n).map(|i| pc.space.path(i)).collect();
        for i in 0..n {
            for j in 0..n {
                if leq(&paths[i], &paths[j]).unwrap() {
                    assert!(
                        r.g[i] <= r.g[j] + 1e-10,
                        "monotonicity fails: {} vs {}",
                        r.g[i],
                        r.g[j]
                    );
                }
            }
        }
        // unit norm in L²(π)
        let pi = pc.chain.pi();
        let norm: f64 = pi.iter().zip(&r.g).map(|(p, x)| p * x * x).sum();
        assert!((norm - 1.0).abs() < 1e-10);
    }
}
