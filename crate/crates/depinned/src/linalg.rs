//! Numerical kernels for the exact solvers.
//!
//! Everything works on the *symmetrized* generator `A = D^{1/2} 𝓛 D^{-1/2}`
//! with `D = diag(π̃)`: reversibility makes `A` symmetric with spectrum in
//! `[-2q, 0]` (`q` = largest exit rate), killed generators are principal
//! submatrices, and one matrix serves both distribution evolution
//! (`ν_t = D^{1/2} e^{tA} D^{-1/2} ν_0`) and observable evolution.
//!
//! - [`Csr`]: sparse matrix with a rayon-chunked mat-vec.
//! - [`cg`]: conjugate gradients with optional deflation of known
//!   eigenvectors (used to work orthogonally to the stationary mode).
//! - [`lowest_eigenpair`]: deflated inverse iteration with inexact inner
//!   solves; returns the smallest eigenpair in the deflated subspace.
//! - [`Propagator`]: uniformization `e^{tA} = e^{-qt} Σ_k (qt)^k/k! Â^k`
//!   with `Â = I + A/q`, `‖Â‖ ≤ 1`; the Poisson window is truncated at a
//!   relative mass below `tail_tol`, so semigroup values are exact to that
//!   tolerance.
//! - [`sturm_count`] / [`tridiag_eigenvalue`]: Sturm bisection for
//!   symmetric tridiagonal matrices (birth–death chains at large sizes).
//! - [`jacobi_eigen`]: cyclic Jacobi for small dense symmetric problems.

use crate::error::{Error, Result};
use crate::par;

// ───────────────────────────────────────────────────────────────────
//  Sparse matrices
// ───────────────────────────────────────────────────────────────────

/// Compressed sparse rows; diagonal entries included where they matter.
#[derive(Clone, Debug)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<u32>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Build from (row, col, value) triplets; duplicates within a row are
    /// summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(u32, u32, f64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col: Vec<u32> = Vec::with_capacity(triplets.len());
        let mut val: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut prev: Option<(u32, u32)> = None;
        for &(r, c, v) in &triplets {
            if prev == Some((r, c)) {
                *val.last_mut().unwrap() += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r as usize + 1] = col.len();
                prev = Some((r, c));
            }
            row_ptr[r as usize + 1] = col.len();
        }
        for i in 0..n {
            if row_ptr[i + 1] < row_ptr[i] {
                row_ptr[i + 1] = row_ptr[i];
            }
        }
        Self {
            n,
            row_ptr,
            col,
            val,
        }
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc += self.val[k] * x[self.col[k] as usize];
        }
        acc
    }

    /// `y ← M x`, sequential.
    pub fn mul_vec_seq(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            y[i] = self.row_dot(i, x);
        }
    }

    /// `y ← M x`; rayon-chunked when the `parallel` feature is on.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        const CHUNK: usize = 8192;
        if self.n < 2 * CHUNK {
            return self.mul_vec_seq(x, y);
        }
        par::fill_chunks_auto(y, CHUNK, |start, out| {
            for (off, slot) in out.iter_mut().enumerate() {
                *slot = self.row_dot(start + off, x);
            }
        });
    }

    pub fn max_abs_diag(&self) -> f64 {
        let mut q: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col[k] as usize == i {
                    q = q.max(self.val[k].abs());
                }
            }
        }
        q
    }
}

// ───────────────────────────────────────────────────────────────────
//  Vector helpers
// ───────────────────────────────────────────────────────────────────

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(y: &mut [f64], alpha: f64) {
    for yi in y.iter_mut() {
        *yi *= alpha;
    }
}

/// Remove the components of `v` along each (orthonormal) vector in `basis`.
pub fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for u in basis {
        let c = dot(v, u);
        axpy(v, -c, u);
    }
}

// ───────────────────────────────────────────────────────────────────
//  Conjugate gradients and inverse iteration
// ───────────────────────────────────────────────────────────────────

/// Solve `M x = b` for a symmetric `M` that is positive definite on the
/// orthogonal complement of `deflate` (orthonormal).  Returns the iteration
/// count.
pub fn cg(
    m: &Csr,
    b: &[f64],
    x: &mut Vec<f64>,
    deflate: &[Vec<f64>],
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = m.n;
    let mut r = b.to_vec();
    project_out(&mut r, deflate);
    let b_norm = norm2(&r).max(f64::MIN_POSITIVE);
    x.clear();
    x.resize(n, 0.0);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs = dot(&r, &r);
    for it in 0..max_iter {
        if rs.sqrt() <= rel_tol * b_norm {
            return Ok(it);
        }
        m.mul_vec(&p, &mut ap);
        project_out(&mut ap, deflate);
        let alpha = rs / dot(&p, &ap);
        axpy(x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    if rs.sqrt() <= rel_tol * b_norm * 10.0 {
        return Ok(max_iter);
    }
    Err(Error::NoConvergence {
        what: "conjugate gradients",
        residual: rs.sqrt() / b_norm,
        iters: max_iter,
    })
}

/// Smallest eigenpair of a symmetric positive semidefinite `M` restricted to
/// the orthogonal complement of `deflate` (orthonormal), by inverse
/// iteration with inexact CG solves.  Returns `(eigenvalue, eigenvector,
/// residual)` with `‖Mv − θv‖ = residual` and `‖v‖ = 1`.
pub fn lowest_eigenpair(
    m: &Csr,
    deflate: &[Vec<f64>],
    seed_vec: Option<&[f64]>,
    rel_tol: f64,
    max_outer: usize,
) -> Result<(f64, Vec<f64>, f64)> {
    let n = m.n;
    let scale_est = m.max_abs_diag().max(1e-300) * 2.0;
    let mut v: Vec<f64> = match seed_vec {
        Some(s) => s.to_vec(),
        None => {
            // deterministic pseudo-random start
            let mut state = 0x853c49e6748fea9bu64;
            (0..n)
                .map(|_| {
                    state = state
                        .wrapping_mul(6364136223846793005)
                        .wrapping_add(1442695040888963407);
                    ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
                })
                .collect()
        }
    };
    project_out(&mut v, deflate);
    let nv = norm2(&v);
    if nv < 1e-300 {
        return Err(Error::Degenerate("start vector in deflated span".into()));
    }
    scale(&mut v, 1.0 / nv);

    let mut y = vec![0.0; n];
    let mut mv = vec![0.0; n];
    let mut theta = 0.0;
    let mut res = f64::INFINITY;
    for outer in 0..max_outer {
        let inner_tol = if res.is_finite() {
            (res / scale_est * 1e-2).clamp(1e-14, 1e-4)
        } else {
            1e-4
        };
        cg(m, &v, &mut y, deflate, inner_tol, 100_000)?;
        project_out(&mut y, deflate);
        let ny = norm2(&y);
        if !ny.is_finite() || ny < 1e-300 {
            return Err(Error::Degenerate("inverse iteration collapsed".into()));
        }
        scale(&mut y, 1.0 / ny);
        std::mem::swap(&mut v, &mut y);
        m.mul_vec(&v, &mut mv);
        theta = dot(&v, &mv);
        let mut r = mv.clone();
        axpy(&mut r, -theta, &v);
        res = norm2(&r);
        if res <= rel_tol * scale_est && outer >= 2 {
            return Ok((theta, v, res));
        }
    }
    if res <= 100.0 * rel_tol * scale_est {
        return Ok((theta, v, res));
    }
    Err(Error::NoConvergence {
        what: "inverse iteration",
        residual: res,
        iters: max_outer,
    })
}

// ───────────────────────────────────────────────────────────────────
//  Uniformization
// ───────────────────────────────────────────────────────────────────

/// Semigroup evaluation for a symmetric matrix with spectrum in `[-2q, 0]`.
#[derive(Clone)]
pub struct Propagator {
    /// `Â = I + A/q`; spectral radius ≤ 1.
    a_hat: Csr,
    pub q: f64,
}

impl Propagator {
    /// `a` must be symmetric with spectrum in `[-2q, 0]`; `q` is normally the
    /// largest exit rate (= largest `|a_ii|`).
    pub fn new(a: &Csr, q: f64) -> Self {
        let mut a_hat = a.clone();
        for v in a_hat.val.iter_mut() {
            *v /= q;
        }
        for i in 0..a_hat.n {
            let mut has_diag = false;
            for k in a_hat.row_ptr[i]..a_hat.row_ptr[i + 1] {
                if a_hat.col[k] as usize == i {
                    a_hat.val[k] += 1.0;
                    has_diag = true;
                }
            }
            assert!(has_diag, "propagator rows must carry their diagonal");
        }
        Self { a_hat, q }
    }

    /// `v ← e^{tA} v` with Poisson truncation mass below `tail_tol`.
    pub fn apply(&self, v: &mut Vec<f64>, t: f64, tail_tol: f64) {
        let mu = self.q * t;
        if mu == 0.0 {
            return;
        }
        let (k_lo, k_hi, weights) = poisson_window(mu, tail_tol);
        let n = v.len();
        let mut cur = std::mem::take(v);
        let mut next = vec![0.0; n];
        let mut acc = vec![0.0; n];
        if k_lo == 0 {
            axpy(&mut acc, weights[0], &cur);
        }
        for k in 1..=k_hi {
            self.a_hat.mul_vec(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
            if k >= k_lo {
                axpy(&mut acc, weights[k - k_lo], &cur);
            }
        }
        *v = acc;
    }

    pub fn matvec_count(&self, t: f64, tail_tol: f64) -> usize {
        let mu = self.q * t;
        if mu == 0.0 {
            return 0;
        }
        poisson_window(mu, tail_tol).1
    }
}

/// Poisson(μ) weights on a window `[k_lo, k_hi]` carrying all but `tail_tol`
/// of the mass, normalized on the window (Fox–Glynn style).
fn poisson_window(mu: f64, tail_tol: f64) -> (usize, usize, Vec<f64>) {
    // 8σ covers ~1e-15 of tail mass; widen for stricter tolerances
    let sigmas = 8.0 + (1e-12 / tail_tol.max(1e-300)).ln().max(0.0).sqrt();
    let spread = (sigmas * (mu + 1.0).sqrt() + 40.0).ceil();
    let mode = mu.floor();
    let k_lo = (mode - spread).max(0.0) as usize;
    let k_hi = (mode + spread).ceil() as usize;
    let mode_k = mode as usize;
    let mut w = vec![0.0; k_hi - k_lo + 1];
    w[mode_k - k_lo] = 1.0;
    for k in (k_lo + 1..=mode_k).rev() {
        w[k - 1 - k_lo] = w[k - k_lo] * (k as f64) / mu;
    }
    for k in mode_k..k_hi {
        w[k + 1 - k_lo] = w[k - k_lo] * mu / (k as f64 + 1.0);
    }
    let total: f64 = w.iter().sum();
    for x in w.iter_mut() {
        *x /= total;
    }
    (k_lo, k_hi, w)
}

// ───────────────────────────────────────────────────────────────────
//  Tridiagonal Sturm bisection
// ───────────────────────────────────────────────────────────────────

/// Number of eigenvalues of the symmetric tridiagonal `(diag, off)` strictly
/// below `x`: negative pivots of the shifted LDLᵀ factorization.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    let mut count = 0usize;
    let mut d = diag[0] - x;
    if d < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let safe = if d.abs() < 1e-300 {
            if d < 0.0 {
                -1e-300
            } else {
                1e-300
            }
        } else {
            d
        };
        d = (diag[i] - x) - off[i - 1] * off[i - 1] / safe;
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// `k`-th eigenvalue (ascending, 0-based) of a symmetric tridiagonal matrix
/// by bisection, to absolute accuracy `tol` (floored at relative 1e-15).
pub fn tridiag_eigenvalue(diag: &[f64], off: &[f64], k: usize, tol: f64) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = (if i > 0 { off[i - 1].abs() } else { 0.0 })
            + (if i + 1 < n { off[i].abs() } else { 0.0 });
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    while hi - lo > tol.max(hi.abs().max(lo.abs()) * 1e-15) {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

// ───────────────────────────────────────────────────────────────────
//  Small dense symmetric eigenproblems (cyclic Jacobi)
// ───────────────────────────────────────────────────────────────────

/// Eigenvalues (ascending) and eigenvectors (columns of the returned
/// row-major `n×n` matrix) of a dense symmetric matrix.  For `n ≲ 500`.
pub fn jacobi_eigen(a_in: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a_in.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let idx = |r: usize, c: usize| r * n + c;
    let scale0 = norm2(&a).max(1e-300);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[idx(p, q)] * a[idx(p, q)];
            }
        }
        if off.sqrt() < 1e-15 * scale0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[idx(p, p)];
                let aqq = a[idx(q, q)];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // A ← Jᵀ A J on rows/columns p, q
                for k in 0..n {
                    let akp = a[idx(k, p)];
                    let akq = a[idx(k, q)];
                    a[idx(k, p)] = c * akp - s * akq;
                    a[idx(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[idx(p, k)];
                    let aqk = a[idx(q, k)];
                    a[idx(p, k)] = c * apk - s * aqk;
                    a[idx(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[idx(k, p)];
                    let vkq = v[idx(k, q)];
                    v[idx(k, p)] = c * vkp - s * vkq;
                    v[idx(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[idx(i, i)].partial_cmp(&a[idx(j, j)]).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a[idx(i, i)]).collect();
    let mut eigvecs = vec![0.0; n * n];
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            eigvecs[idx(r, new_c)] = v[idx(r, old_c)];
        }
    }
    (eigvals, eigvecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_path(n: usize) -> Csr {
        let mut t = Vec::new();
        for i in 0..n {
            let mut d = 0.0;
            if i > 0 {
                t.push((i as u32, (i - 1) as u32, -1.0));
                d += 1.0;
            }
            if i + 1 < n {
                t.push((i as u32, (i + 1) as u32, -1.0));
                d += 1.0;
            }
            t.push((i as u32, i as u32, d));
        }
        Csr::from_triplets(n, t)
    }

    #[test]
    fn cg_solves_spd() {
        let n = 50;
        let m = laplacian_path(n);
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let mut b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        project_out(&mut b, &[ones.clone()]);
        let mut x = Vec::new();
        cg(&m, &b, &mut x, &[ones.clone()], 1e-13, 10_000).unwrap();
        let mut ax = vec![0.0; n];
        m.mul_vec(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - b[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn lowest_eigenpair_of_path_laplacian() {
        // spectrum of the path Laplacian: 2 - 2cos(kπ/n)
        let n = 40;
        let m = laplacian_path(n);
        let ones = vec![1.0 / (n as f64).sqrt(); n];
        let (theta, v, _res) = lowest_eigenpair(&m, &[ones], None, 1e-13, 200).unwrap();
        let expect = 2.0 - 2.0 * (std::f64::consts::PI / n as f64).cos();
        assert!((theta - expect).abs() < 1e-10, "{theta} vs {expect}");
        assert!((norm2(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagator_matches_closed_form() {
        // two-state chain with rates a, b: eigenvalues 0, -(a+b)
        let (a, b) = (0.7, 0.3);
        let m = Csr::from_triplets(
            2,
            vec![
                (0, 0, -a),
                (0, 1, (a * b).sqrt()),
                (1, 0, (a * b).sqrt()),
                (1, 1, -b),
            ],
        );
        let prop = Propagator::new(&m, a.max(b));
        let pi0 = b / (a + b);
        let pi1 = a / (a + b);
        for &t in &[0.1, 0.5, 2.0, 10.0] {
            // ν_t = D^{1/2} e^{tA} D^{-1/2} δ_0
            let mut v = vec![1.0 / pi0.sqrt(), 0.0];
            prop.apply(&mut v, t, 1e-13);
            let p0 = pi0.sqrt() * v[0];
            let p1 = pi1.sqrt() * v[1];
            let decay = (-(a + b) * t).exp();
            assert!((p0 - (pi0 + pi1 * decay)).abs() < 1e-12);
            assert!((p1 - (pi1 - pi1 * decay)).abs() < 1e-12);
        }
    }

    #[test]
    fn sturm_bisection_matches_jacobi() {
        let n = 30;
        let diag: Vec<f64> = (0..n).map(|i| 2.0 + 0.1 * (i as f64).sin()).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 + 0.05 * (i as f64).cos()).collect();
        let mut dense = vec![0.0; n * n];
        for i in 0..n {
            dense[i * n + i] = diag[i];
            if i + 1 < n {
                dense[i * n + i + 1] = off[i];
                dense[(i + 1) * n + i] = off[i];
            }
        }
        let (ev, _) = jacobi_eigen(&dense, n);
        for k in [0usize, 1, 5, n - 1] {
            let x = tridiag_eigenvalue(&diag, &off, k, 1e-12);
            assert!((x - ev[k]).abs() < 1e-9, "k={k}: {x} vs {}", ev[k]);
        }
    }

    #[test]
    fn jacobi_small() {
        let (ev, vecs) = jacobi_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!((ev[1] - 3.0).abs() < 1e-12);
        assert!((vecs[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
    }
}
