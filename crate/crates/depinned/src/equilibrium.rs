//! Exact partition functions, excursion kernels, and equilibrium marginals.
//!
//! Every bridge decomposes uniquely into sign-constant excursions between
//! consecutive zeros.  Weighting each interior zero by `λ` gives the
//! first-return recursions
//!
//! ```text
//! Z_wall(2m) = e(2m) + Σ_{r<m} e(2r)·λ·Z_wall(2m-2r)      (nonnegative paths)
//! Z_free(2m) = 2e(2m) + Σ_{r<m} 2e(2r)·λ·Z_free(2m-2r)    (both signs)
//! ```
//!
//! with `e(2r) = Cat(r-1)` strictly positive excursions.  Reflecting each
//! excursion independently yields the exact identity `2·Z_wall(2m)[λ] =
//! Z_free(2m)[λ/2]`.
//!
//! Everything here is generic over the scalar: `f64` for production tables
//! and `BigRational` for the exact oracle mode used by the brute-force
//! equivalence tests.  Long tables (lengths ~10⁴–10⁵) use the scaled weights
//! `w(j) = 2^{-j}·Z(j) ~ c·j^{-3/2}`, which never overflow; the recursion is
//! literally the same with scaled excursion counts `ê(2r) = 4^{-r}Cat(r-1)`.

use crate::combin::{catalan_ring, scaled_excursion_weights};
use crate::error::{Error, Result};
use crate::path::{path_stats, PathConfig, PathStats, SignField};
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Scalar ring with division; `f64` or exact rationals.
pub trait Scalar:
    Clone
    + PartialEq
    + PartialOrd
    + std::fmt::Debug
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
}

impl Scalar for f64 {}
impl Scalar for BigRational {}

/// Exact rational from a (num, den) pair, for oracle-mode parameters.
pub fn big_ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

fn pow<T: Scalar>(x: &T, n: usize) -> T {
    let mut acc = T::one();
    for _ in 0..n {
        acc = acc * x.clone();
    }
    acc
}

/// First-return decomposition DP.  `exc[r]` is the weight of one excursion
/// of length `2r` (pick the scale through `exc`); `fold` is the number of
/// sign choices per excursion (1 = wall, 2 = free).  Returns `z[m]` for
/// lengths `2m`, `z[0] = 1`.
fn first_return_dp<T: Scalar>(exc: &[T], lambda: &T, fold: usize) -> Vec<T> {
    let m_max = exc.len() - 1;
    let fold = if fold == 2 {
        T::one() + T::one()
    } else {
        T::one()
    };
    let mut z = Vec::with_capacity(m_max + 1);
    z.push(T::one());
    for m in 1..=m_max {
        // first excursion of length 2r; its terminal zero is interior unless
        // it closes the whole path
        let mut acc = fold.clone() * exc[m].clone();
        for r in 1..m {
            acc = acc + fold.clone() * exc[r].clone() * lambda.clone() * z[m - r].clone();
        }
        z.push(acc);
    }
    z
}

/// Same DP resolved by the number of interior zeros:
/// `a[m][z] = Σ_{paths of length 2m with z interior zeros} λ^z · (sign choices)`.
fn first_return_dp_by_zeros<T: Scalar>(
    exc: &[T],
    lambda: &T,
    fold: usize,
    z_cap: usize,
) -> Vec<Vec<T>> {
    let m_max = exc.len() - 1;
    let fold = if fold == 2 {
        T::one() + T::one()
    } else {
        T::one()
    };
    let mut a: Vec<Vec<T>> = vec![vec![T::zero(); z_cap + 1]; m_max + 1];
    a[0][0] = T::one();
    for m in 1..=m_max {
        a[m][0] = fold.clone() * exc[m].clone();
        for z in 1..=z_cap {
            let mut acc = T::zero();
            for r in 1..m {
                acc = acc
                    + fold.clone()
                        * exc[r].clone()
                        * lambda.clone()
                        * a[m - r][z - 1].clone();
            }
            a[m][z] = acc;
        }
    }
    a
}

/// Free and wall partition functions for all even lengths up to `max_len`,
/// together with the single-excursion weights they are built from.
///
/// `scaled == true` means every entry of length `j` carries the factor
/// `2^{-j}`; ratios of entries with matching total length are scale-free.
#[derive(Clone, Debug)]
pub struct PartitionTable<T> {
    pub lambda: T,
    pub max_len: usize,
    pub scaled: bool,
    exc: Vec<T>,
    z_wall: Vec<T>,
    z_free: Vec<T>,
    wall_by_zeros: Option<Vec<Vec<T>>>,
}

/// Capacity bound for the exact (unscaled) tables in `f64`: `4^m` overflows
/// beyond this.
pub const UNSCALED_MAX_LEN: usize = 1000;

impl<T: Scalar> PartitionTable<T> {
    /// Exact, unscaled table (generic scalar).  For `f64` keep `max_len ≤`
    /// [`UNSCALED_MAX_LEN`]; the scaled constructor has no such limit.
    pub fn exact(max_len: usize, lambda: T) -> Result<Self> {
        if max_len % 2 != 0 || max_len == 0 {
            return Err(Error::InvalidConfig("max_len must be even ≥ 2".into()));
        }
        let m_max = max_len / 2;
        let cat = catalan_ring(m_max.saturating_sub(1), T::one());
        let mut exc = vec![T::zero(); m_max + 1];
        for r in 1..=m_max {
            exc[r] = cat[r - 1].clone();
        }
        let z_wall = first_return_dp(&exc, &lambda, 1);
        let z_free = first_return_dp(&exc, &lambda, 2);
        Ok(Self {
            lambda,
            max_len,
            scaled: false,
            exc,
            z_wall,
            z_free,
        wall_by_zeros: None,
        })
    }

    /// Attach the by-zero-count wall table (needed for capped kernels and
    /// zero-count marginals).  `z_cap` is the largest tracked zero count.
    pub fn with_wall_zero_counts(mut self, z_cap: usize) -> Self {
        let a = first_return_dp_by_zeros(&self.exc, &self.lambda, 1, z_cap);
        self.wall_by_zeros = Some(a);
        self
    }

    fn m_of(&self, j: usize) -> usize {
        assert!(j % 2 == 0 && j <= self.max_len, "bad even length {j}");
        j / 2
    }

    /// Wall partition function of even length `j` (scaled iff the table is).
    pub fn z_wall(&self, j: usize) -> T {
        self.z_wall[self.m_of(j)].clone()
    }

    /// Free partition function of even length `j`.
    pub fn z_free(&self, j: usize) -> T {
        self.z_free[self.m_of(j)].clone()
    }

    /// Weight of a single strictly positive excursion of even length `j`.
    pub fn excursion(&self, j: usize) -> T {
        self.exc[self.m_of(j)].clone()
    }

    /// Wall partition function restricted to at most `max_zeros` interior
    /// zeros.  Requires [`Self::with_wall_zero_counts`].
    pub fn z_wall_capped(&self, j: usize, max_zeros: usize) -> T {
        let a = self
            .wall_by_zeros
            .as_ref()
            .expect("wall zero counts not built");
        let m = self.m_of(j);
        let mut acc = T::zero();
        for z in 0..=max_zeros.min(a[m].len() - 1) {
            acc = acc + a[m][z].clone();
        }
        acc
    }

    pub fn has_zero_counts(&self) -> bool {
        self.wall_by_zeros.is_some()
    }

    /// Internal slices (index = half-length), for the convolution machinery.
    pub fn wall_slice(&self) -> &[T] {
        &self.z_wall
    }
    pub fn free_slice(&self) -> &[T] {
        &self.z_free
    }

    /// Capped wall weights as a dense slice `w[m] = z_wall_capped(2m, cap)`.
    pub fn capped_wall_slice(&self, max_zeros: usize) -> Vec<T> {
        (0..=self.max_len / 2)
            .map(|m| self.z_wall_capped(2 * m, max_zeros))
            .collect()
    }

    /// Unnormalized sign-field weight `ν̃(σ) = λ^χ · Π_i Z_wall(ξ_{i+1}-ξ_i)`.
    /// Dividing by `Z_free(2L)` gives the projection of the equilibrium on
    /// sign fields.
    pub fn sigma_weight(&self, sigma: &SignField) -> T {
        let gaps = sigma.crossings().gaps();
        let mut acc = pow(&self.lambda, gaps.len() - 1);
        for g in gaps {
            acc = acc * self.z_wall(g as usize);
        }
        acc
    }
}

impl PartitionTable<f64> {
    /// Scaled table `w(j) = 2^{-j} Z(j)`; safe for lengths up to ~10⁵.
    pub fn scaled(max_len: usize, lambda: f64) -> Result<Self> {
        if max_len % 2 != 0 || max_len == 0 {
            return Err(Error::InvalidConfig("max_len must be even ≥ 2".into()));
        }
        if lambda <= 0.0 {
            return Err(Error::InvalidConfig("lambda must be > 0".into()));
        }
        let m_max = max_len / 2;
        let exc = scaled_excursion_weights(m_max);
        let z_wall = first_return_dp(&exc, &lambda, 1);
        let z_free = first_return_dp(&exc, &lambda, 2);
        Ok(Self {
            lambda,
            max_len,
            scaled: true,
            exc,
            z_wall,
            z_free,
            wall_by_zeros: None,
        })
    }
}

/// Unnormalized inter-crossing segment weights `w(j) = 2^{-j}·Z_wall^{(+)}(j)`
/// (optionally with a per-segment cap on interior zeros).  The infinite-sum
/// normalizer of the segment-length law is never materialized: every use is
/// a ratio or a conditioned sum in which it cancels.
#[derive(Clone, Debug)]
pub struct ExcursionKernel {
    pub lambda: f64,
    pub zero_cap: Option<usize>,
    w: Vec<f64>,
}

impl ExcursionKernel {
    pub fn new(table: &PartitionTable<f64>, zero_cap: Option<usize>) -> Self {
        assert!(table.scaled, "kernel wants the scaled table");
        let w = match zero_cap {
            None => table.wall_slice().to_vec(),
            Some(cap) => table.capped_wall_slice(cap),
        };
        Self {
            lambda: table.lambda,
            zero_cap,
            w,
        }
    }

    pub fn from_weights(lambda: f64, w: Vec<f64>, zero_cap: Option<usize>) -> Self {
        Self {
            lambda,
            zero_cap,
            w,
        }
    }

    /// `w(j)` for even `j ≥ 2`.
    pub fn w(&self, j: usize) -> f64 {
        assert!(j % 2 == 0 && j >= 2);
        self.w[j / 2]
    }

    pub fn max_len(&self) -> usize {
        2 * (self.w.len() - 1)
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Truncated normalizer `Σ_{j ≤ max_len} w(j)`; the tail beyond the
    /// table is `O(max_len^{-1/2})`.  Only used for diagnostics that need an
    /// absolute normalization (reported with the truncation length).
    pub fn truncated_normalizer(&self) -> f64 {
        self.w[1..].iter().sum()
    }
}

/// Least-squares fit of `log w(j)` against `log j` on even `j ∈ [j_min, j_max]`.
#[derive(Clone, Copy, Debug)]
pub struct TailFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub points: usize,
}

/// Fit the power-law tail of a kernel; the delocalized segment law has
/// exponent `-3/2`.
pub fn tail_fit(kernel: &ExcursionKernel, j_min: usize, j_max: usize) -> Result<TailFit> {
    if j_max > kernel.max_len() || j_min >= j_max {
        return Err(Error::InvalidConfig(format!(
            "fit window [{j_min}, {j_max}] outside table (max {})",
            kernel.max_len()
        )));
    }
    let xs: Vec<(f64, f64)> = (j_min..=j_max)
        .filter(|j| j % 2 == 0)
        .map(|j| ((j as f64).ln(), kernel.w(j).ln()))
        .collect();
    if xs.len() < 10 {
        return Err(Error::Degenerate(format!(
            "only {} points in the fit window",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().map(|p| p.0).sum();
    let sy: f64 = xs.iter().map(|p| p.1).sum();
    let sxx: f64 = xs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = xs.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok(TailFit {
        exponent: slope,
        amplitude: intercept.exp(),
        points: xs.len(),
    })
}

// ───────────────────────────────────────────────────────────────────
//  Closed-form marginals
// ───────────────────────────────────────────────────────────────────

/// `π(η_x = 0)` for `x` on the even sublattice: split at the zero, one free
/// bridge on each side, one `λ` for the interior zero itself.
pub fn pi_zero_at<T: Scalar>(t: &PartitionTable<T>, l: usize, x: i64) -> T {
    let li = l as i64;
    assert!((x + li) % 2 == 0 && x.abs() < li, "x must be interior, on E_L");
    t.lambda.clone() * t.z_free((li + x) as usize) * t.z_free((li - x) as usize)
        / t.z_free(2 * l)
}

/// Tail law of the zero count: `out[k] = π(N > k)` for `k = 0..=k_max`.
pub fn pi_zeros_tail<T: Scalar>(t: &PartitionTable<T>, l: usize, k_max: usize) -> Vec<T> {
    let z_hi = l.saturating_sub(1); // interior zeros all sit inside E_L
    let exc: Vec<T> = t.exc.iter().take(l + 1).cloned().collect();
    let by_zero = first_return_dp_by_zeros(&exc, &t.lambda, 2, z_hi);
    let z2l = t.z_free(2 * l);
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let mut acc = T::zero();
        for z in (k + 1)..=z_hi {
            acc = acc + by_zero[l][z].clone();
        }
        out.push(acc / z2l.clone());
    }
    out
}

/// `π(Ω^+)`: strictly positive on the open window `(-L+ℓ, L-ℓ)`.  Summing
/// over the last zero `u ≤ -L+ℓ` and the first zero `v ≥ L-ℓ` leaves a free
/// bridge on each side and one sign-fixed excursion across the bulk.
pub fn pi_bulk_positive<T: Scalar>(t: &PartitionTable<T>, l: usize, ell: usize) -> T {
    let li = l as i64;
    let a = -li + ell as i64;
    let b = li - ell as i64;
    let mut acc = T::zero();
    let mut u = -li;
    while u <= a {
        let mut v = b.max(u + 2);
        // align v to the even sublattice
        if (v + li) % 2 != 0 {
            v += 1;
        }
        while v <= li {
            let lam_u = if u > -li { t.lambda.clone() } else { T::one() };
            let lam_v = if v < li { t.lambda.clone() } else { T::one() };
            acc = acc
                + t.z_free((li + u) as usize)
                    * lam_u
                    * t.excursion((v - u) as usize)
                    * lam_v
                    * t.z_free((li - v) as usize);
            v += 2;
        }
        u += 2;
    }
    acc / t.z_free(2 * l)
}

/// Convolution powers of a weight slice: `out[k][m] = Σ` over `k` even-length
/// segments with half-lengths summing to `m` of the product of weights.
/// `out[0] = δ_0`.
pub fn conv_powers<T: Scalar>(w: &[T], k_max: usize, m_max: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = Vec::with_capacity(k_max + 1);
    let mut delta = vec![T::zero(); m_max + 1];
    delta[0] = T::one();
    out.push(delta);
    for k in 1..=k_max {
        let prev = &out[k - 1];
        let mut cur = vec![T::zero(); m_max + 1];
        for m in k..=m_max {
            let mut acc = T::zero();
            // last segment of half-length r ≥ 1
            for r in 1..=(m - k + 1) {
                if !prev[m - r].is_zero() {
                    acc = acc + prev[m - r].clone() * w[r].clone();
                }
            }
            cur[m] = acc;
        }
        out.push(cur);
    }
    out
}

/// Law of the crossing number: `out[n] = π(χ = n)`, `n = 0..=L-1`.
pub fn chi_law<T: Scalar>(t: &PartitionTable<T>, l: usize) -> Vec<T> {
    let conv = conv_powers(t.wall_slice(), l, l);
    let z2l = t.z_free(2 * l);
    let two = T::one() + T::one();
    (0..l)
        .map(|n| two.clone() * pow(&t.lambda, n) * conv[n + 1][l].clone() / z2l.clone())
        .collect()
}

/// `π(Ω^o)` for cap `c` on both the crossing count and per-segment zeros.
pub fn pi_few_crossings<T: Scalar>(t: &PartitionTable<T>, l: usize, cap: usize) -> T {
    let w = t.capped_wall_slice(cap);
    let n_max = cap.min(l - 1);
    let conv = conv_powers(&w, n_max + 1, l);
    let two = T::one() + T::one();
    let mut acc = T::zero();
    for n in 0..=n_max {
        acc = acc + two.clone() * pow(&t.lambda, n) * conv[n + 1][l].clone();
    }
    acc / t.z_free(2 * l)
}

// ───────────────────────────────────────────────────────────────────
//  Fixed-crossing-number laws
// ───────────────────────────────────────────────────────────────────

/// The law of `n` ordered crossings on a bridge of length `2L`: a product of
/// segment weights conditioned on the total length.  Generic over the scalar
/// and over the weight slice (plain or zero-capped).
#[derive(Clone, Debug)]
pub struct CrossingLaw<T> {
    pub n: usize,
    pub l: usize,
    w: Vec<T>,
    /// `fwd[k][m]`: k-segment convolution, `k = 0..=n+1`, `m = 0..=l`.
    fwd: Vec<Vec<T>>,
}

impl<T: Scalar> CrossingLaw<T> {
    /// `w` indexed by half-length (`w[r]` = weight of a segment of length
    /// `2r`); entries beyond `l` are ignored.
    pub fn new(n: usize, l: usize, w: &[T]) -> Result<Self> {
        if n + 1 > l {
            return Err(Error::InvalidConfig(format!(
                "no room for {n} crossings on a bridge of half-length {l}"
            )));
        }
        let w: Vec<T> = w.iter().take(l + 1).cloned().collect();
        let fwd = conv_powers(&w, n + 1, l);
        Ok(Self { n, l, w, fwd })
    }

    /// Normalizer `Z_{n,L} = Σ_{configs} Π w(gaps)`.
    pub fn normalizer(&self) -> T {
        self.fwd[self.n + 1][self.l].clone()
    }

    /// Probability of one ordered configuration (positions on `E_L`).
    pub fn prob(&self, positions: &[i64]) -> T {
        assert_eq!(positions.len(), self.n);
        let li = self.l as i64;
        let mut prev = -li;
        let mut acc = T::one();
        for &x in positions.iter().chain(std::iter::once(&li)) {
            let r = ((x - prev) / 2) as usize;
            acc = acc * self.w[r].clone();
            prev = x;
        }
        acc / self.normalizer()
    }

    /// Marginal law of the `i`-th crossing (1-based): pairs `(x, P(ξ_i = x))`.
    pub fn marginal(&self, i: usize) -> Vec<(i64, T)> {
        assert!(i >= 1 && i <= self.n);
        let li = self.l as i64;
        // backward convolution = forward with swapped counts
        let k_left = i;
        let k_right = self.n + 1 - i;
        let z = self.normalizer();
        let mut out = Vec::new();
        for m in 0..=self.l {
            let x = -li + 2 * m as i64;
            let left = &self.fwd[k_left][m];
            let right = &self.fwd[k_right][self.l - m];
            if !left.is_zero() && !right.is_zero() {
                out.push((x, left.clone() * right.clone() / z.clone()));
            }
        }
        out
    }

    /// Law of the first segment half-length `ζ_1/2 = (ξ_1+L)/2`.
    pub fn first_gap_law(&self) -> Vec<T> {
        let z = self.normalizer();
        (0..=self.l)
            .map(|r| {
                if r == 0 {
                    T::zero()
                } else {
                    self.w[r].clone() * self.fwd[self.n][self.l - r].clone() / z.clone()
                }
            })
            .collect()
    }

    /// `P(ζ_1 ≥ thresh)` for the first segment length `ζ_1` (in lattice
    /// units, even).
    pub fn first_gap_tail(&self, thresh: f64) -> T {
        let law = self.first_gap_law();
        let mut acc = T::zero();
        for (r, p) in law.iter().enumerate() {
            if (2 * r) as f64 >= thresh {
                acc = acc + p.clone();
            }
        }
        acc
    }
}

/// `ν_n(ζ_1 ≥ 2L - L^{1/3})`: the far-end mass of the first segment, which
/// approaches `1/(n+1)` when one segment swallows nearly everything.
pub fn first_segment_tail(kernel: &ExcursionKernel, n: usize, l: usize) -> Result<f64> {
    let law = CrossingLaw::new(n, l, kernel.weights())?;
    let thresh = 2.0 * l as f64 - (l as f64).powf(1.0 / 3.0);
    Ok(law.first_gap_tail(thresh))
}

/// Ratio of the (n+1)-fold convolution at full length to `(n+1)·w(2L)`,
/// normalized by the `J`-truncated kernel mass; tends to 1 in the heavy-tail
/// regime.  The truncation length is the kernel table length.
pub fn doney_ratio(kernel: &ExcursionKernel, n: usize, l: usize) -> Result<f64> {
    let law = CrossingLaw::new(n, l, kernel.weights())?;
    let z = kernel.truncated_normalizer();
    let conv = law.normalizer();
    Ok(conv / ((n + 1) as f64 * kernel.w(2 * l) * z.powi(n as i32)))
}

// ───────────────────────────────────────────────────────────────────
//  Brute-force oracle
// ───────────────────────────────────────────────────────────────────

/// Visit every configuration with its statistics and weight `λ^{N(η)}`.
/// The enumeration oracle against which every closed-form route is checked.
pub fn for_each_weighted<T: Scalar>(
    l: usize,
    lambda: &T,
    mut f: impl FnMut(&PathConfig, &PathStats, &T),
) {
    let mut lam_pow = Vec::with_capacity(l);
    lam_pow.push(T::one());
    for _ in 0..l {
        let last = lam_pow.last().unwrap().clone();
        lam_pow.push(last * lambda.clone());
    }
    crate::combin::for_each_mask(l, |mask| {
        let eta = PathConfig::from_mask(l, mask);
        let st = path_stats(&eta);
        f(&eta, &st, &lam_pow[st.zeros]);
    });
}

/// Enumeration measure of a predicate: `(Σ_{pred} λ^N, Z)`.
pub fn enumeration_measure<T: Scalar>(
    l: usize,
    lambda: &T,
    mut pred: impl FnMut(&PathConfig, &PathStats) -> bool,
) -> (T, T) {
    let mut num = T::zero();
    let mut den = T::zero();
    for_each_weighted(l, lambda, |eta, st, w| {
        den = den.clone() + w.clone();
        if pred(eta, st) {
            num = num.clone() + w.clone();
        }
    });
    (num, den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::default_ell;

    #[test]
    fn small_partition_values() {
        let t = PartitionTable::<f64>::exact(8, 0.5).unwrap();
        // 2 zero-free paths and 4 one-zero paths of length 4
        assert!((t.z_free(4) - (2.0 + 4.0 * 0.5)).abs() < 1e-14);
        // Dyck paths of length 6: 2 + 2λ + λ²
        assert!((t.z_wall(6) - (2.0 + 2.0 * 0.5 + 0.25)).abs() < 1e-14);
        assert!((t.z_wall(2) - 1.0).abs() < 1e-14);
        assert!((t.z_free(2) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn reflection_identity_small() {
        // 2·Z_wall(6)[λ] = Z_free(6)[λ/2], exact instance at λ = 1/2
        let tw = PartitionTable::<f64>::exact(6, 0.5).unwrap();
        let tf = PartitionTable::<f64>::exact(6, 0.25).unwrap();
        assert!((2.0 * tw.z_wall(6) - 6.5).abs() < 1e-14);
        assert!((tf.z_free(6) - 6.5).abs() < 1e-14);
    }

    #[test]
    fn reflection_identity_rational() {
        let lam = big_ratio(1, 2);
        let half = big_ratio(1, 4);
        let tw = PartitionTable::exact(24, lam).unwrap();
        let tf = PartitionTable::exact(24, half).unwrap();
        let two = big_ratio(2, 1);
        for m in 1..=12 {
            assert_eq!(two.clone() * tw.z_wall(2 * m), tf.z_free(2 * m));
        }
    }

    #[test]
    fn scaled_matches_exact() {
        let te = PartitionTable::<f64>::exact(40, 0.7).unwrap();
        let ts = PartitionTable::<f64>::scaled(40, 0.7).unwrap();
        for m in 1..=20 {
            let scale = 4f64.powi(m as i32);
            assert!(
                (te.z_wall(2 * m) / scale - ts.z_wall(2 * m)).abs()
                    < 1e-13 * ts.z_wall(2 * m).abs(),
            );
            assert!(
                (te.z_free(2 * m) / scale - ts.z_free(2 * m)).abs()
                    < 1e-13 * ts.z_free(2 * m).abs(),
            );
        }
    }

    #[test]
    fn partition_matches_enumeration() {
        // recursions vs brute force, exact match required (f64 here; the
        // rational version is exercised by the acceptance suite)
        for l in 1..=6 {
            for &lam in &[0.5, 1.0, 1.5] {
                let t = PartitionTable::<f64>::exact(2 * l, lam)
                    .unwrap()
                    .with_wall_zero_counts(l);
                let (_, z) = enumeration_measure(l, &lam, |_, _| true);
                assert!((t.z_free(2 * l) - z).abs() < 1e-12 * z);
                // wall = nonnegative paths
                let (num, _) = enumeration_measure(l, &lam, |eta, _| {
                    eta.heights().iter().all(|&h| h >= 0)
                });
                assert!((t.z_wall(2 * l) - num).abs() < 1e-12 * num.max(1.0));
                // capped wall
                for cap in 0..l {
                    let (num, _) = enumeration_measure(l, &lam, |eta, st| {
                        eta.heights().iter().all(|&h| h >= 0) && st.zeros <= cap
                    });
                    assert!((t.z_wall_capped(2 * l, cap) - num).abs() < 1e-12 * num.max(1.0));
                }
            }
        }
    }

    #[test]
    fn zero_marginal_examples() {
        // L=2, λ=1/2: π(η_0 = 0) = 4λ/(2+4λ) = 1/2
        let t = PartitionTable::<f64>::exact(4, 0.5).unwrap();
        assert!((pi_zero_at(&t, 2, 0) - 0.5).abs() < 1e-14);
        // λ=1: pure counting, binom(L+x, (L+x)/2)·binom(L-x, (L-x)/2)/binom(2L, L)
        let t1 = PartitionTable::<f64>::exact(12, 1.0).unwrap();
        let l = 6i64;
        for x in (-l + 2..l).step_by(2) {
            let expect = crate::combin::binomial((l + x) as usize, ((l + x) / 2) as usize) as f64
                * crate::combin::binomial((l - x) as usize, ((l - x) / 2) as usize) as f64
                / crate::combin::binomial(12, 6) as f64;
            assert!((pi_zero_at(&t1, 6, x) - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn chi_law_example() {
        // L=3, λ=1/2: π(χ=0)=0.65, π(χ=1)=0.30, π(χ=2)=0.05
        let t = PartitionTable::<f64>::exact(6, 0.5).unwrap();
        let law = chi_law(&t, 3);
        assert!((law[0] - 0.65).abs() < 1e-14);
        assert!((law[1] - 0.30).abs() < 1e-14);
        assert!((law[2] - 0.05).abs() < 1e-14);
    }

    #[test]
    fn marginals_match_enumeration() {
        for l in 2..=6usize {
            let lam = 0.6;
            let t = PartitionTable::<f64>::exact(2 * l, lam)
                .unwrap()
                .with_wall_zero_counts(l);
            // π(η_x = 0)
            for x in (-(l as i64) + 2..l as i64).step_by(2) {
                let (num, den) = enumeration_measure(l, &lam, |eta, _| eta.height(x) == 0);
                assert!((pi_zero_at(&t, l, x) - num / den).abs() < 1e-13);
            }
            // π(N > k)
            let tail = pi_zeros_tail(&t, l, l);
            for k in 0..=l {
                let (num, den) = enumeration_measure(l, &lam, |_, st| st.zeros > k);
                assert!((tail[k] - num / den).abs() < 1e-13);
            }
            // π(Ω^+) with the default window
            let ell = default_ell(l);
            let (num, den) = enumeration_measure(l, &lam, |eta, _| {
                crate::path::classify(eta, ell, f64::INFINITY).plus
            });
            assert!((pi_bulk_positive(&t, l, ell) - num / den).abs() < 1e-13);
            // π(Ω^o) at a binding cap: c = 1 zero per segment, ≤ 1 crossing
            let (num, den) = enumeration_measure(l, &lam, |_, st| {
                st.crossings <= 1 && st.segment_zeros.iter().all(|&z| z <= 1)
            });
            assert!((pi_few_crossings(&t, l, 1) - num / den).abs() < 1e-13);
            // χ-law
            let law = chi_law(&t, l);
            for n in 0..l {
                let (num, den) = enumeration_measure(l, &lam, |_, st| st.crossings == n);
                assert!((law[n] - num / den).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sigma_weight_example() {
        // L=3, λ=1/2: ν(all +) = Z_wall(6)/Z_free(6) = 3.25/10
        let t = PartitionTable::<f64>::exact(6, 0.5).unwrap();
        let sigma = SignField::new(3, vec![1, 1, 1]).unwrap();
        let nu = t.sigma_weight(&sigma) / t.z_free(6);
        assert!((nu - 0.325).abs() < 1e-14);
        // ν(σ) = ν(-σ)
        for mask in 0u32..8 {
            let s = SignField::from_mask(3, mask);
            let sneg = SignField::from_mask(3, !mask & 7);
            assert!((t.sigma_weight(&s) - t.sigma_weight(&sneg)).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_weights_match_enumeration() {
        for l in 2..=6usize {
            let lam = 0.8;
            let t = PartitionTable::<f64>::exact(2 * l, lam).unwrap();
            for mask in 0u32..(1 << l) {
                let sigma = SignField::from_mask(l, mask);
                let (num, den) = enumeration_measure(l, &lam, |_, st| st.signs.mask() == mask);
                let nu = t.sigma_weight(&sigma) / t.z_free(2 * l);
                assert!((nu - num / den).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn crossing_law_normalization_and_symmetry() {
        let t = PartitionTable::<f64>::scaled(200, 0.5).unwrap();
        let kernel = ExcursionKernel::new(&t, None);
        let law = CrossingLaw::new(2, 100, kernel.weights()).unwrap();
        // total probability over all configurations
        let mut total = 0.0;
        let li = 100i64;
        let m1 = law.marginal(1);
        let m2 = law.marginal(2);
        for &(_, p) in &m1 {
            assert!(p >= 0.0);
        }
        // marginals each sum to 1
        let s1: f64 = m1.iter().map(|p| p.1).sum();
        let s2: f64 = m2.iter().map(|p| p.1).sum();
        assert!((s1 - 1.0).abs() < 1e-12);
        assert!((s2 - 1.0).abs() < 1e-12);
        // ξ_1 symmetric to -ξ_2
        for &(x, p) in &m1 {
            let q = m2.iter().find(|&&(y, _)| y == -x).map(|v| v.1).unwrap();
            assert!((p - q).abs() < 1e-12);
        }
        // direct total over configs at a small instance
        let small = CrossingLaw::new(2, 6, kernel.weights()).unwrap();
        let mut tot_small = 0.0;
        for x1 in (-4..=4i64).step_by(2) {
            for x2 in (x1 + 2..=4).step_by(2) {
                tot_small += small.prob(&[x1, x2]);
            }
        }
        assert!((tot_small - 1.0).abs() < 1e-12);
        let _ = (total, li);
    }

    #[test]
    fn crossing_law_matches_enumeration() {
        // ν_n from the kernel vs conditioned enumeration at L ≤ 6
        let l = 5usize;
        let lam = 0.5;
        let te = PartitionTable::<f64>::exact(2 * l, lam).unwrap();
        let law = CrossingLaw::new(2, l, te.wall_slice()).unwrap();
        for x1 in (-3..=3i64).step_by(2) {
            for x2 in (x1 + 2..=3).step_by(2) {
                let (num, den) = enumeration_measure(l, &lam, |_, st| {
                    st.crossings == 2
                        && st.crossing_positions.positions() == [x1, x2]
                        && st.signs.signs()[0] == 1
                });
                let (cnum, _) =
                    enumeration_measure(l, &lam, |_, st| st.crossings == 2 && st.signs.signs()[0] == 1);
                assert!((law.prob(&[x1, x2]) - num / cnum).abs() < 1e-13);
                let _ = den;
            }
        }
    }

    #[test]
    fn first_segment_tail_trivial() {
        let t = PartitionTable::<f64>::scaled(64, 0.5).unwrap();
        let kernel = ExcursionKernel::new(&t, None);
        // n = 0: the single segment is always maximal
        assert!((first_segment_tail(&kernel, 0, 32).unwrap() - 1.0).abs() < 1e-14);
        // fully packed: single configuration
        let law = CrossingLaw::new(9, 10, kernel.weights()).unwrap();
        let config: Vec<i64> = (1..=9).map(|i| -10 + 2 * i).collect();
        assert!((law.prob(&config) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tail_exponent_three_halves() {
        let t = PartitionTable::<f64>::scaled(2000, 0.5).unwrap();
        let kernel = ExcursionKernel::new(&t, None);
        let fit = tail_fit(&kernel, 200, 2000).unwrap();
        assert!((fit.exponent + 1.5).abs() < 0.05, "slope {}", fit.exponent);
    }
}
