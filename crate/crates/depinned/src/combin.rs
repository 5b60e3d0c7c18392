//! Counting helpers for lattice bridges: binomial tables, the canonical
//! (lexicographic) ranking of balanced step sequences, and excursion counts.
//!
//! Conventions used throughout the crate:
//!
//! - A bridge of half-length `L` is a sequence of `2L` steps in `{-1,+1}`
//!   with zero sum.  Steps are ordered left to right; heights are the
//!   partial sums, so `η_x = Σ_{p < x+L} s_p` with `η_{-L} = 0`.
//! - The canonical order on bridges is lexicographic on the step sequence
//!   with `-1 < +1`.  Rank 0 is the minimal path (all `-1` first), the last
//!   rank is the maximal path.
//! - Bit masks: bit `p` of a `u32` is set iff step `p` is `+1`; masks are the
//!   compact state representation for the exact solvers (`2L ≤ 28` needed at
//!   the largest enumerated sizes).

/// binom(n, k) as exact `u64` (n ≤ 62 is far beyond any enumerated size here).
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Number of bridges of half-length `l`: binom(2l, l).
pub fn bridge_count(l: usize) -> u64 {
    binomial(2 * l, l)
}

/// Dense binomial lookup for hot ranking loops.
pub struct BinomTable {
    n_max: usize,
    t: Vec<u64>,
}

impl BinomTable {
    pub fn new(n_max: usize) -> Self {
        let mut t = vec![0u64; (n_max + 1) * (n_max + 1)];
        for n in 0..=n_max {
            t[n * (n_max + 1)] = 1;
            for k in 1..=n {
                let up = t[(n - 1) * (n_max + 1) + k];
                let upleft = t[(n - 1) * (n_max + 1) + k - 1];
                t[n * (n_max + 1) + k] = up + upleft;
            }
        }
        Self { n_max, t }
    }

    #[inline]
    pub fn get(&self, n: usize, k: usize) -> u64 {
        if k > n {
            0
        } else {
            self.t[n * (self.n_max + 1) + k]
        }
    }

    /// [`rank_mask`] with table lookups instead of on-the-fly products.
    pub fn rank(&self, mask: u32, l: usize) -> u64 {
        let n = 2 * l;
        let mut rank = 0u64;
        let mut plus_left = l;
        for p in 0..n {
            if mask >> p & 1 == 1 {
                rank += self.get(n - p - 1, plus_left);
                plus_left -= 1;
            }
        }
        rank
    }
}

/// Lexicographic rank of a balanced step mask among all bridges of
/// half-length `l` (bit p set = step `+1`, `-1 < +1`).
pub fn rank_mask(mask: u32, l: usize) -> u64 {
    let n = 2 * l;
    let mut rank = 0u64;
    let mut plus_left = l; // +1 steps still to place
    for p in 0..n {
        let rem = n - p - 1; // steps after this one
        if mask >> p & 1 == 1 {
            // all completions that put -1 here come first
            rank += binomial(rem, plus_left);
            plus_left -= 1;
        }
    }
    rank
}

/// Inverse of [`rank_mask`].
pub fn unrank_mask(mut rank: u64, l: usize) -> u32 {
    let n = 2 * l;
    let mut mask = 0u32;
    let mut plus_left = l;
    for p in 0..n {
        let rem = n - p - 1;
        let with_minus = if plus_left <= rem {
            binomial(rem, plus_left)
        } else {
            0
        };
        if rank < with_minus {
            // place -1 (bit stays 0)
        } else {
            rank -= with_minus;
            mask |= 1 << p;
            plus_left -= 1;
        }
    }
    debug_assert_eq!(rank, 0);
    mask
}

/// Visit every bridge of half-length `l` in canonical order.  The callback
/// receives the step mask; heights are cheap to rebuild on demand.
pub fn for_each_mask(l: usize, mut f: impl FnMut(u32)) {
    let n = 2 * l;
    // DFS over prefixes, pruning heights the remaining steps cannot close.
    let mut stack: Vec<(usize, i32, u32)> = vec![(0, 0, 0)]; // (pos, height, mask)
    while let Some((p, h, mask)) = stack.pop() {
        if p == n {
            f(mask);
            continue;
        }
        let rem = (n - p) as i32;
        // push +1 first so that -1 is processed first (stack is LIFO)
        if (h + 1).abs() <= rem - 1 {
            stack.push((p + 1, h + 1, mask | (1 << p)));
        }
        if (h - 1).abs() <= rem - 1 {
            stack.push((p + 1, h - 1, mask));
        }
    }
}

/// Catalan numbers as exact ring elements via the convolution recursion
/// `Cat(m+1) = Σ_i Cat(i)·Cat(m-i)`; `out[m] = Cat(m)`.
pub fn catalan_ring<T>(m_max: usize, one: T) -> Vec<T>
where
    T: Clone + std::ops::Add<Output = T> + std::ops::Mul<Output = T>,
{
    let mut cat = Vec::with_capacity(m_max + 1);
    cat.push(one);
    for m in 1..=m_max {
        let mut s = cat[0].clone() * cat[m - 1].clone();
        for i in 1..m {
            s = s + cat[i].clone() * cat[m - 1 - i].clone();
        }
        cat.push(s);
    }
    cat
}

/// Scaled excursion weights `ê(2r) = 4^{-r}·Cat(r-1)`, the number of strictly
/// positive excursions of length `2r` in the natural `2^{-length}` scale.
/// `out[r] = ê(2r)` for `r = 1..=r_max` (`out[0]` unused, set to 0).
///
/// Stable to `r ~ 10^5`: the ratio `ê(2r+2)/ê(2r) = (2r-1)/(2r+2)` never
/// overflows, and `ê(2r) ~ r^{-3/2}/(4√π)`.
pub fn scaled_excursion_weights(r_max: usize) -> Vec<f64> {
    let mut e = vec![0.0; r_max + 1];
    if r_max >= 1 {
        e[1] = 0.25;
    }
    for r in 1..r_max {
        e[r + 1] = e[r] * (2.0 * r as f64 - 1.0) / (2.0 * r as f64 + 2.0);
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(2, 1), 2);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(bridge_count(10), 184_756);
    }

    #[test]
    fn rank_unrank_roundtrip() {
        for l in 1..=5 {
            let total = bridge_count(l);
            let mut seen = 0u64;
            let mut last: Option<u64> = None;
            for_each_mask(l, |m| {
                let r = rank_mask(m, l);
                assert_eq!(unrank_mask(r, l), m);
                // canonical order must be strictly increasing in rank
                if let Some(prev) = last {
                    assert_eq!(r, prev + 1);
                } else {
                    assert_eq!(r, 0);
                }
                last = Some(r);
                seen += 1;
            });
            assert_eq!(seen, total);
        }
    }

    #[test]
    fn catalan_values() {
        let cat = catalan_ring::<u64>(9, 1);
        assert_eq!(&cat[..7], &[1, 1, 2, 5, 14, 42, 132]);
        let e = scaled_excursion_weights(4);
        assert!((e[1] - 0.25).abs() < 1e-15);
        assert!((e[2] - 1.0 / 16.0).abs() < 1e-15);
        assert!((e[3] - 2.0 / 64.0).abs() < 1e-15);
    }
}
