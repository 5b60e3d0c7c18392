//! Variational quotient for the heat-bath sign chain.
//!
//! The test function is a ramp in the magnetization-like coordinate
//! `ζ(σ) = #{+1 sites}`: `f = -1` below `L/4`, `+1` above `3L/4`, linear in
//! between.  The quotient `Σ_x ν[Var_{ν_x}(f)] / Var_ν(f)` upper-bounds the
//! gap of the sign chain; its `L^{-5/2}·log L` size is what pins the
//! relaxation exponent from below.
//!
//! Backends: exact enumeration of all `2^L` sign fields (small `L`), or
//! direct Monte Carlo with exact samples from the projection `ν` (crossing
//! number from its closed-form law, then positions left to right from the
//! convolution conditionals, then a fair global sign).

use crate::equilibrium::{chi_law, conv_powers, PartitionTable};
use crate::error::{Error, Result};
use crate::mc::rng::StreamRng;
use crate::par;
use crate::path::SignField;
use crate::spectral::heat_bath_sigma_chain;

#[derive(Clone, Debug)]
pub struct QuotientReport {
    pub l: usize,
    pub lambda: f64,
    pub dirichlet: f64,
    pub variance: f64,
    pub quotient: f64,
    pub backend: &'static str,
    pub n_samples: usize,
}

fn ramp(zeta: usize, l: usize) -> f64 {
    let s = zeta as f64 / l as f64;
    ((s - 0.5) * 4.0).clamp(-1.0, 1.0)
}

/// Exact quotient by enumeration of sign fields (`L ≤ 14`).
pub fn sigma_quotient_exact(l: usize, lambda: f64, l_max: usize) -> Result<QuotientReport> {
    let hb = heat_bath_sigma_chain(l, lambda, l_max)?;
    let n = hb.chain.n;
    let f: Vec<f64> = (0..n)
        .map(|i| ramp(hb.sign_field(i).plus_count(), l))
        .collect();
    // heat-bath Dirichlet form = Σ_x ν[Var_{ν_x}(f)]
    let dirichlet = hb.chain.dirichlet(&f);
    let variance = hb.chain.variance(&f);
    Ok(QuotientReport {
        l,
        lambda,
        dirichlet,
        variance,
        quotient: dirichlet / variance,
        backend: "exact",
        n_samples: n,
    })
}

/// Exact sampler for the sign-field projection `ν`.
pub struct SigmaSampler {
    pub l: usize,
    lambda: f64,
    /// Wall weights by half-length.
    w: Vec<f64>,
    /// `conv[k][m]`: k-segment convolutions.
    conv: Vec<Vec<f64>>,
    /// Cumulative crossing-number law.
    chi_cdf: Vec<f64>,
}

impl SigmaSampler {
    pub fn new(l: usize, lambda: f64) -> Result<Self> {
        let table = PartitionTable::<f64>::scaled(2 * l, lambda)?;
        let w = table.wall_slice().to_vec();
        let conv = conv_powers(&w, l, l);
        let law = chi_law(&table, l);
        let mut chi_cdf = Vec::with_capacity(law.len());
        let mut acc = 0.0;
        for p in law {
            acc += p;
            chi_cdf.push(acc);
        }
        Ok(Self {
            l,
            lambda,
            w,
            conv,
            chi_cdf,
        })
    }

    /// Draw a sign field exactly from `ν`.
    pub fn sample(&self, rng: &mut StreamRng) -> SignField {
        let l = self.l;
        let u = rng.uniform() * self.chi_cdf.last().unwrap();
        let n = self.chi_cdf.partition_point(|&c| c < u).min(l - 1);
        // positions left to right: P(ξ_j = x | rest to the right) ∝
        // w((x-prev)/2)·conv_{n-j}((L-x)/2)
        let mut signs = vec![0i8; l];
        let mut prev = -(l as i64);
        let mut sign = if rng.uniform() < 0.5 { 1i8 } else { -1 };
        let mut seg_start = 0usize;
        for j in 0..n {
            let remaining = n - j; // segments after this crossing
            let mut acc = 0.0;
            let mut weights = Vec::new();
            let mut xs = Vec::new();
            let mut x = prev + 2;
            while x <= l as i64 - 2 * remaining as i64 {
                let m_left = ((x - prev) / 2) as usize;
                let m_right = ((l as i64 - x) / 2) as usize;
                let wv = self.w[m_left] * self.conv[remaining][m_right];
                xs.push(x);
                weights.push(wv);
                acc += wv;
                x += 2;
            }
            let target = rng.uniform() * acc;
            let mut cum = 0.0;
            let mut chosen = *xs.last().unwrap();
            for (i, &wv) in weights.iter().enumerate() {
                cum += wv;
                if target <= cum {
                    chosen = xs[i];
                    break;
                }
            }
            // fill the segment [prev, chosen) with the current sign
            let seg_end = ((chosen + l as i64 - 1) / 2) as usize;
            for s in signs.iter_mut().take(seg_end).skip(seg_start) {
                *s = sign;
            }
            seg_start = seg_end;
            sign = -sign;
            prev = chosen;
        }
        for s in signs.iter_mut().skip(seg_start) {
            *s = sign;
        }
        SignField::new(l, signs).expect("sampler produces valid sign fields")
    }

    /// Unnormalized `ν` weight of a sign field.
    pub fn weight(&self, sigma: &SignField) -> f64 {
        let gaps = sigma.crossings().gaps();
        let mut acc = self.lambda.powi(gaps.len() as i32 - 1);
        for g in gaps {
            acc *= self.w[(g / 2) as usize];
        }
        acc
    }
}

/// Monte Carlo quotient with exact `ν` samples (no burn-in).
pub fn sigma_quotient_mc(
    l: usize,
    lambda: f64,
    n_mc: usize,
    seed: u64,
) -> Result<QuotientReport> {
    if l > 32 {
        return Err(Error::Capacity {
            what: "half-length L",
            got: l,
            bound_name: "sign-field word width",
            bound: 32,
        });
    }
    let sampler = SigmaSampler::new(l, lambda)?;
    let acc = par::map_indexed_auto(n_mc, |r| {
        let mut rng = StreamRng::new(seed, r as u64);
        let sigma = sampler.sample(&mut rng);
        let zeta = sigma.plus_count();
        let f = ramp(zeta, l);
        let w = sampler.weight(&sigma);
        // Σ_x Var_{ν_x}(f): two-point conditional variances
        let mut dsum = 0.0;
        for i in 0..l {
            let flipped = sigma.flipped_at(i);
            let wf = sampler.weight(&flipped);
            let p = wf / (w + wf);
            let z2 = if flipped.signs()[i] == 1 {
                zeta + 1
            } else {
                zeta - 1
            };
            let df = ramp(z2, l) - f;
            dsum += p * (1.0 - p) * df * df;
        }
        (dsum, f, f * f)
    });
    let n = n_mc as f64;
    let dirichlet: f64 = acc.iter().map(|a| a.0).sum::<f64>() / n;
    let mean_f: f64 = acc.iter().map(|a| a.1).sum::<f64>() / n;
    let mean_f2: f64 = acc.iter().map(|a| a.2).sum::<f64>() / n;
    let variance = mean_f2 - mean_f * mean_f;
    if variance <= 0.0 {
        return Err(Error::Degenerate(
            "Monte Carlo variance estimate collapsed; raise n_mc".into(),
        ));
    }
    Ok(QuotientReport {
        l,
        lambda,
        dirichlet,
        variance,
        quotient: dirichlet / variance,
        backend: "mc",
        n_samples: n_mc,
    })
}

/// Exact `ν(L/4 ≤ ζ ≤ 3L/4)` by a segment DP that tracks the number of
/// `+` sites (`O(L³)`; comfortable to `L ~ 200`).
pub fn zeta_band_probability(l: usize, lambda: f64) -> Result<f64> {
    let table = PartitionTable::<f64>::scaled(2 * l, lambda)?;
    let w = table.wall_slice();
    // dp_plus[m][z]: weight of prefixes ending with a crossing at half-
    // position m, z plus-sites so far, next segment positive; dp_minus the
    // mirror.  Start (m = 0) covers both global signs.
    let mut dp_plus: Vec<Vec<f64>> = vec![vec![0.0; l + 1]; l + 1];
    let mut dp_minus = dp_plus.clone();
    dp_plus[0][0] = 1.0;
    dp_minus[0][0] = 1.0;
    for m in 1..l {
        for z in 0..=l {
            let mut into_minus = 0.0; // a + segment just closed
            let mut into_plus = 0.0;
            for r in 1..=m {
                if z >= r {
                    into_minus += dp_plus[m - r][z - r] * w[r] * lambda;
                }
                into_plus += dp_minus[m - r][z] * w[r] * lambda;
            }
            dp_minus[m][z] += into_minus;
            dp_plus[m][z] += into_plus;
        }
    }
    // close with the final (crossing-free) segment
    let lo = (l as f64 / 4.0).ceil() as usize;
    let hi = (3.0 * l as f64 / 4.0).floor() as usize;
    let mut band = 0.0;
    let mut total = 0.0;
    for m in 0..l {
        let r = l - m;
        for z in 0..=l {
            let a = dp_plus[m][z];
            if a > 0.0 {
                let zf = z + r;
                total += a * w[r];
                if zf >= lo && zf <= hi {
                    band += a * w[r];
                }
            }
            let b = dp_minus[m][z];
            if b > 0.0 {
                total += b * w[r];
                if z >= lo && z <= hi {
                    band += b * w[r];
                }
            }
        }
    }
    Ok(band / total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{solve_spectrum, SolveOptions};

    #[test]
    fn quotient_bounds_exact_gap() {
        for l in [6usize, 8] {
            let hb = heat_bath_sigma_chain(l, 0.5, 14).unwrap();
            let gap = solve_spectrum(&hb.chain, &SolveOptions::default())
                .unwrap()
                .gap;
            let q = sigma_quotient_exact(l, 0.5, 14).unwrap();
            assert!(
                q.quotient >= gap * (1.0 - 1e-10),
                "L={l}: quotient {} < gap {gap}",
                q.quotient
            );
        }
    }

    #[test]
    fn sampler_matches_exact_law() {
        // empirical ζ-distribution vs exact enumeration weights at L=6
        let l = 6usize;
        let lambda = 0.5;
        let sampler = SigmaSampler::new(l, lambda).unwrap();
        let mut rng = StreamRng::new(5, 9);
        let n = 200_000usize;
        let mut counts = vec![0usize; l + 1];
        for _ in 0..n {
            counts[sampler.sample(&mut rng).plus_count()] += 1;
        }
        // exact law by enumeration of sign fields
        let table = PartitionTable::<f64>::exact(2 * l, lambda).unwrap();
        let mut exact = vec![0.0; l + 1];
        let mut z = 0.0;
        for mask in 0u32..(1 << l) {
            let sf = SignField::from_mask(l, mask);
            let w = table.sigma_weight(&sf);
            exact[sf.plus_count()] += w;
            z += w;
        }
        for zc in 0..=l {
            let emp = counts[zc] as f64 / n as f64;
            let ex = exact[zc] / z;
            assert!(
                (emp - ex).abs() < 5.0 * (ex * (1.0 - ex) / n as f64).sqrt() + 2e-3,
                "ζ={zc}: {emp} vs {ex}"
            );
        }
    }

    #[test]
    fn mc_quotient_agrees_with_exact() {
        let (l, lambda) = (8usize, 0.5);
        let exact = sigma_quotient_exact(l, lambda, 14).unwrap();
        let mc = sigma_quotient_mc(l, lambda, 60_000, 31).unwrap();
        assert!(
            (mc.quotient - exact.quotient).abs() < 0.1 * exact.quotient,
            "mc {} vs exact {}",
            mc.quotient,
            exact.quotient
        );
    }

    #[test]
    fn zeta_band_matches_enumeration() {
        let (l, lambda) = (6usize, 0.5);
        let band = zeta_band_probability(l, lambda).unwrap();
        let table = PartitionTable::<f64>::exact(2 * l, lambda).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        let lo = (l as f64 / 4.0).ceil() as usize;
        let hi = (3.0 * l as f64 / 4.0).floor() as usize;
        for mask in 0u32..(1 << l) {
            let sf = SignField::from_mask(l, mask);
            let w = table.sigma_weight(&sf);
            den += w;
            let zc = sf.plus_count();
            if zc >= lo && zc <= hi {
                num += w;
            }
        }
        assert!(
            (band - num / den).abs() < 1e-10,
            "band {band} vs {}",
            num / den
        );
    }
}
