//! Small statistics toolbox for the Monte Carlo experiments: KS tests,
//! Wilson intervals, least squares, autocovariance fits.

/// Kolmogorov distribution tail `Q(λ) = 2 Σ_{k≥1} (-1)^{k-1} e^{-2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * lambda * lambda).exp();
        sum += sign * term;
        sign = -sign;
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS test of `samples` against the unit-rate exponential law.
/// Returns `(D, p)` with the usual asymptotic p-value.
pub fn ks_test_exp_unit(samples: &[f64]) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = 1.0 - (-x).exp();
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - f).abs());
    }
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    (d, kolmogorov_q(lam))
}

/// Two-sample KS test; ties are handled by evaluating both empirical CDFs on
/// the pooled support, which keeps the statistic exact and the p-value
/// conservative for discrete data.
pub fn ks_test_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    xs.extend_from_slice(b);
    xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    xs.dedup();
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let cdf = |s: &[f64], x: f64| -> f64 {
        // fraction of entries ≤ x
        let mut lo = 0usize;
        let mut hi = s.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            if s[mid] <= x {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo as f64 / s.len() as f64
    };
    let mut d: f64 = 0.0;
    for &x in &xs {
        d = d.max((cdf(&sa, x) - cdf(&sb, x)).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lam = (ne + 0.12 + 0.11 / ne) * d;
    (d, kolmogorov_q(lam))
}

/// Wilson score interval for a binomial proportion at `z` standard normal
/// quantiles (z = 1.96 for 95%).
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub slope_se: f64,
    pub n: usize,
}

/// Ordinary least squares `y = a + b x`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let slope_se = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    LinearFit {
        slope,
        intercept,
        r2,
        slope_se,
        n,
    }
}

/// Normalized autocovariance of an evenly sampled series at the given lags.
pub fn autocovariance(series: &[f64], lags: &[usize]) -> Vec<f64> {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    lags.iter()
        .map(|&k| {
            let mut acc = 0.0;
            for i in 0..n - k {
                acc += (series[i] - mean) * (series[i + k] - mean);
            }
            acc / ((n - k) as f64) / var
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::rng::StreamRng;

    #[test]
    fn ks_accepts_true_exponential() {
        let mut rng = StreamRng::new(17, 0);
        let xs: Vec<f64> = (0..2000).map(|_| rng.exponential(1.0)).collect();
        let (_, p) = ks_test_exp_unit(&xs);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn ks_rejects_wrong_law() {
        let mut rng = StreamRng::new(18, 0);
        let xs: Vec<f64> = (0..2000).map(|_| rng.uniform() * 2.0).collect();
        let (_, p) = ks_test_exp_unit(&xs);
        assert!(p < 1e-6, "p = {p}");
    }

    #[test]
    fn two_sample_ks_same_law() {
        let mut rng = StreamRng::new(19, 0);
        let a: Vec<f64> = (0..1500).map(|_| (rng.below(7)) as f64).collect();
        let b: Vec<f64> = (0..1500).map(|_| (rng.below(7)) as f64).collect();
        let (_, p) = ks_test_two_sample(&a, &b);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn wilson_basic() {
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
        assert!(hi - lo < 0.25);
    }

    #[test]
    fn linear_fit_exact_line() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 3.0 - 2.5 * x).collect();
        let f = linear_fit(&xs, &ys);
        assert!((f.slope + 2.5).abs() < 1e-12);
        assert!((f.intercept - 3.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }
}
