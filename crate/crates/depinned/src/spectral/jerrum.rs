//! Decomposition lower bound on the spectral gap.
//!
//! Partition the state space into blocks.  With `λ̄` the gap of the
//! projected chain (block-averaged rates), `λ_min` the worst within-block
//! gap, and `γ` the largest one-state escape rate out of its block,
//!
//! ```text
//! gap ≥ min{ λ̄/3, λ̄·λ_min / (λ̄ + 3γ) }.
//! ```
//!
//! Singleton-only partitions have no within-block dynamics; `λ_min` is then
//! reported as `None` and the bound degrades to `λ̄/3`.

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::spectral::solve::{solve_spectrum, SolveOptions};

#[derive(Clone, Debug)]
pub struct JerrumReport {
    pub lambda_bar: f64,
    pub lambda_min: Option<f64>,
    pub gamma: f64,
    pub bound: f64,
    pub exact_gap: f64,
    pub blocks: usize,
}

/// Evaluate the decomposition bound for the given block assignment and
/// compare it with the exact gap.
pub fn jerrum_bound(chain: &ReversibleChain, block_of: &[usize]) -> Result<JerrumReport> {
    if block_of.len() != chain.n {
        return Err(Error::Mismatch("block assignment length".into()));
    }
    let m = block_of.iter().copied().max().map_or(0, |b| b + 1);
    if m < 2 {
        return Err(Error::Degenerate(
            "the trivial one-block partition has no projected dynamics".into(),
        ));
    }
    let mut block_sizes = vec![0usize; m];
    for &b in block_of {
        block_sizes[b] += 1;
    }
    if block_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidConfig("every block must be nonempty".into()));
    }

    let pi = chain.pi();
    let mut pi_block = vec![0.0; m];
    for i in 0..chain.n {
        pi_block[block_of[i]] += pi[i];
    }

    // projected rates c̄(I,J) = Σ_{x∈I, y∈J} π(x|I)·c(x,y), escape rates γ
    let mut bar = vec![0.0; m * m];
    let mut escape = vec![0.0; chain.n];
    for (i, j, v) in chain.edges() {
        let (bi, bj) = (block_of[i], block_of[j]);
        if bi != bj {
            bar[bi * m + bj] += pi[i] / pi_block[bi] * v;
            escape[i] += v;
        }
    }
    let gamma = escape.iter().cloned().fold(0.0, f64::max);

    let mut bar_triplets = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a != b && bar[a * m + b] > 0.0 {
                bar_triplets.push((a as u32, b as u32, bar[a * m + b]));
            }
        }
    }
    let projected = ReversibleChain::new("projected", m, bar_triplets, pi_block)?;
    projected.check_irreducible()?;
    let lambda_bar = solve_spectrum(&projected, &SolveOptions::default())?.gap;

    // within-block gaps (reflected dynamics inside each block)
    let mut lambda_min: Option<f64> = None;
    for b in 0..m {
        if block_sizes[b] < 2 {
            continue;
        }
        let keep: Vec<bool> = block_of.iter().map(|&x| x == b).collect();
        let (triplets, weight, _) = chain.sub_rates(&keep);
        let sub = ReversibleChain::new(format!("block {b}"), block_sizes[b], triplets, weight)?;
        sub.check_irreducible()
            .map_err(|_| Error::Disconnected(format!("block {b} is internally disconnected")))?;
        let g = solve_spectrum(&sub, &SolveOptions::default())?.gap;
        lambda_min = Some(lambda_min.map_or(g, |cur: f64| cur.min(g)));
    }

    let bound = match lambda_min {
        Some(lm) => (lambda_bar / 3.0).min(lambda_bar * lm / (lambda_bar + 3.0 * gamma)),
        None => lambda_bar / 3.0,
    };
    let exact_gap = solve_spectrum(chain, &SolveOptions::default())?.gap;
    Ok(JerrumReport {
        lambda_bar,
        lambda_min,
        gamma,
        bound,
        exact_gap,
        blocks: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::path_stats;
    use crate::spectral::build_generator;

    #[test]
    fn singleton_partition_bound_holds() {
        let pc = build_generator(3, 0.5, None, None, 12).unwrap();
        let blocks: Vec<usize> = (0..pc.chain.n).collect();
        let r = jerrum_bound(&pc.chain, &blocks).unwrap();
        // the projected chain is the original chain
        assert!((r.lambda_bar - r.exact_gap).abs() < 1e-10 * r.exact_gap);
        assert!(r.lambda_min.is_none());
        assert!(r.bound <= r.exact_gap * (1.0 + 1e-12));
    }

    #[test]
    fn one_block_partition_rejected() {
        let pc = build_generator(2, 0.5, None, None, 12).unwrap();
        assert!(jerrum_bound(&pc.chain, &vec![0; pc.chain.n]).is_err());
    }

    #[test]
    fn sign_class_partition_bounds_gap() {
        for l in 3..=4usize {
            let pc = build_generator(l, 0.5, None, None, 12).unwrap();
            // block = sign field of the configuration
            let mut seen = std::collections::HashMap::new();
            let block_of: Vec<usize> = (0..pc.chain.n)
                .map(|i| {
                    let sig = path_stats(&pc.space.path(i)).signs.mask();
                    let next = seen.len();
                    *seen.entry(sig).or_insert(next)
                })
                .collect();
            let r = jerrum_bound(&pc.chain, &block_of).unwrap();
            assert!(
                r.exact_gap >= r.bound * (1.0 - 1e-10),
                "L={l}: gap {} < bound {}",
                r.exact_gap,
                r.bound
            );
            assert!(r.bound > 0.0);
        }
    }
}
