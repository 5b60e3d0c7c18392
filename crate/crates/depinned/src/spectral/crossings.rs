//! Birth–death-plus-jump chain on the crossing count.
//!
//! Lump the projected sign chain, restricted to the half-space where the
//! leftmost sign is `+`, by the number of crossings.  Single sign flips
//! change the count by ±1 (a new crossing at the right boundary) or ±2 (a
//! pair inside an existing segment), so the lumped chain is a birth–death
//! chain with next-nearest jumps.  Its gap stays of order one in the system
//! size; that is the order-one factor of the decomposition argument.

use crate::chain::ReversibleChain;
use crate::error::{Error, Result};
use crate::spectral::sigma::{mask_chi, SigmaChain};
use crate::spectral::solve::{solve_spectrum, SolveOptions};

pub struct CrossingCountChain {
    /// Largest crossing count in the lumped chain.
    pub max_crossings: usize,
    /// `μ(n) = ν(χ = n | leftmost sign +)`.
    pub mu: Vec<f64>,
    pub chain: ReversibleChain,
    pub gap: f64,
}

/// Lump a projected sign chain on the `σ_{-L+1} = +1` half-space by the
/// crossing count.
pub fn crossing_count_chain(sigma: &SigmaChain) -> Result<CrossingCountChain> {
    let l = sigma.l;
    let mut m_max = 0usize;
    for &m in &sigma.masks {
        if m & 1 == 1 {
            m_max = m_max.max(mask_chi(m, l));
        }
    }
    let nb = m_max + 1;
    let mut mu_t = vec![0.0f64; nb];
    for i in 0..sigma.chain.n {
        let m = sigma.masks[i];
        if m & 1 == 1 {
            mu_t[mask_chi(m, l)] += sigma.chain.weight[i];
        }
    }
    // block-averaged flows; flips of the leftmost sign leave the half-space
    // and are censored
    let mut flow = vec![0.0f64; nb * nb];
    for (i, j, rate) in sigma.chain.edges() {
        let m = sigma.masks[i];
        let m2 = sigma.masks[j];
        if m & 1 == 0 || m2 & 1 == 0 {
            continue;
        }
        let (n, n2) = (mask_chi(m, l), mask_chi(m2, l));
        if n != n2 {
            flow[n * nb + n2] += sigma.chain.weight[i] * rate;
        }
    }
    if mu_t.iter().any(|&x| x <= 0.0) {
        return Err(Error::Degenerate(
            "empty crossing-count class in the half-space".into(),
        ));
    }
    let mut triplets = Vec::new();
    for a in 0..nb {
        for b in 0..nb {
            if a != b && flow[a * nb + b] > 0.0 {
                let d = (a as i64 - b as i64).abs();
                debug_assert!(d == 1 || d == 2, "crossing count jumped by {d}");
                triplets.push((a as u32, b as u32, flow[a * nb + b] / mu_t[a]));
            }
        }
    }
    let total: f64 = mu_t.iter().sum();
    let chain = ReversibleChain::new(
        format!("crossing count L={l} lambda={}", sigma.lambda),
        nb,
        triplets,
        mu_t.clone(),
    )?;
    chain.check_irreducible()?;
    let gap = solve_spectrum(&chain, &SolveOptions::default())?.gap;
    Ok(CrossingCountChain {
        max_crossings: m_max,
        mu: mu_t.iter().map(|x| x / total).collect(),
        chain,
        gap,
    })
}
