//! Enumerated state spaces and the heat-bath generator.
//!
//! States are step masks in canonical order (see [`crate::combin`]).  The
//! full space needs no lookup table: the canonical rank *is* the index.
//! Restricted spaces (floor/ceiling constraints, crossing/zero caps) keep a
//! hash map from mask to index; moves that leave the restricted set get rate
//! zero, which is exactly the constrained heat bath.

use crate::chain::ReversibleChain;
use crate::combin::{for_each_mask, BinomTable};
use crate::error::{Error, Result};
use crate::path::{classify, BoundaryPair, PathConfig};
use std::collections::HashMap;

/// Indexed set of step masks in canonical order.
pub struct StateSpace {
    pub l: usize,
    pub masks: Vec<u32>,
    binom: BinomTable,
    full: bool,
    lookup: Option<HashMap<u32, u32>>,
}

impl StateSpace {
    pub fn full(l: usize) -> Self {
        let mut masks = Vec::new();
        for_each_mask(l, |m| masks.push(m));
        Self {
            l,
            masks,
            binom: BinomTable::new(2 * l),
            full: true,
            lookup: None,
        }
    }

    pub fn restricted(l: usize, mut keep: impl FnMut(u32) -> bool) -> Self {
        let mut masks = Vec::new();
        for_each_mask(l, |m| {
            if keep(m) {
                masks.push(m)
            }
        });
        let lookup = masks
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i as u32))
            .collect();
        Self {
            l,
            masks,
            binom: BinomTable::new(2 * l),
            full: false,
            lookup: Some(lookup),
        }
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn index_of(&self, mask: u32) -> Option<usize> {
        if self.full {
            Some(self.binom.rank(mask, self.l) as usize)
        } else {
            self.lookup
                .as_ref()
                .unwrap()
                .get(&mask)
                .map(|&i| i as usize)
        }
    }

    pub fn path(&self, i: usize) -> PathConfig {
        PathConfig::from_mask(self.l, self.masks[i])
    }

    /// Index of the reflected configuration `η ↦ -η` (mask complement).
    pub fn reflected_index(&self, i: usize) -> Option<usize> {
        let all = if self.l == 16 {
            u32::MAX
        } else {
            (1u32 << (2 * self.l)) - 1
        };
        self.index_of(!self.masks[i] & all)
    }

    /// Reflection index map for the whole space (None if not closed under it).
    pub fn reflection_map(&self) -> Option<Vec<u32>> {
        let mut map = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            map.push(self.reflected_index(i)? as u32);
        }
        Some(map)
    }

    pub fn heights(&self, i: usize) -> Vec<i32> {
        mask_heights(self.masks[i], self.l)
    }
}

pub(crate) fn mask_heights(mask: u32, l: usize) -> Vec<i32> {
    let mut h = Vec::with_capacity(2 * l + 1);
    let mut acc = 0i32;
    h.push(acc);
    for p in 0..2 * l {
        acc += if mask >> p & 1 == 1 { 1 } else { -1 };
        h.push(acc);
    }
    h
}

fn mask_zero_count(mask: u32, l: usize) -> usize {
    let mut acc = 0i32;
    let mut zeros = 0usize;
    for p in 0..2 * l - 1 {
        acc += if mask >> p & 1 == 1 { 1 } else { -1 };
        if acc == 0 {
            zeros += 1;
        }
    }
    zeros
}

/// A polymer chain: the enumerated space together with the heat-bath
/// generator and stationary weights `λ^{N(η)}`.
pub struct PolymerChain {
    pub l: usize,
    pub lambda: f64,
    pub space: StateSpace,
    pub chain: ReversibleChain,
    /// Index of the maximal configuration, when present in the space.
    pub top: Option<usize>,
    /// Index of the minimal configuration, when present.
    pub bottom: Option<usize>,
}

impl PolymerChain {
    /// Vector of `f(η)` over the state space.
    pub fn observable(&self, mut f: impl FnMut(&PathConfig) -> f64) -> Vec<f64> {
        (0..self.space.len())
            .map(|i| f(&self.space.path(i)))
            .collect()
    }
}

/// Assemble the single-site heat-bath generator on the (possibly
/// constrained) bridge space.
///
/// Rates at a site whose two neighbours share the height `h`: both moves at
/// rate 1/2 when `|h| ≠ 1`; toward zero at rate `λ/(λ+1)` and away at
/// `1/(λ+1)` when `|h| = 1`; zero when the neighbours disagree or the move
/// leaves the constraint set.
///
/// `bounds` keeps `ζ ≤ η ≤ ξ`; `cap_coeff` further restricts to at most
/// `c·ln L` crossings and per-segment zeros.
pub fn build_generator(
    l: usize,
    lambda: f64,
    bounds: Option<&BoundaryPair>,
    cap_coeff: Option<f64>,
    l_max: usize,
) -> Result<PolymerChain> {
    if l < 1 || l > l_max {
        return Err(Error::Capacity {
            what: "half-length L",
            got: l,
            bound_name: "enumeration L_max",
            bound: l_max,
        });
    }
    if lambda <= 0.0 {
        return Err(Error::InvalidConfig("lambda must be > 0".into()));
    }
    let unconstrained = bounds.is_none() && cap_coeff.is_none();
    let keep = |mask: u32| -> bool {
        if unconstrained {
            return true;
        }
        let eta = PathConfig::from_mask(l, mask);
        if let Some(b) = bounds {
            if !b.contains(&eta) {
                return false;
            }
        }
        if let Some(c) = cap_coeff {
            if !classify(&eta, 1, c).few_crossings {
                return false;
            }
        }
        true
    };
    let space = if unconstrained {
        StateSpace::full(l)
    } else {
        StateSpace::restricted(l, keep)
    };
    if space.is_empty() {
        return Err(Error::Degenerate("empty constrained space".into()));
    }

    let rate_half = 0.5;
    let rate_to_zero = lambda / (lambda + 1.0);
    let rate_from_zero = 1.0 / (lambda + 1.0);

    let n = space.len();
    let mut triplets: Vec<(u32, u32, f64)> = Vec::with_capacity(n * l);
    let mut weight = Vec::with_capacity(n);
    for i in 0..n {
        let mask = space.masks[i];
        let h = mask_heights(mask, l);
        weight.push(lambda.powi(mask_zero_count(mask, l) as i32));
        for p in 1..2 * l {
            let lo = mask >> (p - 1) & 1;
            let hi = mask >> p & 1;
            if lo == hi {
                continue; // neighbours differ by 2: frozen site
            }
            let neighbour = mask ^ (0b11 << (p - 1));
            let Some(j) = space.index_of(neighbour) else {
                continue; // move leaves the constraint set
            };
            let hh = h[p - 1]; // common neighbour height
            let up = lo == 0; // a valley flips upward, a peak downward
            let rate = match (hh, up) {
                (1, true) => rate_from_zero,   // 0 → 2
                (1, false) => rate_to_zero,    // 2 → 0
                (-1, true) => rate_to_zero,    // -2 → 0
                (-1, false) => rate_from_zero, // 0 → -2
                _ => rate_half,
            };
            triplets.push((i as u32, j as u32, rate));
        }
    }
    let chain = ReversibleChain::new(
        format!(
            "polymer L={l} lambda={lambda}{}{}",
            if bounds.is_some() { " bounded" } else { "" },
            if cap_coeff.is_some() { " capped" } else { "" }
        ),
        n,
        triplets,
        weight,
    )?;
    chain.check_irreducible()?;
    let top = space.index_of(crate::path::maximal_path(l).mask());
    let bottom = space.index_of(crate::path::minimal_path(l).mask());
    Ok(PolymerChain {
        l,
        lambda,
        space,
        chain,
        top,
        bottom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_is_the_symmetric_two_state_chain() {
        let pc = build_generator(1, 0.5, None, None, 12).unwrap();
        assert_eq!(pc.chain.n, 2);
        // both states talk to each other at rate 1/2 (neighbours at height 0)
        assert!((pc.chain.rate(0, 1) - 0.5).abs() < 1e-15);
        assert!((pc.chain.rate(1, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rates_follow_the_table() {
        // L=2: heights (0,1,2,1,0) can move its centre down to (0,1,0,1,0):
        // the neighbours sit at h=1, so the move toward zero has rate λ/(λ+1)
        let lambda = 0.5;
        let pc = build_generator(2, lambda, None, None, 12).unwrap();
        let peak: PathConfig = "++--".parse().unwrap();
        let mid = PathConfig::from_heights(&[0, 1, 0, 1, 0]).unwrap();
        let i = pc.space.index_of(peak.mask()).unwrap();
        let j = pc.space.index_of(mid.mask()).unwrap();
        assert!((pc.chain.rate(i, j) - lambda / (lambda + 1.0)).abs() < 1e-15);
        assert!((pc.chain.rate(j, i) - 1.0 / (lambda + 1.0)).abs() < 1e-15);
        // detailed balance with weights λ^N
        assert!(pc.chain.detailed_balance_error() < 1e-14);
    }

    #[test]
    fn frozen_sites_have_no_edge() {
        // heights (0,1,2,1,0): site x=-1 has η_{-2}=0, η_0=2 — frozen
        let pc = build_generator(2, 0.5, None, None, 12).unwrap();
        let peak: PathConfig = "++--".parse().unwrap();
        let other = PathConfig::from_heights(&[0, -1, 0, 1, 0]).unwrap();
        let i = pc.space.index_of(peak.mask()).unwrap();
        let j = pc.space.index_of(other.mask()).unwrap();
        assert_eq!(pc.chain.rate(i, j), 0.0);
    }

    #[test]
    fn lambda_one_is_symmetric() {
        let pc = build_generator(3, 1.0, None, None, 12).unwrap();
        for (i, j, v) in pc.chain.edges() {
            assert!((v - 0.5).abs() < 1e-15, "rate {v} between {i} and {j}");
        }
    }

    #[test]
    fn wall_restriction_matches_direct_filter() {
        let l = 4;
        let b = BoundaryPair::wall_plus(l);
        let pc = build_generator(l, 0.5, Some(&b), None, 12).unwrap();
        // nonnegative bridges of length 8: Catalan-type count = C(8,4)/(4+1)
        assert_eq!(pc.chain.n, 14);
        pc.chain.check_irreducible().unwrap();
        assert!(pc.chain.detailed_balance_error() < 1e-14);
    }

    #[test]
    fn generator_row_sums_vanish() {
        // the assembled symmetric operator keeps -exit on the diagonal, so
        // D^{-1/2} A D^{1/2} has zero row sums; check via constant function
        let pc = build_generator(3, 0.7, None, None, 12).unwrap();
        let (a, _q) = pc.chain.symmetrized();
        let sqrt_w: Vec<f64> = pc.chain.weight.iter().map(|w| w.sqrt()).collect();
        let mut out = vec![0.0; pc.chain.n];
        a.mul_vec(&sqrt_w, &mut out);
        for i in 0..pc.chain.n {
            assert!(
                (out[i] / sqrt_w[i]).abs() < 1e-13,
                "row {i} residual {}",
                out[i]
            );
        }
    }
}
