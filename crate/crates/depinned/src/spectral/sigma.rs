//! Projected dynamics on sign fields.
//!
//! Two distinct chains live on `σ ∈ {±1}^{O_L}`:
//!
//! - the *heat-bath* sign chain: at rate 1 each site resamples its sign from
//!   the conditional projected equilibrium `ν(·|σ_y, y≠x)`.  Its Dirichlet
//!   form is `Σ_x ν[Var_{ν_x}(f)]`, the object of the variational bounds.
//! - the *projected* chain arising from the block decomposition of the
//!   polymer dynamics by sign class: a flip at `x` happens at rate
//!   `½·π(η_{x-1} = η_{x+1} = 0 | Ω_σ)` (the averaged polymer rate), with
//!   the crossing/zero caps enforced exactly when requested.
//!
//! Both are reversible for the projection `ν(σ) ∝ λ^{χ(σ)}·Π Z_wall(gaps)`;
//! the capped variant is computed by exact path enumeration, the uncapped
//! rates also in closed form from segment partition functions.

use crate::chain::ReversibleChain;
use crate::equilibrium::PartitionTable;
use crate::error::{Error, Result};
use crate::path::SignField;
use crate::spectral::generator::mask_heights;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SigmaKind {
    HeatBath,
    Projected,
}

/// Crossing/zero restrictions for the projected chain (`None` = unrestricted).
#[derive(Clone, Copy, Debug, Default)]
pub struct SigmaCaps {
    pub max_crossings: Option<usize>,
    pub max_segment_zeros: Option<usize>,
}

pub struct SigmaChain {
    pub l: usize,
    pub lambda: f64,
    pub kind: SigmaKind,
    pub caps: SigmaCaps,
    /// Sign masks (bit `i` = sign at the `i`-th odd site), in mask order.
    pub masks: Vec<u32>,
    /// Position of each mask in `masks` (`u32::MAX` if excluded).
    index: Vec<u32>,
    pub chain: ReversibleChain,
}

impl SigmaChain {
    pub fn index_of(&self, mask: u32) -> Option<usize> {
        let i = self.index[mask as usize];
        (i != u32::MAX).then_some(i as usize)
    }

    pub fn sign_field(&self, i: usize) -> SignField {
        SignField::from_mask(self.l, self.masks[i])
    }

    pub fn chi(&self, i: usize) -> usize {
        mask_chi(self.masks[i], self.l)
    }
}

pub(crate) fn mask_chi(mask: u32, l: usize) -> usize {
    ((mask ^ (mask >> 1)) & ((1u32 << (l - 1)) - 1)).count_ones() as usize
}

/// Crossing positions of a sign mask, in paper coordinates.
fn mask_crossings(mask: u32, l: usize) -> Vec<i64> {
    (0..l - 1)
        .filter(|i| (mask >> i & 1) != (mask >> (i + 1) & 1))
        .map(|i| -(l as i64) + 2 * i as i64 + 2)
        .collect()
}

/// Heat-bath sign chain: flip rate `ν(σ^x)/(ν(σ) + ν(σ^x))`.
pub fn heat_bath_sigma_chain(l: usize, lambda: f64, l_max: usize) -> Result<SigmaChain> {
    if l < 2 || l > l_max {
        return Err(Error::Capacity {
            what: "half-length L",
            got: l,
            bound_name: "sign-chain L_max",
            bound: l_max,
        });
    }
    let table = PartitionTable::<f64>::exact(2 * l, lambda)?;
    let n = 1usize << l;
    let weights: Vec<f64> = (0..n as u32)
        .map(|m| table.sigma_weight(&SignField::from_mask(l, m)))
        .collect();
    let mut triplets = Vec::with_capacity(n * l);
    for m in 0..n as u32 {
        for i in 0..l {
            let m2 = m ^ (1 << i);
            let rate = weights[m2 as usize] / (weights[m as usize] + weights[m2 as usize]);
            triplets.push((m, m2, rate));
        }
    }
    let chain = ReversibleChain::new(
        format!("sign heat bath L={l} lambda={lambda}"),
        n,
        triplets,
        weights,
    )?;
    chain.check_irreducible()?;
    Ok(SigmaChain {
        l,
        lambda,
        kind: SigmaKind::HeatBath,
        caps: SigmaCaps::default(),
        masks: (0..n as u32).collect(),
        index: (0..n as u32).collect(),
        chain,
    })
}

/// Uncapped projected flip rate at odd-site index `i`, in closed form:
/// `½·λ^m·Z_w(a)·Z_w(2)·Z_w(b)/Z_w(len)` where the flip site splits its
/// segment into pieces of length `a`, 2, `b` and `m` counts the split zeros
/// interior to the segment.
pub fn projected_sigma_rate_formula(
    table: &PartitionTable<f64>,
    sigma: &SignField,
    i: usize,
) -> f64 {
    let l = sigma.half_len();
    let x = -(l as i64) + 1 + 2 * i as i64;
    let crossings = mask_crossings(sigma.mask(), l);
    let mut left = -(l as i64);
    let mut right = l as i64;
    for &c in &crossings {
        if c < x && c > left {
            left = c;
        }
        if c > x && c < right {
            right = c;
        }
    }
    let len = (right - left) as usize;
    let a = (x - 1 - left) as usize;
    let b = len - a - 2;
    let mut m = 0;
    if a > 0 {
        m += 1;
    }
    if a + 2 < len {
        m += 1;
    }
    let zw = |j: usize| if j == 0 { 1.0 } else { table.z_wall(j) };
    0.5 * table.lambda.powi(m) * zw(a) * zw(2) * zw(b) / zw(len)
}

/// Projected sign chain by exact path enumeration: stationary weights
/// `W(σ) = Σ_{η ~ σ, caps} λ^{N(η)}` and flip rates
/// `θ_x(σ) = ½·W(σ)^{-1}·Σ_{η ~ σ, caps, η_{x±1}=0, flip stays capped} λ^{N(η)}`.
pub fn projected_sigma_chain(
    l: usize,
    lambda: f64,
    caps: SigmaCaps,
    l_max: usize,
) -> Result<SigmaChain> {
    if l < 2 || l > l_max {
        return Err(Error::Capacity {
            what: "half-length L",
            got: l,
            bound_name: "sign-chain enumeration L_max",
            bound: l_max,
        });
    }
    let n_all = 1usize << l;
    let mc = caps.max_crossings.unwrap_or(usize::MAX);
    let mz = caps.max_segment_zeros.unwrap_or(usize::MAX);
    let unrestricted = caps.max_crossings.is_none() && caps.max_segment_zeros.is_none();

    let mut w = vec![0.0f64; n_all];
    let mut flips = vec![0.0f64; n_all * l];
    let mut zeros_buf: Vec<i64> = Vec::with_capacity(l);

    crate::combin::for_each_mask(l, |step_mask| {
        let h = mask_heights(step_mask, l);
        // sign mask and zero positions
        let mut sig = 0u32;
        for i in 0..l {
            if h[2 * i + 1] > 0 {
                sig |= 1 << i;
            }
        }
        zeros_buf.clear();
        for p in 1..2 * l {
            if h[p] == 0 {
                zeros_buf.push(p as i64 - l as i64);
            }
        }
        let n_zeros = zeros_buf.len();
        if !unrestricted && !caps_ok(sig, l, &zeros_buf, mc, mz) {
            return;
        }
        let weight = lambda.powi(n_zeros as i32);
        w[sig as usize] += weight;
        // flippable odd sites: both neighbours at zero
        for i in 0..l {
            let p = 2 * i + 1;
            if h[p - 1] == 0 && h[p + 1] == 0 {
                let target = sig ^ (1 << i);
                if unrestricted || caps_ok(target, l, &zeros_buf, mc, mz) {
                    flips[sig as usize * l + i] += 0.5 * weight;
                }
            }
        }
    });

    let mut masks = Vec::new();
    let mut index = vec![u32::MAX; n_all];
    for m in 0..n_all as u32 {
        if w[m as usize] > 0.0 {
            index[m as usize] = masks.len() as u32;
            masks.push(m);
        }
    }
    let mut triplets = Vec::new();
    let mut weights = Vec::with_capacity(masks.len());
    for (si, &m) in masks.iter().enumerate() {
        weights.push(w[m as usize]);
        for i in 0..l {
            let f = flips[m as usize * l + i];
            if f > 0.0 {
                let tgt = index[(m ^ (1 << i)) as usize];
                assert_ne!(tgt, u32::MAX, "flip target outside the state set");
                triplets.push((si as u32, tgt, f / w[m as usize]));
            }
        }
    }
    let chain = ReversibleChain::new(
        format!("projected sign chain L={l} lambda={lambda} caps={caps:?}"),
        masks.len(),
        triplets,
        weights,
    )?;
    chain.check_irreducible()?;
    Ok(SigmaChain {
        l,
        lambda,
        kind: SigmaKind::Projected,
        caps,
        masks,
        index,
        chain,
    })
}

/// Crossing-count and per-segment zero caps for a given sign mask and zero
/// set (zero positions in paper coordinates).
fn caps_ok(sig: u32, l: usize, zeros: &[i64], mc: usize, mz: usize) -> bool {
    let chi = mask_chi(sig, l);
    if chi > mc {
        return false;
    }
    if mz == usize::MAX {
        return true;
    }
    // walk the zeros against the crossing positions of sig
    let crossings = mask_crossings(sig, l);
    let mut seg_count = 0usize;
    let mut c_idx = 0usize;
    for &z in zeros {
        while c_idx < crossings.len() && crossings[c_idx] < z {
            seg_count = 0;
            c_idx += 1;
        }
        if c_idx < crossings.len() && crossings[c_idx] == z {
            // the zero *is* a crossing; closes the segment
            seg_count = 0;
            c_idx += 1;
            continue;
        }
        seg_count += 1;
        if seg_count > mz {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{enumeration_measure, PartitionTable};

    #[test]
    fn projected_weights_match_product_form() {
        // W(σ) from enumeration equals λ^χ·Π Z_wall(gaps)
        let (l, lambda) = (5usize, 0.5);
        let table = PartitionTable::<f64>::exact(2 * l, lambda).unwrap();
        let sc = projected_sigma_chain(l, lambda, SigmaCaps::default(), 14).unwrap();
        for i in 0..sc.chain.n {
            let sf = sc.sign_field(i);
            let expect = table.sigma_weight(&sf);
            assert!(
                (sc.chain.weight[i] - expect).abs() < 1e-12 * expect,
                "σ mask {:b}",
                sc.masks[i]
            );
        }
    }

    #[test]
    fn projected_rates_match_formula() {
        let (l, lambda) = (6usize, 0.7);
        let table = PartitionTable::<f64>::exact(2 * l, lambda).unwrap();
        let sc = projected_sigma_chain(l, lambda, SigmaCaps::default(), 14).unwrap();
        for i in 0..sc.chain.n {
            let sf = sc.sign_field(i);
            for site in 0..l {
                let tgt = sc.index_of(sc.masks[i] ^ (1 << site)).unwrap();
                let got = sc.chain.rate(i, tgt);
                let want = projected_sigma_rate_formula(&table, &sf, site);
                assert!(
                    (got - want).abs() < 1e-12 * want.max(1e-12),
                    "σ {:b} site {site}: {got} vs {want}",
                    sc.masks[i]
                );
            }
        }
    }

    #[test]
    fn projected_detailed_balance_and_symmetry() {
        for l in 2..=6usize {
            let sc = projected_sigma_chain(l, 0.5, SigmaCaps::default(), 14).unwrap();
            assert!(sc.chain.detailed_balance_error() < 1e-12, "L={l}");
            // ν(σ) = ν(-σ)
            let all = (1u32 << l) - 1;
            for i in 0..sc.chain.n {
                let j = sc.index_of(!sc.masks[i] & all).unwrap();
                let (a, b) = (sc.chain.weight[i], sc.chain.weight[j]);
                assert!((a - b).abs() < 1e-12 * a);
            }
        }
    }

    #[test]
    fn heat_bath_flip_probabilities_match_enumeration() {
        let (l, lambda) = (4usize, 0.5);
        let hb = heat_bath_sigma_chain(l, lambda, 14).unwrap();
        assert!(hb.chain.detailed_balance_error() < 1e-13);
        // ν̃(σ) agrees with the enumeration projection
        for m in 0..(1u32 << l) {
            let (num, _) = enumeration_measure(l, &lambda, |_, st| st.signs.mask() == m);
            assert!((hb.chain.weight[m as usize] - num).abs() < 1e-12 * num.max(1e-12));
        }
    }

    #[test]
    fn capped_chain_prunes_states() {
        let l = 6usize;
        let capped = projected_sigma_chain(
            l,
            0.5,
            SigmaCaps {
                max_crossings: Some(2),
                max_segment_zeros: Some(2),
            },
            14,
        )
        .unwrap();
        assert!(capped.chain.n < 1 << l);
        assert!(capped.masks.iter().all(|&m| mask_chi(m, l) <= 2));
        assert!(capped.chain.detailed_balance_error() < 1e-12);
        capped.chain.check_irreducible().unwrap();
    }

    #[test]
    fn capped_weights_match_capped_product() {
        let (l, lambda) = (5usize, 0.6);
        let mz = 1usize;
        let table = PartitionTable::<f64>::exact(2 * l, lambda)
            .unwrap()
            .with_wall_zero_counts(l);
        let sc = projected_sigma_chain(
            l,
            lambda,
            SigmaCaps {
                max_crossings: None,
                max_segment_zeros: Some(mz),
            },
            14,
        )
        .unwrap();
        for i in 0..sc.chain.n {
            let sf = sc.sign_field(i);
            let gaps = sf.crossings().gaps();
            let mut expect = lambda.powi(gaps.len() as i32 - 1);
            for g in gaps {
                expect *= table.z_wall_capped(g as usize, mz);
            }
            assert!(
                (sc.chain.weight[i] - expect).abs() < 1e-12 * expect.max(1e-12),
                "σ {:b}: {} vs {expect}",
                sc.masks[i],
                sc.chain.weight[i]
            );
        }
    }
}
