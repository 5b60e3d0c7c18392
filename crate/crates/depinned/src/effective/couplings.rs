//! Coupling experiments for the particle dynamics.
//!
//! *Packing*: from the worst initial configuration, the chance of reaching
//! the fully left-packed state before time `n²` is at least `½αⁿ`, where `α`
//! is the (uniformly positive) end-mass of the conditional law.
//!
//! *Block coupling*: two arbitrary configurations are matched by one sweep
//! of a staged schedule — push the rightmost blocks far right, then match
//! blocks left to right by maximally coupling each block's last particle and
//! diagonally coupling the interior given matched boundaries.

use crate::equilibrium::{conv_powers, ExcursionKernel};
use crate::error::{Error, Result};
use crate::mc::rng::StreamRng;
use crate::mc::stats::wilson_interval;
use crate::par;
use super::particles::ParticleSim;
#[cfg(test)]
use super::particles::conditional_particle_law;

#[derive(Clone, Debug)]
pub struct Epsilon1Report {
    pub n: usize,
    pub l: usize,
    pub hits: usize,
    pub n_runs: usize,
    pub p_hat: f64,
    pub wilson95: (f64, f64),
    /// Smallest conditional end-mass observed across all runs.
    pub alpha_min: f64,
    /// The packing bound `½·alpha_min^n` the empirical probability is
    /// compared against.
    pub packing_bound: f64,
}

/// Probability of hitting the left-packed configuration before time `n²`,
/// starting from the right-packed (worst) configuration.
pub fn epsilon1_experiment(
    kernel: &ExcursionKernel,
    n: usize,
    l: usize,
    n_runs: usize,
    seed: u64,
) -> Result<Epsilon1Report> {
    if n + 1 > l {
        return Err(Error::InvalidConfig("too many particles".into()));
    }
    let li = l as i64;
    let start: Vec<i64> = (0..n).map(|i| li - 2 * (n - i) as i64).collect();
    let target: Vec<i64> = (1..=n).map(|i| -li + 2 * i as i64).collect();
    let horizon = (n * n) as f64;
    let results = par::map_indexed_auto(n_runs, |r| {
        let mut rng = StreamRng::new(seed, r as u64);
        let mut sim = ParticleSim::new(kernel, l, start.clone()).expect("valid start");
        let mut hit = false;
        while sim.t < horizon {
            sim.step(&mut rng).expect("kernel covers the gaps");
            if sim.positions == target {
                hit = true;
                break;
            }
        }
        (hit, sim.min_end_mass)
    });
    let hits = results.iter().filter(|r| r.0).count();
    let alpha_min = results
        .iter()
        .map(|r| r.1)
        .fold(f64::INFINITY, f64::min);
    let p_hat = hits as f64 / n_runs as f64;
    Ok(Epsilon1Report {
        n,
        l,
        hits,
        n_runs,
        p_hat,
        wilson95: wilson_interval(hits, n_runs, 1.96),
        alpha_min,
        packing_bound: 0.5 * alpha_min.powi(n as i32),
    })
}

#[derive(Clone, Debug)]
pub struct BlockReport {
    pub k: usize,
    pub delta: usize,
    pub l: usize,
    pub coalesced: usize,
    pub n_runs: usize,
    pub p_hat: f64,
    pub wilson95: (f64, f64),
}

struct BlockSampler<'a> {
    kernel: &'a ExcursionKernel,
    /// `conv[k][m]`: k-segment convolution of the kernel weights.
    conv: Vec<Vec<f64>>,
}

impl<'a> BlockSampler<'a> {
    fn new(kernel: &'a ExcursionKernel, k_max: usize, l: usize) -> Self {
        let conv = conv_powers(kernel.weights(), k_max + 1, l);
        Self { kernel, conv }
    }

    /// Law of the last of `k` particles between boundaries `a < b`:
    /// `P(y) ∝ conv_k((y-a)/2)·w(b-y)`.
    fn last_particle_law(&self, k: usize, a: i64, b: i64) -> (Vec<i64>, Vec<f64>) {
        let mut ys = Vec::new();
        let mut ps = Vec::new();
        let mut y = a + 2 * k as i64;
        while y <= b - 2 {
            let m = ((y - a) / 2) as usize;
            ys.push(y);
            ps.push(self.conv[k][m] * self.kernel.w((b - y) as usize));
            y += 2;
        }
        let z: f64 = ps.iter().sum();
        for p in ps.iter_mut() {
            *p /= z;
        }
        (ys, ps)
    }

    /// Sample all `k` particles between `a < b`, left to right.
    fn sample_block(&self, k: usize, a: i64, b: i64, rng: &mut StreamRng) -> Vec<i64> {
        let mut out = Vec::with_capacity(k);
        let mut left = a;
        for rem in (1..=k).rev() {
            // first of the remaining `rem` particles in (left, b)
            let mut xs = Vec::new();
            let mut ps = Vec::new();
            let mut x = left + 2;
            while x <= b - 2 * rem as i64 {
                let tail = ((b - x) / 2) as usize;
                xs.push(x);
                ps.push(self.kernel.w((x - left) as usize) * self.conv[rem][tail]);
                x += 2;
            }
            let z: f64 = ps.iter().sum();
            let u = rng.uniform() * z;
            let mut acc = 0.0;
            let mut chosen = xs[xs.len() - 1];
            for (i, &p) in ps.iter().enumerate() {
                acc += p;
                if u <= acc {
                    chosen = xs[i];
                    break;
                }
            }
            out.push(chosen);
            left = chosen;
        }
        out
    }

    /// Sample `k-1` particles between matched boundaries (diagonal coupling
    /// for the block interior once its last particle agrees).
    fn sample_interior(&self, k: usize, a: i64, b: i64, rng: &mut StreamRng) -> Vec<i64> {
        if k <= 1 {
            return Vec::new();
        }
        self.sample_block(k - 1, a, b, rng)
    }
}

/// Maximal coupling of two discrete laws on shared support points: with
/// probability `overlap` both draws coincide.
fn maximal_couple(
    xs: &[i64],
    p: &[f64],
    ys: &[i64],
    q: &[f64],
    rng: &mut StreamRng,
) -> (i64, i64) {
    use std::collections::HashMap;
    let qm: HashMap<i64, f64> = ys.iter().copied().zip(q.iter().copied()).collect();
    let mut overlap = 0.0;
    for (x, &pp) in xs.iter().zip(p) {
        overlap += pp.min(*qm.get(x).unwrap_or(&0.0));
    }
    let u = rng.uniform();
    if u < overlap {
        // sample from the common part
        let mut acc = 0.0;
        let target = u;
        for (x, &pp) in xs.iter().zip(p) {
            acc += pp.min(*qm.get(x).unwrap_or(&0.0));
            if target <= acc {
                return (*x, *x);
            }
        }
        let x = *xs.last().unwrap();
        return (x, x);
    }
    // residuals, sampled independently
    let pm: HashMap<i64, f64> = xs.iter().copied().zip(p.iter().copied()).collect();
    let sample_residual = |own: &[i64], own_p: &[f64], other: &HashMap<i64, f64>, u: f64| {
        let mut weights: Vec<f64> = own
            .iter()
            .zip(own_p)
            .map(|(x, &pp)| (pp - other.get(x).unwrap_or(&0.0)).max(0.0))
            .collect();
        let z: f64 = weights.iter().sum();
        for wv in weights.iter_mut() {
            *wv /= z;
        }
        let mut acc = 0.0;
        for (i, &wv) in weights.iter().enumerate() {
            acc += wv;
            if u <= acc {
                return own[i];
            }
        }
        own[own.len() - 1]
    };
    let a = sample_residual(xs, p, &qm, rng.uniform());
    let b = sample_residual(ys, q, &pm, rng.uniform());
    (a, b)
}

/// One staged-coupling sweep for two chains of `n = K·Δ` particles; returns
/// whether they coalesced by time 1.
fn staged_sweep(
    sampler: &BlockSampler<'_>,
    k: usize,
    delta: usize,
    l: usize,
    xi: &mut Vec<i64>,
    xi2: &mut Vec<i64>,
    rng: &mut StreamRng,
) -> bool {
    let li = l as i64;
    // Poisson block updates on [0,1]: need the labels (Δ, Δ-1, …, 1, 2, …, Δ)
    // as the opening run; otherwise apply independent updates in the drawn
    // order and report no coalescence claim for this sweep.
    let total_rate = delta as f64;
    let mut t = rng.exponential(total_rate);
    let mut labels = Vec::new();
    while t <= 1.0 {
        labels.push(rng.below(delta as u64) as usize + 1);
        t += rng.exponential(total_rate);
    }
    let mut wanted: Vec<usize> = (1..=delta).rev().collect();
    wanted.extend(2..=delta);
    let matches = labels.len() >= wanted.len() && labels[..wanted.len()] == wanted[..];
    if !matches {
        // independent evolution for this sweep
        for &c in &labels {
            for chain in [&mut *xi, &mut *xi2] {
                let lo = if c == 1 { -li } else { chain[(c - 1) * k - 1] };
                let hi = if c == delta { li } else { chain[c * k] };
                let fresh = sampler.sample_block(k, lo, hi, rng);
                chain[(c - 1) * k..c * k].copy_from_slice(&fresh);
            }
        }
        return xi == xi2;
    }
    // stage 1: push blocks Δ, Δ-1, …, 2 to the right, independently
    for c in (2..=delta).rev() {
        for chain in [&mut *xi, &mut *xi2] {
            let lo = chain[(c - 1) * k - 1];
            let hi = if c == delta { li } else { chain[c * k] };
            let fresh = sampler.sample_block(k, lo, hi, rng);
            chain[(c - 1) * k..c * k].copy_from_slice(&fresh);
        }
    }
    // stage 2: match blocks 1, 2, …, Δ left to right
    for c in 1..=delta {
        let lo1 = if c == 1 { -li } else { xi[(c - 1) * k - 1] };
        let lo2 = if c == 1 { -li } else { xi2[(c - 1) * k - 1] };
        let hi1 = if c == delta { li } else { xi[c * k] };
        let hi2 = if c == delta { li } else { xi2[c * k] };
        if lo1 == lo2 {
            // maximal-couple the last particle, then diagonal interior
            let (ys1, ps1) = sampler.last_particle_law(k, lo1, hi1);
            let (ys2, ps2) = sampler.last_particle_law(k, lo2, hi2);
            let (last1, last2) = maximal_couple(&ys1, &ps1, &ys2, &ps2, rng);
            xi[c * k - 1] = last1;
            xi2[c * k - 1] = last2;
            if last1 == last2 {
                let interior = sampler.sample_interior(k, lo1, last1, rng);
                xi[(c - 1) * k..c * k - 1].copy_from_slice(&interior);
                xi2[(c - 1) * k..c * k - 1].copy_from_slice(&interior);
            } else {
                let i1 = sampler.sample_interior(k, lo1, last1, rng);
                let i2 = sampler.sample_interior(k, lo2, last2, rng);
                xi[(c - 1) * k..c * k - 1].copy_from_slice(&i1);
                xi2[(c - 1) * k..c * k - 1].copy_from_slice(&i2);
            }
        } else {
            for (chain, lo, hi) in [(&mut *xi, lo1, hi1), (&mut *xi2, lo2, hi2)] {
                let fresh = sampler.sample_block(k, lo, hi, rng);
                chain[(c - 1) * k..c * k].copy_from_slice(&fresh);
            }
        }
    }
    xi == xi2
}

/// Empirical one-sweep coalescence probability of the staged block coupling
/// from the two extreme packings.
pub fn block_coupling_experiment(
    kernel: &ExcursionKernel,
    k: usize,
    delta: usize,
    l: usize,
    n_runs: usize,
    seed: u64,
) -> Result<BlockReport> {
    let n = k * delta;
    if n + 1 > l {
        return Err(Error::InvalidConfig("too many particles".into()));
    }
    if 2 * l > kernel.max_len() {
        return Err(Error::Capacity {
            what: "2L",
            got: 2 * l,
            bound_name: "kernel table length",
            bound: kernel.max_len(),
        });
    }
    let li = l as i64;
    let sampler = BlockSampler::new(kernel, n, l);
    let left: Vec<i64> = (1..=n).map(|i| -li + 2 * i as i64).collect();
    let right: Vec<i64> = (0..n).map(|i| li - 2 * (n - i) as i64).collect();
    let results = par::map_indexed_auto(n_runs, |r| {
        let mut rng = StreamRng::new(seed, r as u64);
        let mut a = left.clone();
        let mut b = right.clone();
        staged_sweep(&sampler, k, delta, l, &mut a, &mut b, &mut rng)
    });
    let coalesced = results.iter().filter(|&&c| c).count();
    Ok(BlockReport {
        k,
        delta,
        l,
        coalesced,
        n_runs,
        p_hat: coalesced as f64 / n_runs as f64,
        wilson95: wilson_interval(coalesced, n_runs, 1.96),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::PartitionTable;

    fn kernel(lambda: f64, max_len: usize) -> ExcursionKernel {
        let t = PartitionTable::<f64>::scaled(max_len, lambda).unwrap();
        ExcursionKernel::new(&t, None)
    }

    #[test]
    fn single_particle_hits_at_first_ring_with_end_mass() {
        // n=1: the packed state is hit exactly when the first resample takes
        // the extreme slot, so p̂ ≈ α within 3σ
        let k = kernel(0.5, 64);
        let rep = epsilon1_experiment(&k, 1, 10, 4000, 11).unwrap();
        let law = conditional_particle_law(&k, 20).unwrap();
        let alpha = law.end_mass();
        // probability of ≥1 ring before t=1 times α … the run allows many
        // rings, so p̂ is a touch above α; require the right ballpark
        assert!(rep.p_hat >= alpha * 0.8, "{} vs α={alpha}", rep.p_hat);
        assert!(rep.alpha_min <= alpha + 1e-12);
    }

    #[test]
    fn block_sampler_law_is_normalized() {
        let k = kernel(0.5, 256);
        let s = BlockSampler::new(&k, 4, 100);
        let (ys, ps) = s.last_particle_law(2, -100, 50);
        assert!(!ys.is_empty());
        assert!((ps.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn maximal_coupling_identical_laws_always_match() {
        let k = kernel(0.5, 128);
        let s = BlockSampler::new(&k, 3, 60);
        let (ys, ps) = s.last_particle_law(2, -60, 20);
        let mut rng = StreamRng::new(7, 3);
        for _ in 0..200 {
            let (a, b) = maximal_couple(&ys, &ps, &ys, &ps, &mut rng);
            assert_eq!(a, b);
        }
    }
}
