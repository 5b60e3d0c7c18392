//! n-particle crossing equilibration: each particle refreshes its position
//! at rate 1 from the conditional law given its neighbours.

use crate::equilibrium::ExcursionKernel;
use crate::error::{Error, Result};
use crate::linalg::{lowest_eigenpair, norm2, Csr};
use crate::mc::rng::StreamRng;
use std::collections::HashMap;

/// Law of a middle particle given its neighbours at distance `gap`:
/// `P(k) ∝ w(k)·w(gap-k)` over `k = 2, 4, …, gap-2` (offset from the left
/// neighbour).
#[derive(Clone, Debug)]
pub struct ConditionalLaw {
    pub gap: i64,
    pub offsets: Vec<i64>,
    pub probs: Vec<f64>,
    cdf: Vec<f64>,
}

pub fn conditional_particle_law(kernel: &ExcursionKernel, gap: i64) -> Result<ConditionalLaw> {
    if gap < 4 || gap % 2 != 0 {
        return Err(Error::InvalidConfig(format!(
            "no free position inside a segment of length {gap}"
        )));
    }
    let mut offsets = Vec::new();
    let mut probs = Vec::new();
    let mut k = 2i64;
    while k <= gap - 2 {
        offsets.push(k);
        probs.push(kernel.w(k as usize) * kernel.w((gap - k) as usize));
        k += 2;
    }
    let z: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= z;
    }
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }
    Ok(ConditionalLaw {
        gap,
        offsets,
        probs,
        cdf,
    })
}

impl ConditionalLaw {
    /// Inverse-CDF sample (offset from the left neighbour).
    pub fn sample(&self, u: f64) -> i64 {
        let pos = self.cdf.partition_point(|&c| c < u);
        self.offsets[pos.min(self.offsets.len() - 1)]
    }

    /// Mass of the extreme position `k = 2` (equals the mass of
    /// `k = gap-2` by symmetry).
    pub fn end_mass(&self) -> f64 {
        self.probs[0]
    }
}

/// Exact spectral data of the n-particle resampling dynamics by full state
/// enumeration (compositions of `2L` into `n+1` even parts).
pub struct ParticleExact {
    pub n: usize,
    pub l: usize,
    pub gap: f64,
    /// States in colexicographic order of the gap vector.
    pub states: Vec<Vec<i64>>,
    index: HashMap<u64, u32>,
    /// Eigenfunction at the gap (π-weighted unit norm).
    pub phi: Vec<f64>,
}

fn state_key(positions: &[i64], l: usize) -> u64 {
    let mut key = 0u64;
    for &x in positions {
        key = key << 8 | ((x + l as i64) / 2) as u64;
    }
    key
}

/// Enumerate crossing configurations in colexicographic order of the gap
/// vector and solve for the gap of the resampling dynamics.
pub fn particle_exact(n: usize, l: usize, kernel: &ExcursionKernel) -> Result<ParticleExact> {
    if n < 1 || n > 4 || l > 60 {
        return Err(Error::Capacity {
            what: "particles n (or half-length L)",
            got: n.max(l),
            bound_name: "exact enumeration bound (n ≤ 4, L ≤ 60)",
            bound: if n > 4 { 4 } else { 60 },
        });
    }
    if n + 1 > l {
        return Err(Error::InvalidConfig("too many particles".into()));
    }
    // compositions of l into n+1 half-gaps ≥ 1, in colexicographic order of
    // the gap vector (choose the last gap first, ascending): the index of a
    // state is then reproducible across runs
    let mut states: Vec<Vec<i64>> = Vec::new();
    let mut tail: Vec<usize> = Vec::with_capacity(n);
    fn rec(parts_left: usize, total: usize, tail: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts_left == 1 {
            let mut gaps = vec![total];
            gaps.extend(tail.iter().rev());
            out.push(gaps);
            return;
        }
        for last in 1..=(total - (parts_left - 1)) {
            tail.push(last);
            rec(parts_left - 1, total - last, tail, out);
            tail.pop();
        }
    }
    let mut gap_vectors: Vec<Vec<usize>> = Vec::new();
    rec(n + 1, l, &mut tail, &mut gap_vectors);
    for gaps in &gap_vectors {
        let mut pos = Vec::with_capacity(n);
        let mut acc = -(l as i64);
        for &g in gaps.iter().take(n) {
            acc += 2 * g as i64;
            pos.push(acc);
        }
        states.push(pos);
    }
    build_particle_exact(n, l, kernel, states)
}

fn build_particle_exact(
    n: usize,
    l: usize,
    kernel: &ExcursionKernel,
    states: Vec<Vec<i64>>,
) -> Result<ParticleExact> {
    let m = states.len();
    let index: HashMap<u64, u32> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (state_key(s, l), i as u32))
        .collect();
    let li = l as i64;
    let weight: Vec<f64> = states
        .iter()
        .map(|pos| {
            let mut w = 1.0;
            let mut prev = -li;
            for &x in pos.iter().chain(std::iter::once(&li)) {
                w *= kernel.w((x - prev) as usize);
                prev = x;
            }
            w
        })
        .collect();
    // resampling generator: particle i jumps to each admissible position at
    // the conditional probability (total refresh rate 1 per particle)
    let mut triplets: Vec<(u32, u32, f64)> = Vec::new();
    let mut exits = vec![0.0; m];
    for (si, pos) in states.iter().enumerate() {
        for i in 0..n {
            let left = if i == 0 { -li } else { pos[i - 1] };
            let right = if i == n - 1 { li } else { pos[i + 1] };
            let gap = right - left;
            if gap < 4 {
                continue; // single admissible slot: refresh is a no-op
            }
            let law = conditional_particle_law(kernel, gap)?;
            for (slot, &k) in law.offsets.iter().enumerate() {
                let new_x = left + k;
                if new_x == pos[i] {
                    continue;
                }
                let mut new_pos = pos.clone();
                new_pos[i] = new_x;
                let tj = index[&state_key(&new_pos, l)];
                triplets.push((si as u32, tj, law.probs[slot]));
                exits[si] += law.probs[slot];
            }
        }
    }
    let chain = crate::chain::ReversibleChain::new(
        format!("{n}-particle resampling L={l}"),
        m,
        triplets,
        weight.clone(),
    )?;
    chain.check_irreducible()?;
    let (b, _q) = {
        let (a, q) = chain.symmetrized();
        let mut b = a;
        for v in b.val.iter_mut() {
            *v = -*v;
        }
        (b, q)
    };
    let sqrt_w: Vec<f64> = weight.iter().map(|w| w.sqrt()).collect();
    let nv = norm2(&sqrt_w);
    let v0: Vec<f64> = sqrt_w.iter().map(|x| x / nv).collect();
    let (gap, w_vec, _res) = if m <= 400 {
        dense_gap(&b, &v0)?
    } else {
        lowest_eigenpair(&b, &[v0], None, 3e-14, 400)?
    };
    let z: f64 = weight.iter().sum();
    let phi: Vec<f64> = w_vec
        .iter()
        .zip(&sqrt_w)
        .map(|(w, s)| w / s * z.sqrt())
        .collect();
    Ok(ParticleExact {
        n,
        l,
        gap,
        states,
        index,
        phi,
    })
}

fn dense_gap(b: &Csr, v0: &[f64]) -> Result<(f64, Vec<f64>, f64)> {
    let n = b.n;
    let mut dense = vec![0.0; n * n];
    for i in 0..n {
        for k in b.row_ptr[i]..b.row_ptr[i + 1] {
            dense[i * n + b.col[k] as usize] += b.val[k];
        }
    }
    let (ev, vecs) = crate::linalg::jacobi_eigen(&dense, n);
    for k in 0..n {
        let col: Vec<f64> = (0..n).map(|r| vecs[r * n + k]).collect();
        if crate::linalg::dot(&col, v0).abs() < 0.5 {
            return Ok((ev[k], col, 0.0));
        }
    }
    Err(Error::Degenerate("no non-kernel mode".into()))
}

impl ParticleExact {
    pub fn index_of(&self, positions: &[i64]) -> Option<usize> {
        self.index.get(&state_key(positions, self.l)).map(|&i| i as usize)
    }
}

/// Trajectory simulation of the resampling dynamics; ordering and even-gap
/// invariants are asserted at every event.
pub struct ParticleSim<'a> {
    pub n: usize,
    pub l: usize,
    kernel: &'a ExcursionKernel,
    pub positions: Vec<i64>,
    pub t: f64,
    pub events: u64,
    /// Smallest conditional end-mass seen along the run.
    pub min_end_mass: f64,
}

impl<'a> ParticleSim<'a> {
    pub fn new(kernel: &'a ExcursionKernel, l: usize, positions: Vec<i64>) -> Result<Self> {
        let n = positions.len();
        crate::path::CrossingConfig::new(l, positions.clone())?;
        Ok(Self {
            n,
            l,
            kernel,
            positions,
            t: 0.0,
            events: 0,
            min_end_mass: 1.0,
        })
    }

    pub fn step(&mut self, rng: &mut StreamRng) -> Result<()> {
        let li = self.l as i64;
        self.t += rng.exponential(self.n as f64);
        self.events += 1;
        let i = rng.below(self.n as u64) as usize;
        let left = if i == 0 { -li } else { self.positions[i - 1] };
        let right = if i == self.n - 1 {
            li
        } else {
            self.positions[i + 1]
        };
        if right - left < 4 {
            return Ok(()); // pinned between its neighbours
        }
        let law = conditional_particle_law(self.kernel, right - left)?;
        self.min_end_mass = self.min_end_mass.min(law.end_mass());
        let k = law.sample(rng.uniform());
        self.positions[i] = left + k;
        // hard invariants
        assert!(
            self.positions.windows(2).all(|w| w[1] - w[0] >= 2),
            "particle order violated"
        );
        assert!(
            self.positions
                .iter()
                .all(|&x| (x + li) % 2 == 0 && x.abs() < li),
            "particle left the even sublattice"
        );
        Ok(())
    }
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
    fn conditional_law_examples() {
        let k = kernel(0.5, 64);
        // gap 4: point mass at 2
        let law = conditional_particle_law(&k, 4).unwrap();
        assert_eq!(law.offsets, vec![2]);
        assert!((law.probs[0] - 1.0).abs() < 1e-15);
        // gap 6: uniform on {2, 4} by symmetry
        let law = conditional_particle_law(&k, 6).unwrap();
        assert!((law.probs[0] - 0.5).abs() < 1e-14);
        // gap 8 at λ=1/2: P(k=4) = w(4)²/(2w(2)w(6) + w(4)²) = 9/35
        let law = conditional_particle_law(&k, 8).unwrap();
        assert!((law.probs[1] - 9.0 / 35.0).abs() < 1e-13);
        // sums to one and symmetric
        let s: f64 = law.probs.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!((law.probs[0] - law.probs[2]).abs() < 1e-14);
        // too small a gap errors out
        assert!(conditional_particle_law(&k, 2).is_err());
    }

    #[test]
    fn enumeration_counts_compositions() {
        let k = kernel(0.5, 64);
        // n=2, L=6: compositions of 6 into 3 parts: C(5,2) = 10
        let pe = particle_exact(2, 6, &k).unwrap();
        assert_eq!(pe.states.len(), 10);
        // all states distinct and valid
        for s in &pe.states {
            crate::path::CrossingConfig::new(6, s.clone()).unwrap();
        }
    }

    #[test]
    fn single_particle_gap_is_one() {
        let k = kernel(0.5, 64);
        let pe = particle_exact(1, 12, &k).unwrap();
        assert!(
            (pe.gap - 1.0).abs() < 1e-12,
            "refresh chain gap {} ≠ 1",
            pe.gap
        );
    }

    #[test]
    fn sim_preserves_invariants() {
        let k = kernel(0.5, 128);
        let mut sim = ParticleSim::new(&k, 20, vec![-16, -14, 0, 8]).unwrap();
        let mut rng = StreamRng::new(4, 0);
        for _ in 0..20_000 {
            sim.step(&mut rng).unwrap();
        }
        assert!(sim.min_end_mass > 0.0);
    }
}
