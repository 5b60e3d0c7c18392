//! Polymer configurations and their combinatorial statistics.
//!
//! A configuration is a lattice bridge `η` on `{-L,…,L}` with `η_{-L} = η_L
//! = 0` and `|η_{x+1} − η_x| = 1`.  Interior zeros can only sit on the even
//! sublattice `E_L` (sites with the parity of `L`); the odd sublattice `O_L`
//! carries the sign field `σ_x = sign(η_x)`.  A zero where the path changes
//! sign is a *crossing*; the ordered crossing positions `ξ_1 < … < ξ_χ`
//! partition the bridge into sign-constant segments.
//!
//! Index convention: internal arrays are 0-based with `p = x + L`; all public
//! reporting uses the symmetric coordinates `x ∈ {-L,…,L}`.

use crate::combin::{bridge_count, for_each_mask};
use crate::error::{Error, Result};
use std::fmt;

/// A lattice bridge stored as its ±1 steps.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PathConfig {
    l: usize,
    steps: Vec<i8>,
}

impl PathConfig {
    pub fn new(l: usize, steps: Vec<i8>) -> Result<Self> {
        if l == 0 || steps.len() != 2 * l {
            return Err(Error::InvalidConfig(format!(
                "need 2L = {} steps, got {}",
                2 * l,
                steps.len()
            )));
        }
        if steps.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidConfig("steps must be ±1".into()));
        }
        if steps.iter().map(|&s| s as i64).sum::<i64>() != 0 {
            return Err(Error::InvalidConfig("steps must sum to zero".into()));
        }
        Ok(Self { l, steps })
    }

    /// Build from heights `η_{-L},…,η_L` (endpoints must vanish).
    pub fn from_heights(heights: &[i32]) -> Result<Self> {
        if heights.len() < 3 || heights.len() % 2 == 0 {
            return Err(Error::InvalidConfig("need 2L+1 heights".into()));
        }
        let l = (heights.len() - 1) / 2;
        if heights[0] != 0 || heights[2 * l] != 0 {
            return Err(Error::InvalidConfig("endpoints must be 0".into()));
        }
        let steps: Vec<i8> = heights
            .windows(2)
            .map(|w| (w[1] - w[0]) as i8)
            .collect();
        Self::new(l, steps)
    }

    pub fn from_mask(l: usize, mask: u32) -> Self {
        let steps = (0..2 * l)
            .map(|p| if mask >> p & 1 == 1 { 1 } else { -1 })
            .collect();
        Self { l, steps }
    }

    pub fn mask(&self) -> u32 {
        let mut m = 0u32;
        for (p, &s) in self.steps.iter().enumerate() {
            if s == 1 {
                m |= 1 << p;
            }
        }
        m
    }

    pub fn half_len(&self) -> usize {
        self.l
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Heights `η_{-L},…,η_L` (length `2L+1`).
    pub fn heights(&self) -> Vec<i32> {
        let mut h = Vec::with_capacity(2 * self.l + 1);
        let mut acc = 0i32;
        h.push(acc);
        for &s in &self.steps {
            acc += s as i32;
            h.push(acc);
        }
        h
    }

    /// Height at paper coordinate `x ∈ [-L, L]`.
    pub fn height(&self, x: i64) -> i32 {
        let p = (x + self.l as i64) as usize;
        self.steps[..p].iter().map(|&s| s as i32).sum()
    }

    /// Pointwise reflection `η ↦ -η`.
    pub fn reflected(&self) -> Self {
        Self {
            l: self.l,
            steps: self.steps.iter().map(|&s| -s).collect(),
        }
    }
}

impl fmt::Display for PathConfig {
    /// Canonical text form: one sign character per step, e.g. `++-+--`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.steps {
            f.write_str(if s == 1 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for PathConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathConfig(L={}, {})", self.l, self)
    }
}

impl std::str::FromStr for PathConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let steps: Vec<i8> = s
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::InvalidConfig(format!("bad step char {c:?}"))),
            })
            .collect::<Result<_>>()?;
        if steps.len() % 2 != 0 {
            return Err(Error::InvalidConfig("odd number of steps".into()));
        }
        Self::new(steps.len() / 2, steps)
    }
}

/// Maximal path `∧` (`∧_x = L - |x|`).
pub fn maximal_path(l: usize) -> PathConfig {
    let mut steps = vec![1i8; l];
    steps.extend(std::iter::repeat(-1i8).take(l));
    PathConfig { l, steps }
}

/// Minimal path `∨` (`∨_x = -(L - |x|)`).
pub fn minimal_path(l: usize) -> PathConfig {
    maximal_path(l).reflected()
}

/// Lowest nonnegative path: 0 on `E_L`, 1 on `O_L` (the "wall floor").
pub fn floor_plus_path(l: usize) -> PathConfig {
    let mut steps = Vec::with_capacity(2 * l);
    for _ in 0..l {
        steps.push(1i8);
        steps.push(-1i8);
    }
    PathConfig { l, steps }
}

/// Pointwise partial order: true iff `η_x ≤ η'_x` for every `x`.
pub fn leq(a: &PathConfig, b: &PathConfig) -> Result<bool> {
    if a.l != b.l {
        return Err(Error::Mismatch(format!(
            "half-lengths differ: {} vs {}",
            a.l, b.l
        )));
    }
    let mut ha = 0i32;
    let mut hb = 0i32;
    for p in 0..2 * a.l {
        ha += a.steps[p] as i32;
        hb += b.steps[p] as i32;
        if ha > hb {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Floor/ceiling constraints `ζ ≤ η ≤ ξ` with distinguished extremes.
#[derive(Clone, Debug)]
pub struct BoundaryPair {
    pub floor: PathConfig,
    pub ceil: PathConfig,
}

impl BoundaryPair {
    pub fn new(floor: PathConfig, ceil: PathConfig) -> Result<Self> {
        if !leq(&floor, &ceil)? {
            return Err(Error::InvalidConfig("floor must lie below ceiling".into()));
        }
        Ok(Self { floor, ceil })
    }

    /// No constraint: `∨ ≤ η ≤ ∧`.
    pub fn free(l: usize) -> Self {
        Self {
            floor: minimal_path(l),
            ceil: maximal_path(l),
        }
    }

    /// Wall constraint for the positive phase: floor at the lowest
    /// nonnegative path, ceiling at `∧`.
    pub fn wall_plus(l: usize) -> Self {
        Self {
            floor: floor_plus_path(l),
            ceil: maximal_path(l),
        }
    }

    pub fn contains(&self, eta: &PathConfig) -> bool {
        leq(&self.floor, eta).unwrap_or(false) && leq(eta, &self.ceil).unwrap_or(false)
    }
}

/// Sign field over the odd sublattice `O_L = {-L+1, -L+3, …, L-1}`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SignField {
    l: usize,
    /// `signs[i]` is `σ` at `x = -L + 1 + 2i`; values are ±1.
    signs: Vec<i8>,
}

impl SignField {
    pub fn new(l: usize, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != l || signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidConfig(format!(
                "need {l} signs in ±1, got {}",
                signs.len()
            )));
        }
        Ok(Self { l, signs })
    }

    /// Sign field of a configuration (heights never vanish on `O_L`).
    pub fn of_path(eta: &PathConfig) -> Self {
        let h = eta.heights();
        let signs = (0..eta.l)
            .map(|i| if h[2 * i + 1] > 0 { 1 } else { -1 })
            .collect();
        Self { l: eta.l, signs }
    }

    /// Compact encoding: bit `i` set iff `signs[i] = +1`.
    pub fn from_mask(l: usize, mask: u32) -> Self {
        let signs = (0..l)
            .map(|i| if mask >> i & 1 == 1 { 1 } else { -1 })
            .collect();
        Self { l, signs }
    }

    pub fn mask(&self) -> u32 {
        let mut m = 0;
        for (i, &s) in self.signs.iter().enumerate() {
            if s == 1 {
                m |= 1 << i;
            }
        }
        m
    }

    pub fn half_len(&self) -> usize {
        self.l
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign at paper coordinate `x ∈ O_L`.
    pub fn at(&self, x: i64) -> i8 {
        let i = (x + self.l as i64 - 1) as usize;
        debug_assert_eq!(i % 2, 0);
        self.signs[i / 2]
    }

    /// Number of sign changes (= crossings of any compatible path).
    pub fn crossing_count(&self) -> usize {
        self.signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Ordered internal crossing positions on `E_L`.
    pub fn crossings(&self) -> CrossingConfig {
        let positions = (0..self.l.saturating_sub(1))
            .filter(|&i| self.signs[i] != self.signs[i + 1])
            .map(|i| -(self.l as i64) + 2 * i as i64 + 2)
            .collect();
        CrossingConfig {
            l: self.l,
            positions,
        }
    }

    pub fn flipped_at(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.signs[i] = -s.signs[i];
        s
    }

    /// Number of `+1` entries (the magnetization-like coordinate).
    pub fn plus_count(&self) -> usize {
        self.signs.iter().filter(|&&s| s == 1).count()
    }
}

/// Ordered internal crossing positions `ξ_1 < … < ξ_n` with the sentinels
/// `ξ_0 = -L`, `ξ_{n+1} = L`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrossingConfig {
    l: usize,
    positions: Vec<i64>,
}

impl CrossingConfig {
    pub fn new(l: usize, positions: Vec<i64>) -> Result<Self> {
        let li = l as i64;
        let mut prev = -li;
        for &x in &positions {
            // strictly increasing, on the even sublattice, inside (-L, L)
            if x - prev < 2 || x > li - 2 || (x - prev) % 2 != 0 {
                return Err(Error::InvalidConfig(format!(
                    "bad crossing position {x} after {prev} (L = {l})"
                )));
            }
            prev = x;
        }
        Ok(Self { l, positions })
    }

    pub fn half_len(&self) -> usize {
        self.l
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[i64] {
        &self.positions
    }

    /// Positions including the sentinels `-L` and `L`.
    pub fn with_sentinels(&self) -> Vec<i64> {
        let mut v = Vec::with_capacity(self.positions.len() + 2);
        v.push(-(self.l as i64));
        v.extend_from_slice(&self.positions);
        v.push(self.l as i64);
        v
    }

    /// Segment lengths `ξ_{i+1} - ξ_i` (all even, ≥ 2).
    pub fn gaps(&self) -> Vec<i64> {
        self.with_sentinels().windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Per-configuration statistics: zeros, crossings, crossing positions, signs.
#[derive(Clone, Debug)]
pub struct PathStats {
    /// `N(η)`: zeros strictly between the endpoints.
    pub zeros: usize,
    /// `χ(η)`: zeros where the path changes sign.
    pub crossings: usize,
    pub crossing_positions: CrossingConfig,
    pub signs: SignField,
    /// Zeros inside each segment between consecutive crossings (with the
    /// sentinels), crossings themselves excluded; length `crossings + 1`.
    pub segment_zeros: Vec<usize>,
}

/// Zeros, crossings and sign field of a configuration in one pass.
pub fn path_stats(eta: &PathConfig) -> PathStats {
    let l = eta.l as i64;
    let h = eta.heights();
    let mut zeros = 0usize;
    let mut positions = Vec::new();
    let mut segment_zeros = vec![0usize];
    for p in 1..2 * eta.l {
        if h[p] == 0 {
            let x = p as i64 - l;
            if h[p - 1] != h[p + 1] {
                positions.push(x);
                segment_zeros.push(0);
            } else {
                *segment_zeros.last_mut().unwrap() += 1;
            }
            zeros += 1;
        }
    }
    let crossings = positions.len();
    PathStats {
        zeros,
        crossings,
        crossing_positions: CrossingConfig {
            l: eta.l,
            positions,
        },
        signs: SignField::of_path(eta),
        segment_zeros,
    }
}

/// Phase membership flags, see [`classify`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PhaseFlags {
    /// Strictly positive on the bulk window `-L+ℓ < x < L-ℓ`.
    pub plus: bool,
    /// Mirror image of `plus`.
    pub minus: bool,
    /// At most `c_o·ln L` crossings and at most `c_o·ln L` zeros inside every
    /// inter-crossing segment (end segments included).
    pub few_crossings: bool,
}

/// Default bulk window parameter `ℓ(L) = max(1, round((ln L)^{1/4}))`.
///
/// The quarter-power formula stays below 2 for every size reachable by exact
/// solvers, so the bulk window is effectively `{-L+2, …, L-2}` there.
pub fn default_ell(l: usize) -> usize {
    ((l as f64).ln().powf(0.25).round() as usize).max(1)
}

/// Default crossing/zero cap coefficient `c_o = 4/|ln λ|` (∞ at `λ = 1`,
/// where the restriction is vacuous).
pub fn default_cap_coeff(lambda: f64) -> f64 {
    let d = lambda.ln().abs();
    if d < 1e-12 {
        f64::INFINITY
    } else {
        4.0 / d
    }
}

/// Classify a configuration: bulk-positive, bulk-negative, and the
/// few-crossings/few-zeros restriction with cap `c_o·ln L`.
pub fn classify(eta: &PathConfig, ell: usize, cap_coeff: f64) -> PhaseFlags {
    let l = eta.l as i64;
    let ell = ell as i64;
    let h = eta.heights();
    let mut plus = true;
    let mut minus = true;
    for x in (-l + ell + 1)..(l - ell) {
        let v = h[(x + l) as usize];
        if v <= 0 {
            plus = false;
        }
        if v >= 0 {
            minus = false;
        }
        if !plus && !minus {
            break;
        }
    }
    let cap = if cap_coeff.is_infinite() {
        f64::INFINITY
    } else {
        cap_coeff * (eta.l as f64).ln()
    };
    let st = path_stats(eta);
    let few_crossings = (st.crossings as f64) <= cap
        && st.segment_zeros.iter().all(|&z| (z as f64) <= cap);
    PhaseFlags {
        plus,
        minus,
        few_crossings,
    }
}

/// All bridges of half-length `l` in canonical order.  `l_max` is the
/// enumeration capacity guard (12 by default in callers).
pub fn enumerate_paths(l: usize, l_max: usize) -> Result<Vec<PathConfig>> {
    if l < 1 || l > l_max {
        return Err(Error::Capacity {
            what: "half-length L",
            got: l,
            bound_name: "enumeration L_max",
            bound: l_max,
        });
    }
    let mut out = Vec::with_capacity(bridge_count(l) as usize);
    for_each_mask(l, |m| out.push(PathConfig::from_mask(l, m)));
    Ok(out)
}

/// Default enumeration capacity for the exact backends.
pub const DEFAULT_L_MAX: usize = 12;
