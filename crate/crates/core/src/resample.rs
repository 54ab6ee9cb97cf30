//! Reverse resampling over explicit finite distributions.
//!
//! Drawing `s ~ D` and then redrawing from `D` until `f` agrees with
//! `f(s)` reproduces `D` exactly. Capping the redraws at `t` outputs ⊥ with
//! probability `Σ_y P(f=y)·(1 − P(f=y))^t` and otherwise leaves the law
//! untouched, so the truncated sampler is within that mass of `D` in
//! total variation.

use std::collections::HashMap;
use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{capacity, Error, Result};

/// Largest explicit support, in elements.
pub const MAX_SUPPORT: usize = 1 << 20;
/// Tolerance on Σ p = 1.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FiniteDistribution {
    support: Vec<u64>,
    probs: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl PartialEq for FiniteDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.support == other.support && self.probs == other.probs
    }
}

impl FiniteDistribution {
    pub fn new(support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Parameter("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                found: probs.len(),
            });
        }
        capacity("reverse-resampler", "support size", support.len() as u64, MAX_SUPPORT as u64)?;
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Parameter("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Parameter(format!("probabilities sum to {total}, not 1")));
        }
        let mut seen = std::collections::HashSet::with_capacity(support.len());
        if let Some(dup) = support.iter().find(|v| !seen.insert(**v)) {
            return Err(Error::Parameter(format!("support value {dup:#x} repeated")));
        }
        let sampler = WeightedIndex::new(&probs).map_err(|e| Error::Parameter(e.to_string()))?;
        Ok(Self {
            support,
            probs,
            sampler,
        })
    }

    /// Normalises nonnegative weights.
    pub fn from_weights(support: Vec<u64>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return Err(Error::Parameter("weights must have positive total".into()));
        }
        Self::new(support, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(support: Vec<u64>) -> Result<Self> {
        let p = 1.0 / support.len().max(1) as f64;
        let n = support.len();
        Self::new(support, vec![p; n])
    }

    /// Uniform over all `bits`-bit strings.
    pub fn uniform_bits(bits: u32) -> Result<Self> {
        capacity("reverse-resampler", "support size", 1u128 << bits.min(64), MAX_SUPPORT as u128)?;
        Self::uniform((0..1u64 << bits).collect())
    }

    pub fn point(value: u64) -> Self {
        Self::new(vec![value], vec![1.0]).expect("a point mass is valid")
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn prob_of(&self, value: u64) -> f64 {
        self.support
            .iter()
            .position(|&v| v == value)
            .map_or(0.0, |i| self.probs[i])
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        self.support[self.sampler.sample(rng)]
    }

    /// −log₂ max_x P(x).
    pub fn min_entropy(&self) -> f64 {
        let max = self.probs.iter().copied().fold(0.0, f64::max);
        -max.log2()
    }

    /// Bits needed to hold every support value.
    pub fn sample_bits(&self) -> u32 {
        let max = self.support.iter().copied().max().unwrap_or(0);
        64 - max.leading_zeros()
    }

    /// Parses one `value_hex probability` pair per line. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut support = Vec::new();
        let mut probs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(v), Some(p), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected `value_hex probability`", lineno + 1)));
            };
            let v = u64::from_str_radix(v.trim_start_matches("0x"), 16)
                .map_err(|_| Error::Parse(format!("line {}: bad hex value `{v}`", lineno + 1)))?;
            let p: f64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad probability `{p}`", lineno + 1)))?;
            support.push(v);
            probs.push(p);
        }
        Self::new(support, probs)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (v, p) in self.support.iter().zip(&self.probs) {
            writeln!(out, "{v:x} {p:e}").expect("writing to a string");
        }
        out
    }

    /// P(f = y) for every value y of f on the support.
    fn fibre_masses<F: Fn(u64) -> u64>(&self, f: &F) -> HashMap<u64, f64> {
        let mut mass = HashMap::new();
        for (&v, &p) in self.support.iter().zip(&self.probs) {
            *mass.entry(f(v)).or_insert(0.0) += p;
        }
        mass
    }
}

/// A distribution that may also output ⊥.
#[derive(Clone, Debug, PartialEq)]
pub struct SubDistribution {
    pub support: Vec<u64>,
    pub probs: Vec<f64>,
    pub bottom: f64,
}

impl SubDistribution {
    /// Total variation from `d`, counting ⊥ as an extra outcome.
    pub fn tv_from(&self, d: &FiniteDistribution) -> f64 {
        let mut diff = self.bottom;
        let mut mine: HashMap<u64, f64> = self.support.iter().copied().zip(self.probs.iter().copied()).collect();
        for (&v, &p) in d.support.iter().zip(&d.probs) {
            diff += (p - mine.remove(&v).unwrap_or(0.0)).abs();
        }
        diff += mine.values().sum::<f64>();
        0.5 * diff
    }
}

/// ½ Σ |p₁ − p₂| over the union of supports.
pub fn exact_tv_distance(d1: &FiniteDistribution, d2: &FiniteDistribution) -> f64 {
    SubDistribution {
        support: d1.support.clone(),
        probs: d1.probs.clone(),
        bottom: 0.0,
    }
    .tv_from(d2)
}

/// Draws `s ~ D` then returns a draw from `D` conditioned on `f = f(s)`,
/// which is the unbounded resampling loop in closed form.
pub fn resample_infinite<F: Fn(u64) -> u64, R: Rng + ?Sized>(d: &FiniteDistribution, f: F, rng: &mut R) -> u64 {
    let y = f(d.sample(rng));
    let (values, weights): (Vec<u64>, Vec<f64>) = d
        .support
        .iter()
        .zip(&d.probs)
        .filter(|(&v, _)| f(v) == y)
        .map(|(&v, &p)| (v, p))
        .unzip();
    let idx = WeightedIndex::new(&weights).expect("the first draw lies in its own fibre");
    values[idx.sample(rng)]
}

/// Exact output law of [`resample_infinite`]: Σ_y P(f=y)·P(x | f=y).
pub fn resample_infinite_law<F: Fn(u64) -> u64>(d: &FiniteDistribution, f: F) -> SubDistribution {
    let mass = d.fibre_masses(&f);
    let probs = d
        .support
        .iter()
        .zip(&d.probs)
        .map(|(&x, &p)| {
            let m = mass[&f(x)];
            m * (p / m)
        })
        .collect();
    SubDistribution {
        support: d.support.clone(),
        probs,
        bottom: 0.0,
    }
}

/// ⌈(2|supp|/ε)·ln(2|supp|/ε)⌉: with th = ε/(2|supp|), this many tries
/// make |supp|·(th + e^{−t·th}) ≤ ε.
pub fn truncated_limit(epsilon: f64, support_size: usize) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if support_size == 0 {
        return Err(Error::Parameter("support size must be positive".into()));
    }
    Ok(limit_for_support(epsilon, support_size as f64))
}

/// [`truncated_limit`] for supports too large for `usize`, saturating at `u64::MAX`.
pub(crate) fn limit_for_support(epsilon: f64, support_size: f64) -> u64 {
    let r = 2.0 * support_size / epsilon;
    ((r * r.ln()).ceil() as u64).max(1)
}

/// The coarser displayed bound ⌈2(ln 4·n + ln(1/ε))·|supp|/ε⌉, natural log,
/// kept for comparison with [`truncated_limit`].
pub fn displayed_truncated_limit(n: u32, epsilon: f64, support_size: usize) -> Result<u64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Parameter(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let t = 2.0 * (4f64.ln() * n as f64 + (1.0 / epsilon).ln()) * support_size as f64 / epsilon;
    Ok(t.ceil() as u64)
}

/// Literal truncated loop: at most `t_limit` redraws, then ⊥ (`None`).
pub fn resample_truncated<F: Fn(u64) -> u64, R: Rng + ?Sized>(
    d: &FiniteDistribution,
    f: F,
    t_limit: u64,
    rng: &mut R,
) -> Option<u64> {
    let y = f(d.sample(rng));
    (0..t_limit).map(|_| d.sample(rng)).find(|&s| f(s) == y)
}

/// Probability that `t` independent tries all miss an event of mass `m`.
pub(crate) fn miss_probability(m: f64, t: u64) -> f64 {
    if m >= 1.0 {
        if t == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        (t as f64 * (-m).ln_1p()).exp()
    }
}

/// Exact law of [`resample_truncated`]: P′(x) = P(x)·(1 − (1 − P(f=f(x)))^t),
/// with the remaining mass on ⊥.
pub fn resample_truncated_law<F: Fn(u64) -> u64>(d: &FiniteDistribution, f: F, t_limit: u64) -> SubDistribution {
    let mass = d.fibre_masses(&f);
    let probs: Vec<f64> = d
        .support
        .iter()
        .zip(&d.probs)
        .map(|(&x, &p)| p * (1.0 - miss_probability(mass[&f(x)], t_limit)))
        .collect();
    let bottom = mass.values().map(|&m| m * miss_probability(m, t_limit)).sum();
    SubDistribution {
        support: d.support.clone(),
        probs,
        bottom,
    }
}
