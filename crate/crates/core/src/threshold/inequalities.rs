//! Numerical checks of the TI/ATI/SimATI inequality suite on explicit
//! instances. Each check reports both sides so callers pick the slack.

use rand::Rng;
use serde::Serialize;

use super::{
    build_ati, build_sim_ati, build_ti, joint_projector, simati_sample_count, ProjectiveFamily, ThresholdMeasurement,
    MAX_TI_DIM,
};
use crate::error::{capacity, Error, Result};
use crate::quantum::random::{random_density, random_projector, random_state};
use crate::quantum::{BinaryProjector, QuantumRegister};

/// One inequality `lhs ≥ rhs` evaluated on one instance.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityCheck {
    pub clause: String,
    pub lhs: f64,
    pub rhs: f64,
}

impl InequalityCheck {
    fn new(clause: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        InequalityCheck {
            clause: clause.into(),
            lhs,
            rhs,
        }
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.lhs >= self.rhs - slack
    }
}

/// Outcome-1 post-measurement state, or `None` if outcome 1 is impossible.
fn collapse_on_one(reg: &QuantumRegister, p: &BinaryProjector) -> Result<Option<QuantumRegister>> {
    match reg.collapse(p, true) {
        Ok((r, _)) => Ok(Some(r)),
        Err(Error::ImpossibleCollapse) => Ok(None),
        Err(e) => Err(e),
    }
}

fn shifted(ti: &ThresholdMeasurement, eta: f64) -> Result<ThresholdMeasurement> {
    ti.at_threshold(eta.min(1.0))
}

/// The four single-register clauses for `ATI^{ε,δ}_η` against `TI_η`.
pub fn single_ati_clauses(
    family: &ProjectiveFamily,
    eta: f64,
    epsilon: f64,
    delta: f64,
    reg: &QuantumRegister,
) -> Result<Vec<InequalityCheck>> {
    let ati = build_ati(family, eta, epsilon, delta)?;
    let ti = ati.threshold();
    let ati_lo = ati.at_threshold(eta - epsilon)?;
    let ti_lo = shifted(ti, eta - epsilon)?;
    let mut out = vec![
        InequalityCheck::new(
            "ATI(eta-eps) >= TI(eta) - delta",
            ati_lo.accept_probability(reg)?,
            ti.accept_probability(reg)? - delta,
        ),
        InequalityCheck::new(
            "TI(eta-eps) >= ATI(eta) - delta",
            ti_lo.accept_probability(reg)?,
            ati.accept_probability(reg)? - delta,
        ),
        // At this scale "efficient" means the exact build fits the cap.
        InequalityCheck::new("ATI(eta-eps) built within the dimension cap", MAX_TI_DIM as f64, ati_lo.threshold().dim() as f64),
    ];
    let p = ti.projector().to_dense();
    out.push(InequalityCheck::new("TI(eta) is a projection", -(&p * &p - &p).norm(), 0.0));
    if let Some(after) = collapse_on_one(reg, ti.projector())? {
        let rho = after.density();
        let support = (&p * &rho * &p - &rho).norm();
        out.push(InequalityCheck::new("collapsed state lies in the >= eta eigenspace", -support, 0.0));
        let mean = (family.mixture()? * &rho).trace().re;
        out.push(InequalityCheck::new("collapsed state has mixture expectation >= eta", mean, eta));
    }
    Ok(out)
}

fn joint(parts: &[ThresholdMeasurement]) -> Result<BinaryProjector> {
    joint_projector(&parts.iter().collect::<Vec<_>>())
}

/// The four clauses for `k` registers, party 0 most significant in `reg`.
pub fn multi_ati_clauses(
    families: &[&ProjectiveFamily],
    etas: &[f64],
    epsilon: f64,
    delta: f64,
    reg: &QuantumRegister,
) -> Result<Vec<InequalityCheck>> {
    if families.len() != etas.len() || families.is_empty() {
        return Err(Error::Parameter("need one threshold per family".into()));
    }
    let k = families.len() as f64;
    let base = families
        .iter()
        .zip(etas)
        .map(|(f, &e)| Ok(build_ati(f, e, epsilon, delta)?.threshold().clone()))
        .collect::<Result<Vec<_>>>()?;
    let at = |shift: f64| -> Result<BinaryProjector> {
        let parts = base
            .iter()
            .zip(etas)
            .map(|(t, &e)| shifted(t, e - shift))
            .collect::<Result<Vec<_>>>()?;
        joint(&parts)
    };
    let (p0, p1, p2, p3) = (at(0.0)?, at(epsilon)?, at(2.0 * epsilon)?, at(3.0 * epsilon)?);
    let mut out = vec![
        InequalityCheck::new("ATI(eta-eps)^k >= TI(eta)^k - k delta", reg.probability(&p1)?, reg.probability(&p0)? - k * delta),
        InequalityCheck::new("TI(eta-eps)^k >= ATI(eta)^k - k delta", reg.probability(&p1)?, reg.probability(&p0)? - k * delta),
    ];
    if let Some(after) = collapse_on_one(reg, &p0)? {
        out.push(InequalityCheck::new("after ATI(eta)^k: TI(eta-2eps)^k >= 1 - 2k delta", after.probability(&p2)?, 1.0 - 2.0 * k * delta));
        out.push(InequalityCheck::new("after ATI(eta)^k: ATI(eta-3eps)^k >= 1 - 3k delta", after.probability(&p3)?, 1.0 - 3.0 * k * delta));
    }
    Ok(out)
}

/// The four SimATI inequalities. Probabilities over the sample list are
/// averaged over `repetitions` independent lists of `samples` challenges.
#[allow(clippy::too_many_arguments)]
pub fn simati_clauses<R: Rng + ?Sized>(
    family: &ProjectiveFamily,
    eta: f64,
    epsilon: f64,
    delta: f64,
    alpha: f64,
    samples: usize,
    repetitions: usize,
    reg: &QuantumRegister,
    rng: &mut R,
) -> Result<Vec<InequalityCheck>> {
    if samples == 0 || repetitions == 0 {
        return Err(Error::Parameter("SimATI needs at least one sample list of one sample".into()));
    }
    let lo = eta - 5.0 * epsilon;
    let (mut sim_lo, mut sim_hi) = (0.0, 0.0);
    for _ in 0..repetitions {
        let list: Vec<usize> = (0..samples).map(|_| family.sample_index(rng)).collect();
        let sim = build_sim_ati(family, &list, eta, epsilon, delta, alpha)?;
        sim_hi += sim.accept_probability(reg)?;
        sim_lo += shifted(&sim, lo)?.accept_probability(reg)?;
    }
    sim_lo /= repetitions as f64;
    sim_hi /= repetitions as f64;
    let ti = build_ti(family, eta)?;
    let ati = build_ati(family, eta, epsilon, delta)?;
    let p_ti = ti.accept_probability(reg)?;
    let p_ati = ati.accept_probability(reg)?;
    let p_ti_lo = shifted(&ti, lo)?.accept_probability(reg)?;
    let p_ati_lo = ati.at_threshold(lo)?.accept_probability(reg)?;
    let slack = alpha + 4.0 * delta;
    Ok(vec![
        InequalityCheck::new("SimATI(eta-5eps) >= ATI(eta) - alpha - 4delta", sim_lo, p_ati - slack),
        InequalityCheck::new("ATI(eta-5eps) >= SimATI(eta) - alpha - 4delta", p_ati_lo, sim_hi - slack),
        InequalityCheck::new("SimATI(eta-5eps) >= TI(eta) - alpha - 4delta", sim_lo, p_ti - slack),
        InequalityCheck::new("TI(eta-5eps) >= SimATI(eta) - alpha - 4delta", p_ti_lo, sim_hi - slack),
    ])
}

/// Slack parameters of the randomized suite.
pub const SUITE_EPSILON: f64 = 0.05;
pub const SUITE_DELTA: f64 = 0.05;
pub const SUITE_ALPHA: f64 = 0.05;
/// Independent sample lists averaged per SimATI probability.
pub const SUITE_REPETITIONS: usize = 32;

fn random_family<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<ProjectiveFamily> {
    let count = rng.random_range(2..=6);
    let projectors = (0..count)
        .map(|_| BinaryProjector::dense(random_projector(dim, rng.random_range(1..dim), rng)))
        .collect::<Result<Vec<_>>>()?;
    let weights = (0..count).map(|_| rng.random_range(0.1..1.0)).collect::<Vec<f64>>();
    let total: f64 = weights.iter().sum();
    ProjectiveFamily::new(projectors, weights.iter().map(|w| w / total).collect())
}

fn random_register<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<QuantumRegister> {
    let qubits = dim.trailing_zeros() as usize;
    if rng.random_bool(0.5) {
        QuantumRegister::from_amplitudes(qubits, random_state(dim, rng).iter().copied().collect())
    } else {
        QuantumRegister::from_density(qubits, random_density(dim, rng.random_range(1..=dim), rng))
    }
}

/// One random instance of the whole suite at Hilbert dimension `dim` (a
/// power of two from 4 to 16): the single-register clauses, the `k = 2`
/// clauses on a `2 × dim/2` bipartite state and the SimATI inequalities
/// with the default sample count.
pub fn random_suite_instance<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<InequalityCheck>> {
    capacity("threshold-measurements", "suite dimension", dim as u64, 16u64)?;
    if !dim.is_power_of_two() || dim < 4 {
        return Err(Error::Parameter(format!("suite dimension {dim} must be 4, 8 or 16")));
    }
    let eta = rng.random_range(0.1..0.9);
    let family = random_family(dim, rng)?;
    let reg = random_register(dim, rng)?;
    let mut out = single_ati_clauses(&family, eta, SUITE_EPSILON, SUITE_DELTA, &reg)?;

    let (da, db) = (2, dim / 2);
    let fa = random_family(da, rng)?;
    let fb = random_family(db, rng)?;
    let etas = [rng.random_range(0.1..0.9), rng.random_range(0.1..0.9)];
    out.extend(multi_ati_clauses(&[&fa, &fb], &etas, SUITE_EPSILON, SUITE_DELTA, &random_register(dim, rng)?)?);

    let samples = simati_sample_count(SUITE_EPSILON, SUITE_DELTA)?;
    out.extend(simati_clauses(
        &family,
        eta,
        SUITE_EPSILON,
        SUITE_DELTA,
        SUITE_ALPHA,
        samples,
        SUITE_REPETITIONS,
        &reg,
        rng,
    )?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;

    #[test]
    fn random_instances_have_no_violations() {
        let mut worst: f64 = 0.0;
        for seed in 0..12u64 {
            let mut rng = stream_rng(seed, 0);
            let dim = [4, 8, 16][seed as usize % 3];
            for c in random_suite_instance(dim, &mut rng).unwrap() {
                worst = worst.max(c.rhs - c.lhs);
                assert!(c.holds(1e-7), "{} : {} < {}", c.clause, c.lhs, c.rhs);
            }
        }
        println!("worst gap {worst}");
    }

    #[test]
    fn suite_rejects_odd_dimension() {
        assert!(random_suite_instance(6, &mut stream_rng(0, 0)).is_err());
    }
}
