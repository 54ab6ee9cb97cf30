//! Threshold implementations of mixtures of binary projective measurements.
//!
//! For a family `{P_i}` with challenge law `D`, `E = Σ_i D(i)·P_i` is
//! Hermitian with spectrum in [0, 1]. `TI_η` projects onto the eigenspaces
//! of `E` with eigenvalue at least `η`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use serde::Serialize;

use crate::error::{capacity, check_dim, Error, Result};
use crate::quantum::{hermitian_eigen, kron, BinaryProjector, CMatrix, CVector, Complex, QuantumRegister, TOL};
use crate::resample::FiniteDistribution;

mod inequalities;

pub use inequalities::*;

/// Largest Hilbert dimension handled by a dense eigendecomposition.
pub const MAX_TI_DIM: usize = 256;
/// Eigenvalues this far below `η` still count as above it.
pub const TIE_TOL: f64 = 1e-12;
/// Upper bound on the SimATI sample count.
pub const MAX_SIMATI_SAMPLES: usize = 10_000;

#[derive(Clone, Debug)]
pub struct ProjectiveFamily {
    projectors: Vec<BinaryProjector>,
    dist: FiniteDistribution,
}

impl ProjectiveFamily {
    /// Projector `i` is drawn with probability `weights[i]`.
    pub fn new(projectors: Vec<BinaryProjector>, weights: Vec<f64>) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::Parameter("a family needs at least one projector".into()))?;
        let dim = first.dim();
        for p in &projectors {
            check_dim(dim, p.dim())?;
        }
        check_dim(projectors.len(), weights.len())?;
        if let Some(i) = projectors
            .iter()
            .position(|p| matches!(p, BinaryProjector::Dense(_)) && !p.is_projector(1e-8))
        {
            return Err(Error::Parameter(format!("family member {i} is not a projector")));
        }
        let dist = FiniteDistribution::new((0..projectors.len() as u64).collect(), weights)?;
        Ok(Self { projectors, dist })
    }

    pub fn uniform(projectors: Vec<BinaryProjector>) -> Result<Self> {
        let k = projectors.len();
        Self::new(projectors, vec![1.0 / k.max(1) as f64; k])
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projector(&self, i: usize) -> &BinaryProjector {
        &self.projectors[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.dist.probs()[i]
    }

    pub fn challenge_distribution(&self) -> &FiniteDistribution {
        &self.dist
    }

    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.dist.sample(rng) as usize
    }

    /// `E·v` without forming `E`.
    pub fn apply_mixture(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(v.len());
        for (p, &w) in self.projectors.iter().zip(self.dist.probs()) {
            if w > 0.0 {
                out += p.apply(v) * Complex::new(w, 0.0);
            }
        }
        out
    }

    /// The dense mixture `E`.
    pub fn mixture(&self) -> Result<CMatrix> {
        capacity("threshold-measurements", "Hilbert dimension", self.dim() as u64, MAX_TI_DIM as u64)?;
        let dim = self.dim();
        let mut e = CMatrix::zeros(dim, dim);
        for (p, &w) in self.projectors.iter().zip(self.dist.probs()) {
            if w > 0.0 {
                e += p.to_dense() * Complex::new(w, 0.0);
            }
        }
        Ok(e)
    }

    /// The same projectors weighted by the empirical law of `samples`.
    pub fn empirical(&self, samples: &[usize]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Parameter("empirical mixture needs at least one sample".into()));
        }
        let mut counts = vec![0.0; self.len()];
        for &s in samples {
            *counts
                .get_mut(s)
                .ok_or_else(|| Error::Parameter(format!("sample {s} outside the index set")))? += 1.0;
        }
        let l = samples.len() as f64;
        Self::new(self.projectors.clone(), counts.into_iter().map(|c| c / l).collect())
    }
}

#[derive(Clone, Debug)]
pub struct ThresholdMeasurement {
    eta: f64,
    eigenvalues: DVector<f64>,
    eigenvectors: CMatrix,
    projector: BinaryProjector,
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Parameter(format!("threshold {eta} outside [0, 1]")));
    }
    Ok(())
}

fn spectral_projector(values: &DVector<f64>, vectors: &CMatrix, eta: f64) -> BinaryProjector {
    let keep: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= eta - TIE_TOL).collect();
    let dim = vectors.nrows();
    let mut v = CMatrix::zeros(dim, keep.len());
    for (k, &i) in keep.iter().enumerate() {
        v.set_column(k, &vectors.column(i));
    }
    BinaryProjector::Dense(&v * v.adjoint())
}

pub fn build_ti(family: &ProjectiveFamily, eta: f64) -> Result<ThresholdMeasurement> {
    check_eta(eta)?;
    let e = family.mixture()?;
    let (eigenvalues, eigenvectors) = hermitian_eigen(&e);
    let projector = spectral_projector(&eigenvalues, &eigenvectors, eta);
    Ok(ThresholdMeasurement {
        eta,
        eigenvalues,
        eigenvectors,
        projector,
    })
}

impl ThresholdMeasurement {
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Ascending eigenvalues of the mixture.
    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn projector(&self) -> &BinaryProjector {
        &self.projector
    }

    pub fn dim(&self) -> usize {
        self.eigenvectors.nrows()
    }

    /// The same mixture thresholded at another `η`, without a new eigensolve.
    pub fn at_threshold(&self, eta: f64) -> Result<Self> {
        check_eta(eta.max(0.0))?;
        Ok(Self {
            eta,
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
            projector: spectral_projector(&self.eigenvalues, &self.eigenvectors, eta),
        })
    }

    pub fn accept_probability(&self, reg: &QuantumRegister) -> Result<f64> {
        reg.probability(&self.projector)
    }

    pub fn apply<R: Rng + ?Sized>(&self, reg: &QuantumRegister, rng: &mut R) -> Result<(bool, QuantumRegister)> {
        let (bit, collapsed, _) = reg.measure_binary(&self.projector, rng)?;
        Ok((bit, collapsed))
    }
}

pub fn apply_ti<R: Rng + ?Sized>(
    ti: &ThresholdMeasurement,
    reg: &QuantumRegister,
    rng: &mut R,
) -> Result<(bool, QuantumRegister)> {
    ti.apply(reg, rng)
}

/// An approximate threshold implementation. It measures exactly `TI_η`
/// and records the `(ε, δ)` it stands in for.
#[derive(Clone, Debug)]
pub struct ApproxThreshold {
    pub epsilon: f64,
    pub delta: f64,
    ti: ThresholdMeasurement,
}

pub fn build_ati(family: &ProjectiveFamily, eta: f64, epsilon: f64, delta: f64) -> Result<ApproxThreshold> {
    check_slack(epsilon, delta)?;
    Ok(ApproxThreshold {
        epsilon,
        delta,
        ti: build_ti(family, eta)?,
    })
}

fn check_slack(epsilon: f64, delta: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Parameter(format!("need 0 < ε, δ < 1, got ({epsilon}, {delta})")));
    }
    Ok(())
}

impl ApproxThreshold {
    pub fn threshold(&self) -> &ThresholdMeasurement {
        &self.ti
    }

    pub fn at_threshold(&self, eta: f64) -> Result<Self> {
        Ok(Self {
            ti: self.ti.at_threshold(eta)?,
            ..self.clone()
        })
    }

    pub fn accept_probability(&self, reg: &QuantumRegister) -> Result<f64> {
        self.ti.accept_probability(reg)
    }

    pub fn apply<R: Rng + ?Sized>(&self, reg: &QuantumRegister, rng: &mut R) -> Result<(bool, QuantumRegister)> {
        self.ti.apply(reg, rng)
    }
}

pub fn apply_ati<R: Rng + ?Sized>(
    family: &ProjectiveFamily,
    eta: f64,
    epsilon: f64,
    delta: f64,
    reg: &QuantumRegister,
    rng: &mut R,
) -> Result<(bool, QuantumRegister)> {
    build_ati(family, eta, epsilon, delta)?.apply(reg, rng)
}

/// Default SimATI sample count `⌈ln(2/δ)/ε²⌉`, capped at [`MAX_SIMATI_SAMPLES`].
pub fn simati_sample_count(epsilon: f64, delta: f64) -> Result<usize> {
    check_slack(epsilon, delta)?;
    let l = ((2.0 / delta).ln() / (epsilon * epsilon)).ceil() as usize;
    Ok(l.clamp(1, MAX_SIMATI_SAMPLES))
}

/// Thresholds the empirical mixture of the given challenge samples. The
/// challenge law itself is never consulted. `α` only enters the bounds the
/// result is checked against.
pub fn build_sim_ati(
    family: &ProjectiveFamily,
    samples: &[usize],
    eta: f64,
    epsilon: f64,
    delta: f64,
    alpha: f64,
) -> Result<ThresholdMeasurement> {
    check_slack(epsilon, delta)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("α = {alpha} outside (0, 1)")));
    }
    build_ti(&family.empirical(samples)?, eta)
}

#[allow(clippy::too_many_arguments)]
pub fn sim_ati<R: Rng + ?Sized>(
    family: &ProjectiveFamily,
    samples: &[usize],
    eta: f64,
    epsilon: f64,
    delta: f64,
    alpha: f64,
    reg: &QuantumRegister,
    rng: &mut R,
) -> Result<bool> {
    Ok(build_sim_ati(family, samples, eta, epsilon, delta, alpha)?.apply(reg, rng)?.0)
}

/// `⊗_ℓ TI_ℓ` as one projector on the joint space, party 0 most significant.
pub fn joint_projector(parts: &[&ThresholdMeasurement]) -> Result<BinaryProjector> {
    let dim: usize = parts.iter().map(|t| t.dim()).product();
    capacity("threshold-measurements", "joint dimension", dim as u64, MAX_TI_DIM as u64)?;
    let mut p = CMatrix::identity(1, 1);
    for t in parts {
        p = kron(&p, &t.projector().to_dense());
    }
    Ok(BinaryProjector::Dense(p))
}

/// All-ones probability of independent threshold measurements on a
/// product state: the product of the per-party probabilities.
pub fn joint_accept_product(parts: &[(&ThresholdMeasurement, &QuantumRegister)]) -> Result<f64> {
    parts
        .iter()
        .map(|(t, r)| t.accept_probability(r))
        .product()
}

/// Spectral measure of a Hermitian operator with respect to a vector,
/// from a Lanczos run with full reorthogonalisation.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralMeasure {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// The Krylov space closed up, so nodes and weights are exact.
    pub exact: bool,
    #[serde(skip)]
    basis: Vec<CVector>,
    #[serde(skip)]
    ritz: DMatrix<f64>,
    #[serde(skip)]
    norm: f64,
}

const LANCZOS_BREAKDOWN: f64 = 1e-10;

pub fn spectral_measure(op: impl Fn(&CVector) -> CVector, psi: &CVector, max_steps: usize) -> Result<SpectralMeasure> {
    let norm = psi.norm();
    if norm < TOL {
        return Err(Error::Parameter("spectral measure of the zero vector".into()));
    }
    let mut basis = vec![psi / Complex::new(norm, 0.0)];
    let (mut alphas, mut betas) = (Vec::new(), Vec::new());
    let mut exact = false;
    while alphas.len() < max_steps.max(1) {
        let q = basis.last().unwrap();
        let mut w = op(q);
        alphas.push(q.dotc(&w).re);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let beta = w.norm();
        if beta < LANCZOS_BREAKDOWN || basis.len() == psi.len() {
            exact = true;
            break;
        }
        betas.push(beta);
        basis.push(w / Complex::new(beta, 0.0));
    }
    let k = alphas.len();
    basis.truncate(k);
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let weights = (0..k).map(|j| eig.eigenvectors[(0, j)].powi(2)).collect();
    Ok(SpectralMeasure {
        nodes: eig.eigenvalues.iter().copied().collect(),
        weights,
        exact,
        basis,
        ritz: eig.eigenvectors,
        norm,
    })
}

impl SpectralMeasure {
    /// Mass on nodes at or above `eta`, i.e. ⟨ψ|TI_η|ψ⟩/‖ψ‖².
    pub fn mass_above(&self, eta: f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .filter(|(&n, _)| n >= eta - TIE_TOL)
            .map(|(_, &w)| w)
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }

    /// Unnormalised `TI_η·ψ`, exact when the Krylov space closed up.
    pub fn project_above(&self, eta: f64) -> CVector {
        let dim = self.basis[0].len();
        let mut coeffs = DVector::<f64>::zeros(self.nodes.len());
        for (j, &n) in self.nodes.iter().enumerate() {
            if n >= eta - TIE_TOL {
                let y = self.ritz.column(j);
                coeffs += y * (y[0] * self.norm);
            }
        }
        let mut out = CVector::zeros(dim);
        for (b, &c) in self.basis.iter().zip(coeffs.iter()) {
            out += b * Complex::new(c, 0.0);
        }
        out
    }
}

/// `TI_η` on a pure register through the Lanczos spectral measure; works
/// beyond the dense cap since the mixture is only applied to vectors.
pub fn ti_accept_pure(family: &ProjectiveFamily, eta: f64, reg: &QuantumRegister) -> Result<SpectralMeasure> {
    check_eta(eta)?;
    check_dim(family.dim(), reg.dim())?;
    let psi = reg
        .amplitudes()
        .ok_or_else(|| Error::Parameter("Lanczos threshold needs a pure register".into()))?;
    spectral_measure(|v| family.apply_mixture(v), psi, reg.dim().min(512))
}

/// Measures `TI_η` on a pure register without forming the mixture.
pub fn apply_ti_pure<R: Rng + ?Sized>(
    family: &ProjectiveFamily,
    eta: f64,
    reg: &QuantumRegister,
    rng: &mut R,
) -> Result<(bool, QuantumRegister)> {
    let sm = ti_accept_pure(family, eta, reg)?;
    if !sm.exact {
        log::warn!("Lanczos did not close up; threshold measurement is approximate");
    }
    let p1 = sm.mass_above(eta);
    let accept = rng.random::<f64>() < p1;
    let above = sm.project_above(eta);
    let psi = reg.amplitudes().expect("checked pure");
    let branch = if accept { above } else { psi - above };
    let norm = branch.norm();
    if norm < 1e-12 {
        return Err(Error::ImpossibleCollapse);
    }
    let collapsed = QuantumRegister::from_amplitudes(reg.qubits(), (branch / Complex::new(norm, 0.0)).iter().copied().collect())?;
    Ok((accept, collapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::{random_density, random_projector, random_state};
    use crate::stream_rng;

    fn dense(m: CMatrix) -> BinaryProjector {
        BinaryProjector::dense(m).unwrap()
    }

    #[test]
    fn single_projector_is_its_own_threshold() {
        let mut rng = stream_rng(1, 0);
        let p = random_projector(8, 3, &mut rng);
        let fam = ProjectiveFamily::uniform(vec![dense(p.clone())]).unwrap();
        let ti = build_ti(&fam, 0.5).unwrap();
        assert!((ti.projector().to_dense() - p).camax() < 1e-9);
    }

    #[test]
    fn projector_with_identity() {
        let mut rng = stream_rng(2, 0);
        let p = random_projector(8, 2, &mut rng);
        let fam = ProjectiveFamily::uniform(vec![dense(p.clone()), BinaryProjector::identity(8)]).unwrap();
        let ti = build_ti(&fam, 0.75).unwrap();
        let vals = ti.eigenvalues();
        assert!(vals.iter().all(|&v| (v - 0.5).abs() < 1e-9 || (v - 1.0).abs() < 1e-9));
        assert!((ti.projector().to_dense() - p).camax() < 1e-9);
    }

    #[test]
    fn eigenvector_accepted_iff_above() {
        let mut rng = stream_rng(3, 0);
        let fam = ProjectiveFamily::uniform((0..3).map(|r| dense(random_projector(4, r + 1, &mut rng))).collect())
            .unwrap();
        let ti = build_ti(&fam, 0.4).unwrap();
        for j in 0..4 {
            let v: Vec<_> = ti.eigenvectors().column(j).iter().copied().collect();
            let reg = QuantumRegister::from_amplitudes(2, v).unwrap();
            let p = ti.accept_probability(&reg).unwrap();
            let expect = if ti.eigenvalues()[j] >= 0.4 { 1.0 } else { 0.0 };
            assert!((p - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn maximally_mixed_acceptance_is_rank_fraction() {
        let mut rng = stream_rng(4, 0);
        let fam = ProjectiveFamily::uniform((0..5).map(|_| dense(random_projector(8, 1, &mut rng))).collect())
            .unwrap();
        let ti = build_ti(&fam, 0.1).unwrap();
        let reg = QuantumRegister::from_density(3, CMatrix::identity(8, 8) / Complex::new(8.0, 0.0)).unwrap();
        let rank = ti.eigenvalues().iter().filter(|&&v| v >= 0.1 - TIE_TOL).count() as f64;
        assert!((ti.accept_probability(&reg).unwrap() - rank / 8.0).abs() < 1e-9);
        let zero = ti.at_threshold(0.0).unwrap();
        assert!((zero.accept_probability(&reg).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn repeated_threshold_is_stable() {
        let mut rng = stream_rng(5, 0);
        let fam = ProjectiveFamily::uniform((0..4).map(|_| dense(random_projector(8, 3, &mut rng))).collect())
            .unwrap();
        let ti = build_ti(&fam, 0.3).unwrap();
        let reg = QuantumRegister::from_density(3, random_density(8, 3, &mut rng)).unwrap();
        for _ in 0..20 {
            let (b, after) = ti.apply(&reg, &mut rng).unwrap();
            let again = ti.accept_probability(&after).unwrap();
            assert!((again - if b { 1.0 } else { 0.0 }).abs() < 1e-9);
        }
    }

    #[test]
    fn lanczos_matches_dense() {
        let mut rng = stream_rng(6, 0);
        let fam = ProjectiveFamily::new(
            (0..4).map(|_| dense(random_projector(16, 5, &mut rng))).collect(),
            vec![0.1, 0.2, 0.3, 0.4],
        )
        .unwrap();
        let psi = random_state(16, &mut rng);
        let reg = QuantumRegister::from_amplitudes(4, psi.iter().copied().collect()).unwrap();
        let sm = ti_accept_pure(&fam, 0.35, &reg).unwrap();
        assert!(sm.exact);
        let ti = build_ti(&fam, 0.35).unwrap();
        let dense_p = ti.accept_probability(&reg).unwrap();
        assert!((sm.mass_above(0.35) - dense_p).abs() < 1e-8);
        let projected = ti.projector().apply(&psi);
        assert!((sm.project_above(0.35) - projected).norm() < 1e-7);
    }

    #[test]
    fn sample_count_default() {
        assert_eq!(simati_sample_count(0.1, 0.1).unwrap(), 300);
        assert_eq!(simati_sample_count(0.001, 0.1).unwrap(), MAX_SIMATI_SAMPLES);
        assert!(build_sim_ati(
            &ProjectiveFamily::uniform(vec![BinaryProjector::identity(2)]).unwrap(),
            &[],
            0.5,
            0.1,
            0.1,
            0.1
        )
        .is_err());
    }

    #[test]
    fn eta_out_of_range() {
        let fam = ProjectiveFamily::uniform(vec![BinaryProjector::identity(2)]).unwrap();
        assert!(build_ti(&fam, 1.5).is_err());
    }
}
