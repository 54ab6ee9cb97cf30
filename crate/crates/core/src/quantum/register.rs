use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde_json::json;

use super::density::{fidelity, is_density, trace_distance};
use super::{c, BinaryProjector, C64, CMatrix, CVector, MAX_DENSITY_QUBITS, MAX_QUBITS, TOL};
use crate::error::{capacity, check_dim, Error, Result};
use crate::gf2::{parity, Gf2Subspace, Gf2Vector};

#[derive(Clone, Debug, PartialEq)]
pub enum State {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A register of `qubits` qubits. Basis index `i` is the bit vector whose
/// coordinate `j` is bit `j` of `i`, matching the packing of [`Gf2Vector`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRegister {
    qubits: usize,
    state: State,
}

/// In-place normalised Walsh–Hadamard transform, i.e. H^{⊗d}.
pub fn fwht(v: &mut [C64]) {
    let n = v.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (a, b) = (v[i], v[i + h]);
                v[i] = a + b;
                v[i + h] = a - b;
            }
        }
        h *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for x in v.iter_mut() {
        *x *= scale;
    }
}

impl QuantumRegister {
    fn check_qubits(qubits: usize, mixed: bool) -> Result<()> {
        let limit = if mixed { MAX_DENSITY_QUBITS } else { MAX_QUBITS };
        capacity("quantum-sim", "qubits", qubits as u64, limit as u64)
    }

    pub fn from_amplitudes(qubits: usize, amps: Vec<C64>) -> Result<Self> {
        Self::check_qubits(qubits, false)?;
        check_dim(1 << qubits, amps.len())?;
        let v = DVector::from_vec(amps);
        let norm = v.norm_squared();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::Parameter(format!("state norm² is {norm}, not 1")));
        }
        Ok(Self {
            qubits,
            state: State::Pure(v),
        })
    }

    pub fn from_density(qubits: usize, rho: CMatrix) -> Result<Self> {
        Self::check_qubits(qubits, true)?;
        check_dim(1 << qubits, rho.nrows())?;
        if !is_density(&rho, TOL) {
            return Err(Error::Parameter("matrix is not a density operator".into()));
        }
        Ok(Self {
            qubits,
            state: State::Mixed(rho),
        })
    }

    pub fn basis_state(qubits: usize, index: u64) -> Result<Self> {
        Self::check_qubits(qubits, false)?;
        if index >> qubits != 0 {
            return Err(Error::Parameter(format!("basis index {index} outside {qubits} qubits")));
        }
        let mut v = DVector::zeros(1 << qubits);
        v[index as usize] = c(1.0);
        Ok(Self {
            qubits,
            state: State::Pure(v),
        })
    }

    /// Σ_{v∈A} (−1)^{⟨v,a₂⟩} |v + a₁⟩ / √|A|.
    pub fn coset_state(a: &Gf2Subspace, a1: &Gf2Vector, a2: &Gf2Vector) -> Result<Self> {
        let d = a.ambient_dim();
        check_dim(d, a1.dim())?;
        check_dim(d, a2.dim())?;
        Self::check_qubits(d, false)?;
        let amp = 1.0 / ((1u64 << a.dim()) as f64).sqrt();
        let mut v = DVector::zeros(1 << d);
        for e in a.elements()? {
            let sign = if parity(e.bits() & a2.bits()) { -amp } else { amp };
            v[(e.bits() ^ a1.bits()) as usize] = c(sign);
        }
        Ok(Self {
            qubits: d,
            state: State::Pure(v),
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn state(&self) -> &State {
        &self.state
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.state, State::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&CVector> {
        match &self.state {
            State::Pure(v) => Some(v),
            State::Mixed(_) => None,
        }
    }

    pub fn density(&self) -> CMatrix {
        match &self.state {
            State::Pure(v) => v * v.adjoint(),
            State::Mixed(rho) => rho.clone(),
        }
    }

    pub fn to_mixed(&self) -> Result<Self> {
        Self::check_qubits(self.qubits, true)?;
        Ok(Self {
            qubits: self.qubits,
            state: State::Mixed(self.density()),
        })
    }

    /// |Σ|amp|² − 1| for pure states, |Tr ρ − 1| for mixed ones.
    pub fn norm_deviation(&self) -> f64 {
        match &self.state {
            State::Pure(v) => (v.norm_squared() - 1.0).abs(),
            State::Mixed(rho) => (rho.trace().re - 1.0).abs(),
        }
    }

    pub fn hadamard_all(&self) -> Self {
        let state = match &self.state {
            State::Pure(v) => {
                let mut w = v.clone();
                fwht(w.as_mut_slice());
                State::Pure(w)
            }
            State::Mixed(rho) => {
                let mut m = rho.clone();
                for mut col in m.column_iter_mut() {
                    fwht(col.as_mut_slice());
                }
                let mut t = m.transpose();
                for mut col in t.column_iter_mut() {
                    fwht(col.as_mut_slice());
                }
                State::Mixed(t.transpose())
            }
        };
        Self {
            qubits: self.qubits,
            state,
        }
    }

    pub fn apply_unitary(&self, u: &CMatrix) -> Result<Self> {
        check_dim(self.dim(), u.nrows())?;
        check_dim(self.dim(), u.ncols())?;
        let state = match &self.state {
            State::Pure(v) => State::Pure(u * v),
            State::Mixed(rho) => State::Mixed(u * rho * u.adjoint()),
        };
        Ok(Self {
            qubits: self.qubits,
            state,
        })
    }

    /// ⟨ψ|P|ψ⟩, or Tr[Pρ].
    pub fn probability(&self, p: &BinaryProjector) -> Result<f64> {
        check_dim(self.dim(), p.dim())?;
        Ok(match &self.state {
            State::Pure(v) => v.dotc(&p.apply(v)).re.clamp(0.0, 1.0),
            State::Mixed(rho) => (p.apply_left(rho)).trace().re.clamp(0.0, 1.0),
        })
    }

    /// Post-measurement state for a fixed outcome, with its probability.
    pub fn collapse(&self, p: &BinaryProjector, outcome: bool) -> Result<(Self, f64)> {
        check_dim(self.dim(), p.dim())?;
        let proj = if outcome { p.clone() } else { p.complement() };
        let state = match &self.state {
            State::Pure(v) => State::Pure(proj.apply(v)),
            State::Mixed(rho) => State::Mixed(proj.sandwich(rho)),
        };
        let prob = match &state {
            State::Pure(v) => v.norm_squared(),
            State::Mixed(rho) => rho.trace().re,
        };
        if prob < 1e-15 {
            return Err(Error::ImpossibleCollapse);
        }
        let state = match state {
            State::Pure(v) => State::Pure(v / c(prob.sqrt())),
            State::Mixed(rho) => State::Mixed(rho / c(prob)),
        };
        Ok((
            Self {
                qubits: self.qubits,
                state,
            },
            prob,
        ))
    }

    /// Samples outcome 1 with probability ⟨P⟩. Returns the outcome, the
    /// renormalised post-measurement register and the probability of the
    /// observed outcome.
    pub fn measure_binary<R: Rng + ?Sized>(
        &self,
        p: &BinaryProjector,
        rng: &mut R,
    ) -> Result<(bool, Self, f64)> {
        let p1 = self.probability(p)?;
        let outcome = rng.random::<f64>() < p1;
        let (collapsed, prob) = self.collapse(p, outcome)?;
        Ok((outcome, collapsed, prob))
    }

    /// Projective measurement of the partition of basis states into
    /// classes. `class_of[i]` is the class of basis state `i`.
    pub fn measure_classes<R: Rng + ?Sized>(
        &self,
        class_of: &[u32],
        rng: &mut R,
    ) -> Result<(u32, Self, f64)> {
        check_dim(self.dim(), class_of.len())?;
        let classes = class_of.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut weight = vec![0.0; classes];
        match &self.state {
            State::Pure(v) => {
                for (i, &k) in class_of.iter().enumerate() {
                    weight[k as usize] += v[i].norm_sqr();
                }
            }
            State::Mixed(rho) => {
                for (i, &k) in class_of.iter().enumerate() {
                    weight[k as usize] += rho[(i, i)].re;
                }
            }
        }
        let total: f64 = weight.iter().sum();
        let mut r = rng.random::<f64>() * total;
        let mut chosen = classes.saturating_sub(1);
        for (k, &w) in weight.iter().enumerate() {
            if w > 0.0 && r < w {
                chosen = k;
                break;
            }
            r -= w;
        }
        let prob = weight[chosen];
        if prob < 1e-15 {
            return Err(Error::ImpossibleCollapse);
        }
        let keep: Vec<bool> = class_of.iter().map(|&k| k as usize == chosen).collect();
        let state = match &self.state {
            State::Pure(v) => {
                let s = c(1.0 / prob.sqrt());
                State::Pure(DVector::from_fn(v.len(), |i, _| if keep[i] { v[i] * s } else { c(0.0) }))
            }
            State::Mixed(rho) => {
                let s = c(1.0 / prob);
                State::Mixed(DMatrix::from_fn(rho.nrows(), rho.ncols(), |i, j| {
                    if keep[i] && keep[j] {
                        rho[(i, j)] * s
                    } else {
                        c(0.0)
                    }
                }))
            }
        };
        Ok((
            chosen as u32,
            Self {
                qubits: self.qubits,
                state,
            },
            prob,
        ))
    }

    /// Full computational-basis measurement.
    pub fn measure_computational<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(u64, Self)> {
        let labels: Vec<u32> = (0..self.dim() as u32).collect();
        let (k, _, _) = self.measure_classes(&labels, rng)?;
        Ok((k as u64, Self::basis_state(self.qubits, k as u64)?))
    }

    /// Global-phase-insensitive overlap. For two pure states this is |⟨ψ|φ⟩|².
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(match (&self.state, &other.state) {
            (State::Pure(a), State::Pure(b)) => a.dotc(b).norm_sqr(),
            (State::Pure(a), State::Mixed(rho)) | (State::Mixed(rho), State::Pure(a)) => {
                a.dotc(&(rho * a)).re
            }
            (State::Mixed(r), State::Mixed(s)) => fidelity(r, s),
        })
    }

    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(match (&self.state, &other.state) {
            (State::Pure(_), State::Pure(_)) => (1.0 - self.fidelity(other)?).max(0.0).sqrt(),
            _ => trace_distance(&self.density(), &other.density()),
        })
    }

    /// Debug dump: `[[index, re, im], ...]` for nonzero amplitudes.
    pub fn to_json(&self) -> serde_json::Value {
        match &self.state {
            State::Pure(v) => {
                let entries: Vec<_> = v
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm_sqr() > 0.0)
                    .map(|(i, a)| json!([i, a.re, a.im]))
                    .collect();
                json!({ "qubits": self.qubits, "pure": entries })
            }
            State::Mixed(rho) => {
                let diag: Vec<_> = (0..rho.nrows()).map(|i| json!([i, rho[(i, i)].re, 0.0])).collect();
                json!({ "qubits": self.qubits, "mixed_diagonal": diag })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::sample_coset_instance;
    use crate::stream_rng;

    fn v(c: &[u8]) -> Gf2Vector {
        Gf2Vector::from_coords(c).unwrap()
    }

    fn amp(reg: &QuantumRegister, i: usize) -> C64 {
        reg.amplitudes().unwrap()[i]
    }

    #[test]
    fn coset_state_two_qubits() {
        // A = span{(1,0)}, a₁ = (0,1), a₂ = (1,0)
        let a = Gf2Subspace::rref(&[v(&[1, 0])]).unwrap();
        let reg = QuantumRegister::coset_state(&a, &v(&[0, 1]), &v(&[1, 0])).unwrap();
        let h = 1.0 / 2f64.sqrt();
        // |01⟩ is coordinates (0,1): bit 1 set, index 2; |11⟩ is index 3
        assert!((amp(&reg, 2).re - h).abs() < 1e-12);
        assert!((amp(&reg, 3).re + h).abs() < 1e-12);
        assert_eq!(amp(&reg, 0), c(0.0));
        assert_eq!(amp(&reg, 1), c(0.0));
    }

    #[test]
    fn coset_state_edge_cases() {
        let reg = QuantumRegister::coset_state(
            &Gf2Subspace::zero(1).unwrap(),
            &v(&[1]),
            &v(&[0]),
        )
        .unwrap();
        assert_eq!(reg, QuantumRegister::basis_state(1, 1).unwrap());

        let full = Gf2Subspace::full(2).unwrap();
        let reg = QuantumRegister::coset_state(&full, &Gf2Vector::zero(2), &Gf2Vector::zero(2)).unwrap();
        for i in 0..4 {
            assert!((amp(&reg, i).re - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn coset_state_capacity() {
        let big = Gf2Subspace::zero(15).unwrap();
        let err = QuantumRegister::coset_state(&big, &Gf2Vector::zero(15), &Gf2Vector::zero(15)).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn hadamard_examples() {
        let plus = QuantumRegister::basis_state(1, 0).unwrap().hadamard_all();
        let h = 1.0 / 2f64.sqrt();
        assert!((amp(&plus, 0).re - h).abs() < 1e-12 && (amp(&plus, 1).re - h).abs() < 1e-12);

        let mut rng = stream_rng(3, 0);
        let inst = sample_coset_instance(4, &mut rng).unwrap();
        let reg = QuantumRegister::coset_state(&inst.a, &inst.a1, &inst.a2).unwrap();
        let dual = QuantumRegister::coset_state(&inst.a.dual(), &inst.a2, &inst.a1).unwrap();
        assert!((reg.hadamard_all().fidelity(&dual).unwrap() - 1.0).abs() < 1e-9);
        assert!((reg.hadamard_all().hadamard_all().fidelity(&reg).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hadamard_on_density_matches_pure() {
        let mut rng = stream_rng(5, 0);
        let inst = sample_coset_instance(4, &mut rng).unwrap();
        let reg = QuantumRegister::coset_state(&inst.a, &inst.a1, &inst.a2).unwrap();
        let mixed = reg.to_mixed().unwrap().hadamard_all();
        let pure = reg.hadamard_all();
        assert!(trace_distance(&mixed.density(), &pure.density()) < 1e-9);
    }

    #[test]
    fn measure_binary_examples() {
        let one = QuantumRegister::basis_state(1, 1).unwrap();
        let p = BinaryProjector::computational(2, |i| i == 1);
        let mut rng = stream_rng(0, 0);
        let (bit, post, prob) = one.measure_binary(&p, &mut rng).unwrap();
        assert!(bit);
        assert!((prob - 1.0).abs() < 1e-12);
        assert_eq!(post, one);
        assert_eq!(one.collapse(&p, false).unwrap_err(), Error::ImpossibleCollapse);
    }

    #[test]
    fn honest_state_passes_membership_and_hint() {
        let mut rng = stream_rng(8, 0);
        let inst = sample_coset_instance(8, &mut rng).unwrap();
        let reg = QuantumRegister::coset_state(&inst.a, &inst.a1, &inst.a2).unwrap();
        let primal = inst.primal();
        let hint = inst.primal_hint();
        let member = BinaryProjector::computational(256, |i| primal.contains_bits(i));
        let hinted = BinaryProjector::computational(256, |i| hint.contains_bits(i));
        assert!((reg.probability(&member).unwrap() - 1.0).abs() < 1e-12);
        assert!((reg.probability(&hinted).unwrap() - 1.0).abs() < 1e-12);
        let dual = inst.dual();
        let dual_member = BinaryProjector::hadamard(256, |i| dual.contains_bits(i));
        assert!((reg.probability(&dual_member).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn measure_classes_collapses_to_class() {
        let full = Gf2Subspace::full(2).unwrap();
        let reg = QuantumRegister::coset_state(&full, &Gf2Vector::zero(2), &Gf2Vector::zero(2)).unwrap();
        let mut rng = stream_rng(1, 1);
        let (k, post, prob) = reg.measure_classes(&[0, 1, 0, 1], &mut rng).unwrap();
        assert!((prob - 0.5).abs() < 1e-12);
        let amps = post.amplitudes().unwrap();
        for i in 0..4 {
            let expected = if i % 2 == k as usize { 0.5 } else { 0.0 };
            assert!((amps[i].norm_sqr() - expected).abs() < 1e-12);
        }
    }
}
