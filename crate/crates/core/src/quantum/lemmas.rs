//! Numerical checks of the measurement lemmas used by the construction:
//! gentle measurement with rewinding, the simultaneous-projection bound on
//! bipartite states, and implementation independence of POVMs.

use rand::Rng;

use super::density::{kron, partial_trace_first, partial_trace_second, trace_distance};
use super::{c, BinaryProjector, CMatrix, QuantumRegister, TOL};
use crate::error::{check_dim, Error, Result};

#[derive(Clone, Debug)]
pub struct GentleReport {
    /// Probability of the Π₁ outcome.
    pub epsilon: f64,
    /// √ε.
    pub bound: f64,
    /// Trace distance between the input and the rewound state.
    pub trace_distance: f64,
    /// Rewound state conditioned on the Π₀ outcome.
    pub rewound: CMatrix,
}

impl GentleReport {
    pub fn holds(&self) -> bool {
        self.trace_distance <= self.bound + TOL
    }
}

fn ancilla_zero(da: usize) -> CMatrix {
    let mut z = CMatrix::zeros(da, da);
    z[(0, 0)] = c(1.0);
    z
}

fn rewind_branch(
    rho: &CMatrix,
    u: &CMatrix,
    proj: &BinaryProjector,
    da: usize,
) -> Result<(CMatrix, f64)> {
    let ds = rho.nrows();
    check_dim(ds * da, u.nrows())?;
    check_dim(ds * da, proj.dim())?;
    let tau = u * kron(rho, &ancilla_zero(da)) * u.adjoint();
    let post = proj.sandwich(&tau);
    let p = post.trace().re;
    if p < 1e-15 {
        return Err(Error::ImpossibleCollapse);
    }
    let back = u.adjoint() * post * u / c(p);
    Ok((partial_trace_second(&back, ds, da), p))
}

/// Appends an ancilla of dimension `ancilla_dim` in |0⟩, applies `u`,
/// measures {Π₀, I − Π₀}, undoes `u` and traces the ancilla out, all
/// conditioned on the Π₀ outcome. The system is the first tensor factor.
pub fn gentle_measurement(
    rho: &CMatrix,
    u: &CMatrix,
    pi0: &BinaryProjector,
    ancilla_dim: usize,
) -> Result<GentleReport> {
    let (rewound, p0) = rewind_branch(rho, u, pi0, ancilla_dim)?;
    let epsilon = (1.0 - p0).max(0.0);
    Ok(GentleReport {
        epsilon,
        bound: epsilon.sqrt(),
        trace_distance: trace_distance(rho, &rewound),
        rewound,
    })
}

#[derive(Clone, Debug)]
pub struct RewindReport {
    /// `false` for Π₀, `true` for Π₁.
    pub outcome: bool,
    pub rewound: QuantumRegister,
    pub epsilon: f64,
    pub bound: f64,
    pub trace_distance: f64,
}

/// Sampled version of [`gentle_measurement`] on a register.
pub fn measure_and_rewind<R: Rng + ?Sized>(
    reg: &QuantumRegister,
    u: &CMatrix,
    pi0: &BinaryProjector,
    ancilla_dim: usize,
    rng: &mut R,
) -> Result<RewindReport> {
    let rho = reg.density();
    let report = gentle_measurement(&rho, u, pi0, ancilla_dim);
    let epsilon = match &report {
        Ok(r) => r.epsilon,
        Err(_) => 1.0,
    };
    let outcome = rng.random::<f64>() < epsilon;
    let rewound = if outcome {
        rewind_branch(&rho, u, &pi0.complement(), ancilla_dim)?.0
    } else {
        report?.rewound
    };
    let td = trace_distance(&rho, &rewound);
    Ok(RewindReport {
        outcome,
        rewound: QuantumRegister::from_density(reg.qubits(), rewound)?,
        epsilon,
        bound: epsilon.sqrt(),
        trace_distance: td,
    })
}

/// State of the second register after measuring the first with Kraus
/// operator `m_i`, renormalised, together with the outcome probability.
pub fn conditional_second_register(
    rho: &CMatrix,
    dims: (usize, usize),
    m_i: &CMatrix,
) -> Result<(CMatrix, f64)> {
    let (da, db) = dims;
    check_dim(da * db, rho.nrows())?;
    check_dim(da, m_i.nrows())?;
    let op = kron(m_i, &CMatrix::identity(db, db));
    let post = &op * rho * op.adjoint();
    let p = post.trace().re;
    if p < 1e-12 {
        return Err(Error::UndefinedConditioning);
    }
    Ok((partial_trace_first(&post, da, db) / c(p), p))
}

#[derive(Clone, Debug)]
pub struct SimulprojReport {
    /// 1 − Tr[(Π₁ ⊗ Π′₁) ρ].
    pub epsilon: f64,
    pub p_i: f64,
    /// Tr[Π′₁ τ].
    pub lhs: f64,
    /// 1 − 3√ε / (2 p_i).
    pub bound: f64,
}

impl SimulprojReport {
    pub fn holds(&self) -> bool {
        self.lhs >= self.bound - TOL
    }
}

/// Checks Tr[Π′₁ τ] ≥ 1 − 3√ε/(2pᵢ) for the collapsed second register τ.
pub fn verify_simulproj(
    rho: &CMatrix,
    dims: (usize, usize),
    pi1: &CMatrix,
    pi1_prime: &CMatrix,
    kraus: &[CMatrix],
    i: usize,
) -> Result<SimulprojReport> {
    let m_i = kraus
        .get(i)
        .ok_or_else(|| Error::Parameter(format!("outcome {i} out of range")))?;
    let joint = kron(pi1, pi1_prime);
    let epsilon = (1.0 - (joint * rho).trace().re).max(0.0);
    let (tau, p_i) = conditional_second_register(rho, dims, m_i)?;
    let lhs = (pi1_prime * tau).trace().re;
    Ok(SimulprojReport {
        epsilon,
        p_i,
        lhs,
        bound: 1.0 - 3.0 * epsilon.sqrt() / (2.0 * p_i),
    })
}

#[derive(Clone, Debug)]
pub struct ImpindepReport {
    /// Largest trace distance between the two conditional states.
    pub max_trace_distance: f64,
    /// Outcomes with nonzero probability that were compared.
    pub compared: usize,
}

/// Compares second-register states conditioned on each outcome when the
/// first register is measured with `m` versus `e`. Requires
/// M_i†M_i = E_i†E_i for every i.
pub fn verify_impindep(
    rho: &CMatrix,
    dims: (usize, usize),
    m: &[CMatrix],
    e: &[CMatrix],
) -> Result<ImpindepReport> {
    check_dim(m.len(), e.len())?;
    for (mi, ei) in m.iter().zip(e) {
        if (mi.adjoint() * mi - ei.adjoint() * ei).camax() > 1e-9 {
            return Err(Error::Parameter("measurements are not POVM-equivalent".into()));
        }
    }
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (mi, ei) in m.iter().zip(e) {
        match (
            conditional_second_register(rho, dims, mi),
            conditional_second_register(rho, dims, ei),
        ) {
            (Ok((a, _)), Ok((b, _))) => {
                worst = worst.max(trace_distance(&a, &b));
                compared += 1;
            }
            (Err(Error::UndefinedConditioning), Err(Error::UndefinedConditioning)) => {}
            (Err(err), _) | (_, Err(err)) => return Err(err),
        }
    }
    Ok(ImpindepReport {
        max_trace_distance: worst,
        compared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::*;
    use crate::stream_rng;

    #[test]
    fn deterministic_measurement_rewinds_exactly() {
        let mut rng = stream_rng(0, 0);
        let psi = random_state(4, &mut rng);
        let rho = &psi * psi.adjoint();
        // U = identity and Π₀ = I ⊗ |0⟩⟨0| accepts the fresh ancilla surely
        let u = CMatrix::identity(8, 8);
        let pi0 = BinaryProjector::computational(8, |i| i % 2 == 0);
        let rep = gentle_measurement(&rho, &u, &pi0, 2).unwrap();
        assert!(rep.epsilon < 1e-12);
        assert!(rep.trace_distance < 1e-9);
    }

    #[test]
    fn gentle_bound_random() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..20 {
            let rho = random_density(4, 1, &mut rng);
            let u = random_unitary(8, &mut rng);
            let pi0 = BinaryProjector::Dense(random_projector(8, 6, &mut rng));
            let rep = gentle_measurement(&rho, &u, &pi0, 2).unwrap();
            assert!(rep.holds(), "{} > {}", rep.trace_distance, rep.bound);
        }
    }

    #[test]
    fn simulproj_product_state() {
        let e0 = CMatrix::from_fn(2, 2, |i, j| c((i == 0 && j == 0) as u8 as f64));
        let rho = kron(&e0, &e0);
        let mut rng = stream_rng(2, 0);
        let ks = random_kraus(2, 2, &mut rng);
        let rep = verify_simulproj(&rho, (2, 2), &e0, &e0, &ks, 0).unwrap();
        assert!(rep.epsilon < 1e-12);
        assert!((rep.bound - 1.0).abs() < 1e-12);
        assert!(rep.holds());
    }

    #[test]
    fn zero_probability_outcome_is_undefined() {
        let e0 = CMatrix::from_fn(2, 2, |i, j| c((i == 0 && j == 0) as u8 as f64));
        let e1 = CMatrix::from_fn(2, 2, |i, j| c((i == 1 && j == 1) as u8 as f64));
        let rho = kron(&e0, &e0);
        let err = verify_simulproj(&rho, (2, 2), &e0, &e0, &[e1, e0.clone()], 0).unwrap_err();
        assert_eq!(err, Error::UndefinedConditioning);
    }

    #[test]
    fn impindep_random() {
        let mut rng = stream_rng(3, 0);
        let rho = random_density(16, 3, &mut rng);
        let m = random_kraus(4, 3, &mut rng);
        let e = povm_equivalent(&m, &mut rng);
        let rep = verify_impindep(&rho, (4, 4), &m, &e).unwrap();
        assert_eq!(rep.compared, 3);
        assert!(rep.max_trace_distance < 1e-9);
    }
}
