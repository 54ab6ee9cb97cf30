use nalgebra::{DMatrix, DVector};

use super::register::fwht;
use super::{c, CMatrix, CVector, TOL};
use crate::error::{check_dim, Error, Result};

/// Outcome-1 projector of a binary projective measurement.
///
/// Structured variants avoid materialising 2^d × 2^d matrices: membership
/// in a set of basis states, the same in the Hadamard basis, and sums of
/// products of two such partitions. `TwoBasis` is only a projector when
/// the two partitions commute, which holds for the coset partitions used
/// by the protection games; [`BinaryProjector::is_projector`] checks it.
#[derive(Clone, Debug, PartialEq)]
pub enum BinaryProjector {
    /// Diagonal: accepts basis state `i` iff `accept[i]`.
    Computational { accept: Vec<bool> },
    /// H^{⊗d} · diag(accept) · H^{⊗d}.
    Hadamard { accept: Vec<bool> },
    /// Σ_{(i,j) accepted} Q_i · H R_j H, with Q_i the computational class
    /// projectors and R_j the Hadamard class projectors.
    TwoBasis {
        comp_class: Vec<u32>,
        had_class: Vec<u32>,
        accept: Vec<Vec<bool>>,
    },
    Dense(CMatrix),
}

impl BinaryProjector {
    pub fn computational(dim: usize, pred: impl Fn(u64) -> bool) -> Self {
        Self::Computational {
            accept: (0..dim as u64).map(pred).collect(),
        }
    }

    pub fn hadamard(dim: usize, pred: impl Fn(u64) -> bool) -> Self {
        assert!(dim.is_power_of_two(), "Hadamard projectors need a qubit register");
        Self::Hadamard {
            accept: (0..dim as u64).map(pred).collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::Computational {
            accept: vec![true; dim],
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self::Computational {
            accept: vec![false; dim],
        }
    }

    pub fn two_basis(comp_class: Vec<u32>, had_class: Vec<u32>, accept: Vec<Vec<bool>>) -> Result<Self> {
        check_dim(comp_class.len(), had_class.len())?;
        if !comp_class.len().is_power_of_two() {
            return Err(Error::Parameter("two-basis projectors need a qubit register".into()));
        }
        let rows = comp_class.iter().max().map_or(0, |&m| m as usize + 1);
        let cols = had_class.iter().max().map_or(0, |&m| m as usize + 1);
        if accept.len() < rows || accept.iter().any(|r| r.len() < cols) {
            return Err(Error::Parameter("accept table smaller than the class counts".into()));
        }
        Ok(Self::TwoBasis {
            comp_class,
            had_class,
            accept,
        })
    }

    /// Wraps a dense matrix after checking it is a Hermitian idempotent.
    pub fn dense(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let p = Self::Dense(m);
        if !p.is_projector(TOL) {
            return Err(Error::Parameter("matrix is not an orthogonal projector".into()));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Computational { accept } | Self::Hadamard { accept } => accept.len(),
            Self::TwoBasis { comp_class, .. } => comp_class.len(),
            Self::Dense(m) => m.nrows(),
        }
    }

    /// I − P.
    pub fn complement(&self) -> Self {
        match self {
            Self::Computational { accept } => Self::Computational {
                accept: accept.iter().map(|b| !b).collect(),
            },
            Self::Hadamard { accept } => Self::Hadamard {
                accept: accept.iter().map(|b| !b).collect(),
            },
            Self::TwoBasis {
                comp_class,
                had_class,
                accept,
            } => Self::TwoBasis {
                comp_class: comp_class.clone(),
                had_class: had_class.clone(),
                accept: accept.iter().map(|r| r.iter().map(|b| !b).collect()).collect(),
            },
            Self::Dense(m) => Self::Dense(CMatrix::identity(m.nrows(), m.ncols()) - m),
        }
    }

    /// P·v.
    pub fn apply(&self, v: &CVector) -> CVector {
        match self {
            Self::Computational { accept } => {
                DVector::from_fn(v.len(), |i, _| if accept[i] { v[i] } else { c(0.0) })
            }
            Self::Hadamard { accept } => {
                let mut w = v.clone();
                fwht(w.as_mut_slice());
                for (x, &keep) in w.iter_mut().zip(accept) {
                    if !keep {
                        *x = c(0.0);
                    }
                }
                fwht(w.as_mut_slice());
                w
            }
            Self::TwoBasis {
                comp_class,
                had_class,
                accept,
            } => {
                let cols = had_class.iter().max().map_or(0, |&m| m as usize + 1);
                let mut hv = v.clone();
                fwht(hv.as_mut_slice());
                let mut out = DVector::zeros(v.len());
                for j in 0..cols {
                    if !accept.iter().any(|row| row[j]) {
                        continue;
                    }
                    let mut part = hv.clone();
                    for (x, &k) in part.iter_mut().zip(had_class) {
                        if k as usize != j {
                            *x = c(0.0);
                        }
                    }
                    fwht(part.as_mut_slice());
                    for (i, &k) in comp_class.iter().enumerate() {
                        if accept[k as usize][j] {
                            out[i] += part[i];
                        }
                    }
                }
                out
            }
            Self::Dense(m) => m * v,
        }
    }

    /// P·M, column by column.
    pub fn apply_left(&self, m: &CMatrix) -> CMatrix {
        if let Self::Dense(p) = self {
            return p * m;
        }
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for (j, col) in m.column_iter().enumerate() {
            out.set_column(j, &self.apply(&col.into_owned()));
        }
        out
    }

    /// P·ρ·P for Hermitian ρ.
    pub fn sandwich(&self, rho: &CMatrix) -> CMatrix {
        let left = self.apply_left(rho);
        self.apply_left(&left.adjoint()).adjoint()
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Self::Dense(m) => m.clone(),
            _ => self.apply_left(&CMatrix::identity(self.dim(), self.dim())),
        }
    }

    /// Hermitian and idempotent within `tol` (entrywise).
    pub fn is_projector(&self, tol: f64) -> bool {
        let p = self.to_dense();
        let herm = (&p - p.adjoint()).camax() <= tol;
        let idem = (&p * &p - &p).camax() <= tol;
        herm && idem
    }

    /// Rank, i.e. the trace.
    pub fn rank(&self) -> f64 {
        match self {
            Self::Computational { accept } | Self::Hadamard { accept } => {
                accept.iter().filter(|&&b| b).count() as f64
            }
            _ => self.to_dense().trace().re,
        }
    }
}
