//! Random states, projectors, unitaries and measurements for property tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::density::hermitian_eigen;
use super::{c, Complex, CMatrix, CVector};

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

/// Haar-random pure state.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    let g = ginibre(dim, 1, rng);
    let v = g.column(0).into_owned();
    let n = v.norm();
    v / c(n)
}

/// Random density matrix G·G†/Tr of rank at most `rank`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, rank.max(1), rng);
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

/// Haar-random unitary via QR of a Ginibre matrix with the phases of R fixed.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / c(d.norm()) } else { c(1.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

/// Projector onto a random `rank`-dimensional subspace.
pub fn random_projector<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(dim, rng);
    let v = u.columns(0, rank);
    v * v.adjoint()
}

/// Random general measurement {M_i} with Σ M_i† M_i = I.
pub fn random_kraus<R: Rng + ?Sized>(dim: usize, outcomes: usize, rng: &mut R) -> Vec<CMatrix> {
    let gs: Vec<CMatrix> = (0..outcomes).map(|_| ginibre(dim, dim, rng)).collect();
    let s = gs.iter().fold(CMatrix::zeros(dim, dim), |acc, g| acc + g.adjoint() * g);
    let (values, vectors) = hermitian_eigen(&s);
    let inv_sqrt = nalgebra::DVector::from_iterator(values.len(), values.iter().map(|&x| c(1.0 / x.sqrt())));
    let s_inv_sqrt = &vectors * CMatrix::from_diagonal(&inv_sqrt) * vectors.adjoint();
    gs.into_iter().map(|g| g * &s_inv_sqrt).collect()
}

/// A different implementation of the same POVM: E_i = U_i M_i.
pub fn povm_equivalent<R: Rng + ?Sized>(kraus: &[CMatrix], rng: &mut R) -> Vec<CMatrix> {
    kraus
        .iter()
        .map(|m| random_unitary(m.nrows(), rng) * m)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream_rng;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = stream_rng(0, 0);
        let u = random_unitary(6, &mut rng);
        assert!((u.adjoint() * &u - CMatrix::identity(6, 6)).camax() < 1e-10);
    }

    #[test]
    fn kraus_completeness() {
        let mut rng = stream_rng(1, 0);
        let ks = random_kraus(4, 3, &mut rng);
        let s = ks.iter().fold(CMatrix::zeros(4, 4), |acc, k| acc + k.adjoint() * k);
        assert!((s - CMatrix::identity(4, 4)).camax() < 1e-10);
        let es = povm_equivalent(&ks, &mut rng);
        for (m, e) in ks.iter().zip(&es) {
            assert!((m.adjoint() * m - e.adjoint() * e).camax() < 1e-10);
        }
    }

    #[test]
    fn projector_rank() {
        let mut rng = stream_rng(2, 0);
        let p = random_projector(5, 2, &mut rng);
        assert!((p.trace().re - 2.0).abs() < 1e-10);
        assert!((&p * &p - &p).camax() < 1e-10);
    }
}
