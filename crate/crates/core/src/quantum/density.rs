use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{c, CMatrix};

/// A ⊗ B with index `i_a · dim(B) + i_b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Tr_A ρ for ρ on A ⊗ B, keeping B.
pub fn partial_trace_first(rho: &CMatrix, da: usize, db: usize) -> CMatrix {
    assert_eq!(rho.nrows(), da * db, "partial trace dimensions");
    DMatrix::from_fn(db, db, |i, j| (0..da).map(|k| rho[(k * db + i, k * db + j)]).sum())
}

/// Tr_B ρ for ρ on A ⊗ B, keeping A.
pub fn partial_trace_second(rho: &CMatrix, da: usize, db: usize) -> CMatrix {
    assert_eq!(rho.nrows(), da * db, "partial trace dimensions");
    DMatrix::from_fn(da, da, |i, j| (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum())
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (DVector<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(m.nrows(), order.len());
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// ½‖ρ − σ‖₁.
pub fn trace_distance(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(&(rho - sigma));
    0.5 * values.iter().map(|x| x.abs()).sum::<f64>()
}

fn sqrt_psd(m: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let roots = DVector::from_iterator(
        values.len(),
        values.iter().map(|&x| c(if x > 1e-14 { x.sqrt() } else { 0.0 })),
    );
    &vectors * CMatrix::from_diagonal(&roots) * vectors.adjoint()
}

/// Uhlmann fidelity ‖√ρ √σ‖₁².
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let product = sqrt_psd(rho) * sqrt_psd(sigma);
    let nuclear: f64 = product.singular_values().iter().sum();
    nuclear * nuclear
}

/// Unit trace, Hermitian and positive semidefinite, all within `tol`.
pub fn is_density(rho: &CMatrix, tol: f64) -> bool {
    if !rho.is_square() || (rho.trace().re - 1.0).abs() > tol || rho.trace().im.abs() > tol {
        return false;
    }
    if (rho - rho.adjoint()).camax() > tol {
        return false;
    }
    hermitian_eigen(rho).0.iter().all(|&x| x >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::random_density;
    use crate::stream_rng;

    #[test]
    fn partial_traces_of_product() {
        let mut rng = stream_rng(1, 0);
        let a = random_density(2, 2, &mut rng);
        let b = random_density(3, 3, &mut rng);
        let ab = kron(&a, &b);
        assert!((partial_trace_first(&ab, 2, 3) - &b).camax() < 1e-12);
        assert!((partial_trace_second(&ab, 2, 3) - &a).camax() < 1e-12);
    }

    #[test]
    fn trace_distance_and_fidelity_basics() {
        let mut rng = stream_rng(2, 0);
        let r = random_density(4, 2, &mut rng);
        assert!(trace_distance(&r, &r) < 1e-12);
        let f = fidelity(&r, &r);
        assert!((f - 1.0).abs() < 1e-9, "fidelity {f}");
        let (vals, vecs) = hermitian_eigen(&r);
        let recon = &vecs * CMatrix::from_diagonal(&vals.map(c)) * vecs.adjoint();
        assert!((recon - &r).camax() < 1e-10);
        let e0 = CMatrix::from_fn(2, 2, |i, j| c((i == 0 && j == 0) as u8 as f64));
        let e1 = CMatrix::from_fn(2, 2, |i, j| c((i == 1 && j == 1) as u8 as f64));
        assert!((trace_distance(&e0, &e1) - 1.0).abs() < 1e-12);
        assert!(fidelity(&e0, &e1).abs() < 1e-12);
        assert!(is_density(&r, 1e-9));
        assert!(!is_density(&(r * c(2.0)), 1e-9));
    }
}
