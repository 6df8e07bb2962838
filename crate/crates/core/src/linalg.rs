//! Fixed-size complex matrix aliases and the few dense helpers shared by the
//! state, witness and swap modules.

use nalgebra::{Matrix3, SMatrix, SymmetricEigen, Vector3};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type Op2 = SMatrix<C64, 2, 2>;
pub type Op4 = SMatrix<C64, 4, 4>;
pub type Op16 = SMatrix<C64, 16, 16>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn kron2(a: &Op2, b: &Op2) -> Op4 {
    let mut out = Op4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

pub fn kron4(a: &Op4, b: &Op4) -> Op16 {
    let mut out = Op16::zeros();
    for i in 0..4 {
        for j in 0..4 {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    out[(4 * i + k, 4 * j + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product<const N: usize>(a: &SMatrix<C64, N, N>, b: &SMatrix<C64, N, N>) -> C64 {
    let mut acc = ZERO;
    for i in 0..N {
        for j in 0..N {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvalues (ascending) and matching eigenvectors of a Hermitian 4x4 matrix.
pub fn eigh4(m: &Op4) -> ([f64; 4], Op4) {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.map(|k| eig.eigenvalues[k]);
    let vecs = Op4::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

pub fn eigvals4(m: &Op4) -> [f64; 4] {
    eigh4(m).0
}

/// Spectral decomposition of a real symmetric 3x3 matrix, eigenvalues in
/// descending order with matching eigenvector columns.
pub fn sym3_eigen(m: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = Vector3::from_fn(|i, _| eig.eigenvalues[order[i]]);
    let vecs = Matrix3::from_fn(|r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Frobenius-nearest matrix with spectrum clipped to `[lo, hi]`.
pub fn clip_spectrum(m: &Matrix3<f64>, lo: f64, hi: f64) -> Matrix3<f64> {
    let (vals, vecs) = sym3_eigen(m);
    let clipped = Matrix3::from_diagonal(&vals.map(|v| v.clamp(lo, hi)));
    vecs * clipped * vecs.transpose()
}
