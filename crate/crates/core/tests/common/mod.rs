//! Reference computations for the integration tests, written without the
//! library's own Pauli, trace, or Bloch helpers.

#![allow(dead_code)]

use bellswap::linalg::{Op4, C64};
use bellswap::DensityMatrix;
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type M2 = [[C64; 2]; 2];
pub type M4 = [[C64; 4]; 4];

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn outer(u: [C64; 2]) -> M2 {
    [[u[0] * u[0].conj(), u[0] * u[1].conj()], [u[1] * u[0].conj(), u[1] * u[1].conj()]]
}

fn sub(a: M2, b: M2) -> M2 {
    [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]]
}

/// Paulis as differences of polarization projectors: D/A, L/R, H/V.
pub fn pauli_ref(i: usize) -> M2 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (plus, minus) = match i {
        1 => ([c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]),
        2 => ([c(s, 0.0), c(0.0, s)], [c(s, 0.0), c(0.0, -s)]),
        3 => ([c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]),
        _ => panic!("pauli index {i}"),
    };
    sub(outer(plus), outer(minus))
}

pub fn identity2() -> M2 {
    [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]]
}

pub fn kron_ref(a: &M2, b: &M2) -> M4 {
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for (r, row) in out.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = a[r / 2][col / 2] * b[r % 2][col % 2];
        }
    }
    out
}

pub fn expectation(rho: &Op4, op: &M4) -> C64 {
    let mut acc = c(0.0, 0.0);
    for r in 0..4 {
        for k in 0..4 {
            acc += rho[(r, k)] * op[k][r];
        }
    }
    acc
}

pub fn t_ref(rho: &DensityMatrix) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| expectation(rho.entries(), &kron_ref(&pauli_ref(i + 1), &pauli_ref(j + 1))).re)
}

pub fn x_ref(rho: &DensityMatrix) -> [f64; 3] {
    [1, 2, 3].map(|i| expectation(rho.entries(), &kron_ref(&pauli_ref(i), &identity2())).re)
}

pub fn y_ref(rho: &DensityMatrix) -> [f64; 3] {
    [1, 2, 3].map(|i| expectation(rho.entries(), &kron_ref(&identity2(), &pauli_ref(i))).re)
}

/// `T^T T` by explicit sums.
pub fn r_ref(rho: &DensityMatrix) -> Matrix3<f64> {
    let t = t_ref(rho);
    Matrix3::from_fn(|i, j| (0..3).map(|k| t[(k, i)] * t[(k, j)]).sum())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard complex Gaussian by Box-Muller, independent of `rand_distr`.
pub fn gaussian_c<R: Rng>(rng: &mut R) -> C64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let rad = (-2.0 * u1.ln()).sqrt();
    let ang = std::f64::consts::TAU * u2;
    c(rad * ang.cos(), rad * ang.sin()) * std::f64::consts::FRAC_1_SQRT_2
}

/// Ginibre `G G^dag / Tr` with a 4 x `k` Gaussian `G`.
pub fn ginibre_state<R: Rng>(rng: &mut R, k: usize) -> DensityMatrix {
    let g: Vec<[C64; 4]> = (0..k).map(|_| [(); 4].map(|_| gaussian_c(rng))).collect();
    let mut m = Op4::zeros();
    for col in &g {
        for r in 0..4 {
            for s in 0..4 {
                m[(r, s)] += col[r] * col[s].conj();
            }
        }
    }
    let tr: f64 = (0..4).map(|k| m[(k, k)].re).sum();
    DensityMatrix::new(m / c(tr, 0.0)).expect("Ginibre states are valid")
}

pub fn haar_unitary_ref<R: Rng>(rng: &mut R) -> M2 {
    // QR of a Gaussian 2x2 with the phase fix, done by hand
    let a = [gaussian_c(rng), gaussian_c(rng)];
    let norm = (a[0].norm_sqr() + a[1].norm_sqr()).sqrt();
    let q0 = [a[0] / norm, a[1] / norm];
    let q1 = [-q0[1].conj(), q0[0].conj()];
    let phase = C64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>());
    [[q0[0], q1[0] * phase], [q0[1], q1[1] * phase]]
}

pub fn to_op4(m: &M4) -> Op4 {
    Op4::from_fn(|r, c| m[r][c])
}

pub fn matmul4(a: &M4, b: &M4) -> M4 {
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            out[r][col] = (0..4).map(|k| a[r][k] * b[k][col]).sum();
        }
    }
    out
}

pub fn dagger4(a: &M4) -> M4 {
    let mut out = [[c(0.0, 0.0); 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            out[r][col] = a[col][r].conj();
        }
    }
    out
}

/// Random separable state: product state, or a convex mixture of four.
pub fn separable_state<R: Rng>(rng: &mut R) -> DensityMatrix {
    let product = |rng: &mut R| {
        let a = ginibre_qubit(rng);
        let b = ginibre_qubit(rng);
        kron_ref(&a, &b)
    };
    if rng.random::<bool>() {
        DensityMatrix::new(to_op4(&product(rng))).unwrap()
    } else {
        let w: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = w.iter().sum();
        let mut m = Op4::zeros();
        for wk in w {
            m += to_op4(&product(rng)) * c(wk / total, 0.0);
        }
        DensityMatrix::new(m).unwrap()
    }
}

fn ginibre_qubit<R: Rng>(rng: &mut R) -> M2 {
    let g = [[gaussian_c(rng), gaussian_c(rng)], [gaussian_c(rng), gaussian_c(rng)]];
    let mut m = [[c(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for s in 0..2 {
            m[r][s] = (0..2).map(|k| g[r][k] * g[s][k].conj()).sum();
        }
    }
    let tr = m[0][0].re + m[1][1].re;
    m.map(|row| row.map(|v| v / tr))
}

pub fn werner_n(p: f64) -> f64 {
    ((3.0 * p - 1.0) / 2.0).max(0.0)
}

pub fn horodecki_n(p: f64) -> f64 {
    ((1.0 - p).powi(2) + p * p).sqrt() - p
}

pub fn horodecki_e(p: f64) -> f64 {
    (3.0 * p - 1.0) * (p - 1.0)
}

pub fn pure_b(p: f64) -> f64 {
    2.0 * (p * (1.0 - p)).sqrt()
}
