//! Bell nonlocality and entanglement witnesses of a two-qubit state.
//!
//! Everything except the entropic witness, negativity and concurrence is a
//! function of the spectrum of `R = T^T T` alone, which is what makes them
//! measurable without tomography.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh4, eigvals4, kron2, sym3_eigen, trace_of_product, Op2, Op4, C64, ZERO};
use crate::optimize::{self, Settings};
use crate::state::{partial_trace, partial_transpose, pauli, DensityMatrix, Subsystem};

/// Real symmetric `R = T^T T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrix {
    entries: Matrix3<f64>,
    /// Eigenvalues, descending.
    spectrum: [f64; 3],
    /// Square roots of the (clamped) eigenvalues, descending.
    sqrt_spectrum: [f64; 3],
}

pub const SYMMETRY_TOL: f64 = 1e-12;

impl RMatrix {
    /// `R = T^T T`. The spectrum is taken from the singular values of `T`, which
    /// keeps `sqrt(eig R)` accurate near zero eigenvalues.
    pub fn from_correlation(t: &Matrix3<f64>) -> Self {
        let mut s: Vec<f64> = t.singular_values().iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        let entries = t.transpose() * t;
        let entries = (entries + entries.transpose()) * 0.5;
        Self {
            entries,
            spectrum: [s[0] * s[0], s[1] * s[1], s[2] * s[2]],
            sqrt_spectrum: [s[0], s[1], s[2]],
        }
    }

    /// Bare symmetric matrix, e.g. a reconstructed or measured `R`. The matrix
    /// does not need to be physical; negative eigenvalues are clamped to zero
    /// before taking square roots.
    pub fn new(entries: Matrix3<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("R matrix has non-finite entries"));
        }
        let asym = (entries - entries.transpose()).abs().max();
        if asym > SYMMETRY_TOL {
            return Err(Error::invalid(format!("R matrix is not symmetric (max |R - R^T| = {asym:e})")));
        }
        let (vals, _) = sym3_eigen(&entries);
        let spectrum = [vals[0], vals[1], vals[2]];
        Ok(Self {
            entries,
            spectrum,
            sqrt_spectrum: spectrum.map(|v| v.max(0.0).sqrt()),
        })
    }

    /// From the six independent entries `R_ij`, `i >= j`, ordered
    /// `(1,1), (2,1), (2,2), (3,1), (3,2), (3,3)`.
    pub fn from_lower(values: [f64; 6]) -> Result<Self> {
        let [r11, r21, r22, r31, r32, r33] = values;
        Self::new(Matrix3::new(r11, r21, r31, r21, r22, r32, r31, r32, r33))
    }

    pub fn entries(&self) -> &Matrix3<f64> {
        &self.entries
    }

    /// Eigenvalues in descending order.
    pub fn spectrum(&self) -> [f64; 3] {
        self.spectrum
    }

    pub fn trace(&self) -> f64 {
        self.spectrum.iter().sum()
    }

    /// Whether every eigenvalue lies in `[-tol, 1 + tol]`.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.spectrum.iter().all(|&r| r >= -tol && r <= 1.0 + tol)
    }
}

pub fn r_matrix(t: &Matrix3<f64>) -> RMatrix {
    RMatrix::from_correlation(t)
}

/// `R` of a state, from its correlation matrix.
pub fn r_of_state(rho: &DensityMatrix) -> RMatrix {
    RMatrix::from_correlation(&rho.bloch().t)
}

/// `g = Tr R - min eig R`.
fn chsh_g(r: &RMatrix) -> f64 {
    r.spectrum[0] + r.spectrum[1]
}

/// Horodecki nonlocality measure `M = Tr R - min eig R - 1`; positive iff
/// some CHSH setting is violated.
pub fn bell_m(r: &RMatrix) -> f64 {
    chsh_g(r) - 1.0
}

/// `B = sqrt(max(M, 0))`.
pub fn bell_b(m: f64) -> f64 {
    m.max(0.0).sqrt()
}

/// Largest CHSH value over all measurement settings, `2 sqrt(g)`.
pub fn chsh_max(r: &RMatrix) -> f64 {
    2.0 * chsh_g(r).max(0.0).sqrt()
}

/// Rescaled fully-entangled fraction `F = (Tr sqrt(R) - 1) / 2`.
pub fn fef_f(r: &RMatrix) -> f64 {
    0.5 * (r.sqrt_spectrum.iter().sum::<f64>() - 1.0)
}

/// Equal-purity form of the entropic witness, `(Tr R - 1) / 2`. Exact only when
/// both marginals have the same purity; used when only `R` is available.
pub fn entropic_e_equal_purity(r: &RMatrix) -> f64 {
    0.5 * (r.trace() - 1.0)
}

/// `E = 2 (Tr rho^2 - min(Tr rho_a^2, Tr rho_b^2))`.
pub fn entropic_e(rho: &DensityMatrix) -> f64 {
    let pa = purity2(&partial_trace(rho, Subsystem::A));
    let pb = purity2(&partial_trace(rho, Subsystem::B));
    2.0 * (rho.purity() - pa.min(pb))
}

fn purity2(m: &Op2) -> f64 {
    trace_of_product(m, m).re
}

/// Negativity normalized to one for the singlet: `2 max(0, -min eig rho^{T_b})`.
pub fn negativity(rho: &DensityMatrix) -> f64 {
    let min = eigvals4(&partial_transpose(rho, Subsystem::B))[0];
    2.0 * (-min).max(0.0)
}

/// Wootters concurrence.
///
/// With `rho = A A^dagger`, the square roots of the eigenvalues of
/// `rho (sigma_2 x sigma_2) rho^* (sigma_2 x sigma_2)` are the singular
/// values of `A^T (sigma_2 x sigma_2) A`. Going through singular values avoids
/// square roots of tiny eigenvalue residues.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let (vals, vecs) = eigh4(rho.entries());
    let a = Op4::from_fn(|r, c| vecs[(r, c)] * vals[c].max(0.0).sqrt());
    let s2 = pauli(2).expect("valid index");
    let flip = kron2(&s2, &s2);
    let tau = a.transpose() * flip * a;
    let mut s: Vec<f64> = SVD::new(tau, false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

const ORACLE_RESTARTS: usize = 16;
const ORACLE_TOL: f64 = 1e-9;

fn su2_euler(alpha: f64, beta: f64, gamma: f64) -> Op2 {
    let rz = |t: f64| Op2::new(C64::from_polar(1.0, -t / 2.0), ZERO, ZERO, C64::from_polar(1.0, t / 2.0));
    let (s, c) = (beta / 2.0).sin_cos();
    let ry = Op2::new(C64::new(c, 0.0), C64::new(-s, 0.0), C64::new(s, 0.0), C64::new(c, 0.0));
    rz(alpha) * ry * rz(gamma)
}

/// Overlap `<e| rho |e>` with `|e> = (U (x) I)|Phi+>`.
fn overlap_with_rotated_bell(rho: &Op4, u: &Op2) -> f64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phi_plus = [C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)];
    let op = kron2(u, &Op2::identity());
    let e: Vec<C64> = (0..4).map(|r| (0..4).map(|c| op[(r, c)] * phi_plus[c]).sum()).collect();
    let mut acc = ZERO;
    for r in 0..4 {
        for c in 0..4 {
            acc += e[r].conj() * rho[(r, c)] * e[c];
        }
    }
    acc.re
}

/// Brute-force fully-entangled fraction: maximizes `<e|rho|e>` over every
/// maximally entangled `|e> = (U (x) I)|Phi+>` by multi-start local search over
/// the three Euler angles of `U`, and returns `2 f - 1`.
pub fn fef_oracle(rho: &DensityMatrix) -> Result<f64> {
    let entries = *rho.entries();
    let settings = Settings {
        initial_step: 0.4,
        f_tol: 1e-13,
        x_tol: 1e-9,
        max_evaluations: 20_000,
    };
    let mut best: Option<(f64, bool)> = None;
    for k in 0..ORACLE_RESTARTS {
        let alpha = if k & 1 == 0 { 0.0 } else { PI };
        let beta = if k & 2 == 0 { PI / 4.0 } else { 3.0 * PI / 4.0 };
        let gamma = (k >> 2) as f64 * PI / 2.0;
        let run = optimize::minimize(
            |x| -overlap_with_rotated_bell(&entries, &su2_euler(x[0], x[1], x[2])),
            &[alpha, beta, gamma],
            &settings,
        );
        let value = -run.value;
        best = match best {
            Some((b, conv)) if b >= value => Some((b, conv || run.converged)),
            Some((_, conv)) => Some((value, conv || run.converged)),
            None => Some((value, run.converged)),
        };
    }
    let (f, any_converged) = best.expect("at least one restart");
    if !any_converged {
        return Err(Error::OptimizerDiagnostic {
            message: format!("fully-entangled fraction search: no restart met tolerance {ORACLE_TOL:e}"),
            best_value: 2.0 * f - 1.0,
        });
    }
    Ok(2.0 * f - 1.0)
}

/// All witnesses and measures of one state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub m: f64,
    pub b: f64,
    pub chsh_max: f64,
    pub f: f64,
    pub e: f64,
    pub n: f64,
    pub c: f64,
    /// Eigenvalues of `R`, descending.
    pub eigs: [f64; 3],
    /// Brute-force FEF, present only when requested and the search converged.
    pub f_oracle: Option<f64>,
}

pub fn report(rho: &DensityMatrix) -> WitnessReport {
    let r = r_of_state(rho);
    let m = bell_m(&r);
    WitnessReport {
        m,
        b: bell_b(m),
        chsh_max: chsh_max(&r),
        f: fef_f(&r),
        e: entropic_e(rho),
        n: negativity(rho),
        c: concurrence(rho),
        eigs: r.spectrum(),
        f_oracle: None,
    }
}

pub fn report_with_oracle(rho: &DensityMatrix) -> WitnessReport {
    WitnessReport {
        f_oracle: fef_oracle(rho).ok(),
        ..report(rho)
    }
}

/// Witnesses available from `R` alone. `E` uses the equal-purity form and
/// negativity and concurrence are not defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RWitnesses {
    pub m: f64,
    pub b: f64,
    pub chsh_max: f64,
    pub f: f64,
    pub e_equal_purity: f64,
    pub eigs: [f64; 3],
}

pub fn witnesses_from_r(r: &RMatrix) -> RWitnesses {
    let m = bell_m(r);
    RWitnesses {
        m,
        b: bell_b(m),
        chsh_max: chsh_max(r),
        f: fef_f(r),
        e_equal_purity: entropic_e_equal_purity(r),
        eigs: r.spectrum(),
    }
}
