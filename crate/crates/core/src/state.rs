//! Two-qubit density matrices in the `|HH>, |HV>, |VH>, |VV>` basis, their
//! Bloch (Hilbert-Schmidt) decomposition, the reference state families and
//! random-state sampling.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::num::NonZeroUsize;

use nalgebra::{Matrix3, SMatrix, Vector3};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigvals4, kron2, max_abs, trace_of_product, Op16, Op2, Op4, C64, ONE, ZERO};

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Basis order used everywhere, including file I/O.
pub const BASIS_LABEL: &str = "HH,HV,VH,VV";

/// Which qubit of the pair an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Pauli matrices in the polarization basis.
///
/// `sigma_1 = |D><D| - |A><A|`, `sigma_2 = |L><L| - |R><R|` and
/// `sigma_3 = |H><H| - |V><V|` with `|D> = (|H>+|V>)/sqrt2`,
/// `|L> = (|H>+i|V>)/sqrt2` and `|H> = (1, 0)`.
pub fn pauli(index: usize) -> Result<Op2> {
    match index {
        1 => Ok(Op2::new(ZERO, ONE, ONE, ZERO)),
        2 => Ok(Op2::new(ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO)),
        3 => Ok(Op2::new(ONE, ZERO, ZERO, -ONE)),
        _ => Err(Error::invalid(format!("Pauli index must be 1, 2 or 3, got {index}"))),
    }
}

pub(crate) fn sigma(index: usize) -> Op2 {
    pauli(index).expect("index in 1..=3")
}

/// `sigma_i (x) sigma_j`, with `i` acting on the first qubit.
pub(crate) fn pauli_pair(i: usize, j: usize) -> Op4 {
    kron2(&sigma(i), &sigma(j))
}

/// A valid two-qubit state: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: Op4,
}

impl DensityMatrix {
    /// Validates `entries` against the state invariants. The stored matrix is
    /// the Hermitian part of the input.
    pub fn new(entries: Op4) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NotAState {
                reason: "non-finite entry".into(),
                eigenvalue: f64::NAN,
            });
        }
        let asym = max_abs(&(entries - entries.adjoint()));
        if asym > HERMITICITY_TOL {
            return Err(Error::NotAState {
                reason: format!("not Hermitian (max |rho - rho^dagger| = {asym:e})"),
                eigenvalue: f64::NAN,
            });
        }
        let herm = (entries + entries.adjoint()) * C64::new(0.5, 0.0);
        let tr = herm.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::NotAState {
                reason: format!("trace is {tr}, expected 1"),
                eigenvalue: f64::NAN,
            });
        }
        let min_eig = eigvals4(&herm)[0];
        if min_eig < -PSD_TOL {
            return Err(Error::NotAState {
                reason: "not positive semidefinite".into(),
                eigenvalue: min_eig,
            });
        }
        Ok(Self { entries: herm })
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn from_pure(psi: [C64; 4]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::invalid("state vector must be nonzero and finite"));
        }
        let scale = 1.0 / norm2.sqrt();
        let v = psi.map(|z| z * scale);
        Ok(Self {
            entries: Op4::from_fn(|r, c| v[r] * v[c].conj()),
        })
    }

    pub fn maximally_mixed() -> Self {
        Self {
            entries: Op4::identity() * C64::new(0.25, 0.0),
        }
    }

    /// `|Psi-> = (|HV> - |VH>)/sqrt2`.
    pub fn singlet() -> Self {
        Self::from_pure(singlet_vector()).expect("normalized")
    }

    pub fn product(a: &Op2, b: &Op2) -> Result<Self> {
        Self::new(kron2(a, b))
    }

    pub fn entries(&self) -> &Op4 {
        &self.entries
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        eigvals4(&self.entries)
    }

    pub fn purity(&self) -> f64 {
        trace_of_product(&self.entries, &self.entries).re
    }

    /// `(U_a (x) U_b) rho (U_a (x) U_b)^dagger`.
    pub fn apply_local_unitaries(&self, ua: &Op2, ub: &Op2) -> Self {
        let u = kron2(ua, ub);
        let rotated = u * self.entries * u.adjoint();
        Self {
            entries: (rotated + rotated.adjoint()) * C64::new(0.5, 0.0),
        }
    }

    /// Convex combination `sum_k w_k rho_k` with nonnegative weights summing to one.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::invalid("empty mixture"));
        }
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("mixture weights must be nonnegative and sum to 1"));
        }
        let mut acc = Op4::zeros();
        for (w, rho) in parts {
            acc += rho.entries * C64::new(*w, 0.0);
        }
        Ok(Self { entries: acc })
    }

    pub fn bloch(&self) -> BlochDecomposition {
        bloch_decompose(self)
    }
}

pub(crate) fn singlet_vector() -> [C64; 4] {
    [
        ZERO,
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(-FRAC_1_SQRT_2, 0.0),
        ZERO,
    ]
}

/// Local Bloch vectors `x`, `y` and correlation matrix `T` of a two-qubit state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochDecomposition {
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub t: Matrix3<f64>,
}

impl BlochDecomposition {
    /// Checks the norm bounds on the Bloch vectors and the singular values of
    /// `T`. Positivity of the composed state is checked by [`bloch_compose`].
    pub fn new(x: Vector3<f64>, y: Vector3<f64>, t: Matrix3<f64>) -> Result<Self> {
        const TOL: f64 = 1e-10;
        if x.norm() > 1.0 + TOL || y.norm() > 1.0 + TOL {
            return Err(Error::invalid("Bloch vectors must have norm at most 1"));
        }
        let smax = t.singular_values().max();
        if smax > 1.0 + TOL {
            return Err(Error::invalid(format!(
                "correlation matrix singular value {smax} exceeds 1"
            )));
        }
        Ok(Self { x, y, t })
    }
}

pub fn bloch_decompose(rho: &DensityMatrix) -> BlochDecomposition {
    let id = Op2::identity();
    let e = rho.entries();
    let mut x = Vector3::zeros();
    let mut y = Vector3::zeros();
    let mut t = Matrix3::zeros();
    for i in 1..=3 {
        x[i - 1] = trace_of_product(e, &kron2(&sigma(i), &id)).re;
        y[i - 1] = trace_of_product(e, &kron2(&id, &sigma(i))).re;
        for j in 1..=3 {
            t[(i - 1, j - 1)] = trace_of_product(e, &pauli_pair(i, j)).re;
        }
    }
    BlochDecomposition { x, y, t }
}

/// Recomposes `rho = (I + x.sigma (x) I + I (x) y.sigma + sum T_ij sigma_i (x) sigma_j) / 4`.
pub fn bloch_compose(d: &BlochDecomposition) -> Result<DensityMatrix> {
    let id = Op2::identity();
    let mut m = Op4::identity();
    for i in 1..=3 {
        m += kron2(&sigma(i), &id) * C64::new(d.x[i - 1], 0.0);
        m += kron2(&id, &sigma(i)) * C64::new(d.y[i - 1], 0.0);
        for j in 1..=3 {
            m += pauli_pair(i, j) * C64::new(d.t[(i - 1, j - 1)], 0.0);
        }
    }
    m *= C64::new(0.25, 0.0);
    let min_eig = eigvals4(&m)[0];
    if min_eig < -PSD_TOL {
        return Err(Error::NotAState {
            reason: "composed matrix is not positive semidefinite".into(),
            eigenvalue: min_eig,
        });
    }
    DensityMatrix::new(m)
}

/// Reduced state of the `keep` qubit.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Op2 {
    let e = rho.entries();
    Op2::from_fn(|r, c| match keep {
        Subsystem::A => e[(2 * r, 2 * c)] + e[(2 * r + 1, 2 * c + 1)],
        Subsystem::B => e[(r, c)] + e[(2 + r, 2 + c)],
    })
}

/// Transpose applied to the tensor factor `which`.
pub fn partial_transpose(rho: &DensityMatrix, which: Subsystem) -> Op4 {
    partial_transpose_op(rho.entries(), which)
}

pub(crate) fn partial_transpose_op(e: &Op4, which: Subsystem) -> Op4 {
    Op4::from_fn(|r, c| {
        let (a, b) = (r / 2, r % 2);
        let (a2, b2) = (c / 2, c % 2);
        match which {
            Subsystem::A => e[(2 * a2 + b, 2 * a + b2)],
            Subsystem::B => e[(2 * a + b2, 2 * a2 + b)],
        }
    })
}

/// One-parameter reference families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StateFamily {
    /// `(1-p)/4 I + p |Psi-><Psi-|`
    Werner(f64),
    /// `p |HH><HH| + (1-p) |Psi-><Psi-|`
    Horodecki(f64),
    /// `(sqrt(p)|HH> + sqrt(1-p)|VV>)(h.c.)`
    Pure(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyKind {
    Werner,
    Horodecki,
    Pure,
}

impl FamilyKind {
    pub fn at(self, p: f64) -> StateFamily {
        match self {
            FamilyKind::Werner => StateFamily::Werner(p),
            FamilyKind::Horodecki => StateFamily::Horodecki(p),
            FamilyKind::Pure => StateFamily::Pure(p),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Werner => "werner",
            FamilyKind::Horodecki => "horodecki",
            FamilyKind::Pure => "pure",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "werner" => Ok(FamilyKind::Werner),
            "horodecki" => Ok(FamilyKind::Horodecki),
            "pure" => Ok(FamilyKind::Pure),
            other => Err(Error::invalid(format!("unknown state family `{other}`"))),
        }
    }
}

impl StateFamily {
    pub fn kind(&self) -> FamilyKind {
        match self {
            StateFamily::Werner(_) => FamilyKind::Werner,
            StateFamily::Horodecki(_) => FamilyKind::Horodecki,
            StateFamily::Pure(_) => FamilyKind::Pure,
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            StateFamily::Werner(p) | StateFamily::Horodecki(p) | StateFamily::Pure(p) => p,
        }
    }
}

impl fmt::Display for StateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:p={}", self.kind().name(), self.parameter())
    }
}

pub fn make_family(family: StateFamily) -> Result<DensityMatrix> {
    let p = family.parameter();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("family parameter p = {p} outside [0, 1]")));
    }
    let singlet = DensityMatrix::singlet();
    let entries = match family {
        StateFamily::Werner(p) => {
            Op4::identity() * C64::new((1.0 - p) / 4.0, 0.0) + singlet.entries * C64::new(p, 0.0)
        }
        StateFamily::Horodecki(p) => {
            let mut hh = Op4::zeros();
            hh[(0, 0)] = ONE;
            hh * C64::new(p, 0.0) + singlet.entries * C64::new(1.0 - p, 0.0)
        }
        StateFamily::Pure(p) => {
            let psi = [
                C64::new(p.sqrt(), 0.0),
                ZERO,
                ZERO,
                C64::new((1.0 - p).sqrt(), 0.0),
            ];
            Op4::from_fn(|r, c| psi[r] * psi[c].conj())
        }
    };
    Ok(DensityMatrix { entries })
}

/// Distribution used for random two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RandomStateMeasure {
    HaarPure,
    /// Ginibre `G G^dagger / Tr(G G^dagger)` with a square 4x4 `G`.
    HilbertSchmidt,
    /// As `HilbertSchmidt` with a 4 x K matrix `G`.
    Induced(NonZeroUsize),
}

impl RandomStateMeasure {
    pub fn induced(ancilla: usize) -> Result<Self> {
        NonZeroUsize::new(ancilla)
            .map(RandomStateMeasure::Induced)
            .ok_or_else(|| Error::invalid("ancilla dimension K must be at least 1"))
    }
}

impl fmt::Display for RandomStateMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RandomStateMeasure::HaarPure => f.write_str("haar-pure"),
            RandomStateMeasure::HilbertSchmidt => f.write_str("hilbert-schmidt"),
            RandomStateMeasure::Induced(k) => write!(f, "induced:{k}"),
        }
    }
}

impl std::str::FromStr for RandomStateMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "haar-pure" | "haar" => Ok(RandomStateMeasure::HaarPure),
            "hilbert-schmidt" | "hs" => Ok(RandomStateMeasure::HilbertSchmidt),
            _ => match s.strip_prefix("induced:") {
                Some(k) => {
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad ancilla dimension in `{s}`")))?;
                    RandomStateMeasure::induced(k)
                }
                None => Err(Error::invalid(format!("unknown random-state measure `{s}`"))),
            },
        }
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state<R: Rng + ?Sized>(measure: RandomStateMeasure, rng: &mut R) -> DensityMatrix {
    match measure {
        RandomStateMeasure::HaarPure => {
            let psi = [(); 4].map(|_| complex_gaussian(rng));
            DensityMatrix::from_pure(psi).expect("gaussian vector is nonzero almost surely")
        }
        RandomStateMeasure::HilbertSchmidt => ginibre_state(4, rng),
        RandomStateMeasure::Induced(k) => ginibre_state(k.get(), rng),
    }
}

fn ginibre_state<R: Rng + ?Sized>(cols: usize, rng: &mut R) -> DensityMatrix {
    let mut acc = Op4::zeros();
    for _ in 0..cols {
        let g = [(); 4].map(|_| complex_gaussian(rng));
        for r in 0..4 {
            for c in 0..4 {
                acc[(r, c)] += g[r] * g[c].conj();
            }
        }
    }
    let tr = acc.trace().re;
    DensityMatrix {
        entries: acc / C64::new(tr, 0.0),
    }
}

/// Haar-random single-qubit unitary.
pub fn haar_unitary2<R: Rng + ?Sized>(rng: &mut R) -> Op2 {
    let q = [(); 4].map(|_| rng.sample::<f64, _>(StandardNormal));
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|v| v / n);
    Op2::new(
        C64::new(a, b),
        C64::new(c, d),
        C64::new(-c, d),
        C64::new(a, -b),
    )
}

/// Random pure single-qubit state, as a 2x2 projector.
pub fn random_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> Op2 {
    let v = [complex_gaussian(rng), complex_gaussian(rng)];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = v.map(|z| z / n);
    Op2::from_fn(|r, c| v[r] * v[c].conj())
}

/// Random mixed single-qubit state from the 2x2 Ginibre ensemble.
pub fn random_qubit_mixed<R: Rng + ?Sized>(rng: &mut R) -> Op2 {
    let g = Op2::from_fn(|_, _| complex_gaussian(rng));
    let m = g * g.adjoint();
    m / m.trace()
}

/// Validates that `perm` is a bijection on the four qubit slots.
fn check_permutation(perm: &[usize; 4]) -> Result<()> {
    let mut seen = [false; 4];
    for &p in perm {
        if p >= 4 || seen[p] {
            return Err(Error::invalid(format!("{perm:?} is not a permutation of 0..4")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Moves qubit slot `k` of a four-qubit operator to slot `perm[k]`. Slot 0 is
/// the most significant bit of the basis index.
pub fn permute_qubits(m: &Op16, perm: &[usize; 4]) -> Result<Op16> {
    check_permutation(perm)?;
    let map = |idx: usize| -> usize {
        let mut out = 0;
        for (k, &target) in perm.iter().enumerate() {
            let bit = (idx >> (3 - k)) & 1;
            out |= bit << (3 - target);
        }
        out
    };
    let index: [usize; 16] = std::array::from_fn(map);
    let mut out = SMatrix::<C64, 16, 16>::zeros();
    for i in 0..16 {
        for j in 0..16 {
            out[(index[i], index[j])] = m[(i, j)];
        }
    }
    Ok(out)
}

/// `rho1 (x) rho2` (qubit order `a1, b1, a2, b2`) with qubit slots permuted.
pub fn tensor_and_permute(
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    perm: &[usize; 4],
) -> Result<Op16> {
    check_permutation(perm)?;
    permute_qubits(&crate::linalg::kron4(rho1.entries(), rho2.entries()), perm)
}
