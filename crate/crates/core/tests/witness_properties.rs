mod common;

use bellswap::linalg::{Op4, C64};
use bellswap::state::{partial_trace, random_state, Subsystem};
use bellswap::witness::{
    bell_b, bell_m, chsh_max, concurrence, entropic_e, entropic_e_equal_purity, fef_f, fef_oracle, negativity,
    r_of_state, report, witnesses_from_r,
};
use bellswap::{make_family, DensityMatrix, FamilyKind, RMatrix, RandomStateMeasure, StateFamily};
use common::*;
use nalgebra::{Matrix2, SymmetricEigen};

fn hs(seed: u64) -> DensityMatrix {
    random_state(RandomStateMeasure::HilbertSchmidt, &mut rng(seed))
}

fn grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| k as f64 / (n - 1) as f64)
}

/// Wootters concurrence from the Hermitian form `sqrt(rho) rho~ sqrt(rho)`.
fn concurrence_ref(rho: &DensityMatrix) -> f64 {
    let yy = to_op4(&kron_ref(&pauli_ref(2), &pauli_ref(2)));
    let m = *rho.entries();
    let tilde = yy * m.conjugate() * yy;
    let eig = SymmetricEigen::new(m);
    let sqrt = eig.eigenvectors
        * Op4::from_diagonal(&eig.eigenvalues.map(|v| C64::new(v.max(0.0).sqrt(), 0.0)))
        * eig.eigenvectors.adjoint();
    let h = sqrt * tilde * sqrt;
    let h = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let mut l: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn spectrum_ref(rho: &DensityMatrix) -> [f64; 3] {
    let mut v: Vec<f64> = SymmetricEigen::new(r_ref(rho)).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    [v[0], v[1], v[2]]
}

#[test]
fn table_one_theory_values() {
    let cases = [
        (DensityMatrix::singlet(), [1.0, 1.0, 1.0]),
        (make_family(StateFamily::Pure(0.0)).unwrap(), [0.0, 0.0, 0.0]),
        (DensityMatrix::maximally_mixed(), [-1.0, -0.5, -0.5]),
    ];
    for (rho, [m, e, f]) in cases {
        let w = report(&rho);
        assert!((w.m - m).abs() <= 1e-10 && (w.e - e).abs() <= 1e-10 && (w.f - f).abs() <= 1e-10, "{w:?}");
    }
}

#[test]
fn witnesses_from_r_match_reference_spectrum() {
    for seed in 0..300 {
        let rho = hs(seed);
        let r = spectrum_ref(&rho);
        let w = report(&rho);
        for k in 0..3 {
            assert!((w.eigs[k] - r[k]).abs() < 1e-12);
        }
        assert!((w.m - (r[0] + r[1] - 1.0)).abs() < 1e-12);
        let f = 0.5 * (r.iter().map(|v| v.max(0.0).sqrt()).sum::<f64>() - 1.0);
        assert!((w.f - f).abs() < 1e-7, "F {} vs {}", w.f, f);
        assert!((w.chsh_max - 2.0 * (w.m + 1.0).sqrt()).abs() < 1e-12);
        assert!((w.b - w.m.max(0.0).sqrt()).abs() < 1e-12);
    }
}

#[test]
fn local_unitary_invariance_on_500_states() {
    let mut worst: f64 = 0.0;
    let mut r = rng(31);
    for _ in 0..500 {
        let rho = ginibre_state(&mut r, 4);
        let (ua, ub) = (haar_unitary_ref(&mut r), haar_unitary_ref(&mut r));
        let ua = Matrix2::from_fn(|i, j| ua[i][j]);
        let ub = Matrix2::from_fn(|i, j| ub[i][j]);
        let moved = rho.apply_local_unitaries(&ua, &ub);
        let (a, b) = (report(&rho), report(&moved));
        for (x, y) in [(a.m, b.m), (a.b, b.b), (a.f, b.f), (a.e, b.e), (a.n, b.n), (a.c, b.c)] {
            worst = worst.max((x - y).abs());
        }
    }
    assert!(worst <= 1e-10, "largest drift {worst}");
}

#[test]
fn bell_violation_implies_positive_fef() {
    for measure in [RandomStateMeasure::HilbertSchmidt, RandomStateMeasure::HaarPure] {
        for seed in 0..5000 {
            let w = report(&random_state(measure, &mut rng(seed)));
            assert!(!(w.m > 0.0) || w.f > 0.0, "M={} F={}", w.m, w.f);
        }
    }
}

#[test]
fn separable_states_are_never_detected() {
    let mut r = rng(99);
    for _ in 0..10_000 {
        let rho = separable_state(&mut r);
        let w = report(&rho);
        assert!(w.m <= 1e-9 && w.e <= 1e-9 && w.f <= 1e-9 && w.n <= 1e-9, "{w:?}");
    }
}

#[test]
fn entropic_identity_with_marginal_purities() {
    // E = (Tr R - 1) / 2 + |Tr rho_a^2 - Tr rho_b^2|
    for seed in 0..500 {
        let rho = hs(seed);
        let pa = purity2(&partial_trace(&rho, Subsystem::A));
        let pb = purity2(&partial_trace(&rho, Subsystem::B));
        let r = r_of_state(&rho);
        let expected = 0.5 * (r.trace() - 1.0) + (pa - pb).abs();
        assert!((entropic_e(&rho) - expected).abs() < 1e-12);
    }
}

fn purity2(m: &Matrix2<C64>) -> f64 {
    (m * m).trace().re
}

#[test]
fn entropic_witness_reduces_at_equal_purities() {
    // Werner, Horodecki-like and locally rotated Bell-diagonal states all have
    // equal marginal purities.
    let mut r = rng(5);
    for k in 0..200 {
        let base = match k % 3 {
            0 => make_family(StateFamily::Werner(k as f64 / 200.0)).unwrap(),
            1 => make_family(StateFamily::Pure(k as f64 / 200.0)).unwrap(),
            _ => {
                let w: Vec<f64> = (0..4).map(|_| r.random_range(0.0..1.0)).collect();
                let total: f64 = w.iter().sum();
                bell_diagonal([w[0] / total, w[1] / total, w[2] / total, w[3] / total])
            }
        };
        let (ua, ub) = (haar_unitary_ref(&mut r), haar_unitary_ref(&mut r));
        let rho = base.apply_local_unitaries(&Matrix2::from_fn(|i, j| ua[i][j]), &Matrix2::from_fn(|i, j| ub[i][j]));
        let pa = purity2(&partial_trace(&rho, Subsystem::A));
        let pb = purity2(&partial_trace(&rho, Subsystem::B));
        assert!((pa - pb).abs() < 1e-12);
        assert!((entropic_e(&rho) - entropic_e_equal_purity(&r_of_state(&rho))).abs() <= 1e-10);
    }
}

use rand::Rng;

fn bell_diagonal(w: [f64; 4]) -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    let v = |a: f64, b: f64, c: f64, d: f64| [C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0)];
    let bells = [v(s, 0.0, 0.0, s), v(s, 0.0, 0.0, -s), v(0.0, s, s, 0.0), v(0.0, s, -s, 0.0)];
    let mut m = Op4::from_element(z);
    for (wk, b) in w.iter().zip(bells) {
        m += Op4::from_fn(|r, c| b[r] * b[c].conj()) * C64::new(*wk, 0.0);
    }
    DensityMatrix::new(m).unwrap()
}

#[test]
fn pure_states_have_coinciding_measures() {
    for p in grid(101) {
        let rho = make_family(StateFamily::Pure(p)).unwrap();
        let w = report(&rho);
        assert!((w.n - w.c).abs() <= 1e-10 && (w.b - w.n).abs() <= 1e-10, "p={p} {w:?}");
        assert!((w.n - pure_b(p)).abs() < 1e-10);
    }
}

#[test]
fn random_pure_states_have_coinciding_measures() {
    for seed in 0..300 {
        let w = report(&random_state(RandomStateMeasure::HaarPure, &mut rng(seed)));
        assert!((w.n - w.c).abs() <= 1e-10 && (w.b - w.n).abs() <= 1e-10, "{w:?}");
    }
}

#[test]
fn concurrence_matches_hermitian_wootters_form() {
    for seed in 0..300 {
        let rho = hs(seed);
        assert!((concurrence(&rho) - concurrence_ref(&rho)).abs() < 1e-7);
    }
}

#[test]
fn family_negativity_closed_forms() {
    for p in grid(101) {
        let w = negativity(&make_family(StateFamily::Werner(p)).unwrap());
        let h = negativity(&make_family(StateFamily::Horodecki(p)).unwrap());
        assert!((w - werner_n(p)).abs() < 1e-12);
        assert!((h - horodecki_n(p)).abs() < 1e-12);
        let e = entropic_e(&make_family(StateFamily::Horodecki(p)).unwrap());
        assert!((e - horodecki_e(p)).abs() < 1e-12);
    }
    let h = negativity(&make_family(StateFamily::Horodecki(0.5)).unwrap());
    assert!((h - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
}

#[test]
fn chsh_bounds_on_random_states() {
    for seed in 0..2000 {
        let r = r_of_state(&hs(seed));
        let c = chsh_max(&r);
        assert!((0.0..=2.0 * 2f64.sqrt() + 1e-10).contains(&c));
    }
    assert!((chsh_max(&r_of_state(&DensityMatrix::singlet())) - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    assert!((chsh_max(&r_of_state(&make_family(StateFamily::Pure(0.0)).unwrap())) - 2.0).abs() < 1e-12);
}

#[test]
fn werner_thresholds_from_exact_formulas() {
    let at = |p: f64| {
        let rho = make_family(StateFamily::Werner(p)).unwrap();
        let r = r_of_state(&rho);
        (bell_m(&r), entropic_e(&rho), fef_f(&r))
    };
    assert!(at(1.0 / 2f64.sqrt()).0.abs() < 1e-12);
    assert!(at(1.0 / 3f64.sqrt()).1.abs() < 1e-12);
    assert!(at(1.0 / 3.0).2.abs() < 1e-12);
    assert_eq!(bell_b(-0.5), 0.0);
    assert_eq!(bell_b(1.0), 1.0);
}

#[test]
fn bare_r_witnesses() {
    let w = witnesses_from_r(&RMatrix::new(nalgebra::Matrix3::identity()).unwrap());
    assert_eq!((w.m, w.f, w.e_equal_purity), (1.0, 1.0, 1.0));
    assert!(RMatrix::new(nalgebra::Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0)).is_err());
}

#[test]
fn fef_oracle_examples() {
    assert!((fef_oracle(&DensityMatrix::singlet()).unwrap() - 1.0).abs() < 1e-9);
    assert!(fef_oracle(&make_family(StateFamily::Pure(0.0)).unwrap()).unwrap().abs() < 1e-9);
    for p in [0.0, 0.2, 0.5, 0.9] {
        let f = fef_oracle(&make_family(StateFamily::Werner(p)).unwrap()).unwrap();
        assert!((f - (3.0 * p - 1.0) / 2.0).abs() < 1e-9);
    }
}

fn fef_gap(kind: FamilyKind, p: f64) -> f64 {
    let rho = make_family(kind.at(p)).unwrap();
    (fef_f(&r_of_state(&rho)) - fef_oracle(&rho).unwrap()).abs()
}

#[test]
fn fef_matches_oracle_on_werner_grid() {
    for p in grid(51) {
        assert!(fef_gap(FamilyKind::Werner, p) <= 1e-6, "p={p}");
    }
}

#[test]
fn fef_matches_oracle_on_horodecki_grid_below_one_half() {
    for p in grid(51).filter(|&p| p <= 0.5) {
        assert!(fef_gap(FamilyKind::Horodecki, p) <= 1e-6, "p={p}");
    }
}

/// Above p = 1/2 the correlation matrix has det T > 0 and the trace-of-root
/// formula overestimates the overlap maximum: F = 0 while the oracle gives
/// 1 - 2p.
#[test]
fn fef_matches_oracle_on_horodecki_grid_above_one_half() {
    let mut failures = Vec::new();
    for p in grid(51).filter(|&p| p > 0.5) {
        let gap = fef_gap(FamilyKind::Horodecki, p);
        if gap > 1e-6 {
            failures.push((p, gap));
        }
    }
    assert!(failures.is_empty(), "formula and oracle disagree at (p, gap) = {failures:?}");
}
