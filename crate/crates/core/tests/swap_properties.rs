mod common;

use bellswap::linalg::{max_abs, Op4, C64};
use bellswap::state::random_state;
use bellswap::swap::{
    bob_projectors, collective_r_exact, joint_outcome_distribution, r_element_estimate, AlicePovm, InterferenceMode,
    OUTCOME_SIGNS,
};
use bellswap::{estimate_r, make_family, simulate_counts, DensityMatrix, Error, MeasurementSetting, RandomStateMeasure, StateFamily};
use common::*;
use nalgebra::Matrix3;

fn hs(seed: u64) -> DensityMatrix {
    random_state(RandomStateMeasure::HilbertSchmidt, &mut rng(seed))
}

fn exact_estimate(rho: &DensityMatrix, s: MeasurementSetting, r: f64) -> f64 {
    let on = joint_outcome_distribution(rho, s, &AlicePovm::new(r, InterferenceMode::On).unwrap());
    let off = joint_outcome_distribution(rho, s, &AlicePovm::new(r, InterferenceMode::Off).unwrap());
    r_element_estimate(&on.click, &off.click, r)
}

fn entry(m: &Matrix3<f64>, s: MeasurementSetting) -> f64 {
    m[(s.i() - 1, s.j() - 1)]
}

#[test]
fn collective_identity_on_1000_states() {
    let mut worst: f64 = 0.0;
    for seed in 0..1000 {
        let rho = hs(seed);
        let r = r_ref(&rho);
        for s in MeasurementSetting::ALL {
            worst = worst.max((collective_r_exact(&rho, &rho, s) - entry(&r, s)).abs());
        }
    }
    assert!(worst <= 1e-10, "largest deviation {worst}");
}

#[test]
fn collective_identity_examples() {
    let s33 = MeasurementSetting::new(3, 3).unwrap();
    let s11 = MeasurementSetting::new(1, 1).unwrap();
    let singlet = DensityMatrix::singlet();
    assert!((collective_r_exact(&singlet, &singlet, s33) - 1.0).abs() < 1e-14);
    let mixed = DensityMatrix::maximally_mixed();
    for s in MeasurementSetting::ALL {
        assert!(collective_r_exact(&mixed, &mixed, s).abs() < 1e-15);
    }
    let vv = make_family(StateFamily::Pure(0.0)).unwrap();
    assert!((collective_r_exact(&vv, &vv, s33) - 1.0).abs() < 1e-14);
    assert!(collective_r_exact(&vv, &vv, s11).abs() < 1e-14);
}

#[test]
fn estimator_is_exact_on_exact_distributions() {
    for seed in 0..100 {
        let rho = hs(seed);
        let reference = r_ref(&rho);
        for k in 0..=99 {
            let r = k as f64 / 100.0;
            for s in MeasurementSetting::ALL {
                let est = exact_estimate(&rho, s, r);
                assert!((est - entry(&reference, s)).abs() < 1e-10, "r={r} s={s:?}: {est}");
            }
        }
    }
}

#[test]
fn outcome_distribution_examples() {
    let mixed = DensityMatrix::maximally_mixed();
    for s in MeasurementSetting::ALL {
        let d = joint_outcome_distribution(&mixed, s, &AlicePovm::new(0.0, InterferenceMode::On).unwrap());
        for q in d.click {
            assert!((q - 1.0 / 16.0).abs() < 1e-15);
        }
        let singlet = DensityMatrix::singlet();
        let off = joint_outcome_distribution(&singlet, s, &AlicePovm::new(0.3, InterferenceMode::Off).unwrap());
        assert!((off.click.iter().sum::<f64>() - 0.5).abs() < 1e-14);
        for b in 0..4 {
            assert!((off.no_click[b] - off.click[b]).abs() < 1e-14);
        }
    }
}

#[test]
fn eigenvalue_bookkeeping() {
    assert_eq!(OUTCOME_SIGNS.iter().sum::<f64>(), 0.0);
    for s in MeasurementSetting::ALL {
        let pis = bob_projectors(s);
        let total: Op4 = pis.iter().sum();
        assert!(max_abs(&(total - Op4::identity())) < 1e-14);
        let obs = to_op4(&kron_ref(&pauli_ref(s.i()), &pauli_ref(s.j())));
        let spectral: Op4 = pis.iter().zip(OUTCOME_SIGNS).map(|(p, l)| p * C64::new(l, 0.0)).sum();
        assert!(max_abs(&(spectral - obs)) < 1e-14);
    }
}

#[test]
fn simulation_is_deterministic_and_validated() {
    let rho = make_family(StateFamily::Werner(0.6)).unwrap();
    let a = simulate_counts(&rho, 0.2, 5000, 11).unwrap();
    let b = simulate_counts(&rho, 0.2, 5000, 11).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate_counts(&rho, 0.2, 5000, 12).unwrap());
    assert!(matches!(simulate_counts(&rho, 0.2, 0, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(simulate_counts(&rho, 1.5, 10, 1), Err(Error::InvalidArgument(_))));
    assert!(matches!(estimate_r(&a, 1.0), Err(Error::DegenerateCalibration)));
}

#[test]
fn empty_runs_are_insufficient_data() {
    let table = bellswap::CoincidenceTable::new(0.1, None).unwrap();
    assert!(matches!(estimate_r(&table, 0.1), Err(Error::InsufficientData(_))));
}

#[test]
fn singlet_click_frequency_within_binomial_error() {
    let s = MeasurementSetting::new(3, 3).unwrap();
    let singlet = DensityMatrix::singlet();
    let shots = 1_000_000u64;
    let table = simulate_counts(&singlet, 0.0, shots, 3).unwrap();
    let exact = joint_outcome_distribution(&singlet, s, &AlicePovm::new(0.0, InterferenceMode::On).unwrap());
    // b = 2 is the (+,-) outcome, |HV> on Bob's qubits
    let p = exact.click[1];
    let freq = table.get(s, InterferenceMode::On).counts[1] as f64 / shots as f64;
    let sd = (p * (1.0 - p) / shots as f64).sqrt();
    assert!(p > 0.1);
    assert!((freq - p).abs() <= 5.0 * sd, "freq {freq} exact {p} sd {sd}");
}

#[test]
fn singlet_and_mixed_estimates_within_five_sigma() {
    let singlet = simulate_counts(&DensityMatrix::singlet(), 0.1, 100_000, 8).unwrap();
    let m = estimate_r(&singlet, 0.1).unwrap();
    let max_sigma = m.sigma().max();
    assert!((m.value() - Matrix3::identity()).abs().max() <= 5.0 * max_sigma);

    let mixed = simulate_counts(&DensityMatrix::maximally_mixed(), 0.3, 100_000, 8).unwrap();
    let m = estimate_r(&mixed, 0.3).unwrap();
    for (v, s) in m.value().iter().zip(m.sigma().iter()) {
        assert!(v.abs() <= 5.0 * s);
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn estimate_error_shrinks_as_inverse_root_shots() {
    let singlet = DensityMatrix::singlet();
    let err = |shots: u64| {
        median(
            (0..50)
                .map(|seed| {
                    let t = simulate_counts(&singlet, 0.1, shots, 1000 + seed).unwrap();
                    (estimate_r(&t, 0.1).unwrap().value() - Matrix3::identity()).abs().max()
                })
                .collect(),
        )
    };
    let ratio = err(40_000) / err(10_000);
    assert!((0.4..=0.6).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn propagated_errors_are_calibrated_on_werner() {
    let rho = make_family(StateFamily::Werner(0.8)).unwrap();
    let truth = r_ref(&rho);
    let mut z = vec![Vec::new(); 6];
    for seed in 0..200 {
        let t = simulate_counts(&rho, 0.1, 20_000, 500 + seed).unwrap();
        let m = estimate_r(&t, 0.1).unwrap();
        for (k, s) in MeasurementSetting::ALL.iter().enumerate() {
            z[k].push((entry(m.value(), *s) - entry(&truth, *s)) / entry(m.sigma(), *s));
        }
    }
    for (k, zs) in z.iter().enumerate() {
        let mean = zs.iter().sum::<f64>() / zs.len() as f64;
        let sd = (zs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (zs.len() - 1) as f64).sqrt();
        assert!((0.8..=1.25).contains(&sd), "entry {k}: standardized sd {sd}");
    }
}
