//! The six-setting, two-copy entanglement-swapping measurement.
//!
//! Two copies `rho (x) rho` are held in qubit order `a1, b1, a2, b2`. Alice
//! projects `a1 a2` on the singlet (a Hong-Ou-Mandel anti-coalescence at a beam
//! splitter) while Bob measures `sigma_i (x) sigma_j` on `b1 b2`. With
//! `S = I - 4 |Psi-><Psi-|` the expectation of `S (x) sigma_i (x) sigma_j`
//! equals `R_ij`.
//!
//! A fraction `r` of photon pairs does not interfere, so Alice's "interference
//! on" element is `r/2 I + (1 - r)|Psi-><Psi-|`. With interference off it is
//! `I/2`. Running both modes gives the marginal `P(b)` and the singlet-joint
//! probability `P(Psi-, b)` needed to form `R_ij`.

use nalgebra::Matrix3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron2, kron4, trace_of_product, Op16, Op2, Op4, C64};
use crate::state::{sigma, singlet_vector, tensor_and_permute, DensityMatrix};

/// Moves `a1, b1, a2, b2` to `a1, a2, b1, b2`.
pub const ALICE_BOB_ORDER: [usize; 4] = [0, 2, 1, 3];

/// Outcome order and eigenvalue convention for Bob's projectors.
pub const PROJECTOR_CONVENTION: &str = "Pi_b=(+,+),(+,-),(-,+),(-,-);lambda_b=+1,-1,-1,+1";

/// Eigenvalue of `sigma_i (x) sigma_j` for each outcome `b`.
pub const OUTCOME_SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Bob's Pauli pair `(i, j)` with `i >= j`; `sigma_i` acts on `b1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementSetting {
    i: usize,
    j: usize,
}

impl MeasurementSetting {
    pub const ALL: [MeasurementSetting; 6] = [
        MeasurementSetting { i: 1, j: 1 },
        MeasurementSetting { i: 2, j: 1 },
        MeasurementSetting { i: 2, j: 2 },
        MeasurementSetting { i: 3, j: 1 },
        MeasurementSetting { i: 3, j: 2 },
        MeasurementSetting { i: 3, j: 3 },
    ];

    pub fn new(i: usize, j: usize) -> Result<Self> {
        if !(1..=3).contains(&i) || !(1..=3).contains(&j) || i < j {
            return Err(Error::invalid(format!(
                "measurement setting ({i},{j}) must satisfy 3 >= i >= j >= 1"
            )));
        }
        Ok(Self { i, j })
    }

    pub fn i(&self) -> usize {
        self.i
    }

    pub fn j(&self) -> usize {
        self.j
    }

    /// Position in [`MeasurementSetting::ALL`].
    pub fn index(&self) -> usize {
        self.i * (self.i - 1) / 2 + self.j - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterferenceMode {
    On,
    Off,
}

impl InterferenceMode {
    pub const BOTH: [InterferenceMode; 2] = [InterferenceMode::On, InterferenceMode::Off];

    pub fn name(self) -> &'static str {
        match self {
            InterferenceMode::On => "on",
            InterferenceMode::Off => "off",
        }
    }

    pub fn slot(self) -> usize {
        match self {
            InterferenceMode::On => 0,
            InterferenceMode::Off => 1,
        }
    }
}

/// Alice's click element on `a1 a2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlicePovm {
    r: f64,
    mode: InterferenceMode,
}

impl AlicePovm {
    pub fn new(r: f64, mode: InterferenceMode) -> Result<Self> {
        check_overlap_fraction(r)?;
        Ok(Self { r, mode })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn mode(&self) -> InterferenceMode {
        self.mode
    }

    pub fn element(&self) -> Op4 {
        match self.mode {
            InterferenceMode::On => {
                Op4::identity() * C64::new(self.r / 2.0, 0.0)
                    + singlet_projector() * C64::new(1.0 - self.r, 0.0)
            }
            InterferenceMode::Off => Op4::identity() * C64::new(0.5, 0.0),
        }
    }
}

fn check_overlap_fraction(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("overlap fraction r = {r} outside [0, 1]")));
    }
    Ok(())
}

/// `|Psi-><Psi-|`.
pub fn singlet_projector() -> Op4 {
    let v = singlet_vector();
    Op4::from_fn(|r, c| v[r] * v[c].conj())
}

/// Rank-one eigenprojectors of `sigma_i (x) sigma_j` in the order of
/// [`PROJECTOR_CONVENTION`].
pub fn bob_projectors(s: MeasurementSetting) -> [Op4; 4] {
    let half = C64::new(0.5, 0.0);
    let plus = |k: usize| (Op2::identity() + sigma(k)) * half;
    let minus = |k: usize| (Op2::identity() - sigma(k)) * half;
    [
        kron2(&plus(s.i), &plus(s.j)),
        kron2(&plus(s.i), &minus(s.j)),
        kron2(&minus(s.i), &plus(s.j)),
        kron2(&minus(s.i), &minus(s.j)),
    ]
}

fn two_copies(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Op16 {
    tensor_and_permute(rho1, rho2, &ALICE_BOB_ORDER).expect("fixed permutation is valid")
}

/// `Tr[(rho1 (x) rho2) (S_{a1 a2} (x) (sigma_i (x) sigma_j)_{b1 b2})]`.
pub fn collective_r_exact(rho1: &DensityMatrix, rho2: &DensityMatrix, s: MeasurementSetting) -> f64 {
    let swap_op = Op4::identity() - singlet_projector() * C64::new(4.0, 0.0);
    let bob = kron2(&sigma(s.i), &sigma(s.j));
    trace_of_product(&two_copies(rho1, rho2), &kron4(&swap_op, &bob)).re
}

/// Probabilities of Alice clicking (a four-fold coincidence) or not, jointly
/// with Bob's outcome `b`. The eight values sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub click: [f64; 4],
    pub no_click: [f64; 4],
}

pub fn joint_outcome_distribution(
    rho: &DensityMatrix,
    s: MeasurementSetting,
    povm: &AlicePovm,
) -> OutcomeDistribution {
    let joint = two_copies(rho, rho);
    let alice = povm.element();
    let alice_no = Op4::identity() - alice;
    let projectors = bob_projectors(s);
    let click = projectors.map(|pb| trace_of_product(&joint, &kron4(&alice, &pb)).re);
    let no_click = projectors.map(|pb| trace_of_product(&joint, &kron4(&alice_no, &pb)).re);
    OutcomeDistribution { click, no_click }
}

/// Four-fold coincidence counts for one (setting, mode) run of `shots` trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ModeCounts {
    pub counts: [u64; 4],
    pub shots: u64,
}

impl ModeCounts {
    pub fn new(counts: [u64; 4], shots: u64) -> Result<Self> {
        let total: u64 = counts.iter().try_fold(0u64, |acc, &c| acc.checked_add(c)).ok_or_else(|| {
            Error::invalid("coincidence counts overflow")
        })?;
        if total > shots {
            return Err(Error::invalid(format!(
                "coincidence counts sum to {total}, more than the {shots} trials"
            )));
        }
        Ok(Self { counts, shots })
    }

    pub fn frequencies(&self) -> [f64; 4] {
        let n = self.shots as f64;
        self.counts.map(|c| c as f64 / n)
    }
}

/// Coincidence record of a full run: every setting in both modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceTable {
    pub r: f64,
    pub seed: Option<u64>,
    cells: [[ModeCounts; 2]; 6],
}

impl CoincidenceTable {
    pub fn new(r: f64, seed: Option<u64>) -> Result<Self> {
        check_overlap_fraction(r)?;
        Ok(Self {
            r,
            seed,
            cells: [[ModeCounts::default(); 2]; 6],
        })
    }

    pub fn get(&self, s: MeasurementSetting, mode: InterferenceMode) -> &ModeCounts {
        &self.cells[s.index()][mode.slot()]
    }

    pub fn set(&mut self, s: MeasurementSetting, mode: InterferenceMode, counts: ModeCounts) {
        self.cells[s.index()][mode.slot()] = counts;
    }
}

/// Draws one multinomial sample of `shots` trials over four click outcomes and
/// the aggregated no-click outcome, by sequential conditional binomials.
fn sample_clicks(probs: &[f64; 4], shots: u64, rng: &mut ChaCha8Rng) -> [u64; 4] {
    let mut remaining = shots;
    let mut mass_left = 1.0;
    let mut out = [0u64; 4];
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 || mass_left <= 0.0 {
            break;
        }
        let cond = (p.max(0.0) / mass_left).clamp(0.0, 1.0);
        let draw = Binomial::new(remaining, cond)
            .expect("probability clamped to [0, 1]")
            .sample(rng);
        out[k] = draw;
        remaining -= draw;
        mass_left -= p.max(0.0);
    }
    out
}

/// Simulates `shots` trials per (setting, mode). Each of the twelve runs draws
/// from its own ChaCha stream of `seed`, so the table does not depend on
/// evaluation order.
pub fn simulate_counts(
    rho: &DensityMatrix,
    r: f64,
    shots: u64,
    seed: u64,
) -> Result<CoincidenceTable> {
    check_overlap_fraction(r)?;
    if shots == 0 {
        return Err(Error::invalid("shots per (setting, mode) must be at least 1"));
    }
    let mut table = CoincidenceTable::new(r, Some(seed))?;
    for s in MeasurementSetting::ALL {
        for mode in InterferenceMode::BOTH {
            let povm = AlicePovm::new(r, mode)?;
            let dist = joint_outcome_distribution(rho, s, &povm);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((2 * s.index() + mode.slot()) as u64);
            let counts = sample_clicks(&dist.click, shots, &mut rng);
            table.set(s, mode, ModeCounts::new(counts, shots)?);
        }
    }
    Ok(table)
}

/// Estimated `R` with per-entry standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredR {
    value: Matrix3<f64>,
    sigma: Matrix3<f64>,
}

impl MeasuredR {
    /// Builds from the six measured `(i >= j)` entries, mirrored to the upper
    /// triangle.
    pub fn from_lower(values: [f64; 6], sigmas: [f64; 6]) -> Result<Self> {
        let mut value = Matrix3::zeros();
        let mut sigma = Matrix3::zeros();
        for (k, s) in MeasurementSetting::ALL.iter().enumerate() {
            if !values[k].is_finite() {
                return Err(Error::invalid(format!("R_{}{} is not finite", s.i, s.j)));
            }
            if !(sigmas[k] > 0.0) || !sigmas[k].is_finite() {
                return Err(Error::invalid(format!(
                    "standard error of R_{}{} must be positive, got {}",
                    s.i, s.j, sigmas[k]
                )));
            }
            let (a, b) = (s.i - 1, s.j - 1);
            value[(a, b)] = values[k];
            value[(b, a)] = values[k];
            sigma[(a, b)] = sigmas[k];
            sigma[(b, a)] = sigmas[k];
        }
        Ok(Self { value, sigma })
    }

    pub fn value(&self) -> &Matrix3<f64> {
        &self.value
    }

    pub fn sigma(&self) -> &Matrix3<f64> {
        &self.sigma
    }

    pub fn lower_values(&self) -> [f64; 6] {
        MeasurementSetting::ALL.map(|s| self.value[(s.i - 1, s.j - 1)])
    }

    pub fn lower_sigmas(&self) -> [f64; 6] {
        MeasurementSetting::ALL.map(|s| self.sigma[(s.i - 1, s.j - 1)])
    }
}

/// Coefficients of the linear estimator `R_ij = sum_b (c_on[b] f_on[b] + c_off[b] f_off[b])`.
///
/// `P(b) = 2 f_off(b)` and `P(Psi-, b) = (f_on(b) - r/2 P(b)) / (1 - r)`, so
/// `R_ij = sum_b lambda_b (P(b) - 4 P(Psi-, b))`.
fn estimator_coefficients(r: f64) -> ([f64; 4], [f64; 4]) {
    let c_on = OUTCOME_SIGNS.map(|l| -4.0 * l / (1.0 - r));
    let c_off = OUTCOME_SIGNS.map(|l| 2.0 * l * (1.0 + r) / (1.0 - r));
    (c_on, c_off)
}

/// `R_ij` from click frequencies of the two runs of one setting.
pub fn r_element_estimate(on: &[f64; 4], off: &[f64; 4], r: f64) -> f64 {
    let (c_on, c_off) = estimator_coefficients(r);
    (0..4).map(|b| c_on[b] * on[b] + c_off[b] * off[b]).sum()
}

/// Variance of `sum_b c_b f_b` for multinomial frequencies with the no-click
/// category carrying coefficient zero. Empty cells use the rule-of-three
/// surrogate `1 / (3 n)`.
fn linear_multinomial_variance(coeffs: &[f64; 4], cell: &ModeCounts) -> f64 {
    let n = cell.shots as f64;
    let floor = 1.0 / (3.0 * n);
    let p = cell.counts.map(|c| if c == 0 { floor } else { c as f64 / n });
    let second: f64 = (0..4).map(|b| coeffs[b] * coeffs[b] * p[b]).sum();
    let first: f64 = (0..4).map(|b| coeffs[b] * p[b]).sum();
    ((second - first * first) / n).max(0.0)
}

/// Two-run estimate of `R` with first-order (delta-method) standard errors.
pub fn estimate_r(table: &CoincidenceTable, r: f64) -> Result<MeasuredR> {
    check_overlap_fraction(r)?;
    if r >= 1.0 {
        return Err(Error::DegenerateCalibration);
    }
    let (c_on, c_off) = estimator_coefficients(r);
    let mut values = [0.0; 6];
    let mut sigmas = [0.0; 6];
    for (k, s) in MeasurementSetting::ALL.iter().enumerate() {
        let on = table.get(*s, InterferenceMode::On);
        let off = table.get(*s, InterferenceMode::Off);
        for (cell, mode) in [(on, "on"), (off, "off")] {
            if cell.shots == 0 {
                return Err(Error::InsufficientData(format!(
                    "no trials recorded for setting ({},{}) with interference {mode}",
                    s.i, s.j
                )));
            }
        }
        values[k] = r_element_estimate(&on.frequencies(), &off.frequencies(), r);
        let var = linear_multinomial_variance(&c_on, on) + linear_multinomial_variance(&c_off, off);
        sigmas[k] = var.sqrt().max(f64::MIN_POSITIVE);
    }
    MeasuredR::from_lower(values, sigmas)
}
