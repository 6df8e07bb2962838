//! Random-state scatter of negativity against the witnesses, detection
//! thresholds, and exact witness curves of the reference families.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{make_family, random_state, FamilyKind, RandomStateMeasure};
use crate::witness::{bell_b, bell_m, concurrence, entropic_e, fef_f, negativity, r_of_state};

/// Records with negativity above this count as entangled.
pub const ENTANGLED_TOL: f64 = 1e-9;
/// A witness below this value is treated as not detecting the state when
/// computing thresholds, so states sitting exactly on `w = 0` bound the
/// undetected region.
pub const UNDETECTED_TOL: f64 = 1e-9;

/// Which witnesses are nonnegative for a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Detection {
    pub m: bool,
    pub e: bool,
    pub f: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub n: f64,
    pub m: f64,
    pub e: f64,
    pub f: f64,
    pub detected_by: Detection,
}

impl ScatterRecord {
    pub fn new(n: f64, m: f64, e: f64, f: f64) -> Self {
        Self {
            n,
            m,
            e,
            f,
            detected_by: Detection {
                m: m >= 0.0,
                e: e >= 0.0,
                f: f >= 0.0,
            },
        }
    }

    pub fn is_entangled(&self) -> bool {
        self.n > ENTANGLED_TOL
    }
}

/// Stream `index` of the ChaCha generator seeded by `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n` random states, each drawn from its own substream so the output does
/// not depend on how the work is split across threads.
pub fn scatter(n: usize, measure: RandomStateMeasure, seed: u64) -> Result<Vec<ScatterRecord>> {
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    Ok((0..n as u64)
        .into_par_iter()
        .map(|k| {
            let rho = random_state(measure, &mut substream(seed, k));
            let r = r_of_state(&rho);
            ScatterRecord::new(negativity(&rho), bell_m(&r), entropic_e(&rho), fef_f(&r))
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n_m: f64,
    pub n_e: f64,
    pub n_f: f64,
    pub sample_count: usize,
    pub measure: Option<RandomStateMeasure>,
}

/// Largest negativity among entangled records each witness fails to detect.
pub fn thresholds(records: &[ScatterRecord], measure: Option<RandomStateMeasure>) -> Result<ThresholdReport> {
    if records.is_empty() {
        return Err(Error::invalid("no records to compute thresholds from"));
    }
    let sup = |witness: fn(&ScatterRecord) -> f64| {
        records
            .iter()
            .filter(|r| r.is_entangled() && witness(r) < UNDETECTED_TOL)
            .map(|r| r.n)
            .fold(0.0, f64::max)
    };
    Ok(ThresholdReport {
        n_m: sup(|r| r.m),
        n_e: sup(|r| r.e),
        n_f: sup(|r| r.f),
        sample_count: records.len(),
        measure,
    })
}

/// Entangled records each witness detects, `(M, E, F)`.
pub fn detection_counts(records: &[ScatterRecord]) -> (usize, usize, usize) {
    records
        .iter()
        .filter(|r| r.is_entangled())
        .fold((0, 0, 0), |(m, e, f), r| {
            (
                m + r.detected_by.m as usize,
                e + r.detected_by.e as usize,
                f + r.detected_by.f as usize,
            )
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p: f64,
    pub n: f64,
    pub m: f64,
    pub e: f64,
    pub f: f64,
    pub b: f64,
    pub c: f64,
}

impl CurvePoint {
    pub fn as_record(&self) -> ScatterRecord {
        ScatterRecord::new(self.n, self.m, self.e, self.f)
    }
}

/// Exact witnesses on `steps` uniformly spaced parameters in `[from, to]`.
pub fn family_scan(kind: FamilyKind, from: f64, to: f64, steps: usize) -> Result<Vec<CurvePoint>> {
    if !(0.0 <= from && from <= to && to <= 1.0) {
        return Err(Error::invalid(format!("scan range [{from}, {to}] must satisfy 0 <= from <= to <= 1")));
    }
    if steps < 2 {
        return Err(Error::invalid("a scan needs at least 2 steps"));
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|k| {
            let p = if k + 1 == steps { to } else { from + (to - from) * k as f64 / last };
            let rho = make_family(kind.at(p))?;
            let r = r_of_state(&rho);
            let m = bell_m(&r);
            Ok(CurvePoint {
                p,
                n: negativity(&rho),
                m,
                e: entropic_e(&rho),
                f: fef_f(&r),
                b: bell_b(m),
                c: concurrence(&rho),
            })
        })
        .collect()
}

/// Exact witnesses on a uniform grid over the full range `[0, 1]`.
pub fn family_curve(kind: FamilyKind, grid_points: usize) -> Result<Vec<CurvePoint>> {
    family_scan(kind, 0.0, 1.0, grid_points)
}

/// Parameters between adjacent grid rows where `value` changes sign from
/// negative to nonnegative, located by linear interpolation.
pub fn zero_crossings(points: &[CurvePoint], value: fn(&CurvePoint) -> f64) -> Vec<f64> {
    points
        .windows(2)
        .filter(|w| value(&w[0]) < 0.0 && value(&w[1]) >= 0.0)
        .map(|w| {
            let (a, b) = (value(&w[0]), value(&w[1]));
            w[0].p + (w[1].p - w[0].p) * (-a) / (b - a)
        })
        .collect()
}
