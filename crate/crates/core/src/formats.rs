//! Text formats for states, coincidence tables, six-record `R` files, scatter
//! and curve tables, and flat key-value reports.
//!
//! Record files share one layout: `#` starts a comment, `key = value` lines
//! carry metadata, and every other nonblank line is a comma-separated record.
//! Numbers are written with the shortest representation that round-trips.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Op4, C64};
use crate::mle::{LikelihoodProblem, MLResult};
use crate::montecarlo::{CurvePoint, ScatterRecord, ThresholdReport};
use crate::state::{DensityMatrix, FamilyKind, StateFamily, BASIS_LABEL};
use crate::swap::{
    CoincidenceTable, InterferenceMode, MeasuredR, MeasurementSetting, ModeCounts, PROJECTOR_CONVENTION,
};
use crate::witness::{RMatrix, RWitnesses, WitnessReport};

pub const FORMAT_VERSION: u32 = 1;

/// `x` with six significant digits, for terminal output.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".into()
        } else {
            s
        }
    } else {
        format!("{x:.5e}")
    }
}

fn full(x: f64) -> String {
    format!("{x}")
}

// ---------------------------------------------------------------- states

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    basis: String,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

/// Parses `werner:p=<f>`, `horodecki:p=<f>` or `pure:p=<f>`.
pub fn parse_family_literal(text: &str) -> Result<StateFamily> {
    let text = text.trim();
    let (name, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::parse("family literal", format!("expected '<family>:p=<value>', got '{text}'")))?;
    let kind: FamilyKind = name
        .parse()
        .map_err(|e: Error| Error::parse("family literal", e.to_string()))?;
    let value = rest
        .strip_prefix("p=")
        .ok_or_else(|| Error::parse("family literal", format!("expected 'p=<value>' after '{name}:'")))?;
    let p: f64 = value
        .parse()
        .map_err(|_| Error::parse("family literal", format!("'{value}' is not a number")))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("family parameter p = {p} is outside [0, 1]")));
    }
    Ok(kind.at(p))
}

pub fn looks_like_family_literal(text: &str) -> bool {
    text.split_once(':')
        .is_some_and(|(name, rest)| name.parse::<FamilyKind>().is_ok() && rest.starts_with("p="))
}

/// Parses a JSON state object and validates it as a density matrix.
pub fn parse_state_json(text: &str) -> Result<DensityMatrix> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("state file line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    if file.basis.replace(' ', "") != BASIS_LABEL {
        return Err(Error::parse(
            "state file field 'basis'",
            format!("expected \"{BASIS_LABEL}\", got \"{}\"", file.basis),
        ));
    }
    let mut m = Op4::zeros();
    for (field, rows, imaginary) in [("re", &file.re, false), ("im", &file.im, true)] {
        if rows.len() != 4 {
            return Err(Error::parse(
                format!("state file field '{field}'"),
                format!("expected 4 rows, got {}", rows.len()),
            ));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != 4 {
                return Err(Error::parse(
                    format!("state file field '{field}' row {}", r + 1),
                    format!("expected 4 entries, got {}", row.len()),
                ));
            }
            for (c, &v) in row.iter().enumerate() {
                if imaginary {
                    m[(r, c)].im = v;
                } else {
                    m[(r, c)].re = v;
                }
            }
        }
    }
    DensityMatrix::new(m)
}

pub fn write_state_json(rho: &DensityMatrix) -> String {
    let e = rho.entries();
    let part = |f: fn(&C64) -> f64| (0..4).map(|r| (0..4).map(|c| f(&e[(r, c)])).collect()).collect();
    let file = StateFile {
        basis: BASIS_LABEL.into(),
        re: part(|z| z.re),
        im: part(|z| z.im),
    };
    serde_json::to_string_pretty(&file).expect("state file serializes") + "\n"
}

// ---------------------------------------------------------- line layout

#[derive(Debug)]
enum Line<'a> {
    Meta(&'a str, &'a str),
    Record(Vec<&'a str>),
}

/// Nonblank, noncomment lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, Line<'_>)> {
    text.lines().enumerate().filter_map(|(k, raw)| {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            return None;
        }
        let parsed = match line.split_once('=') {
            Some((key, value)) => Line::Meta(key.trim(), value.trim()),
            None => Line::Record(line.split(',').map(str::trim).collect()),
        };
        Some((k + 1, parsed))
    })
}

fn number(field: &str, what: &str, context: impl Fn() -> String) -> Result<f64> {
    let v: f64 = field
        .parse()
        .map_err(|_| Error::parse(context(), format!("{what} '{field}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(context(), format!("{what} must be finite")));
    }
    Ok(v)
}

fn integer<T: std::str::FromStr>(field: &str, what: &str, context: impl Fn() -> String) -> Result<T> {
    field
        .parse()
        .map_err(|_| Error::parse(context(), format!("{what} '{field}' is not a nonnegative integer")))
}

fn setting(i: &str, j: &str, context: impl Fn() -> String) -> Result<MeasurementSetting> {
    let i: usize = integer(i, "index i", &context)?;
    let j: usize = integer(j, "index j", &context)?;
    MeasurementSetting::new(i, j).map_err(|_| Error::parse(context(), format!("({i},{j}) is not a setting with 3 >= i >= j >= 1")))
}

fn header(out: &mut String, kind: &str) {
    let _ = writeln!(out, "# bellswap {kind} v{FORMAT_VERSION}");
}

// ------------------------------------------------------- six-record files

/// Contents of a six-record `R` file.
#[derive(Debug, Clone, PartialEq)]
pub struct RRecords {
    /// Entries in `MeasurementSetting::ALL` order.
    pub values: [f64; 6],
    pub sigmas: Option<[f64; 6]>,
    pub metadata: BTreeMap<String, String>,
}

impl RRecords {
    pub fn r_matrix(&self) -> Result<RMatrix> {
        RMatrix::from_lower(self.values)
    }

    pub fn measured(&self) -> Result<MeasuredR> {
        let sigmas = self
            .sigmas
            .ok_or_else(|| Error::parse("R file", "records carry no sigma column"))?;
        MeasuredR::from_lower(self.values, sigmas)
    }

    pub fn problem(&self) -> Result<LikelihoodProblem> {
        Ok(LikelihoodProblem::from_measured(&self.measured()?))
    }

    fn meta_number(&self, key: &str) -> Result<f64> {
        let raw = self
            .metadata
            .get(key)
            .ok_or_else(|| Error::parse("R file", format!("missing '{key}' field")))?;
        number(raw, key, || format!("R file field '{key}'"))
    }
}

/// Parses six `i,j,value[,sigma]` records, one per setting `i >= j`.
pub fn parse_r_records(text: &str) -> Result<RRecords> {
    let mut values = [None; 6];
    let mut sigmas = [None; 6];
    let mut with_sigma = None;
    let mut metadata = BTreeMap::new();
    let mut count = 0;
    for (line_no, line) in lines(text) {
        let fields = match line {
            Line::Meta(k, v) => {
                metadata.insert(k.to_string(), v.to_string());
                continue;
            }
            Line::Record(f) => f,
        };
        count += 1;
        let record = count;
        let ctx = || format!("record {record} (line {line_no})");
        if count > 6 {
            return Err(Error::parse(ctx(), "more than six records"));
        }
        if !(3..=4).contains(&fields.len()) {
            return Err(Error::parse(ctx(), format!("expected i,j,value[,sigma], got {} fields", fields.len())));
        }
        let has_sigma = fields.len() == 4;
        if *with_sigma.get_or_insert(has_sigma) != has_sigma {
            return Err(Error::parse(ctx(), "records disagree on whether a sigma column is present"));
        }
        let s = setting(fields[0], fields[1], ctx)?;
        if values[s.index()].is_some() {
            return Err(Error::parse(ctx(), format!("setting ({},{}) appears twice", s.i(), s.j())));
        }
        values[s.index()] = Some(number(fields[2], "value", ctx)?);
        if has_sigma {
            sigmas[s.index()] = Some(number(fields[3], "sigma", ctx)?);
        }
    }
    if count < 6 {
        return Err(Error::parse("R file", format!("expected six records, found {count}")));
    }
    Ok(RRecords {
        values: values.map(|v| v.expect("six distinct settings fill every slot")),
        sigmas: with_sigma
            .unwrap_or(false)
            .then(|| sigmas.map(|v| v.expect("every record has a sigma"))),
        metadata,
    })
}

fn write_records(out: &mut String, values: &[f64; 6], sigmas: Option<&[f64; 6]>) {
    out.push_str(if sigmas.is_some() { "# i,j,value,sigma\n" } else { "# i,j,value\n" });
    for (k, s) in MeasurementSetting::ALL.iter().enumerate() {
        let _ = write!(out, "{},{},{}", s.i(), s.j(), full(values[k]));
        if let Some(sig) = sigmas {
            let _ = write!(out, ",{}", full(sig[k]));
        }
        out.push('\n');
    }
}

pub fn write_measured_r(m: &MeasuredR, metadata: &[(&str, String)]) -> String {
    let mut out = String::new();
    header(&mut out, "measured-R");
    for (k, v) in metadata {
        let _ = writeln!(out, "{k} = {v}");
    }
    write_records(&mut out, &m.lower_values(), Some(&m.lower_sigmas()));
    out
}

pub fn write_r_matrix(r: &RMatrix) -> String {
    let mut out = String::new();
    header(&mut out, "R");
    let values = MeasurementSetting::ALL.map(|s| r.entries()[(s.i() - 1, s.j() - 1)]);
    write_records(&mut out, &values, None);
    out
}

/// Reconstructed `R` as six records carrying the problem's standard errors,
/// so the file is itself a valid reconstruction input.
pub fn write_ml_result(problem: &LikelihoodProblem, result: &MLResult) -> String {
    let mut out = String::new();
    header(&mut out, "ml-result");
    let e = result.eigs;
    let _ = writeln!(out, "eigs = {},{},{}", full(e[0]), full(e[1]), full(e[2]));
    let _ = writeln!(out, "logL = {}", full(result.log_likelihood));
    let _ = writeln!(out, "iterations = {}", result.iterations);
    let _ = writeln!(out, "shift_fraction = {}", full(result.shift_fraction));
    let values = MeasurementSetting::ALL.map(|s| result.r_phys[(s.i() - 1, s.j() - 1)]);
    let sigmas = MeasurementSetting::ALL.map(|s| problem.sigma()[(s.i() - 1, s.j() - 1)]);
    write_records(&mut out, &values, Some(&sigmas));
    out
}

pub fn parse_ml_result(text: &str) -> Result<MLResult> {
    let rec = parse_r_records(text)?;
    let r = rec.r_matrix()?;
    let eigs_raw = rec
        .metadata
        .get("eigs")
        .ok_or_else(|| Error::parse("ML result", "missing 'eigs' field"))?;
    let eigs: Vec<f64> = eigs_raw
        .split(',')
        .map(|v| number(v.trim(), "eigenvalue", || "ML result field 'eigs'".into()))
        .collect::<Result<_>>()?;
    let eigs: [f64; 3] = eigs
        .try_into()
        .map_err(|_| Error::parse("ML result field 'eigs'", "expected three eigenvalues"))?;
    let iterations = rec
        .metadata
        .get("iterations")
        .ok_or_else(|| Error::parse("ML result", "missing 'iterations' field"))?;
    Ok(MLResult {
        r_phys: *r.entries(),
        log_likelihood: rec.meta_number("logL")?,
        eigs,
        iterations: integer(iterations, "iterations", || "ML result field 'iterations'".into())?,
        shift_fraction: rec.meta_number("shift_fraction")?,
    })
}

// ------------------------------------------------------ coincidence files

pub fn write_coincidence_table(t: &CoincidenceTable) -> String {
    let mut out = String::new();
    header(&mut out, "coincidence-table");
    let _ = writeln!(out, "convention = {PROJECTOR_CONVENTION}");
    let _ = writeln!(out, "r = {}", full(t.r));
    match t.seed {
        Some(s) => {
            let _ = writeln!(out, "seed = {s}");
        }
        None => out.push_str("seed = none\n"),
    }
    out.push_str("# i,j,mode,b,count,shots\n");
    for s in MeasurementSetting::ALL {
        for mode in InterferenceMode::BOTH {
            let cell = t.get(s, mode);
            for b in 0..4 {
                let _ = writeln!(out, "{},{},{},{},{},{}", s.i(), s.j(), mode.name(), b + 1, cell.counts[b], cell.shots);
            }
        }
    }
    out
}

/// Parses a coincidence table. Every (setting, mode, b) cell must appear once
/// and the four cells of a run must agree on `shots`.
pub fn parse_coincidence_table(text: &str) -> Result<CoincidenceTable> {
    let mut meta = BTreeMap::new();
    let mut cells: [[[Option<(u64, u64)>; 4]; 2]; 6] = [[[None; 4]; 2]; 6];
    let mut count = 0;
    for (line_no, line) in lines(text) {
        let fields = match line {
            Line::Meta(k, v) => {
                if meta.insert(k.to_string(), v.to_string()).is_some() {
                    return Err(Error::parse(format!("line {line_no}"), format!("field '{k}' repeated")));
                }
                continue;
            }
            Line::Record(f) => f,
        };
        count += 1;
        let record = count;
        let ctx = || format!("record {record} (line {line_no})");
        if fields.len() != 6 {
            return Err(Error::parse(ctx(), format!("expected i,j,mode,b,count,shots, got {} fields", fields.len())));
        }
        let s = setting(fields[0], fields[1], ctx)?;
        let mode = match fields[2] {
            "on" => InterferenceMode::On,
            "off" => InterferenceMode::Off,
            other => return Err(Error::parse(ctx(), format!("mode '{other}' is neither 'on' nor 'off'"))),
        };
        let b: usize = integer(fields[3], "outcome b", ctx)?;
        if !(1..=4).contains(&b) {
            return Err(Error::parse(ctx(), format!("outcome b = {b} is outside 1..=4")));
        }
        let c: u64 = integer(fields[4], "count", ctx)?;
        let n: u64 = integer(fields[5], "shots", ctx)?;
        let slot = &mut cells[s.index()][mode.slot()][b - 1];
        if slot.is_some() {
            return Err(Error::parse(ctx(), "cell appears twice"));
        }
        *slot = Some((c, n));
    }

    let convention = meta
        .get("convention")
        .ok_or_else(|| Error::parse("coincidence table", "missing 'convention' field"))?;
    if convention != PROJECTOR_CONVENTION {
        return Err(Error::parse(
            "coincidence table field 'convention'",
            format!("unsupported convention '{convention}'"),
        ));
    }
    let r_raw = meta
        .get("r")
        .ok_or_else(|| Error::parse("coincidence table", "missing 'r' field"))?;
    let r = number(r_raw, "r", || "coincidence table field 'r'".into())?;
    let seed = match meta.get("seed").map(String::as_str) {
        None | Some("none") => None,
        Some(v) => Some(integer(v, "seed", || "coincidence table field 'seed'".into())?),
    };
    let mut table = CoincidenceTable::new(r, seed)?;
    for s in MeasurementSetting::ALL {
        for mode in InterferenceMode::BOTH {
            let run = cells[s.index()][mode.slot()];
            let ctx = format!("coincidence table setting ({},{}) mode {}", s.i(), s.j(), mode.name());
            let mut counts = [0; 4];
            let mut shots = None;
            for (b, cell) in run.iter().enumerate() {
                let (c, n) = cell.ok_or_else(|| Error::parse(ctx.clone(), format!("missing outcome b = {}", b + 1)))?;
                if *shots.get_or_insert(n) != n {
                    return Err(Error::parse(ctx, "outcomes disagree on shots"));
                }
                counts[b] = c;
            }
            let cell = ModeCounts::new(counts, shots.expect("four outcomes")).map_err(|e| Error::parse(ctx, e.to_string()))?;
            table.set(s, mode, cell);
        }
    }
    Ok(table)
}

// ------------------------------------------------------------ tables

pub fn write_scatter(records: &[ScatterRecord]) -> String {
    let mut out = String::from("N,M,E,F,detM,detE,detF\n");
    for r in records {
        let d = r.detected_by;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            full(r.n),
            full(r.m),
            full(r.e),
            full(r.f),
            d.m as u8,
            d.e as u8,
            d.f as u8
        );
    }
    out
}

pub fn write_curve(points: &[CurvePoint]) -> String {
    let mut out = String::from("p,N,M,E,F\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{},{}", full(p.p), full(p.n), full(p.m), full(p.e), full(p.f));
    }
    out
}

// ------------------------------------------------------ flat records

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStyle {
    Csv,
    KeyValue,
}

impl std::str::FromStr for RecordStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "kv" => Ok(Self::KeyValue),
            _ => Err(Error::invalid(format!("format '{s}' is neither 'csv' nor 'kv'"))),
        }
    }
}

/// A flat, ordered set of named values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatRecord {
    pub fields: Vec<(String, Value)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl FlatRecord {
    pub fn number(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.into(), Value::Number(v)));
        self
    }

    pub fn text(mut self, key: &str, v: impl Into<String>) -> Self {
        self.fields.push((key.into(), Value::Text(v.into())));
        self
    }

    /// `short` selects six significant digits instead of full precision.
    pub fn render(&self, style: RecordStyle, short: bool) -> String {
        let show = |v: &Value| match v {
            Value::Number(x) if short => sig6(*x),
            Value::Number(x) => full(*x),
            Value::Text(t) => t.clone(),
        };
        match style {
            RecordStyle::KeyValue => self
                .fields
                .iter()
                .map(|(k, v)| format!("{k} = {}\n", show(v)))
                .collect(),
            RecordStyle::Csv => {
                let keys: Vec<&str> = self.fields.iter().map(|(k, _)| k.as_str()).collect();
                let vals: Vec<String> = self.fields.iter().map(|(_, v)| show(v)).collect();
                format!("{}\n{}\n", keys.join(","), vals.join(","))
            }
        }
    }
}

pub fn witness_record(w: &WitnessReport) -> FlatRecord {
    let mut rec = FlatRecord::default()
        .number("M", w.m)
        .number("B", w.b)
        .number("chsh_max", w.chsh_max)
        .number("F", w.f)
        .number("E", w.e)
        .number("N", w.n)
        .number("C", w.c)
        .number("r1", w.eigs[0])
        .number("r2", w.eigs[1])
        .number("r3", w.eigs[2]);
    if let Some(f) = w.f_oracle {
        rec = rec.number("F_oracle", f);
    }
    rec
}

pub fn r_witness_record(w: &RWitnesses) -> FlatRecord {
    FlatRecord::default()
        .number("M", w.m)
        .number("B", w.b)
        .number("chsh_max", w.chsh_max)
        .number("F", w.f)
        .number("E_equal_purity", w.e_equal_purity)
        .number("r1", w.eigs[0])
        .number("r2", w.eigs[1])
        .number("r3", w.eigs[2])
}

pub fn threshold_record(t: &ThresholdReport) -> FlatRecord {
    let measure = t.measure.map_or_else(|| "unspecified".to_string(), |m| m.to_string());
    FlatRecord::default()
        .number("N_M", t.n_m)
        .number("N_E", t.n_e)
        .number("N_F", t.n_f)
        .number("samples", t.sample_count as f64)
        .text("measure", measure)
}
