use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bellswap::formats::{self, FlatRecord, RecordStyle};
use bellswap::montecarlo::detection_counts;
use bellswap::{
    estimate_r, family_scan, ml_reconstruct, report, report_with_oracle, scatter, simulate_counts, thresholds,
    witnesses_from_r, DensityMatrix, Error, FamilyKind, RandomStateMeasure, Result,
};
use clap::{Parser, Subcommand, ValueEnum};

mod manifest;

use manifest::RunManifest;

#[derive(Parser, Debug)]
#[command(name = "bellswap", version, about = "Two-qubit Bell and entanglement witnesses from the correlation matrix R = T^T T")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output file, or output prefix for commands that write several files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Layout of flat records.
    #[arg(long, global = true, value_enum, default_value_t = Format::Kv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Format {
    Csv,
    Kv,
}

impl From<Format> for RecordStyle {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => RecordStyle::Csv,
            Format::Kv => RecordStyle::KeyValue,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Witnesses and measures of a state file or family literal (werner:p=0.8).
    Analyze {
        state: String,
        /// Also run the brute-force fully-entangled-fraction search.
        #[arg(long)]
        oracle: bool,
    },
    /// Witnesses available from a six-record R file alone.
    #[command(name = "analyze-from-R", alias = "analyze-from-r")]
    AnalyzeFromR { file: PathBuf },
    /// Simulate the two-copy swapping measurement and estimate R.
    Simulate {
        state: String,
        /// Fraction of photon pairs that do not interfere.
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        /// Trials per (setting, mode).
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
    },
    /// Maximum-likelihood projection of a measured R onto the physical set.
    Reconstruct { file: PathBuf },
    /// Random-state scatter of negativity against the witnesses.
    Montecarlo {
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// haar-pure, hilbert-schmidt, or induced:K
        #[arg(long, default_value = "hilbert-schmidt")]
        measure: String,
    },
    /// Exact witness curve of a state family.
    FamilyScan {
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 1,
        Error::Parse { .. } => 3,
        Error::InvalidArgument(_) | Error::DegenerateCalibration => 4,
        Error::NotAState { .. } => 5,
        Error::InsufficientData(_) => 6,
        Error::OptimizerDiagnostic { .. } => 7,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_state(spec: &str) -> Result<DensityMatrix> {
    let path = Path::new(spec);
    if path.is_file() {
        formats::parse_state_json(&read(path)?)
    } else if formats::looks_like_family_literal(spec) || spec.contains(':') {
        bellswap::make_family(formats::parse_family_literal(spec)?)
    } else {
        Err(Error::Io(format!("{spec}: no such state file")))
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn record_file(kind: &str, record: &FlatRecord, style: RecordStyle) -> String {
    format!("# bellswap {kind} v{}\n{}", formats::FORMAT_VERSION, record.render(style, false))
}

fn run(cli: Cli) -> Result<()> {
    let started = Instant::now();
    let style: RecordStyle = cli.format.into();
    let mut m = RunManifest::new(cli.seed);
    m.param("format", format!("{:?}", cli.format).to_lowercase());

    match &cli.command {
        Command::Analyze { state, oracle } => {
            m.command = "analyze".into();
            m.param("state", state);
            m.param("oracle", oracle);
            let rho = load_state(state)?;
            let w = if *oracle { report_with_oracle(&rho) } else { report(&rho) };
            if *oracle && w.f_oracle.is_none() {
                eprintln!("warning: fully-entangled-fraction search did not converge");
            }
            let rec = formats::witness_record(&w);
            print!("{}", rec.render(style, true));
            if let Some(out) = &cli.out {
                write(out, &record_file("witness-report", &rec, style))?;
                m.outputs.push(out.clone());
                m.finish(started, &with_suffix(out, ".manifest.json"))?;
            }
        }
        Command::AnalyzeFromR { file } => {
            m.command = "analyze-from-R".into();
            m.inputs.push(file.clone());
            let r = formats::parse_r_records(&read(file)?)?.r_matrix()?;
            let rec = formats::r_witness_record(&witnesses_from_r(&r));
            print!("{}", rec.render(style, true));
            if let Some(out) = &cli.out {
                write(out, &record_file("r-witnesses", &rec, style))?;
                m.outputs.push(out.clone());
                m.finish(started, &with_suffix(out, ".manifest.json"))?;
            }
        }
        Command::Simulate { state, r, shots } => {
            m.command = "simulate".into();
            m.param("state", state);
            m.param("r", r);
            m.param("shots", shots);
            let rho = load_state(state)?;
            let table = simulate_counts(&rho, *r, *shots, cli.seed)?;
            let measured = estimate_r(&table, *r)?;
            let prefix = cli.out.clone().unwrap_or_else(|| PathBuf::from("simulate"));
            let counts_path = with_suffix(&prefix, ".counts.txt");
            let measured_path = with_suffix(&prefix, ".measured.txt");
            write(&counts_path, &formats::write_coincidence_table(&table))?;
            let meta = [
                ("r", r.to_string()),
                ("shots", shots.to_string()),
                ("seed", cli.seed.to_string()),
                ("state", state.clone()),
            ];
            write(&measured_path, &formats::write_measured_r(&measured, &meta))?;
            println!("# i,j,value,sigma");
            for (k, s) in bellswap::MeasurementSetting::ALL.iter().enumerate() {
                println!(
                    "{},{},{},{}",
                    s.i(),
                    s.j(),
                    formats::sig6(measured.lower_values()[k]),
                    formats::sig6(measured.lower_sigmas()[k])
                );
            }
            m.outputs.extend([counts_path, measured_path]);
            m.finish(started, &with_suffix(&prefix, ".manifest.json"))?;
        }
        Command::Reconstruct { file } => {
            m.command = "reconstruct".into();
            m.inputs.push(file.clone());
            let problem = formats::parse_r_records(&read(file)?)?.problem()?;
            let res = ml_reconstruct(&problem)?;
            let e = res.eigs;
            println!("eigs = {},{},{}", formats::sig6(e[0]), formats::sig6(e[1]), formats::sig6(e[2]));
            println!("logL = {}", formats::sig6(res.log_likelihood));
            println!("iterations = {}", res.iterations);
            println!("shift_fraction = {}", formats::sig6(res.shift_fraction));
            for s in bellswap::MeasurementSetting::ALL {
                println!("R{}{} = {}", s.i(), s.j(), formats::sig6(res.r_phys[(s.i() - 1, s.j() - 1)]));
            }
            if let Some(out) = &cli.out {
                write(out, &formats::write_ml_result(&problem, &res))?;
                m.outputs.push(out.clone());
                m.finish(started, &with_suffix(out, ".manifest.json"))?;
            }
        }
        Command::Montecarlo { samples, measure } => {
            m.command = "montecarlo".into();
            m.param("samples", samples);
            m.param("measure", measure);
            let measure: RandomStateMeasure = measure.parse()?;
            let records = scatter(*samples, measure, cli.seed)?;
            let t = thresholds(&records, Some(measure))?;
            let (dm, de, df) = detection_counts(&records);
            let rec = formats::threshold_record(&t)
                .number("detected_M", dm as f64)
                .number("detected_E", de as f64)
                .number("detected_F", df as f64);
            print!("{}", rec.render(style, true));
            let prefix = cli.out.clone().unwrap_or_else(|| PathBuf::from("montecarlo"));
            let scatter_path = with_suffix(&prefix, ".scatter.csv");
            let thresholds_path = with_suffix(&prefix, ".thresholds.txt");
            write(&scatter_path, &formats::write_scatter(&records))?;
            write(&thresholds_path, &record_file("thresholds", &rec, style))?;
            m.outputs.extend([scatter_path, thresholds_path]);
            m.finish(started, &with_suffix(&prefix, ".manifest.json"))?;
        }
        Command::FamilyScan { family, from, to, steps } => {
            m.command = "family-scan".into();
            m.param("family", family);
            m.param("from", from);
            m.param("to", to);
            m.param("steps", steps);
            let kind: FamilyKind = family.parse()?;
            let points = family_scan(kind, *from, *to, *steps)?;
            match &cli.out {
                Some(out) => {
                    write(out, &formats::write_curve(&points))?;
                    m.outputs.push(out.clone());
                    m.finish(started, &with_suffix(out, ".manifest.json"))?;
                }
                None => {
                    println!("p,N,M,E,F");
                    for p in &points {
                        let row: Vec<String> = [p.p, p.n, p.m, p.e, p.f].iter().map(|v| formats::sig6(*v)).collect();
                        println!("{}", row.join(","));
                    }
                }
            }
        }
    }
    Ok(())
}
