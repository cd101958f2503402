//! `ducci`: command-line front end for p-adic Ducci experiments.
//!
//! Exit codes: 0 success (a REFUTED verdict is still a success), 1 usage
//! error, 2 invalid input, 3 I/O failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use ducci_core::dynamics::{run_classical, run_orbit, OrbitLimits, Outcome};
use ducci_core::harness::{
    compare_prediction, run_sweep, LabeledObservation, LabeledPrediction, SweepConfig, Verdict,
};
use ducci_core::schema::parse_instance_file;
use ducci_core::spectral::{analyze, DEFAULT_MAX_ORDER};
use ducci_core::{
    format_rational, padic_abs, parse_rational, vp, DucciInstance, HarnessError, LoadError,
    ParseError, Prime,
};

const TRACE_CAP: usize = 1000;
const CLASSICAL_MAX_STEPS: u64 = 10_000;

#[derive(Parser)]
#[command(
    name = "ducci",
    version,
    about = "p-adic Ducci dynamics over exact rationals"
)]
struct Cli {
    /// Emit JSON for every subcommand.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// p-adic absolute value of a rational.
    Abs {
        #[arg(long)]
        p: u64,
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
    /// Iterate an instance and report the orbit.
    Orbit {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        max_steps: Option<u64>,
        /// Divergence threshold as a rational, e.g. 2^50 written out.
        #[arg(long)]
        threshold: Option<String>,
    },
    /// Newton polygon, eigenvalue valuations and spectrum class.
    Spectrum {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Predicted behavior from the spectrum.
    Predict {
        #[arg(long)]
        instance: PathBuf,
        /// Also run the orbit and judge the prediction.
        #[arg(long)]
        check: bool,
    },
    /// Seeded experiment sweep.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Classical integer Ducci map on four numbers.
    Classical {
        #[arg(num_args = 4, required = true)]
        seed: Vec<u64>,
        #[arg(long)]
        trace: bool,
    },
}

enum Failure {
    Invalid(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invalid(m) | Failure::Io(m) => m,
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } => Failure::Io(e.to_string()),
            LoadError::Invalid(e) => e.into(),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Io(_) => Failure::Io(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let json = cli.json;
    match cli.command {
        Command::Abs { p, x } => abs(p, &x, json),
        Command::Orbit {
            instance,
            max_steps,
            threshold,
        } => orbit(&instance, max_steps, threshold.as_deref()),
        Command::Spectrum { instance } => {
            let inst = parse_instance_file(&instance)?;
            print_json(&analyze(inst.matrix(), inst.p(), DEFAULT_MAX_ORDER));
            Ok(())
        }
        Command::Predict { instance, check } => predict(&instance, check, json),
        Command::Sweep { config, out } => sweep(&config, &out, json),
        Command::Classical { seed, trace } => {
            classical([seed[0], seed[1], seed[2], seed[3]], trace, json);
            Ok(())
        }
    }
}

fn print_json<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("plain data serializes")
    );
}

fn abs(p: u64, x: &str, json: bool) -> Result<(), Failure> {
    let p = Prime::new(p).map_err(|e| e.at("p"))?;
    let x = parse_rational(x).map_err(|e| e.at("x"))?;
    let value = format_rational(&padic_abs(&x, p));
    if json {
        print_json(&json!({
            "p": p,
            "x": format_rational(&x),
            "valuation": vp(&x, p),
            "abs": value,
        }));
    } else {
        println!("{value}");
    }
    Ok(())
}

fn orbit(path: &Path, max_steps: Option<u64>, threshold: Option<&str>) -> Result<(), Failure> {
    let inst = parse_instance_file(path)?;
    let mut limits = OrbitLimits::defaults_for(inst.p());
    if let Some(n) = max_steps {
        limits.max_steps = n;
    }
    if let Some(t) = threshold {
        limits.divergence_threshold = parse_rational(t).map_err(|e| e.at("threshold"))?;
    }
    limits.validate()?;
    print_json(&run_orbit(&inst, &limits));
    Ok(())
}

fn predict(path: &Path, check: bool, json: bool) -> Result<(), Failure> {
    let inst: DucciInstance = parse_instance_file(path)?;
    let prediction = analyze(inst.matrix(), inst.p(), DEFAULT_MAX_ORDER).prediction;
    if !check {
        if json {
            print_json(&prediction);
        } else {
            println!("prediction: {}", prediction.claim);
            println!("class: {}", prediction.class);
            println!("clause: {}", prediction.clause);
        }
        return Ok(());
    }

    let id = path.display().to_string();
    let report = run_orbit(&inst, &OrbitLimits::defaults_for(inst.p()));
    let record = compare_prediction(
        &LabeledPrediction {
            instance_id: id.clone(),
            prediction,
        },
        &LabeledObservation {
            instance_id: id,
            mode: inst.mode(),
            report,
        },
    )?;
    if json {
        print_json(&record);
    } else {
        println!("prediction: {}", record.prediction.claim);
        println!("class: {}", record.prediction.class);
        println!("observed: {}", describe(&record.observed.outcome));
        println!("verdict: {}", verdict_str(record.verdict));
        if let Some(law) = record.norm_law {
            println!("diagonal norm law: {}", verdict_str(law));
        }
    }
    Ok(())
}

fn verdict_str(v: Verdict) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn describe(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Terminated { step } => format!("terminated at step {step}"),
        Outcome::Cycle { preperiod, period } => {
            format!("cycle, preperiod {preperiod}, period {period}")
        }
        Outcome::NormDiverged { step } => format!("norm above threshold at step {step}"),
        Outcome::NormVanished { step } => format!("norm below 1/threshold at step {step}"),
        Outcome::Unresolved { steps_run } => format!("unresolved after {steps_run} steps"),
    }
}

fn sweep(config: &Path, out: &Path, json: bool) -> Result<(), Failure> {
    let config = SweepConfig::from_file(config)?;
    let report = run_sweep(&config)?;
    report.write_to(out)?;
    if json {
        print_json(&json!({
            "out": out.display().to_string(),
            "records": report.records.len(),
            "summary": report.summary,
        }));
    } else {
        print!("{}", report.summary_csv());
        eprintln!(
            "wrote {} records to {}",
            report.records.len(),
            out.display()
        );
    }
    Ok(())
}

fn classical(seed: [u64; 4], trace: bool, json: bool) {
    let orbit = run_classical(seed, CLASSICAL_MAX_STEPS);
    let after_seed = orbit.states.get(1..).unwrap_or(&[]);
    if json {
        let mut value = json!({ "seed": seed, "outcome": orbit.outcome });
        if trace {
            value["trace"] = json!(after_seed.iter().take(TRACE_CAP).collect::<Vec<_>>());
            value["trace_elided"] = json!(after_seed.len().saturating_sub(TRACE_CAP));
        }
        print_json(&value);
        return;
    }
    if trace {
        for s in after_seed.iter().take(TRACE_CAP) {
            println!("{} {} {} {}", s[0], s[1], s[2], s[3]);
        }
        if after_seed.len() > TRACE_CAP {
            println!("... {} more steps elided", after_seed.len() - TRACE_CAP);
        }
    }
    println!("{}", describe(&orbit.outcome));
}
