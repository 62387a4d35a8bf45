use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use powtrig::cf::{convergents, default_window, estimate_mu_window, expand};
use powtrig::liouville::{build_schedule, certify};
use powtrig::measure::mc_estimate;
use powtrig::polylog::{gelfond_asymptotic, polylog_sum};
use powtrig::report::{encode_shell_csv, shell_rows, SHELL_CSV_HEADER};
use powtrig::series::{partial_sum, partial_sum_accelerated, rate_certificate};
use powtrig::shells::{analyze_shells, GapFit};
use powtrig::{classify::classify_with, parse_interval, AngleForm, BoundedReal, Error, PrecisionBudget, SeriesKind};
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "powtrig", version, about = "Convergence of Σ sinⁿ(πnθ)/n^α and Σ cosⁿ(πnθ)/n^α")]
struct Cli {
    #[command(flatten)]
    precision: PrecisionArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct PrecisionArgs {
    /// Correct output digits requested from enclosures.
    #[arg(long, global = true, env = "POWTRIG_DIGITS", default_value_t = 12)]
    digits: u32,
    /// Override the working precision in decimal digits.
    #[arg(long, global = true)]
    working_digits: Option<u32>,
}

impl PrecisionArgs {
    fn budget(&self, n_max: u64) -> Result<PrecisionBudget, Error> {
        let base = PrecisionBudget::for_range(n_max, self.digits);
        match self.working_digits {
            Some(w) => PrecisionBudget::new(w, base.target_radius),
            None => Ok(base),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Kind {
    Sin,
    Cos,
}

impl From<Kind> for SeriesKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Sin => SeriesKind::Sin,
            Kind::Cos => SeriesKind::Cos,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Classify a rational angle by its residue bases.
    Classify {
        #[arg(long, value_enum, default_value = "sin")]
        kind: Kind,
        #[arg(long)]
        theta: String,
        /// Refuse p/q that is not in lowest terms.
        #[arg(long)]
        strict: bool,
    },
    /// Certified partial sum S_N.
    Sum {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long = "N")]
        n: u64,
        /// Sum rational θ period by period.
        #[arg(long)]
        accelerated: bool,
    },
    /// Check |S_{2qL}| ≥ (1/q) ln L - A_q for θ = p/q with 4 | q.
    RateCert {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long = "L")]
        l: u64,
    },
    /// Split the absolute series into shells and fit the gap exponent.
    Shells {
        #[arg(long)]
        theta: String,
        #[arg(long, value_enum, default_value = "cos")]
        kind: Kind,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 12)]
        smax: u32,
        /// Smallest shell used by the gap fit.
        #[arg(long, default_value_t = 4)]
        smin: u32,
        #[arg(long)]
        nmax: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Also write the JSON report (with the gap fit) to this file.
        #[arg(long)]
        json_out: Option<std::path::PathBuf>,
    },
    /// Continued fraction, convergents and irrationality measure estimate.
    Cf {
        #[arg(long)]
        theta: String,
        #[arg(long = "K", default_value_t = 30)]
        k: usize,
    },
    /// Nested dyadic schedule and divergence certificates.
    Liouville {
        #[arg(long)]
        interval: String,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Monte Carlo estimate of E Σ |sinⁿ(πnθ)| / n^α.
    Measure {
        #[arg(long)]
        alpha: f64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Polylogarithm sum against its z → 1 asymptotic.
    Gelfond {
        #[arg(long)]
        z: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
}

enum Output {
    Json(Value),
    Text(String),
}

fn fraction(theta: &str) -> Result<(i64, i64), Error> {
    let bad = || Error::InvalidAngle(format!("{theta:?}: expected p/q with 64-bit integers"));
    let (p, q) = theta.trim().split_once('/').ok_or_else(bad)?;
    Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
}

fn envelope(name: &str, config: &Value, precision: Value, report: impl Serialize) -> Value {
    json!({
        "schema": format!("powtrig.{name}.v{SCHEMA_VERSION}"),
        "tool": { "name": "powtrig", "version": env!("CARGO_PKG_VERSION") },
        "config": config,
        "precision": precision,
        "report": report,
    })
}

fn ball_json(b: &BoundedReal) -> Value {
    serde_json::to_value(b).unwrap_or(Value::Null)
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let mut config = serde_json::to_value(&cli.command).unwrap_or(Value::Null);
    config["precision"] = serde_json::to_value(&cli.precision).unwrap_or(Value::Null);
    let name = config["subcommand"].as_str().unwrap_or("unknown").to_string();
    let pa = &cli.precision;
    let out = match &cli.command {
        Command::Classify { kind, theta, strict } => {
            let (p, q) = fraction(theta)?;
            let r = classify_with((*kind).into(), p, q, !strict)?;
            envelope(&name, &config, json!({ "exact": true }), r)
        }
        Command::Sum { kind, theta, alpha, n, accelerated } => {
            let budget = pa.budget(*n)?;
            let r = if *accelerated {
                let (p, q) = fraction(theta)?;
                let (p, q, _) = powtrig::classify::normalize(p, q, true)?;
                partial_sum_accelerated((*kind).into(), p, q, *alpha, *n, &budget)?
            } else {
                partial_sum((*kind).into(), &AngleForm::parse(theta)?, *alpha, *n, &budget)?
            };
            envelope(&name, &config, json!({ "budget": budget, "bits": r.precision_bits }), r)
        }
        Command::RateCert { kind, theta, alpha, l } => {
            let (p, q) = fraction(theta)?;
            if q <= 0 {
                return Err(Error::Precondition(format!("denominator of {theta} must be positive")));
            }
            let r = rate_certificate((*kind).into(), p, q as u64, *alpha, *l)?;
            envelope(&name, &config, json!({ "exact_terms": true }), r)
        }
        Command::Shells { theta, kind, alpha, smax, smin, nmax, format, json_out } => {
            let t = AngleForm::parse(theta)?;
            let budget = pa.budget(*nmax)?;
            let a = analyze_shells(&t, (*kind).into(), *alpha, *smax, *nmax, &budget)?;
            let rows = shell_rows(&a);
            let fit = GapFit::from_analysis(&t, &a, *smin, *smax);
            let report = json!({
                "columns": SHELL_CSV_HEADER,
                "shells": rows,
                "deep_count": a.deep_count,
                "deep_sum": ball_json(&a.deep_sum),
                "total": ball_json(&a.total),
                "escalations": a.escalations,
                "gap_fit": fit.as_ref().ok(),
                "gap_fit_error": fit.as_ref().err().map(|e| json!({ "code": e.code(), "message": e.to_string() })),
            });
            let doc = envelope(&name, &config, json!({ "budget": budget }), report);
            if let Some(path) = json_out {
                let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))?;
                std::fs::write(path, text + "\n")
                    .map_err(|e| Error::Precondition(format!("cannot write {}: {e}", path.display())))?;
            }
            if *format == Format::Csv {
                return Ok(Output::Text(encode_shell_csv(&rows)?));
            }
            doc
        }
        Command::Cf { theta, k } => {
            let t = AngleForm::parse(theta)?;
            let e = expand(&t, *k)?;
            let c = convergents(&e);
            let mu = estimate_mu_window(&t, *k, default_window(*k));
            let report = json!({
                "expansion": e,
                "convergents": c,
                "mu": mu.as_ref().ok(),
                "mu_error": mu.as_ref().err().map(|e| json!({ "code": e.code(), "message": e.to_string() })),
            });
            envelope(&name, &config, json!({ "exact_rational_arithmetic": true }), report)
        }
        Command::Liouville { interval, depth } => {
            let (x1, x2) = parse_interval(interval)?;
            let s = build_schedule(&x1, &x2, *depth)?;
            let certs = (1..s.depth()).map(|k| certify(&s, k)).collect::<Result<Vec<_>, _>>()?;
            let report = json!({ "schedule": s, "certificates": certs });
            envelope(&name, &config, json!({ "exact_integer_arithmetic": true }), report)
        }
        Command::Measure { alpha, n, samples, seed } => {
            let r = mc_estimate(*alpha, *n, *samples, *seed)?;
            envelope(&name, &config, json!({ "theta_digits": r.theta_digits }), r)
        }
        Command::Gelfond { z, alpha, tolerance } => {
            let sum = polylog_sum(*z, *alpha, *tolerance)?;
            let asym = gelfond_asymptotic(&BoundedReal::from_f64(*z, 128), *alpha)?;
            let ratio = &sum / &asym;
            let report = json!({
                "polylog_sum": ball_json(&sum),
                "asymptotic": ball_json(&asym),
                "ratio": ball_json(&ratio),
            });
            envelope(&name, &config, json!({ "tolerance": tolerance, "asymptotic_bits": 128 }), report)
        }
    };
    Ok(Output::Json(out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match out {
                Output::Json(v) => serde_json::to_string_pretty(&v).unwrap_or_default() + "\n",
                Output::Text(t) => t,
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let doc = json!({
                "schema": format!("powtrig.error.v{SCHEMA_VERSION}"),
                "error": { "code": e.code(), "message": e.to_string() },
            });
            eprintln!("{}", serde_json::to_string_pretty(&doc).unwrap_or_default());
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}
