use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use poisson_lebesgue::bestapprox::solve_lp;
use poisson_lebesgue::harness::{read_coefficients, run_experiment, write_coefficients, write_csv_to, ExperimentConfig, OutputFormat};
use poisson_lebesgue::kernel::{kernel_norm, kernel_norm_asymptotic, KernelSpec};
use poisson_lebesgue::lebesgue::{
    check_is_estimate, check_norm_asymptotics, gamma_bound, rhs_theorem1, sharpness_probe, verify_inequality,
};
use poisson_lebesgue::params::{n0, threshold, ClassParams, Index};
use poisson_lebesgue::specfun::{gauss_2f1_unit, i_s};
use poisson_lebesgue::{Error, ScaledValue};
use serde_json::{json, Value};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DOMAIN: u8 = 3;
const EXIT_ACCURACY: u8 = 4;
const EXIT_IO: u8 = 5;

/// Lebesgue-type inequalities for Fourier sums on generalized Poisson integrals.
#[derive(Parser)]
#[command(name = "poisson-lebesgue", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct ClassArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Integrability index: a number >= 1 or "inf".
    #[arg(long, default_value = "1")]
    p: String,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest n satisfying the theorem's threshold condition.
    N0 {
        #[command(flatten)]
        class: ClassArgs,
    },
    /// Gauss hypergeometric function at unit argument.
    Hyp2f1 {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, allow_hyphen_values = true)]
        c: f64,
    },
    /// I_s(v), the L_s[0, v] norm of (1 + t²)^(-1/2).
    IsIntegral {
        #[arg(long)]
        s: String,
        #[arg(long)]
        v: f64,
    },
    /// (1/π)‖P^(n)‖_s with its asymptotic main term and bracket.
    KernelNorm {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Best approximation of a polynomial read from a coefficient file.
    BestApprox {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        /// Also write the best polynomial found to this coefficient file.
        #[arg(long)]
        argmin_out: Option<PathBuf>,
    },
    /// Right-hand side of the Lebesgue-type inequality.
    Rhs {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 1.0)]
        en: f64,
        /// Remainder constant; defaults to the bound (14π)².
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
    },
    /// Verify the inequality on one density file or on random samples.
    Verify {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        n: u64,
        /// Density coefficient file; without it random samples are drawn.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 256)]
        degree_cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
        /// Sup-norm grid size (power of two >= 8·degree_cap).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Ratio achieved by the dual extremal density against the Hölder bound.
    Sharpness {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x0: f64,
    },
    /// Remainder constants of the kernel-norm and I_s asymptotics.
    CheckAsymptotics {
        #[command(flatten)]
        class: ClassArgs,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        s: String,
    },
}

enum Failure {
    Lib(Error),
    Failed(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", &e.render().to_string());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Failed(summary)) => {
            eprintln!("{}", json!({"error": "inequality failed", "context": summary}));
            ExitCode::from(EXIT_FAILED)
        }
        Err(Failure::Lib(e)) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(match e {
                Error::Accuracy { .. } | Error::Unconverged { .. } => EXIT_ACCURACY,
                Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_IO,
                _ => EXIT_DOMAIN,
            })
        }
    }
}

fn report_error(kind: &str, context: &str) {
    eprintln!("{}", json!({"error": kind, "context": context.trim_end()}));
}

fn index(s: &str) -> Result<Index<f64>, Error> {
    s.parse::<Index<f64>>()?.validated()
}

fn class(args: &ClassArgs) -> Result<ClassParams<f64>, Error> {
    ClassParams::new(args.alpha, args.r, args.beta, index(&args.p)?)
}

fn scaled_json(v: &ScaledValue<f64>) -> Value {
    json!({"log_scale": v.log_scale, "mantissa": v.mantissa, "value": v.value()})
}

fn run(cli: Cli) -> Outcome {
    let out = &cli.output;
    match cli.command {
        Command::N0 { class: c } => {
            let params = class(&c)?;
            let n = n0(&params)?;
            emit(
                out,
                json!({"alpha": params.alpha, "r": params.r, "p": params.p.to_string(), "threshold": threshold(params.p)?, "n0": n}),
            )
        }
        Command::Hyp2f1 { a, b, c } => emit(out, json!({"a": a, "b": b, "c": c, "value": gauss_2f1_unit(a, b, c)?})),
        Command::IsIntegral { s, v } => {
            let s = index(&s)?;
            emit(out, json!({"s": s.to_string(), "v": v, "value": i_s(s, v)?}))
        }
        Command::KernelNorm { class: c, n, s, tol } => {
            let params = class(&c)?;
            let s = index(&s)?;
            let spec = KernelSpec::new(params, n, 1e-17)?;
            let norm = kernel_norm(&spec, s, tol)?;
            let asym = kernel_norm_asymptotic(&spec, s)?;
            let ls = spec.log_scale();
            emit(
                out,
                json!({
                    "n": n,
                    "s": s.to_string(),
                    "truncation": spec.trunc_k,
                    "log_scale": ls,
                    "mantissa": norm.at_scale(ls),
                    "main": asym.main.at_scale(ls),
                    "bracket": asym.bracket.at_scale(ls),
                    "implied_delta": norm.sub(asym.main).ratio(&asym.bracket),
                }),
            )
        }
        Command::BestApprox {
            input,
            n,
            p,
            tol,
            argmin_out,
        } => {
            let f = read_coefficients::<f64>(&input)?;
            let res = solve_lp(&f, n, index(&p)?, tol, None)?;
            if let Some(path) = argmin_out {
                write_coefficients(&path, &res.argmin)?;
            }
            let gap = res.gap();
            emit(out, json!({"n": n, "p": p, "upper": res.upper, "lower": res.lower, "gap": gap, "iterations": res.iterations}))?;
            if gap > 10.0 * tol {
                return Err(Error::Unconverged {
                    context: format!("best approximation gap {gap:e}"),
                    lower: res.lower,
                    upper: res.upper,
                }
                .into());
            }
            Ok(())
        }
        Command::Rhs { class: c, n, en, gamma } => {
            let params = class(&c)?;
            let gamma = gamma.unwrap_or_else(gamma_bound);
            let v = rhs_theorem1(&params, n, en, gamma)?;
            let mut record = scaled_json(&v);
            record["gamma"] = json!(gamma);
            record["n"] = json!(n);
            emit(out, record)
        }
        Command::Verify {
            class: c,
            n,
            input,
            samples,
            degree_cap,
            seed,
            tol,
            grid,
        } => {
            let params = class(&c)?;
            if let Some(path) = input {
                let phi = read_coefficients::<f64>(&path)?;
                let rep = verify_inequality(&phi, &params, n, tol)?;
                let record = json!({
                    "alpha": params.alpha, "r": params.r, "beta": params.beta, "p": params.p.to_string(), "n": n,
                    "lhs": rep.lhs.value(), "lhs_radius": rep.lhs_radius.value(),
                    "en_lower": rep.en.lower, "en_upper": rep.en.upper,
                    "rhs_main": rep.rhs_main.value(), "rhs_full": rep.rhs_full.value(),
                    "implied_gamma": rep.implied_gamma, "pass": rep.pass,
                });
                emit(out, record.clone())?;
                return if rep.pass { Ok(()) } else { Err(Failure::Failed(record)) };
            }
            let mut config = ExperimentConfig::new(params, n, samples, degree_cap, seed);
            config.tol = tol;
            if let Some(g) = grid {
                config.grid_size = g;
            }
            config.output = out.out.clone();
            config.format = match out.format {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            };
            let report = run_experiment(&config)?;
            if out.out.is_none() {
                let stdout = io::stdout();
                match out.format {
                    Format::Csv => write_csv_to(stdout.lock(), &report.rows)?,
                    Format::Json => {
                        let mut w = stdout.lock();
                        serde_json::to_writer_pretty(&mut w, &report.summary).map_err(Error::from)?;
                        writeln!(w).map_err(Error::from)?;
                    }
                }
            }
            if report.summary.is_failure() {
                return Err(Failure::Failed(json!({
                    "pass_rate": report.summary.pass_rate,
                    "failures": report.summary.failures.len(),
                    "errors": report.summary.errors.len(),
                })));
            }
            Ok(())
        }
        Command::Sharpness { class: c, n, x0 } => {
            let params = class(&c)?;
            let ratio = sharpness_probe(&params, n, x0)?;
            emit(out, json!({"n": n, "p": params.p.to_string(), "x0": x0, "ratio": ratio}))
        }
        Command::CheckAsymptotics { class: c, n, s } => {
            let params = class(&c)?;
            let s = index(&s)?;
            let norm = check_norm_asymptotics(&params, n, s)?;
            let mut record = json!({
                "n": n,
                "s": s.to_string(),
                "implied_delta": norm.implied_delta,
                "delta_bound": gamma_bound::<f64>(),
                "in_regime": norm.in_regime,
            });
            if let Index::Finite(sv) = s {
                if sv > 1.0 {
                    let is = check_is_estimate(&params, n, sv)?;
                    record["i_s"] = json!(is.i_s_computed);
                    record["f_term"] = json!(is.f_term);
                    record["implied_theta"] = json!(is.implied_theta);
                }
            }
            emit(out, record)
        }
    }
}

/// Writes one JSON object, or a header and a row for CSV.
fn emit(args: &OutputArgs, record: Value) -> Outcome {
    let mut sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(|e| {
            Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?)),
        None => Box::new(io::stdout().lock()),
    };
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&record).map_err(Error::from)?,
        Format::Csv => {
            let obj = record.as_object().cloned().unwrap_or_default();
            let cell = |v: &Value| match v {
                Value::String(s) => s.clone(),
                Value::Null => String::new(),
                other => other.to_string(),
            };
            let header: Vec<&str> = obj.keys().map(String::as_str).collect();
            let row: Vec<String> = obj.values().map(cell).collect();
            format!("{}\n{}", header.join(","), row.join(","))
        }
    };
    writeln!(sink, "{text}").map_err(Error::from)?;
    sink.flush().map_err(Error::from)?;
    Ok(())
}
