//! Randomized experiments: densities sampled from the zero-mean `L_p` unit
//! ball, verified in parallel, aggregated and written as CSV rows and a JSON
//! summary. Coefficient files are JSON `{a0, cos, sin}`.
//!
//! Sample `i` draws from ChaCha8 seeded with `seed` on stream `i`, so results
//! do not depend on the order in which samples are processed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bestapprox::solve_lp;
use crate::error::{Error, Result};
use crate::lebesgue::{verify_with_approx, BoundReport};
use crate::params::{n0, ClassParams, Index};
use crate::scalar::Real;
use crate::trig::{lp_norm, TrigPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ExperimentConfig<T: Real> {
    pub params: ClassParams<T>,
    /// Further phases checked on the same samples; `E_n` is shared across them.
    #[serde(default)]
    pub extra_betas: Vec<T>,
    pub n: u64,
    pub samples: usize,
    pub degree_cap: usize,
    pub seed: u64,
    pub tol: T,
    /// Sup-norm grid size for the left side.
    pub grid_size: usize,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl<T: Real> ExperimentConfig<T> {
    /// Defaults: tolerance `10⁻³`, grid `next_pow2(16·degree_cap)`, no output file.
    pub fn new(params: ClassParams<T>, n: u64, samples: usize, degree_cap: usize, seed: u64) -> Self {
        Self {
            params,
            extra_betas: Vec::new(),
            n,
            samples,
            degree_cap,
            seed,
            tol: T::lit(1e-3),
            grid_size: (16 * degree_cap).max(16).next_power_of_two(),
            output: None,
            format: OutputFormat::Json,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validated()?;
        if self.samples == 0 {
            return Err(Error::domain("samples must be >= 1"));
        }
        if self.n == 0 || self.degree_cap == 0 {
            return Err(Error::domain("n and degree_cap must be >= 1"));
        }
        if !self.grid_size.is_power_of_two() || self.grid_size < 8 * self.degree_cap {
            return Err(Error::domain(format!(
                "grid size {} must be a power of two >= 8·degree_cap = {}",
                self.grid_size,
                8 * self.degree_cap
            )));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::domain("tolerance must be positive"));
        }
        Ok(())
    }

    fn betas(&self) -> Vec<T> {
        std::iter::once(self.params.beta).chain(self.extra_betas.iter().copied()).collect()
    }
}

/// Generator for sample `index`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Zero-mean polynomial with coefficients `N(0,1)/k`, scaled to `‖φ‖_p = 1`.
pub fn sample_unit_ball<T: Real, R: Rng + ?Sized>(p: Index<T>, degree_cap: usize, rng: &mut R) -> Result<TrigPoly<T>> {
    if degree_cap == 0 {
        return Err(Error::domain("degree_cap must be >= 1"));
    }
    let mut draw = |k: usize| -> T {
        let z: f64 = rng.sample(StandardNormal);
        T::lit(z / k as f64)
    };
    let mut phi = TrigPoly::zero(degree_cap);
    for k in 1..=degree_cap {
        phi.cos[k - 1] = draw(k);
        phi.sin[k - 1] = draw(k);
    }
    let norm = lp_norm(&phi, p, T::lit(1e-13))?;
    Ok(phi.scaled(norm.recip()))
}

/// One row per (sample, phase).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampleOutcome<T: Real> {
    pub index: usize,
    pub report: BoundReport<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub index: usize,
    pub beta: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Summary<T: Real> {
    pub config: ExperimentConfig<T>,
    /// `n ≥ n0(α, r, p)`.
    pub in_regime: bool,
    pub checked: usize,
    pub pass_rate: f64,
    pub failures: Vec<SampleFailure>,
    /// Samples whose solver raised an error, kept apart from inequality failures.
    pub errors: Vec<SampleFailure>,
    pub max_implied_gamma: Option<f64>,
    /// Extremes of `(lhs + radius)/rhs_full` over non-degenerate rows.
    pub min_ratio: Option<f64>,
    pub max_ratio: Option<f64>,
    pub degenerate: usize,
    pub en_unconverged: usize,
    pub runtime_seconds: f64,
}

impl<T: Real> Summary<T> {
    /// An in-regime inequality failure or a solver error.
    pub fn is_failure(&self) -> bool {
        (self.in_regime && !self.failures.is_empty()) || !self.errors.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport<T: Real> {
    pub rows: Vec<SampleOutcome<T>>,
    pub summary: Summary<T>,
}

pub fn run_experiment<T: Real>(config: &ExperimentConfig<T>) -> Result<ExperimentReport<T>> {
    config.validate()?;
    let start = Instant::now();
    let betas = config.betas();
    let per_sample: Vec<(usize, Result<Vec<BoundReport<T>>>)> = (0..config.samples)
        .into_par_iter()
        .map(|i| (i, run_sample(config, &betas, i)))
        .collect();

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (index, outcome) in per_sample {
        match outcome {
            Ok(reports) => rows.extend(reports.into_iter().map(|report| SampleOutcome { index, report })),
            Err(e) => errors.push(SampleFailure {
                index,
                beta: config.params.beta.as_f64(),
                reason: e.to_string(),
            }),
        }
    }
    let failures: Vec<SampleFailure> = rows
        .iter()
        .filter(|o| !o.report.pass)
        .map(|o| SampleFailure {
            index: o.index,
            beta: o.report.params.beta.as_f64(),
            reason: format!(
                "lhs {:e} + {:e} exceeds rhs {:e}",
                o.report.lhs.value().as_f64(),
                o.report.lhs_radius.value().as_f64(),
                o.report.rhs_full.value().as_f64()
            ),
        })
        .collect();
    let live: Vec<&BoundReport<T>> = rows.iter().map(|o| &o.report).filter(|r| !r.degenerate).collect();
    let ratios: Vec<f64> = live
        .iter()
        .filter(|r| !r.rhs_full.is_zero())
        .map(|r| r.lhs.add(r.lhs_radius).ratio(&r.rhs_full).as_f64())
        .collect();
    let fmax = |xs: &[f64]| xs.iter().copied().reduce(f64::max);
    let gammas: Vec<f64> = live.iter().filter_map(|r| r.implied_gamma).map(|g| g.as_f64()).collect();
    let checked = rows.len();
    let summary = Summary {
        config: config.clone(),
        in_regime: n0(&config.params).is_ok_and(|m| config.n >= m),
        checked,
        pass_rate: if checked == 0 { 0.0 } else { (checked - failures.len()) as f64 / checked as f64 },
        failures,
        errors,
        max_implied_gamma: fmax(&gammas),
        min_ratio: ratios.iter().copied().reduce(f64::min),
        max_ratio: fmax(&ratios),
        degenerate: rows.iter().filter(|o| o.report.degenerate).count(),
        en_unconverged: rows.iter().filter(|o| !o.report.en_converged).count(),
        runtime_seconds: start.elapsed().as_secs_f64(),
    };
    let report = ExperimentReport { rows, summary };
    if let Some(path) = &config.output {
        match config.format {
            OutputFormat::Csv => write_csv(path, &report.rows)?,
            OutputFormat::Json => write_summary(path, &report.summary)?,
        }
    }
    Ok(report)
}

fn run_sample<T: Real>(config: &ExperimentConfig<T>, betas: &[T], index: usize) -> Result<Vec<BoundReport<T>>> {
    let mut rng = sample_rng(config.seed, index as u64);
    let phi = sample_unit_ball(config.params.p, config.degree_cap, &mut rng)?;
    let en = solve_lp(&phi, config.n as usize, config.params.p, config.tol, None)?;
    betas
        .iter()
        .map(|&beta| {
            verify_with_approx(
                &phi,
                &config.params.with_beta(beta),
                config.n,
                en.clone(),
                config.tol,
                config.grid_size,
            )
        })
        .collect()
}

pub const CSV_HEADER: [&str; 13] = [
    "alpha",
    "r",
    "beta",
    "p",
    "n",
    "lhs",
    "lhs_radius",
    "en_lower",
    "en_upper",
    "rhs_main",
    "rhs_full",
    "implied_gamma",
    "pass",
];

/// Rows in sample order. Left and right sides are plain values and underflow
/// to zero once `αn^r` exceeds the exponent range.
pub fn write_csv_to<T: Real, W: Write>(writer: W, rows: &[SampleOutcome<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for o in rows {
        let r = &o.report;
        let gamma = r.implied_gamma.map(|g| g.to_string()).unwrap_or_default();
        w.write_record([
            r.params.alpha.to_string(),
            r.params.r.to_string(),
            r.params.beta.to_string(),
            r.params.p.to_string(),
            r.n.to_string(),
            r.lhs.value().to_string(),
            r.lhs_radius.value().to_string(),
            r.en.lower.to_string(),
            r.en.upper.to_string(),
            r.rhs_main.value().to_string(),
            r.rhs_full.value().to_string(),
            gamma,
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv<T: Real>(path: &Path, rows: &[SampleOutcome<T>]) -> Result<()> {
    write_csv_to(BufWriter::new(create(path)?), rows)
}

pub fn write_summary<T: Real>(path: &Path, summary: &Summary<T>) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer_pretty(&mut w, summary)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `{a0, cos, sin}`; numbers use the shortest decimal form that reads
/// back to the same value.
pub fn write_coefficients<T: Real>(path: &Path, poly: &TrigPoly<T>) -> Result<()> {
    let mut w = BufWriter::new(create(path)?);
    serde_json::to_writer(&mut w, poly)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_coefficients<T: Real>(path: &Path) -> Result<TrigPoly<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    let poly: TrigPoly<T> = serde_json::from_str(&text)?;
    TrigPoly::new(poly.a0, poly.cos, poly.sin)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(samples: usize) -> ExperimentConfig<f64> {
        let params = ClassParams::new(1.0, 0.5, 0.0, Index::Finite(2.0)).unwrap();
        ExperimentConfig::new(params, 8, samples, 16, 7)
    }

    #[test]
    fn samples_are_normalized_and_deterministic() {
        for p in [Index::Finite(1.0), Index::Finite(1.5), Index::Finite(3.0)] {
            let a: TrigPoly<f64> = sample_unit_ball(p, 40, &mut sample_rng(3, 5)).unwrap();
            let b: TrigPoly<f64> = sample_unit_ball(p, 40, &mut sample_rng(3, 5)).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.a0, 0.0);
            assert!((lp_norm(&a, p, 1e-13).unwrap() - 1.0).abs() < 1e-9);
            let c: TrigPoly<f64> = sample_unit_ball(p, 40, &mut sample_rng(3, 6)).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = config(1);
        assert!(c.validate().is_ok());
        c.grid_size = 100;
        assert!(c.validate().is_err());
        let mut c = config(0);
        assert!(c.validate().is_err());
        c.samples = 1;
        c.n = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn degenerate_samples_pass() {
        let mut c = config(3);
        c.n = 40;
        let rep = run_experiment(&c).unwrap();
        assert_eq!(rep.summary.degenerate, 3);
        assert_eq!(rep.summary.pass_rate, 1.0);
    }

    #[test]
    fn csv_is_reproducible() {
        let c = config(4);
        let render = || {
            let rep = run_experiment(&c).unwrap();
            let mut buf = Vec::new();
            write_csv_to(&mut buf, &rep.rows).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let first = render();
        assert_eq!(first, render());
        assert_eq!(first.lines().next().unwrap(), CSV_HEADER.join(","));
        assert_eq!(first.lines().count(), 5);
    }
}
