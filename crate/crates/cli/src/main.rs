//! `tfl`: command line driver.
//!
//! Every subcommand reads an optional JSON config (whose `experiment` tag
//! must match the subcommand) and applies the flags on top. On success a
//! one-line JSON summary goes to stdout; on failure a one-line JSON error
//! `{"error": <kind>, "message": <text>}` goes to stderr and the exit code
//! is nonzero.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use tfl_core::harness::config::{
    AllenCahnExperiment, ApplyConfig, CoeffsConfig, ConvergenceConfig, ExperimentConfig, GrayScottExperiment,
    Overrides, PoissonConfig, Study,
};
use tfl_core::harness::{
    operator_convergence, poisson_convergence, read_snapshot, write_coeffs_csv, write_csv, write_snapshot,
    PoissonProblem, SnapshotMeta, TestFunctionSpec,
};
use tfl_core::operator::{GridFunction, TemperedOperator};
use tfl_core::solver::{run_allen_cahn, run_gray_scott, solve_poisson_with, Snapshot, StepOptions};
use tfl_core::stencil::{cached_stencil, SchemeParams};
use tfl_core::Error;

#[derive(Parser)]
#[command(name = "tfl", version, about = "Finite differences for the tempered fractional Laplacian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump stencil coefficients as CSV.
    Coeffs(Common),
    /// Apply the discrete operator to a snapshot or a test function.
    Apply(Common),
    /// Solve the fractional Poisson problem.
    Poisson(Common),
    /// Run a convergence study and write the error table.
    Convergence(Common),
    /// Kissing-bubbles Allen–Cahn run.
    AllenCahn(Common),
    /// Gray–Scott pattern formation run.
    GrayScott(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Number of intervals along the longest side (reference grid for `convergence`).
    #[arg(long)]
    n: Option<usize>,
    /// Output file, or directory for time-dependent runs.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Coeffs(c) => ("coeffs", c),
            Command::Apply(c) => ("apply", c),
            Command::Poisson(c) => ("poisson", c),
            Command::Convergence(c) => ("convergence", c),
            Command::AllenCahn(c) => ("allen-cahn", c),
            Command::GrayScott(c) => ("gray-scott", c),
        }
    }
}

fn load_config(name: &str, common: &Common) -> tfl_core::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default_for(name)?,
    };
    if cfg.name() != name {
        return Err(Error::Format(format!(
            "config describes experiment `{}`, subcommand is `{name}`",
            cfg.name()
        )));
    }
    cfg.apply_overrides(&Overrides {
        alpha: common.alpha,
        lambda: common.lambda,
        gamma: common.gamma,
        n: common.n,
        out: common.out.clone(),
    });
    Ok(cfg)
}

fn run(cli: &Cli) -> tfl_core::Result<Option<Value>> {
    let (name, common) = cli.command.parts();
    match load_config(name, common)? {
        ExperimentConfig::Coeffs(c) => coeffs(&c),
        ExperimentConfig::Apply(c) => apply(&c).map(Some),
        ExperimentConfig::Poisson(c) => poisson(&c).map(Some),
        ExperimentConfig::Convergence(c) => convergence(&c).map(Some),
        ExperimentConfig::AllenCahn(c) => allen_cahn(&c).map(Some),
        ExperimentConfig::GrayScott(c) => gray_scott(&c).map(Some),
    }
}

fn coeffs(c: &CoeffsConfig) -> tfl_core::Result<Option<Value>> {
    let stencil = cached_stencil(&c.grid.params()?)?;
    match &c.out {
        Some(path) => {
            let file = io::BufWriter::new(fs::File::create(path)?);
            write_coeffs_csv(&stencil, file)?;
            Ok(Some(json!({ "experiment": "coeffs", "out": path, "entries": stencil.as_slice().len() })))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_coeffs_csv(&stencil, &mut lock)?;
            lock.flush()?;
            Ok(None)
        }
    }
}

/// Grid parameters implied by snapshot metadata and the configured exponents.
fn params_from_meta(meta: &SnapshotMeta, c: &ApplyConfig) -> tfl_core::Result<SchemeParams> {
    let length = meta.domain.iter().map(|[a, b]| b - a).fold(0.0, f64::max);
    let n = (length / meta.h).round() as usize;
    let p = SchemeParams::new(meta.d, c.grid.alpha, c.grid.lambda, meta.domain.clone(), n)?.with_gamma(c.grid.gamma)?;
    if p.interior_dims() != meta.dims {
        return Err(Error::DimensionMismatch {
            expected: p.interior_dims(),
            found: meta.dims.clone(),
        });
    }
    Ok(p)
}

fn apply(c: &ApplyConfig) -> tfl_core::Result<Value> {
    let (params, t, names, fields) = match &c.input {
        Some(path) => {
            let (meta, fields) = read_snapshot(path)?;
            (params_from_meta(&meta, c)?, meta.t, meta.fields, fields)
        }
        None => {
            let p = c.grid.params()?;
            let u = TestFunctionSpec::new(c.p, p.d)?.sample(&p);
            (p, 0.0, vec!["u".to_string()], vec![u])
        }
    };
    let op = TemperedOperator::new(&params)?;
    let images = fields.iter().map(|f| op.apply(f)).collect::<tfl_core::Result<Vec<_>>>()?;
    write_snapshot(&images, &SnapshotMeta::new(&params, t, names), &c.out)?;
    Ok(json!({ "experiment": "apply", "out": c.out, "dims": params.interior_dims() }))
}

fn poisson(c: &PoissonConfig) -> tfl_core::Result<Value> {
    let params = c.grid.params()?;
    let op = TemperedOperator::new(&params)?;
    let (f, exact) = match c.source {
        PoissonProblem::Constant { value, .. } => (GridFunction::sample(&params, |_| value), None),
        PoissonProblem::Manufactured { p } => {
            let u = TestFunctionSpec::new(p, params.d)?.sample(&params);
            (op.apply(&u)?, Some(u))
        }
    };
    let (u, stats) = solve_poisson_with(&op, &f, &c.cg)?;
    write_snapshot(std::slice::from_ref(&u), &SnapshotMeta::new(&params, 0.0, vec!["u".into()]), &c.out)?;
    let err_inf = exact.map(|e| {
        e.values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    });
    Ok(json!({
        "experiment": "poisson",
        "out": c.out,
        "iterations": stats.iterations,
        "residual": stats.residual,
        "err_inf": err_inf,
    }))
}

fn convergence(c: &ConvergenceConfig) -> tfl_core::Result<Value> {
    let table = match c.study {
        Study::Operator { p } => operator_convergence(&TestFunctionSpec::new(p, c.sweep.d)?, &c.sweep)?,
        Study::Poisson { problem } => poisson_convergence(&problem, &c.sweep, &c.cg)?,
    };
    write_csv(&table, &c.out)?;
    let fits: Vec<Value> = c
        .sweep
        .alphas
        .iter()
        .map(|&alpha| {
            let (inf, l2) = table.fitted_orders(alpha, c.sweep.lambda).unzip();
            json!({ "alpha": alpha, "order_inf": inf, "order_l2": l2 })
        })
        .collect();
    Ok(json!({ "experiment": "convergence", "out": c.out, "fits": fits }))
}

fn write_series(dir: &Path, params: &SchemeParams, snapshots: &[Snapshot]) -> tfl_core::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = dir.join(format!("snapshot_{i:04}.bin"));
            write_snapshot(&s.fields, &SnapshotMeta::new(params, s.t, s.names.clone()), &path)?;
            Ok(path)
        })
        .collect()
}

fn allen_cahn(c: &AllenCahnExperiment) -> tfl_core::Result<Value> {
    let cfg = c.resolve()?;
    let snapshots = run_allen_cahn(&cfg, &StepOptions::default())?;
    let files = write_series(&c.out, &cfg.params, &snapshots)?;
    Ok(json!({ "experiment": "allen-cahn", "out": c.out, "snapshots": files }))
}

fn gray_scott(c: &GrayScottExperiment) -> tfl_core::Result<Value> {
    let cfg = c.resolve()?;
    let snapshots = run_gray_scott(&cfg, &StepOptions::default())?;
    let files = write_series(&c.out, &cfg.params, &snapshots)?;
    Ok(json!({ "experiment": "gray-scott", "out": c.out, "snapshots": files }))
}

fn error_line(kind: &str, message: &str) {
    eprintln!("{}", json!({ "error": kind, "message": message }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            error_line("usage", e.to_string().trim());
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(Some(summary)) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            error_line(e.kind(), &e.to_string());
            ExitCode::FAILURE
        }
    }
}
