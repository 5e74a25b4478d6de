//! Command-line harness: synthesize far-field data, run reconstructions and
//! check the solvers against their oracles.

pub mod config;
pub mod run;
pub mod svg;
pub mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use serde_json::Value;

use config::{parse_override, RunConfig};

/// Environment variable naming the root for relative output directories.
pub const OUTPUT_ROOT_VAR: &str = "OBLIQUE_OUTPUT_ROOT";

/// Bad configuration or input data, as opposed to a solver failure.
#[derive(Debug)]
pub struct Invalid(pub String);

impl Invalid {
    pub fn new(msg: impl Into<String>) -> Self {
        Invalid(msg.into())
    }
}

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

/// Validation checks that ran but did not pass.
#[derive(Debug)]
pub struct ChecksFailed(pub usize);

impl std::fmt::Display for ChecksFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} validation check(s) failed", self.0)
    }
}

impl std::error::Error for ChecksFailed {}

/// 1 for invalid input or failed checks, 2 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err
        .chain()
        .any(|e| e.downcast_ref::<Invalid>().is_some() || e.downcast_ref::<ChecksFailed>().is_some());
    if validation {
        1
    } else {
        2
    }
}

pub const EXPERIMENTS: [(&str, &str); 5] = [
    ("exp1_peanut_exact", include_str!("../../../configs/exp1_peanut_exact.json")),
    ("exp2_peanut_four", include_str!("../../../configs/exp2_peanut_four.json")),
    ("exp3_peanut_h1", include_str!("../../../configs/exp3_peanut_h1.json")),
    ("exp4_apple_exact", include_str!("../../../configs/exp4_apple_exact.json")),
    ("exp5_apple_multi", include_str!("../../../configs/exp5_apple_multi.json")),
];

/// Looks up a committed experiment by full name or by its `expN` prefix.
pub fn experiment(id: &str) -> Result<(&'static str, Value)> {
    let found = EXPERIMENTS
        .iter()
        .find(|(name, _)| *name == id || name.split('_').next() == Some(id));
    match found {
        Some((name, text)) => Ok((name, serde_json::from_str(text)?)),
        None => {
            let names: Vec<&str> = EXPERIMENTS.iter().map(|(n, _)| *n).collect();
            Err(Invalid::new(format!("unknown experiment `{id}`; known: {}", names.join(", "))).into())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "oblique", version, about = "Oblique-incidence scattering: direct solver, shape reconstruction, validation")]
pub struct Cli {
    /// Override a config key, e.g. `--set inverse.regularization.max_iter=5`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize far-field data, one CSV per illumination.
    Direct {
        #[arg(long)]
        config: PathBuf,
        /// Named variant from the config's `runs` list.
        #[arg(long)]
        run: Option<String>,
        /// Output directory (default: <output root>/<output_dir>[/<run>]/data).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the boundary from far-field data files.
    Invert {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        run: Option<String>,
        /// Data files in illumination order (default: the files `direct` writes).
        #[arg(long, num_args = 1..)]
        data: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat the configured geometry as unknown: no error metrics, no
        /// true curve in the plot.
        #[arg(long)]
        no_truth: bool,
    },
    /// Run the oracle and invariant checks.
    Validate {
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Test hook: use the wrong jump relation in the direct solver.
        #[arg(long)]
        flip_jump_sign: bool,
    },
    /// Synthesize data and invert for every run of a committed experiment.
    Reproduce {
        /// `exp1` .. `exp5` or the full experiment name.
        id: String,
        /// Only this named run (`base` for the base run).
        #[arg(long)]
        run: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the committed experiments.
    List,
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

fn run_dir(cfg: &RunConfig, label: Option<&str>, out: Option<&Path>) -> PathBuf {
    match out {
        Some(dir) => dir.to_path_buf(),
        None => {
            let dir = output_root().join(&cfg.output_dir);
            match label {
                Some(l) => dir.join(l),
                None => dir,
            }
        }
    }
}

fn echo_derived(cfg: &RunConfig) -> Result<()> {
    let d = run::derived(cfg)?;
    println!("k0 = {}, beta = {}, kappa0 = {}, kappa1 = {}", d.k0, d.beta, d.kappa0, d.kappa1);
    Ok(())
}

fn cmd_direct(cfg: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    echo_derived(cfg)?;
    let data = run::synthesize(cfg)?;
    let paths = run::write_data(dir, &data)?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(paths)
}

fn cmd_invert(cfg: &RunConfig, data: &[PathBuf], dir: &Path, with_truth: bool, label: &str) -> Result<run::Summary> {
    let data = run::read_data(data)?;
    let start = std::time::Instant::now();
    let outcome = run::invert(cfg, data, with_truth, label)?;
    run::write_outputs(dir, cfg, &outcome, with_truth)?;
    for s in &outcome.summary.history {
        let err = s.relative_l2_error.map(|e| format!("  error {e:.4}")).unwrap_or_default();
        println!(
            "step {:>2}  lambda {:.4}  misfit {:.4e}  update {:.2e}{err}",
            s.k, s.lambda, s.misfit, s.relative_update
        );
    }
    println!("outputs in {} ({:.1} s)", dir.display(), start.elapsed().as_secs_f64());
    if let Some(e) = outcome.failure {
        return Err(e.context(format!("partial trace kept in {}", dir.display())));
    }
    Ok(outcome.summary)
}

fn cmd_reproduce(id: &str, only: Option<&str>, out: Option<&Path>, overrides: &[(String, Value)]) -> Result<()> {
    let (name, base) = experiment(id)?;
    let mut labels: Vec<Option<String>> = vec![None];
    labels.extend(RunConfig::labels(&base).into_iter().map(Some));
    if let Some(only) = only {
        labels.retain(|l| l.as_deref().unwrap_or("base") == only);
        if labels.is_empty() {
            bail!(Invalid::new(format!("experiment {name} has no run `{only}`")));
        }
    }
    let mut rows = Vec::new();
    for label in labels {
        let cfg = RunConfig::resolve(&base, label.as_deref(), overrides)?;
        let label = label.unwrap_or_else(|| "base".into());
        println!("== {name} / {label}: {}", cfg.description);
        let dir = match out {
            Some(o) => o.join(&label),
            None => output_root().join(&cfg.output_dir).join(&label),
        };
        let paths = cmd_direct(&cfg, &dir.join("data"))?;
        let summary = cmd_invert(&cfg, &paths, &dir, true, &label)?;
        rows.push((label, summary));
    }
    println!("\n{:<10} {:>5} {:>10} {:>10}", "run", "its", "rel L2", "sup");
    for (label, s) in rows {
        let e = s.error.expect("truth is known in reproduce");
        println!("{label:<10} {:>5} {:>10.4} {:>10.4}", s.iterations, e.relative_l2, e.sup);
    }
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    let overrides: Vec<(String, Value)> = cli
        .overrides
        .iter()
        .map(|s| parse_override(s).map_err(|e| Invalid::new(e.to_string()).into()))
        .collect::<Result<_>>()?;
    match cli.command {
        Command::Direct { config, run, out } => {
            let base = RunConfig::load(&config)?;
            let cfg = RunConfig::resolve(&base, run.as_deref(), &overrides)?;
            let dir = out.unwrap_or_else(|| run_dir(&cfg, run.as_deref(), None).join("data"));
            cmd_direct(&cfg, &dir).map(|_| ())
        }
        Command::Invert { config, run, data, out, no_truth } => {
            let base = RunConfig::load(&config)?;
            let cfg = RunConfig::resolve(&base, run.as_deref(), &overrides)?;
            let dir = run_dir(&cfg, run.as_deref(), out.as_deref());
            let data = if data.is_empty() {
                let data_dir = run_dir(&cfg, run.as_deref(), None).join("data");
                (0..cfg.illuminations.count).map(|l| data_dir.join(run::data_file_name(l))).collect()
            } else {
                data
            };
            let label = run.unwrap_or_else(|| "base".into());
            cmd_invert(&cfg, &data, &dir, !no_truth, &label).map(|_| ())
        }
        Command::Validate { n, flip_jump_sign } => {
            let checks = validate::run_checks(validate::ValidateOptions { n, flip_jump_sign });
            print!("{}", validate::format_report(&checks));
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                bail!(ChecksFailed(failed));
            }
            Ok(())
        }
        Command::Reproduce { id, run, out } => cmd_reproduce(&id, run.as_deref(), out.as_deref(), &overrides),
        Command::List => {
            for (name, text) in EXPERIMENTS {
                let v: Value = serde_json::from_str(text)?;
                let desc = v.get("description").and_then(Value::as_str).unwrap_or("");
                println!("{name:<20} {desc}");
            }
            Ok(())
        }
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
