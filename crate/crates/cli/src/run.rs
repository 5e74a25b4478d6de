//! The direct and inverse pipelines behind the `direct`, `invert` and
//! `reproduce` verbs.

use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use oblique_core::direct::{add_noise, equidistant_angles, synthesize_far_field, FarFieldPattern};
use oblique_core::geometry::{BoundaryCurve, TrigPolynomial};
use oblique_core::inverse::{
    radial_error, reconstruct, IlluminationSet, InverseProblem, ReconstructionHistory, Variant, ERROR_SAMPLES,
};
use oblique_core::io::{read_far_field, write_curve, write_far_field, write_trace, FarFieldMeta};

use crate::config::RunConfig;
use crate::svg::overlay;
use crate::Invalid;

/// Far-field data for one illumination.
#[derive(Debug, Clone)]
pub struct DataSet {
    pub meta: FarFieldMeta,
    pub pattern: FarFieldPattern,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Derived {
    pub k0: f64,
    pub beta: f64,
    pub kappa0: f64,
    pub kappa1: f64,
}

pub fn derived(cfg: &RunConfig) -> Result<Derived> {
    let p = cfg.params()?;
    Ok(Derived { k0: p.k0, beta: p.beta, kappa0: p.kappa0, kappa1: p.kappa1 })
}

/// Solves the direct problem on the fine grid for every illumination and
/// adds the configured noise.
pub fn synthesize(cfg: &RunConfig) -> Result<Vec<DataSet>> {
    let params = cfg.params()?;
    let curve = BoundaryCurve::from_radial(&cfg.geometry, cfg.grids.n_forward)
        .context("discretizing the true boundary")?;
    let angles = equidistant_angles(cfg.grids.n_obs);
    cfg.directions()
        .iter()
        .enumerate()
        .map(|(l, &phi)| {
            let p = params.with_phi(phi);
            let exact = synthesize_far_field(&curve, &p, &angles)
                .with_context(|| format!("direct solve for illumination {}", l + 1))?;
            let seed = cfg.noise.seed + l as u64;
            let pattern = add_noise(&exact, cfg.noise.delta1, cfg.noise.delta2, seed)?;
            let meta = FarFieldMeta {
                omega: p.omega,
                theta: p.theta,
                phi,
                delta1: cfg.noise.delta1,
                delta2: cfg.noise.delta2,
                seed,
                n: cfg.grids.n_forward,
            };
            Ok(DataSet { meta, pattern })
        })
        .collect()
}

pub fn data_file_name(l: usize) -> String {
    format!("farfield_{:02}.csv", l + 1)
}

pub fn write_data(dir: &Path, data: &[DataSet]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    data.iter()
        .enumerate()
        .map(|(l, d)| {
            let path = dir.join(data_file_name(l));
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_far_field(file, &d.meta, &d.pattern)?;
            Ok(path)
        })
        .collect()
}

pub fn read_data(paths: &[PathBuf]) -> Result<Vec<DataSet>> {
    paths
        .iter()
        .map(|path| {
            let file = File::open(path).map_err(|e| Invalid::new(format!("opening {}: {e}", path.display())))?;
            let (meta, pattern) = read_far_field(BufReader::new(file))
                .map_err(|e| Invalid::new(format!("{}: {e}", path.display())))?;
            Ok(DataSet { meta, pattern })
        })
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Data must match the configured physics and directions, and come from a
/// finer discretization than the inversion unless explicitly allowed.
pub fn check_data(cfg: &RunConfig, data: &[DataSet]) -> Result<()> {
    let directions = cfg.directions();
    if data.len() != directions.len() {
        return Err(Invalid::new(format!(
            "{} data files for {} configured illuminations",
            data.len(),
            directions.len()
        ))
        .into());
    }
    for (l, (d, &phi)) in data.iter().zip(&directions).enumerate() {
        let m = &d.meta;
        let which = l + 1;
        if !close(m.omega, cfg.physics.omega) || !close(m.theta, cfg.physics.theta) {
            return Err(Invalid::new(format!(
                "data set {which}: omega/theta ({}, {}) differ from the config",
                m.omega, m.theta
            ))
            .into());
        }
        if !close(m.phi, phi) {
            return Err(Invalid::new(format!(
                "data set {which}: incident angle {} differs from configured direction {phi}",
                m.phi
            ))
            .into());
        }
        if m.n < 2 * cfg.grids.n_inverse && !cfg.allow_inverse_crime {
            return Err(Invalid::new(format!(
                "data set {which} was synthesized with n = {} < 2·n_inverse = {}",
                m.n,
                2 * cfg.grids.n_inverse
            ))
            .into());
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct StepSummary {
    pub k: usize,
    pub lambda: f64,
    pub misfit: f64,
    pub relative_update: f64,
    pub halvings: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_l2_error: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ErrorMetrics {
    pub relative_l2: f64,
    pub sup: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub label: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub variant: Variant,
    pub derived: Derived,
    pub directions: Vec<f64>,
    pub n_inverse: usize,
    pub iterations: usize,
    pub converged: bool,
    pub history: Vec<StepSummary>,
    pub reconstruction: TrigPolynomial,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorMetrics>,
}

pub struct InversionOutcome {
    pub summary: Summary,
    pub history: ReconstructionHistory,
    /// The reconstruction error, if the run failed part way.
    pub failure: Option<anyhow::Error>,
}

pub fn invert(cfg: &RunConfig, data: Vec<DataSet>, with_truth: bool, label: &str) -> Result<InversionOutcome> {
    check_data(cfg, &data)?;
    let directions = cfg.directions();
    let patterns: Vec<FarFieldPattern> = data.into_iter().map(|d| d.pattern).collect();
    let problem = InverseProblem {
        params: cfg.params()?,
        illuminations: IlluminationSet::new(directions.clone(), patterns)
            .map_err(|e| Invalid::new(e.to_string()))?,
        n: cfg.grids.n_inverse,
    };
    let r0 = cfg.inverse.r0.to_trig()?;
    let result = reconstruct(&problem, &cfg.inverse.regularization, &r0, cfg.inverse.variant);
    let (history, converged, failure) = match result {
        Ok(state) => (state.history, state.converged, None),
        Err(f) => {
            let history = f.history.clone();
            (history, false, Some(anyhow::Error::new(f)))
        }
    };
    let truth = with_truth.then_some(&cfg.geometry);
    let steps = history
        .steps
        .iter()
        .map(|s| StepSummary {
            k: s.k,
            lambda: s.lambda,
            misfit: s.misfit,
            relative_update: s.relative_update,
            halvings: s.halvings,
            relative_l2_error: truth.map(|t| radial_error(&s.radial, t, ERROR_SAMPLES).0),
        })
        .collect();
    let current = history.current().clone();
    let error = truth.map(|t| {
        let (relative_l2, sup) = radial_error(&current, t, ERROR_SAMPLES);
        ErrorMetrics { relative_l2, sup, samples: ERROR_SAMPLES }
    });
    let summary = Summary {
        label: label.to_string(),
        status: if failure.is_some() { "failed" } else { "ok" },
        failure: failure.as_ref().map(|e| format!("{e:#}")),
        variant: cfg.inverse.variant,
        derived: derived(cfg)?,
        directions,
        n_inverse: cfg.grids.n_inverse,
        iterations: history.steps.len(),
        converged,
        history: steps,
        reconstruction: current,
        error,
    };
    Ok(InversionOutcome { summary, history, failure })
}

/// Writes `summary.json`, `trace.csv`, `reconstruction.csv` and `overlay.svg`.
pub fn write_outputs(dir: &Path, cfg: &RunConfig, outcome: &InversionOutcome, with_truth: bool) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut json = serde_json::to_string_pretty(&outcome.summary)?;
    json.push('\n');
    fs::write(dir.join("summary.json"), json)?;
    write_trace(File::create(dir.join("trace.csv"))?, &outcome.history, ERROR_SAMPLES)?;
    let current = outcome.history.current();
    // the curve file is informational, so a degenerate iterate is skipped
    if let Ok(curve) = BoundaryCurve::from_radial(current, cfg.grids.n_inverse) {
        write_curve(File::create(dir.join("reconstruction.csv"))?, &curve)?;
    }
    let truth: Option<&dyn oblique_core::geometry::RadialFunction> =
        if with_truth { Some(&cfg.geometry) } else { None };
    let svg = overlay(&outcome.history.initial, truth, current, &cfg.directions());
    fs::write(dir.join("overlay.svg"), svg)?;
    Ok(())
}
