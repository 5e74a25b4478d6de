//! Run configuration: one JSON file per experiment, with optional named
//! variants that override individual keys of the base run.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use oblique_core::geometry::{grid, Shape, TrigPolynomial};
use oblique_core::inverse::{illumination_directions, RegularizationConfig, Variant};
use oblique_core::params::{derive_params, PhysicalParams, Physics};

use crate::Invalid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Illuminations {
    pub count: usize,
    /// Directions are `2π(l + offset)/count`, `l = 1..count`.
    #[serde(default)]
    pub offset: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    pub delta1: f64,
    pub delta2: f64,
    /// Illumination `l` (from 0) uses seed `seed + l`.
    pub seed: u64,
}

/// A constant radius or explicit Fourier coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialGuess {
    Radius(f64),
    Trig(TrigPolynomial),
}

impl InitialGuess {
    pub fn to_trig(&self) -> Result<TrigPolynomial> {
        Ok(match self {
            InitialGuess::Radius(r) => TrigPolynomial::constant(*r),
            InitialGuess::Trig(p) => TrigPolynomial::new(p.a.clone(), p.b.clone())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseSettings {
    #[serde(default)]
    pub regularization: RegularizationConfig,
    pub r0: InitialGuess,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    /// Quadrature parameter for data synthesis (`2n` nodes).
    pub n_forward: usize,
    pub n_inverse: usize,
    /// Number of equidistant far-field observation angles.
    pub n_obs: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { n_forward: 64, n_inverse: 32, n_obs: 64 }
    }
}

/// A variant of the base run: a label and key overrides in `--set` syntax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedRun {
    pub label: String,
    #[serde(default)]
    pub set: BTreeMap<String, Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub description: String,
    pub geometry: Shape,
    pub physics: Physics,
    pub illuminations: Illuminations,
    #[serde(default)]
    pub noise: Noise,
    pub inverse: InverseSettings,
    #[serde(default)]
    pub grids: Grids,
    /// Permits `n_forward < 2·n_inverse`, i.e. data from (nearly) the same
    /// discretization the inversion uses.
    #[serde(default)]
    pub allow_inverse_crime: bool,
    pub output_dir: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub runs: Vec<NamedRun>,
}

/// Sets `path` (dot separated) in a JSON tree, creating missing objects.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("malformed key `{path}`");
    }
    let mut node = root;
    for key in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| anyhow!("`{path}`: `{key}` is not inside an object"))?;
        node = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node.as_object_mut().ok_or_else(|| anyhow!("`{path}` does not name an object field"))?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Parses `key=value`; the value is read as JSON when possible and as a
/// plain string otherwise.
pub fn parse_override(text: &str) -> Result<(String, Value)> {
    let (k, v) = text.split_once('=').ok_or_else(|| anyhow!("override `{text}` is not key=value"))?;
    let value = serde_json::from_str(v.trim()).unwrap_or_else(|_| Value::String(v.trim().to_string()));
    Ok((k.trim().to_string(), value))
}

impl RunConfig {
    pub fn from_value(value: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Invalid::new(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Value> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Invalid::new(format!("reading {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Invalid::new(format!("{}: {e}", path.display())).into())
    }

    /// Resolves the base run (`label = None`) or a named variant, then
    /// applies the command-line overrides on top.
    pub fn resolve(base: &Value, label: Option<&str>, overrides: &[(String, Value)]) -> Result<Self> {
        let mut value = base.clone();
        let runs = value.as_object_mut().and_then(|o| o.remove("runs"));
        if let Some(label) = label {
            let runs: Vec<NamedRun> = match runs {
                Some(r) => serde_json::from_value(r).map_err(|e| Invalid::new(format!("runs: {e}")))?,
                None => Vec::new(),
            };
            let run = runs
                .iter()
                .find(|r| r.label == label)
                .ok_or_else(|| Invalid::new(format!("no run labelled `{label}`")))?;
            for (k, v) in &run.set {
                set_path(&mut value, k, v.clone()).map_err(|e| Invalid::new(e.to_string()))?;
            }
        }
        for (k, v) in overrides {
            set_path(&mut value, k, v.clone()).map_err(|e| Invalid::new(e.to_string()))?;
        }
        Self::from_value(value)
    }

    /// Labels of the named variants in `base`, without validating them.
    pub fn labels(base: &Value) -> Vec<String> {
        base.get("runs")
            .and_then(Value::as_array)
            .map(|runs| {
                runs.iter().filter_map(|r| r.get("label")?.as_str().map(String::from)).collect()
            })
            .unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| -> Result<()> { Err(Invalid::new(msg).into()) };
        self.geometry.validate().map_err(|e| Invalid::new(format!("geometry: {e}")))?;
        derive_params(&self.physics, 0.0).map_err(|e| Invalid::new(format!("physics: {e}")))?;
        if self.illuminations.count == 0 {
            return bad("illuminations.count must be at least 1".into());
        }
        if !self.illuminations.offset.is_finite() {
            return bad("illuminations.offset must be finite".into());
        }
        for (name, d) in [("delta1", self.noise.delta1), ("delta2", self.noise.delta2)] {
            if !(d >= 0.0) || !d.is_finite() {
                return bad(format!("noise.{name} = {d} must be a finite number >= 0"));
            }
        }
        let reg = &self.inverse.regularization;
        reg.validate().map_err(|e| Invalid::new(format!("inverse.regularization: {e}")))?;
        let g = &self.grids;
        if g.n_inverse < 4 || g.n_forward < 4 || g.n_obs == 0 {
            return bad(format!("grids too small: {g:?}"));
        }
        if reg.m >= g.n_inverse {
            return bad(format!("update degree m = {} needs n_inverse > m", reg.m));
        }
        if g.n_forward < 2 * g.n_inverse && !self.allow_inverse_crime {
            return bad(format!(
                "n_forward = {} < 2·n_inverse = {}: data would come from nearly the inversion's own \
                 discretization; set allow_inverse_crime to run anyway",
                g.n_forward,
                2 * g.n_inverse
            ));
        }
        let r0 = self.inverse.r0.to_trig().map_err(|e| Invalid::new(format!("inverse.r0: {e}")))?;
        if grid(g.n_inverse).iter().any(|&t| !(r0.eval(t) > 0.0)) {
            return bad("inverse.r0 must be positive on the inverse grid".into());
        }
        if self.output_dir.trim().is_empty() {
            return bad("output_dir must not be empty".into());
        }
        Ok(())
    }

    pub fn params(&self) -> Result<PhysicalParams> {
        Ok(derive_params(&self.physics, 0.0)?)
    }

    pub fn directions(&self) -> Vec<f64> {
        illumination_directions(self.illuminations.count, self.illuminations.offset)
    }
}
