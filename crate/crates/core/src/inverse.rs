//! Shape reconstruction from far-field data.
//!
//! The scattered fields are represented indirectly by single layers with
//! densities `ψ_e, ψ_h` outside and double layers with `φ_e, φ_h` inside.
//! Each step solves the well-posed boundary subsystem for the densities on
//! the current curve, then linearizes the far-field equation in the radial
//! function and solves it with Tikhonov regularization.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::direct::{incident_trace, l2_norm, FarFieldPattern, IncidentTrace};
use crate::error::{Error, Result};
use crate::geometry::{trig_basis_matrix, trig_diff_matrix, BoundaryCurve, RadialFunction, TrigPolynomial};
use crate::linalg::{conjugate_gradient, to_complex, Factored};
use crate::operators::{
    assemble_farfield, assemble_layer_operators, farfield_constant, tangential_derivative_matrix,
    LayerOperators,
};
use crate::params::PhysicalParams;
use crate::{CMatrix, Complex64, RMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Parametrized densities `ζ_e = ψ_e∘z`, `ξ_h = φ_h∘z`, `ζ_h = ψ_h∘z`,
/// `ξ_e = φ_e∘z`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseDensities {
    pub zeta_e: Vec<Complex64>,
    pub xi_h: Vec<Complex64>,
    pub zeta_h: Vec<Complex64>,
    pub xi_e: Vec<Complex64>,
}

impl InverseDensities {
    pub fn combined(&self) -> Vec<Complex64> {
        self.zeta_e.iter().zip(&self.zeta_h).map(|(a, b)| a + b).collect()
    }
}

fn c(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

fn identity(len: usize) -> CMatrix {
    CMatrix::identity(len, len)
}

fn place(target: &mut CMatrix, row: usize, col: usize, block: &CMatrix) {
    let len = block.nrows();
    let mut view = target.view_mut((row * len, col * len), (len, len));
    view += block;
}

/// `I + C` for the unknown ordering `(ψ_e, φ_h, ψ_h, φ_e)`.
pub fn subsystem_matrix(
    params: &PhysicalParams,
    exterior: &LayerOperators,
    interior: &LayerOperators,
) -> CMatrix {
    let len = exterior.s.nrows();
    let [b0, b1] = params.beta_t;
    let [e0, e1] = params.eps_t;
    let [m0, m1] = params.mu_t;
    let w = params.omega;
    let id = identity(len);
    let single = &id - &exterior.ns * c(2.0);
    let double = &id - &interior.d * c(2.0);
    let nd1 = &interior.nd * c(2.0);

    let mut m = CMatrix::zeros(4 * len, 4 * len);
    place(&mut m, 0, 0, &single);
    place(&mut m, 0, 2, &(&exterior.ts * c(2.0 * (b0 - b1) / (w * m0))));
    place(&mut m, 0, 3, &nd1);
    place(&mut m, 1, 1, &double);
    place(&mut m, 1, 2, &(&exterior.s * c(2.0 * m1 / m0)));
    place(&mut m, 2, 0, &(&exterior.ts * c(-2.0 * (b0 - b1) / (w * e0))));
    place(&mut m, 2, 1, &nd1);
    place(&mut m, 2, 2, &single);
    place(&mut m, 3, 0, &(&exterior.s * c(2.0 * e1 / e0)));
    place(&mut m, 3, 3, &double);
    m
}

/// `g = (2ε̃₀∂ₙe, 0, (2/ω)(β₀−β₁)∂_τe, −2ε̃₁e)` for the incident trace `e`.
pub fn subsystem_rhs(params: &PhysicalParams, trace: &IncidentTrace) -> Vec<Complex64> {
    let [b0, b1] = params.beta_t;
    let [e0, e1] = params.eps_t;
    let w = params.omega;
    let len = trace.e3inc.len();
    let mut g = Vec::with_capacity(4 * len);
    g.extend(trace.dn_e3inc.iter().map(|v| v * (2.0 * e0)));
    g.extend(std::iter::repeat_n(Complex64::default(), len));
    g.extend(trace.dtau_e3inc.iter().map(|v| v * (2.0 * (b0 - b1) / w)));
    g.extend(trace.e3inc.iter().map(|v| v * (-2.0 * e1)));
    g
}

pub fn assemble_subsystem(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    trace: &IncidentTrace,
) -> Result<(CMatrix, Vec<Complex64>)> {
    let exterior = assemble_layer_operators(curve, params.kappa0)?;
    let interior = assemble_layer_operators(curve, params.kappa1)?;
    Ok((subsystem_matrix(params, &exterior, &interior), subsystem_rhs(params, trace)))
}

/// The multiplier `T` of the transmission-condition system and its inverse,
/// with `∂_τ` realized as `diag(1/|z'|)·Q`.
pub fn multiplier_matrices(curve: &BoundaryCurve, params: &PhysicalParams) -> Result<(CMatrix, CMatrix)> {
    let len = curve.len();
    let dtau = tangential_derivative_matrix(curve)?;
    let [_, b1] = params.beta_t;
    let [_, e1] = params.eps_t;
    let [_, m1] = params.mu_t;
    let w = params.omega;
    let id = identity(len);
    let mut t = CMatrix::zeros(4 * len, 4 * len);
    place(&mut t, 0, 0, &(&id * c(w / 2.0)));
    place(&mut t, 0, 1, &(&dtau * c(b1 / (2.0 * m1))));
    place(&mut t, 1, 1, &(&id * c(-1.0 / (2.0 * m1))));
    place(&mut t, 2, 2, &(&id * c(w / 2.0)));
    place(&mut t, 2, 3, &(&dtau * c(-b1 / (2.0 * e1))));
    place(&mut t, 3, 3, &(&id * c(-1.0 / (2.0 * e1))));
    let mut inv = CMatrix::zeros(4 * len, 4 * len);
    place(&mut inv, 0, 0, &(&id * c(2.0 / w)));
    place(&mut inv, 0, 1, &(&dtau * c(2.0 * b1 / w)));
    place(&mut inv, 1, 1, &(&id * c(-2.0 * m1)));
    place(&mut inv, 2, 2, &(&id * c(2.0 / w)));
    place(&mut inv, 2, 3, &(&dtau * c(-2.0 * b1 / w)));
    place(&mut inv, 3, 3, &(&id * c(-2.0 * e1)));
    Ok((t, inv))
}

/// The operator `K` of the transmission-condition system `(T + K)φ = b`,
/// before multiplication by `T⁻¹`.
pub fn transmission_operator(
    params: &PhysicalParams,
    exterior: &LayerOperators,
    interior: &LayerOperators,
) -> CMatrix {
    let len = exterior.s.nrows();
    let [b0, b1] = params.beta_t;
    let [e0, e1] = params.eps_t;
    let [m0, m1] = params.mu_t;
    let w = params.omega;
    let mut k = CMatrix::zeros(4 * len, 4 * len);
    place(&mut k, 0, 0, &(&exterior.ns * c(-w)));
    place(&mut k, 0, 1, &(&interior.td * c(-b1 / m1)));
    place(&mut k, 0, 2, &(&exterior.ts * c(b0 / m0)));
    place(&mut k, 0, 3, &(&interior.nd * c(w)));
    place(&mut k, 1, 1, &(&interior.d * c(1.0 / m1)));
    place(&mut k, 1, 2, &(&exterior.s * c(-1.0 / m0)));
    place(&mut k, 2, 0, &(&exterior.ts * c(-b0 / e0)));
    place(&mut k, 2, 1, &(&interior.nd * c(w)));
    place(&mut k, 2, 2, &(&exterior.ns * c(-w)));
    place(&mut k, 2, 3, &(&interior.td * c(b1 / e1)));
    place(&mut k, 3, 0, &(&exterior.s * c(-1.0 / e0)));
    place(&mut k, 3, 3, &(&interior.d * c(1.0 / e1)));
    k
}

fn unpack(x: &[Complex64]) -> InverseDensities {
    let len = x.len() / 4;
    InverseDensities {
        zeta_e: x[..len].to_vec(),
        xi_h: x[len..2 * len].to_vec(),
        zeta_h: x[2 * len..3 * len].to_vec(),
        xi_e: x[3 * len..].to_vec(),
    }
}

pub fn solve_subsystem(matrix: &CMatrix, rhs: &[Complex64]) -> Result<InverseDensities> {
    if matrix.nrows() % 4 != 0 || rhs.len() != matrix.nrows() {
        return Err(Error::InvalidInput("subsystem dimensions are inconsistent".into()));
    }
    let factored = Factored::new(matrix, "density subsystem")?;
    Ok(unpack(&factored.solve(rhs)))
}

fn apply(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

/// Far fields of the indirect representation: `e∞ = S∞ζ_e/ε̃₀`,
/// `h∞ = S∞ζ_h/μ̃₀`.
pub fn indirect_far_field(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    densities: &InverseDensities,
    obs_angles: &[f64],
) -> Result<FarFieldPattern> {
    let far = assemble_farfield(curve, params.kappa0, obs_angles)?;
    let scale = |v: Vec<Complex64>, s: f64| v.into_iter().map(|z| z / s).collect();
    Ok(FarFieldPattern {
        obs_angles: obs_angles.to_vec(),
        e_inf: scale(apply(&far.s_inf, &densities.zeta_e), params.eps_t[0]),
        h_inf: scale(apply(&far.s_inf, &densities.zeta_h), params.mu_t[0]),
    })
}

/// `ε̃₀e∞ + μ̃₀h∞`
pub fn combined_data(params: &PhysicalParams, data: &FarFieldPattern) -> Vec<Complex64> {
    data.e_inf
        .iter()
        .zip(&data.h_inf)
        .map(|(e, h)| e * params.eps_t[0] + h * params.mu_t[0])
        .collect()
}

/// `ε̃₀e∞ + μ̃₀h∞ − S∞(ζ_e + ζ_h)` on the data's observation angles.
pub fn farfield_residual(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    densities: &InverseDensities,
    data: &FarFieldPattern,
) -> Result<Vec<Complex64>> {
    let far = assemble_farfield(curve, params.kappa0, &data.obs_angles)?;
    let model = apply(&far.s_inf, &densities.combined());
    Ok(combined_data(params, data).iter().zip(&model).map(|(f, m)| f - m).collect())
}

/// Discrete Fréchet derivative of `ζ ↦ S∞ζ` with respect to the radial
/// function, acting on node values of `q`: `M^{G₁} + M^{G₂}Q`.
pub fn frechet_kernel_matrix(
    curve: &BoundaryCurve,
    kappa0: f64,
    zeta: &[Complex64],
    obs_angles: &[f64],
) -> Result<CMatrix> {
    let len = curve.len();
    if zeta.len() != len {
        return Err(Error::InvalidInput(format!(
            "density has {} values on a {len}-point curve",
            zeta.len()
        )));
    }
    let weight = farfield_constant(kappa0) * (PI / curve.n as f64);
    let mut g1 = CMatrix::zeros(obs_angles.len(), len);
    let mut g2 = CMatrix::zeros(obs_angles.len(), len);
    for j in 0..len {
        let (s, cs) = curve.t[j].sin_cos();
        let [d1, d2] = curve.dz[j];
        let jac = curve.jac[j];
        let radial_stretch = (-d1 * s + d2 * cs) / jac;
        let derivative_stretch = (d1 * cs + d2 * s) / jac;
        for (k, &alpha) in obs_angles.iter().enumerate() {
            let (xs, xc) = alpha.sin_cos();
            let [y1, y2] = curve.z[j];
            let e = weight * Complex64::from_polar(1.0, -kappa0 * (xc * y1 + xs * y2)) * zeta[j];
            let dot = xc * cs + xs * s;
            g1[(k, j)] = e * (-I * kappa0 * dot * jac + radial_stretch);
            g2[(k, j)] = e * derivative_stretch;
        }
    }
    let q = to_complex(&trig_diff_matrix(curve.n)?.q);
    Ok(g1 + g2 * q)
}

/// Design matrix `A·T` of the linearized far-field equation for a
/// degree-`m` trigonometric update.
pub fn frechet_matrix(
    curve: &BoundaryCurve,
    kappa0: f64,
    zeta: &[Complex64],
    obs_angles: &[f64],
    m: usize,
) -> Result<CMatrix> {
    let a = frechet_kernel_matrix(curve, kappa0, zeta, obs_angles)?;
    Ok(a * to_complex(&trig_basis_matrix(curve.n, m)))
}

/// Diagonal Sobolev weights `(1 + k²)^p` for `(a_0..a_m, b_1..b_m)`.
pub fn sobolev_weights(m: usize, p: f64) -> Vec<f64> {
    let w = |k: usize| (1.0 + (k * k) as f64).powf(p);
    (0..=m).map(w).chain((1..=m).map(w)).collect()
}

/// Solves `(Tᵀ(ReAᵀReA + ImAᵀImA)T + λI_p)x = Tᵀ(ReAᵀRe b + ImAᵀIm b)` by
/// conjugate gradients.
pub fn tikhonov_step(
    a: &CMatrix,
    b: &[Complex64],
    basis: &RMatrix,
    lambda: f64,
    p: f64,
) -> Result<Vec<f64>> {
    if !(lambda > 0.0) || !(p >= 0.0) {
        return Err(Error::InvalidInput(format!("need λ > 0 and p ≥ 0, got λ = {lambda}, p = {p}")));
    }
    if a.nrows() != b.len() || a.ncols() != basis.nrows() || basis.ncols() % 2 != 1 {
        return Err(Error::InvalidInput("Tikhonov system dimensions are inconsistent".into()));
    }
    let (re_a, im_a) = (a.map(|z| z.re), a.map(|z| z.im));
    let re_b = DVector::from_iterator(b.len(), b.iter().map(|z| z.re));
    let im_b = DVector::from_iterator(b.len(), b.iter().map(|z| z.im));
    let (re_at, im_at) = (&re_a * basis, &im_a * basis);
    let mut normal: DMatrix<f64> = re_at.transpose() * &re_at + im_at.transpose() * &im_at;
    let m = basis.ncols() / 2;
    for (i, w) in sobolev_weights(m, p).into_iter().enumerate() {
        normal[(i, i)] += lambda * w;
    }
    let rhs = re_at.transpose() * re_b + im_at.transpose() * im_b;
    // 2m+1 iterations end CG only in exact arithmetic; in floating point a
    // few restarts on the residual equation recover the lost accuracy
    let rhs_norm = rhs.norm();
    let mut x = DVector::zeros(basis.ncols());
    let mut residual = rhs.clone();
    for cycle in 0..=CG_RESTARTS {
        let fail_tol = if cycle == CG_RESTARTS { CG_FAIL_TOL * rhs_norm / residual.norm() } else { f64::INFINITY };
        let tol = 1e-10 * rhs_norm / residual.norm();
        let outcome = conjugate_gradient(&normal, residual.as_slice(), tol, basis.ncols(), fail_tol)
            .map_err(|e| match e {
                Error::CgNotConverged { iterations, .. } => Error::CgNotConverged {
                    residual: (&rhs - &normal * &x).norm() / rhs_norm,
                    iterations: cycle * basis.ncols() + iterations,
                },
                other => other,
            })?;
        x += DVector::from_vec(outcome.x);
        residual = &rhs - &normal * &x;
        if residual.norm() <= 1e-10 * rhs_norm {
            break;
        }
    }
    Ok(x.as_slice().to_vec())
}

/// Restarts of CG after the first `2m+1` iterations.
pub const CG_RESTARTS: usize = 2;

/// CG runs ending above this relative residual are treated as failures.
pub const CG_FAIL_TOL: f64 = 1e-6;

/// Which linearized far-field equation drives the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One block `A'(ζ_e + ζ_h)` per illumination.
    Combined,
    /// Separate blocks for `ε̃₀e∞` and `μ̃₀h∞` per illumination.
    StackedEh,
    /// Same as `Combined`; kept as the name used for several illuminations.
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegularizationConfig {
    pub m: usize,
    pub p: f64,
    pub lambda0: f64,
    pub decay: f64,
    pub max_iter: usize,
    pub stop_tol: f64,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self { m: 3, p: 0.0, lambda0: 0.65, decay: 2.0 / 3.0, max_iter: 10, stop_tol: 1e-4 }
    }
}

impl RegularizationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidInput("update degree m must be at least 1".into()));
        }
        if !(self.p >= 0.0) {
            return Err(Error::InvalidInput(format!("penalty exponent p = {} must be ≥ 0", self.p)));
        }
        if !(self.lambda0 > 0.0) {
            return Err(Error::InvalidInput(format!("lambda0 = {} must be positive", self.lambda0)));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidInput(format!("decay = {} must lie in (0, 1)", self.decay)));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::InvalidInput("stop_tol must be ≥ 0".into()));
        }
        Ok(())
    }

    /// `λ_k = λ₀·decay^{k−1}`
    pub fn lambda(&self, k: usize) -> f64 {
        self.lambda0 * self.decay.powi(k as i32 - 1)
    }
}

/// Incident polar angles `2π(l + offset)/L`, `l = 1..L`.
pub fn illumination_directions(count: usize, offset: f64) -> Vec<f64> {
    (1..=count).map(|l| 2.0 * PI * (l as f64 + offset) / count as f64).collect()
}

/// Incident directions and the far-field data measured for each.
#[derive(Debug, Clone)]
pub struct IlluminationSet {
    pub directions: Vec<f64>,
    pub data: Vec<FarFieldPattern>,
}

impl IlluminationSet {
    pub fn new(directions: Vec<f64>, data: Vec<FarFieldPattern>) -> Result<Self> {
        if directions.is_empty() || directions.len() != data.len() {
            return Err(Error::Data(format!(
                "{} directions for {} data sets",
                directions.len(),
                data.len()
            )));
        }
        for d in &data {
            if d.obs_angles.is_empty()
                || d.e_inf.len() != d.obs_angles.len()
                || d.h_inf.len() != d.obs_angles.len()
            {
                return Err(Error::Data("far-field samples do not match their angles".into()));
            }
        }
        Ok(Self { directions, data })
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }
}

/// Everything the iteration needs besides the regularization settings.
#[derive(Debug, Clone)]
pub struct InverseProblem {
    /// Material and frequency; the incident angle `phi` is taken from the
    /// illumination set.
    pub params: PhysicalParams,
    pub illuminations: IlluminationSet,
    /// Half the number of quadrature nodes on the reconstructed curve.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub lambda: f64,
    /// `‖F − A₅(r^{(k−1)})‖/‖F‖` before the update.
    pub misfit: f64,
    /// `‖q‖/‖r^{(k)}‖` on the grid, after any halving.
    pub relative_update: f64,
    pub halvings: usize,
    pub radial: TrigPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionHistory {
    pub initial: TrigPolynomial,
    pub steps: Vec<StepRecord>,
}

impl ReconstructionHistory {
    pub fn current(&self) -> &TrigPolynomial {
        self.steps.last().map_or(&self.initial, |s| &s.radial)
    }

    pub fn misfits(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.misfit).collect()
    }
}

/// Final state of a completed run.
#[derive(Debug, Clone)]
pub struct ReconstructionState {
    pub k: usize,
    pub radial: TrigPolynomial,
    /// Densities from the last subsystem solve, one set per illumination.
    pub densities: Vec<InverseDensities>,
    pub lambda: f64,
    pub history: ReconstructionHistory,
    /// True when the relative update fell below `stop_tol`.
    pub converged: bool,
}

/// A run that stopped on an error, with the steps completed before it.
#[derive(Debug, thiserror::Error)]
#[error("reconstruction failed at step {step}")]
pub struct ReconstructionFailure {
    pub step: usize,
    #[source]
    pub source: Error,
    pub history: ReconstructionHistory,
}

/// Linearized system for one step: stacked design matrix and right-hand side.
struct Linearization {
    densities: Vec<InverseDensities>,
    design: CMatrix,
    rhs: Vec<Complex64>,
    data_norm: f64,
}

fn linearize(
    problem: &InverseProblem,
    curve: &BoundaryCurve,
    variant: Variant,
) -> Result<Linearization> {
    let params = &problem.params;
    let exterior = assemble_layer_operators(curve, params.kappa0)?;
    let interior = assemble_layer_operators(curve, params.kappa1)?;
    let factored = Factored::new(&subsystem_matrix(params, &exterior, &interior), "density subsystem")?;
    let ill = &problem.illuminations;

    let blocks: Vec<Result<(InverseDensities, Vec<(CMatrix, Vec<Complex64>, f64)>)>> = ill
        .directions
        .par_iter()
        .zip(&ill.data)
        .map(|(&phi, data)| {
            let p = params.with_phi(phi);
            let trace = incident_trace(curve, &p);
            let dens = unpack(&factored.solve(&subsystem_rhs(&p, &trace)));
            let far = assemble_farfield(curve, p.kappa0, &data.obs_angles)?;
            let block = |zeta: &[Complex64], target: Vec<Complex64>| -> Result<_> {
                let a = frechet_kernel_matrix(curve, p.kappa0, zeta, &data.obs_angles)?;
                let model = apply(&far.s_inf, zeta);
                let norm = l2_norm(&target);
                let rhs = target.iter().zip(&model).map(|(f, m)| f - m).collect();
                Ok((a, rhs, norm))
            };
            let rows = match variant {
                Variant::Combined | Variant::Multi => {
                    vec![block(&dens.combined(), combined_data(&p, data))?]
                }
                Variant::StackedEh => {
                    let fe = data.e_inf.iter().map(|e| e * p.eps_t[0]).collect();
                    let fh = data.h_inf.iter().map(|h| h * p.mu_t[0]).collect();
                    vec![block(&dens.zeta_e, fe)?, block(&dens.zeta_h, fh)?]
                }
            };
            Ok((dens, rows))
        })
        .collect();

    let mut densities = Vec::with_capacity(blocks.len());
    let mut mats = Vec::new();
    let mut rhs = Vec::new();
    let mut data_sq = 0.0;
    for b in blocks {
        let (dens, rows) = b?;
        densities.push(dens);
        for (a, r, norm) in rows {
            mats.push(a);
            rhs.extend(r);
            data_sq += norm * norm;
        }
    }
    let cols = curve.len();
    let total: usize = mats.iter().map(|m| m.nrows()).sum();
    let mut design = CMatrix::zeros(total, cols);
    let mut row = 0;
    for m in mats {
        design.view_mut((row, 0), (m.nrows(), cols)).copy_from(&m);
        row += m.nrows();
    }
    Ok(Linearization { densities, design, rhs, data_norm: data_sq.sqrt() })
}

fn grid_norm(values: impl Iterator<Item = f64>) -> f64 {
    values.map(|v| v * v).sum::<f64>().sqrt()
}

/// Runs the two-step iteration from `r0`.
pub fn reconstruct(
    problem: &InverseProblem,
    config: &RegularizationConfig,
    r0: &TrigPolynomial,
    variant: Variant,
) -> std::result::Result<ReconstructionState, ReconstructionFailure> {
    let mut history = ReconstructionHistory { initial: r0.clone(), steps: Vec::new() };
    let fail = |step, source, history| ReconstructionFailure { step, source, history };
    if let Err(e) = config.validate() {
        return Err(fail(0, e, history));
    }
    let n = problem.n;
    let grid_t = crate::geometry::grid(n.max(1));
    if n < 4 || 2 * config.m >= 2 * n {
        return Err(fail(0, Error::InvalidInput(format!("grid n = {n} too small for m = {}", config.m)), history));
    }
    if grid_t.iter().any(|&t| !(r0.eval(t) > 0.0)) {
        return Err(fail(0, Error::InvalidInput("initial radial function must be positive".into()), history));
    }
    let basis = trig_basis_matrix(n, config.m);
    let mut radial = r0.with_degree(r0.degree().max(config.m));
    let mut densities = Vec::new();
    let mut converged = false;
    let mut lambda = config.lambda0;

    for k in 1..=config.max_iter {
        lambda = config.lambda(k);
        let step = (|| -> Result<(Linearization, Vec<f64>)> {
            let curve = BoundaryCurve::from_radial(&radial, n)?;
            let lin = linearize(problem, &curve, variant)?;
            let x = tikhonov_step(&lin.design, &lin.rhs, &basis, lambda, config.p)?;
            Ok((lin, x))
        })();
        let (lin, x) = match step {
            Ok(v) => v,
            Err(e) => return Err(fail(k, e, history)),
        };
        let misfit = l2_norm(&lin.rhs) / lin.data_norm.max(f64::MIN_POSITIVE);
        densities = lin.densities;

        let mut q = match TrigPolynomial::from_coefficients(&x) {
            Ok(q) => q,
            Err(e) => return Err(fail(k, e, history)),
        };
        let mut halvings = 0;
        let mut next = radial.add(&q);
        while grid_t.iter().any(|&t| !(next.eval(t) > 0.0)) {
            if halvings == 10 {
                return Err(fail(k, Error::UnrecoverableRadius { iteration: k, halvings }, history));
            }
            halvings += 1;
            q = q.scale(0.5);
            next = radial.add(&q);
        }
        let relative_update = grid_norm(grid_t.iter().map(|&t| q.eval(t)))
            / grid_norm(grid_t.iter().map(|&t| next.eval(t)));
        radial = next;
        history.steps.push(StepRecord {
            k,
            lambda,
            misfit,
            relative_update,
            halvings,
            radial: radial.clone(),
        });
        if relative_update < config.stop_tol {
            converged = true;
            break;
        }
    }
    Ok(ReconstructionState {
        k: history.steps.len(),
        radial,
        densities,
        lambda,
        history,
        converged,
    })
}

/// Relative L² and sup distances between two radial functions on `samples`
/// equidistant points.
pub fn radial_error(
    reconstructed: &dyn RadialFunction,
    truth: &dyn RadialFunction,
    samples: usize,
) -> (f64, f64) {
    let mut diff_sq = 0.0;
    let mut ref_sq = 0.0;
    let mut sup = 0.0_f64;
    for j in 0..samples {
        let t = 2.0 * PI * j as f64 / samples as f64;
        let (a, b) = (reconstructed.radius(t), truth.radius(t));
        diff_sq += (a - b) * (a - b);
        ref_sq += b * b;
        sup = sup.max((a - b).abs());
    }
    ((diff_sq / ref_sq).sqrt(), sup)
}

/// Number of points used for reported radial errors.
pub const ERROR_SAMPLES: usize = 256;
