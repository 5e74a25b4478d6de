//! Direct transmission problem: Green's-formula representation with
//! densities `(φ₀, ψ₀)` on `Γ`, far-field patterns and synthetic noise.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::BoundaryCurve;
use crate::linalg::{relative_residual, Factored};
use crate::operators::{
    assemble_farfield, assemble_layer_operators, double_layer_potential, single_layer_potential,
    LayerOperators,
};
use crate::params::PhysicalParams;
use crate::{CMatrix, CVector, Complex64};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Trace of the incident axial electric field and its normal and tangential
/// derivatives. The incident axial magnetic field is identically zero.
#[derive(Debug, Clone)]
pub struct IncidentTrace {
    pub e3inc: Vec<Complex64>,
    pub dn_e3inc: Vec<Complex64>,
    pub dtau_e3inc: Vec<Complex64>,
}

impl IncidentTrace {
    pub fn zero(len: usize) -> Self {
        let z = vec![Complex64::default(); len];
        Self { e3inc: z.clone(), dn_e3inc: z.clone(), dtau_e3inc: z }
    }
}

/// `e₃ⁱⁿᶜ(x) = (1/√ε₀) sin θ e^{iκ₀(x cos φ + y sin φ)}` on `Γ`.
pub fn incident_trace(curve: &BoundaryCurve, params: &PhysicalParams) -> IncidentTrace {
    let amp = params.incident_amplitude();
    let dir = [params.phi.cos(), params.phi.sin()];
    let k = params.kappa0;
    let mut out = IncidentTrace::zero(curve.len());
    for j in 0..curve.len() {
        let [x, y] = curve.z[j];
        let e = Complex64::from_polar(amp, k * (x * dir[0] + y * dir[1]));
        let [n1, n2] = curve.normal[j];
        let [t1, t2] = curve.tangent[j];
        out.e3inc[j] = e;
        out.dn_e3inc[j] = I * k * (n1 * dir[0] + n2 * dir[1]) * e;
        out.dtau_e3inc[j] = I * k * (t1 * dir[0] + t2 * dir[1]) * e;
    }
    out
}

/// All densities of the Green's-formula representation.
#[derive(Debug, Clone)]
pub struct DirectDensities {
    pub phi0: Vec<Complex64>,
    pub psi0: Vec<Complex64>,
    pub phi1: Vec<Complex64>,
    pub psi1: Vec<Complex64>,
    pub eta0: Vec<Complex64>,
    pub eta1: Vec<Complex64>,
    pub xi0: Vec<Complex64>,
    pub xi1: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DirectOptions {
    /// Swap the ± in `(NS_j ± ½I)⁻¹`. Only for demonstrating that the
    /// oracle comparison detects the wrong jump relation.
    pub flip_jump_signs: bool,
}

/// The assembled `4n × 4n` system for `(φ₀, ψ₀)` and the maps needed to
/// recover the remaining densities.
pub struct DirectSystem {
    pub matrix: CMatrix,
    pub rhs: Vec<Complex64>,
    /// Dirichlet-to-Neumann maps `K₀`, `K₁`.
    pub dtn: [CMatrix; 2],
    pub factored: Factored,
}

fn shifted(m: &CMatrix, shift: f64) -> CMatrix {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        out[(i, i)] += shift;
    }
    out
}

fn mul(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (m * DVector::from_column_slice(v)).as_slice().to_vec()
}

pub fn assemble_direct_system(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    trace: &IncidentTrace,
    exterior: &LayerOperators,
    interior: &LayerOperators,
    options: DirectOptions,
) -> Result<DirectSystem> {
    let len = curve.len();
    // exterior trace uses +½, interior −½
    let sign = if options.flip_jump_signs { -0.5 } else { 0.5 };
    let k0 = Factored::new(&shifted(&exterior.ns, sign), "exterior Dirichlet-to-Neumann map")?
        .solve_matrix(&exterior.nd);
    let k1 = Factored::new(&shifted(&interior.ns, -sign), "interior Dirichlet-to-Neumann map")?
        .solve_matrix(&interior.nd);
    let two = Complex64::new(2.0, 0.0);
    let l0 = (&exterior.td - &exterior.ts * &k0) * two;
    let l1 = (&interior.td - &interior.ts * &k1) * two;

    let [b0, b1] = params.beta_t;
    let [e0, e1] = params.eps_t;
    let [m0, m1] = params.mu_t;
    let omega = params.omega;
    let s0 = &exterior.s;
    let s0k1 = s0 * &k1;
    let coupling = s0 * (&l1 * Complex64::new(b1, 0.0) + &l0 * Complex64::new(b0, 0.0));
    let d0_half = shifted(&exterior.d, -0.5);

    let a11 = &d0_half - &s0k1 * Complex64::new(e1 / e0, 0.0);
    let a12 = &coupling * Complex64::new(-1.0 / (e0 * omega), 0.0);
    let a21 = &coupling * Complex64::new(1.0 / (m0 * omega), 0.0);
    let a22 = &d0_half - &s0k1 * Complex64::new(m1 / m0, 0.0);

    let mut matrix = CMatrix::zeros(2 * len, 2 * len);
    matrix.view_mut((0, 0), (len, len)).copy_from(&a11);
    matrix.view_mut((0, len), (len, len)).copy_from(&a12);
    matrix.view_mut((len, 0), (len, len)).copy_from(&a21);
    matrix.view_mut((len, len), (len, len)).copy_from(&a22);

    let rhs1: Vec<Complex64> = mul(s0, &trace.dn_e3inc)
        .iter()
        .zip(mul(&s0k1, &trace.e3inc))
        .map(|(a, b)| -a + b * (e1 / e0))
        .collect();
    let l1e = mul(&l1, &trace.e3inc);
    let inner: Vec<Complex64> =
        trace.dtau_e3inc.iter().zip(&l1e).map(|(d, l)| d * b0 + l * b1).collect();
    let rhs2: Vec<Complex64> =
        mul(s0, &inner).into_iter().map(|v| v * (-1.0 / (m0 * omega))).collect();
    let rhs = rhs1.into_iter().chain(rhs2).collect();

    let factored = Factored::new(&matrix, "direct transmission system")?;
    Ok(DirectSystem { matrix, rhs, dtn: [k0, k1], factored })
}

/// Solves the direct system and fills in every derived density.
pub fn solve_direct(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    trace: &IncidentTrace,
) -> Result<DirectDensities> {
    let exterior = assemble_layer_operators(curve, params.kappa0)?;
    let interior = assemble_layer_operators(curve, params.kappa1)?;
    solve_direct_with(curve, params, trace, &exterior, &interior, DirectOptions::default())
}

pub fn solve_direct_with(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    trace: &IncidentTrace,
    exterior: &LayerOperators,
    interior: &LayerOperators,
    options: DirectOptions,
) -> Result<DirectDensities> {
    let system = assemble_direct_system(curve, params, trace, exterior, interior, options)?;
    let x = system.factored.solve(&system.rhs);
    Ok(densities_from_solution(&system, trace, &x))
}

fn densities_from_solution(
    system: &DirectSystem,
    trace: &IncidentTrace,
    x: &[Complex64],
) -> DirectDensities {
    let len = x.len() / 2;
    let phi0 = x[..len].to_vec();
    let psi0 = x[len..].to_vec();
    let phi1: Vec<Complex64> = phi0.iter().zip(&trace.e3inc).map(|(a, b)| a + b).collect();
    let psi1 = psi0.clone();
    let [k0, k1] = &system.dtn;
    DirectDensities {
        eta0: mul(k0, &phi0),
        eta1: mul(k1, &phi1),
        xi0: mul(k0, &psi0),
        xi1: mul(k1, &psi1),
        phi0,
        psi0,
        phi1,
        psi1,
    }
}

/// Relative residual of the assembled direct system at a given solution.
pub fn direct_residual(system: &DirectSystem, densities: &DirectDensities) -> f64 {
    let x: Vec<Complex64> = densities.phi0.iter().chain(&densities.psi0).copied().collect();
    relative_residual(&system.matrix, &x, &system.rhs)
}

/// Samples of `(e∞, h∞)` on the unit circle.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub obs_angles: Vec<f64>,
    pub e_inf: Vec<Complex64>,
    pub h_inf: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn zeros(obs_angles: &[f64]) -> Self {
        let z = vec![Complex64::default(); obs_angles.len()];
        Self { obs_angles: obs_angles.to_vec(), e_inf: z.clone(), h_inf: z }
    }
}

/// `e∞ = D∞φ₀ − S∞η₀`, `h∞ = D∞ψ₀ − S∞ξ₀`.
pub fn far_field(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    densities: &DirectDensities,
    obs_angles: &[f64],
) -> Result<FarFieldPattern> {
    let far = assemble_farfield(curve, params.kappa0, obs_angles)?;
    let combine = |phi: &[Complex64], eta: &[Complex64]| -> Vec<Complex64> {
        let a: CVector = &far.d_inf * DVector::from_column_slice(phi);
        let b: CVector = &far.s_inf * DVector::from_column_slice(eta);
        (a - b).as_slice().to_vec()
    };
    Ok(FarFieldPattern {
        obs_angles: obs_angles.to_vec(),
        e_inf: combine(&densities.phi0, &densities.eta0),
        h_inf: combine(&densities.psi0, &densities.xi0),
    })
}

/// Scattered fields `(e₃ˢᶜ, h₃ˢᶜ)` at exterior points away from `Γ`.
pub fn scattered_field(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    densities: &DirectDensities,
    points: &[[f64; 2]],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let k = params.kappa0;
    let field = |phi: &[Complex64], eta: &[Complex64]| -> Vec<Complex64> {
        let d = double_layer_potential(curve, k, phi, points);
        let s = single_layer_potential(curve, k, eta, points);
        d.iter().zip(&s).map(|(a, b)| a - b).collect()
    };
    (field(&densities.phi0, &densities.eta0), field(&densities.psi0, &densities.xi0))
}

/// `count` equidistant angles `2πk/count` on the unit circle.
pub fn equidistant_angles(count: usize) -> Vec<f64> {
    (0..count).map(|k| 2.0 * PI * k as f64 / count as f64).collect()
}

/// Direct solve followed by far-field evaluation.
pub fn synthesize_far_field(
    curve: &BoundaryCurve,
    params: &PhysicalParams,
    obs_angles: &[f64],
) -> Result<FarFieldPattern> {
    let trace = incident_trace(curve, params);
    let dens = solve_direct(curve, params, &trace)?;
    far_field(curve, params, &dens, obs_angles)
}

pub fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn perturb(values: &[Complex64], delta: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Complex64>> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!("noise level {delta} must be >= 0")));
    }
    let u: Vec<Complex64> = (0..values.len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    let scale = if delta == 0.0 { 0.0 } else { delta * l2_norm(values) / l2_norm(&u) };
    Ok(values.iter().zip(&u).map(|(v, u)| v + u * scale).collect())
}

/// `e∞_δ = e∞ + δ₁(‖e∞‖₂/‖u‖₂)u`, `h∞_δ = h∞ + δ₂(‖h∞‖₂/‖v‖₂)v` with
/// complex Gaussian `u`, `v` drawn from a seeded generator.
pub fn add_noise(
    pattern: &FarFieldPattern,
    delta_e: f64,
    delta_h: f64,
    seed: u64,
) -> Result<FarFieldPattern> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e_inf = perturb(&pattern.e_inf, delta_e, &mut rng)?;
    let h_inf = perturb(&pattern.h_inf, delta_h, &mut rng)?;
    Ok(FarFieldPattern { obs_angles: pattern.obs_angles.clone(), e_inf, h_inf })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{trig_diff_matrix, Shape};
    use crate::params::{derive_params, Physics};

    #[test]
    fn incident_trace_properties() {
        let p = derive_params(&Physics::benchmark(2.5), 0.0).unwrap();
        let circle = BoundaryCurve::from_radial(&Shape::Circle { radius: 1.0 }, 16).unwrap();
        let tr = incident_trace(&circle, &p);
        assert!((tr.dn_e3inc[0] - I * p.kappa0 * tr.e3inc[0]).norm() < 1e-14);

        let c = BoundaryCurve::from_radial(&Shape::Apple, 32).unwrap();
        let p = p.with_phi(0.7);
        let tr = incident_trace(&c, &p);
        let amp = p.incident_amplitude();
        for j in 0..c.len() {
            assert!((tr.e3inc[j].norm() - amp).abs() < 1e-14);
            let lhs = tr.dn_e3inc[j].norm_sqr() + tr.dtau_e3inc[j].norm_sqr();
            assert!((lhs - p.kappa0.powi(2) * amp * amp).abs() < 1e-12);
        }
        // spectral tangential derivative cross-check
        let q = trig_diff_matrix(c.n).unwrap();
        let re: Vec<f64> = tr.e3inc.iter().map(|z| z.re).collect();
        let im: Vec<f64> = tr.e3inc.iter().map(|z| z.im).collect();
        let (dre, dim) = (q.apply(&re), q.apply(&im));
        for j in 0..c.len() {
            let d = Complex64::new(dre[j], dim[j]) / c.jac[j];
            assert!((d - tr.dtau_e3inc[j]).norm() < 1e-7);
        }
    }

    #[test]
    fn solve_residual_and_normal_incidence_decoupling() {
        let mut ph = Physics::benchmark(2.0);
        ph.theta = std::f64::consts::FRAC_PI_2;
        let p = derive_params(&ph, 0.4).unwrap();
        let c = BoundaryCurve::from_radial(&Shape::Peanut, 32).unwrap();
        let tr = incident_trace(&c, &p);
        let ext = assemble_layer_operators(&c, p.kappa0).unwrap();
        let int = assemble_layer_operators(&c, p.kappa1).unwrap();
        let sys = assemble_direct_system(&c, &p, &tr, &ext, &int, DirectOptions::default()).unwrap();
        let dens = solve_direct_with(&c, &p, &tr, &ext, &int, DirectOptions::default()).unwrap();
        assert!(direct_residual(&sys, &dens) < 1e-12);
        let ff = far_field(&c, &p, &dens, &equidistant_angles(32)).unwrap();
        assert!(l2_norm(&ff.h_inf) < 1e-10 * l2_norm(&ff.e_inf));
    }

    #[test]
    fn zero_densities_give_zero_pattern() {
        let p = derive_params(&Physics::benchmark(2.5), 0.0).unwrap();
        let c = BoundaryCurve::from_radial(&Shape::Peanut, 8).unwrap();
        let z = vec![Complex64::default(); c.len()];
        let dens = DirectDensities {
            phi0: z.clone(),
            psi0: z.clone(),
            phi1: z.clone(),
            psi1: z.clone(),
            eta0: z.clone(),
            eta1: z.clone(),
            xi0: z.clone(),
            xi1: z,
        };
        let ff = far_field(&c, &p, &dens, &[0.0, 1.0]).unwrap();
        assert!(ff.e_inf.iter().chain(&ff.h_inf).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn noise_has_exact_relative_norm() {
        let angles = equidistant_angles(16);
        let pattern = FarFieldPattern {
            obs_angles: angles.clone(),
            e_inf: angles.iter().map(|a| Complex64::new(a.cos(), 0.2)).collect(),
            h_inf: angles.iter().map(|a| Complex64::new(0.1, a.sin())).collect(),
        };
        let same = add_noise(&pattern, 0.0, 0.0, 3).unwrap();
        assert_eq!(same, pattern);
        let a = add_noise(&pattern, 0.05, 0.03, 3).unwrap();
        let b = add_noise(&pattern, 0.05, 0.03, 4).unwrap();
        let rel = |x: &[Complex64], y: &[Complex64]| {
            let d: Vec<Complex64> = x.iter().zip(y).map(|(u, v)| u - v).collect();
            l2_norm(&d) / l2_norm(y)
        };
        assert!((rel(&a.e_inf, &pattern.e_inf) - 0.05).abs() < 1e-15);
        assert!((rel(&a.h_inf, &pattern.h_inf) - 0.03).abs() < 1e-15);
        assert!((rel(&b.e_inf, &pattern.e_inf) - 0.05).abs() < 1e-15);
        assert_ne!(a.e_inf, b.e_inf);
        assert_eq!(a, add_noise(&pattern, 0.05, 0.03, 3).unwrap());
        assert!(add_noise(&pattern, -0.1, 0.0, 1).is_err());
    }
}
