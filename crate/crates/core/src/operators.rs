//! Nyström matrices for the Helmholtz boundary operators on a parametrized
//! curve, with fundamental solution `Φ(x,y) = (i/4) H₀⁽¹⁾(κ|x−y|)`.
//!
//! Every matrix maps density samples `f(z(t_j))` to samples of the operator
//! output at the nodes; the arc-length element `|z'(s)|` is folded into the
//! matrix. Weakly singular kernels are split as
//! `M(t,s) = M₁(t,s) ln(4 sin²((t−s)/2)) + M₂(t,s)` with `M₁` integrated by
//! the logarithmic product rule and `M₂` by the trapezoidal rule.
//!
//! Tangential derivative operators are obtained by spectral differentiation
//! of the corresponding boundary traces, and the hypersingular operator by
//! Maue's identity `ND f = ∂τ S ∂τ f + κ² n·S(n f)`.

use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};
use crate::geometry::{log_weight_table, trig_diff_matrix, BoundaryCurve};
use crate::linalg::to_complex;
use crate::specfun::{bessel01_unchecked, EULER_GAMMA};
use crate::{CMatrix, Complex64};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// The six boundary operators for one wavenumber.
#[derive(Debug, Clone)]
pub struct LayerOperators {
    pub kappa: f64,
    pub s: CMatrix,
    pub d: CMatrix,
    pub ns: CMatrix,
    pub nd: CMatrix,
    pub ts: CMatrix,
    pub td: CMatrix,
}

/// Far-field single and double layer operators, one row per observation angle.
#[derive(Debug, Clone)]
pub struct FarFieldOperators {
    pub obs_angles: Vec<f64>,
    pub s_inf: CMatrix,
    pub d_inf: CMatrix,
}

/// Exterior (`κ₀`) and interior (`κ₁`) operators plus far-field matrices.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub exterior: LayerOperators,
    pub interior: LayerOperators,
    pub far: FarFieldOperators,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidInput(format!("wavenumber {kappa} must be positive")));
    }
    Ok(())
}

/// `S`, `D` and `NS`, which share the Hankel evaluations.
struct WeaklySingular {
    s: CMatrix,
    d: CMatrix,
    ns: CMatrix,
}

fn assemble_weakly_singular(curve: &BoundaryCurve, kappa: f64) -> Result<WeaklySingular> {
    check_kappa(kappa)?;
    let len = curve.len();
    let n = curve.n as f64;
    let trap = PI / n;
    let weights = log_weight_table(curve.n);
    let log_kernel: Vec<f64> = (0..len)
        .map(|d| {
            if d == 0 {
                0.0
            } else {
                (4.0 * (0.5 * d as f64 * PI / n).sin().powi(2)).ln()
            }
        })
        .collect();

    let rows: Vec<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> = (0..len)
        .into_par_iter()
        .map(|i| {
            let x = curve.z[i];
            let nx = curve.normal[i];
            let mut s_row = vec![Complex64::default(); len];
            let mut d_row = vec![Complex64::default(); len];
            let mut ns_row = vec![Complex64::default(); len];
            for j in 0..len {
                let jac = curve.jac[j];
                let dist = (i + len - j) % len;
                if i == j {
                    let m1 = -jac / (4.0 * PI);
                    let m2 = (Complex64::new(0.0, 0.25)
                        - EULER_GAMMA / (2.0 * PI)
                        - (0.5 * kappa * jac).ln() / (2.0 * PI))
                        * jac;
                    s_row[j] = weights[0] * m1 + trap * m2;
                    let [d1, d2] = curve.dz[i];
                    let [dd1, dd2] = curve.ddz[i];
                    let curvature_term = (d2 * dd1 - d1 * dd2) / (4.0 * PI * jac * jac);
                    d_row[j] = Complex64::new(trap * curvature_term, 0.0);
                    ns_row[j] = d_row[j];
                    continue;
                }
                let y = curve.z[j];
                let diff = [x[0] - y[0], x[1] - y[1]];
                let r = diff[0].hypot(diff[1]);
                let b = bessel01_unchecked(kappa * r);
                let log = log_kernel[dist];
                let rw = weights[dist];

                let m = I * 0.25 * b.h0() * jac;
                let m1 = -b.j0 * jac / (4.0 * PI);
                s_row[j] = rw * m1 + trap * (m - m1 * log);

                // n(y)|z'(s)| = (z2', -z1')
                let [dz1, dz2] = curve.dz[j];
                let a_d = dz2 * diff[0] - dz1 * diff[1];
                let l = I * (0.25 * kappa) * b.h1() / r * a_d;
                let l1 = -kappa / (4.0 * PI) * b.j1 / r * a_d;
                d_row[j] = rw * l1 + trap * (l - l1 * log);

                let a_ns = -(nx[0] * diff[0] + nx[1] * diff[1]) * jac;
                let k = I * (0.25 * kappa) * b.h1() / r * a_ns;
                let k1 = -kappa / (4.0 * PI) * b.j1 / r * a_ns;
                ns_row[j] = rw * k1 + trap * (k - k1 * log);
            }
            (s_row, d_row, ns_row)
        })
        .collect();

    let mut s = CMatrix::zeros(len, len);
    let mut d = CMatrix::zeros(len, len);
    let mut ns = CMatrix::zeros(len, len);
    for (i, (sr, dr, nr)) in rows.into_iter().enumerate() {
        for j in 0..len {
            s[(i, j)] = sr[j];
            d[(i, j)] = dr[j];
            ns[(i, j)] = nr[j];
        }
    }
    Ok(WeaklySingular { s, d, ns })
}

/// Arc-length derivative `diag(1/|z'|)·Q` acting on node samples.
pub fn tangential_derivative_matrix(curve: &BoundaryCurve) -> Result<CMatrix> {
    let q = trig_diff_matrix(curve.n)?;
    let mut m = to_complex(&q.q);
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row /= Complex64::new(curve.jac[i], 0.0);
    }
    Ok(m)
}

fn diagonal(values: impl Iterator<Item = f64>) -> CMatrix {
    let v: Vec<Complex64> = values.map(|x| Complex64::new(x, 0.0)).collect();
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(v))
}

pub fn assemble_s(curve: &BoundaryCurve, kappa: f64) -> Result<CMatrix> {
    Ok(assemble_weakly_singular(curve, kappa)?.s)
}

pub fn assemble_d(curve: &BoundaryCurve, kappa: f64) -> Result<CMatrix> {
    Ok(assemble_weakly_singular(curve, kappa)?.d)
}

pub fn assemble_ns(curve: &BoundaryCurve, kappa: f64) -> Result<CMatrix> {
    Ok(assemble_weakly_singular(curve, kappa)?.ns)
}

pub fn assemble_ts(curve: &BoundaryCurve, kappa: f64) -> Result<CMatrix> {
    Ok(tangential_derivative_matrix(curve)? * assemble_s(curve, kappa)?)
}

pub fn assemble_td(curve: &BoundaryCurve, kappa: f64) -> Result<CMatrix> {
    Ok(tangential_derivative_matrix(curve)? * assemble_d(curve, kappa)?)
}

pub fn assemble_nd(curve: &BoundaryCurve, kappa: f64) -> Result<CMatrix> {
    let s = assemble_s(curve, kappa)?;
    let dtau = tangential_derivative_matrix(curve)?;
    Ok(maue(curve, kappa, &s, &dtau))
}

fn maue(curve: &BoundaryCurve, kappa: f64, s: &CMatrix, dtau: &CMatrix) -> CMatrix {
    let n1 = diagonal(curve.normal.iter().map(|n| n[0]));
    let n2 = diagonal(curve.normal.iter().map(|n| n[1]));
    let tangential = dtau * s * dtau;
    let normal = &n1 * s * &n1 + &n2 * s * &n2;
    tangential + normal * Complex64::new(kappa * kappa, 0.0)
}

/// All six operators for one wavenumber.
pub fn assemble_layer_operators(curve: &BoundaryCurve, kappa: f64) -> Result<LayerOperators> {
    let WeaklySingular { s, d, ns } = assemble_weakly_singular(curve, kappa)?;
    let dtau = tangential_derivative_matrix(curve)?;
    let ts = &dtau * &s;
    let td = &dtau * &d;
    let nd = maue(curve, kappa, &s, &dtau);
    Ok(LayerOperators { kappa, s, d, ns, nd, ts, td })
}

/// `Φ∞(x̂,y) = e^{iπ/4}/√(8πκ) e^{−iκ x̂·y}`
pub fn farfield_constant(kappa: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (8.0 * PI * kappa).sqrt(), FRAC_PI_4)
}

pub fn assemble_farfield(
    curve: &BoundaryCurve,
    kappa0: f64,
    obs_angles: &[f64],
) -> Result<FarFieldOperators> {
    check_kappa(kappa0)?;
    if obs_angles.is_empty() {
        return Err(Error::InvalidInput("no observation angles".into()));
    }
    let len = curve.len();
    let c = farfield_constant(kappa0) * (PI / curve.n as f64);
    let mut s_inf = CMatrix::zeros(obs_angles.len(), len);
    let mut d_inf = CMatrix::zeros(obs_angles.len(), len);
    for (k, &alpha) in obs_angles.iter().enumerate() {
        let xhat = [alpha.cos(), alpha.sin()];
        for j in 0..len {
            let y = curve.z[j];
            let phase = -kappa0 * (xhat[0] * y[0] + xhat[1] * y[1]);
            let entry = c * Complex64::from_polar(1.0, phase) * curve.jac[j];
            let nd = xhat[0] * curve.normal[j][0] + xhat[1] * curve.normal[j][1];
            s_inf[(k, j)] = entry;
            d_inf[(k, j)] = entry * (-I * kappa0 * nd);
        }
    }
    Ok(FarFieldOperators { obs_angles: obs_angles.to_vec(), s_inf, d_inf })
}

pub fn assemble_operator_set(
    curve: &BoundaryCurve,
    kappa0: f64,
    kappa1: f64,
    obs_angles: &[f64],
) -> Result<OperatorSet> {
    let (exterior, interior) = rayon::join(
        || assemble_layer_operators(curve, kappa0),
        || assemble_layer_operators(curve, kappa1),
    );
    Ok(OperatorSet {
        exterior: exterior?,
        interior: interior?,
        far: assemble_farfield(curve, kappa0, obs_angles)?,
    })
}

/// Trapezoidal evaluation of the single layer potential at points off `Γ`.
pub fn single_layer_potential(
    curve: &BoundaryCurve,
    kappa: f64,
    density: &[Complex64],
    points: &[[f64; 2]],
) -> Vec<Complex64> {
    let trap = PI / curve.n as f64;
    points
        .par_iter()
        .map(|x| {
            let mut acc = Complex64::default();
            for j in 0..curve.len() {
                let y = curve.z[j];
                let r = (x[0] - y[0]).hypot(x[1] - y[1]);
                let b = bessel01_unchecked(kappa * r);
                acc += b.h0() * density[j] * curve.jac[j];
            }
            acc * I * 0.25 * trap
        })
        .collect()
}

/// Trapezoidal evaluation of the double layer potential at points off `Γ`.
pub fn double_layer_potential(
    curve: &BoundaryCurve,
    kappa: f64,
    density: &[Complex64],
    points: &[[f64; 2]],
) -> Vec<Complex64> {
    let trap = PI / curve.n as f64;
    points
        .par_iter()
        .map(|x| {
            let mut acc = Complex64::default();
            for j in 0..curve.len() {
                let y = curve.z[j];
                let diff = [x[0] - y[0], x[1] - y[1]];
                let r = diff[0].hypot(diff[1]);
                let b = bessel01_unchecked(kappa * r);
                let [dz1, dz2] = curve.dz[j];
                acc += b.h1() / r * (dz2 * diff[0] - dz1 * diff[1]) * density[j];
            }
            acc * I * (0.25 * kappa) * trap
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::specfun::{bessel_j_sequence, bessel_y_sequence};

    fn circle(n: usize) -> BoundaryCurve {
        BoundaryCurve::from_radial(&Shape::Circle { radius: 1.0 }, n).unwrap()
    }

    fn apply(m: &CMatrix, f: &[Complex64]) -> Vec<Complex64> {
        (m * nalgebra::DVector::from_column_slice(f)).as_slice().to_vec()
    }

    #[test]
    fn single_layer_mode_zero_on_unit_circle() {
        let c = circle(32);
        let s = assemble_s(&c, 1.0).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); c.len()];
        let out = apply(&s, &ones);
        let j = bessel_j_sequence(1, 1.0).unwrap();
        let y = bessel_y_sequence(1, 1.0).unwrap();
        let expect = I * (PI / 2.0) * j[0] * Complex64::new(j[0], y[0]);
        for v in out {
            assert!((v - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn tangential_single_layer_of_constant_vanishes_on_circle() {
        let c = circle(16);
        let ts = assemble_ts(&c, 1.3).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); c.len()];
        assert!(apply(&ts, &ones).iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn double_layer_gauss_identity_small_kappa() {
        for shape in [Shape::Peanut, Shape::Apple] {
            let c = BoundaryCurve::from_radial(&shape, 32).unwrap();
            let d = assemble_d(&c, 1e-4).unwrap();
            let ones = vec![Complex64::new(1.0, 0.0); c.len()];
            for v in apply(&d, &ones) {
                assert!((v + 0.5).norm() < 1e-6, "{shape:?}: {v}");
            }
        }
    }

    #[test]
    fn ns_is_jacobian_weighted_transpose_of_d() {
        let c = BoundaryCurve::from_radial(&Shape::Apple, 16).unwrap();
        for kappa in [1e-4, 1.7] {
            let d = assemble_d(&c, kappa).unwrap();
            let ns = assemble_ns(&c, kappa).unwrap();
            for i in 0..c.len() {
                for j in 0..c.len() {
                    let lhs = ns[(i, j)] / c.jac[j];
                    let rhs = d[(j, i)] / c.jac[i];
                    assert!((lhs - rhs).norm() < 1e-12 * (1.0 + lhs.norm()));
                }
            }
        }
    }

    #[test]
    fn single_layer_is_symmetric_after_jacobian_rescaling() {
        let c = BoundaryCurve::from_radial(&Shape::Peanut, 16).unwrap();
        let s = assemble_s(&c, 2.0).unwrap();
        for i in 0..c.len() {
            for j in 0..c.len() {
                let a = s[(i, j)] / c.jac[j];
                let b = s[(j, i)] / c.jac[i];
                assert!((a - b).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn spectral_convergence_of_single_layer() {
        // apply to an analytic density at n and 2n, compare on common nodes
        let density = |t: f64| Complex64::new((2.0 * t).cos(), t.sin() * 0.5).exp();
        let mut outs = Vec::new();
        for n in [32, 64] {
            let c = BoundaryCurve::from_radial(&Shape::Peanut, n).unwrap();
            let ops = assemble_layer_operators(&c, 2.5).unwrap();
            let f: Vec<Complex64> = c.t.iter().map(|&t| density(t)).collect();
            outs.push((apply(&ops.s, &f), apply(&ops.d, &f), apply(&ops.nd, &f)));
        }
        for j in 0..64 {
            assert!((outs[0].0[j] - outs[1].0[2 * j]).norm() < 1e-9);
            assert!((outs[0].1[j] - outs[1].1[2 * j]).norm() < 1e-10);
            assert!((outs[0].2[j] - outs[1].2[2 * j]).norm() < 1e-8);
        }
    }

    #[test]
    fn farfield_of_constant_density_on_circle_is_isotropic() {
        let c = circle(16);
        let angles: Vec<f64> = (0..12).map(|k| k as f64 * 0.5).collect();
        let far = assemble_farfield(&c, 2.0, &angles).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); c.len()];
        let vals = apply(&far.s_inf, &ones);
        for v in &vals {
            assert!((v - vals[0]).norm() < 1e-13);
        }
        assert!(assemble_farfield(&c, 2.0, &[]).is_err());
    }

    #[test]
    fn tiny_circle_farfield_is_point_source() {
        let eps = 1e-4;
        let c = BoundaryCurve::from_radial(&Shape::Circle { radius: eps }, 8).unwrap();
        let far = assemble_farfield(&c, 1.5, &[0.0, 1.0, 2.0]).unwrap();
        let ones = vec![Complex64::new(1.0, 0.0); c.len()];
        let expect = farfield_constant(1.5) * (2.0 * PI * eps);
        for v in apply(&far.s_inf, &ones) {
            assert!((v - expect).norm() / expect.norm() < 1e-7);
        }
    }

    #[test]
    fn maue_matches_off_boundary_finite_difference() {
        // normal derivative of the double layer potential extrapolated to Γ
        // from three exterior points, using a very fine quadrature
        let kappa = 2.0;
        let shape = Shape::Apple;
        let density = |t: f64| Complex64::new(t.cos(), 0.3 * (2.0 * t).sin());
        let coarse = BoundaryCurve::from_radial(&shape, 32).unwrap();
        let ops = assemble_layer_operators(&coarse, kappa).unwrap();
        let f: Vec<Complex64> = coarse.t.iter().map(|&t| density(t)).collect();
        let nd = apply(&ops.nd, &f);
        let exterior_trace: Vec<Complex64> =
            apply(&ops.d, &f).iter().zip(&f).map(|(d, f)| d + 0.5 * f).collect();

        let fine = BoundaryCurve::from_radial(&shape, 1 << 15).unwrap();
        let ff: Vec<Complex64> = fine.t.iter().map(|&t| density(t)).collect();
        let delta = 1e-3;
        for i in [0usize, 11, 23, 40] {
            let x = coarse.z[i];
            let nrm = coarse.normal[i];
            let pts: Vec<[f64; 2]> = (1..=3)
                .map(|k| {
                    let h = k as f64 * delta;
                    [x[0] + h * nrm[0], x[1] + h * nrm[1]]
                })
                .collect();
            let u = double_layer_potential(&fine, kappa, &ff, &pts);
            // cubic through u(0), u(δ), u(2δ), u(3δ): derivative at 0
            let u0 = exterior_trace[i];
            let deriv = (-11.0 * u0 + 18.0 * u[0] - 9.0 * u[1] + 2.0 * u[2]) / (6.0 * delta);
            assert!((deriv - nd[i]).norm() < 1e-4, "node {i}: {deriv} vs {}", nd[i]);
        }
    }
}
