//! Separation-of-variables solutions on circles, used to validate the
//! boundary integral discretization.
//!
//! On a circle of radius `a` every operator is diagonal in `e^{imt}`, and
//! the transmission problem decouples into one 4×4 system per mode for the
//! Bessel/Hankel coefficients of `(e₃ⁱⁿᵗ, e₃ˢᶜ, h₃ⁱⁿᵗ, h₃ˢᶜ)`.

use nalgebra::{Matrix4, Vector4};
use std::f64::consts::{FRAC_PI_4, PI};

use crate::direct::FarFieldPattern;
use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::specfun::{bessel_j_sequence, bessel_y_sequence};
use crate::Complex64;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `J_m, J_m', H_m⁽¹⁾, H_m⁽¹⁾'` for `m = 0..=max_order` at `x`.
pub struct CylinderValues {
    pub j: Vec<f64>,
    pub dj: Vec<f64>,
    pub h: Vec<Complex64>,
    pub dh: Vec<Complex64>,
}

impl CylinderValues {
    pub fn new(max_order: usize, x: f64) -> Result<Self> {
        let j = bessel_j_sequence(max_order + 1, x)?;
        let y = bessel_y_sequence(max_order + 1, x)?;
        let deriv = |z: &[f64], m: usize| {
            if m == 0 {
                -z[1]
            } else {
                z[m - 1] - m as f64 / x * z[m]
            }
        };
        let dj: Vec<f64> = (0..=max_order).map(|m| deriv(&j, m)).collect();
        let dy: Vec<f64> = (0..=max_order).map(|m| deriv(&y, m)).collect();
        let h = (0..=max_order).map(|m| Complex64::new(j[m], y[m])).collect();
        let dh = (0..=max_order).map(|m| Complex64::new(dj[m], dy[m])).collect();
        Ok(Self { j: j[..=max_order].to_vec(), dj, h, dh })
    }

    /// Values for a possibly negative order, using `Z_{−m} = (−1)^m Z_m`.
    fn at(&self, m: i64) -> (f64, f64, Complex64, Complex64) {
        let k = m.unsigned_abs() as usize;
        let s = if m < 0 && k % 2 == 1 { -1.0 } else { 1.0 };
        (s * self.j[k], s * self.dj[k], self.h[k] * s, self.dh[k] * s)
    }
}

/// Eigenvalues of the six boundary operators for mode `e^{imt}` on a circle.
#[derive(Debug, Clone, Copy)]
pub struct CircleEigenvalues {
    pub s: Complex64,
    pub d: Complex64,
    pub ns: Complex64,
    pub nd: Complex64,
    pub ts: Complex64,
    pub td: Complex64,
}

pub fn circle_eigenvalues(radius: f64, kappa: f64, mode: i64) -> Result<CircleEigenvalues> {
    let x = kappa * radius;
    let vals = CylinderValues::new(mode.unsigned_abs() as usize, x)?;
    let (j, dj, h, dh) = vals.at(mode);
    let s = I * (PI * radius / 2.0) * j * h;
    // principal value: mean of the interior and exterior limits
    let d = I * (PI * radius * kappa / 4.0) * (dh * j + h * dj);
    let nd = I * (PI * radius * kappa * kappa / 2.0) * dh * dj;
    let tau = I * (mode as f64 / radius);
    Ok(CircleEigenvalues { s, d, ns: d, nd, ts: tau * s, td: tau * d })
}

/// Far-field pattern of a circular cylinder of the given radius centred at
/// the origin, from the modal series.
pub fn oracle_circle_farfield(
    radius: f64,
    params: &PhysicalParams,
    obs_angles: &[f64],
) -> Result<FarFieldPattern> {
    if !(radius > 0.0) {
        return Err(Error::InvalidInput(format!("circle radius {radius} must be positive")));
    }
    let max_mode = (params.kappa0 * radius).ceil() as usize + 20;
    let ext_inc = CylinderValues::new(max_mode, params.kappa0 * radius)?;
    let int = CylinderValues::new(max_mode, params.kappa1 * radius)?;

    let (k0, k1, w) = (params.kappa0, params.kappa1, params.omega);
    let [b0, b1] = params.beta_t;
    let [e0, e1] = params.eps_t;
    let [m0, m1] = params.mu_t;
    let amp = params.incident_amplitude();
    let far_scale = (2.0 / (PI * k0)).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);

    let mut e_inf = vec![Complex64::default(); obs_angles.len()];
    let mut h_inf = vec![Complex64::default(); obs_angles.len()];
    let mut tail = 0.0_f64;
    for m in -(max_mode as i64)..=(max_mode as i64) {
        let (j0, dj0, h0, dh0) = ext_inc.at(m);
        let (j1, dj1, _, _) = int.at(m);
        let inc = amp * I.powi(m as i32) * Complex64::from_polar(1.0, -(m as f64) * params.phi);
        let tau = I * (m as f64 / radius);
        let c = |v: f64| Complex64::new(v, 0.0);
        // unknowns (a, b, c, d): e_int, e_sc, h_int, h_sc coefficients
        let mat = Matrix4::new(
            c(j1), -h0, c(0.0), c(0.0),
            tau * b1 * j1, -tau * b0 * h0, c(m1 * w * k1 * dj1), -dh0 * (m0 * w * k0),
            c(0.0), c(0.0), c(j1), -h0,
            c(e1 * w * k1 * dj1), -dh0 * (e0 * w * k0), -tau * b1 * j1, tau * b0 * h0,
        );
        let rhs = Vector4::new(
            inc * j0,
            tau * b0 * inc * j0,
            Complex64::default(),
            inc * (e0 * w * k0 * dj0),
        );
        let sol = mat.lu().solve(&rhs).ok_or_else(|| Error::IrregularFrequency {
            context: format!("circle oracle mode {m}"),
            condition: f64::INFINITY,
        })?;
        let (bm, dm) = (sol[1], sol[3]);
        let phase = far_scale * (-I).powi(m as i32);
        for (k, &alpha) in obs_angles.iter().enumerate() {
            let e = Complex64::from_polar(1.0, m as f64 * alpha) * phase;
            e_inf[k] += bm * e;
            h_inf[k] += dm * e;
        }
        if m.unsigned_abs() as usize == max_mode {
            tail = tail.max(bm.norm().max(dm.norm()));
        }
    }
    if tail > 1e-14 {
        return Err(Error::Data(format!("modal series not converged (tail {tail:.2e})")));
    }
    Ok(FarFieldPattern { obs_angles: obs_angles.to_vec(), e_inf, h_inf })
}
