//! Material and illumination constants and the wavenumbers derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw inputs: material constants, frequency and incidence angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub eps0: f64,
    pub mu0: f64,
    pub eps1: f64,
    pub mu1: f64,
    pub omega: f64,
    /// Angle between the incident direction and the negative cylinder axis.
    pub theta: f64,
}

impl Physics {
    /// Exterior (1,1), interior (2,2), θ = π/3.
    pub fn benchmark(omega: f64) -> Self {
        Physics {
            eps0: 1.0,
            mu0: 1.0,
            eps1: 2.0,
            mu1: 2.0,
            omega,
            theta: std::f64::consts::FRAC_PI_3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhysicalParams {
    pub eps0: f64,
    pub mu0: f64,
    pub eps1: f64,
    pub mu1: f64,
    pub omega: f64,
    pub theta: f64,
    /// Polar angle of the incident direction in the cross-section plane.
    pub phi: f64,
    pub k0: f64,
    pub beta: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    /// `β/κ_j²`
    pub beta_t: [f64; 2],
    /// `ε_j/κ_j²`
    pub eps_t: [f64; 2],
    /// `μ_j/κ_j²`
    pub mu_t: [f64; 2],
}

/// Validates the raw constants and fills in every derived quantity.
pub fn derive_params(physics: &Physics, phi: f64) -> Result<PhysicalParams> {
    let Physics { eps0, mu0, eps1, mu1, omega, theta } = *physics;
    for (name, v) in [("eps0", eps0), ("mu0", mu0), ("eps1", eps1), ("mu1", mu1), ("omega", omega)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("{name} = {v} must be positive")));
        }
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidInput(format!("theta = {theta} must lie in (0, π)")));
    }
    if !phi.is_finite() {
        return Err(Error::InvalidInput("phi must be finite".into()));
    }
    let k0 = omega * (mu0 * eps0).sqrt();
    let beta = k0 * theta.cos();
    let kappa0 = k0 * theta.sin();
    let kappa1_sq = mu1 * eps1 * omega * omega - beta * beta;
    if !(kappa1_sq > 0.0) {
        return Err(Error::EvanescentInterior(kappa1_sq));
    }
    let kappa1 = kappa1_sq.sqrt();
    let k2 = [kappa0 * kappa0, kappa1_sq];
    Ok(PhysicalParams {
        eps0,
        mu0,
        eps1,
        mu1,
        omega,
        theta,
        phi,
        k0,
        beta,
        kappa0,
        kappa1,
        beta_t: [beta / k2[0], beta / k2[1]],
        eps_t: [eps0 / k2[0], eps1 / k2[1]],
        mu_t: [mu0 / k2[0], mu1 / k2[1]],
    })
}

impl PhysicalParams {
    pub fn kappa(&self, domain: usize) -> f64 {
        if domain == 0 {
            self.kappa0
        } else {
            self.kappa1
        }
    }

    /// Same material and frequency, different incident polar angle.
    pub fn with_phi(&self, phi: f64) -> PhysicalParams {
        PhysicalParams { phi, ..*self }
    }

    /// Incident amplitude `sin θ/√ε₀` of the axial electric component.
    pub fn incident_amplitude(&self) -> f64 {
        self.theta.sin() / self.eps0.sqrt()
    }
}
