//! Star-shaped boundary curves `z(t) = r(t)(cos t, sin t)` on the equidistant
//! grid `t_j = jπ/n`, `j = 0..2n-1`, together with the periodic quadrature and
//! differentiation tools built on that grid.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::RMatrix;

/// Radius and its first two derivatives at one parameter value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
}

/// A 2π-periodic radial function with analytic derivatives.
pub trait RadialFunction: Send + Sync {
    fn sample(&self, t: f64) -> RadialSample;

    fn radius(&self, t: f64) -> f64 {
        self.sample(t).r
    }
}

/// `q(t) = Σ_{k=0}^m a_k cos kt + Σ_{k=1}^m b_k sin kt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolynomial {
    /// `a_0 .. a_m`
    pub a: Vec<f64>,
    /// `b_1 .. b_m`
    pub b: Vec<f64>,
}

impl TrigPolynomial {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("trig polynomial needs a_0".into()));
        }
        if b.len() + 1 != a.len() {
            return Err(Error::InvalidInput(format!(
                "trig polynomial with {} cosine and {} sine coefficients",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite trig coefficient".into()));
        }
        Ok(Self { a, b })
    }

    pub fn constant(value: f64) -> Self {
        Self { a: vec![value], b: Vec::new() }
    }

    pub fn zero(degree: usize) -> Self {
        Self { a: vec![0.0; degree + 1], b: vec![0.0; degree] }
    }

    pub fn degree(&self) -> usize {
        self.b.len()
    }

    /// Coefficient vector laid out as `(a_0..a_m, b_1..b_m)`.
    pub fn from_coefficients(x: &[f64]) -> Result<Self> {
        if x.len() % 2 != 1 {
            return Err(Error::InvalidInput(format!(
                "coefficient vector length {} is not 2m+1",
                x.len()
            )));
        }
        let m = x.len() / 2;
        Self::new(x[..=m].to_vec(), x[m + 1..].to_vec())
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.a.iter().chain(self.b.iter()).copied().collect()
    }

    pub fn with_degree(&self, degree: usize) -> Self {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        a.resize(degree + 1, 0.0);
        b.resize(degree, 0.0);
        Self { a, b }
    }

    pub fn add(&self, other: &TrigPolynomial) -> TrigPolynomial {
        let m = self.degree().max(other.degree());
        let lhs = self.with_degree(m);
        let rhs = other.with_degree(m);
        TrigPolynomial {
            a: lhs.a.iter().zip(&rhs.a).map(|(x, y)| x + y).collect(),
            b: lhs.b.iter().zip(&rhs.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn scale(&self, factor: f64) -> TrigPolynomial {
        TrigPolynomial {
            a: self.a.iter().map(|x| x * factor).collect(),
            b: self.b.iter().map(|x| x * factor).collect(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.sample(t).r
    }
}

impl RadialFunction for TrigPolynomial {
    fn sample(&self, t: f64) -> RadialSample {
        let mut r = self.a[0];
        let mut dr = 0.0;
        let mut ddr = 0.0;
        for k in 1..=self.degree() {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            let (ak, bk) = (self.a[k], self.b[k - 1]);
            r += ak * c + bk * s;
            dr += kf * (-ak * s + bk * c);
            ddr -= kf * kf * (ak * c + bk * s);
        }
        RadialSample { r, dr, ddr }
    }
}

/// Closed-form boundary shapes used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Circle { radius: f64 },
    /// `r(t) = (0.5 cos²t + 0.15 sin²t)^{1/2}`
    Peanut,
    /// `r(t) = (0.45 + 0.3 cos t − 0.1 sin 2t)/(1 + 0.7 cos t)`
    Apple,
    Trig { a: Vec<f64>, b: Vec<f64> },
    /// Another shape rotated counter-clockwise by `angle`.
    Rotated { shape: Box<Shape>, angle: f64 },
}

impl Shape {
    pub fn validate(&self) -> Result<()> {
        match self {
            Shape::Circle { radius } if !(*radius > 0.0) => {
                Err(Error::InvalidInput(format!("circle radius {radius} must be positive")))
            }
            Shape::Trig { a, b } => TrigPolynomial::new(a.clone(), b.clone()).map(|_| ()),
            Shape::Rotated { shape, .. } => shape.validate(),
            _ => Ok(()),
        }
    }
}

impl RadialFunction for Shape {
    fn sample(&self, t: f64) -> RadialSample {
        match self {
            Shape::Circle { radius } => RadialSample { r: *radius, dr: 0.0, ddr: 0.0 },
            Shape::Peanut => {
                let (s2, c2) = (2.0 * t).sin_cos();
                let g = 0.325 + 0.175 * c2;
                let dg = -0.35 * s2;
                let ddg = -0.7 * c2;
                let r = g.sqrt();
                RadialSample {
                    r,
                    dr: dg / (2.0 * r),
                    ddr: ddg / (2.0 * r) - dg * dg / (4.0 * r * r * r),
                }
            }
            Shape::Apple => {
                let (s, c) = t.sin_cos();
                let (s2, c2) = (2.0 * t).sin_cos();
                let num = 0.45 + 0.3 * c - 0.1 * s2;
                let dnum = -0.3 * s - 0.2 * c2;
                let ddnum = -0.3 * c + 0.4 * s2;
                let den = 1.0 + 0.7 * c;
                let dden = -0.7 * s;
                let ddden = -0.7 * c;
                let r = num / den;
                let dr = (dnum - r * dden) / den;
                let ddr = (ddnum - 2.0 * dr * dden - r * ddden) / den;
                RadialSample { r, dr, ddr }
            }
            Shape::Trig { a, b } => TrigPolynomial { a: a.clone(), b: b.clone() }.sample(t),
            Shape::Rotated { shape, angle } => shape.sample(t - angle),
        }
    }
}

/// `base + h·q`, used for directional derivatives with respect to the radius.
pub struct Perturbed<'a> {
    pub base: &'a dyn RadialFunction,
    pub direction: &'a TrigPolynomial,
    pub step: f64,
}

impl RadialFunction for Perturbed<'_> {
    fn sample(&self, t: f64) -> RadialSample {
        let b = self.base.sample(t);
        let q = self.direction.sample(t);
        RadialSample {
            r: b.r + self.step * q.r,
            dr: b.dr + self.step * q.dr,
            ddr: b.ddr + self.step * q.ddr,
        }
    }
}

/// Grid nodes `t_j = jπ/n`, `j = 0..2n-1`.
pub fn grid(n: usize) -> Vec<f64> {
    (0..2 * n).map(|j| j as f64 * PI / n as f64).collect()
}

/// Boundary samples on the 2n-point grid.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub n: usize,
    pub t: Vec<f64>,
    pub r: Vec<f64>,
    pub dr: Vec<f64>,
    pub z: Vec<[f64; 2]>,
    pub dz: Vec<[f64; 2]>,
    pub ddz: Vec<[f64; 2]>,
    /// `|z'(t_j)|`
    pub jac: Vec<f64>,
    pub normal: Vec<[f64; 2]>,
    /// `(−n₂, n₁)`, which equals `z'/|z'|`.
    pub tangent: Vec<[f64; 2]>,
}

impl BoundaryCurve {
    pub fn from_radial(radial: &dyn RadialFunction, n: usize) -> Result<Self> {
        check_grid_size(n, 4)?;
        let t = grid(n);
        let samples: Vec<RadialSample> = t.iter().map(|&t| radial.sample(t)).collect();
        Self::build(n, t, samples)
    }

    /// Builds the curve from radial samples alone; derivatives come from
    /// spectral differentiation of the samples.
    pub fn from_samples(r: &[f64]) -> Result<Self> {
        if r.len() % 2 != 0 {
            return Err(Error::InvalidInput(format!("{} radial samples, need 2n", r.len())));
        }
        let n = r.len() / 2;
        check_grid_size(n, 4)?;
        let q = trig_diff_matrix(n)?;
        let dr = q.apply(r);
        let ddr = q.apply(&dr);
        let samples = (0..2 * n)
            .map(|j| RadialSample { r: r[j], dr: dr[j], ddr: ddr[j] })
            .collect();
        Self::build(n, grid(n), samples)
    }

    fn build(n: usize, t: Vec<f64>, samples: Vec<RadialSample>) -> Result<Self> {
        let len = 2 * n;
        let mut curve = BoundaryCurve {
            n,
            t,
            r: Vec::with_capacity(len),
            dr: Vec::with_capacity(len),
            z: Vec::with_capacity(len),
            dz: Vec::with_capacity(len),
            ddz: Vec::with_capacity(len),
            jac: Vec::with_capacity(len),
            normal: Vec::with_capacity(len),
            tangent: Vec::with_capacity(len),
        };
        for (j, s) in samples.iter().enumerate() {
            let tj = curve.t[j];
            if !(s.r > 0.0) || !s.r.is_finite() {
                return Err(Error::NonPositiveRadius { t: tj, value: s.r });
            }
            let (sin, cos) = tj.sin_cos();
            let z = [s.r * cos, s.r * sin];
            let dz = [s.dr * cos - s.r * sin, s.dr * sin + s.r * cos];
            let ddz = [
                (s.ddr - s.r) * cos - 2.0 * s.dr * sin,
                (s.ddr - s.r) * sin + 2.0 * s.dr * cos,
            ];
            let jac = dz[0].hypot(dz[1]);
            if !(jac > 1e-14) || !jac.is_finite() {
                return Err(Error::DegenerateJacobian { t: tj, jac });
            }
            let normal = [dz[1] / jac, -dz[0] / jac];
            curve.r.push(s.r);
            curve.dr.push(s.dr);
            curve.z.push(z);
            curve.dz.push(dz);
            curve.ddz.push(ddz);
            curve.jac.push(jac);
            curve.normal.push(normal);
            curve.tangent.push([-normal[1], normal[0]]);
        }
        Ok(curve)
    }

    pub fn len(&self) -> usize {
        2 * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Trapezoidal arc length `Σ (π/n)|z'(t_j)|`.
    pub fn perimeter(&self) -> f64 {
        PI / self.n as f64 * self.jac.iter().sum::<f64>()
    }
}

fn check_grid_size(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidInput(format!("grid half-size n = {n} must be at least {min}")));
    }
    Ok(())
}

/// Trigonometric differentiation matrix on the 2n-point grid.
#[derive(Debug, Clone)]
pub struct DiffMatrix {
    pub q: RMatrix,
}

impl DiffMatrix {
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(values);
        (&self.q * v).as_slice().to_vec()
    }
}

/// `Q(t_k, t_j) = ½(−1)^{k−j} cot((t_k − t_j)/2)` off the diagonal, zero on it.
pub fn trig_diff_matrix(n: usize) -> Result<DiffMatrix> {
    check_grid_size(n, 2)?;
    let len = 2 * n;
    let h = PI / n as f64;
    let mut q = RMatrix::zeros(len, len);
    for k in 0..len {
        for j in 0..len {
            if k == j {
                continue;
            }
            let d = k as isize - j as isize;
            let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            q[(k, j)] = 0.5 * sign / (0.5 * d as f64 * h).tan();
        }
    }
    Ok(DiffMatrix { q })
}

/// `R_d` for `d = 0..2n-1`: weight linking nodes whose indices differ by `d`
/// in the rule for `∫₀^{2π} ln(4 sin²((t−s)/2)) f(s) ds`.
pub fn log_weight_table(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..2 * n)
        .map(|d| {
            let dt = d as f64 * PI / nf;
            let mut sum = 0.0;
            for m in 1..n {
                sum += (m as f64 * dt).cos() / m as f64;
            }
            -2.0 * PI / nf * sum - PI / (nf * nf) * (nf * dt).cos()
        })
        .collect()
}

/// Weights `R_j(t)` for a collocation node `t` on the 2n-point grid.
pub fn log_quadrature_weights(n: usize, t: f64) -> Result<Vec<f64>> {
    check_grid_size(n, 2)?;
    let h = PI / n as f64;
    let pos = t.rem_euclid(2.0 * PI) / h;
    let idx = pos.round();
    if (pos - idx).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!("t = {t} is not a grid node for n = {n}")));
    }
    let i = (idx as usize) % (2 * n);
    let table = log_weight_table(n);
    Ok((0..2 * n).map(|j| table[(i + 2 * n - j) % (2 * n)]).collect())
}

/// `T_{kj}`: samples of `cos(j t_k)` for `j ≤ m` and `sin((j−m) t_k)` above.
pub fn trig_basis_matrix(n: usize, m: usize) -> RMatrix {
    let t = grid(n);
    RMatrix::from_fn(2 * n, 2 * m + 1, |k, j| {
        if j <= m {
            (j as f64 * t[k]).cos()
        } else {
            ((j - m) as f64 * t[k]).sin()
        }
    })
}
