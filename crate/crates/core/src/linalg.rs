//! Dense solves with a conditioning guard, and conjugate gradients for the
//! small SPD normal equations of the regularized update.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::{CMatrix, Complex64};

/// Systems whose 1-norm condition estimate exceeds this are reported as
/// singular.
pub const CONDITION_LIMIT: f64 = 1e12;

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// LU factorization that remembers a condition estimate `‖A‖₁‖A⁻¹‖₁`.
pub struct Factored {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    pub condition: f64,
}

impl Factored {
    pub fn new(a: &CMatrix, context: &str) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::InvalidInput(format!("{context}: matrix is not square")));
        }
        let norm = one_norm(a);
        let lu = a.clone().lu();
        let inv = lu.try_inverse().ok_or_else(|| Error::IrregularFrequency {
            context: context.to_string(),
            condition: f64::INFINITY,
        })?;
        let condition = norm * one_norm(&inv);
        if !condition.is_finite() || condition > CONDITION_LIMIT {
            return Err(Error::IrregularFrequency { context: context.to_string(), condition });
        }
        Ok(Self { lu, condition })
    }

    pub fn solve_matrix(&self, b: &CMatrix) -> CMatrix {
        self.lu.solve(b).expect("factorization checked for invertibility")
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let rhs = DVector::from_column_slice(b);
        self.lu.solve(&rhs).expect("factorization checked for invertibility").as_slice().to_vec()
    }
}

/// Solves `A x = b` and returns `x`, rejecting ill-conditioned systems.
pub fn solve_dense(a: &CMatrix, b: &[Complex64], context: &str) -> Result<Vec<Complex64>> {
    Ok(Factored::new(a, context)?.solve(b))
}

pub fn relative_residual(a: &CMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a * DVector::from_column_slice(x);
    let num: f64 = ax.iter().zip(b).map(|(u, v)| (u - v).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Outcome of a conjugate gradient run.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

/// Conjugate gradients for a symmetric positive definite system, stopping at
/// relative residual `tol` or after `max_iter` iterations. Runs that end
/// above `fail_tol` are errors.
///
/// The iteration runs on the diagonally scaled system `D^{-1/2}AD^{-1/2}`,
/// which removes the spread that Sobolev penalty weights put on the
/// diagonal; the stopping test and the reported residual refer to `A`.
pub fn conjugate_gradient(
    a: &DMatrix<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    fail_tol: f64,
) -> Result<CgOutcome> {
    let n = b.len();
    let b = DVector::from_column_slice(b);
    let b_norm = b.norm();
    if b_norm == 0.0 {
        return Ok(CgOutcome { x: vec![0.0; n], iterations: 0, relative_residual: 0.0 });
    }
    if (0..n).any(|i| !(a[(i, i)] > 0.0)) {
        return Err(Error::InvalidInput("CG needs a positive diagonal".into()));
    }
    let scale = DVector::from_fn(n, |i, _| 1.0 / a[(i, i)].sqrt());
    let scaled = DMatrix::from_fn(n, n, |i, j| scale[i] * a[(i, j)] * scale[j]);
    let rhs = b.component_mul(&scale);
    let true_residual = |y: &DVector<f64>| (&b - a * y.component_mul(&scale)).norm() / b_norm;

    let mut y = DVector::zeros(n);
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.dot(&r);
    let mut iterations = 0;
    while iterations < max_iter && true_residual(&y) > tol {
        let ap = &scaled * &p;
        let alpha = rr / p.dot(&ap);
        y.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_new = r.dot(&r);
        p = &r + &p * (rr_new / rr);
        rr = rr_new;
        iterations += 1;
    }
    let relative_residual = true_residual(&y);
    if !(relative_residual <= fail_tol) {
        return Err(Error::CgNotConverged { residual: relative_residual, iterations });
    }
    Ok(CgOutcome { x: y.component_mul(&scale).as_slice().to_vec(), iterations, relative_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_matches_direct_solve() {
        let m = DMatrix::from_fn(7, 7, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let a = m.transpose() * &m + DMatrix::identity(7, 7) * 0.1;
        let b: Vec<f64> = (0..7).map(|i| (i as f64).sin() + 0.3).collect();
        let cg = conjugate_gradient(&a, &b, 1e-12, 50, 1e-8).unwrap();
        let direct = a.clone().lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..7 {
            assert!((cg.x[i] - direct[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_reports_non_convergence() {
        let m = DMatrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let a = m.transpose() * &m + DMatrix::identity(6, 6) * 1e-8;
        let err = conjugate_gradient(&a, &[1.0, 0.5, 1.0, -1.0, 2.0, 0.1], 1e-14, 1, 1e-10).unwrap_err();
        assert!(matches!(err, Error::CgNotConverged { iterations: 1, .. }));
    }

    #[test]
    fn diagonal_scaling_handles_spread_weights() {
        // a diagonal system is solved in one step however wide the spread
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1e6, 1e-6, 3.0]));
        let cg = conjugate_gradient(&a, &[1.0, 1.0, 1.0, 1.0], 1e-14, 1, 1e-12).unwrap();
        assert_eq!(cg.iterations, 1);
        assert!((cg.x[2] - 1e6).abs() < 1e-6);
    }

    #[test]
    fn singular_system_is_flagged() {
        let a = CMatrix::from_fn(3, 3, |i, _| Complex64::new(i as f64, 0.0));
        assert!(matches!(
            Factored::new(&a, "test"),
            Err(Error::IrregularFrequency { .. })
        ));
    }
}
