//! Oracle and invariant checks behind the `validate` verb.

use std::f64::consts::{FRAC_PI_2, PI};

use oblique_core::direct::{
    equidistant_angles, far_field, incident_trace, l2_norm, solve_direct, solve_direct_with,
    DirectOptions,
};
use oblique_core::geometry::{BoundaryCurve, Perturbed, Shape, TrigPolynomial};
use oblique_core::inverse::{assemble_subsystem, frechet_kernel_matrix, indirect_far_field, solve_subsystem};
use oblique_core::operators::{assemble_farfield, assemble_layer_operators};
use oblique_core::oracle::{circle_eigenvalues, oracle_circle_farfield};
use oblique_core::params::{derive_params, Physics};
use oblique_core::specfun::bessel01;
use oblique_core::{CMatrix, CVector, Complex64};

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    /// Quadrature parameter for the spectral checks.
    pub n: usize,
    /// Use the wrong sign in the jump relations of the direct solver.
    pub flip_jump_sign: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { n: 64, flip_jump_sign: false }
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    /// Measured quantity; an error for most checks, an order for the
    /// finite-difference checks.
    pub value: f64,
    pub tolerance: f64,
    /// True when `value` must stay above `tolerance` rather than below.
    pub lower_bound: bool,
    pub passed: bool,
}

impl Check {
    fn below(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, lower_bound: false, passed: value < tolerance }
    }

    fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, tolerance, lower_bound: true, passed: value >= tolerance }
    }

    fn failed(name: impl Into<String>, tolerance: f64) -> Self {
        Check { name: name.into(), value: f64::NAN, tolerance, lower_bound: false, passed: false }
    }
}

/// Tolerances of the resolution-dependent checks. The values for `n ≥ 64`
/// are the release gate; coarser grids get looser, fixed bounds so that a
/// reduced run still says something.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub eigenvalue: f64,
    pub leakage: f64,
    pub oracle: f64,
}

impl Tolerances {
    pub fn for_n(n: usize) -> Self {
        match n {
            64.. => Tolerances { eigenvalue: 1e-8, leakage: 1e-9, oracle: 1e-7 },
            32..=63 => Tolerances { eigenvalue: 1e-6, leakage: 1e-7, oracle: 1e-5 },
            16..=31 => Tolerances { eigenvalue: 1e-3, leakage: 1e-4, oracle: 1e-2 },
            _ => Tolerances { eigenvalue: 1e-1, leakage: 1e-1, oracle: 5e-1 },
        }
    }
}

fn wronskian_check() -> Check {
    let mut worst = 0.0_f64;
    for x in [0.1, 1.0, 10.0, 100.0] {
        match bessel01(x) {
            Ok(b) => {
                let w = b.j1 * b.y0 - b.j0 * b.y1;
                let exact = 2.0 / (PI * x);
                worst = worst.max(((w - exact) / exact).abs());
            }
            Err(_) => return Check::failed("Bessel Wronskian J1Y0 - J0Y1 = 2/(pi x)", 1e-10),
        }
    }
    Check::below("Bessel Wronskian J1Y0 - J0Y1 = 2/(pi x)", worst, 1e-10)
}

/// Largest eigenvalue error and off-diagonal leakage of the six operators on
/// the unit circle, over modes `|m| < n/2`, scaled by `max(1, |λ|)`.
pub fn circle_operator_errors(n: usize, kappa: f64) -> oblique_core::Result<(f64, f64)> {
    let curve = BoundaryCurve::from_radial(&Shape::Circle { radius: 1.0 }, n)?;
    let ops = assemble_layer_operators(&curve, kappa)?;
    let len = curve.len();
    let (mut eig, mut leak) = (0.0_f64, 0.0_f64);
    let mmax = (n / 2) as i64;
    for m in -mmax + 1..mmax {
        let em = CVector::from_iterator(len, curve.t.iter().map(|&t| Complex64::from_polar(1.0, m as f64 * t)));
        let ev = circle_eigenvalues(1.0, kappa, m)?;
        let pairs: [(&CMatrix, Complex64); 6] =
            [(&ops.s, ev.s), (&ops.d, ev.d), (&ops.ns, ev.ns), (&ops.nd, ev.nd), (&ops.ts, ev.ts), (&ops.td, ev.td)];
        for (mat, lambda) in pairs {
            let v = mat * &em;
            let proj = em.dotc(&v) / len as f64;
            let scale = lambda.norm().max(1.0);
            eig = eig.max((proj - lambda).norm() / scale);
            let rest = v - &em * proj;
            leak = leak.max(rest.norm() / (len as f64).sqrt() / scale);
        }
    }
    Ok((eig, leak))
}

fn oracle_check(n: usize, flip: bool, tol: f64) -> Check {
    let name = if flip {
        "direct solver vs circle series (jump sign flipped)".to_string()
    } else {
        "direct solver vs circle series".to_string()
    };
    let run = || -> oblique_core::Result<f64> {
        let p = derive_params(&Physics::benchmark(2.5), 0.0)?;
        let curve = BoundaryCurve::from_radial(&Shape::Circle { radius: 1.0 }, n)?;
        let angles = equidistant_angles(64);
        let trace = incident_trace(&curve, &p);
        let ext = assemble_layer_operators(&curve, p.kappa0)?;
        let int = assemble_layer_operators(&curve, p.kappa1)?;
        let dens = solve_direct_with(&curve, &p, &trace, &ext, &int, DirectOptions { flip_jump_signs: flip })?;
        let ff = far_field(&curve, &p, &dens, &angles)?;
        let oracle = oracle_circle_farfield(1.0, &p, &angles)?;
        let diff: Vec<Complex64> = ff
            .e_inf
            .iter()
            .chain(&ff.h_inf)
            .zip(oracle.e_inf.iter().chain(&oracle.h_inf))
            .map(|(a, b)| a - b)
            .collect();
        let reference: Vec<Complex64> = oracle.e_inf.iter().chain(&oracle.h_inf).copied().collect();
        Ok(l2_norm(&diff) / l2_norm(&reference))
    };
    match run() {
        Ok(err) => Check::below(name, err, tol),
        Err(_) => Check::failed(name, tol),
    }
}

/// Observed convergence orders of `‖F(r + hq) − F(r) − h F'(r)q‖` for
/// `F(r) = S∞(r)ζ` with a fixed density, over `h = 10⁻², 10⁻³, 10⁻⁴`.
pub fn frechet_fd_orders(shape: &Shape, kappa0: f64, n: usize) -> oblique_core::Result<Vec<f64>> {
    let curve = BoundaryCurve::from_radial(shape, n)?;
    let angles = equidistant_angles(2 * n);
    let zeta: Vec<Complex64> = curve
        .t
        .iter()
        .map(|&t| Complex64::from_polar(1.0 + 0.3 * (2.0 * t).sin(), t.cos()))
        .collect();
    let q = TrigPolynomial::new(vec![0.1, 0.05, -0.03], vec![0.02, 0.04])?;
    let apply = |m: &CMatrix, v: &[Complex64]| m * CVector::from_column_slice(v);
    let base = apply(&assemble_farfield(&curve, kappa0, &angles)?.s_inf, &zeta);
    let qn: Vec<Complex64> = curve.t.iter().map(|&t| Complex64::new(q.eval(t), 0.0)).collect();
    let lin = apply(&frechet_kernel_matrix(&curve, kappa0, &zeta, &angles)?, &qn);
    let mut errors = Vec::new();
    for h in [1e-2, 1e-3, 1e-4] {
        let moved = BoundaryCurve::from_radial(&Perturbed { base: shape, direction: &q, step: h }, n)?;
        let f = apply(&assemble_farfield(&moved, kappa0, &angles)?.s_inf, &zeta);
        errors.push((f - &base - &lin * Complex64::new(h, 0.0)).norm());
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log10()).collect())
}

fn fd_check(label: &str, shape: &Shape, n: usize) -> Check {
    let name = format!("Frechet derivative FD order ({label})");
    let kappa0 = match derive_params(&Physics::benchmark(2.5), 0.0) {
        Ok(p) => p.kappa0,
        Err(_) => return Check::failed(name, 1.9),
    };
    match frechet_fd_orders(shape, kappa0, n) {
        Ok(orders) => Check::above(name, orders.into_iter().fold(f64::INFINITY, f64::min), 1.9),
        Err(_) => Check::failed(name, 1.9),
    }
}

/// `‖h∞‖/‖e∞‖` at normal incidence from the direct and the indirect solver.
pub fn decoupling_ratios(n: usize) -> oblique_core::Result<(f64, f64)> {
    let mut ph = Physics::benchmark(2.0);
    ph.theta = FRAC_PI_2;
    let p = derive_params(&ph, 0.4)?;
    let curve = BoundaryCurve::from_radial(&Shape::Peanut, n)?;
    let angles = equidistant_angles(64);
    let trace = incident_trace(&curve, &p);
    let dens = solve_direct(&curve, &p, &trace)?;
    let ff = far_field(&curve, &p, &dens, &angles)?;
    let direct = l2_norm(&ff.h_inf) / l2_norm(&ff.e_inf);
    let (matrix, rhs) = assemble_subsystem(&curve, &p, &trace)?;
    let ind = indirect_far_field(&curve, &p, &solve_subsystem(&matrix, &rhs)?, &angles)?;
    Ok((direct, l2_norm(&ind.h_inf) / l2_norm(&ind.e_inf)))
}

pub fn run_checks(options: ValidateOptions) -> Vec<Check> {
    let n = options.n.max(4);
    let tol = Tolerances::for_n(n);
    let mut checks = vec![wronskian_check()];
    for kappa in [1.0, 2.5] {
        let eig_name = format!("circle operator eigenvalues (kappa = {kappa}, n = {n})");
        let leak_name = format!("circle operator off-diagonal leakage (kappa = {kappa}, n = {n})");
        match circle_operator_errors(n, kappa) {
            Ok((eig, leak)) => {
                checks.push(Check::below(eig_name, eig, tol.eigenvalue));
                checks.push(Check::below(leak_name, leak, tol.leakage));
            }
            Err(_) => {
                checks.push(Check::failed(eig_name, tol.eigenvalue));
                checks.push(Check::failed(leak_name, tol.leakage));
            }
        }
    }
    checks.push(oracle_check(n, options.flip_jump_sign, tol.oracle));
    checks.push(fd_check("peanut", &Shape::Peanut, 32));
    checks.push(fd_check("apple", &Shape::Apple, 32));
    match decoupling_ratios(32) {
        Ok((d, i)) => {
            checks.push(Check::below("normal incidence |h|/|e| (direct)", d, 1e-10));
            checks.push(Check::below("normal incidence |h|/|e| (indirect)", i, 1e-10));
        }
        Err(_) => {
            checks.push(Check::failed("normal incidence |h|/|e| (direct)", 1e-10));
            checks.push(Check::failed("normal incidence |h|/|e| (indirect)", 1e-10));
        }
    }
    checks
}

pub fn format_report(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let cmp = if c.lower_bound { ">=" } else { "<" };
        out.push_str(&format!(
            "{status}  {:width$}  {:.3e} (need {cmp} {:.1e})\n",
            c.name, c.value, c.tolerance
        ));
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    out.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    out
}
