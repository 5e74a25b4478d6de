//! Bessel functions J₀, J₁, Y₀, Y₁ and Hankel functions H₀⁽¹⁾, H₁⁽¹⁾ of
//! real positive argument.
//!
//! Below [`ASYMPTOTIC_SWITCHOVER`] the functions come from Miller's backward
//! recurrence for the integer-order J sequence, normalised with
//! `J₀ + 2ΣJ₂ₖ = 1`; Y₀ and Y₁ follow from the Neumann series in the same
//! sequence. At and above the switchover the Hankel asymptotic expansion is
//! summed until its terms drop below double precision.

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_4};

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments at or above this value use the asymptotic expansion.
pub const ASYMPTOTIC_SWITCHOVER: f64 = 20.0;

const RESCALE_THRESHOLD: f64 = 1e200;

/// Order of a cylinder function. Only orders 0 and 1 are supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl TryFrom<u32> for Order {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        match value {
            0 => Ok(Order::Zero),
            1 => Ok(Order::One),
            other => Err(Error::Domain(format!("unsupported Bessel order {other}"))),
        }
    }
}

/// `J₀, J₁, Y₀, Y₁` evaluated together at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bessel01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Bessel01 {
    pub fn h0(&self) -> Complex64 {
        Complex64::new(self.j0, self.y0)
    }

    pub fn h1(&self) -> Complex64 {
        Complex64::new(self.j1, self.y1)
    }
}

pub fn bessel_j(order: Order, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("J requires finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(match order {
            Order::Zero => 1.0,
            Order::One => 0.0,
        });
    }
    let b = bessel01_unchecked(x);
    Ok(match order {
        Order::Zero => b.j0,
        Order::One => b.j1,
    })
}

pub fn bessel_y(order: Order, x: f64) -> Result<f64> {
    check_positive(x)?;
    let b = bessel01_unchecked(x);
    Ok(match order {
        Order::Zero => b.y0,
        Order::One => b.y1,
    })
}

pub fn hankel1(order: Order, x: f64) -> Result<Complex64> {
    check_positive(x)?;
    let b = bessel01_unchecked(x);
    Ok(match order {
        Order::Zero => b.h0(),
        Order::One => b.h1(),
    })
}

/// All four functions at once; `x` must be positive and finite.
pub fn bessel01(x: f64) -> Result<Bessel01> {
    check_positive(x)?;
    Ok(bessel01_unchecked(x))
}

fn check_positive(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("Y and H require finite x > 0, got {x}")));
    }
    Ok(())
}

/// Caller guarantees `x > 0`. Used on the hot path of operator assembly.
pub(crate) fn bessel01_unchecked(x: f64) -> Bessel01 {
    if x >= ASYMPTOTIC_SWITCHOVER {
        bessel01_asymptotic(x)
    } else {
        bessel01_recurrence(x)
    }
}

fn miller_start(x: f64, min_order: usize) -> usize {
    let n = (x + 30.0 + 3.0 * x.sqrt()).ceil() as usize;
    let n = n.max(min_order + 30);
    n + (n % 2)
}

/// Series/recurrence branch; accurate for `0 < x` up to a few tens.
pub(crate) fn bessel01_recurrence(x: f64) -> Bessel01 {
    let start = miller_start(x, 0);
    let two_over_x = 2.0 / x;

    // Unnormalised backward sweep. `next` holds J_{k+1}, `cur` holds J_k.
    let mut next = 0.0_f64;
    let mut cur = 1e-300_f64;
    let mut norm = 0.0_f64; // J0 + 2 Σ J_{2k}
    let mut y0_sum = 0.0_f64; // Σ_{k>=1} (-1)^k J_{2k} / k
    let mut y1_sum = 0.0_f64; // Σ_{k>=1} (-1)^k (J_{2k-1} - J_{2k+1}) / k
    let mut j1 = 0.0_f64;

    // cur = J_start at entry. Walk down: J_{k-1} = (2k/x) J_k - J_{k+1}.
    let mut k = start;
    let mut prev_odd = 0.0_f64; // J at the last odd index visited
    loop {
        if k % 2 == 0 && k > 0 {
            let half = (k / 2) as f64;
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            norm += 2.0 * cur;
            y0_sum += sign * cur / half;
        }
        if k % 2 == 1 {
            // k = 2m - 1 pairs with J_{2m+1} seen two steps earlier.
            let m = (k + 1) / 2;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            y1_sum += sign * (cur - prev_odd) / m as f64;
            prev_odd = cur;
        }
        if k == 1 {
            j1 = cur;
        }
        if k == 0 {
            norm += cur;
            break;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            cur *= s;
            next *= s;
            norm *= s;
            y0_sum *= s;
            y1_sum *= s;
            j1 *= s;
            prev_odd *= s;
        }
    }
    let j0 = cur / norm;
    let j1 = j1 / norm;
    let y0_sum = y0_sum / norm;
    let y1_sum = y1_sum / norm;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * (log_term * j0 - 2.0 * y0_sum);
    let y1 = -FRAC_2_PI / x * j0 + FRAC_2_PI * (log_term * j1 + y1_sum);
    Bessel01 { j0, j1, y0, y1 }
}

/// Hankel asymptotic expansion branch; accurate for `x ≳ 15`.
pub(crate) fn bessel01_asymptotic(x: f64) -> Bessel01 {
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    let amp = (FRAC_2_PI / x).sqrt();
    let chi0 = x - FRAC_PI_4;
    let (s0, c0) = chi0.sin_cos();
    // chi1 = chi0 - π/2
    let (s1, c1) = (-c0, s0);
    Bessel01 {
        j0: amp * (p0 * c0 - q0 * s0),
        y0: amp * (p0 * s0 + q0 * c0),
        j1: amp * (p1 * c1 - q1 * s1),
        y1: amp * (p1 * s1 + q1 * c1),
    }
}

fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // a_k / x^k with sign (-1)^{floor(k/2)}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 * p.abs().max(1e-300) {
            break;
        }
    }
    (p, q)
}

/// `J_0(x) .. J_max_order(x)` by normalised backward recurrence.
/// Valid for moderate `x` (the circle oracle uses it with `x` below ~50).
pub fn bessel_j_sequence(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("J requires finite x >= 0, got {x}")));
    }
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }
    let start = miller_start(x, max_order);
    let two_over_x = 2.0 / x;
    let mut next = 0.0_f64;
    let mut cur = 1e-300_f64;
    let mut norm = 0.0_f64;
    let mut k = start;
    loop {
        if k <= max_order {
            out[k] = cur;
        }
        if k == 0 {
            norm += cur;
            break;
        }
        if k % 2 == 0 {
            norm += 2.0 * cur;
        }
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        k -= 1;
        if cur.abs() > RESCALE_THRESHOLD {
            let s = 1.0 / RESCALE_THRESHOLD;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= norm;
    }
    Ok(out)
}

/// `Y_0(x) .. Y_max_order(x)` by forward recurrence from Y₀, Y₁.
pub fn bessel_y_sequence(max_order: usize, x: f64) -> Result<Vec<f64>> {
    let b = bessel01(x)?;
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(b.y0);
    if max_order >= 1 {
        out.push(b.y1);
    }
    for k in 1..max_order {
        let v = 2.0 * k as f64 / x * out[k] - out[k - 1];
        out.push(v);
    }
    Ok(out)
}
