//! Trigonometry in units of half-turns.
//!
//! Arguments are reduced exactly before calling into `sin`/`cos`, so integer
//! and half-integer arguments produce exact zeros and unit values, and
//! `sin_pi(x + 2) == sin_pi(x)` holds to the rounding of `x` itself.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Returns `(sin(pi x), cos(pi x))`.
pub fn sin_cos_pi(x: f64) -> (f64, f64) {
    if !x.is_finite() {
        return (f64::NAN, f64::NAN);
    }
    // r in [-1, 1], exact for |x| < 2^52
    let r = x - 2.0 * (0.5 * x).round();
    let (flip, r) = if r > 0.5 {
        (-1.0, r - 1.0)
    } else if r < -0.5 {
        (-1.0, r + 1.0)
    } else {
        (1.0, r)
    };
    let (s, c) = if r.abs() > 0.25 {
        let sign = r.signum();
        let q = 0.5 * sign - r;
        let (sq, cq) = (PI * q).sin_cos();
        (sign * cq, sign * sq)
    } else {
        (PI * r).sin_cos()
    };
    (flip * s, flip * c)
}

pub fn sin_pi(x: f64) -> f64 {
    sin_cos_pi(x).0
}

/// `exp(i pi x)`.
pub fn cis_pi(x: f64) -> Complex64 {
    let (s, c) = sin_cos_pi(x);
    Complex64::new(c, s)
}

/// `exp(i 2 pi t)`, with `t` measured in full turns.
pub fn cis_turns(t: f64) -> Complex64 {
    cis_pi(2.0 * t)
}

/// Normalized sinc, `sin(pi x) / (pi x)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        sin_pi(x) / (PI * x)
    }
}
