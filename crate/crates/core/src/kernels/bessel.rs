//! Bessel functions of order zero.
//!
//! Power series up to `x = 12`, Hankel asymptotic expansion (truncated at its smallest
//! term) beyond. Both branches stay well under `1e-9` absolute error on `(0, 1e4]`.

use crate::{FioError, Result};
use std::f64::consts::{FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 12.0;

fn series(x: f64) -> (f64, f64) {
    // j0 = Σ (-y)^k/(k!)^2, and Σ (-1)^{k+1} H_k y^k/(k!)^2 for y0
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut j0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -y / (kf * kf);
        harmonic += 1.0 / kf;
        j0 += term;
        tail -= harmonic * term;
        if term.abs() < 1e-18 * j0.abs().max(1e-3) && kf * kf > y {
            break;
        }
    }
    let y0 = (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j0 + tail);
    (j0, y0)
}

fn asymptotic(x: f64) -> (f64, f64) {
    // b_k = Π_{m≤k} (-(2m-1)^2) / (k! (8x)^k); P = Σ (-1)^k b_{2k}, Q = Σ (-1)^k b_{2k+1}
    let mut p = 1.0;
    let mut q = 0.0;
    let mut b: f64 = 1.0;
    for k in 1..100 {
        let kf = k as f64;
        let next = b * (-(2.0 * kf - 1.0).powi(2)) / (8.0 * kf * x);
        if next.abs() >= b.abs() {
            break;
        }
        b = next;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * b;
        } else {
            q += sign * b;
        }
        if b.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = (x - FRAC_PI_4).sin_cos();
    let scale = (2.0 / (PI * x)).sqrt();
    (scale * (p * c - q * s), scale * (p * s + q * c))
}

/// `J_0(x)`; even in `x`.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SERIES_LIMIT {
        series(x).0
    } else {
        asymptotic(x).0
    }
}

/// `Y_0(x)` for `x > 0`.
pub fn bessel_y0(x: f64) -> Result<f64> {
    if x <= 0.0 || !x.is_finite() {
        return Err(FioError::BesselDomain(x));
    }
    Ok(if x <= SERIES_LIMIT {
        series(x).1
    } else {
        asymptotic(x).1
    })
}

/// `(J_0(x), Y_0(x))` for `x > 0`, sharing the work of both.
pub fn bessel_j0_y0(x: f64) -> Result<(f64, f64)> {
    if x <= 0.0 || !x.is_finite() {
        return Err(FioError::BesselDomain(x));
    }
    Ok(if x <= SERIES_LIMIT {
        series(x)
    } else {
        asymptotic(x)
    })
}
