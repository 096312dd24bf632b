//! `e^{2πit}` for phases measured in turns.
//!
//! Phases in this crate grow like `N`, and almost all of the run time goes to turning
//! them into unit complex numbers. The argument is reduced to the nearest quarter turn
//! and the remainder (`|θ| ≤ π/4`) goes through short Taylor polynomials, which is exact
//! to a few ulp and free of branches, so rows of phases vectorize.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::kernels::{Phase, Site};

// sin: x - x^3/3! + ... + x^15/15!
const S: [f64; 7] = [
    -1.0 / 6.0,
    1.0 / 120.0,
    -1.0 / 5040.0,
    1.0 / 362_880.0,
    -1.0 / 39_916_800.0,
    1.0 / 6_227_020_800.0,
    -1.0 / 1_307_674_368_000.0,
];
// cos: 1 - x^2/2! + ... + x^16/16!
const C: [f64; 8] = [
    -0.5,
    1.0 / 24.0,
    -1.0 / 720.0,
    1.0 / 40_320.0,
    -1.0 / 3_628_800.0,
    1.0 / 479_001_600.0,
    -1.0 / 87_178_291_200.0,
    1.0 / 20_922_789_888_000.0,
];

/// Returns `(cos 2πt, sin 2πt)`.
#[inline(always)]
pub fn cos_sin_turns(t: f64) -> (f64, f64) {
    // adding 1.5·2^52 rounds 4t to an integer held in the low mantissa bits
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    let shifted = t * 4.0 + SHIFT;
    let k = shifted - SHIFT;
    let quad = shifted.to_bits() & 3;
    let x = (t - 0.25 * k) * TAU;
    let x2 = x * x;
    let s = x
        * (1.0
            + x2 * (S[0]
                + x2 * (S[1] + x2 * (S[2] + x2 * (S[3] + x2 * (S[4] + x2 * (S[5] + x2 * S[6])))))));
    let c = 1.0
        + x2 * (C[0]
            + x2 * (C[1]
                + x2 * (C[2] + x2 * (C[3] + x2 * (C[4] + x2 * (C[5] + x2 * (C[6] + x2 * C[7])))))));
    // quadrant q: (c, s), (-s, c), (-c, -s), (s, -c)
    let swap = quad & 1 == 1;
    let (a, b) = if swap { (s, c) } else { (c, s) };
    let sign_re = 1.0 - 2.0 * (((quad + 1) >> 1) & 1) as f64;
    let sign_im = 1.0 - 2.0 * ((quad >> 1) & 1) as f64;
    (sign_re * a, sign_im * b)
}

/// `e^{2πit}`.
#[inline(always)]
pub fn cis_turns(t: f64) -> Complex64 {
    let (c, s) = cos_sin_turns(t);
    Complex64::new(c, s)
}

/// Elementwise `e^{2πi t_k}` (or `e^{-2πi t_k}` when `sign < 0`).
pub fn cis_turns_slice(turns: &[f64], sign: f64, out: &mut [Complex64]) {
    for (o, &t) in out.iter_mut().zip(turns) {
        let (c, s) = cos_sin_turns(t);
        *o = Complex64::new(c, sign * s);
    }
}

#[inline(always)]
fn phase_row_body<const D: usize, P: Phase<D>>(
    phase: &P,
    site: &Site<D>,
    xis: &[[f64; D]],
    sign: f64,
    re: &mut [f64],
    im: &mut [f64],
) {
    for ((xi, r), i) in xis.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
        let (c, s) = cos_sin_turns(phase.eval_at(site, xi));
        *r = c;
        *i = sign * s;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn phase_row_avx2<const D: usize, P: Phase<D>>(
    phase: &P,
    site: &Site<D>,
    xis: &[[f64; D]],
    sign: f64,
    re: &mut [f64],
    im: &mut [f64],
) {
    phase_row_body(phase, site, xis, sign, re, im)
}

/// `e^{±2πiΦ(x, ξ_k)}` for one `x` against a row of frequencies, split into real and
/// imaginary parts. Uses AVX2/FMA code when the CPU has it.
pub fn phase_row<const D: usize, P: Phase<D>>(
    phase: &P,
    site: &Site<D>,
    xis: &[[f64; D]],
    sign: f64,
    re: &mut [f64],
    im: &mut [f64],
) {
    assert!(re.len() >= xis.len() && im.len() >= xis.len());
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
        // SAFETY: the required CPU features were just detected
        return unsafe { phase_row_avx2(phase, site, xis, sign, re, im) };
    }
    phase_row_body(phase, site, xis, sign, re, im)
}

#[inline(always)]
fn phase_col_body<const D: usize, P: Phase<D>>(
    phase: &P,
    sites: &[Site<D>],
    xi: &[f64; D],
    sign: f64,
    re: &mut [f64],
    im: &mut [f64],
) {
    for ((site, r), i) in sites.iter().zip(re.iter_mut()).zip(im.iter_mut()) {
        let (c, s) = cos_sin_turns(phase.eval_at(site, xi));
        *r = c;
        *i = sign * s;
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2,fma")]
unsafe fn phase_col_avx2<const D: usize, P: Phase<D>>(
    phase: &P,
    sites: &[Site<D>],
    xi: &[f64; D],
    sign: f64,
    re: &mut [f64],
    im: &mut [f64],
) {
    phase_col_body(phase, sites, xi, sign, re, im)
}

/// `e^{±2πiΦ(x_k, ξ)}` for a column of spatial sites against one frequency.
pub fn phase_col<const D: usize, P: Phase<D>>(
    phase: &P,
    sites: &[Site<D>],
    xi: &[f64; D],
    sign: f64,
    re: &mut [f64],
    im: &mut [f64],
) {
    assert!(re.len() >= sites.len() && im.len() >= sites.len());
    #[cfg(target_arch = "x86_64")]
    if std::is_x86_feature_detected!("avx2") && std::is_x86_feature_detected!("fma") {
        // SAFETY: the required CPU features were just detected
        return unsafe { phase_col_avx2(phase, sites, xi, sign, re, im) };
    }
    phase_col_body(phase, sites, xi, sign, re, im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_libm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut worst: f64 = 0.0;
        for i in 0..200_000 {
            let t = if i % 2 == 0 {
                rng.gen_range(-2.0..2.0)
            } else {
                rng.gen_range(-3000.0..3000.0)
            };
            let z = cis_turns(t);
            // reference on the reduced argument so libm sees the same input precision
            let r = t - t.round();
            let (s, c) = (TAU * r).sin_cos();
            worst = worst.max((z.re - c).abs()).max((z.im - s).abs());
        }
        assert!(worst < 4e-16, "worst = {worst:e}");
    }

    #[test]
    fn phase_row_matches_pointwise() {
        use crate::kernels::EllipsePhase;
        let site = EllipsePhase.site(&[0.3, 0.8]);
        let xis: Vec<[f64; 2]> = (0..37).map(|k| [k as f64 * 3.5 - 60.0, 91.0 - k as f64]).collect();
        let (mut re, mut im) = (vec![0.0; 37], vec![0.0; 37]);
        phase_row(&EllipsePhase, &site, &xis, -1.0, &mut re, &mut im);
        for (k, xi) in xis.iter().enumerate() {
            let z = cis_turns(-EllipsePhase.eval_at(&site, xi));
            assert!((re[k] - z.re).abs() < 1e-15 && (im[k] - z.im).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrants() {
        for (t, re, im) in [(0.0, 1.0, 0.0), (0.25, 0.0, 1.0), (0.5, -1.0, 0.0), (-0.25, 0.0, -1.0), (7.75, 0.0, -1.0)] {
            let z = cis_turns(t);
            assert!((z.re - re).abs() < 1e-16 && (z.im - im).abs() < 1e-16, "t={t}");
        }
    }
}
