//! Brute-force evaluation and the sampled relative error used to score approximations.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cis::{cis_turns, phase_row};
use crate::geometry::{FrequencyGrid, SpatialGrid};
use crate::kernels::{Amplitude, Phase};
use crate::{FioError, Result};

/// Seed of the sample-set generator; kept apart from input seeds so that changing the
/// input never moves the sample points.
pub const SAMPLE_SEED: u64 = 0x5a3b_91c7_d0e4_2f68;

/// Default `|S|`.
pub const DEFAULT_SAMPLES: usize = 256;

/// `count` distinct spatial lattice indices drawn uniformly from the `n^D` lattice.
pub fn sample_set<const D: usize>(n: usize, count: usize, seed: u64) -> Result<Vec<usize>> {
    let grid = SpatialGrid::<D>::new(n)?;
    if count == 0 || count > grid.len() {
        return Err(FioError::Config(format!(
            "sample count {count} must be between 1 and {}",
            grid.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, grid.len(), count).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

fn check_len<const D: usize>(n: usize, f_hat: &[Complex64]) -> Result<FrequencyGrid<D>> {
    let grid = FrequencyGrid::<D>::new(n)?;
    if f_hat.len() != grid.len() {
        return Err(FioError::LengthMismatch {
            expected: grid.len(),
            got: f_hat.len(),
        });
    }
    Ok(grid)
}

/// `u(x) = Σ_{ξ∈Ω} a(x,ξ) e^{2πiΦ(x,ξ)} f̂(ξ)` at the spatial indices `samples`.
pub fn direct_apply_sampled<const D: usize, P: Phase<D>, A: Amplitude<D>>(
    phase: &P,
    amp: &A,
    n: usize,
    f_hat: &[Complex64],
    samples: &[usize],
) -> Result<Vec<Complex64>> {
    let grid = check_len::<D>(n, f_hat)?;
    let xs = SpatialGrid::<D>::new(n)?;
    let active: Vec<usize> = (0..grid.len()).filter(|&i| f_hat[i] != Complex64::new(0.0, 0.0)).collect();
    let xis: Vec<[f64; D]> = active.iter().map(|&i| grid.point_f64(i)).collect();
    let coef: Vec<Complex64> = active.iter().map(|&i| f_hat[i]).collect();
    let unit = amp.is_unit();
    Ok(samples
        .par_iter()
        .map(|&s| {
            let x = xs.point(s);
            let (mut re, mut im) = (vec![0.0; xis.len()], vec![0.0; xis.len()]);
            phase_row(phase, &phase.site(&x), &xis, 1.0, &mut re, &mut im);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, c) in coef.iter().enumerate() {
                let mut w = Complex64::new(re[k], im[k]);
                if !unit {
                    w *= amp.eval(&x, &xis[k]);
                }
                acc += w * c;
            }
            acc
        })
        .collect())
}

/// The same sum at every lattice point, accumulated frequency by frequency.
///
/// The loop order (and the scalar phase evaluation) is deliberately different from
/// [`direct_apply_sampled`] so the two can check each other.
pub fn direct_apply_full<const D: usize, P: Phase<D>, A: Amplitude<D>>(
    phase: &P,
    amp: &A,
    n: usize,
    f_hat: &[Complex64],
) -> Result<Vec<Complex64>> {
    let grid = check_len::<D>(n, f_hat)?;
    let xs = SpatialGrid::<D>::new(n)?;
    let points: Vec<[f64; D]> = (0..xs.len()).map(|i| xs.point(i)).collect();
    let mut u = vec![Complex64::new(0.0, 0.0); xs.len()];
    for (k, c) in f_hat.iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let xi = grid.point_f64(k);
        u.par_iter_mut().zip(&points).for_each(|(v, x)| {
            *v += amp.eval(x, &xi) * cis_turns(phase.eval(x, &xi)) * c;
        });
    }
    Ok(u)
}

/// `√(Σ|u_d − u_m|² / Σ|u_d|²)` over matching entries.
pub fn sampled_relative_error(approx: &[Complex64], direct: &[Complex64]) -> Result<f64> {
    if approx.len() != direct.len() || direct.is_empty() {
        return Err(FioError::LengthMismatch {
            expected: direct.len(),
            got: approx.len(),
        });
    }
    let den: f64 = direct.iter().map(|v| v.norm_sqr()).sum();
    if den == 0.0 {
        return Err(FioError::ZeroReference);
    }
    let num: f64 = approx.iter().zip(direct).map(|(a, d)| (a - d).norm_sqr()).sum();
    Ok((num / den).sqrt())
}
