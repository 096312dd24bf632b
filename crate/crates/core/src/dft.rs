//! Forward DFT from samples on `X` to the centered frequency lattice `Ω`.
//!
//! `f̂(ξ) = N^{-d} Σ_{x∈X} e^{-2πi x·ξ} f(x)`, indexed like
//! [`FrequencyGrid`](crate::geometry::FrequencyGrid) (coordinate `ξ_i + N/2`).

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::geometry::{linear_index, multi_index, SpatialGrid};
use crate::{FioError, Result};

/// Forward transform of `f` (laid out like [`SpatialGrid`]) with `1/N^d` normalization.
pub fn dft_forward<const D: usize>(f: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    let grid = SpatialGrid::<D>::new(n)?;
    if f.len() != grid.len() {
        return Err(FioError::LengthMismatch {
            expected: grid.len(),
            got: f.len(),
        });
    }
    let mut data = f.to_vec();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..D {
        let stride = n.pow((D - 1 - axis) as u32);
        let outer = grid.len() / (n * stride);
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
    // fftshift: lattice coordinate c holds the FFT bin (c + N/2) mod N
    let scale = 1.0 / grid.len() as f64;
    let half = n / 2;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let c: [usize; D] = multi_index(idx, n);
        let k: [usize; D] = std::array::from_fn(|i| (c[i] + half) % n);
        *o = data[linear_index(&k, n)] * scale;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cis::cis_turns;
    use crate::geometry::FrequencyGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive<const D: usize>(f: &[Complex64], n: usize) -> Vec<Complex64> {
        let xs = SpatialGrid::<D>::new(n).unwrap();
        let xis = FrequencyGrid::<D>::new(n).unwrap();
        (0..xis.len())
            .map(|k| {
                let xi = xis.point_f64(k);
                let sum: Complex64 = (0..xs.len())
                    .map(|i| {
                        let x = xs.point(i);
                        let dot: f64 = (0..D).map(|a| x[a] * xi[a]).sum();
                        cis_turns(-dot) * f[i]
                    })
                    .sum();
                sum / xs.len() as f64
            })
            .collect()
    }

    #[test]
    fn constant_maps_to_origin() {
        let f = vec![Complex64::new(1.0, 0.0); 64];
        let fh = dft_forward::<2>(&f, 8).unwrap();
        let origin = FrequencyGrid::<2>::new(8).unwrap().index_of(&[0, 0]).unwrap();
        for (k, v) in fh.iter().enumerate() {
            let expect = if k == origin { 1.0 } else { 0.0 };
            assert!((v - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn plane_wave_maps_to_indicator() {
        let n = 16;
        let xs = SpatialGrid::<2>::new(n).unwrap();
        let xi0 = [-8i64, 5];
        let f: Vec<Complex64> = (0..xs.len())
            .map(|i| {
                let x = xs.point(i);
                cis_turns(x[0] * xi0[0] as f64 + x[1] * xi0[1] as f64)
            })
            .collect();
        let fh = dft_forward::<2>(&f, n).unwrap();
        let target = FrequencyGrid::<2>::new(n).unwrap().index_of(&xi0).unwrap();
        for (k, v) in fh.iter().enumerate() {
            let expect = if k == target { 1.0 } else { 0.0 };
            assert!((v - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<Complex64> = (0..256).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        let fast = dft_forward::<2>(&f, 16).unwrap();
        let slow = naive::<2>(&f, 16);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        let f: Vec<Complex64> = (0..512).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
        let fast = dft_forward::<3>(&f, 8).unwrap();
        let slow = naive::<3>(&f, 8);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_wrong_length() {
        assert!(matches!(
            dft_forward::<2>(&[Complex64::new(0.0, 0.0); 10], 4),
            Err(FioError::LengthMismatch { .. })
        ));
    }
}
