//! Separated approximation `a(x,ξ) ≈ Σ_t g_t(x) h_t(ξ)` of a non-oscillatory amplitude.
//!
//! Adaptive cross approximation with full pivoting on a sampled matrix `a(x_i, ξ_k)`.
//! Each step removes the cross through the largest remaining entry, so the factors are
//! built from rows and columns of `a` itself and extend to any new point through the
//! recurrences
//!
//! ```text
//! g_k(x) = a(x, ξ_{j_k}) - Σ_{m<k} g_m(x) h_m(ξ_{j_k})
//! h_k(ξ) = (a(x_{i_k}, ξ) - Σ_{m<k} g_m(x_{i_k}) h_m(ξ)) / p_k
//! ```
//!
//! where `(x_{i_k}, ξ_{j_k})` is the k-th pivot and `p_k` the residual entry there.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Amplitude;
use crate::geometry::{CoronaDecomposition, FrequencyGrid};
use crate::{FioError, Result};

/// Sampling and stopping parameters.
#[derive(Clone, Debug)]
pub struct FactorizeConfig {
    /// Stop once the sampled residual is at most `tol · max|a|`.
    pub tol: f64,
    pub rank_cap: usize,
    /// Target number of spatial samples (rounded to a full tensor lattice).
    pub x_samples: usize,
    /// Target number of frequency samples, split evenly between coronas.
    pub xi_samples: usize,
    pub seed: u64,
}

impl Default for FactorizeConfig {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            rank_cap: 64,
            x_samples: 48 * 48,
            xi_samples: 48 * 48,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AmplitudeFactorization<const D: usize> {
    x_pivots: Vec<[f64; D]>,
    xi_pivots: Vec<[f64; D]>,
    pivots: Vec<Complex64>,
    /// `h_m(ξ_{j_k})` for `m < k`.
    h_at_cols: Vec<Vec<Complex64>>,
    /// `g_m(x_{i_k})` for `m < k`.
    g_at_rows: Vec<Vec<Complex64>>,
    /// Largest `|a|` on the sample.
    pub scale: f64,
    /// Largest entry of the final residual on the sample.
    pub residual_bound: f64,
}

impl<const D: usize> AmplitudeFactorization<D> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Pivot pairs `(x_{i_k}, ξ_{j_k})` in selection order.
    pub fn pivot_points(&self) -> impl Iterator<Item = (&[f64; D], &[f64; D])> {
        self.x_pivots.iter().zip(&self.xi_pivots)
    }

    /// All `g_t(x)`.
    pub fn eval_g<A: Amplitude<D>>(&self, amp: &A, x: &[f64; D]) -> Vec<Complex64> {
        let mut g = Vec::with_capacity(self.rank());
        for (k, col) in self.xi_pivots.iter().enumerate() {
            let mut v = amp.eval(x, col);
            for (gm, hm) in g.iter().zip(&self.h_at_cols[k]) {
                v -= gm * hm;
            }
            g.push(v);
        }
        g
    }

    /// All `h_t(ξ)`.
    pub fn eval_h<A: Amplitude<D>>(&self, amp: &A, xi: &[f64; D]) -> Vec<Complex64> {
        let mut h = Vec::with_capacity(self.rank());
        for (k, row) in self.x_pivots.iter().enumerate() {
            let mut v = amp.eval(row, xi);
            for (hm, gm) in h.iter().zip(&self.g_at_rows[k]) {
                v -= gm * hm;
            }
            h.push(v / self.pivots[k]);
        }
        h
    }

    /// `Σ_t g_t(x) h_t(ξ)`.
    pub fn eval<A: Amplitude<D>>(&self, amp: &A, x: &[f64; D], xi: &[f64; D]) -> Complex64 {
        self.eval_g(amp, x)
            .iter()
            .zip(self.eval_h(amp, xi))
            .map(|(g, h)| g * h)
            .sum()
    }
}

/// Jittered tensor lattice of about `target` points in `[0,1)^D`.
fn spatial_samples<const D: usize>(target: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; D]> {
    let side = ((target as f64).powf(1.0 / D as f64).round() as usize).max(2);
    (0..side.pow(D as u32))
        .map(|lin| {
            let idx: [usize; D] = crate::geometry::multi_index(lin, side);
            std::array::from_fn(|i| (idx[i] as f64 + rng.gen::<f64>()) / side as f64)
        })
        .collect()
}

/// Frequency samples drawn without replacement, an equal share from each corona.
fn frequency_samples<const D: usize>(
    dec: &CoronaDecomposition<D>,
    coronas: &[usize],
    target: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<[f64; D]>> {
    let grid = FrequencyGrid::<D>::new(dec.n())?;
    let share = target.div_ceil(coronas.len().max(1));
    let mut out = Vec::with_capacity(target);
    for &j in coronas {
        let pool = dec.corona(j);
        let take = share.min(pool.len());
        for &i in pool.choose_multiple(rng, take) {
            out.push(grid.point_f64(i));
        }
    }
    Ok(out)
}

/// Cross approximation of `amp` over the coronas `coronas` of `dec` (the center is never sampled).
pub fn factorize_amplitude<const D: usize, A: Amplitude<D>>(
    amp: &A,
    dec: &CoronaDecomposition<D>,
    coronas: &[usize],
    cfg: &FactorizeConfig,
) -> Result<AmplitudeFactorization<D>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let xs = spatial_samples::<D>(cfg.x_samples, &mut rng);
    let xis = frequency_samples(dec, coronas, cfg.xi_samples, &mut rng)?;
    factorize_on_samples(amp, &xs, &xis, cfg.tol, cfg.rank_cap)
}

/// Cross approximation on an explicit sample product set.
pub fn factorize_on_samples<const D: usize, A: Amplitude<D>>(
    amp: &A,
    xs: &[[f64; D]],
    xis: &[[f64; D]],
    tol: f64,
    rank_cap: usize,
) -> Result<AmplitudeFactorization<D>> {
    let (rows, cols) = (xs.len(), xis.len());
    let mut r = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut scale: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        for (k, xi) in xis.iter().enumerate() {
            let v = amp.eval(x, xi);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(FioError::NonFiniteAmplitude);
            }
            scale = scale.max(v.norm());
            r[i * cols + k] = v;
        }
    }
    let mut fac = AmplitudeFactorization {
        x_pivots: Vec::new(),
        xi_pivots: Vec::new(),
        pivots: Vec::new(),
        h_at_cols: Vec::new(),
        g_at_rows: Vec::new(),
        scale,
        residual_bound: 0.0,
    };
    if rows == 0 || cols == 0 || scale == 0.0 {
        return Ok(fac);
    }
    let threshold = tol * scale;
    // sampled values of the factors built so far, kept to fill the recurrence tables
    let mut g_cols: Vec<Vec<Complex64>> = Vec::new();
    let mut h_rows: Vec<Vec<Complex64>> = Vec::new();
    loop {
        let (pos, max) = r
            .iter()
            .enumerate()
            .map(|(p, v)| (p, v.norm()))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if max <= threshold {
            fac.residual_bound = max;
            return Ok(fac);
        }
        if fac.rank() == rank_cap {
            return Err(FioError::RankCapExceeded {
                cap: rank_cap,
                residual: max / scale,
                tol,
            });
        }
        let (pi, pj) = (pos / cols, pos % cols);
        let pivot = r[pos];
        let g: Vec<Complex64> = (0..rows).map(|i| r[i * cols + pj]).collect();
        let h: Vec<Complex64> = (0..cols).map(|k| r[pi * cols + k] / pivot).collect();
        for i in 0..rows {
            let gi = g[i];
            if gi == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (v, hk) in r[i * cols..(i + 1) * cols].iter_mut().zip(&h) {
                *v -= gi * hk;
            }
        }
        fac.h_at_cols.push(h_rows.iter().map(|hm| hm[pj]).collect());
        fac.g_at_rows.push(g_cols.iter().map(|gm| gm[pi]).collect());
        fac.x_pivots.push(xs[pi]);
        fac.xi_pivots.push(xis[pj]);
        fac.pivots.push(pivot);
        g_cols.push(g);
        h_rows.push(h);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_corona_decomposition;
    use crate::kernels::{FnAmplitude, HankelAmplitude, UnitAmplitude};

    fn small_cfg() -> FactorizeConfig {
        FactorizeConfig {
            x_samples: 16 * 16,
            xi_samples: 256,
            ..Default::default()
        }
    }

    #[test]
    fn unit_amplitude_has_rank_one() {
        let dec = build_corona_decomposition::<2>(64, 3).unwrap();
        let fac = factorize_amplitude(&UnitAmplitude, &dec, &[1, 2, 3], &small_cfg()).unwrap();
        assert_eq!(fac.rank(), 1);
        assert_eq!(fac.residual_bound, 0.0);
        let g = fac.eval_g(&UnitAmplitude, &[0.3, 0.9]);
        let h = fac.eval_h(&UnitAmplitude, &[-17.0, 5.0]);
        assert_eq!(g, vec![Complex64::new(1.0, 0.0)]);
        assert_eq!(h, vec![Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn separable_amplitude_has_rank_one() {
        let amp = FnAmplitude(|x: &[f64; 2], xi: &[f64; 2]| Complex64::new(x[0].exp() * xi[0], 0.0));
        let dec = build_corona_decomposition::<2>(64, 3).unwrap();
        let fac = factorize_amplitude(&amp, &dec, &[1, 2, 3], &small_cfg()).unwrap();
        assert_eq!(fac.rank(), 1);
        for (x, xi) in [([0.1, 0.2], [30.0, -4.0]), ([0.95, 0.5], [-11.0, 20.0])] {
            let err = (fac.eval(&amp, &x, &xi) - amp.eval(&x, &xi)).norm();
            assert!(err <= 1e-12 * amp.eval(&x, &xi).norm().max(1.0));
        }
    }

    #[test]
    fn rank_cap_is_reported() {
        // an oscillatory kernel is far from low rank
        let amp = FnAmplitude(|x: &[f64; 2], xi: &[f64; 2]| {
            crate::cis::cis_turns(x[0] * xi[0] + x[1] * xi[1])
        });
        let dec = build_corona_decomposition::<2>(64, 3).unwrap();
        let cfg = FactorizeConfig {
            rank_cap: 8,
            ..small_cfg()
        };
        match factorize_amplitude(&amp, &dec, &[1, 2, 3], &cfg) {
            Err(FioError::RankCapExceeded { cap: 8, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_amplitude_is_rejected() {
        let amp = FnAmplitude(|_: &[f64; 2], xi: &[f64; 2]| Complex64::new(1.0 / (xi[0] - xi[0]), 0.0));
        let dec = build_corona_decomposition::<2>(32, 2).unwrap();
        assert!(matches!(
            factorize_amplitude(&amp, &dec, &[1, 2], &small_cfg()),
            Err(FioError::NonFiniteAmplitude)
        ));
    }

    #[test]
    fn hankel_amplitude_audit_on_fresh_pairs() {
        let amp = HankelAmplitude::default();
        let dec = build_corona_decomposition::<2>(256, 5).unwrap();
        let coronas: Vec<usize> = (1..=dec.count()).collect();
        let fac = factorize_amplitude(&amp, &dec, &coronas, &FactorizeConfig::default()).unwrap();
        assert!(fac.rank() <= 64);
        assert!(fac.residual_bound <= 1e-4 * fac.scale);

        let grid = FrequencyGrid::<2>::new(256).unwrap();
        let pool: Vec<usize> = coronas.iter().flat_map(|&j| dec.corona(j).iter().copied()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0xa0d17);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let x = [rng.gen::<f64>(), rng.gen::<f64>()];
            let xi = grid.point_f64(*pool.choose(&mut rng).unwrap());
            worst = worst.max((fac.eval(&amp, &x, &xi) - amp.eval(&x, &xi)).norm());
        }
        eprintln!(
            "hankel rank {} sampled residual {:.3e} fresh residual {:.3e} scale {:.3e}",
            fac.rank(),
            fac.residual_bound,
            worst,
            fac.scale
        );
        assert!(worst <= 2.0 * fac.residual_bound.max(1e-4 * fac.scale));
    }
}
