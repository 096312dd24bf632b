//! The full operator: butterflies over the coronas plus a direct sum over the center.
//!
//! ```text
//! u(x) = Σ_{ξ∈Ω_d} a e^{2πiΦ} f̂  +  Σ_j Σ_{ξ∈Ω_j} a e^{2πiΦ} f̂
//! ```
//!
//! Coronas whose scale `N_j` is below `b²` cannot hold a butterfly schedule and are added
//! to the direct term. A non-unit amplitude is first split as `a ≈ Σ_t g_t(x) h_t(ξ)`;
//! every `h_t f̂` then rides through the butterflies as one extra right-hand side and the
//! outputs are recombined with `g_t`. The direct term always uses the exact amplitude.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::butterfly::{CoronaButterfly, GridFit, MemoryProbe};
use crate::cis::phase_row;
use crate::geometry::{build_corona_decomposition, CoronaDecomposition, FrequencyGrid, SpatialGrid};
use crate::kernels::{factorize_amplitude, Amplitude, AmplitudeFactorization, FactorizeConfig, Phase};
use crate::{FioError, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Discretization and approximation parameters.
#[derive(Clone, Debug)]
pub struct OperatorConfig {
    pub n: usize,
    /// Chebyshev points per dimension.
    pub q: usize,
    /// Leaf box width of the frequency trees.
    pub b: usize,
    /// The center square has side `2^s + 1`.
    pub s: u32,
    pub fit: GridFit,
    pub amplitude: FactorizeConfig,
    /// Route a unit amplitude through the factorization anyway.
    pub force_factorized: bool,
}

impl OperatorConfig {
    pub fn new(n: usize, q: usize) -> Self {
        Self {
            n,
            q,
            b: 8,
            s: 5,
            fit: GridFit::default(),
            amplitude: FactorizeConfig::default(),
            force_factorized: false,
        }
    }
}

/// Output of one application together with where the time went.
#[derive(Clone, Debug)]
pub struct ApplyReport {
    /// `[spatial index][rhs]`.
    pub u: Vec<Complex64>,
    /// Wall time per butterfly corona, in corona order.
    pub corona_ms: Vec<f64>,
    pub direct_ms: f64,
    /// Includes evaluating `g_t` and `h_t` on the lattices.
    pub amplitude_ms: f64,
}

/// A planned operator `f̂ ↦ u`.
pub struct FioOperator<const D: usize, P: Phase<D>, A: Amplitude<D>> {
    cfg: OperatorConfig,
    phase: P,
    amp: A,
    dec: CoronaDecomposition<D>,
    plans: Vec<CoronaButterfly<D, P>>,
    /// Frequency indices summed directly: the center and any folded coronas.
    direct_set: Vec<usize>,
    factorization: Option<AmplitudeFactorization<D>>,
    setup_ms: f64,
}

impl<const D: usize, P: Phase<D> + Clone, A: Amplitude<D>> FioOperator<D, P, A> {
    pub fn new(phase: P, amp: A, cfg: OperatorConfig) -> Result<Self> {
        let t0 = Instant::now();
        let dec = build_corona_decomposition::<D>(cfg.n, cfg.s)?;
        if cfg.q < 2 {
            return Err(FioError::InvalidOrder(cfg.q));
        }
        if cfg.b < 4 || !cfg.b.is_power_of_two() {
            return Err(FioError::InvalidBoxWidth(cfg.b));
        }
        let mut plans = Vec::new();
        let mut direct_set = dec.center().to_vec();
        for j in 1..=dec.count() {
            if dec.scale(j) < cfg.b * cfg.b {
                direct_set.extend_from_slice(dec.corona(j));
            } else {
                plans.push(CoronaButterfly::with_fit(phase.clone(), &dec, j, cfg.q, cfg.b, cfg.fit)?);
            }
        }
        direct_set.sort_unstable();
        let factorization = if (!amp.is_unit() || cfg.force_factorized) && !plans.is_empty() {
            let coronas: Vec<usize> = plans.iter().map(|p| p.corona()).collect();
            Some(factorize_amplitude(&amp, &dec, &coronas, &cfg.amplitude)?)
        } else {
            None
        };
        Ok(Self {
            cfg,
            phase,
            amp,
            dec,
            plans,
            direct_set,
            factorization,
            setup_ms: t0.elapsed().as_secs_f64() * 1e3,
        })
    }

    pub fn config(&self) -> &OperatorConfig {
        &self.cfg
    }

    pub fn decomposition(&self) -> &CoronaDecomposition<D> {
        &self.dec
    }

    /// Coronas handled by butterflies.
    pub fn butterfly_coronas(&self) -> Vec<usize> {
        self.plans.iter().map(|p| p.corona()).collect()
    }

    /// Number of frequencies summed directly.
    pub fn direct_len(&self) -> usize {
        self.direct_set.len()
    }

    /// Separation rank of the amplitude, when the factorized route is active.
    pub fn amplitude_rank(&self) -> Option<usize> {
        self.factorization.as_ref().map(|f| f.rank())
    }

    pub fn factorization(&self) -> Option<&AmplitudeFactorization<D>> {
        self.factorization.as_ref()
    }

    /// Wall time spent in [`Self::new`].
    pub fn setup_ms(&self) -> f64 {
        self.setup_ms
    }

    /// Counts coefficient storage of every butterfly in `probe`.
    pub fn with_probe(mut self, probe: std::sync::Arc<MemoryProbe>) -> Self {
        self.plans = self.plans.into_iter().map(|p| p.with_probe(probe.clone())).collect();
        self
    }

    fn lattice_len(&self) -> usize {
        self.cfg.n.pow(D as u32)
    }

    fn check_len(&self, f_hat: &[Complex64], nrhs: usize) -> Result<()> {
        let expected = self.lattice_len() * nrhs;
        if nrhs == 0 || f_hat.len() != expected {
            return Err(FioError::LengthMismatch {
                expected,
                got: f_hat.len(),
            });
        }
        Ok(())
    }

    /// `u = L f̂` on the spatial lattice.
    pub fn apply(&self, f_hat: &[Complex64]) -> Result<Vec<Complex64>> {
        Ok(self.apply_batch(f_hat, 1)?.u)
    }

    /// Applies the operator to `nrhs` inputs laid out `[frequency index][rhs]`.
    pub fn apply_batch(&self, f_hat: &[Complex64], nrhs: usize) -> Result<ApplyReport> {
        self.check_len(f_hat, nrhs)?;
        let len = self.lattice_len();
        let t0 = Instant::now();
        let mut u = self.direct_sum(&self.direct_set, f_hat, nrhs);
        let direct_ms = t0.elapsed().as_secs_f64() * 1e3;
        let mut corona_ms = Vec::with_capacity(self.plans.len());
        let mut amplitude_ms = 0.0;
        match &self.factorization {
            None => {
                for plan in &self.plans {
                    let t = Instant::now();
                    let v = plan.apply_corona(f_hat, nrhs);
                    u.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
                    corona_ms.push(t.elapsed().as_secs_f64() * 1e3);
                }
            }
            Some(fac) => {
                let rank = fac.rank();
                let wide = nrhs * rank;
                let t = Instant::now();
                // h_t(ξ) f̂_k(ξ) at column k·rank + t, zero outside the butterfly coronas
                let grid = FrequencyGrid::<D>::new(self.cfg.n)?;
                let mut in_corona = vec![false; len];
                for plan in &self.plans {
                    for &i in self.dec.corona(plan.corona()) {
                        in_corona[i] = true;
                    }
                }
                let mut weighted = vec![ZERO; len * wide];
                weighted.par_chunks_mut(wide).enumerate().for_each(|(i, row)| {
                    let src = &f_hat[i * nrhs..(i + 1) * nrhs];
                    if !in_corona[i] || src.iter().all(|v| *v == ZERO) {
                        return;
                    }
                    let h = fac.eval_h(&self.amp, &grid.point_f64(i));
                    for (k, f) in src.iter().enumerate() {
                        for (t, ht) in h.iter().enumerate() {
                            row[k * rank + t] = ht * f;
                        }
                    }
                });
                amplitude_ms += t.elapsed().as_secs_f64() * 1e3;
                let mut acc = vec![ZERO; len * wide];
                for plan in &self.plans {
                    let t = Instant::now();
                    let v = plan.apply_corona(&weighted, wide);
                    acc.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
                    corona_ms.push(t.elapsed().as_secs_f64() * 1e3);
                }
                let t = Instant::now();
                let xs = SpatialGrid::<D>::new(self.cfg.n)?;
                u.par_chunks_mut(nrhs).enumerate().for_each(|(i, out)| {
                    let g = fac.eval_g(&self.amp, &xs.point(i));
                    let row = &acc[i * wide..(i + 1) * wide];
                    for (k, o) in out.iter_mut().enumerate() {
                        *o += g.iter().zip(&row[k * rank..(k + 1) * rank]).map(|(a, b)| a * b).sum::<Complex64>();
                    }
                });
                amplitude_ms += t.elapsed().as_secs_f64() * 1e3;
            }
        }
        Ok(ApplyReport {
            u,
            corona_ms,
            direct_ms,
            amplitude_ms,
        })
    }

    /// `Σ_{ξ∈Ω_d} a(x,ξ) e^{2πiΦ(x,ξ)} f̂(ξ)` over the center square only, exactly.
    pub fn direct_center(&self, f_hat: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(f_hat, 1)?;
        Ok(self.direct_sum(self.dec.center(), f_hat, 1))
    }

    /// Exact sum over the frequency indices `set` at every lattice point.
    fn direct_sum(&self, set: &[usize], f_hat: &[Complex64], nrhs: usize) -> Vec<Complex64> {
        let grid = FrequencyGrid::<D>::new(self.cfg.n).expect("validated size");
        let xs = SpatialGrid::<D>::new(self.cfg.n).expect("validated size");
        let active: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&i| f_hat[i * nrhs..(i + 1) * nrhs].iter().any(|v| *v != ZERO))
            .collect();
        let mut u = vec![ZERO; xs.len() * nrhs];
        if active.is_empty() {
            return u;
        }
        let xis: Vec<[f64; D]> = active.iter().map(|&i| grid.point_f64(i)).collect();
        let coef: Vec<Complex64> = active
            .iter()
            .flat_map(|&i| f_hat[i * nrhs..(i + 1) * nrhs].iter().copied())
            .collect();
        let unit = self.amp.is_unit();
        u.par_chunks_mut(nrhs).enumerate().for_each_init(
            || (vec![0.0; xis.len()], vec![0.0; xis.len()]),
            |(re, im), (i, out)| {
                let x = xs.point(i);
                phase_row(&self.phase, &self.phase.site(&x), &xis, 1.0, re, im);
                if !unit {
                    for (k, xi) in xis.iter().enumerate() {
                        let w = Complex64::new(re[k], im[k]) * self.amp.eval(&x, xi);
                        re[k] = w.re;
                        im[k] = w.im;
                    }
                }
                crate::butterfly::tensor::kernel_row_times(re, im, &coef, nrhs, out);
            },
        );
        u
    }
}
