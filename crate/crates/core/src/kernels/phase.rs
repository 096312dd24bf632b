use num_complex::Complex64;
use std::f64::consts::TAU;

use super::bessel::bessel_j0_y0;

/// A spatial point together with whatever the phase wants to cache about it.
///
/// Phases are evaluated millions of times per spatial point, so anything that depends
/// only on `x` (trig factors of the scenario coefficients, say) is computed once in
/// [`Phase::site`] and stored in `aux`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Site<const D: usize> {
    pub x: [f64; D],
    pub aux: [f64; 3],
}

impl<const D: usize> Site<D> {
    pub fn plain(x: [f64; D]) -> Self {
        Self { x, aux: [0.0; 3] }
    }

    #[inline(always)]
    pub fn dot(&self, xi: &[f64; D]) -> f64 {
        let mut acc = 0.0;
        for i in 0..D {
            acc += self.x[i] * xi[i];
        }
        acc
    }
}

/// A real phase `Φ(x, ξ)`, smooth for `ξ ≠ 0` and normally homogeneous of degree one in `ξ`.
pub trait Phase<const D: usize>: Send + Sync {
    fn site(&self, x: &[f64; D]) -> Site<D> {
        Site::plain(*x)
    }

    fn eval_at(&self, site: &Site<D>, xi: &[f64; D]) -> f64;

    fn eval(&self, x: &[f64; D], xi: &[f64; D]) -> f64 {
        self.eval_at(&self.site(x), xi)
    }

    /// Whether `Φ(x, λξ) = λΦ(x, ξ)` is claimed for `λ > 0`.
    fn homogeneous(&self) -> bool {
        true
    }
}

impl<const D: usize, P: Phase<D> + ?Sized> Phase<D> for &P {
    fn site(&self, x: &[f64; D]) -> Site<D> {
        (**self).site(x)
    }
    fn eval_at(&self, site: &Site<D>, xi: &[f64; D]) -> f64 {
        (**self).eval_at(site, xi)
    }
    fn homogeneous(&self) -> bool {
        (**self).homogeneous()
    }
}

/// Complex amplitude `a(x, ξ)`.
pub trait Amplitude<const D: usize>: Send + Sync {
    fn eval(&self, x: &[f64; D], xi: &[f64; D]) -> Complex64;

    /// True only for `a ≡ 1`, which lets the operator skip the factorization.
    fn is_unit(&self) -> bool {
        false
    }
}

impl<const D: usize, A: Amplitude<D> + ?Sized> Amplitude<D> for &A {
    fn eval(&self, x: &[f64; D], xi: &[f64; D]) -> Complex64 {
        (**self).eval(x, xi)
    }
    fn is_unit(&self) -> bool {
        (**self).is_unit()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct UnitAmplitude;

impl<const D: usize> Amplitude<D> for UnitAmplitude {
    fn eval(&self, _: &[f64; D], _: &[f64; D]) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn is_unit(&self) -> bool {
        true
    }
}

/// Phase from a closure.
pub struct FnPhase<F>(pub F);

impl<const D: usize, F> Phase<D> for FnPhase<F>
where
    F: Fn(&[f64; D], &[f64; D]) -> f64 + Send + Sync,
{
    fn eval_at(&self, site: &Site<D>, xi: &[f64; D]) -> f64 {
        (self.0)(&site.x, xi)
    }
}

/// Amplitude from a closure.
pub struct FnAmplitude<F>(pub F);

impl<const D: usize, F> Amplitude<D> for FnAmplitude<F>
where
    F: Fn(&[f64; D], &[f64; D]) -> Complex64 + Send + Sync,
{
    fn eval(&self, x: &[f64; D], xi: &[f64; D]) -> Complex64 {
        (self.0)(x, xi)
    }
}

/// `Φ = x·ξ`: the operator reduces to the inverse DFT.
#[derive(Clone, Copy, Debug, Default)]
pub struct PlaneWavePhase;

impl<const D: usize> Phase<D> for PlaneWavePhase {
    #[inline(always)]
    fn eval_at(&self, site: &Site<D>, xi: &[f64; D]) -> f64 {
        site.dot(xi)
    }
}

/// Axis lengths of the ellipse family shared by the 2D scenarios.
#[inline]
pub fn ellipse_axes(x: &[f64; 2]) -> (f64, f64) {
    let (s1, c1) = (TAU * x[0]).sin_cos();
    let (s2, c2) = (TAU * x[1]).sin_cos();
    ((2.0 + s1 * s2) / 3.0, (2.0 + c1 * c2) / 3.0)
}

/// `ρ(x, ξ) = √(c₁²(x)ξ₁² + c₂²(x)ξ₂²)`.
pub fn ellipse_radius(x: &[f64; 2], xi: &[f64; 2]) -> f64 {
    let (c1, c2) = ellipse_axes(x);
    ((c1 * xi[0]).powi(2) + (c2 * xi[1]).powi(2)).sqrt()
}

/// Generalized Radon transform over ellipses: `Φ = x·ξ + √(c₁²ξ₁² + c₂²ξ₂²)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EllipsePhase;

impl Phase<2> for EllipsePhase {
    fn site(&self, x: &[f64; 2]) -> Site<2> {
        let (c1, c2) = ellipse_axes(x);
        Site {
            x: *x,
            aux: [c1 * c1, c2 * c2, 0.0],
        }
    }

    #[inline(always)]
    fn eval_at(&self, site: &Site<2>, xi: &[f64; 2]) -> f64 {
        site.x[0] * xi[0]
            + site.x[1] * xi[1]
            + (site.aux[0] * xi[0] * xi[0] + site.aux[1] * xi[1] * xi[1]).sqrt()
    }
}

/// How the norm in the 3D sphere scenario is taken.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SphereNorm {
    /// `‖ξ‖₂` over all three components.
    #[default]
    Sphere,
    /// `√(ξ₁² + ξ₂²)` only.
    Literal,
}

/// Spheres with varying radius: `Φ = x·ξ + c(x)‖ξ‖`, `c = (3 + sin2πx₁ sin2πx₂ sin2πx₃)/4`.
#[derive(Clone, Copy, Debug, Default)]
pub struct SpherePhase {
    pub norm: SphereNorm,
}

impl SpherePhase {
    pub fn new(norm: SphereNorm) -> Self {
        Self { norm }
    }

    pub fn radius(x: &[f64; 3]) -> f64 {
        let s: f64 = x.iter().map(|v| (TAU * v).sin()).product();
        (3.0 + s) / 4.0
    }
}

impl Phase<3> for SpherePhase {
    fn site(&self, x: &[f64; 3]) -> Site<3> {
        Site {
            x: *x,
            aux: [Self::radius(x), 0.0, 0.0],
        }
    }

    #[inline(always)]
    fn eval_at(&self, site: &Site<3>, xi: &[f64; 3]) -> f64 {
        let planar = xi[0] * xi[0] + xi[1] * xi[1];
        let norm2 = match self.norm {
            SphereNorm::Sphere => planar + xi[2] * xi[2],
            SphereNorm::Literal => planar,
        };
        site.dot(xi) + site.aux[0] * norm2.sqrt()
    }
}

/// Which demodulating factor multiplies the Hankel function.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum HankelDemod {
    /// `e^{-2πiρ}`: cancels the Hankel oscillation, leaving a smooth, low-rank symbol.
    #[default]
    Full,
    /// `e^{-πiρ}`.
    Half,
}

/// `a(x, ξ) = (J₀(2πρ) + iY₀(2πρ)) e^{-kπiρ}` with `ρ` the ellipse radius; `a(x, 0) = 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HankelAmplitude {
    pub demod: HankelDemod,
}

impl HankelAmplitude {
    pub fn new(demod: HankelDemod) -> Self {
        Self { demod }
    }

    pub fn at_radius(&self, rho: f64) -> Complex64 {
        if rho <= 0.0 {
            return Complex64::new(1.0, 0.0);
        }
        let (j, y) = bessel_j0_y0(TAU * rho).expect("positive argument");
        let k = match self.demod {
            HankelDemod::Full => 1.0,
            HankelDemod::Half => 0.5,
        };
        Complex64::new(j, y) * crate::cis::cis_turns(-k * rho)
    }
}

impl Amplitude<2> for HankelAmplitude {
    fn eval(&self, x: &[f64; 2], xi: &[f64; 2]) -> Complex64 {
        self.at_radius(ellipse_radius(x, xi))
    }
}
