//! Phases, amplitudes and the interpolation machinery built on them.

pub mod bessel;
pub mod expansion;
pub mod factorize;
mod phase;

pub use bessel::{bessel_j0, bessel_j0_y0, bessel_y0};
pub use expansion::{
    contract, expansion_alpha_x, expansion_alpha_xi, expansion_beta_x, expansion_beta_xi,
    residual_phase,
};
pub use factorize::{factorize_amplitude, factorize_on_samples, AmplitudeFactorization, FactorizeConfig};
pub use phase::{
    ellipse_axes, ellipse_radius, Amplitude, EllipsePhase, FnAmplitude, FnPhase, HankelAmplitude,
    HankelDemod, Phase, PlaneWavePhase, Site, SphereNorm, SpherePhase, UnitAmplitude,
};
