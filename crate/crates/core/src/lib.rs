//! Fast application of discrete Fourier integral operators
//!
//! ```text
//! (Lf)(x) = Σ_ξ a(x,ξ) e^{2πiΦ(x,ξ)} f̂(ξ),   x ∈ X = {n/N},  ξ ∈ Ω = [-N/2, N/2)^d
//! ```
//!
//! The frequency lattice is split into Cartesian coronas around the origin plus a small
//! center square. The center is summed directly; each corona is evaluated with a
//! Cartesian butterfly driven by oscillatory Chebyshev interpolation, first in the
//! frequency variable and then, past the middle level, in the spatial variable. The
//! total cost is `O(q^{d+1} N^d log N)` plus one `O(q^{2d})` switch per box pair.
//!
//! Module map:
//!
//! - [`geometry`]: lattices, dyadic boxes, corona decomposition and level schedules.
//! - [`cheb`]: Chebyshev grids and barycentric Lagrange interpolation.
//! - [`kernels`]: phase/amplitude functions, Bessel functions, expansions and the
//!   low-rank amplitude factorization.
//! - [`butterfly`]: the per-corona butterfly stages.
//! - [`multiscale`]: the full operator (coronas + direct center).
//! - [`oracle`]: direct summation and the sampled relative error.
//! - [`bench`]: seeded inputs, run records and the property suites behind the `mbfio` binary.

pub mod bench;
pub mod butterfly;
pub mod cheb;
pub mod cis;
pub mod dft;
mod error;
pub mod geometry;
pub mod kernels;
pub mod multiscale;
pub mod oracle;
pub mod verify;

pub use error::{FioError, Result};
pub use num_complex::Complex64;

pub use butterfly::{CoeffLayer, CoronaButterfly, GridFit, MemoryProbe};
pub use cheb::ChebGrid;
pub use geometry::{CoronaDecomposition, DyadicBox, TreeLevelSchedule};
pub use kernels::{Amplitude, Phase, Site, UnitAmplitude};
pub use multiscale::{ApplyReport, FioOperator, OperatorConfig};
