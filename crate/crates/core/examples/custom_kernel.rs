//! Any phase and amplitude given as closures. Here a rotated, anisotropic wave speed
//! with a smooth damping amplitude.

use fio_butterfly::bench::generate_input;
use fio_butterfly::kernels::{FnAmplitude, FnPhase};
use fio_butterfly::oracle::{direct_apply_sampled, sample_set, sampled_relative_error};
use fio_butterfly::{Complex64, FioOperator, OperatorConfig};

fn main() -> fio_butterfly::Result<()> {
    let phase = FnPhase(|x: &[f64; 2], xi: &[f64; 2]| {
        let speed = 1.0 + 0.25 * (std::f64::consts::TAU * x[0]).cos();
        x[0] * xi[0] + x[1] * xi[1] + speed * (xi[0] * xi[0] + 0.5 * xi[1] * xi[1]).sqrt()
    });
    let amp = FnAmplitude(|x: &[f64; 2], xi: &[f64; 2]| {
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        Complex64::new((-x[1]).exp() / (1.0 + 0.01 * r), 0.0)
    });
    let n = 128;
    let f_hat = generate_input(n, 2, 8)?;
    let op = FioOperator::new(&phase, &amp, OperatorConfig::new(n, 9))?;
    let u = op.apply(&f_hat)?;
    let samples = sample_set::<2>(n, 128, 1)?;
    let direct = direct_apply_sampled(&phase, &amp, n, &f_hat, &samples)?;
    let approx: Vec<_> = samples.iter().map(|&i| u[i]).collect();
    println!(
        "amplitude rank {}, relative error {:.3e}",
        op.amplitude_rank().unwrap_or(1),
        sampled_relative_error(&approx, &direct)?
    );
    Ok(())
}
