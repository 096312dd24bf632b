//! Generalized Radon transform over ellipses, applied with the multiscale butterfly and
//! checked against the direct sum at 256 sampled points.
//!
//! ```text
//! cargo run --release --example apply_ellipse -- 256 9
//! ```

use std::time::Instant;

use fio_butterfly::bench::generate_input;
use fio_butterfly::kernels::EllipsePhase;
use fio_butterfly::oracle::{direct_apply_sampled, sample_set, sampled_relative_error, SAMPLE_SEED};
use fio_butterfly::{FioOperator, OperatorConfig, UnitAmplitude};

fn main() -> fio_butterfly::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(128);
    let q = args.get(1).copied().unwrap_or(7);

    let f_hat = generate_input(n, 2, 42)?;
    let op = FioOperator::new(EllipsePhase, UnitAmplitude, OperatorConfig::new(n, q))?;
    println!(
        "N = {n}, q = {q}: {} coronas, butterfly on {:?}, {} frequencies summed directly",
        op.decomposition().count(),
        op.butterfly_coronas(),
        op.direct_len()
    );

    let t = Instant::now();
    let report = op.apply_batch(&f_hat, 1)?;
    println!("apply: {:.1} ms", t.elapsed().as_secs_f64() * 1e3);
    println!("  direct part {:.1} ms", report.direct_ms);
    for (j, ms) in op.butterfly_coronas().iter().zip(&report.corona_ms) {
        println!("  corona {j}: {ms:.1} ms");
    }

    let samples = sample_set::<2>(n, 256, SAMPLE_SEED)?;
    let direct = direct_apply_sampled(&EllipsePhase, &UnitAmplitude, n, &f_hat, &samples)?;
    let approx: Vec<_> = samples.iter().map(|&i| report.u[i]).collect();
    println!("relative error at 256 points: {:.3e}", sampled_relative_error(&approx, &direct)?);
    Ok(())
}
