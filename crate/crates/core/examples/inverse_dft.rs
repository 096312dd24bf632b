//! With `Φ(x, ξ) = x·ξ` the operator is the inverse DFT, so the butterfly applied to FFT
//! output should reproduce the original samples up to its interpolation error.

use fio_butterfly::bench::generate_input;
use fio_butterfly::dft::dft_forward;
use fio_butterfly::kernels::PlaneWavePhase;
use fio_butterfly::oracle::sampled_relative_error;
use fio_butterfly::{FioOperator, OperatorConfig, UnitAmplitude};

fn main() -> fio_butterfly::Result<()> {
    let n = 128;
    let f = generate_input(n, 2, 5)?;
    let f_hat = dft_forward::<2>(&f, n)?;
    for q in [3, 5, 7, 9, 11] {
        let op = FioOperator::<2, _, _>::new(PlaneWavePhase, UnitAmplitude, OperatorConfig::new(n, q))?;
        let back = op.apply(&f_hat)?;
        println!("N = {n}, q = {q:>2}: round trip error {:.2e}", sampled_relative_error(&back, &f)?);
    }
    Ok(())
}
