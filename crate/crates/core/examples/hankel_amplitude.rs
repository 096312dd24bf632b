//! Ellipse phase with the Hankel amplitude. The amplitude is split into a short sum of
//! separable terms by cross approximation; each term rides through one butterfly pass.

use fio_butterfly::bench::generate_input;
use fio_butterfly::kernels::{Amplitude, EllipsePhase, HankelAmplitude, HankelDemod};
use fio_butterfly::oracle::{direct_apply_sampled, sample_set, sampled_relative_error};
use fio_butterfly::{FioOperator, OperatorConfig};

fn main() -> fio_butterfly::Result<()> {
    let n = 128;
    let f_hat = generate_input(n, 2, 3)?;
    let samples = sample_set::<2>(n, 128, 9)?;

    for demod in [HankelDemod::Full, HankelDemod::Half] {
        let amp = HankelAmplitude::new(demod);
        let op = FioOperator::new(EllipsePhase, amp, OperatorConfig::new(n, 9))?;
        let fac = op.factorization().expect("non-unit amplitude is factorized");
        // spot check of the separable form away from the sampled set
        let (x, xi) = ([0.31, 0.77], [-40.5, 22.25]);
        let spot = (fac.eval(&amp, &x, &xi) - amp.eval(&x, &xi)).norm();

        let u = op.apply(&f_hat)?;
        let direct = direct_apply_sampled(&EllipsePhase, &amp, n, &f_hat, &samples)?;
        let approx: Vec<_> = samples.iter().map(|&i| u[i]).collect();
        println!(
            "{demod:?}: rank {:>3}, setup {:>7.1} ms, spot error {spot:.1e}, operator error {:.3e}",
            fac.rank(),
            op.setup_ms(),
            sampled_relative_error(&approx, &direct)?
        );
    }
    Ok(())
}
