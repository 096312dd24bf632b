//! Chebyshev grids fitted to the lattice points a box holds versus grids spanning the
//! whole geometric box.

use fio_butterfly::bench::generate_input;
use fio_butterfly::geometry::build_corona_decomposition;
use fio_butterfly::kernels::EllipsePhase;
use fio_butterfly::oracle::{sample_set, sampled_relative_error};
use fio_butterfly::{CoronaButterfly, GridFit};

fn main() -> fio_butterfly::Result<()> {
    let n = 128;
    let dec = build_corona_decomposition::<2>(n, 5)?;
    let f_hat = generate_input(n, 2, 2)?;
    // restrict the input to corona 1 so the reference is that corona alone
    let mut part = vec![fio_butterfly::Complex64::new(0.0, 0.0); f_hat.len()];
    for &i in dec.corona(1) {
        part[i] = f_hat[i];
    }
    let samples = sample_set::<2>(n, 64, 4)?;
    let reference = fio_butterfly::oracle::direct_apply_sampled(
        &EllipsePhase,
        &fio_butterfly::UnitAmplitude,
        n,
        &part,
        &samples,
    )?;
    println!(" q   lattice    box");
    for q in [5, 7, 9, 11] {
        let mut errs = Vec::new();
        for fit in [GridFit::Lattice, GridFit::Box] {
            let bf = CoronaButterfly::with_fit(EllipsePhase, &dec, 1, q, 8, fit)?;
            let u = bf.apply_corona(&part, 1);
            let approx: Vec<_> = samples.iter().map(|&i| u[i]).collect();
            errs.push(sampled_relative_error(&approx, &reference)?);
        }
        println!("{q:>2}   {:.2e}   {:.2e}", errs[0], errs[1]);
    }
    Ok(())
}
