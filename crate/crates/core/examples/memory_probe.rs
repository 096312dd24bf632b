//! Live coefficient storage during a corona traversal, against the size of one full
//! level of coefficients.

use fio_butterfly::bench::generate_input;
use fio_butterfly::geometry::build_corona_decomposition;
use fio_butterfly::kernels::EllipsePhase;
use fio_butterfly::{CoronaButterfly, MemoryProbe};

fn main() -> fio_butterfly::Result<()> {
    let n = 256;
    let dec = build_corona_decomposition::<2>(n, 5)?;
    let f_hat = generate_input(n, 2, 1)?;
    for j in 1..=dec.count() {
        let probe = MemoryProbe::new();
        let bf = CoronaButterfly::new(EllipsePhase, &dec, j, 7, 8)?.with_probe(probe.clone());
        bf.apply_corona(&f_hat, 1);
        let level = bf.full_level_entries(1);
        println!(
            "corona {j}: peak {:>8} coefficients, one full level {:>8}, ratio {:.3}, live after {}",
            probe.peak(),
            level,
            probe.peak() as f64 / level as f64,
            probe.live()
        );
    }
    Ok(())
}
