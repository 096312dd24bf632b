//! Tensor Chebyshev interpolation on a dyadic box: error against order for a smooth and
//! an oscillatory function.

use fio_butterfly::cis::cis_turns;
use fio_butterfly::{ChebGrid, DyadicBox};

fn main() -> fio_butterfly::Result<()> {
    let bx = DyadicBox::at([0.0, 0.0], 1.0, 2, [1, 2]);
    let smooth = |p: &[f64; 2]| (3.0 * p[0]).exp() * (5.0 * p[1]).cos();
    let wave = |p: &[f64; 2]| cis_turns(2.0 * (p[0] + p[1]) / bx.width);
    let lo = bx.lower_corner();
    let probes: Vec<[f64; 2]> = (0..400)
        .map(|i| [lo[0] + bx.width * ((i % 20) as f64 + 0.3) / 20.0, lo[1] + bx.width * ((i / 20) as f64 + 0.6) / 20.0])
        .collect();
    println!(" q   smooth     two turns");
    for q in [3, 5, 7, 9, 11, 13] {
        let grid = ChebGrid::new(q, bx)?;
        let nodes = grid.tensor_nodes();
        let (mut e1, mut e2): (f64, f64) = (0.0, 0.0);
        for p in &probes {
            let l = grid.lagrange_eval_all(p);
            let v1: f64 = l.iter().zip(&nodes).map(|(w, g)| w * smooth(g)).sum();
            let v2: fio_butterfly::Complex64 = l.iter().zip(&nodes).map(|(w, g)| wave(g) * *w).sum();
            e1 = e1.max((v1 - smooth(p)).abs());
            e2 = e2.max((v2 - wave(p)).norm());
        }
        println!("{q:>2}   {e1:.2e}   {e2:.2e}");
    }
    Ok(())
}
