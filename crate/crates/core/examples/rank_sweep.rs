//! Singular value sweep of the residual kernel `e^{2πiR}` over every scheduled pair of
//! corona 1 for the ellipse phase.
//!
//! `cargo run --release --example rank_sweep [N] [b] [samples per axis] [k]`
use fio_butterfly::verify::rank_sweep;

fn main() -> fio_butterfly::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let arg = |i: usize, d: usize| args.get(i).copied().unwrap_or(d);
    let (n, b, m, k) = (arg(0, 64), arg(1, 8), arg(2, 12), arg(3, 50));
    let t = std::time::Instant::now();
    let s = rank_sweep(n, b, m, k)?;
    println!("N = {n}, b = {b}, {m}x{m} samples per box, {} pairs", s.pairs);
    println!("sigma_{k}/sigma_1: max {:.2e}, median {:.2e}", s.worst_ratio, s.median_ratio);
    println!("pairs above 1e-5: {:.1}%", 100.0 * s.fraction_above);
    println!("largest 1e-5 rank: {}", s.max_rank);
    println!("{:.1} s", t.elapsed().as_secs_f64());
    Ok(())
}
