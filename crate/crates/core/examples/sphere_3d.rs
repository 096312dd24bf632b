//! Spheres of varying radius in three dimensions.
//!
//! ```text
//! cargo run --release --example sphere_3d -- 64 5
//! ```

use fio_butterfly::bench::{run_apply, RunPlan, Scenario};
use fio_butterfly::kernels::SphereNorm;

fn main() -> fio_butterfly::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n = args.first().copied().unwrap_or(32);
    let q = args.get(1).copied().unwrap_or(5);
    // N = 32 leaves no corona at the default center size
    let (b, s) = if n < 64 { (4, 3) } else { (8, 5) };

    for mode in [SphereNorm::Sphere, SphereNorm::Literal] {
        let plan = RunPlan {
            b,
            s,
            ex3_mode: mode,
            samples: 128,
            ..RunPlan::new(Scenario::Ex3, n, q, 1)
        };
        let r = run_apply(&plan)?.record;
        println!(
            "{mode:?}: N = {n}, q = {q}, eps = {:.3e}, apply {:.0} ms, oracle {:.0} ms",
            r.eps_m, r.t_apply_ms, r.t_oracle_ms
        );
    }
    Ok(())
}
