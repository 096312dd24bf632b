//! Exit criteria. One PASS/FAIL line each; nonzero exit if any fails.
//!
//! `cargo test --release --test acceptance -- 3 5` runs only criteria 3 and 5.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use fio_butterfly::bench::{generate_input, run_apply, RunPlan, Scenario};
use fio_butterfly::geometry::build_corona_decomposition;
use fio_butterfly::kernels::{EllipsePhase, SphereNorm};
use fio_butterfly::verify::{full_grid_equivalence, rank_sweep, run_suite, sampled_equivalence, Suite};
use fio_butterfly::{Complex64, CoronaButterfly, FioOperator, MemoryProbe, OperatorConfig, UnitAmplitude};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn single_thread<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn eps(scenario: Scenario, n: usize, q: usize, seed: u64) -> f64 {
    run_apply(&RunPlan::new(scenario, n, q, seed)).unwrap().record.eps_m
}

const ORDERS: [usize; 4] = [5, 7, 9, 11];
const EX1_LIMITS: [f64; 4] = [2e-1, 3e-2, 2e-3, 1e-4];
const SEEDS: [u64; 3] = [1, 2, 3];

/// Seed-averaged `ε^m` at `N = 256` for each order.
fn ex1_table() -> Vec<f64> {
    ORDERS
        .iter()
        .map(|&q| SEEDS.iter().map(|&s| eps(Scenario::Ex1, 256, q, s)).sum::<f64>() / SEEDS.len() as f64)
        .collect()
}

fn ex1_accuracy(table: &[f64]) -> Outcome {
    let cells: Vec<String> = ORDERS
        .iter()
        .zip(table)
        .zip(EX1_LIMITS)
        .map(|((q, e), lim)| format!("q={q} {e:.2e} (<= {lim:.0e})"))
        .collect();
    let ok = table.iter().zip(EX1_LIMITS).all(|(e, lim)| *e <= lim);
    outcome(ok, cells.join(", "))
}

fn ex1_decay(table: &[f64]) -> Outcome {
    let ratios: Vec<f64> = table.windows(2).map(|w| w[0] / w[1]).collect();
    let gm = ratios.iter().product::<f64>().powf(1.0 / ratios.len() as f64);
    let listing: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    outcome(gm >= 5.0, format!("geometric mean {gm:.2} >= 5 (steps {})", listing.join(", ")))
}

fn n_scaling() -> Outcome {
    let time = |n: usize| {
        let plan = RunPlan {
            samples: 16,
            ..RunPlan::new(Scenario::Ex1, n, 7, 1)
        };
        (0..2)
            .map(|_| single_thread(|| run_apply(&plan).unwrap().record.t_apply_ms))
            .fold(f64::INFINITY, f64::min)
    };
    let t: Vec<f64> = [128, 256, 512].iter().map(|&n| time(n)).collect();
    let r1 = t[1] / t[0];
    let r2 = t[2] / t[1];
    let ok = [r1, r2].iter().all(|r| (3.2..=7.0).contains(r));
    outcome(
        ok,
        format!(
            "t_apply {:.0}/{:.0}/{:.0} ms; 128->256 {r1:.2}, 256->512 {r2:.2} in [3.2, 7.0]",
            t[0], t[1], t[2]
        ),
    )
}

fn ex2_accuracy() -> Outcome {
    let rec = run_apply(&RunPlan::new(Scenario::Ex2, 256, 9, 1)).unwrap().record;
    outcome(
        rec.eps_m <= 5e-3,
        format!("N=256 q=9: {:.2e} <= 5e-3 (amplitude rank {})", rec.eps_m, rec.amp_rank.unwrap_or(0)),
    )
}

fn ex3_accuracy() -> Outcome {
    let sphere: Vec<f64> = [5, 7].iter().map(|&q| eps(Scenario::Ex3, 64, q, 1)).collect();
    let literal: Vec<f64> = [5, 7]
        .iter()
        .map(|&q| {
            let plan = RunPlan {
                ex3_mode: SphereNorm::Literal,
                ..RunPlan::new(Scenario::Ex3, 64, q, 1)
            };
            run_apply(&plan).unwrap().record.eps_m
        })
        .collect();
    outcome(
        sphere[0] <= 2e-1 && sphere[1] <= 5e-2,
        format!(
            "N=64 q=5 {:.2e} (<= 2e-1), q=7 {:.2e} (<= 5e-2); literal mode q=5 {:.2e}, q=7 {:.2e}",
            sphere[0], sphere[1], literal[0], literal[1]
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let sampled = sampled_equivalence(64, 9, 64, 1).unwrap();
    let full = full_grid_equivalence(9, 1).unwrap();
    outcome(
        sampled <= 1e-3 && full <= 1e-3,
        format!("N=64 q=9 at 64 points {sampled:.2e}, N=32 q=9 full grid {full:.2e} (<= 1e-3)"),
    )
}

fn invariants() -> Outcome {
    let mut failed: Vec<String> = Vec::new();
    let mut count = 0;
    for suite in [Suite::Geometry, Suite::Chebyshev, Suite::Kernels] {
        let report = run_suite(suite).unwrap();
        count += report.checks.len();
        failed.extend(report.checks.iter().filter(|c| !c.passed).map(|c| format!("{suite}/{}", c.name)));
    }

    let n = 64;
    let op = FioOperator::new(EllipsePhase, UnitAmplitude, OperatorConfig::new(n, 7)).unwrap();
    let f = generate_input(n, 2, 11).unwrap();
    let g = generate_input(n, 2, 12).unwrap();
    let (a, b) = (Complex64::new(0.7, -1.3), Complex64::new(-0.2, 0.4));
    let mix: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
    let (uf, ug, um) = single_thread(|| (op.apply(&f).unwrap(), op.apply(&g).unwrap(), op.apply(&mix).unwrap()));
    let lin: Vec<Complex64> = uf.iter().zip(&ug).map(|(x, y)| a * x + b * y).collect();
    let lin_err = fio_butterfly::oracle::sampled_relative_error(&um, &lin).unwrap();
    count += 1;
    if lin_err > 1e-10 {
        failed.push(format!("linearity {lin_err:.1e}"));
    }
    let again = single_thread(|| op.apply(&f).unwrap());
    count += 1;
    if !uf.iter().zip(&again).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()) {
        failed.push("single-thread rerun not bit-identical".into());
    }
    let detail = if failed.is_empty() {
        format!("{count} checks, linearity {lin_err:.1e} (<= 1e-10), reruns bit-identical")
    } else {
        format!("failed: {}", failed.join("; "))
    };
    outcome(failed.is_empty(), detail)
}

fn low_rank() -> Outcome {
    let sweep = rank_sweep(64, 8, 12, 50).unwrap();
    let report = run_suite(Suite::Kernels).unwrap();
    let mono = report
        .checks
        .iter()
        .find(|c| c.name.starts_with("expansion error decreases"))
        .unwrap();
    outcome(
        sweep.worst_ratio <= 1e-5 && mono.passed,
        format!(
            "max sigma50/sigma1 {:.2e} (<= 1e-5) over {} pairs (median {:.1e}, {:.1}% above, max 1e-5 rank {}); expansion monotone {} [{}]",
            sweep.worst_ratio,
            sweep.pairs,
            sweep.median_ratio,
            100.0 * sweep.fraction_above,
            sweep.max_rank,
            mono.passed,
            mono.detail
        ),
    )
}

fn memory() -> Outcome {
    let n = 256;
    let dec = build_corona_decomposition::<2>(n, 5).unwrap();
    let f = generate_input(n, 2, 1).unwrap();
    let mut worst: f64 = 0.0;
    for j in 1..=dec.count() {
        let probe = MemoryProbe::new();
        let bf = CoronaButterfly::new(EllipsePhase, &dec, j, 7, 8).unwrap().with_probe(Arc::clone(&probe));
        bf.apply_corona(&f, 1);
        let bound = 2 * bf.full_level_entries(1);
        worst = worst.max(probe.peak() as f64 / bound as f64);
    }
    outcome(worst <= 1.0, format!("peak live coefficients / two full levels = {worst:.3} (<= 1)"))
}

fn main() -> ExitCode {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let on = |k: usize| wanted.is_empty() || wanted.contains(&k);
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |k: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        if on(k) {
            let t = Instant::now();
            let o = f();
            let tag = if o.passed { "PASS" } else { "FAIL" };
            println!("{tag} [{k}] {name}: {} ({:.0} s)", o.detail, t.elapsed().as_secs_f64());
            results.push((k, name, o));
        }
    };
    let table = if on(1) || on(2) { ex1_table() } else { Vec::new() };
    run(1, "ellipse accuracy at N=256", &|| ex1_accuracy(&table));
    run(2, "error decay across q", &|| ex1_decay(&table));
    run(3, "apply time scaling per doubling of N", &n_scaling);
    run(4, "Hankel amplitude accuracy", &ex2_accuracy);
    run(5, "3D sphere accuracy at N=64", &ex3_accuracy);
    run(6, "oracle equivalence", &oracle_equivalence);
    run(7, "invariant suites", &invariants);
    run(8, "low-rank evidence", &low_rank);
    run(9, "coefficient memory bound", &memory);
    let failed = results.iter().filter(|r| !r.2.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
