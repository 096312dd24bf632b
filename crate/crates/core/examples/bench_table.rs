//! An `N × q` accuracy and timing table for the ellipse scenario, printed as CSV.
//!
//! ```text
//! cargo run --release --example bench_table -- 64,128,256 5,7,9
//! ```

use fio_butterfly::bench::{run_bench, Format, RecordWriter, RunPlan, Scenario};

fn list(arg: Option<String>, default: &[usize]) -> Vec<usize> {
    arg.map(|s| s.split(',').filter_map(|v| v.parse().ok()).collect())
        .unwrap_or_else(|| default.to_vec())
}

fn main() -> fio_butterfly::Result<()> {
    let mut args = std::env::args().skip(1);
    let ns = list(args.next(), &[64, 128]);
    let qs = list(args.next(), &[5, 7, 9]);
    let mut out = RecordWriter::new(std::io::stdout(), Format::Csv, true);
    run_bench(&RunPlan::new(Scenario::Ex1, ns[0], qs[0], 1), &ns, &qs, |row| out.write_row(row))?;
    Ok(())
}
