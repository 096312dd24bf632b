use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fio_butterfly::bench::{parse_sphere_norm, run_apply, run_bench, Format, RecordWriter, RunPlan, Scenario};
use fio_butterfly::kernels::SphereNorm;
use fio_butterfly::verify::{run_suite, Suite};
use fio_butterfly::FioError;

#[derive(Parser)]
#[command(name = "mbfio", version, about = "Multiscale butterfly evaluation of Fourier integral operators")]
struct Cli {
    /// Worker threads (1 gives the bit-deterministic path).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply one operator to a seeded input and score it against the direct sum.
    Apply {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[command(flatten)]
        common: RunArgs,
    },
    /// Run every (N, q) cell of a table.
    Bench {
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long = "q-list", value_delimiter = ',', required = true)]
        q_list: Vec<usize>,
        #[command(flatten)]
        common: RunArgs,
    },
    /// Run a property suite.
    Verify {
        #[arg(value_parser = clap::value_parser!(Suite))]
        suite: Suite,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Defaults to the scenario's dimension.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    dim: Option<u8>,
    #[arg(long, default_value_t = 8)]
    b: usize,
    #[arg(long, default_value_t = 5)]
    s: u32,
    #[arg(long, default_value = "ex1")]
    scenario: Scenario,
    #[arg(long = "ex3-mode", default_value = "sphere", value_parser = parse_sphere_norm)]
    ex3_mode: SphereNorm,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long = "amp-tol", default_value_t = 1e-4)]
    amp_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "json")]
    format: Format,
}

impl RunArgs {
    fn plan(&self, n: usize, q: usize) -> RunPlan {
        RunPlan {
            dim: self.dim.map_or(self.scenario.dim(), usize::from),
            b: self.b,
            s: self.s,
            ex3_mode: self.ex3_mode,
            amp_tol: self.amp_tol,
            samples: self.samples,
            ..RunPlan::new(self.scenario, n, q, self.seed)
        }
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        })
    }
}

fn run(cli: Cli) -> Result<bool, FioError> {
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| FioError::Config(e.to_string()))?;
    }
    let io_err = |e: io::Error| FioError::Config(format!("output error: {e}"));
    match cli.command {
        Command::Apply { n, q, common } => {
            let out = run_apply(&common.plan(n, q))?;
            let r = &out.record;
            eprintln!(
                "{} N={} q={}: eps_m = {:.3e}, apply {:.1} ms, oracle {:.1} ms",
                r.scenario, r.n, r.q, r.eps_m, r.t_apply_ms, r.t_oracle_ms
            );
            RecordWriter::new(common.sink().map_err(io_err)?, common.format, false).write_record(r)?;
            Ok(true)
        }
        Command::Bench { n_list, q_list, common } => {
            let mut writer = RecordWriter::new(common.sink().map_err(io_err)?, common.format, true);
            let base = common.plan(n_list[0], q_list[0]);
            run_bench(&base, &n_list, &q_list, |row| {
                eprintln!(
                    "N={} q={}: eps_m = {:.3e}, apply {:.1} ms",
                    row.record.n, row.record.q, row.record.eps_m, row.record.t_apply_ms
                );
                writer.write_row(row)
            })?;
            Ok(true)
        }
        Command::Verify { suite } => {
            let report = run_suite(suite)?;
            print!("{report}");
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
