//! Seeded inputs, single runs scored against the direct oracle, and `N × q` tables.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::butterfly::GridFit;
use crate::kernels::{Amplitude, EllipsePhase, FactorizeConfig, HankelAmplitude, Phase, SphereNorm, SpherePhase, UnitAmplitude};
use crate::multiscale::{FioOperator, OperatorConfig};
use crate::oracle::{direct_apply_sampled, sample_set, sampled_relative_error, DEFAULT_SAMPLES, SAMPLE_SEED};
use crate::{FioError, Result};

/// Kernels with a fixed definition, selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Generalized Radon transform over ellipses, unit amplitude (2D).
    Ex1,
    /// Ellipse phase with a Hankel-function amplitude (2D).
    Ex2,
    /// Spheres of varying radius, unit amplitude (3D).
    Ex3,
}

impl Scenario {
    pub fn dim(self) -> usize {
        match self {
            Scenario::Ex1 | Scenario::Ex2 => 2,
            Scenario::Ex3 => 3,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::Ex1 => "ex1",
            Scenario::Ex2 => "ex2",
            Scenario::Ex3 => "ex3",
        })
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ex1" => Ok(Scenario::Ex1),
            "ex2" => Ok(Scenario::Ex2),
            "ex3" => Ok(Scenario::Ex3),
            _ => Err(format!("unknown scenario '{s}' (expected ex1, ex2 or ex3)")),
        }
    }
}

/// Parses `sphere` / `literal`.
pub fn parse_sphere_norm(s: &str) -> std::result::Result<SphereNorm, String> {
    match s {
        "sphere" => Ok(SphereNorm::Sphere),
        "literal" => Ok(SphereNorm::Literal),
        _ => Err(format!("unknown ex3 mode '{s}' (expected sphere or literal)")),
    }
}

/// Everything that determines a run.
#[derive(Clone, Debug)]
pub struct RunPlan {
    pub dim: usize,
    pub n: usize,
    pub q: usize,
    pub b: usize,
    pub s: u32,
    pub scenario: Scenario,
    pub ex3_mode: SphereNorm,
    pub amp_tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub fit: GridFit,
}

impl RunPlan {
    pub fn new(scenario: Scenario, n: usize, q: usize, seed: u64) -> Self {
        Self {
            dim: scenario.dim(),
            n,
            q,
            b: 8,
            s: 5,
            scenario,
            ex3_mode: SphereNorm::default(),
            amp_tol: 1e-4,
            seed,
            samples: DEFAULT_SAMPLES,
            fit: GridFit::default(),
        }
    }

    fn operator_config(&self) -> OperatorConfig {
        OperatorConfig {
            n: self.n,
            q: self.q,
            b: self.b,
            s: self.s,
            fit: self.fit,
            amplitude: FactorizeConfig {
                tol: self.amp_tol,
                ..FactorizeConfig::default()
            },
            force_factorized: false,
        }
    }
}

/// One row of results. Every field is always serialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dim: usize,
    pub n: usize,
    pub q: usize,
    pub scenario: Scenario,
    pub seed: u64,
    pub eps_m: f64,
    pub t_setup_ms: f64,
    pub t_apply_ms: f64,
    pub t_oracle_ms: f64,
    pub amp_rank: Option<usize>,
    pub corona_count: usize,
    pub version: String,
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// `f̂(ξ) = (g₁ + i g₂)/√2` with standard normal `g₁, g₂`.
///
/// Each lattice index owns its own block of the ChaCha stream of `seed`, so any entry can
/// be produced alone, in any order, on any thread.
pub fn generate_input(n: usize, dim: usize, seed: u64) -> Result<Vec<Complex64>> {
    if !(2..=3).contains(&dim) {
        return Err(FioError::InvalidDimension(dim));
    }
    if n < 2 || !n.is_power_of_two() {
        return Err(FioError::NotPowerOfTwo(n));
    }
    let len = n.pow(dim as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..len)
        .map(|i| {
            // two f64 draws use four 32-bit words
            rng.set_word_pos(4 * i as u128);
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            Complex64::new(r * c, r * s) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect())
}

/// A run's record together with the potential at the sample points.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: RunRecord,
    pub samples: Vec<usize>,
    pub approx: Vec<Complex64>,
    pub direct: Vec<Complex64>,
}

fn run_with<const D: usize, P: Phase<D> + Clone, A: Amplitude<D>>(
    plan: &RunPlan,
    phase: P,
    amp: A,
) -> Result<RunOutput> {
    let f_hat = generate_input(plan.n, D, plan.seed)?;
    let op = FioOperator::new(phase.clone(), &amp, plan.operator_config())?;
    let t = Instant::now();
    let u = op.apply(&f_hat)?;
    let t_apply_ms = t.elapsed().as_secs_f64() * 1e3;
    let samples = sample_set::<D>(plan.n, plan.samples, SAMPLE_SEED)?;
    let t = Instant::now();
    let direct = direct_apply_sampled(&phase, &amp, plan.n, &f_hat, &samples)?;
    let t_oracle_ms = t.elapsed().as_secs_f64() * 1e3;
    let approx: Vec<Complex64> = samples.iter().map(|&i| u[i]).collect();
    let eps_m = sampled_relative_error(&approx, &direct)?;
    Ok(RunOutput {
        record: RunRecord {
            dim: D,
            n: plan.n,
            q: plan.q,
            scenario: plan.scenario,
            seed: plan.seed,
            eps_m,
            t_setup_ms: op.setup_ms(),
            t_apply_ms,
            t_oracle_ms,
            amp_rank: op.amplitude_rank(),
            corona_count: op.decomposition().count(),
            version: version_string(),
        },
        samples,
        approx,
        direct,
    })
}

/// Builds the operator for `plan`, applies it to the seeded input and scores it against
/// the direct sum on the sample set.
pub fn run_apply(plan: &RunPlan) -> Result<RunOutput> {
    if plan.dim != plan.scenario.dim() {
        return Err(FioError::DimensionMismatch {
            scenario: plan.scenario.to_string(),
            expected: plan.scenario.dim(),
            got: plan.dim,
        });
    }
    if plan.n < 2 || !plan.n.is_power_of_two() {
        return Err(FioError::NotPowerOfTwo(plan.n));
    }
    match plan.scenario {
        Scenario::Ex1 => run_with::<2, _, _>(plan, EllipsePhase, UnitAmplitude),
        Scenario::Ex2 => run_with::<2, _, _>(plan, EllipsePhase, HankelAmplitude::default()),
        Scenario::Ex3 => run_with::<3, _, _>(plan, SpherePhase::new(plan.ex3_mode), UnitAmplitude),
    }
}

/// A table row: the run plus ratios against the neighbouring cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(flatten)]
    pub record: RunRecord,
    /// `eps_m` at the previous `q` (same `n`) divided by this `eps_m`.
    pub err_ratio_q: Option<f64>,
    /// This `t_apply_ms` divided by the one at the previous `n` (same `q`).
    pub time_ratio_n: Option<f64>,
}

/// Runs every `(n, q)` cell, `n` outer, handing each row to `sink` as soon as it is done.
pub fn run_bench(
    base: &RunPlan,
    ns: &[usize],
    qs: &[usize],
    mut sink: impl FnMut(&BenchRow) -> Result<()>,
) -> Result<Vec<BenchRow>> {
    if ns.is_empty() || qs.is_empty() {
        return Err(FioError::Config("n-list and q-list must be non-empty".into()));
    }
    let mut rows: Vec<BenchRow> = Vec::new();
    for &n in ns {
        for &q in qs {
            let plan = RunPlan { n, q, ..base.clone() };
            let record = run_apply(&plan)?.record;
            let prev_q = rows.iter().rev().find(|r| r.record.n == n && r.record.q < q);
            let prev_n = rows.iter().rev().find(|r| r.record.q == q && r.record.n < n);
            let row = BenchRow {
                err_ratio_q: prev_q.map(|p| p.record.eps_m / record.eps_m),
                time_ratio_n: prev_n.map(|p| record.t_apply_ms / p.record.t_apply_ms),
                record,
            };
            sink(&row)?;
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Machine-readable output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format '{s}' (expected json or csv)")),
        }
    }
}

const RECORD_FIELDS: [&str; 12] = [
    "dim",
    "n",
    "q",
    "scenario",
    "seed",
    "eps_m",
    "t_setup_ms",
    "t_apply_ms",
    "t_oracle_ms",
    "amp_rank",
    "corona_count",
    "version",
];

fn record_fields(r: &RunRecord) -> Vec<String> {
    vec![
        r.dim.to_string(),
        r.n.to_string(),
        r.q.to_string(),
        r.scenario.to_string(),
        r.seed.to_string(),
        format!("{:e}", r.eps_m),
        format!("{:.3}", r.t_setup_ms),
        format!("{:.3}", r.t_apply_ms),
        format!("{:.3}", r.t_oracle_ms),
        r.amp_rank.map(|v| v.to_string()).unwrap_or_default(),
        r.corona_count.to_string(),
        r.version.clone(),
    ]
}

fn io_err(e: impl fmt::Display) -> FioError {
    FioError::Config(format!("output error: {e}"))
}

/// Streams run records as JSON lines or CSV (header first).
pub struct RecordWriter<W: Write> {
    format: Format,
    bench_columns: bool,
    json: Option<W>,
    csv: Option<csv::Writer<W>>,
    header_done: bool,
}

impl<W: Write> RecordWriter<W> {
    /// `bench_columns` adds the two ratio columns of [`BenchRow`].
    pub fn new(out: W, format: Format, bench_columns: bool) -> Self {
        let (json, csv) = match format {
            Format::Json => (Some(out), None),
            Format::Csv => (None, Some(csv::Writer::from_writer(out))),
        };
        Self {
            format,
            bench_columns,
            json,
            csv,
            header_done: false,
        }
    }

    pub fn write_record(&mut self, r: &RunRecord) -> Result<()> {
        self.write_fields(r, None)
    }

    pub fn write_row(&mut self, row: &BenchRow) -> Result<()> {
        self.write_fields(&row.record, Some(row))
    }

    fn write_fields(&mut self, r: &RunRecord, row: Option<&BenchRow>) -> Result<()> {
        match self.format {
            Format::Json => {
                let out = self.json.as_mut().expect("json sink");
                let line = match row {
                    Some(row) => serde_json::to_string(row),
                    None => serde_json::to_string(r),
                }
                .map_err(io_err)?;
                writeln!(out, "{line}").map_err(io_err)?;
                out.flush().map_err(io_err)
            }
            Format::Csv => {
                let w = self.csv.as_mut().expect("csv sink");
                if !self.header_done {
                    let mut head: Vec<&str> = RECORD_FIELDS.to_vec();
                    if self.bench_columns {
                        head.extend(["err_ratio_q", "time_ratio_n"]);
                    }
                    w.write_record(&head).map_err(io_err)?;
                    self.header_done = true;
                }
                let mut fields = record_fields(r);
                if self.bench_columns {
                    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.4}")).unwrap_or_default();
                    fields.push(fmt(row.and_then(|b| b.err_ratio_q)));
                    fields.push(fmt(row.and_then(|b| b.time_ratio_n)));
                }
                w.write_record(&fields).map_err(io_err)?;
                w.flush().map_err(io_err)
            }
        }
    }
}
