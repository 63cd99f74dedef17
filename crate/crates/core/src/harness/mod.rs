//! Benchmark protocol: hit detection against a known minimizer, per-function
//! runs over a GKLS class, table columns and operating characteristics.

mod report;

use std::cell::Cell;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{
    emit_report, format_delta, operating_characteristics, percentile_columns, read_records, render_csv,
    render_plotdata, render_json, all_characteristics, step_grid, plotdata_file_name, summarize, Column, OperatingCharacteristic, PercentileColumns, ReportFormat, SummaryRow,
    CSV_HEADER,
};

use crate::diagonal::{solve_multidim_diagonal, DiagonalParams};
use crate::direct::{solve_direct, DirectParams, DirectVariant};
use crate::error::{input, Error, Result};
use crate::framework::StoppingCriteria;
use crate::geometric1d::solve_piyavskij;
use crate::gkls::{GklsClass, GklsFunction};
use crate::problem::{BoxDomain, LipschitzSpec, Objective, SolverResult};

/// Trial cap of the standard protocol.
pub const DEFAULT_CAP: usize = 1_000_000;

/// `Δ^(1/n)`, the fraction of each side within which a trial counts as a hit.
pub fn tolerance_factor(delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return input(format!("accuracy coefficient {delta} outside (0, 1]"));
    }
    Ok(match n {
        0 => return input("dimension must be positive"),
        1 => delta,
        2 => delta.sqrt(),
        3 => delta.cbrt(),
        _ => delta.powf(1.0 / n as f64),
    })
}

/// True when `|x'_j - x*_j| <= Δ^(1/N) (b_j - a_j)` on every axis.
pub fn hit_check(x: &[f64], x_star: &[f64], delta: f64, domain: &BoxDomain) -> Result<bool> {
    let factor = tolerance_factor(delta, domain.dim())?;
    for (name, p) in [("trial point", x), ("minimizer", x_star)] {
        if !domain.contains(p) {
            return Err(Error::Domain(format!("{name} {p:?} lies outside the domain")));
        }
    }
    Ok(HitBox::new(x_star, factor, domain).contains(x))
}

/// Precomputed per-axis acceptance box around a minimizer.
#[derive(Debug, Clone)]
struct HitBox {
    center: Vec<f64>,
    tol: Vec<f64>,
}

impl HitBox {
    fn new(center: &[f64], factor: f64, domain: &BoxDomain) -> Self {
        let tol = (0..domain.dim()).map(|j| factor * domain.width(j)).collect();
        Self { center: center.to_vec(), tol }
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.center)
            .zip(&self.tol)
            .all(|((xj, cj), tj)| (xj - cj).abs() <= *tj)
    }
}

/// Solvers addressable by name from the harness and the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Direct,
    DirectL,
    DiagNew,
    /// Univariate method with a known constant, named `piyavskij:<L>`.
    Piyavskij { l: f64 },
    GeomAdaptive,
    GeomLocalTune,
}

impl Method {
    pub fn supports_dim(&self, n: usize) -> bool {
        match self {
            Method::Direct | Method::DirectL | Method::DiagNew => n >= 1,
            Method::Piyavskij { .. } | Method::GeomAdaptive | Method::GeomLocalTune => n == 1,
        }
    }

    /// Runs the method on `objective` until `stop` or a halt.
    pub fn solve(&self, objective: &mut Objective<'_>, stop: &StoppingCriteria) -> Result<SolverResult> {
        let n = objective.domain().dim();
        if !self.supports_dim(n) {
            return input(format!("method {self} does not handle dimension {n}"));
        }
        match *self {
            Method::Direct => solve_direct(objective, DirectParams::new(DirectVariant::Direct), stop),
            Method::DirectL => solve_direct(objective, DirectParams::new(DirectVariant::DirectL), stop),
            Method::DiagNew => solve_multidim_diagonal(objective, DiagonalParams::default(), stop),
            Method::Piyavskij { l } => solve_piyavskij(objective, LipschitzSpec::APriori { l }, stop),
            Method::GeomAdaptive => solve_piyavskij(objective, LipschitzSpec::adaptive_global(), stop),
            Method::GeomLocalTune => solve_piyavskij(objective, LipschitzSpec::local_tuning(), stop),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Direct => f.write_str("direct"),
            Method::DirectL => f.write_str("direct-l"),
            Method::DiagNew => f.write_str("diag-new"),
            Method::Piyavskij { l } => write!(f, "piyavskij:{l}"),
            Method::GeomAdaptive => f.write_str("geom-adaptive"),
            Method::GeomLocalTune => f.write_str("geom-localtune"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "direct" => Method::Direct,
            "direct-l" => Method::DirectL,
            "diag-new" => Method::DiagNew,
            "geom-adaptive" => Method::GeomAdaptive,
            "geom-localtune" => Method::GeomLocalTune,
            "piyavskij" => return input("method piyavskij needs its Lipschitz constant, e.g. piyavskij:12.5"),
            other => match other.strip_prefix("piyavskij:") {
                Some(l) => {
                    let l: f64 = l.parse().map_err(|_| Error::Input(format!("bad Lipschitz constant `{l}`")))?;
                    LipschitzSpec::APriori { l }.validate()?;
                    Method::Piyavskij { l }
                }
                None => {
                    return input(format!(
                        "unknown method `{other}` (expected direct, direct-l, diag-new, piyavskij:<L>, geom-adaptive or geom-localtune)"
                    ))
                }
            },
        })
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let methods: Vec<Method> = list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect::<Result<_>>()?;
    if methods.is_empty() {
        return input("empty method list");
    }
    Ok(methods)
}

/// Outcome of one method on one function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub method: String,
    pub class: String,
    pub n: usize,
    pub delta: f64,
    /// 1-based index within the class.
    pub function: usize,
    /// Index of the first trial inside the hit box; `None` stands for the cap.
    pub trials_to_hit: Option<usize>,
    pub cap: usize,
    /// Partition size when the run stopped.
    pub hyperintervals: usize,
    pub cells_created: usize,
    pub trials_used: usize,
    pub hit: bool,
    /// Solver failure, if the run aborted.
    pub error: Option<String>,
    /// Seconds of wall time; not serialized, so reports stay reproducible.
    #[serde(skip)]
    pub wall_time: f64,
}

/// Benchmark settings shared by every run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub delta: f64,
    pub cap: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl BenchmarkConfig {
    pub fn new(delta: f64, cap: usize) -> Self {
        Self { delta, cap, jobs: None }
    }

    pub fn with_jobs(mut self, jobs: usize) -> Self {
        self.jobs = Some(jobs);
        self
    }

    pub fn validate(&self) -> Result<()> {
        tolerance_factor(self.delta, 1)?;
        if self.cap == 0 {
            return input("trial cap must be at least 1");
        }
        if self.jobs == Some(0) {
            return input("job count must be at least 1");
        }
        Ok(())
    }
}

/// Runs `method` on one function, halting at the first hit.
pub fn run_one(method: Method, class: &str, function: usize, f: &GklsFunction, config: &BenchmarkConfig) -> Result<BenchmarkRecord> {
    let n = f.dim();
    let factor = tolerance_factor(config.delta, n)?;
    let target = HitBox::new(&f.global().point, factor, &f.domain);
    let first_hit = Cell::new(None);
    let started = Instant::now();
    let outcome = {
        let mut objective = Objective::new(f.domain.clone(), |x| f.value(x)).with_observer(|k, trial| {
            if target.contains(&trial.point) {
                first_hit.set(Some(k));
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        method.solve(&mut objective, &StoppingCriteria::trials(config.cap))
    };
    let wall_time = started.elapsed().as_secs_f64();
    let trials_to_hit = first_hit.get();
    let mut record = BenchmarkRecord {
        method: method.to_string(),
        class: class.to_string(),
        n,
        delta: config.delta,
        function,
        trials_to_hit,
        cap: config.cap,
        hyperintervals: 0,
        cells_created: 0,
        trials_used: 0,
        hit: trials_to_hit.is_some(),
        error: None,
        wall_time,
    };
    match outcome {
        Ok(result) => {
            record.hyperintervals = result.hyperintervals_generated;
            record.cells_created = result.cells_created;
            record.trials_used = result.trials_used;
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    Ok(record)
}

/// Runs every method on every function of `class`. Records come back sorted
/// by method (in the order given) and function index, whatever the thread
/// count.
pub fn run_benchmark(methods: &[Method], class: &GklsClass, config: &BenchmarkConfig) -> Result<Vec<BenchmarkRecord>> {
    config.validate()?;
    if methods.is_empty() {
        return input("no methods to run");
    }
    let n = class.spec.dim;
    if let Some(m) = methods.iter().find(|m| !m.supports_dim(n)) {
        return input(format!("method {m} does not handle dimension {n}"));
    }
    let jobs: Vec<(usize, usize)> = (0..methods.len())
        .flat_map(|m| (0..class.functions.len()).map(move |f| (m, f)))
        .collect();
    let run = || -> Result<Vec<BenchmarkRecord>> {
        jobs.par_iter()
            .map(|&(m, f)| run_one(methods[m], &class.spec.name, f + 1, &class.functions[f], config))
            .collect()
    };
    let mut records = match config.jobs {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Input(format!("cannot start {threads} worker threads: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let order = |r: &BenchmarkRecord| methods.iter().position(|m| m.to_string() == r.method);
    records.sort_by_key(|r| (order(r), r.function));
    Ok(records)
}
