//! Bound-versus-oracle sweep: for every nondecreasing speed tuple drawn from
//! a grid, compare the priority-agnostic makespan bound with the exhaustive
//! maximum makespan of one fixed job set.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::fjp_steps;
use crate::model::Platform;
use crate::oracle::{exact_max, factorial, OracleError};
use crate::rational::Rational;

pub const DEFAULT_SEED: u64 = 20_091_130;
pub const DEFAULT_JOBS: usize = 7;
/// Requirements are drawn uniformly from `1..=MAX_REQUIREMENT`.
pub const MAX_REQUIREMENT: u32 = 100;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{n} jobs need {n}! permutations, above the cap of {cap}")]
    CapExceeded { n: usize, cap: u64 },
    #[error("invalid speed grid: {0}")]
    Grid(String),
    #[error("the platform needs at least one processor")]
    NoProcessors,
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Speeds `lo, lo + step, ...` up to and including `hi`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeedGrid {
    pub lo: Rational,
    pub hi: Rational,
    pub step: Rational,
}

impl SpeedGrid {
    pub fn new(lo: Rational, hi: Rational, step: Rational) -> Result<Self, ExperimentError> {
        if !lo.is_positive() {
            return Err(ExperimentError::Grid("lowest speed must be positive".into()));
        }
        if hi < lo {
            return Err(ExperimentError::Grid("highest speed below lowest".into()));
        }
        if !step.is_positive() {
            return Err(ExperimentError::Grid("step must be positive".into()));
        }
        Ok(SpeedGrid { lo, hi, step })
    }

    pub fn values(&self) -> Vec<Rational> {
        let mut out = Vec::new();
        let mut s = self.lo.clone();
        while s <= self.hi {
            out.push(s.clone());
            s += &self.step;
        }
        out
    }
}

impl FromStr for SpeedGrid {
    type Err = ExperimentError;

    /// `lo:hi:step`, or a single speed.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |x: &str| {
            x.trim()
                .parse::<Rational>()
                .map_err(|e| ExperimentError::Grid(e.to_string()))
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [one] => {
                let v = parse(one)?;
                SpeedGrid::new(v.clone(), v, Rational::one())
            }
            [lo, hi, step] => SpeedGrid::new(parse(lo)?, parse(hi)?, parse(step)?),
            _ => Err(ExperimentError::Grid(format!("expected lo:hi:step, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub requirements: Vec<Rational>,
    /// Seed the requirements came from, if they were generated.
    pub seed: Option<u64>,
    pub grid: SpeedGrid,
    pub m: usize,
    pub cap: u64,
}

impl ExperimentConfig {
    /// Seeded job set with the default requirement distribution.
    pub fn seeded(n_jobs: usize, seed: u64, grid: SpeedGrid, m: usize, cap: u64) -> Self {
        ExperimentConfig {
            requirements: generate_requirements(n_jobs, seed),
            seed: Some(seed),
            grid,
            m,
            cap,
        }
    }

    fn check(&self) -> Result<(), ExperimentError> {
        if self.m == 0 {
            return Err(ExperimentError::NoProcessors);
        }
        let n = self.requirements.len();
        match factorial(n) {
            Some(k) if k <= self.cap => Ok(()),
            _ => Err(ExperimentError::CapExceeded { n, cap: self.cap }),
        }
    }
}

/// `n` integer requirements drawn uniformly from `1..=100`.
pub fn generate_requirements(n: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Rational::from_integer(rng.gen_range(1..=MAX_REQUIREMENT) as i64))
        .collect()
}

/// All nondecreasing `m`-tuples over `grid`, in lexicographic order.
pub fn speed_combinations(grid: &[Rational], m: usize) -> Vec<Vec<Rational>> {
    fn rec(grid: &[Rational], from: usize, m: usize, cur: &mut Vec<Rational>, out: &mut Vec<Vec<Rational>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in from..grid.len() {
            cur.push(grid[i].clone());
            rec(grid, i, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(grid, 0, m, &mut Vec::with_capacity(m), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub speeds: Vec<Rational>,
    pub lambda: Rational,
    pub oracle: Rational,
    pub stephat: Rational,
    /// `100 * (stephat - oracle) / oracle`, exact.
    pub error: Rational,
}

impl ExperimentRow {
    pub fn error_pct(&self) -> f64 {
        self.error.to_f64()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub max: f64,
    pub min: f64,
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator); 0 for one row.
    pub sample_std_dev: f64,
}

impl Summary {
    pub fn of(errors: &[f64]) -> Option<Self> {
        let n = errors.len();
        if n == 0 {
            return None;
        }
        let mean = errors.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Some(Summary {
            rows: n,
            max: errors.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: errors.iter().copied().fold(f64::INFINITY, f64::min),
            mean,
            sample_std_dev: var.sqrt(),
        })
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "rows={} max={:.4}% min={:.4}% mean={:.4}% sample_std_dev={:.4}%",
            self.rows, self.max, self.min, self.mean, self.sample_std_dev
        )
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rows: Vec<ExperimentRow>,
    pub summary: Summary,
}

pub fn evaluate(requirements: &[Rational], platform: &Platform, cap: u64) -> Result<ExperimentRow, ExperimentError> {
    let oracle = exact_max(requirements, platform, cap)?.max_makespan;
    let stephat = fjp_steps(requirements, platform).upms();
    let error = if oracle.is_zero() {
        Rational::zero()
    } else {
        Rational::from_integer(100) * (&stephat - &oracle) / &oracle
    };
    Ok(ExperimentRow {
        speeds: platform.speeds().to_vec(),
        lambda: platform.lambda(),
        oracle,
        stephat,
        error,
    })
}

/// Run the sweep. `progress` is called after each row with
/// `(done, total)`.
pub fn run_experiment(
    config: &ExperimentConfig,
    mut progress: impl FnMut(usize, usize),
) -> Result<ExperimentReport, ExperimentError> {
    config.check()?;
    let combos = speed_combinations(&config.grid.values(), config.m);
    let total = combos.len();
    let mut rows = Vec::with_capacity(total);
    for speeds in combos {
        let platform = Platform::new(speeds).expect("grid speeds are positive");
        rows.push(evaluate(&config.requirements, &platform, config.cap)?);
        progress(rows.len(), total);
    }
    let errors: Vec<f64> = rows.iter().map(ExperimentRow::error_pct).collect();
    let summary = Summary::of(&errors).expect("grid is nonempty");
    Ok(ExperimentReport {
        config: config.clone(),
        rows,
        summary,
    })
}

fn join(values: &[Rational]) -> String {
    values.iter().map(Rational::to_string).collect::<Vec<_>>().join(",")
}

/// CSV with `#` comment lines for the inputs and summary, then one row per
/// speed tuple. Exact values are printed as 6-digit decimals.
pub fn to_csv(report: &ExperimentReport) -> String {
    let cfg = &report.config;
    let g = &cfg.grid;
    let mut out = String::new();
    match cfg.seed {
        Some(seed) => writeln!(out, "# seed={seed}"),
        None => writeln!(out, "# seed=none"),
    }
    .unwrap();
    writeln!(out, "# requirements={}", join(&cfg.requirements)).unwrap();
    writeln!(out, "# grid={}:{}:{} m={} cap={}", g.lo, g.hi, g.step, cfg.m, cfg.cap).unwrap();
    writeln!(out, "# summary {}", report.summary).unwrap();
    let header: Vec<String> = (1..=cfg.m).map(|i| format!("s{i}")).collect();
    writeln!(out, "{},lambda,oracle,stephat,error_pct", header.join(",")).unwrap();
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            join(&r.speeds),
            r.lambda.to_decimal(6),
            r.oracle.to_decimal(6),
            r.stephat.to_decimal(6),
            r.error.to_decimal(6)
        )
        .unwrap();
    }
    out
}
