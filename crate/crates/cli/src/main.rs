use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use unimode::bounds::{fjp_steps, ftp_steps, mode_step_bounds, BoundKind, StepBounds};
use unimode::experiment::{run_experiment, to_csv, ExperimentConfig, SpeedGrid, DEFAULT_JOBS, DEFAULT_SEED};
use unimode::oracle::{exact_max, DEFAULT_PERMUTATION_CAP};
use unimode::protocols::{simulate_transition, DensityTest, Protocol};
use unimode::sim::{synchronous_jobs, trace_csv, trace_summary};
use unimode::validity::{validate_aum_mso, validate_sum_mso};
use unimode::{load_system, Platform, Rational, SystemFile};

#[derive(Parser)]
#[command(name = "unimode", version, about = "Mode-change analysis on uniform multiprocessors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProtocolArg {
    Sum,
    Aum,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Sum => Protocol::Sum,
            ProtocolArg::Aum => Protocol::Aum,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Ftp,
    Fjp,
}

#[derive(Subcommand)]
enum Command {
    /// Check a system file for protocol validity; exits 1 when invalid.
    Validate {
        file: PathBuf,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run the worst-case transition between two modes (0-based indices).
    SimulateTransition {
        file: PathBuf,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, value_enum)]
        protocol: ProtocolArg,
        /// Write the schedule trace CSV here.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Step-instant bounds for a job set or for the rem-jobs of a mode.
    Bounds {
        /// Requirements, e.g. 2,3,5,7 (FTP: in decreasing priority order).
        #[arg(long, value_delimiter = ',', requires = "speeds", conflicts_with = "system")]
        jobs: Option<Vec<Rational>>,
        #[arg(long, value_delimiter = ',')]
        speeds: Option<Vec<Rational>>,
        #[arg(long, value_enum, default_value = "ftp")]
        kind: KindArg,
        /// Take the platform and a mode's WCETs from a system file.
        #[arg(long, requires = "mode")]
        system: Option<PathBuf>,
        #[arg(long)]
        mode: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Exhaustive maximum makespan over all priority orders.
    Oracle {
        #[arg(long, value_delimiter = ',', required = true)]
        jobs: Vec<Rational>,
        #[arg(long, value_delimiter = ',', required = true)]
        speeds: Vec<Rational>,
        #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
        cap: u64,
    },
    /// Simulate synchronous jobs; prints the trace CSV.
    Simulate {
        #[arg(long, value_delimiter = ',', required = true)]
        jobs: Vec<Rational>,
        #[arg(long, value_delimiter = ',', required = true)]
        speeds: Vec<Rational>,
        /// Job indices from highest to lowest priority (default: input order).
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Print the summary JSON instead of the CSV.
        #[arg(long)]
        json: bool,
        /// Also write the summary JSON here.
        #[arg(long)]
        summary_out: Option<PathBuf>,
    },
    /// Sweep platform speeds and compare the makespan bound with the oracle.
    Experiment {
        /// Number of generated jobs.
        #[arg(long, default_value_t = DEFAULT_JOBS)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Explicit requirements; overrides --jobs and --seed.
        #[arg(long, value_delimiter = ',')]
        requirements: Option<Vec<Rational>>,
        #[arg(long, default_value = "1:101:10")]
        grid: String,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = DEFAULT_PERMUTATION_CAP)]
        cap: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        quiet: bool,
    },
}

/// `println!` that stays quiet when stdout is closed early.
macro_rules! outln {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn read_system(path: &Path) -> Result<SystemFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_system(&text).with_context(|| format!("loading {}", path.display()))
}

fn platform(speeds: Vec<Rational>) -> Result<Platform> {
    Platform::new(speeds).context("invalid platform")
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> Result<()> {
    outln!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn cell(v: &Rational) -> String {
    if v.is_integer() {
        v.to_decimal(6)
    } else {
        format!("{} ({v})", v.to_decimal(6))
    }
}

fn print_table(header: &[String], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, c) in width.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: &[String]| {
        cells
            .iter()
            .zip(&width)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    outln!("{}", line(header));
    for row in rows {
        outln!("{}", line(row));
    }
}

fn print_bounds(b: &StepBounds) {
    match b.kind {
        BoundKind::FtpExact => {
            let m = b.values.len();
            let mut header = vec!["i".to_string()];
            header.extend((1..=m).map(|j| format!("t_{j}")));
            let rows: Vec<Vec<String>> = b
                .table
                .iter()
                .enumerate()
                .map(|(i, row)| std::iter::once(i.to_string()).chain(row.iter().map(cell)).collect())
                .collect();
            print_table(&header, &rows);
        }
        BoundKind::FjpUpper => {
            let header = ["j", "L_j", "stephat_j"].map(String::from);
            let rows: Vec<Vec<String>> = b
                .lower
                .iter()
                .zip(&b.values)
                .enumerate()
                .map(|(j, (l, s))| vec![(j + 1).to_string(), cell(l), cell(s)])
                .collect();
            print_table(&header, &rows);
        }
    }
    outln!("upms = {}", cell(&b.upms()));
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate { file, protocol, json } => {
            let sys = read_system(&file)?;
            let report = match Protocol::from(protocol) {
                Protocol::Sum => validate_sum_mso(&sys.system, &sys.platform),
                Protocol::Aum => validate_aum_mso(&sys.system, &sys.platform, &DensityTest),
            };
            if json {
                print_json(&report)?;
            } else {
                out!("{report}");
            }
            Ok(if report.valid() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::SimulateTransition {
            file,
            from,
            to,
            protocol,
            trace_out,
        } => {
            let sys = read_system(&file)?;
            let run = simulate_transition(&sys.system, &sys.platform, from, to, protocol.into(), &DensityTest)?;
            if let Some(path) = trace_out {
                write_file(&path, &trace_csv(&run.trace))?;
            }
            print_json(&run.timeline)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds {
            jobs,
            speeds,
            kind,
            system,
            mode,
            json,
        } => {
            let bounds = if let Some(path) = system {
                let sys = read_system(&path)?;
                let mode = mode.expect("clap enforces --mode");
                ensure!(mode < sys.system.mode_count(), "mode {mode} out of range");
                mode_step_bounds(sys.system.mode(mode), &sys.platform)
            } else {
                let (Some(jobs), Some(speeds)) = (jobs, speeds) else {
                    bail!("give either --jobs with --speeds, or --system with --mode");
                };
                let p = platform(speeds)?;
                match kind {
                    KindArg::Ftp => ftp_steps(&jobs, &p)?,
                    KindArg::Fjp => {
                        ensure!(jobs.iter().all(Rational::is_positive), "requirements must be positive");
                        fjp_steps(&jobs, &p)
                    }
                }
            };
            if json {
                print_json(&bounds)?;
            } else {
                print_bounds(&bounds);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { jobs, speeds, cap } => {
            let result = exact_max(&jobs, &platform(speeds)?, cap)?;
            print_json(&result)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            jobs,
            speeds,
            order,
            json,
            summary_out,
        } => {
            let order = order.unwrap_or_else(|| (0..jobs.len()).collect());
            let mut sorted = order.clone();
            sorted.sort_unstable();
            ensure!(
                sorted == (0..jobs.len()).collect::<Vec<_>>(),
                "--order must be a permutation of 0..{}",
                jobs.len()
            );
            let trace = unimode::simulate(&synchronous_jobs(&jobs, &order), &platform(speeds)?)?;
            let summary = serde_json::to_string_pretty(&trace_summary(&trace))?;
            if let Some(path) = summary_out {
                write_file(&path, &summary)?;
            }
            if json {
                outln!("{summary}");
            } else {
                out!("{}", trace_csv(&trace));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment {
            jobs,
            seed,
            requirements,
            grid,
            m,
            cap,
            out,
            quiet,
        } => {
            let grid: SpeedGrid = grid.parse()?;
            let config = match requirements {
                Some(requirements) => ExperimentConfig {
                    requirements,
                    seed: None,
                    grid,
                    m,
                    cap,
                },
                None => ExperimentConfig::seeded(jobs, seed, grid, m, cap),
            };
            let report = run_experiment(&config, |done, total| {
                if !quiet && (done % 50 == 0 || done == total) {
                    eprint!("\r{done}/{total} platforms");
                    if done == total {
                        eprintln!();
                    }
                    let _ = std::io::stderr().flush();
                }
            })?;
            write_file(&out, &to_csv(&report))?;
            outln!("{}", report.summary);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
