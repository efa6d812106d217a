//! Closed-form step-instant and makespan bounds for a synchronous job set.
//!
//! * [`ftp_steps`]: exact step instants when job priorities are known.
//! * [`fjp_lower`] / [`fjp_steps`]: priority-agnostic lower and upper
//!   bounds on every step instant.
//! * [`upms_identical`]: the classic identical-platform makespan bound.
//! * [`upms_naive`]: its direct transposition to uniform platforms, kept
//!   only because it is unsound there and the tests demonstrate it.

use serde::Serialize;
use thiserror::Error;

use crate::model::{total_speed_of, ModeSpec, Platform, SchedulerKind};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("requirement #{0} is not positive")]
    NonpositiveRequirement(usize),
    #[error("step index {j} outside 1..={m}")]
    IndexOutOfRange { j: usize, m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    FtpExact,
    FjpUpper,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepBounds {
    pub kind: BoundKind,
    /// `step_1..step_m` (exact for FTP, upper bounds for FJP).
    pub values: Vec<Rational>,
    /// FTP only: row `i` holds `t_1^i..t_m^i` for `i = 0..=n`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<Vec<Rational>>,
    /// FJP only: the lower bounds `L_1..L_m`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lower: Vec<Rational>,
}

impl StepBounds {
    /// Bound on the makespan, i.e. the last step instant.
    pub fn upms(&self) -> Rational {
        self.values.last().cloned().unwrap_or_else(Rational::zero)
    }
}

fn check_positive(reqs: &[Rational]) -> Result<(), BoundsError> {
    match reqs.iter().position(|c| !c.is_positive()) {
        Some(i) => Err(BoundsError::NonpositiveRequirement(i)),
        None => Ok(()),
    }
}

fn sorted(reqs: &[Rational]) -> Vec<Rational> {
    let mut v = reqs.to_vec();
    v.sort();
    v
}

/// Step instant in the staircase recurrence; `Unbounded` stands for the
/// sentinel above the fastest processor.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Instant {
    At(Rational),
    Unbounded,
}

/// Exact step instants of the FTP schedule of `reqs` (listed in decreasing
/// priority order), all released at time zero.
///
/// Row `i` of the table is the staircase of the `i` highest-priority jobs.
/// Job `i` executes on processor `l` during `[t_l, t_{l+1})` of the previous
/// staircase, so with `A_j` the work it can do on processors `1..j`:
///
/// * `t_j = t_{j+1}`: unchanged;
/// * `C_i >= A_j`: it is still running at `t_{j+1}`, so `t_j <- t_{j+1}`;
/// * `C_i <= A_{j-1}`: it completes before `t_j`, unchanged;
/// * otherwise it completes on processor `j` at `t_j + (C_i - A_{j-1}) / s_j`.
pub fn ftp_steps(reqs: &[Rational], platform: &Platform) -> Result<StepBounds, BoundsError> {
    check_positive(reqs)?;
    let m = platform.m();
    let s = platform.speeds();
    let mut row: Vec<Instant> = vec![Instant::At(Rational::zero()); m];
    row.push(Instant::Unbounded);
    let finite = |r: &[Instant]| -> Vec<Rational> {
        r[..m]
            .iter()
            .map(|x| match x {
                Instant::At(v) => v.clone(),
                Instant::Unbounded => unreachable!("only the sentinel is unbounded"),
            })
            .collect()
    };
    let mut table = vec![finite(&row)];

    for c in reqs {
        let prev = finite(&row);
        let mut next_row = Vec::with_capacity(m + 1);
        // A_{j-1}: grey area on processors 1..j-1
        let mut area_below = Rational::zero();
        for j in 0..m {
            let tj = &prev[j];
            let value = match &row[j + 1] {
                Instant::At(up) if up == tj => tj.clone(),
                upper => {
                    let reaches_upper = match upper {
                        Instant::At(up) => {
                            let through = &area_below + (up - tj) * &s[j];
                            (c >= &through).then(|| up.clone())
                        }
                        Instant::Unbounded => None,
                    };
                    match reaches_upper {
                        Some(up) => up,
                        None if c <= &area_below => tj.clone(),
                        None => tj + (c - &area_below) / &s[j],
                    }
                }
            };
            if let Instant::At(up) = &row[j + 1] {
                area_below += (up - tj) * &s[j];
            }
            next_row.push(Instant::At(value));
        }
        next_row.push(Instant::Unbounded);
        row = next_row;
        table.push(finite(&row));
    }

    Ok(StepBounds {
        kind: BoundKind::FtpExact,
        values: finite(&row),
        table,
        lower: Vec::new(),
    })
}

/// Identical-platform makespan bound for `m` unit-speed processors.
pub fn upms_identical(reqs: &[Rational], m: usize) -> Rational {
    let c = sorted(reqs);
    let Some(largest) = c.last() else {
        return Rational::zero();
    };
    if m >= c.len() {
        return largest.clone();
    }
    let m_q = Rational::from_integer(m as i64);
    let total: Rational = c.iter().sum();
    &total / &m_q + (Rational::one() - m_q.recip()) * largest
}

/// The naive transposition of [`upms_identical`] to uniform platforms.
/// Not a valid bound; see the module docs.
pub fn upms_naive(reqs: &[Rational], platform: &Platform) -> Rational {
    let c = sorted(reqs);
    let Some(largest) = c.last() else {
        return Rational::zero();
    };
    let (n, m) = (c.len(), platform.m());
    if m > n {
        return largest / platform.speed(m - n);
    }
    let total_speed = platform.total_speed();
    let total: Rational = c.iter().sum();
    &total / &total_speed + (platform.fastest().recip() - total_speed.recip()) * largest
}

/// `L_j` for `j = 1..=m` on the platform actually usable by `n` jobs: when
/// `n < m` only the `n` fastest processors can be busy, and the `m - n`
/// slowest step instants are zero.
fn fjp_lower_all(c: &[Rational], platform: &Platform) -> Vec<Rational> {
    let m = platform.m();
    let n = c.len();
    let used = platform.fastest_k(n);
    let skipped = m - used.len();
    let total_speed = total_speed_of(used);
    let mut out = vec![Rational::zero(); skipped];
    let mut prefix = Rational::zero();
    let mut taken = 0usize;
    for j in 1..=used.len() {
        let upto = n - used.len() + j;
        while taken < upto {
            prefix += &c[taken];
            taken += 1;
        }
        out.push(&prefix / &total_speed);
    }
    out
}

/// Lower bound `L_j` on the `j`-th step instant, whatever the job priorities.
pub fn fjp_lower(reqs: &[Rational], platform: &Platform, j: usize) -> Result<Rational, BoundsError> {
    let m = platform.m();
    if j == 0 || j > m {
        return Err(BoundsError::IndexOutOfRange { j, m });
    }
    Ok(fjp_lower_all(&sorted(reqs), platform).swap_remove(j - 1))
}

/// Upper bounds on every step instant, whatever the job priorities:
/// `(sum C - sum_{k<j} L_k s_k) / sum_{k>=j} s_k`.
pub fn fjp_steps(reqs: &[Rational], platform: &Platform) -> StepBounds {
    let c = sorted(reqs);
    let m = platform.m();
    let lower = fjp_lower_all(&c, platform);
    let used = platform.fastest_k(c.len());
    let skipped = m - used.len();
    let mut values = vec![Rational::zero(); skipped];
    let mut numerator: Rational = c.iter().sum();
    let mut denominator = total_speed_of(used);
    for (k, s) in used.iter().enumerate() {
        values.push(&numerator / &denominator);
        numerator -= &lower[skipped + k] * s;
        denominator -= s;
    }
    StepBounds {
        kind: BoundKind::FjpUpper,
        values,
        table: Vec::new(),
        lower,
    }
}

/// Step bounds for the worst-case rem-job set of `mode`: one job per task,
/// at full WCET, all released together.
pub fn mode_step_bounds(mode: &ModeSpec, platform: &Platform) -> StepBounds {
    match &mode.scheduler {
        SchedulerKind::Ftp { order } => {
            let reqs: Vec<Rational> = order.iter().map(|&i| mode.tasks[i].wcet.clone()).collect();
            ftp_steps(&reqs, platform).expect("task WCETs are positive")
        }
        SchedulerKind::Edf | SchedulerKind::FjpUnknown => fjp_steps(&mode.wcets(), platform),
    }
}

/// Upper bound on the time needed to flush the rem-jobs of `mode`.
pub fn upms(mode: &ModeSpec, platform: &Platform) -> Rational {
    mode_step_bounds(mode, platform).upms()
}
