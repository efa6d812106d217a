//! Mode transitions under the synchronous (SUM-MSO) and asynchronous
//! (AUM-MSO) protocols, and the pluggable schedulability test the
//! asynchronous protocol consults before enabling a new-mode task.
//!
//! Rem-jobs always outrank new-mode jobs, so the rem-job schedule does not
//! depend on the new mode. A transition is therefore run in two passes: the
//! rem-jobs alone decide the enablement instants, then rem-jobs and the
//! released new-mode jobs are simulated together to observe deadlines.

use serde::Serialize;
use thiserror::Error;

use crate::model::{lambda_of, total_speed_of, ModeSpec, Platform, SchedulerKind, SystemSpec, TaskSpec};
use crate::rational::Rational;
use crate::sim::{makespan, simulate, JobId, JobInstance, ScheduleTrace, SimError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("expected {expected} enablement deadlines, got {got}")]
    DeadlineCount { expected: usize, got: usize },
    #[error("rem-job {0} arrives after the mode change request")]
    LateRemJob(JobId),
    #[error("mode index {0} out of range")]
    NoSuchMode(usize),
    #[error("a transition needs two distinct modes")]
    SameMode,
}

/// Schedulability oracle consulted by the asynchronous protocol and its
/// validity test. Implementations must be sound: accept only task sets the
/// scheduler provably schedules on the given processors. `tasks` are in
/// decreasing priority order when the scheduler is FTP.
pub trait CpuTest {
    fn accepts(&self, speeds: &[Rational], scheduler: &SchedulerKind, tasks: &[TaskSpec]) -> bool;
}

impl<F> CpuTest for F
where
    F: Fn(&[Rational], &SchedulerKind, &[TaskSpec]) -> bool,
{
    fn accepts(&self, speeds: &[Rational], scheduler: &SchedulerKind, tasks: &[TaskSpec]) -> bool {
        self(speeds, scheduler, tasks)
    }
}

/// [`cpu_default`] as a [`CpuTest`].
#[derive(Debug, Clone, Copy, Default)]
pub struct DensityTest;

impl CpuTest for DensityTest {
    fn accepts(&self, speeds: &[Rational], scheduler: &SchedulerKind, tasks: &[TaskSpec]) -> bool {
        cpu_default(speeds, scheduler, tasks)
    }
}

/// Rejects everything; degenerates the asynchronous protocol into the
/// synchronous one.
#[derive(Debug, Clone, Copy, Default)]
pub struct RejectAll;

impl CpuTest for RejectAll {
    fn accepts(&self, _: &[Rational], _: &SchedulerKind, _: &[TaskSpec]) -> bool {
        false
    }
}

/// Default sufficient test. With densities `d_i = C_i / D_i`, accept iff
/// `sum d_i <= S - lambda * max d_i` and `max d_i <= s_max`. For FTP the
/// `r`-th highest-priority task must also fit alone on the `r`-th fastest
/// processor (`C <= D * s`), with no more tasks than processors.
pub fn cpu_default(speeds: &[Rational], scheduler: &SchedulerKind, tasks: &[TaskSpec]) -> bool {
    if tasks.is_empty() {
        return true;
    }
    let Some(fastest) = speeds.last() else {
        return false;
    };
    let densities: Vec<Rational> = tasks.iter().map(TaskSpec::density).collect();
    let max_density = densities.iter().max().expect("nonempty").clone();
    if &max_density > fastest {
        return false;
    }
    let total: Rational = densities.iter().sum();
    if total > total_speed_of(speeds) - lambda_of(speeds) * &max_density {
        return false;
    }
    if scheduler.is_ftp() {
        if tasks.len() > speeds.len() {
            return false;
        }
        return tasks
            .iter()
            .zip(speeds.iter().rev())
            .all(|(t, s)| t.wcet <= &t.deadline * s);
    }
    true
}

/// `subset` of the mode's task indices, ordered for a [`CpuTest`].
pub fn ordered_tasks(mode: &ModeSpec, subset: &[usize]) -> Vec<TaskSpec> {
    ordered_subset(&mode.scheduler, &mode.tasks, subset)
}

/// Like [`ordered_tasks`] for a bare task list.
pub fn ordered_subset(scheduler: &SchedulerKind, tasks: &[TaskSpec], subset: &[usize]) -> Vec<TaskSpec> {
    let mut idx = subset.to_vec();
    match scheduler {
        SchedulerKind::Ftp { order } => {
            let rank = rank_of(order);
            idx.sort_by_key(|&i| rank[i]);
        }
        _ => idx.sort_unstable(),
    }
    idx.into_iter().map(|i| tasks[i].clone()).collect()
}

fn rank_of(order: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; order.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    rank
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Sum,
    Aum,
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sum" | "sum-mso" => Ok(Protocol::Sum),
            "aum" | "aum-mso" => Ok(Protocol::Aum),
            other => Err(format!("unknown protocol {other:?} (expected sum or aum)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Enablement {
    pub task: usize,
    pub instant: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// A new-mode task enabled after `t_MCR + D`.
    Enablement {
        task: usize,
        deadline: Rational,
        enabled_at: Rational,
    },
    /// A rem-job or new-mode job finished after its absolute deadline.
    JobDeadline {
        job: JobId,
        new_mode_task: Option<usize>,
        deadline: Rational,
        finish: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemJobFinish {
    pub job: JobId,
    pub finish: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewJob {
    pub job: JobId,
    pub task: usize,
    pub release: Rational,
    pub deadline: Rational,
    pub finish: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TransitionTimeline {
    pub protocol: Protocol,
    pub mcr_time: Rational,
    pub rem_job_finishes: Vec<RemJobFinish>,
    /// In the order the protocol enabled them.
    pub enablements: Vec<Enablement>,
    pub mode_entry: Rational,
    pub violations: Vec<Violation>,
    pub new_jobs: Vec<NewJob>,
}

impl TransitionTimeline {
    pub fn enablement_of(&self, task: usize) -> Option<&Rational> {
        self.enablements.iter().find(|e| e.task == task).map(|e| &e.instant)
    }
}

#[derive(Debug, Clone)]
pub struct TransitionRun {
    pub timeline: TransitionTimeline,
    /// Rem-jobs and released new-mode jobs scheduled together.
    pub trace: ScheduleTrace,
    /// The jobs behind `trace`, with their transition priorities.
    pub jobs: Vec<JobInstance>,
    /// Ids of the rem-jobs in `jobs`.
    pub rem_ids: Vec<JobId>,
}

/// The worst-case rem-job set of `mode` for a request at `mcr_time`: one job
/// per task at full WCET, all released at the request. Job ids are task
/// indices. FTP priorities follow the task order; FJP priorities are fixed
/// by absolute deadline, ties by task index.
pub fn worst_case_rem_jobs(mode: &ModeSpec, mcr_time: &Rational) -> Vec<JobInstance> {
    let n = mode.tasks.len();
    let rank: Vec<usize> = match &mode.scheduler {
        SchedulerKind::Ftp { order } => rank_of(order),
        SchedulerKind::Edf | SchedulerKind::FjpUnknown => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.sort_by(|&a, &b| mode.tasks[a].deadline.cmp(&mode.tasks[b].deadline).then(a.cmp(&b)));
            rank_of(&idx)
        }
    };
    mode.tasks
        .iter()
        .enumerate()
        .map(|(i, t)| JobInstance {
            id: i,
            arrival: mcr_time.clone(),
            requirement: t.wcet.clone(),
            deadline: Some(mcr_time + &t.deadline),
            priority: rank[i] as i64,
        })
        .collect()
}

/// Rem-jobs released at the request with priorities `0..r` in their
/// original relative order.
fn normalize_rem_jobs(rem_jobs: &[JobInstance], mcr_time: &Rational) -> Result<Vec<JobInstance>, ProtocolError> {
    let mut jobs = rem_jobs.to_vec();
    if let Some(j) = jobs.iter().find(|j| &j.arrival > mcr_time) {
        return Err(ProtocolError::LateRemJob(j.id));
    }
    jobs.sort_by_key(|j| j.priority);
    for (p, j) in jobs.iter_mut().enumerate() {
        j.arrival = mcr_time.clone();
        j.priority = p as i64;
    }
    Ok(jobs)
}

/// Tasks sorted by increasing enablement deadline, ties by index.
pub fn scan_order(deadlines: &[Rational]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..deadlines.len()).collect();
    idx.sort_by(|&a, &b| deadlines[a].cmp(&deadlines[b]).then(a.cmp(&b)));
    idx
}

/// Synchronous protocol: every new-mode task is enabled once all rem-jobs
/// have completed.
pub fn sum_mso(
    new_mode: &ModeSpec,
    deadlines: &[Rational],
    platform: &Platform,
    rem_jobs: &[JobInstance],
    mcr_time: &Rational,
) -> Result<TransitionRun, ProtocolError> {
    check_deadlines(new_mode, deadlines)?;
    let rem = normalize_rem_jobs(rem_jobs, mcr_time)?;
    let rem_trace = simulate(&rem, platform)?;
    let last_rem = makespan(&rem_trace)?;
    let flushed = last_rem.clone().max(mcr_time.clone());
    let enablements = scan_order(deadlines)
        .into_iter()
        .map(|task| Enablement {
            task,
            instant: flushed.clone(),
        })
        .collect();
    finish_transition(
        Protocol::Sum,
        new_mode,
        deadlines,
        platform,
        rem,
        last_rem,
        mcr_time,
        enablements,
    )
}

/// Asynchronous protocol. Whenever no rem-job is waiting for a processor,
/// the processors not running rem-jobs (always the slowest ones) are handed
/// to the new mode, and disabled tasks are scanned by increasing enablement
/// deadline, each enabled if `cpu` accepts it together with the tasks
/// already enabled. The request instant itself is a decision point. Once the
/// last rem-job completes, any task still disabled is enabled.
pub fn aum_mso(
    new_mode: &ModeSpec,
    deadlines: &[Rational],
    platform: &Platform,
    rem_jobs: &[JobInstance],
    mcr_time: &Rational,
    cpu: &dyn CpuTest,
) -> Result<TransitionRun, ProtocolError> {
    check_deadlines(new_mode, deadlines)?;
    let rem = normalize_rem_jobs(rem_jobs, mcr_time)?;
    let rem_trace = simulate(&rem, platform)?;
    let finishes: Vec<Rational> = rem_trace
        .jobs
        .iter()
        .map(|j| j.finish.clone().expect("rem-jobs run to completion"))
        .collect();
    let last_rem = makespan(&rem_trace)?;
    let mut instants = finishes.clone();
    instants.push(mcr_time.clone());
    instants.sort();
    instants.dedup();

    let m = platform.m();
    let mut disabled = scan_order(deadlines);
    let mut enabled: Vec<usize> = Vec::new();
    let mut enablements = Vec::new();
    for t in &instants {
        let still_active = finishes.iter().filter(|f| *f > t).count();
        if still_active == 0 {
            for task in disabled.drain(..) {
                enablements.push(Enablement {
                    task,
                    instant: t.clone(),
                });
            }
            break;
        }
        if still_active >= m {
            // no processor is free, or rem-jobs are still waiting
            continue;
        }
        let available = platform.slowest(m - still_active);
        let mut kept = Vec::with_capacity(disabled.len());
        for task in disabled.drain(..) {
            let mut candidate = enabled.clone();
            candidate.push(task);
            if cpu.accepts(available, &new_mode.scheduler, &ordered_tasks(new_mode, &candidate)) {
                enabled.push(task);
                enablements.push(Enablement {
                    task,
                    instant: t.clone(),
                });
            } else {
                kept.push(task);
            }
        }
        disabled = kept;
    }
    finish_transition(
        Protocol::Aum,
        new_mode,
        deadlines,
        platform,
        rem,
        last_rem,
        mcr_time,
        enablements,
    )
}

fn check_deadlines(new_mode: &ModeSpec, deadlines: &[Rational]) -> Result<(), ProtocolError> {
    if deadlines.len() != new_mode.tasks.len() {
        return Err(ProtocolError::DeadlineCount {
            expected: new_mode.tasks.len(),
            got: deadlines.len(),
        });
    }
    Ok(())
}

/// Release new-mode jobs periodically from each enablement instant up to one
/// longest period past mode entry, simulate them under the rem-jobs and
/// collect violations.
#[allow(clippy::too_many_arguments)]
fn finish_transition(
    protocol: Protocol,
    new_mode: &ModeSpec,
    deadlines: &[Rational],
    platform: &Platform,
    rem: Vec<JobInstance>,
    last_rem: Rational,
    mcr_time: &Rational,
    enablements: Vec<Enablement>,
) -> Result<TransitionRun, ProtocolError> {
    let rem_count = rem.len();
    let last_enable = enablements
        .iter()
        .map(|e| e.instant.clone())
        .max()
        .unwrap_or_else(|| mcr_time.clone());
    let mode_entry = last_rem.max(last_enable).max(mcr_time.clone());
    let longest_period = new_mode
        .tasks
        .iter()
        .map(|t| t.period.clone())
        .max()
        .unwrap_or_else(Rational::zero);
    let horizon = &mode_entry + &longest_period;

    struct Pending {
        task: usize,
        release: Rational,
        deadline: Rational,
    }
    let mut pending = Vec::new();
    for e in &enablements {
        let task = &new_mode.tasks[e.task];
        let mut release = e.instant.clone();
        while release < horizon {
            pending.push(Pending {
                task: e.task,
                deadline: &release + &task.deadline,
                release: release.clone(),
            });
            release += &task.period;
        }
    }
    match &new_mode.scheduler {
        SchedulerKind::Ftp { order } => {
            let rank = rank_of(order);
            pending.sort_by(|a, b| rank[a.task].cmp(&rank[b.task]).then(a.release.cmp(&b.release)));
        }
        SchedulerKind::Edf | SchedulerKind::FjpUnknown => {
            pending.sort_by(|a, b| {
                a.deadline
                    .cmp(&b.deadline)
                    .then(a.task.cmp(&b.task))
                    .then(a.release.cmp(&b.release))
            });
        }
    }

    let rem_ids: Vec<JobId> = rem.iter().map(|j| j.id).collect();
    let first_new_id = rem_ids.iter().max().map_or(0, |m| m + 1);
    let mut jobs = rem;
    let mut new_ids = Vec::with_capacity(pending.len());
    for (k, p) in pending.iter().enumerate() {
        let id = first_new_id + k;
        new_ids.push(id);
        jobs.push(JobInstance {
            id,
            arrival: p.release.clone(),
            requirement: new_mode.tasks[p.task].wcet.clone(),
            deadline: Some(p.deadline.clone()),
            priority: (rem_count + k) as i64,
        });
    }
    let trace = simulate(&jobs, platform)?;

    let mut violations = Vec::new();
    for e in &enablements {
        let deadline = mcr_time + &deadlines[e.task];
        if e.instant > deadline {
            violations.push(Violation::Enablement {
                task: e.task,
                deadline,
                enabled_at: e.instant.clone(),
            });
        }
    }
    let new_task_of = |id: JobId| new_ids.iter().position(|&x| x == id).map(|k| pending[k].task);
    for o in trace.deadline_misses() {
        violations.push(Violation::JobDeadline {
            job: o.id,
            new_mode_task: new_task_of(o.id),
            deadline: o.deadline.clone().expect("only jobs with deadlines miss"),
            finish: o.finish.clone().expect("complete trace"),
        });
    }

    let rem_job_finishes = rem_ids
        .iter()
        .map(|&id| RemJobFinish {
            job: id,
            finish: trace.job(id).and_then(|o| o.finish.clone()).expect("complete trace"),
        })
        .collect();
    let new_jobs = new_ids
        .iter()
        .zip(&pending)
        .map(|(&id, p)| NewJob {
            job: id,
            task: p.task,
            release: p.release.clone(),
            deadline: p.deadline.clone(),
            finish: trace.job(id).and_then(|o| o.finish.clone()).expect("complete trace"),
        })
        .collect();

    Ok(TransitionRun {
        timeline: TransitionTimeline {
            protocol,
            mcr_time: mcr_time.clone(),
            rem_job_finishes,
            enablements,
            mode_entry,
            violations,
            new_jobs,
        },
        trace,
        jobs,
        rem_ids,
    })
}

/// Run the worst-case transition `from -> to` of `system`: every old-mode
/// task has a full-WCET rem-job released at the request, taken at time zero.
pub fn simulate_transition(
    system: &SystemSpec,
    platform: &Platform,
    from: usize,
    to: usize,
    protocol: Protocol,
    cpu: &dyn CpuTest,
) -> Result<TransitionRun, ProtocolError> {
    if from >= system.mode_count() {
        return Err(ProtocolError::NoSuchMode(from));
    }
    if to >= system.mode_count() {
        return Err(ProtocolError::NoSuchMode(to));
    }
    if from == to {
        return Err(ProtocolError::SameMode);
    }
    let mcr = Rational::zero();
    let rem = worst_case_rem_jobs(system.mode(from), &mcr);
    let new_mode = system.mode(to);
    let deadlines = system.enablement_deadlines(from, to);
    match protocol {
        Protocol::Sum => sum_mso(new_mode, deadlines, platform, &rem, &mcr),
        Protocol::Aum => aum_mso(new_mode, deadlines, platform, &rem, &mcr, cpu),
    }
}

/// True when no new-mode job ever runs while a rem-job is active but not
/// running.
pub fn respects_priority_layering(run: &TransitionRun) -> bool {
    let is_rem = |id: JobId| run.rem_ids.contains(&id);
    run.trace.segments.iter().filter(|s| !is_rem(s.job)).all(|seg| {
        run.jobs.iter().filter(|j| is_rem(j.id)).all(|rem| {
            let outcome = run.trace.job(rem.id).expect("rem-job in trace");
            let finish = outcome.finish.as_ref().expect("complete trace");
            let active = rem.arrival <= seg.start && finish > &seg.start;
            !active
                || run
                    .trace
                    .segments
                    .iter()
                    .any(|r| r.job == rem.id && r.start <= seg.start && r.end > seg.start)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::sim::synchronous_jobs;

    fn int(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn platform(v: &[i64]) -> Platform {
        Platform::new(v.iter().map(|&x| int(x)).collect()).unwrap()
    }

    fn light_mode(n: usize) -> ModeSpec {
        let t = TaskSpec::new(q(1, 10), int(10), int(10)).unwrap();
        ModeSpec::new(vec![t; n], SchedulerKind::Edf).unwrap()
    }

    fn four_rem_jobs() -> Vec<JobInstance> {
        let c: Vec<Rational> = [2, 3, 5, 7].iter().map(|&x| int(x)).collect();
        synchronous_jobs(&c, &[0, 1, 2, 3])
    }

    #[test]
    fn cpu_default_examples() {
        let sched = SchedulerKind::Edf;
        assert!(cpu_default(&[int(1)], &sched, &[]));
        assert!(cpu_default(&[], &sched, &[]));
        let full = TaskSpec::new(int(1), int(1), int(1)).unwrap();
        assert!(cpu_default(&[int(1)], &sched, std::slice::from_ref(&full)));
        assert!(!cpu_default(&[], &sched, std::slice::from_ref(&full)));
        let heavy = TaskSpec::new(q(9, 10), int(1), int(1)).unwrap();
        assert!(!cpu_default(&[int(1), int(1)], &sched, &[heavy.clone(), heavy.clone()]));
        // too dense for the fastest processor
        assert!(!cpu_default(&[q(1, 2), q(3, 4)], &sched, std::slice::from_ref(&full)));
    }

    #[test]
    fn cpu_default_ftp_needs_a_processor_per_task() {
        let sched = SchedulerKind::Ftp { order: vec![0, 1, 2] };
        let long = TaskSpec::new(q(19, 10), int(10), int(10)).unwrap();
        let urgent = TaskSpec::new(int(1), q(3, 2), q(3, 2)).unwrap();
        // density-feasible, but two long high-priority jobs starve the urgent one
        let set = [long.clone(), long.clone(), urgent.clone()];
        assert!(cpu_default(&[int(1), int(1)], &SchedulerKind::Edf, &set));
        assert!(!cpu_default(&[int(1), int(1)], &sched, &set));
        assert!(cpu_default(&[int(1), int(1), int(1)], &sched, &set));
        // the lowest-priority task must fit alone on the slowest processor used
        assert!(!cpu_default(&[q(1, 2), int(1), int(1)], &sched, &set));
    }

    #[test]
    fn empty_transition() {
        let new_mode = light_mode(2);
        let d = vec![int(1), int(2)];
        let sum = sum_mso(&new_mode, &d, &platform(&[1, 2]), &[], &int(3)).unwrap();
        assert_eq!(sum.timeline.mode_entry, int(3));
        assert!(sum.timeline.enablements.iter().all(|e| e.instant == int(3)));
        let aum = aum_mso(&new_mode, &d, &platform(&[1, 2]), &[], &int(3), &RejectAll).unwrap();
        assert_eq!(
            aum.timeline,
            TransitionTimeline {
                protocol: Protocol::Aum,
                ..sum.timeline
            }
        );
    }

    #[test]
    fn sum_enables_at_rem_makespan() {
        let new_mode = light_mode(1);
        let run = sum_mso(&new_mode, &[int(10)], &platform(&[1, 1]), &four_rem_jobs(), &int(0)).unwrap();
        assert_eq!(run.timeline.enablement_of(0), Some(&int(10)));
        assert_eq!(run.timeline.mode_entry, int(10));
        assert!(run.timeline.violations.is_empty());
        let finishes: Vec<_> = run.timeline.rem_job_finishes.iter().map(|r| r.finish.clone()).collect();
        assert_eq!(finishes, vec![int(2), int(3), int(7), int(10)]);

        let run = sum_mso(&new_mode, &[int(9)], &platform(&[1, 1]), &four_rem_jobs(), &int(0)).unwrap();
        assert_eq!(
            run.timeline.violations,
            vec![Violation::Enablement {
                task: 0,
                deadline: int(9),
                enabled_at: int(10)
            }]
        );
    }

    #[test]
    fn aum_enables_on_first_freed_processor() {
        let rem = synchronous_jobs(&[int(2), int(10)], &[0, 1]);
        let new_mode = light_mode(1);
        let p = platform(&[1, 1]);
        let aum = aum_mso(&new_mode, &[int(5)], &p, &rem, &int(0), &DensityTest).unwrap();
        assert_eq!(aum.timeline.enablement_of(0), Some(&int(2)));
        assert!(aum.timeline.violations.is_empty());
        assert!(respects_priority_layering(&aum));
        let sum = sum_mso(&new_mode, &[int(5)], &p, &rem, &int(0)).unwrap();
        assert_eq!(sum.timeline.enablement_of(0), Some(&int(10)));
        assert_eq!(sum.timeline.violations.len(), 1);
    }

    #[test]
    fn aum_with_reject_all_matches_sum() {
        let new_mode = light_mode(3);
        let d = vec![int(12), int(11), int(13)];
        let p = platform(&[1, 1]);
        let sum = sum_mso(&new_mode, &d, &p, &four_rem_jobs(), &int(0)).unwrap();
        let aum = aum_mso(&new_mode, &d, &p, &four_rem_jobs(), &int(0), &RejectAll).unwrap();
        assert_eq!(
            aum.timeline,
            TransitionTimeline {
                protocol: Protocol::Aum,
                ..sum.timeline.clone()
            }
        );
        let order: Vec<usize> = sum.timeline.enablements.iter().map(|e| e.task).collect();
        assert_eq!(order, vec![1, 0, 2]);
    }

    #[test]
    fn aum_scan_order_and_capacity() {
        // The short rem-job leaves at 1/2, the long one runs until 17/4.
        let rem = synchronous_jobs(&[int(1), int(8)], &[0, 1]);
        let p = platform(&[1, 2]);
        let heavy = TaskSpec::new(q(3, 5), int(1), int(1)).unwrap();
        let light = TaskSpec::new(q(1, 5), int(1), int(1)).unwrap();
        let new_mode = ModeSpec::new(vec![heavy.clone(), light, heavy], SchedulerKind::Edf).unwrap();
        let d = vec![int(3), int(2), int(5)];
        let run = aum_mso(&new_mode, &d, &p, &rem, &int(0), &DensityTest).unwrap();
        let tl = &run.timeline;
        // at 1/2 on [1]: light (d=2) then heavy #0 (0.8 <= 1); heavy #2 waits
        assert_eq!(
            tl.enablements[0],
            Enablement {
                task: 1,
                instant: q(1, 2)
            }
        );
        assert_eq!(
            tl.enablements[1],
            Enablement {
                task: 0,
                instant: q(1, 2)
            }
        );
        assert_eq!(tl.enablement_of(2), Some(&tl.mode_entry));
        assert!(tl.violations.is_empty(), "{:?}", tl.violations);
        assert!(respects_priority_layering(&run));
    }

    #[test]
    fn rem_jobs_with_deadlines_from_mode() {
        let tasks = vec![
            TaskSpec::new(int(2), int(6), int(6)).unwrap(),
            TaskSpec::new(int(1), int(3), int(4)).unwrap(),
        ];
        let edf = ModeSpec::new(tasks.clone(), SchedulerKind::Edf).unwrap();
        let rem = worst_case_rem_jobs(&edf, &int(5));
        assert_eq!(rem[0].priority, 1);
        assert_eq!(rem[1].priority, 0);
        assert_eq!(rem[0].deadline, Some(int(11)));
        assert_eq!(rem[1].arrival, int(5));
        let ftp = ModeSpec::new(tasks, SchedulerKind::Ftp { order: vec![0, 1] }).unwrap();
        let rem = worst_case_rem_jobs(&ftp, &int(0));
        assert_eq!((rem[0].priority, rem[1].priority), (0, 1));
    }

    #[test]
    fn errors() {
        let new_mode = light_mode(2);
        assert_eq!(
            sum_mso(&new_mode, &[int(1)], &platform(&[1]), &[], &int(0)).unwrap_err(),
            ProtocolError::DeadlineCount { expected: 2, got: 1 }
        );
        let late = vec![JobInstance {
            id: 0,
            arrival: int(4),
            requirement: int(1),
            deadline: None,
            priority: 0,
        }];
        assert_eq!(
            sum_mso(&new_mode, &[int(1), int(1)], &platform(&[1]), &late, &int(0)).unwrap_err(),
            ProtocolError::LateRemJob(0)
        );
        assert_eq!("AUM".parse::<Protocol>(), Ok(Protocol::Aum));
        assert!("xyz".parse::<Protocol>().is_err());
    }
}
