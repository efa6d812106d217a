//! Exact event-driven simulation of work-conserving fixed-job-priority
//! scheduling on a uniform multiprocessor.
//!
//! At every event instant the active jobs are sorted by priority and the
//! `min(r, m)` highest-priority ones are mapped onto the `min(r, m)` fastest
//! processors, highest priority on the fastest. Assignments are constant
//! between events. Completions are processed before arrivals at equal
//! instants, and the reassignment follows both.

use std::collections::HashSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::model::Platform;
use crate::rational::Rational;

pub type JobId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("jobs {first} and {second} share priority {priority}")]
    DuplicatePriority { first: JobId, second: JobId, priority: i64 },
    #[error("job id {0} appears more than once")]
    DuplicateId(JobId),
    #[error("job {0} has a nonpositive requirement")]
    NonpositiveRequirement(JobId),
    #[error("job {0} has a deadline not after its arrival")]
    DeadlineNotAfterArrival(JobId),
    #[error("trace is incomplete: job {0} did not finish")]
    Incomplete(JobId),
}

/// A released job. Smaller `priority` values are higher priorities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobInstance {
    pub id: JobId,
    pub arrival: Rational,
    pub requirement: Rational,
    pub deadline: Option<Rational>,
    pub priority: i64,
}

impl JobInstance {
    /// A deadline-free job released at time zero.
    pub fn synchronous(id: JobId, requirement: Rational, priority: i64) -> Self {
        JobInstance {
            id,
            arrival: Rational::zero(),
            requirement,
            deadline: None,
            priority,
        }
    }
}

/// Builds the synchronous job set `J_0..J_{n-1}` where `order[0]` is the
/// highest-priority job index.
pub fn synchronous_jobs(requirements: &[Rational], order: &[usize]) -> Vec<JobInstance> {
    let mut priority = vec![0i64; requirements.len()];
    for (rank, &job) in order.iter().enumerate() {
        priority[job] = rank as i64;
    }
    requirements
        .iter()
        .enumerate()
        .map(|(i, c)| JobInstance::synchronous(i, c.clone(), priority[i]))
        .collect()
}

/// Job `job` runs on `processor` during `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub start: Rational,
    pub end: Rational,
    pub processor: usize,
    pub job: JobId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JobOutcome {
    pub id: JobId,
    pub arrival: Rational,
    pub deadline: Option<Rational>,
    /// First instant the job executes.
    pub start: Option<Rational>,
    pub finish: Option<Rational>,
    pub missed: bool,
}

/// Piecewise-constant job-to-processor assignment produced by [`simulate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleTrace {
    pub m: usize,
    /// Earliest arrival, or zero for an empty job set.
    pub origin: Rational,
    pub segments: Vec<Segment>,
    /// One entry per input job, in input order.
    pub jobs: Vec<JobOutcome>,
    /// Distinct arrival and completion instants, increasing.
    pub events: Vec<Rational>,
    /// `step_1..step_m`.
    pub step_instants: Vec<Rational>,
    /// Set when the run was cut short before every job completed.
    pub horizon: Option<Rational>,
}

impl ScheduleTrace {
    pub fn job(&self, id: JobId) -> Option<&JobOutcome> {
        self.jobs.iter().find(|j| j.id == id)
    }

    pub fn is_complete(&self) -> bool {
        self.jobs.iter().all(|j| j.finish.is_some())
    }

    pub fn deadline_misses(&self) -> impl Iterator<Item = &JobOutcome> {
        self.jobs.iter().filter(|j| j.missed)
    }
}

fn check_jobs(jobs: &[JobInstance]) -> Result<(), SimError> {
    let mut ids = HashSet::new();
    for j in jobs {
        if !ids.insert(j.id) {
            return Err(SimError::DuplicateId(j.id));
        }
        if !j.requirement.is_positive() {
            return Err(SimError::NonpositiveRequirement(j.id));
        }
        if let Some(d) = &j.deadline {
            if d <= &j.arrival {
                return Err(SimError::DeadlineNotAfterArrival(j.id));
            }
        }
    }
    let mut by_priority: Vec<&JobInstance> = jobs.iter().collect();
    by_priority.sort_by_key(|j| j.priority);
    for w in by_priority.windows(2) {
        if w[0].priority == w[1].priority {
            return Err(SimError::DuplicatePriority {
                first: w[0].id,
                second: w[1].id,
                priority: w[0].priority,
            });
        }
    }
    Ok(())
}

/// Simulate `jobs` on `platform` until every job completes.
pub fn simulate(jobs: &[JobInstance], platform: &Platform) -> Result<ScheduleTrace, SimError> {
    simulate_until(jobs, platform, None)
}

/// Simulate until every job completes or `horizon` is reached.
pub fn simulate_until(
    jobs: &[JobInstance],
    platform: &Platform,
    horizon: Option<&Rational>,
) -> Result<ScheduleTrace, SimError> {
    check_jobs(jobs)?;
    let m = platform.m();
    let n = jobs.len();

    let mut arrivals: Vec<usize> = (0..n).collect();
    arrivals.sort_by(|&a, &b| {
        jobs[a]
            .arrival
            .cmp(&jobs[b].arrival)
            .then(jobs[a].priority.cmp(&jobs[b].priority))
    });
    let origin = arrivals
        .first()
        .map(|&i| jobs[i].arrival.clone())
        .unwrap_or_else(Rational::zero);

    let mut remaining: Vec<Rational> = jobs.iter().map(|j| j.requirement.clone()).collect();
    let mut start: Vec<Option<Rational>> = vec![None; n];
    let mut finish: Vec<Option<Rational>> = vec![None; n];
    // active job indices, highest priority first
    let mut active: Vec<usize> = Vec::with_capacity(n);
    let mut segments: Vec<Segment> = Vec::new();
    let mut last_segment: Vec<Option<usize>> = vec![None; m];
    let mut events: Vec<Rational> = Vec::new();

    let mut next_arrival = 0usize;
    let mut t = origin.clone();
    if n > 0 {
        events.push(t.clone());
    }
    loop {
        while next_arrival < n && jobs[arrivals[next_arrival]].arrival <= t {
            let idx = arrivals[next_arrival];
            let pos = active
                .binary_search_by_key(&jobs[idx].priority, |&a| jobs[a].priority)
                .unwrap_err();
            active.insert(pos, idx);
            next_arrival += 1;
        }
        if active.is_empty() {
            if next_arrival == n {
                break;
            }
            t = jobs[arrivals[next_arrival]].arrival.clone();
            if horizon.is_some_and(|h| &t >= h) {
                break;
            }
            events.push(t.clone());
            continue;
        }
        if horizon.is_some_and(|h| &t >= h) {
            break;
        }

        let running = active.len().min(m);
        let mut t_next: Option<Rational> = None;
        for (rank, &idx) in active[..running].iter().enumerate() {
            let speed = platform.speed(m - 1 - rank);
            let done_at = &t + &remaining[idx] / speed;
            if t_next.as_ref().is_none_or(|x| &done_at < x) {
                t_next = Some(done_at);
            }
            if start[idx].is_none() {
                start[idx] = Some(t.clone());
            }
        }
        let mut t_next = t_next.expect("at least one running job");
        if next_arrival < n && jobs[arrivals[next_arrival]].arrival < t_next {
            t_next = jobs[arrivals[next_arrival]].arrival.clone();
        }
        if let Some(h) = horizon {
            if h < &t_next {
                t_next = h.clone();
            }
        }
        let dt = &t_next - &t;

        for (rank, &idx) in active[..running].iter().enumerate() {
            let proc = m - 1 - rank;
            let speed = platform.speed(proc);
            remaining[idx] -= speed * &dt;
            let extended = match last_segment[proc] {
                Some(s) if segments[s].job == jobs[idx].id && segments[s].end == t => {
                    segments[s].end = t_next.clone();
                    true
                }
                _ => false,
            };
            if !extended {
                last_segment[proc] = Some(segments.len());
                segments.push(Segment {
                    start: t.clone(),
                    end: t_next.clone(),
                    processor: proc,
                    job: jobs[idx].id,
                });
            }
        }
        active.retain(|&idx| {
            if remaining[idx].is_zero() {
                finish[idx] = Some(t_next.clone());
                false
            } else {
                true
            }
        });
        events.push(t_next.clone());
        t = t_next;
    }

    let outcomes: Vec<JobOutcome> = jobs
        .iter()
        .enumerate()
        .map(|(i, j)| {
            let missed = match (&j.deadline, &finish[i]) {
                (Some(d), Some(f)) => f > d,
                (Some(d), None) => horizon.is_some_and(|h| h >= d),
                (None, _) => false,
            };
            JobOutcome {
                id: j.id,
                arrival: j.arrival.clone(),
                deadline: j.deadline.clone(),
                start: start[i].clone(),
                finish: finish[i].clone(),
                missed,
            }
        })
        .collect();
    events.dedup();
    let step_instants = compute_step_instants(&segments, m, &origin);
    let complete = outcomes.iter().all(|o| o.finish.is_some());
    let trace = ScheduleTrace {
        m,
        origin,
        segments,
        jobs: outcomes,
        events,
        step_instants,
        horizon: if complete { None } else { horizon.cloned() },
    };
    if cfg!(debug_assertions) {
        if let Err(e) = audit(&trace, jobs, platform) {
            panic!("schedule audit failed: {e}");
        }
    }
    Ok(trace)
}

/// `step_j` for `j = 1..m`: the earliest instant from which at least `j`
/// processors stay idle for the rest of the trace.
fn compute_step_instants(segments: &[Segment], m: usize, origin: &Rational) -> Vec<Rational> {
    let mut deltas: Vec<(&Rational, i32)> = Vec::with_capacity(segments.len() * 2);
    for s in segments {
        deltas.push((&s.start, 1));
        deltas.push((&s.end, -1));
    }
    deltas.sort();
    // busy count after each distinct instant, walked backwards
    let mut points: Vec<(&Rational, usize)> = Vec::new();
    let mut busy: i64 = 0;
    let mut i = 0;
    while i < deltas.len() {
        let at = deltas[i].0;
        while i < deltas.len() && deltas[i].0 == at {
            busy += deltas[i].1 as i64;
            i += 1;
        }
        points.push((at, busy as usize));
    }
    (1..=m)
        .map(|j| {
            let limit = m - j;
            // last instant after which busy stays <= limit
            let mut step = origin.clone();
            for k in (0..points.len()).rev() {
                if points[k].1 > limit {
                    step = points[k + 1].0.clone();
                    break;
                }
            }
            step
        })
        .collect()
}

pub fn step_instants(trace: &ScheduleTrace) -> &[Rational] {
    &trace.step_instants
}

/// Latest completion time; zero for an empty trace.
pub fn makespan(trace: &ScheduleTrace) -> Result<Rational, SimError> {
    let mut best = Rational::zero();
    for j in &trace.jobs {
        match &j.finish {
            Some(f) if f > &best => best = f.clone(),
            Some(_) => {}
            None => return Err(SimError::Incomplete(j.id)),
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{0}")]
pub struct AuditError(pub String);

/// Check a trace against the scheduling rules it claims to follow: no
/// overlap, no parallelism, exact work accounting, a nondecreasing
/// staircase, and at every instant the `min(r, m)` highest-priority active
/// jobs running on the fastest processors in priority order.
pub fn audit(trace: &ScheduleTrace, jobs: &[JobInstance], platform: &Platform) -> Result<(), AuditError> {
    let fail = |msg: String| Err(AuditError(msg));
    let m = platform.m();
    if trace.m != m {
        return fail(format!("trace has {} processors, platform {m}", trace.m));
    }
    for w in trace.step_instants.windows(2) {
        if w[1] < w[0] {
            return fail(format!("staircase broken: {} after {}", w[1], w[0]));
        }
    }

    let index_of = |id: JobId| jobs.iter().position(|j| j.id == id);
    let mut work = vec![Rational::zero(); jobs.len()];
    for s in &trace.segments {
        if s.end <= s.start {
            return fail(format!("empty segment for job {}", s.job));
        }
        if s.processor >= m {
            return fail(format!("processor {} out of range", s.processor));
        }
        let Some(i) = index_of(s.job) else {
            return fail(format!("unknown job {}", s.job));
        };
        work[i] += (&s.end - &s.start) * platform.speed(s.processor);
    }
    for (i, j) in jobs.iter().enumerate() {
        let outcome = &trace.jobs[i];
        match &outcome.finish {
            Some(_) if work[i] != j.requirement => {
                return fail(format!("job {} executed {} of {}", j.id, work[i], j.requirement));
            }
            None if work[i] >= j.requirement => {
                return fail(format!("job {} has all its work but no finish", j.id));
            }
            _ => {}
        }
    }

    // elementary intervals between all boundaries
    let mut cuts: Vec<&Rational> = Vec::new();
    for s in &trace.segments {
        cuts.push(&s.start);
        cuts.push(&s.end);
    }
    for (j, o) in jobs.iter().zip(&trace.jobs) {
        cuts.push(&j.arrival);
        if let Some(f) = &o.finish {
            cuts.push(f);
        }
    }
    cuts.sort();
    cuts.dedup();
    if cuts.len() < 2 {
        return Ok(());
    }
    let intervals = cuts.len() - 1;
    let mut assignment: Vec<Vec<Option<JobId>>> = vec![vec![None; m]; intervals];
    for s in &trace.segments {
        let lo = cuts.binary_search(&&s.start).expect("cut present");
        let hi = cuts.binary_search(&&s.end).expect("cut present");
        for slot in &mut assignment[lo..hi] {
            if let Some(other) = slot[s.processor] {
                return fail(format!(
                    "processor {} runs jobs {other} and {} at once",
                    s.processor, s.job
                ));
            }
            slot[s.processor] = Some(s.job);
        }
    }
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&i| jobs[i].priority);
    for (k, slot) in assignment.iter().enumerate() {
        let at = cuts[k];
        if trace.horizon.as_ref().is_some_and(|h| at >= h) {
            break;
        }
        let active: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| &jobs[i].arrival <= at && trace.jobs[i].finish.as_ref().is_none_or(|f| f > at))
            .collect();
        let expected = active.len().min(m);
        for rank in 0..m {
            let proc = m - 1 - rank;
            let want = (rank < expected).then(|| jobs[active[rank]].id);
            if slot[proc] != want {
                return fail(format!(
                    "at {at}: processor {proc} runs {:?}, expected {:?}",
                    slot[proc], want
                ));
            }
        }
    }
    Ok(())
}

/// Trace as CSV lines `t1,t2,processor,job_id`.
pub fn trace_csv(trace: &ScheduleTrace) -> String {
    let mut out = String::from("t1,t2,processor,job_id\n");
    for s in &trace.segments {
        let _ = writeln!(out, "{},{},{},{}", s.start, s.end, s.processor, s.job);
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceSummary<'a> {
    pub jobs: &'a [JobOutcome],
    pub step_instants: &'a [Rational],
    pub makespan: Option<Rational>,
}

pub fn trace_summary(trace: &ScheduleTrace) -> TraceSummary<'_> {
    TraceSummary {
        jobs: &trace.jobs,
        step_instants: &trace.step_instants,
        makespan: makespan(trace).ok(),
    }
}
