mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unimode::bounds::upms;
use unimode::oracle::{exact_max, for_each_order};
use unimode::protocols::{
    aum_mso, cpu_default, respects_priority_layering, simulate_transition, sum_mso, worst_case_rem_jobs, DensityTest,
    Protocol, RejectAll, TransitionTimeline,
};
use unimode::sim::{makespan, synchronous_jobs, JobInstance};
use unimode::validity::{validate_aum_mso, validate_sum_mso};
use unimode::{simulate, Platform, Rational, SchedulerKind, SystemSpec, TaskSpec};

use common::*;

fn rat() -> impl Strategy<Value = Rational> {
    (1i64..=15, 1i64..=4).prop_map(|(n, d)| Rational::new(n, d))
}

fn speeds(max: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rat(), 1..=max)
}

fn jobs(max: usize) -> impl Strategy<Value = Vec<JobInstance>> {
    prop::collection::vec((0i64..=10, rat(), any::<u32>()), 0..=max).prop_map(|raw| {
        let mut keyed: Vec<(u32, usize)> = raw.iter().enumerate().map(|(i, r)| (r.2, i)).collect();
        keyed.sort();
        let mut prio = vec![0; raw.len()];
        for (rank, (_, i)) in keyed.into_iter().enumerate() {
            prio[i] = rank as i64;
        }
        raw.into_iter()
            .enumerate()
            .map(|(i, (a, c, _))| JobInstance {
                id: i,
                arrival: Rational::new(a, 2),
                requirement: c,
                deadline: None,
                priority: prio[i],
            })
            .collect()
    })
}

fn task() -> impl Strategy<Value = TaskSpec> {
    (1i64..=20, 5i64..=10, 1i64..=10).prop_map(|(t, dfrac, cfrac)| {
        let period = Rational::from_integer(t);
        let deadline = &period * Rational::new(dfrac, 10);
        let wcet = &deadline * Rational::new(cfrac, 10);
        TaskSpec::new(wcet, deadline, period).unwrap()
    })
}

fn transition(tl: &TransitionTimeline) -> TransitionTimeline {
    TransitionTimeline {
        protocol: Protocol::Sum,
        ..tl.clone()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn conservation_and_staircase(js in jobs(8), sp in speeds(5)) {
        let p = Platform::new(sp).unwrap();
        let trace = simulate(&js, &p).unwrap();
        let executed: Rational = trace
            .segments
            .iter()
            .map(|s| (&s.end - &s.start) * p.speed(s.processor))
            .sum();
        let demanded: Rational = js.iter().map(|j| j.requirement.clone()).sum();
        prop_assert_eq!(executed, demanded);
        for w in trace.step_instants.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn predictability(js in jobs(7), sp in speeds(4), cut in prop::collection::vec(1i64..=10, 7)) {
        let p = Platform::new(sp).unwrap();
        let reduced: Vec<JobInstance> = js
            .iter()
            .zip(&cut)
            .map(|(j, &k)| JobInstance { requirement: &j.requirement * Rational::new(k, 10), ..j.clone() })
            .collect();
        let a = simulate(&js, &p).unwrap();
        let b = simulate(&reduced, &p).unwrap();
        for (x, y) in a.jobs.iter().zip(&b.jobs) {
            prop_assert!(y.start <= x.start);
            prop_assert!(y.finish <= x.finish);
        }
    }

    #[test]
    fn extra_fast_processor_never_delays(reqs in prop::collection::vec(rat(), 1..8), sp in speeds(4), boost in 10i64..=40) {
        let p = Platform::new(sp).unwrap();
        let wider = p.with_processor(p.fastest() * Rational::new(boost, 10)).unwrap();
        let order: Vec<usize> = (0..reqs.len()).rev().collect();
        let jobs = synchronous_jobs(&reqs, &order);
        let a = simulate(&jobs, &p).unwrap();
        let b = simulate(&jobs, &wider).unwrap();
        for (x, y) in a.jobs.iter().zip(&b.jobs) {
            prop_assert!(y.finish <= x.finish);
        }
    }

    #[test]
    fn oracle_dominates_every_order(reqs in prop::collection::vec(rat(), 1..6), sp in speeds(3)) {
        let p = Platform::new(sp).unwrap();
        let r = exact_max(&reqs, &p, 1000).unwrap();
        let replay = simulate(&synchronous_jobs(&reqs, &r.witness), &p).unwrap();
        prop_assert_eq!(makespan(&replay).unwrap(), r.max_makespan.clone());
        for (j, w) in r.per_j_max_steps.iter().enumerate() {
            let replay = simulate(&synchronous_jobs(&reqs, &w.witness), &p).unwrap();
            prop_assert_eq!(&replay.step_instants[j], &w.value);
        }
        for_each_order(&reqs, &p, 1000, |_, t| {
            assert!(makespan(t).unwrap() <= r.max_makespan);
        }).unwrap();
    }

    #[test]
    fn cpu_default_is_monotone_in_platform(
        tasks in prop::collection::vec(task(), 0..5),
        sp in speeds(4),
        boost in 10i64..=30,
        ftp in any::<bool>(),
    ) {
        let p = Platform::new(sp).unwrap();
        let sched = if ftp { SchedulerKind::Ftp { order: (0..tasks.len()).collect() } } else { SchedulerKind::Edf };
        let wider = p.with_processor(p.fastest() * Rational::new(boost, 10)).unwrap();
        if cpu_default(p.speeds(), &sched, &tasks) {
            prop_assert!(cpu_default(wider.speeds(), &sched, &tasks));
        }
        // every subset of an accepted set is accepted
        if cpu_default(p.speeds(), &sched, &tasks) && !tasks.is_empty() {
            prop_assert!(cpu_default(p.speeds(), &sched, &tasks[..tasks.len() - 1]));
        }
    }
}

fn systems(count: usize, seed: u64) -> Vec<(SystemSpec, Platform)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| two_mode_system(&mut rng)).collect()
}

#[test]
fn transitions_respect_priority_layering_and_timeline_invariants() {
    for (sys, p) in systems(300, 11) {
        for (from, to) in [(0, 1), (1, 0)] {
            for protocol in [Protocol::Sum, Protocol::Aum] {
                let run = simulate_transition(&sys, &p, from, to, protocol, &DensityTest).unwrap();
                assert!(respects_priority_layering(&run));
                let tl = &run.timeline;
                assert_eq!(tl.enablements.len(), sys.mode(to).len());
                assert!(tl.enablements.iter().all(|e| e.instant >= tl.mcr_time));
                let last_rem = tl.rem_job_finishes.iter().map(|r| r.finish.clone()).max().unwrap();
                let last_enable = tl.enablements.iter().map(|e| e.instant.clone()).max().unwrap();
                assert_eq!(tl.mode_entry, last_rem.max(last_enable));
                // within one instant, tasks are enabled by nondecreasing deadline
                let d = sys.enablement_deadlines(from, to);
                for w in tl.enablements.windows(2) {
                    if w[0].instant == w[1].instant {
                        assert!(d[w[0].task] <= d[w[1].task]);
                    }
                }
            }
        }
    }
}

#[test]
fn rem_jobs_of_schedulable_modes_meet_deadlines() {
    for (sys, p) in systems(300, 12) {
        for (from, to) in [(0, 1), (1, 0)] {
            let run = simulate_transition(&sys, &p, from, to, Protocol::Aum, &DensityTest).unwrap();
            for &id in &run.rem_ids {
                assert!(!run.trace.job(id).unwrap().missed, "rem-job {id} missed");
            }
        }
    }
}

#[test]
fn reject_all_degenerates_to_sum() {
    for (sys, p) in systems(200, 13) {
        let mcr = Rational::new(7, 3);
        let rem = worst_case_rem_jobs(sys.mode(0), &mcr);
        let d = sys.enablement_deadlines(0, 1);
        let s = sum_mso(sys.mode(1), d, &p, &rem, &mcr).unwrap();
        let a = aum_mso(sys.mode(1), d, &p, &rem, &mcr, &RejectAll).unwrap();
        assert_eq!(transition(&a.timeline), s.timeline);
    }
}

#[test]
fn validity_is_monotone_in_deadlines() {
    for (sys, p) in systems(300, 14) {
        let sum = validate_sum_mso(&sys, &p).valid();
        let aum = validate_aum_mso(&sys, &p, &DensityTest).valid();
        // SUM-MSO validity is the last gate of AUM-MSO
        if sum {
            assert!(aum);
        }
        let modes = sys.modes().to_vec();
        let mut d = std::collections::BTreeMap::new();
        for (from, to) in sys.transitions() {
            let widened = sys
                .enablement_deadlines(from, to)
                .iter()
                .map(|x| x * Rational::new(3, 2))
                .collect();
            d.insert((from, to), widened);
        }
        let wider = SystemSpec::new(modes, d).unwrap();
        assert!(!sum || validate_sum_mso(&wider, &p).valid());
        assert!(!aum || validate_aum_mso(&wider, &p, &DensityTest).valid());
    }
}

#[test]
fn sum_validity_is_upms_against_min_deadline() {
    for (sys, p) in systems(300, 15) {
        let report = validate_sum_mso(&sys, &p);
        for v in &report.pairs {
            let min = sys.enablement_deadlines(v.from, v.to).iter().min().unwrap();
            assert_eq!(v.valid, &upms(sys.mode(v.from), &p) <= min);
        }
    }
}

#[test]
fn identical_speeds_tie_break_is_stable() {
    let p = Platform::new(ints(&[1, 1, 1])).unwrap();
    let trace = simulate(&synchronous_jobs(&ints(&[3, 2, 1]), &[0, 1, 2]), &p).unwrap();
    // the highest-priority job sits on the last of the equal processors
    let first = trace.segments.iter().find(|s| s.job == 0).unwrap();
    assert_eq!(first.processor, 2);
}
