//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use unimode::bounds::upms;
use unimode::protocols::cpu_default;
use unimode::sim::JobInstance;
use unimode::{ModeSpec, Platform, Rational, SchedulerKind, SystemSpec, TaskSpec};

pub fn int(n: i64) -> Rational {
    Rational::from_integer(n)
}

pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

/// A positive rational `a / b` with `a` in `1..=num`, `b` in `1..=den`.
pub fn rational(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    Rational::new(rng.gen_range(1..=num), rng.gen_range(1..=den))
}

pub fn requirements(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| rational(rng, 40, 4)).collect()
}

pub fn platform(rng: &mut impl Rng, m: usize) -> Platform {
    Platform::new((0..m).map(|_| rational(rng, 12, 3)).collect()).unwrap()
}

pub fn permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Jobs with staggered arrivals, no deadlines, random distinct priorities.
pub fn sporadic_jobs(rng: &mut impl Rng, n: usize) -> Vec<JobInstance> {
    let prio = permutation(rng, n);
    (0..n)
        .map(|i| JobInstance {
            id: i,
            arrival: if rng.gen_bool(0.3) {
                Rational::zero()
            } else {
                rational(rng, 20, 2)
            },
            requirement: rational(rng, 30, 4),
            deadline: None,
            priority: prio[i] as i64,
        })
        .collect()
}

/// A mode that `cpu_default` accepts on the whole platform. FTP modes get at
/// most one task per processor.
pub fn mode(rng: &mut impl Rng, platform: &Platform) -> ModeSpec {
    let ftp = rng.gen_bool(0.4);
    let n = if ftp {
        rng.gen_range(1..=platform.m())
    } else {
        rng.gen_range(1..=5)
    };
    let scheduler = match (ftp, rng.gen_range(0..2)) {
        (true, _) => SchedulerKind::Ftp {
            order: permutation(rng, n),
        },
        (false, 0) => SchedulerKind::Edf,
        (false, _) => SchedulerKind::FjpUnknown,
    };
    let mut tasks: Vec<TaskSpec> = (0..n)
        .map(|_| {
            let period = int(rng.gen_range(4..=30));
            let deadline = &period * Rational::new(rng.gen_range(5..=10), 10);
            let wcet = &deadline * Rational::new(rng.gen_range(1..=10), 10);
            TaskSpec::new(wcet, deadline, period).unwrap()
        })
        .collect();
    loop {
        let candidate = ModeSpec::new(tasks.clone(), scheduler.clone()).unwrap();
        let ordered = match &scheduler {
            SchedulerKind::Ftp { order } => order.iter().map(|&i| tasks[i].clone()).collect(),
            _ => tasks.clone(),
        };
        if cpu_default(platform.speeds(), &scheduler, &ordered) {
            return candidate;
        }
        for t in &mut tasks {
            t.wcet = &t.wcet * Rational::new(2, 3);
        }
    }
}

/// Two schedulable modes on a random platform, with enablement deadlines
/// drawn around the old mode's `upms`.
pub fn two_mode_system(rng: &mut impl Rng) -> (SystemSpec, Platform) {
    let m = rng.gen_range(1..=4);
    let p = platform(rng, m);
    let modes = vec![mode(rng, &p), mode(rng, &p)];
    let mut deadlines = BTreeMap::new();
    for (from, to) in [(0usize, 1usize), (1, 0)] {
        let scale = upms(&modes[from], &p);
        let d = (0..modes[to].len())
            .map(|_| {
                let f = Rational::new(rng.gen_range(3..=25), 10);
                let d = &scale * f;
                if d.is_positive() {
                    d
                } else {
                    Rational::one()
                }
            })
            .collect();
        deadlines.insert((from, to), d);
    }
    (SystemSpec::new(modes, deadlines).unwrap(), p)
}
