//! Exhaustive ground truth: simulate a synchronous job set under every
//! priority order and keep the worst makespan and step instants.

use serde::Serialize;
use thiserror::Error;

use crate::model::Platform;
use crate::rational::Rational;
use crate::sim::{simulate, synchronous_jobs, ScheduleTrace};

/// 10!, enough for the ten-job experiment.
pub const DEFAULT_PERMUTATION_CAP: u64 = 3_628_800;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{n} jobs need {n}! permutations, above the cap of {limit}")]
    LimitExceeded { n: usize, limit: u64 },
    #[error("requirement #{0} is not positive")]
    NonpositiveRequirement(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witnessed {
    pub value: Rational,
    /// Job indices from highest to lowest priority.
    pub witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub max_makespan: Rational,
    pub witness: Vec<usize>,
    pub per_j_max_steps: Vec<Witnessed>,
    pub permutations: u64,
}

/// `n!`, or `None` on overflow.
pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// Rearranges `perm` into the next lexicographic permutation; false after
/// the last one.
fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let Some(i) = (0..perm.len() - 1).rev().find(|&i| perm[i] < perm[i + 1]) else {
        return false;
    };
    let j = (i + 1..perm.len())
        .rev()
        .find(|&j| perm[j] > perm[i])
        .expect("successor exists");
    perm.swap(i, j);
    perm[i + 1..].reverse();
    true
}

/// Simulate every priority order of `reqs` released at time zero, in
/// lexicographic order of the priority list, and hand each trace to `visit`.
pub fn for_each_order<F>(reqs: &[Rational], platform: &Platform, limit: u64, mut visit: F) -> Result<u64, OracleError>
where
    F: FnMut(&[usize], &ScheduleTrace),
{
    let n = reqs.len();
    if let Some(i) = reqs.iter().position(|c| !c.is_positive()) {
        return Err(OracleError::NonpositiveRequirement(i));
    }
    match factorial(n) {
        Some(count) if count <= limit => {}
        _ => return Err(OracleError::LimitExceeded { n, limit }),
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut visited = 0u64;
    loop {
        let trace =
            simulate(&synchronous_jobs(reqs, &order), platform).expect("synchronous jobs with distinct priorities");
        visit(&order, &trace);
        visited += 1;
        if !next_permutation(&mut order) {
            break;
        }
    }
    Ok(visited)
}

/// Maximum makespan and per-`j` maximum step instants over all `n!` orders.
/// The first (lexicographically smallest) witness of each maximum is kept.
pub fn exact_max(reqs: &[Rational], platform: &Platform, limit: u64) -> Result<OracleResult, OracleError> {
    let m = platform.m();
    let mut best: Vec<Option<Witnessed>> = vec![None; m];
    let permutations = for_each_order(reqs, platform, limit, |order, trace| {
        for (slot, step) in best.iter_mut().zip(&trace.step_instants) {
            if slot.as_ref().is_none_or(|b| step > &b.value) {
                *slot = Some(Witnessed {
                    value: step.clone(),
                    witness: order.to_vec(),
                });
            }
        }
    })?;
    let per_j_max_steps: Vec<Witnessed> = best.into_iter().map(|b| b.expect("at least one order")).collect();
    let last = per_j_max_steps.last().expect("platform is nonempty").clone();
    Ok(OracleResult {
        max_makespan: last.value,
        witness: last.witness,
        per_j_max_steps,
        permutations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::sim::makespan;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_integer(x)).collect()
    }

    fn platform(v: &[i64]) -> Platform {
        Platform::new(ints(v)).unwrap()
    }

    #[test]
    fn lexicographic_enumeration() {
        let mut p = vec![0, 1, 2];
        let mut seen = vec![p.clone()];
        while next_permutation(&mut p) {
            seen.push(p.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
        assert_eq!(factorial(10), Some(DEFAULT_PERMUTATION_CAP));
        assert_eq!(factorial(0), Some(1));
        assert_eq!(factorial(30), None);
    }

    #[test]
    fn shortest_first_is_not_worst() {
        let c = ints(&[2, 3, 5, 7]);
        let p = platform(&[1, 1]);
        let r = exact_max(&c, &p, DEFAULT_PERMUTATION_CAP).unwrap();
        assert_eq!(r.max_makespan, Rational::from_integer(12));
        assert_eq!(r.permutations, 24);
        // J1 > J3 > J2 > J4 reaches 12 before J3 > J1 > J2 > J4 in enumeration order
        assert_eq!(r.witness, vec![0, 2, 1, 3]);
        for w in &r.per_j_max_steps {
            let tr = simulate(&synchronous_jobs(&c, &w.witness), &p).unwrap();
            assert!(tr.step_instants.contains(&w.value));
        }
        let other_order = simulate(&synchronous_jobs(&c, &[2, 0, 1, 3]), &p).unwrap();
        assert_eq!(makespan(&other_order).unwrap(), r.max_makespan);
    }

    #[test]
    fn single_job() {
        let r = exact_max(&[q(7, 2)], &platform(&[1, 7]), 1).unwrap();
        assert_eq!(r.max_makespan, q(1, 2));
        assert_eq!(r.witness, vec![0]);
    }

    #[test]
    fn empty_job_set() {
        let r = exact_max(&[], &platform(&[1, 2]), 1).unwrap();
        assert_eq!(r.max_makespan, Rational::zero());
        assert_eq!(r.permutations, 1);
    }

    #[test]
    fn cap_and_input_errors() {
        let c = ints(&[1, 2, 3, 4]);
        assert_eq!(
            exact_max(&c, &platform(&[1]), 23),
            Err(OracleError::LimitExceeded { n: 4, limit: 23 })
        );
        assert_eq!(
            exact_max(&ints(&[1, -1]), &platform(&[1]), 10),
            Err(OracleError::NonpositiveRequirement(1))
        );
        let many = vec![Rational::one(); 25];
        assert!(matches!(
            exact_max(&many, &platform(&[1]), u64::MAX),
            Err(OracleError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn equal_requirements_are_symmetric() {
        let p = platform(&[1, 3]);
        let a = exact_max(&ints(&[4, 4, 9]), &p, 100).unwrap();
        let b = exact_max(&ints(&[4, 9, 4]), &p, 100).unwrap();
        let c = exact_max(&ints(&[9, 4, 4]), &p, 100).unwrap();
        assert_eq!(a.max_makespan, b.max_makespan);
        assert_eq!(a.max_makespan, c.max_makespan);
    }
}
