//! Offline validity tests for both protocols, run over every ordered pair
//! of distinct modes.

use serde::Serialize;

use crate::bounds::{mode_step_bounds, upms};
use crate::model::{Platform, SchedulerKind, SystemSpec, TaskSpec};
use crate::protocols::{ordered_subset, scan_order, CpuTest, Protocol};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairVerdict {
    pub from: usize,
    pub to: usize,
    pub valid: bool,
    /// `upms` of the old mode for SUM-MSO. For AUM-MSO, the `ŝtep_k` of the
    /// failing gate, or of the gate that enabled the last task.
    pub binding: Rational,
    /// 1-based gate index (AUM-MSO only).
    pub gate: Option<usize>,
    pub violated_task: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidityReport {
    pub protocol: Protocol,
    pub pairs: Vec<PairVerdict>,
}

impl ValidityReport {
    pub fn valid(&self) -> bool {
        self.pairs.iter().all(|p| p.valid)
    }

    pub fn first_failure(&self) -> Option<&PairVerdict> {
        self.pairs.iter().find(|p| !p.valid)
    }
}

impl std::fmt::Display for ValidityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self.protocol {
            Protocol::Sum => "SUM-MSO",
            Protocol::Aum => "AUM-MSO",
        };
        writeln!(f, "{name}: {}", if self.valid() { "valid" } else { "INVALID" })?;
        for p in &self.pairs {
            write!(
                f,
                "  {} -> {}: {:<7} binding {} (~{})",
                p.from,
                p.to,
                if p.valid { "ok" } else { "FAIL" },
                p.binding,
                p.binding.to_decimal(6)
            )?;
            if let Some(k) = p.gate {
                write!(f, " at gate {k}")?;
            }
            if let Some(t) = p.violated_task {
                write!(f, ", task {t} misses its enablement deadline")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// SUM-MSO check for one pair: the old mode's `upms` must not exceed any
/// enablement deadline. Returns the first task that fails.
pub fn check_sum_pair(upms: &Rational, deadlines: &[Rational]) -> Option<usize> {
    deadlines.iter().position(|d| d < upms)
}

pub struct AumPair<'a> {
    /// `ŝtep_1..ŝtep_m` of the old mode.
    pub steps: &'a [Rational],
    pub platform: &'a Platform,
    pub scheduler: &'a SchedulerKind,
    pub tasks: &'a [TaskSpec],
    pub deadlines: &'a [Rational],
}

/// Outcome of the AUM-MSO check for one pair: `Err((gate, task))` on the
/// first failure, else the gate (1-based) that enabled the last task, if
/// any task was enabled at all.
pub fn check_aum_pair(pair: &AumPair<'_>, cpu: &dyn CpuTest) -> Result<Option<usize>, (usize, usize)> {
    let mut disabled = scan_order(pair.deadlines);
    let mut enabled: Vec<usize> = Vec::new();
    let mut last_gate = None;
    for (k, step) in pair.steps.iter().enumerate() {
        let available = pair.platform.slowest(k + 1);
        let mut kept = Vec::with_capacity(disabled.len());
        for task in disabled {
            if &pair.deadlines[task] < step {
                return Err((k + 1, task));
            }
            let mut candidate = enabled.clone();
            candidate.push(task);
            if cpu.accepts(
                available,
                pair.scheduler,
                &ordered_subset(pair.scheduler, pair.tasks, &candidate),
            ) {
                enabled.push(task);
                last_gate = Some(k + 1);
            } else {
                kept.push(task);
            }
        }
        disabled = kept;
    }
    Ok(last_gate)
}

pub fn validate_sum_mso(system: &SystemSpec, platform: &Platform) -> ValidityReport {
    let pairs = system
        .transitions()
        .map(|(from, to)| {
            let binding = upms(system.mode(from), platform);
            let violated_task = check_sum_pair(&binding, system.enablement_deadlines(from, to));
            PairVerdict {
                from,
                to,
                valid: violated_task.is_none(),
                binding,
                gate: None,
                violated_task,
            }
        })
        .collect();
    ValidityReport {
        protocol: Protocol::Sum,
        pairs,
    }
}

pub fn validate_aum_mso(system: &SystemSpec, platform: &Platform, cpu: &dyn CpuTest) -> ValidityReport {
    let pairs = system
        .transitions()
        .map(|(from, to)| {
            let steps = mode_step_bounds(system.mode(from), platform).values;
            let new_mode = system.mode(to);
            let pair = AumPair {
                steps: &steps,
                platform,
                scheduler: &new_mode.scheduler,
                tasks: &new_mode.tasks,
                deadlines: system.enablement_deadlines(from, to),
            };
            let (valid, gate, violated_task) = match check_aum_pair(&pair, cpu) {
                Ok(gate) => (true, gate, None),
                Err((gate, task)) => (false, Some(gate), Some(task)),
            };
            let k = gate.unwrap_or(steps.len());
            PairVerdict {
                from,
                to,
                valid,
                binding: steps[k - 1].clone(),
                gate,
                violated_task,
            }
        })
        .collect();
    ValidityReport {
        protocol: Protocol::Aum,
        pairs,
    }
}
