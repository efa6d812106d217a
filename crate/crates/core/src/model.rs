//! Static description of platforms, sporadic tasks, modes and multi-mode
//! systems, plus the JSON loader.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> ModelError {
    ModelError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Sum of a list of processor speeds.
pub fn total_speed_of(speeds: &[Rational]) -> Rational {
    speeds.iter().sum()
}

/// `max_j (s_1 + .. + s_{j-1}) / s_j` over speeds sorted nondecreasing.
/// Zero for an empty or single-processor list.
pub fn lambda_of(speeds: &[Rational]) -> Rational {
    let mut prefix = Rational::zero();
    let mut best = Rational::zero();
    for s in speeds {
        let ratio = &prefix / s;
        if ratio > best {
            best = ratio;
        }
        prefix += s;
    }
    best
}

/// A uniform multiprocessor. Speeds are kept nondecreasing: index 0 is the
/// slowest processor and index `m - 1` the fastest. Equal speeds keep their
/// input order, so a later input position counts as faster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Platform {
    speeds: Vec<Rational>,
}

impl Platform {
    pub fn new(speeds: Vec<Rational>) -> Result<Self, ModelError> {
        if speeds.is_empty() {
            return Err(invalid("platform", "at least one processor is required"));
        }
        if let Some(i) = speeds.iter().position(|s| !s.is_positive()) {
            return Err(invalid(format!("platform[{i}]"), "speed must be positive"));
        }
        let mut speeds = speeds;
        // stable: ties keep input order
        speeds.sort();
        Ok(Platform { speeds })
    }

    /// `m` processors of speed one.
    pub fn identical(m: usize) -> Self {
        Platform {
            speeds: vec![Rational::one(); m.max(1)],
        }
    }

    pub fn speeds(&self) -> &[Rational] {
        &self.speeds
    }

    pub fn m(&self) -> usize {
        self.speeds.len()
    }

    pub fn speed(&self, index: usize) -> &Rational {
        &self.speeds[index]
    }

    pub fn fastest(&self) -> &Rational {
        self.speeds.last().expect("platform is nonempty")
    }

    pub fn total_speed(&self) -> Rational {
        total_speed_of(&self.speeds)
    }

    pub fn lambda(&self) -> Rational {
        lambda_of(&self.speeds)
    }

    /// The `k` slowest processors (possibly empty).
    pub fn slowest(&self, k: usize) -> &[Rational] {
        &self.speeds[..k.min(self.m())]
    }

    /// The `k` fastest processors (possibly empty).
    pub fn fastest_k(&self, k: usize) -> &[Rational] {
        &self.speeds[self.m() - k.min(self.m())..]
    }

    /// The platform extended by one processor of the given speed.
    pub fn with_processor(&self, speed: Rational) -> Result<Self, ModelError> {
        let mut speeds = self.speeds.clone();
        speeds.push(speed);
        Platform::new(speeds)
    }
}

/// Sporadic constrained-deadline task `(C, D, T)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(rename = "C")]
    pub wcet: Rational,
    #[serde(rename = "D")]
    pub deadline: Rational,
    #[serde(rename = "T")]
    pub period: Rational,
}

impl TaskSpec {
    pub fn new(wcet: Rational, deadline: Rational, period: Rational) -> Result<Self, ModelError> {
        let task = TaskSpec { wcet, deadline, period };
        task.check("task")?;
        Ok(task)
    }

    fn check(&self, path: &str) -> Result<(), ModelError> {
        if !self.wcet.is_positive() {
            return Err(invalid(path, "C must be positive"));
        }
        if self.wcet > self.deadline {
            return Err(invalid(path, "C ≤ D violated"));
        }
        if self.deadline > self.period {
            return Err(invalid(path, "D ≤ T violated"));
        }
        Ok(())
    }

    /// `C / min(D, T)`, which is `C / D` under constrained deadlines.
    pub fn density(&self) -> Rational {
        &self.wcet / self.deadline.clone().min(self.period.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchedulerKind {
    /// Fixed task priority; `order[0]` is the highest-priority task index.
    Ftp { order: Vec<usize> },
    /// Fixed job priority, earliest deadline first.
    Edf,
    /// Fixed job priority with priorities unknown at design time.
    FjpUnknown,
}

impl SchedulerKind {
    pub fn is_ftp(&self) -> bool {
        matches!(self, SchedulerKind::Ftp { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeSpec {
    pub scheduler: SchedulerKind,
    pub tasks: Vec<TaskSpec>,
}

impl ModeSpec {
    pub fn new(tasks: Vec<TaskSpec>, scheduler: SchedulerKind) -> Result<Self, ModelError> {
        let mode = ModeSpec { scheduler, tasks };
        mode.check("mode")?;
        Ok(mode)
    }

    fn check(&self, path: &str) -> Result<(), ModelError> {
        if self.tasks.is_empty() {
            return Err(invalid(format!("{path}.tasks"), "a mode needs at least one task"));
        }
        for (i, t) in self.tasks.iter().enumerate() {
            t.check(&format!("{path}.tasks[{i}]"))?;
        }
        if let SchedulerKind::Ftp { order } = &self.scheduler {
            let mut seen = vec![false; self.tasks.len()];
            for &idx in order {
                if idx >= seen.len() || seen[idx] {
                    return Err(invalid(
                        format!("{path}.scheduler.order"),
                        "FTP order must be a permutation of the task indices",
                    ));
                }
                seen[idx] = true;
            }
            if order.len() != self.tasks.len() {
                return Err(invalid(
                    format!("{path}.scheduler.order"),
                    "FTP order must be a permutation of the task indices",
                ));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    pub fn wcets(&self) -> Vec<Rational> {
        self.tasks.iter().map(|t| t.wcet.clone()).collect()
    }
}

/// A multi-mode system: at least two modes and a relative enablement
/// deadline for every target task of every ordered mode pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemSpec {
    modes: Vec<ModeSpec>,
    enablement_deadlines: BTreeMap<(usize, usize), Vec<Rational>>,
}

impl SystemSpec {
    pub fn new(
        modes: Vec<ModeSpec>,
        enablement_deadlines: BTreeMap<(usize, usize), Vec<Rational>>,
    ) -> Result<Self, ModelError> {
        if modes.len() < 2 {
            return Err(invalid("modes", "a multi-mode system needs at least two modes"));
        }
        for (i, mode) in modes.iter().enumerate() {
            mode.check(&format!("modes[{i}]"))?;
        }
        for &(from, to) in enablement_deadlines.keys() {
            if from >= modes.len() || to >= modes.len() || from == to {
                return Err(invalid("transitions", format!("invalid transition {from} -> {to}")));
            }
        }
        for from in 0..modes.len() {
            for (to, target) in modes.iter().enumerate() {
                if from == to {
                    continue;
                }
                let Some(deadlines) = enablement_deadlines.get(&(from, to)) else {
                    return Err(invalid(
                        "transitions",
                        format!("missing enablement deadlines for transition {from} -> {to}"),
                    ));
                };
                let path = format!("transitions[{from}->{to}].deadlines");
                if deadlines.len() != target.len() {
                    return Err(invalid(
                        path,
                        format!(
                            "expected {} deadlines (one per task of mode {to}), got {}",
                            target.len(),
                            deadlines.len()
                        ),
                    ));
                }
                if let Some(k) = deadlines.iter().position(|d| !d.is_positive()) {
                    return Err(invalid(format!("{path}[{k}]"), "deadline must be positive"));
                }
            }
        }
        Ok(SystemSpec {
            modes,
            enablement_deadlines,
        })
    }

    pub fn modes(&self) -> &[ModeSpec] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> &ModeSpec {
        &self.modes[index]
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Relative enablement deadlines of the tasks of mode `to` when leaving `from`.
    pub fn enablement_deadlines(&self, from: usize, to: usize) -> &[Rational] {
        &self.enablement_deadlines[&(from, to)]
    }

    /// All ordered pairs `(from, to)` with `from != to`, lexicographically.
    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.enablement_deadlines.keys().copied()
    }
}

/// A system file: platform plus system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemFile {
    pub platform: Platform,
    pub system: SystemSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    from: usize,
    to: usize,
    deadlines: Vec<Rational>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    platform: Vec<Rational>,
    modes: Vec<ModeSpec>,
    transitions: Vec<TransitionDoc>,
}

/// Parse and validate a system document.
pub fn load_system(document: &str) -> Result<SystemFile, ModelError> {
    let doc: SystemDoc = serde_json::from_str(document)?;
    let platform = Platform::new(doc.platform)?;
    let mut deadlines = BTreeMap::new();
    for (i, tr) in doc.transitions.into_iter().enumerate() {
        if deadlines.insert((tr.from, tr.to), tr.deadlines).is_some() {
            return Err(invalid(
                format!("transitions[{i}]"),
                format!("duplicate transition {} -> {}", tr.from, tr.to),
            ));
        }
    }
    let system = SystemSpec::new(doc.modes, deadlines)?;
    Ok(SystemFile { platform, system })
}

/// Serialize to the document format read by [`load_system`].
pub fn to_document(file: &SystemFile) -> String {
    let doc = SystemDoc {
        platform: file.platform.speeds().to_vec(),
        modes: file.system.modes.clone(),
        transitions: file
            .system
            .enablement_deadlines
            .iter()
            .map(|(&(from, to), d)| TransitionDoc {
                from,
                to,
                deadlines: d.clone(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("system document serializes")
}
