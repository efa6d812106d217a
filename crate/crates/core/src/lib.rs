//! Mode-change analysis for multi-mode hard real-time systems on uniform
//! multiprocessor platforms.
//!
//! The crate covers the static system model, an exact work-conserving
//! scheduler simulator, closed-form step-instant and makespan bounds, the
//! synchronous and asynchronous transition protocols with their offline
//! validity tests, a brute-force maximum-makespan oracle and the
//! bound-versus-oracle experiment harness.

pub mod bounds;
pub mod experiment;
pub mod model;
pub mod oracle;
pub mod protocols;
pub mod rational;
pub mod sim;
pub mod validity;

pub use model::{load_system, ModeSpec, Platform, SchedulerKind, SystemFile, SystemSpec, TaskSpec};
pub use rational::Rational;
pub use sim::{simulate, JobInstance, ScheduleTrace};
