//! Exact-arithmetic scheduling on unrelated machines with few machine types: approximation
//! schemes for makespan and max-min load, the LP, MILP and flow machinery they run on, baseline
//! heuristics, and brute-force oracles.

pub mod baseline;
pub mod config;
pub mod flow;
pub mod instance;
pub mod lp;
pub mod makespan;
pub mod milp;
pub mod oracle;
pub mod pipeline;
pub mod rational;
pub mod rounding;
pub mod santa;
pub mod suite;

pub use instance::{evaluate_makespan, evaluate_min_load, Instance, InstanceError, MachineId, Schedule};
pub use pipeline::{EptasParams, SolveError, TryOutcome};
pub use rational::{ExtRational, Rational};
