//! Exhaustive solvers for tiny instances, used as ground truth.
//!
//! Machines of one type are interchangeable, so the search only opens the lowest-index unused
//! machine of a type; any schedule is a relabelling of one that uses machines in first-touch
//! order. Times are scaled to a common denominator so the inner loop runs on integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::instance::{Instance, MachineId, Schedule};
use crate::rational::Rational;

pub const DEFAULT_JOB_LIMIT: usize = 10;
pub const DEFAULT_MACHINE_LIMIT: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub jobs: usize,
    pub machines: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { jobs: DEFAULT_JOB_LIMIT, machines: DEFAULT_MACHINE_LIMIT }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("instance exceeds oracle limits ({jobs} jobs, {machines} machines)")]
    LimitExceeded { jobs: usize, machines: usize },
    #[error("processing times too large for exhaustive search")]
    Overflow,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Goal {
    MinMakespan,
    MaxMinLoad,
}

pub fn brute_force_makespan(inst: &Instance, limits: OracleLimits) -> Result<(Rational, Schedule), OracleError> {
    search(inst, limits, Goal::MinMakespan, true)
}

pub fn brute_force_min_load(inst: &Instance, limits: OracleLimits) -> Result<(Rational, Schedule), OracleError> {
    search(inst, limits, Goal::MaxMinLoad, true)
}

fn search(inst: &Instance, limits: OracleLimits, goal: Goal, symmetry: bool) -> Result<(Rational, Schedule), OracleError> {
    let (n, m) = (inst.num_jobs(), inst.num_machines());
    if n > limits.jobs || m > limits.machines {
        return Err(OracleError::LimitExceeded { jobs: n, machines: m });
    }
    let scale = inst.processing().iter().flatten().fold(BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let times: Vec<Vec<u128>> = inst
        .processing()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| (p.numer() * (&scale / p.denom())).to_u128().ok_or(OracleError::Overflow))
                .collect::<Result<_, _>>()
        })
        .collect::<Result<_, _>>()?;
    times.iter().flatten().try_fold(0u128, |acc, &t| acc.checked_add(t)).ok_or(OracleError::Overflow)?;

    let machines: Vec<MachineId> = inst.machines().collect();
    let mut state = Search {
        times: &times,
        machines: &machines,
        goal,
        symmetry,
        loads: vec![0; m],
        opened: vec![0; inst.num_types()],
        current: vec![0; n],
        best: None,
    };
    state.descend(0);
    let (value, witness) = state.best.expect("at least one complete assignment");
    let value = Rational::new(BigInt::from(value), scale);
    let schedule = Schedule::new(witness.into_iter().map(|k| machines[k]).collect());
    Ok((value, schedule))
}

struct Search<'a> {
    times: &'a [Vec<u128>],
    machines: &'a [MachineId],
    goal: Goal,
    symmetry: bool,
    loads: Vec<u128>,
    opened: Vec<usize>,
    current: Vec<usize>,
    best: Option<(u128, Vec<usize>)>,
}

impl Search<'_> {
    fn descend(&mut self, job: usize) {
        if job == self.current.len() {
            let value = match self.goal {
                Goal::MinMakespan => self.loads.iter().copied().max().unwrap_or(0),
                Goal::MaxMinLoad => self.loads.iter().copied().min().unwrap_or(0),
            };
            let improves = match (&self.best, self.goal) {
                (None, _) => true,
                (Some((b, _)), Goal::MinMakespan) => value < *b,
                (Some((b, _)), Goal::MaxMinLoad) => value > *b,
            };
            if improves {
                self.best = Some((value, self.current.clone()));
            }
            return;
        }
        for k in 0..self.machines.len() {
            let id = self.machines[k];
            if self.symmetry && id.index > self.opened[id.machine_type] {
                continue;
            }
            let p = self.times[id.machine_type][job];
            let load = self.loads[k] + p;
            if self.goal == Goal::MinMakespan {
                if let Some((b, _)) = &self.best {
                    if load >= *b {
                        continue;
                    }
                }
            }
            let opens = id.index == self.opened[id.machine_type];
            if opens {
                self.opened[id.machine_type] += 1;
            }
            self.loads[k] = load;
            self.current[job] = k;
            self.descend(job + 1);
            self.loads[k] -= p;
            if opens {
                self.opened[id.machine_type] -= 1;
            }
        }
    }
}
