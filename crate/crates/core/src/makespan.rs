//! Makespan minimisation with a constant number of machine types.
//!
//! For a guess `T` the processing times are rounded up onto the grid `eps^2 T (1 + eps)^x`,
//! machines of each type choose configurations of big jobs, and a feasibility MILP assigns jobs
//! to types fractionally. A max-flow rounds that assignment, and a greedy pass turns it into a
//! schedule of makespan at most `(1 + 2 eps + 2 eps^2) T`, or the guess is refuted. A bisection
//! over `T` drives the guesses.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::baseline::greedy_bound;
use crate::config::{enumerate_configurations_capped, max_items, ConfigExplosion, Configuration};
use crate::instance::{Instance, MachineId, Schedule};
use crate::lp::Relation;
use crate::milp::{solve_milp_with_stats, MilpModel, MilpOptions, MilpResult};
use crate::pipeline::{
    add_slot_rows, fill_big_slots, milp_skeleton, round_assignment, small_area_terms, ConfigMilp, EptasParams,
    FlowReport, IntegralAssignment, RoundedInstance, SinkRule, SolveError, TryOutcome, TryReport, TryTrace,
};
use crate::rational::{ExtRational, Rational};
use crate::rounding::round_up_to_grid;

/// `1 + 2 eps + 2 eps^2`: a successful guess `T` yields makespan at most this times `T`.
pub fn makespan_slack(eps: &Rational) -> Rational {
    let two = Rational::from_integer(BigInt::from(2));
    Rational::one() + &two * eps + &two * eps * eps
}

/// `T_bar = (1 + eps) T`, the bound on rounded configuration sizes.
pub fn t_bar(ri: &RoundedInstance) -> Rational {
    (Rational::one() + &ri.epsilon) * &ri.target
}

/// Area budget per machine after flow rounding: `T_bar + eps T + eps^2 T`.
pub fn relaxed_area(ri: &RoundedInstance) -> Rational {
    t_bar(ri) + &ri.epsilon * &ri.target + &ri.threshold
}

/// Times above `T` become infinite; the rest are rounded up onto the `(1 + eps)` grid through
/// `eps^2 T`.
pub fn geometric_round(inst: &Instance, target: &Rational, eps: &Rational) -> RoundedInstance {
    let base = eps * eps * target;
    let rounded = inst
        .processing()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| {
                    if p > target {
                        ExtRational::Infinity
                    } else {
                        ExtRational::Finite(round_up_to_grid(p, &base, eps))
                    }
                })
                .collect()
        })
        .collect();
    RoundedInstance::new(inst, target.clone(), eps.clone(), rounded)
}

/// Per type, every configuration of size at most `T_bar` with at most `floor(1/eps^2)` jobs and
/// no more jobs of a size than the instance has.
pub fn makespan_configurations(ri: &RoundedInstance, limit: usize) -> Result<Vec<Vec<Configuration>>, ConfigExplosion> {
    let bound = t_bar(ri);
    let caps = ri.classes.big_caps();
    (0..ri.num_types())
        .map(|t| enumerate_configurations_capped(&ri.classes.big[t], &caps[t], &bound, max_items(&ri.epsilon), limit))
        .collect()
}

/// The configuration MILP: one configuration per machine, every job assigned, big jobs covered
/// by slots, and per-type area at most `m_t T_bar`.
pub fn build_milp(ri: &RoundedInstance, configs: &[Vec<Configuration>]) -> ConfigMilp {
    let (mut lp, layout) = milp_skeleton(ri, configs);
    add_slot_rows(&mut lp, ri, configs, &layout, Relation::Le);
    let bound = t_bar(ri);
    for t in 0..ri.num_types() {
        let mut terms: Vec<(usize, Rational)> =
            configs[t].iter().zip(&layout.z[t]).map(|(c, &v)| (v, c.size.clone())).collect();
        terms.extend(small_area_terms(ri, &layout, t));
        let m = Rational::from_integer(BigInt::from(ri.multiplicities[t]));
        lp.add_constraint(terms, Relation::Le, m * &bound);
    }
    let integral: Vec<usize> = layout.z.iter().flatten().copied().collect();
    let model = MilpModel::new(lp, integral).expect("z variables are bounded");
    ConfigMilp { model, layout }
}

/// Rounds the fractional job assignment of a feasible point; capacities are
/// `ceil(sum of x over J_t(p))`.
pub fn integralize_solution(
    ri: &RoundedInstance,
    milp: &ConfigMilp,
    point: &[Rational],
) -> Result<(IntegralAssignment, FlowReport), SolveError> {
    round_assignment(ri, &milp.layout, point, SinkRule::CeilCapacity)
}

/// Checks configuration counts, job placement, slot coverage and the relaxed area bound.
pub fn check_assignment(ri: &RoundedInstance, configs: &[Vec<Configuration>], ia: &IntegralAssignment) -> Result<(), String> {
    let area_cap = relaxed_area(ri);
    for t in 0..ri.num_types() {
        let machines: u64 = ia.z[t].iter().sum();
        if machines != ri.multiplicities[t] as u64 {
            return Err(format!("type {t}: {machines} configurations for {} machines", ri.multiplicities[t]));
        }
        for (b, size) in ri.classes.big[t].iter().enumerate() {
            let (jobs, slots) = (ia.group_count(ri, t, size), ia.slots(configs, t, b));
            if jobs > slots {
                return Err(format!("type {t}, size {size}: {jobs} jobs for {slots} slots"));
            }
        }
        let config_area: Rational =
            configs[t].iter().zip(&ia.z[t]).map(|(c, &z)| &c.size * Rational::from_integer(z.into())).sum();
        let area = config_area + ia.small_area(ri, t);
        let cap = Rational::from_integer(BigInt::from(ri.multiplicities[t])) * &area_cap;
        if area > cap {
            return Err(format!("type {t}: area {area} exceeds {cap}"));
        }
    }
    for (j, &t) in ia.job_type.iter().enumerate() {
        if t >= ri.num_types() || ri.size(t, j).is_none() {
            return Err(format!("job {j} has no admissible type"));
        }
    }
    Ok(())
}

/// Hands out configurations, fills big-job slots, then spreads small jobs machine by machine,
/// moving on once a machine's rounded load exceeds `T_bar + eps T + eps^2 T`.
pub fn assemble_schedule(
    ri: &RoundedInstance,
    configs: &[Vec<Configuration>],
    ia: &IntegralAssignment,
) -> Result<Schedule, SolveError> {
    let mut fill = fill_big_slots(ri, configs, ia)?;
    if let Some(j) = fill.overflow.first() {
        return Err(SolveError::Internal(format!("big job {j} found no slot")));
    }
    let threshold = relaxed_area(ri);
    for t in 0..ri.num_types() {
        let plans = &mut fill.plans[t];
        let mut current = 0;
        for j in 0..ri.num_jobs() {
            if ia.job_type[j] != t || fill.assignment[j].is_some() {
                continue;
            }
            let size = ri.size(t, j).expect("assigned types are finite");
            let Some(plan) = plans.get_mut(current) else {
                return Err(SolveError::Internal(format!("type {t} ran out of machines for small jobs")));
            };
            plan.load += size;
            fill.assignment[j] = Some(MachineId::new(t, current));
            if plan.load > threshold {
                current += 1;
            }
        }
    }
    let assignment = fill
        .assignment
        .into_iter()
        .enumerate()
        .map(|(j, m)| m.ok_or_else(|| SolveError::Internal(format!("job {j} left unassigned"))))
        .collect::<Result<_, _>>()?;
    Ok(Schedule::new(assignment))
}

pub fn try_makespan(inst: &Instance, target: &Rational, params: &EptasParams) -> Result<TryOutcome, SolveError> {
    let report = try_makespan_traced(inst, target, params)?;
    Ok(match report.outcome {
        TryTrace::NoSchedule => TryOutcome::NoSchedule,
        TryTrace::Scheduled { schedule, .. } => TryOutcome::Scheduled(schedule),
    })
}

/// One guess with every intermediate artefact kept.
pub fn try_makespan_traced(inst: &Instance, target: &Rational, params: &EptasParams) -> Result<TryReport, SolveError> {
    params.validate()?;
    if *target <= Rational::zero() {
        return Err(SolveError::InvalidParams(format!("target must be positive, got {target}")));
    }
    let rounded = geometric_round(inst, target, &params.epsilon);
    let configurations = makespan_configurations(&rounded, params.config_limit)?;
    let milp = build_milp(&rounded, &configurations);
    let (result, stats) = solve_milp_with_stats(&milp.model, &MilpOptions { node_budget: params.node_budget })?;
    let outcome = match result {
        MilpResult::Infeasible => TryTrace::NoSchedule,
        MilpResult::Feasible(point) => {
            let (assignment, flow) = integralize_solution(&rounded, &milp, &point)?;
            let schedule = assemble_schedule(&rounded, &configurations, &assignment)?;
            TryTrace::Scheduled { flow, assignment, schedule }
        }
    };
    Ok(TryReport {
        target: target.clone(),
        bound: t_bar(&rounded),
        rounded,
        configurations,
        milp_nodes: stats.nodes,
        outcome,
    })
}

pub fn solve_makespan(inst: &Instance, params: &EptasParams) -> Result<Schedule, SolveError> {
    solve_makespan_observed(inst, params, &mut |_| {})
}

/// `max(max_j min_t p_tj, sum_j min_t p_tj / m)`, a lower bound on the optimal makespan.
pub fn makespan_lower_bound(inst: &Instance) -> Rational {
    let largest = (0..inst.num_jobs()).map(|j| inst.min_time(j).clone()).max().unwrap_or_else(Rational::zero);
    let total: Rational = (0..inst.num_jobs()).map(|j| inst.min_time(j)).sum();
    let average = total / Rational::from_integer(BigInt::from(inst.num_machines()));
    largest.max(average)
}

/// Bisection over guesses between a certified lower bound `L` and the greedy makespan, until the
/// gap is at most `eps L`. The result has makespan at most `(1 + 2 eps + 2 eps^2)(1 + eps) OPT`.
/// `observer` sees the report of every guess tried.
pub fn solve_makespan_observed(
    inst: &Instance,
    params: &EptasParams,
    observer: &mut dyn FnMut(&TryReport),
) -> Result<Schedule, SolveError> {
    params.validate()?;
    let lower = makespan_lower_bound(inst);
    if lower.is_zero() {
        // Every job has a zero-time type.
        let assignment = (0..inst.num_jobs())
            .map(|j| {
                let t = (0..inst.num_types()).find(|&t| inst.time(t, j).is_zero()).expect("zero-time type");
                MachineId::new(t, 0)
            })
            .collect();
        return Ok(Schedule::new(assignment));
    }

    let mut attempt = |target: &Rational| -> Result<Option<Schedule>, SolveError> {
        let report = try_makespan_traced(inst, target, params)?;
        observer(&report);
        Ok(report.schedule().cloned())
    };
    if let Some(schedule) = attempt(&lower)? {
        return Ok(schedule);
    }
    let (mut best, upper) = greedy_bound(inst);
    let (mut lo, mut hi) = (lower.clone(), upper);
    let gap = &params.epsilon * &lower;
    let two = Rational::from_integer(BigInt::from(2));
    while &hi - &lo > gap {
        let mid = (&lo + &hi) / &two;
        match attempt(&mid)? {
            Some(schedule) => {
                best = schedule;
                hi = mid;
            }
            None => lo = mid,
        }
    }
    Ok(best)
}

/// The MILP point induced by `schedule`: each machine's big jobs form its configuration and each
/// job sits wholly on its machine's type. `None` if a job sits where its rounded time is
/// infinite or a machine's big jobs match no listed configuration.
pub fn schedule_point(
    ri: &RoundedInstance,
    configs: &[Vec<Configuration>],
    milp: &ConfigMilp,
    schedule: &Schedule,
) -> Option<Vec<Rational>> {
    let mut point = vec![Rational::zero(); milp.model.lp().num_vars()];
    let mut counts: Vec<Vec<Vec<u32>>> =
        (0..ri.num_types()).map(|t| vec![vec![0; ri.classes.big[t].len()]; ri.multiplicities[t]]).collect();
    for (j, id) in schedule.assignment.iter().enumerate() {
        let t = id.machine_type;
        let size = ri.size(t, j)?;
        point[milp.layout.x[j][t]] = Rational::one();
        if let Ok(b) = ri.classes.big[t].binary_search(size) {
            counts[t][id.index][b] += 1;
        }
    }
    for (t, machines) in counts.iter().enumerate() {
        for machine in machines {
            let c = configs[t].iter().position(|c| c.counts == *machine)?;
            point[milp.layout.z[t][c]] += Rational::one();
        }
    }
    Some(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::evaluate_makespan;
    use crate::rational::{int, ratio};

    fn params(eps: Rational) -> EptasParams {
        EptasParams::new(eps).unwrap()
    }

    #[test]
    fn rounding_examples() {
        let inst = Instance::new(vec![vec![ratio(1, 4), ratio(3, 10), ratio(6, 5)]], vec![1]).unwrap();
        let ri = geometric_round(&inst, &int(1), &ratio(1, 2));
        assert_eq!(ri.rounded[0][0], ExtRational::Finite(ratio(1, 4)));
        assert_eq!(ri.rounded[0][1], ExtRational::Finite(ratio(3, 8)));
        assert_eq!(ri.rounded[0][2], ExtRational::Infinity);
        assert_eq!(ri.classes.big[0], vec![ratio(3, 8)]);
        assert_eq!(ri.classes.small[0], vec![ratio(1, 4)]);
    }

    #[test]
    fn empty_instance_model() {
        let inst = Instance::from_integers(&[&[]], &[2]).unwrap();
        let ri = geometric_round(&inst, &int(1), &ratio(1, 2));
        let configs = makespan_configurations(&ri, 100).unwrap();
        let milp = build_milp(&ri, &configs);
        assert_eq!(milp.model.lp().constraints().len(), 2);
        let report = try_makespan_traced(&inst, &int(1), &params(ratio(1, 2))).unwrap();
        assert_eq!(report.schedule().unwrap().assignment.len(), 0);
    }

    #[test]
    fn job_too_long_everywhere() {
        let inst = Instance::from_integers(&[&[5], &[7]], &[1, 1]).unwrap();
        assert_eq!(try_makespan(&inst, &int(4), &params(ratio(1, 2))).unwrap(), TryOutcome::NoSchedule);
    }

    #[test]
    fn split_job_goes_to_one_type() {
        let inst = Instance::from_integers(&[&[1], &[1]], &[1, 1]).unwrap();
        let ri = geometric_round(&inst, &int(4), &ratio(1, 2));
        let configs = makespan_configurations(&ri, 100).unwrap();
        let milp = build_milp(&ri, &configs);
        let mut point = vec![Rational::zero(); milp.model.lp().num_vars()];
        for t in 0..2 {
            point[milp.layout.z[t][0]] = int(1);
            point[milp.layout.x[0][t]] = ratio(1, 2);
        }
        assert!(milp.model.is_feasible_point(&point));
        let (ia, flow) = integralize_solution(&ri, &milp, &point).unwrap();
        assert_eq!(flow.value, 1);
        assert!(ia.job_type[0] < 2);
        check_assignment(&ri, &configs, &ia).unwrap();
    }

    #[test]
    fn four_equal_jobs_two_machines() {
        let inst = Instance::from_integers(&[&[3, 3, 3, 3]], &[2]).unwrap();
        let eps = ratio(1, 4);
        let TryOutcome::Scheduled(s) = try_makespan(&inst, &int(6), &params(eps.clone())).unwrap() else {
            panic!("OPT is 6")
        };
        assert!(evaluate_makespan(&inst, &s).unwrap() <= makespan_slack(&eps) * int(6));
    }

    #[test]
    fn single_machine_is_exact() {
        let inst = Instance::from_integers(&[&[3, 1, 4]], &[1]).unwrap();
        let s = solve_makespan(&inst, &params(ratio(1, 3))).unwrap();
        assert_eq!(evaluate_makespan(&inst, &s).unwrap(), int(8));
    }

    #[test]
    fn cross_instance_within_guarantee() {
        let inst = Instance::from_integers(&[&[1, 2], &[2, 1]], &[1, 1]).unwrap();
        let eps = ratio(1, 4);
        let s = solve_makespan(&inst, &params(eps.clone())).unwrap();
        let bound = makespan_slack(&eps) * (Rational::one() + &eps);
        assert!(evaluate_makespan(&inst, &s).unwrap() <= bound);
    }

    #[test]
    fn zero_times_give_zero_makespan() {
        let inst = Instance::from_integers(&[&[0, 3], &[2, 0]], &[1, 1]).unwrap();
        let s = solve_makespan(&inst, &params(ratio(1, 2))).unwrap();
        assert_eq!(evaluate_makespan(&inst, &s).unwrap(), int(0));
    }

    #[test]
    fn optimal_schedule_induces_feasible_point() {
        let inst = Instance::from_integers(&[&[3, 3, 3, 3]], &[2]).unwrap();
        let ri = geometric_round(&inst, &int(6), &ratio(1, 4));
        let configs = makespan_configurations(&ri, 1000).unwrap();
        let milp = build_milp(&ri, &configs);
        let s = Schedule::new(vec![MachineId::new(0, 0), MachineId::new(0, 0), MachineId::new(0, 1), MachineId::new(0, 1)]);
        let point = schedule_point(&ri, &configs, &milp, &s).unwrap();
        assert!(milp.model.is_feasible_point(&point));
    }

    #[test]
    fn invalid_epsilon_rejected() {
        assert!(EptasParams::new(int(1)).is_err());
        assert!(EptasParams::new(int(0)).is_err());
    }
}
