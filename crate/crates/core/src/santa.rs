//! Max-min load (the Santa Claus objective) with a constant number of machine types.
//!
//! For a guess `T`, times are capped at `T` and rounded down onto the grid
//! `eps^2 T (1 - eps)^x`. Configurations go up to `P = T_low + largest big size` with
//! `T_low = (1 - eps) T`; those above `T_low` cover a machine on their own, the others must be
//! topped up with small jobs. A demand flow rounds the fractional assignment and a greedy pass
//! covers every machine to at least `(1 - 3 eps) T`, or the guess is refuted. The outer search
//! descends geometrically from a certified upper bound.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::config::{enumerate_configurations_capped, max_items, ConfigExplosion, Configuration};
use crate::instance::{Instance, MachineId, Schedule};
use crate::lp::Relation;
use crate::milp::{solve_milp_with_stats, MilpModel, MilpOptions, MilpResult};
use crate::pipeline::{
    add_slot_rows, fill_big_slots, milp_skeleton, round_assignment, small_area_terms, ConfigMilp, EptasParams,
    FlowReport, IntegralAssignment, RoundedInstance, SinkRule, SolveError, TryOutcome, TryReport, TryTrace,
};
use crate::rational::{ExtRational, Rational};
use crate::rounding::round_down_to_grid;

/// `1 - 3 eps`: a successful guess `T` yields minimum load at least this times `T`.
pub fn santa_slack(eps: &Rational) -> Rational {
    Rational::one() - Rational::from_integer(BigInt::from(3)) * eps
}

/// A rounded instance together with the two thresholds of the max-min model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SantaRounded {
    pub rounded: RoundedInstance,
    /// `(1 - eps) T`.
    pub t_low: Rational,
    /// `T_low` plus the largest big size over all types (`T_low` if there are none).
    pub p_bound: Rational,
}

/// Configurations of one type split at `T_low`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitConfigurations {
    /// Size at most `T_low`.
    pub small: Vec<Configuration>,
    /// Size in `(T_low, P]`.
    pub big: Vec<Configuration>,
}

impl SplitConfigurations {
    /// Small configurations first, then big ones.
    pub fn all(&self) -> Vec<Configuration> {
        self.small.iter().chain(&self.big).cloned().collect()
    }
}

/// Caps times at `T`, then rounds them down onto the `(1 - eps)` grid through `eps^2 T`.
pub fn geometric_round_down(inst: &Instance, target: &Rational, eps: &Rational) -> SantaRounded {
    let base = eps * eps * target;
    let rounded = inst
        .processing()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| ExtRational::Finite(round_down_to_grid(p.min(target), &base, eps)))
                .collect()
        })
        .collect();
    let rounded = RoundedInstance::new(inst, target.clone(), eps.clone(), rounded);
    let t_low = (Rational::one() - eps) * target;
    let p_bound = match rounded.largest_big() {
        Some(p) => &t_low + p,
        None => t_low.clone(),
    };
    SantaRounded { rounded, t_low, p_bound }
}

/// Every configuration of size at most `p_bound` with at most `floor(1/eps^2)` jobs, split at
/// `t_low`.
pub fn enumerate_configurations_bounded(
    big_sizes: &[Rational],
    t_low: &Rational,
    p_bound: &Rational,
    eps: &Rational,
    limit: usize,
) -> Result<SplitConfigurations, ConfigExplosion> {
    let caps = vec![u32::MAX; big_sizes.len()];
    split_enumeration(big_sizes, &caps, t_low, p_bound, max_items(eps), limit)
}

fn split_enumeration(
    big_sizes: &[Rational],
    caps: &[u32],
    t_low: &Rational,
    p_bound: &Rational,
    item_cap: u32,
    limit: usize,
) -> Result<SplitConfigurations, ConfigExplosion> {
    let configs = enumerate_configurations_capped(big_sizes, caps, p_bound, item_cap, limit)?;
    let (small, big) = configs.into_iter().partition(|c| c.size <= *t_low);
    Ok(SplitConfigurations { small, big })
}

/// Per type, the split configurations, with counts capped by the jobs of each size.
pub fn santa_configurations(sr: &SantaRounded, limit: usize) -> Result<Vec<SplitConfigurations>, ConfigExplosion> {
    let ri = &sr.rounded;
    let caps = ri.classes.big_caps();
    (0..ri.num_types())
        .map(|t| split_enumeration(&ri.classes.big[t], &caps[t], &sr.t_low, &sr.p_bound, max_items(&ri.epsilon), limit))
        .collect()
}

/// The max-min configuration MILP over `configs[t]` (small and big together): one configuration
/// per machine, every job assigned, at least as many big jobs as slots, and per type
/// `sum over small C of size(C) z + small area >= (m_t - big machines) T_low`.
pub fn build_santa_milp(sr: &SantaRounded, configs: &[Vec<Configuration>]) -> ConfigMilp {
    let ri = &sr.rounded;
    let (mut lp, layout) = milp_skeleton(ri, configs);
    add_slot_rows(&mut lp, ri, configs, &layout, Relation::Ge);
    for t in 0..ri.num_types() {
        // Big configurations move to the left side with coefficient T_low.
        let mut terms: Vec<(usize, Rational)> = configs[t]
            .iter()
            .zip(&layout.z[t])
            .map(|(c, &v)| (v, if c.size <= sr.t_low { c.size.clone() } else { sr.t_low.clone() }))
            .collect();
        terms.extend(small_area_terms(ri, &layout, t));
        let m = Rational::from_integer(BigInt::from(ri.multiplicities[t]));
        lp.add_constraint(terms, Relation::Ge, m * &sr.t_low);
    }
    let integral: Vec<usize> = layout.z.iter().flatten().copied().collect();
    let model = MilpModel::new(lp, integral).expect("z variables are bounded");
    ConfigMilp { model, layout }
}

/// Rounds the fractional job assignment of a feasible point; size nodes demand
/// `floor(sum of x over J_t(p))` units.
pub fn integralize_santa(
    sr: &SantaRounded,
    milp: &ConfigMilp,
    point: &[Rational],
) -> Result<(IntegralAssignment, FlowReport), SolveError> {
    round_assignment(&sr.rounded, &milp.layout, point, SinkRule::FloorDemand)
}

/// Hands out configurations and fills every big slot. Small jobs then top up the machines with
/// small configurations in index order, never pushing a machine past `T_low`; a job that does
/// not fit moves the cursor to the next machine. Jobs left over go to the least loaded machine
/// of their type.
pub fn assemble_santa_schedule(
    sr: &SantaRounded,
    configs: &[Vec<Configuration>],
    ia: &IntegralAssignment,
) -> Result<Schedule, SolveError> {
    let ri = &sr.rounded;
    let mut fill = fill_big_slots(ri, configs, ia)?;
    if fill.empty_slots > 0 {
        return Err(SolveError::Internal(format!("{} big slots left empty", fill.empty_slots)));
    }
    let mut leftovers = std::mem::take(&mut fill.overflow);
    for t in 0..ri.num_types() {
        let plans = &mut fill.plans[t];
        let open: Vec<usize> = (0..plans.len()).filter(|&i| configs[t][plans[i].config].size <= sr.t_low).collect();
        let mut cursor = 0;
        for j in 0..ri.num_jobs() {
            if ia.job_type[j] != t || fill.assignment[j].is_some() {
                continue;
            }
            let size = ri.size(t, j).expect("capped times are finite");
            if ri.classes.is_big(t, size) {
                continue;
            }
            while cursor < open.len() && &plans[open[cursor]].load + size > sr.t_low {
                cursor += 1;
            }
            match open.get(cursor) {
                Some(&i) => {
                    plans[i].load += size;
                    fill.assignment[j] = Some(MachineId::new(t, i));
                }
                None => leftovers.push(j),
            }
        }
    }
    leftovers.sort_unstable();
    for j in leftovers {
        let t = ia.job_type[j];
        let plans = &mut fill.plans[t];
        let i = (0..plans.len()).min_by(|&a, &b| plans[a].load.cmp(&plans[b].load)).expect("type has machines");
        plans[i].load += ri.size(t, j).expect("finite");
        fill.assignment[j] = Some(MachineId::new(t, i));
    }
    let assignment = fill
        .assignment
        .into_iter()
        .enumerate()
        .map(|(j, m)| m.ok_or_else(|| SolveError::Internal(format!("job {j} left unassigned"))))
        .collect::<Result<_, _>>()?;
    Ok(Schedule::new(assignment))
}

pub fn try_santa(inst: &Instance, target: &Rational, params: &EptasParams) -> Result<TryOutcome, SolveError> {
    let report = try_santa_traced(inst, target, params)?;
    Ok(match report.outcome {
        TryTrace::NoSchedule => TryOutcome::NoSchedule,
        TryTrace::Scheduled { schedule, .. } => TryOutcome::Scheduled(schedule),
    })
}

/// One guess with every intermediate artefact kept. `configurations` in the report lists small
/// configurations before big ones for each type.
pub fn try_santa_traced(inst: &Instance, target: &Rational, params: &EptasParams) -> Result<TryReport, SolveError> {
    params.validate()?;
    if *target <= Rational::zero() {
        return Err(SolveError::InvalidParams(format!("target must be positive, got {target}")));
    }
    let sr = geometric_round_down(inst, target, &params.epsilon);
    let configurations: Vec<Vec<Configuration>> =
        santa_configurations(&sr, params.config_limit)?.iter().map(SplitConfigurations::all).collect();
    let milp = build_santa_milp(&sr, &configurations);
    let (result, stats) = solve_milp_with_stats(&milp.model, &MilpOptions { node_budget: params.node_budget })?;
    let outcome = match result {
        MilpResult::Infeasible => TryTrace::NoSchedule,
        MilpResult::Feasible(point) => {
            let (assignment, flow) = integralize_santa(&sr, &milp, &point)?;
            let schedule = assemble_santa_schedule(&sr, &configurations, &assignment)?;
            TryTrace::Scheduled { flow, assignment, schedule }
        }
    };
    Ok(TryReport {
        target: target.clone(),
        bound: sr.p_bound,
        rounded: sr.rounded,
        configurations,
        milp_nodes: stats.nodes,
        outcome,
    })
}

pub fn solve_santa(inst: &Instance, params: &EptasParams) -> Result<Schedule, SolveError> {
    solve_santa_observed(inst, params, &mut |_| {})
}

/// `sum_j max_t p_tj / m`: no machine can be guaranteed more than the average of the largest
/// times.
pub fn santa_upper_bound(inst: &Instance) -> Rational {
    let total: Rational = (0..inst.num_jobs()).map(|j| inst.max_time(j)).sum();
    total / Rational::from_integer(BigInt::from(inst.num_machines()))
}

/// Tries `U, (1 - eps) U, (1 - eps)^2 U, ...` from the upper bound `U` and returns the first
/// success, whose minimum load is at least `(1 - 3 eps)(1 - eps) OPT`. A failure at or below
/// the smallest positive time proves `OPT = 0`, as does having more machines than jobs; then
/// every job goes to the first machine.
pub fn solve_santa_observed(
    inst: &Instance,
    params: &EptasParams,
    observer: &mut dyn FnMut(&TryReport),
) -> Result<Schedule, SolveError> {
    params.validate()?;
    let trivial = || Schedule::new(vec![MachineId::new(0, 0); inst.num_jobs()]);
    let upper = santa_upper_bound(inst);
    if inst.num_machines() > inst.num_jobs() || upper.is_zero() {
        return Ok(trivial());
    }
    let smallest = inst.processing().iter().flatten().filter(|p| p.is_positive()).min().cloned().expect("positive time");
    let shrink = Rational::one() - &params.epsilon;
    let mut target = upper;
    loop {
        let report = try_santa_traced(inst, &target, params)?;
        observer(&report);
        if let Some(schedule) = report.schedule() {
            return Ok(schedule.clone());
        }
        if target <= smallest {
            return Ok(trivial());
        }
        target *= &shrink;
    }
}

/// The MILP point induced by `schedule`: a machine's big jobs form its configuration after
/// repeatedly dropping a largest one while the rest still exceeds `T_low`; every job sits
/// wholly on its machine's type. `None` if a machine's configuration is not listed.
pub fn santa_schedule_point(
    sr: &SantaRounded,
    configs: &[Vec<Configuration>],
    milp: &ConfigMilp,
    schedule: &Schedule,
) -> Option<Vec<Rational>> {
    let ri = &sr.rounded;
    let mut point = vec![Rational::zero(); milp.model.lp().num_vars()];
    let mut big_jobs: Vec<Vec<Vec<usize>>> =
        (0..ri.num_types()).map(|t| vec![Vec::new(); ri.multiplicities[t]]).collect();
    for (j, id) in schedule.assignment.iter().enumerate() {
        let t = id.machine_type;
        let size = ri.size(t, j)?;
        point[milp.layout.x[j][t]] = Rational::one();
        if let Ok(b) = ri.classes.big[t].binary_search(size) {
            big_jobs[t][id.index].push(b);
        }
    }
    for (t, machines) in big_jobs.iter_mut().enumerate() {
        let sizes = &ri.classes.big[t];
        for machine in machines {
            machine.sort_unstable();
            let mut total: Rational = machine.iter().map(|&b| &sizes[b]).sum();
            while let Some(&largest) = machine.last() {
                let rest = &total - &sizes[largest];
                if rest <= sr.t_low {
                    break;
                }
                total = rest;
                machine.pop();
            }
            let mut counts = vec![0u32; sizes.len()];
            for &b in machine.iter() {
                counts[b] += 1;
            }
            let c = configs[t].iter().position(|c| c.counts == counts)?;
            point[milp.layout.z[t][c]] += Rational::one();
        }
    }
    Some(point)
}
