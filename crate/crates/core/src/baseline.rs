//! Reference algorithms: a greedy list schedule and the classical LP-rounding 2-approximation
//! for unrelated machines.

use num_traits::{One, Signed, Zero};

use crate::flow::{max_flow_integral, Capacity, FlowNetwork};
use crate::instance::{Instance, MachineId, Schedule};
use crate::lp::{solve_lp, LinearProgram, LpResult, Relation};
use crate::rational::Rational;

/// Jobs by decreasing minimum time (ties: lower index first), each onto the machine where it
/// finishes earliest (ties: lowest type, then index). Returns the schedule and its makespan.
pub fn greedy_bound(inst: &Instance) -> (Schedule, Rational) {
    let mut order: Vec<usize> = (0..inst.num_jobs()).collect();
    order.sort_by(|&a, &b| inst.min_time(b).cmp(inst.min_time(a)).then(a.cmp(&b)));

    let machines: Vec<MachineId> = inst.machines().collect();
    let mut loads = vec![Rational::zero(); machines.len()];
    let mut assignment = vec![MachineId::new(0, 0); inst.num_jobs()];
    for j in order {
        let (best, _) = machines
            .iter()
            .enumerate()
            .map(|(k, id)| (k, &loads[k] + inst.time(id.machine_type, j)))
            .fold(None::<(usize, Rational)>, |acc, (k, finish)| match acc {
                Some((_, ref f)) if *f <= finish => acc,
                _ => Some((k, finish)),
            })
            .expect("at least one machine");
        loads[best] += inst.time(machines[best].machine_type, j);
        assignment[j] = machines[best];
    }
    let makespan = loads.into_iter().max().unwrap_or_else(Rational::zero);
    (Schedule::new(assignment), makespan)
}

/// Diagnostics from [`lst_two_approx_with_report`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstReport {
    /// Smallest makespan for which the assignment LP is feasible; a lower bound on OPT.
    pub threshold: Rational,
    /// Largest processing time the LP was allowed to use.
    pub largest_allowed: Rational,
    pub fractional_vars: usize,
    pub fractional_jobs: usize,
    pub machines: usize,
}

pub fn lst_two_approx(inst: &Instance) -> Schedule {
    lst_two_approx_with_report(inst).0
}

/// LP rounding on individually expanded machines.
///
/// Candidate thresholds are the distinct processing times `g_0 < g_1 < ...`. For each the LP
/// `min lambda` over assignments using only times `<= g_k` gives `lambda_k`; the first `k` with
/// `lambda_k < g_{k+1}` yields the smallest feasible makespan `T = max(g_k, lambda_k) <= OPT`.
/// A basic solution of the assignment LP at `T` is then rounded by matching its fractional jobs
/// to distinct machines, adding at most one job of size `<= g_k <= T` per machine.
pub fn lst_two_approx_with_report(inst: &Instance) -> (Schedule, Option<LstReport>) {
    let machines: Vec<MachineId> = inst.machines().collect();
    if inst.num_jobs() == 0 {
        return (Schedule::new(vec![]), None);
    }
    let mut grid: Vec<Rational> = inst.processing().iter().flatten().cloned().collect();
    grid.sort();
    grid.dedup();

    let lambda_at = |k: usize| min_lambda(inst, &machines, &grid[k]);
    let accepts = |k: usize| -> Option<Rational> {
        let lambda = lambda_at(k)?;
        match grid.get(k + 1) {
            Some(next) if lambda >= *next => None,
            _ => Some(lambda),
        }
    };

    // `accepts` is monotone in k and holds at the last candidate.
    let (mut lo, mut hi) = (0usize, grid.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if accepts(mid).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let accepted = accepts(hi).expect("all times allowed at the largest candidate");
    let allowed = grid[hi].clone();
    let threshold = accepted.max(allowed.clone());

    let (x, vars) = assignment_vertex(inst, &machines, &allowed, &threshold);
    let mut assignment = vec![None; inst.num_jobs()];
    let mut fractional: Vec<(usize, usize)> = Vec::new();
    for (&(k, j), v) in vars.iter().zip(&x) {
        if v.is_one() {
            assignment[j] = Some(machines[k]);
        } else if v.is_positive() {
            fractional.push((k, j));
        }
    }
    let mut frac_jobs: Vec<usize> = fractional.iter().map(|&(_, j)| j).collect();
    frac_jobs.sort();
    frac_jobs.dedup();

    let mut net = FlowNetwork::new();
    let job_nodes: Vec<usize> = frac_jobs.iter().map(|_| net.add_node()).collect();
    let machine_nodes: Vec<usize> = machines.iter().map(|_| net.add_node()).collect();
    for &v in &job_nodes {
        net.add_edge(net.source(), v, Capacity::Finite(1));
    }
    let mut pair_edges = Vec::new();
    for &(k, j) in &fractional {
        let pos = frac_jobs.binary_search(&j).expect("fractional job");
        pair_edges.push((net.add_edge(job_nodes[pos], machine_nodes[k], Capacity::Finite(1)), k, j));
    }
    for &v in &machine_nodes {
        net.add_edge(v, net.sink(), Capacity::Finite(1));
    }
    let flow = max_flow_integral(&net);
    assert_eq!(flow.value as usize, frac_jobs.len(), "fractional support must admit a job-saturating matching");
    for (e, k, j) in pair_edges {
        if flow.flows[e] == 1 {
            assignment[j] = Some(machines[k]);
        }
    }

    let report = LstReport {
        threshold,
        largest_allowed: allowed,
        fractional_vars: fractional.len(),
        fractional_jobs: frac_jobs.len(),
        machines: machines.len(),
    };
    let schedule = Schedule::new(assignment.into_iter().map(|m| m.expect("every job assigned")).collect());
    (schedule, Some(report))
}

fn allowed_pairs(inst: &Instance, machines: &[MachineId], allowed: &Rational) -> Option<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for j in 0..inst.num_jobs() {
        let before = pairs.len();
        for (k, id) in machines.iter().enumerate() {
            if inst.time(id.machine_type, j) <= allowed {
                pairs.push((k, j));
            }
        }
        if pairs.len() == before {
            return None;
        }
    }
    Some(pairs)
}

/// `min lambda` s.t. every job fully assigned, every machine load `<= lambda`.
fn min_lambda(inst: &Instance, machines: &[MachineId], allowed: &Rational) -> Option<Rational> {
    let pairs = allowed_pairs(inst, machines, allowed)?;
    let lambda = pairs.len();
    let mut lp = LinearProgram::new(pairs.len() + 1);
    add_assignment_rows(&mut lp, inst, machines, &pairs, |rows| rows.push((lambda, -Rational::one())), Rational::zero());
    lp.minimize(vec![(lambda, Rational::one())]);
    match solve_lp(&lp) {
        LpResult::Optimal { value, .. } => Some(value),
        _ => None,
    }
}

fn assignment_vertex(
    inst: &Instance,
    machines: &[MachineId],
    allowed: &Rational,
    threshold: &Rational,
) -> (Vec<Rational>, Vec<(usize, usize)>) {
    let pairs = allowed_pairs(inst, machines, allowed).expect("threshold admits every job");
    let mut lp = LinearProgram::new(pairs.len());
    add_assignment_rows(&mut lp, inst, machines, &pairs, |_| {}, threshold.clone());
    match solve_lp(&lp) {
        LpResult::Optimal { point, .. } => (point, pairs),
        other => panic!("assignment LP at its own threshold must be feasible, got {other:?}"),
    }
}

fn add_assignment_rows(
    lp: &mut LinearProgram,
    inst: &Instance,
    machines: &[MachineId],
    pairs: &[(usize, usize)],
    extra_load_term: impl Fn(&mut Vec<(usize, Rational)>),
    load_rhs: Rational,
) {
    for j in 0..inst.num_jobs() {
        let terms = pairs.iter().enumerate().filter(|(_, p)| p.1 == j).map(|(v, _)| (v, Rational::one())).collect();
        lp.add_constraint(terms, Relation::Eq, Rational::one());
    }
    for (k, id) in machines.iter().enumerate() {
        let mut terms: Vec<(usize, Rational)> = pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.0 == k)
            .map(|(v, p)| (v, inst.time(id.machine_type, p.1).clone()))
            .collect();
        extra_load_term(&mut terms);
        lp.add_constraint(terms, Relation::Le, load_rhs.clone());
    }
}
