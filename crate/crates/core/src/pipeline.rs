//! Pieces shared by the makespan and max-min solvers: parameters, rounded instances, the
//! configuration MILP skeleton, flow rounding of fractional job assignments, and slot filling.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::config::{ConfigExplosion, Configuration};
use crate::flow::{feasible_flow_with_demands, max_flow_integral, Capacity, FlowNetwork};
use crate::instance::{Instance, MachineId, Schedule};
use crate::lp::{LinearProgram, Relation};
use crate::milp::{MilpError, MilpModel, DEFAULT_NODE_BUDGET};
use crate::rational::{ceil_int, floor_int, ExtRational, Rational};
use crate::rounding::SizeClasses;

pub const DEFAULT_CONFIG_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EptasParams {
    pub epsilon: Rational,
    pub node_budget: u64,
    /// Maximum number of configurations per machine type.
    pub config_limit: usize,
}

impl EptasParams {
    pub fn new(epsilon: Rational) -> Result<Self, SolveError> {
        let params = EptasParams { epsilon, node_budget: DEFAULT_NODE_BUDGET, config_limit: DEFAULT_CONFIG_LIMIT };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        if self.epsilon <= Rational::zero() || self.epsilon >= Rational::one() {
            return Err(SolveError::InvalidParams(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.config_limit == 0 {
            return Err(SolveError::InvalidParams("config limit must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolveError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    ConfigExplosion(#[from] ConfigExplosion),
    #[error("branch-and-bound node budget of {0} exhausted")]
    NodeLimitExceeded(u64),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl From<MilpError> for SolveError {
    fn from(e: MilpError) -> Self {
        match e {
            MilpError::NodeLimitExceeded(n) => SolveError::NodeLimitExceeded(n),
            other => SolveError::Internal(other.to_string()),
        }
    }
}

/// Processing times snapped to a geometric grid for one guess `T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedInstance {
    pub target: Rational,
    pub epsilon: Rational,
    /// `eps^2 * T`; sizes strictly above it are big.
    pub threshold: Rational,
    /// `rounded[t][j]`; infinity marks a job that may not run on type `t`.
    pub rounded: Vec<Vec<ExtRational>>,
    pub classes: SizeClasses,
    pub multiplicities: Vec<usize>,
}

impl RoundedInstance {
    pub(crate) fn new(inst: &Instance, target: Rational, epsilon: Rational, rounded: Vec<Vec<ExtRational>>) -> Self {
        let threshold = &epsilon * &epsilon * &target;
        let options: Vec<Vec<Option<Rational>>> =
            rounded.iter().map(|row| row.iter().map(|p| p.finite().cloned()).collect()).collect();
        let classes = SizeClasses::from_rounded(&options, &threshold);
        RoundedInstance { target, epsilon, threshold, rounded, classes, multiplicities: inst.multiplicities().to_vec() }
    }

    pub fn num_types(&self) -> usize {
        self.rounded.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.rounded.first().map_or(0, Vec::len)
    }

    pub fn size(&self, machine_type: usize, job: usize) -> Option<&Rational> {
        self.rounded[machine_type][job].finite()
    }

    /// Largest big size over all types, if any.
    pub fn largest_big(&self) -> Option<&Rational> {
        self.classes.big.iter().filter_map(|sizes| sizes.last()).max()
    }
}

/// Variable indices of a configuration MILP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpLayout {
    /// `z[t][c]` counts machines of type `t` running configuration `c`.
    pub z: Vec<Vec<usize>>,
    /// `x[j][t]` is the fraction of job `j` on type `t`.
    pub x: Vec<Vec<usize>>,
}

impl MilpLayout {
    pub fn z_values(&self, point: &[Rational]) -> Vec<Vec<u64>> {
        self.z
            .iter()
            .map(|vars| vars.iter().map(|&v| point[v].to_integer().to_u64().expect("integral z")).collect())
            .collect()
    }

    /// `sum over j in J_t(p) of x[j][t]`.
    pub(crate) fn group_mass(&self, point: &[Rational], ri: &RoundedInstance, t: usize, size: &Rational) -> Rational {
        ri.classes.jobs(t, size).iter().map(|&j| &point[self.x[j][t]]).sum()
    }
}

#[derive(Debug, Clone)]
pub struct ConfigMilp {
    pub model: MilpModel,
    pub layout: MilpLayout,
}

/// Variables, bounds, and the rows common to both objectives: every machine runs exactly one
/// configuration and every job is fully assigned.
pub(crate) fn milp_skeleton(ri: &RoundedInstance, configs: &[Vec<Configuration>]) -> (LinearProgram, MilpLayout) {
    let (k, n) = (ri.num_types(), ri.num_jobs());
    let mut lp = LinearProgram::new(0);
    let mut z = Vec::with_capacity(k);
    for t in 0..k {
        let m = Rational::from_integer(BigInt::from(ri.multiplicities[t]));
        z.push(configs[t].iter().map(|_| lp.add_variable(Rational::zero(), Some(m.clone()))).collect::<Vec<_>>());
    }
    let mut x = Vec::with_capacity(n);
    for j in 0..n {
        let row: Vec<usize> = (0..k)
            .map(|t| {
                let upper = if ri.size(t, j).is_some() { Rational::one() } else { Rational::zero() };
                lp.add_variable(Rational::zero(), Some(upper))
            })
            .collect();
        x.push(row);
    }
    for t in 0..k {
        let terms = z[t].iter().map(|&v| (v, Rational::one())).collect();
        lp.add_constraint(terms, Relation::Eq, Rational::from_integer(BigInt::from(ri.multiplicities[t])));
    }
    for row in &x {
        let terms = row.iter().map(|&v| (v, Rational::one())).collect();
        lp.add_constraint(terms, Relation::Eq, Rational::one());
    }
    (lp, MilpLayout { z, x })
}

/// Rows linking big-job slots to assigned big jobs: `sum x <= slots` or `sum x >= slots`.
pub(crate) fn add_slot_rows(
    lp: &mut LinearProgram,
    ri: &RoundedInstance,
    configs: &[Vec<Configuration>],
    layout: &MilpLayout,
    relation: Relation,
) {
    for t in 0..ri.num_types() {
        for (b, size) in ri.classes.big[t].iter().enumerate() {
            let mut terms: Vec<(usize, Rational)> =
                ri.classes.jobs(t, size).iter().map(|&j| (layout.x[j][t], Rational::one())).collect();
            for (c, config) in configs[t].iter().enumerate() {
                if config.counts[b] > 0 {
                    terms.push((layout.z[t][c], -Rational::from_integer(config.counts[b].into())));
                }
            }
            lp.add_constraint(terms, relation, Rational::zero());
        }
    }
}

/// Small-job area on type `t`: `sum over small p of p * sum x[j][t]`.
pub(crate) fn small_area_terms(ri: &RoundedInstance, layout: &MilpLayout, t: usize) -> Vec<(usize, Rational)> {
    ri.classes.small[t]
        .iter()
        .flat_map(|p| ri.classes.jobs(t, p).iter().map(move |&j| (layout.x[j][t], p.clone())))
        .collect()
}

/// Integral configuration counts plus a total job-to-type map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralAssignment {
    pub z: Vec<Vec<u64>>,
    pub job_type: Vec<usize>,
}

impl IntegralAssignment {
    /// Number of jobs of rounded size `size` assigned to type `t`.
    pub fn group_count(&self, ri: &RoundedInstance, t: usize, size: &Rational) -> u64 {
        ri.classes.jobs(t, size).iter().filter(|&&j| self.job_type[j] == t).count() as u64
    }

    /// Configuration slots for big size index `b` on type `t`.
    pub fn slots(&self, configs: &[Vec<Configuration>], t: usize, b: usize) -> u64 {
        configs[t].iter().zip(&self.z[t]).map(|(c, &z)| u64::from(c.counts[b]) * z).sum()
    }

    /// Rounded area of small jobs on type `t`.
    pub fn small_area(&self, ri: &RoundedInstance, t: usize) -> Rational {
        ri.classes.small[t]
            .iter()
            .map(|p| p * Rational::from_integer(self.group_count(ri, t, p).into()))
            .sum()
    }
}

/// Size of the rounding network and the value of the flow found in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlowReport {
    pub value: u64,
    pub nodes: usize,
    pub edges: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SinkRule {
    /// Size node to sink has capacity `ceil(sum x)`.
    CeilCapacity,
    /// Size node to sink has demand `floor(sum x)` and no capacity.
    FloorDemand,
}

/// Turns the fractional job assignment of a feasible MILP point into an integral one.
///
/// Nodes: source, sink, one per job, one per `(type, rounded size)`. Source to job has capacity
/// 1, job to each of its finite sizes capacity 1, size to sink per `rule`. The jobs are read off
/// the saturated job-to-size edges.
pub(crate) fn round_assignment(
    ri: &RoundedInstance,
    layout: &MilpLayout,
    point: &[Rational],
    rule: SinkRule,
) -> Result<(IntegralAssignment, FlowReport), SolveError> {
    let (k, n) = (ri.num_types(), ri.num_jobs());
    let mut net = FlowNetwork::new();
    let job_nodes: Vec<usize> = (0..n).map(|_| net.add_node()).collect();
    let size_nodes: Vec<Vec<(Rational, usize)>> = (0..k)
        .map(|t| ri.classes.groups[t].keys().map(|p| (p.clone(), net.add_node())).collect())
        .collect();
    for &v in &job_nodes {
        net.add_edge(net.source(), v, Capacity::Finite(1));
    }
    let mut job_edges: Vec<(usize, usize, usize)> = Vec::new();
    for (j, &v) in job_nodes.iter().enumerate() {
        for t in 0..k {
            if let Some(p) = ri.size(t, j) {
                let pos = size_nodes[t].binary_search_by(|(q, _)| q.cmp(p)).expect("size node exists");
                job_edges.push((net.add_edge(v, size_nodes[t][pos].1, Capacity::Finite(1)), j, t));
            }
        }
    }
    for (t, nodes) in size_nodes.iter().enumerate() {
        for (p, v) in nodes {
            let mass = layout.group_mass(point, ri, t, p);
            match rule {
                SinkRule::CeilCapacity => {
                    let eta = ceil_int(&mass).to_u64().expect("small count");
                    net.add_edge(*v, net.sink(), Capacity::Finite(eta));
                }
                SinkRule::FloorDemand => {
                    let eta = floor_int(&mass).to_u64().expect("small count");
                    net.add_edge_with_demand(*v, net.sink(), Capacity::Infinite, eta);
                }
            }
        }
    }

    let flow = match rule {
        SinkRule::CeilCapacity => max_flow_integral(&net),
        SinkRule::FloorDemand => feasible_flow_with_demands(&net)
            .map_err(|_| SolveError::Internal("rounding network demands are infeasible".into()))?,
    };
    if flow.value != n as u64 {
        return Err(SolveError::Internal(format!("rounding flow has value {} for {n} jobs", flow.value)));
    }
    let mut job_type = vec![usize::MAX; n];
    for (e, j, t) in job_edges {
        if flow.flows[e] == 1 {
            job_type[j] = t;
        }
    }
    let report = FlowReport { value: flow.value, nodes: net.num_nodes(), edges: net.num_edges() };
    Ok((IntegralAssignment { z: layout.z_values(point), job_type }, report))
}

/// One machine after configurations are handed out: its configuration and rounded load.
#[derive(Debug, Clone)]
pub(crate) struct MachinePlan {
    pub config: usize,
    pub load: Rational,
}

/// Result of handing out configurations and filling their big-job slots.
pub(crate) struct SlotFill {
    pub assignment: Vec<Option<MachineId>>,
    /// Per type, machines in index order.
    pub plans: Vec<Vec<MachinePlan>>,
    /// Big jobs that found no free slot, ascending.
    pub overflow: Vec<usize>,
    /// Slots left empty across all machines.
    pub empty_slots: u64,
}

/// Machines of type `t` receive configurations in list order, `z[t][c]` copies each. Then for
/// every big size the jobs of that size assigned to `t` fill the slots machine by machine.
pub(crate) fn fill_big_slots(
    ri: &RoundedInstance,
    configs: &[Vec<Configuration>],
    ia: &IntegralAssignment,
) -> Result<SlotFill, SolveError> {
    let mut fill = SlotFill {
        assignment: vec![None; ri.num_jobs()],
        plans: Vec::with_capacity(ri.num_types()),
        overflow: Vec::new(),
        empty_slots: 0,
    };
    for t in 0..ri.num_types() {
        let mut plans = Vec::new();
        for (c, &copies) in ia.z[t].iter().enumerate() {
            for _ in 0..copies {
                plans.push(MachinePlan { config: c, load: Rational::zero() });
            }
        }
        if plans.len() != ri.multiplicities[t] {
            return Err(SolveError::Internal(format!(
                "type {t} has {} machines but {} configurations",
                ri.multiplicities[t],
                plans.len()
            )));
        }
        for (b, size) in ri.classes.big[t].iter().enumerate() {
            let mut jobs = ri.classes.jobs(t, size).iter().copied().filter(|&j| ia.job_type[j] == t);
            for (i, plan) in plans.iter_mut().enumerate() {
                for _ in 0..configs[t][plan.config].counts[b] {
                    match jobs.next() {
                        Some(j) => {
                            fill.assignment[j] = Some(MachineId::new(t, i));
                            plan.load += size;
                        }
                        None => fill.empty_slots += 1,
                    }
                }
            }
            fill.overflow.extend(jobs);
        }
        fill.plans.push(plans);
    }
    fill.overflow.sort_unstable();
    Ok(fill)
}

/// What happened during one attempt at a fixed guess.
#[derive(Debug, Clone)]
pub struct TryReport {
    pub target: Rational,
    /// Configuration size bound used for enumeration.
    pub bound: Rational,
    pub rounded: RoundedInstance,
    pub configurations: Vec<Vec<Configuration>>,
    pub milp_nodes: u64,
    pub outcome: TryTrace,
}

#[derive(Debug, Clone)]
pub enum TryTrace {
    NoSchedule,
    Scheduled { flow: FlowReport, assignment: IntegralAssignment, schedule: Schedule },
}

impl TryReport {
    pub fn schedule(&self) -> Option<&Schedule> {
        match &self.outcome {
            TryTrace::Scheduled { schedule, .. } => Some(schedule),
            TryTrace::NoSchedule => None,
        }
    }
}

/// Outcome of a single guess.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TryOutcome {
    /// No schedule meets the guess.
    NoSchedule,
    Scheduled(Schedule),
}
