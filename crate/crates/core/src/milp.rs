//! Feasibility MILP by depth-first branch-and-bound over the integral variables.
//!
//! Every node solves the LP relaxation exactly. The most fractional integral variable
//! (ties: lowest index) is split into `x <= floor(v)` and `x >= ceil(v)`, floor side first.
//! The first node whose relaxation is integral on the flagged variables is returned.

use num_traits::Zero;

use crate::lp::{solve_lp, LinearProgram, LpResult, Objective};
use crate::rational::{fractionality, Rational};

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MilpError {
    #[error("branch-and-bound node budget of {0} exhausted")]
    NodeLimitExceeded(u64),
    #[error("integral variable {0} needs a finite upper bound")]
    UnboundedIntegral(usize),
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    lp: LinearProgram,
    integral: Vec<bool>,
}

impl MilpModel {
    /// Integral variables must carry finite upper bounds. The LP objective, if any, is ignored.
    pub fn new(lp: LinearProgram, integral_vars: impl IntoIterator<Item = usize>) -> Result<Self, MilpError> {
        let mut integral = vec![false; lp.num_vars()];
        for j in integral_vars {
            assert!(j < lp.num_vars(), "integral variable {j} out of range");
            if lp.upper(j).is_none() {
                return Err(MilpError::UnboundedIntegral(j));
            }
            integral[j] = true;
        }
        Ok(MilpModel { lp, integral })
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn is_integral(&self, var: usize) -> bool {
        self.integral[var]
    }

    pub fn integral_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.integral.iter().enumerate().filter_map(|(j, &f)| f.then_some(j))
    }

    /// Bounds, rows and integrality all hold exactly.
    pub fn is_feasible_point(&self, point: &[Rational]) -> bool {
        self.lp.is_feasible_point(point) && self.integral_vars().all(|j| point[j].is_integer())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MilpResult {
    Feasible(Vec<Rational>),
    Infeasible,
}

#[derive(Debug, Clone, Copy)]
pub struct MilpOptions {
    pub node_budget: u64,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions { node_budget: DEFAULT_NODE_BUDGET }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MilpStats {
    pub nodes: u64,
}

pub fn solve_milp(model: &MilpModel, options: &MilpOptions) -> Result<MilpResult, MilpError> {
    solve_milp_with_stats(model, options).map(|(r, _)| r)
}

pub fn solve_milp_with_stats(
    model: &MilpModel,
    options: &MilpOptions,
) -> Result<(MilpResult, MilpStats), MilpError> {
    let mut relaxation = match model.lp.objective() {
        Objective::Feasibility => model.lp.clone(),
        Objective::Minimize(_) => strip_objective(&model.lp),
    };

    let vars: Vec<usize> = model.integral_vars().collect();
    let root: Vec<(Rational, Rational)> = vars
        .iter()
        .map(|&j| {
            let lo = relaxation.lower(j).ceil();
            let hi = relaxation.upper(j).expect("checked at construction").floor();
            (lo, hi)
        })
        .collect();

    let mut stats = MilpStats::default();
    let mut stack = vec![root];
    while let Some(bounds) = stack.pop() {
        if stats.nodes >= options.node_budget {
            return Err(MilpError::NodeLimitExceeded(options.node_budget));
        }
        stats.nodes += 1;
        if bounds.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        for (&j, (lo, hi)) in vars.iter().zip(&bounds) {
            relaxation.set_bounds(j, lo.clone(), Some(hi.clone()));
        }
        let point = match solve_lp(&relaxation) {
            LpResult::Optimal { point, .. } => point,
            LpResult::Infeasible(_) => continue,
            LpResult::Unbounded => unreachable!("feasibility relaxations are never unbounded"),
        };

        let mut branch: Option<(usize, Rational)> = None;
        for (k, &j) in vars.iter().enumerate() {
            let f = fractionality(&point[j]);
            if f.is_zero() {
                continue;
            }
            if branch.as_ref().map_or(true, |(_, best)| f > *best) {
                branch = Some((k, f));
            }
        }
        let Some((k, _)) = branch else {
            return Ok((MilpResult::Feasible(point), stats));
        };
        let value = &point[vars[k]];
        let mut up = bounds.clone();
        up[k].0 = value.ceil();
        let mut down = bounds;
        down[k].1 = value.floor();
        stack.push(up);
        stack.push(down);
    }
    Ok((MilpResult::Infeasible, stats))
}

fn strip_objective(lp: &LinearProgram) -> LinearProgram {
    let mut plain = LinearProgram::new(lp.num_vars());
    for j in 0..lp.num_vars() {
        plain.set_bounds(j, lp.lower(j).clone(), lp.upper(j).cloned());
    }
    for row in lp.constraints() {
        plain.add_constraint(row.terms.clone(), row.relation, row.rhs.clone());
    }
    plain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Relation;
    use crate::rational::{int, ratio};

    #[test]
    fn integral_relaxation_returned_immediately() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, int(0), Some(int(3)));
        lp.add_constraint(vec![(0, int(1))], Relation::Ge, int(2));
        let model = MilpModel::new(lp, [0]).unwrap();
        let (res, stats) = solve_milp_with_stats(&model, &MilpOptions::default()).unwrap();
        assert!(matches!(res, MilpResult::Feasible(ref p) if model.is_feasible_point(p)));
        assert_eq!(stats.nodes, 1);
    }

    #[test]
    fn no_integer_in_range() {
        let mut lp = LinearProgram::new(1);
        lp.set_bounds(0, ratio(1, 2), Some(ratio(1, 2)));
        let model = MilpModel::new(lp, [0]).unwrap();
        assert_eq!(solve_milp(&model, &MilpOptions::default()).unwrap(), MilpResult::Infeasible);
    }

    #[test]
    fn two_variable_equation() {
        let mut lp = LinearProgram::new(2);
        lp.set_bounds(0, int(0), Some(int(3)));
        lp.set_bounds(1, int(0), Some(int(3)));
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, int(3));
        lp.add_constraint(vec![(0, int(2)), (1, int(1))], Relation::Le, int(4));
        let model = MilpModel::new(lp, [0, 1]).unwrap();
        let MilpResult::Feasible(p) = solve_milp(&model, &MilpOptions::default()).unwrap() else { panic!() };
        assert!(model.is_feasible_point(&p));
        assert!(p == vec![int(1), int(2)] || p == vec![int(0), int(3)]);
    }

    #[test]
    fn branching_needed() {
        // 2x + 2y = 3 has no integral solution, but its relaxation does.
        let mut lp = LinearProgram::new(2);
        lp.set_bounds(0, int(0), Some(int(5)));
        lp.set_bounds(1, int(0), Some(int(5)));
        lp.add_constraint(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(3));
        let model = MilpModel::new(lp, [0, 1]).unwrap();
        let (res, stats) = solve_milp_with_stats(&model, &MilpOptions::default()).unwrap();
        assert_eq!(res, MilpResult::Infeasible);
        assert!(stats.nodes > 1);
    }

    #[test]
    fn budget_exhaustion() {
        let mut lp = LinearProgram::new(2);
        lp.set_bounds(0, int(0), Some(int(50)));
        lp.set_bounds(1, int(0), Some(int(50)));
        lp.add_constraint(vec![(0, int(2)), (1, int(2))], Relation::Eq, int(3));
        let model = MilpModel::new(lp, [0, 1]).unwrap();
        assert_eq!(
            solve_milp(&model, &MilpOptions { node_budget: 2 }),
            Err(MilpError::NodeLimitExceeded(2))
        );
    }

    #[test]
    fn mixed_variables() {
        // x integral, y continuous: x + y = 5/2, x >= 1, y <= 1
        let mut lp = LinearProgram::new(2);
        lp.set_bounds(0, int(0), Some(int(4)));
        lp.set_bounds(1, int(0), Some(int(1)));
        lp.add_constraint(vec![(0, int(1)), (1, int(1))], Relation::Eq, ratio(5, 2));
        lp.add_constraint(vec![(0, int(1))], Relation::Ge, int(1));
        let model = MilpModel::new(lp, [0]).unwrap();
        let MilpResult::Feasible(p) = solve_milp(&model, &MilpOptions::default()).unwrap() else { panic!() };
        assert_eq!(p[0], int(2));
        assert_eq!(p[1], ratio(1, 2));
    }

    #[test]
    fn unbounded_integral_rejected() {
        let lp = LinearProgram::new(1);
        assert_eq!(MilpModel::new(lp, [0]).unwrap_err(), MilpError::UnboundedIntegral(0));
    }
}
