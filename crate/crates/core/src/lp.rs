//! Exact linear programming over rationals.
//!
//! Two-phase primal simplex in revised form: the basis inverse is kept as a dense rational
//! matrix and variable bounds are handled implicitly (nonbasic variables sit at their lower or
//! upper bound), so bounds never become rows. Pivoting follows Bland's rule for both the
//! entering and the leaving variable, which rules out cycling.
//!
//! Infeasibility comes with a certificate that can be checked independently of the solver, see
//! [`InfeasibilityCertificate::verify`].

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

/// One row `sum(coef * x) rel rhs`, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

impl Constraint {
    pub fn activity(&self, point: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, a)| a * &point[*j]).sum()
    }

    pub fn is_satisfied(&self, point: &[Rational]) -> bool {
        let lhs = self.activity(point);
        match self.relation {
            Relation::Le => lhs <= self.rhs,
            Relation::Eq => lhs == self.rhs,
            Relation::Ge => lhs >= self.rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Minimize `sum(coef * x)`; sparse.
    Minimize(Vec<(usize, Rational)>),
    /// Any feasible point will do.
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    constraints: Vec<Constraint>,
    objective: Objective,
}

impl LinearProgram {
    /// A feasibility program with `num_vars` variables in `[0, inf)` and no rows.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            lower: vec![Rational::zero(); num_vars],
            upper: vec![None; num_vars],
            constraints: Vec::new(),
            objective: Objective::Feasibility,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.lower.len()
    }

    pub fn add_variable(&mut self, lower: Rational, upper: Option<Rational>) -> usize {
        self.lower.push(lower);
        self.upper.push(upper);
        self.lower.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, lower: Rational, upper: Option<Rational>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    pub fn lower(&self, var: usize) -> &Rational {
        &self.lower[var]
    }

    pub fn upper(&self, var: usize) -> Option<&Rational> {
        self.upper[var].as_ref()
    }

    /// Adds a row from sparse terms. Repeated indices are summed, zero coefficients dropped.
    pub fn add_constraint(&mut self, terms: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) {
        let terms = self.normalize_terms(terms);
        self.constraints.push(Constraint { terms, relation, rhs });
    }

    /// Adds a row from a dense coefficient vector whose length must equal the variable count.
    pub fn add_dense_constraint(&mut self, coefficients: &[Rational], relation: Relation, rhs: Rational) {
        assert_eq!(coefficients.len(), self.num_vars(), "coefficient vector length");
        let terms = coefficients.iter().cloned().enumerate().collect();
        self.add_constraint(terms, relation, rhs);
    }

    pub fn minimize(&mut self, terms: Vec<(usize, Rational)>) {
        let terms = self.normalize_terms(terms);
        self.objective = Objective::Minimize(terms);
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &Objective {
        &self.objective
    }

    fn normalize_terms(&self, terms: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
        let mut terms = terms;
        terms.sort_by_key(|(j, _)| *j);
        let mut out: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            assert!(j < self.num_vars(), "variable {j} out of range");
            match out.last_mut() {
                Some((last, acc)) if *last == j => *acc += a,
                _ => out.push((j, a)),
            }
        }
        out.retain(|(_, a)| !a.is_zero());
        out
    }

    pub fn objective_value(&self, point: &[Rational]) -> Rational {
        match &self.objective {
            Objective::Minimize(c) => c.iter().map(|(j, a)| a * &point[*j]).sum(),
            Objective::Feasibility => Rational::zero(),
        }
    }

    /// Exact check of bounds and every row.
    pub fn is_feasible_point(&self, point: &[Rational]) -> bool {
        point.len() == self.num_vars()
            && point.iter().enumerate().all(|(j, v)| {
                *v >= self.lower[j] && self.upper[j].as_ref().map_or(true, |u| v <= u)
            })
            && self.constraints.iter().all(|c| c.is_satisfied(point))
    }
}

/// Proof that a [`LinearProgram`] has no feasible point.
#[derive(Debug, Clone, PartialEq)]
pub enum InfeasibilityCertificate {
    /// Some variable has `lower > upper`.
    EmptyBounds { variable: usize },
    /// Row multipliers `y` (nonpositive on `<=` rows, nonnegative on `>=` rows) such that the
    /// maximum of `(y^T A) x` over the variable box is below `y^T b`. Every feasible `x` would
    /// satisfy `(y^T A) x >= y^T b`, so none exists.
    Farkas { multipliers: Vec<Rational> },
}

impl InfeasibilityCertificate {
    pub fn verify(&self, lp: &LinearProgram) -> bool {
        match self {
            InfeasibilityCertificate::EmptyBounds { variable } => lp
                .upper
                .get(*variable)
                .and_then(|u| u.as_ref())
                .map_or(false, |u| *u < lp.lower[*variable]),
            InfeasibilityCertificate::Farkas { multipliers } => {
                if multipliers.len() != lp.constraints.len() {
                    return false;
                }
                let mut combined = vec![Rational::zero(); lp.num_vars()];
                let mut rhs = Rational::zero();
                for (y, row) in multipliers.iter().zip(&lp.constraints) {
                    let sign_ok = match row.relation {
                        Relation::Le => !y.is_positive(),
                        Relation::Ge => !y.is_negative(),
                        Relation::Eq => true,
                    };
                    if !sign_ok {
                        return false;
                    }
                    if y.is_zero() {
                        continue;
                    }
                    for (j, a) in &row.terms {
                        combined[*j] += y * a;
                    }
                    rhs += y * &row.rhs;
                }
                let mut box_max = Rational::zero();
                for (j, g) in combined.iter().enumerate() {
                    if g.is_positive() {
                        match &lp.upper[j] {
                            Some(u) => box_max += g * u,
                            None => return false,
                        }
                    } else if g.is_negative() {
                        box_max += g * &lp.lower[j];
                    }
                }
                box_max < rhs
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpResult {
    /// A basic optimal (for feasibility programs: basic feasible) point and its objective value.
    Optimal { point: Vec<Rational>, value: Rational },
    Infeasible(InfeasibilityCertificate),
    Unbounded,
}

impl LpResult {
    pub fn point(&self) -> Option<&[Rational]> {
        match self {
            LpResult::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }
}

/// Solves `lp` exactly.
pub fn solve_lp(lp: &LinearProgram) -> LpResult {
    if let Some(variable) = (0..lp.num_vars())
        .find(|&j| lp.upper[j].as_ref().map_or(false, |u| *u < lp.lower[j]))
    {
        return LpResult::Infeasible(InfeasibilityCertificate::EmptyBounds { variable });
    }

    let mut tab = Tableau::phase_one(lp);
    if tab.has_artificials() {
        let cost = tab.artificial_cost();
        let outcome = tab.run(&cost);
        debug_assert!(matches!(outcome, Pivoting::Optimal), "phase one is bounded below");
        let infeasibility: Rational = tab.artificial_value();
        if infeasibility.is_positive() {
            let multipliers = tab.duals(&cost);
            return LpResult::Infeasible(InfeasibilityCertificate::Farkas { multipliers });
        }
        tab.pin_artificials();
    }

    if let Objective::Minimize(c) = &lp.objective {
        let mut cost = vec![Rational::zero(); tab.num_cols()];
        for (j, a) in c {
            cost[*j] = a.clone();
        }
        if let Pivoting::Unbounded = tab.run(&cost) {
            return LpResult::Unbounded;
        }
    }

    let point: Vec<Rational> = tab.x[..lp.num_vars()].to_vec();
    let value = lp.objective_value(&point);
    LpResult::Optimal { point, value }
}

enum Pivoting {
    Optimal,
    Unbounded,
}

struct Tableau {
    rows: usize,
    first_artificial: usize,
    cols: Vec<Vec<(usize, Rational)>>,
    lower: Vec<Rational>,
    upper: Vec<Option<Rational>>,
    x: Vec<Rational>,
    at_upper: Vec<bool>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    binv: Vec<Vec<Rational>>,
}

impl Tableau {
    /// Structural variables start at their lower bounds; each row gets a basic slack when the
    /// residual has the right sign, otherwise an artificial variable.
    fn phase_one(lp: &LinearProgram) -> Self {
        let rows = lp.constraints.len();
        let structural = lp.num_vars();
        let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); structural];
        for (i, row) in lp.constraints.iter().enumerate() {
            for (j, a) in &row.terms {
                cols[*j].push((i, a.clone()));
            }
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut x = lp.lower.clone();
        let mut at_upper = vec![false; structural];

        let residual: Vec<Rational> = lp.constraints.iter().map(|row| &row.rhs - row.activity(&x)).collect();

        let mut basis = vec![usize::MAX; rows];
        let mut diag = vec![Rational::one(); rows];
        for (i, row) in lp.constraints.iter().enumerate() {
            let sign = match row.relation {
                Relation::Le => Some(Rational::one()),
                Relation::Ge => Some(-Rational::one()),
                Relation::Eq => None,
            };
            if let Some(sign) = sign {
                let value = &residual[i] * &sign;
                let basic = !value.is_negative();
                cols.push(vec![(i, sign.clone())]);
                lower.push(Rational::zero());
                upper.push(None);
                at_upper.push(false);
                if basic {
                    x.push(value);
                    basis[i] = cols.len() - 1;
                    diag[i] = sign;
                } else {
                    x.push(Rational::zero());
                }
            }
        }
        let first_artificial = cols.len();
        for i in 0..rows {
            if basis[i] != usize::MAX {
                continue;
            }
            let sign = if residual[i].is_negative() { -Rational::one() } else { Rational::one() };
            cols.push(vec![(i, sign.clone())]);
            lower.push(Rational::zero());
            upper.push(None);
            at_upper.push(false);
            x.push(residual[i].abs());
            basis[i] = cols.len() - 1;
            diag[i] = sign;
        }

        let mut basic_row = vec![None; cols.len()];
        for (i, &b) in basis.iter().enumerate() {
            basic_row[b] = Some(i);
        }
        // B is diagonal with +-1 entries, so it is its own inverse.
        let binv = (0..rows)
            .map(|i| {
                let mut r = vec![Rational::zero(); rows];
                r[i] = diag[i].clone();
                r
            })
            .collect();

        Tableau { rows, first_artificial, cols, lower, upper, x, at_upper, basis, basic_row, binv }
    }

    fn num_cols(&self) -> usize {
        self.cols.len()
    }

    fn has_artificials(&self) -> bool {
        self.first_artificial < self.cols.len()
    }

    fn artificial_cost(&self) -> Vec<Rational> {
        (0..self.cols.len())
            .map(|j| if j >= self.first_artificial { Rational::one() } else { Rational::zero() })
            .collect()
    }

    fn artificial_value(&self) -> Rational {
        self.x[self.first_artificial..].iter().sum()
    }

    /// Artificials are fixed at zero for phase two; basic ones stay in the basis at level zero.
    fn pin_artificials(&mut self) {
        for j in self.first_artificial..self.cols.len() {
            self.upper[j] = Some(Rational::zero());
        }
    }

    /// Row prices `c_B^T B^{-1}`.
    fn duals(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut pi = vec![Rational::zero(); self.rows];
        for (i, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (k, v) in self.binv[i].iter().enumerate() {
                if !v.is_zero() {
                    pi[k] += &cost[b] * v;
                }
            }
        }
        pi
    }

    fn reduced_cost(&self, j: usize, cost: &[Rational], pi: &[Rational]) -> Rational {
        let mut d = cost[j].clone();
        for (r, a) in &self.cols[j] {
            if !pi[*r].is_zero() {
                d -= &pi[*r] * a;
            }
        }
        d
    }

    fn can_move(&self, j: usize) -> bool {
        self.upper[j].as_ref().map_or(true, |u| *u > self.lower[j])
    }

    /// Bland: the lowest-index nonbasic column whose move along its feasible direction
    /// improves the objective. Returns the column and whether it increases.
    fn entering(&self, cost: &[Rational], pi: &[Rational]) -> Option<(usize, bool)> {
        (0..self.cols.len()).find_map(|j| {
            if self.basic_row[j].is_some() || !self.can_move(j) {
                return None;
            }
            let d = self.reduced_cost(j, cost, pi);
            if !self.at_upper[j] && d.is_negative() {
                Some((j, true))
            } else if self.at_upper[j] && d.is_positive() {
                Some((j, false))
            } else {
                None
            }
        })
    }

    fn column_in_basis(&self, j: usize) -> Vec<Rational> {
        let mut alpha = vec![Rational::zero(); self.rows];
        for (r, a) in &self.cols[j] {
            for (i, row) in self.binv.iter().enumerate() {
                let v = &row[*r];
                if !v.is_zero() {
                    alpha[i] += v * a;
                }
            }
        }
        alpha
    }

    fn run(&mut self, cost: &[Rational]) -> Pivoting {
        loop {
            let pi = self.duals(cost);
            let Some((enter, increase)) = self.entering(cost, &pi) else {
                return Pivoting::Optimal;
            };
            let alpha = self.column_in_basis(enter);

            // Basic x_B moves by -delta * alpha when x_enter moves by +delta.
            let mut best: Option<(Rational, usize, bool)> = None;
            for (i, a) in alpha.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let b = self.basis[i];
                let falls = a.is_positive() == increase;
                let limit = if falls {
                    (&self.x[b] - &self.lower[b]) / a.abs()
                } else {
                    match &self.upper[b] {
                        Some(u) => (u - &self.x[b]) / a.abs(),
                        None => continue,
                    }
                };
                let better = match &best {
                    None => true,
                    Some((l, col, _)) => limit < *l || (limit == *l && b < *col),
                };
                if better {
                    best = Some((limit, b, !falls));
                }
            }
            let flip = self.upper[enter].as_ref().map(|u| u - &self.lower[enter]);

            let step = match (&flip, &best) {
                (Some(f), Some((l, _, _))) if f <= l => f.clone(),
                (Some(f), None) => f.clone(),
                (_, Some((l, _, _))) => l.clone(),
                (None, None) => return Pivoting::Unbounded,
            };
            let flipping = match (&flip, &best) {
                (Some(f), Some((l, _, _))) => f <= l,
                (Some(_), None) => true,
                _ => false,
            };

            let signed = if increase { step.clone() } else { -step.clone() };
            if !signed.is_zero() {
                self.x[enter] += &signed;
                for (i, a) in alpha.iter().enumerate() {
                    if !a.is_zero() {
                        let b = self.basis[i];
                        self.x[b] -= &signed * a;
                    }
                }
            }

            if flipping {
                self.at_upper[enter] = increase;
                // Snap exactly onto the bound.
                self.x[enter] = if increase {
                    self.upper[enter].clone().expect("flip needs a finite upper bound")
                } else {
                    self.lower[enter].clone()
                };
                continue;
            }

            let (_, leaving, to_upper) = best.expect("pivot needs a leaving variable");
            let r = self.basic_row[leaving].expect("leaving variable is basic");
            self.x[leaving] = if to_upper {
                self.upper[leaving].clone().expect("finite upper bound")
            } else {
                self.lower[leaving].clone()
            };
            self.at_upper[leaving] = to_upper;
            self.basic_row[leaving] = None;
            self.basic_row[enter] = Some(r);
            self.basis[r] = enter;
            self.at_upper[enter] = false;

            let pivot = alpha[r].clone();
            let pivot_row: Vec<Rational> = self.binv[r].iter().map(|v| v / &pivot).collect();
            for (i, a) in alpha.iter().enumerate() {
                if i == r || a.is_zero() {
                    continue;
                }
                for (k, pv) in pivot_row.iter().enumerate() {
                    if !pv.is_zero() {
                        self.binv[i][k] -= a * pv;
                    }
                }
            }
            self.binv[r] = pivot_row;
        }
    }
}
