#![allow(dead_code)]

use eptas_core::lp::{LinearProgram, Relation};
use eptas_core::milp::MilpModel;
use eptas_core::rational::{int, Rational};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum VertexOutcome {
    Infeasible,
    /// Optimal value and a point attaining it.
    Optimal(Rational, Vec<Rational>),
}

/// Exact optimum of a bounded LP by trying every basis: each choice of `n` tight hyperplanes
/// (rows or variable bounds) with a unique intersection is a candidate vertex.
/// Requires finite upper bounds on every variable, so the feasible set is a polytope.
pub fn vertex_enumeration(lp: &LinearProgram) -> VertexOutcome {
    let n = lp.num_vars();
    assert!((0..n).all(|j| lp.upper(j).is_some()), "vertex enumeration needs a bounded box");
    let mut planes: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for row in lp.constraints() {
        let mut a = vec![Rational::zero(); n];
        for (j, c) in &row.terms {
            a[*j] = c.clone();
        }
        planes.push((a, row.rhs.clone()));
    }
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        planes.push((e.clone(), lp.lower(j).clone()));
        planes.push((e, lp.upper(j).unwrap().clone()));
    }

    let mut best: Option<(Rational, Vec<Rational>)> = None;
    let mut chosen = Vec::with_capacity(n);
    for_each_subset(planes.len(), n, 0, &mut chosen, &mut |subset| {
        let rows: Vec<Vec<Rational>> = subset.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<Rational> = subset.iter().map(|&i| planes[i].1.clone()).collect();
        let Some(point) = solve_square(rows, rhs) else { return };
        if !lp.is_feasible_point(&point) {
            return;
        }
        let value = lp.objective_value(&point);
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, point));
        }
    });
    match best {
        Some((v, p)) => VertexOutcome::Optimal(v, p),
        None => VertexOutcome::Infeasible,
    }
}

fn for_each_subset(total: usize, size: usize, start: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if chosen.len() == size {
        f(chosen);
        return;
    }
    for i in start..total {
        chosen.push(i);
        for_each_subset(total, size, i + 1, chosen, f);
        chosen.pop();
    }
}

/// Unique solution of a square system by exact Gauss-Jordan elimination.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        for c in col..n {
            a[col][c] = &a[col][c] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
                let delta = &f * &b[col];
                b[r] -= delta;
            }
        }
    }
    Some(b)
}

/// A random LP with 1-4 variables in boxes `[0, u]`, 0-6 rows with small integer coefficients,
/// and a minimisation objective.
pub fn random_lp(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=4);
    let mut lp = LinearProgram::new(n);
    for j in 0..n {
        let lower = int(rng.gen_range(0..=1));
        let upper = &lower + int(rng.gen_range(0..=6));
        lp.set_bounds(j, lower, Some(upper));
    }
    for _ in 0..rng.gen_range(0..=6) {
        let coefs: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(-3..=3))).collect();
        let relation = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.add_dense_constraint(&coefs, relation, int(rng.gen_range(-4..=12)));
    }
    lp.minimize((0..n).map(|j| (j, int(rng.gen_range(-5..=5)))).collect());
    lp
}

/// Feasibility by enumerating every integral assignment in the box, then checking the
/// continuous part by vertex enumeration.
pub fn brute_force_milp(model: &MilpModel) -> bool {
    let lp = model.lp();
    let vars: Vec<usize> = model.integral_vars().collect();
    let ranges: Vec<(i64, i64)> = vars
        .iter()
        .map(|&j| {
            let lo = lp.lower(j).ceil().to_integer().try_into().unwrap();
            let hi = lp.upper(j).unwrap().floor().to_integer().try_into().unwrap();
            (lo, hi)
        })
        .collect();
    let mut values: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return false;
    }
    loop {
        let mut fixed = lp.clone();
        for (k, &j) in vars.iter().enumerate() {
            fixed.set_bounds(j, int(values[k]), Some(int(values[k])));
        }
        if matches!(vertex_enumeration(&fixed), VertexOutcome::Optimal(..)) {
            return true;
        }
        let mut k = 0;
        loop {
            if k == vars.len() {
                return false;
            }
            if values[k] < ranges[k].1 {
                values[k] += 1;
                break;
            }
            values[k] = ranges[k].0;
            k += 1;
        }
    }
}
