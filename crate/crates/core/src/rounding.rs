//! Geometric grids `base * q^x` and the grouping of jobs by rounded size.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Smallest grid point `base * (1 + eps)^x` (over all integers `x`) that is `>= p`.
/// Zero stays zero.
pub fn round_up_to_grid(p: &Rational, base: &Rational, eps: &Rational) -> Rational {
    if p.is_zero() {
        return Rational::zero();
    }
    let q = Rational::one() + eps;
    let mut point = base.clone();
    if point >= *p {
        loop {
            let below = &point / &q;
            if below >= *p {
                point = below;
            } else {
                return point;
            }
        }
    }
    while point < *p {
        point *= &q;
    }
    point
}

/// Largest grid point `base * (1 - eps)^x` (over all integers `x`) that is `<= p`.
/// Zero stays zero.
pub fn round_down_to_grid(p: &Rational, base: &Rational, eps: &Rational) -> Rational {
    if p.is_zero() {
        return Rational::zero();
    }
    let q = Rational::one() - eps;
    let mut point = base.clone();
    if point <= *p {
        loop {
            let above = &point / &q;
            if above <= *p {
                point = above;
            } else {
                return point;
            }
        }
    }
    while point > *p {
        point *= &q;
    }
    point
}

/// Rounded sizes per machine type split at a threshold, with the jobs of each size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeClasses {
    /// Per type, ascending sizes strictly above the threshold.
    pub big: Vec<Vec<Rational>>,
    /// Per type, ascending sizes at or below the threshold.
    pub small: Vec<Vec<Rational>>,
    /// Per type, size -> ascending job indices.
    pub groups: Vec<BTreeMap<Rational, Vec<usize>>>,
}

impl SizeClasses {
    /// `rounded[t][j]` is `None` when job `j` cannot run on type `t`.
    pub fn from_rounded(rounded: &[Vec<Option<Rational>>], threshold: &Rational) -> Self {
        let mut groups: Vec<BTreeMap<Rational, Vec<usize>>> = vec![BTreeMap::new(); rounded.len()];
        for (t, row) in rounded.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if let Some(p) = p {
                    groups[t].entry(p.clone()).or_default().push(j);
                }
            }
        }
        let big = groups.iter().map(|g| g.keys().filter(|p| *p > threshold).cloned().collect()).collect();
        let small = groups.iter().map(|g| g.keys().filter(|p| *p <= threshold).cloned().collect()).collect();
        SizeClasses { big, small, groups }
    }

    pub fn jobs(&self, machine_type: usize, size: &Rational) -> &[usize] {
        self.groups[machine_type].get(size).map_or(&[], |v| v.as_slice())
    }

    /// Per type, the number of jobs of each big size.
    pub fn big_caps(&self) -> Vec<Vec<u32>> {
        self.big
            .iter()
            .enumerate()
            .map(|(t, sizes)| sizes.iter().map(|p| self.jobs(t, p).len() as u32).collect())
            .collect()
    }

    pub fn is_big(&self, machine_type: usize, size: &Rational) -> bool {
        self.big[machine_type].binary_search(size).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn up_examples() {
        let half = ratio(1, 2);
        let base = ratio(1, 4);
        assert_eq!(round_up_to_grid(&ratio(1, 4), &base, &half), ratio(1, 4));
        assert_eq!(round_up_to_grid(&ratio(3, 10), &base, &half), ratio(3, 8));
        assert_eq!(round_up_to_grid(&ratio(1, 5), &base, &half), ratio(1, 4));
        assert_eq!(round_up_to_grid(&ratio(1, 7), &base, &half), ratio(1, 6));
        assert_eq!(round_up_to_grid(&int(0), &base, &half), int(0));
    }

    #[test]
    fn down_examples() {
        let half = ratio(1, 2);
        let base = ratio(1, 4);
        assert_eq!(round_down_to_grid(&ratio(1, 4), &base, &half), ratio(1, 4));
        assert_eq!(round_down_to_grid(&int(1), &base, &half), int(1));
        assert_eq!(round_down_to_grid(&ratio(3, 10), &base, &half), ratio(1, 4));
        assert_eq!(round_down_to_grid(&ratio(1, 5), &base, &half), ratio(1, 8));
        assert_eq!(round_down_to_grid(&int(0), &base, &half), int(0));
    }

    #[test]
    fn classes() {
        let rounded = vec![vec![Some(int(1)), Some(int(3)), None, Some(int(3))]];
        let c = SizeClasses::from_rounded(&rounded, &int(2));
        assert_eq!(c.big[0], vec![int(3)]);
        assert_eq!(c.small[0], vec![int(1)]);
        assert_eq!(c.jobs(0, &int(3)), &[1, 3]);
        assert_eq!(c.big_caps(), vec![vec![2]]);
    }
}
