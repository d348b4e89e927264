//! Configurations: how many big jobs of each size one machine receives.

use num_traits::Zero;

use crate::rational::{floor_int, Rational};
use num_traits::ToPrimitive;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("more than {limit} configurations")]
pub struct ConfigExplosion {
    pub limit: usize,
}

/// Counts aligned with a list of big sizes owned by the caller.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub counts: Vec<u32>,
    pub size: Rational,
}

impl Configuration {
    pub fn empty(sizes: usize) -> Self {
        Configuration { counts: vec![0; sizes], size: Rational::zero() }
    }

    pub fn items(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn from_counts(counts: Vec<u32>, sizes: &[Rational]) -> Self {
        let size = counts.iter().zip(sizes).map(|(&c, p)| p * Rational::from_integer(c.into())).sum();
        Configuration { counts, size }
    }
}

/// `floor(1 / eps^2)`: no machine holds more big jobs than this.
pub fn max_items(eps: &Rational) -> u32 {
    let inv = (eps * eps).recip();
    floor_int(&inv).to_u32().expect("1/eps^2 fits in u32")
}

/// Every configuration over `big_sizes` with size at most `bound`, at most `floor(1/eps^2)`
/// jobs in total.
pub fn enumerate_configurations(
    big_sizes: &[Rational],
    bound: &Rational,
    eps: &Rational,
    limit: usize,
) -> Result<Vec<Configuration>, ConfigExplosion> {
    let caps = vec![u32::MAX; big_sizes.len()];
    enumerate_configurations_capped(big_sizes, &caps, bound, max_items(eps), limit)
}

/// As [`enumerate_configurations`], with a per-size count cap (typically the number of jobs of
/// that size) and an explicit total item cap.
///
/// Depth-first over sizes in decreasing order; for each size the count runs upward from 0.
/// The empty configuration always comes first.
pub fn enumerate_configurations_capped(
    big_sizes: &[Rational],
    caps: &[u32],
    bound: &Rational,
    item_cap: u32,
    limit: usize,
) -> Result<Vec<Configuration>, ConfigExplosion> {
    assert_eq!(big_sizes.len(), caps.len());
    let mut order: Vec<usize> = (0..big_sizes.len()).collect();
    order.sort_by(|&a, &b| big_sizes[b].cmp(&big_sizes[a]).then(a.cmp(&b)));

    let mut out = Vec::new();
    let mut counts = vec![0u32; big_sizes.len()];
    let mut walk = Walk { sizes: big_sizes, caps, order: &order, bound, limit, out: &mut out };
    walk.descend(0, &mut counts, Rational::zero(), item_cap)?;
    Ok(out)
}

struct Walk<'a> {
    sizes: &'a [Rational],
    caps: &'a [u32],
    order: &'a [usize],
    bound: &'a Rational,
    limit: usize,
    out: &'a mut Vec<Configuration>,
}

impl Walk<'_> {
    fn descend(&mut self, depth: usize, counts: &mut [u32], size: Rational, items_left: u32) -> Result<(), ConfigExplosion> {
        if depth == self.order.len() {
            if self.out.len() >= self.limit {
                return Err(ConfigExplosion { limit: self.limit });
            }
            self.out.push(Configuration { counts: counts.to_vec(), size });
            return Ok(());
        }
        let k = self.order[depth];
        let mut current = size;
        let mut c = 0u32;
        loop {
            counts[k] = c;
            self.descend(depth + 1, counts, current.clone(), items_left - c)?;
            if c == self.caps[k] || c == items_left {
                break;
            }
            current += &self.sizes[k];
            if current > *self.bound {
                break;
            }
            c += 1;
        }
        counts[k] = 0;
        Ok(())
    }
}
