//! Benchmark fixtures. The benches themselves live in `benches/`.

use eptas_core::suite::random_instance;
use eptas_core::Instance;

/// A fixed set of seeded instances small enough for every solver.
pub fn fixtures() -> Vec<(String, Instance)> {
    [3u64, 17, 42].iter().map(|&seed| (format!("seed-{seed}"), random_instance(seed, 3, 8, 4, 20))).collect()
}
