//! Seeded instance suites and the ratio table produced by running algorithms over them.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::baseline::{greedy_bound, lst_two_approx};
use crate::instance::{evaluate_makespan, evaluate_min_load, generate_instance, Instance, Schedule};
use crate::makespan::solve_makespan;
use crate::oracle::{brute_force_makespan, brute_force_min_load, OracleLimits};
use crate::pipeline::{EptasParams, SolveError};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::santa::solve_santa;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    /// Makespan approximation scheme.
    Eptas,
    /// Max-min approximation scheme.
    Santa,
    Greedy,
    Lp2,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Eptas => "eptas",
            Algo::Santa => "santa",
            Algo::Greedy => "greedy",
            Algo::Lp2 => "lp2",
        }
    }

    fn uses_epsilon(self) -> bool {
        matches!(self, Algo::Eptas | Algo::Santa)
    }
}

/// Shape of a random suite. Instance `i` is drawn from seed `first_seed + i`.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSpec {
    pub instances: usize,
    #[serde(default)]
    pub first_seed: u64,
    #[serde(default = "default_max_types")]
    pub max_types: usize,
    #[serde(default = "default_max_jobs")]
    pub max_jobs: usize,
    #[serde(default = "default_max_machines")]
    pub max_machines: usize,
    #[serde(default = "default_p_max")]
    pub p_max: u64,
    /// Rational literals such as `"1/4"`.
    #[serde(default)]
    pub epsilons: Vec<String>,
    pub algos: Vec<Algo>,
}

fn default_max_types() -> usize {
    3
}

fn default_max_jobs() -> usize {
    8
}

fn default_max_machines() -> usize {
    4
}

fn default_p_max() -> u64 {
    20
}

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("invalid suite: {0}")]
    Spec(String),
    #[error("{instance}: {source}")]
    Solve { instance: String, source: SolveError },
}

impl SuiteSpec {
    pub fn from_json(text: &str) -> Result<Self, SuiteError> {
        let spec: SuiteSpec = serde_json::from_str(text).map_err(|e| SuiteError::Spec(e.to_string()))?;
        if spec.max_types == 0 || spec.max_machines < spec.max_types || spec.p_max == 0 {
            return Err(SuiteError::Spec("need 1 <= max_types <= max_machines and p_max >= 1".into()));
        }
        if spec.algos.iter().any(|a| a.uses_epsilon()) && spec.epsilons.is_empty() {
            return Err(SuiteError::Spec("approximation schemes need at least one epsilon".into()));
        }
        spec.parsed_epsilons()?;
        Ok(spec)
    }

    pub fn parsed_epsilons(&self) -> Result<Vec<Rational>, SuiteError> {
        self.epsilons
            .iter()
            .map(|e| {
                let eps = parse_rational(e).map_err(|err| SuiteError::Spec(err.to_string()))?;
                EptasParams::new(eps.clone()).map_err(|err| SuiteError::Spec(err.to_string()))?;
                Ok(eps)
            })
            .collect()
    }
}

/// A random instance: `K` uniform in `[1, max_types]`, `m` uniform in `[K, max_machines]` with
/// every type getting at least one machine, `n` uniform in `[1, max_jobs]`, and integer times
/// uniform in `[1, p_max]`.
pub fn random_instance(seed: u64, max_types: usize, max_jobs: usize, max_machines: usize, p_max: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let types = rng.gen_range(1..=max_types);
    let machines = rng.gen_range(types..=max_machines);
    let mut mults = vec![1usize; types];
    for _ in types..machines {
        mults[rng.gen_range(0..types)] += 1;
    }
    let jobs = rng.gen_range(1..=max_jobs);
    generate_instance(types, jobs, &mults, p_max, rng.gen()).expect("valid generated shape")
}

pub fn suite_instances(spec: &SuiteSpec) -> Vec<(String, Instance)> {
    (0..spec.instances as u64)
        .map(|i| {
            let seed = spec.first_seed + i;
            let inst = random_instance(seed, spec.max_types, spec.max_jobs, spec.max_machines, spec.p_max);
            (format!("seed-{seed}"), inst)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance_id: String,
    pub algo: Algo,
    pub epsilon: Option<Rational>,
    pub objective: Rational,
    /// Exact optimum, when the instance is small enough for the oracle.
    pub oracle: Option<Rational>,
    /// `objective / oracle`, when the oracle value is known and positive.
    pub ratio: Option<Rational>,
    pub wall_ms: u128,
    pub schedule: Schedule,
}

pub const CSV_HEADER: [&str; 7] = ["instance-id", "algo", "epsilon", "objective", "oracle", "ratio", "wall-ms"];

impl BenchRow {
    /// CSV fields in [`CSV_HEADER`] order; numbers are exact `p/q` literals.
    pub fn record(&self) -> [String; 7] {
        let opt = |r: &Option<Rational>| r.as_ref().map(format_rational).unwrap_or_default();
        [
            self.instance_id.clone(),
            self.algo.name().to_string(),
            opt(&self.epsilon),
            format_rational(&self.objective),
            opt(&self.oracle),
            opt(&self.ratio),
            self.wall_ms.to_string(),
        ]
    }
}

/// Runs every algorithm (and every epsilon, for the schemes) on every instance of the suite.
pub fn run_suite(spec: &SuiteSpec) -> Result<Vec<BenchRow>, SuiteError> {
    let epsilons = spec.parsed_epsilons()?;
    let mut rows = Vec::new();
    for (id, inst) in suite_instances(spec) {
        let limits = OracleLimits::default();
        let opt_makespan = brute_force_makespan(&inst, limits).ok().map(|(v, _)| v);
        let opt_min_load = brute_force_min_load(&inst, limits).ok().map(|(v, _)| v);
        for &algo in &spec.algos {
            let eps_list: Vec<Option<&Rational>> =
                if algo.uses_epsilon() { epsilons.iter().map(Some).collect() } else { vec![None] };
            for eps in eps_list {
                let start = Instant::now();
                let schedule = run_algo(&inst, algo, eps).map_err(|source| SuiteError::Solve { instance: id.clone(), source })?;
                let wall_ms = start.elapsed().as_millis();
                let (objective, oracle) = match algo {
                    Algo::Santa => (evaluate_min_load(&inst, &schedule), opt_min_load.clone()),
                    _ => (evaluate_makespan(&inst, &schedule), opt_makespan.clone()),
                };
                let objective = objective.expect("solvers emit valid schedules");
                let ratio = oracle.as_ref().filter(|o| **o > Rational::from_integer(0.into())).map(|o| &objective / o);
                rows.push(BenchRow {
                    instance_id: id.clone(),
                    algo,
                    epsilon: eps.cloned(),
                    objective,
                    oracle,
                    ratio,
                    wall_ms,
                    schedule,
                });
            }
        }
    }
    Ok(rows)
}

fn run_algo(inst: &Instance, algo: Algo, eps: Option<&Rational>) -> Result<Schedule, SolveError> {
    let params = || EptasParams::new(eps.expect("schemes run with an epsilon").clone());
    match algo {
        Algo::Eptas => solve_makespan(inst, &params()?),
        Algo::Santa => solve_santa(inst, &params()?),
        Algo::Greedy => Ok(greedy_bound(inst).0),
        Algo::Lp2 => Ok(lst_two_approx(inst)),
    }
}

/// Header plus one line per row.
pub fn write_csv<W: std::io::Write>(out: W, rows: &[BenchRow]) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record(row.record())?;
    }
    writer.flush()?;
    Ok(())
}
