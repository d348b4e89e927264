//! Acceptance gate: every guarantee checked exactly against brute-force optima on a seeded
//! suite of small instances. Prints one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::sync::Mutex;

use eptas_core::baseline::{greedy_bound, lst_two_approx};
use eptas_core::config::{max_items, Configuration};
use eptas_core::lp::{solve_lp, LpResult};
use eptas_core::makespan::{
    check_assignment, makespan_slack, solve_makespan, solve_makespan_observed, try_makespan_traced,
};
use eptas_core::oracle::{brute_force_makespan, brute_force_min_load, OracleLimits};
use eptas_core::pipeline::{EptasParams, TryReport, TryTrace};
use eptas_core::rational::{format_rational, ratio, Rational};
use eptas_core::santa::{santa_slack, solve_santa, solve_santa_observed};
use eptas_core::suite::{random_instance, run_suite, SuiteSpec};
use eptas_core::{evaluate_makespan, evaluate_min_load, Instance};
use num_traits::One;

use common::{random_lp, vertex_enumeration, VertexOutcome};

const INSTANCES: u64 = 200;
const LPS: u64 = 100;
const DETERMINISM_INSTANCES: u64 = 25;

const NAMES: [&str; 9] = [
    "makespan guarantee",
    "completeness at the optimum",
    "rounding flow saturates every job",
    "integral assignment slack",
    "max-min guarantee and demand flows",
    "baselines",
    "configuration bounds and completeness",
    "exact LP against vertex enumeration",
    "determinism",
];

#[derive(Default)]
struct Tally {
    checks: [u64; 9],
    failures: [Vec<String>; 9],
}

impl Tally {
    fn check(&mut self, criterion: usize, ok: bool, what: impl FnOnce() -> String) {
        self.checks[criterion - 1] += 1;
        if !ok {
            self.failures[criterion - 1].push(what());
        }
    }

    fn merge(&mut self, other: Tally) {
        for (i, f) in other.failures.into_iter().enumerate() {
            self.checks[i] += other.checks[i];
            self.failures[i].extend(f);
        }
    }
}

fn epsilons() -> [Rational; 3] {
    [ratio(1, 2), ratio(1, 3), ratio(1, 4)]
}

fn suite() -> Vec<(u64, Instance)> {
    (0..INSTANCES).map(|seed| (seed, random_instance(seed, 3, 8, 4, 20))).collect()
}

/// `{C in prod [0, min(item_cap, cap_p)] : sum C <= item_cap, size(C) <= bound}` by odometer.
fn naive_configurations(sizes: &[Rational], caps: &[u32], bound: &Rational, item_cap: u32) -> BTreeSet<Vec<u32>> {
    let limits: Vec<u32> = caps.iter().map(|&c| c.min(item_cap)).collect();
    let mut counts = vec![0u32; sizes.len()];
    let mut out = BTreeSet::new();
    loop {
        let config = Configuration::from_counts(counts.clone(), sizes);
        if config.items() <= item_cap && config.size <= *bound {
            out.insert(counts.clone());
        }
        let mut k = 0;
        loop {
            if k == counts.len() {
                return out;
            }
            if counts[k] < limits[k] {
                counts[k] += 1;
                break;
            }
            counts[k] = 0;
            k += 1;
        }
    }
}

fn check_configurations(tally: &mut Tally, label: &str, report: &TryReport) {
    let eps = &report.rounded.epsilon;
    let item_cap = max_items(eps);
    let caps = report.rounded.classes.big_caps();
    for (t, configs) in report.configurations.iter().enumerate() {
        for c in configs {
            tally.check(7, c.items() <= item_cap && c.size <= report.bound, || {
                format!("{label}: type {t} configuration {:?} breaks a bound", c.counts)
            });
        }
        let sizes = &report.rounded.classes.big[t];
        if sizes.len() <= 4 {
            let listed: Vec<Vec<u32>> = configs.iter().map(|c| c.counts.clone()).collect();
            let unique: BTreeSet<Vec<u32>> = listed.iter().cloned().collect();
            let naive = naive_configurations(sizes, &caps[t], &report.bound, item_cap);
            tally.check(7, unique.len() == listed.len() && unique == naive, || {
                format!("{label}: type {t} enumeration differs from the product filter")
            });
        }
    }
}

fn check_makespan_report(tally: &mut Tally, label: &str, inst: &Instance, report: &TryReport) {
    check_configurations(tally, label, report);
    if let TryTrace::Scheduled { flow, assignment, schedule } = &report.outcome {
        tally.check(3, flow.value == inst.num_jobs() as u64, || {
            format!("{label}: flow value {} for {} jobs", flow.value, inst.num_jobs())
        });
        let verdict = check_assignment(&report.rounded, &report.configurations, assignment);
        tally.check(4, verdict.is_ok(), || format!("{label}: {}", verdict.unwrap_err()));
        let makespan = evaluate_makespan(inst, schedule).unwrap();
        let bound = makespan_slack(&report.rounded.epsilon) * &report.target;
        tally.check(1, makespan <= bound, || {
            format!("{label}: try at {} gave makespan {}", format_rational(&report.target), format_rational(&makespan))
        });
    }
}

fn check_santa_report(tally: &mut Tally, label: &str, inst: &Instance, report: &TryReport) {
    check_configurations(tally, label, report);
    if let TryTrace::Scheduled { flow, schedule, .. } = &report.outcome {
        tally.check(5, flow.value == inst.num_jobs() as u64, || format!("{label}: demand flow value {}", flow.value));
        let load = evaluate_min_load(inst, schedule).unwrap();
        let bound = santa_slack(&report.rounded.epsilon) * &report.target;
        tally.check(5, load >= bound, || {
            format!("{label}: try at {} gave min load {}", format_rational(&report.target), format_rational(&load))
        });
    }
}

fn run_instance(seed: u64, inst: &Instance) -> Tally {
    let mut tally = Tally::default();
    let limits = OracleLimits::default();
    let (opt, _) = brute_force_makespan(inst, limits).unwrap();
    let (opt_min, _) = brute_force_min_load(inst, limits).unwrap();

    let lst = evaluate_makespan(inst, &lst_two_approx(inst)).unwrap();
    tally.check(6, lst <= Rational::from_integer(2.into()) * &opt, || format!("seed {seed}: 2-approximation gave {lst}"));
    let (_, greedy) = greedy_bound(inst);
    tally.check(6, greedy >= opt, || format!("seed {seed}: greedy {greedy} below optimum"));

    for eps in epsilons() {
        let label = format!("seed {seed}, eps {}", format_rational(&eps));
        let params = EptasParams::new(eps.clone()).unwrap();

        let mut reports = Vec::new();
        match solve_makespan_observed(inst, &params, &mut |r| reports.push(r.clone())) {
            Ok(schedule) => {
                let makespan = evaluate_makespan(inst, &schedule).unwrap();
                let bound = makespan_slack(&eps) * (Rational::one() + &eps) * &opt;
                tally.check(1, makespan <= bound, || {
                    format!("{label}: makespan {} against optimum {}", format_rational(&makespan), format_rational(&opt))
                });
            }
            Err(e) => tally.check(1, false, || format!("{label}: {e}")),
        }
        match try_makespan_traced(inst, &opt, &params) {
            Ok(report) => {
                tally.check(2, report.schedule().is_some(), || format!("{label}: no schedule at the optimum"));
                reports.push(report);
            }
            Err(e) => tally.check(2, false, || format!("{label}: {e}")),
        }
        for report in &reports {
            check_makespan_report(&mut tally, &label, inst, report);
        }

        let mut reports = Vec::new();
        match solve_santa_observed(inst, &params, &mut |r| reports.push(r.clone())) {
            Ok(schedule) => {
                let load = evaluate_min_load(inst, &schedule).unwrap();
                let bound = santa_slack(&eps) * (Rational::one() - &eps) * &opt_min;
                tally.check(5, load >= bound, || {
                    format!("{label}: min load {} against optimum {}", format_rational(&load), format_rational(&opt_min))
                });
            }
            Err(e) => tally.check(5, false, || format!("{label}: {e}")),
        }
        for report in &reports {
            check_santa_report(&mut tally, &label, inst, report);
        }
    }
    tally
}

fn check_lps(tally: &mut Tally) {
    for seed in 0..LPS {
        let lp = random_lp(seed);
        let got = solve_lp(&lp);
        let ok = match (vertex_enumeration(&lp), &got) {
            (VertexOutcome::Infeasible, LpResult::Infeasible(cert)) => cert.verify(&lp),
            (VertexOutcome::Optimal(v, _), LpResult::Optimal { point, value }) => {
                *value == v && lp.is_feasible_point(point) && lp.objective_value(point) == v
            }
            _ => false,
        };
        tally.check(8, ok, || format!("lp seed {seed}: solver returned {got:?}"));
    }
}

fn check_determinism(tally: &mut Tally, instances: &[(u64, Instance)]) {
    for (seed, inst) in instances.iter().take(DETERMINISM_INSTANCES as usize) {
        for eps in epsilons() {
            let params = EptasParams::new(eps.clone()).unwrap();
            let a = solve_makespan(inst, &params).unwrap().to_json();
            let b = solve_makespan(inst, &params).unwrap().to_json();
            tally.check(9, a == b, || format!("seed {seed}: makespan schedules differ"));
            let a = solve_santa(inst, &params).unwrap().to_json();
            let b = solve_santa(inst, &params).unwrap().to_json();
            tally.check(9, a == b, || format!("seed {seed}: max-min schedules differ"));
        }
        tally.check(9, lst_two_approx(inst) == lst_two_approx(inst), || format!("seed {seed}: baseline differs"));
    }

    let spec = SuiteSpec::from_json(
        r#"{"instances": 8, "first_seed": 1000, "epsilons": ["1/2", "1/3"], "algos": ["eptas", "santa", "greedy", "lp2"]}"#,
    )
    .unwrap();
    // Wall-clock time is the one column that cannot repeat.
    let render = || -> Vec<String> {
        run_suite(&spec)
            .unwrap()
            .iter()
            .map(|row| {
                let mut record = row.record();
                record[6].clear();
                format!("{}|{}", record.join(","), row.schedule.to_json())
            })
            .collect()
    };
    let (first, second) = (render(), render());
    tally.check(9, first == second, || "suite rows differ between runs".into());
}

#[test]
fn acceptance() {
    let instances = suite();
    let total = Mutex::new(Tally::default());
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    std::thread::scope(|scope| {
        for w in 0..workers {
            let (instances, total) = (&instances, &total);
            scope.spawn(move || {
                let mut local = Tally::default();
                for (seed, inst) in instances.iter().skip(w).step_by(workers) {
                    local.merge(run_instance(*seed, inst));
                }
                total.lock().unwrap().merge(local);
            });
        }
    });
    let mut tally = total.into_inner().unwrap();
    check_lps(&mut tally);
    check_determinism(&mut tally, &instances);

    let mut all_pass = true;
    for (i, name) in NAMES.iter().enumerate() {
        let failures = &tally.failures[i];
        let status = if failures.is_empty() && tally.checks[i] > 0 { "PASS" } else { "FAIL" };
        println!("criterion {} ({name}): {status} [{} checks, {} failures]", i + 1, tally.checks[i], failures.len());
        for f in failures.iter().take(5) {
            println!("    {f}");
        }
        all_pass &= status == "PASS";
    }
    assert!(all_pass, "acceptance criteria failed");
}
