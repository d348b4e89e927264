//! Instances, schedules, objective evaluation, the on-disk formats and seeded generation.
//!
//! An instance is given at the level of machine *types*: a `K x n` matrix of processing times
//! together with how many machines of each type exist. Machines of one type are
//! interchangeable, machine ids only exist so that a schedule names a concrete machine.

use std::fmt::Write as _;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rational::{format_rational, int, is_negative, parse_rational, Rational};

pub const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstanceError {
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
}

/// A machine: its type and its index among the machines of that type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MachineId {
    #[serde(rename = "type")]
    pub machine_type: usize,
    pub index: usize,
}

impl MachineId {
    pub fn new(machine_type: usize, index: usize) -> Self {
        MachineId { machine_type, index }
    }
}

/// Processing times per machine type plus machine multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    processing: Vec<Vec<Rational>>,
    multiplicities: Vec<usize>,
    jobs: usize,
}

impl Instance {
    /// Builds an instance, checking shape, non-negativity and that at least one machine exists.
    pub fn new(processing: Vec<Vec<Rational>>, multiplicities: Vec<usize>) -> Result<Self, InstanceError> {
        if multiplicities.is_empty() {
            return Err(InstanceError::Invalid("at least one machine type is required".into()));
        }
        if processing.len() != multiplicities.len() {
            return Err(InstanceError::DimensionMismatch(format!(
                "{} processing rows for {} machine types",
                processing.len(),
                multiplicities.len()
            )));
        }
        let jobs = processing[0].len();
        for (t, row) in processing.iter().enumerate() {
            if row.len() != jobs {
                return Err(InstanceError::DimensionMismatch(format!(
                    "processing row {t} has {} entries, expected {jobs}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(is_negative) {
                return Err(InstanceError::Invalid(format!("negative processing time for type {t}, job {j}")));
            }
        }
        if let Some(t) = multiplicities.iter().position(|&m| m == 0) {
            return Err(InstanceError::Invalid(format!("machine type {t} has multiplicity 0")));
        }
        Ok(Instance { processing, multiplicities, jobs })
    }

    /// Convenience constructor for integral data.
    pub fn from_integers(processing: &[&[i64]], multiplicities: &[usize]) -> Result<Self, InstanceError> {
        let rows = processing.iter().map(|row| row.iter().map(|&p| int(p)).collect()).collect();
        Instance::new(rows, multiplicities.to_vec())
    }

    pub fn num_types(&self) -> usize {
        self.multiplicities.len()
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs
    }

    /// Total machine count `m`.
    pub fn num_machines(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn multiplicity(&self, machine_type: usize) -> usize {
        self.multiplicities[machine_type]
    }

    pub fn processing(&self) -> &[Vec<Rational>] {
        &self.processing
    }

    pub fn time(&self, machine_type: usize, job: usize) -> &Rational {
        &self.processing[machine_type][job]
    }

    /// All machine ids, ordered by type then index.
    pub fn machines(&self) -> impl Iterator<Item = MachineId> + '_ {
        self.multiplicities
            .iter()
            .enumerate()
            .flat_map(|(t, &m)| (0..m).map(move |i| MachineId::new(t, i)))
    }

    /// Smallest processing time of `job` over all types.
    pub fn min_time(&self, job: usize) -> &Rational {
        self.processing.iter().map(|row| &row[job]).min().expect("at least one type")
    }

    pub fn max_time(&self, job: usize) -> &Rational {
        self.processing.iter().map(|row| &row[job]).max().expect("at least one type")
    }

    /// Dense index of a machine, `0..m`, ordered by type then index.
    pub(crate) fn machine_offset(&self, id: MachineId) -> usize {
        self.multiplicities[..id.machine_type].iter().sum::<usize>() + id.index
    }
}

/// An assignment of every job to a machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule {
    pub assignment: Vec<MachineId>,
}

impl Schedule {
    pub fn new(assignment: Vec<MachineId>) -> Self {
        Schedule { assignment }
    }

    pub fn machine_of(&self, job: usize) -> MachineId {
        self.assignment[job]
    }

    /// Checks that the schedule covers every job and only names existing machines.
    pub fn validate(&self, inst: &Instance) -> Result<(), InstanceError> {
        if self.assignment.len() != inst.num_jobs() {
            return Err(InstanceError::InvalidSchedule(format!(
                "schedule assigns {} jobs, instance has {}",
                self.assignment.len(),
                inst.num_jobs()
            )));
        }
        for (j, id) in self.assignment.iter().enumerate() {
            if id.machine_type >= inst.num_types() || id.index >= inst.multiplicity(id.machine_type) {
                return Err(InstanceError::InvalidSchedule(format!(
                    "job {j} assigned to nonexistent machine (type {}, index {})",
                    id.machine_type, id.index
                )));
            }
        }
        Ok(())
    }

    /// Per-machine loads, indexed like [`Instance::machines`].
    pub fn loads(&self, inst: &Instance) -> Result<Vec<Rational>, InstanceError> {
        self.validate(inst)?;
        let mut loads = vec![Rational::zero(); inst.num_machines()];
        for (j, id) in self.assignment.iter().enumerate() {
            loads[inst.machine_offset(*id)] += inst.time(id.machine_type, j);
        }
        Ok(loads)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }
}

/// Maximum machine load.
pub fn evaluate_makespan(inst: &Instance, sched: &Schedule) -> Result<Rational, InstanceError> {
    Ok(sched.loads(inst)?.into_iter().max().unwrap_or_else(Rational::zero))
}

/// Minimum load over all machines, empty machines included.
pub fn evaluate_min_load(inst: &Instance, sched: &Schedule) -> Result<Rational, InstanceError> {
    Ok(sched.loads(inst)?.into_iter().min().unwrap_or_else(Rational::zero))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    version: u64,
    k: usize,
    n: usize,
    multiplicities: Vec<usize>,
    processing: Vec<Vec<Literal>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Literal {
    Text(String),
    Integer(u64),
}

/// Parses the canonical instance document.
pub fn parse_instance(text: &[u8]) -> Result<Instance, InstanceError> {
    let raw: RawInstance = serde_json::from_slice(text).map_err(|e| InstanceError::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    if raw.version != FORMAT_VERSION {
        return Err(InstanceError::Parse {
            location: "field `version`".into(),
            message: format!("unsupported version {}", raw.version),
        });
    }
    if raw.multiplicities.len() != raw.k {
        return Err(InstanceError::DimensionMismatch(format!(
            "`multiplicities` has {} entries, k = {}",
            raw.multiplicities.len(),
            raw.k
        )));
    }
    if raw.processing.len() != raw.k {
        return Err(InstanceError::DimensionMismatch(format!(
            "`processing` has {} rows, k = {}",
            raw.processing.len(),
            raw.k
        )));
    }
    let mut rows = Vec::with_capacity(raw.k);
    for (t, row) in raw.processing.into_iter().enumerate() {
        if row.len() != raw.n {
            return Err(InstanceError::DimensionMismatch(format!(
                "`processing[{t}]` has {} entries, n = {}",
                row.len(),
                raw.n
            )));
        }
        let mut parsed = Vec::with_capacity(raw.n);
        for (j, lit) in row.into_iter().enumerate() {
            let value = match lit {
                Literal::Integer(v) => Rational::from_integer(v.into()),
                Literal::Text(s) => {
                    if s.starts_with('-') {
                        return Err(InstanceError::Parse {
                            location: format!("field `processing[{t}][{j}]`"),
                            message: format!("negative processing time `{s}`"),
                        });
                    }
                    parse_rational(&s).map_err(|e| InstanceError::Parse {
                        location: format!("field `processing[{t}][{j}]`"),
                        message: e.to_string(),
                    })?
                }
            };
            parsed.push(value);
        }
        rows.push(parsed);
    }
    if raw.k == 0 {
        return Err(InstanceError::Invalid("k must be at least 1".into()));
    }
    Instance::new(rows, raw.multiplicities)
}

/// Canonical text form: one processing row per line, every time as a quoted rational literal.
pub fn serialize_instance(inst: &Instance) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"k\": {},", inst.num_types());
    let _ = writeln!(out, "  \"n\": {},", inst.num_jobs());
    let mults: Vec<String> = inst.multiplicities().iter().map(|m| m.to_string()).collect();
    let _ = writeln!(out, "  \"multiplicities\": [{}],", mults.join(", "));
    out.push_str("  \"processing\": [\n");
    for (t, row) in inst.processing().iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|p| format!("\"{}\"", format_rational(p))).collect();
        let sep = if t + 1 < inst.num_types() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", cells.join(", "));
    }
    out.push_str("  ]\n}\n");
    out.into_bytes()
}

/// Integer processing times drawn uniformly from `[1, p_max]`, row by row, from a ChaCha8
/// stream seeded with `seed`.
pub fn generate_instance(
    types: usize,
    jobs: usize,
    multiplicities: &[usize],
    p_max: u64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if p_max == 0 {
        return Err(InstanceError::Invalid("p_max must be at least 1".into()));
    }
    if multiplicities.len() != types {
        return Err(InstanceError::DimensionMismatch(format!(
            "{} multiplicities for {types} types",
            multiplicities.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let processing = (0..types)
        .map(|_| (0..jobs).map(|_| Rational::from_integer(rng.gen_range(1..=p_max).into())).collect())
        .collect();
    Instance::new(processing, multiplicities.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn cross() -> Instance {
        Instance::from_integers(&[&[1, 2], &[2, 1]], &[1, 1]).unwrap()
    }

    #[test]
    fn makespan_examples() {
        let empty = Instance::from_integers(&[&[]], &[2]).unwrap();
        assert_eq!(evaluate_makespan(&empty, &Schedule::new(vec![])).unwrap(), int(0));

        let single = Instance::from_integers(&[&[3, 4]], &[1]).unwrap();
        let s = Schedule::new(vec![MachineId::new(0, 0); 2]);
        assert_eq!(evaluate_makespan(&single, &s).unwrap(), int(7));

        let s = Schedule::new(vec![MachineId::new(0, 0), MachineId::new(1, 0)]);
        assert_eq!(evaluate_makespan(&cross(), &s).unwrap(), int(1));
        assert_eq!(evaluate_min_load(&cross(), &s).unwrap(), int(1));
    }

    #[test]
    fn min_load_counts_idle_machines() {
        let inst = Instance::from_integers(&[&[5, 5]], &[3]).unwrap();
        let s = Schedule::new(vec![MachineId::new(0, 0), MachineId::new(0, 1)]);
        assert_eq!(evaluate_min_load(&inst, &s).unwrap(), int(0));

        let units = Instance::from_integers(&[&[1, 1, 1, 1]], &[2]).unwrap();
        let s = Schedule::new(vec![
            MachineId::new(0, 0),
            MachineId::new(0, 1),
            MachineId::new(0, 0),
            MachineId::new(0, 1),
        ]);
        assert_eq!(evaluate_min_load(&units, &s).unwrap(), int(2));
    }

    #[test]
    fn invalid_schedules_rejected() {
        let inst = cross();
        let short = Schedule::new(vec![MachineId::new(0, 0)]);
        assert!(matches!(evaluate_makespan(&inst, &short), Err(InstanceError::InvalidSchedule(_))));
        let bad_index = Schedule::new(vec![MachineId::new(0, 1), MachineId::new(0, 0)]);
        assert!(matches!(evaluate_min_load(&inst, &bad_index), Err(InstanceError::InvalidSchedule(_))));
        let bad_type = Schedule::new(vec![MachineId::new(2, 0), MachineId::new(0, 0)]);
        assert!(evaluate_makespan(&inst, &bad_type).is_err());
    }

    #[test]
    fn roundtrip_and_literals() {
        let inst = cross();
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);

        let doc = br#"{"version": 1, "k": 1, "n": 2, "multiplicities": [2], "processing": [["3/2", 4]]}"#;
        let parsed = parse_instance(doc).unwrap();
        assert_eq!(parsed.time(0, 0), &ratio(3, 2));
        assert_eq!(parsed.time(0, 1), &int(4));
    }

    #[test]
    fn malformed_documents() {
        let wrong_row = br#"{"version": 1, "k": 2, "n": 2, "multiplicities": [1, 1], "processing": [["1", "2"], ["1"]]}"#;
        assert!(matches!(parse_instance(wrong_row), Err(InstanceError::DimensionMismatch(_))));

        let negative = br#"{"version": 1, "k": 1, "n": 1, "multiplicities": [1], "processing": [["-1"]]}"#;
        match parse_instance(negative) {
            Err(InstanceError::Parse { location, .. }) => assert!(location.contains("processing[0][0]")),
            other => panic!("unexpected {other:?}"),
        }

        let bad_json = b"{\n  \"version\": 1,\n  \"k\": ]";
        match parse_instance(bad_json) {
            Err(InstanceError::Parse { location, .. }) => assert!(location.starts_with("line 3")),
            other => panic!("unexpected {other:?}"),
        }

        let zero_mult = br#"{"version": 1, "k": 1, "n": 0, "multiplicities": [0], "processing": [[]]}"#;
        assert!(matches!(parse_instance(zero_mult), Err(InstanceError::Invalid(_))));
    }

    #[test]
    fn generation_contract() {
        let a = generate_instance(2, 6, &[1, 2], 20, 7).unwrap();
        let b = generate_instance(2, 6, &[1, 2], 20, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.processing().iter().flatten().all(|p| *p >= int(1) && *p <= int(20)));
        let ones = generate_instance(3, 5, &[1, 1, 1], 1, 99).unwrap();
        assert!(ones.processing().iter().flatten().all(|p| *p == int(1)));
        assert!(generate_instance(1, 1, &[1], 0, 0).is_err());
    }

    #[test]
    fn schedule_file_shape() {
        let s = Schedule::new(vec![MachineId::new(1, 0), MachineId::new(0, 2)]);
        let text = s.to_json();
        assert_eq!(text, r#"[{"type":1,"index":0},{"type":0,"index":2}]"#);
        assert_eq!(Schedule::from_json(&text).unwrap(), s);
    }
}
