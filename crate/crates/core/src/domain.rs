//! Problem and solution data types, the feasibility validator, objective
//! evaluation and the scheduling horizon.
//!
//! Identifiers (job, family, machine) are 1-based throughout, matching the
//! on-disk formats.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version tag written into instance and solution files.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("job {0} is not assigned to any batch")]
    UnassignedJob(u32),
    #[error("solution references unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: u32 },
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("unknown objective `{0}` (expected `twct` or `cmax`)")]
    UnknownObjective(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Family {
    pub id: u32,
    pub proc_time: i64,
    pub max_batch_size: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    pub id: u32,
    pub family: u32,
    pub size: i64,
    pub weight: i64,
    pub release: i64,
}

/// A problem instance: `P | s_j, r_j, p-batch, incompatible | γ` on identical
/// machines.
///
/// Families and jobs are stored in id order, with ids `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub version: u32,
    pub machines: u32,
    pub families: Vec<Family>,
    pub jobs: Vec<Job>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl Instance {
    /// Builds and validates an instance. Families and jobs must carry ids
    /// `1..=n` in order.
    pub fn new(machines: u32, families: Vec<Family>, jobs: Vec<Job>) -> Result<Self, DomainError> {
        let inst = Instance {
            version: FORMAT_VERSION,
            machines,
            families,
            jobs,
            meta: None,
        };
        inst.check()?;
        Ok(inst)
    }

    /// Checks every structural invariant of the data model.
    pub fn check(&self) -> Result<(), DomainError> {
        let bad = |msg: String| Err(DomainError::InvalidInstance(msg));
        if self.version != FORMAT_VERSION {
            return Err(DomainError::Version(self.version));
        }
        if self.machines < 1 {
            return bad("machine count must be at least 1".into());
        }
        for (i, f) in self.families.iter().enumerate() {
            if f.id as usize != i + 1 {
                return bad(format!(
                    "family at position {} has id {}, expected {}",
                    i,
                    f.id,
                    i + 1
                ));
            }
            if f.proc_time < 1 {
                return bad(format!(
                    "family {} has processing time {} < 1",
                    f.id, f.proc_time
                ));
            }
            if f.max_batch_size < 1 {
                return bad(format!(
                    "family {} has max batch size {} < 1",
                    f.id, f.max_batch_size
                ));
            }
        }
        for (i, j) in self.jobs.iter().enumerate() {
            if j.id as usize != i + 1 {
                return bad(format!(
                    "job at position {} has id {}, expected {}",
                    i,
                    j.id,
                    i + 1
                ));
            }
            let Some(f) = self.family_of_id(j.family) else {
                return bad(format!(
                    "job {} references unknown family {}",
                    j.id, j.family
                ));
            };
            if j.size < 1 || j.weight < 1 || j.release < 0 {
                return bad(format!(
                    "job {} needs size >= 1, weight >= 1, release >= 0",
                    j.id
                ));
            }
            if j.size > f.max_batch_size {
                return bad(format!(
                    "job {} has size {} above family {} capacity {}",
                    j.id, j.size, f.id, f.max_batch_size
                ));
            }
        }
        Ok(())
    }

    pub fn family_of_id(&self, id: u32) -> Option<&Family> {
        id.checked_sub(1)
            .and_then(|i| self.families.get(i as usize))
    }

    pub fn job_of_id(&self, id: u32) -> Option<&Job> {
        id.checked_sub(1).and_then(|i| self.jobs.get(i as usize))
    }

    /// The family record of a job. Panics on an unchecked instance.
    pub fn family(&self, job: &Job) -> &Family {
        &self.families[job.family as usize - 1]
    }

    pub fn proc_time(&self, job: &Job) -> i64 {
        self.family(job).proc_time
    }

    /// Job indices (0-based) grouped per family, in family order.
    pub fn jobs_by_family(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.families.len()];
        for (i, j) in self.jobs.iter().enumerate() {
            groups[j.family as usize - 1].push(i);
        }
        groups
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let text = read_file(path)?;
        let inst = Self::from_json(&text).map_err(|source| DomainError::Json {
            path: path.display().to_string(),
            source,
        })?;
        inst.check()?;
        Ok(inst)
    }

    pub fn save(&self, path: &Path) -> Result<(), DomainError> {
        write_file(path, &self.to_json())
    }
}

/// The scheduling horizon `H = max_j r_j + Σ_j p_j + 1`.
///
/// Scheduling batches back to back after the last release never ends later
/// than `H - 1`, so every optimal schedule fits below `H`.
pub fn horizon(instance: &Instance) -> i64 {
    let max_release = instance.jobs.iter().map(|j| j.release).max().unwrap_or(0);
    let total: i64 = instance.jobs.iter().map(|j| instance.proc_time(j)).sum();
    max_release + total + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// Total weighted completion time.
    Twct,
    /// Makespan.
    Cmax,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 2] = [ObjectiveKind::Twct, ObjectiveKind::Cmax];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Twct => "twct",
            ObjectiveKind::Cmax => "cmax",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "twct" => Ok(ObjectiveKind::Twct),
            "cmax" => Ok(ObjectiveKind::Cmax),
            _ => Err(DomainError::UnknownObjective(s.to_string())),
        }
    }
}

/// One batch as executed: all members share the window
/// `[start, start + proc_time)` on `machine`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExecutedBatch {
    pub family: u32,
    pub machine: u32,
    pub start: i64,
    #[serde(rename = "jobs")]
    pub job_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub version: u32,
    #[serde(rename = "objective")]
    pub objective_kind: ObjectiveKind,
    #[serde(rename = "value")]
    pub objective_value: i64,
    pub batches: Vec<ExecutedBatch>,
}

impl Solution {
    /// Builds a solution and fills in its objective value. Fails if a job is
    /// left out or an id is unknown.
    pub fn evaluated(
        instance: &Instance,
        kind: ObjectiveKind,
        mut batches: Vec<ExecutedBatch>,
    ) -> Result<Self, DomainError> {
        for b in &mut batches {
            b.job_ids.sort_unstable();
        }
        batches.sort();
        let mut sol = Solution {
            version: FORMAT_VERSION,
            objective_kind: kind,
            objective_value: 0,
            batches,
        };
        sol.objective_value = objective_value(instance, &sol, kind)?;
        Ok(sol)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, DomainError> {
        let text = read_file(path)?;
        let sol: Solution = Self::from_json(&text).map_err(|source| DomainError::Json {
            path: path.display().to_string(),
            source,
        })?;
        if sol.version != FORMAT_VERSION {
            return Err(DomainError::Version(sol.version));
        }
        Ok(sol)
    }

    pub fn save(&self, path: &Path) -> Result<(), DomainError> {
        write_file(path, &self.to_json())
    }

    /// Completion time of every job, indexed by job position.
    pub fn completion_times(&self, instance: &Instance) -> Result<Vec<i64>, DomainError> {
        let mut done: Vec<Option<i64>> = vec![None; instance.jobs.len()];
        for b in &self.batches {
            let fam = instance
                .family_of_id(b.family)
                .ok_or(DomainError::UnknownId {
                    kind: "family",
                    id: b.family,
                })?;
            for &j in &b.job_ids {
                let slot = j
                    .checked_sub(1)
                    .and_then(|i| done.get_mut(i as usize))
                    .ok_or(DomainError::UnknownId { kind: "job", id: j })?;
                *slot = Some(b.start + fam.proc_time);
            }
        }
        done.iter()
            .enumerate()
            .map(|(i, c)| c.ok_or(DomainError::UnassignedJob(i as u32 + 1)))
            .collect()
    }
}

/// Recomputes the objective of `solution` from its batches.
///
/// Every member of a batch completes at `start + proc_time` of the batch
/// family.
pub fn objective_value(
    instance: &Instance,
    solution: &Solution,
    kind: ObjectiveKind,
) -> Result<i64, DomainError> {
    let done = solution.completion_times(instance)?;
    Ok(match kind {
        ObjectiveKind::Twct => instance
            .jobs
            .iter()
            .zip(&done)
            .map(|(j, c)| j.weight * c)
            .sum(),
        ObjectiveKind::Cmax => done.iter().copied().max().unwrap_or(0),
    })
}

/// The clause a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ViolationKind {
    UnknownId,
    EmptyBatch,
    MissingJob,
    DoubleAssignment,
    FamilyPurity,
    Capacity,
    Release,
    Overlap,
    ObjectiveMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Offending batch positions in the solution's batch list.
    pub batches: Vec<usize>,
    /// Offending job ids.
    pub jobs: Vec<u32>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.kind, self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    pub fn kinds(&self) -> BTreeSet<ViolationKind> {
        self.violations.iter().map(|v| v.kind).collect()
    }

    fn push(&mut self, kind: ViolationKind, batches: Vec<usize>, jobs: Vec<u32>, detail: String) {
        self.violations.push(Violation {
            kind,
            batches,
            jobs,
            detail,
        });
    }
}

/// Checks every feasibility clause and reports all violations found.
///
/// Clauses: each job in exactly one batch, same-family batches, capacity,
/// batch start after every member release, no two batches overlapping on a
/// machine, and a stored objective value equal to the recomputed one.
pub fn validate_solution(instance: &Instance, solution: &Solution) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();
    let mut seen: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    // (machine, start, end, batch position) for the disjunction check
    let mut windows: Vec<(u32, i64, i64, usize)> = Vec::new();

    for (bi, b) in solution.batches.iter().enumerate() {
        let fam = instance.family_of_id(b.family);
        if fam.is_none() {
            report.push(
                UnknownId,
                vec![bi],
                vec![],
                format!("batch {bi} has unknown family {}", b.family),
            );
        }
        if b.machine < 1 || b.machine > instance.machines {
            report.push(
                UnknownId,
                vec![bi],
                vec![],
                format!("batch {bi} has unknown machine {}", b.machine),
            );
        }
        if b.job_ids.is_empty() {
            report.push(
                EmptyBatch,
                vec![bi],
                vec![],
                format!("batch {bi} has no jobs"),
            );
        }
        let mut load = 0;
        let mut impure = Vec::new();
        let mut early = Vec::new();
        for &jid in &b.job_ids {
            let Some(job) = instance.job_of_id(jid) else {
                report.push(
                    UnknownId,
                    vec![bi],
                    vec![jid],
                    format!("batch {bi} has unknown job {jid}"),
                );
                continue;
            };
            seen.entry(jid).or_default().push(bi);
            load += job.size;
            if job.family != b.family {
                impure.push(jid);
            }
            if job.release > b.start {
                early.push(jid);
            }
        }
        if !impure.is_empty() {
            report.push(
                FamilyPurity,
                vec![bi],
                impure.clone(),
                format!(
                    "batch {bi} of family {} holds jobs {:?} of other families",
                    b.family, impure
                ),
            );
        }
        if !early.is_empty() {
            report.push(
                Release,
                vec![bi],
                early.clone(),
                format!(
                    "batch {bi} starts at {} before the release of jobs {:?}",
                    b.start, early
                ),
            );
        }
        if let Some(f) = fam {
            if load > f.max_batch_size {
                report.push(
                    Capacity,
                    vec![bi],
                    b.job_ids.clone(),
                    format!(
                        "batch {bi} load {load} exceeds capacity {}",
                        f.max_batch_size
                    ),
                );
            }
            windows.push((b.machine, b.start, b.start + f.proc_time, bi));
        }
    }

    for job in &instance.jobs {
        match seen.get(&job.id).map(Vec::len).unwrap_or(0) {
            0 => report.push(
                MissingJob,
                vec![],
                vec![job.id],
                format!("job {} is not scheduled", job.id),
            ),
            1 => {}
            n => report.push(
                DoubleAssignment,
                seen[&job.id].clone(),
                vec![job.id],
                format!("job {} appears in {n} batches", job.id),
            ),
        }
    }

    windows.sort();
    for (i, a) in windows.iter().enumerate() {
        for b in windows[i + 1..].iter().take_while(|b| b.0 == a.0) {
            if b.1 < a.2 && a.1 < b.2 {
                report.push(
                    Overlap,
                    vec![a.3, b.3],
                    vec![],
                    format!(
                        "batches {} [{}, {}) and {} [{}, {}) overlap on machine {}",
                        a.3, a.1, a.2, b.3, b.1, b.2, a.0
                    ),
                );
            }
        }
    }

    if report.ok() {
        if let Ok(v) = objective_value(instance, solution, solution.objective_kind) {
            if v != solution.objective_value {
                report.push(
                    ObjectiveMismatch,
                    vec![],
                    vec![],
                    format!(
                        "stored value {} but recomputed {}",
                        solution.objective_value, v
                    ),
                );
            }
        }
    }
    report
}

fn read_file(path: &Path) -> Result<String, DomainError> {
    std::fs::read_to_string(path).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), DomainError> {
    std::fs::write(path, text).map_err(|source| DomainError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The four-job, single-family example used throughout the tests: processing
/// time 10, capacity 100, one machine.
pub fn illustrative_instance() -> Instance {
    let family = Family {
        id: 1,
        proc_time: 10,
        max_batch_size: 100,
    };
    let job = |id, weight, release| Job {
        id,
        family: 1,
        size: 25,
        weight,
        release,
    };
    Instance::new(
        1,
        vec![family],
        vec![job(1, 10, 3), job(2, 10, 11), job(3, 20, 5), job(4, 40, 12)],
    )
    .expect("illustrative instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn batch(machine: u32, start: i64, jobs: &[u32]) -> ExecutedBatch {
        ExecutedBatch {
            family: 1,
            machine,
            start,
            job_ids: jobs.to_vec(),
        }
    }

    fn sol(kind: ObjectiveKind, value: i64, batches: Vec<ExecutedBatch>) -> Solution {
        Solution {
            version: 1,
            objective_kind: kind,
            objective_value: value,
            batches,
        }
    }

    #[test]
    fn horizon_formula() {
        assert_eq!(horizon(&illustrative_instance()), 53);
        let f = |id, p| Family {
            id,
            proc_time: p,
            max_batch_size: 10,
        };
        let j = |id, family, release| Job {
            id,
            family,
            size: 1,
            weight: 1,
            release,
        };
        let one = Instance::new(1, vec![f(1, 1)], vec![j(1, 1, 0)]).unwrap();
        assert_eq!(horizon(&one), 2);
        let three = Instance::new(
            2,
            vec![f(1, 2), f(2, 3), f(3, 5)],
            vec![j(1, 1, 0), j(2, 2, 7), j(3, 3, 4)],
        )
        .unwrap();
        assert_eq!(horizon(&three), 18);
    }

    #[test]
    fn single_full_batch_is_feasible() {
        let inst = illustrative_instance();
        let s = sol(ObjectiveKind::Twct, 1760, vec![batch(1, 12, &[1, 2, 3, 4])]);
        let report = validate_solution(&inst, &s);
        assert!(report.ok(), "{:?}", report);
        assert_eq!(
            objective_value(&inst, &s, ObjectiveKind::Twct).unwrap(),
            80 * 22
        );
        assert_eq!(objective_value(&inst, &s, ObjectiveKind::Cmax).unwrap(), 22);
    }

    #[test]
    fn early_start_violates_release() {
        let inst = illustrative_instance();
        let s = sol(
            ObjectiveKind::Twct,
            0,
            vec![batch(1, 4, &[1, 3]), batch(1, 20, &[2, 4])],
        );
        let report = validate_solution(&inst, &s);
        assert!(report.has(ViolationKind::Release));
        let v = report
            .violations
            .iter()
            .find(|v| v.kind == ViolationKind::Release)
            .unwrap();
        assert_eq!(v.jobs, vec![3]);
    }

    #[test]
    fn overlapping_batches_rejected() {
        let inst = illustrative_instance();
        let s = sol(
            ObjectiveKind::Cmax,
            0,
            vec![batch(1, 5, &[1, 3]), batch(1, 10, &[2, 4])],
        );
        let report = validate_solution(&inst, &s);
        assert!(report.has(ViolationKind::Overlap));
        // also release: job 2 (r=11) and job 4 (r=12) in a batch at 10
        assert!(report.has(ViolationKind::Release));
    }

    #[test]
    fn two_batch_twct_value() {
        let inst = illustrative_instance();
        let s = Solution::evaluated(
            &inst,
            ObjectiveKind::Twct,
            vec![batch(1, 15, &[2, 4]), batch(1, 5, &[1, 3])],
        )
        .unwrap();
        assert_eq!(s.objective_value, 1700);
        assert!(validate_solution(&inst, &s).ok());
        assert_eq!(objective_value(&inst, &s, ObjectiveKind::Cmax).unwrap(), 25);
    }

    #[test]
    fn unassigned_job_is_an_error() {
        let inst = illustrative_instance();
        let s = sol(ObjectiveKind::Twct, 0, vec![batch(1, 12, &[1, 2, 3])]);
        assert!(matches!(
            objective_value(&inst, &s, ObjectiveKind::Twct),
            Err(DomainError::UnassignedJob(4))
        ));
        let report = validate_solution(&inst, &s);
        assert_eq!(report.kinds(), [ViolationKind::MissingJob].into());
    }

    #[test]
    fn reports_every_violation() {
        let mut inst = illustrative_instance();
        inst.families.push(Family {
            id: 2,
            proc_time: 3,
            max_batch_size: 30,
        });
        inst.jobs.push(Job {
            id: 5,
            family: 2,
            size: 20,
            weight: 1,
            release: 0,
        });
        inst.check().unwrap();
        let s = sol(
            ObjectiveKind::Twct,
            0,
            vec![
                ExecutedBatch {
                    family: 2,
                    machine: 1,
                    start: 0,
                    job_ids: vec![5, 1],
                },
                batch(1, 12, &[2, 3, 4, 1]),
            ],
        );
        let kinds = validate_solution(&inst, &s).kinds();
        for k in [
            ViolationKind::FamilyPurity,
            ViolationKind::Capacity,
            ViolationKind::Release,
            ViolationKind::DoubleAssignment,
        ] {
            assert!(kinds.contains(&k), "missing {k:?} in {kinds:?}");
        }
    }

    #[test]
    fn objective_mismatch_detected() {
        let inst = illustrative_instance();
        let s = sol(ObjectiveKind::Twct, 1700, vec![batch(1, 12, &[1, 2, 3, 4])]);
        assert_eq!(
            validate_solution(&inst, &s).kinds(),
            [ViolationKind::ObjectiveMismatch].into()
        );
    }

    #[test]
    fn instance_invariants_enforced() {
        let f = Family {
            id: 1,
            proc_time: 2,
            max_batch_size: 5,
        };
        let big = Job {
            id: 1,
            family: 1,
            size: 6,
            weight: 1,
            release: 0,
        };
        assert!(Instance::new(1, vec![f], vec![big]).is_err());
        let orphan = Job {
            id: 1,
            family: 2,
            size: 1,
            weight: 1,
            release: 0,
        };
        assert!(Instance::new(1, vec![f], vec![orphan]).is_err());
        let ok = Job {
            id: 1,
            family: 1,
            size: 1,
            weight: 1,
            release: 0,
        };
        assert!(Instance::new(0, vec![f], vec![ok]).is_err());
        assert!(Instance::new(1, vec![Family { proc_time: 0, ..f }], vec![ok]).is_err());
    }

    #[test]
    fn json_round_trip_and_field_names() {
        let inst = illustrative_instance();
        let text = inst.to_json();
        assert!(text.contains("\"max_batch_size\""));
        assert_eq!(Instance::from_json(&text).unwrap(), inst);

        let s = Solution::evaluated(
            &inst,
            ObjectiveKind::Cmax,
            vec![batch(1, 12, &[4, 3, 2, 1])],
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["objective"], "cmax");
        assert_eq!(v["value"], 22);
        assert_eq!(v["batches"][0]["jobs"], serde_json::json!([1, 2, 3, 4]));
    }
}
