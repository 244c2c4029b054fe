//! The four constraint models of the batch scheduling problem, built on
//! [`crate::cpcore`], and the decoder from solver valuations back to
//! [`Solution`]s.
//!
//! * AU: per-machine automata over transition values at every time step.
//! * AS: binary job-to-slot assignment plus batch intervals.
//! * S: job-slot-machine intervals synchronized with batch intervals.
//! * RS: S with redundant job, job-machine and batch interval layers.

mod assign;
mod au;
mod automaton;
mod batch;
mod sync;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cpcore::{
    Assignment, IntervalId, LitId, Model, ModelError, ObjectiveForm, SolveOutcome, SolveParams,
    VarId,
};
use crate::domain::{horizon, DomainError, ExecutedBatch, Instance, ObjectiveKind, Solution};

pub use automaton::{build_automaton, Arc, ArcKind, Automaton};
pub use batch::{build_batch_index, BatchIndex};

/// Default largest horizon the AU model accepts.
pub const AU_HORIZON_CAP: i64 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EncodingKind {
    Au,
    As,
    S,
    Rs,
}

/// An encoding kind with its symmetry-breaking flag, named as on the
/// command line: `au`, `as`, `as+sb`, `s`, `rs`, `rs+sb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variant {
    pub kind: EncodingKind,
    pub sb: bool,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant {
            kind: EncodingKind::Au,
            sb: false,
        },
        Variant {
            kind: EncodingKind::As,
            sb: false,
        },
        Variant {
            kind: EncodingKind::As,
            sb: true,
        },
        Variant {
            kind: EncodingKind::S,
            sb: false,
        },
        Variant {
            kind: EncodingKind::Rs,
            sb: false,
        },
        Variant {
            kind: EncodingKind::Rs,
            sb: true,
        },
    ];

    pub fn new(kind: EncodingKind, sb: bool) -> Result<Self, EncodeError> {
        if sb && !matches!(kind, EncodingKind::As | EncodingKind::Rs) {
            return Err(EncodeError::SymmetryBreakingUnsupported(kind));
        }
        Ok(Variant { kind, sb })
    }

    pub fn as_str(self) -> &'static str {
        match (self.kind, self.sb) {
            (EncodingKind::Au, _) => "au",
            (EncodingKind::As, false) => "as",
            (EncodingKind::As, true) => "as+sb",
            (EncodingKind::S, _) => "s",
            (EncodingKind::Rs, false) => "rs",
            (EncodingKind::Rs, true) => "rs+sb",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = EncodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| EncodeError::UnknownEncoding(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum EncodeError {
    #[error("unknown encoding {0:?} (expected au, as, as+sb, s, rs or rs+sb)")]
    UnknownEncoding(String),
    #[error("symmetry breaking applies to the AS and RS encodings only, not {0:?}")]
    SymmetryBreakingUnsupported(EncodingKind),
    #[error("horizon {horizon} exceeds the automaton model cap of {cap}")]
    HorizonCap { horizon: i64, cap: i64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum DecodeError {
    #[error("the outcome carries no assignment")]
    NoAssignment,
    #[error("inconsistent assignment: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// How solver variables map back to jobs, slots and machines.
#[derive(Debug, Clone)]
enum DecodeMap {
    /// `x[j][m]`: job `j` on machine `m`.
    Au { x: Vec<Vec<IntervalId>> },
    /// `z[j]`: `(slot, literal)` options of job `j`; `y[b]`, `ybm[b][m]`.
    As {
        z: Vec<Vec<(usize, LitId)>>,
        y: Vec<IntervalId>,
        ybm: Vec<Vec<IntervalId>>,
    },
    /// `x[j]`: `(slot, machine, interval)` options of job `j`.
    Slots {
        x: Vec<Vec<(usize, usize, IntervalId)>>,
    },
}

/// A built model together with what is needed to decode its solutions.
pub struct Encoding {
    pub variant: Variant,
    pub objective: ObjectiveKind,
    pub model: Model,
    pub batches: BatchIndex,
    /// Slot intervals `y_b` for the slot-based encodings.
    pub slot_intervals: Option<Vec<IntervalId>>,
    instance: Instance,
    map: DecodeMap,
}

/// One slot of a decoded assignment: the slot interval's start if present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotUse {
    pub slot: usize,
    pub family: u32,
    pub start: Option<i64>,
}

impl Encoding {
    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn solve(&mut self, params: &SolveParams) -> SolveOutcome {
        self.model.solve(params)
    }

    /// Rebuilds the schedule encoded by an outcome's assignment.
    pub fn decode(&self, outcome: &SolveOutcome) -> Result<Solution, DecodeError> {
        let a = outcome
            .assignment
            .as_ref()
            .ok_or(DecodeError::NoAssignment)?;
        let sol = self.decode_assignment(a)?;
        if outcome.best_value != Some(sol.objective_value) {
            return Err(DecodeError::Inconsistent(format!(
                "model value {:?} but the decoded schedule scores {}",
                outcome.best_value, sol.objective_value
            )));
        }
        Ok(sol)
    }

    pub fn decode_assignment(&self, a: &Assignment) -> Result<Solution, DecodeError> {
        let inst = &self.instance;
        // (machine, start, key) -> members
        let mut groups: BTreeMap<(u32, i64, usize), Vec<u32>> = BTreeMap::new();
        for (j, job) in inst.jobs.iter().enumerate() {
            let (m, start, key) = match &self.map {
                DecodeMap::Au { x } => {
                    let m = one(
                        x[j].iter()
                            .enumerate()
                            .filter(|(_, &i)| a.present(i))
                            .map(|(m, _)| m),
                        job.id,
                    )?;
                    (m, a.start(x[j][m]), job.family as usize)
                }
                DecodeMap::As { z, y, ybm } => {
                    let b = one(
                        z[j].iter().filter(|(_, l)| a.lit(*l)).map(|(b, _)| *b),
                        job.id,
                    )?;
                    if !a.present(y[b]) {
                        return Err(DecodeError::Inconsistent(format!(
                            "job {} in absent slot {}",
                            job.id,
                            b + 1
                        )));
                    }
                    let m = one(
                        ybm[b]
                            .iter()
                            .enumerate()
                            .filter(|(_, &i)| a.present(i))
                            .map(|(m, _)| m),
                        job.id,
                    )?;
                    (m, a.start(y[b]), b)
                }
                DecodeMap::Slots { x } => {
                    let k = one(
                        x[j].iter()
                            .enumerate()
                            .filter(|(_, o)| a.present(o.2))
                            .map(|(k, _)| k),
                        job.id,
                    )?;
                    let (b, m, iv) = x[j][k];
                    (m, a.start(iv), b)
                }
            };
            groups
                .entry((m as u32 + 1, start, key))
                .or_default()
                .push(job.id);
        }
        let batches = groups
            .into_iter()
            .map(|((machine, start, _), job_ids)| {
                let family = inst.jobs[job_ids[0] as usize - 1].family;
                ExecutedBatch {
                    family,
                    machine,
                    start,
                    job_ids,
                }
            })
            .collect();
        Ok(Solution::evaluated(inst, self.objective, batches)?)
    }

    /// Slot intervals in a solution, for the slot-based encodings.
    pub fn slot_usage(&self, a: &Assignment) -> Option<Vec<SlotUse>> {
        let y = self.slot_intervals.as_ref()?;
        Some(
            y.iter()
                .enumerate()
                .map(|(b, &iv)| SlotUse {
                    slot: b + 1,
                    family: self.batches.families[b],
                    start: a.present(iv).then(|| a.start(iv)),
                })
                .collect(),
        )
    }
}

fn objective_form(objective: ObjectiveKind) -> ObjectiveForm {
    match objective {
        ObjectiveKind::Twct => ObjectiveForm::MinSum,
        ObjectiveKind::Cmax => ObjectiveForm::MinMax,
    }
}

fn one(mut it: impl Iterator<Item = usize>, job: u32) -> Result<usize, DecodeError> {
    let first = it
        .next()
        .ok_or_else(|| DecodeError::Inconsistent(format!("job {job} is unplaced")))?;
    if it.next().is_some() {
        return Err(DecodeError::Inconsistent(format!(
            "job {job} is placed twice"
        )));
    }
    Ok(first)
}

/// Builds the encoding named by `variant`.
pub fn build(
    instance: &Instance,
    variant: Variant,
    objective: ObjectiveKind,
) -> Result<Encoding, EncodeError> {
    match variant.kind {
        EncodingKind::Au => build_au(instance, objective),
        EncodingKind::As => build_as(instance, objective, variant.sb),
        EncodingKind::S => build_s(instance, objective),
        EncodingKind::Rs => build_rs(instance, objective, variant.sb),
    }
}

fn iv_vars(model: &Model, ivs: impl IntoIterator<Item = IntervalId>) -> Vec<VarId> {
    ivs.into_iter()
        .flat_map(|i| [model.start(i), model.presence(i).var()])
        .collect()
}

/// Redundant bounds: the completion time of job `j` is the end of whichever
/// of `options[j]` is selected, and the objective is at least the weighted
/// sum (or the maximum) of those completions. Tightens the objective's lower
/// bound long before the optional intervals are decided.
fn bound_by_completions(
    model: &mut Model,
    inst: &Instance,
    objective: ObjectiveKind,
    obj: VarId,
    options: &[Vec<(LitId, IntervalId)>],
) -> Result<(), EncodeError> {
    let h = horizon(inst);
    let mut sum = Vec::with_capacity(options.len() + 1);
    for (job, opts) in inst.jobs.iter().zip(options) {
        let c = model.new_int_var(job.release + inst.proc_time(job), h)?;
        model.post_end_of_selected(c, opts)?;
        match objective {
            ObjectiveKind::Twct => sum.push((job.weight, c)),
            ObjectiveKind::Cmax => model.post_linear_le(&[(1, c), (-1, obj)], 0)?,
        }
    }
    if objective == ObjectiveKind::Twct {
        sum.push((-1, obj));
        model.post_linear_le(&sum, 0)?;
    }
    Ok(())
}

pub fn build_au(instance: &Instance, objective: ObjectiveKind) -> Result<Encoding, EncodeError> {
    build_au_capped(instance, objective, AU_HORIZON_CAP)
}

pub fn build_au_capped(
    instance: &Instance,
    objective: ObjectiveKind,
    cap: i64,
) -> Result<Encoding, EncodeError> {
    let h = horizon(instance);
    if h > cap {
        return Err(EncodeError::HorizonCap { horizon: h, cap });
    }
    au::build(instance, objective)
}

pub fn build_as(
    instance: &Instance,
    objective: ObjectiveKind,
    sb: bool,
) -> Result<Encoding, EncodeError> {
    let mut enc = assign::build(instance, objective, sb)?;
    if sb {
        add_symmetry_breaking(&mut enc)?;
    }
    Ok(enc)
}

pub fn build_s(instance: &Instance, objective: ObjectiveKind) -> Result<Encoding, EncodeError> {
    sync::build_s(instance, objective)
}

pub fn build_rs(
    instance: &Instance,
    objective: ObjectiveKind,
    sb: bool,
) -> Result<Encoding, EncodeError> {
    let mut enc = sync::build_rs(instance, objective, sb)?;
    if sb {
        add_symmetry_breaking(&mut enc)?;
    }
    Ok(enc)
}

/// Orders each family's slots: a slot is used only if its predecessor is,
/// and starts no earlier than it. The encoding must have been built with
/// `sb` set, so that its slots were not declared interchangeable.
fn add_symmetry_breaking(enc: &mut Encoding) -> Result<(), EncodeError> {
    let kind = enc.variant.kind;
    let y = match (&enc.slot_intervals, kind) {
        (Some(y), EncodingKind::As | EncodingKind::Rs) => y.clone(),
        _ => return Err(EncodeError::SymmetryBreakingUnsupported(kind)),
    };
    if enc.variant.sb {
        return Ok(());
    }
    for range in &enc.batches.by_family {
        for b in range.start + 1..range.end {
            enc.model.post_implies_presence(y[b], y[b - 1])?;
            enc.model.post_start_before_start(y[b - 1], y[b])?;
        }
    }
    enc.variant.sb = true;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instgen::{generate_instance, GenParams};

    #[test]
    fn variant_names() {
        assert_eq!(
            "rs+sb".parse::<Variant>().unwrap(),
            Variant {
                kind: EncodingKind::Rs,
                sb: true
            }
        );
        assert_eq!(
            "au".parse::<Variant>().unwrap(),
            Variant {
                kind: EncodingKind::Au,
                sb: false
            }
        );
        assert!("s+sb".parse::<Variant>().is_err());
        assert!(Variant::new(EncodingKind::Au, true).is_err());
        assert!(Variant::new(EncodingKind::Rs, true).is_ok());
    }

    /// Exchanging two declared members of a solution must give a solution:
    /// catches any variable missing from a member.
    #[test]
    fn declared_symmetries_map_solutions_to_solutions() {
        let inst = generate_instance(GenParams {
            n_jobs: 5,
            n_families: 2,
            n_machines: 2,
            seed: 11,
        })
        .unwrap();
        for v in Variant::ALL {
            for obj in ObjectiveKind::ALL {
                let mut enc = build(&inst, v, obj).unwrap();
                let out = enc.solve(&SolveParams::default());
                let values = out.assignment.expect("solved").values().to_vec();
                let groups = enc.model.symmetry_groups().to_vec();
                assert!(!groups.is_empty(), "{v}");
                for group in &groups {
                    for a in 0..group.len() {
                        for b in a + 1..group.len() {
                            let mut swapped = values.clone();
                            for (x, y) in group[a].iter().zip(&group[b]) {
                                swapped.swap(x.0 as usize, y.0 as usize);
                            }
                            assert!(
                                enc.model.accepts(&swapped),
                                "{v} {obj}: members {a} and {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ordered_slots_are_not_interchangeable() {
        let inst = generate_instance(GenParams {
            n_jobs: 4,
            n_families: 1,
            n_machines: 1,
            seed: 3,
        })
        .unwrap();
        for v in ["as+sb", "rs+sb"] {
            let enc = build(&inst, v.parse().unwrap(), ObjectiveKind::Twct).unwrap();
            assert!(enc.model.symmetry_groups().is_empty(), "{v}");
        }
        let enc = build(&inst, "as".parse().unwrap(), ObjectiveKind::Twct).unwrap();
        assert_eq!(enc.model.symmetry_groups().len(), 1);
    }
}
