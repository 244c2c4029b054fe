//! The synchronized encodings: job intervals per (slot, machine) aligned to
//! batch intervals, with and without the redundant upper layers.

use super::{
    bound_by_completions, build_batch_index, iv_vars, objective_form, DecodeMap, EncodeError,
    Encoding, EncodingKind, Variant,
};
use crate::cpcore::{Expr, IntervalId, Model, VarId};
use crate::domain::{horizon, Instance, ObjectiveKind};

/// `ybm[b][m]` batch intervals plus one no-overlap per machine.
fn batch_machine_intervals(
    model: &mut Model,
    inst: &Instance,
    families: &[u32],
) -> Result<Vec<Vec<IntervalId>>, EncodeError> {
    let h = horizon(inst);
    let mut ybm = Vec::with_capacity(families.len());
    for &f in families {
        let p = inst.families[f as usize - 1].proc_time;
        let row = (0..inst.machines)
            .map(|_| model.add_optional_interval(p, 0, h - p, true))
            .collect::<Result<Vec<_>, _>>()?;
        ybm.push(row);
    }
    for m in 0..inst.machines as usize {
        let row: Vec<_> = ybm.iter().map(|r| r[m]).collect();
        model.post_no_overlap(&row)?;
    }
    Ok(ybm)
}

/// A present `ybm[b][m]` holds at least one job. The plain models allow
/// empty batches; dropping one (and renumbering later slots of its family)
/// never worsens the objective, so this only prunes.
fn forbid_empty_batches(
    model: &mut Model,
    ybm: &[Vec<IntervalId>],
    x: &[Vec<(usize, usize, IntervalId)>],
) -> Result<(), EncodeError> {
    for (b, row) in ybm.iter().enumerate() {
        for (m, &i) in row.iter().enumerate() {
            let members: Vec<IntervalId> = x
                .iter()
                .flatten()
                .filter(|o| o.0 == b && o.1 == m)
                .map(|o| o.2)
                .collect();
            model.post_covered(i, &members)?;
        }
    }
    Ok(())
}

/// Batch decisions: each `ybm[b][m]`, filled with the presence of its job
/// options right after it is placed, heaviest jobs first. The job options
/// follow as a fallback group.
fn add_decisions(
    model: &mut Model,
    inst: &Instance,
    ybm: &[Vec<IntervalId>],
    x: &[Vec<(usize, usize, IntervalId)>],
) -> Result<(), EncodeError> {
    let mut order: Vec<usize> = (0..inst.jobs.len()).collect();
    order.sort_by_key(|&j| std::cmp::Reverse(inst.jobs[j].weight));
    let mut batches = Vec::new();
    for (b, row) in ybm.iter().enumerate() {
        for (m, &i) in row.iter().enumerate() {
            let lits = order
                .iter()
                .flat_map(|&j| x[j].iter().filter(|o| o.0 == b && o.1 == m))
                .map(|o| model.presence(o.2))
                .collect();
            batches.push((i, lits));
        }
    }
    model.add_decision_batches(&batches)?;
    let all_x: Vec<_> = x.iter().flatten().map(|o| o.2).collect();
    model.add_decision_intervals(&all_x)?;
    Ok(())
}

/// Machine and (optionally) slot interchangeability. `x[j]` lists the
/// job's `(slot, machine, interval)` options; `extra` adds further
/// per-`(slot, machine)`-independent intervals of each member.
#[allow(clippy::too_many_arguments)]
fn declare_symmetries(
    model: &mut Model,
    inst: &Instance,
    idx: &super::BatchIndex,
    ybm: &[Vec<IntervalId>],
    x: &[Vec<(usize, usize, IntervalId)>],
    machine_extra: &[Vec<IntervalId>],
    slot_extra: &[IntervalId],
    slots: bool,
) -> Result<(), EncodeError> {
    let machines = inst.machines as usize;
    let option = |j: usize, b: usize, m: usize| {
        x[j].iter()
            .find(|o| o.0 == b && o.1 == m)
            .expect("option")
            .2
    };
    let by_machine: Vec<Vec<VarId>> = (0..machines)
        .map(|m| {
            let mut ivs: Vec<IntervalId> = ybm.iter().map(|r| r[m]).collect();
            ivs.extend(machine_extra.get(m).into_iter().flatten());
            for (j, job) in inst.jobs.iter().enumerate() {
                ivs.extend(idx.slots_of(job.family).map(|b| option(j, b, m)));
            }
            iv_vars(model, ivs)
        })
        .collect();
    model.add_interchangeable(&by_machine)?;
    if !slots {
        return Ok(());
    }
    for (f, members) in inst.jobs_by_family().iter().enumerate() {
        let by_slot: Vec<Vec<VarId>> = idx.by_family[f]
            .clone()
            .map(|b| {
                let mut ivs: Vec<IntervalId> = slot_extra.get(b).into_iter().copied().collect();
                ivs.extend(&ybm[b]);
                for &j in members {
                    ivs.extend((0..machines).map(|m| option(j, b, m)));
                }
                iv_vars(model, ivs)
            })
            .collect();
        model.add_interchangeable(&by_slot)?;
    }
    Ok(())
}

pub(super) fn build_s(inst: &Instance, objective: ObjectiveKind) -> Result<Encoding, EncodeError> {
    let h = horizon(inst);
    let machines = inst.machines as usize;
    let idx = build_batch_index(inst);
    let mut model = Model::new();
    let ybm = batch_machine_intervals(&mut model, inst, &idx.families)?;

    // at most one machine per slot
    for row in &ybm {
        let t: Vec<_> = row.iter().map(|&i| (1, model.presence(i).var())).collect();
        model.post_linear_le(&t, 1)?;
    }

    let mut x = Vec::with_capacity(inst.jobs.len());
    for job in &inst.jobs {
        let p = inst.proc_time(job);
        let mut opts = Vec::new();
        for b in idx.slots_of(job.family) {
            for (m, &ym) in ybm[b].iter().enumerate() {
                let iv = model.add_optional_interval(p, job.release, h - p, true)?;
                model.post_within(iv, ym)?;
                opts.push((b, m, iv));
            }
        }
        let lits: Vec<_> = opts.iter().map(|o| model.presence(o.2)).collect();
        model.post_exactly_one(&lits)?;
        x.push(opts);
    }

    // per slot and machine, member sizes within capacity
    for (b, &f) in idx.families.iter().enumerate() {
        let cap = inst.families[f as usize - 1].max_batch_size;
        for m in 0..machines {
            let t: Vec<_> = inst
                .jobs
                .iter()
                .zip(&x)
                .flat_map(|(job, opts)| opts.iter().map(move |o| (job.size, o)))
                .filter(|(_, o)| o.0 == b && o.1 == m)
                .map(|(s, o)| (s, model.presence(o.2).var()))
                .collect();
            model.post_linear_le(&t, cap)?;
        }
    }

    forbid_empty_batches(&mut model, &ybm, &x)?;
    add_decisions(&mut model, inst, &ybm, &x)?;
    declare_symmetries(&mut model, inst, &idx, &ybm, &x, &[], &[], true)?;
    let terms: Vec<(i64, Expr)> = match objective {
        ObjectiveKind::Twct => inst
            .jobs
            .iter()
            .zip(&x)
            .flat_map(|(job, opts)| opts.iter().map(move |o| (job.weight, Expr::EndOrZero(o.2))))
            .collect(),
        ObjectiveKind::Cmax => ybm
            .iter()
            .flatten()
            .map(|&i| (1, Expr::EndOrZero(i)))
            .collect(),
    };
    let obj = model.set_objective(objective_form(objective), &terms)?;
    let options: Vec<Vec<_>> = x
        .iter()
        .map(|opts| opts.iter().map(|o| (model.presence(o.2), o.2)).collect())
        .collect();
    bound_by_completions(&mut model, inst, objective, obj, &options)?;

    Ok(Encoding {
        variant: Variant {
            kind: EncodingKind::S,
            sb: false,
        },
        objective,
        model,
        batches: idx,
        slot_intervals: None,
        instance: inst.clone(),
        map: DecodeMap::Slots { x },
    })
}

/// With `sb` the caller orders the slots afterwards, so they are not
/// declared interchangeable.
pub(super) fn build_rs(
    inst: &Instance,
    objective: ObjectiveKind,
    sb: bool,
) -> Result<Encoding, EncodeError> {
    let h = horizon(inst);
    let machines = inst.machines as usize;
    let idx = build_batch_index(inst);
    let mut model = Model::new();

    let mut y = Vec::with_capacity(idx.len());
    for &f in &idx.families {
        let p = inst.families[f as usize - 1].proc_time;
        y.push(model.add_optional_interval(p, 0, h - p, true)?);
    }
    let ybm = batch_machine_intervals(&mut model, inst, &idx.families)?;
    for (&yb, row) in y.iter().zip(&ybm) {
        model.post_alternative(yb, row)?;
    }

    let mut xj = Vec::with_capacity(inst.jobs.len());
    let mut xjm = Vec::with_capacity(inst.jobs.len());
    let mut x = Vec::with_capacity(inst.jobs.len());
    for job in &inst.jobs {
        let p = inst.proc_time(job);
        let whole = model.add_optional_interval(p, job.release, h - p, false)?;
        let per_machine = (0..machines)
            .map(|_| model.add_optional_interval(p, 0, h - p, true))
            .collect::<Result<Vec<_>, _>>()?;
        model.post_alternative(whole, &per_machine)?;
        let mut opts = Vec::new();
        for (m, &on_m) in per_machine.iter().enumerate() {
            let mut members = Vec::new();
            for b in idx.slots_of(job.family) {
                let iv = model.add_optional_interval(p, 0, h - p, true)?;
                for v in [y[b], ybm[b][m], on_m] {
                    model.post_within(iv, v)?;
                }
                members.push(iv);
                opts.push((b, m, iv));
            }
            model.post_alternative(on_m, &members)?;
        }
        xj.push(whole);
        xjm.push(per_machine);
        x.push(opts);
    }

    let groups = inst.jobs_by_family();
    #[allow(clippy::needless_range_loop)]
    for m in 0..machines {
        for (f, members) in groups.iter().enumerate() {
            let ivs: Vec<_> = members.iter().map(|&j| xjm[j][m]).collect();
            let sizes: Vec<i64> = members.iter().map(|&j| inst.jobs[j].size).collect();
            model.post_cumulative(&ivs, &sizes, inst.families[f].max_batch_size)?;
        }
    }

    forbid_empty_batches(&mut model, &ybm, &x)?;
    add_decisions(&mut model, inst, &ybm, &x)?;
    let on_machine: Vec<Vec<IntervalId>> = (0..machines)
        .map(|m| xjm.iter().map(|r| r[m]).collect())
        .collect();
    declare_symmetries(&mut model, inst, &idx, &ybm, &x, &on_machine, &y, !sb)?;
    let terms: Vec<(i64, Expr)> = match objective {
        ObjectiveKind::Twct => inst
            .jobs
            .iter()
            .zip(&xj)
            .map(|(job, &i)| (job.weight, Expr::EndOrZero(i)))
            .collect(),
        ObjectiveKind::Cmax => xj.iter().map(|&i| (1, Expr::EndOrZero(i))).collect(),
    };
    model.set_objective(objective_form(objective), &terms)?;

    Ok(Encoding {
        variant: Variant {
            kind: EncodingKind::Rs,
            sb: false,
        },
        objective,
        model,
        batches: idx,
        slot_intervals: Some(y),
        instance: inst.clone(),
        map: DecodeMap::Slots { x },
    })
}
