use super::{
    bound_by_completions, build_batch_index, iv_vars, objective_form, DecodeMap, EncodeError,
    Encoding, EncodingKind, Variant,
};
use crate::cpcore::{Expr, Model};
use crate::domain::{horizon, Instance, ObjectiveKind};

/// With `sb` the caller orders the slots afterwards, so they are not
/// declared interchangeable.
pub(super) fn build(
    inst: &Instance,
    objective: ObjectiveKind,
    sb: bool,
) -> Result<Encoding, EncodeError> {
    let h = horizon(inst);
    let machines = inst.machines as usize;
    let idx = build_batch_index(inst);
    let groups = inst.jobs_by_family();
    let mut model = Model::new();

    let mut y = Vec::with_capacity(idx.len());
    let mut ybm = Vec::with_capacity(idx.len());
    for &f in &idx.families {
        let fam = &inst.families[f as usize - 1];
        let earliest = groups[f as usize - 1]
            .iter()
            .map(|&j| inst.jobs[j].release)
            .min()
            .unwrap_or(0);
        let latest = h - fam.proc_time;
        let yb = model.add_optional_interval(fam.proc_time, earliest, latest, true)?;
        let row = (0..machines)
            .map(|_| model.add_optional_interval(fam.proc_time, earliest, latest, true))
            .collect::<Result<Vec<_>, _>>()?;
        model.post_alternative(yb, &row)?;
        y.push(yb);
        ybm.push(row);
    }
    for m in 0..machines {
        let row: Vec<_> = ybm.iter().map(|r| r[m]).collect();
        model.post_no_overlap(&row)?;
    }

    // z_jb: job j in slot b
    let mut z = Vec::with_capacity(inst.jobs.len());
    for job in &inst.jobs {
        let mut opts = Vec::new();
        for b in idx.slots_of(job.family) {
            let lit = model.new_lit()?;
            model.post_lit_implies_start_ge(lit, y[b], job.release)?;
            opts.push((b, lit));
        }
        let lits: Vec<_> = opts.iter().map(|o| o.1).collect();
        model.post_exactly_one(&lits)?;
        z.push(opts);
    }

    for (f, members) in groups.iter().enumerate() {
        let cap = inst.families[f].max_batch_size;
        let n = members.len() as i64;
        for b in idx.by_family[f].clone() {
            let k = b - idx.by_family[f].start;
            let pres = model.presence(y[b]).var();
            let lits: Vec<_> = members.iter().map(|&j| z[j][k].1.var()).collect();
            // some job ≥ presence
            let mut t: Vec<(i64, _)> = lits.iter().map(|&l| (-1, l)).collect();
            t.push((1, pres));
            model.post_linear_le(&t, 0)?;
            // jobs ≤ |J_f| · presence
            let mut t: Vec<(i64, _)> = lits.iter().map(|&l| (1, l)).collect();
            t.push((-n, pres));
            model.post_linear_le(&t, 0)?;
            // load ≤ u_f · presence
            let mut t: Vec<(i64, _)> = members
                .iter()
                .zip(&lits)
                .map(|(&j, &l)| (inst.jobs[j].size, l))
                .collect();
            t.push((-cap, pres));
            model.post_linear_le(&t, 0)?;
        }
    }

    // fill each batch as soon as it is placed, heaviest jobs first
    let mut batches = Vec::new();
    for (f, members) in groups.iter().enumerate() {
        let mut order = members.clone();
        order.sort_by_key(|&j| std::cmp::Reverse(inst.jobs[j].weight));
        for b in idx.by_family[f].clone() {
            let k = b - idx.by_family[f].start;
            let lits: Vec<_> = order.iter().map(|&j| z[j][k].1).collect();
            batches.extend(ybm[b].iter().map(|&i| (i, lits.clone())));
        }
    }
    model.add_decision_batches(&batches)?;
    let all_z: Vec<_> = z.iter().flatten().map(|o| o.1).collect();
    model.add_decision_lits(&all_z)?;

    let machine_members: Vec<Vec<_>> = (0..machines)
        .map(|m| iv_vars(&model, ybm.iter().map(|r| r[m])))
        .collect();
    model.add_interchangeable(&machine_members)?;
    if !sb {
        for (f, members) in groups.iter().enumerate() {
            let slots: Vec<Vec<_>> = idx.by_family[f]
                .clone()
                .map(|b| {
                    let k = b - idx.by_family[f].start;
                    let mut v =
                        iv_vars(&model, std::iter::once(y[b]).chain(ybm[b].iter().copied()));
                    v.extend(members.iter().map(|&j| z[j][k].1.var()));
                    v
                })
                .collect();
            model.add_interchangeable(&slots)?;
        }
    }

    let terms: Vec<(i64, Expr)> = match objective {
        ObjectiveKind::Twct => {
            let mut terms = Vec::with_capacity(inst.jobs.len());
            for (job, opts) in inst.jobs.iter().zip(&z) {
                let p = inst.proc_time(job);
                // completion time of the job: end of its chosen slot
                let c = model.new_int_var(job.release + p, h)?;
                let options: Vec<_> = opts.iter().map(|&(b, l)| (l, y[b])).collect();
                model.post_end_of_selected(c, &options)?;
                terms.push((job.weight, Expr::Var(c)));
            }
            terms
        }
        ObjectiveKind::Cmax => y.iter().map(|&i| (1, Expr::EndOrZero(i))).collect(),
    };
    let obj = model.set_objective(objective_form(objective), &terms)?;
    if objective == ObjectiveKind::Cmax {
        let options: Vec<Vec<_>> = z
            .iter()
            .map(|opts| opts.iter().map(|&(b, l)| (l, y[b])).collect())
            .collect();
        bound_by_completions(&mut model, inst, objective, obj, &options)?;
    }

    Ok(Encoding {
        variant: Variant {
            kind: EncodingKind::As,
            sb: false,
        },
        objective,
        model,
        batches: idx,
        slot_intervals: Some(y.clone()),
        instance: inst.clone(),
        map: DecodeMap::As { z, y, ybm },
    })
}
