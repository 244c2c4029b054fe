use super::{
    bound_by_completions, build_automaton, build_batch_index, iv_vars, objective_form, DecodeMap,
    EncodeError, Encoding, EncodingKind, Variant,
};
use crate::cpcore::{Expr, Model};
use crate::domain::{horizon, Instance, ObjectiveKind};

pub(super) fn build(inst: &Instance, objective: ObjectiveKind) -> Result<Encoding, EncodeError> {
    let h = horizon(inst);
    let machines = inst.machines as usize;
    let proc: Vec<i64> = inst.families.iter().map(|f| f.proc_time).collect();
    let aut = build_automaton(&proc);
    let mut model = Model::new();

    // transition values τ_mt, t = 0..=H
    let states: Vec<i64> = (0..aut.n_states as i64).collect();
    let tau: Vec<Vec<_>> = (0..machines)
        .map(|_| {
            (0..=h)
                .map(|_| model.new_int_var_values(&states))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    // everything tied to one machine, for the machine symmetry
    let mut per_machine: Vec<Vec<_>> = tau.clone();
    let mut x = Vec::with_capacity(inst.jobs.len());
    for job in &inst.jobs {
        let p = inst.proc_time(job);
        let sigma = aut.sigma[job.family as usize - 1] as i64;
        let latest = h - p;
        let mut row = Vec::with_capacity(machines);
        for m in 0..machines {
            let iv = model.add_optional_interval(p, job.release, latest, true)?;
            let pres = model.presence(iv);
            // ŝ = start if on m, else H
            let shifted: Vec<i64> = (job.release..=latest).chain([h]).collect();
            let s_hat = model.new_int_var_values(&shifted)?;
            model.post_cond_value(pres, model.start(iv), h, s_hat)?;
            // τ̂ = σ if on m, else 0
            let sigma_var = model.constant(sigma)?;
            let t_hat = model.new_int_var_values(&[0, sigma])?;
            model.post_cond_value(pres, sigma_var, 0, t_hat)?;
            model.post_element(s_hat, &tau[m], t_hat)?;
            per_machine[m].extend(iv_vars(&model, [iv]));
            per_machine[m].extend([s_hat, sigma_var, t_hat]);
            row.push(iv);
        }
        let lits: Vec<_> = row.iter().map(|&i| model.presence(i)).collect();
        model.post_exactly_one(&lits)?;
        x.push(row);
    }

    let groups = inst.jobs_by_family();
    for m in 0..machines {
        for (f, members) in groups.iter().enumerate() {
            let ivs: Vec<_> = members.iter().map(|&j| x[j][m]).collect();
            let sizes: Vec<i64> = members.iter().map(|&j| inst.jobs[j].size).collect();
            model.post_cumulative(&ivs, &sizes, inst.families[f].max_batch_size)?;
        }
        model.post_automaton(&tau[m], 0, &aut.final_states(), &aut.triples())?;
    }

    let all: Vec<_> = x.iter().flatten().copied().collect();
    model.add_decision_intervals(&all)?;
    model.add_interchangeable(&per_machine)?;
    let terms: Vec<(i64, Expr)> = match objective {
        ObjectiveKind::Twct => inst
            .jobs
            .iter()
            .zip(&x)
            .flat_map(|(job, row)| row.iter().map(move |&i| (job.weight, Expr::EndOrZero(i))))
            .collect(),
        ObjectiveKind::Cmax => all.iter().map(|&i| (1, Expr::EndOrZero(i))).collect(),
    };
    let obj = model.set_objective(objective_form(objective), &terms)?;
    let options: Vec<Vec<_>> = x
        .iter()
        .map(|row| row.iter().map(|&i| (model.presence(i), i)).collect())
        .collect();
    bound_by_completions(&mut model, inst, objective, obj, &options)?;

    Ok(Encoding {
        variant: Variant {
            kind: EncodingKind::Au,
            sb: false,
        },
        objective,
        model,
        batches: build_batch_index(inst),
        slot_intervals: None,
        instance: inst.clone(),
        map: DecodeMap::Au { x },
    })
}
