//! Browser bindings. Every call takes and returns JSON text so the page
//! needs no generated type glue.

use std::time::Duration;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use pbatch::cpcore::SolveParams;
use pbatch::domain::{validate_solution, Instance, ObjectiveKind};
use pbatch::encodings::{build, build_automaton, Variant};
use pbatch::instgen::{generate_instance, GenParams};

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

pub fn generate_json(
    jobs: usize,
    families: usize,
    machines: u32,
    seed: u64,
) -> Result<String, String> {
    let inst = generate_instance(GenParams {
        n_jobs: jobs,
        n_families: families,
        n_machines: machines,
        seed,
    })
    .map_err(err)?;
    Ok(inst.to_json())
}

/// `{status, value, nodes, millis, solution}`; `solution` is null when
/// nothing was found.
pub fn solve_json(
    instance: &str,
    encoding: &str,
    objective: &str,
    limit_ms: u32,
) -> Result<String, String> {
    let inst = Instance::from_json(instance).map_err(err)?;
    inst.check().map_err(err)?;
    let variant: Variant = encoding.parse().map_err(err)?;
    let objective: ObjectiveKind = objective.parse().map_err(err)?;
    let mut enc = build(&inst, variant, objective).map_err(err)?;
    let out = enc.solve(&SolveParams::with_time_limit(Duration::from_millis(
        limit_ms.into(),
    )));
    let solution = match out.best_value {
        Some(_) => {
            let sol = enc.decode(&out).map_err(err)?;
            let report = validate_solution(&inst, &sol);
            if let Some(v) = report.violations.first() {
                return Err(format!("decoded schedule is invalid: {v}"));
            }
            serde_json::to_value(&sol).map_err(err)?
        }
        None => Value::Null,
    };
    Ok(json!({
        "status": out.status.as_str(),
        "value": out.best_value,
        "nodes": out.stats.nodes,
        "millis": out.wall_time.as_millis() as u64,
        "solution": solution,
    })
    .to_string())
}

/// The machine automaton for the given family processing times:
/// `{states, initial, finals, arcs: [{from, to, label, kind}]}`.
pub fn automaton_json(proc_times: &[i64]) -> Result<String, String> {
    if proc_times.is_empty() || proc_times.iter().any(|&p| p < 1) {
        return Err("processing times must be positive".into());
    }
    let a = build_automaton(proc_times);
    let arcs: Vec<Value> = a
        .arcs
        .iter()
        .map(|arc| json!({"from": arc.from, "to": arc.to, "label": arc.label, "kind": format!("{:?}", arc.kind)}))
        .collect();
    Ok(json!({
        "states": a.n_states,
        "initial": 0,
        "finals": a.final_states(),
        "arcs": arcs,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn generate(jobs: usize, families: usize, machines: u32, seed: u64) -> Result<String, JsError> {
    generate_json(jobs, families, machines, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn solve(
    instance: &str,
    encoding: &str,
    objective: &str,
    limit_ms: u32,
) -> Result<String, JsError> {
    solve_json(instance, encoding, objective, limit_ms).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn automaton(proc_times: Vec<i64>) -> Result<String, JsError> {
    automaton_json(&proc_times).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_instance_solves_optimally() {
        let inst = generate_json(5, 2, 1, 4).unwrap();
        let out: Value =
            serde_json::from_str(&solve_json(&inst, "as+sb", "cmax", 10_000).unwrap()).unwrap();
        assert_eq!(out["status"], "OPTIMAL");
        assert_eq!(out["value"], out["solution"]["value"]);
    }

    #[test]
    fn automaton_shape() {
        let a: Value = serde_json::from_str(&automaton_json(&[2, 3]).unwrap()).unwrap();
        assert_eq!(a["states"], 6);
        assert_eq!(a["finals"], json!([0, 2, 5]));
        assert!(automaton_json(&[]).is_err());
    }

    #[test]
    fn bad_input_is_an_error_message() {
        assert!(solve_json("{}", "au", "twct", 10).is_err());
        let inst = generate_json(3, 1, 1, 0).unwrap();
        assert!(solve_json(&inst, "s+sb", "twct", 10)
            .unwrap_err()
            .contains("s+sb"));
    }
}
