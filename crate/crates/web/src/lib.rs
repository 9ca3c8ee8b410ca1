//! Browser bindings: enumerate an instance, draw its cyclic network with one
//! sequence highlighted, and certify the count cuts.

use serde_json::json;
use wasm_bindgen::prelude::*;

use cyclic_runpoly::cuts::{certificates_jsonl, certify_facet, family_1212_all_shifts, y_count_cuts, z_count_cuts};
use cyclic_runpoly::instance::{bitstring, enumerate_z_with_limit, is_feasible};
use cyclic_runpoly::netflow::{build_network, network_dot, point_to_cycle};
use cyclic_runpoly::Instance;

/// Largest horizon the page will enumerate.
pub const PAGE_LIMIT_N: usize = 14;

fn parse(instance_json: &str) -> Result<Instance, String> {
    let inst = Instance::from_json(instance_json).map_err(|e| e.to_string())?;
    if inst.n > PAGE_LIMIT_N {
        return Err(format!("n={} is too large for the page (limit {PAGE_LIMIT_N})", inst.n));
    }
    Ok(inst)
}

pub fn enumerate(instance_json: &str) -> Result<String, String> {
    let inst = parse(instance_json)?;
    let z = enumerate_z_with_limit(&inst, PAGE_LIMIT_N).map_err(|e| e.to_string())?;
    let points: Vec<_> = z
        .iter()
        .map(|p| {
            let y = p.states().expect("binary");
            let s = p.startups().expect("binary");
            json!({ "y": bitstring(&y), "z": bitstring(&s), "startups": s.iter().filter(|&&v| v == 1).count() })
        })
        .collect();
    Ok(json!({ "instance": inst.descriptor(), "count": z.len(), "points": points }).to_string())
}

/// DOT text of the cyclic network; when `states` is a feasible bit string
/// its cycle is drawn dashed.
pub fn cycle_dot(instance_json: &str, states: &str) -> Result<String, String> {
    let inst = parse(instance_json)?;
    let net = build_network(&inst);
    let states = states.trim();
    if states.is_empty() {
        return Ok(network_dot(&net, &[]));
    }
    let y: Vec<u8> = states
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(format!("unexpected character {c:?} in state string")),
        })
        .collect::<Result<_, _>>()?;
    if y.len() != inst.n {
        return Err(format!("state string has length {}, expected {}", y.len(), inst.n));
    }
    if !is_feasible(&inst, &y) {
        return Err(format!("{states} is not a feasible sequence"));
    }
    let cycle = point_to_cycle(&net, &y).map_err(|e| e.to_string())?;
    Ok(network_dot(&net, &cycle))
}

/// JSON lines with validity and facet status of the count cuts, plus the
/// three shifted families when the bounds are `(1,2,1,2)`.
pub fn certificates(instance_json: &str) -> Result<String, String> {
    let inst = parse(instance_json)?;
    let err = |e: cyclic_runpoly::Error| e.to_string();
    let (ub, lb) = z_count_cuts(&inst).map_err(err)?;
    let (ylb, yub) = y_count_cuts(&inst).map_err(err)?;
    let mut cuts = vec![ub, lb, ylb, yub];
    if inst.constant_bounds() == Some((1, 2, 1, 2)) && inst.n >= 5 {
        cuts.extend(family_1212_all_shifts(&inst).map_err(err)?);
    }
    let certs = cuts.iter().map(|c| certify_facet(&inst, c)).collect::<Result<Vec<_>, _>>().map_err(err)?;
    Ok(certificates_jsonl(&certs))
}

#[wasm_bindgen(js_name = enumerate)]
pub fn enumerate_js(instance_json: &str) -> Result<String, JsError> {
    enumerate(instance_json).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cycleDot)]
pub fn cycle_dot_js(instance_json: &str, states: &str) -> Result<String, JsError> {
    cycle_dot(instance_json, states).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = certificates)]
pub fn certificates_js(instance_json: &str) -> Result<String, JsError> {
    certificates(instance_json).map_err(|e| JsError::new(&e))
}
