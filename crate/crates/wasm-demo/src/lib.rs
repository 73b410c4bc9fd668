//! Browser bindings for three interactive views: Holevo quantities of the
//! encoding schemes against the site-state eigenvalue, entropy traces of a
//! qubit Bernoulli shift, and the Weyl twirl of a random matrix.
//!
//! Every export returns a JSON string; the plain `*_json` functions carry the
//! logic so they can be exercised off the browser.

use qdyn_core::bernoulli::{BernoulliShiftSystem, SitedPartition};
use qdyn_core::channel::{holevo_chi, scheme, SchemeKind};
use qdyn_core::dynsys::entropy_trace;
use qdyn_core::format::{matrix_to_literal, MatrixLiteral};
use qdyn_core::opalg::weyl_family;
use qdyn_core::partition::OperationalPartition;
use qdyn_core::random::{random_matrix, rng};
use qdyn_core::verify::twirl_residual;
use qdyn_core::{ComplexMatrix, DensityMatrix, Guard};
use serde::Serialize;
use wasm_bindgen::prelude::*;

pub const MAX_N: usize = 4;

#[derive(Serialize)]
struct CurvePoint {
    p: f64,
    classical: f64,
    weyl: f64,
    dense_coding: f64,
    entropy_rate: f64,
}

/// Per-letter chi of each scheme for `ρ = diag(p, 1−p)`, `p` on an even grid
/// over `[0.5, 1]`.
pub fn scheme_curves_json(points: usize) -> Result<String, String> {
    let points = points.clamp(2, 201);
    let guard = Guard::default();
    let mut curve = Vec::with_capacity(points);
    for i in 0..points {
        let p = 0.5 + 0.5 * i as f64 / (points - 1) as f64;
        let rho = DensityMatrix::from_diagonal(&[p, 1.0 - p]).map_err(|e| e.to_string())?;
        let chi = |kind| -> Result<f64, String> {
            let s = scheme(kind, &rho).map_err(|e| e.to_string())?;
            let ens = s.single_letter_ensemble(guard).map_err(|e| e.to_string())?;
            holevo_chi(&ens).map_err(|e| e.to_string())
        };
        curve.push(CurvePoint {
            p,
            classical: chi(SchemeKind::Classical)?,
            weyl: chi(SchemeKind::Weyl)?,
            dense_coding: chi(SchemeKind::DenseCoding)?,
            entropy_rate: BernoulliShiftSystem::new(rho.clone())
                .analytic_entropy()
                .map_err(|e| e.to_string())?,
        });
    }
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Trace {
    partition: String,
    entropies: Vec<f64>,
    increments: Vec<f64>,
    analytic: f64,
}

/// Entropy trace of a named single-site partition (`weyl`, `computational`,
/// `trivial`) on the qubit shift with site state `diag(p, 1−p)`.
pub fn entropy_trace_json(p: f64, partition: &str, n_max: usize) -> Result<String, String> {
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("p = {p} is not a probability"));
    }
    let n_max = n_max.clamp(1, MAX_N);
    let system = BernoulliShiftSystem::new(
        DensityMatrix::from_diagonal(&[p, 1.0 - p]).map_err(|e| e.to_string())?,
    );
    let x = match partition {
        "weyl" => OperationalPartition::weyl(2),
        "computational" => OperationalPartition::computational(2),
        "trivial" => OperationalPartition::trivial(2),
        other => return Err(format!("unknown partition '{other}'")),
    };
    let x = SitedPartition::single_site(x).map_err(|e| e.to_string())?;
    let trace = entropy_trace(&system, &x, n_max, Guard::default()).map_err(|e| e.to_string())?;
    serde_json::to_string(&Trace {
        partition: partition.to_string(),
        entropies: trace.entropies,
        increments: trace.increments,
        analytic: system.analytic_entropy().map_err(|e| e.to_string())?,
    })
    .map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Twirl {
    d: usize,
    sigma: MatrixLiteral,
    twirled: MatrixLiteral,
    residual: f64,
}

/// Random `d×d` matrix, its average over the Weyl conjugations, and the
/// distance of that average from `tr(σ)·1/d`.
pub fn twirl_json(seed: u64, d: usize) -> Result<String, String> {
    if !(1..=6).contains(&d) {
        return Err(format!("d = {d} outside 1..=6"));
    }
    let sigma = random_matrix(&mut rng(seed), d, d);
    let mut acc = ComplexMatrix::zeros(d, d);
    for w in weyl_family(d) {
        acc += &w * &sigma * w.adjoint();
    }
    let twirled = acc.unscale((d * d) as f64);
    serde_json::to_string(&Twirl {
        d,
        sigma: matrix_to_literal(&sigma),
        twirled: matrix_to_literal(&twirled),
        residual: twirl_residual(&sigma),
    })
    .map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn scheme_curves(points: u32) -> Result<String, JsValue> {
    scheme_curves_json(points as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn entropy_trace_of(p: f64, partition: &str, n_max: u32) -> Result<String, JsValue> {
    entropy_trace_json(p, partition, n_max as usize).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn weyl_twirl(seed: u32, d: u32) -> Result<String, JsValue> {
    twirl_json(seed as u64, d as usize).map_err(|e| JsValue::from_str(&e))
}
