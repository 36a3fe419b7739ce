//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; errors surface as JavaScript
//! exceptions.

pub mod demo;

use demo::SbmParams;
use latentgraph::ssl::MaskStrategy;
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn to_json<T: Serialize>(r: latentgraph::Result<T>) -> Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

/// Masking rates and sample masks for the given difficulty scores.
#[wasm_bindgen(js_name = maskPreview)]
pub fn mask_preview(scores: Vec<f64>, ratio: f64, exploit: f64, draws: u32, seed: u32) -> Result<String, JsError> {
    to_json(demo::mask_preview(&scores, ratio, exploit, draws as usize, seed.into()))
}

/// Degree, class and homophily statistics of a block-model graph.
#[wasm_bindgen(js_name = sbmSummary)]
pub fn sbm_summary(nodes: u32, classes: u32, intra_p: f64, inter_p: f64, seed: u32) -> Result<String, JsError> {
    to_json(demo::sbm_summary(&params(nodes, classes, intra_p, inter_p, seed)))
}

/// Loss curve and downstream accuracies of a short training run.
#[wasm_bindgen(js_name = trainSbm)]
pub fn train_sbm(
    nodes: u32,
    classes: u32,
    intra_p: f64,
    inter_p: f64,
    seed: u32,
    epochs: u32,
    strategy: &str,
) -> Result<String, JsError> {
    let strategy = match strategy {
        "random" => MaskStrategy::Random,
        "diffi" => MaskStrategy::Diffi,
        "prob" => MaskStrategy::Prob,
        other => return Err(JsError::new(&format!("unknown strategy {other:?}"))),
    };
    let p = params(nodes, classes, intra_p, inter_p, seed);
    to_json(demo::train_sbm(&p, epochs as usize, strategy))
}

fn params(nodes: u32, classes: u32, intra_p: f64, inter_p: f64, seed: u32) -> SbmParams {
    SbmParams {
        nodes: nodes as usize,
        classes: classes as usize,
        intra_p,
        inter_p,
        seed: seed.into(),
    }
}
