//! Browser bindings for the bundled case studies. Every export returns a
//! JSON string; the plain `*_json` functions carry the logic so they can be
//! tested natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use snn_energy::energy::sram_access_energy;
use snn_energy::presets::{case, CaseStudy, CASES};
use snn_energy::report::{sweep, SweepBase, SweepParam};
use snn_energy::{
    compare_modes, Activity, EnergyBreakdown, EstimateOptions, RangePolicy, TechProfile,
};

fn find(key: &str) -> Result<&'static CaseStudy, String> {
    case(key).ok_or_else(|| format!("unknown case study `{key}`"))
}

fn profile(policy: &str, fifo_depth: u32) -> Result<TechProfile, String> {
    let policy: RangePolicy = policy
        .parse()
        .map_err(|e: snn_energy::Error| e.to_string())?;
    let p = TechProfile::default()
        .with_policy(policy)
        .with_fifo_depth(fifo_depth as usize);
    p.validate().map_err(|e| e.to_string())?;
    Ok(p)
}

#[derive(Serialize)]
struct LayerTotals {
    label: String,
    fnn_nj: f64,
    snn_nj: f64,
}

#[derive(Serialize)]
struct CompareView {
    network: String,
    spike_rate: f64,
    fnn: EnergyBreakdown,
    snn: EnergyBreakdown,
    ratio: f64,
    reference_ratio: f64,
    layers: Vec<LayerTotals>,
}

pub fn compare_json(key: &str, rate: f64, fifo_depth: u32, policy: &str) -> Result<String, String> {
    let cs = find(key)?;
    let spec = cs.spec().map_err(|e| e.to_string())?;
    let activity = Activity::rate(rate).map_err(|e| e.to_string())?;
    let c = compare_modes(
        &spec,
        &activity,
        &profile(policy, fifo_depth)?,
        EstimateOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let view = CompareView {
        network: spec.name.clone(),
        spike_rate: rate,
        fnn: c.fnn.total,
        snn: c.snn.total,
        ratio: c.ratio,
        reference_ratio: cs.reference_ratio,
        layers: c
            .fnn
            .layers
            .iter()
            .zip(&c.snn.layers)
            .map(|(f, s)| LayerTotals {
                label: f.label.clone(),
                fnn_nj: f.energy.total,
                snn_nj: s.energy.total,
            })
            .collect(),
    };
    Ok(serde_json::to_string(&view).expect("view serializes"))
}

pub fn sweep_json(
    key: &str,
    from: f64,
    to: f64,
    steps: u32,
    policy: &str,
) -> Result<String, String> {
    let cs = find(key)?;
    let base = SweepBase {
        spec: cs.spec().map_err(|e| e.to_string())?,
        rate: cs.spike_rate,
        input_events: None,
        profile: profile(policy, 1000)?,
        options: EstimateOptions::default(),
    };
    let rows =
        sweep(&base, SweepParam::SpikeRate, from, to, steps as usize).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&rows).expect("rows serialize"))
}

/// `n` log-spaced points of the SRAM access-energy curve up to `max_bytes`.
pub fn sram_curve_json(policy: &str, max_bytes: f64, n: u32) -> Result<String, String> {
    let p = profile(policy, 1000)?;
    if max_bytes.is_nan() || max_bytes <= 1.0 || n < 2 {
        return Err("need max_bytes > 1 and at least two points".into());
    }
    let points: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let b = max_bytes.powf(i as f64 / (n - 1) as f64);
            (b, sram_access_energy(&p, b).expect("positive size"))
        })
        .collect();
    Ok(serde_json::to_string(&points).expect("points serialize"))
}

pub fn cases_json() -> String {
    let list: Vec<_> = CASES
        .iter()
        .map(|c| serde_json::json!({ "key": c.key, "spike_rate": c.spike_rate, "reference_ratio": c.reference_ratio }))
        .collect();
    serde_json::Value::Array(list).to_string()
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn compare_case(
    key: &str,
    rate: f64,
    fifo_depth: u32,
    policy: &str,
) -> Result<String, JsError> {
    js(compare_json(key, rate, fifo_depth, policy))
}

#[wasm_bindgen]
pub fn sweep_spike_rate(
    key: &str,
    from: f64,
    to: f64,
    steps: u32,
    policy: &str,
) -> Result<String, JsError> {
    js(sweep_json(key, from, to, steps, policy))
}

#[wasm_bindgen]
pub fn sram_curve(policy: &str, max_bytes: f64, n: u32) -> Result<String, JsError> {
    js(sram_curve_json(policy, max_bytes, n))
}

#[wasm_bindgen]
pub fn list_cases() -> String {
    cases_json()
}

#[wasm_bindgen]
pub fn example_network(key: &str) -> Result<String, JsError> {
    js(find(key).map(|c| c.config.to_string()))
}
