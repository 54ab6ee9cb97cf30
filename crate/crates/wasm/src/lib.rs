//! Browser bindings for three small sweeps. Each returns a JSON string so
//! the page can plot it without glue types.

use cosetlab::games::{run_builtin_moe, MOE_ADVERSARIES};
use cosetlab::quantum::random::{random_projector, random_state};
use cosetlab::quantum::{BinaryProjector, QuantumRegister};
use cosetlab::resample::{resample_truncated_law, truncated_limit, FiniteDistribution};
use cosetlab::threshold::{build_ti, ProjectiveFamily};
use cosetlab::{stream_rng, Error};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Exact TV and ⊥-mass of truncated resampling against the try budget, for
/// a random law on `support` points hashed into `buckets` values. The
/// budget of `truncated_limit(epsilon)` is reported alongside.
#[wasm_bindgen]
pub fn resampling_curve(support: u32, buckets: u32, epsilon: f64, seed: u32) -> Result<String, JsValue> {
    use rand::Rng;
    if !(1..=1024).contains(&support) || buckets == 0 {
        return Err(JsValue::from_str("support must be in 1..=1024 and buckets positive"));
    }
    let mut rng = stream_rng(seed as u64, 0);
    let weights: Vec<f64> = (0..support).map(|_| rng.random_range(0.01..1.0)).collect();
    let d = FiniteDistribution::from_weights((0..support as u64).collect(), weights).map_err(js)?;
    let f: Vec<u64> = (0..support).map(|_| rng.random_range(0..buckets as u64)).collect();
    let mut points = Vec::new();
    let mut t = 1u64;
    while t <= 1 << 16 {
        let law = resample_truncated_law(&d, |x| f[x as usize], t);
        points.push(json!({"t": t, "tv": law.tv_from(&d), "bottom": law.bottom}));
        t = (t * 3).div_ceil(2);
    }
    let limit = truncated_limit(epsilon, d.len()).map_err(js)?;
    Ok(json!({"points": points, "epsilon": epsilon, "t_limit": limit}).to_string())
}

/// Empirical and closed-form joint win rates of the built-in MoE adversaries.
#[wasm_bindgen]
pub fn moe_rates(d: u32, trials: u32, seed: u32) -> Result<String, JsValue> {
    let rows = MOE_ADVERSARIES
        .iter()
        .map(|a| {
            let run = run_builtin_moe(d as usize, a, trials as u64, seed as u64)?;
            Ok(json!({
                "adversary": a.name,
                "rate": run.rate(),
                "ci_low": run.summary.ci_low,
                "ci_high": run.summary.ci_high,
                "analytic": run.expected,
            }))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(js)?;
    Ok(json!({"d": d, "trials": trials, "rows": rows}).to_string())
}

/// `Pr[TI_η = 1]` over a grid of η for a random projective family and a
/// random pure state in dimension `dim`, with the mixture's spectrum.
#[wasm_bindgen]
pub fn threshold_sweep(dim: u32, family_size: u32, seed: u32) -> Result<String, JsValue> {
    use rand::Rng;
    if !dim.is_power_of_two() || !(2..=64).contains(&dim) || family_size == 0 {
        return Err(JsValue::from_str("dim must be a power of two in 2..=64"));
    }
    let dim = dim as usize;
    let mut rng = stream_rng(seed as u64, 0);
    let projectors = (0..family_size)
        .map(|_| BinaryProjector::dense(random_projector(dim, rng.random_range(1..dim), &mut rng)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(js)?;
    let family = ProjectiveFamily::uniform(projectors).map_err(js)?;
    let amps = random_state(dim, &mut rng).iter().copied().collect();
    let reg = QuantumRegister::from_amplitudes(dim.trailing_zeros() as usize, amps).map_err(js)?;
    let ti = build_ti(&family, 0.0).map_err(js)?;
    let mut points = Vec::new();
    for i in 0..=100 {
        let eta = i as f64 / 100.0;
        let p = ti.at_threshold(eta).and_then(|t| t.accept_probability(&reg)).map_err(js)?;
        points.push(json!({"eta": eta, "accept": p}));
    }
    let spectrum: Vec<f64> = ti.eigenvalues().iter().copied().collect();
    Ok(json!({"points": points, "spectrum": spectrum}).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn curves_are_well_formed() {
        let v: Value = serde_json::from_str(&resampling_curve(32, 8, 0.05, 1).unwrap()).unwrap();
        let pts = v["points"].as_array().unwrap();
        assert!(pts.last().unwrap()["tv"].as_f64().unwrap() < 1e-6);

        let v: Value = serde_json::from_str(&moe_rates(4, 256, 2).unwrap()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 5);

        let v: Value = serde_json::from_str(&threshold_sweep(8, 4, 3).unwrap()).unwrap();
        let first = v["points"][0]["accept"].as_f64().unwrap();
        let last = v["points"][100]["accept"].as_f64().unwrap();
        assert!((first - 1.0).abs() < 1e-9 && last <= first);
    }
}
