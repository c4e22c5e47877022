//! wasm-bindgen bindings for the browser demo in `www/`.
//!
//! Each operation returns a [`Curves`] table that the page plots directly.

use molwg::circuits::{run_hom, stark_tune, SourceSpec};
use molwg::constants::C;
use molwg::coupling::{coupling_ratio, guided_fraction, mirror_enhancement};
use molwg::phase::{scan, summarize_peaks, NonlinearParams};
use wasm_bindgen::prelude::*;

const LAMBDA: f64 = 785e-9;

/// Named columns of equal length.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

#[wasm_bindgen]
impl Curves {
    pub fn width(&self) -> usize {
        self.columns.len()
    }

    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self, i: usize) -> Option<String> {
        self.names.get(i).cloned()
    }

    pub fn column(&self, i: usize) -> Option<Vec<f64>> {
        self.columns.get(i).cloned()
    }
}

fn rad(mhz: f64) -> f64 {
    2.0 * std::f64::consts::PI * mhz * 1e6
}

fn grid(lo: f64, hi: f64, samples: usize) -> molwg::Result<Vec<f64>> {
    if samples < 2 || !(hi > lo) {
        return Err(molwg::Error::InvalidParameter(format!(
            "need >= 2 samples over an increasing range, got {samples} over [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples).map(|k| lo + step * k as f64).collect())
}

fn phase_curves_inner(
    linewidth_mhz: f64,
    eta: f64,
    gamma_wg_fraction: f64,
    half_width: f64,
    samples: usize,
) -> molwg::Result<Curves> {
    let p = NonlinearParams {
        gamma: rad(linewidth_mhz),
        eta,
        gamma_wg_fraction,
        photon_numbers: vec![1, 2],
    };
    let r = scan(&p, -half_width * p.gamma, half_width * p.gamma, samples)?;
    let abs = |v: &[f64]| v.iter().map(|x| x.abs()).collect::<Vec<_>>();
    Ok(Curves {
        names: ["delta/Γ", "|φ(1)|", "|φ(2)|", "|φ(1)−φ(2)|", "extinction(1)"]
            .map(String::from)
            .to_vec(),
        columns: vec![
            r.delta.iter().map(|d| d / p.gamma).collect(),
            abs(&r.phase[0]),
            abs(&r.phase[1]),
            abs(&r.differential),
            r.extinction[0].clone(),
        ],
    })
}

fn phase_peaks_inner(linewidth_mhz: f64, eta: f64, gamma_wg_fraction: f64) -> molwg::Result<Vec<f64>> {
    let p = NonlinearParams {
        gamma: rad(linewidth_mhz),
        eta,
        gamma_wg_fraction,
        photon_numbers: vec![1, 2],
    };
    let peaks = summarize_peaks(&molwg::phase::default_scan(&p)?)?;
    Ok(vec![
        peaks.phi1.value.abs(),
        peaks.phi1.delta / p.gamma,
        peaks.differential.value.abs(),
        peaks.differential.delta / p.gamma,
        peaks.extinction1_at_differential_peak,
    ])
}

fn coupling_curves_inner(
    area_min: f64,
    area_max: f64,
    samples: usize,
    index: f64,
    v_g_over_c_over_n: f64,
    rate_correction: f64,
) -> molwg::Result<Curves> {
    if !(index >= 1.0 && v_g_over_c_over_n > 0.0 && rate_correction > 0.0 && area_min > 0.0) {
        return Err(molwg::Error::InvalidParameter(
            "index >= 1 and positive areas, v_g and correction required".into(),
        ));
    }
    let areas = grid(area_min, area_max, samples)?;
    let v_g = v_g_over_c_over_n * C / index;
    let ratio: Vec<f64> = areas
        .iter()
        .map(|a| coupling_ratio([1.0, 0.0, 0.0], LAMBDA, index, a * LAMBDA * LAMBDA, v_g))
        .collect();
    Ok(Curves {
        names: ["A_eff/λ²", "Γ_wg/Γ_rad", "guided fraction", "with mirror"]
            .map(String::from)
            .to_vec(),
        columns: vec![
            areas,
            ratio.clone(),
            ratio.iter().map(|&r| guided_fraction(r, rate_correction)).collect(),
            ratio.iter().map(|&r| mirror_enhancement(r, rate_correction)).collect(),
        ],
    })
}

fn hom_curves_inner(half_width: f64, samples: usize, linewidth_ratio: f64) -> molwg::Result<Curves> {
    let g = rad(30.0);
    let detunings = grid(-half_width, half_width, samples)?;
    let a = SourceSpec::new(0.0, g, 1.0);
    let mut vis = Vec::with_capacity(samples);
    let mut coinc = Vec::with_capacity(samples);
    for &d in &detunings {
        let b = stark_tune(&SourceSpec::new(0.0, linewidth_ratio * g, 1.0), d * g);
        let r = run_hom(&a, &b)?;
        vis.push(r.visibility);
        coinc.push(r.coincidence_engine);
    }
    Ok(Curves {
        names: ["Δ/Γ", "visibility", "coincidence"].map(String::from).to_vec(),
        columns: vec![detunings, vis, coinc],
    })
}

fn js(e: molwg::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// |φ(1)|, |φ(2)|, differential phase and extinction versus δ/Γ.
#[wasm_bindgen]
pub fn phase_curves(
    linewidth_mhz: f64,
    eta: f64,
    gamma_wg_fraction: f64,
    half_width: f64,
    samples: usize,
) -> Result<Curves, JsError> {
    phase_curves_inner(linewidth_mhz, eta, gamma_wg_fraction, half_width, samples).map_err(js)
}

/// `[|φ(1)| peak, δ/Γ, |φ(1)−φ(2)| peak, δ/Γ, extinction(1) there]`
#[wasm_bindgen]
pub fn phase_peaks(linewidth_mhz: f64, eta: f64, gamma_wg_fraction: f64) -> Result<Vec<f64>, JsError> {
    phase_peaks_inner(linewidth_mhz, eta, gamma_wg_fraction).map_err(js)
}

/// Coupling ratio and guided fractions versus effective mode area.
#[wasm_bindgen]
pub fn coupling_curves(
    area_min: f64,
    area_max: f64,
    samples: usize,
    index: f64,
    v_g_over_c_over_n: f64,
    rate_correction: f64,
) -> Result<Curves, JsError> {
    coupling_curves_inner(area_min, area_max, samples, index, v_g_over_c_over_n, rate_correction).map_err(js)
}

/// HOM visibility and coincidence probability versus source detuning.
#[wasm_bindgen]
pub fn hom_curves(half_width: f64, samples: usize, linewidth_ratio: f64) -> Result<Curves, JsError> {
    hom_curves_inner(half_width, samples, linewidth_ratio).map_err(js)
}
