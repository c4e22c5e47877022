//! Saturable single-molecule nonlinearity: light-induced Stark shift, the
//! per-photon phase for `m` simultaneous photons, and the extinction that
//! accompanies it.
//!
//! Phases keep the sign of the closed form, `φ(m) = −(δ/(2mΓ)) ln(1 + x_m)`
//! with `x_m = 2mηΓ_wgΓ / (δ² + Γ²/4)`, so `φ` is negative for positive
//! detuning. Exports report magnitudes.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonlinearParams {
    /// Total decay rate Γ (rad/s).
    pub gamma: f64,
    pub eta: f64,
    /// `Γ_wg / Γ`.
    pub gamma_wg_fraction: f64,
    pub photon_numbers: Vec<u32>,
}

impl NonlinearParams {
    /// Γ = 2π × 30 MHz, η = 0.5, Γ_wg = 0.5Γ, m ∈ {1, 2}.
    pub fn paper_default() -> Self {
        Self {
            gamma: 2.0 * std::f64::consts::PI * 30e6,
            eta: 0.5,
            gamma_wg_fraction: 0.5,
            photon_numbers: vec![1, 2],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        if !(self.gamma_wg_fraction.is_finite() && self.gamma_wg_fraction > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma_wg_fraction must be > 0, got {}",
                self.gamma_wg_fraction
            )));
        }
        if self.photon_numbers.contains(&0) {
            return Err(Error::InvalidParameter("photon numbers must be >= 1".into()));
        }
        Ok(())
    }

    /// Peak coupling `g0² = ηΓ_wgΓ` (rad²/s²).
    pub fn g0_sq(&self) -> f64 {
        self.eta * self.gamma_wg_fraction * self.gamma * self.gamma
    }

    /// Copy with `Γ_wg/Γ` rescaled by the ratio of two coupling ratios.
    pub fn with_coupling_scaled(&self, reference_ratio: f64, new_ratio: f64) -> Self {
        Self {
            gamma_wg_fraction: self.gamma_wg_fraction * new_ratio / reference_ratio,
            ..self.clone()
        }
    }
}

/// Stark shift `U/ħ = g²δ / (δ² + (Γ/2)² + 2g²)` (rad/s).
pub fn stark_shift(g_sq: f64, delta: f64, gamma: f64) -> f64 {
    g_sq * delta / (delta * delta + 0.25 * gamma * gamma + 2.0 * g_sq)
}

fn saturation(m: u32, delta: f64, p: &NonlinearParams) -> f64 {
    2.0 * m as f64 * p.g0_sq() / (delta * delta + 0.25 * p.gamma * p.gamma)
}

/// Per-photon phase (rad) when `m` photons pass the molecule together.
pub fn phase_per_photon(m: u32, delta: f64, p: &NonlinearParams) -> f64 {
    let m = m.max(1);
    -delta / (2.0 * m as f64 * p.gamma) * saturation(m, delta, p).ln_1p()
}

/// `φ(1) − φ(2)`.
pub fn differential_phase(delta: f64, p: &NonlinearParams) -> f64 {
    phase_per_photon(1, delta, p) - phase_per_photon(2, delta, p)
}

/// Fraction of intensity lost per photon, `1 − exp(−(Γ/δ)|φ|)` with the
/// attenuating sign. Written as `1 − (1 + x_m)^(−1/(2m))`, which is also the
/// continuous value at `δ = 0`.
pub fn extinction(m: u32, delta: f64, p: &NonlinearParams) -> f64 {
    let m = m.max(1);
    -(-saturation(m, delta, p).ln_1p() / (2.0 * m as f64)).exp_m1()
}

/// Per-photon field transmission `sqrt(1 − extinction)`.
pub fn transmission_amplitude(m: u32, delta: f64, p: &NonlinearParams) -> f64 {
    let m = m.max(1);
    (-saturation(m, delta, p).ln_1p() / (4.0 * m as f64)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Column {
    Phase(u32),
    Differential,
    Extinction(u32),
}

impl Column {
    fn eval(self, delta: f64, p: &NonlinearParams) -> f64 {
        match self {
            Column::Phase(m) => phase_per_photon(m, delta, p),
            Column::Differential => differential_phase(delta, p),
            Column::Extinction(m) => extinction(m, delta, p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseResponse {
    pub params: NonlinearParams,
    /// rad/s
    pub delta: Vec<f64>,
    /// One row per entry of `params.photon_numbers`.
    pub phase: Vec<Vec<f64>>,
    pub differential: Vec<f64>,
    pub extinction: Vec<Vec<f64>>,
}

impl PhaseResponse {
    pub fn column(&self, c: Column) -> Option<Vec<f64>> {
        let row = |m: u32| self.params.photon_numbers.iter().position(|&k| k == m);
        match c {
            Column::Phase(m) => row(m).map(|r| self.phase[r].clone()),
            Column::Extinction(m) => row(m).map(|r| self.extinction[r].clone()),
            Column::Differential => Some(self.differential.clone()),
        }
    }

    /// `delta_over_gamma`, `|φ(m)|` per m, `|φ(1)−φ(2)|`, extinction per m.
    pub fn to_csv(&self) -> String {
        let ms = &self.params.photon_numbers;
        let mut out = String::from("delta_over_gamma");
        for m in ms {
            let _ = write!(out, ",abs_phi_{m}_rad");
        }
        out.push_str(",abs_phi_1_minus_phi_2_rad");
        for m in ms {
            let _ = write!(out, ",extinction_{m}");
        }
        out.push('\n');
        for (k, d) in self.delta.iter().enumerate() {
            let _ = write!(out, "{:.15e}", d / self.params.gamma);
            for row in &self.phase {
                let _ = write!(out, ",{:.15e}", row[k].abs());
            }
            let _ = write!(out, ",{:.15e}", self.differential[k].abs());
            for row in &self.extinction {
                let _ = write!(out, ",{:.15e}", row[k]);
            }
            out.push('\n');
        }
        out
    }
}

pub const DEFAULT_SCAN_HALF_WIDTH: f64 = 3.0;
pub const DEFAULT_SCAN_SAMPLES: usize = 601;

/// Uniform scan over `[delta_min, delta_max]` (rad/s).
pub fn scan(p: &NonlinearParams, delta_min: f64, delta_max: f64, samples: usize) -> Result<PhaseResponse> {
    p.validate()?;
    if samples < 2 {
        return Err(Error::InvalidParameter(format!("scan needs >= 2 samples, got {samples}")));
    }
    if !(delta_min.is_finite() && delta_max.is_finite() && delta_max > delta_min) {
        return Err(Error::InvalidParameter(format!("empty detuning range [{delta_min}, {delta_max}]")));
    }
    let step = (delta_max - delta_min) / (samples - 1) as f64;
    // symmetric ranges give exactly mirrored samples
    let delta: Vec<f64> = (0..samples)
        .map(|k| {
            let back = samples - 1 - k;
            if k == back {
                0.5 * (delta_min + delta_max)
            } else if k < back {
                delta_min + k as f64 * step
            } else {
                delta_max - back as f64 * step
            }
        })
        .collect();
    let phase = p
        .photon_numbers
        .iter()
        .map(|&m| delta.iter().map(|&d| phase_per_photon(m, d, p)).collect())
        .collect();
    let extinction = p
        .photon_numbers
        .iter()
        .map(|&m| delta.iter().map(|&d| extinction(m, d, p)).collect())
        .collect();
    let differential = delta.iter().map(|&d| differential_phase(d, p)).collect();
    Ok(PhaseResponse {
        params: p.clone(),
        delta,
        phase,
        differential,
        extinction,
    })
}

/// Default Fig. 4 style scan, `δ ∈ [−3Γ, 3Γ]` with 601 samples.
pub fn default_scan(p: &NonlinearParams) -> Result<PhaseResponse> {
    let w = DEFAULT_SCAN_HALF_WIDTH * p.gamma;
    scan(p, -w, w, DEFAULT_SCAN_SAMPLES)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// rad/s
    pub delta: f64,
    /// Signed column value at `delta`.
    pub value: f64,
    pub grid_delta: f64,
    pub grid_value: f64,
    pub degenerate: bool,
}

/// Maximum of `|column|` over the scan, refined by golden-section search on
/// the closed form between the neighbouring samples.
pub fn find_peak(response: &PhaseResponse, column: Column) -> Result<Peak> {
    let values = response
        .column(column)
        .ok_or_else(|| Error::InvalidParameter(format!("column {column:?} not present in scan")))?;
    if values.is_empty() {
        return Err(Error::InvalidParameter("empty scan".into()));
    }
    let d = &response.delta;
    let mut best = 0usize;
    for k in 1..values.len() {
        let (a, b) = (values[k].abs(), values[best].abs());
        if a > b || (a == b && d[k].abs() < d[best].abs()) {
            best = k;
        }
    }
    if values[best] == 0.0 {
        return Ok(Peak {
            delta: 0.0,
            value: 0.0,
            grid_delta: 0.0,
            grid_value: 0.0,
            degenerate: true,
        });
    }
    let p = &response.params;
    let f = |x: f64| column.eval(x, p).abs();
    let lo = d[best.saturating_sub(1)];
    let hi = d[(best + 1).min(d.len() - 1)];
    let x = golden_max(f, lo, hi, 1e-12 * p.gamma);
    let (delta, value) = if f(x) >= values[best].abs() {
        (x, column.eval(x, p))
    } else {
        (d[best], values[best])
    };
    Ok(Peak {
        delta,
        value,
        grid_delta: d[best],
        grid_value: values[best],
        degenerate: false,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut e = a + r * (b - a);
    let (mut fc, mut fe) = (f(c), f(e));
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc > fe {
            b = e;
            e = c;
            fe = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + r * (b - a);
            fe = f(e);
        }
    }
    0.5 * (a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePeaks {
    pub phi1: Peak,
    pub phi2: Peak,
    pub differential: Peak,
    pub extinction1_at_differential_peak: f64,
    pub extinction2_at_differential_peak: f64,
}

pub fn summarize_peaks(response: &PhaseResponse) -> Result<PhasePeaks> {
    let mut full = response.clone();
    // φ(1) and φ(2) are always reported, whatever the scan's photon numbers
    for m in [1, 2] {
        if !full.params.photon_numbers.contains(&m) {
            full.params.photon_numbers.push(m);
            let p = full.params.clone();
            full.phase.push(full.delta.iter().map(|&d| phase_per_photon(m, d, &p)).collect());
            full.extinction.push(full.delta.iter().map(|&d| extinction(m, d, &p)).collect());
        }
    }
    let differential = find_peak(&full, Column::Differential)?;
    Ok(PhasePeaks {
        phi1: find_peak(&full, Column::Phase(1))?,
        phi2: find_peak(&full, Column::Phase(2))?,
        extinction1_at_differential_peak: extinction(1, differential.delta, &full.params),
        extinction2_at_differential_peak: extinction(2, differential.delta, &full.params),
        differential,
    })
}
