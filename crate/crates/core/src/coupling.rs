//! Golden-rule emission rates of a dipole into the guide and into the bulk.
//!
//! Rates are angular frequencies (rad/s).

use serde::{Deserialize, Serialize};

use crate::constants::{angular_frequency, C, EPS0, HBAR};
use crate::error::{Error, Result};

/// Default total-rate correction `Γ_total / Γ_rad` near the guide.
pub const DEFAULT_TOTAL_RATE_CORRECTION: f64 = 1.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterParams {
    /// Total decay rate Γ (rad/s).
    pub gamma_total: f64,
    /// Zero-phonon-line branching ratio.
    pub eta: f64,
    /// Unit vector; x is the polarization axis of the guided mode.
    pub dipole_orientation: [f64; 3],
    /// m
    pub wavelength: f64,
    /// Transition dipole moment (C·m), if known.
    pub dipole_magnitude: Option<f64>,
}

impl EmitterParams {
    /// Γ = 2π × 30 MHz, η = 0.5, dipole along x, λ = 785 nm.
    pub fn paper_default() -> Self {
        Self {
            gamma_total: 2.0 * std::f64::consts::PI * 30e6,
            eta: 0.5,
            dipole_orientation: [1.0, 0.0, 0.0],
            wavelength: 785e-9,
            dipole_magnitude: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_total.is_finite() && self.gamma_total > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma_total must be > 0, got {}", self.gamma_total)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta must lie in [0, 1], got {}", self.eta)));
        }
        let norm = self.dipole_orientation.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParameter(format!("dipole orientation must be a unit vector, |o| = {norm}")));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!("wavelength must be > 0, got {}", self.wavelength)));
        }
        if let Some(d) = self.dipole_magnitude {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidParameter(format!("dipole magnitude must be >= 0, got {d}")));
            }
        }
        Ok(())
    }

    /// `d_x² / d²`.
    pub fn alignment(&self) -> f64 {
        self.dipole_orientation[0].powi(2)
    }

    fn dipole(&self) -> Result<f64> {
        self.validate()?;
        self.dipole_magnitude.ok_or(Error::MissingDipoleMagnitude)
    }
}

/// `((n² + 2)/3)²`.
pub fn local_field_factor(n: f64) -> f64 {
    ((n * n + 2.0) / 3.0).powi(2)
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
    }
}

/// One-direction emission rate into the guided mode.
pub fn gamma_wg(params: &EmitterParams, n: f64, a_eff: f64, v_g: f64) -> Result<f64> {
    let d = params.dipole()?;
    check_positive("A_eff", a_eff)?;
    check_positive("v_g", v_g)?;
    let dx_sq = d * d * params.alignment();
    let omega = angular_frequency(params.wavelength);
    Ok(dx_sq * omega / (2.0 * HBAR * n * n * EPS0 * a_eff * v_g) * local_field_factor(n))
}

/// Radiative rate in the homogeneous matrix of index `n`.
pub fn gamma_rad(params: &EmitterParams, n: f64) -> Result<f64> {
    let d = params.dipole()?;
    let omega = angular_frequency(params.wavelength);
    Ok(free_space_prefactor(omega) * d * d * n * local_field_factor(n))
}

fn free_space_prefactor(omega: f64) -> f64 {
    omega.powi(3) / (3.0 * std::f64::consts::PI * HBAR * EPS0 * C.powi(3))
}

/// Dipole moment giving radiative rate `rate` in a matrix of index `n`.
pub fn dipole_from_rate(rate: f64, wavelength: f64, n: f64) -> Result<f64> {
    check_positive("rate", rate)?;
    check_positive("wavelength", wavelength)?;
    let omega = angular_frequency(wavelength);
    Ok((rate / (free_space_prefactor(omega) * n * local_field_factor(n))).sqrt())
}

/// Dipole-magnitude-free `Γ_wg / Γ_rad`.
pub fn coupling_ratio(orientation: [f64; 3], wavelength: f64, n: f64, a_eff: f64, v_g: f64) -> f64 {
    let alignment = orientation[0].powi(2) / orientation.iter().map(|c| c * c).sum::<f64>();
    let sigma_n = 3.0 * wavelength * wavelength / (2.0 * std::f64::consts::PI * n * n);
    0.25 * alignment * sigma_n * (C / n) / (a_eff * v_g)
}

/// Fraction of all emitted photons that enter the guide (both directions).
pub fn guided_fraction(ratio: f64, total_rate_correction: f64) -> f64 {
    2.0 * ratio / total_rate_correction
}

/// One-direction output with an ideal mirror at an antinode, `4Γ_wg`,
/// relative to `total_rate_correction × Γ_rad`.
pub fn mirror_enhancement(ratio: f64, total_rate_correction: f64) -> f64 {
    4.0 * ratio / total_rate_correction
}

/// `σ_ZPL = 3λ²/(2π)`.
pub fn zpl_cross_section(wavelength: f64) -> f64 {
    3.0 * wavelength * wavelength / (2.0 * std::f64::consts::PI)
}

/// Guided density of states `L/(2π v_g)` for one direction (s/rad).
pub fn density_of_states(length: f64, v_g: f64) -> f64 {
    length / (2.0 * std::f64::consts::PI * v_g)
}

/// `|g|² = d_x² ω / (2ħ ε0 n² L A_eff)` including the local-field factor.
/// `2π |g|² D(ω)` reproduces [`gamma_wg`] for any `L`.
pub fn coupling_constant_sq(params: &EmitterParams, n: f64, length: f64, a_eff: f64) -> Result<f64> {
    let d = params.dipole()?;
    check_positive("L", length)?;
    check_positive("A_eff", a_eff)?;
    let omega = angular_frequency(params.wavelength);
    Ok(d * d * params.alignment() * omega / (2.0 * HBAR * EPS0 * n * n * length * a_eff)
        * local_field_factor(n))
}

/// Inputs for a full coupling evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingInputs {
    pub emitter: EmitterParams,
    /// Matrix index.
    pub n: f64,
    /// m²
    pub a_eff: f64,
    /// m/s
    pub v_g: f64,
    pub total_rate_correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    /// One direction (rad/s); absent without a dipole magnitude.
    pub gamma_wg: Option<f64>,
    pub gamma_rad: Option<f64>,
    pub ratio: f64,
    pub gamma_wg_over_gamma_total: f64,
    pub guided_fraction: f64,
    pub guided_fraction_uncorrected: f64,
    pub mirror_enhanced_fraction: f64,
    pub mirror_enhanced_fraction_uncorrected: f64,
    pub local_field_factor: f64,
    pub alignment: f64,
    pub zpl_cross_section: f64,
    pub a_eff: f64,
    pub a_eff_over_lambda_sq: f64,
    pub a_eff_over_sigma_zpl: f64,
    pub v_g: f64,
    pub v_g_over_c_over_n: f64,
    pub n: f64,
    pub total_rate_correction: f64,
}

pub fn evaluate_coupling(inputs: &CouplingInputs) -> Result<CouplingResult> {
    let p = &inputs.emitter;
    p.validate()?;
    check_positive("A_eff", inputs.a_eff)?;
    check_positive("v_g", inputs.v_g)?;
    check_positive("total_rate_correction", inputs.total_rate_correction)?;
    if !(inputs.n >= 1.0) {
        return Err(Error::InvalidParameter(format!("matrix index must be >= 1, got {}", inputs.n)));
    }
    let lambda = p.wavelength;
    let ratio = coupling_ratio(p.dipole_orientation, lambda, inputs.n, inputs.a_eff, inputs.v_g);
    let (gwg, grad) = match p.dipole_magnitude {
        Some(_) => (
            Some(gamma_wg(p, inputs.n, inputs.a_eff, inputs.v_g)?),
            Some(gamma_rad(p, inputs.n)?),
        ),
        None => (None, None),
    };
    let sigma = zpl_cross_section(lambda);
    Ok(CouplingResult {
        gamma_wg: gwg,
        gamma_rad: grad,
        ratio,
        gamma_wg_over_gamma_total: ratio / inputs.total_rate_correction,
        guided_fraction: guided_fraction(ratio, inputs.total_rate_correction),
        guided_fraction_uncorrected: guided_fraction(ratio, 1.0),
        mirror_enhanced_fraction: mirror_enhancement(ratio, inputs.total_rate_correction),
        mirror_enhanced_fraction_uncorrected: mirror_enhancement(ratio, 1.0),
        local_field_factor: local_field_factor(inputs.n),
        alignment: p.alignment(),
        zpl_cross_section: sigma,
        a_eff: inputs.a_eff,
        a_eff_over_lambda_sq: inputs.a_eff / (lambda * lambda),
        a_eff_over_sigma_zpl: inputs.a_eff / sigma,
        v_g: inputs.v_g,
        v_g_over_c_over_n: inputs.v_g * inputs.n / C,
        n: inputs.n,
        total_rate_correction: inputs.total_rate_correction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const LAMBDA: f64 = 785e-9;

    fn with_dipole(orientation: [f64; 3]) -> EmitterParams {
        let mut p = EmitterParams::paper_default();
        p.dipole_orientation = orientation;
        p.dipole_magnitude = Some(dipole_from_rate(p.gamma_total, LAMBDA, 1.42).unwrap());
        p
    }

    #[test]
    fn local_field_values() {
        assert_eq!(local_field_factor(1.0), 1.0);
        let lf = |n: f64| ((n * n + 2.0) / 3.0) * ((n * n + 2.0) / 3.0);
        assert_relative_eq!(local_field_factor(1.434), lf(1.434), max_relative = 1e-15);
        assert!((local_field_factor(1.434) - 1.828225).abs() < 5e-6);
        assert!((local_field_factor(1.42) - 1.792385).abs() < 5e-6);
    }

    #[test]
    fn orthogonal_dipole_gives_zero() {
        let p = with_dipole([0.0, 1.0, 0.0]);
        assert_eq!(gamma_wg(&p, 1.434, 0.42 * LAMBDA * LAMBDA, C / 1.434).unwrap(), 0.0);
        assert_eq!(coupling_ratio([0.0, 0.0, 1.0], LAMBDA, 1.434, 1e-13, 2e8), 0.0);
    }

    #[test]
    fn missing_dipole_is_reported() {
        let p = EmitterParams::paper_default();
        assert!(matches!(gamma_wg(&p, 1.434, 1e-13, 2e8), Err(Error::MissingDipoleMagnitude)));
        assert!(matches!(gamma_rad(&p, 1.434), Err(Error::MissingDipoleMagnitude)));
    }

    #[test]
    fn doubling_area_halves_rate() {
        let p = with_dipole([1.0, 0.0, 0.0]);
        let a = gamma_wg(&p, 1.434, 1e-13, 2e8).unwrap();
        let b = gamma_wg(&p, 1.434, 2e-13, 2e8).unwrap();
        assert_relative_eq!(a, 2.0 * b, max_relative = 1e-15);
    }

    #[test]
    fn vacuum_and_cubic_scaling() {
        let mut p = with_dipole([1.0, 0.0, 0.0]);
        let d = p.dipole_magnitude.unwrap();
        let omega = 2.0 * std::f64::consts::PI * C / LAMBDA;
        let free = d * d * omega.powi(3) / (3.0 * std::f64::consts::PI * HBAR * EPS0 * C.powi(3));
        assert_relative_eq!(gamma_rad(&p, 1.0).unwrap(), free, max_relative = 1e-14);
        let r1 = gamma_rad(&p, 1.0).unwrap();
        p.wavelength = LAMBDA / 2.0;
        assert_relative_eq!(gamma_rad(&p, 1.0).unwrap(), 8.0 * r1, max_relative = 1e-14);
    }

    #[test]
    fn dipole_round_trip() {
        let gamma = 2.0 * std::f64::consts::PI * 30e6;
        let p = with_dipole([1.0, 0.0, 0.0]);
        assert_relative_eq!(gamma_rad(&p, 1.42).unwrap(), gamma, max_relative = 1e-12);
    }

    #[test]
    fn paper_ratio_and_fractions() {
        let a = 0.42 * LAMBDA * LAMBDA;
        let r = coupling_ratio([1.0, 0.0, 0.0], LAMBDA, 1.434, a, C / 1.434);
        // with v_g = c/n the ratio collapses to σ/(4 n² A_eff)
        let expect = 3.0 / (2.0 * std::f64::consts::PI) / (4.0 * 1.434 * 1.434 * 0.42);
        assert_relative_eq!(r, expect, max_relative = 1e-14);
        assert!((r - 0.138).abs() < 0.005);
        assert_relative_eq!(guided_fraction(0.14, 1.0), 0.28, max_relative = 1e-15);
        assert!((guided_fraction(0.14, 1.05) - 0.267).abs() < 5e-4);
        assert_relative_eq!(mirror_enhancement(0.14, 1.0), 0.56, max_relative = 1e-15);
        assert_eq!(guided_fraction(0.0, 1.05), 0.0);
        assert_eq!(mirror_enhancement(0.0, 1.05), 0.0);
        let slot = coupling_ratio([1.0, 0.0, 0.0], LAMBDA, 1.434, 0.10 * LAMBDA * LAMBDA, C / 1.434);
        assert!((slot - 0.58).abs() < 0.005, "{slot}");
    }

    #[test]
    fn cross_section() {
        let s = zpl_cross_section(LAMBDA);
        assert!((s - 2.943e-13).abs() < 1e-16);
        assert_relative_eq!(s / (LAMBDA * LAMBDA), 3.0 / (2.0 * std::f64::consts::PI), max_relative = 1e-15);
        assert_relative_eq!(zpl_cross_section(1e-6) / 1e-12, 3.0 / (2.0 * std::f64::consts::PI), max_relative = 1e-15);
        let ratio = 0.42 / (3.0 / (2.0 * std::f64::consts::PI));
        assert!((ratio - 0.88).abs() < 0.005);
    }

    #[test]
    fn density_of_states_cancels_length() {
        assert_relative_eq!(density_of_states(2.0, 1e8), 2.0 * density_of_states(1.0, 1e8));
        assert_relative_eq!(density_of_states(1.0, C), 1.0 / (2.0 * std::f64::consts::PI * C));
        let p = with_dipole([1.0, 0.0, 0.0]);
        let (n, a, v) = (1.434, 0.42 * LAMBDA * LAMBDA, C / 1.6);
        let rate = |l: f64| {
            2.0 * std::f64::consts::PI * coupling_constant_sq(&p, n, l, a).unwrap() * density_of_states(l, v)
        };
        assert_relative_eq!(rate(1e-3), rate(7.5), max_relative = 1e-13);
        assert_relative_eq!(rate(1e-3), gamma_wg(&p, n, a, v).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn evaluate_reports_consistent_fields() {
        let inputs = CouplingInputs {
            emitter: with_dipole([1.0, 0.0, 0.0]),
            n: 1.434,
            a_eff: 0.42 * LAMBDA * LAMBDA,
            v_g: C / 1.434,
            total_rate_correction: DEFAULT_TOTAL_RATE_CORRECTION,
        };
        let r = evaluate_coupling(&inputs).unwrap();
        assert_relative_eq!(r.gamma_wg.unwrap() / r.gamma_rad.unwrap(), r.ratio, max_relative = 1e-12);
        assert_relative_eq!(r.mirror_enhanced_fraction, 2.0 * r.guided_fraction, max_relative = 1e-15);
        assert!(r.guided_fraction > 0.0 && r.guided_fraction <= 1.0);
    }

    #[test]
    fn invalid_params_rejected() {
        let mut p = EmitterParams::paper_default();
        p.eta = 1.5;
        assert!(p.validate().is_err());
        p.eta = 0.5;
        p.dipole_orientation = [1.0, 1.0, 0.0];
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn rate_ratio_matches_closed_form(
            theta in 0.0f64..std::f64::consts::PI,
            n in 1.0f64..2.5,
            a in 0.05f64..2.0,
            vg in 0.3f64..1.0,
            lambda in 400e-9f64..1600e-9,
        ) {
            let mut p = with_dipole([theta.cos(), theta.sin(), 0.0]);
            p.wavelength = lambda;
            let a_eff = a * lambda * lambda;
            let v_g = vg * C / n;
            let ratio = coupling_ratio(p.dipole_orientation, lambda, n, a_eff, v_g);
            let direct = gamma_wg(&p, n, a_eff, v_g).unwrap() / gamma_rad(&p, n).unwrap();
            if ratio > 1e-20 {
                prop_assert!((direct - ratio).abs() <= 1e-12 * ratio);
            }
        }

        #[test]
        fn rates_monotone(a in 0.05f64..2.0, vg in 0.3f64..1.0) {
            let p = with_dipole([1.0, 0.0, 0.0]);
            let l2 = LAMBDA * LAMBDA;
            let v = vg * C / 1.434;
            let base = gamma_wg(&p, 1.434, a * l2, v).unwrap();
            prop_assert!(base > 0.0);
            prop_assert!(gamma_wg(&p, 1.434, 1.1 * a * l2, v).unwrap() < base);
            prop_assert!(gamma_wg(&p, 1.434, a * l2, 1.1 * v).unwrap() < base);
            let mut q = p.clone();
            q.wavelength = 0.9 * LAMBDA;
            prop_assert!(gamma_rad(&q, 1.434).unwrap() > gamma_rad(&p, 1.434).unwrap());
        }
    }
}
