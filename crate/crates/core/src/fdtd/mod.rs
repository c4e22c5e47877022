//! 2D TEz finite-difference time-domain analogue of the dipole-radiation
//! experiments: out-of-plane `Ez` with in-plane `Hx`, `Hy`, a longitudinal
//! cut through the guide (propagation along x, layers stacked in y), a
//! split-field PML and running DFT flux monitors.
//!
//! Internally lengths are in cells, `c = 1` and `μ = 1`. All nodes sit at
//! integer multiples of the cell size, which makes left-right mirrored runs
//! bit-for-bit mirror images.

mod sim;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::{solve_slab_mode_1d, SlabStack};

pub use sim::{FieldDft, FluxSample};

/// Point dipole polarized out of plane, driven by a Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSource {
    /// m
    pub x: f64,
    /// m, relative to the core top surface.
    pub y: f64,
    /// Center wavelength of the pulse (m).
    pub wavelength: f64,
    /// Spectral standard deviation as a fraction of the center frequency.
    pub fractional_bandwidth: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdtdConfig {
    /// m
    pub cell_size: f64,
    /// `c Δt / Δx`.
    pub courant: f64,
    /// Interior window (m); the PML is added outside it.
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub pml_cells: usize,
    pub pml_reflection: f64,
    pub source: DipoleSource,
    /// Wavelength at which fluxes are evaluated; defaults to the source's.
    pub analysis_wavelength: Option<f64>,
    /// Stop once the field energy falls below this fraction of its peak.
    pub energy_decay: f64,
    pub max_steps: Option<usize>,
    /// Half widths (m) of the closed flux boxes around the emitter.
    pub box_half_widths: Vec<f64>,
    /// Distance (m) from the emitter or Bragg stack to the guided-power planes.
    pub guided_monitor_offset: f64,
    /// Steps between samples of the flux time series.
    pub record_interval: usize,
    /// Accumulate a full-window DFT of `Ez` for field plots.
    pub record_field: bool,
}

pub const MAX_COURANT: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const MIN_PML_CELLS: usize = 8;

impl Default for FdtdConfig {
    fn default() -> Self {
        Self {
            cell_size: 10e-9,
            courant: 0.5,
            x_min: -2.0e-6,
            x_max: 2.0e-6,
            y_min: -1.5e-6,
            y_max: 1.5e-6,
            pml_cells: 12,
            pml_reflection: 1e-6,
            source: DipoleSource {
                x: 0.0,
                y: 20e-9,
                wavelength: 785e-9,
                fractional_bandwidth: 0.1,
                amplitude: 1.0,
            },
            analysis_wavelength: None,
            energy_decay: 1e-6,
            max_steps: None,
            box_half_widths: vec![0.3e-6, 0.6e-6],
            guided_monitor_offset: 1.2e-6,
            record_interval: 20,
            record_field: false,
        }
    }
}

impl FdtdConfig {
    pub fn analysis_wavelength(&self) -> f64 {
        self.analysis_wavelength.unwrap_or(self.source.wavelength)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidFdtdConfig(m));
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) {
            return bad(format!("cell size must be > 0, got {}", self.cell_size));
        }
        if !(self.courant > 0.0 && self.courant <= MAX_COURANT) {
            return bad(format!(
                "Courant number {} outside (0, 1/sqrt(2)]; the 2D scheme is unstable above 0.7071",
                self.courant
            ));
        }
        if self.pml_cells < MIN_PML_CELLS {
            return bad(format!("PML needs at least {MIN_PML_CELLS} cells, got {}", self.pml_cells));
        }
        if !(self.pml_reflection > 0.0 && self.pml_reflection < 1.0) {
            return bad(format!("PML reflection target must lie in (0, 1), got {}", self.pml_reflection));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return bad("empty window".into());
        }
        let s = &self.source;
        if !(s.wavelength > 0.0 && self.analysis_wavelength() > 0.0) {
            return bad("wavelengths must be > 0".into());
        }
        if !(s.fractional_bandwidth > 0.0 && s.fractional_bandwidth < 1.0) {
            return bad(format!("fractional bandwidth must lie in (0, 1), got {}", s.fractional_bandwidth));
        }
        if !(s.amplitude.is_finite() && s.amplitude != 0.0) {
            return bad("source amplitude must be finite and nonzero".into());
        }
        if !(s.x > self.x_min && s.x < self.x_max && s.y > self.y_min && s.y < self.y_max) {
            return bad(format!("source ({:e}, {:e}) m lies outside the window", s.x, s.y));
        }
        if !(self.energy_decay > 0.0 && self.energy_decay < 1.0) {
            return bad(format!("energy decay threshold must lie in (0, 1), got {}", self.energy_decay));
        }
        if self.box_half_widths.is_empty() || self.box_half_widths.iter().any(|&w| !(w > 0.0)) {
            return bad("at least one positive flux-box half width is required".into());
        }
        if !(self.guided_monitor_offset > 0.0) {
            return bad("guided monitor offset must be > 0".into());
        }
        if self.record_interval == 0 {
            return bad("record interval must be >= 1".into());
        }
        let cells_per_wavelength = self.analysis_wavelength().min(s.wavelength) / (2.0 * self.cell_size);
        if cells_per_wavelength < 10.0 {
            return bad(format!(
                "cell size {:e} m gives only {cells_per_wavelength:.1} cells per wavelength in the core",
                self.cell_size
            ));
        }
        Ok(())
    }

    /// The same run reflected through `x = 0`.
    pub fn mirrored(&self) -> Self {
        let mut c = self.clone();
        c.x_min = -self.x_max;
        c.x_max = -self.x_min;
        c.source.x = -self.source.x;
        c
    }

    /// Emitter inside the right-most trench at mid-core height, window sized
    /// to hold the stack and both guided-power planes.
    pub fn for_bragg(stack: &SlabStack, bragg: &BraggLayout) -> Self {
        let mut c = Self::default();
        let x_e = bragg.end_face - bragg.end_gap;
        c.source.x = x_e;
        c.source.y = -0.5 * stack.core_thickness;
        let margin = 0.5e-6;
        let (lo, hi) = bragg.extent();
        c.x_min = lo.min(x_e) - c.guided_monitor_offset - margin;
        c.x_max = hi.max(x_e) + c.guided_monitor_offset + margin;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// Quarter-wave stack cut into the core: trenches of cladding alternating
/// with core blocks, starting at `end_face` and extending to `side`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraggLayout {
    pub periods: usize,
    /// Core block length (m).
    pub high_length: f64,
    /// Trench width (m).
    pub low_length: f64,
    /// x of the output end face (m).
    pub end_face: f64,
    /// Emitter distance from the end face (m), inside the first trench.
    pub end_gap: f64,
    pub side: Side,
}

impl BraggLayout {
    /// Quarter-wave lengths at `wavelength` from the slab index of the core
    /// and the cladding index of the trenches; emitter at `x = 0`, 20 nm
    /// from the end face, stack to the left.
    pub fn quarter_wave(stack: &SlabStack, wavelength: f64, periods: usize) -> Result<Self> {
        let n_high = solve_slab_mode_1d(stack, wavelength)?.effective_index;
        let end_gap = 20e-9;
        Ok(Self {
            periods,
            high_length: wavelength / (4.0 * n_high),
            low_length: wavelength / (4.0 * stack.cladding_index),
            end_face: end_gap,
            end_gap,
            side: Side::Left,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.high_length > 0.0 && self.low_length > 0.0) {
            return Err(Error::InvalidFdtdConfig("Bragg block lengths must be > 0".into()));
        }
        if !(self.end_gap >= 0.0 && self.end_gap < self.low_length) {
            return Err(Error::InvalidFdtdConfig(format!(
                "emitter gap {:e} m must lie inside the {:e} m trench",
                self.end_gap, self.low_length
            )));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.periods as f64 * (self.high_length + self.low_length)
    }

    /// `(x_lo, x_hi)` spanned by the stack.
    pub fn extent(&self) -> (f64, f64) {
        match self.side {
            Side::Left => (self.end_face - self.length(), self.end_face),
            Side::Right => (self.end_face, self.end_face + self.length()),
        }
    }

    /// True if `x` falls in a trench.
    pub fn in_trench(&self, x: f64) -> bool {
        let d = match self.side {
            Side::Left => self.end_face - x,
            Side::Right => x - self.end_face,
        };
        if d <= 0.0 || d >= self.length() {
            return false;
        }
        let period = self.high_length + self.low_length;
        let k = (d / period).floor();
        d - k * period < self.low_length
    }

    pub fn mirrored(&self) -> Self {
        Self {
            end_face: -self.end_face,
            side: match self.side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            },
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FdtdStructure {
    Homogeneous { index: f64 },
    Slab { stack: SlabStack, bragg: Option<BraggLayout> },
}

impl FdtdStructure {
    pub fn slab(stack: SlabStack) -> Self {
        FdtdStructure::Slab { stack, bragg: None }
    }

    /// Substrate / core / cladding of the paper's guide.
    pub fn paper_stack() -> SlabStack {
        SlabStack {
            substrate_index: 1.445,
            core_index: 2.0,
            cladding_index: 1.434,
            core_thickness: 120e-9,
        }
    }

    pub fn cladding_index(&self) -> f64 {
        match self {
            FdtdStructure::Homogeneous { index } => *index,
            FdtdStructure::Slab { stack, .. } => stack.cladding_index,
        }
    }

    pub fn index_at(&self, x: f64, y: f64) -> f64 {
        match self {
            FdtdStructure::Homogeneous { index } => *index,
            FdtdStructure::Slab { stack, bragg } => {
                let n = stack.index_at(y);
                match bragg {
                    Some(b) if n == stack.core_index && b.in_trench(x) => stack.cladding_index,
                    _ => n,
                }
            }
        }
    }

    pub fn mirrored(&self) -> Self {
        match self {
            FdtdStructure::Slab { stack, bragg } => FdtdStructure::Slab {
                stack: *stack,
                bragg: bragg.map(|b| b.mirrored()),
            },
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FdtdStructure::Homogeneous { index } if !(*index >= 1.0) => Err(Error::InvalidFdtdConfig(format!(
                "refractive index must be >= 1, got {index}"
            ))),
            FdtdStructure::Slab { stack, bragg } => {
                for n in [stack.substrate_index, stack.core_index, stack.cladding_index] {
                    if !(n >= 1.0) {
                        return Err(Error::InvalidFdtdConfig(format!("refractive index must be >= 1, got {n}")));
                    }
                }
                if !(stack.core_thickness > 0.0) {
                    return Err(Error::InvalidFdtdConfig("core thickness must be > 0".into()));
                }
                if let Some(b) = bragg {
                    b.validate()?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn stack_extent(&self) -> Option<(f64, f64)> {
        match self {
            FdtdStructure::Slab { bragg: Some(b), .. } if b.periods > 0 => Some(b.extent()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxFlux {
    /// m
    pub half_width: f64,
    pub power: f64,
}

/// Powers in arbitrary but consistent units at the analysis frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    /// Outward flux through the innermost box.
    pub total_power: f64,
    pub boxes: Vec<BoxFlux>,
    /// Largest relative deviation of any box from the innermost one.
    pub box_agreement: f64,
    pub guided_left: f64,
    pub guided_right: f64,
    /// Plain Poynting flux through the guided-power planes.
    pub raw_flux_left: f64,
    pub raw_flux_right: f64,
    /// x of the guided-power planes (m).
    pub monitor_left_x: f64,
    pub monitor_right_x: f64,
    /// Total power of the identical run in homogeneous cladding.
    pub homogeneous_power: Option<f64>,
    pub purcell_ratio: Option<f64>,
    pub slab_effective_index: Option<f64>,
    /// Emitter position after snapping to the grid (m).
    pub emitter_x: f64,
    pub emitter_y: f64,
    pub analysis_wavelength: f64,
    pub steps: usize,
    pub energy_decayed: bool,
    /// `(step, energy)` every 100 steps.
    pub energy_trace: Vec<(usize, f64)>,
    #[serde(skip)]
    pub series: Vec<FluxSample>,
    #[serde(skip)]
    pub field: Option<FieldDft>,
}

impl PowerReport {
    pub fn scattered_power(&self) -> f64 {
        self.total_power - self.guided_left - self.guided_right
    }

    /// `right / (left + right)`.
    pub fn directionality(&self) -> f64 {
        let s = self.guided_left + self.guided_right;
        if s > 0.0 {
            self.guided_right / s
        } else {
            0.0
        }
    }

    /// CSV of the flux time series.
    pub fn series_csv(&self) -> String {
        sim::series_csv(&self.series)
    }
}

/// Simulates one structure without a homogeneous reference.
pub fn simulate(config: &FdtdConfig, structure: &FdtdStructure) -> Result<PowerReport> {
    config.validate()?;
    structure.validate()?;
    sim::Simulation::new(config, structure)?.run()
}

/// Runs the structure and the same configuration in homogeneous cladding.
pub fn run_dipole_sim(config: &FdtdConfig, structure: &FdtdStructure) -> Result<PowerReport> {
    let mut report = simulate(config, structure)?;
    let hom = match structure {
        FdtdStructure::Homogeneous { .. } => report.total_power,
        _ => {
            let reference = FdtdStructure::Homogeneous {
                index: structure.cladding_index(),
            };
            simulate(config, &reference)?.total_power
        }
    };
    report.homogeneous_power = Some(hom);
    report.purcell_ratio = Some(report.total_power / hom);
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidedFractions {
    pub left: f64,
    pub right: f64,
    pub total: f64,
    pub left_vs_homogeneous: Option<f64>,
    pub right_vs_homogeneous: Option<f64>,
    pub total_vs_homogeneous: Option<f64>,
}

/// Guided powers relative to the total radiated power (and to the
/// homogeneous-medium power when available).
pub fn guided_fraction_fdtd(report: &PowerReport) -> GuidedFractions {
    let p = report.total_power;
    let hom = report.homogeneous_power;
    GuidedFractions {
        left: report.guided_left / p,
        right: report.guided_right / p,
        total: (report.guided_left + report.guided_right) / p,
        left_vs_homogeneous: hom.map(|h| report.guided_left / h),
        right_vs_homogeneous: hom.map(|h| report.guided_right / h),
        total_vs_homogeneous: hom.map(|h| (report.guided_left + report.guided_right) / h),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraggReport {
    pub power: PowerReport,
    pub directionality: f64,
    pub scattered_power: f64,
    pub right_fraction: f64,
    pub left_fraction: f64,
    pub layout: BraggLayout,
}

/// Dipole run with the Bragg stack cut into the slab.
pub fn run_bragg_sim(config: &FdtdConfig, stack: &SlabStack, bragg: &BraggLayout) -> Result<BraggReport> {
    if bragg.periods == 0 {
        // degenerate stack: plain slab
        let power = run_dipole_sim(config, &FdtdStructure::slab(*stack))?;
        return Ok(bragg_report(power, *bragg));
    }
    let structure = FdtdStructure::Slab {
        stack: *stack,
        bragg: Some(*bragg),
    };
    let power = run_dipole_sim(config, &structure)?;
    Ok(bragg_report(power, *bragg))
}

fn bragg_report(power: PowerReport, layout: BraggLayout) -> BraggReport {
    BraggReport {
        directionality: power.directionality(),
        scattered_power: power.scattered_power(),
        right_fraction: power.guided_right / power.total_power,
        left_fraction: power.guided_left / power.total_power,
        power,
        layout,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurcellRow {
    pub x: f64,
    pub y: f64,
    pub total_power: f64,
    pub ratio: f64,
}

/// `P_tot / P_hom` for each emitter position. The homogeneous reference is
/// one run at the configured source position.
pub fn purcell_scan(
    config: &FdtdConfig,
    structure: &FdtdStructure,
    positions: &[(f64, f64)],
) -> Result<Vec<PurcellRow>> {
    let reference = FdtdStructure::Homogeneous {
        index: structure.cladding_index(),
    };
    let hom = simulate(config, &reference)?.total_power;
    positions
        .iter()
        .map(|&(x, y)| {
            let mut c = config.clone();
            c.source.x = x;
            c.source.y = y;
            let p = simulate(&c, structure)?.total_power;
            Ok(PurcellRow {
                x,
                y,
                total_power: p,
                ratio: p / hom,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn courant_and_pml_validation() {
        let mut c = FdtdConfig::default();
        assert!(c.validate().is_ok());
        c.courant = 0.75;
        assert!(matches!(c.validate(), Err(Error::InvalidFdtdConfig(_))));
        c.courant = 0.5;
        c.pml_cells = 6;
        assert!(c.validate().is_err());
    }

    #[test]
    fn monitor_outside_window_rejected() {
        let c = FdtdConfig {
            guided_monitor_offset: 5e-6,
            ..FdtdConfig::default()
        };
        let err = simulate(&c, &FdtdStructure::slab(FdtdStructure::paper_stack())).unwrap_err();
        assert!(matches!(err, Error::InvalidFdtdConfig(_)), "{err}");
    }

    #[test]
    fn trench_geometry() {
        let stack = FdtdStructure::paper_stack();
        let b = BraggLayout::quarter_wave(&stack, 785e-9, 3).unwrap();
        assert!(b.in_trench(0.0));
        assert!(!b.in_trench(b.end_face + 1e-9));
        assert!(!b.in_trench(b.end_face - b.low_length - 1e-9));
        assert!(b.in_trench(b.end_face - b.low_length - b.high_length - 1e-9));
        assert!(!b.in_trench(b.end_face - b.length() - 1e-9));
        let m = b.mirrored();
        for k in 0..200 {
            let x = -0.8e-6 + k as f64 * 7.3e-9;
            assert_eq!(b.in_trench(x), m.in_trench(-x));
        }
    }
}
