//! TOML run configuration. Lengths are in nanometers, linewidths in MHz
//! (Γ/2π) and detunings in units of Γ.

use std::f64::consts::PI;

use molwg::circuits::{CircuitElement, SourceSpec};
use molwg::coupling::{EmitterParams, DEFAULT_TOTAL_RATE_CORRECTION};
use molwg::fdtd::{BraggLayout, FdtdConfig, FdtdStructure, Side};
use molwg::materials::{EmitterPosition, Grid2D, Material, WaveguideSpec};
use molwg::modes::SlabStack;
use molwg::phase::{NonlinearParams, DEFAULT_SCAN_HALF_WIDTH, DEFAULT_SCAN_SAMPLES};
use serde::Deserialize;

use crate::error::CliError;

const NM_PER_M: f64 = 1e9;

fn mhz_to_rad(mhz: f64) -> f64 {
    2.0 * PI * mhz * 1e6
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub waveguide: WaveguideSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub emitter: EmitterSection,
    #[serde(default)]
    pub modes: ModesSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub phase: PhaseSection,
    #[serde(default)]
    pub fdtd: FdtdSection,
    #[serde(default)]
    pub bragg: BraggSection,
    #[serde(default)]
    pub hom: HomSection,
    #[serde(default)]
    pub mzgate: MzGateSection,
    pub circuit: Option<CircuitSection>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// A built-in material name or an explicit index.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum MaterialConfig {
    Named(String),
    Custom(CustomMaterial),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMaterial {
    pub name: String,
    pub index: f64,
}

impl MaterialConfig {
    fn resolve(&self) -> Result<Material, CliError> {
        match self {
            MaterialConfig::Named(name) => Material::builtin(name)
                .ok_or_else(|| CliError::Config(format!("unknown material '{name}'"))),
            MaterialConfig::Custom(m) => Ok(Material::new(m.name.clone(), m.index)?),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveguideSection {
    pub core: MaterialConfig,
    pub substrate: MaterialConfig,
    pub cladding: MaterialConfig,
    pub core_thickness_nm: f64,
    pub core_width_nm: f64,
    pub slot_gap_nm: Option<f64>,
    pub wavelength_nm: f64,
}

impl Default for WaveguideSection {
    fn default() -> Self {
        Self {
            core: MaterialConfig::Named("silicon_nitride".into()),
            substrate: MaterialConfig::Named("silica".into()),
            cladding: MaterialConfig::Named("n_hexadecane".into()),
            core_thickness_nm: 120.0,
            core_width_nm: 600.0,
            slot_gap_nm: None,
            wavelength_nm: 785.0,
        }
    }
}

impl WaveguideSection {
    pub fn to_spec(&self) -> Result<WaveguideSpec, CliError> {
        let spec = WaveguideSpec {
            core: self.core.resolve()?,
            substrate: self.substrate.resolve()?,
            cladding: self.cladding.resolve()?,
            core_thickness: self.core_thickness_nm / NM_PER_M,
            core_width: self.core_width_nm / NM_PER_M,
            slot_gap: self.slot_gap_nm.map(|g| g / NM_PER_M),
            wavelength: self.wavelength_nm / NM_PER_M,
        };
        Ok(spec.validated()?)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub spacing_nm: f64,
    pub x_extent_nm: f64,
    pub y_extent_nm: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            spacing_nm: 10.0,
            x_extent_nm: 3000.0,
            y_extent_nm: 2000.0,
        }
    }
}

impl GridSection {
    pub fn to_grid(&self, spec: &WaveguideSpec) -> Result<Grid2D, CliError> {
        Ok(Grid2D::centered(
            spec,
            self.x_extent_nm / NM_PER_M,
            self.y_extent_nm / NM_PER_M,
            self.spacing_nm / NM_PER_M,
        )?)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitterSection {
    /// Height above the core top; defaults to 20 nm, or the slot center.
    pub standoff_nm: Option<f64>,
    pub lateral_offset_nm: f64,
    pub in_slot: bool,
}

impl EmitterSection {
    pub fn to_position(&self, spec: &WaveguideSpec) -> EmitterPosition {
        let mut pos = if self.in_slot {
            EmitterPosition::slot_center(spec)
        } else {
            EmitterPosition::above_strip(20.0 / NM_PER_M)
        };
        if let Some(s) = self.standoff_nm {
            pos.vertical_standoff = s / NM_PER_M;
        }
        pos.lateral_offset = self.lateral_offset_nm / NM_PER_M;
        pos
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesSection {
    pub count: usize,
    pub group_velocity: bool,
    pub group_velocity_step: f64,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            count: 2,
            group_velocity: true,
            group_velocity_step: molwg::modes::DEFAULT_GROUP_VELOCITY_STEP,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CouplingSection {
    pub linewidth_mhz: f64,
    pub eta: f64,
    pub dipole_orientation: [f64; 3],
    /// Transition dipole (C·m); enables absolute rates.
    pub dipole_magnitude: Option<f64>,
    /// Matrix index; defaults to the waveguide cladding.
    pub n: Option<f64>,
    pub a_eff_over_lambda_sq: f64,
    /// `v_g / (c/n)`
    pub v_g_over_c_over_n: f64,
    pub total_rate_correction: f64,
}

impl Default for CouplingSection {
    fn default() -> Self {
        Self {
            linewidth_mhz: 30.0,
            eta: 0.5,
            dipole_orientation: [1.0, 0.0, 0.0],
            dipole_magnitude: None,
            n: None,
            a_eff_over_lambda_sq: 0.42,
            v_g_over_c_over_n: 1.0,
            total_rate_correction: DEFAULT_TOTAL_RATE_CORRECTION,
        }
    }
}

impl CouplingSection {
    pub fn emitter(&self, wavelength: f64) -> EmitterParams {
        EmitterParams {
            gamma_total: mhz_to_rad(self.linewidth_mhz),
            eta: self.eta,
            dipole_orientation: self.dipole_orientation,
            wavelength,
            dipole_magnitude: self.dipole_magnitude,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhaseSection {
    pub linewidth_mhz: f64,
    pub eta: f64,
    pub gamma_wg_fraction: f64,
    pub photon_numbers: Vec<u32>,
    pub delta_min: f64,
    pub delta_max: f64,
    pub samples: usize,
}

impl Default for PhaseSection {
    fn default() -> Self {
        Self {
            linewidth_mhz: 30.0,
            eta: 0.5,
            gamma_wg_fraction: 0.5,
            photon_numbers: vec![1, 2],
            delta_min: -DEFAULT_SCAN_HALF_WIDTH,
            delta_max: DEFAULT_SCAN_HALF_WIDTH,
            samples: DEFAULT_SCAN_SAMPLES,
        }
    }
}

impl PhaseSection {
    pub fn params(&self) -> Result<NonlinearParams, CliError> {
        let p = NonlinearParams {
            gamma: mhz_to_rad(self.linewidth_mhz),
            eta: self.eta,
            gamma_wg_fraction: self.gamma_wg_fraction,
            photon_numbers: self.photon_numbers.clone(),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Homogeneous,
    Slab,
}

/// Every field overrides the built-in default when present.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FdtdSection {
    pub structure: StructureKind,
    pub homogeneous_index: f64,
    pub substrate_index: f64,
    pub core_index: f64,
    pub cladding_index: f64,
    pub core_thickness_nm: f64,
    pub cell_size_nm: Option<f64>,
    pub courant: Option<f64>,
    pub x_min_nm: Option<f64>,
    pub x_max_nm: Option<f64>,
    pub y_min_nm: Option<f64>,
    pub y_max_nm: Option<f64>,
    pub pml_cells: Option<usize>,
    pub pml_reflection: Option<f64>,
    pub source_x_nm: Option<f64>,
    pub source_y_nm: Option<f64>,
    pub wavelength_nm: Option<f64>,
    pub fractional_bandwidth: Option<f64>,
    pub analysis_wavelength_nm: Option<f64>,
    pub energy_decay: Option<f64>,
    pub max_steps: Option<usize>,
    pub box_half_widths_nm: Option<Vec<f64>>,
    pub guided_monitor_offset_nm: Option<f64>,
    pub record_interval: Option<usize>,
    /// Extra emitter positions `[x, y]` (nm) for a Purcell scan.
    pub purcell_positions_nm: Vec<[f64; 2]>,
}

impl Default for FdtdSection {
    fn default() -> Self {
        let stack = FdtdStructure::paper_stack();
        Self {
            structure: StructureKind::Slab,
            homogeneous_index: stack.cladding_index,
            substrate_index: stack.substrate_index,
            core_index: stack.core_index,
            cladding_index: stack.cladding_index,
            core_thickness_nm: stack.core_thickness * NM_PER_M,
            cell_size_nm: None,
            courant: None,
            x_min_nm: None,
            x_max_nm: None,
            y_min_nm: None,
            y_max_nm: None,
            pml_cells: None,
            pml_reflection: None,
            source_x_nm: None,
            source_y_nm: None,
            wavelength_nm: None,
            fractional_bandwidth: None,
            analysis_wavelength_nm: None,
            energy_decay: None,
            max_steps: None,
            box_half_widths_nm: None,
            guided_monitor_offset_nm: None,
            record_interval: None,
            purcell_positions_nm: Vec::new(),
        }
    }
}

impl FdtdSection {
    pub fn stack(&self) -> SlabStack {
        SlabStack {
            substrate_index: self.substrate_index,
            core_index: self.core_index,
            cladding_index: self.cladding_index,
            core_thickness: self.core_thickness_nm / NM_PER_M,
        }
    }

    pub fn structure(&self) -> FdtdStructure {
        match self.structure {
            StructureKind::Homogeneous => FdtdStructure::Homogeneous {
                index: self.homogeneous_index,
            },
            StructureKind::Slab => FdtdStructure::slab(self.stack()),
        }
    }

    /// Applies the overrides to `base` and validates the result.
    pub fn apply(&self, base: FdtdConfig) -> Result<FdtdConfig, CliError> {
        let mut c = base;
        let nm = |v: Option<f64>| v.map(|x| x / NM_PER_M);
        if let Some(v) = nm(self.cell_size_nm) {
            c.cell_size = v;
        }
        if let Some(v) = self.courant {
            c.courant = v;
        }
        if let Some(v) = nm(self.x_min_nm) {
            c.x_min = v;
        }
        if let Some(v) = nm(self.x_max_nm) {
            c.x_max = v;
        }
        if let Some(v) = nm(self.y_min_nm) {
            c.y_min = v;
        }
        if let Some(v) = nm(self.y_max_nm) {
            c.y_max = v;
        }
        if let Some(v) = self.pml_cells {
            c.pml_cells = v;
        }
        if let Some(v) = self.pml_reflection {
            c.pml_reflection = v;
        }
        if let Some(v) = nm(self.source_x_nm) {
            c.source.x = v;
        }
        if let Some(v) = nm(self.source_y_nm) {
            c.source.y = v;
        }
        if let Some(v) = nm(self.wavelength_nm) {
            c.source.wavelength = v;
        }
        if let Some(v) = self.fractional_bandwidth {
            c.source.fractional_bandwidth = v;
        }
        if let Some(v) = nm(self.analysis_wavelength_nm) {
            c.analysis_wavelength = Some(v);
        }
        if let Some(v) = self.energy_decay {
            c.energy_decay = v;
        }
        if let Some(v) = self.max_steps {
            c.max_steps = Some(v);
        }
        if let Some(v) = &self.box_half_widths_nm {
            c.box_half_widths = v.iter().map(|x| x / NM_PER_M).collect();
        }
        if let Some(v) = nm(self.guided_monitor_offset_nm) {
            c.guided_monitor_offset = v;
        }
        if let Some(v) = self.record_interval {
            c.record_interval = v;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn purcell_positions(&self) -> Vec<(f64, f64)> {
        self.purcell_positions_nm
            .iter()
            .map(|p| (p[0] / NM_PER_M, p[1] / NM_PER_M))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SideConfig {
    Left,
    Right,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BraggSection {
    pub periods: usize,
    /// Design wavelength; defaults to the FDTD source wavelength.
    pub design_wavelength_nm: Option<f64>,
    pub end_gap_nm: Option<f64>,
    /// Side the reflector sits on; emission is launched the other way.
    pub side: SideConfig,
}

impl Default for BraggSection {
    fn default() -> Self {
        Self {
            periods: 8,
            design_wavelength_nm: None,
            end_gap_nm: None,
            side: SideConfig::Left,
        }
    }
}

impl BraggSection {
    pub fn layout(&self, stack: &SlabStack, wavelength: f64) -> Result<BraggLayout, CliError> {
        let mut layout = BraggLayout::quarter_wave(stack, wavelength, self.periods)?;
        if let Some(g) = self.end_gap_nm {
            layout.end_gap = g / NM_PER_M;
            layout.end_face = layout.end_gap;
        }
        if self.side == SideConfig::Right {
            layout = layout.mirrored();
            debug_assert_eq!(layout.side, Side::Right);
        }
        layout.validate()?;
        Ok(layout)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HomSection {
    pub linewidth_mhz: f64,
    /// Second linewidth; defaults to the first.
    pub linewidth_b_mhz: Option<f64>,
    pub detuning_over_gamma: f64,
    pub zpl_probability: f64,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_samples: usize,
}

impl Default for HomSection {
    fn default() -> Self {
        Self {
            linewidth_mhz: 30.0,
            linewidth_b_mhz: None,
            detuning_over_gamma: 0.0,
            zpl_probability: 1.0,
            sweep_min: -10.0,
            sweep_max: 10.0,
            sweep_samples: 201,
        }
    }
}

impl HomSection {
    pub fn gamma(&self) -> f64 {
        mhz_to_rad(self.linewidth_mhz)
    }

    /// Source pair with the second source Stark-tuned by `detuning_over_gamma` Γ.
    pub fn sources(&self, detuning_over_gamma: f64) -> Result<(SourceSpec, SourceSpec), CliError> {
        let g = self.gamma();
        let gb = self.linewidth_b_mhz.map(mhz_to_rad).unwrap_or(g);
        let a = SourceSpec::new(0.0, g, self.zpl_probability);
        let b = molwg::circuits::stark_tune(
            &SourceSpec::new(0.0, gb, self.zpl_probability),
            detuning_over_gamma * g,
        );
        a.validate()?;
        b.validate()?;
        Ok((a, b))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MzGateSection {
    /// Probe detuning; defaults to the differential-phase peak.
    pub detuning_over_gamma: Option<f64>,
    pub pump: bool,
    pub zpl_probability: f64,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_samples: usize,
}

impl Default for MzGateSection {
    fn default() -> Self {
        Self {
            detuning_over_gamma: None,
            pump: false,
            zpl_probability: 1.0,
            sweep_min: -3.0,
            sweep_max: 3.0,
            sweep_samples: 121,
        }
    }
}

/// A user-defined linear-optics circuit run alongside the gate.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub modes: usize,
    /// Input photons as `[mode, tag]`.
    pub photons: Vec<[usize; 2]>,
    #[serde(default = "one")]
    pub tags: usize,
    #[serde(default)]
    pub elements: Vec<ElementConfig>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementConfig {
    Beamsplitter { modes: [usize; 2], transmissivity: f64 },
    PhaseShifter { mode: usize, phase: f64 },
    Loss { mode: usize, transmission: f64 },
    /// Uses the `[phase]` emitter parameters.
    Nonlinear { modes: Vec<usize>, detuning_over_gamma: f64 },
}

impl ElementConfig {
    pub fn to_element(&self, params: &NonlinearParams) -> CircuitElement {
        match self {
            ElementConfig::Beamsplitter { modes, transmissivity } => CircuitElement::Beamsplitter {
                modes: *modes,
                transmissivity: *transmissivity,
            },
            ElementConfig::PhaseShifter { mode, phase } => CircuitElement::PhaseShifter {
                mode: *mode,
                phase: *phase,
            },
            ElementConfig::Loss { mode, transmission } => CircuitElement::Loss {
                mode: *mode,
                transmission: *transmission,
            },
            ElementConfig::Nonlinear {
                modes,
                detuning_over_gamma,
            } => CircuitElement::Nonlinear {
                modes: modes.clone(),
                params: params.clone(),
                detuning: detuning_over_gamma * params.gamma,
            },
        }
    }
}
