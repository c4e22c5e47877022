use std::fs;
use std::path::{Path, PathBuf};

use molwg::circuits::{run_circuit, run_hom, run_mz_gate, FewPhotonState, HomResult, MzGateResult, SourceSpec};
use molwg::constants::C;
use molwg::coupling::{coupling_ratio, evaluate_coupling, guided_fraction, CouplingInputs, CouplingResult};
use molwg::fdtd::{
    guided_fraction_fdtd, purcell_scan, run_bragg_sim, run_dipole_sim, BraggLayout, BraggReport, FdtdConfig,
    FdtdStructure, GuidedFractions, PowerReport, PurcellRow,
};
use molwg::materials::{locate_emitter, permittivity_map, EmitterLocation, Grid2D, WaveguideSpec};
use molwg::modes::{
    effective_mode_area, group_velocity_with_step, solve_modes_in, GroupVelocityResult, ModeAreaResult, Polarization,
};
use molwg::phase::{default_scan, scan, summarize_peaks, NonlinearParams, PhasePeaks};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::CliError;
use crate::output::{csv, Artifact};

pub const MODE_AREA_FILE: &str = "mode_area.json";

/// Options shared by all subcommands plus the subcommand-specific overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub emit_plot_data: bool,
    pub delta_range: Option<(f64, f64)>,
    pub photon_numbers: Option<Vec<u32>>,
    pub pump: bool,
    pub periods: Option<usize>,
    /// `Some(None)` runs the solver in-process; `Some(Some(p))` reads a
    /// previous `modes` output.
    pub from_mode_solver: Option<Option<PathBuf>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSummary {
    pub index: usize,
    pub effective_index: f64,
    pub polarization: Polarization,
    pub eigen_residual: f64,
    pub boundary_ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModesReport {
    pub waveguide: WaveguideSpec,
    pub grid: Grid2D,
    pub emitter: EmitterLocation,
    pub mode_area: ModeAreaResult,
    pub group_velocity: Option<GroupVelocityResult>,
    pub modes: Vec<ModeSummary>,
}

struct ModeRun {
    report: ModesReport,
    fields: Vec<String>,
}

fn solve_mode_problem(cfg: &Config, with_group_velocity: bool) -> Result<ModeRun, CliError> {
    let spec = cfg.waveguide.to_spec()?;
    let grid = cfg.grid.to_grid(&spec)?;
    let emitter = locate_emitter(&spec, &cfg.emitter.to_position(&spec))?;
    if cfg.modes.count == 0 {
        return Err(CliError::Config("modes.count must be >= 1".into()));
    }
    let eps = permittivity_map(&spec, &grid)?;
    let modes = solve_modes_in(&spec, &eps, cfg.modes.count)?;
    let mode_area = effective_mode_area(&modes[0], &eps, &emitter)?;
    let group_velocity = if with_group_velocity {
        Some(group_velocity_with_step(&spec, &grid, cfg.modes.group_velocity_step)?)
    } else {
        None
    };
    let summaries = modes
        .iter()
        .enumerate()
        .map(|(index, m)| ModeSummary {
            index,
            effective_index: m.effective_index,
            polarization: m.polarization,
            eigen_residual: m.eigen_residual,
            boundary_ratio: m.boundary_ratio,
        })
        .collect();
    Ok(ModeRun {
        fields: modes.iter().map(|m| m.to_csv()).collect(),
        report: ModesReport {
            waveguide: spec,
            grid,
            emitter,
            mode_area,
            group_velocity,
            modes: summaries,
        },
    })
}

pub fn cmd_modes(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let run = solve_mode_problem(cfg, cfg.modes.group_velocity)?;
    let mut out = vec![
        Artifact::text("mode_field.csv", run.fields[0].clone()),
        Artifact::json(MODE_AREA_FILE, &run.report)?,
    ];
    if opts.emit_plot_data {
        for (k, f) in run.fields.iter().enumerate().skip(1) {
            out.push(Artifact::text(&format!("mode_{k}_field.csv"), f.clone()));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum InputSource {
    Config,
    ModeSolver,
    ModeSolverFile,
}

#[derive(Debug, Clone, Serialize)]
pub struct CouplingReport {
    pub input_source: InputSource,
    pub inputs: CouplingInputs,
    pub result: CouplingResult,
}

fn read_mode_report(path: &Path) -> Result<ModesReport, CliError> {
    let file = if path.is_dir() { path.join(MODE_AREA_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file)
        .map_err(|e| CliError::Config(format!("cannot read mode solver output {}: {e}", file.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("malformed mode solver output {}: {e}", file.display())))
}

pub fn cmd_coupling(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let spec = cfg.waveguide.to_spec()?;
    let n = cfg.coupling.n.unwrap_or(spec.cladding.refractive_index);
    let lambda = spec.wavelength;
    let (a_eff, v_g, input_source) = match &opts.from_mode_solver {
        None => (
            cfg.coupling.a_eff_over_lambda_sq * lambda * lambda,
            cfg.coupling.v_g_over_c_over_n * C / n,
            InputSource::Config,
        ),
        Some(source) => {
            let (report, kind) = match source {
                Some(path) => (read_mode_report(path)?, InputSource::ModeSolverFile),
                None => (solve_mode_problem(cfg, true)?.report, InputSource::ModeSolver),
            };
            let v_g = report
                .group_velocity
                .ok_or_else(|| CliError::Config("mode solver output has no group velocity".into()))?
                .v_g;
            (report.mode_area.a_eff, v_g, kind)
        }
    };
    let inputs = CouplingInputs {
        emitter: cfg.coupling.emitter(lambda),
        n,
        a_eff,
        v_g,
        total_rate_correction: cfg.coupling.total_rate_correction,
    };
    let result = evaluate_coupling(&inputs)?;
    let mut out = vec![Artifact::json(
        "coupling.json",
        &CouplingReport {
            input_source,
            inputs: inputs.clone(),
            result,
        },
    )?];
    if opts.emit_plot_data {
        let rows = (1..=100).map(|k| {
            let area = 0.01 * k as f64;
            let r = coupling_ratio(inputs.emitter.dipole_orientation, lambda, n, area * lambda * lambda, v_g);
            vec![area, r, guided_fraction(r, inputs.total_rate_correction)]
        });
        out.push(Artifact::text(
            "coupling_vs_area.csv",
            csv(&["a_eff_over_lambda_sq", "gamma_wg_over_gamma_rad", "guided_fraction"], rows),
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PhaseReport {
    pub params: NonlinearParams,
    pub delta_min_over_gamma: f64,
    pub delta_max_over_gamma: f64,
    pub samples: usize,
    pub peaks: PhasePeaks,
    pub peak_delta_over_gamma: PeakDetunings,
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakDetunings {
    pub phi1: f64,
    pub phi2: f64,
    pub differential: f64,
}

pub fn cmd_phase_scan(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let mut section = cfg.phase.clone();
    if let Some(m) = &opts.photon_numbers {
        section.photon_numbers = m.clone();
    }
    if let Some((lo, hi)) = opts.delta_range {
        section.delta_min = lo;
        section.delta_max = hi;
    }
    let params = section.params()?;
    let g = params.gamma;
    let response = scan(&params, section.delta_min * g, section.delta_max * g, section.samples)?;
    let peaks = summarize_peaks(&response)?;
    let report = PhaseReport {
        params,
        delta_min_over_gamma: section.delta_min,
        delta_max_over_gamma: section.delta_max,
        samples: section.samples,
        peak_delta_over_gamma: PeakDetunings {
            phi1: peaks.phi1.delta / g,
            phi2: peaks.phi2.delta / g,
            differential: peaks.differential.delta / g,
        },
        peaks,
    };
    Ok(vec![
        Artifact::text("phase_scan.csv", response.to_csv()),
        Artifact::json("phase_peaks.json", &report)?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct SelfCheck {
    pub box_agreement: f64,
    pub box_agreement_ok: bool,
    pub energy_decayed: bool,
}

impl SelfCheck {
    fn of(report: &PowerReport) -> Self {
        Self {
            box_agreement: report.box_agreement,
            box_agreement_ok: report.box_agreement < 0.02,
            energy_decayed: report.energy_decayed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FdtdRunReport {
    pub config: FdtdConfig,
    pub structure: FdtdStructure,
    pub self_check: SelfCheck,
    pub guided_fractions: GuidedFractions,
    pub power: PowerReport,
    pub purcell_scan: Vec<PurcellRow>,
}

fn field_artifacts(report: &PowerReport, opts: &RunOptions) -> Vec<Artifact> {
    let mut out = vec![Artifact::text("flux_series.csv", report.series_csv())];
    if opts.emit_plot_data {
        if let Some(f) = &report.field {
            out.push(Artifact::text("field_dft.csv", f.to_csv()));
        }
    }
    out
}

pub fn cmd_fdtd(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let structure = cfg.fdtd.structure();
    structure.validate()?;
    let mut config = cfg.fdtd.apply(FdtdConfig::default())?;
    config.record_field = opts.emit_plot_data;
    let power = run_dipole_sim(&config, &structure)?;
    let positions = cfg.fdtd.purcell_positions();
    let purcell = if positions.is_empty() {
        Vec::new()
    } else {
        let mut c = config.clone();
        c.record_field = false;
        purcell_scan(&c, &structure, &positions)?
    };
    let mut out = field_artifacts(&power, opts);
    out.insert(
        0,
        Artifact::json(
            "fdtd_report.json",
            &FdtdRunReport {
                config,
                structure,
                self_check: SelfCheck::of(&power),
                guided_fractions: guided_fraction_fdtd(&power),
                power,
                purcell_scan: purcell,
            },
        )?,
    );
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct BraggRunReport {
    pub config: FdtdConfig,
    pub design_wavelength: f64,
    pub layout: BraggLayout,
    pub self_check: SelfCheck,
    pub directionality_ok: bool,
    pub bragg: BraggReport,
}

pub fn cmd_bragg(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let stack = cfg.fdtd.stack();
    let mut section = cfg.bragg.clone();
    if let Some(p) = opts.periods {
        section.periods = p;
    }
    let source_wavelength = cfg.fdtd.wavelength_nm.map(|w| w / 1e9).unwrap_or(FdtdConfig::default().source.wavelength);
    let design = section.design_wavelength_nm.map(|w| w / 1e9).unwrap_or(source_wavelength);
    let layout = section.layout(&stack, design)?;
    FdtdStructure::Slab {
        stack,
        bragg: Some(layout),
    }
    .validate()?;
    let mut config = cfg.fdtd.apply(FdtdConfig::for_bragg(&stack, &layout))?;
    config.record_field = opts.emit_plot_data;
    let bragg = run_bragg_sim(&config, &stack, &layout)?;
    let mut out = field_artifacts(&bragg.power, opts);
    out.insert(
        0,
        Artifact::json(
            "bragg_report.json",
            &BraggRunReport {
                self_check: SelfCheck::of(&bragg.power),
                directionality_ok: bragg.directionality > 0.8,
                config,
                design_wavelength: design,
                layout,
                bragg,
            },
        )?,
    );
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct HomReport {
    pub source_a: SourceSpec,
    pub source_b: SourceSpec,
    pub detuning_over_gamma: f64,
    pub result: HomResult,
}

pub fn cmd_hom(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let h = &cfg.hom;
    let (a, b) = h.sources(h.detuning_over_gamma)?;
    let result = run_hom(&a, &b)?;
    let mut out = vec![Artifact::json(
        "hom.json",
        &HomReport {
            source_a: a,
            source_b: b,
            detuning_over_gamma: h.detuning_over_gamma,
            result,
        },
    )?];
    if opts.emit_plot_data {
        let rows = sweep(h.sweep_min, h.sweep_max, h.sweep_samples)?
            .into_iter()
            .map(|d| {
                let (a, b) = h.sources(d)?;
                let r = run_hom(&a, &b)?;
                Ok(vec![d, r.visibility, r.coincidence, r.coincidence_engine])
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        out.push(Artifact::text(
            "hom_sweep.csv",
            csv(
                &["detuning_over_gamma", "visibility", "coincidence", "coincidence_engine"],
                rows,
            ),
        ));
    }
    Ok(out)
}

fn sweep(lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if samples < 2 || !(hi > lo) {
        return Err(CliError::Config(format!(
            "sweep needs >= 2 samples over an increasing range, got {samples} over [{lo}, {hi}]"
        )));
    }
    let step = (hi - lo) / (samples - 1) as f64;
    Ok((0..samples).map(|k| lo + step * k as f64).collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct CircuitReport {
    pub spatial_modes: usize,
    pub loss_modes: Vec<usize>,
    pub mean_occupation: Vec<f64>,
    pub p_lost: f64,
    pub total_probability: f64,
    pub distribution: Vec<PatternProbability>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternProbability {
    pub occupation: Vec<u8>,
    pub probability: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MzGateReport {
    pub params: NonlinearParams,
    pub detuning_over_gamma: f64,
    pub result: MzGateResult,
    pub circuit: Option<CircuitReport>,
}

fn run_custom_circuit(cfg: &Config, params: &NonlinearParams) -> Result<Option<CircuitReport>, CliError> {
    let Some(c) = &cfg.circuit else {
        return Ok(None);
    };
    let photons: Vec<(usize, usize)> = c.photons.iter().map(|p| (p[0], p[1])).collect();
    let mut state = FewPhotonState::photons(c.modes, c.tags, &photons)?;
    let elements: Vec<_> = c.elements.iter().map(|e| e.to_element(params)).collect();
    let loss_modes = run_circuit(&mut state, &elements)?;
    let n = state.spatial_modes();
    let mean_occupation: Vec<f64> = (0..n).map(|k| state.mean_occupation(k)).collect();
    let p_lost = loss_modes.iter().map(|&k| mean_occupation[k]).sum();
    let distribution = state
        .distribution()
        .into_iter()
        .map(|(occupation, probability)| PatternProbability { occupation, probability })
        .collect();
    Ok(Some(CircuitReport {
        spatial_modes: n,
        loss_modes,
        mean_occupation,
        p_lost,
        total_probability: state.total_probability(),
        distribution,
    }))
}

pub fn cmd_mzgate(cfg: &Config, opts: &RunOptions) -> Result<Vec<Artifact>, CliError> {
    let params = cfg.phase.params()?;
    let g = params.gamma;
    let detuning_over_gamma = match cfg.mzgate.detuning_over_gamma {
        Some(d) => d,
        None => summarize_peaks(&default_scan(&params)?)?.differential.delta / g,
    };
    let probe = SourceSpec::new(0.0, g, cfg.mzgate.zpl_probability);
    let pump = opts.pump || cfg.mzgate.pump;
    let result = run_mz_gate(&probe, pump, &params, detuning_over_gamma * g)?;
    let circuit = run_custom_circuit(cfg, &params)?;
    let mut out = vec![Artifact::json(
        "mzgate.json",
        &MzGateReport {
            params: params.clone(),
            detuning_over_gamma,
            result,
            circuit,
        },
    )?];
    if opts.emit_plot_data {
        let m = &cfg.mzgate;
        let rows = sweep(m.sweep_min, m.sweep_max, m.sweep_samples)?
            .into_iter()
            .map(|d| {
                let off = run_mz_gate(&probe, false, &params, d * g)?;
                let on = run_mz_gate(&probe, true, &params, d * g)?;
                Ok(vec![
                    d,
                    off.p_detector0,
                    off.p_detector1,
                    off.p_lost,
                    on.p_detector0,
                    on.p_detector1,
                    on.p_lost,
                ])
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        out.push(Artifact::text(
            "mzgate_sweep.csv",
            csv(
                &[
                    "delta_over_gamma",
                    "no_pump_p_d0",
                    "no_pump_p_d1",
                    "no_pump_p_lost",
                    "pump_p_d0",
                    "pump_p_d1",
                    "pump_p_lost",
                ],
                rows,
            ),
        ));
    }
    Ok(out)
}
