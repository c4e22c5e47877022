//! Guided eigenmodes of the waveguide cross-section.

mod eigen;
mod operator;
mod slab;
mod sparse;

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use slab::{solve_slab_mode_1d, SlabMode, SlabStack};

use crate::constants::C;
use crate::error::{Error, Result};
use crate::materials::{permittivity_map, EmitterLocation, Grid2D, PermittivityMap, WaveguideSpec};
use eigen::{nearest_eigenpairs, ArnoldiOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(rename = "quasi-TE")]
    QuasiTe,
    #[serde(rename = "quasi-TM")]
    QuasiTm,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::QuasiTe => "quasi-TE",
            Polarization::QuasiTm => "quasi-TM",
        })
    }
}

/// A guided mode with fields sampled at cell centers, normalized to unit
/// peak `|E|` and with the dominant transverse component positive at its peak.
#[derive(Debug, Clone)]
pub struct GuidedMode {
    pub effective_index: f64,
    /// rad/m
    pub propagation_constant: f64,
    pub wavelength: f64,
    pub polarization: Polarization,
    pub grid: Grid2D,
    pub ex: Vec<Complex64>,
    pub ey: Vec<Complex64>,
    pub ez: Vec<Complex64>,
    /// `‖A x − n_eff² x‖ / (n_eff² ‖x‖)` of the discrete eigenproblem.
    pub eigen_residual: f64,
    /// Largest `|E|` on the outermost ring of cells.
    pub boundary_ratio: f64,
}

impl GuidedMode {
    pub fn intensity(&self, k: usize) -> f64 {
        self.ex[k].norm_sqr() + self.ey[k].norm_sqr() + self.ez[k].norm_sqr()
    }

    /// Transverse magnetic field, up to the common factor `1/(ωμ0)`, in
    /// units where lengths are scaled by `k0`.
    fn transverse_h(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let g = self.grid;
        let h = 2.0 * std::f64::consts::PI / self.wavelength * g.spacing;
        let b = self.effective_index;
        let ez = |i: isize, j: isize| -> Complex64 {
            if i < 0 || j < 0 || i as usize >= g.nx || j as usize >= g.ny {
                Complex64::new(0.0, 0.0)
            } else {
                self.ez[g.index(i as usize, j as usize)]
            }
        };
        let mut hx = vec![Complex64::new(0.0, 0.0); g.len()];
        let mut hy = hx.clone();
        let i_unit = Complex64::new(0.0, 1.0);
        for i in 0..g.nx as isize {
            for j in 0..g.ny as isize {
                let k = g.index(i as usize, j as usize);
                let dy = (ez(i, j + 1) - ez(i, j - 1)) / (2.0 * h);
                let dx = (ez(i + 1, j) - ez(i - 1, j)) / (2.0 * h);
                // curl E = iωμ0 H with fields ∝ exp(iβz)
                hx[k] = (dy - i_unit * b * self.ey[k]) / i_unit;
                hy[k] = (i_unit * b * self.ex[k] - dx) / i_unit;
            }
        }
        (hx, hy)
    }

    fn power_overlap(&self, other: &GuidedMode) -> Complex64 {
        let (hx, hy) = other.transverse_h();
        (0..self.grid.len())
            .map(|k| self.ex[k] * hy[k].conj() - self.ey[k] * hx[k].conj())
            .sum()
    }

    /// `|∫ E1×H2*·z| / sqrt(|∫ E1×H1*·z| |∫ E2×H2*·z|)`.
    pub fn normalized_overlap(&self, other: &GuidedMode) -> f64 {
        let cross = self.power_overlap(other).norm();
        let a = self.power_overlap(self).norm();
        let b = other.power_overlap(other).norm();
        cross / (a * b).sqrt()
    }

    /// CSV dump: `x_m,y_m,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez`.
    pub fn to_csv(&self) -> String {
        let g = self.grid;
        let mut out = String::with_capacity(g.len() * 160);
        out.push_str("x_m,y_m,re_ex,im_ex,re_ey,im_ey,re_ez,im_ez\n");
        for i in 0..g.nx {
            for j in 0..g.ny {
                let k = g.index(i, j);
                let _ = writeln!(
                    out,
                    "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                    g.x(i),
                    g.y(j),
                    self.ex[k].re,
                    self.ex[k].im,
                    self.ey[k].re,
                    self.ey[k].im,
                    self.ez[k].re,
                    self.ez[k].im
                );
            }
        }
        out
    }
}

/// Solves for up to `count` guided modes, sorted by descending effective index.
pub fn solve_modes(spec: &WaveguideSpec, grid: &Grid2D, count: usize) -> Result<Vec<GuidedMode>> {
    let eps = permittivity_map(spec, grid)?;
    solve_modes_in(spec, &eps, count)
}

/// Same as [`solve_modes`] on a precomputed permittivity map.
pub fn solve_modes_in(
    spec: &WaveguideSpec,
    eps: &PermittivityMap,
    count: usize,
) -> Result<Vec<GuidedMode>> {
    spec.validate()?;
    if count == 0 {
        return Err(Error::InvalidParameter("mode count must be >= 1".into()));
    }
    let n_clad = spec.max_surrounding_index();
    if !spec.is_confining() {
        return Err(Error::Cutoff(format!(
            "core index {} does not exceed surrounding index {}",
            spec.core.refractive_index, n_clad
        )));
    }
    let k0 = 2.0 * std::f64::consts::PI / spec.wavelength;
    let a = operator::assemble(eps, k0);
    let shift = spec.core.permittivity();
    let pairs = nearest_eigenpairs(&a, shift, count + 2, n_clad * n_clad, ArnoldiOptions::default())?;

    let mut modes: Vec<GuidedMode> = pairs
        .into_iter()
        .filter(|p| p.value > n_clad * n_clad && p.value < shift)
        .map(|p| build_mode(spec, eps, p.value, &p.vector, p.residual))
        .collect();
    modes.sort_by(|a, b| b.effective_index.total_cmp(&a.effective_index));
    modes.truncate(count);
    if modes.is_empty() {
        return Err(Error::Cutoff(format!(
            "no eigenvalue above the cladding/substrate line n = {n_clad}"
        )));
    }
    Ok(modes)
}

fn build_mode(
    spec: &WaveguideSpec,
    eps: &PermittivityMap,
    n_eff_sq: f64,
    v: &[f64],
    residual: f64,
) -> GuidedMode {
    let g = eps.grid;
    let n_eff = n_eff_sq.sqrt();
    let k0 = 2.0 * std::f64::consts::PI / spec.wavelength;
    let h = k0 * g.spacing;
    let ex_r: Vec<f64> = (0..g.len()).map(|k| v[2 * k]).collect();
    let ey_r: Vec<f64> = (0..g.len()).map(|k| v[2 * k + 1]).collect();

    // Ez = i/(β ε) ∇t·(ε Et)
    let d_ex = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i as usize >= g.nx || j as usize >= g.ny {
            0.0
        } else {
            eps.get(i as usize, j as usize) * ex_r[g.index(i as usize, j as usize)]
        }
    };
    let d_ey = |i: isize, j: isize| -> f64 {
        if i < 0 || j < 0 || i as usize >= g.nx || j as usize >= g.ny {
            0.0
        } else {
            eps.get(i as usize, j as usize) * ey_r[g.index(i as usize, j as usize)]
        }
    };
    let mut ez_i = vec![0.0; g.len()];
    for i in 0..g.nx as isize {
        for j in 0..g.ny as isize {
            let div = (d_ex(i + 1, j) - d_ex(i - 1, j) + d_ey(i, j + 1) - d_ey(i, j - 1)) / (2.0 * h);
            let k = g.index(i as usize, j as usize);
            ez_i[k] = div / (n_eff * eps.values[k]);
        }
    }

    let power_x: f64 = ex_r.iter().map(|x| x * x).sum();
    let power_y: f64 = ey_r.iter().map(|x| x * x).sum();
    let polarization = if power_x >= power_y {
        Polarization::QuasiTe
    } else {
        Polarization::QuasiTm
    };

    let mag = |k: usize| (ex_r[k].powi(2) + ey_r[k].powi(2) + ez_i[k].powi(2)).sqrt();
    let peak = (0..g.len()).map(mag).fold(0.0, f64::max);
    let dominant = if polarization == Polarization::QuasiTe { &ex_r } else { &ey_r };
    let k_dom = (0..g.len())
        .max_by(|&a, &b| dominant[a].abs().total_cmp(&dominant[b].abs()))
        .unwrap_or(0);
    let scale = dominant[k_dom].signum() / peak;

    let mut boundary = 0.0f64;
    for i in 0..g.nx {
        for j in 0..g.ny {
            if i == 0 || j == 0 || i + 1 == g.nx || j + 1 == g.ny {
                boundary = boundary.max(mag(g.index(i, j)));
            }
        }
    }

    GuidedMode {
        effective_index: n_eff,
        propagation_constant: k0 * n_eff,
        wavelength: spec.wavelength,
        polarization,
        grid: g,
        ex: ex_r.iter().map(|&x| Complex64::new(x * scale, 0.0)).collect(),
        ey: ey_r.iter().map(|&y| Complex64::new(y * scale, 0.0)).collect(),
        ez: ez_i.iter().map(|&z| Complex64::new(0.0, z * scale)).collect(),
        eigen_residual: residual,
        boundary_ratio: boundary / peak,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAreaResult {
    /// m²
    pub a_eff: f64,
    pub a_eff_over_lambda_sq: f64,
    pub wavelength: f64,
    pub effective_index: f64,
    pub r0_x: f64,
    pub r0_y: f64,
    pub permittivity_at_r0: f64,
    /// `|E(r0)|` relative to the unit-peak mode field.
    pub field_magnitude_at_r0: f64,
}

/// `A_eff = ∬ ε|E|² dA / (ε(r0)|E(r0)|²)` by midpoint quadrature; `|E(r0)|²`
/// is bilinearly interpolated between cell centers.
pub fn effective_mode_area(
    mode: &GuidedMode,
    eps: &PermittivityMap,
    r0: &EmitterLocation,
) -> Result<ModeAreaResult> {
    let g = mode.grid;
    if eps.grid != g {
        return Err(Error::InvalidGrid("permittivity map and mode use different grids".into()));
    }
    let numerator: f64 = (0..g.len())
        .map(|k| eps.values[k] * mode.intensity(k))
        .sum::<f64>()
        * g.cell_area();
    let i_at_r0 = interpolate_intensity(mode, r0.x, r0.y)?;
    let magnitude = i_at_r0.sqrt();
    if !(magnitude > 1e-9) {
        return Err(Error::ZeroField { magnitude });
    }
    let a_eff = numerator / (r0.permittivity * i_at_r0);
    Ok(ModeAreaResult {
        a_eff,
        a_eff_over_lambda_sq: a_eff / (mode.wavelength * mode.wavelength),
        wavelength: mode.wavelength,
        effective_index: mode.effective_index,
        r0_x: r0.x,
        r0_y: r0.y,
        permittivity_at_r0: r0.permittivity,
        field_magnitude_at_r0: magnitude,
    })
}

fn interpolate_intensity(mode: &GuidedMode, x: f64, y: f64) -> Result<f64> {
    let g = mode.grid;
    let fx = (x - g.x_min) / g.spacing - 0.5;
    let fy = (y - g.y_min) / g.spacing - 0.5;
    if !(fx >= 0.0 && fy >= 0.0 && fx <= (g.nx - 1) as f64 && fy <= (g.ny - 1) as f64) {
        return Err(Error::InvalidEmitter(format!(
            "evaluation point ({x:e}, {y:e}) lies outside the interpolation region of the grid"
        )));
    }
    let i0 = (fx.floor() as usize).min(g.nx - 2);
    let j0 = (fy.floor() as usize).min(g.ny - 2);
    let (tx, ty) = (fx - i0 as f64, fy - j0 as f64);
    let v = |i: usize, j: usize| mode.intensity(g.index(i, j));
    Ok((1.0 - tx) * (1.0 - ty) * v(i0, j0)
        + tx * (1.0 - ty) * v(i0 + 1, j0)
        + (1.0 - tx) * ty * v(i0, j0 + 1)
        + tx * ty * v(i0 + 1, j0 + 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupVelocityResult {
    /// m/s
    pub v_g: f64,
    pub group_index: f64,
    /// Effective index at `ω(1 − h)`.
    pub n_eff_minus: f64,
    /// Effective index at `ω(1 + h)`.
    pub n_eff_plus: f64,
    pub relative_step: f64,
}

pub const DEFAULT_GROUP_VELOCITY_STEP: f64 = 0.005;

/// Group velocity of the fundamental mode with the default 0.5% step.
pub fn group_velocity(spec: &WaveguideSpec, grid: &Grid2D) -> Result<GroupVelocityResult> {
    group_velocity_with_step(spec, grid, DEFAULT_GROUP_VELOCITY_STEP)
}

/// `v_g = Δω/Δβ` by a centered difference at `ω(1 ± h)`.
pub fn group_velocity_with_step(
    spec: &WaveguideSpec,
    grid: &Grid2D,
    h: f64,
) -> Result<GroupVelocityResult> {
    spec.validate()?;
    if !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidParameter(format!("relative frequency step {h} not in (0, 0.5)")));
    }
    if spec.is_homogeneous() {
        let n = spec.core.refractive_index;
        return Ok(GroupVelocityResult {
            v_g: C / n,
            group_index: n,
            n_eff_minus: n,
            n_eff_plus: n,
            relative_step: h,
        });
    }
    let eps = permittivity_map(spec, grid)?;
    let n_at = |factor: f64| -> Result<f64> {
        let mut s = spec.clone();
        s.wavelength = spec.wavelength / factor;
        solve_modes_in(&s, &eps, 1)
            .map(|m| m[0].effective_index)
            .map_err(|e| match e {
                Error::Cutoff(msg) => Error::Cutoff(format!(
                    "mode lost at relative frequency {factor}; too close to cutoff ({msg})"
                )),
                other => other,
            })
    };
    let n_minus = n_at(1.0 - h)?;
    let n_plus = n_at(1.0 + h)?;
    // β = n ω / c
    let d_beta = n_plus * (1.0 + h) - n_minus * (1.0 - h);
    let group_index = d_beta / (2.0 * h);
    Ok(GroupVelocityResult {
        v_g: C / group_index,
        group_index,
        n_eff_minus: n_minus,
        n_eff_plus: n_plus,
        relative_step: h,
    })
}
