use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoxFlux, FdtdConfig, FdtdStructure, PowerReport};
use crate::error::{Error, Result};
use crate::modes::{solve_slab_mode_1d, SlabMode};

const ENERGY_CHECK_INTERVAL: usize = 100;
/// Relative energy growth between checks tolerated after the source is off.
const ENERGY_GROWTH_TOLERANCE: f64 = 1e-6;

/// One sample of the instantaneous Poynting flux through the monitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    pub step: usize,
    /// Normalized time `c t / Δx`.
    pub time: f64,
    pub source_current: f64,
    pub box_flux: f64,
    pub left_flux: f64,
    pub right_flux: f64,
}

pub(crate) fn series_csv(series: &[FluxSample]) -> String {
    let mut out = String::from("step,time_cells_over_c,source_current,box_flux,left_plane_flux,right_plane_flux\n");
    for s in series {
        let _ = writeln!(
            out,
            "{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
            s.step, s.time, s.source_current, s.box_flux, s.left_flux, s.right_flux
        );
    }
    out
}

/// Full-window DFT of `Ez` at the analysis frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldDft {
    pub nx: usize,
    pub ny: usize,
    /// m
    pub x0: f64,
    pub y0: f64,
    pub spacing: f64,
    pub ez: Vec<Complex64>,
    pub permittivity: Vec<f64>,
}

impl FieldDft {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x_m,y_m,permittivity,re_ez,im_ez\n");
        for i in 0..self.nx {
            for j in 0..self.ny {
                let k = i * self.ny + j;
                let _ = writeln!(
                    out,
                    "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}",
                    self.x0 + i as f64 * self.spacing,
                    self.y0 + j as f64 * self.spacing,
                    self.permittivity[k],
                    self.ez[k].re,
                    self.ez[k].im
                );
            }
        }
        out
    }
}

/// Vertical line at `i + ½` over `j0..=j1`, or horizontal line at `j + ½`
/// over `i0..=i1`. Accumulates the DFT of the mean `Ez` of the two adjacent
/// nodes and of the tangential `H` on the line.
struct Line {
    vertical: bool,
    index: usize,
    lo: usize,
    hi: usize,
    e: Vec<Complex64>,
    h: Vec<Complex64>,
}

impl Line {
    fn new(vertical: bool, index: usize, lo: usize, hi: usize) -> Self {
        let n = hi - lo + 1;
        Self {
            vertical,
            index,
            lo,
            hi,
            e: vec![Complex64::default(); n],
            h: vec![Complex64::default(); n],
        }
    }

    /// Power flowing toward +x (vertical) or +y (horizontal), `½ Re Σ S h`.
    fn power(&self) -> f64 {
        let s: f64 = self
            .e
            .iter()
            .zip(&self.h)
            .map(|(e, h)| (e * h.conj()).re)
            .sum();
        // Sx = −Ez Hy*, Sy = Ez Hx*
        0.5 * if self.vertical { -s } else { s }
    }
}

pub(crate) struct Simulation {
    nx: usize,
    ny: usize,
    /// Integer node coordinate of grid index 0.
    kx0: i64,
    ky0: i64,
    h: f64,
    dt: f64,
    inv_eps: Vec<f64>,
    eps: Vec<f64>,
    ax: Vec<f64>,
    bx: Vec<f64>,
    ay: Vec<f64>,
    by: Vec<f64>,
    axh: Vec<f64>,
    bxh: Vec<f64>,
    ayh: Vec<f64>,
    byh: Vec<f64>,
    src: (usize, usize),
    omega_src: f64,
    tau: f64,
    t0: f64,
    amplitude: f64,
    omega: f64,
    boxes: Vec<(f64, [Line; 4])>,
    left: Line,
    right: Line,
    mode: Option<SlabMode>,
    energy_decay: f64,
    max_steps: usize,
    record_interval: usize,
    field: Option<Vec<Complex64>>,
}

fn pml_coefficients(sigma: f64, dt: f64) -> (f64, f64) {
    if sigma > 0.0 {
        let a = (-sigma * dt).exp();
        (a, (1.0 - a) / sigma)
    } else {
        (1.0, dt)
    }
}

impl Simulation {
    pub fn new(config: &FdtdConfig, structure: &FdtdStructure) -> Result<Self> {
        let h_m = config.cell_size;
        let snap = |v: f64| (v / h_m).round() as i64;
        let npml = config.pml_cells as i64;
        let (kx_lo, kx_hi) = (snap(config.x_min), snap(config.x_max));
        let (ky_lo, ky_hi) = (snap(config.y_min), snap(config.y_max));
        let kx0 = kx_lo - npml;
        let ky0 = ky_lo - npml;
        let nx = (kx_hi + npml - kx0 + 1) as usize;
        let ny = (ky_hi + npml - ky0 + 1) as usize;
        let node_x = |i: usize| (i as i64 + kx0) as f64 * h_m;
        let node_y = |j: usize| (j as i64 + ky0) as f64 * h_m;

        let probe = 1e-3 * h_m;
        let mut eps = vec![0.0; nx * ny];
        for i in 0..nx {
            for j in 0..ny {
                let (x, y) = (node_x(i), node_y(j));
                let mut v = [
                    structure.index_at(x - probe, y - probe),
                    structure.index_at(x + probe, y - probe),
                    structure.index_at(x - probe, y + probe),
                    structure.index_at(x + probe, y + probe),
                ]
                .map(|n| n * n);
                // order-independent mean keeps mirrored grids bit-identical
                v.sort_by(f64::total_cmp);
                eps[i * ny + j] = ((v[0] + v[1]) + (v[2] + v[3])) * 0.25;
            }
        }
        let inv_eps = eps.iter().map(|e| 1.0 / e).collect();

        let dt = config.courant;
        let depth_e = |k: i64, lo: i64, hi: i64| -> f64 { ((lo - k).max(k - hi).max(0)) as f64 };
        let depth_h = |k: i64, lo: i64, hi: i64| -> f64 {
            let pos = k as f64 + 0.5;
            (lo as f64 - pos).max(pos - hi as f64).max(0.0)
        };
        let v_pml = 1.0 / structure.cladding_index();
        let l = config.pml_cells as f64;
        let sigma_max = -5.0 * v_pml * config.pml_reflection.ln() / (2.0 * l);
        let sigma = |d: f64| sigma_max * (d / l).min(1.0).powi(4);
        let profile = |n: usize, k0: i64, lo: i64, hi: i64, half: bool| -> (Vec<f64>, Vec<f64>) {
            (0..n)
                .map(|i| {
                    let k = i as i64 + k0;
                    let d = if half { depth_h(k, lo, hi) } else { depth_e(k, lo, hi) };
                    pml_coefficients(sigma(d), dt)
                })
                .unzip()
        };
        let (ax, bx) = profile(nx, kx0, kx_lo, kx_hi, false);
        let (axh, bxh) = profile(nx, kx0, kx_lo, kx_hi, true);
        let (ay, by) = profile(ny, ky0, ky_lo, ky_hi, false);
        let (ayh, byh) = profile(ny, ky0, ky_lo, ky_hi, true);

        let to_i = |k: i64| -> Option<usize> {
            let i = k - kx0;
            (k > kx_lo && k < kx_hi && i >= 0).then_some(i as usize)
        };
        let to_j = |k: i64| -> Option<usize> {
            let j = k - ky0;
            (k > ky_lo && k < ky_hi && j >= 0).then_some(j as usize)
        };
        let in_pml = |what: &str| {
            Error::InvalidFdtdConfig(format!("{what} reaches the PML or leaves the window"))
        };
        let (ks_x, ks_y) = (snap(config.source.x), snap(config.source.y));
        let src = (
            to_i(ks_x).ok_or_else(|| in_pml("source"))?,
            to_j(ks_y).ok_or_else(|| in_pml("source"))?,
        );

        let mut boxes = Vec::new();
        for &hw in &config.box_half_widths {
            let n = snap(hw).max(1);
            let il = to_i(ks_x - n - 1).ok_or_else(|| in_pml("flux box"))?;
            let ir = to_i(ks_x + n).ok_or_else(|| in_pml("flux box"))?;
            let jb = to_j(ks_y - n - 1).ok_or_else(|| in_pml("flux box"))?;
            let jt = to_j(ks_y + n).ok_or_else(|| in_pml("flux box"))?;
            to_i(ks_x + n + 1).ok_or_else(|| in_pml("flux box"))?;
            to_j(ks_y + n + 1).ok_or_else(|| in_pml("flux box"))?;
            boxes.push((
                n as f64 * h_m,
                [
                    Line::new(true, ir, jb + 1, jt),
                    Line::new(true, il, jb + 1, jt),
                    Line::new(false, jt, il + 1, ir),
                    Line::new(false, jb, il + 1, ir),
                ],
            ));
        }

        let offset = snap(config.guided_monitor_offset);
        let (anchor_lo, anchor_hi) = match structure.stack_extent() {
            Some((lo, hi)) => (snap(lo).min(ks_x), snap(hi).max(ks_x)),
            None => (ks_x, ks_x),
        };
        let (j_lo, j_hi) = ((ky_lo - ky0 + 1) as usize, (ky_hi - ky0 - 1) as usize);
        let right_i = to_i(anchor_hi + offset)
            .filter(|_| to_i(anchor_hi + offset + 1).is_some())
            .ok_or_else(|| in_pml("right guided-power plane"))?;
        let left_i = to_i(anchor_lo - offset - 1).ok_or_else(|| in_pml("left guided-power plane"))?;
        let right = Line::new(true, right_i, j_lo, j_hi);
        let left = Line::new(true, left_i, j_lo, j_hi);

        let lambda_a = config.analysis_wavelength();
        let mode = match structure {
            FdtdStructure::Slab { stack, .. } => Some(solve_slab_mode_1d(stack, lambda_a)?),
            FdtdStructure::Homogeneous { .. } => None,
        };

        let f_src = h_m / config.source.wavelength;
        let sigma_f = config.source.fractional_bandwidth * f_src;
        let tau = 1.0 / (2.0 * std::f64::consts::PI * sigma_f);
        let t0 = 5.0 * tau;
        let n_max = structure.cladding_index().max(match structure {
            FdtdStructure::Slab { stack, .. } => stack.core_index,
            _ => 1.0,
        });
        let diagonal = ((nx * nx + ny * ny) as f64).sqrt();
        let max_steps = config
            .max_steps
            .unwrap_or(((2.0 * t0 + 30.0 * diagonal * n_max) / dt).ceil() as usize);

        Ok(Self {
            nx,
            ny,
            kx0,
            ky0,
            h: h_m,
            dt,
            inv_eps,
            eps,
            ax,
            bx,
            ay,
            by,
            axh,
            bxh,
            ayh,
            byh,
            src,
            omega_src: 2.0 * std::f64::consts::PI * f_src,
            tau,
            t0,
            amplitude: config.source.amplitude,
            omega: 2.0 * std::f64::consts::PI * h_m / lambda_a,
            boxes,
            left,
            right,
            mode,
            energy_decay: config.energy_decay,
            max_steps,
            record_interval: config.record_interval,
            field: config.record_field.then(|| vec![Complex64::default(); nx * ny]),
        })
    }

    fn current(&self, t: f64) -> f64 {
        let s = t - self.t0;
        self.amplitude * (-s * s / (2.0 * self.tau * self.tau)).exp() * (self.omega_src * s).sin()
    }

    pub fn run(mut self) -> Result<PowerReport> {
        let (nx, ny) = (self.nx, self.ny);
        let n = nx * ny;
        let mut ezx = vec![0.0; n];
        let mut ezy = vec![0.0; n];
        let mut ez = vec![0.0; n];
        let mut hx = vec![0.0; n];
        let mut hy = vec![0.0; n];
        let mut hx_old = vec![0.0; n];
        let mut hy_old = vec![0.0; n];
        let dt = self.dt;
        let t_off = 2.0 * self.t0;

        let mut energy_trace = Vec::new();
        let mut series = Vec::new();
        let mut peak = 0.0f64;
        let mut previous: Option<f64> = None;
        let mut decayed = false;
        let mut steps = 0;

        for step in 0..self.max_steps {
            steps = step + 1;
            let check = (step + 1) % ENERGY_CHECK_INTERVAL == 0;
            if check {
                hx_old.copy_from_slice(&hx);
                hy_old.copy_from_slice(&hy);
            }
            // H at (step + ½) dt
            for i in 0..nx {
                let row = i * ny;
                for j in 0..ny - 1 {
                    let k = row + j;
                    hx[k] = self.ayh[j] * hx[k] - self.byh[j] * (ez[k + 1] - ez[k]);
                }
            }
            for i in 0..nx - 1 {
                let row = i * ny;
                let (a, b) = (self.axh[i], self.bxh[i]);
                for j in 0..ny {
                    let k = row + j;
                    hy[k] = a * hy[k] + b * (ez[k + ny] - ez[k]);
                }
            }
            let th = (step as f64 + 0.5) * dt;
            let ph = Complex64::from_polar(dt, self.omega * th);
            for (_, lines) in &mut self.boxes {
                for line in lines.iter_mut() {
                    accumulate_h(line, &hx, &hy, ny, ph);
                }
            }
            accumulate_h(&mut self.left, &hx, &hy, ny, ph);
            accumulate_h(&mut self.right, &hx, &hy, ny, ph);

            // E at (step + 1) dt
            for i in 0..nx {
                let row = i * ny;
                let (a, b) = (self.ax[i], self.bx[i]);
                for j in 0..ny {
                    let k = row + j;
                    let dhy = if i > 0 { hy[k] - hy[k - ny] } else { hy[k] };
                    let dhx = if j > 0 { hx[k] - hx[k - 1] } else { hx[k] };
                    ezx[k] = a * ezx[k] + b * dhy * self.inv_eps[k];
                    ezy[k] = self.ay[j] * ezy[k] - self.by[j] * dhx * self.inv_eps[k];
                }
            }
            let j_src = self.current(th);
            let ks = self.src.0 * ny + self.src.1;
            ezx[ks] -= dt * j_src * self.inv_eps[ks];
            for k in 0..n {
                ez[k] = ezx[k] + ezy[k];
            }
            let te = (step as f64 + 1.0) * dt;
            let pe = Complex64::from_polar(dt, self.omega * te);
            for (_, lines) in &mut self.boxes {
                for line in lines.iter_mut() {
                    accumulate_e(line, &ez, ny, pe);
                }
            }
            accumulate_e(&mut self.left, &ez, ny, pe);
            accumulate_e(&mut self.right, &ez, ny, pe);
            if let Some(f) = &mut self.field {
                for (acc, e) in f.iter_mut().zip(&ez) {
                    *acc += pe * e;
                }
            }

            if (step + 1) % self.record_interval == 0 {
                series.push(FluxSample {
                    step: step + 1,
                    time: te,
                    source_current: j_src,
                    box_flux: self.boxes.first().map_or(0.0, |(_, l)| instantaneous_box(l, &ez, &hx, &hy, ny)),
                    left_flux: instantaneous_line(&self.left, &ez, &hx, &hy, ny),
                    right_flux: instantaneous_line(&self.right, &ez, &hx, &hy, ny),
                });
            }

            if check {
                let mut energy = 0.0;
                for k in 0..n {
                    energy += self.eps[k] * ez[k] * ez[k] + hx_old[k] * hx[k] + hy_old[k] * hy[k];
                }
                if !energy.is_finite() {
                    return Err(Error::Unstable {
                        step: step + 1,
                        previous: previous.unwrap_or(0.0),
                        current: energy,
                    });
                }
                energy_trace.push((step + 1, energy));
                peak = peak.max(energy);
                if te > t_off {
                    if let Some(prev) = previous {
                        if energy > prev * (1.0 + ENERGY_GROWTH_TOLERANCE) {
                            return Err(Error::Unstable {
                                step: step + 1,
                                previous: prev,
                                current: energy,
                            });
                        }
                    }
                    previous = Some(energy);
                    if energy < self.energy_decay * peak {
                        decayed = true;
                        break;
                    }
                }
            }
        }

        let box_powers: Vec<BoxFlux> = self
            .boxes
            .iter()
            .map(|(hw, l)| BoxFlux {
                half_width: *hw,
                power: l[0].power() - l[1].power() + l[2].power() - l[3].power(),
            })
            .collect();
        let total = box_powers[0].power;
        let box_agreement = box_powers
            .iter()
            .map(|b| ((b.power - total) / total).abs())
            .fold(0.0, f64::max);
        let (guided_left, guided_right) = match &self.mode {
            Some(m) => (self.project(&self.left, m, false), self.project(&self.right, m, true)),
            None => (0.0, 0.0),
        };
        let node = |k: i64| k as f64 * self.h;
        let field = self.field.take().map(|ez| FieldDft {
                nx,
                ny,
                x0: node(self.kx0),
                y0: node(self.ky0),
                spacing: self.h,
                ez,
                permittivity: self.eps.clone(),
        });
        Ok(PowerReport {
            total_power: total,
            boxes: box_powers,
            box_agreement,
            guided_left,
            guided_right,
            raw_flux_left: -self.left.power(),
            raw_flux_right: self.right.power(),
            monitor_left_x: (node(self.left.index as i64 + self.kx0) + node(self.left.index as i64 + 1 + self.kx0)) * 0.5,
            monitor_right_x: (node(self.right.index as i64 + self.kx0) + node(self.right.index as i64 + 1 + self.kx0)) * 0.5,
            homogeneous_power: None,
            purcell_ratio: None,
            slab_effective_index: self.mode.map(|m| m.effective_index),
            emitter_x: node(self.src.0 as i64 + self.kx0),
            emitter_y: node(self.src.1 as i64 + self.ky0),
            analysis_wavelength: 2.0 * std::f64::consts::PI * self.h / self.omega,
            steps,
            energy_decayed: decayed,
            energy_trace,
            series,
            field,
        })
    }

    /// Power carried by the slab mode through a vertical plane, travelling
    /// toward +x (`forward`) or −x.
    fn project(&self, line: &Line, mode: &SlabMode, forward: bool) -> f64 {
        let w_over_b = 1.0 / mode.effective_index;
        let mut num = Complex64::default();
        let mut norm = 0.0;
        for (k, j) in (line.lo..=line.hi).enumerate() {
            let y = (j as i64 + self.ky0) as f64 * self.h;
            let e = mode.field_at(y);
            // forward wave: Hy = −(β/ω) Ez
            let s = if forward { -w_over_b } else { w_over_b };
            num += (line.e[k] + s * line.h[k]) * e;
            norm += e * e;
        }
        let a = num / (2.0 * norm);
        a.norm_sqr() * 0.5 * mode.effective_index * norm
    }
}

fn accumulate_h(line: &mut Line, hx: &[f64], hy: &[f64], ny: usize, ph: Complex64) {
    for (k, p) in (line.lo..=line.hi).enumerate() {
        let v = if line.vertical {
            hy[line.index * ny + p]
        } else {
            hx[p * ny + line.index]
        };
        line.h[k] += ph * v;
    }
}

fn accumulate_e(line: &mut Line, ez: &[f64], ny: usize, pe: Complex64) {
    for (k, p) in (line.lo..=line.hi).enumerate() {
        let (a, b) = if line.vertical {
            (line.index * ny + p, (line.index + 1) * ny + p)
        } else {
            (p * ny + line.index, p * ny + line.index + 1)
        };
        line.e[k] += pe * (0.5 * (ez[a] + ez[b]));
    }
}

fn instantaneous_line(line: &Line, ez: &[f64], hx: &[f64], hy: &[f64], ny: usize) -> f64 {
    let mut s = 0.0;
    for p in line.lo..=line.hi {
        if line.vertical {
            let (a, b) = (line.index * ny + p, (line.index + 1) * ny + p);
            s -= 0.5 * (ez[a] + ez[b]) * hy[a];
        } else {
            let (a, b) = (p * ny + line.index, p * ny + line.index + 1);
            s += 0.5 * (ez[a] + ez[b]) * hx[a];
        }
    }
    s
}

fn instantaneous_box(l: &[Line; 4], ez: &[f64], hx: &[f64], hy: &[f64], ny: usize) -> f64 {
    instantaneous_line(&l[0], ez, hx, hy, ny) - instantaneous_line(&l[1], ez, hx, hy, ny)
        + instantaneous_line(&l[2], ez, hx, hy, ny)
        - instantaneous_line(&l[3], ez, hx, hy, ny)
}
