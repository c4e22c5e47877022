//! Fundamental TE mode of a three-layer slab.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Substrate / core / cladding stack; the core spans `-core_thickness < y < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabStack {
    pub substrate_index: f64,
    pub core_index: f64,
    pub cladding_index: f64,
    pub core_thickness: f64,
}

impl SlabStack {
    pub fn index_at(&self, y: f64) -> f64 {
        if y > 0.0 {
            self.cladding_index
        } else if y < -self.core_thickness {
            self.substrate_index
        } else {
            self.core_index
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabMode {
    pub stack: SlabStack,
    pub wavelength: f64,
    pub effective_index: f64,
    /// Transverse wavenumbers (1/m): core, substrate decay, cladding decay.
    pub kappa: f64,
    pub gamma_substrate: f64,
    pub gamma_cladding: f64,
    /// Peak of the unnormalized profile, used to scale `field_at` to unit peak.
    peak: f64,
}

impl SlabMode {
    pub fn propagation_constant(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength * self.effective_index
    }

    fn raw(&self, y: f64) -> f64 {
        let t = self.stack.core_thickness;
        let core = |y: f64| (self.kappa * y).cos() - self.gamma_cladding / self.kappa * (self.kappa * y).sin();
        if y > 0.0 {
            (-self.gamma_cladding * y).exp()
        } else if y < -t {
            core(-t) * (self.gamma_substrate * (y + t)).exp()
        } else {
            core(y)
        }
    }

    /// Ey-free TE profile (the out-of-plane field), unit peak.
    pub fn field_at(&self, y: f64) -> f64 {
        self.raw(y) / self.peak
    }

    /// Profile sampled at `n` uniformly spaced points on `[y_min, y_max]`.
    pub fn sampled(&self, y_min: f64, y_max: f64, n: usize) -> Vec<(f64, f64)> {
        let step = if n > 1 { (y_max - y_min) / (n - 1) as f64 } else { 0.0 };
        (0..n)
            .map(|k| {
                let y = y_min + k as f64 * step;
                (y, self.field_at(y))
            })
            .collect()
    }
}

/// Solves `κt = atan(γs/κ) + atan(γc/κ)` for the fundamental TE mode by
/// bisection on the effective index.
pub fn solve_slab_mode_1d(stack: &SlabStack, wavelength: f64) -> Result<SlabMode> {
    let SlabStack {
        substrate_index: ns,
        core_index: nf,
        cladding_index: nc,
        core_thickness: t,
    } = *stack;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::Cutoff(format!("slab core thickness {t:e} m")));
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidParameter(format!("wavelength {wavelength}")));
    }
    let k0 = 2.0 * std::f64::consts::PI / wavelength;
    let n_lo = ns.max(nc);
    if nf <= n_lo {
        return Err(Error::Cutoff(format!(
            "core index {nf} does not exceed surrounding index {n_lo}"
        )));
    }
    let parts = |n: f64| {
        let kappa = k0 * (nf * nf - n * n).max(0.0).sqrt();
        let gs = k0 * (n * n - ns * ns).max(0.0).sqrt();
        let gc = k0 * (n * n - nc * nc).max(0.0).sqrt();
        (kappa, gs, gc)
    };
    let f = |n: f64| {
        let (kappa, gs, gc) = parts(n);
        kappa * t - (gs / kappa).atan() - (gc / kappa).atan()
    };
    let mut lo = n_lo;
    let mut hi = nf;
    if f(lo) <= 0.0 {
        return Err(Error::Cutoff(format!(
            "slab of thickness {t:e} m is below cutoff at wavelength {wavelength:e} m"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * nf {
            break;
        }
    }
    let n_eff = 0.5 * (lo + hi);
    let (kappa, gs, gc) = parts(n_eff);
    let mut mode = SlabMode {
        stack: *stack,
        wavelength,
        effective_index: n_eff,
        kappa,
        gamma_substrate: gs,
        gamma_cladding: gc,
        peak: 1.0,
    };
    // the core profile peaks where tan(κy) = -γc/κ
    let y_peak = -(gc / kappa).atan() / kappa;
    mode.peak = mode.raw(y_peak.clamp(-t, 0.0)).max(mode.raw(0.0)).max(mode.raw(-t));
    Ok(mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::{Mat, Side};

    fn paper_slab() -> SlabStack {
        SlabStack {
            substrate_index: 1.445,
            core_index: 2.0,
            cladding_index: 1.434,
            core_thickness: 120e-9,
        }
    }

    /// Second-order finite-difference eigensolve of E'' + k0² n² E = β² E.
    fn fd_effective_index(stack: &SlabStack, wavelength: f64, h: f64, half_window: f64) -> f64 {
        let k0 = 2.0 * std::f64::consts::PI / wavelength;
        let y0 = -0.5 * stack.core_thickness - half_window;
        let n = (2.0 * half_window / h) as usize;
        let ys: Vec<f64> = (0..n).map(|k| y0 + (k as f64 + 0.5) * h).collect();
        let m = Mat::<f64>::from_fn(n, n, |r, c| {
            let hk = h * k0;
            if r == c {
                stack.index_at(ys[r]).powi(2) - 2.0 / (hk * hk)
            } else if r.abs_diff(c) == 1 {
                1.0 / (hk * hk)
            } else {
                0.0
            }
        });
        let ev = m.self_adjoint_eigenvalues(Side::Lower).unwrap();
        ev.last().unwrap().sqrt()
    }

    #[test]
    fn paper_slab_single_te_mode_matches_fd() {
        let stack = paper_slab();
        let mode = solve_slab_mode_1d(&stack, 785e-9).unwrap();
        assert!(mode.effective_index > 1.445 && mode.effective_index < 2.0);
        // cell boundaries on the interfaces: 2 nm cells, 2 µm either side
        let fd = fd_effective_index(&stack, 785e-9, 2e-9, 2e-6);
        assert!(
            (fd - mode.effective_index).abs() < 2e-4,
            "fd {fd} vs bisection {}",
            mode.effective_index
        );
    }

    #[test]
    fn vanishing_core_is_cutoff() {
        let mut stack = paper_slab();
        stack.core_thickness = 0.0;
        assert!(matches!(solve_slab_mode_1d(&stack, 785e-9), Err(Error::Cutoff(_))));
        stack.core_thickness = 1e-12;
        assert!(matches!(solve_slab_mode_1d(&stack, 785e-9), Err(Error::Cutoff(_))));
    }

    #[test]
    fn symmetric_slab_has_symmetric_profile() {
        let stack = SlabStack {
            substrate_index: 1.434,
            core_index: 2.0,
            cladding_index: 1.434,
            core_thickness: 120e-9,
        };
        let mode = solve_slab_mode_1d(&stack, 785e-9).unwrap();
        let c = -60e-9;
        for d in [5e-9, 30e-9, 60e-9, 200e-9, 500e-9] {
            let a = mode.field_at(c + d);
            let b = mode.field_at(c - d);
            assert!((a - b).abs() < 1e-9, "{a} vs {b} at {d}");
        }
        let peak = mode.field_at(c);
        assert!((peak - 1.0).abs() < 1e-12);
    }

    #[test]
    fn profile_is_continuous_with_unit_peak() {
        let mode = solve_slab_mode_1d(&paper_slab(), 785e-9).unwrap();
        let samples = mode.sampled(-1e-6, 1e-6, 2001);
        let peak = samples.iter().map(|s| s.1).fold(f64::MIN, f64::max);
        assert!((peak - 1.0).abs() < 1e-3);
        for w in samples.windows(2) {
            assert!((w[0].1 - w[1].1).abs() < 0.02);
        }
        assert!(samples[0].1 < 1e-2 && samples[2000].1 < 1e-2);
    }
}
