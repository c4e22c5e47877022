//! Materials, waveguide cross-sections, emitter placement and permittivity
//! rasterization.
//!
//! Coordinates follow one convention everywhere: `x` is the lateral axis with
//! the strip centered at `x = 0`, `y` is vertical with the top surface of the
//! core at `y = 0` (the core occupies `-thickness < y < 0`, the substrate lies
//! below it and the cladding fills everything else, including a slot).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset used to probe the regions adjacent to a point. Much smaller than any
/// feature of the cross-section but far above `f64` resolution at micron scale.
const PROBE: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub refractive_index: f64,
}

impl Material {
    pub fn new(name: impl Into<String>, refractive_index: f64) -> Result<Self> {
        if !(refractive_index.is_finite() && refractive_index > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "refractive index must be positive, got {refractive_index}"
            )));
        }
        Ok(Self {
            name: name.into(),
            refractive_index,
        })
    }

    /// Relative permittivity `n²`.
    pub fn permittivity(&self) -> f64 {
        self.refractive_index * self.refractive_index
    }

    pub fn silicon_nitride() -> Self {
        Self {
            name: "Si3N4".into(),
            refractive_index: 2.0,
        }
    }

    pub fn silica() -> Self {
        Self {
            name: "SiO2".into(),
            refractive_index: 1.445,
        }
    }

    pub fn n_hexadecane() -> Self {
        Self {
            name: "n-hexadecane".into(),
            refractive_index: 1.434,
        }
    }

    pub fn mma() -> Self {
        Self {
            name: "MMA".into(),
            refractive_index: 1.42,
        }
    }

    /// Looks up a built-in material by (case-insensitive) name.
    pub fn builtin(name: &str) -> Option<Self> {
        let key = name.to_ascii_lowercase();
        Self::builtin_table()
            .into_iter()
            .find(|m| m.name.to_ascii_lowercase() == key)
            .or_else(|| match key.as_str() {
                "sin" | "silicon-nitride" | "silicon_nitride" => Some(Self::silicon_nitride()),
                "silica" | "sio2" => Some(Self::silica()),
                "hexadecane" | "n_hexadecane" => Some(Self::n_hexadecane()),
                "pmma" | "methyl-methacrylate" => Some(Self::mma()),
                _ => None,
            })
    }

    pub fn builtin_table() -> Vec<Self> {
        vec![
            Self::silicon_nitride(),
            Self::silica(),
            Self::n_hexadecane(),
            Self::mma(),
        ]
    }
}

/// Rectangular strip (optionally slotted) waveguide cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveguideSpec {
    pub core: Material,
    pub substrate: Material,
    pub cladding: Material,
    /// Core thickness (m).
    pub core_thickness: f64,
    /// Core width (m).
    pub core_width: f64,
    /// Width of a vertical slot cut through the core center (m).
    pub slot_gap: Option<f64>,
    /// Vacuum wavelength (m).
    pub wavelength: f64,
}

impl WaveguideSpec {
    /// 120 nm x 600 nm Si3N4 strip on silica under n-hexadecane at 785 nm.
    pub fn paper_strip() -> Self {
        Self {
            core: Material::silicon_nitride(),
            substrate: Material::silica(),
            cladding: Material::n_hexadecane(),
            core_thickness: 120e-9,
            core_width: 600e-9,
            slot_gap: None,
            wavelength: 785e-9,
        }
    }

    /// The strip with a 40 nm slot filled by the cladding.
    pub fn paper_slot() -> Self {
        Self {
            slot_gap: Some(40e-9),
            ..Self::paper_strip()
        }
    }

    /// Checks the invariants and returns `self`.
    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, v) in [
            ("core_thickness", self.core_thickness),
            ("core_width", self.core_width),
            ("wavelength", self.wavelength),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!("{label} must be > 0, got {v}")));
            }
        }
        if let Some(gap) = self.slot_gap {
            if !(gap.is_finite() && gap > 0.0) {
                return Err(Error::InvalidSpec(format!("slot_gap must be > 0, got {gap}")));
            }
            if gap >= self.core_width {
                return Err(Error::InvalidSpec(format!(
                    "slot_gap {gap:e} must be smaller than core_width {:e}",
                    self.core_width
                )));
            }
        }
        for m in [&self.core, &self.substrate, &self.cladding] {
            if !(m.refractive_index.is_finite() && m.refractive_index > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "material {} has invalid index {}",
                    m.name, m.refractive_index
                )));
            }
        }
        Ok(())
    }

    /// True when the core index exceeds both surrounding indices.
    pub fn is_confining(&self) -> bool {
        self.core.refractive_index > self.substrate.refractive_index
            && self.core.refractive_index > self.cladding.refractive_index
    }

    /// Largest index outside the core (the guidance threshold).
    pub fn max_surrounding_index(&self) -> f64 {
        self.substrate
            .refractive_index
            .max(self.cladding.refractive_index)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.core.refractive_index == self.cladding.refractive_index
            && self.substrate.refractive_index == self.cladding.refractive_index
    }

    /// Material occupying the open region containing `(x, y)`; the point must
    /// not lie on an interface.
    fn region_at(&self, x: f64, y: f64) -> &Material {
        let half_w = 0.5 * self.core_width;
        let in_core_layer = y < 0.0 && y > -self.core_thickness;
        if in_core_layer && x.abs() < half_w {
            match self.slot_gap {
                Some(gap) if x.abs() < 0.5 * gap => &self.cladding,
                _ => &self.core,
            }
        } else if y < -self.core_thickness {
            &self.substrate
        } else {
            &self.cladding
        }
    }

    /// Material at `(x, y)`. Points on an interface resolve to the adjacent
    /// material with the lowest refractive index.
    pub fn material_at(&self, x: f64, y: f64) -> &Material {
        let mut best = self.region_at(x + PROBE, y + PROBE);
        for (dx, dy) in [(-PROBE, PROBE), (PROBE, -PROBE), (-PROBE, -PROBE)] {
            let m = self.region_at(x + dx, y + dy);
            if m.refractive_index < best.refractive_index {
                best = m;
            }
        }
        best
    }

    /// Builds a grid of the default size (10 nm cells, 3 µm x 2 µm window).
    pub fn default_grid(&self) -> Result<Grid2D> {
        Grid2D::centered(self, 3e-6, 2e-6, 10e-9)
    }
}

/// Emitter position relative to the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterPosition {
    /// Lateral distance from the strip center (m).
    pub lateral_offset: f64,
    /// Height above the core top surface (m). Negative inside the slot.
    pub vertical_standoff: f64,
    /// The emitter sits inside the slot gap rather than above the surface.
    pub in_slot: bool,
}

impl EmitterPosition {
    pub fn above_strip(standoff: f64) -> Self {
        Self {
            lateral_offset: 0.0,
            vertical_standoff: standoff,
            in_slot: false,
        }
    }

    /// Center of the slot gap (lateral center, half the core thickness deep).
    pub fn slot_center(spec: &WaveguideSpec) -> Self {
        Self {
            lateral_offset: 0.0,
            vertical_standoff: -0.5 * spec.core_thickness,
            in_slot: true,
        }
    }
}

/// A located emitter: coordinates plus the permittivity at that point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmitterLocation {
    pub x: f64,
    pub y: f64,
    pub permittivity: f64,
    pub material: String,
}

/// Places an emitter in the cross-section and resolves its local medium.
pub fn locate_emitter(spec: &WaveguideSpec, pos: &EmitterPosition) -> Result<EmitterLocation> {
    spec.validate()?;
    let (x, y) = (pos.lateral_offset, pos.vertical_standoff);
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::InvalidEmitter("non-finite coordinates".into()));
    }
    if pos.in_slot {
        let gap = spec.slot_gap.ok_or_else(|| {
            Error::InvalidEmitter("in_slot requested but the waveguide has no slot".into())
        })?;
        if x.abs() >= 0.5 * gap || y >= 0.0 || y <= -spec.core_thickness {
            return Err(Error::InvalidEmitter(format!(
                "point ({x:e}, {y:e}) is not inside the {gap:e} m slot"
            )));
        }
    } else if y < 0.0 {
        return Err(Error::InvalidEmitter(format!(
            "vertical standoff must be >= 0 above the surface, got {y:e}"
        )));
    }
    let m = spec.material_at(x, y);
    Ok(EmitterLocation {
        x,
        y,
        permittivity: m.permittivity(),
        material: m.name.clone(),
    })
}

/// Uniform cell-centered grid over the cross-section.
///
/// Cell `(i, j)` has its center at `x_min + (i + 1/2) h`, `y_min + (j + 1/2) h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub x_min: f64,
    pub y_min: f64,
}

impl Grid2D {
    /// Window of roughly `x_extent` by `y_extent` centered on the core, with
    /// cell boundaries aligned to `x = 0` and `y = 0`.
    pub fn centered(
        spec: &WaveguideSpec,
        x_extent: f64,
        y_extent: f64,
        spacing: f64,
    ) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        if !(x_extent > 0.0 && y_extent > 0.0) {
            return Err(Error::InvalidGrid("extents must be > 0".into()));
        }
        let mut nx = (x_extent / spacing).round() as usize;
        if nx % 2 == 1 {
            nx += 1;
        }
        let ny = (y_extent / spacing).round() as usize;
        let x_min = -(nx as f64) * 0.5 * spacing;
        let center = -0.5 * spec.core_thickness;
        let y_min = ((center - 0.5 * ny as f64 * spacing) / spacing).round() * spacing;
        let grid = Self {
            nx,
            ny,
            spacing,
            x_min,
            y_min,
        };
        grid.check_covers(spec)?;
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Cell-center x coordinate; exactly antisymmetric about the window center.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 + 0.5 - 0.5 * self.nx as f64) * self.spacing + (self.x_min + 0.5 * self.nx as f64 * self.spacing)
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        self.y_min + (j as f64 + 0.5) * self.spacing
    }

    pub fn x_extent(&self) -> f64 {
        self.nx as f64 * self.spacing
    }

    pub fn y_extent(&self) -> f64 {
        self.ny as f64 * self.spacing
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing * self.spacing
    }

    /// Rejects windows that do not leave at least one wavelength of cladding
    /// and substrate around the core.
    pub fn check_covers(&self, spec: &WaveguideSpec) -> Result<()> {
        let margin = spec.wavelength;
        let x_max = self.x_min + self.x_extent();
        let y_max = self.y_min + self.y_extent();
        let half_w = 0.5 * spec.core_width;
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid("grid needs at least 2x2 cells".into()));
        }
        if self.x_min > -half_w - margin || x_max < half_w + margin {
            return Err(Error::InvalidGrid(format!(
                "lateral window [{:.3e}, {:.3e}] m does not contain the {:.3e} m core plus one wavelength on each side",
                self.x_min, x_max, spec.core_width
            )));
        }
        if self.y_min > -spec.core_thickness - margin || y_max < margin {
            return Err(Error::InvalidGrid(format!(
                "vertical window [{:.3e}, {:.3e}] m does not contain the {:.3e} m core plus one wavelength above and below",
                self.y_min, y_max, spec.core_thickness
            )));
        }
        Ok(())
    }

    /// Cell containing the point, if any.
    pub fn cell_of(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let fi = (x - self.x_min) / self.spacing;
        let fj = (y - self.y_min) / self.spacing;
        if fi < 0.0 || fj < 0.0 {
            return None;
        }
        let (i, j) = (fi as usize, fj as usize);
        (i < self.nx && j < self.ny).then_some((i, j))
    }
}

/// Relative permittivity sampled at cell centers.
#[derive(Debug, Clone, PartialEq)]
pub struct PermittivityMap {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl PermittivityMap {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Midpoint-rule area integral of the permittivity.
    pub fn area_integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Samples `n²` of the material containing each cell center.
pub fn permittivity_map(spec: &WaveguideSpec, grid: &Grid2D) -> Result<PermittivityMap> {
    spec.validate()?;
    grid.check_covers(spec)?;
    let mut values = vec![0.0; grid.len()];
    for i in 0..grid.nx {
        let x = grid.x(i);
        for j in 0..grid.ny {
            values[grid.index(i, j)] = spec.material_at(x, grid.y(j)).permittivity();
        }
    }
    Ok(PermittivityMap {
        grid: *grid,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn builtin_table_values() {
        assert_eq!(Material::silicon_nitride().refractive_index, 2.0);
        assert_eq!(Material::silica().refractive_index, 1.445);
        assert_eq!(Material::n_hexadecane().refractive_index, 1.434);
        assert_eq!(Material::mma().refractive_index, 1.42);
        assert!(Material::builtin_table()
            .iter()
            .all(|m| m.refractive_index >= 1.0));
        assert_eq!(Material::builtin("sio2").unwrap(), Material::silica());
        assert!(Material::builtin("unobtainium").is_none());
    }

    #[test]
    fn core_and_substrate_cells() {
        let spec = WaveguideSpec::paper_strip();
        let grid = spec.default_grid().unwrap();
        let eps = permittivity_map(&spec, &grid).unwrap();
        let (i, j) = grid.cell_of(0.0 + 1e-9, -60e-9).unwrap();
        assert_eq!(eps.get(i, j), 4.0);
        let (i, j) = grid.cell_of(0.0, -500e-9).unwrap();
        assert_relative_eq!(eps.get(i, j), 2.088025, max_relative = 1e-12);
        let (i, j) = grid.cell_of(0.0, 300e-9).unwrap();
        assert_relative_eq!(eps.get(i, j), 1.434 * 1.434, max_relative = 1e-12);
    }

    #[test]
    fn homogeneous_spec_gives_uniform_map() {
        let n = Material::n_hexadecane();
        let spec = WaveguideSpec {
            core: n.clone(),
            substrate: n.clone(),
            cladding: n,
            ..WaveguideSpec::paper_strip()
        };
        let grid = spec.default_grid().unwrap();
        let eps = permittivity_map(&spec, &grid).unwrap();
        assert!(eps.values.iter().all(|&v| v == eps.values[0]));
    }

    #[test]
    fn map_is_mirror_symmetric_and_deterministic() {
        for spec in [WaveguideSpec::paper_strip(), WaveguideSpec::paper_slot()] {
            let grid = spec.default_grid().unwrap();
            let a = permittivity_map(&spec, &grid).unwrap();
            let b = permittivity_map(&spec, &grid).unwrap();
            assert_eq!(a.values, b.values);
            for i in 0..grid.nx {
                assert_eq!(grid.x(i), -grid.x(grid.nx - 1 - i));
                for j in 0..grid.ny {
                    assert_eq!(a.get(i, j), a.get(grid.nx - 1 - i, j));
                }
            }
        }
    }

    #[test]
    fn refinement_preserves_area_integral() {
        for spec in [WaveguideSpec::paper_strip(), WaveguideSpec::paper_slot()] {
            let coarse = Grid2D::centered(&spec, 3e-6, 2e-6, 10e-9).unwrap();
            let fine = Grid2D::centered(&spec, 3e-6, 2e-6, 5e-9).unwrap();
            let a = permittivity_map(&spec, &coarse).unwrap().area_integral();
            let b = permittivity_map(&spec, &fine).unwrap().area_integral();
            assert!(((a - b) / a).abs() < 0.01);
        }
    }

    #[test]
    fn slot_cells_hold_cladding() {
        let spec = WaveguideSpec::paper_slot();
        let grid = spec.default_grid().unwrap();
        let eps = permittivity_map(&spec, &grid).unwrap();
        let count = (0..grid.nx)
            .filter(|&i| eps.get(i, grid.cell_of(0.0, -60e-9).unwrap().1) == 1.434 * 1.434)
            .filter(|&i| grid.x(i).abs() < 0.3e-6)
            .count();
        // 40 nm gap at 10 nm spacing
        assert_eq!(count, 4);
    }

    #[test]
    fn undersized_grid_rejected() {
        let spec = WaveguideSpec::paper_strip();
        let err = Grid2D::centered(&spec, 0.5e-6, 2e-6, 10e-9).unwrap_err();
        assert!(matches!(err, Error::InvalidGrid(_)));
    }

    #[test]
    fn emitter_above_strip() {
        let spec = WaveguideSpec::paper_strip();
        let loc = locate_emitter(&spec, &EmitterPosition::above_strip(20e-9)).unwrap();
        assert_eq!((loc.x, loc.y), (0.0, 20e-9));
        assert_relative_eq!(loc.permittivity, 1.434 * 1.434);
    }

    #[test]
    fn emitter_on_interface_resolves_to_cladding() {
        let spec = WaveguideSpec::paper_strip();
        let loc = locate_emitter(&spec, &EmitterPosition::above_strip(0.0)).unwrap();
        assert_eq!(loc.y, 0.0);
        assert_relative_eq!(loc.permittivity, 1.434 * 1.434);
    }

    #[test]
    fn emitter_in_slot() {
        let spec = WaveguideSpec::paper_slot();
        let pos = EmitterPosition::slot_center(&spec);
        let loc = locate_emitter(&spec, &pos).unwrap();
        assert_eq!(loc.x, 0.0);
        assert!(loc.y < 0.0 && loc.y > -spec.core_thickness);
        assert_relative_eq!(loc.permittivity, 1.434 * 1.434);

        let strip = WaveguideSpec::paper_strip();
        assert!(matches!(
            locate_emitter(&strip, &pos),
            Err(Error::InvalidEmitter(_))
        ));
        let outside = EmitterPosition {
            lateral_offset: 30e-9,
            ..pos
        };
        assert!(locate_emitter(&spec, &outside).is_err());
    }

    #[test]
    fn invalid_specs() {
        let mut s = WaveguideSpec::paper_strip();
        s.slot_gap = Some(700e-9);
        assert!(s.validate().is_err());
        let mut s = WaveguideSpec::paper_strip();
        s.core_thickness = 0.0;
        assert!(s.validate().is_err());
        assert!(Material::new("x", -1.0).is_err());
    }
}
