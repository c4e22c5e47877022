use molwg::materials::{locate_emitter, permittivity_map, EmitterPosition, Grid2D, WaveguideSpec};
use molwg::modes::{effective_mode_area, group_velocity_with_step, solve_modes, solve_modes_in, Polarization};

fn strip_area(grid: &Grid2D) -> f64 {
    let spec = WaveguideSpec::paper_strip();
    let eps = permittivity_map(&spec, grid).unwrap();
    let modes = solve_modes_in(&spec, &eps, 1).unwrap();
    let r0 = locate_emitter(&spec, &EmitterPosition::above_strip(20e-9)).unwrap();
    effective_mode_area(&modes[0], &eps, &r0).unwrap().a_eff_over_lambda_sq
}

#[test]
fn strip_te_and_tm_are_orthogonal_converged_modes() {
    let spec = WaveguideSpec::paper_strip();
    let grid = spec.default_grid().unwrap();
    let modes = solve_modes(&spec, &grid, 2).unwrap();
    assert_eq!(modes.len(), 2);
    let (te, tm) = (&modes[0], &modes[1]);
    assert_eq!(te.polarization, Polarization::QuasiTe);
    assert_eq!(tm.polarization, Polarization::QuasiTm);
    assert!(te.effective_index > tm.effective_index);
    assert!(tm.effective_index > spec.max_surrounding_index());
    assert!(te.eigen_residual < 1e-9 && tm.eigen_residual < 1e-9);
    assert!(te.boundary_ratio < 1e-3, "{}", te.boundary_ratio);
    assert!(te.normalized_overlap(tm) < 1e-6);
    assert!((te.normalized_overlap(te) - 1.0).abs() < 1e-12);
}

#[test]
fn mode_area_is_insensitive_to_window_growth() {
    let spec = WaveguideSpec::paper_strip();
    let small = strip_area(&Grid2D::centered(&spec, 3e-6, 2e-6, 10e-9).unwrap());
    let large = strip_area(&Grid2D::centered(&spec, 4e-6, 2.8e-6, 10e-9).unwrap());
    assert!(((small - large) / large).abs() < 0.01, "{small} vs {large}");
}

#[test]
fn mode_area_converges_under_grid_refinement() {
    let spec = WaveguideSpec::paper_strip();
    let coarse = strip_area(&Grid2D::centered(&spec, 3e-6, 2e-6, 10e-9).unwrap());
    let fine = strip_area(&Grid2D::centered(&spec, 3e-6, 2e-6, 5e-9).unwrap());
    assert!(((coarse - fine) / fine).abs() < 0.02, "{coarse} vs {fine}");
}

#[test]
fn group_index_is_stable_under_step_halving() {
    let spec = WaveguideSpec::paper_strip();
    let grid = spec.default_grid().unwrap();
    let a = group_velocity_with_step(&spec, &grid, 0.005).unwrap();
    let b = group_velocity_with_step(&spec, &grid, 0.0025).unwrap();
    assert!(((a.group_index - b.group_index) / b.group_index).abs() < 1e-3);
    // normal dispersion of a high-contrast guide
    assert!(a.group_index > a.n_eff_plus.max(a.n_eff_minus));
}

#[test]
fn slot_field_jumps_by_the_permittivity_ratio() {
    let spec = WaveguideSpec::paper_slot();
    let grid = spec.default_grid().unwrap();
    let modes = solve_modes(&spec, &grid, 1).unwrap();
    let m = &modes[0];
    assert_eq!(m.polarization, Polarization::QuasiTe);
    let (gap, core) = (grid.cell_of(15e-9, -60e-9).unwrap(), grid.cell_of(25e-9, -60e-9).unwrap());
    let ratio = m.ex[grid.index(gap.0, gap.1)].norm() / m.ex[grid.index(core.0, core.1)].norm();
    let expected = spec.core.permittivity() / spec.cladding.permittivity();
    assert!(((ratio - expected) / expected).abs() < 0.15, "{ratio} vs {expected}");
}
