use molwg::fdtd::{
    run_bragg_sim, simulate, BraggLayout, FdtdConfig, FdtdStructure,
};

#[test]
fn mirrored_bragg_run_swaps_left_and_right() {
    let stack = FdtdStructure::paper_stack();
    let layout = BraggLayout::quarter_wave(&stack, 785e-9, 4).unwrap();
    let cfg = FdtdConfig::for_bragg(&stack, &layout);
    let a = run_bragg_sim(&cfg, &stack, &layout).unwrap();
    let b = run_bragg_sim(&cfg.mirrored(), &stack, &layout.mirrored()).unwrap();
    let rel = |x: f64, y: f64| ((x - y) / y).abs();
    assert!(rel(a.power.guided_left, b.power.guided_right) < 1e-9);
    assert!(rel(a.power.guided_right, b.power.guided_left) < 1e-9);
    assert!(rel(a.power.total_power, b.power.total_power) < 1e-9);
    assert!(a.directionality > 0.8);
}

#[test]
fn symmetric_slab_run_conserves_energy() {
    let slab = FdtdStructure::slab(FdtdStructure::paper_stack());
    let r = simulate(&FdtdConfig::default(), &slab).unwrap();
    assert!(r.energy_decayed);
    assert!(r.box_agreement < 0.02, "{}", r.box_agreement);
    assert!(((r.guided_left - r.guided_right) / r.guided_right).abs() < 1e-6);
    assert!(r.guided_left + r.guided_right < r.total_power);
    let peak = r.energy_trace.iter().map(|e| e.1).fold(0.0, f64::max);
    assert!(r.energy_trace.last().unwrap().1 < 1e-5 * peak);
}

#[test]
fn guided_fraction_converges_with_cell_size() {
    let slab = FdtdStructure::slab(FdtdStructure::paper_stack());
    let frac = |h: f64| {
        let cfg = FdtdConfig {
            cell_size: h,
            pml_cells: (120e-9 / h).round() as usize,
            ..FdtdConfig::default()
        };
        let r = simulate(&cfg, &slab).unwrap();
        (r.guided_left + r.guided_right) / r.total_power
    };
    let (coarse, fine) = (frac(10e-9), frac(5e-9));
    assert!(((coarse - fine) / fine).abs() < 0.02, "{coarse} vs {fine}");
}

#[test]
fn unstable_or_misplaced_configs_are_rejected_up_front() {
    let slab = FdtdStructure::slab(FdtdStructure::paper_stack());
    let courant = FdtdConfig {
        courant: 0.75,
        ..FdtdConfig::default()
    };
    assert!(simulate(&courant, &slab).unwrap_err().is_config_error());
    let mut far = FdtdConfig::default();
    far.source.x = 5e-6;
    assert!(simulate(&far, &slab).unwrap_err().is_config_error());
    let coarse = FdtdConfig {
        cell_size: 40e-9,
        ..FdtdConfig::default()
    };
    assert!(simulate(&coarse, &slab).unwrap_err().is_config_error());
}
