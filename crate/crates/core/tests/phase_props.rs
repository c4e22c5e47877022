use molwg::phase::{
    differential_phase, extinction, find_peak, phase_per_photon, scan, transmission_amplitude, Column,
    NonlinearParams,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = NonlinearParams> {
    (1e6..1e10f64, 0.0..=1.0f64, 1e-3..=3.0f64).prop_map(|(gamma, eta, f)| NonlinearParams {
        gamma,
        eta,
        gamma_wg_fraction: f,
        photon_numbers: vec![1, 2],
    })
}

proptest! {
    #[test]
    fn phase_is_odd_in_detuning(p in params(), x in -20.0..20.0f64, m in 1u32..8) {
        let d = x * p.gamma;
        prop_assert_eq!(phase_per_photon(m, d, &p), -phase_per_photon(m, -d, &p));
    }

    #[test]
    fn saturation_reduces_phase_per_photon(p in params(), x in -20.0..20.0f64, m in 1u32..8) {
        let d = x * p.gamma;
        prop_assert!(phase_per_photon(m + 1, d, &p).abs() <= phase_per_photon(m, d, &p).abs() * (1.0 + 1e-12));
    }

    #[test]
    fn extinction_and_transmission_agree(p in params(), x in -20.0..20.0f64, m in 1u32..8) {
        let d = x * p.gamma;
        let e = extinction(m, d, &p);
        let t = transmission_amplitude(m, d, &p);
        prop_assert!((0.0..1.0).contains(&e));
        prop_assert!((t * t - (1.0 - e)).abs() < 1e-12);
    }

    #[test]
    fn differential_phase_has_the_sign_of_minus_delta(p in params(), x in 0.01..20.0f64) {
        // φ(1) is the larger-magnitude phase and φ ∝ −δ
        let d = x * p.gamma;
        prop_assert!(differential_phase(d, &p) <= 0.0);
        prop_assert!(differential_phase(-d, &p) >= 0.0);
    }

    #[test]
    fn scan_is_mirror_symmetric(p in params(), half in 0.5..10.0f64, n in 3usize..200) {
        let r = scan(&p, -half * p.gamma, half * p.gamma, n).unwrap();
        prop_assert_eq!(r.delta.len(), n);
        for k in 0..n {
            prop_assert_eq!(r.delta[k], -r.delta[n - 1 - k]);
            prop_assert_eq!(r.differential[k], -r.differential[n - 1 - k]);
        }
    }
}

#[test]
fn refined_peak_beats_grid_peak() {
    let p = NonlinearParams::paper_default();
    let r = scan(&p, -3.0 * p.gamma, 3.0 * p.gamma, 61).unwrap();
    let peak = find_peak(&r, Column::Differential).unwrap();
    assert!(peak.value.abs() >= peak.grid_value.abs());
    let fine = scan(&p, -3.0 * p.gamma, 3.0 * p.gamma, 60001).unwrap();
    let best = fine.differential.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    assert!((peak.value.abs() - best).abs() < 1e-9);
}

#[test]
fn bad_scans_are_rejected() {
    let p = NonlinearParams::paper_default();
    assert!(scan(&p, 1.0, -1.0, 10).is_err());
    assert!(scan(&p, -1.0, 1.0, 1).is_err());
}
