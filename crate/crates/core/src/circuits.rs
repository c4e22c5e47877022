//! Few-photon Fock-state simulator for linear optics with loss and the
//! saturable single-molecule nonlinearity.
//!
//! Each spatial mode carries `tags` orthogonal internal labels (spectral
//! modes). Occupation vectors are indexed by `spatial * tags + tag`. Loss is
//! a coupling to freshly appended spatial modes, so states stay pure and
//! total probability is conserved.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{phase_per_photon, transmission_amplitude, NonlinearParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLabel {
    /// rad/s, relative to a common reference.
    pub center_frequency: f64,
    /// rad/s
    pub linewidth: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FewPhotonState {
    spatial_modes: usize,
    tags: usize,
    amplitudes: BTreeMap<Vec<u8>, Complex64>,
    pub spectra: Vec<SpectralLabel>,
}

type ModeMap<'a> = dyn Fn(usize) -> Vec<(usize, Complex64)> + 'a;

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

impl FewPhotonState {
    /// Vacuum over `spatial_modes` modes with `tags` internal labels each.
    pub fn vacuum(spatial_modes: usize, tags: usize) -> Self {
        let tags = tags.max(1);
        let mut amplitudes = BTreeMap::new();
        amplitudes.insert(vec![0u8; spatial_modes * tags], Complex64::new(1.0, 0.0));
        Self {
            spatial_modes,
            tags,
            amplitudes,
            spectra: Vec::new(),
        }
    }

    /// Product of single photons, one per `(mode, tag)` entry.
    pub fn photons(spatial_modes: usize, tags: usize, photons: &[(usize, usize)]) -> Result<Self> {
        let mut s = Self::vacuum(spatial_modes, tags);
        for &(mode, tag) in photons {
            let mut amps = vec![Complex64::new(0.0, 0.0); s.tags];
            *amps
                .get_mut(tag)
                .ok_or_else(|| Error::InvalidCircuit(format!("tag {tag} out of range")))? = Complex64::new(1.0, 0.0);
            s.create(mode, &amps)?;
        }
        Ok(s)
    }

    pub fn spatial_modes(&self) -> usize {
        self.spatial_modes
    }

    pub fn tags(&self) -> usize {
        self.tags
    }

    pub fn amplitudes(&self) -> &BTreeMap<Vec<u8>, Complex64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        self.amplitudes.get(occupation).copied().unwrap_or_default()
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.spatial_modes {
            Ok(())
        } else {
            Err(Error::InvalidCircuit(format!(
                "mode {mode} out of range ({} modes)",
                self.spatial_modes
            )))
        }
    }

    /// Applies `Σ_t c_t a†(mode, t)` and renormalizes.
    pub fn create(&mut self, mode: usize, tag_amplitudes: &[Complex64]) -> Result<()> {
        self.check_mode(mode)?;
        if tag_amplitudes.len() != self.tags {
            return Err(Error::InvalidCircuit(format!(
                "expected {} tag amplitudes, got {}",
                self.tags,
                tag_amplitudes.len()
            )));
        }
        let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            for (t, c) in tag_amplitudes.iter().enumerate() {
                if *c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let idx = mode * self.tags + t;
                let mut next = occ.clone();
                next[idx] += 1;
                *out.entry(next).or_default() += amp * c * (f64::from(occ[idx]) + 1.0).sqrt();
            }
        }
        let norm = out.values().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidCircuit("creation produced a zero state".into()));
        }
        self.amplitudes = out.into_iter().map(|(k, v)| (k, v / norm)).collect();
        Ok(())
    }

    /// Appends a vacuum spatial mode and returns its index.
    pub fn add_mode(&mut self) -> usize {
        let tags = self.tags;
        self.amplitudes = std::mem::take(&mut self.amplitudes)
            .into_iter()
            .map(|(mut k, v)| {
                k.extend(std::iter::repeat_n(0, tags));
                (k, v)
            })
            .collect();
        self.spatial_modes += 1;
        self.spatial_modes - 1
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Mean photon number in a spatial mode, summed over tags.
    pub fn mean_occupation(&self, mode: usize) -> f64 {
        let r = mode * self.tags..(mode + 1) * self.tags;
        self.amplitudes
            .iter()
            .map(|(k, v)| k[r.clone()].iter().map(|&n| f64::from(n)).sum::<f64>() * v.norm_sqr())
            .sum()
    }

    /// Photons in each spatial mode for one basis occupation.
    pub fn spatial_pattern(&self, occupation: &[u8]) -> Vec<u8> {
        occupation.chunks(self.tags).map(|c| c.iter().sum()).collect()
    }

    /// Outcome distribution of tag-blind number-resolving detectors on every
    /// spatial mode.
    pub fn distribution(&self) -> BTreeMap<Vec<u8>, f64> {
        let mut out = BTreeMap::new();
        for (k, v) in &self.amplitudes {
            *out.entry(self.spatial_pattern(k)).or_insert(0.0) += v.norm_sqr();
        }
        out
    }

    /// Probability of at least one photon in both `a` and `b`.
    pub fn coincidence(&self, a: usize, b: usize) -> f64 {
        self.distribution()
            .iter()
            .filter(|(p, _)| p[a] > 0 && p[b] > 0)
            .fold(0.0, |acc, (_, v)| acc + v)
    }

    /// Substitutes every creation operator of spatial mode `s` by
    /// `Σ_j u_j a†(j)` (same tag), with the substitution allowed to depend on
    /// the basis occupation.
    fn transform(&mut self, per_state: &dyn Fn(&[u8]) -> Box<ModeMap<'_>>) {
        let tags = self.tags;
        let mut out: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.amplitudes {
            let map = per_state(occ);
            let norm: f64 = occ.iter().map(|&n| factorial(n)).product();
            let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
            terms.insert(vec![0u8; occ.len()], amp / norm.sqrt());
            for (idx, &n) in occ.iter().enumerate() {
                let (spatial, tag) = (idx / tags, idx % tags);
                let targets = map(spatial);
                for _ in 0..n {
                    let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
                    for (mono, c) in &terms {
                        for &(j, u) in &targets {
                            let mut m = mono.clone();
                            m[j * tags + tag] += 1;
                            *next.entry(m).or_default() += c * u;
                        }
                    }
                    terms = next;
                }
            }
            for (mono, c) in terms {
                let f: f64 = mono.iter().map(|&k| factorial(k)).product();
                *out.entry(mono).or_default() += c * f.sqrt();
            }
        }
        out.retain(|_, v| v.norm_sqr() > 1e-40);
        self.amplitudes = out;
    }

    /// Two-mode unitary `[[u00, u01], [u10, u11]]`: input `modes[i]` goes to
    /// output `modes[j]` with amplitude `u[j][i]`.
    pub fn apply_two_mode(&mut self, modes: [usize; 2], u: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_mode(modes[0])?;
        self.check_mode(modes[1])?;
        if modes[0] == modes[1] {
            return Err(Error::InvalidCircuit(format!("beamsplitter modes overlap ({})", modes[0])));
        }
        self.transform(&|_| {
            Box::new(move |s: usize| {
                if s == modes[0] {
                    vec![(modes[0], u[0][0]), (modes[1], u[1][0])]
                } else if s == modes[1] {
                    vec![(modes[0], u[0][1]), (modes[1], u[1][1])]
                } else {
                    vec![(s, Complex64::new(1.0, 0.0))]
                }
            })
        });
        Ok(())
    }

    /// Symmetric beamsplitter: `a† → t a† + i r b†`, `b† → i r a† + t b†`.
    pub fn apply_beamsplitter(&mut self, modes: [usize; 2], transmissivity: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&transmissivity) {
            return Err(Error::InvalidCircuit(format!("transmissivity {transmissivity} not in [0, 1]")));
        }
        let t = Complex64::new(transmissivity.sqrt(), 0.0);
        let ir = Complex64::new(0.0, (1.0 - transmissivity).sqrt());
        self.apply_two_mode(modes, [[t, ir], [ir, t]])
    }

    pub fn apply_phase(&mut self, mode: usize, phase: f64) -> Result<()> {
        self.check_mode(mode)?;
        let e = Complex64::from_polar(1.0, phase);
        self.transform(&|_| {
            Box::new(move |s: usize| vec![(s, if s == mode { e } else { Complex64::new(1.0, 0.0) })])
        });
        Ok(())
    }

    /// Attenuates `mode` to power transmission `transmission`; returns the
    /// loss mode.
    pub fn apply_loss(&mut self, mode: usize, transmission: f64) -> Result<usize> {
        self.check_mode(mode)?;
        if !(0.0..=1.0).contains(&transmission) {
            return Err(Error::InvalidCircuit(format!("loss transmission {transmission} not in [0, 1]")));
        }
        let lost = self.add_mode();
        let (t, r) = (transmission.sqrt(), (1.0 - transmission).sqrt());
        self.transform(&|_| {
            Box::new(move |s: usize| {
                if s == mode {
                    vec![(mode, Complex64::new(t, 0.0)), (lost, Complex64::new(r, 0.0))]
                } else {
                    vec![(s, Complex64::new(1.0, 0.0))]
                }
            })
        });
        Ok(lost)
    }

    /// Molecule coupled to the modes in `modes`. A component with `m` photons
    /// in those modes gives each of them `t_m e^{iφ(m)}`, with the remaining
    /// amplitude sent to one fresh loss mode per input mode. Returns the loss
    /// modes in the order of `modes`.
    pub fn apply_nonlinear(
        &mut self,
        modes: &[usize],
        params: &NonlinearParams,
        delta: f64,
    ) -> Result<Vec<usize>> {
        params.validate()?;
        for (k, &m) in modes.iter().enumerate() {
            self.check_mode(m)?;
            if modes[..k].contains(&m) {
                return Err(Error::InvalidCircuit(format!("nonlinear element lists mode {m} twice")));
            }
        }
        let losses: Vec<usize> = modes.iter().map(|_| self.add_mode()).collect();
        let tags = self.tags;
        let set = modes.to_vec();
        let losses_c = losses.clone();
        self.transform(&|occ: &[u8]| {
            let m: u32 = set
                .iter()
                .map(|&s| occ[s * tags..(s + 1) * tags].iter().map(|&n| u32::from(n)).sum::<u32>())
                .sum();
            let (keep, lose) = if m == 0 {
                (Complex64::new(1.0, 0.0), 0.0)
            } else {
                let t = transmission_amplitude(m, delta, params);
                (
                    Complex64::from_polar(t, phase_per_photon(m, delta, params)),
                    (1.0 - t * t).max(0.0).sqrt(),
                )
            };
            let set = set.clone();
            let losses = losses_c.clone();
            Box::new(move |s: usize| match set.iter().position(|&x| x == s) {
                Some(k) if lose > 0.0 => vec![(s, keep), (losses[k], Complex64::new(lose, 0.0))],
                Some(_) => vec![(s, keep)],
                None => vec![(s, Complex64::new(1.0, 0.0))],
            })
        });
        Ok(losses)
    }

    pub fn apply(&mut self, element: &CircuitElement) -> Result<Vec<usize>> {
        match element {
            CircuitElement::Beamsplitter { modes, transmissivity } => {
                self.apply_beamsplitter(*modes, *transmissivity).map(|_| Vec::new())
            }
            CircuitElement::PhaseShifter { mode, phase } => self.apply_phase(*mode, *phase).map(|_| Vec::new()),
            CircuitElement::Nonlinear { modes, params, detuning } => self.apply_nonlinear(modes, params, *detuning),
            CircuitElement::Loss { mode, transmission } => self.apply_loss(*mode, *transmission).map(|l| vec![l]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CircuitElement {
    Beamsplitter { modes: [usize; 2], transmissivity: f64 },
    PhaseShifter { mode: usize, phase: f64 },
    Nonlinear { modes: Vec<usize>, params: NonlinearParams, detuning: f64 },
    Loss { mode: usize, transmission: f64 },
}

/// Runs the elements in order and returns all loss modes created.
pub fn run_circuit(state: &mut FewPhotonState, elements: &[CircuitElement]) -> Result<Vec<usize>> {
    let mut losses = Vec::new();
    for e in elements {
        losses.extend(state.apply(e)?);
    }
    Ok(losses)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    /// rad/s, relative to a common reference.
    pub center_frequency: f64,
    /// Γ (rad/s)
    pub linewidth: f64,
    /// Probability that a shot yields a zero-phonon-line photon.
    pub zpl_probability: f64,
    /// Stark shift applied by the electrode (rad/s).
    pub stark_offset: f64,
}

impl SourceSpec {
    pub fn new(center_frequency: f64, linewidth: f64, zpl_probability: f64) -> Self {
        Self {
            center_frequency,
            linewidth,
            zpl_probability,
            stark_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.linewidth.is_finite() && self.linewidth > 0.0) {
            return Err(Error::InvalidParameter(format!("linewidth must be > 0, got {}", self.linewidth)));
        }
        if !(0.0..=1.0).contains(&self.zpl_probability) {
            return Err(Error::InvalidParameter(format!(
                "ZPL probability must lie in [0, 1], got {}",
                self.zpl_probability
            )));
        }
        if !(self.center_frequency.is_finite() && self.stark_offset.is_finite()) {
            return Err(Error::InvalidParameter("source frequencies must be finite".into()));
        }
        Ok(())
    }

    pub fn emission_frequency(&self) -> f64 {
        self.center_frequency + self.stark_offset
    }

    pub fn label(&self) -> SpectralLabel {
        SpectralLabel {
            center_frequency: self.emission_frequency(),
            linewidth: self.linewidth,
        }
    }
}

/// Shifts the emission frequency by `offset` (rad/s).
pub fn stark_tune(source: &SourceSpec, offset: f64) -> SourceSpec {
    SourceSpec {
        stark_offset: source.stark_offset + offset,
        ..*source
    }
}

/// Overlap `∫ψ1* ψ2 dt` of two exponentially decaying single-photon
/// wavepackets emitted at `t = 0`.
pub fn wavepacket_overlap(a: &SourceSpec, b: &SourceSpec) -> Complex64 {
    let detuning = b.emission_frequency() - a.emission_frequency();
    let num = (a.linewidth * b.linewidth).sqrt();
    num / Complex64::new(0.5 * (a.linewidth + b.linewidth), -detuning)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomResult {
    /// rad/s
    pub detuning: f64,
    /// `|∫ψ1*ψ2|²`
    pub visibility: f64,
    /// Coincidence probability given both sources emitted.
    pub coincidence: f64,
    /// Same quantity from Fock-state evolution through the beamsplitter.
    pub coincidence_engine: f64,
    pub bunching: f64,
    pub pair_probability: f64,
    pub coincidence_per_shot: f64,
}

/// Post-selected HOM coincidence probability `(1 − V)/2`.
pub fn hom_coincidence(a: &SourceSpec, b: &SourceSpec) -> f64 {
    0.5 * (1.0 - wavepacket_overlap(a, b).norm_sqr())
}

/// Both photons through a balanced symmetric beamsplitter, the second photon
/// split into a part overlapping the first and an orthogonal remainder.
pub fn hom_state(a: &SourceSpec, b: &SourceSpec) -> Result<FewPhotonState> {
    a.validate()?;
    b.validate()?;
    let s = wavepacket_overlap(a, b);
    let rest = (1.0 - s.norm_sqr()).max(0.0).sqrt();
    let mut state = FewPhotonState::photons(2, 2, &[(0, 0)])?;
    state.create(1, &[s, Complex64::new(rest, 0.0)])?;
    state.spectra = vec![a.label(), b.label()];
    state.apply_beamsplitter([0, 1], 0.5)?;
    Ok(state)
}

pub fn run_hom(a: &SourceSpec, b: &SourceSpec) -> Result<HomResult> {
    let state = hom_state(a, b)?;
    let coincidence_engine = state.coincidence(0, 1);
    let pair = a.zpl_probability * b.zpl_probability;
    let coincidence = hom_coincidence(a, b);
    Ok(HomResult {
        detuning: b.emission_frequency() - a.emission_frequency(),
        visibility: wavepacket_overlap(a, b).norm_sqr(),
        coincidence,
        coincidence_engine,
        bunching: 1.0 - coincidence_engine,
        pair_probability: pair,
        coincidence_per_shot: pair * coincidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MzGateResult {
    pub pump_present: bool,
    /// rad/s
    pub detuning: f64,
    /// Cross port; receives the whole probe without a molecule.
    pub p_detector0: f64,
    pub p_detector1: f64,
    /// Probe absorbed and re-emitted out of the guide.
    pub p_lost: f64,
    pub total_probability: f64,
    /// Given the probe was emitted.
    pub probe_emission_probability: f64,
    pub phi1: f64,
    pub phi2: f64,
}

pub const MZ_PROBE_MODE: usize = 0;
pub const MZ_PUMP_MODE: usize = 2;
pub const MZ_DETECTOR0_MODE: usize = 1;
pub const MZ_DETECTOR1_MODE: usize = 0;

/// Balanced Mach-Zehnder with the molecule on the upper arm (mode 0). With
/// a pump, mode 2 carries one photon through the molecule together with the
/// upper arm.
pub fn run_mz_gate(
    probe: &SourceSpec,
    pump_present: bool,
    params: &NonlinearParams,
    delta: f64,
) -> Result<MzGateResult> {
    probe.validate()?;
    params.validate()?;
    let (mut state, nl_modes) = if pump_present {
        (
            FewPhotonState::photons(3, 1, &[(MZ_PROBE_MODE, 0), (MZ_PUMP_MODE, 0)])?,
            vec![0, MZ_PUMP_MODE],
        )
    } else {
        (FewPhotonState::photons(2, 1, &[(MZ_PROBE_MODE, 0)])?, vec![0])
    };
    state.spectra = vec![probe.label()];
    state.apply_beamsplitter([0, 1], 0.5)?;
    let losses = state.apply_nonlinear(&nl_modes, params, delta)?;
    state.apply_beamsplitter([0, 1], 0.5)?;
    Ok(MzGateResult {
        pump_present,
        detuning: delta,
        p_detector0: state.mean_occupation(MZ_DETECTOR0_MODE),
        p_detector1: state.mean_occupation(MZ_DETECTOR1_MODE),
        p_lost: state.mean_occupation(losses[0]),
        total_probability: state.total_probability(),
        probe_emission_probability: probe.zpl_probability,
        phi1: phase_per_photon(1, delta, params),
        phi2: phase_per_photon(2, delta, params),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_photon_balanced_split() {
        let mut s = FewPhotonState::photons(2, 1, &[(0, 0)]).unwrap();
        s.apply_beamsplitter([0, 1], 0.5).unwrap();
        assert_relative_eq!(s.mean_occupation(0), 0.5, max_relative = 1e-15);
        assert_relative_eq!(s.mean_occupation(1), 0.5, max_relative = 1e-15);
        assert_eq!(s.amplitude(&[0, 1]), Complex64::new(0.0, 0.5f64.sqrt()));
    }

    #[test]
    fn unit_transmissivity_is_identity() {
        let mut s = FewPhotonState::photons(3, 1, &[(0, 0), (1, 0)]).unwrap();
        let before = s.clone();
        s.apply_beamsplitter([0, 1], 1.0).unwrap();
        assert_eq!(s.amplitudes(), before.amplitudes());
    }

    #[test]
    fn overlapping_modes_rejected() {
        let mut s = FewPhotonState::photons(2, 1, &[(0, 0)]).unwrap();
        assert!(s.apply_beamsplitter([1, 1], 0.5).is_err());
        assert!(s.apply_beamsplitter([0, 4], 0.5).is_err());
    }

    #[test]
    fn distinguishable_and_identical_pairs() {
        let mut d = FewPhotonState::photons(2, 2, &[(0, 0), (1, 1)]).unwrap();
        d.apply_beamsplitter([0, 1], 0.5).unwrap();
        assert_relative_eq!(d.coincidence(0, 1), 0.5, max_relative = 1e-14);
        let mut i = FewPhotonState::photons(2, 1, &[(0, 0), (1, 0)]).unwrap();
        i.apply_beamsplitter([0, 1], 0.5).unwrap();
        assert!(i.coincidence(0, 1) < 1e-30);
        assert_relative_eq!(i.total_probability(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn hom_values() {
        let g = 2.0 * std::f64::consts::PI * 30e6;
        let a = SourceSpec::new(0.0, g, 0.5);
        assert_eq!(hom_coincidence(&a, &a), 0.0);
        let b = stark_tune(&a, g);
        assert_relative_eq!(hom_coincidence(&a, &b), 0.25, max_relative = 1e-14);
        let far = stark_tune(&a, 1e4 * g);
        assert!((hom_coincidence(&a, &far) - 0.5).abs() < 1e-8);
        let r = run_hom(&a, &b).unwrap();
        assert_relative_eq!(r.coincidence_engine, 0.25, max_relative = 1e-12);
        assert_relative_eq!(r.coincidence_per_shot, 0.0625, max_relative = 1e-12);
    }

    #[test]
    fn stark_tune_composition() {
        let a = SourceSpec::new(1.0e8, 2.0e8, 0.4);
        assert_eq!(stark_tune(&a, 0.0), a);
        let back = stark_tune(&stark_tune(&a, 3.7e8), -3.7e8);
        assert_eq!(back, a);
        let b = SourceSpec::new(-2.0e8, 2.0e8, 0.4);
        let tuned = stark_tune(&b, a.emission_frequency() - b.emission_frequency());
        assert!(hom_coincidence(&a, &tuned) < 1e-15);
    }

    #[test]
    fn nonlinear_element_consistency() {
        let p = NonlinearParams::paper_default();
        let delta = 0.449 * p.gamma;
        let mut s = FewPhotonState::photons(1, 1, &[(0, 0)]).unwrap();
        let loss = s.apply_nonlinear(&[0], &p, delta).unwrap();
        let a = s.amplitude(&[1, 0]);
        assert_relative_eq!(a.arg(), phase_per_photon(1, delta, &p), max_relative = 1e-12);
        assert_relative_eq!(a.norm_sqr(), 1.0 - crate::phase::extinction(1, delta, &p), max_relative = 1e-12);
        assert_relative_eq!(s.mean_occupation(loss[0]) + a.norm_sqr(), 1.0, max_relative = 1e-12);

        let mut v = FewPhotonState::vacuum(2, 1);
        v.apply_nonlinear(&[0], &p, delta).unwrap();
        assert_eq!(v.amplitude(&[0, 0, 0]), Complex64::new(1.0, 0.0));

        let mut q = p.clone();
        q.eta = 0.0;
        let mut w = FewPhotonState::photons(2, 1, &[(0, 0), (0, 0)]).unwrap();
        w.apply_nonlinear(&[0], &q, delta).unwrap();
        assert_relative_eq!(w.amplitude(&[2, 0, 0]).re, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn mz_without_molecule_routes_to_detector0() {
        let mut p = NonlinearParams::paper_default();
        p.eta = 0.0;
        let probe = SourceSpec::new(0.0, p.gamma, 0.5);
        for pump in [false, true] {
            let r = run_mz_gate(&probe, pump, &p, 0.5 * p.gamma).unwrap();
            assert_relative_eq!(r.p_detector0, 1.0, max_relative = 1e-14);
            assert!(r.p_detector1 < 1e-14 && r.p_lost < 1e-14);
        }
    }
}
