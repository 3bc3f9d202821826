//! Fock-space model of the down-conversion source and the beam-splitter network.
//!
//! A pump pulse creates singlet pairs in the spatial modes `a0, b0` through
//! `S† = a0H†·b0V† − a0V†·b0H†`. Two 50:50 splitters send `a0 → (a, b)` and
//! `b0 → (c, d)`; only events with one photon in each of `a, b, c, d` are kept.
//!
//! The emission amplitude τ is factored out. Weights are reported at τ = 1
//! (`weight`), or relative to the norm of the emitted state (`probability`).

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{Ket, C64, ONE, ZERO};

/// Amplitudes below this are dropped from a [`FockState`].
const AMPLITUDE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spatial {
    A0,
    B0,
    A,
    B,
    C,
    D,
}

impl Spatial {
    pub const ARMS: [Spatial; 4] = [Spatial::A, Spatial::B, Spatial::C, Spatial::D];

    /// Position of a detection arm in the four-qubit register.
    pub fn arm_index(self) -> Option<usize> {
        match self {
            Spatial::A => Some(0),
            Spatial::B => Some(1),
            Spatial::C => Some(2),
            Spatial::D => Some(3),
            Spatial::A0 | Spatial::B0 => None,
        }
    }
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spatial::A0 => "a0",
            Spatial::B0 => "b0",
            Spatial::A => "a",
            Spatial::B => "b",
            Spatial::C => "c",
            Spatial::D => "d",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    fn bit(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub spatial: Spatial,
    pub polarization: Polarization,
    /// Pump pulse that created the photon, starting at 1.
    pub pulse: u32,
}

impl ModeLabel {
    pub fn new(spatial: Spatial, polarization: Polarization, pulse: u32) -> Self {
        Self {
            spatial,
            polarization,
            pulse,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}#{}", self.spatial, self.polarization, self.pulse)
    }
}

/// Occupation numbers of the populated modes; unpopulated modes are absent.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Occupation(BTreeMap<ModeLabel, u32>);

impl Occupation {
    pub fn from_modes(modes: impl IntoIterator<Item = (ModeLabel, u32)>) -> Self {
        Self(modes.into_iter().filter(|&(_, n)| n > 0).collect())
    }

    pub fn get(&self, mode: &ModeLabel) -> u32 {
        self.0.get(mode).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ModeLabel, &u32)> {
        self.0.iter()
    }

    pub fn photon_number(&self) -> u32 {
        self.0.values().sum()
    }

    /// Photons in one spatial mode, summed over polarization and pulse.
    pub fn photons_in(&self, spatial: Spatial) -> u32 {
        self.0
            .iter()
            .filter(|(m, _)| m.spatial == spatial)
            .map(|(_, n)| n)
            .sum()
    }

    fn with_added(&self, mode: ModeLabel, k: u32) -> Self {
        let mut next = self.clone();
        if k > 0 {
            *next.0.entry(mode).or_insert(0) += k;
        }
        next
    }
}

/// A finite superposition of Fock basis states.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FockState {
    terms: BTreeMap<Occupation, C64>,
}

impl FockState {
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Occupation::default(), ONE);
        Self { terms }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> &BTreeMap<Occupation, C64> {
        &self.terms
    }

    pub fn amplitude(&self, occupation: &Occupation) -> C64 {
        self.terms.get(occupation).copied().unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn accumulate(&mut self, occupation: Occupation, amp: C64) {
        let entry = self.terms.entry(occupation).or_insert(ZERO);
        *entry += amp;
    }

    fn pruned(mut self) -> Self {
        self.terms.retain(|_, a| a.norm() > AMPLITUDE_FLOOR);
        self
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(o, a)| (o.clone(), a * factor))
                .collect(),
        }
        .pruned()
    }

    pub fn add(&self, other: &FockState) -> Self {
        let mut out = self.clone();
        for (o, a) in &other.terms {
            out.accumulate(o.clone(), *a);
        }
        out.pruned()
    }

    pub fn sub(&self, other: &FockState) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Bosonic creation: `|..n..> → √(n+1) |..n+1..>`.
    pub fn create(&self, mode: ModeLabel) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(occ, a)| {
                    let n = occ.get(&mode);
                    (occ.with_added(mode, 1), a * ((n + 1) as f64).sqrt())
                })
                .collect(),
        }
    }

    /// Applies `S† = a0H†·b0V† − a0V†·b0H†` for `pulse`.
    pub fn pair_singlet(&self, pulse: u32) -> Self {
        let m = |s, p| ModeLabel::new(s, p, pulse);
        let hv = self
            .create(m(Spatial::A0, Polarization::H))
            .create(m(Spatial::B0, Polarization::V));
        let vh = self
            .create(m(Spatial::A0, Polarization::V))
            .create(m(Spatial::B0, Polarization::H));
        hv.sub(&vh)
    }

    /// Symmetric 50:50 splitter: `input† → (out1† + out2†)/√2` for every
    /// polarization and pulse.
    pub fn beam_splitter(&self, input: Spatial, out1: Spatial, out2: Spatial) -> Result<Self> {
        if input == out1 || input == out2 || out1 == out2 {
            return Err(Error::InvalidArgument(format!(
                "beam splitter {input} -> ({out1}, {out2}) needs distinct modes"
            )));
        }
        for occ in self.terms.keys() {
            for out in [out1, out2] {
                if occ.photons_in(out) > 0 {
                    return Err(Error::ModeOccupied(out.to_string()));
                }
            }
        }

        let mut result = FockState::zero();
        for (occ, amp) in &self.terms {
            let (inputs, rest): (Vec<_>, Vec<_>) = occ
                .iter()
                .map(|(m, n)| (*m, *n))
                .partition(|(m, _)| m.spatial == input);
            let mut partial = vec![(Occupation::from_modes(rest), *amp)];
            for (mode, n) in inputs {
                let to1 = ModeLabel {
                    spatial: out1,
                    ..mode
                };
                let to2 = ModeLabel {
                    spatial: out2,
                    ..mode
                };
                let norm = 2f64.powf(-(n as f64) / 2.0);
                let mut next = Vec::with_capacity(partial.len() * (n as usize + 1));
                for (o, a) in &partial {
                    for k in 0..=n {
                        // (a†)^n/√n! → Σ_k C(n,k) b†^k c†^(n−k) / (√n! 2^{n/2}),
                        // and b†^k c†^(n−k)|0> = √(k!(n−k)!) |k, n−k>
                        let weight = binomial(n, k).sqrt() * norm;
                        next.push((o.with_added(to1, k).with_added(to2, n - k), a * weight));
                    }
                }
                partial = next;
            }
            for (o, a) in partial {
                result.accumulate(o, a);
            }
        }
        Ok(result.pruned())
    }

    /// Relabels two spatial modes in every term.
    pub fn swap_spatial(&self, m1: Spatial, m2: Spatial) -> Self {
        let relabel = |s: Spatial| {
            if s == m1 {
                m2
            } else if s == m2 {
                m1
            } else {
                s
            }
        };
        let mut out = FockState::zero();
        for (occ, a) in &self.terms {
            let moved = Occupation::from_modes(occ.iter().map(|(m, n)| {
                (
                    ModeLabel {
                        spatial: relabel(m.spatial),
                        ..*m
                    },
                    *n,
                )
            }));
            out.accumulate(moved, *a);
        }
        out.pruned()
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Polarization state of the kept fourfold events.
#[derive(Clone, Debug, PartialEq)]
pub struct PostselectionResult {
    /// Normalized four-qubit state over arms `a, b, c, d`.
    pub state: Ket,
    /// Kept squared norm divided by the squared norm of the input.
    pub probability: f64,
    /// Kept squared norm at τ = 1.
    pub weight: f64,
}

/// The pump pulse that fed each arm `a, b, c, d`.
pub type PulseAssignment = [u32; 4];

/// Post-selects one photon per arm, grouping kept terms by pulse assignment.
///
/// Groups with different assignments are distinguishable in principle and
/// are never added coherently.
pub fn postselect_by_pulse(
    f: &FockState,
) -> Result<BTreeMap<PulseAssignment, PostselectionResult>> {
    let total = f.norm_sqr();
    let mut groups: BTreeMap<PulseAssignment, Vec<C64>> = BTreeMap::new();
    for (occ, amp) in f.terms() {
        if occ.photon_number() != 4 || Spatial::ARMS.iter().any(|&s| occ.photons_in(s) != 1) {
            continue;
        }
        let mut pulses = [0u32; 4];
        let mut index = 0usize;
        for (mode, _) in occ.iter() {
            let arm = mode.spatial.arm_index().expect("only arms are populated");
            pulses[arm] = mode.pulse;
            index |= mode.polarization.bit() << (3 - arm);
        }
        groups.entry(pulses).or_insert_with(|| vec![ZERO; 16])[index] += amp;
    }

    let mut out = BTreeMap::new();
    for (pulses, amps) in groups {
        let weight: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if weight <= AMPLITUDE_FLOOR * AMPLITUDE_FLOOR {
            continue;
        }
        out.insert(
            pulses,
            PostselectionResult {
                state: Ket::normalized(amps)?,
                probability: weight / total,
                weight,
            },
        );
    }
    if out.is_empty() {
        return Err(Error::EmptyProjection);
    }
    Ok(out)
}

/// Post-selects one photon per arm; the kept component must be coherent.
pub fn postselect_one_per_arm(f: &FockState) -> Result<PostselectionResult> {
    let mut groups = postselect_by_pulse(f)?;
    if groups.len() > 1 {
        return Err(Error::Distinguishable(groups.len()));
    }
    Ok(groups.pop_first().expect("non-empty").1)
}

/// Spatial relabeling for Fock states and four-arm polarization kets.
pub trait SwapModes: Sized {
    fn swap_modes(&self, m1: Spatial, m2: Spatial) -> Result<Self>;
}

impl SwapModes for FockState {
    fn swap_modes(&self, m1: Spatial, m2: Spatial) -> Result<Self> {
        Ok(self.swap_spatial(m1, m2))
    }
}

impl SwapModes for Ket {
    fn swap_modes(&self, m1: Spatial, m2: Spatial) -> Result<Self> {
        if self.dim() != 16 {
            return Err(Error::DimensionMismatch {
                expected: 16,
                found: self.dim(),
            });
        }
        let arm = |s: Spatial| {
            s.arm_index()
                .ok_or_else(|| Error::InvalidArgument(format!("{s} is not a detection arm")))
        };
        self.swap_qubits(arm(m1)?, arm(m2)?)
    }
}

/// One way the two pulses' pairs can populate the four arms.
#[derive(Clone, Debug, PartialEq)]
pub struct PairingConfiguration {
    pub pulse1: (Spatial, Spatial),
    pub pulse2: (Spatial, Spatial),
    pub result: PostselectionResult,
}

/// Emission with a fixed pair amplitude τ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SourceModel {
    pub tau: f64,
}

impl Default for SourceModel {
    fn default() -> Self {
        Self { tau: 1.0 }
    }
}

impl SourceModel {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::OutOfRange {
                name: "tau",
                value: tau,
                range: "(0, inf)",
            });
        }
        Ok(Self { tau })
    }

    /// `τ²·(S†)²|vac>/2`, two pairs from a single pulse.
    pub fn second_order_emission(&self) -> FockState {
        FockState::vacuum()
            .pair_singlet(1)
            .pair_singlet(1)
            .scale(C64::from(self.tau * self.tau / 2.0))
    }

    /// `τ²·S1†·S2†|vac>`, one pair from each of two pulses.
    pub fn two_pulse_emission(&self) -> FockState {
        FockState::vacuum()
            .pair_singlet(1)
            .pair_singlet(2)
            .scale(C64::from(self.tau * self.tau))
    }

    /// Second-order emission through both splitters, post-selected.
    pub fn second_order_pipeline(&self) -> Result<PostselectionResult> {
        postselect_one_per_arm(&split_to_arms(&self.second_order_emission())?)
    }

    /// Configuration-resolved post-selection of the two-pulse emission.
    pub fn two_pulse_product(&self) -> Result<Vec<PairingConfiguration>> {
        let groups = postselect_by_pulse(&split_to_arms(&self.two_pulse_emission())?)?;
        let mut configs: Vec<PairingConfiguration> = groups
            .into_iter()
            .map(|(pulses, result)| {
                let arms_of = |p: u32| {
                    let arms: Vec<Spatial> = Spatial::ARMS
                        .iter()
                        .zip(pulses)
                        .filter(|&(_, q)| q == p)
                        .map(|(s, _)| *s)
                        .collect();
                    (arms[0], arms[1])
                };
                PairingConfiguration {
                    pulse1: arms_of(1),
                    pulse2: arms_of(2),
                    result,
                }
            })
            .collect();
        configs.sort_by_key(|c| (c.pulse1, c.pulse2));
        Ok(configs)
    }

    /// The configuration that yields `|Φ0>` after relabeling `b ↔ c`: pulse 1 in
    /// `(a, c)`, pulse 2 in `(b, d)`.
    pub fn phi0_configuration(&self) -> Result<PairingConfiguration> {
        self.two_pulse_product()?
            .into_iter()
            .find(|c| c.pulse1 == (Spatial::A, Spatial::C) && c.pulse2 == (Spatial::B, Spatial::D))
            .ok_or(Error::EmptyProjection)
    }

    /// Fourfold rate of the single-pulse second-order source over the rate of
    /// the two-pulse source conditioned on the `|Φ0>` configuration.
    pub fn rate_ratio(&self) -> Result<f64> {
        let numerator = self.second_order_pipeline()?.weight;
        let denominator = self.phi0_configuration()?.result.weight;
        Ok(numerator / denominator)
    }
}

/// `a0 → (a, b)` and `b0 → (c, d)`.
pub fn split_to_arms(f: &FockState) -> Result<FockState> {
    f.beam_splitter(Spatial::A0, Spatial::A, Spatial::B)?
        .beam_splitter(Spatial::B0, Spatial::C, Spatial::D)
}

pub fn second_order_emission() -> FockState {
    SourceModel::default().second_order_emission()
}

pub fn two_pulse_product() -> Result<Vec<PairingConfiguration>> {
    SourceModel::default().two_pulse_product()
}

pub fn rate_ratio() -> Result<f64> {
    SourceModel::default().rate_ratio()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{decode_logical, phi0, phi1, psi_l, singlet};

    fn mode(s: Spatial, p: Polarization) -> ModeLabel {
        ModeLabel::new(s, p, 1)
    }

    fn occ(modes: &[(Spatial, Polarization, u32)]) -> Occupation {
        Occupation::from_modes(modes.iter().map(|&(s, p, n)| (mode(s, p), n)))
    }

    const A0H: (Spatial, Polarization) = (Spatial::A0, Polarization::H);

    #[test]
    fn create_examples() {
        let one = FockState::vacuum().create(mode(A0H.0, A0H.1));
        assert_eq!(one.amplitude(&occ(&[(A0H.0, A0H.1, 1)])), ONE);

        let two = one.create(mode(A0H.0, A0H.1));
        assert!((two.amplitude(&occ(&[(A0H.0, A0H.1, 2)])).re - 2f64.sqrt()).abs() < 1e-15);

        let bv = mode(Spatial::B0, Polarization::V);
        let x = FockState::vacuum().create(mode(A0H.0, A0H.1)).create(bv);
        let y = FockState::vacuum().create(bv).create(mode(A0H.0, A0H.1));
        assert_eq!(x, y);
        assert_eq!(x.terms().values().next(), Some(&ONE));
    }

    #[test]
    fn repeated_creation_gives_sqrt_factorial() {
        let m = mode(Spatial::A0, Polarization::V);
        let mut f = FockState::vacuum();
        let mut factorial = 1.0;
        for n in 1..=6u32 {
            f = f.create(m);
            factorial *= n as f64;
            let a = f.amplitude(&Occupation::from_modes([(m, n)]));
            assert!((a.re - factorial.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_pair_expansion() {
        let f = FockState::vacuum().pair_singlet(1);
        assert_eq!(f.terms().len(), 2);
        assert!((f.norm_sqr() - 2.0).abs() < 1e-15);
        let hv = occ(&[
            (Spatial::A0, Polarization::H, 1),
            (Spatial::B0, Polarization::V, 1),
        ]);
        let vh = occ(&[
            (Spatial::A0, Polarization::V, 1),
            (Spatial::B0, Polarization::H, 1),
        ]);
        assert_eq!(f.amplitude(&hv), ONE);
        assert_eq!(f.amplitude(&vh), -ONE);

        let twice = f.pair_singlet(1);
        assert!((twice.norm_sqr() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn singlet_pair_over_a0_b0_is_psi_minus() {
        let f = FockState::vacuum().pair_singlet(1);
        // treat a0, b0 as two qubits
        let mut amps = vec![ZERO; 4];
        for (o, a) in f.terms() {
            let mut idx = 0;
            for (m, _) in o.iter() {
                let shift = if m.spatial == Spatial::A0 { 1 } else { 0 };
                idx |= m.polarization.bit() << shift;
            }
            amps[idx] += a;
        }
        let s = Ket::normalized(amps).unwrap();
        assert!((s.overlap(&singlet()).unwrap() - 1.0).abs() < 1e-12);
        assert!((s.amplitude(1) - singlet().amplitude(1)).norm() < 1e-12);
    }

    #[test]
    fn second_order_emission_shape() {
        let f = second_order_emission();
        assert!((f.norm_sqr() - 3.0).abs() < 1e-12);
        assert!(f.terms().keys().all(|o| o.photon_number() == 4));
    }

    #[test]
    fn beam_splitter_single_photon() {
        let f = FockState::vacuum().create(mode(A0H.0, A0H.1));
        let out = f
            .beam_splitter(Spatial::A0, Spatial::A, Spatial::B)
            .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out.amplitude(&occ(&[(Spatial::A, Polarization::H, 1)])).re - s).abs() < 1e-15);
        assert!((out.amplitude(&occ(&[(Spatial::B, Polarization::H, 1)])).re - s).abs() < 1e-15);
        assert_eq!(out.terms().len(), 2);
    }

    #[test]
    fn beam_splitter_two_photons() {
        // (x + y)²/2 with |2> = x²/√2: amplitudes 1/2, 1/√2, 1/2
        let f = FockState::vacuum()
            .create(mode(A0H.0, A0H.1))
            .create(mode(A0H.0, A0H.1))
            .scale(C64::from(1.0 / 2f64.sqrt()));
        let out = f
            .beam_splitter(Spatial::A0, Spatial::A, Spatial::B)
            .unwrap();
        let h = Polarization::H;
        let want = [
            (occ(&[(Spatial::A, h, 2)]), 0.5),
            (
                occ(&[(Spatial::A, h, 1), (Spatial::B, h, 1)]),
                1.0 / 2f64.sqrt(),
            ),
            (occ(&[(Spatial::B, h, 2)]), 0.5),
        ];
        for (o, a) in want {
            assert!((out.amplitude(&o).re - a).abs() < 1e-15);
        }
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beam_splitter_preserves_norm_and_rejects_occupied_outputs() {
        let f = second_order_emission();
        let out = split_to_arms(&f).unwrap();
        assert!((out.norm_sqr() - f.norm_sqr()).abs() < 1e-12);

        let occupied = FockState::vacuum()
            .create(mode(Spatial::A, Polarization::H))
            .create(mode(A0H.0, A0H.1));
        assert!(matches!(
            occupied.beam_splitter(Spatial::A0, Spatial::A, Spatial::B),
            Err(Error::ModeOccupied(_))
        ));
    }

    #[test]
    fn second_order_pipeline_gives_phi1() {
        let r = SourceModel::default().second_order_pipeline().unwrap();
        assert!((r.state.overlap(&phi1()).unwrap() - 1.0).abs() < 1e-10);
        assert!((r.probability - 0.25).abs() < 1e-12);
        assert!((r.weight - 0.75).abs() < 1e-12);
        let d = decode_logical(&r.state).unwrap();
        assert!(d.residual.abs() < 1e-12);
    }

    #[test]
    fn swapped_pipeline_gives_psi_l() {
        let f = split_to_arms(&second_order_emission()).unwrap();
        let swapped = f.swap_modes(Spatial::B, Spatial::C).unwrap();
        let r = postselect_one_per_arm(&swapped).unwrap();
        assert!((r.state.overlap(&psi_l()).unwrap() - 1.0).abs() < 1e-10);

        // the same relabeling on the post-selected ket
        let direct = SourceModel::default()
            .second_order_pipeline()
            .unwrap()
            .state
            .swap_modes(Spatial::B, Spatial::C)
            .unwrap();
        assert!((direct.overlap(&psi_l()).unwrap() - 1.0).abs() < 1e-10);
        assert!((direct.overlap(&phi0()).unwrap() - 3f64.sqrt() / 2.0).abs() < 1e-10);
    }

    #[test]
    fn swap_is_an_involution() {
        let f = split_to_arms(&second_order_emission()).unwrap();
        let back = f
            .swap_spatial(Spatial::B, Spatial::C)
            .swap_spatial(Spatial::B, Spatial::C);
        assert_eq!(back, f);
        let k = phi1().swap_modes(Spatial::A, Spatial::D).unwrap();
        assert_eq!(k.swap_modes(Spatial::A, Spatial::D).unwrap(), phi1());
        assert!(phi1().swap_modes(Spatial::A0, Spatial::D).is_err());
    }

    #[test]
    fn vacuum_postselection_is_empty() {
        assert_eq!(
            postselect_one_per_arm(&FockState::vacuum()),
            Err(Error::EmptyProjection)
        );
    }

    #[test]
    fn two_pulse_configurations() {
        let configs = two_pulse_product().unwrap();
        let pairs: Vec<_> = configs.iter().map(|c| (c.pulse1, c.pulse2)).collect();
        use Spatial::*;
        assert_eq!(
            pairs,
            vec![
                ((A, C), (B, D)),
                ((A, D), (B, C)),
                ((B, C), (A, D)),
                ((B, D), (A, C))
            ]
        );
        let total: f64 = configs.iter().map(|c| c.result.probability).sum();
        assert!((total - 0.25).abs() < 1e-12);
        for c in &configs {
            assert!((c.result.probability - 1.0 / 16.0).abs() < 1e-12);
            // product of singlets on the two arm pairs
            let (p, q) = (c.pulse1, c.pulse2);
            let expected = singlet_pair_state([p, q]);
            assert!((c.result.state.overlap(&expected).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    /// `|ψ−>` on each arm pair, built by direct indexing.
    fn singlet_pair_state(pairs: [(Spatial, Spatial); 2]) -> Ket {
        let s = singlet();
        let mut amps = vec![ZERO; 16];
        for i in 0..4 {
            for j in 0..4 {
                let mut idx = 0;
                for (pair, sub) in pairs.iter().zip([i, j]) {
                    idx |= ((sub >> 1) & 1) << (3 - pair.0.arm_index().unwrap());
                    idx |= (sub & 1) << (3 - pair.1.arm_index().unwrap());
                }
                amps[idx] += s.amplitude(i) * s.amplitude(j);
            }
        }
        Ket::new(amps).unwrap()
    }

    #[test]
    fn two_pulse_state_cannot_be_merged() {
        let f = split_to_arms(&SourceModel::default().two_pulse_emission()).unwrap();
        assert_eq!(postselect_one_per_arm(&f), Err(Error::Distinguishable(4)));
    }

    #[test]
    fn phi0_from_two_pulses_and_swap() {
        let c = SourceModel::default().phi0_configuration().unwrap();
        let swapped = c.result.state.swap_modes(Spatial::B, Spatial::C).unwrap();
        assert!((swapped.overlap(&phi0()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rate_ratio_is_three_for_any_tau() {
        assert!((rate_ratio().unwrap() - 3.0).abs() < 1e-9);
        for tau in [0.05, 0.3, 2.0] {
            let m = SourceModel::new(tau).unwrap();
            assert!((m.rate_ratio().unwrap() - 3.0).abs() < 1e-9);
            assert!((m.second_order_pipeline().unwrap().weight - 0.75 * tau.powi(4)).abs() < 1e-12);
        }
        assert!(SourceModel::new(0.0).is_err());
    }
}
