//! Decoherence-free basis states of four photons and the logical qubit they carry.
//!
//! The two basis states span the subspace of four-qubit states left invariant
//! by any collective unitary `U ⊗ U ⊗ U ⊗ U` (up to the global phase
//! `det(U)^2`). `|Φ0>` is a product of two singlets on `(a, b)` and `(c, d)`;
//! `|Φ1>` is the orthogonal state of the same total angular momentum.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::measurement::MeasurementSetting;
use crate::tensor::{tensor, Ket, C64, NORM_TOL, ONE, ZERO};

/// Below this magnitude `c0` is treated as zero when fixing the global phase.
const PHASE_ANCHOR_TOL: f64 = 1e-8;

/// `(|01> - |10>) / √2`.
pub fn singlet() -> Ket {
    Ket::from_real(&[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0]).expect("dim 4")
}

/// `|ψ−>_ab ⊗ |ψ−>_cd`.
pub fn phi0() -> Ket {
    tensor(&singlet(), &singlet())
}

/// `(2|0011> − |0101> − |0110> − |1001> − |1010> + 2|1100>) / (2√3)`.
pub fn phi1() -> Ket {
    let mut amps = vec![0.0; 16];
    for (index, weight) in [
        (0b0011, 2.0),
        (0b0101, -1.0),
        (0b0110, -1.0),
        (0b1001, -1.0),
        (0b1010, -1.0),
        (0b1100, 2.0),
    ] {
        amps[index] = weight / (2.0 * 3f64.sqrt());
    }
    Ket::from_real(&amps).expect("dim 16")
}

/// `(√3|Φ0> − |Φ1>) / 2`, the logical state obtained by the `b ↔ c` relabeling of `|Φ1>`.
pub fn psi_l() -> Ket {
    encode_logical(&LogicalQubit::psi_l())
}

/// A qubit `c0|0> + c1|1>` to be carried by the decoherence-free subspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalQubit {
    c0: C64,
    c1: C64,
}

impl LogicalQubit {
    pub fn new(c0: C64, c1: C64) -> Result<Self> {
        let norm_sqr = c0.norm_sqr() + c1.norm_sqr();
        if (norm_sqr - 1.0).abs() > NORM_TOL || !norm_sqr.is_finite() {
            return Err(Error::NotNormalized { norm_sqr });
        }
        Ok(Self { c0, c1 })
    }

    pub fn zero() -> Self {
        Self { c0: ONE, c1: ZERO }
    }

    pub fn one() -> Self {
        Self { c0: ZERO, c1: ONE }
    }

    /// `(√3/2, −1/2)`.
    pub fn psi_l() -> Self {
        Self {
            c0: C64::from(3f64.sqrt() / 2.0),
            c1: C64::from(-0.5),
        }
    }

    /// Bloch-sphere point `(θ, φ)` → `cos(θ/2)|0> + e^{iφ} sin(θ/2)|1>`.
    pub fn from_bloch(theta: f64, phi: f64) -> Self {
        Self {
            c0: C64::from((theta / 2.0).cos()),
            c1: C64::from_polar((theta / 2.0).sin(), phi),
        }
    }

    /// Uniform on the Bloch sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let cos_theta: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        Self::from_bloch(cos_theta.acos(), phi)
    }

    pub fn c0(&self) -> C64 {
        self.c0
    }

    pub fn c1(&self) -> C64 {
        self.c1
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &LogicalQubit) -> f64 {
        (self.c0.conj() * other.c0 + self.c1.conj() * other.c1).norm()
    }

    /// Same qubit with the global phase fixed: `c0` real nonnegative, or `c1`
    /// when `c0` vanishes.
    pub fn phase_fixed(&self) -> Self {
        let anchor = if self.c0.norm() >= PHASE_ANCHOR_TOL {
            self.c0
        } else {
            self.c1
        };
        let phase = anchor.conj() / anchor.norm();
        Self {
            c0: self.c0 * phase,
            c1: self.c1 * phase,
        }
    }
}

/// `c0|Φ0> + c1|Φ1>`.
pub fn encode_logical(q: &LogicalQubit) -> Ket {
    let combined = phi0()
        .scale(q.c0)
        .add(&phi1().scale(q.c1))
        .expect("same dim");
    // c0, c1 are normalized to 1e-12; absorb the leftover drift.
    combined.renormalized().expect("nonzero")
}

/// Projection of a four-photon state onto the decoherence-free subspace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decoded {
    pub qubit: LogicalQubit,
    /// `1 − |<Φ0|s>|² − |<Φ1|s>|²`.
    pub residual: f64,
}

pub fn decode_logical(s: &Ket) -> Result<Decoded> {
    if s.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: s.dim(),
        });
    }
    s.ensure_normalized()?;
    let a0 = phi0().inner(s)?;
    let a1 = phi1().inner(s)?;
    let weight = a0.norm_sqr() + a1.norm_sqr();
    let residual = 1.0 - weight;
    if residual > 1.0 - NORM_TOL {
        return Err(Error::OutsideSubspace);
    }
    let scale = 1.0 / weight.sqrt();
    let qubit = LogicalQubit {
        c0: a0 * scale,
        c1: a1 * scale,
    }
    .phase_fixed();
    Ok(Decoded { qubit, residual })
}

/// One fourfold detection event: a binary result for each photon `a, b, c, d`.
///
/// Stored as a 4-bit index with photon `a` most significant. The meaning of a
/// bit depends on the analysis basis: `0` is `H`, `+` or `R`; `1` is `V`, `−` or `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FourfoldOutcome(u8);

impl FourfoldOutcome {
    pub fn new(index: u8) -> Result<Self> {
        if index >= 16 {
            return Err(Error::InvalidArgument(format!(
                "outcome index {index} out of range"
            )));
        }
        Ok(Self(index))
    }

    pub fn from_bits(bits: [u8; 4]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::InvalidArgument("outcome bits must be 0 or 1".into()));
        }
        Ok(Self(
            (bits[0] << 3) | (bits[1] << 2) | (bits[2] << 1) | bits[3],
        ))
    }

    /// Parses a 4-character label such as `HV+-` or `0110`.
    pub fn parse(label: &str) -> Result<Self> {
        let chars: Vec<char> = label.chars().collect();
        if chars.len() != 4 {
            return Err(Error::InvalidArgument(format!(
                "bad outcome label {label:?}"
            )));
        }
        let mut bits = [0u8; 4];
        for (bit, ch) in bits.iter_mut().zip(chars) {
            *bit = match ch {
                '0' | 'H' | '+' | 'R' => 0,
                '1' | 'V' | '-' | '−' | 'L' => 1,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "bad outcome label {label:?}"
                    )))
                }
            };
        }
        Self::from_bits(bits)
    }

    pub fn all() -> impl Iterator<Item = FourfoldOutcome> {
        (0..16).map(FourfoldOutcome)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Result bit for photon `0..4` (`a..d`).
    pub fn bit(self, photon: usize) -> u8 {
        (self.0 >> (3 - photon)) & 1
    }

    pub fn bits(self) -> [u8; 4] {
        [self.bit(0), self.bit(1), self.bit(2), self.bit(3)]
    }

    /// Analyzer label under `setting`, e.g. `HV+-`.
    pub fn label(self, setting: &MeasurementSetting) -> String {
        setting
            .bases()
            .iter()
            .zip(self.bits())
            .map(|(basis, bit)| basis.outcome_symbol(bit))
            .collect()
    }
}

impl fmt::Display for FourfoldOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04b}", self.0)
    }
}

/// Coefficients `<o|s>` of `s` in the product eigenbasis of `setting`.
pub fn expand_in_basis(
    s: &Ket,
    setting: &MeasurementSetting,
) -> Result<BTreeMap<FourfoldOutcome, C64>> {
    if s.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: s.dim(),
        });
    }
    FourfoldOutcome::all()
        .map(|o| Ok((o, setting.outcome_vector(o).inner(s)?)))
        .collect()
}

/// Coefficients of `s` with photons `a, b` in `{|0>, |1>}` and `c, d` in
/// `{|0̄>, |1̄>} = {(|0>+|1>)/√2, (|0>−|1>)/√2}`.
pub fn expand_mixed_basis(s: &Ket) -> Result<BTreeMap<FourfoldOutcome, C64>> {
    expand_in_basis(s, &MeasurementSetting::READOUT)
}

/// Which basis state a readout event is consistent with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DfReadout {
    Phi0Consistent,
    Phi1Consistent,
}

/// Classifies a `(Z, Z, X, X)` outcome: `|Φ0>` only produces `a ≠ b` together with `c ≠ d`.
pub fn classify_outcome(o: FourfoldOutcome, setting: &MeasurementSetting) -> Result<DfReadout> {
    if *setting != MeasurementSetting::READOUT {
        return Err(Error::WrongSetting {
            expected: MeasurementSetting::READOUT.to_string(),
            found: setting.to_string(),
        });
    }
    let [a, b, c, d] = o.bits();
    Ok(if a != b && c != d {
        DfReadout::Phi0Consistent
    } else {
        DfReadout::Phi1Consistent
    })
}

/// Readout outcomes classified as `class`.
pub fn readout_outcomes(class: DfReadout) -> BTreeSet<FourfoldOutcome> {
    FourfoldOutcome::all()
        .filter(|&o| classify_outcome(o, &MeasurementSetting::READOUT) == Ok(class))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::tensor::c;

    const S3: f64 = 1.732_050_807_568_877_2;

    fn close(a: C64, re: f64) -> bool {
        (a - C64::from(re)).norm() < 1e-12
    }

    #[test]
    fn singlet_amplitudes() {
        let s = singlet();
        assert!(close(s.amplitude(0b01), FRAC_1_SQRT_2));
        assert!(close(s.amplitude(0b10), -FRAC_1_SQRT_2));
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_of_singlets_expands_to_phi0() {
        // brute-force distribution of the two 4-dim vectors
        let s = [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0];
        let p = phi0();
        for i in 0..4 {
            for j in 0..4 {
                assert!(close(p.amplitude(4 * i + j), s[i] * s[j]));
            }
        }
        assert!(close(p.amplitude(0b0101), 0.5));
        assert!(close(p.amplitude(0b0110), -0.5));
        assert!(close(p.amplitude(0b0011), 0.0));
    }

    #[test]
    fn phi1_amplitudes() {
        let p = phi1();
        assert!(close(p.amplitude(0b0011), 1.0 / S3));
        assert!(close(p.amplitude(0b0101), -1.0 / (2.0 * S3)));
        let nonzero = p.amplitudes().iter().filter(|a| a.norm() > 0.0).count();
        assert_eq!(nonzero, 6);
    }

    #[test]
    fn basis_is_orthonormal() {
        // brute-force sums over the 16 basis terms
        let (p0, p1) = (phi0(), phi1());
        let dot = |x: &Ket, y: &Ket| -> C64 {
            (0..16)
                .map(|i| x.amplitude(i).conj() * y.amplitude(i))
                .sum()
        };
        assert!(close(dot(&p0, &p0), 1.0));
        assert!(close(dot(&p1, &p1), 1.0));
        assert!(close(dot(&p0, &p1), 0.0));
    }

    #[test]
    fn encode_examples() {
        assert!(encode_logical(&LogicalQubit::zero()).max_abs_diff(&phi0()) < 1e-15);
        assert!(encode_logical(&LogicalQubit::one()).max_abs_diff(&phi1()) < 1e-15);
        let psi = psi_l();
        assert!((psi.amplitude(0b0101) - C64::from(1.0 / S3)).norm() < 1e-12);
    }

    #[test]
    fn encode_rejects_unnormalized() {
        assert!(matches!(
            LogicalQubit::new(ONE, ONE),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn decode_round_trip() {
        let d = decode_logical(&phi0()).unwrap();
        assert_eq!(d.qubit, LogicalQubit::zero());
        assert!(d.residual.abs() < 1e-12);

        let mut rng = SeedStream::new(5);
        for _ in 0..100 {
            let q = LogicalQubit::random(&mut rng);
            let d = decode_logical(&encode_logical(&q)).unwrap();
            assert!((d.qubit.overlap(&q) - 1.0).abs() < 1e-12);
            assert!((d.qubit.c0() - q.phase_fixed().c0()).norm() < 1e-12);
            assert!((d.qubit.c1() - q.phase_fixed().c1()).norm() < 1e-12);
        }
    }

    #[test]
    fn decode_fixes_phase_on_c1_when_c0_vanishes() {
        let q = LogicalQubit::new(ZERO, c(0.0, -1.0)).unwrap();
        let d = decode_logical(&encode_logical(&q)).unwrap();
        assert!((d.qubit.c1() - ONE).norm() < 1e-12);
    }

    #[test]
    fn decode_rejects_orthogonal_state() {
        let s = Ket::basis(16, 0b0000).unwrap();
        assert_eq!(decode_logical(&s), Err(Error::OutsideSubspace));
    }

    #[test]
    fn phi0_in_readout_basis() {
        let e = expand_mixed_basis(&phi0()).unwrap();
        let want: BTreeMap<&str, f64> =
            [("0110", 0.5), ("0101", -0.5), ("1001", 0.5), ("1010", -0.5)].into();
        for (o, amp) in &e {
            let expect = want.get(o.to_string().as_str()).copied().unwrap_or(0.0);
            assert!(close(*amp, expect), "{o}: {amp}");
        }
    }

    /// Independent basis change: apply the Hadamard matrix on photons c, d by hand.
    fn hadamard_cd(s: &Ket) -> Vec<C64> {
        let h = [[1.0, 1.0], [1.0, -1.0]];
        let mut out = vec![ZERO; 16];
        for ab in 0..4 {
            for (kc, row_c) in h.iter().enumerate() {
                for (kd, row_d) in h.iter().enumerate() {
                    let mut acc = ZERO;
                    for (jc, hc) in row_c.iter().enumerate() {
                        for (jd, hd) in row_d.iter().enumerate() {
                            acc += s.amplitude(4 * ab + 2 * jc + jd) * hc * hd / 2.0;
                        }
                    }
                    out[4 * ab + 2 * kc + kd] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn phi1_in_readout_basis_matches_hand_basis_change() {
        let e = expand_mixed_basis(&phi1()).unwrap();
        let oracle = hadamard_cd(&phi1());
        let mag = 1.0 / (2.0 * S3);
        let mut nonzero = 0;
        for (o, amp) in &e {
            assert!((amp - oracle[o.index()]).norm() < 1e-12);
            if amp.norm() > 1e-12 {
                nonzero += 1;
                assert!((amp.norm() - mag).abs() < 1e-12);
            }
        }
        assert_eq!(nonzero, 12);
        // Term positions of the printed expansion; signs come from the basis change.
        let signs: [(&str, f64); 12] = [
            ("0000", 1.0),
            ("0001", -1.0),
            ("0010", -1.0),
            ("0011", 1.0),
            ("0100", -1.0),
            ("0111", 1.0),
            ("1000", -1.0),
            ("1011", 1.0),
            ("1100", 1.0),
            ("1101", 1.0),
            ("1110", 1.0),
            ("1111", 1.0),
        ];
        for (label, sign) in signs {
            let o = FourfoldOutcome::parse(label).unwrap();
            assert!(close(e[&o], sign * mag), "{label}: {}", e[&o]);
        }
    }

    #[test]
    fn computational_zero_in_readout_basis() {
        let e = expand_mixed_basis(&Ket::basis(16, 0).unwrap()).unwrap();
        for (o, amp) in e {
            let expect = if o.index() < 4 { 0.5 } else { 0.0 };
            assert!(close(amp, expect));
        }
    }

    #[test]
    fn classify_examples() {
        let r = MeasurementSetting::READOUT;
        let p = |s| FourfoldOutcome::parse(s).unwrap();
        assert_eq!(
            classify_outcome(p("HV-+"), &r),
            Ok(DfReadout::Phi0Consistent)
        );
        assert_eq!(
            classify_outcome(p("HH++"), &r),
            Ok(DfReadout::Phi1Consistent)
        );
        assert_eq!(
            classify_outcome(p("VV--"), &r),
            Ok(DfReadout::Phi1Consistent)
        );
        assert!(matches!(
            classify_outcome(p("0000"), &MeasurementSetting::ALL_Z),
            Err(Error::WrongSetting { .. })
        ));
    }

    #[test]
    fn readout_partition_sizes() {
        assert_eq!(readout_outcomes(DfReadout::Phi0Consistent).len(), 4);
        assert_eq!(readout_outcomes(DfReadout::Phi1Consistent).len(), 12);
    }

    #[test]
    fn outcome_labels() {
        let o = FourfoldOutcome::from_bits([0, 1, 0, 1]).unwrap();
        assert_eq!(o.label(&MeasurementSetting::ALL_Z), "HVHV");
        assert_eq!(o.label(&MeasurementSetting::READOUT), "HV+-");
        assert_eq!(FourfoldOutcome::parse("HV+-").unwrap(), o);
        assert!(FourfoldOutcome::parse("HV+").is_err());
    }
}
