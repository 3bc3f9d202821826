//! Local polarization analysis of four photons.
//!
//! Each photon is analyzed in one of three bases. Outcome bit `0` is the `+1`
//! eigenvector of the corresponding Pauli operator (`H`, `+`, `R`), bit `1` the
//! `−1` eigenvector (`V`, `−`, `L`). Sampled counts are Poisson per outcome.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::states::FourfoldOutcome;
use crate::tensor::{c, tensor_all, DensityOperator, Ket, Operator, QuantumState, C64, ONE, ZERO};

/// Normalization tolerance for outcome tables.
pub const DISTRIBUTION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    /// `{H, V}`
    Z,
    /// `{+, −}`, i.e. ±45°
    X,
    /// `{R, L}`
    Y,
}

impl Basis {
    pub fn outcome_symbol(self, bit: u8) -> char {
        match (self, bit) {
            (Basis::Z, 0) => 'H',
            (Basis::Z, _) => 'V',
            (Basis::X, 0) => '+',
            (Basis::X, _) => '-',
            (Basis::Y, 0) => 'R',
            (Basis::Y, _) => 'L',
        }
    }

    pub(crate) fn eigenvector(self, bit: u8) -> Ket {
        let s = FRAC_1_SQRT_2;
        let amps = match (self, bit) {
            (Basis::Z, 0) => [ONE, ZERO],
            (Basis::Z, _) => [ZERO, ONE],
            (Basis::X, 0) => [c(s, 0.0), c(s, 0.0)],
            (Basis::X, _) => [c(s, 0.0), c(-s, 0.0)],
            (Basis::Y, 0) => [c(s, 0.0), c(0.0, s)],
            (Basis::Y, _) => [c(s, 0.0), c(0.0, -s)],
        };
        Ket::new(amps.to_vec()).expect("dim 2")
    }

    fn letter(self) -> char {
        match self {
            Basis::Z => 'Z',
            Basis::X => 'X',
            Basis::Y => 'Y',
        }
    }
}

/// Analysis basis for photons `a, b, c, d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MeasurementSetting([Basis; 4]);

impl MeasurementSetting {
    pub const ALL_Z: Self = Self([Basis::Z, Basis::Z, Basis::Z, Basis::Z]);
    /// `{H,V}` on `a, b` and `{+,−}` on `c, d`: separates `|Φ0>` from `|Φ1>`.
    pub const READOUT: Self = Self([Basis::Z, Basis::Z, Basis::X, Basis::X]);

    pub fn new(bases: [Basis; 4]) -> Self {
        Self(bases)
    }

    pub fn bases(&self) -> &[Basis; 4] {
        &self.0
    }

    /// Product eigenvector for `outcome`.
    pub fn outcome_vector(&self, outcome: FourfoldOutcome) -> Ket {
        let factors: Vec<Ket> = self
            .0
            .iter()
            .zip(outcome.bits())
            .map(|(basis, bit)| basis.eigenvector(bit))
            .collect();
        tensor_all(&factors).expect("four factors")
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|b| b.letter()).collect();
        f.write_str(&s)
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bases: Vec<Basis> = s
            .chars()
            .map(|ch| match ch.to_ascii_uppercase() {
                'Z' => Ok(Basis::Z),
                'X' => Ok(Basis::X),
                'Y' => Ok(Basis::Y),
                _ => Err(Error::InvalidArgument(format!("bad basis {ch:?}"))),
            })
            .collect::<Result<_>>()?;
        let bases: [Basis; 4] = bases
            .try_into()
            .map_err(|_| Error::InvalidArgument(format!("setting {s:?} needs four bases")))?;
        Ok(Self(bases))
    }
}

/// Probabilities of the 16 fourfold outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OutcomeDistribution([f64; 16]);

impl OutcomeDistribution {
    pub fn new(probabilities: [f64; 16]) -> Result<Self> {
        if let Some(&p) = probabilities
            .iter()
            .find(|&&p| p.is_nan() || p < -DISTRIBUTION_TOL)
        {
            return Err(Error::OutOfRange {
                name: "probability",
                value: p,
                range: "[0, 1]",
            });
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(Error::OutOfRange {
                name: "total probability",
                value: sum,
                range: "1",
            });
        }
        Ok(Self(probabilities.map(|p| p.max(0.0))))
    }

    pub fn probability(&self, o: FourfoldOutcome) -> f64 {
        self.0[o.index()]
    }

    pub fn probabilities(&self) -> &[f64; 16] {
        &self.0
    }

    /// Outcomes with probability above `tol`.
    pub fn support(&self, tol: f64) -> BTreeSet<FourfoldOutcome> {
        FourfoldOutcome::all()
            .filter(|&o| self.probability(o) > tol)
            .collect()
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn total_variation(&self, other: &OutcomeDistribution) -> f64 {
        0.5 * self
            .0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// Expectation of the product of `±1` outcome values over the photons in `mask`.
    pub fn parity_expectation(&self, mask: [bool; 4]) -> f64 {
        FourfoldOutcome::all()
            .map(|o| {
                let flips = o
                    .bits()
                    .iter()
                    .zip(mask)
                    .filter(|&(&bit, used)| used && bit == 1)
                    .count();
                let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
                sign * self.probability(o)
            })
            .sum()
    }
}

/// `p(o) = <o|ρ|o>` for every product eigenvector `|o>` of `setting`.
pub fn outcome_probabilities<S: QuantumState + ?Sized>(
    state: &S,
    setting: &MeasurementSetting,
) -> Result<OutcomeDistribution> {
    if state.dim() != 16 {
        return Err(Error::DimensionMismatch {
            expected: 16,
            found: state.dim(),
        });
    }
    let mut p = [0.0; 16];
    for o in FourfoldOutcome::all() {
        p[o.index()] = state.projection_probability(&setting.outcome_vector(o))?;
    }
    OutcomeDistribution::new(p)
}

/// Sampled fourfold counts from one simulated run.
#[derive(Clone, Debug, PartialEq)]
pub struct CountRecord {
    pub counts: [u64; 16],
    pub total_expected: f64,
    pub seed: u64,
}

impl CountRecord {
    pub fn count(&self, o: FourfoldOutcome) -> u64 {
        self.counts[o.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Relative frequencies.
    pub fn frequencies(&self) -> Result<OutcomeDistribution> {
        let total = self.total();
        if total == 0 {
            return Err(Error::ZeroCounts);
        }
        OutcomeDistribution::new(self.counts.map(|n| n as f64 / total as f64))
    }
}

/// Draws each bin from `Poisson(total_expected · p_i)`.
pub fn sample_counts(
    d: &OutcomeDistribution,
    total_expected: f64,
    seed: u64,
) -> Result<CountRecord> {
    let mut stream = SeedStream::new(seed);
    sample_counts_from(d, total_expected, &mut stream)
}

pub fn sample_counts_from(
    d: &OutcomeDistribution,
    total_expected: f64,
    stream: &mut SeedStream,
) -> Result<CountRecord> {
    if !total_expected.is_finite() || total_expected <= 0.0 {
        return Err(Error::OutOfRange {
            name: "total_expected",
            value: total_expected,
            range: "(0, inf)",
        });
    }
    let mut counts = [0u64; 16];
    for (count, &p) in counts.iter_mut().zip(d.probabilities()) {
        let mean = total_expected * p;
        if mean > 0.0 {
            let poisson = Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson mean {mean}: {e}")))?;
            *count = poisson.sample(stream) as u64;
        }
    }
    Ok(CountRecord {
        counts,
        total_expected,
        seed: stream.seed(),
    })
}

/// Fraction of counts outside `allowed`.
pub fn qber(c: &CountRecord, allowed: &BTreeSet<FourfoldOutcome>) -> Result<f64> {
    let total = c.total();
    if total == 0 {
        return Err(Error::ZeroCounts);
    }
    let false_events: u64 = FourfoldOutcome::all()
        .filter(|o| !allowed.contains(o))
        .map(|o| c.count(o))
        .sum();
    Ok(false_events as f64 / total as f64)
}

/// Probability mass outside `allowed`; the noise-free limit of [`qber`].
pub fn exact_qber(d: &OutcomeDistribution, allowed: &BTreeSet<FourfoldOutcome>) -> f64 {
    FourfoldOutcome::all()
        .filter(|o| !allowed.contains(o))
        .map(|o| d.probability(o))
        .sum()
}

/// `V = 1 − 2·QBER`.
pub fn visibility_from_qber(q: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::OutOfRange {
            name: "qber",
            value: q,
            range: "[0, 0.5]",
        });
    }
    Ok(1.0 - 2.0 * q)
}

/// `v·|ψ><ψ| + (1 − v)·1/16`.
pub fn admix_visibility(state: &Ket, v: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange {
            name: "visibility",
            value: v,
            range: "[0, 1]",
        });
    }
    state.ensure_normalized()?;
    let dim = state.dim();
    let white = Operator::identity(dim)?.scale(C64::from((1.0 - v) / dim as f64));
    let mixed = state.projector().scale(C64::from(v)).add(&white)?;
    DensityOperator::new(mixed)
}

/// White-noise visibility that yields `target_qber` when `allowed_outcomes`
/// of the 16 bins carry the ideal signal: QBER = (1 − v)(16 − k)/16.
///
/// For `k = 4` this is `v = 1 − (4/3)·QBER`.
pub fn white_noise_visibility(target_qber: f64, allowed_outcomes: usize) -> Result<f64> {
    if allowed_outcomes >= 16 {
        return Err(Error::InvalidArgument(
            "white noise cannot produce errors when every outcome is allowed".into(),
        ));
    }
    let false_fraction = (16 - allowed_outcomes) as f64 / 16.0;
    let v = 1.0 - target_qber / false_fraction;
    if !(0.0..=1.0).contains(&v) || target_qber.is_nan() || target_qber < 0.0 {
        return Err(Error::OutOfRange {
            name: "qber target",
            value: target_qber,
            range: "reachable by white-noise admixture",
        });
    }
    Ok(v)
}
