//! Jones-calculus waveplates and collective-noise channels.
//!
//! Angles are fast-axis angles from horizontal, in degrees. Conventions:
//!
//! * HWP(θ) = `[[cos2θ, sin2θ], [sin2θ, −cos2θ]]`, determinant −1.
//! * QWP(θ) = `[[cos²θ − i sin²θ, (1+i) sinθ cosθ], [(1+i) sinθ cosθ, sin²θ − i cos²θ]]`:
//!   the slow axis picks up a phase `−i` relative to the fast axis, determinant −i.
//! * A list of plates is traversed in order, so the first plate acts first.
//!
//! With these conventions the channel `[HWP 59°, QWP 13.5°]` decomposes as
//! `−0.0123i·1 − 0.332σz − 0.707σy + 0.624σx` once its global phase makes the
//! σx coefficient real and positive.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::SeedStream;
use crate::tensor::{c, DensityOperator, Ket, Operator, Pauli, C64, NORM_TOL, ONE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WaveplateKind {
    Hwp,
    Qwp,
}

impl fmt::Display for WaveplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveplateKind::Hwp => "HWP",
            WaveplateKind::Qwp => "QWP",
        })
    }
}

/// A plate and its fast-axis angle, normalized to `[0°, 180°)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveplateSetting {
    kind: WaveplateKind,
    angle_deg: f64,
}

impl WaveplateSetting {
    pub fn new(kind: WaveplateKind, angle_deg: f64) -> Result<Self> {
        if !angle_deg.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "bad plate angle {angle_deg}"
            )));
        }
        Ok(Self {
            kind,
            angle_deg: angle_deg.rem_euclid(180.0),
        })
    }

    pub fn hwp(angle_deg: f64) -> Result<Self> {
        Self::new(WaveplateKind::Hwp, angle_deg)
    }

    pub fn qwp(angle_deg: f64) -> Result<Self> {
        Self::new(WaveplateKind::Qwp, angle_deg)
    }

    pub fn kind(&self) -> WaveplateKind {
        self.kind
    }

    pub fn angle_deg(&self) -> f64 {
        self.angle_deg
    }

    pub fn matrix(&self) -> Operator {
        match self.kind {
            WaveplateKind::Hwp => hwp(self.angle_deg),
            WaveplateKind::Qwp => qwp(self.angle_deg),
        }
    }
}

impl fmt::Display for WaveplateSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.kind, self.angle_deg)
    }
}

impl FromStr for WaveplateSetting {
    type Err = Error;

    /// Parses `HWP 59`, `qwp:13.5` or `HWP=59`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s
            .find(|ch: char| ch.is_whitespace() || ch == ':' || ch == '=')
            .ok_or_else(|| Error::InvalidArgument(format!("bad plate {s:?}")))?;
        let (kind, angle) = s.split_at(split);
        let angle = angle[1..].trim();
        let kind = match kind.to_ascii_uppercase().as_str() {
            "HWP" => WaveplateKind::Hwp,
            "QWP" => WaveplateKind::Qwp,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown plate kind {kind:?}"
                )))
            }
        };
        let angle: f64 = angle
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad plate angle {angle:?}")))?;
        Self::new(kind, angle)
    }
}

/// Reference collective noise: HWP at 59°, then QWP at 13.5°.
pub fn reference_noise_plates() -> Vec<WaveplateSetting> {
    vec![
        WaveplateSetting::hwp(59.0).expect("finite"),
        WaveplateSetting::qwp(13.5).expect("finite"),
    ]
}

/// Half-wave plate Jones matrix.
pub fn hwp(angle_deg: f64) -> Operator {
    let t = 2.0 * angle_deg.to_radians();
    let (s, co) = t.sin_cos();
    Operator::from_2x2([[c(co, 0.0), c(s, 0.0)], [c(s, 0.0), c(-co, 0.0)]])
}

/// Quarter-wave plate Jones matrix.
pub fn qwp(angle_deg: f64) -> Operator {
    let t = angle_deg.to_radians();
    let (s, co) = t.sin_cos();
    let off = c(s * co, s * co);
    Operator::from_2x2([[c(co * co, -s * s), off], [off, c(s * s, -co * co)]])
}

/// Product of the plates' Jones matrices, first plate acting first.
pub fn waveplate_channel(plates: &[WaveplateSetting]) -> Result<Operator> {
    let (first, rest) = plates
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("waveplate list is empty".into()))?;
    Ok(rest
        .iter()
        .fold(first.matrix(), |acc, plate| &plate.matrix() * &acc))
}

/// `u = a_id·1 + a_z·σz + a_y·σy + a_x·σx`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliCoefficients {
    pub identity: C64,
    pub z: C64,
    pub y: C64,
    pub x: C64,
}

impl PauliCoefficients {
    pub fn reconstruct(&self) -> Operator {
        let terms = [
            (self.identity, Pauli::I),
            (self.z, Pauli::Z),
            (self.y, Pauli::Y),
            (self.x, Pauli::X),
        ];
        terms
            .iter()
            .map(|(a, p)| p.matrix().scale(*a))
            .reduce(|acc, m| acc.add(&m).expect("2x2"))
            .expect("four terms")
    }

    /// Multiplies every coefficient by one unit phase so that `x` is real and positive.
    pub fn aligned_to_x(&self) -> Self {
        if self.x.norm() == 0.0 {
            return *self;
        }
        let phase = self.x.conj() / self.x.norm();
        self.scaled(phase)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            identity: self.identity * factor,
            z: self.z * factor,
            y: self.y * factor,
            x: self.x * factor,
        }
    }

    /// `(|a_id|, |a_z|, |a_y|, |a_x|)`.
    pub fn magnitudes(&self) -> [f64; 4] {
        [
            self.identity.norm(),
            self.z.norm(),
            self.y.norm(),
            self.x.norm(),
        ]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.magnitudes().iter().map(|m| m * m).sum()
    }
}

/// `a_id = tr(u)/2`, `a_k = tr(σk·u)/2`.
pub fn pauli_decompose(u: &Operator) -> Result<PauliCoefficients> {
    if u.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: u.dim(),
        });
    }
    let coeff = |p: Pauli| (&p.matrix() * u).trace() / 2.0;
    Ok(PauliCoefficients {
        identity: coeff(Pauli::I),
        z: coeff(Pauli::Z),
        y: coeff(Pauli::Y),
        x: coeff(Pauli::X),
    })
}

/// Haar-random element of SU(2): a uniform point on the unit 3-sphere mapped to
/// `[[α, −β*], [β, α*]]`.
pub fn haar_su2(stream: &mut SeedStream) -> Operator {
    let g: [f64; 4] = std::array::from_fn(|_| stream.sample(StandardNormal));
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let alpha = c(g[0] / norm, g[1] / norm);
    let beta = c(g[2] / norm, g[3] / norm);
    Operator::from_2x2([[alpha, -beta.conj()], [beta, alpha.conj()]])
}

/// Haar-random element of U(2): [`haar_su2`] times a uniform global phase.
pub fn haar_u2(stream: &mut SeedStream) -> Operator {
    let su2 = haar_su2(stream);
    let phase: f64 = stream.random_range(0.0..2.0 * PI);
    su2.scale(C64::from_polar(1.0, phase))
}

/// `u ⊗ u ⊗ ... ⊗ u` (`n` factors).
pub fn collective(u: &Operator, n: usize) -> Result<Operator> {
    if n < 1 {
        return Err(Error::InvalidArgument(
            "collective channel needs n >= 1".into(),
        ));
    }
    u.ensure_unitary()?;
    Ok((1..n).fold(u.clone(), |acc, _| acc.tensor(u)))
}

/// `op·|s>`, renormalized only if the norm drifted by more than 1e-12.
pub fn apply(op: &Operator, s: &Ket) -> Result<Ket> {
    let out = op.apply(s)?;
    if (out.norm_sqr() - 1.0).abs() > NORM_TOL && s.is_normalized() {
        out.renormalized()
    } else {
        Ok(out)
    }
}

/// `op·ρ·op†`.
pub fn apply_to_density(op: &Operator, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = op.matmul(rho.operator())?.matmul(&op.adjoint())?;
    DensityOperator::new(out)
}

/// Unitary from explicit Pauli coefficients, rescaled to unit norm.
///
/// Published coefficients are rounded, so `u†u` may only be proportional to
/// the identity; anything more than 1% away from that is rejected.
pub fn unitary_from_pauli(coeffs: &PauliCoefficients) -> Result<Operator> {
    let u = coeffs.reconstruct();
    let gram = &u.adjoint() * &u;
    let scale = gram.trace().re / 2.0;
    if scale.is_nan() || scale <= 0.0 {
        return Err(Error::NotUnitary { deviation: 1.0 });
    }
    let deviation = gram.max_abs_diff(&Operator::identity(2)?.scale(C64::from(scale))) / scale;
    if deviation > 1e-2 {
        return Err(Error::NotUnitary { deviation });
    }
    let u = u.scale(ONE / scale.sqrt());
    // Polar factor u (u†u)^{-1/2} removes what is left of the rounding.
    let gram = (&u.adjoint() * &u).herm_eig()?;
    let mut correction = Operator::zeros(2)?;
    for (lambda, v) in gram.values.iter().zip(&gram.vectors) {
        correction = correction.add(&v.projector().scale(C64::from(lambda.powf(-0.5))))?;
    }
    let out = &u * &correction;
    out.ensure_unitary()?;
    Ok(out)
}
