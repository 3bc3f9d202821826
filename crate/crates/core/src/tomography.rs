//! Tomography of the logical qubit from three four-photon parity observables.
//!
//! With `Σz = σz⊗σz⊗σx⊗σx`, `Σx = σz⊗σx⊗σz⊗σx` and `Σy = σy⊗σx⊗σz⊗1`, the
//! logical density matrix in the `{|Φ0>, |Φ1>}` basis is
//!
//! ```text
//! ρ11     = (3<Σz> + 1) / 4
//! Re ρ12  = √3 (2<Σx> + <Σz> − 1) / 4
//! Im ρ12  = √3 <Σy> / 2
//! ```
//!
//! with `ρ12 = <Φ0|ρ|Φ1>`. Each observable is a product of single-photon
//! Paulis, so its expectation follows from one local measurement setting.

use std::fmt;

use crate::error::{Error, Result};
use crate::measurement::{
    outcome_probabilities, sample_counts_from, Basis, CountRecord, MeasurementSetting,
    OutcomeDistribution,
};
use crate::rng::SeedStream;
use crate::states::{phi0, phi1, LogicalQubit};
use crate::tensor::{c, tensor_all, Operator, Pauli, QuantumState, C64, PSD_TOL, UNITARY_TOL};

/// Imaginary parts of `Tr(ρΣ)` above this are an error.
const IMAG_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SigmaKind {
    Z,
    X,
    Y,
}

impl fmt::Display for SigmaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SigmaKind::Z => "Sigma_z",
            SigmaKind::X => "Sigma_x",
            SigmaKind::Y => "Sigma_y",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaObservable {
    pub kind: SigmaKind,
    pub factors: [Pauli; 4],
    pub matrix: Operator,
}

impl SigmaObservable {
    pub fn new(kind: SigmaKind) -> Self {
        use Pauli::*;
        let factors = match kind {
            SigmaKind::Z => [Z, Z, X, X],
            SigmaKind::X => [Z, X, Z, X],
            SigmaKind::Y => [Y, X, Z, I],
        };
        let mats: Vec<Operator> = factors.iter().map(|p| p.matrix()).collect();
        Self {
            kind,
            factors,
            matrix: tensor_all(&mats).expect("four factors"),
        }
    }

    /// Photons whose outcome enters the parity.
    pub fn mask(&self) -> [bool; 4] {
        self.factors.map(|p| p != Pauli::I)
    }

    /// Local setting measuring this observable; photons with an identity
    /// factor are analyzed in `identity_basis` and then ignored.
    pub fn setting(&self, identity_basis: Basis) -> MeasurementSetting {
        MeasurementSetting::new(self.factors.map(|p| match p {
            Pauli::X => Basis::X,
            Pauli::Y => Basis::Y,
            Pauli::Z => Basis::Z,
            Pauli::I => identity_basis,
        }))
    }

    /// `<Σ>` from a distribution measured in [`SigmaObservable::setting`].
    pub fn expectation_from(&self, d: &OutcomeDistribution) -> f64 {
        d.parity_expectation(self.mask())
    }
}

/// `[Σz, Σx, Σy]`.
pub fn sigma_observables() -> [SigmaObservable; 3] {
    [SigmaKind::Z, SigmaKind::X, SigmaKind::Y].map(SigmaObservable::new)
}

/// `Tr(ρΣ)`.
pub fn expectation<S: QuantumState + ?Sized>(state: &S, obs: &SigmaObservable) -> Result<f64> {
    let z = state.expectation_of(&obs.matrix)?;
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ComplexExpectation(z.im));
    }
    Ok(z.re)
}

/// `(<Σz>, <Σx>, <Σy>)` by direct trace.
pub fn expectations<S: QuantumState + ?Sized>(state: &S) -> Result<[f64; 3]> {
    let [z, x, y] = sigma_observables();
    Ok([
        expectation(state, &z)?,
        expectation(state, &x)?,
        expectation(state, &y)?,
    ])
}

/// A 2x2 density matrix in the `{|Φ0>, |Φ1>}` basis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalDensityMatrix {
    entries: [[C64; 2]; 2],
}

impl LogicalDensityMatrix {
    /// Checks Hermiticity and unit trace; positivity is checked by [`Self::is_physical`].
    pub fn new(entries: [[C64; 2]; 2]) -> Result<Self> {
        let deviation = (entries[0][1] - entries[1][0].conj())
            .norm()
            .max(entries[0][0].im.abs())
            .max(entries[1][1].im.abs());
        if deviation > UNITARY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = (entries[0][0] + entries[1][1]).re;
        if (trace - 1.0).abs() > UNITARY_TOL {
            return Err(Error::BadTrace { trace });
        }
        Ok(Self { entries })
    }

    pub fn from_qubit(q: &LogicalQubit) -> Self {
        let (a, b) = (q.c0(), q.c1());
        Self {
            entries: [[a * a.conj(), a * b.conj()], [b * a.conj(), b * b.conj()]],
        }
    }

    pub fn from_operator(m: &Operator) -> Result<Self> {
        if m.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: m.dim(),
            });
        }
        Self::new([[m.get(0, 0), m.get(0, 1)], [m.get(1, 0), m.get(1, 1)]])
    }

    pub fn entries(&self) -> &[[C64; 2]; 2] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row][col]
    }

    pub fn to_operator(&self) -> Operator {
        Operator::from_2x2(self.entries)
    }

    /// Same operator embedded in the four-photon space: `Σ ρij |Φi><Φj|`.
    pub fn embed(&self) -> Operator {
        let basis = [phi0(), phi1()];
        let mut out = Operator::zeros(16).expect("dim 16");
        for (i, bi) in basis.iter().enumerate() {
            for (j, bj) in basis.iter().enumerate() {
                let outer = Operator::from_matrix(bi.as_vector() * bj.as_vector().adjoint())
                    .expect("dim 16");
                out = out.add(&outer.scale(self.entries[i][j])).expect("dim 16");
            }
        }
        out
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let eig = self
            .to_operator()
            .herm_eig()
            .expect("Hermitian by construction");
        [eig.values[0], eig.values[1]]
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.eigenvalues()[0] >= -tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.to_operator().max_abs_diff(&other.to_operator())
    }

    /// `½ Tr|ρ − σ|`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        let diff = self.to_operator().sub(&other.to_operator()).expect("2x2");
        let eig = diff.herm_eig().expect("difference of Hermitian matrices");
        0.5 * eig.values.iter().map(|v| v.abs()).sum::<f64>()
    }
}

/// Applies the reconstruction formulas. The result is Hermitian with unit
/// trace but may have a negative eigenvalue for noisy inputs.
pub fn reconstruct(ez: f64, ex: f64, ey: f64) -> LogicalDensityMatrix {
    let s3 = 3f64.sqrt();
    let rho11 = (3.0 * ez + 1.0) / 4.0;
    let rho12 = c(s3 * (2.0 * ex + ez - 1.0) / 4.0, s3 * ey / 2.0);
    LogicalDensityMatrix {
        entries: [
            [C64::from(rho11), rho12],
            [rho12.conj(), C64::from(1.0 - rho11)],
        ],
    }
}

/// Clips negative eigenvalues and renormalizes the trace.
pub fn project_physical(m: &LogicalDensityMatrix) -> LogicalDensityMatrix {
    let eig = m
        .to_operator()
        .herm_eig()
        .expect("Hermitian by construction");
    let clipped: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let mut out = Operator::zeros(2).expect("dim 2");
    for (lambda, v) in clipped.iter().zip(&eig.vectors) {
        out = out
            .add(&v.projector().scale(C64::from(lambda / total)))
            .expect("dim 2");
    }
    let e = |r, col| out.get(r, col);
    // Re-symmetrize so the stored matrix is exactly Hermitian.
    let off = (e(0, 1) + e(1, 0).conj()) / 2.0;
    let d0 = e(0, 0).re;
    LogicalDensityMatrix {
        entries: [[C64::from(d0), off], [off.conj(), C64::from(1.0 - d0)]],
    }
}

/// `Tr sqrt(√σ ρ √σ)`, clamped to `[0, 1 + 1e-9]`.
pub fn fidelity(rho: &LogicalDensityMatrix, sigma: &LogicalDensityMatrix) -> Result<f64> {
    for m in [rho, sigma] {
        let min = m.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
    }
    let root_sigma = sigma.to_operator().sqrt_psd()?;
    let inner = &(&root_sigma * &rho.to_operator()) * &root_sigma;
    let f = inner.sqrt_psd()?.trace().re;
    Ok(f.clamp(0.0, 1.0 + PSD_TOL))
}

/// Sampling parameters for [`tomography_pipeline`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampling {
    /// Mean fourfold events per measurement setting.
    pub total_expected: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TomographyResult {
    pub rho: LogicalDensityMatrix,
    /// `(<Σz>, <Σx>, <Σy>)` as measured.
    pub expectations: [f64; 3],
    /// Weight of the four-photon state outside the decoherence-free subspace.
    pub residual: f64,
    /// Sampled counts per setting, in `Σz, Σx, Σy` order.
    pub counts: Option<[CountRecord; 3]>,
}

/// Measures the three settings, reconstructs, and (when sampling) projects onto
/// physical density matrices. Photon `d` is analyzed in `Z` for `Σy`.
pub fn tomography_pipeline<S: QuantumState + ?Sized>(
    state: &S,
    sampling: Option<Sampling>,
) -> Result<TomographyResult> {
    tomography_pipeline_with(state, sampling, Basis::Z)
}

pub fn tomography_pipeline_with<S: QuantumState + ?Sized>(
    state: &S,
    sampling: Option<Sampling>,
    identity_basis: Basis,
) -> Result<TomographyResult> {
    let observables = sigma_observables();
    let mut expectations = [0.0; 3];
    let mut records = Vec::new();
    for (index, obs) in observables.iter().enumerate() {
        let exact = outcome_probabilities(state, &obs.setting(identity_basis))?;
        expectations[index] = match sampling {
            None => obs.expectation_from(&exact),
            Some(s) => {
                let mut stream = SeedStream::derived(s.seed, index as u64);
                let record = sample_counts_from(&exact, s.total_expected, &mut stream)?;
                let value = obs.expectation_from(&record.frequencies()?);
                records.push(record);
                value
            }
        };
    }

    let [ez, ex, ey] = expectations;
    let raw = reconstruct(ez, ex, ey);
    let rho = if sampling.is_some() {
        project_physical(&raw)
    } else {
        let min = raw.eigenvalues()[0];
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        raw
    };

    let residual =
        1.0 - state.projection_probability(&phi0())? - state.projection_probability(&phi1())?;
    let counts = records.try_into().ok();
    Ok(TomographyResult {
        rho,
        expectations,
        residual,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{collective, haar_u2};
    use crate::states::{encode_logical, psi_l};
    use crate::tensor::{DensityOperator, Ket, ZERO};
    use rand::Rng;

    const S3: f64 = 1.732_050_807_568_877_2;

    /// Random mixed logical state: convex mixture of two random pure states.
    fn random_logical(stream: &mut SeedStream) -> LogicalDensityMatrix {
        let a = LogicalDensityMatrix::from_qubit(&LogicalQubit::random(stream));
        let b = LogicalDensityMatrix::from_qubit(&LogicalQubit::random(stream));
        let w: f64 = stream.random();
        let mix = a
            .to_operator()
            .scale(C64::from(w))
            .add(&b.to_operator().scale(C64::from(1.0 - w)))
            .unwrap();
        LogicalDensityMatrix::from_operator(&mix).unwrap()
    }

    #[test]
    fn observables_are_hermitian_with_unit_spectrum() {
        for obs in sigma_observables() {
            assert!(obs.matrix.is_hermitian(1e-15));
            let eig = obs.matrix.herm_eig().unwrap();
            assert!(eig.values.iter().all(|v| (v.abs() - 1.0).abs() < 1e-12));
            let sq = &obs.matrix * &obs.matrix;
            assert!(sq.max_abs_diff(&Operator::identity(16).unwrap()) < 1e-14);
        }
    }

    #[test]
    fn basis_state_expectations() {
        let [z, x, y] = sigma_observables();
        assert!((expectation(&phi0(), &z).unwrap() - 1.0).abs() < 1e-12);
        assert!((expectation(&phi1(), &z).unwrap() + 1.0 / 3.0).abs() < 1e-12);
        assert!(expectation(&phi0(), &x).unwrap().abs() < 1e-12);
        assert!((expectation(&phi1(), &x).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(expectation(&phi0(), &y).unwrap().abs() < 1e-12);
        assert!(expectation(&phi1(), &y).unwrap().abs() < 1e-12);
    }

    #[test]
    fn psi_l_expectations() {
        let e = expectations(&psi_l()).unwrap();
        for (got, want) in e.iter().zip([2.0 / 3.0, -1.0 / 3.0, 0.0]) {
            assert!((got - want).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn maximally_mixed_has_zero_expectations() {
        let rho = DensityOperator::maximally_mixed(16).unwrap();
        for v in expectations(&rho).unwrap() {
            assert!(v.abs() < 1e-15);
        }
    }

    #[test]
    fn local_measurement_route_matches_trace() {
        let mut stream = SeedStream::new(17);
        for _ in 0..20 {
            let s = encode_logical(&LogicalQubit::random(&mut stream));
            for obs in sigma_observables() {
                let d = outcome_probabilities(&s, &obs.setting(Basis::Z)).unwrap();
                let local = obs.expectation_from(&d);
                assert!((local - expectation(&s, &obs).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn identity_factor_basis_is_immaterial() {
        let mut stream = SeedStream::new(18);
        let y = SigmaObservable::new(SigmaKind::Y);
        for _ in 0..20 {
            let s = encode_logical(&LogicalQubit::random(&mut stream));
            let vals: Vec<f64> = [Basis::Z, Basis::X, Basis::Y]
                .iter()
                .map(|&b| y.expectation_from(&outcome_probabilities(&s, &y.setting(b)).unwrap()))
                .collect();
            assert!((vals[0] - vals[1]).abs() < 1e-12 && (vals[0] - vals[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_examples() {
        let r = reconstruct(1.0, 0.0, 0.0);
        assert!(r.max_abs_diff(&LogicalDensityMatrix::from_qubit(&LogicalQubit::zero())) < 1e-12);

        // <Σx> of Φ1 by direct trace is 2/3
        let ex1 = expectation(&phi1(), &SigmaObservable::new(SigmaKind::X)).unwrap();
        let r = reconstruct(-1.0 / 3.0, ex1, 0.0);
        assert!(r.max_abs_diff(&LogicalDensityMatrix::from_qubit(&LogicalQubit::one())) < 1e-12);

        let r = reconstruct(2.0 / 3.0, -1.0 / 3.0, 0.0);
        let want = [[0.75, -S3 / 4.0], [-S3 / 4.0, 0.25]];
        for (i, row) in want.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                assert!((r.get(i, j) - C64::from(*w)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn reconstruct_inverts_forward_map() {
        let mut stream = SeedStream::new(19);
        for _ in 0..100 {
            let rho = random_logical(&mut stream);
            let rho16 = DensityOperator::new(rho.embed()).unwrap();
            let [ez, ex, ey] = expectations(&rho16).unwrap();
            assert!(reconstruct(ez, ex, ey).max_abs_diff(&rho) < 1e-12);
        }
    }

    #[test]
    fn imaginary_logical_phase_is_recovered() {
        let q = LogicalQubit::new(C64::from(0.6), c(0.0, 0.8)).unwrap();
        let [ez, ex, ey] = expectations(&encode_logical(&q)).unwrap();
        let r = reconstruct(ez, ex, ey);
        assert!(r.max_abs_diff(&LogicalDensityMatrix::from_qubit(&q)) < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let p = LogicalDensityMatrix::from_qubit(&LogicalQubit::psi_l());
        assert!(project_physical(&p).max_abs_diff(&p) < 1e-12);

        let bad =
            LogicalDensityMatrix::new([[C64::from(1.1), ZERO], [ZERO, C64::from(-0.1)]]).unwrap();
        let fixed = project_physical(&bad);
        assert!(
            fixed.max_abs_diff(&LogicalDensityMatrix::from_qubit(&LogicalQubit::zero())) < 1e-12
        );
        assert!(project_physical(&fixed).max_abs_diff(&fixed) < 1e-12);
    }

    #[test]
    fn fidelity_examples() {
        let p0 = LogicalDensityMatrix::from_qubit(&LogicalQubit::zero());
        let p1 = LogicalDensityMatrix::from_qubit(&LogicalQubit::one());
        assert!((fidelity(&p0, &p0).unwrap() - 1.0).abs() < 1e-10);
        assert!(fidelity(&p0, &p1).unwrap().abs() < 1e-10);
        let bad =
            LogicalDensityMatrix::new([[C64::from(1.1), ZERO], [ZERO, C64::from(-0.1)]]).unwrap();
        assert!(matches!(
            fidelity(&bad, &p0),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn fidelity_symmetry_and_pure_state_formula() {
        let mut stream = SeedStream::new(20);
        for _ in 0..100 {
            let rho = random_logical(&mut stream);
            let sigma = random_logical(&mut stream);
            let f = fidelity(&rho, &sigma).unwrap();
            assert!((f - fidelity(&sigma, &rho).unwrap()).abs() < 1e-10);

            let q = LogicalQubit::random(&mut stream);
            let pure = LogicalDensityMatrix::from_qubit(&q);
            let v = Ket::new(vec![q.c0(), q.c1()]).unwrap();
            let overlap = rho.to_operator().apply(&v).unwrap();
            let direct = v.inner(&overlap).unwrap().re.sqrt();
            assert!((fidelity(&rho, &pure).unwrap() - direct).abs() < 1e-10);

            let same = fidelity(&rho, &rho).unwrap();
            assert!((same - 1.0).abs() < 1e-9 && rho.trace_distance(&rho) < 1e-12);
        }
    }

    #[test]
    fn exact_pipeline_round_trip_and_invariance() {
        let mut stream = SeedStream::new(21);
        for _ in 0..50 {
            let q = LogicalQubit::random(&mut stream);
            let want = LogicalDensityMatrix::from_qubit(&q);
            let s = encode_logical(&q);
            let r = tomography_pipeline(&s, None).unwrap();
            assert!(r.rho.trace_distance(&want) < 1e-10);
            assert!(r.residual.abs() < 1e-12);

            let u4 = collective(&haar_u2(&mut stream), 4).unwrap();
            let noisy = tomography_pipeline(&u4.apply(&s).unwrap(), None).unwrap();
            assert!(noisy.rho.trace_distance(&r.rho) < 1e-10);
        }
    }

    #[test]
    fn sampled_pipeline_converges() {
        let s = psi_l();
        let exact = tomography_pipeline(&s, None).unwrap();
        let sampled = tomography_pipeline(
            &s,
            Some(Sampling {
                total_expected: 1e5,
                seed: 5,
            }),
        )
        .unwrap();
        assert!(sampled.rho.trace_distance(&exact.rho) < 0.02);
        assert!(sampled.counts.is_some());
    }

    #[test]
    fn sampled_projection_is_psd() {
        for seed in 0..100 {
            let r = tomography_pipeline(
                &phi0(),
                Some(Sampling {
                    total_expected: 50.0,
                    seed,
                }),
            )
            .unwrap();
            assert!(r.rho.eigenvalues()[0] >= -1e-12);
        }
    }

    #[test]
    fn residual_reports_leakage() {
        let rho = crate::measurement::admix_visibility(&phi0(), 0.5).unwrap();
        let r = tomography_pipeline(&rho, None).unwrap();
        assert!((r.residual - 0.5 * 14.0 / 16.0).abs() < 1e-12);
    }
}
