//! Dense complex linear algebra for small qubit registers.
//!
//! Everything here is sized for at most four qubits (dimension 16). Basis
//! index convention: the first tensor factor owns the most significant bit,
//! so for photons `a, b, c, d` the index is `8a + 4b + 2c + d`, with
//! `0 = H` and `1 = V`.

use std::fmt;
use std::ops::Mul;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for "normalized" constructors.
pub const NORM_TOL: f64 = 1e-12;
/// Tolerance for unitarity and Hermiticity checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL` are clipped to zero when a PSD input is expected.
pub const PSD_TOL: f64 = 1e-9;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::BadDimension(dim));
    }
    Ok(())
}

/// A state vector over `log2(dim)` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Ket(DVector<C64>);

impl Ket {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if amplitudes
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        Ok(Self(DVector::from_vec(amplitudes)))
    }

    /// Builds a ket and rescales it to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let mut ket = Self::new(amplitudes)?;
        let n = ket.norm_sqr();
        if n == 0.0 {
            return Err(Error::NotNormalized { norm_sqr: 0.0 });
        }
        ket.0 /= C64::from(n.sqrt());
        Ok(ket)
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| C64::from(x)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} outside dimension {dim}"
            )));
        }
        let mut v = DVector::zeros(dim);
        v[index] = ONE;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.0[index]
    }

    pub fn amplitudes(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<C64> {
        &self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    pub fn ensure_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                norm_sqr: self.norm_sqr(),
            })
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.0.dotc(&other.0))
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn overlap(&self, other: &Ket) -> Result<f64> {
        self.inner(other).map(|z| z.norm())
    }

    pub fn scale(&self, factor: C64) -> Ket {
        Ket(&self.0 * factor)
    }

    pub fn add(&self, other: &Ket) -> Result<Ket> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Ket(&self.0 + &other.0))
    }

    pub fn renormalized(&self) -> Result<Ket> {
        Ket::normalized(self.0.iter().copied().collect())
    }

    pub fn tensor(&self, other: &Ket) -> Ket {
        Ket(self.0.kronecker(&other.0))
    }

    /// `|self><self|`.
    pub fn projector(&self) -> Operator {
        Operator(&self.0 * self.0.adjoint())
    }

    /// Exchanges two qubit positions (0 is the most significant).
    pub fn swap_qubits(&self, i: usize, j: usize) -> Result<Ket> {
        let n = self.num_qubits();
        if i >= n || j >= n {
            return Err(Error::InvalidArgument(format!(
                "qubit index out of range for {n} qubits"
            )));
        }
        let bi = n - 1 - i;
        let bj = n - 1 - j;
        let mut out = DVector::zeros(self.dim());
        for (idx, amp) in self.0.iter().enumerate() {
            let x = (idx >> bi) & 1;
            let y = (idx >> bj) & 1;
            let mut swapped = idx & !(1 << bi) & !(1 << bj);
            swapped |= (x << bj) | (y << bi);
            out[swapped] = *amp;
        }
        Ok(Ket(out))
    }

    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// A square complex matrix whose dimension is a power of two.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    /// Builds an operator from row-major entries.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Ok(Self(DMatrix::from_row_slice(dim, dim, &entries)))
    }

    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument("operator must be square".into()));
        }
        check_dim(m.nrows())?;
        Ok(Self(m))
    }

    /// 2x2 operator from rows `[[a, b], [c, d]]`.
    pub fn from_2x2(m: [[C64; 2]; 2]) -> Self {
        Self(DMatrix::from_row_slice(
            2,
            2,
            &[m[0][0], m[0][1], m[1][0], m[1][1]],
        ))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self(DMatrix::identity(dim, dim)))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self(DMatrix::zeros(dim, dim)))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        check_dim(values.len())?;
        let d = DVector::from_iterator(values.len(), values.iter().map(|&x| C64::from(x)));
        Ok(Self(DMatrix::from_diagonal(&d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn adjoint(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn tensor(&self, other: &Operator) -> Operator {
        Operator(self.0.kronecker(&other.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn determinant(&self) -> C64 {
        self.0.determinant()
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator(&self.0 * factor)
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 + &other.0))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 - &other.0))
    }

    pub fn matmul(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Operator(&self.0 * &other.0))
    }

    /// `self * |ket>`, without renormalization.
    pub fn apply(&self, ket: &Ket) -> Result<Ket> {
        if self.dim() != ket.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: ket.dim(),
            });
        }
        Ok(Ket(&self.0 * &ket.0))
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise `|m - m^dagger|`.
    pub fn hermitian_deviation(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Largest entrywise `|u^dagger u - 1|`.
    pub fn unitary_deviation(&self) -> f64 {
        let prod = Operator(self.0.adjoint() * &self.0);
        prod.max_abs_diff(&Operator(DMatrix::identity(self.dim(), self.dim())))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation() <= tol
    }

    pub fn ensure_unitary(&self) -> Result<()> {
        let deviation = self.unitary_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
    pub fn herm_eig(&self) -> Result<HermitianEigen> {
        let deviation = self.hermitian_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        // Symmetrize so roundoff in the input cannot leak into the solver.
        let sym = (&self.0 + self.0.adjoint()) * C64::from(0.5);
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order
            .iter()
            .map(|&i| Ket(eig.eigenvectors.column(i).into_owned()))
            .collect();
        Ok(HermitianEigen { values, vectors })
    }

    /// Principal square root of a positive semidefinite operator.
    pub fn sqrt_psd(&self) -> Result<Operator> {
        let eig = self.herm_eig()?;
        if let Some(&min) = eig.values.first() {
            if min < -PSD_TOL {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
        }
        // Eigenvalues at roundoff level are treated as exact zeros, otherwise
        // their square roots (~1e-8) would dominate the error for rank-deficient inputs.
        let scale = eig.values.last().map_or(0.0, |v| v.abs()).max(1.0);
        let floor = 64.0 * f64::EPSILON * scale;
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
            let root = if *lambda <= floor { 0.0 } else { lambda.sqrt() };
            out += (&v.0 * v.0.adjoint()) * C64::from(root);
        }
        Ok(Operator(out))
    }
}

impl Mul for &Operator {
    type Output = Operator;

    /// Panics on mismatched dimensions; use [`Operator::matmul`] for a fallible product.
    fn mul(self, rhs: &Operator) -> Operator {
        assert_eq!(self.dim(), rhs.dim(), "operator dimension mismatch");
        Operator(&self.0 * &rhs.0)
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|col| {
                    let z = self.get(r, col);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Output of [`Operator::herm_eig`]: ascending eigenvalues with orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Ket>,
}

impl HermitianEigen {
    /// `sum_i lambda_i |v_i><v_i|`.
    pub fn reconstruct(&self) -> Operator {
        let dim = self.vectors.first().map_or(1, Ket::dim);
        let mut out = DMatrix::zeros(dim, dim);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            out += (&v.0 * v.0.adjoint()) * C64::from(*lambda);
        }
        Operator(out)
    }
}

/// Kronecker product with the left operand as the most significant factor.
pub trait Tensor {
    fn tensor_with(&self, other: &Self) -> Self;
}

impl Tensor for Ket {
    fn tensor_with(&self, other: &Ket) -> Ket {
        self.tensor(other)
    }
}

impl Tensor for Operator {
    fn tensor_with(&self, other: &Operator) -> Operator {
        self.tensor(other)
    }
}

pub fn tensor<T: Tensor>(a: &T, b: &T) -> T {
    a.tensor_with(b)
}

/// Tensor product of a non-empty sequence, leftmost factor most significant.
pub fn tensor_all<'a, T: Tensor + Clone + 'a>(
    factors: impl IntoIterator<Item = &'a T>,
) -> Option<T> {
    factors.into_iter().fold(None, |acc, f| match acc {
        None => Some(f.clone()),
        Some(a) => Some(a.tensor_with(f)),
    })
}

pub fn adjoint(m: &Operator) -> Operator {
    m.adjoint()
}

pub fn herm_eig(m: &Operator) -> Result<HermitianEigen> {
    m.herm_eig()
}

pub fn matrix_sqrt_psd(m: &Operator) -> Result<Operator> {
    m.sqrt_psd()
}

/// Single-qubit Pauli factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Operator {
        match self {
            Pauli::I => Operator::from_2x2([[ONE, ZERO], [ZERO, ONE]]),
            Pauli::X => Operator::from_2x2([[ZERO, ONE], [ONE, ZERO]]),
            Pauli::Y => Operator::from_2x2([[ZERO, -I], [I, ZERO]]),
            Pauli::Z => Operator::from_2x2([[ONE, ZERO], [ZERO, -ONE]]),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A unit-trace, Hermitian, positive semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(Operator);

impl DensityOperator {
    pub fn new(m: Operator) -> Result<Self> {
        let deviation = m.hermitian_deviation();
        if deviation > UNITARY_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > UNITARY_TOL || trace.im.abs() > UNITARY_TOL {
            return Err(Error::BadTrace { trace: trace.re });
        }
        let eig = m.herm_eig()?;
        if let Some(&min) = eig.values.first() {
            if min < -PSD_TOL {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
        }
        Ok(Self(m))
    }

    pub fn from_ket(ket: &Ket) -> Result<Self> {
        ket.ensure_normalized()?;
        Ok(Self(ket.projector()))
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let id = Operator::identity(dim)?;
        Ok(Self(id.scale(C64::from(1.0 / dim as f64))))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }
}

/// States that can be measured: pure kets and density operators.
pub trait QuantumState {
    fn dim(&self) -> usize;

    /// `Tr(rho * op)`.
    fn expectation_of(&self, op: &Operator) -> Result<C64>;

    /// `<v|rho|v>` for a normalized vector `v`.
    fn projection_probability(&self, v: &Ket) -> Result<f64>;

    fn to_density(&self) -> Result<DensityOperator>;
}

impl QuantumState for Ket {
    fn dim(&self) -> usize {
        Ket::dim(self)
    }

    fn expectation_of(&self, op: &Operator) -> Result<C64> {
        let applied = op.apply(self)?;
        self.inner(&applied)
    }

    fn projection_probability(&self, v: &Ket) -> Result<f64> {
        Ok(v.inner(self)?.norm_sqr())
    }

    fn to_density(&self) -> Result<DensityOperator> {
        DensityOperator::from_ket(self)
    }
}

impl QuantumState for DensityOperator {
    fn dim(&self) -> usize {
        DensityOperator::dim(self)
    }

    fn expectation_of(&self, op: &Operator) -> Result<C64> {
        Ok(self.0.matmul(op)?.trace())
    }

    fn projection_probability(&self, v: &Ket) -> Result<f64> {
        let applied = self.0.apply(v)?;
        Ok(v.inner(&applied)?.re)
    }

    fn to_density(&self) -> Result<DensityOperator> {
        Ok(self.clone())
    }
}
