//! Dense complex operator algebra.
//!
//! Everything else in the crate is built from the three value types defined
//! here: [`OperatorMatrix`], [`PureState`] and [`DensityMatrix`]. Matrices are
//! small (dimension at most a few hundred) and stored densely.

mod expm;
mod state;

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::policy::NumericPolicy;

pub use expm::{mat_exp, mat_exp_matrix};
pub use state::{DensityMatrix, PureState};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// A dense square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    m: CMatrix,
}

impl OperatorMatrix {
    /// Wraps a matrix, rejecting non-square or non-finite input.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { m })
    }

    /// Wraps a matrix that is square by construction.
    pub(crate) fn from_square(m: CMatrix) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        Self { m }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self { m: CMatrix::from_fn(dim, dim, f) }
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self { m: CMatrix::from_diagonal(&d) }
    }

    /// Builds `|row⟩⟨col|` on a space of dimension `dim`.
    pub fn unit(dim: usize, row: usize, col: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(row, col)] = ONE;
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        Self { m: self.m.adjoint() }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `tr(A† B)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { m: &self.m * c }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m - &other.m * &self.m }
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m + &other.m * &self.m }
    }

    /// `‖A − A†‖ / ‖A‖`, zero for the zero matrix.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.norm();
        if n == 0.0 {
            return 0.0;
        }
        (&self.m - self.m.adjoint()).norm() / n
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_deviation() <= NumericPolicy::STANDARD.hermitian_tol
    }

    pub fn verify_hermitian(&self) -> Result<()> {
        let deviation = self.hermitian_deviation();
        if deviation > NumericPolicy::STANDARD.hermitian_tol {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }

    pub fn verify_unitary(&self) -> Result<()> {
        let d = self.dim();
        let deviation = (self.m.adjoint() * &self.m - CMatrix::identity(d, d)).norm();
        if deviation > NumericPolicy::STANDARD.unitary_tol {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(())
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self { m: (&self.m + self.m.adjoint()) * C64::new(0.5, 0.0) }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.m * v
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = CMatrix::identity(self.dim(), self.dim());
        for _ in 0..k {
            out = &out * &self.m;
        }
        Self { m: out }
    }

    /// `V† A V` for an isometry `V` with orthonormal columns.
    pub fn compress(&self, isometry: &CMatrix) -> Self {
        Self { m: isometry.adjoint() * &self.m * isometry }
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: self.dim() });
        }
        Ok(())
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix { m: &self.m + &rhs.m }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix { m: &self.m - &rhs.m }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix { m: &self.m * &rhs.m }
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix { m: -&self.m }
    }
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &OperatorMatrix, b: &OperatorMatrix) -> OperatorMatrix {
    OperatorMatrix { m: a.m.kronecker(&b.m) }
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a OperatorMatrix>) -> OperatorMatrix {
    factors
        .into_iter()
        .fold(OperatorMatrix::identity(1), |acc, f| kron(&acc, f))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigen {
    pub fn reconstruct(&self) -> OperatorMatrix {
        let d = self.eigenvalues.len();
        let lam = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                C64::new(self.eigenvalues[i], 0.0)
            } else {
                ZERO
            }
        });
        OperatorMatrix::from_square(&self.eigenvectors * lam * self.eigenvectors.adjoint())
    }

    /// Columns whose eigenvalue lies within `tol` of `value`.
    pub fn eigenspace(&self, value: f64, tol: f64) -> CMatrix {
        let cols: Vec<usize> = (0..self.eigenvalues.len())
            .filter(|&k| (self.eigenvalues[k] - value).abs() <= tol)
            .collect();
        self.eigenvectors.select_columns(&cols)
    }

    /// `f(A) = V f(Λ) V†` for a complex-valued scalar function.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let scaled = CMatrix::from_fn(self.eigenvectors.nrows(), self.eigenvectors.ncols(), |i, k| {
            self.eigenvectors[(i, k)] * f(self.eigenvalues[k])
        });
        scaled * self.eigenvectors.adjoint()
    }
}

/// Hermitian eigensolver with eigenvalues sorted ascending.
pub fn hermitian_eigen(a: &OperatorMatrix) -> Result<HermitianEigen> {
    a.verify_hermitian()?;
    Ok(hermitian_eigen_unchecked(a.hermitian_part().matrix()))
}

pub(crate) fn hermitian_eigen_unchecked(a: &CMatrix) -> HermitianEigen {
    let d = a.nrows();
    let eig = SymmetricEigen::new(a.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    HermitianEigen {
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        eigenvectors: eig.eigenvectors.select_columns(&order),
    }
}

/// `exp(−i t H) v` for Hermitian `H`, through its eigen-decomposition.
pub fn evolve_hermitian(h: &OperatorMatrix, t: f64, v: &CVector) -> CVector {
    let eig = hermitian_eigen_unchecked(h.matrix());
    let coeffs = eig.eigenvectors.adjoint() * v;
    let phased = CVector::from_fn(coeffs.len(), |k, _| {
        coeffs[k] * C64::from_polar(1.0, -t * eig.eigenvalues[k])
    });
    &eig.eigenvectors * phased
}

/// `exp(−i t H)` for Hermitian `H`.
pub fn unitary_from_hermitian(h: &OperatorMatrix, t: f64) -> OperatorMatrix {
    let eig = hermitian_eigen_unchecked(h.matrix());
    OperatorMatrix::from_square(eig.apply_fn(|x| C64::from_polar(1.0, -t * x)))
}

/// An orthonormal set of vectors stored as the columns of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    pub fn from_orthonormal_columns(basis: CMatrix) -> Self {
        Self { basis }
    }

    pub fn empty(ambient: usize) -> Self {
        Self { basis: CMatrix::zeros(ambient, 0) }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn vectors(&self) -> Vec<PureState> {
        (0..self.dim())
            .map(|k| PureState::from_normalized(self.basis.column(k).into_owned()))
            .collect()
    }

    pub fn projector(&self) -> OperatorMatrix {
        OperatorMatrix::from_square(&self.basis * self.basis.adjoint())
    }

    /// `‖V†V − I‖`.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.dim();
        (self.basis.adjoint() * &self.basis - CMatrix::identity(k, k)).norm()
    }
}

/// Numerical rank and right null space of a (possibly rectangular) matrix.
pub(crate) fn null_space(stacked: &CMatrix, rel_threshold: f64) -> (usize, CMatrix) {
    let n = stacked.ncols();
    // Pad to at least square so the SVD returns a full set of right vectors.
    let padded = if stacked.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (stacked.nrows(), n)).copy_from(stacked);
        p
    } else {
        stacked.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = rel_threshold * smax;
    let null: Vec<usize> = (0..n)
        .filter(|&k| smax == 0.0 || svd.singular_values[k] < cut)
        .collect();
    let basis = CMatrix::from_fn(n, null.len(), |i, c| v_t[(null[c], i)].conj());
    (n - null.len(), basis)
}

/// Orthonormal basis of `⋂ ker L` over the given operators.
///
/// Singular values below `kernel_rel_threshold · σ_max` of the stacked matrix
/// count as zero.
pub fn common_kernel(ops: &[OperatorMatrix]) -> Result<Subspace> {
    let first = ops.first().ok_or(Error::EmptyOperatorList)?;
    let d = first.dim();
    for op in ops {
        op.check_dim(d)?;
    }
    let mut stacked = CMatrix::zeros(d * ops.len(), d);
    for (k, op) in ops.iter().enumerate() {
        stacked.view_mut((k * d, 0), (d, d)).copy_from(op.matrix());
    }
    let (_, basis) = null_space(&stacked, NumericPolicy::STANDARD.kernel_rel_threshold);
    Ok(Subspace::from_orthonormal_columns(basis))
}

/// Modified Gram–Schmidt over the columns of `vectors`, dropping any column
/// whose residual norm falls below `tol`.
pub(crate) fn gram_schmidt(vectors: &CMatrix, tol: f64) -> CMatrix {
    let mut kept: Vec<CVector> = Vec::new();
    for c in 0..vectors.ncols() {
        let mut v = vectors.column(c).into_owned();
        for _ in 0..2 {
            for q in &kept {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let n = v.norm();
        if n > tol {
            kept.push(v / C64::new(n, 0.0));
        }
    }
    if kept.is_empty() {
        return CMatrix::zeros(vectors.nrows(), 0);
    }
    CMatrix::from_columns(&kept)
}
