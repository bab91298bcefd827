use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constant 2-form on ℝⁿ stored as an antisymmetric matrix.
///
/// Pairing convention: `ω(u, v) = (ω u)·v`, so that `ω(X_F, ·) = dF` is the
/// linear system `ω X_F = ∇F`.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricForm {
    entries: DMatrix<f64>,
}

impl AntisymmetricForm {
    /// Antisymmetrizes `m` as `(m − mᵀ)/2`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
        }
        let entries = (&m - m.transpose()) * 0.5;
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: DMatrix::zeros(dim, dim) }
    }

    /// `Σ eᵢ∧eⱼ` with `ω_ij = 1 = −ω_ji` for each listed pair.
    pub fn from_wedges(dim: usize, pairs: &[(usize, usize)]) -> Self {
        let mut m = DMatrix::zeros(dim, dim);
        for &(i, j) in pairs {
            m[(i, j)] += 1.0;
            m[(j, i)] -= 1.0;
        }
        Self { entries: m }
    }

    /// Standard symplectic form on ℝ²ⁿ in coordinates (q₁, p₁, q₂, p₂, …).
    pub fn canonical(pairs: usize) -> Self {
        let wedges: Vec<_> = (0..pairs).map(|k| (2 * k, 2 * k + 1)).collect();
        Self::from_wedges(2 * pairs, &wedges)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn eval(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        (&self.entries * u).dot(v)
    }

    /// Pullback `Bᵀ ω B` to a chart with basis columns `B`.
    pub fn restrict(&self, basis: &DMatrix<f64>) -> Self {
        let r = basis.transpose() * &self.entries * basis;
        Self { entries: (&r - r.transpose()) * 0.5 }
    }

    pub fn singular_values(&self) -> DVector<f64> {
        super::svd::Svd::new(&self.entries).s
    }
}

/// `H(x) = ½ xᵀA x + bᵀx + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: f64,
}

impl QuadraticHamiltonian {
    /// Symmetrizes `a`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        if a.nrows() != a.ncols() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: a.ncols() });
        }
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.len() });
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, b, c })
    }

    pub fn zero(dim: usize) -> Self {
        Self { a: DMatrix::zeros(dim, dim), b: DVector::zeros(dim), c: 0.0 }
    }

    /// The linear observable `x ↦ lᵀx`.
    pub fn linear(l: DVector<f64>) -> Self {
        let n = l.len();
        Self { a: DMatrix::zeros(n, n), b: l, c: 0.0 }
    }

    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut l = DVector::zeros(dim);
        l[i] = 1.0;
        Self::linear(l)
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn eval(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.a * x)) + self.b.dot(x) + self.c
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x + &self.b
    }

    /// Composition with the affine chart `y ↦ offset + basis·y`.
    pub fn restrict(&self, offset: &DVector<f64>, basis: &DMatrix<f64>) -> Self {
        let a = basis.transpose() * &self.a * basis;
        let b = basis.transpose() * self.gradient(offset);
        let c = self.eval(offset);
        Self { a: (&a + a.transpose()) * 0.5, b, c }
    }
}

/// Affine subspace `offset + span(basis)` with orthonormal basis columns.
///
/// `empty` marks the inconsistent outcome of the constraint algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineSubspace {
    pub offset: Vec<f64>,
    /// Column-major `ambient × dim` basis.
    pub basis: Vec<Vec<f64>>,
    pub empty: bool,
}

impl AffineSubspace {
    pub fn from_parts(offset: DVector<f64>, basis: DMatrix<f64>) -> Self {
        let cols = basis.column_iter().map(|c| c.iter().copied().collect()).collect();
        Self { offset: offset.iter().copied().collect(), basis: cols, empty: false }
    }

    pub fn whole(dim: usize) -> Self {
        Self::from_parts(DVector::zeros(dim), DMatrix::identity(dim, dim))
    }

    pub fn empty_set(ambient: usize) -> Self {
        Self { offset: vec![0.0; ambient], basis: Vec::new(), empty: true }
    }

    pub fn ambient_dim(&self) -> usize {
        self.offset.len()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn offset_vec(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.offset)
    }

    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        DMatrix::from_fn(n, self.dim(), |i, j| self.basis[j][i])
    }

    /// Orthogonal projector onto the direction space.
    pub fn projector(&self) -> DMatrix<f64> {
        let b = self.basis_matrix();
        &b * b.transpose()
    }

    /// Canonical offset: the point of the subspace closest to the origin.
    pub fn min_norm_point(&self) -> DVector<f64> {
        let o = self.offset_vec();
        let p = self.projector();
        &o - &p * &o
    }

    /// Max-entry distance between projectors plus distance between the
    /// minimum-norm points.
    pub fn distance(&self, other: &AffineSubspace) -> f64 {
        if self.empty || other.empty {
            return if self.empty == other.empty { 0.0 } else { f64::INFINITY };
        }
        if self.ambient_dim() != other.ambient_dim() || self.dim() != other.dim() {
            return f64::INFINITY;
        }
        let dp = (self.projector() - other.projector()).amax();
        let dof = (self.min_norm_point() - other.min_norm_point()).amax();
        dp.max(dof)
    }

    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        if self.empty {
            return false;
        }
        let d = x - self.offset_vec();
        let r = &d - self.projector() * &d;
        r.norm() <= tol * (1.0 + x.norm())
    }

    pub fn orthonormality_error(&self) -> f64 {
        let b = self.basis_matrix();
        (b.transpose() * &b - DMatrix::identity(self.dim(), self.dim())).amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// `M ⊋ M₁ ⊋ …`; the final entry is the stabilized manifold, or an empty
    /// set when the system is inconsistent.
    pub chain: Vec<AffineSubspace>,
    pub final_form: AntisymmetricForm,
    pub final_kernel_dim: usize,
    pub consistent: bool,
    /// Index `k` of the last entry `M_k` of the chain.
    pub steps: usize,
}

#[derive(Serialize)]
struct ChainEntry<'a> {
    dim: usize,
    offset: &'a [f64],
    basis: &'a [Vec<f64>],
}

#[derive(Serialize)]
struct PcaJson<'a> {
    chain: Vec<ChainEntry<'a>>,
    final_kernel_dim: usize,
    consistent: bool,
}

impl Serialize for PcaResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let chain = self
            .chain
            .iter()
            .map(|c| ChainEntry { dim: c.dim(), offset: &c.offset, basis: &c.basis })
            .collect();
        PcaJson { chain, final_kernel_dim: self.final_kernel_dim, consistent: self.consistent }
            .serialize(s)
    }
}

impl PcaResult {
    pub fn dims(&self) -> Vec<usize> {
        self.chain.iter().map(|c| c.dim()).collect()
    }
}

/// Symplectic extension of `(ℝⁿ, ω)` in coordinates `(w, Z, μ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedSymplecticSpace {
    pub base_dim: usize,
    pub kernel_basis: DMatrix<f64>,
    pub complement_basis: DMatrix<f64>,
    pub extended_form: AntisymmetricForm,
}

impl ExtendedSymplecticSpace {
    pub fn kernel_dim(&self) -> usize {
        self.kernel_basis.ncols()
    }

    pub fn extended_dim(&self) -> usize {
        self.base_dim + self.kernel_dim()
    }

    /// Base point `W w + K Z` of an extended vector `(w, Z, μ)`.
    pub fn base_point(&self, point: &DVector<f64>) -> Result<DVector<f64>> {
        if point.len() != self.extended_dim() {
            return Err(Error::DimensionMismatch { expected: self.extended_dim(), found: point.len() });
        }
        let r = self.complement_basis.ncols();
        let k = self.kernel_dim();
        let w = point.rows(0, r);
        let z = point.rows(r, k);
        Ok(&self.complement_basis * w + &self.kernel_basis * z)
    }

    /// Fibre coordinates μ of an extended vector.
    pub fn fibre(&self, point: &DVector<f64>) -> DVector<f64> {
        point.rows(self.base_dim, self.kernel_dim()).into_owned()
    }

    /// Extended vector `(w, Z, μ)` of a base point with the given fibre value.
    pub fn lift(&self, x: &DVector<f64>, mu: &DVector<f64>) -> DVector<f64> {
        let w = self.complement_basis.transpose() * x;
        let z = self.kernel_basis.transpose() * x;
        let mut out = DVector::zeros(self.extended_dim());
        out.rows_mut(0, w.len()).copy_from(&w);
        out.rows_mut(w.len(), z.len()).copy_from(&z);
        out.rows_mut(self.base_dim, mu.len()).copy_from(mu);
        out
    }
}
