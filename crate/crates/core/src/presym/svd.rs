//! Full singular value decomposition on nalgebra matrices, computed by faer.

use nalgebra::{DMatrix, DVector};

pub(crate) struct Svd {
    /// `m × m`.
    pub u: DMatrix<f64>,
    /// `min(m, n)` values in decreasing order.
    pub s: DVector<f64>,
    /// `n × n`.
    pub v: DMatrix<f64>,
}

impl Svd {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Self { u: DMatrix::identity(m, m), s: DVector::zeros(0), v: DMatrix::identity(n, n) };
        }
        let f = faer::Mat::from_fn(m, n, |i, j| a[(i, j)]);
        let svd = f.svd().expect("SVD of a finite matrix converges");
        let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
        Self {
            u: DMatrix::from_fn(m, m, |i, j| u[(i, j)]),
            s: DVector::from_fn(m.min(n), |i, _| s[i]),
            v: DMatrix::from_fn(n, n, |i, j| v[(i, j)]),
        }
    }

    pub fn max(&self) -> f64 {
        self.s.iter().copied().fold(0.0, f64::max)
    }

    /// Number of singular values above `cut`.
    pub fn rank(&self, cut: f64) -> usize {
        self.s.iter().filter(|&&s| s > cut).count()
    }

    /// `Σ_{σ_i > cut} v_i σ_i⁻¹ u_iᵀ`.
    pub fn pseudo_inverse(&self, cut: f64) -> DMatrix<f64> {
        let (m, n) = (self.u.nrows(), self.v.nrows());
        let mut out = DMatrix::zeros(n, m);
        for i in 0..self.rank(cut) {
            out += self.v.column(i) * self.u.column(i).transpose() / self.s[i];
        }
        out
    }

    /// Minimum-norm least-squares solution of `A x = b`.
    pub fn solve(&self, b: &DVector<f64>, cut: f64) -> DVector<f64> {
        self.pseudo_inverse(cut) * b
    }
}
