//! Brute-force constraint chain by Gaussian elimination on the accumulated
//! constraint rows, independent of the SVD-based algorithm in the core.

use nalgebra::{DMatrix, DVector};
use presym_core::AffineSubspace;

/// Reduced row echelon form of the first `ncols` columns of `m`, in place;
/// returns the pivot columns.
fn rref(m: &mut DMatrix<f64>, ncols: usize, tol: f64) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        if row == m.nrows() {
            break;
        }
        let (best, val) =
            (row..m.nrows()).map(|r| (r, m[(r, col)].abs())).fold((row, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        if val <= tol {
            continue;
        }
        m.swap_rows(row, best);
        let p = m[(row, col)];
        for c in 0..m.ncols() {
            m[(row, c)] /= p;
        }
        for r in 0..m.nrows() {
            if r != row {
                let f = m[(r, col)];
                if f != 0.0 {
                    for c in 0..m.ncols() {
                        m[(r, c)] -= f * m[(row, c)];
                    }
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    pivots
}

fn null_space(c: &DMatrix<f64>, n: usize, tol: f64) -> DMatrix<f64> {
    let mut m = c.clone();
    let pivots = rref(&mut m, n, tol);
    let free: Vec<usize> = (0..n).filter(|j| !pivots.contains(j)).collect();
    let mut out = DMatrix::zeros(n, free.len());
    for (k, &f) in free.iter().enumerate() {
        out[(f, k)] = 1.0;
        for (r, &p) in pivots.iter().enumerate() {
            out[(p, k)] = -m[(r, f)];
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct OracleChain {
    /// `M₀ ⊋ M₁ ⊋ …`, ending in the empty set when inconsistent.
    pub chain: Vec<AffineSubspace>,
    pub consistent: bool,
}

impl OracleChain {
    pub fn dims(&self) -> Vec<usize> {
        self.chain.iter().map(|c| c.dim()).collect()
    }
}

/// Iterates `M_{k+1} = {x ∈ M_k : Zᵀ(Ax + b) = 0 for Z ∈ ker ω|_{M_k}}`
/// for `H = ½xᵀAx + bᵀx`.
pub fn oracle_chain(omega: &DMatrix<f64>, a: &DMatrix<f64>, b: &DVector<f64>) -> OracleChain {
    let n = omega.nrows();
    let tol = 1e-9 * (1.0 + omega.amax() + a.amax() + b.amax());
    let mut rows = DMatrix::<f64>::zeros(0, n + 1);
    let mut chain = vec![AffineSubspace::whole(n)];
    loop {
        let mut aug = rows.clone();
        let pivots = rref(&mut aug, n, tol);
        if (pivots.len()..aug.nrows()).any(|r| aug[(r, n)].abs() > tol) {
            chain.push(AffineSubspace::empty_set(n));
            return OracleChain { chain, consistent: false };
        }
        let basis = null_space(&aug.columns(0, n).into_owned(), n, tol);
        let mut x0 = DVector::zeros(n);
        for (r, &p) in pivots.iter().enumerate() {
            x0[p] = aug[(r, n)];
        }
        let q = if basis.ncols() > 0 { basis.clone().qr().q() } else { basis.clone() };
        let current = AffineSubspace::from_parts(x0, q);
        if chain.last().map(|c| c.dim()) != Some(current.dim()) {
            chain.push(current);
        }
        let restricted = basis.transpose() * omega * &basis;
        let kern = &basis * null_space(&restricted, basis.ncols(), tol);
        let new_c = kern.transpose() * a;
        let new_d = -(kern.transpose() * b);
        let mut stacked = DMatrix::zeros(rows.nrows() + new_c.nrows(), n + 1);
        stacked.view_mut((0, 0), (rows.nrows(), n + 1)).copy_from(&rows);
        stacked.view_mut((rows.nrows(), 0), (new_c.nrows(), n)).copy_from(&new_c);
        stacked.view_mut((rows.nrows(), n), (new_c.nrows(), 1)).copy_from(&new_d);
        let mut probe = stacked.clone();
        let new_rank = rref(&mut probe, n, tol).len();
        let inconsistent = (new_rank..probe.nrows()).any(|r| probe[(r, n)].abs() > tol);
        if new_rank == pivots.len() && !inconsistent {
            return OracleChain { chain, consistent: true };
        }
        rows = stacked;
    }
}
