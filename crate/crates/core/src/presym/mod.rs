//! Finite-dimensional presymplectic linear algebra.

mod svd;
mod types;

pub use types::{AffineSubspace, AntisymmetricForm, ExtendedSymplecticSpace, PcaResult, QuadraticHamiltonian};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use svd::Svd;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Splits the right singular vectors of `m` into (range, null) by the
/// cutoff `tol·max(σ_max, scale)`; `scale` bounds the size of `m` for
/// matrices derived from a larger problem, so that pure rounding noise is
/// not mistaken for rank.
fn split_singular(m: &DMatrix<f64>, tol: f64, scale: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = m.ncols();
    let svd = Svd::new(m);
    let smax = svd.max();
    let r = if smax > 0.0 { svd.rank(tol * smax.max(scale)) } else { 0 };
    (svd.v.columns(0, r).into_owned(), svd.v.columns(r, n - r).into_owned())
}

/// Characteristic set `{Z : ω(Z, ·) = 0}` as a linear subspace.
pub fn characteristic_kernel(omega: &AntisymmetricForm, tol: f64) -> AffineSubspace {
    let (_, null) = split_singular(omega.matrix(), tol, 0.0);
    AffineSubspace::from_parts(DVector::zeros(omega.dim()), null)
}

fn check_dims(omega: &AntisymmetricForm, h: &QuadraticHamiltonian) -> Result<()> {
    if omega.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: h.dim() });
    }
    Ok(())
}

/// Presymplectic constraint algorithm for a linear system.
///
/// Each `M_k` lives in an orthonormal chart; the kernel of the restricted form
/// produces linear constraints `Zᵀ∇H = 0` which are solved in minimum-norm
/// form to obtain the next chart.
pub fn pca_run(
    omega: &AntisymmetricForm,
    h: &QuadraticHamiltonian,
    tol: f64,
    max_iter: usize,
) -> Result<PcaResult> {
    check_dims(omega, h)?;
    let n = omega.dim();
    let mut offset = DVector::zeros(n);
    let mut basis = DMatrix::identity(n, n);
    let mut chain = vec![AffineSubspace::whole(n)];
    let scale = h.a.norm() + h.b.norm();
    let omega_scale = Svd::new(omega.matrix()).max();
    let a_scale = h.a.norm();

    for _ in 0..max_iter {
        let om_k = omega.restrict(&basis);
        let (_, kern) = split_singular(om_k.matrix(), tol, omega_scale);
        let h_k = h.restrict(&offset, &basis);
        // Constraints on chart coordinates y: Kᵀ(A_k y + b_k) = 0.
        let c = kern.transpose() * &h_k.a;
        let d = -(kern.transpose() * &h_k.b);
        let (range, null) = split_singular(&c, tol, a_scale);
        let stabilized = null.ncols() == basis.ncols();

        let y = if range.ncols() == 0 {
            DVector::zeros(basis.ncols())
        } else {
            let svd = Svd::new(&c);
            svd.solve(&d, tol * svd.max().max(a_scale))
        };
        let residual = (&c * &y - &d).norm();
        let res_tol = tol * (scale * (1.0 + offset.norm() + y.norm()) + d.norm()).max(f64::MIN_POSITIVE);
        if residual > res_tol {
            chain.push(AffineSubspace::empty_set(n));
            let steps = chain.len() - 1;
            return Ok(PcaResult {
                chain,
                final_form: AntisymmetricForm::zeros(0),
                final_kernel_dim: 0,
                consistent: false,
                steps,
            });
        }
        if stabilized {
            let final_kernel_dim = kern.ncols();
            let steps = chain.len() - 1;
            return Ok(PcaResult { chain, final_form: om_k, final_kernel_dim, consistent: true, steps });
        }
        offset = &offset + &basis * y;
        basis = &basis * null;
        // Re-orthonormalize to keep the chart exact across iterations.
        if basis.ncols() > 0 {
            basis = basis.qr().q();
        }
        chain.push(AffineSubspace::from_parts(offset.clone(), basis.clone()));
    }
    Err(Error::NonStabilized { max_iter })
}

/// Minimum-norm solution Γ of `ω Γ = ∇H(x)`.
pub fn hamiltonian_vector_field(
    omega: &AntisymmetricForm,
    h: &QuadraticHamiltonian,
    x: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>> {
    check_dims(omega, h)?;
    if x.len() != omega.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: x.len() });
    }
    let g = h.gradient(x);
    solve_min_norm(omega, &g, tol)
}

fn solve_min_norm(omega: &AntisymmetricForm, g: &DVector<f64>, tol: f64) -> Result<DVector<f64>> {
    let n = omega.dim();
    if n == 0 {
        return Ok(DVector::zeros(0));
    }
    let svd = Svd::new(omega.matrix());
    let smax = svd.max();
    let gamma = if smax > 0.0 {
        svd.solve(g, tol * smax)
    } else {
        DVector::zeros(n)
    };
    let residual = (omega.matrix() * &gamma - g).norm();
    let bound = tol * g.norm().max(f64::MIN_POSITIVE);
    if residual > bound && residual > 0.0 {
        return Err(Error::NotAdmissible { residual, tol: bound });
    }
    Ok(gamma)
}

/// `{F, G}(x) = ω(X_F, X_G) = ∇F(x)ᵀ X_G`.
pub fn poisson_bracket_lin(
    omega: &AntisymmetricForm,
    f: &QuadraticHamiltonian,
    g: &QuadraticHamiltonian,
    x: &DVector<f64>,
    tol: f64,
) -> Result<f64> {
    let xf = hamiltonian_vector_field(omega, f, x, tol)?;
    let xg = hamiltonian_vector_field(omega, g, x, tol)?;
    Ok(omega.eval(&xf, &xg))
}

/// The bracket `{F, G}` as a quadratic function, for nondegenerate ω.
///
/// With `ω⁺` the pseudo-inverse, `{F,G}(x) = (A_F x + b_F)ᵀ ω⁺ (A_G x + b_G)`.
pub fn poisson_bracket_quadratic(
    omega: &AntisymmetricForm,
    f: &QuadraticHamiltonian,
    g: &QuadraticHamiltonian,
    tol: f64,
) -> Result<QuadraticHamiltonian> {
    check_dims(omega, f)?;
    check_dims(omega, g)?;
    let n = omega.dim();
    let svd = Svd::new(omega.matrix());
    let smax = svd.max();
    let pinv = if smax > 0.0 {
        svd.pseudo_inverse(tol * smax)
    } else {
        DMatrix::zeros(n, n)
    };
    let m = f.a.transpose() * &pinv * &g.a;
    let a = &m + m.transpose();
    let b = f.a.transpose() * &pinv * &g.b + g.a.transpose() * pinv.transpose() * &f.b;
    let c = f.b.dot(&(&pinv * &g.b));
    QuadraticHamiltonian::new(a, b, c)
}

/// Coisotropic extension with form `[ω|_W, 0, 0; 0, 0, I; 0, −I, 0]` in
/// coordinates `(w, Z, μ)`, where `W ⊕ K` is the singular-vector split.
pub fn coisotropic_extend(omega: &AntisymmetricForm, tol: f64) -> ExtendedSymplecticSpace {
    let (range, null) = split_singular(omega.matrix(), tol, 0.0);
    let n = omega.dim();
    let k = null.ncols();
    let r = range.ncols();
    let om_w = omega.restrict(&range);
    let mut ext = DMatrix::zeros(n + k, n + k);
    ext.view_mut((0, 0), (r, r)).copy_from(om_w.matrix());
    for i in 0..k {
        ext[(r + i, n + i)] = 1.0;
        ext[(n + i, r + i)] = -1.0;
    }
    ExtendedSymplecticSpace {
        base_dim: n,
        kernel_basis: null,
        complement_basis: range,
        extended_form: AntisymmetricForm::new(ext).expect("square"),
    }
}

/// `⟨J_𝒫(m, μ), e_b⟩ = J_b(m) + ⟨μ, A e_b⟩` for each generator `b`.
///
/// `connection` is `k × g`, mapping generator coefficients to kernel
/// coordinates.
pub fn extend_momentum_lin(
    space: &ExtendedSymplecticSpace,
    js: &[QuadraticHamiltonian],
    connection: &DMatrix<f64>,
    point: &DVector<f64>,
) -> Result<Vec<f64>> {
    let k = space.kernel_dim();
    if connection.nrows() != k {
        return Err(Error::DimensionMismatch { expected: k, found: connection.nrows() });
    }
    if connection.ncols() != js.len() {
        return Err(Error::DimensionMismatch { expected: js.len(), found: connection.ncols() });
    }
    let x = space.base_point(point)?;
    let mu = space.fibre(point);
    js.iter()
        .enumerate()
        .map(|(b, j)| {
            if j.dim() != space.base_dim {
                return Err(Error::DimensionMismatch { expected: space.base_dim, found: j.dim() });
            }
            Ok(j.eval(&x) + mu.dot(&connection.column(b)))
        })
        .collect()
}
