//! Extended so(3) momentum map of the Maxwell field.
//!
//! For an axis `ξ` the orbital field is `v = x × ξ`, scalars move by
//! `Rf = v·∇f` and vectors by `Df = (v·∇)f + ξ × f`. The extended charge is
//! `J_ξ = ∫ p·Dã − ∫ ∇ν·∇(Rχ)`.

use super::{
    dirichlet_pairing, em_extended_form, em_propagate, ConstrainedEmState, EmTangent, ExtendedEmState,
};
use crate::error::{Error, Result};
use crate::field::spectral::{
    divergence, gradient, inner_vec, inverse_laplacian_projected, laplacian, transverse_part, Spectrum,
};
use crate::field::{ScalarField, VectorField3};
use crate::kg::relative_drift;

/// Support requirement for coordinate-weighted charges: every block must be
/// below `tol·peak` outside the central cube of side `fraction·L`, with
/// `peak` the largest value over all blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    pub fraction: f64,
    pub tol: f64,
}

impl Default for Localization {
    fn default() -> Self {
        Self { fraction: 0.6, tol: 1e-6 }
    }
}

impl Localization {
    pub fn check_fields(&self, scalars: &[&ScalarField], vectors: &[&VectorField3]) -> Result<()> {
        let peak = scalars.iter().map(|f| f.max_abs()).chain(vectors.iter().map(|v| v.max_abs())).fold(0.0, f64::max);
        let outside = scalars
            .iter()
            .map(|f| f.max_abs_outside(self.fraction))
            .chain(vectors.iter().map(|v| v.max_abs_outside(self.fraction)))
            .fold(0.0, f64::max);
        if outside > self.tol * peak {
            return Err(Error::NotLocalized { outside: outside / peak });
        }
        Ok(())
    }

    /// Potentials `χ, ν` are zero-mean and hence carry a constant offset;
    /// they are checked through `∂χ` and `μ = ∇ν`.
    pub fn check(&self, s: &ExtendedEmState) -> Result<()> {
        let dchi = gradient(&s.split.chi)?;
        let mu = gradient(&s.nu)?;
        self.check_fields(&[], &[&s.split.a_t, &s.split.p, &dchi, &mu])
    }
}

fn orbital_field(xi: [f64; 3], x: [f64; 3]) -> [f64; 3] {
    [x[1] * xi[2] - x[2] * xi[1], x[2] * xi[0] - x[0] * xi[2], x[0] * xi[1] - x[1] * xi[0]]
}

fn cross(a: [f64; 3], f: &VectorField3) -> VectorField3 {
    let [f1, f2, f3] = &f.components;
    VectorField3 {
        components: [
            f3.scale(a[1]).axpy(-a[2], f2),
            f1.scale(a[2]).axpy(-a[0], f3),
            f2.scale(a[0]).axpy(-a[1], f1),
        ],
    }
}

fn weight(xi: [f64; 3], f: &ScalarField, i: usize) -> ScalarField {
    let g = *f.grid();
    ScalarField::from_fn(g, |x| orbital_field(xi, x)[i]).mul(f)
}

/// `(x × ξ)·grad` from a precomputed gradient.
fn orbital_from_gradient(xi: [f64; 3], grad: &VectorField3) -> ScalarField {
    let mut out = ScalarField::zeros(*grad.grid());
    for i in 0..3 {
        // Component i of x × ξ does not depend on ξ_i.
        if xi[(i + 1) % 3] != 0.0 || xi[(i + 2) % 3] != 0.0 {
            out = out.axpy(1.0, &weight(xi, grad.get(i + 1), i));
        }
    }
    out
}

/// `Rf = (x × ξ)·∇f`.
pub(crate) fn orbital(xi: [f64; 3], f: &ScalarField) -> Result<ScalarField> {
    Ok(orbital_from_gradient(xi, &gradient(f)?))
}

/// Grid adjoint of [`orbital`]: `−div(v f)`.
pub(crate) fn orbital_adjoint(xi: [f64; 3], f: &ScalarField) -> Result<ScalarField> {
    let vf = VectorField3::new(weight(xi, f, 0), weight(xi, f, 1), weight(xi, f, 2))?;
    Ok(divergence(&vf)?.scale(-1.0))
}

/// Gradients of the three components of `f`.
fn component_gradients(f: &VectorField3) -> Result<[VectorField3; 3]> {
    Ok([gradient(f.get(1))?, gradient(f.get(2))?, gradient(f.get(3))?])
}

fn rotate_from_gradients(xi: [f64; 3], f: &VectorField3, grads: &[VectorField3; 3]) -> Result<VectorField3> {
    let orb = VectorField3::new(
        orbital_from_gradient(xi, &grads[0]),
        orbital_from_gradient(xi, &grads[1]),
        orbital_from_gradient(xi, &grads[2]),
    )?;
    Ok(&orb + &cross(xi, f))
}

/// `Df = (v·∇)f + ξ × f`.
pub(crate) fn rotate_vector(xi: [f64; 3], f: &VectorField3) -> Result<VectorField3> {
    rotate_from_gradients(xi, f, &component_gradients(f)?)
}

/// Grid adjoint of [`rotate_vector`].
pub(crate) fn rotate_vector_adjoint(xi: [f64; 3], f: &VectorField3) -> Result<VectorField3> {
    let [f1, f2, f3] = &f.components;
    let orb = VectorField3::new(orbital_adjoint(xi, f1)?, orbital_adjoint(xi, f2)?, orbital_adjoint(xi, f3)?)?;
    Ok(&orb - &cross(xi, f))
}

fn killing_unchecked(xi: [f64; 3], s: &ExtendedEmState) -> Result<EmTangent> {
    let sp = &s.split;
    Ok(EmTangent {
        xa_t: transverse_part(&rotate_vector(xi, &sp.a_t)?)?,
        xchi: orbital(xi, &sp.chi)?,
        xp: transverse_part(&rotate_vector(xi, &sp.p)?)?,
        xnu: orbital(xi, &s.nu)?,
    })
}

/// Infinitesimal rotation `(P_T Dã, Rχ, P_T Dp, Rν)` of an extended state.
pub fn em_rotation_killing(xi: [f64; 3], s: &ExtendedEmState, loc: &Localization) -> Result<EmTangent> {
    loc.check(s)?;
    killing_unchecked(xi, s)
}

fn charge_unchecked(xi: [f64; 3], s: &ExtendedEmState) -> Result<f64> {
    let sp = &s.split;
    let base = inner_vec(&sp.p, &rotate_vector(xi, &sp.a_t)?);
    Ok(base - dirichlet_pairing(&s.nu, &orbital(xi, &sp.chi)?)?)
}

/// `J_ξ = ∫ p·Dã − ∫ ∇ν·∇(Rχ)`.
pub fn em_rotation_charge(xi: [f64; 3], s: &ExtendedEmState, loc: &Localization) -> Result<f64> {
    loc.check(s)?;
    charge_unchecked(xi, s)
}

/// Angular momentum `∫ p·Da` on the unsplit constrained state.
pub fn em_base_angular_momentum(xi: [f64; 3], s: &ConstrainedEmState, loc: &Localization) -> Result<f64> {
    let st = s.state();
    loc.check_fields(&[], &[&st.a, &st.p])?;
    Ok(inner_vec(&st.p, &rotate_vector(xi, &st.a)?))
}

/// Hamiltonian vector field of `J_ξ` for the extended form, built from grid
/// adjoints: `(P_T Dã, Rχ, −P_T Dᵀp, −Δ⁻¹RᵀΔν)`.
pub fn em_hamiltonian_vf(xi: [f64; 3], s: &ExtendedEmState) -> Result<EmTangent> {
    let sp = &s.split;
    let lap_nu = laplacian(&s.nu)?;
    let xnu = inverse_laplacian_projected(&Spectrum::of(&orbital_adjoint(xi, &lap_nu)?))?.scale(-1.0);
    Ok(EmTangent {
        xa_t: transverse_part(&rotate_vector(xi, &sp.a_t)?)?,
        xchi: orbital(xi, &sp.chi)?,
        xp: transverse_part(&rotate_vector_adjoint(xi, &sp.p)?)?.scale(-1.0),
        xnu,
    })
}

/// `(Ω^𝒫(𝕏_ξ, Y), dJ_ξ(Y))`, the latter by central differences of step `eps`.
pub fn em_defining_relation(xi: [f64; 3], s: &ExtendedEmState, y: &EmTangent, eps: f64) -> Result<(f64, f64)> {
    let x = em_hamiltonian_vf(xi, s)?;
    let omega = em_extended_form(&x, y)?;
    let here = EmTangent::of_state(s);
    let plus = here.axpy(eps, y).as_state(s.split.x0);
    let minus = here.axpy(-eps, y).as_state(s.split.x0);
    let dj = (charge_unchecked(xi, &plus)? - charge_unchecked(xi, &minus)?) / (2.0 * eps);
    Ok((omega, dj))
}

/// `{J_ξ, J_ζ} = Ω^𝒫(𝕏_ξ, 𝕏_ζ)`.
pub fn em_charge_bracket(xi: [f64; 3], zeta: [f64; 3], s: &ExtendedEmState) -> Result<f64> {
    em_extended_form(&em_hamiltonian_vf(xi, s)?, &em_hamiltonian_vf(zeta, s)?)
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

const AXES: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Cauchy-Schwarz bound on `|J_ξ|` over the unit axes.
pub fn em_charge_scale(s: &ExtendedEmState) -> Result<f64> {
    let sp = &s.split;
    let gnu = gradient(&s.nu)?.norm();
    AXES.iter().try_fold(0.0f64, |m, &e| {
        let base = sp.p.norm() * rotate_vector(e, &sp.a_t)?.norm();
        let ext = gnu * gradient(&orbital(e, &sp.chi)?)?.norm();
        Ok(m.max(base + ext))
    })
}

/// `max |{J_ξ, J_ζ} − J_{ξ×ζ}| / scale` over pairs of unit axes.
///
/// The bracket of charges reproduces the cross product, i.e. the matrix
/// commutator of the hat maps.
pub fn em_so3_closure_residual(s: &ExtendedEmState) -> Result<f64> {
    let scale = em_charge_scale(s)?;
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let (a, b) = (AXES[i], AXES[j]);
            let lhs = em_charge_bracket(a, b, s)?;
            let rhs = charge_unchecked(cross3(a, b), s)?;
            worst = worst.max((lhs - rhs).abs());
        }
    }
    Ok(if scale == 0.0 { worst } else { worst / scale })
}

/// `Ω^𝒫(AY, Z) + Ω^𝒫(Y, AZ)` for the linear Killing map `A`; vanishes when
/// the rotation is infinitesimally symplectic.
pub fn em_canonicity_residual(xi: [f64; 3], y: &EmTangent, z: &EmTangent) -> Result<f64> {
    let ay = killing_unchecked(xi, &y.as_state(0.0))?;
    let az = killing_unchecked(xi, &z.as_state(0.0))?;
    Ok(em_extended_form(&ay, z)? + em_extended_form(y, &az)?)
}

/// Base angular momenta on the slices `x⁰ + i·dt`, `i = 0..=steps`.
pub fn em_charge_trajectory(
    axes: &[[f64; 3]],
    s: &ConstrainedEmState,
    dt: f64,
    steps: usize,
    loc: &Localization,
) -> Result<Vec<(f64, Vec<f64>)>> {
    em_charge_trajectory_with(axes, s, dt, steps, loc, |_| Ok(()))
}

/// As [`em_charge_trajectory`], calling `on_slice` on every propagated state.
pub fn em_charge_trajectory_with(
    axes: &[[f64; 3]],
    s: &ConstrainedEmState,
    dt: f64,
    steps: usize,
    loc: &Localization,
    mut on_slice: impl FnMut(&ConstrainedEmState) -> Result<()>,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let st = s.state();
    loc.check_fields(&[], &[&st.a, &st.p])?;
    let mut out = Vec::with_capacity(steps + 1);
    let mut cur = s.clone();
    for i in 0..=steps {
        if i > 0 {
            cur = em_propagate(&cur, dt)?;
        }
        on_slice(&cur)?;
        let c = cur.state();
        let grads = component_gradients(&c.a)?;
        let vals = axes
            .iter()
            .map(|&xi| Ok(inner_vec(&c.p, &rotate_from_gradients(xi, &c.a, &grads)?)))
            .collect::<Result<_>>()?;
        out.push((c.x0, vals));
    }
    Ok(out)
}

/// `max_ξ ‖p‖‖D_ξ a‖` over the unit axes; sets the drift floor.
pub fn em_angular_momentum_scale(s: &ConstrainedEmState) -> Result<f64> {
    let st = s.state();
    let grads = component_gradients(&st.a)?;
    AXES.iter().try_fold(0.0f64, |m, &e| Ok(m.max(rotate_from_gradients(e, &st.a, &grads)?.norm() * st.p.norm())))
}

/// Relative drift of the base angular momentum about `xi`, with floor
/// `1e-12·scale` as for the Klein-Gordon charges.
pub fn em_noether_drift(
    xi: [f64; 3],
    s: &ConstrainedEmState,
    dt: f64,
    steps: usize,
    loc: &Localization,
) -> Result<f64> {
    let traj = em_charge_trajectory(&[xi], s, dt, steps, loc)?;
    let scale = em_angular_momentum_scale(s)?;
    Ok(relative_drift(traj.iter().map(|(_, v)| v[0]), 1e-12 * scale))
}
