//! Free electrodynamics on the final constraint manifold `∂_k p^k = 0`, its
//! gauge splitting and the coisotropic extension by `μ = ∇ν`.
//!
//! Evolution is in temporal gauge: `∂₀a = p`, `∂₀p = Δa_T`, with the
//! longitudinal part of `a` transported unchanged.

mod rotation;

pub use rotation::{
    em_angular_momentum_scale, em_base_angular_momentum, em_canonicity_residual, em_charge_bracket, em_charge_scale, em_charge_trajectory,
    em_charge_trajectory_with,
    em_defining_relation, em_hamiltonian_vf, em_noether_drift, em_rotation_charge, em_rotation_killing,
    em_so3_closure_residual, Localization,
};

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::spectral::{
    curl, divergence, gradient, helmholtz_decompose, inner, inner_vec, inverse_laplacian_projected, laplacian,
    Spectrum,
};
use crate::field::random::{localized, LocalizedSpec};
use crate::field::{Grid3, ScalarField, VectorField3};
use rand_chacha::ChaCha8Rng;

/// Relative bound on `‖div p‖` for membership in the constraint manifold.
pub const CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct EmState {
    pub x0: f64,
    pub a: VectorField3,
    pub p: VectorField3,
}

impl EmState {
    pub fn new(x0: f64, a: VectorField3, p: VectorField3) -> Result<Self> {
        a.same_grid(&p)?;
        if !a.is_finite() {
            return Err(Error::NonFinite("a".into()));
        }
        if !p.is_finite() {
            return Err(Error::NonFinite("p".into()));
        }
        Ok(Self { x0, a, p })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { x0: 0.0, a: VectorField3::zeros(grid), p: VectorField3::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid3 {
        self.a.grid()
    }
}

/// State with `div p = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedEmState(EmState);

impl ConstrainedEmState {
    pub fn new(s: EmState) -> Result<Self> {
        let r = constraint_residual(&s.p)?;
        if r > CONSTRAINT_TOL {
            return Err(Error::ConstraintViolated(format!("‖div p‖/‖p‖ = {r:.3e}")));
        }
        Ok(Self(s))
    }

    pub fn state(&self) -> &EmState {
        &self.0
    }

    pub fn into_state(self) -> EmState {
        self.0
    }

    pub fn grid(&self) -> &Grid3 {
        self.0.grid()
    }
}

/// `(ã, χ, p)` with `a = ã + ∇χ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitEmState {
    pub x0: f64,
    pub a_t: VectorField3,
    pub chi: ScalarField,
    pub p: VectorField3,
}

impl SplitEmState {
    pub fn grid(&self) -> &Grid3 {
        self.p.grid()
    }

    pub fn recombine(&self) -> Result<ConstrainedEmState> {
        let a = &self.a_t + &gradient(&self.chi)?;
        Ok(ConstrainedEmState(EmState { x0: self.x0, a, p: self.p.clone() }))
    }
}

/// Split state plus fibre coordinate `μ = ∇ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtendedEmState {
    pub split: SplitEmState,
    pub nu: ScalarField,
}

impl ExtendedEmState {
    pub fn mu(&self) -> Result<VectorField3> {
        gradient(&self.nu)
    }

    pub fn restrict(&self) -> SplitEmState {
        self.split.clone()
    }

    pub fn grid(&self) -> &Grid3 {
        self.split.grid()
    }
}

/// Tangent vector `(X_ã, X_χ, X_p, X_ν)` of the extended space.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTangent {
    pub xa_t: VectorField3,
    pub xchi: ScalarField,
    pub xp: VectorField3,
    pub xnu: ScalarField,
}

impl EmTangent {
    pub fn zeros(grid: Grid3) -> Self {
        Self {
            xa_t: VectorField3::zeros(grid),
            xchi: ScalarField::zeros(grid),
            xp: VectorField3::zeros(grid),
            xnu: ScalarField::zeros(grid),
        }
    }

    /// Base tangent from the split blocks (no fibre component).
    pub fn base(xa_t: VectorField3, xchi: ScalarField, xp: VectorField3) -> Self {
        let g = *xchi.grid();
        Self { xa_t, xchi, xp, xnu: ScalarField::zeros(g) }
    }

    pub fn grid(&self) -> &Grid3 {
        self.xchi.grid()
    }

    pub fn axpy(&self, c: f64, o: &EmTangent) -> Self {
        Self {
            xa_t: self.xa_t.axpy(c, &o.xa_t),
            xchi: self.xchi.axpy(c, &o.xchi),
            xp: self.xp.axpy(c, &o.xp),
            xnu: self.xnu.axpy(c, &o.xnu),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { xa_t: self.xa_t.scale(c), xchi: self.xchi.scale(c), xp: self.xp.scale(c), xnu: self.xnu.scale(c) }
    }

    pub fn norm(&self) -> f64 {
        (self.xa_t.norm().powi(2) + self.xchi.norm().powi(2) + self.xp.norm().powi(2) + self.xnu.norm().powi(2))
            .sqrt()
    }

    /// Extended state with the components of `self`, at slice time `x0`.
    pub fn as_state(&self, x0: f64) -> ExtendedEmState {
        ExtendedEmState {
            split: SplitEmState { x0, a_t: self.xa_t.clone(), chi: self.xchi.clone(), p: self.xp.clone() },
            nu: self.xnu.clone(),
        }
    }

    pub fn of_state(s: &ExtendedEmState) -> Self {
        Self { xa_t: s.split.a_t.clone(), xchi: s.split.chi.clone(), xp: s.split.p.clone(), xnu: s.nu.clone() }
    }

    /// Largest relative divergence of the transverse blocks.
    pub fn transversality_defect(&self) -> Result<f64> {
        Ok(constraint_residual(&self.xa_t)?.max(constraint_residual(&self.xp)?))
    }
}

/// `‖div v‖ / ‖∇‖_max‖v‖`, scale-free; 0 for `v = 0`.
pub fn constraint_residual(v: &VectorField3) -> Result<f64> {
    let n = v.norm();
    if n == 0.0 {
        return Ok(0.0);
    }
    let g = v.grid();
    let kmax = std::f64::consts::PI / g.spacing();
    Ok(divergence(v)?.norm() / (kmax * n))
}

/// Replaces `p` by its transverse part.
pub fn em_project_constraint(s: &EmState) -> Result<ConstrainedEmState> {
    let (p_t, _) = helmholtz_decompose(&s.p)?;
    Ok(ConstrainedEmState(EmState { x0: s.x0, a: s.a.clone(), p: p_t }))
}

/// `a = ã + ∇χ` with `χ = Δ⁻¹ div a`.
pub fn em_split_gauge(s: &ConstrainedEmState) -> Result<SplitEmState> {
    let st = s.state();
    let chi = inverse_laplacian_projected(&Spectrum::of(&divergence(&st.a)?))?;
    let a_t = &st.a - &gradient(&chi)?;
    Ok(SplitEmState { x0: st.x0, a_t, chi, p: st.p.clone() })
}

/// `a ↦ a + ∇λ`.
pub fn em_gauge_transform(s: &ConstrainedEmState, lambda: &ScalarField) -> Result<ConstrainedEmState> {
    let st = s.state();
    st.a.components[0].same_grid(lambda)?;
    let a = &st.a + &gradient(lambda)?;
    Ok(ConstrainedEmState(EmState { x0: st.x0, a, p: st.p.clone() }))
}

fn check_tangent_grids(x: &EmTangent, y: &EmTangent) -> Result<()> {
    for t in [x, y] {
        let g = t.grid();
        if t.xa_t.grid() != g || t.xp.grid() != g || t.xnu.grid() != g {
            return Err(Error::GridMismatch);
        }
    }
    if x.grid() != y.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `Ω^Σ(X, Y) = ∫ (X_a·Y_p − X_p·Y_a)` with `X_a = X_ã + ∇X_χ`.
pub fn em_presymplectic_form(x: &EmTangent, y: &EmTangent) -> Result<f64> {
    check_tangent_grids(x, y)?;
    let xa = &x.xa_t + &gradient(&x.xchi)?;
    let ya = &y.xa_t + &gradient(&y.xchi)?;
    Ok(inner_vec(&xa, &y.xp) - inner_vec(&x.xp, &ya))
}

/// `Ω^𝒫(X, Y) = ∫ (X_ã·Y_p − X_p·Y_ã) + ∫ ∇X_ν·∇Y_χ − ∫ ∇Y_ν·∇X_χ`.
pub fn em_extended_form(x: &EmTangent, y: &EmTangent) -> Result<f64> {
    check_tangent_grids(x, y)?;
    Ok(inner_vec(&x.xa_t, &y.xp) - inner_vec(&x.xp, &y.xa_t) + dirichlet_pairing(&x.xnu, &y.xchi)?
        - dirichlet_pairing(&y.xnu, &x.xchi)?)
}

/// `∫ ∇f·∇g = −∫ f Δg`.
pub fn dirichlet_pairing(f: &ScalarField, g: &ScalarField) -> Result<f64> {
    Ok(-inner(f, &laplacian(g)?))
}

/// Coulomb horizontal lift: drops the gauge component.
pub fn em_coulomb_horizontal(x: &EmTangent) -> EmTangent {
    EmTangent { xa_t: x.xa_t.clone(), xchi: ScalarField::zeros(*x.grid()), xp: x.xp.clone(), xnu: x.xnu.clone() }
}

/// `X̃_a = X_a − ∇Δ⁻¹(div X_a)` for an unsplit `a`-variation.
pub fn coulomb_horizontal_a(xa: &VectorField3) -> Result<VectorField3> {
    let chi = inverse_laplacian_projected(&Spectrum::of(&divergence(xa)?))?;
    Ok(xa - &gradient(&chi)?)
}

fn spectra(v: &VectorField3) -> [Spectrum; 3] {
    [Spectrum::of(v.get(1)), Spectrum::of(v.get(2)), Spectrum::of(v.get(3))]
}

/// Exact mode evolution over `dt`.
///
/// Transverse modes: `â ← â cos ωt + p̂ sin(ωt)/ω`, `p̂ ← −ωâ sin ωt + p̂ cos ωt`
/// with `ω = |k|`; null modes drift as `â ← â + t p̂`; the longitudinal part
/// of `a` is unchanged.
pub fn em_propagate(s: &ConstrainedEmState, dt: f64) -> Result<ConstrainedEmState> {
    let st = s.state();
    let grid = *st.grid();
    let a = spectra(&st.a);
    let p = spectra(&st.p);
    let zero = Complex64::new(0.0, 0.0);
    let mut na: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![zero; grid.len()]);
    let mut np: [Vec<Complex64>; 3] = std::array::from_fn(|_| vec![zero; grid.len()]);
    for idx in 0..grid.len() {
        let k = a[0].mode_k(idx);
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let av = [a[0].coefficients()[idx], a[1].coefficients()[idx], a[2].coefficients()[idx]];
        let pv = [p[0].coefficients()[idx], p[1].coefficients()[idx], p[2].coefficients()[idx]];
        if k2 == 0.0 {
            for c in 0..3 {
                na[c][idx] = av[c] + pv[c] * dt;
                np[c][idx] = pv[c];
            }
            continue;
        }
        let w = k2.sqrt();
        let (sn, cs) = (w * dt).sin_cos();
        let ka = (av[0] * k[0] + av[1] * k[1] + av[2] * k[2]) / k2;
        for c in 0..3 {
            let long = ka * k[c];
            let trans = av[c] - long;
            na[c][idx] = long + trans * cs + pv[c] * (sn / w);
            np[c][idx] = -trans * (w * sn) + pv[c] * cs;
        }
    }
    let scale = |v: &[Spectrum; 3]| v.iter().map(|s| s.discrete_norm()).sum::<f64>();
    let sa = scale(&a) + scale(&p) * dt.abs();
    let sp = scale(&p) + scale(&a) * std::f64::consts::PI / grid.spacing();
    let to_vec = |data: [Vec<Complex64>; 3], sc: f64| -> Result<VectorField3> {
        let [d1, d2, d3] = data;
        VectorField3::new(
            Spectrum::from_coefficients(grid, d1, sc).to_field()?,
            Spectrum::from_coefficients(grid, d2, sc).to_field()?,
            Spectrum::from_coefficients(grid, d3, sc).to_field()?,
        )
    };
    let state = EmState { x0: st.x0 + dt, a: to_vec(na, sa)?, p: to_vec(np, sp)? };
    Ok(ConstrainedEmState(state))
}

/// `(∂₀a, ∂₀p) = (p, Δa_T)`.
pub fn em_time_derivative(s: &ConstrainedEmState) -> Result<(VectorField3, VectorField3)> {
    let st = s.state();
    let (a_t, _) = helmholtz_decompose(&st.a)?;
    let lap = a_t.map_components(|c| laplacian(c).expect("real Laplacian"));
    Ok((st.p.clone(), lap))
}

/// Central-difference residual of the equations of motion, relative to the
/// size of the right-hand side.
pub fn em_eom_residual(s: &ConstrainedEmState, dt: f64) -> Result<f64> {
    let fwd = em_propagate(s, dt)?;
    let bwd = em_propagate(s, -dt)?;
    let (ra, rp) = em_time_derivative(s)?;
    let da = (&fwd.state().a - &bwd.state().a).scale(0.5 / dt);
    let dp = (&fwd.state().p - &bwd.state().p).scale(0.5 / dt);
    let err = ((&da - &ra).norm().powi(2) + (&dp - &rp).norm().powi(2)).sqrt();
    let scale = (ra.norm().powi(2) + rp.norm().powi(2)).sqrt();
    Ok(if scale == 0.0 { err } else { err / scale })
}

/// Field energy `½∫ (|p|² + |curl a|²)`.
pub fn em_energy(s: &ConstrainedEmState) -> Result<f64> {
    let st = s.state();
    let b = curl(&st.a)?;
    Ok(0.5 * (inner_vec(&st.p, &st.p) + inner_vec(&b, &b)))
}

fn localized_vector(grid: Grid3, spec: &LocalizedSpec, rng: &mut ChaCha8Rng) -> Result<VectorField3> {
    VectorField3::new(localized(grid, spec, rng)?, localized(grid, spec, rng)?, localized(grid, spec, rng)?)
}

fn zero_mean(f: ScalarField) -> ScalarField {
    let m = f.mean();
    f.map(|v| v - m)
}

/// `a = curl W₁ + ∇λ`, `p = curl W₂` with localized `W₁, W₂, λ`, then
/// constraint-projected. Curls keep the transverse blocks localized, which a
/// Helmholtz projection of a localized field would not.
pub fn em_localized_state(grid: Grid3, spec: &LocalizedSpec, rng: &mut ChaCha8Rng) -> Result<ConstrainedEmState> {
    let a_t = curl(&localized_vector(grid, spec, rng)?)?;
    let p = curl(&localized_vector(grid, spec, rng)?)?;
    let lambda = localized(grid, spec, rng)?;
    let a = &a_t + &gradient(&lambda)?;
    em_project_constraint(&EmState::new(0.0, a, p)?)
}

/// Tangent with curl-generated transverse blocks and zero-mean localized
/// potentials.
pub fn em_localized_tangent(grid: Grid3, spec: &LocalizedSpec, rng: &mut ChaCha8Rng) -> Result<EmTangent> {
    Ok(EmTangent {
        xa_t: curl(&localized_vector(grid, spec, rng)?)?,
        xchi: zero_mean(localized(grid, spec, rng)?),
        xp: curl(&localized_vector(grid, spec, rng)?)?,
        xnu: zero_mean(localized(grid, spec, rng)?),
    })
}

/// Embedding at the zero section, `ν = 0`.
pub fn em_extend(s: &SplitEmState) -> ExtendedEmState {
    ExtendedEmState { split: s.clone(), nu: ScalarField::zeros(*s.grid()) }
}

/// `max_i |Ω^Σ(X, Y_i)|` over a battery of test directions.
pub fn em_kernel_probe(x: &EmTangent, battery: &[EmTangent]) -> Result<f64> {
    KernelBattery::new(battery)?.probe(x)
}

/// Test directions for repeated kernel probes, stored as the `(Y_a, Y_p)`
/// blocks that enter `Ω^Σ`.
#[derive(Debug, Clone)]
pub struct KernelBattery {
    blocks: Vec<(VectorField3, VectorField3)>,
}

impl KernelBattery {
    pub fn new(battery: &[EmTangent]) -> Result<Self> {
        let blocks = battery
            .iter()
            .map(|y| Ok((&y.xa_t + &gradient(&y.xchi)?, y.xp.clone())))
            .collect::<Result<_>>()?;
        Ok(Self { blocks })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `max_i |Ω^Σ(X, Y_i)|`.
    pub fn probe(&self, x: &EmTangent) -> Result<f64> {
        let xa = &x.xa_t + &gradient(&x.xchi)?;
        self.blocks.iter().try_fold(0.0f64, |m, (ya, yp)| {
            if ya.grid() != xa.grid() {
                return Err(Error::GridMismatch);
            }
            Ok(m.max((inner_vec(&xa, yp) - inner_vec(&x.xp, ya)).abs()))
        })
    }
}
