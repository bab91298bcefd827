use serde::Serialize;

use super::poincare::{Basis, PoincareGenerator};
use super::{kg_propagate, kg_symplectic_form, KgParams, KgState, TangentPair};
use crate::error::{Error, Result};
use crate::field::spectral::{integrate, laplacian, spectral_derivative};
use crate::field::{DiscreteFunctional, Op, ScalarField, Slot, Term, Weight};

fn term(w: Weight, lo: Vec<Op>, l: Slot, ro: Vec<Op>, r: Slot) -> Term {
    Term::new(w, lo, l, ro, r)
}

/// `∫ w · ½(P⁰² + |∇φ|² + m²φ²)` with `w = c·x^mu` (or `c` when `mu` is None).
fn energy_terms(f: &mut DiscreteFunctional, c: f64, mu: Option<usize>, mass: f64) {
    let w = |s: f64| match mu {
        Some(m) => Weight::coord(m, c * s),
        None => Weight::constant(c * s),
    };
    f.push(term(w(0.5), vec![], Slot::P0, vec![], Slot::P0));
    for k in 1..=3 {
        f.push(term(w(0.5), vec![Op::D(k)], Slot::Phi, vec![Op::D(k)], Slot::Phi));
    }
    if mass != 0.0 {
        f.push(term(w(0.5), vec![Op::Scale(mass * mass)], Slot::Phi, vec![], Slot::Phi));
    }
}

/// `∫ P⁰ (Σ_i v_i ∂_i) φ` for a coordinate-linear field `v`, given as
/// `(coefficient, coordinate axis, derivative axis)` triples.
fn transport_terms(f: &mut DiscreteFunctional, parts: &[(f64, usize, usize)]) {
    for &(c, x, d) in parts {
        f.push(term(Weight::coord(x, c), vec![], Slot::P0, vec![Op::D(d)], Slot::Phi));
    }
}

/// Orbital fields `v` of the rotation charges `∫ P⁰ (v·∇) φ`:
/// `R³: x²∂₁ − x¹∂₂`, `R²: x¹∂₃ − x³∂₁`, `R¹: x²∂₃ − x³∂₂`.
fn rotation_parts(b: Basis) -> [(f64, usize, usize); 2] {
    match b {
        Basis::R3 => [(1.0, 2, 1), (-1.0, 1, 2)],
        Basis::R2 => [(1.0, 1, 3), (-1.0, 3, 1)],
        Basis::R1 => [(1.0, 2, 3), (-1.0, 3, 2)],
        _ => unreachable!("not a rotation"),
    }
}

/// Charge functional of one basis generator.
///
/// * `τ⁰`: `−∫ ½(P⁰² + |∇φ|² + m²φ²)`
/// * `τᵏ`: `∫ P⁰ ∂_kφ`
/// * rotations: see [`rotation_parts`]
/// * `𝓑ᵏ`: `∫ x^k ½(P⁰² + |∇φ|² + m²φ²) − x⁰ ∫ P⁰ ∂_kφ`
pub fn basis_charge(b: Basis, mass: f64) -> DiscreteFunctional {
    let mut f = DiscreteFunctional::new();
    match b {
        Basis::T0 => energy_terms(&mut f, -1.0, None, mass),
        Basis::T1 | Basis::T2 | Basis::T3 => {
            let k = b.index();
            f.push(term(Weight::constant(1.0), vec![], Slot::P0, vec![Op::D(k)], Slot::Phi));
        }
        Basis::R1 | Basis::R2 | Basis::R3 => transport_terms(&mut f, &rotation_parts(b)),
        Basis::B1 | Basis::B2 | Basis::B3 => {
            let k = b.index() - Basis::B1.index() + 1;
            energy_terms(&mut f, 1.0, Some(k), mass);
            f.push(term(Weight::coord(0, -1.0), vec![], Slot::P0, vec![Op::D(k)], Slot::Phi));
        }
    }
    f
}

/// `J_ξ = Σ_b ξ^b J_b`.
pub fn kg_charge(xi: &PoincareGenerator, params: &KgParams) -> Result<DiscreteFunctional> {
    xi.validate()?;
    let mut f = DiscreteFunctional::new();
    for (b, c) in Basis::ALL.iter().zip(xi.coefficients()) {
        f.add_scaled(c, &basis_charge(*b, params.mass));
    }
    Ok(f)
}

fn check_grid(state: &KgState, params: &KgParams) -> Result<()> {
    if state.grid() != &params.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `(v·∇) f` for the rotation orbital field of `b`.
fn transport(b: Basis, f: &ScalarField) -> Result<ScalarField> {
    let g = *f.grid();
    let mut out = ScalarField::zeros(g);
    for (c, x, d) in rotation_parts(b) {
        let df = spectral_derivative(f, d)?;
        out = out.axpy(c, &df.mul(&ScalarField::coordinate(g, x)));
    }
    Ok(out)
}

/// Killing vector of one basis generator on the space of Cauchy data.
fn basis_killing(b: Basis, state: &KgState, params: &KgParams) -> Result<TangentPair> {
    let m2 = params.mass * params.mass;
    let phi = &state.phi;
    let p = &state.p0;
    Ok(match b {
        Basis::T0 => {
            let lap = laplacian(phi)?;
            TangentPair { xu: p.scale(-1.0), xp0: phi.scale(m2).axpy(-1.0, &lap) }
        }
        Basis::T1 | Basis::T2 | Basis::T3 => {
            let k = b.index();
            TangentPair { xu: spectral_derivative(phi, k)?, xp0: spectral_derivative(p, k)? }
        }
        Basis::R1 | Basis::R2 | Basis::R3 => TangentPair { xu: transport(b, phi)?, xp0: transport(b, p)? },
        Basis::B1 | Basis::B2 | Basis::B3 => {
            let k = b.index() - Basis::B1.index() + 1;
            let g = params.grid;
            let xk = ScalarField::coordinate(g, k);
            let t = state.x0;
            let dphi = spectral_derivative(phi, k)?;
            let dp = spectral_derivative(p, k)?;
            let lap = laplacian(phi)?;
            let xu = xk.mul(p).axpy(-t, &dphi);
            let xp0 = xk.mul(&lap.axpy(-m2, phi)).axpy(1.0, &dphi).axpy(-t, &dp);
            TangentPair { xu, xp0 }
        }
    })
}

/// Infinitesimal generator of the pullback action of `ξ` on Cauchy data.
///
/// Translations: `τ⁰ ↦ (−P⁰, m²φ − Δφ)`, `τᵏ ↦ (∂_kφ, ∂_kP⁰)`. Rotations
/// transport both fields along their orbital field. Boosts:
/// `(x^kP⁰ − x⁰∂_kφ, x^k(Δφ − m²φ) + ∂_kφ − x⁰∂_kP⁰)`.
pub fn kg_killing_vector(xi: &PoincareGenerator, state: &KgState, params: &KgParams) -> Result<TangentPair> {
    xi.validate()?;
    check_grid(state, params)?;
    let mut out = TangentPair::zeros(params.grid);
    for (b, c) in Basis::ALL.iter().zip(xi.coefficients()) {
        if c != 0.0 {
            out = out.axpy(c, &basis_killing(*b, state, params)?);
        }
    }
    Ok(out)
}

/// `(δJ_ξ/δP⁰, −δJ_ξ/δφ)`, the solution of `Ω(X, ·) = dJ_ξ`.
pub fn kg_hamiltonian_vf_of_charge(
    xi: &PoincareGenerator,
    state: &KgState,
    params: &KgParams,
) -> Result<TangentPair> {
    check_grid(state, params)?;
    let j = kg_charge(xi, params)?;
    let g = j.derivative(&state.phi, &state.p0, state.x0)?;
    Ok(TangentPair { xu: g.d_p0, xp0: g.d_phi.scale(-1.0) })
}

/// `{J_ξ, J_ζ} = Ω(X_ξ, X_ζ)`.
pub fn kg_charge_bracket(
    xi: &PoincareGenerator,
    zeta: &PoincareGenerator,
    state: &KgState,
    params: &KgParams,
) -> Result<f64> {
    let a = kg_hamiltonian_vf_of_charge(xi, state, params)?;
    let b = kg_hamiltonian_vf_of_charge(zeta, state, params)?;
    kg_symplectic_form(&a, &b)
}

/// `{J_ξ, J_ζ} − J_{[ξ,ζ]}` with the right-action bracket
/// [`PoincareGenerator::bracket`].
pub fn kg_algebra_residual(
    xi: &PoincareGenerator,
    zeta: &PoincareGenerator,
    state: &KgState,
    params: &KgParams,
) -> Result<f64> {
    let lhs = kg_charge_bracket(xi, zeta, state, params)?;
    let rhs = kg_charge(&xi.bracket(zeta), params)?.eval(&state.phi, &state.p0, state.x0)?;
    Ok(lhs - rhs)
}

/// `(Ω(X_ξ, Y), dJ_ξ(Y))` with `dJ` by central differences at step `eps`.
pub fn kg_defining_relation_residual(
    xi: &PoincareGenerator,
    state: &KgState,
    y: &TangentPair,
    eps: f64,
    params: &KgParams,
) -> Result<(f64, f64)> {
    let x = kg_hamiltonian_vf_of_charge(xi, state, params)?;
    let omega = kg_symplectic_form(&x, y)?;
    let j = kg_charge(xi, params)?;
    let plus = state.displaced(eps, y);
    let minus = state.displaced(-eps, y);
    let dj = (j.eval(&plus.phi, &plus.p0, state.x0)? - j.eval(&minus.phi, &minus.p0, state.x0)?) / (2.0 * eps);
    Ok((omega, dj))
}

/// Positive field energy `∫ ½(P⁰² + |∇φ|² + m²φ²)`.
pub fn field_energy(state: &KgState, params: &KgParams) -> Result<f64> {
    Ok(-basis_charge(Basis::T0, params.mass).eval(&state.phi, &state.p0, state.x0)?)
}

/// Natural size of a charge on `state`: the field energy times
/// `1 + r + |x⁰|`, with `r` the energy-weighted rms radius.
pub fn charge_scale(state: &KgState, params: &KgParams) -> Result<f64> {
    let m2 = params.mass * params.mass;
    let g = params.grid;
    let mut e = state.p0.mul(&state.p0).axpy(m2, &state.phi.mul(&state.phi));
    for k in 1..=3 {
        let d = spectral_derivative(&state.phi, k)?;
        e = e.axpy(1.0, &d.mul(&d));
    }
    let e = e.scale(0.5);
    let total = integrate(&e);
    if total == 0.0 {
        return Ok(0.0);
    }
    let r2 = ScalarField::from_fn(g, |x| x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    let radius = (integrate(&e.mul(&r2)) / total).sqrt();
    Ok(total * (1.0 + radius + state.x0.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChargeSample {
    pub gen: String,
    pub t: f64,
    pub value: f64,
}

/// Charge values on the slices `x⁰ + i·dt`, `i = 0..=steps`; row `i` holds
/// one value per generator.
pub fn kg_charge_trajectory(
    gens: &[PoincareGenerator],
    state: &KgState,
    dt: f64,
    steps: usize,
    params: &KgParams,
) -> Result<Vec<(f64, Vec<f64>)>> {
    check_grid(state, params)?;
    let js: Vec<DiscreteFunctional> = gens.iter().map(|g| kg_charge(g, params)).collect::<Result<_>>()?;
    let refs: Vec<&DiscreteFunctional> = js.iter().collect();
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = state.clone();
    for i in 0..=steps {
        if i > 0 {
            s = kg_propagate(&s, dt, params)?;
        }
        out.push((s.x0, DiscreteFunctional::eval_many(&refs, &s.phi, &s.p0, s.x0)?));
    }
    Ok(out)
}

/// `max_i |J(slice_i) − J(slice_0)| / max(|J(slice_0)|, 1e-12·scale)`.
pub fn kg_noether_drift(
    xi: &PoincareGenerator,
    state: &KgState,
    dt: f64,
    steps: usize,
    params: &KgParams,
) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InvalidGrid("steps must be ≥ 1".into()));
    }
    let traj = kg_charge_trajectory(std::slice::from_ref(xi), state, dt, steps, params)?;
    let floor = 1e-12 * charge_scale(state, params)?;
    Ok(relative_drift(traj.iter().map(|(_, v)| v[0]), floor))
}

/// `max_i |v_i − v_0| / max(|v_0|, floor)`; 0 when all values agree.
pub fn relative_drift(values: impl IntoIterator<Item = f64>, floor: f64) -> f64 {
    let mut it = values.into_iter();
    let Some(j0) = it.next() else { return 0.0 };
    let denom = j0.abs().max(floor);
    let worst = it.fold(0.0f64, |m, v| m.max((v - j0).abs()));
    if worst == 0.0 {
        0.0
    } else {
        worst / denom
    }
}
