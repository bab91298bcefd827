//! Real Klein-Gordon field on Minkowski space, signature (−,+,+,+).
//!
//! Cauchy data on a slice are `(φ, P⁰)` with the on-shell relations
//! `∂₀φ = −P⁰` and `∂₀P⁰ = m²φ − Δφ`; each Fourier mode rotates with
//! `ω = (|k|² + m²)^{1/2}`.

mod charges;
mod poincare;

pub use charges::{
    basis_charge, charge_scale, field_energy, kg_algebra_residual, kg_charge, kg_charge_bracket,
    kg_charge_trajectory, kg_defining_relation_residual, kg_hamiltonian_vf_of_charge, kg_killing_vector,
    kg_noether_drift, relative_drift, ChargeSample,
};
pub use poincare::{momentum_matrix, trace_pairing, Basis, PoincareGenerator};

use crate::error::{Error, Result};
use crate::field::spectral::{inner, laplacian, spectral_derivative, Spectrum};
use crate::field::random::{localized, LocalizedSpec};
use crate::field::{Grid3, ScalarField};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgParams {
    pub mass: f64,
    pub grid: Grid3,
}

impl KgParams {
    pub fn new(mass: f64, grid: Grid3) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::InvalidGrid(format!("mass = {mass} must be finite and ≥ 0")));
        }
        Ok(Self { mass, grid })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KgState {
    pub x0: f64,
    pub phi: ScalarField,
    pub p0: ScalarField,
}

impl KgState {
    pub fn new(x0: f64, phi: ScalarField, p0: ScalarField) -> Result<Self> {
        phi.same_grid(&p0)?;
        if !phi.is_finite() {
            return Err(Error::NonFinite("phi".into()));
        }
        if !p0.is_finite() {
            return Err(Error::NonFinite("p0".into()));
        }
        Ok(Self { x0, phi, p0 })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { x0: 0.0, phi: ScalarField::zeros(grid), p0: ScalarField::zeros(grid) }
    }

    pub fn grid(&self) -> &Grid3 {
        self.phi.grid()
    }

    /// `P^k = δ^{jk}∂_jφ`, derived on demand.
    pub fn beta(&self, k: usize) -> Result<ScalarField> {
        spectral_derivative(&self.phi, k)
    }

    /// `self + c·dir` with the slice time of `self`.
    pub fn displaced(&self, c: f64, dir: &TangentPair) -> Self {
        Self { x0: self.x0, phi: self.phi.axpy(c, &dir.xu), p0: self.p0.axpy(c, &dir.xp0) }
    }

    pub fn as_tangent(&self) -> TangentPair {
        TangentPair { xu: self.phi.clone(), xp0: self.p0.clone() }
    }

    pub fn norm(&self) -> f64 {
        (self.phi.norm().powi(2) + self.p0.norm().powi(2)).sqrt()
    }
}

/// Tangent vector `(𝕏_u, 𝕏_{ρ⁰})` on the space of Cauchy data.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub xu: ScalarField,
    pub xp0: ScalarField,
}

impl TangentPair {
    pub fn new(xu: ScalarField, xp0: ScalarField) -> Result<Self> {
        xu.same_grid(&xp0)?;
        Ok(Self { xu, xp0 })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { xu: ScalarField::zeros(grid), xp0: ScalarField::zeros(grid) }
    }

    pub fn axpy(&self, c: f64, other: &TangentPair) -> Self {
        Self { xu: self.xu.axpy(c, &other.xu), xp0: self.xp0.axpy(c, &other.xp0) }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { xu: self.xu.scale(c), xp0: self.xp0.scale(c) }
    }

    pub fn norm(&self) -> f64 {
        (self.xu.norm().powi(2) + self.xp0.norm().powi(2)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.xu.max_abs().max(self.xp0.max_abs())
    }
}

/// Cauchy data `(φ, P⁰)` drawn as two independent localized fields.
pub fn kg_localized_state(grid: Grid3, spec: &LocalizedSpec, rng: &mut ChaCha8Rng) -> Result<KgState> {
    let phi = localized(grid, spec, rng)?;
    let p0 = localized(grid, spec, rng)?;
    KgState::new(0.0, phi, p0)
}

/// `Ω(X, Y) = ∫ (X_u Y_{ρ⁰} − X_{ρ⁰} Y_u)`.
pub fn kg_symplectic_form(x: &TangentPair, y: &TangentPair) -> Result<f64> {
    x.xu.same_grid(&y.xu)?;
    x.xu.same_grid(&x.xp0)?;
    y.xu.same_grid(&y.xp0)?;
    Ok(inner(&x.xu, &y.xp0) - inner(&x.xp0, &y.xu))
}

/// Exact evolution of every Fourier mode by `dt`.
pub fn kg_propagate(state: &KgState, dt: f64, params: &KgParams) -> Result<KgState> {
    if state.grid() != &params.grid {
        return Err(Error::GridMismatch);
    }
    let m2 = params.mass * params.mass;
    let f = Spectrum::of(&state.phi);
    let p = Spectrum::of(&state.p0);
    // Per mode (cos ωt, sin(ωt)/ω, ω sin ωt), with sin(ωt)/ω → t at ω = 0.
    let coeffs = |k: [f64; 3]| {
        let w = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2] + m2).sqrt();
        let (s, c) = (w * dt).sin_cos();
        let sinc = if w == 0.0 { dt } else { s / w };
        (c, sinc, w * s)
    };
    let phi = f
        .combined_k(&p, |k, a, b| {
            let (c, sinc, _) = coeffs(k);
            a * c - b * sinc
        })
        .to_field()?;
    let p0 = f
        .combined_k(&p, |k, a, b| {
            let (c, _, ws) = coeffs(k);
            a * ws + b * c
        })
        .to_field()?;
    Ok(KgState { x0: state.x0 + dt, phi, p0 })
}

/// Right-hand side `(−P⁰, m²φ − Δφ)` of the equations of motion.
pub fn kg_time_derivative(state: &KgState, params: &KgParams) -> Result<TangentPair> {
    let m2 = params.mass * params.mass;
    let lap = laplacian(&state.phi)?;
    Ok(TangentPair { xu: state.p0.scale(-1.0), xp0: state.phi.scale(m2).axpy(-1.0, &lap) })
}

/// Central-difference residual of the equations of motion, relative to the
/// size of the right-hand side.
pub fn kg_eom_residual(state: &KgState, dt: f64, params: &KgParams) -> Result<f64> {
    let fwd = kg_propagate(state, dt, params)?;
    let bwd = kg_propagate(state, -dt, params)?;
    let rhs = kg_time_derivative(state, params)?;
    let du = (&fwd.phi - &bwd.phi).scale(0.5 / dt);
    let dp = (&fwd.p0 - &bwd.p0).scale(0.5 / dt);
    let err = ((&du - &rhs.xu).norm().powi(2) + (&dp - &rhs.xp0).norm().powi(2)).sqrt();
    let scale = rhs.norm();
    Ok(if scale == 0.0 { err } else { err / scale })
}
