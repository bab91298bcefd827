//! Quadratic functionals of a pair of slice fields.
//!
//! A term `∫ (L f_left) · w(x) · (R f_right)` has a weight polynomial that is
//! multilinear in `(x⁰, x¹, x², x³)` and Fourier-multiplier operators `L`, `R`.

use rustfft::num_complex::Complex64;

use super::grid::{compensated_sum, Grid3, ScalarField};
use super::spectral::Spectrum;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Op {
    /// `∂_k` for `k ∈ {1, 2, 3}`.
    D(usize),
    Laplacian,
    /// Multiplication by a constant, e.g. `m²`.
    Scale(f64),
}

impl Op {
    /// Every operator is its own adjoint up to this sign.
    fn adjoint_sign(self) -> f64 {
        match self {
            Op::D(_) => -1.0,
            _ => 1.0,
        }
    }

    fn symbol(self, k: [f64; 3]) -> Complex64 {
        match self {
            Op::D(a) => Complex64::new(0.0, k[a - 1]),
            Op::Laplacian => Complex64::new(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]), 0.0),
            Op::Scale(c) => Complex64::new(c, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Phi,
    P0,
}

/// Multilinear polynomial in `(x⁰, x¹, x², x³)`.
///
/// Coefficient `c[mask]` multiplies `Π_{bit μ set in mask} x^μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weight {
    pub coeffs: [f64; 16],
}

impl Weight {
    pub fn constant(c: f64) -> Self {
        let mut coeffs = [0.0; 16];
        coeffs[0] = c;
        Self { coeffs }
    }

    /// `c · x^μ` for `μ ∈ {0, 1, 2, 3}`.
    pub fn coord(mu: usize, c: f64) -> Self {
        let mut coeffs = [0.0; 16];
        coeffs[1 << mu] = c;
        Self { coeffs }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut coeffs = self.coeffs;
        for c in &mut coeffs {
            *c *= s;
        }
        Self { coeffs }
    }

    pub fn eval(&self, x0: f64, x: [f64; 3]) -> f64 {
        let xs = [x0, x[0], x[1], x[2]];
        let mut total = 0.0;
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let mut t = c;
            for (mu, &xm) in xs.iter().enumerate() {
                if mask & (1 << mu) != 0 {
                    t *= xm;
                }
            }
            total += t;
        }
        total
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    fn field(&self, grid: Grid3, x0: f64) -> ScalarField {
        ScalarField::from_fn(grid, |x| self.eval(x0, x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub weight: Weight,
    /// Applied first to last.
    pub left_ops: Vec<Op>,
    pub left: Slot,
    pub right_ops: Vec<Op>,
    pub right: Slot,
}

impl Term {
    pub fn new(weight: Weight, left_ops: Vec<Op>, left: Slot, right_ops: Vec<Op>, right: Slot) -> Self {
        Self { weight, left_ops, left, right_ops, right }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiscreteFunctional {
    pub terms: Vec<Term>,
}

/// Functional derivatives `(δF/δφ, δF/δP⁰)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub d_phi: ScalarField,
    pub d_p0: ScalarField,
}

fn apply_ops(f: &ScalarField, ops: &[Op]) -> Result<ScalarField> {
    if ops.is_empty() {
        return Ok(f.clone());
    }
    Spectrum::of(f)
        .multiplied_k(|k| ops.iter().fold(Complex64::new(1.0, 0.0), |acc, op| acc * op.symbol(k)))
        .to_field()
}

fn apply_adjoint(f: &ScalarField, ops: &[Op]) -> Result<ScalarField> {
    let sign: f64 = ops.iter().map(|o| o.adjoint_sign()).product();
    let adj: Vec<Op> = ops.iter().rev().copied().collect();
    Ok(apply_ops(f, &adj)?.scale(sign))
}

struct Cache {
    grid: Grid3,
    x0: f64,
    fields: Vec<(Slot, Vec<Op>, std::rc::Rc<ScalarField>)>,
    weights: Vec<([f64; 16], std::rc::Rc<ScalarField>)>,
}

impl Cache {
    fn new(grid: Grid3, x0: f64) -> Self {
        Self { grid, x0, fields: Vec::new(), weights: Vec::new() }
    }

    fn applied(&mut self, slot: Slot, ops: &[Op], phi: &ScalarField, p0: &ScalarField) -> Result<std::rc::Rc<ScalarField>> {
        if let Some((_, _, f)) = self.fields.iter().find(|(s, o, _)| *s == slot && o.as_slice() == ops) {
            return Ok(f.clone());
        }
        let f = std::rc::Rc::new(apply_ops(DiscreteFunctional::slot(slot, phi, p0), ops)?);
        self.fields.push((slot, ops.to_vec(), f.clone()));
        Ok(f)
    }

    fn weight(&mut self, w: &Weight) -> std::rc::Rc<ScalarField> {
        if let Some((_, f)) = self.weights.iter().find(|(c, _)| c == &w.coeffs) {
            return f.clone();
        }
        let f = std::rc::Rc::new(w.field(self.grid, self.x0));
        self.weights.push((w.coeffs, f.clone()));
        f
    }
}

impl DiscreteFunctional {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, term: Term) -> &mut Self {
        self.terms.push(term);
        self
    }

    /// Appends the terms of `other` scaled by `c`.
    pub fn add_scaled(&mut self, c: f64, other: &DiscreteFunctional) -> &mut Self {
        if c != 0.0 {
            for t in &other.terms {
                let mut t = t.clone();
                t.weight = t.weight.scaled(c);
                self.terms.push(t);
            }
        }
        self
    }

    fn slot<'a>(s: Slot, phi: &'a ScalarField, p0: &'a ScalarField) -> &'a ScalarField {
        match s {
            Slot::Phi => phi,
            Slot::P0 => p0,
        }
    }

    pub fn eval(&self, phi: &ScalarField, p0: &ScalarField, x0: f64) -> Result<f64> {
        Ok(Self::eval_many(&[self], phi, p0, x0)?[0])
    }

    /// Evaluates several functionals on the same fields, sharing operator
    /// applications and weight fields between terms.
    pub fn eval_many(fs: &[&DiscreteFunctional], phi: &ScalarField, p0: &ScalarField, x0: f64) -> Result<Vec<f64>> {
        phi.same_grid(p0).map_err(|_| Error::GridMismatch)?;
        let mut cache = Cache::new(*phi.grid(), x0);
        fs.iter()
            .map(|f| {
                let mut total = 0.0;
                for t in &f.terms {
                    let l = cache.applied(t.left, &t.left_ops, phi, p0)?;
                    let r = cache.applied(t.right, &t.right_ops, phi, p0)?;
                    let vals = if t.weight.is_constant() {
                        let c = t.weight.coeffs[0];
                        compensated_sum(l.values().iter().zip(r.values()).map(|(a, b)| a * b)) * c
                    } else {
                        let w = cache.weight(&t.weight);
                        compensated_sum(l.values().iter().zip(r.values()).zip(w.values()).map(|((a, b), c)| a * b * c))
                    };
                    total += vals * phi.grid().cell_volume();
                }
                Ok(total)
            })
            .collect()
    }

    /// Exact discrete gradient: `δ/δleft += Lᵀ(w·R f)` and
    /// `δ/δright += Rᵀ(w·L f)` with `∂ᵀ = −∂`.
    pub fn derivative(&self, phi: &ScalarField, p0: &ScalarField, x0: f64) -> Result<Gradient> {
        phi.same_grid(p0).map_err(|_| Error::GridMismatch)?;
        let grid = *phi.grid();
        let mut d_phi = ScalarField::zeros(grid);
        let mut d_p0 = ScalarField::zeros(grid);
        for t in &self.terms {
            let w = t.weight.field(grid, x0);
            let l = apply_ops(Self::slot(t.left, phi, p0), &t.left_ops)?;
            let r = apply_ops(Self::slot(t.right, phi, p0), &t.right_ops)?;
            let to_left = apply_adjoint(&w.mul(&r), &t.left_ops)?;
            let to_right = apply_adjoint(&w.mul(&l), &t.right_ops)?;
            for (slot, contrib) in [(t.left, to_left), (t.right, to_right)] {
                let acc = match slot {
                    Slot::Phi => &mut d_phi,
                    Slot::P0 => &mut d_p0,
                };
                *acc = acc.axpy(1.0, &contrib);
            }
        }
        Ok(Gradient { d_phi, d_p0 })
    }
}

pub fn functional_eval(f: &DiscreteFunctional, phi: &ScalarField, p0: &ScalarField, x0: f64) -> Result<f64> {
    f.eval(phi, p0, x0)
}

pub fn functional_derivative(
    f: &DiscreteFunctional,
    phi: &ScalarField,
    p0: &ScalarField,
    x0: f64,
) -> Result<(ScalarField, ScalarField)> {
    let g = f.derivative(phi, p0, x0)?;
    Ok((g.d_phi, g.d_p0))
}
