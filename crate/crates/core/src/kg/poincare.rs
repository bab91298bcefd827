use nalgebra::{Matrix4, Matrix5};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The ten basis directions of the Poincaré algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Basis {
    T0,
    T1,
    T2,
    T3,
    R1,
    R2,
    R3,
    B1,
    B2,
    B3,
}

impl Basis {
    pub const ALL: [Basis; 10] =
        [Basis::T0, Basis::T1, Basis::T2, Basis::T3, Basis::R1, Basis::R2, Basis::R3, Basis::B1, Basis::B2, Basis::B3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::T0 => "tau0",
            Basis::T1 => "tau1",
            Basis::T2 => "tau2",
            Basis::T3 => "tau3",
            Basis::R1 => "R1",
            Basis::R2 => "R2",
            Basis::R3 => "R3",
            Basis::B1 => "B1",
            Basis::B2 => "B2",
            Basis::B3 => "B3",
        }
    }

    pub fn is_translation(self) -> bool {
        matches!(self, Basis::T0 | Basis::T1 | Basis::T2 | Basis::T3)
    }

    pub fn is_rotation(self) -> bool {
        matches!(self, Basis::R1 | Basis::R2 | Basis::R3)
    }

    pub fn is_boost(self) -> bool {
        matches!(self, Basis::B1 | Basis::B2 | Basis::B3)
    }

    /// Matrix in the 5×5 affine representation, indices `0..4` with `4` the
    /// affine slot.
    pub fn matrix(self) -> Matrix5<f64> {
        let mut m = Matrix5::zeros();
        match self {
            Basis::T0 => m[(0, 4)] = 1.0,
            Basis::T1 => m[(1, 4)] = 1.0,
            Basis::T2 => m[(2, 4)] = 1.0,
            Basis::T3 => m[(3, 4)] = 1.0,
            Basis::R1 => {
                m[(3, 2)] = 1.0;
                m[(2, 3)] = -1.0;
            }
            Basis::R2 => {
                m[(3, 1)] = 1.0;
                m[(1, 3)] = -1.0;
            }
            Basis::R3 => {
                m[(1, 2)] = 1.0;
                m[(2, 1)] = -1.0;
            }
            Basis::B1 | Basis::B2 | Basis::B3 => {
                let k = self.index() - Basis::B1.index() + 1;
                m[(0, k)] = -1.0;
                m[(k, 0)] = -1.0;
            }
        }
        m
    }
}

/// Element of the Poincaré algebra in its 5×5 matrix representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoincareGenerator {
    rep: Matrix5<f64>,
}

const ALGEBRA_TOL: f64 = 1e-12;

fn minkowski() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

impl PoincareGenerator {
    /// Validates the bottom row and the Lorentz condition `ωη + ηωᵀ = 0`.
    pub fn new(rep: Matrix5<f64>) -> Result<Self> {
        let g = Self { rep };
        g.validate()?;
        Ok(g)
    }

    /// Skips validation; [`PoincareGenerator::validate`] can be called later.
    pub fn new_unchecked(rep: Matrix5<f64>) -> Self {
        Self { rep }
    }

    pub fn validate(&self) -> Result<()> {
        let tol = ALGEBRA_TOL * self.rep.amax().max(1.0);
        let bottom = self.rep.row(4).amax();
        if bottom > tol {
            return Err(Error::NotInAlgebra(format!("bottom row not zero ({bottom:.3e})")));
        }
        let w = self.lorentz();
        let eta = minkowski();
        let defect = (w * eta + eta * w.transpose()).amax();
        if defect > tol {
            return Err(Error::NotInAlgebra(format!("Lorentz block violates ωη + ηωᵀ = 0 ({defect:.3e})")));
        }
        Ok(())
    }

    pub fn basis(b: Basis) -> Self {
        Self { rep: b.matrix() }
    }

    pub fn zero() -> Self {
        Self { rep: Matrix5::zeros() }
    }

    pub fn from_coefficients(c: &[f64; 10]) -> Self {
        let rep = Basis::ALL.iter().fold(Matrix5::zeros(), |acc, b| acc + b.matrix() * c[b.index()]);
        Self { rep }
    }

    /// Coefficients in the order of [`Basis::ALL`].
    pub fn coefficients(&self) -> [f64; 10] {
        let r = &self.rep;
        [
            r[(0, 4)],
            r[(1, 4)],
            r[(2, 4)],
            r[(3, 4)],
            r[(3, 2)],
            r[(3, 1)],
            r[(1, 2)],
            -r[(0, 1)],
            -r[(0, 2)],
            -r[(0, 3)],
        ]
    }

    pub fn rep(&self) -> &Matrix5<f64> {
        &self.rep
    }

    /// `a^μ`.
    pub fn translation(&self) -> [f64; 4] {
        [self.rep[(0, 4)], self.rep[(1, 4)], self.rep[(2, 4)], self.rep[(3, 4)]]
    }

    /// Upper-left Lorentz block.
    pub fn lorentz(&self) -> Matrix4<f64> {
        self.rep.fixed_view::<4, 4>(0, 0).into_owned()
    }

    /// Matrix commutator `ξζ − ζξ`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self { rep: self.rep * other.rep - other.rep * self.rep }
    }

    /// Bracket of the right action on fields, `[ξ, ζ]_R = ζξ − ξζ`.
    ///
    /// Field symmetries act by pullback, so the charges close on this bracket.
    pub fn bracket(&self, other: &Self) -> Self {
        other.commutator(self)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { rep: self.rep * c }
    }
}

impl std::ops::Add for PoincareGenerator {
    type Output = PoincareGenerator;
    fn add(self, rhs: Self) -> Self {
        Self { rep: self.rep + rhs.rep }
    }
}

/// Momentum matrix `Φ_J = Σ_b J_b B_b/‖B_b‖²_F`, so that the trace pairing
/// `Tr[Φ_Jᵀ Φ_ξ]` returns `J_ξ`.
pub fn momentum_matrix(charges: &[f64; 10]) -> Matrix5<f64> {
    Basis::ALL.iter().fold(Matrix5::zeros(), |acc, b| {
        let m = b.matrix();
        acc + m * (charges[b.index()] / m.norm_squared())
    })
}

pub fn trace_pairing(phi_j: &Matrix5<f64>, xi: &PoincareGenerator) -> f64 {
    (phi_j.transpose() * xi.rep()).trace()
}
