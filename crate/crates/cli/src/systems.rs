//! Finite-dimensional test systems for the constraint algorithm.

use nalgebra::{DMatrix, DVector};
use presym_core::field::random::rng_from_seed;
use presym_core::{AntisymmetricForm, QuadraticHamiltonian};
use rand::Rng;

use crate::config::{PcaExample, PcaSystem};

/// `(ω, A, b)` with `H = ½xᵀAx + bᵀx`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub omega: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn form(&self) -> AntisymmetricForm {
        AntisymmetricForm::new(self.omega.clone()).expect("antisymmetric by construction")
    }

    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        QuadraticHamiltonian::new(self.a.clone(), self.b.clone(), 0.0).expect("symmetric by construction")
    }
}

/// `ω = e₁∧e₂` on ℝ³, `H = ½|x|²`; chain `[3, 2]`.
pub fn dim3_example() -> LinearSystem {
    let omega = AntisymmetricForm::from_wedges(3, &[(0, 1)]).matrix().clone();
    LinearSystem { omega, a: DMatrix::identity(3, 3), b: DVector::zeros(3) }
}

/// `ω = e₁∧e₂` on ℝ⁴, `H = ½(x₁² + x₂²) + x₃x₄`; chain `[4, 2]`.
pub fn dim4_example() -> LinearSystem {
    let omega = AntisymmetricForm::from_wedges(4, &[(0, 1)]).matrix().clone();
    let mut a = DMatrix::zeros(4, 4);
    a[(0, 0)] = 1.0;
    a[(1, 1)] = 1.0;
    a[(2, 3)] = 1.0;
    a[(3, 2)] = 1.0;
    LinearSystem { omega, a, b: DVector::zeros(4) }
}

/// Integer system of dimension 2..=8 with knocked-out rows and columns so
/// that kernels and Hessian ranks vary.
pub fn random_system(seed: u64) -> LinearSystem {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(2..=8usize);
    let mut int = |lo: i32, hi: i32| f64::from(rng.random_range(lo..=hi));
    let raw = DMatrix::from_fn(n, n, |_, _| int(-2, 2));
    let mut omega = &raw - raw.transpose();
    let raw = DMatrix::from_fn(n, n, |_, _| int(-2, 2));
    let mut a = &raw + raw.transpose();
    let b = DVector::from_fn(n, |_, _| int(-3, 3));
    let wrank = rng.random_range(0..4usize).min(n);
    let arank = rng.random_range(0..5usize).min(n);
    for k in 0..wrank {
        omega.row_mut(k).fill(0.0);
        omega.column_mut(k).fill(0.0);
    }
    for k in 0..arank {
        a.row_mut(n - 1 - k).fill(0.0);
        a.column_mut(n - 1 - k).fill(0.0);
    }
    LinearSystem { omega, a, b }
}

/// `ω = B S Bᵀ` with `B` a random `n × r` matrix and `S` a random
/// antisymmetric `r × r` matrix, `r = n − k` even; kernel dimension `k`.
pub fn random_degenerate_form(seed: u64, kernel_dim: usize) -> AntisymmetricForm {
    let mut rng = rng_from_seed(seed);
    let max_pairs = (8 - kernel_dim) / 2;
    let r = 2 * rng.random_range(0..=max_pairs);
    let n = r + kernel_dim;
    let bmat = DMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
    let raw = DMatrix::from_fn(r, r, |_, _| rng.random_range(-1.0..1.0));
    let s = &raw - raw.transpose();
    let m = &bmat * s * bmat.transpose();
    AntisymmetricForm::new((&m - m.transpose()) * 0.5).expect("antisymmetric by construction")
}

/// The system a PCA configuration describes; `random` draws from `seed`.
pub fn system_for(cfg: &PcaSystem, seed: u64) -> LinearSystem {
    match cfg {
        PcaSystem::Example { name: PcaExample::Dim3 } => dim3_example(),
        PcaSystem::Example { name: PcaExample::Dim4 } => dim4_example(),
        PcaSystem::Example { name: PcaExample::Random } => random_system(seed),
        PcaSystem::Explicit { dim, omega, hessian, linear } => {
            let pairs: Vec<(usize, usize)> = omega.iter().map(|[i, j]| (i - 1, j - 1)).collect();
            LinearSystem {
                omega: AntisymmetricForm::from_wedges(*dim, &pairs).matrix().clone(),
                a: DMatrix::from_row_slice(*dim, *dim, hessian),
                b: DVector::from_column_slice(linear),
            }
        }
    }
}
