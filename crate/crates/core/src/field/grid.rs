use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Periodic cube of edge `length` with `n` points per axis, centered at 0.
///
/// Point `(i, j, k)` sits at `((i − n/2)h, (j − n/2)h, (k − n/2)h)` and is
/// stored at flat index `(i·n + j)·n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    n: usize,
    length: f64,
}

impl Grid3 {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("n = {n} must be a power of two ≥ 4")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Coordinate along one axis for index `i`.
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.spacing()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// `[x¹, x², x³]` of a flat index.
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [self.coord(idx / (n * n)), self.coord((idx / n) % n), self.coord(idx % n)]
    }

    /// Signed integer frequency of index `j`; the Nyquist index maps to `−n/2`.
    pub fn frequency(&self, j: usize) -> i64 {
        let n = self.n as i64;
        let j = j as i64;
        if j < n / 2 {
            j
        } else {
            j - n
        }
    }

    /// `2πf/L` including the Nyquist frequency.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * self.frequency(j) as f64 / self.length
    }

    /// Symbol of the spectral first derivative: the Nyquist frequency has no
    /// real-valued derivative and is mapped to 0.
    pub fn derivative_wavenumber(&self, j: usize) -> f64 {
        if j == self.n / 2 {
            0.0
        } else {
            self.wavenumber(j)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid3,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid3) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid3, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Rejects wrong lengths and non-finite entries.
    pub fn from_values(grid: Grid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch { expected: grid.len(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("scalar".into()));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_values_unchecked(grid: Grid3, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self { grid, values }
    }

    /// The coordinate function `x^axis` for `axis ∈ {1, 2, 3}`.
    pub fn coordinate(grid: Grid3, axis: usize) -> Self {
        Self::from_fn(grid, |x| x[axis - 1])
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { grid: self.grid, values }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c·other`.
    pub fn axpy(&self, c: f64, other: &ScalarField) -> Self {
        self.zip_with(other, |a, b| a + c * b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &ScalarField) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn sum(&self) -> f64 {
        compensated_sum(self.values.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    /// Continuum L² norm `(∫ f²)^{1/2}` by the rectangle rule.
    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Largest absolute value outside the central cube of half-width
    /// `fraction·L/2`.
    pub fn max_abs_outside(&self, fraction: f64) -> f64 {
        let half = 0.5 * fraction * self.grid.length();
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.grid.position(*i).iter().any(|c| c.abs() > half))
            .fold(0.0, |m, (_, v)| m.max(v.abs()))
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

impl Mul<&ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        rhs.scale(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub components: [ScalarField; 3],
}

impl VectorField3 {
    pub fn new(c1: ScalarField, c2: ScalarField, c3: ScalarField) -> Result<Self> {
        c1.same_grid(&c2)?;
        c1.same_grid(&c3)?;
        Ok(Self { components: [c1, c2, c3] })
    }

    pub fn zeros(grid: Grid3) -> Self {
        Self { components: [ScalarField::zeros(grid), ScalarField::zeros(grid), ScalarField::zeros(grid)] }
    }

    pub fn grid(&self) -> &Grid3 {
        self.components[0].grid()
    }

    /// Component `k ∈ {1, 2, 3}`.
    pub fn get(&self, k: usize) -> &ScalarField {
        &self.components[k - 1]
    }

    pub fn same_grid(&self, other: &VectorField3) -> Result<()> {
        self.components[0].same_grid(&other.components[0])
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self { components: [f(&self.components[0]), f(&self.components[1]), f(&self.components[2])] }
    }

    pub fn zip_components(&self, other: &VectorField3, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        Self {
            components: [
                f(&self.components[0], &other.components[0]),
                f(&self.components[1], &other.components[1]),
                f(&self.components[2], &other.components[2]),
            ],
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map_components(|f| f.scale(c))
    }

    pub fn axpy(&self, c: f64, other: &VectorField3) -> Self {
        self.zip_components(other, |a, b| a.axpy(c, b))
    }

    /// Pointwise `u·v`.
    pub fn dot(&self, other: &VectorField3) -> ScalarField {
        let mut out = self.components[0].mul(&other.components[0]);
        for k in 1..3 {
            out = out.axpy(1.0, &self.components[k].mul(&other.components[k]));
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn max_abs_outside(&self, fraction: f64) -> f64 {
        self.components.iter().fold(0.0, |m, c| m.max(c.max_abs_outside(fraction)))
    }

    pub fn is_finite(&self) -> bool {
        self.components.iter().all(|c| c.is_finite())
    }
}

impl Add for &VectorField3 {
    type Output = VectorField3;
    fn add(self, rhs: &VectorField3) -> VectorField3 {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &VectorField3 {
    type Output = VectorField3;
    fn sub(self, rhs: &VectorField3) -> VectorField3 {
        self.axpy(-1.0, rhs)
    }
}
