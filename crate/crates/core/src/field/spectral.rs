//! Fourier-multiplier calculus on the periodic grid.
//!
//! All first-derivative symbols vanish at the Nyquist index, and the
//! Laplacian is `Σ_k D_k²`, so `Δ = div∘grad` holds exactly and every
//! operator is an exact discrete adjoint of its formal counterpart. Modes
//! where all three derivative symbols vanish (the zero mode and the seven
//! Nyquist corners) are the null modes of the discrete gradient.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{compensated_sum, Grid3, ScalarField, VectorField3};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Relative imaginary residue above which a spectral result is rejected.
pub const NOT_REAL_TOL: f64 = 1e-9;

/// Relative null-mode content above which the inverse Laplacian is refused.
pub const NULL_MODE_TOL: f64 = 1e-9;

fn fft_lines(data: &mut [Complex64], n: usize, inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    fft.process(data);
}

/// In-place unnormalized 3-D transform.
fn fft3(data: &mut [Complex64], n: usize, inverse: bool) {
    let nn = n * n;
    // Axis 3 is contiguous.
    fft_lines(data, n, inverse);
    // Axis 2: transpose each (j, k) plane.
    let mut plane = vec![Complex64::new(0.0, 0.0); nn];
    for i in 0..n {
        let base = i * nn;
        for j in 0..n {
            for k in 0..n {
                plane[k * n + j] = data[base + j * n + k];
            }
        }
        fft_lines(&mut plane, n, inverse);
        for j in 0..n {
            for k in 0..n {
                data[base + j * n + k] = plane[k * n + j];
            }
        }
    }
    // Axis 1: gather into (j, k, i) order.
    let mut t = vec![Complex64::new(0.0, 0.0); data.len()];
    for i in 0..n {
        for jk in 0..nn {
            t[jk * n + i] = data[i * nn + jk];
        }
    }
    fft_lines(&mut t, n, inverse);
    for i in 0..n {
        for jk in 0..nn {
            data[i * nn + jk] = t[jk * n + i];
        }
    }
}

/// Unnormalized discrete Fourier coefficients of a real grid field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid3,
    data: Vec<Complex64>,
    // Bound on the discrete l2 norm of any image, for roundoff floors.
    scale: f64,
}

impl Spectrum {
    pub fn of(f: &ScalarField) -> Self {
        let grid = *f.grid();
        let mut data: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft3(&mut data, grid.n(), false);
        let scale = f.values().iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { grid, data, scale }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.data
    }

    /// Wraps raw coefficients; `scale` bounds the l2 norm of the image and
    /// sets the round-off floor of the realness check.
    pub fn from_coefficients(grid: Grid3, data: Vec<Complex64>, scale: f64) -> Self {
        assert_eq!(data.len(), grid.len(), "coefficient count");
        Self { grid, data, scale }
    }

    /// Derivative wavenumbers of a flat mode index.
    pub fn mode_k(&self, idx: usize) -> [f64; 3] {
        let n = self.grid.n();
        let g = &self.grid;
        [
            g.derivative_wavenumber(idx / (n * n)),
            g.derivative_wavenumber((idx / n) % n),
            g.derivative_wavenumber(idx % n),
        ]
    }

    pub fn discrete_norm(&self) -> f64 {
        (self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.data.len() as f64).sqrt()
    }

    /// Multiplies every mode by `symbol(j)` where `j` is the index triple.
    pub fn multiplied(&self, symbol: impl Fn([usize; 3]) -> Complex64) -> Self {
        let n = self.grid.n();
        let mut smax = 0.0f64;
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let m = symbol([idx / (n * n), (idx / n) % n, idx % n]);
                smax = smax.max(m.norm());
                c * m
            })
            .collect();
        Self { grid: self.grid, data, scale: self.scale * smax }
    }

    /// Same as [`Spectrum::multiplied`] with the derivative wavenumbers.
    pub fn multiplied_k(&self, symbol: impl Fn([f64; 3]) -> Complex64) -> Self {
        let ks = derivative_wavenumbers(&self.grid);
        self.multiplied(|j| symbol([ks[j[0]], ks[j[1]], ks[j[2]]]))
    }

    /// Mode-wise combination `f(k, self_k, other_k)` with derivative wavenumbers.
    pub fn combined_k(&self, other: &Spectrum, f: impl Fn([f64; 3], Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let ks = derivative_wavenumbers(&self.grid);
        let n = self.grid.n();
        let data: Vec<Complex64> = self
            .data
            .iter()
            .zip(&other.data)
            .enumerate()
            .map(|(idx, (a, b))| f([ks[idx / (n * n)], ks[(idx / n) % n], ks[idx % n]], *a, *b))
            .collect();
        let scale = (data.iter().map(|c| c.norm_sqr()).sum::<f64>() / data.len() as f64).sqrt();
        Self { grid: self.grid, data, scale }
    }

    /// Inverse transform with the imaginary-residue check.
    pub fn to_field(&self) -> Result<ScalarField> {
        let (re, im) = self.inverse_parts();
        let norm = re.iter().map(|v| v * v).sum::<f64>().sqrt();
        let residue = im.iter().map(|v| v * v).sum::<f64>().sqrt();
        if residue > NOT_REAL_TOL * norm && residue > 1e-12 * self.scale {
            return Err(Error::NotReal { residue: residue / norm.max(1e-300) });
        }
        Ok(ScalarField::from_values_unchecked(self.grid, re))
    }

    fn inverse_parts(&self) -> (Vec<f64>, Vec<f64>) {
        let mut data = self.data.clone();
        fft3(&mut data, self.grid.n(), true);
        let inv = 1.0 / self.grid.len() as f64;
        data.iter().map(|c| (c.re * inv, c.im * inv)).unzip()
    }

    /// L² norm of the null-mode content, in the units of [`ScalarField::norm`].
    pub fn null_mode_norm(&self) -> f64 {
        let n = self.grid.n();
        let h = n / 2;
        let mut s = 0.0;
        for a in [0, h] {
            for b in [0, h] {
                for c in [0, h] {
                    s += self.data[(a * n + b) * n + c].norm_sqr();
                }
            }
        }
        (s * self.grid.cell_volume() / self.grid.len() as f64).sqrt()
    }
}

fn derivative_wavenumbers(grid: &Grid3) -> Vec<f64> {
    (0..grid.n()).map(|j| grid.derivative_wavenumber(j)).collect()
}

fn is_null(k: [f64; 3]) -> bool {
    k[0] == 0.0 && k[1] == 0.0 && k[2] == 0.0
}

fn i_times(x: f64) -> Complex64 {
    Complex64::new(0.0, x)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `∂_axis f` for `axis ∈ {1, 2, 3}`.
pub fn spectral_derivative(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    assert!((1..=3).contains(&axis), "axis must be 1, 2 or 3");
    Spectrum::of(f).multiplied_k(|k| i_times(k[axis - 1])).to_field()
}

pub fn laplacian(f: &ScalarField) -> Result<ScalarField> {
    Spectrum::of(f).multiplied_k(|k| real(-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]))).to_field()
}

pub fn gradient(f: &ScalarField) -> Result<VectorField3> {
    let s = Spectrum::of(f);
    VectorField3::new(
        s.multiplied_k(|k| i_times(k[0])).to_field()?,
        s.multiplied_k(|k| i_times(k[1])).to_field()?,
        s.multiplied_k(|k| i_times(k[2])).to_field()?,
    )
}

pub fn divergence(v: &VectorField3) -> Result<ScalarField> {
    let mut acc = Spectrum::of(v.get(1)).multiplied_k(|k| i_times(k[0]));
    for axis in 2..=3 {
        let s = Spectrum::of(v.get(axis)).multiplied_k(|k| i_times(k[axis - 1]));
        for (a, b) in acc.data.iter_mut().zip(&s.data) {
            *a += b;
        }
        acc.scale += s.scale;
    }
    acc.to_field()
}

pub fn curl(v: &VectorField3) -> Result<VectorField3> {
    let d = |c: usize, axis: usize| spectral_derivative(v.get(c), axis);
    VectorField3::new(&d(3, 2)? - &d(2, 3)?, &d(1, 3)? - &d(3, 1)?, &d(2, 1)? - &d(1, 2)?)
}

/// Splits `v` into a divergence-free part and a gradient part.
///
/// The longitudinal projector is `k kᵀ/|k|²` on non-null modes; null modes go
/// wholly to the transverse part.
pub fn helmholtz_decompose(v: &VectorField3) -> Result<(VectorField3, VectorField3)> {
    let specs: Vec<Spectrum> = v.components.iter().map(Spectrum::of).collect();
    let grid = *v.grid();
    let ks = derivative_wavenumbers(&grid);
    let n = grid.n();
    let mut long: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; 3];
    for idx in 0..grid.len() {
        let k = [ks[idx / (n * n)], ks[(idx / n) % n], ks[idx % n]];
        if is_null(k) {
            continue;
        }
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        let kv = specs[0].data[idx] * k[0] + specs[1].data[idx] * k[1] + specs[2].data[idx] * k[2];
        for c in 0..3 {
            long[c][idx] = kv * (k[c] / k2);
        }
    }
    let mut lf = Vec::with_capacity(3);
    let mut tf = Vec::with_capacity(3);
    for (c, l) in long.into_iter().enumerate() {
        let scale = specs.iter().map(|s| s.scale).fold(0.0, f64::max);
        let ls = Spectrum { grid, data: l, scale };
        let ts = Spectrum {
            grid,
            data: specs[c].data.iter().zip(&ls.data).map(|(a, b)| a - b).collect(),
            scale,
        };
        lf.push(ls.to_field()?);
        tf.push(ts.to_field()?);
    }
    let [l1, l2, l3]: [ScalarField; 3] = lf.try_into().expect("three components");
    let [t1, t2, t3]: [ScalarField; 3] = tf.try_into().expect("three components");
    Ok((VectorField3::new(t1, t2, t3)?, VectorField3::new(l1, l2, l3)?))
}

pub fn transverse_part(v: &VectorField3) -> Result<VectorField3> {
    Ok(helmholtz_decompose(v)?.0)
}

/// Removes the null-mode content of `f`.
pub fn remove_null_modes(f: &ScalarField) -> Result<ScalarField> {
    Spectrum::of(f).multiplied_k(|k| real(if is_null(k) { 0.0 } else { 1.0 })).to_field()
}

/// Solves `Δg = f` with `g` free of null modes.
///
/// Fails with `NonZeroMean` when `f` has null-mode content above
/// [`NULL_MODE_TOL`]·‖f‖ (the zero mode is the mean).
pub fn inverse_laplacian(f: &ScalarField) -> Result<ScalarField> {
    let s = Spectrum::of(f);
    let null = s.null_mode_norm();
    let norm = f.norm();
    if null > NULL_MODE_TOL * norm {
        return Err(Error::NonZeroMean { mean: null / norm.max(1e-300) });
    }
    inverse_laplacian_projected(&s)
}

/// `Δ⁻¹` on the complement of the null modes, discarding null content.
pub(crate) fn inverse_laplacian_projected(s: &Spectrum) -> Result<ScalarField> {
    s.multiplied_k(|k| {
        let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        real(if k2 == 0.0 { 0.0 } else { -1.0 / k2 })
    })
    .to_field()
}

/// Rectangle-rule integral `h³ Σ f`.
pub fn integrate(f: &ScalarField) -> f64 {
    f.sum() * f.grid().cell_volume()
}

/// `∫ f g` by direct quadrature.
pub fn inner(f: &ScalarField, g: &ScalarField) -> f64 {
    compensated_sum(f.values().iter().zip(g.values()).map(|(a, b)| a * b)) * f.grid().cell_volume()
}

/// `∫ u·v` for vector fields.
pub fn inner_vec(u: &VectorField3, v: &VectorField3) -> f64 {
    (1..=3).map(|k| inner(u.get(k), v.get(k))).sum()
}

/// `∫ f g` computed in frequency space through Parseval's identity.
pub fn inner_spectral(f: &ScalarField, g: &ScalarField) -> f64 {
    let a = Spectrum::of(f);
    let b = Spectrum::of(g);
    let s: f64 = a.data.iter().zip(&b.data).map(|(x, y)| (x * y.conj()).re).sum();
    s * f.grid().cell_volume() / f.grid().len() as f64
}

/// Applies the Fourier multiplier `symbol(k_true)` built from the full
/// wavenumbers, Nyquist included.
pub fn filter_true_k(f: &ScalarField, symbol: impl Fn([f64; 3]) -> f64) -> Result<ScalarField> {
    let g = *f.grid();
    let ks: Vec<f64> = (0..g.n()).map(|j| g.wavenumber(j)).collect();
    Spectrum::of(f).multiplied(|j| real(symbol([ks[j[0]], ks[j[1]], ks[j[2]]]))).to_field()
}
