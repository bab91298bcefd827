//! Seeded localized band-limited test fields.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::grid::{Grid3, ScalarField};
use super::spectral::filter_true_k;
use crate::error::Result;

/// Gaussian random field times a centered Gaussian envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalizedSpec {
    /// Envelope standard deviation.
    pub sigma: f64,
    /// Standard deviation of the spectral Gaussian filter.
    pub k_cut: f64,
    /// Peak absolute value after normalization.
    pub amplitude: f64,
}

impl LocalizedSpec {
    /// Envelope of total width `width·L` read as `4σ`. The spectral cut is
    /// `1/σ`, lowered when needed so that the enveloped field has spectral
    /// standard deviation at most a fifth of the Nyquist wavenumber.
    pub fn from_width(grid: &Grid3, width: f64, amplitude: f64) -> Self {
        let sigma = 0.25 * width * grid.length();
        let budget = (RESOLUTION_FACTOR * std::f64::consts::PI / grid.spacing()).powi(2) - sigma.powi(-2);
        let k_cut = if budget > 0.0 { budget.sqrt().min(1.0 / sigma) } else { 1.0 / sigma };
        Self { sigma, k_cut, amplitude }
    }
}

/// Largest spectral standard deviation of generated data, in units of the
/// Nyquist wavenumber.
const RESOLUTION_FACTOR: f64 = 0.2;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// White noise with the top third of frequencies removed and a Gaussian
/// spectral profile `exp(−|k|²/2k_c²)`.
pub fn band_limited(grid: Grid3, k_cut: f64, rng: &mut ChaCha8Rng) -> Result<ScalarField> {
    let values: Vec<f64> = (0..grid.len()).map(|_| StandardNormal.sample(rng)).collect();
    let noise = ScalarField::from_values(grid, values)?;
    let kmax = grid.wavenumber(grid.n() / 2).abs() * 2.0 / 3.0;
    filter_true_k(&noise, |k| {
        if k.iter().any(|c| c.abs() > kmax) {
            0.0
        } else {
            (-(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / (2.0 * k_cut * k_cut)).exp()
        }
    })
}

pub fn envelope(grid: Grid3, sigma: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (2.0 * sigma * sigma)).exp())
}

/// One localized field drawn from `rng`.
pub fn localized(grid: Grid3, spec: &LocalizedSpec, rng: &mut ChaCha8Rng) -> Result<ScalarField> {
    let f = band_limited(grid, spec.k_cut, rng)?.mul(&envelope(grid, spec.sigma));
    let peak = f.max_abs();
    if peak == 0.0 || spec.amplitude == 0.0 {
        return Ok(ScalarField::zeros(grid));
    }
    Ok(f.scale(spec.amplitude / peak))
}

/// Band-limited field without envelope, normalized to unit peak.
pub fn periodic(grid: Grid3, k_cut: f64, rng: &mut ChaCha8Rng) -> Result<ScalarField> {
    let f = band_limited(grid, k_cut, rng)?;
    let peak = f.max_abs();
    Ok(if peak == 0.0 { f } else { f.scale(1.0 / peak) })
}
