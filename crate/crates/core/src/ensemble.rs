//! Seeded circular-symmetric complex Gaussian sampling.

use crate::error::{ensure_nonzero, Error, Result};
use crate::{CMatrix, CVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Sampler of zero-mean circular-symmetric complex Gaussian vectors whose
/// real and imaginary parts are i.i.d. `N(0, sigma_sq)`, so that
/// `E|z_j|^2 = 2 sigma_sq`.
///
/// The generator state is owned; clone with a different seed to sample in
/// parallel.
#[derive(Debug, Clone)]
pub struct GaussianEnsemble {
    dimension: usize,
    sigma_sq: f64,
    seed: u64,
    rng: ChaCha8Rng,
    quadrature: Option<Normal<f64>>,
}

impl GaussianEnsemble {
    /// `sigma_sq` must be strictly positive.
    pub fn new(dimension: usize, sigma_sq: f64, seed: u64) -> Result<Self> {
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(Error::InvalidVariance(sigma_sq));
        }
        Self::build(dimension, sigma_sq, seed)
    }

    /// Like [`GaussianEnsemble::new`] but accepts `sigma_sq == 0`, which
    /// yields all-zero samples. Used for noise, where a noiseless channel is a
    /// legitimate configuration.
    pub fn allowing_zero(dimension: usize, sigma_sq: f64, seed: u64) -> Result<Self> {
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(Error::InvalidVariance(sigma_sq));
        }
        Self::build(dimension, sigma_sq, seed)
    }

    fn build(dimension: usize, sigma_sq: f64, seed: u64) -> Result<Self> {
        ensure_nonzero(dimension, "ensemble dimension")?;
        let quadrature = if sigma_sq > 0.0 {
            Some(Normal::new(0.0, sigma_sq.sqrt()).map_err(|e| Error::InvalidParameter {
                name: "sigma_sq",
                reason: e.to_string(),
            })?)
        } else {
            None
        };
        Ok(Self {
            dimension,
            sigma_sq,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            quadrature,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_scalar(&mut self) -> Complex64 {
        match &self.quadrature {
            Some(normal) => {
                let re = normal.sample(&mut self.rng);
                let im = normal.sample(&mut self.rng);
                Complex64::new(re, im)
            }
            None => Complex64::ZERO,
        }
    }

    pub fn sample(&mut self) -> CVector {
        CVector::from_fn(self.dimension, |_, _| self.sample_scalar())
    }

    /// Column-major `rows x cols` matrix of i.i.d. entries.
    pub fn sample_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.sample_scalar())
    }
}

/// Input single-carrier vector `z` of `n` components, quadratures
/// `N(0, sigma_omega0_sq)`.
pub fn sample_input(n: usize, sigma_omega0_sq: f64, seed: u64) -> Result<CVector> {
    Ok(GaussianEnsemble::new(n, sigma_omega0_sq, seed)?.sample())
}

/// Pre-Fourier noise vector with quadrature variance `sigma_n_sq` (zero
/// allowed).
pub fn sample_noise(n: usize, sigma_n_sq: f64, seed: u64) -> Result<CVector> {
    Ok(GaussianEnsemble::allowing_zero(n, sigma_n_sq, seed)?.sample())
}

/// Statistical stand-in for a domain matrix: i.i.d. `CN(0, sigma_t_sq)`
/// entries, where `sigma_t_sq = E|entry|^2` (each quadrature carries half).
pub fn statistical_model(rows: usize, cols: usize, sigma_t_sq: f64, seed: u64) -> Result<CMatrix> {
    ensure_nonzero(rows, "rows")?;
    ensure_nonzero(cols, "cols")?;
    if !(sigma_t_sq.is_finite() && sigma_t_sq > 0.0) {
        return Err(Error::InvalidVariance(sigma_t_sq));
    }
    let mut ensemble = GaussianEnsemble::new(rows * cols, sigma_t_sq / 2.0, seed)?;
    Ok(ensemble.sample_matrix(rows, cols))
}
