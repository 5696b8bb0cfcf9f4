//! Sub-channel transmittance, the multicarrier transmission law and the
//! subcarrier-domain transform.

use crate::ensemble::sample_noise;
use crate::error::{ensure_len, ensure_nonzero, Error, Result};
use crate::fourier::{AnglePair, BasisSet, BasisVector, Direction, FourierOperator};
use crate::trig::cis_turns;
use crate::{CMatrix, CVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Tolerance for the `Re T = Im T` rule of strictly validated flat channels.
const QUADRATURE_BALANCE_TOL: f64 = 1e-12;

/// One path of a decomposed channel: a non-negative virtual gain between a
/// transmitted and a received direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathComponent {
    gain: f64,
    angles: AnglePair,
}

impl PathComponent {
    pub fn new(gain: f64, angles: AnglePair) -> Result<Self> {
        if !(gain.is_finite() && gain >= 0.0) {
            return Err(Error::NegativeGain(gain));
        }
        Ok(Self { gain, angles })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn angles(&self) -> &AnglePair {
        &self.angles
    }

    pub fn with_gain(&self, gain: f64) -> Result<Self> {
        Self::new(gain, self.angles)
    }
}

/// Channel transmittance, either one complex gain per sub-channel or a sum
/// of path components.
#[derive(Debug, Clone, PartialEq)]
pub enum Transmittance {
    Flat(Vec<Complex64>),
    Path(Vec<PathComponent>),
}

impl Transmittance {
    /// Flat transmittance. With `strict` set, every gain must satisfy
    /// `0 <= Re T = Im T <= 1/sqrt(2)`.
    pub fn flat(values: Vec<Complex64>, strict: bool) -> Result<Self> {
        ensure_nonzero(values.len(), "number of sub-channels")?;
        if strict {
            for (index, t) in values.iter().enumerate() {
                let bounded = |x: f64| (0.0..=FRAC_1_SQRT_2).contains(&x);
                if !bounded(t.re) || !bounded(t.im) {
                    return Err(Error::InvalidTransmittance {
                        index,
                        re: t.re,
                        im: t.im,
                        rule: "0 <= Re T, Im T <= 1/sqrt(2)",
                    });
                }
                if (t.re - t.im).abs() > QUADRATURE_BALANCE_TOL {
                    return Err(Error::InvalidTransmittance {
                        index,
                        re: t.re,
                        im: t.im,
                        rule: "Re T = Im T",
                    });
                }
            }
        }
        Ok(Transmittance::Flat(values))
    }

    pub fn paths(paths: Vec<PathComponent>) -> Self {
        Transmittance::Path(paths)
    }

    /// Seeded flat transmittance satisfying the strict rules, with
    /// `Re T_i = Im T_i` uniform on `[0, 1/sqrt(2)]`.
    pub fn random_flat(l: usize, seed: u64) -> Result<Self> {
        ensure_nonzero(l, "number of sub-channels")?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..l)
            .map(|_| {
                let q = rng.random::<f64>() * FRAC_1_SQRT_2;
                Complex64::new(q, q)
            })
            .collect();
        Self::flat(values, true)
    }

    pub fn flat_values(&self) -> Option<&[Complex64]> {
        match self {
            Transmittance::Flat(v) => Some(v),
            Transmittance::Path(_) => None,
        }
    }

    /// Channel matrix of size `l x l`: `diag(T)` for flat channels, the path
    /// sum otherwise.
    pub fn matrix(&self, l: usize) -> Result<CMatrix> {
        match self {
            Transmittance::Flat(v) => {
                ensure_len("flat transmittance", l, v.len())?;
                Ok(CMatrix::from_diagonal(&CVector::from_column_slice(v)))
            }
            Transmittance::Path(p) => path_matrix(p, l),
        }
    }
}

/// `d = U^-1 z`: split single carriers into subcarriers.
pub fn subcarrier_encode(z: &CVector) -> Result<CVector> {
    ensure_nonzero(z.len(), "input length")?;
    FourierOperator::new(z.len(), Direction::Inverse)?.apply(z)
}

/// `z = U d`: recombine subcarriers.
pub fn subcarrier_decode(d: &CVector) -> Result<CVector> {
    ensure_nonzero(d.len(), "input length")?;
    FourierOperator::new(d.len(), Direction::Forward)?.apply(d)
}

/// Unnormalized DFT of the flat gains, `F(T)_i = sum_k T_k exp(-i 2 pi i k / l)`.
pub fn fourier_transmittance(values: &[Complex64]) -> Result<CVector> {
    let l = values.len();
    ensure_nonzero(l, "number of sub-channels")?;
    Ok(CVector::from_fn(l, |i, _| {
        values
            .iter()
            .enumerate()
            .map(|(k, t)| t * cis_turns(-(((i * k) % l) as f64) / l as f64))
            .sum()
    }))
}

/// Path-decomposed channel `T = sum_p x_p b(cos theta_p) b(cos theta*_p)^H`
/// on `l` sub-channels.
pub fn path_matrix(paths: &[PathComponent], l: usize) -> Result<CMatrix> {
    path_matrix_rect(paths, l, l, l)
}

/// Rectangular path matrix of size `rows x cols` built from length-`rows`
/// received and length-`cols` transmitted basis vectors on grid scale `l`.
pub fn path_matrix_rect(paths: &[PathComponent], rows: usize, cols: usize, l: usize) -> Result<CMatrix> {
    ensure_nonzero(rows, "rows")?;
    ensure_nonzero(cols, "cols")?;
    let mut t = CMatrix::zeros(rows, cols);
    for path in paths {
        let received = BasisVector::new(path.angles.theta().cos(), rows, l)?;
        let sent = BasisVector::new(path.angles.theta_star().cos(), cols, l)?;
        t += received.entries() * sent.entries().adjoint() * Complex64::from(path.gain);
    }
    Ok(t)
}

/// A channel matrix expressed in the grid bases:
/// `entry(k, i) = b_out(k/l)^H T b_in(i/l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubcarrierDomainMatrix {
    entries: CMatrix,
    source_norm: f64,
}

impl SubcarrierDomainMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entry(&self, k: usize, i: usize) -> Complex64 {
        self.entries[(k, i)]
    }

    /// Frobenius norm of the channel matrix this was computed from.
    pub fn source_norm(&self) -> f64 {
        self.source_norm
    }

    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }
}

/// Change of basis `B_out^H T B_in` with the given grid bases.
pub fn domain_representation(
    t: &CMatrix,
    out_basis: &BasisSet,
    in_basis: &BasisSet,
) -> Result<SubcarrierDomainMatrix> {
    ensure_len("domain transform rows", out_basis.size(), t.nrows())?;
    ensure_len("domain transform cols", in_basis.size(), t.ncols())?;
    let b_out = out_basis.to_matrix();
    let b_in = in_basis.to_matrix();
    Ok(SubcarrierDomainMatrix {
        entries: b_out.adjoint() * t * b_in,
        source_norm: t.norm(),
    })
}

/// Subcarrier-domain representation of a square `l x l` channel matrix.
pub fn subcarrier_domain(t: &CMatrix, l: usize) -> Result<SubcarrierDomainMatrix> {
    if t.nrows() != t.ncols() {
        return Err(Error::NonSquare {
            rows: t.nrows(),
            cols: t.ncols(),
        });
    }
    ensure_len("subcarrier domain size", l, t.nrows())?;
    let basis = BasisSet::new(l, l)?;
    domain_representation(t, &basis, &basis)
}

/// `y = R d + noise`, with `noise` already in the output basis.
pub fn domain_transmit(d: &CVector, domain: &CMatrix, noise: &CVector) -> Result<CVector> {
    ensure_len("domain transmit input", domain.ncols(), d.len())?;
    ensure_len("domain transmit noise", domain.nrows(), noise.len())?;
    Ok(domain * d + noise)
}

/// Every intermediate of one multicarrier transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionRecord {
    /// Single-carrier vector `z = U d`.
    #[serde(with = "crate::pairs")]
    pub input: CVector,
    #[serde(with = "crate::pairs")]
    pub subcarriers: CVector,
    #[serde(with = "crate::pairs")]
    pub fourier_transmittance: CVector,
    /// CVQFT of the noise sample, `F(Delta)`.
    #[serde(with = "crate::pairs")]
    pub noise: CVector,
    #[serde(with = "crate::pairs")]
    pub output: CVector,
    /// Output in the subcarrier domain, `R d + F(Delta)` with
    /// `R = B^H diag(F(T)) B`. Mapping it back with `U` recovers `output`.
    #[serde(with = "crate::pairs")]
    pub domain_output: CVector,
}

impl TransmissionRecord {
    /// `U (domain_output - noise) + noise`, which should equal `output`.
    pub fn domain_output_in_carrier_basis(&self) -> Result<CVector> {
        let signal = &self.domain_output - &self.noise;
        Ok(subcarrier_decode(&signal)? + &self.noise)
    }
}

/// Sends subcarriers `d` over a flat channel:
/// `y_i = F(T)_i z_i + F(Delta)_i` with `z = U d`.
pub fn transmit(
    d: &CVector,
    transmittance: &Transmittance,
    noise_seed: u64,
    sigma_n_sq: f64,
) -> Result<TransmissionRecord> {
    let values = transmittance.flat_values().ok_or_else(|| Error::InvalidParameter {
        name: "transmittance",
        reason: "transmit requires a flat channel".into(),
    })?;
    let l = d.len();
    ensure_nonzero(l, "number of subcarriers")?;
    ensure_len("transmit", l, values.len())?;

    let forward = FourierOperator::new(l, Direction::Forward)?;
    let input = forward.apply(d)?;
    let ft = fourier_transmittance(values)?;
    let noise = forward.apply(&sample_noise(l, sigma_n_sq, noise_seed)?)?;
    let output = ft.component_mul(&input) + &noise;

    let domain = subcarrier_domain(&CMatrix::from_diagonal(&ft), l)?;
    let domain_output = domain_transmit(d, domain.entries(), &noise)?;

    Ok(TransmissionRecord {
        input,
        subcarriers: d.clone(),
        fourier_transmittance: ft,
        noise,
        output,
        domain_output,
    })
}
