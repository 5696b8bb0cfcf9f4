//! Unitary Fourier operators, Fourier basis vectors and the periodic-sinc
//! kernel that measures how well a received direction lines up with a
//! transmitted one.

use crate::error::{ensure_nonzero, Error, Result};
use crate::trig::{cis_pi, cis_turns, sin_pi, sinc};
use crate::{CMatrix, CVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Below this `|sin(pi tau)|` the kernel is evaluated through its limit.
pub const SINGULAR_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `exp(-i 2 pi m k / K)`
    Forward,
    /// `exp(+i 2 pi m k / K)`
    Inverse,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        }
    }

    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// Unitary DFT operator of size `K x K`, scaled by `1/sqrt(K)`.
///
/// Entries are stored as the `K` distinct values `entry(m, n) = w[(m n) mod K]`,
/// so the matrix is symmetric bit for bit and applying the operator does not
/// require materializing it.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierOperator {
    direction: Direction,
    twiddles: Vec<Complex64>,
}

impl FourierOperator {
    pub fn new(size: usize, direction: Direction) -> Result<Self> {
        ensure_nonzero(size, "operator size")?;
        let scale = 1.0 / (size as f64).sqrt();
        let sign = direction.sign();
        let twiddles = (0..size)
            .map(|j| cis_turns(sign * j as f64 / size as f64) * scale)
            .collect();
        Ok(Self {
            direction,
            twiddles,
        })
    }

    pub fn size(&self) -> usize {
        self.twiddles.len()
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        let k = self.size() as u64;
        self.twiddles[((row as u64 % k) * (col as u64 % k) % k) as usize]
    }

    /// Dense `K x K` matrix.
    pub fn matrix(&self) -> CMatrix {
        let n = self.size();
        CMatrix::from_fn(n, n, |r, c| self.entry(r, c))
    }

    /// The operator of the opposite direction: the entrywise conjugate, which
    /// is also the adjoint since the matrix is symmetric.
    pub fn inverse(&self) -> Self {
        Self {
            direction: self.direction.flip(),
            twiddles: self.twiddles.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn apply(&self, input: &CVector) -> Result<CVector> {
        crate::error::ensure_len("Fourier operator input", self.size(), input.len())?;
        let n = self.size();
        Ok(CVector::from_fn(n, |m, _| {
            let mut idx = 0usize;
            let mut acc = Complex64::ZERO;
            for x in input.iter() {
                acc += self.twiddles[idx] * x;
                idx += m;
                if idx >= n {
                    idx %= n;
                }
            }
            acc
        }))
    }

    /// Largest entrywise deviation of `U U^H` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let rows: Vec<usize> = (0..self.size()).collect();
        self.unitarity_error_rows(&rows)
    }

    /// Like [`FourierOperator::unitarity_error`] restricted to the given
    /// rows of `U U^H` (every column is still checked).
    pub fn unitarity_error_rows(&self, rows: &[usize]) -> f64 {
        let n = self.size();
        let mut worst = 0.0f64;
        for &m in rows {
            for c in 0..n {
                let (mut im, mut ic) = (0usize, 0usize);
                let mut acc = Complex64::ZERO;
                for _ in 0..n {
                    acc += self.twiddles[im] * self.twiddles[ic].conj();
                    im = (im + m) % n;
                    ic = (ic + c) % n;
                }
                let target = if m == c { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((acc - target).norm());
            }
        }
        worst
    }
}

pub(crate) fn max_identity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            let target = if r == c { Complex64::ONE } else { Complex64::ZERO };
            worst = worst.max((m[(r, c)] - target).norm());
        }
    }
    worst
}

/// Builds the unitary CVQFT matrix for `l` subcarriers.
pub fn build_cvqft(l: usize, direction: Direction) -> Result<FourierOperator> {
    FourierOperator::new(l, direction)
}

/// A unit-norm Fourier (steering) vector `b(x)` of length `K` on a grid of
/// scale `l`: `entry(m) = exp(-i 2 pi m l x / K) / sqrt(K)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    parameter: f64,
    scale: usize,
    entries: CVector,
}

impl BasisVector {
    pub fn new(parameter: f64, length: usize, scale: usize) -> Result<Self> {
        ensure_nonzero(length, "basis vector length")?;
        ensure_nonzero(scale, "grid scale l")?;
        if !parameter.is_finite() {
            return Err(Error::InvalidParameter {
                name: "basis parameter",
                reason: format!("must be finite, got {parameter}"),
            });
        }
        let norm = 1.0 / (length as f64).sqrt();
        let (l, k) = (scale as f64, length as f64);
        let entries = CVector::from_fn(length, |m, _| {
            let turns = m as f64 * l * parameter / k;
            cis_turns(-turns) * norm
        });
        Ok(Self {
            parameter,
            scale,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn entries(&self) -> &CVector {
        &self.entries
    }

    /// `self^H other`
    pub fn inner(&self, other: &BasisVector) -> Result<Complex64> {
        crate::error::ensure_len("basis inner product", self.len(), other.len())?;
        Ok(self.entries.dotc(&other.entries))
    }
}

pub fn basis_vector(x: f64, length: usize, scale: usize) -> Result<BasisVector> {
    BasisVector::new(x, length, scale)
}

/// The ordered grid basis `b(0), b(1/l), ..., b((K-1)/l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSet {
    scale: usize,
    members: Vec<BasisVector>,
}

impl BasisSet {
    pub fn new(size: usize, scale: usize) -> Result<Self> {
        ensure_nonzero(size, "basis set size")?;
        ensure_nonzero(scale, "grid scale l")?;
        let members = (0..size)
            .map(|k| BasisVector::new(k as f64 / scale as f64, size, scale))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { scale, members })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn members(&self) -> &[BasisVector] {
        &self.members
    }

    /// Members as matrix columns.
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.size();
        CMatrix::from_fn(n, n, |r, c| self.members[c].entries[r])
    }

    pub fn gram(&self) -> CMatrix {
        let b = self.to_matrix();
        b.adjoint() * b
    }

    pub fn orthonormality_error(&self) -> f64 {
        max_identity_deviation(&self.gram())
    }
}

/// Phase-space angles of a transmitted (`theta_star`) and received (`theta`)
/// subcarrier, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnglePair {
    theta_star: f64,
    theta: f64,
}

impl AnglePair {
    pub fn new(theta_star: f64, theta: f64) -> Result<Self> {
        check_angle("theta_star", theta_star)?;
        check_angle("theta", theta)?;
        Ok(Self { theta_star, theta })
    }

    /// Wraps both angles into `[0, 2pi)` first.
    pub fn wrapped(theta_star: f64, theta: f64) -> Result<Self> {
        Self::new(theta_star.rem_euclid(TAU), theta.rem_euclid(TAU))
    }

    pub fn theta_star(&self) -> f64 {
        self.theta_star
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `cos(theta) - cos(theta_star)`, always in `[-2, 2]`.
    pub fn tau(&self) -> f64 {
        self.theta.cos() - self.theta_star.cos()
    }

    /// `theta - theta_star`
    pub fn omega(&self) -> f64 {
        self.theta - self.theta_star
    }
}

fn check_angle(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=TAU).contains(&value) {
        Ok(())
    } else {
        Err(Error::AngleOutOfRange { name, value })
    }
}

/// Periodic-sinc (Dirichlet) kernel
/// `f(tau) = exp(i pi (l-1) tau) sin(pi l tau) / (l sin(pi tau))`.
///
/// The kernel has period 1 in `tau`; the argument is reduced to
/// `[-1/2, 1/2]` before evaluation. Near integer `tau` the removable
/// singularity is resolved by the second-order expansion of the limit, which
/// is exactly `1` at integers.
pub fn f_tau(tau: f64, l: usize) -> Complex64 {
    let l = l.max(1) as f64;
    let r = tau - tau.round();
    let phase = cis_pi((l - 1.0) * r);
    let den = sin_pi(r);
    let ratio = if den.abs() < SINGULAR_GUARD {
        1.0 - (l * l - 1.0) * (PI * r).powi(2) / 6.0
    } else {
        sin_pi(l * r) / (l * den)
    };
    phase * ratio
}

/// Large-`l` approximation `exp(i pi l tau) sinc(l tau)`.
pub fn f_tau_sinc_limit(tau: f64, l: usize) -> Complex64 {
    let x = l as f64 * tau;
    cis_pi(x) * sinc(x)
}

/// `|cos(Omega)|` for an angle pair, evaluated through the closed form
/// `|f(tau)|`.
pub fn cos_omega(pair: &AnglePair, l: usize) -> f64 {
    f_tau(pair.tau(), l).norm()
}

/// `|b(cos theta*)^H b(cos theta)|`, the inner-product route to
/// [`cos_omega`].
pub fn cos_omega_inner(pair: &AnglePair, l: usize) -> Result<f64> {
    let sent = BasisVector::new(pair.theta_star.cos(), l, l)?;
    let received = BasisVector::new(pair.theta.cos(), l, l)?;
    Ok(sent.inner(&received)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelPoint {
    pub cos_theta: f64,
    pub abs_f: f64,
}

/// `resolution + 1` evenly spaced cosines covering `[-1, 1]`, endpoints and
/// (for even `resolution`) zero included exactly.
pub fn cosine_grid(resolution: usize) -> Result<Vec<f64>> {
    if resolution < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("resolution must be at least 2, got {resolution}"),
        });
    }
    let n = resolution as i64;
    Ok((0..=n).map(|j| (2 * j - n) as f64 / n as f64).collect())
}

/// Curve `(cos theta, |f(cos theta - cos theta*)|)` over the cosine grid.
pub fn kernel_plot(theta_star: f64, l: usize, resolution: usize) -> Result<Vec<KernelPoint>> {
    ensure_nonzero(l, "l")?;
    let center = theta_star.cos();
    Ok(cosine_grid(resolution)?
        .into_iter()
        .map(|cos_theta| KernelPoint {
            cos_theta,
            abs_f: f_tau(cos_theta - center, l).norm(),
        })
        .collect())
}

/// Curve of the grid basis vector `b(k/l)`: `(cos theta, |f(cos theta - k/l)|)`.
pub fn basis_kernel_plot(k: usize, l: usize, resolution: usize) -> Result<Vec<KernelPoint>> {
    ensure_nonzero(l, "l")?;
    let center = k as f64 / l as f64;
    Ok(cosine_grid(resolution)?
        .into_iter()
        .map(|cos_theta| KernelPoint {
            cos_theta,
            abs_f: f_tau(cos_theta - center, l).norm(),
        })
        .collect())
}

/// Whether `theta` falls in the domain bin of index `k`:
/// `|cos theta - k/l| < 1/l`.
pub fn in_domain_bin(theta: f64, k: usize, l: usize) -> bool {
    in_domain_bin_cos(theta.cos(), k, l)
}

pub fn in_domain_bin_cos(cos_theta: f64, k: usize, l: usize) -> bool {
    let l = l as f64;
    (cos_theta - k as f64 / l).abs() < 1.0 / l
}
