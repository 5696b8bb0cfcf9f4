//! Multiple-access generalization with `K_in` transmitting and `K_out`
//! receiving users sharing `l` Gaussian sub-channels.

use crate::channel::{domain_representation, path_matrix_rect, PathComponent, SubcarrierDomainMatrix};
use crate::ensemble::{sample_input, sample_noise};
use crate::error::{ensure_len, ensure_nonzero, Error, Result};
use crate::fourier::{BasisSet, Direction, FourierOperator, SINGULAR_GUARD};
use crate::trig::{cis_pi, sin_pi};
use crate::{CMatrix, CVector, Complex64};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_1_SQRT_2, PI};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiuserConfig {
    pub k_in: usize,
    pub k_out: usize,
    pub l: usize,
    pub sigma_sq: f64,
    pub sigma_n_sq: f64,
    pub seed: u64,
}

impl MultiuserConfig {
    pub fn new(k_in: usize, k_out: usize, l: usize) -> Self {
        Self {
            k_in,
            k_out,
            l,
            sigma_sq: 1.0,
            sigma_n_sq: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonzero(self.k_in, "k_in")?;
        ensure_nonzero(self.k_out, "k_out")?;
        ensure_nonzero(self.l, "l")?;
        if !(self.sigma_sq.is_finite() && self.sigma_sq > 0.0) {
            return Err(Error::InvalidVariance(self.sigma_sq));
        }
        if !(self.sigma_n_sq.is_finite() && self.sigma_n_sq >= 0.0) {
            return Err(Error::InvalidVariance(self.sigma_n_sq));
        }
        Ok(())
    }

    /// Seed of the noise sample `Delta`; the same value drives the
    /// single-user noise in [`crate::transmit`] for reduction checks.
    pub fn noise_seed(&self) -> u64 {
        self.seed.wrapping_add(1)
    }

    /// Random single-carrier input `Z` of the `K_in` users.
    pub fn sample_input(&self) -> Result<CVector> {
        sample_input(self.k_in, self.sigma_sq, self.seed)
    }
}

/// `(U_in, U_out)`: the inverse CVQFT of size `K_in` and the forward CVQFT of
/// size `K_out`.
pub fn build_multiuser_operators(cfg: &MultiuserConfig) -> Result<(FourierOperator, FourierOperator)> {
    cfg.validate()?;
    Ok((
        FourierOperator::new(cfg.k_in, Direction::Inverse)?,
        FourierOperator::new(cfg.k_out, Direction::Forward)?,
    ))
}

/// Grid bases `b(0), ..., b((K-1)/l)` of lengths `K_in` and `K_out`.
pub fn multiuser_basis_sets(cfg: &MultiuserConfig) -> Result<(BasisSet, BasisSet)> {
    cfg.validate()?;
    Ok((BasisSet::new(cfg.k_in, cfg.l)?, BasisSet::new(cfg.k_out, cfg.l)?))
}

/// `K_out x K_in` channel built path by path from length-`K_out` received and
/// length-`K_in` transmitted basis vectors.
pub fn multiuser_path_matrix(paths: &[PathComponent], cfg: &MultiuserConfig) -> Result<CMatrix> {
    cfg.validate()?;
    path_matrix_rect(paths, cfg.k_out, cfg.k_in, cfg.l)
}

/// `entry(k, i) = b_out(k/l)^H T b_in(i/l)` for a `K_out x K_in` channel.
pub fn multiuser_subcarrier_domain(t: &CMatrix, cfg: &MultiuserConfig) -> Result<SubcarrierDomainMatrix> {
    let (b_in, b_out) = multiuser_basis_sets(cfg)?;
    ensure_len("multiuser channel rows", cfg.k_out, t.nrows())?;
    ensure_len("multiuser channel cols", cfg.k_in, t.ncols())?;
    domain_representation(t, &b_out, &b_in)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiuserRecord {
    #[serde(with = "crate::pairs")]
    pub input: CVector,
    /// `D = U_in Z`
    #[serde(with = "crate::pairs")]
    pub subcarriers: CVector,
    /// `U_out Delta`
    #[serde(with = "crate::pairs")]
    pub noise: CVector,
    #[serde(with = "crate::pairs")]
    pub output: CVector,
}

/// `Y = R(T) U_in Z + U_out Delta`, with `Delta` drawn from
/// [`MultiuserConfig::noise_seed`].
pub fn multiuser_transmit(z: &CVector, t: &CMatrix, cfg: &MultiuserConfig) -> Result<MultiuserRecord> {
    let (u_in, u_out) = build_multiuser_operators(cfg)?;
    ensure_len("multiuser input", cfg.k_in, z.len())?;
    let domain = multiuser_subcarrier_domain(t, cfg)?;
    let subcarriers = u_in.apply(z)?;
    let noise = u_out.apply(&sample_noise(cfg.k_out, cfg.sigma_n_sq, cfg.noise_seed())?)?;
    let output = domain.entries() * &subcarriers + &noise;
    Ok(MultiuserRecord {
        input: z.clone(),
        subcarriers,
        noise,
        output,
    })
}

/// Receiver-side kernel
/// `(1/K) exp(i pi l (K-1) tau / K) sin(pi l tau) / sin(pi l tau / K)`
/// with `K = K_out`, equal to `b_out(x)^H b_out(x - tau)`.
pub fn f_kout(tau: f64, l: usize, k_out: usize) -> Complex64 {
    let k = k_out.max(1) as f64;
    let lt = l.max(1) as f64 * tau;
    let x = lt / k;
    let u = x.round();
    let r = x - u;
    if sin_pi(r).abs() < SINGULAR_GUARD {
        // sign factors of numerator, denominator and phase cancel at x = u
        let ratio = 1.0 - (k * k - 1.0) * (PI * r).powi(2) / 6.0;
        return cis_pi((k - 1.0) * r) * ratio;
    }
    cis_pi((k - 1.0) * x) * (sin_pi(lt) / (k * sin_pi(x)))
}

/// Peaks of `|f_kout(c - k/l)|` predicted on the cosine range:
/// `c = k/l + j K_out / l` within `[-1, 1]`.
pub fn predicted_kout_maxima(l: usize, k_out: usize, k: usize) -> Vec<f64> {
    let (l, period) = (l.max(1) as f64, k_out.max(1) as f64);
    let base = k as f64 / l;
    let span = period / l;
    let lo = ((-1.0 - base) / span).ceil() as i64;
    let hi = ((1.0 - base) / span).floor() as i64;
    (lo..=hi).map(|j| base + j as f64 * span).collect()
}

/// Locates the maxima of `|f_kout(cos theta - k/l)|` over `cos theta` in
/// `[-1, 1]` by scanning `grid` intervals for main-lobe local maxima and
/// refining each by ternary search.
pub fn f_kout_maxima(l: usize, k_out: usize, k: usize, grid: usize) -> Result<Vec<f64>> {
    ensure_nonzero(l, "l")?;
    ensure_nonzero(k_out, "k_out")?;
    if grid < 10 * k_out {
        return Err(Error::InvalidParameter {
            name: "grid",
            reason: format!("must be at least 10 * k_out = {}, got {grid}", 10 * k_out),
        });
    }
    let shift = k as f64 / l as f64;
    let mag = |c: f64| f_kout(c - shift, l, k_out).norm();
    let step = 2.0 / grid as f64;
    let xs: Vec<f64> = (0..=grid).map(|j| -1.0 + j as f64 * step).collect();
    let ys: Vec<f64> = xs.iter().map(|&c| mag(c)).collect();
    let mut out = Vec::new();
    for j in 0..=grid {
        let left = if j > 0 { ys[j - 1] } else { f64::NEG_INFINITY };
        let right = if j < grid { ys[j + 1] } else { f64::NEG_INFINITY };
        // strict on the left so a flat top is reported once
        if ys[j] < FRAC_1_SQRT_2 || ys[j] <= left || ys[j] < right {
            continue;
        }
        let (mut a, mut b) = ((xs[j] - step).max(-1.0), (xs[j] + step).min(1.0));
        for _ in 0..100 {
            let m1 = a + (b - a) / 3.0;
            let m2 = b - (b - a) / 3.0;
            if mag(m1) < mag(m2) {
                a = m1;
            } else {
                b = m2;
            }
        }
        out.push(0.5 * (a + b));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{subcarrier_domain, subcarrier_encode, transmit, Transmittance};
    use crate::fourier::{f_tau, AnglePair};
    use proptest::prelude::*;

    fn direct_kernel(tau: f64, l: usize, k_out: usize) -> Complex64 {
        (0..k_out)
            .map(|m| Complex64::from_polar(1.0, 2.0 * PI * m as f64 * l as f64 * tau / k_out as f64))
            .sum::<Complex64>()
            / k_out as f64
    }

    #[test]
    fn operators_reduce_to_single_user() {
        for l in [2, 4, 8] {
            let (u_in, u_out) = build_multiuser_operators(&MultiuserConfig::new(l, l, l)).unwrap();
            assert_eq!(u_in.matrix(), FourierOperator::new(l, Direction::Inverse).unwrap().matrix());
            assert_eq!(u_out.matrix(), FourierOperator::new(l, Direction::Forward).unwrap().matrix());
        }
        let (_, u) = build_multiuser_operators(&MultiuserConfig::new(3, 1, 2)).unwrap();
        assert_eq!(u.matrix(), CMatrix::from_element(1, 1, Complex64::ONE));
        let (a, b) = build_multiuser_operators(&MultiuserConfig::new(3, 4, 2)).unwrap();
        assert!(a.unitarity_error() < 1e-12 && b.unitarity_error() < 1e-12);
        assert!(build_multiuser_operators(&MultiuserConfig::new(0, 4, 2)).is_err());
    }

    #[test]
    fn basis_sets() {
        let cfg = MultiuserConfig::new(4, 6, 4);
        let (b_in, b_out) = multiuser_basis_sets(&cfg).unwrap();
        assert_eq!(b_in, BasisSet::new(4, 4).unwrap());
        assert!(b_out.orthonormality_error() < 1e-12);
        let (_, single) = multiuser_basis_sets(&MultiuserConfig::new(2, 1, 3)).unwrap();
        assert_eq!(single.to_matrix(), CMatrix::from_element(1, 1, Complex64::ONE));
    }

    #[test]
    fn domain_reduces_and_rejects_bad_shapes() {
        let l = 4;
        let cfg = MultiuserConfig::new(l, l, l);
        let t = crate::ensemble::statistical_model(l, l, 1.0, 5).unwrap();
        let a = multiuser_subcarrier_domain(&t, &cfg).unwrap();
        let b = subcarrier_domain(&t, l).unwrap();
        assert!((a.entries() - b.entries()).camax() < 1e-12);
        assert!(multiuser_subcarrier_domain(&CMatrix::zeros(3, 4), &cfg).is_err());
        let z = multiuser_subcarrier_domain(&CMatrix::zeros(6, 2), &MultiuserConfig::new(2, 6, 2)).unwrap();
        assert_eq!(z.entries().camax(), 0.0);
    }

    #[test]
    fn on_grid_path_hits_one_entry() {
        let l = 4;
        let cfg = MultiuserConfig::new(2 * l, 3 * l, l);
        let (k0, i0) = (3, 1);
        let angles = AnglePair::new((i0 as f64 / l as f64).acos(), (k0 as f64 / l as f64).acos()).unwrap();
        let t = multiuser_path_matrix(&[PathComponent::new(1.5, angles).unwrap()], &cfg).unwrap();
        let r = multiuser_subcarrier_domain(&t, &cfg).unwrap();
        for k in 0..cfg.k_out {
            for i in 0..cfg.k_in {
                let v = r.entry(k, i).norm();
                if (k, i) == (k0, i0) {
                    assert!((v - 1.5).abs() < 1e-10);
                } else {
                    assert!(v < 1e-10, "({k},{i}) {v}");
                }
            }
        }
    }

    #[test]
    fn transmit_trivial_cases() {
        let cfg = MultiuserConfig::new(3, 5, 2);
        let y = multiuser_transmit(&cfg.sample_input().unwrap(), &CMatrix::zeros(5, 3), &cfg).unwrap();
        assert_eq!(y.output.camax(), 0.0);
        let t = crate::ensemble::statistical_model(5, 3, 1.0, 1).unwrap();
        let y = multiuser_transmit(&CVector::zeros(3), &t, &cfg).unwrap();
        assert_eq!(y.output.camax(), 0.0);
        assert!(multiuser_transmit(&CVector::zeros(2), &t, &cfg).is_err());
    }

    #[test]
    fn transmit_reduces_to_single_user() {
        for l in [2, 4, 8] {
            let cfg = MultiuserConfig {
                sigma_n_sq: 0.3,
                seed: 11,
                ..MultiuserConfig::new(l, l, l)
            };
            let z = cfg.sample_input().unwrap();
            let flat = Transmittance::random_flat(l, 9).unwrap();
            let d = subcarrier_encode(&z).unwrap();
            let single = transmit(&d, &flat, cfg.noise_seed(), cfg.sigma_n_sq).unwrap();
            let t = CMatrix::from_diagonal(&single.fourier_transmittance);
            let multi = multiuser_transmit(&z, &t, &cfg).unwrap();
            assert!((&multi.subcarriers - &d).camax() < 1e-12);
            assert!((&multi.noise - &single.noise).camax() < 1e-12);
            assert!((&multi.output - &single.domain_output).camax() < 1e-10);
        }
    }

    #[test]
    fn kernel_zeros_and_reflection() {
        for (l, k_out) in [(2, 4), (2, 8), (4, 8), (3, 7)] {
            for k in 1..k_out {
                let tau = k as f64 / l as f64;
                assert!(f_kout(tau, l, k_out).norm() < 1e-12, "l={l} K={k_out} k={k}");
                let a = f_kout(-tau, l, k_out);
                let b = f_kout((k_out - k) as f64 / l as f64, l, k_out);
                assert!((a - b).norm() < 1e-12);
            }
            assert_eq!(f_kout(0.0, l, k_out), Complex64::ONE);
        }
    }

    #[test]
    fn maxima_examples() {
        let m = f_kout_maxima(2, 4, 0, 1000).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m[0].abs() < 2e-3);
        for k in 0..4 {
            let m = f_kout_maxima(4, 4, k, 400).unwrap();
            let p = predicted_kout_maxima(4, 4, k);
            assert_eq!(m.len(), p.len(), "k={k} {m:?} {p:?}");
        }
        assert!(f_kout_maxima(2, 8, 0, 79).is_err());
    }

    #[test]
    fn predicted_maxima_on_cosine_range() {
        assert_eq!(predicted_kout_maxima(2, 4, 0), vec![0.0]);
        assert_eq!(predicted_kout_maxima(2, 2, 0), vec![-1.0, 0.0, 1.0]);
        assert_eq!(predicted_kout_maxima(4, 8, 1), vec![0.25]);
    }

    proptest! {
        #[test]
        fn matches_direct_sum(tau in -4.0f64..4.0, l in 1usize..9, k_out in 1usize..17) {
            prop_assert!((f_kout(tau, l, k_out) - direct_kernel(tau, l, k_out)).norm() < 1e-11);
        }

        #[test]
        fn reduces_to_single_user_kernel(tau in -3.0f64..3.0, l in 1usize..33) {
            prop_assert!((f_kout(tau, l, l) - f_tau(tau, l)).norm() < 1e-12);
        }

        #[test]
        fn magnitude_periodic(tau in -2.0f64..2.0, l in 1usize..9, k_out in 1usize..17) {
            let period = k_out as f64 / l as f64;
            let a = f_kout(tau, l, k_out).norm();
            let b = f_kout(tau + period, l, k_out).norm();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn equals_basis_inner_product(x in -1.0f64..1.0, y in -1.0f64..1.0, l in 1usize..6, k_out in 1usize..12) {
            let a = crate::fourier::BasisVector::new(x, k_out, l).unwrap();
            let b = crate::fourier::BasisVector::new(y, k_out, l).unwrap();
            prop_assert!((a.inner(&b).unwrap() - f_kout(x - y, l, k_out)).norm() < 1e-12);
        }

        #[test]
        fn square_congruence_preserves_norm(seed in 0u64..200, k in 1usize..7, l in 1usize..7) {
            let cfg = MultiuserConfig::new(k, k, l);
            let t = crate::ensemble::statistical_model(k, k, 1.0, seed).unwrap();
            let r = multiuser_subcarrier_domain(&t, &cfg).unwrap();
            prop_assert!((r.norm() - t.norm()).abs() < 1e-12 * t.norm().max(1.0));
        }
    }
}
