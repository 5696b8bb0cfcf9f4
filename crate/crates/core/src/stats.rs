//! Monte-Carlo and sweep machinery for the statistics of the subcarrier
//! domain: per-sub-channel magnitude profiles, near-zero sets, rank and
//! diversity.
//!
//! Every randomized routine derives the generator of trial `t` from
//! `seed + t` and reduces per-trial results in trial order, so the output
//! does not depend on how many rayon workers ran the trials.

use crate::channel::{path_matrix, subcarrier_domain, PathComponent};
use crate::ensemble::statistical_model;
use crate::error::{ensure_nonzero, Error, Result};
use crate::fourier::{AnglePair, BasisVector};
use crate::CMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Generator seed for Monte-Carlo trial `trial`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_add(trial as u64)
}

pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(seed, trial))
}

/// Threshold below which a magnitude counts as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "lowercase")]
pub enum Epsilon {
    Absolute(f64),
    /// Fraction of the largest entry magnitude of the matrix at hand.
    Relative(f64),
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::Relative(1e-6)
    }
}

impl Epsilon {
    pub fn value(self) -> f64 {
        match self {
            Epsilon::Absolute(v) | Epsilon::Relative(v) => v,
        }
    }

    pub fn validate(self) -> Result<Self> {
        let v = self.value();
        if v.is_finite() && v > 0.0 {
            Ok(self)
        } else {
            Err(Error::InvalidParameter {
                name: "epsilon",
                reason: format!("must be positive and finite, got {v}"),
            })
        }
    }

    /// Absolute threshold for `m`. A relative threshold on an all-zero
    /// matrix falls back to its raw value so that zeros stay below it.
    pub fn resolve(self, m: &CMatrix) -> f64 {
        match self {
            Epsilon::Absolute(v) => v,
            Epsilon::Relative(v) => {
                let peak = max_magnitude(m);
                if peak > 0.0 {
                    v * peak
                } else {
                    v
                }
            }
        }
    }
}

pub fn max_magnitude(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// How a matrix is reduced to one magnitude per sub-channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeConvention {
    /// `|R(i, i)|`, for flat channels.
    Diagonal,
    /// `max_i |R(k, i)|` for each row `k`, for path-decomposed channels.
    RowMax,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagnitudeProfile {
    pub values: Vec<f64>,
    /// Resolved absolute threshold.
    pub epsilon: f64,
    /// Indices whose magnitude is below `epsilon`.
    pub near_zero_indices: Vec<usize>,
    /// Mean magnitude.
    pub average_a: f64,
}

impl MagnitudeProfile {
    pub fn near_zero_count(&self) -> usize {
        self.near_zero_indices.len()
    }

    pub fn argmax(&self) -> Option<usize> {
        self.values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
    }
}

pub fn magnitude_profile(
    domain: &CMatrix,
    epsilon: Epsilon,
    convention: MagnitudeConvention,
) -> Result<MagnitudeProfile> {
    epsilon.validate()?;
    let values: Vec<f64> = match convention {
        MagnitudeConvention::Diagonal => {
            let n = domain.nrows().min(domain.ncols());
            (0..n).map(|i| domain[(i, i)].norm()).collect()
        }
        MagnitudeConvention::RowMax => domain
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).fold(0.0, f64::max))
            .collect(),
    };
    let eps = epsilon.resolve(domain);
    let near_zero_indices = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v < eps)
        .map(|(i, _)| i)
        .collect();
    let average_a = if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    };
    Ok(MagnitudeProfile {
        values,
        epsilon: eps,
        near_zero_indices,
        average_a,
    })
}

/// Received angle for a path misaligned by `omega`. The angular spread
/// grows with misalignment: a uniform jitter of half-width
/// `dispersion (1 - cos omega) / 2` is added, which vanishes for aligned
/// paths and reaches `dispersion` for opposed ones.
pub fn received_angle<R: Rng>(theta_star: f64, omega: f64, dispersion: f64, rng: &mut R) -> f64 {
    let width = dispersion * (1.0 - omega.cos()) / 2.0;
    // one draw per call keeps generator streams aligned across schedules
    let u: f64 = rng.random_range(-1.0..=1.0);
    theta_star + omega + width * u
}

/// Parameters of a misalignment sweep over a fixed sub-channel column `C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub l: usize,
    /// Fixed sub-channel index `C`; rows `k = 0..=2C` are reported.
    pub c_index: usize,
    pub theta_star: f64,
    pub omega_schedule: Vec<f64>,
    pub gain: f64,
    /// Maximum angular jitter (radians) reached at `omega = pi`.
    pub dispersion: f64,
    pub trials: usize,
    pub seed: u64,
    pub epsilon: Epsilon,
}

impl SweepSpec {
    /// Sweep whose transmitted direction sits on grid point `C`,
    /// `cos theta* = C / l`.
    pub fn on_grid(l: usize, c_index: usize, omega_schedule: Vec<f64>, trials: usize, seed: u64) -> Self {
        let cos = (c_index as f64 / l.max(1) as f64).clamp(-1.0, 1.0);
        Self {
            l,
            c_index,
            theta_star: cos.acos(),
            omega_schedule,
            gain: 1.0,
            dispersion: DEFAULT_DISPERSION,
            trials,
            seed,
            epsilon: Epsilon::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonzero(self.l, "l")?;
        ensure_nonzero(self.trials, "trials")?;
        if self.c_index == 0 || self.c_index > self.l {
            return Err(Error::InvalidParameter {
                name: "c_index",
                reason: format!("must satisfy 0 < C <= l = {}, got {}", self.l, self.c_index),
            });
        }
        if self.omega_schedule.is_empty() {
            return Err(Error::InvalidParameter {
                name: "omega_schedule",
                reason: "must not be empty".into(),
            });
        }
        if self.omega_schedule.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega_schedule",
                reason: "values must be finite".into(),
            });
        }
        if !(self.gain.is_finite() && self.gain >= 0.0) {
            return Err(Error::NegativeGain(self.gain));
        }
        if !(self.dispersion.is_finite() && self.dispersion >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "dispersion",
                reason: format!("must be non-negative, got {}", self.dispersion),
            });
        }
        self.epsilon.validate()?;
        Ok(())
    }

    pub fn k_values(&self) -> std::ops::RangeInclusive<usize> {
        0..=2 * self.c_index
    }
}

pub const DEFAULT_DISPERSION: f64 = PI / 4.0;

/// `omega` values from 0 to `end` inclusive in `steps` equal increments.
pub fn linear_schedule(end: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    (0..=steps).map(|s| end * s as f64 / steps as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    pub k: usize,
    pub mean_magnitude: f64,
}

/// Magnitudes `|R(k, C)|` of one trial, indexed `[omega][k]`.
pub type TrialMagnitudes = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub omegas: Vec<f64>,
    pub k_values: Vec<usize>,
    /// `[omega][k]`
    pub means: Vec<Vec<f64>>,
}

impl SweepTable {
    pub fn rows(&self) -> impl Iterator<Item = SweepRow> + '_ {
        self.omegas.iter().zip(&self.means).flat_map(move |(&omega, series)| {
            self.k_values.iter().zip(series).map(move |(&k, &mean_magnitude)| SweepRow {
                omega,
                k,
                mean_magnitude,
            })
        })
    }

    /// Mean of one series over `k`, the level the magnitudes move around.
    pub fn average(&self, omega_index: usize) -> f64 {
        let s = &self.means[omega_index];
        s.iter().sum::<f64>() / s.len() as f64
    }
}

fn sweep_trial(spec: &SweepSpec, trial: usize) -> Result<TrialMagnitudes> {
    let l = spec.l;
    let column = BasisVector::new(spec.c_index as f64 / l as f64, l, l)?;
    let rows: Vec<BasisVector> = spec
        .k_values()
        .map(|k| BasisVector::new(k as f64 / l as f64, l, l))
        .collect::<Result<_>>()?;
    let mut rng = trial_rng(spec.seed, trial);
    spec.omega_schedule
        .iter()
        .map(|&omega| {
            let theta = received_angle(spec.theta_star, omega, spec.dispersion, &mut rng);
            let path = PathComponent::new(spec.gain, AnglePair::wrapped(spec.theta_star, theta)?)?;
            let t = path_matrix(&[path], l)?;
            let right = &t * column.entries();
            Ok(rows.iter().map(|b| b.entries().dotc(&right).norm()).collect())
        })
        .collect()
}

/// Per-trial magnitude rows of a sweep, in trial order.
pub fn omega_sweep_trials(spec: &SweepSpec) -> Result<Vec<TrialMagnitudes>> {
    spec.validate()?;
    (0..spec.trials)
        .into_par_iter()
        .map(|t| sweep_trial(spec, t))
        .collect()
}

/// Mean `|R(k, C)|` over trials for every `omega` in the schedule and
/// every `k` in `0..=2C`.
pub fn omega_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    let trials = omega_sweep_trials(spec)?;
    let k_values: Vec<usize> = spec.k_values().collect();
    let mut means = vec![vec![0.0; k_values.len()]; spec.omega_schedule.len()];
    for trial in &trials {
        for (acc, series) in means.iter_mut().zip(trial) {
            for (a, v) in acc.iter_mut().zip(series) {
                *a += v;
            }
        }
    }
    let n = trials.len() as f64;
    for series in &mut means {
        for a in series.iter_mut() {
            *a /= n;
        }
    }
    Ok(SweepTable {
        omegas: spec.omega_schedule.clone(),
        k_values,
        means,
    })
}

/// Thresholds that turn the qualitative misalignment behavior into checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadCriteria {
    /// The opposed peak must be below `peak_ratio` times the aligned peak.
    pub peak_ratio: f64,
    /// Minimum fraction of `k` bins above epsilon when opposed.
    pub spread_fraction: f64,
    /// Off-peak bound for the aligned series.
    pub off_peak_tol: f64,
}

impl Default for SpreadCriteria {
    fn default() -> Self {
        Self {
            peak_ratio: 1.0,
            spread_fraction: 0.25,
            off_peak_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadVerdict {
    pub aligned_peak_k: usize,
    pub aligned_peak: f64,
    pub aligned_off_peak_max: f64,
    pub opposed_peak: f64,
    pub opposed_fraction_above: f64,
    pub passed: bool,
}

/// Compares an aligned magnitude row against an opposed one.
pub fn evaluate_spread(
    k_values: &[usize],
    c_index: usize,
    aligned: &[f64],
    opposed: &[f64],
    epsilon: f64,
    criteria: &SpreadCriteria,
) -> SpreadVerdict {
    let argmax = |s: &[f64]| {
        s.iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, 0.0))
    };
    let (peak_idx, aligned_peak) = argmax(aligned);
    let aligned_off_peak_max = aligned
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != peak_idx)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let (_, opposed_peak) = argmax(opposed);
    let above = opposed.iter().filter(|v| **v > epsilon).count();
    let opposed_fraction_above = above as f64 / opposed.len().max(1) as f64;
    let aligned_peak_k = k_values.get(peak_idx).copied().unwrap_or(0);
    let passed = aligned_peak_k == c_index
        && aligned_off_peak_max < criteria.off_peak_tol
        && opposed_peak < criteria.peak_ratio * aligned_peak
        && opposed_fraction_above >= criteria.spread_fraction;
    SpreadVerdict {
        aligned_peak_k,
        aligned_peak,
        aligned_off_peak_max,
        opposed_peak,
        opposed_fraction_above,
        passed,
    }
}

/// Parameters for comparing near-zero sets of aligned and opposed channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearZeroSpec {
    pub l: usize,
    /// One path per gain; transmitted directions are drawn on the grid.
    pub gains: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub dispersion: f64,
    pub epsilon: Epsilon,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NearZeroReport {
    /// `(|G| aligned, |G| opposed)` per trial.
    pub per_trial: Vec<(usize, usize)>,
    pub mean_aligned: f64,
    pub mean_opposed: f64,
}

fn near_zero_trial(spec: &NearZeroSpec, trial: usize) -> Result<(usize, usize)> {
    let l = spec.l;
    let mut rng = trial_rng(spec.seed, trial);
    let mut aligned = Vec::with_capacity(spec.gains.len());
    let mut opposed = Vec::with_capacity(spec.gains.len());
    for &gain in &spec.gains {
        let i0 = rng.random_range(0..l);
        let theta_star = (i0 as f64 / l as f64).acos();
        aligned.push(PathComponent::new(gain, AnglePair::new(theta_star, theta_star)?)?);
        let theta = received_angle(theta_star, PI, spec.dispersion, &mut rng);
        opposed.push(PathComponent::new(gain, AnglePair::wrapped(theta_star, theta)?)?);
    }
    let count = |paths: &[PathComponent]| -> Result<usize> {
        let r = subcarrier_domain(&path_matrix(paths, l)?, l)?;
        Ok(magnitude_profile(r.entries(), spec.epsilon, MagnitudeConvention::RowMax)?.near_zero_count())
    };
    Ok((count(&aligned)?, count(&opposed)?))
}

/// Near-zero set sizes `|G|` at `omega = 0` and `omega = pi` (with angular
/// dispersion), per trial and averaged.
pub fn near_zero_monotonicity(spec: &NearZeroSpec) -> Result<NearZeroReport> {
    ensure_nonzero(spec.l, "l")?;
    ensure_nonzero(spec.trials, "trials")?;
    spec.epsilon.validate()?;
    if let Some(&g) = spec.gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::NegativeGain(g));
    }
    let per_trial: Vec<(usize, usize)> = (0..spec.trials)
        .into_par_iter()
        .map(|t| near_zero_trial(spec, t))
        .collect::<Result<_>>()?;
    let n = per_trial.len() as f64;
    let mean_aligned = per_trial.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let mean_opposed = per_trial.iter().map(|p| p.1 as f64).sum::<f64>() / n;
    Ok(NearZeroReport {
        per_trial,
        mean_aligned,
        mean_opposed,
    })
}

/// Row/column support and entry count of a matrix above a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankReport {
    pub nonzero_rows: usize,
    pub nonzero_cols: usize,
    /// `min(nonzero_rows, nonzero_cols)`
    pub rank: usize,
    /// Number of entries above `epsilon`.
    pub diversity: usize,
    pub epsilon: f64,
}

pub fn rank_report(m: &CMatrix, epsilon: Epsilon) -> RankReport {
    let eps = epsilon.resolve(m);
    let mut rows = vec![false; m.nrows()];
    let mut cols = vec![false; m.ncols()];
    let mut diversity = 0;
    for c in 0..m.ncols() {
        for r in 0..m.nrows() {
            if m[(r, c)].norm() > eps {
                rows[r] = true;
                cols[c] = true;
                diversity += 1;
            }
        }
    }
    let nonzero_rows = rows.iter().filter(|x| **x).count();
    let nonzero_cols = cols.iter().filter(|x| **x).count();
    RankReport {
        nonzero_rows,
        nonzero_cols,
        rank: nonzero_rows.min(nonzero_cols),
        diversity,
        epsilon: eps,
    }
}

/// Diagnostic `min(sum cos theta, sum cos theta*)` over the paths. Cosines
/// may be negative, so this is reported, never relied on.
pub fn cosine_rank_approx(paths: &[PathComponent]) -> f64 {
    let received: f64 = paths.iter().map(|p| p.angles().theta().cos()).sum();
    let sent: f64 = paths.iter().map(|p| p.angles().theta_star().cos()).sum();
    received.min(sent)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankTrial {
    pub trial: usize,
    pub rank: usize,
    pub diversity: usize,
}

/// Rank and diversity of `trials` independent `l x l` matrices with i.i.d.
/// `CN(0, sigma_t_sq)` entries.
pub fn rank_study(l: usize, sigma_t_sq: f64, trials: usize, seed: u64, epsilon: Epsilon) -> Result<Vec<RankTrial>> {
    ensure_nonzero(l, "l")?;
    epsilon.validate()?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let m = statistical_model(l, l, sigma_t_sq, trial_seed(seed, t))?;
            let r = rank_report(&m, epsilon);
            Ok(RankTrial {
                trial: t,
                rank: r.rank,
                diversity: r.diversity,
            })
        })
        .collect()
}

/// Source of random path sets for a given number of sub-channels.
pub trait PathGenerator: Sync {
    fn generate(&self, l: usize, rng: &mut ChaCha8Rng) -> Result<Vec<PathComponent>>;
}

impl<F> PathGenerator for F
where
    F: Fn(usize, &mut ChaCha8Rng) -> Result<Vec<PathComponent>> + Sync,
{
    fn generate(&self, l: usize, rng: &mut ChaCha8Rng) -> Result<Vec<PathComponent>> {
        self(l, rng)
    }
}

/// `count` paths with angles uniform on `[0, 2pi)` and gains uniform on
/// `[min_gain, max_gain]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomPaths {
    pub count: usize,
    pub min_gain: f64,
    pub max_gain: f64,
}

impl Default for RandomPaths {
    fn default() -> Self {
        Self {
            count: 3,
            min_gain: 0.5,
            max_gain: 1.0,
        }
    }
}

impl PathGenerator for RandomPaths {
    fn generate(&self, _l: usize, rng: &mut ChaCha8Rng) -> Result<Vec<PathComponent>> {
        (0..self.count)
            .map(|_| {
                let gain = if self.max_gain > self.min_gain {
                    rng.random_range(self.min_gain..=self.max_gain)
                } else {
                    self.min_gain
                };
                let theta_star = rng.random_range(0.0..std::f64::consts::TAU);
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                PathComponent::new(gain, AnglePair::new(theta_star, theta)?)
            })
            .collect()
    }
}

/// A single path aligned with grid points `k0` (received) and `i0`
/// (transmitted), re-derived for every `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnGridPath {
    pub k0: usize,
    pub i0: usize,
    pub gain: f64,
}

impl PathGenerator for OnGridPath {
    fn generate(&self, l: usize, _rng: &mut ChaCha8Rng) -> Result<Vec<PathComponent>> {
        let angle = |k: usize| ((k % l) as f64 / l as f64).acos();
        Ok(vec![PathComponent::new(
            self.gain,
            AnglePair::new(angle(self.i0), angle(self.k0))?,
        )?])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiversityRow {
    pub l: usize,
    pub mean_diversity: f64,
}

/// Mean diversity of the subcarrier-domain matrix of generated path
/// channels for each `l`.
pub fn diversity_vs_l(
    l_list: &[usize],
    generator: &dyn PathGenerator,
    trials: usize,
    seed: u64,
    epsilon: Epsilon,
) -> Result<Vec<DiversityRow>> {
    ensure_nonzero(trials, "trials")?;
    epsilon.validate()?;
    if l_list.is_empty() || l_list.windows(2).any(|w| w[0] >= w[1]) || l_list[0] == 0 {
        return Err(Error::InvalidParameter {
            name: "l_list",
            reason: "must be non-empty, positive and strictly increasing".into(),
        });
    }
    l_list
        .iter()
        .map(|&l| {
            let counts: Vec<usize> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, t);
                    let paths = generator.generate(l, &mut rng)?;
                    let r = subcarrier_domain(&path_matrix(&paths, l)?, l)?;
                    Ok(rank_report(r.entries(), epsilon).diversity)
                })
                .collect::<Result<_>>()?;
            let mean_diversity = counts.iter().sum::<usize>() as f64 / trials as f64;
            Ok(DiversityRow { l, mean_diversity })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;
    use proptest::prelude::*;

    fn on_grid_domain(gain: f64, k0: usize, i0: usize, l: usize) -> CMatrix {
        let paths = OnGridPath { k0, i0, gain }
            .generate(l, &mut trial_rng(0, 0))
            .unwrap();
        subcarrier_domain(&path_matrix(&paths, l).unwrap(), l)
            .unwrap()
            .into_entries()
    }

    #[test]
    fn profile_of_zero_matrix() {
        let z = CMatrix::zeros(5, 5);
        for conv in [MagnitudeConvention::Diagonal, MagnitudeConvention::RowMax] {
            let p = magnitude_profile(&z, Epsilon::default(), conv).unwrap();
            assert!(p.values.iter().all(|v| *v == 0.0));
            assert_eq!(p.near_zero_count(), 5);
            assert_eq!(p.average_a, 0.0);
        }
        assert!(magnitude_profile(&z, Epsilon::Absolute(0.0), MagnitudeConvention::RowMax).is_err());
    }

    #[test]
    fn profile_of_single_on_grid_path() {
        let r = on_grid_domain(1.0, 3, 5, 8);
        let p = magnitude_profile(&r, Epsilon::Absolute(1e-10), MagnitudeConvention::RowMax).unwrap();
        let ones: Vec<_> = p.values.iter().filter(|v| (**v - 1.0).abs() < 1e-10).collect();
        assert_eq!(ones.len(), 1);
        assert_eq!(p.near_zero_count(), 7);
        assert_eq!(p.argmax(), Some(3));
        assert!((p.average_a - 1.0 / 8.0).abs() < 1e-10);
    }

    #[test]
    fn profile_scales_homogeneously() {
        let r = crate::ensemble::statistical_model(6, 6, 1.0, 3).unwrap();
        let p = magnitude_profile(&r, Epsilon::default(), MagnitudeConvention::RowMax).unwrap();
        let scaled = r.map(|z| z * 2.5);
        let q = magnitude_profile(&scaled, Epsilon::default(), MagnitudeConvention::RowMax).unwrap();
        for (a, b) in p.values.iter().zip(&q.values) {
            assert!((b - 2.5 * a).abs() < 1e-12);
        }
        assert_eq!(p.argmax(), q.argmax());
    }

    #[test]
    fn diagonal_profile_of_flat_channel() {
        let m = CMatrix::from_diagonal(&crate::CVector::from_vec(vec![
            Complex64::new(0.5, 0.5),
            Complex64::ZERO,
            Complex64::new(0.0, 0.2),
        ]));
        let p = magnitude_profile(&m, Epsilon::Absolute(1e-6), MagnitudeConvention::Diagonal).unwrap();
        assert_eq!(p.near_zero_indices, vec![1]);
        assert!((p.values[0] - 0.5f64.hypot(0.5)).abs() < 1e-15);
    }

    #[test]
    fn aligned_sweep_is_sparse() {
        let l = 16;
        let c = 8;
        let spec = SweepSpec::on_grid(l, c, vec![0.0], 3, 7);
        let table = omega_sweep(&spec).unwrap();
        let row = &table.means[0];
        for (idx, k) in table.k_values.iter().enumerate() {
            if *k == c {
                assert!((row[idx] - 1.0).abs() < 1e-10);
            } else {
                assert!(row[idx] < 1e-10, "k={k} {}", row[idx]);
            }
        }
    }

    #[test]
    fn sweep_with_zero_gain_is_zero() {
        let mut spec = SweepSpec::on_grid(8, 4, linear_schedule(PI, 4), 5, 1);
        spec.gain = 0.0;
        let table = omega_sweep(&spec).unwrap();
        assert!(table.rows().all(|r| r.mean_magnitude == 0.0));
    }

    #[test]
    fn sweep_validation() {
        let mut spec = SweepSpec::on_grid(8, 4, vec![], 5, 1);
        assert!(omega_sweep(&spec).is_err());
        spec.omega_schedule = vec![0.0];
        spec.c_index = 0;
        assert!(omega_sweep(&spec).is_err());
        spec.c_index = 9;
        assert!(omega_sweep(&spec).is_err());
    }

    #[test]
    fn opposed_sweep_spreads() {
        let l = 16;
        let spec = SweepSpec::on_grid(l, l / 2, vec![0.0, PI], 50, 42);
        let table = omega_sweep(&spec).unwrap();
        let eps = 1e-6;
        let v = evaluate_spread(
            &table.k_values,
            spec.c_index,
            &table.means[0],
            &table.means[1],
            eps,
            &SpreadCriteria::default(),
        );
        assert!(v.passed, "{v:?}");
    }

    #[test]
    fn single_path_near_zero_counts() {
        let spec = NearZeroSpec {
            l: 8,
            gains: vec![1.0],
            trials: 20,
            seed: 3,
            dispersion: DEFAULT_DISPERSION,
            epsilon: Epsilon::default(),
        };
        let report = near_zero_monotonicity(&spec).unwrap();
        assert!(report.per_trial.iter().all(|(aligned, _)| *aligned == 7));
        assert!(report.mean_aligned > report.mean_opposed);
    }

    #[test]
    fn huge_epsilon_makes_everything_near_zero() {
        let spec = NearZeroSpec {
            l: 8,
            gains: vec![1.0, 0.5],
            trials: 10,
            seed: 3,
            dispersion: DEFAULT_DISPERSION,
            epsilon: Epsilon::Absolute(10.0),
        };
        let report = near_zero_monotonicity(&spec).unwrap();
        assert!(report.per_trial.iter().all(|p| *p == (8, 8)));
    }

    #[test]
    fn rank_examples() {
        let id = CMatrix::identity(4, 4);
        let r = rank_report(&id, Epsilon::Absolute(1e-6));
        assert_eq!((r.rank, r.diversity), (4, 4));
        let r = rank_report(&on_grid_domain(2.0, 1, 3, 8), Epsilon::Absolute(1e-10));
        assert_eq!((r.rank, r.diversity), (1, 1));
        let r = rank_report(&CMatrix::zeros(3, 3), Epsilon::default());
        assert_eq!((r.rank, r.diversity), (0, 0));
    }

    #[test]
    fn diversity_examples() {
        let fixed = OnGridPath { k0: 1, i0: 2, gain: 1.0 };
        let rows = diversity_vs_l(&[4, 8, 16], &fixed, 3, 0, Epsilon::default()).unwrap();
        assert!(rows.iter().all(|r| r.mean_diversity == 1.0));

        let silent = RandomPaths {
            count: 2,
            min_gain: 0.0,
            max_gain: 0.0,
        };
        let rows = diversity_vs_l(&[4, 8], &silent, 3, 0, Epsilon::Absolute(1e-9)).unwrap();
        assert!(rows.iter().all(|r| r.mean_diversity == 0.0));

        assert!(diversity_vs_l(&[8, 4], &fixed, 3, 0, Epsilon::default()).is_err());
        assert!(diversity_vs_l(&[], &fixed, 3, 0, Epsilon::default()).is_err());
    }

    #[test]
    fn closures_generate_paths() {
        let generator = |l: usize, _rng: &mut ChaCha8Rng| -> Result<Vec<PathComponent>> {
            OnGridPath { k0: 0, i0: l - 1, gain: 1.0 }.generate(l, &mut trial_rng(0, 0))
        };
        let rows = diversity_vs_l(&[2, 3], &generator, 2, 0, Epsilon::default()).unwrap();
        assert_eq!(rows[1].mean_diversity, 1.0);
    }

    #[test]
    fn cosine_rank_is_a_min_of_sums() {
        let p = |s: f64, r: f64| PathComponent::new(1.0, AnglePair::new(s, r).unwrap()).unwrap();
        let paths = [p(0.0, PI), p(0.0, 0.0)];
        assert!((cosine_rank_approx(&paths) - 0.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn rank_report_invariants(seed in 0u64..500, rows in 1usize..9, cols in 1usize..9, e1 in 1e-3f64..1.0, e2 in 1e-3f64..1.0) {
            let m = crate::ensemble::statistical_model(rows, cols, 1.0, seed).unwrap();
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let a = rank_report(&m, Epsilon::Absolute(lo));
            let b = rank_report(&m, Epsilon::Absolute(hi));
            for r in [a, b] {
                prop_assert!(r.rank <= rows.min(cols));
                prop_assert!(r.diversity <= rows * cols);
                if r.rank > 0 { prop_assert!(r.diversity >= r.rank); }
            }
            prop_assert!(b.rank <= a.rank);
            prop_assert!(b.diversity <= a.diversity);
        }

        #[test]
        fn sweep_argmax_is_scale_invariant(gain in 0.01f64..100.0, seed in 0u64..50) {
            let mut spec = SweepSpec::on_grid(8, 4, vec![0.0, PI / 2.0, PI], 4, seed);
            let base = omega_sweep(&spec).unwrap();
            spec.gain = gain;
            let scaled = omega_sweep(&spec).unwrap();
            for (a, b) in base.means.iter().zip(&scaled.means) {
                let am = a.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
                let bm = b.iter().enumerate().max_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
                prop_assert_eq!(am, bm);
            }
        }
    }
}
