//! Monte Carlo number variances and linear-statistic variances, compared with
//! the spectral predictions.
//!
//! Replica `i` always uses `RngStream::new(base_seed, i)` and every reduction
//! goes through sorted pairwise sums, so results do not depend on the number of
//! worker threads or on the order in which replicas finish.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, Space, Window};
use crate::io::fmt_f64;
use crate::processes::{
    bergman_min_modes, gaf_min_truncation, sample_bergman_dpp, sample_gaf_zeros, sample_ginibre, sample_poisson,
    PointConfiguration, RngStream,
};
use crate::spectral::{variance_of_statistic, SpectralMeasure};
use crate::sphtransform::RadialFunction;
use crate::stats;

/// Named sampler together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case")]
pub enum SamplerSpec {
    Poisson { space: Space, intensity: f64 },
    Ginibre { n_matrix: usize },
    /// `truncation: None` picks the smallest admissible degree.
    GafZeros { truncation: Option<usize> },
    /// `mode_cap: None` picks the smallest admissible cap.
    Bergman { mode_cap: Option<usize> },
}

impl SamplerSpec {
    pub fn space(&self) -> Space {
        match self {
            SamplerSpec::Poisson { space, .. } => *space,
            SamplerSpec::Ginibre { .. } => Space::Euclidean { d: 2 },
            SamplerSpec::GafZeros { .. } | SamplerSpec::Bergman { .. } => Space::HyperbolicDisk,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::Poisson { .. } => "poisson",
            SamplerSpec::Ginibre { .. } => "ginibre",
            SamplerSpec::GafZeros { .. } => "gaf_zeros",
            SamplerSpec::Bergman { .. } => "bergman_dpp",
        }
    }

    /// Intensity of the process (points per unit invariant volume).
    pub fn intensity(&self) -> f64 {
        match self {
            SamplerSpec::Poisson { intensity, .. } => *intensity,
            _ => 1.0,
        }
    }

    pub fn sample(&self, radius: f64, rng: RngStream) -> Result<PointConfiguration> {
        let window = Window::new(self.space(), radius)?;
        match *self {
            SamplerSpec::Poisson { space, intensity } => sample_poisson(space, intensity, &window, rng),
            SamplerSpec::Ginibre { n_matrix } => sample_ginibre(n_matrix, &window, rng),
            SamplerSpec::GafZeros { truncation } => {
                let n = truncation.unwrap_or_else(|| gaf_min_truncation(window.model_radius()));
                sample_gaf_zeros(n, &window, rng)
            }
            SamplerSpec::Bergman { mode_cap } => {
                let m = mode_cap.unwrap_or_else(|| bergman_min_modes(window.model_radius()));
                sample_bergman_dpp(&window, m, rng)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub radius: f64,
    pub mean_count: f64,
    pub variance: f64,
    pub stderr_variance: f64,
    pub replicas: usize,
}

impl VarianceEstimate {
    fn from_values(radius: f64, values: &[f64]) -> VarianceEstimate {
        VarianceEstimate {
            radius,
            mean_count: stats::mean(values),
            variance: stats::sample_variance(values),
            stderr_variance: stats::variance_stderr(values),
            replicas: values.len(),
        }
    }
}

fn check_replicas(replicas: usize) -> Result<()> {
    if replicas < 2 {
        return Err(Error::validation("at least two replicas are needed for a variance"));
    }
    Ok(())
}

fn check_radii(radii: &[f64]) -> Result<f64> {
    if radii.is_empty() {
        return Err(Error::validation("no radii given"));
    }
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::validation("radii must be positive and finite"));
    }
    Ok(radii.iter().copied().fold(0.0, f64::max))
}

/// Counts in each radius, one configuration per replica sampled at the largest radius.
pub fn sample_counts(sampler: &SamplerSpec, radii: &[f64], replicas: usize, base_seed: u64) -> Result<Vec<Vec<usize>>> {
    let top = check_radii(radii)?;
    let per_replica: Vec<Result<Vec<usize>>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = sampler.sample(top, RngStream::new(base_seed, i))?;
            let rs = cfg.radii();
            Ok(radii.iter().map(|r| rs.iter().filter(|s| **s <= *r).count()).collect())
        })
        .collect();
    let per_replica: Vec<Vec<usize>> = per_replica.into_iter().collect::<Result<_>>()?;
    Ok((0..radii.len()).map(|j| per_replica.iter().map(|c| c[j]).collect()).collect())
}

/// Number variance in each centered ball, one independent configuration per replica.
pub fn estimate_number_variance(
    sampler: &SamplerSpec,
    radii: &[f64],
    replicas: usize,
    base_seed: u64,
) -> Result<Vec<VarianceEstimate>> {
    check_replicas(replicas)?;
    let counts = sample_counts(sampler, radii, replicas, base_seed)?;
    Ok(radii
        .iter()
        .zip(&counts)
        .map(|(r, c)| {
            let v: Vec<f64> = c.iter().map(|x| *x as f64).collect();
            VarianceEstimate::from_values(*r, &v)
        })
        .collect())
}

/// Variance of 𝕊f = Σ f(d(x, o)) over the window covering the support of f.
pub fn estimate_statistic_variance(
    sampler: &SamplerSpec,
    f: &RadialFunction,
    replicas: usize,
    base_seed: u64,
) -> Result<VarianceEstimate> {
    check_replicas(replicas)?;
    let radius = f.support().extent();
    if f.is_zero() {
        return Ok(VarianceEstimate { radius, mean_count: 0.0, variance: 0.0, stderr_variance: 0.0, replicas });
    }
    let values: Vec<Result<f64>> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let cfg = sampler.sample(radius, RngStream::new(base_seed, i))?;
            let terms: Vec<f64> = cfg.radii().iter().map(|s| f.eval(*s)).collect();
            Ok(stats::sorted_sum(&terms))
        })
        .collect();
    let values: Vec<f64> = values.into_iter().collect::<Result<_>>()?;
    Ok(VarianceEstimate::from_values(radius, &values))
}

/// Least-squares slope of log NV against log ball volume.
pub fn fit_variance_exponent(estimates: &[VarianceEstimate], space: &Space) -> Result<f64> {
    if estimates.len() < 4 {
        return Err(Error::validation("the exponent fit needs at least four radii"));
    }
    let vols: Vec<f64> = estimates.iter().map(|e| ball_volume(space, e.radius)).collect();
    let lo = vols.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vols.iter().copied().fold(0.0, f64::max);
    if !(hi >= 2.0 * lo) {
        return Err(Error::validation("radii must span a factor of at least 2 in volume"));
    }
    if estimates.iter().any(|e| !(e.variance > 0.0)) {
        return Err(Error::validation("the exponent fit needs positive variances"));
    }
    let x: Vec<f64> = vols.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = estimates.iter().map(|e| e.variance.ln()).collect();
    Ok(stats::ls_slope(&x, &y))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub radius: f64,
    pub mc_variance: f64,
    pub mc_stderr: f64,
    pub spectral_variance: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub sampler: SamplerSpec,
    pub base_seed: u64,
    pub replicas: usize,
    pub rows: Vec<ComparisonRow>,
    pub pass: bool,
}

pub const Z_BAND: f64 = 3.0;

pub fn z_score(mc: f64, reference: f64, stderr: f64) -> f64 {
    let diff = mc - reference;
    if diff == 0.0 {
        0.0
    } else if stderr > 0.0 {
        diff / stderr
    } else {
        diff.signum() * f64::INFINITY
    }
}

impl ComparisonReport {
    pub fn from_estimates(
        sampler: SamplerSpec,
        base_seed: u64,
        estimates: &[VarianceEstimate],
        spectral: &[f64],
    ) -> ComparisonReport {
        let rows: Vec<ComparisonRow> = estimates
            .iter()
            .zip(spectral)
            .map(|(e, s)| ComparisonRow {
                radius: e.radius,
                mc_variance: e.variance,
                mc_stderr: e.stderr_variance,
                spectral_variance: *s,
                z_score: z_score(e.variance, *s, e.stderr_variance),
            })
            .collect();
        let pass = rows.iter().all(|r| r.z_score.abs() <= Z_BAND);
        ComparisonReport { sampler, base_seed, replicas: estimates.first().map_or(0, |e| e.replicas), rows, pass }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("radius,mc_variance,mc_stderr,spectral_variance,z_score\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_f64(r.radius),
                fmt_f64(r.mc_variance),
                fmt_f64(r.mc_stderr),
                fmt_f64(r.spectral_variance),
                fmt_f64(r.z_score)
            ));
        }
        out
    }
}

/// Spectral number variances at the radii.
pub fn spectral_number_variances(sigma: &SpectralMeasure, radii: &[f64]) -> Result<Vec<f64>> {
    radii.iter().map(|r| variance_of_statistic(sigma, &RadialFunction::ball(*r)?)).collect()
}

/// Monte Carlo number variances against the spectral prediction, with 3σ z-scores.
pub fn compare_mc_vs_spectral(
    sampler: &SamplerSpec,
    sigma: &SpectralMeasure,
    radii: &[f64],
    replicas: usize,
    base_seed: u64,
) -> Result<ComparisonReport> {
    if sigma.space != sampler.space() {
        return Err(Error::validation("sampler and spectral measure live on different spaces"));
    }
    let est = estimate_number_variance(sampler, radii, replicas, base_seed)?;
    let predicted = spectral_number_variances(sigma, radii)?;
    Ok(ComparisonReport::from_estimates(*sampler, base_seed, &est, &predicted))
}

pub fn estimates_to_csv(estimates: &[VarianceEstimate]) -> String {
    let mut out = String::from("radius,mean_count,variance,stderr_variance,replicas\n");
    for e in estimates {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(e.radius),
            fmt_f64(e.mean_count),
            fmt_f64(e.variance),
            fmt_f64(e.stderr_variance),
            e.replicas
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn est(radius: f64, variance: f64) -> VarianceEstimate {
        VarianceEstimate { radius, mean_count: 0.0, variance, stderr_variance: 0.0, replicas: 2 }
    }

    #[test]
    fn exponent_fit_identity() {
        let space = Space::Euclidean { d: 2 };
        let e: Vec<VarianceEstimate> =
            [1.0, 1.5, 2.0, 3.0].iter().map(|r| est(*r, ball_volume(&space, *r).powi(2))).collect();
        assert!((fit_variance_exponent(&e, &space).unwrap() - 2.0).abs() < 1e-12);
        let same: Vec<VarianceEstimate> = (0..4).map(|_| est(1.0, 1.0)).collect();
        assert!(matches!(fit_variance_exponent(&same, &space), Err(Error::Validation(_))));
        assert!(fit_variance_exponent(&e[..3], &space).is_err());
    }

    #[test]
    fn two_replicas_do_not_crash() {
        let s = SamplerSpec::Poisson { space: Space::Euclidean { d: 2 }, intensity: 1.0 };
        let e = estimate_number_variance(&s, &[1.0], 2, 5).unwrap();
        assert!(e[0].variance.is_finite() && e[0].stderr_variance.is_finite());
        assert!(estimate_number_variance(&s, &[1.0], 1, 5).is_err());
    }

    #[test]
    fn zero_statistic_is_exactly_zero() {
        let s = SamplerSpec::Ginibre { n_matrix: 64 };
        let e = estimate_statistic_variance(&s, &RadialFunction::zero(), 10, 1).unwrap();
        assert_eq!(e.variance, 0.0);
    }
}
