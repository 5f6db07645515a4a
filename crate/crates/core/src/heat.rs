//! Heat-kernel hyperuniformity: scaled heat-statistic variances, synthetic
//! tempered measures and the comparison with the spectral verdict.
//!
//! Transforms of the heat kernel are e^{-4π²τζ²} on R^d (characters
//! e^{-2πi⟨x,ξ⟩}) and e^{-τ(1/4+λ²)} on the disk, continued to
//! e^{-τ(1/4-s0²)} on the complementary series. The scaled value is
//! τ^{d/2} Var on R^d and τ^{3/2} e^{τ/2} Var on the disk; on the disk it is
//! computed as τ^{3/2} (∫ e^{-2τλ²} dσ^{(p)} + Σ m e^{2τ s0²}) so no huge
//! prefactor multiplies a tiny integral.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, Space};
use crate::io::fmt_f64;
use crate::quad::{self, Tolerance};
use crate::spectral::{
    classify_hyperuniform, extrapolate_limit, Density, HyperuniformityVerdict, SpectralMeasure,
    Verdict,
};
use crate::sphtransform::{HeatTime, SpectralParameter};

pub const MAX_TAU: f64 = 50.0;

/// Exponent rate c with ĥ_τ² = e^{-c τ x²} (times e^{-τ/2} on the disk).
fn gaussian_rate(space: &Space) -> f64 {
    match space {
        Space::Euclidean { .. } => 8.0 * PI * PI,
        Space::HyperbolicDisk => 2.0,
    }
}

/// Multiplier turning a raw heat variance into the scaled value.
pub fn heat_prefactor(space: &Space, tau: f64) -> f64 {
    match space {
        Space::Euclidean { d } => tau.powf(0.5 * *d as f64),
        Space::HyperbolicDisk => tau.powf(1.5) * (0.5 * tau).exp(),
    }
}

/// Prefactor × Var(𝕊h_τ), evaluated without forming the prefactor.
pub fn scaled_heat_variance(sigma: &SpectralMeasure, tau: HeatTime) -> Result<f64> {
    let space = sigma.space;
    let t = tau.tau();
    let c = gaussian_rate(&space);
    let poly = match space {
        Space::Euclidean { d } => t.powf(0.5 * d as f64),
        Space::HyperbolicDisk => t.powf(1.5),
    };
    // e^{-cτx²} < e^{-60} beyond top
    let top = (60.0 / (c * t)).sqrt();
    let mut breaks = sigma.principal_density.kinks();
    breaks.extend((1..8).map(|k| k as f64 * top / 8.0));
    let failure = std::cell::Cell::new(false);
    let integral = quad::integrate_with_breaks(
        |x| {
            let dens = sigma.principal_density.measure_density(&space, x).unwrap_or_else(|_| {
                failure.set(true);
                f64::NAN
            });
            (-c * t * x * x).exp() * dens
        },
        0.0,
        top,
        &breaks,
        Tolerance::new(1e-300, 1e-11).with_segments(10_000),
    )?;
    if failure.get() {
        return Err(Error::numeric("density evaluation failed", f64::NAN));
    }
    let mut total = integral;
    for &(s0, m) in &sigma.complementary {
        total += m * (2.0 * t * s0 * s0).exp();
    }
    for &(p, m) in &sigma.atoms {
        total += m
            * match p {
                SpectralParameter::Complementary(s0) => (2.0 * t * s0 * s0).exp(),
                other => (-c * t * other.value().powi(2)).exp(),
            };
    }
    Ok(poly * total)
}

/// Var(𝕊h_τ) = ∫ ĥ_τ² dσ.
pub fn heat_variance(sigma: &SpectralMeasure, tau: HeatTime) -> Result<f64> {
    let scaled = scaled_heat_variance(sigma, tau)?;
    Ok((scaled / heat_prefactor(&sigma.space, tau.tau())).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatRow {
    pub tau: f64,
    pub raw_variance: f64,
    pub scaled_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCriterionTrace {
    pub rows: Vec<HeatRow>,
    pub scaling: String,
    /// The last three scaled values are nonincreasing and below the first.
    pub decays: bool,
}

impl HeatCriterionTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tau,raw_variance,scaled_value\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{}\n", fmt_f64(r.tau), fmt_f64(r.raw_variance), fmt_f64(r.scaled_value)));
        }
        out
    }
}

fn scaling_note(space: &Space) -> String {
    match space {
        Space::Euclidean { d } => format!("tau^({d}/2) * Var(S h_tau), heat transform exp(-4 pi^2 tau zeta^2)"),
        Space::HyperbolicDisk => "tau^(3/2) * exp(tau/2) * Var(S h_tau), heat transform exp(-tau (1/4 + lambda^2))".into(),
    }
}

fn check_tau_grid(tau_grid: &[f64]) -> Result<()> {
    if tau_grid.is_empty() {
        return Err(Error::validation("empty τ grid"));
    }
    if tau_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::validation("τ grid must be strictly increasing"));
    }
    if tau_grid.iter().any(|t| !(*t > 0.0) || *t > MAX_TAU) {
        return Err(Error::validation(format!("τ values must lie in (0, {MAX_TAU}]")));
    }
    Ok(())
}

pub fn heat_criterion_trace(sigma: &SpectralMeasure, tau_grid: &[f64]) -> Result<HeatCriterionTrace> {
    check_tau_grid(tau_grid)?;
    let mut rows = Vec::with_capacity(tau_grid.len());
    for &t in tau_grid {
        let tau = HeatTime::new(t)?;
        let scaled = scaled_heat_variance(sigma, tau)?;
        rows.push(HeatRow { tau: t, raw_variance: scaled / heat_prefactor(&sigma.space, t), scaled_value: scaled });
    }
    let n = rows.len();
    let decays = n >= 4 && {
        let first = rows[0].scaled_value;
        let tail = &rows[n - 3..];
        tail.iter().all(|r| r.scaled_value < first) && tail.windows(2).all(|w| w[1].scaled_value <= w[0].scaled_value)
    };
    Ok(HeatCriterionTrace { rows, scaling: scaling_note(&sigma.space), decays })
}

/// Measure with σ((0,ε]) = ε^α for ε ≤ cutoff and constant density relative
/// to σ_P beyond the cutoff.
pub fn synthetic_tempered_measure(space: Space, alpha: f64, cutoff: f64) -> Result<SpectralMeasure> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::validation("α must be positive"));
    }
    if !(cutoff > 0.0) || !cutoff.is_finite() {
        return Err(Error::validation("cutoff must be positive"));
    }
    SpectralMeasure::new(space, Density::Synthetic { alpha, cutoff }, vec![], vec![])
}

/// Exponent separating hyperuniform from non-hyperuniform synthetic measures.
pub fn critical_exponent(space: &Space) -> f64 {
    match space {
        Space::Euclidean { d } => *d as f64,
        Space::HyperbolicDisk => 3.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatVerdict {
    pub verdict: Verdict,
    /// Scaled values divided by [`plancherel_heat_limit`].
    pub normalized_trace: Vec<(f64, f64)>,
    pub limit_estimate: f64,
}

/// Large-τ limit of the scaled value of σ_P: |S^{d-1}| Γ(d/2) / (2 (8π²)^{d/2})
/// on R^d and π^{3/2}/2^{5/2} on the disk (from 2λ tanh(πλ) ≈ 2πλ²).
pub fn plancherel_heat_limit(space: &Space) -> f64 {
    match space {
        Space::Euclidean { d } => {
            let h = 0.5 * *d as f64;
            sphere_area(*d) * statrs::function::gamma::gamma(h) / (2.0 * (8.0 * PI * PI).powf(h))
        }
        Space::HyperbolicDisk => PI.powf(1.5) / 2f64.powf(2.5),
    }
}

/// Verdict from the scaled heat trace divided by the Plancherel limit and
/// extrapolated like the spectral ratio trace.
pub fn heat_verdict(sigma: &SpectralMeasure, tau_grid: &[f64]) -> Result<HeatVerdict> {
    let trace = heat_criterion_trace(sigma, tau_grid)?;
    let norm = plancherel_heat_limit(&sigma.space);
    let normalized: Vec<(f64, f64)> = trace.rows.iter().map(|a| (a.tau, a.scaled_value / norm)).collect();
    let values: Vec<f64> = normalized.iter().map(|v| v.1).collect();
    let limit = extrapolate_limit(&values);
    Ok(HeatVerdict {
        verdict: Verdict::from_limit(limit, sigma.complementary_mass()),
        normalized_trace: normalized,
        limit_estimate: limit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceRecord {
    pub spectral: HyperuniformityVerdict,
    pub heat: HeatVerdict,
    pub spectral_verdict: Verdict,
    pub heat_verdict: Verdict,
    /// Both verdicts equal and neither inconclusive.
    pub agree: bool,
}

pub fn equivalence_check(sigma: &SpectralMeasure, tau_grid: &[f64], eps_grid: &[f64]) -> Result<EquivalenceRecord> {
    let spectral = classify_hyperuniform(sigma, eps_grid)?;
    let heat = heat_verdict(sigma, tau_grid)?;
    let (sv, hv) = (spectral.verdict, heat.verdict);
    Ok(EquivalenceRecord {
        spectral,
        heat,
        spectral_verdict: sv,
        heat_verdict: hv,
        agree: sv == hv && sv != Verdict::Inconclusive,
    })
}

/// Doubling τ grid 1, 2, 4, ..., 32.
pub fn default_tau_grid() -> Vec<f64> {
    (0..6).map(|k| 2f64.powi(k)).collect()
}
