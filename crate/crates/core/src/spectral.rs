//! Bartlett spectral measures: data model, the explicit measures of Poisson
//! and equivariant-kernel DPPs, variance integrals and the small-frequency
//! hyperuniformity classifier.
//!
//! A measure is stored as a density relative to the Plancherel coordinate
//! (dσ = ρ(λ) dσ_P(λ) on the principal branch), plus complementary-series
//! masses (disk only) and point atoms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Space;
use crate::io::fmt_f64;
use crate::quad::{self, Tolerance};
use crate::specfun::{bessel_j, gamma_abs2_three_half, laguerre};
use crate::sphtransform::{
    l2_inner, plancherel_density, plancherel_mass, RadialFunction, SpectralParameter, TransformPlan,
};

/// Kernel families whose diffraction κ̂ is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DppKernelSpec {
    /// Weyl-Heisenberg ensemble on C^d = R^{2d}: kernel
    /// L_n^{(d-1)}(|λ||z-w|²/2) e^{-|λ|(|z|²+|w|²-2z·w̄)/4} up to a unimodular cocycle.
    WeylHeisenberg { d: u32, lambda_wh: f64, n: u32 },
    /// Modified Bergman kernel on the disk, equal in law to the zeros of the
    /// hyperbolic Gaussian analytic function.
    Bergman,
    /// κ̂ ≡ 0 with the given intensity; collapses to the Poisson spectrum.
    Trivial { space: Space, intensity: f64 },
}

impl DppKernelSpec {
    pub fn ginibre() -> DppKernelSpec {
        DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh: 2.0 * PI, n: 0 }
    }

    pub fn space(&self) -> Result<Space> {
        match *self {
            DppKernelSpec::WeylHeisenberg { d, .. } => Space::euclidean(2 * d),
            DppKernelSpec::Bergman => Ok(Space::HyperbolicDisk),
            DppKernelSpec::Trivial { space, .. } => Ok(space),
        }
    }

    /// L(x_o, x_o): binom(n+d-1, n) for Weyl-Heisenberg (1 when d = 1 or n = 0).
    pub fn intensity(&self) -> f64 {
        match *self {
            DppKernelSpec::WeylHeisenberg { d, n, .. } => laguerre(n as usize, d as f64 - 1.0, 0.0),
            DppKernelSpec::Bergman => 1.0,
            DppKernelSpec::Trivial { intensity, .. } => intensity,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            DppKernelSpec::WeylHeisenberg { d, lambda_wh, .. } => {
                if d == 0 {
                    return Err(Error::validation("Weyl-Heisenberg dimension must be positive"));
                }
                if lambda_wh == 0.0 || !lambda_wh.is_finite() {
                    return Err(Error::validation("Weyl-Heisenberg λ must be finite and nonzero"));
                }
                Ok(())
            }
            DppKernelSpec::Bergman => Ok(()),
            DppKernelSpec::Trivial { space, intensity } => {
                space.validate()?;
                if !(intensity > 0.0) || !intensity.is_finite() {
                    return Err(Error::validation("intensity must be positive"));
                }
                Ok(())
            }
        }
    }

    /// κ̂ at a principal parameter.
    pub fn kappa_hat(&self, x: f64) -> Result<f64> {
        match *self {
            DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh, n } => polyanalytic_kappa_hat(lambda_wh, n, x),
            DppKernelSpec::WeylHeisenberg { d, lambda_wh, n } => weyl_heisenberg_kappa_hat(d, lambda_wh, n, x),
            DppKernelSpec::Bergman => Ok(bergman_kappa_hat(x)),
            DppKernelSpec::Trivial { .. } => Ok(0.0),
        }
    }

    /// intensity − κ̂(x), without the positivity check of [`dpp_spectrum`].
    pub fn density_formula(&self, x: f64) -> Result<f64> {
        if let DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh, n: 0 } = *self {
            if lambda_wh.abs() == 2.0 * PI {
                // 1 − e^{−πζ²} without cancellation near 0
                return Ok(-(-PI * x * x).exp_m1());
            }
        }
        Ok(self.intensity() - self.kappa_hat(x)?)
    }

    /// Parameter beyond which κ̂ < 1e-18.
    fn effective_support(&self) -> f64 {
        match *self {
            DppKernelSpec::WeylHeisenberg { d, lambda_wh, n } => {
                let alpha = d as f64 - 1.0;
                let mut x: f64 = 30.0;
                while laguerre(n as usize, alpha, x).powi(2) * (-x).exp() * (1.0 + x).powi(2 * d as i32) > 1e-18 {
                    x += 1.0;
                }
                (x * lambda_wh.abs() / (2.0 * PI * PI)).sqrt()
            }
            DppKernelSpec::Bergman => {
                let mut l: f64 = 10.0;
                while bergman_kappa_hat(l) > 1e-18 {
                    l += 0.5;
                }
                l
            }
            DppKernelSpec::Trivial { .. } => 0.0,
        }
    }
}

/// κ̂ of the d = 1 polyanalytic ensemble:
/// (2π/|λ|) L_n(2π²ζ²/|λ|)² e^{-2π²ζ²/|λ|}.
pub fn polyanalytic_kappa_hat(lambda_wh: f64, n: u32, zeta: f64) -> Result<f64> {
    if lambda_wh == 0.0 || !lambda_wh.is_finite() {
        return Err(Error::domain("λ must be finite and nonzero"));
    }
    let a = lambda_wh.abs();
    let x = 2.0 * PI * PI * zeta * zeta / a;
    Ok(2.0 * PI / a * laguerre(n as usize, 0.0, x).powi(2) * (-x).exp())
}

/// κ̂ of the Weyl-Heisenberg ensemble on C^d by radial quadrature:
/// ∫_{C^d} L_n^{(d-1)}(|λ|r²/2)² e^{-|λ|r²/2} ω_ζ(r) dA, where ω_ζ is the
/// spherical function of R^{2d} (normalized to ω(0) = 1).
pub fn weyl_heisenberg_kappa_hat(d: u32, lambda_wh: f64, n: u32, zeta: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("dimension must be positive"));
    }
    if lambda_wh == 0.0 || !lambda_wh.is_finite() {
        return Err(Error::domain("λ must be finite and nonzero"));
    }
    if !(zeta >= 0.0) {
        return Err(Error::domain("ζ must be nonnegative"));
    }
    let a = lambda_wh.abs();
    let alpha = d as f64 - 1.0;
    let order = d - 1;
    let mut fact = 1.0;
    for k in 1..d {
        fact *= k as f64;
    }
    let area = 2.0 * PI.powi(d as i32) / fact;
    let mut tmax: f64 = 40.0;
    while laguerre(n as usize, alpha, tmax).powi(2) * (-tmax).exp() * tmax.powf(alpha + 1.0) > 1e-18 {
        tmax += 2.0;
    }
    let rmax = (2.0 * tmax / a).sqrt();
    let integrand = |r: f64| {
        let t = 0.5 * a * r * r;
        let x = 2.0 * PI * zeta * r;
        let omega = if x < 1e-12 {
            1.0
        } else {
            fact * 2f64.powi(order as i32) * bessel_j(order, x) / x.powi(order as i32)
        };
        laguerre(n as usize, alpha, t).powi(2) * (-t).exp() * omega * r.powi(2 * d as i32 - 1)
    };
    let breaks: Vec<f64> = if zeta > 0.0 {
        let w = 0.25 / zeta;
        let k = (rmax / w).ceil() as usize;
        (1..k.min(4000)).map(|j| j as f64 * w).collect()
    } else {
        Vec::new()
    };
    let v = quad::integrate_with_breaks(integrand, 0.0, rmax, &breaks, Tolerance::new(1e-14, 1e-12).with_segments(20_000))?;
    Ok(area * v)
}

/// κ̂ of the modified Bergman kernel: |Γ(3/2 + iλ)|².
pub fn bergman_kappa_hat(lambda: f64) -> f64 {
    gamma_abs2_three_half(lambda)
}

/// Density of a spectral measure relative to σ_P on the principal branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Density {
    Constant { level: f64 },
    /// intensity − κ̂.
    Dpp { kernel: DppKernelSpec },
    /// σ((0,ε]) = ε^α up to the cutoff, constant relative density beyond.
    Synthetic { alpha: f64, cutoff: f64 },
    /// Piecewise linear through the grid, constant beyond its last point.
    Tabulated { grid: Vec<f64>, values: Vec<f64> },
    Scaled { factor: f64, inner: Box<Density> },
}

impl Density {
    /// Relative density ρ(x) against σ_P.
    pub fn relative(&self, space: &Space, x: f64) -> Result<f64> {
        Ok(match self {
            Density::Constant { level } => *level,
            Density::Dpp { kernel } => kernel.density_formula(x)?,
            Density::Synthetic { alpha, cutoff } => {
                if x <= *cutoff {
                    let p = plancherel_density(space, SpectralParameter::principal(space, x));
                    alpha * x.powf(alpha - 1.0) / p
                } else {
                    synthetic_level(space, *alpha, *cutoff)
                }
            }
            Density::Tabulated { grid, values } => interpolate(grid, values, x),
            Density::Scaled { factor, inner } => factor * inner.relative(space, x)?,
        })
    }

    /// dσ/dx = ρ(x) · (Plancherel density at x).
    pub fn measure_density(&self, space: &Space, x: f64) -> Result<f64> {
        match self {
            Density::Synthetic { alpha, cutoff } if x <= *cutoff => Ok(alpha * x.powf(alpha - 1.0)),
            Density::Scaled { factor, inner } => Ok(factor * inner.measure_density(space, x)?),
            _ => Ok(self.relative(space, x)? * plancherel_density(space, SpectralParameter::principal(space, x))),
        }
    }

    /// Limit of ρ at large parameters.
    pub fn asymptotic_level(&self, space: &Space) -> f64 {
        match self {
            Density::Constant { level } => *level,
            Density::Dpp { kernel } => kernel.intensity(),
            Density::Synthetic { alpha, cutoff } => synthetic_level(space, *alpha, *cutoff),
            Density::Tabulated { values, .. } => *values.last().unwrap_or(&0.0),
            Density::Scaled { factor, inner } => factor * inner.asymptotic_level(space),
        }
    }

    /// Parameter beyond which ρ equals its asymptotic level to 1e-18.
    pub fn effective_support(&self) -> f64 {
        match self {
            Density::Constant { .. } => 0.0,
            Density::Dpp { kernel } => kernel.effective_support(),
            Density::Synthetic { cutoff, .. } => *cutoff,
            Density::Tabulated { grid, .. } => *grid.last().unwrap_or(&0.0),
            Density::Scaled { inner, .. } => inner.effective_support(),
        }
    }

    /// Parameters where ρ is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Density::Synthetic { cutoff, .. } => vec![*cutoff],
            Density::Tabulated { grid, .. } => grid.clone(),
            Density::Scaled { inner, .. } => inner.kinks(),
            _ => Vec::new(),
        }
    }
}

fn synthetic_level(space: &Space, alpha: f64, cutoff: f64) -> f64 {
    alpha * cutoff.powf(alpha - 1.0) / plancherel_density(space, SpectralParameter::principal(space, cutoff))
}

fn interpolate(grid: &[f64], values: &[f64], x: f64) -> f64 {
    if grid.is_empty() {
        return 0.0;
    }
    if x <= grid[0] {
        return values[0];
    }
    if x >= grid[grid.len() - 1] {
        return values[values.len() - 1];
    }
    let i = grid.partition_point(|g| *g <= x) - 1;
    let t = (x - grid[i]) / (grid[i + 1] - grid[i]);
    values[i] + t * (values[i + 1] - values[i])
}

/// Bartlett spectral measure of an invariant random measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMeasure {
    pub space: Space,
    pub principal_density: Density,
    /// (s0, mass) pairs for the complementary spherical functions ω_{i s0}.
    pub complementary: Vec<(f64, f64)>,
    pub atoms: Vec<(SpectralParameter, f64)>,
    pub convention_note: String,
}

fn convention_note(space: &Space) -> String {
    match space {
        Space::Euclidean { d } => format!(
            "density relative to sigma_P = |S^{}| zeta^{} dzeta, characters exp(-2 pi i <x, xi>)",
            d - 1,
            d - 1
        ),
        Space::HyperbolicDisk => {
            "density relative to sigma_P = 2 lambda tanh(pi lambda) dlambda, invariant measure dA/(pi (1-|z|^2)^2)"
                .to_string()
        }
    }
}

impl SpectralMeasure {
    pub fn new(
        space: Space,
        principal_density: Density,
        complementary: Vec<(f64, f64)>,
        atoms: Vec<(SpectralParameter, f64)>,
    ) -> Result<SpectralMeasure> {
        let m = SpectralMeasure { space, principal_density, complementary, atoms, convention_note: convention_note(&space) };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        if !self.complementary.is_empty() && !self.space.is_hyperbolic() {
            return Err(Error::validation("complementary series only exists on the disk"));
        }
        for &(s0, m) in &self.complementary {
            if !(s0 > 0.0 && s0 < 0.5) {
                return Err(Error::validation(format!("complementary parameter {s0} outside (0, 1/2)")));
            }
            if !(m >= 0.0) {
                return Err(Error::validation("complementary masses must be nonnegative"));
            }
        }
        for (p, m) in &self.atoms {
            p.check(&self.space)?;
            let trivial = matches!(p, SpectralParameter::Euclidean(z) if *z == 0.0)
                || matches!(p, SpectralParameter::Complementary(s) if *s == 0.5);
            if trivial {
                return Err(Error::validation("atoms at the trivial spherical function are not allowed"));
            }
            if !(*m >= 0.0) {
                return Err(Error::validation("atom masses must be nonnegative"));
            }
        }
        match &self.principal_density {
            Density::Constant { level } if !(*level >= 0.0) => {
                return Err(Error::validation("density level must be nonnegative"));
            }
            Density::Synthetic { alpha, cutoff } if !(*alpha > 0.0 && *cutoff > 0.0) => {
                return Err(Error::validation("synthetic measures need α > 0 and cutoff > 0"));
            }
            Density::Tabulated { grid, values } => {
                if grid.len() != values.len() || grid.is_empty() {
                    return Err(Error::validation("tabulated density needs matching nonempty columns"));
                }
                if grid.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::validation("tabulated grid must be strictly increasing"));
                }
                if values.iter().any(|v| !(*v >= 0.0)) {
                    return Err(Error::validation("tabulated density must be nonnegative"));
                }
            }
            Density::Scaled { factor, .. } if !(*factor >= 0.0) => {
                return Err(Error::validation("scale factor must be nonnegative"));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn density(&self, x: f64) -> Result<f64> {
        self.principal_density.relative(&self.space, x)
    }

    pub fn complementary_mass(&self) -> f64 {
        self.complementary.iter().fold(0.0, |acc, (_, m)| acc + m)
    }

    /// Same measure with the principal density multiplied by c.
    pub fn scaled(&self, c: f64) -> SpectralMeasure {
        let mut out = self.clone();
        out.principal_density = Density::Scaled { factor: c, inner: Box::new(self.principal_density.clone()) };
        out
    }

    /// σ((0, ε]) on the principal branch, atoms included.
    pub fn mass(&self, eps: f64) -> Result<f64> {
        let breaks = self.principal_density.kinks();
        let failure = std::cell::Cell::new(false);
        let v = quad::integrate_with_breaks(
            |x| {
                self.principal_density.measure_density(&self.space, x).unwrap_or_else(|_| {
                    failure.set(true);
                    f64::NAN
                })
            },
            0.0,
            eps,
            &breaks,
            Tolerance::new(1e-300, 1e-10).with_segments(5000),
        )?;
        if failure.get() {
            return Err(Error::numeric("density evaluation failed", f64::NAN));
        }
        let atoms: f64 = self
            .atoms
            .iter()
            .filter(|(p, _)| !matches!(p, SpectralParameter::Complementary(_)) && p.value() > 0.0 && p.value() <= eps)
            .map(|(_, m)| m)
            .sum();
        Ok(v + atoms)
    }

    /// CSV table of (parameter, density) on the grid.
    pub fn to_csv(&self, grid: &[f64]) -> Result<String> {
        let mut out = String::from("parameter,density\n");
        for &x in grid {
            out.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(self.density(x)?)));
        }
        Ok(out)
    }

    /// JSON header accompanying [`SpectralMeasure::to_csv`].
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "space": self.space,
            "convention_note": self.convention_note,
            "complementary": self.complementary,
            "atoms": self.atoms,
            "asymptotic_level": self.principal_density.asymptotic_level(&self.space),
            "source": self.principal_density,
            "columns": ["parameter", "density"],
        })
    }

    /// Rebuild a tabulated measure from the CSV table and its JSON header.
    pub fn from_csv(csv: &str, metadata: &serde_json::Value) -> Result<SpectralMeasure> {
        let space: Space = serde_json::from_value(metadata["space"].clone())?;
        let complementary: Vec<(f64, f64)> = serde_json::from_value(metadata["complementary"].clone())?;
        let atoms: Vec<(SpectralParameter, f64)> = serde_json::from_value(metadata["atoms"].clone())?;
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for (i, line) in csv.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let mut it = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::validation(format!("short CSV row {}", i + 1)))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::validation(format!("bad number on CSV row {}: {e}", i + 1)))
            };
            grid.push(parse(it.next())?);
            values.push(parse(it.next())?);
        }
        SpectralMeasure::new(space, Density::Tabulated { grid, values }, complementary, atoms)
    }
}

/// Unit-intensity Poisson spectrum scaled by the intensity: intensity · σ_P.
pub fn poisson_spectrum(space: Space, intensity: f64) -> Result<SpectralMeasure> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::validation(format!("intensity must be positive, got {intensity}")));
    }
    SpectralMeasure::new(space, Density::Constant { level: intensity }, vec![], vec![])
}

/// Diffraction of an equivariant-kernel DPP: (intensity − κ̂) dσ_P.
pub fn dpp_spectrum(space: Space, kernel: DppKernelSpec) -> Result<SpectralMeasure> {
    kernel.validate()?;
    let ks = kernel.space()?;
    if ks != space {
        return Err(Error::validation(format!("kernel lives on {ks:?}, not {space:?}")));
    }
    let top = kernel.effective_support();
    let steps = 400;
    let intensity = kernel.intensity();
    for i in 0..=steps {
        let x = top * i as f64 / steps as f64;
        let k = kernel.kappa_hat(x)?;
        if k > intensity + 1e-12 {
            return Err(Error::validation(format!(
                "not a DPP kernel: κ̂({x}) = {k} exceeds the intensity {intensity}"
            )));
        }
    }
    if let DppKernelSpec::Trivial { intensity, .. } = kernel {
        return poisson_spectrum(space, intensity);
    }
    SpectralMeasure::new(space, Density::Dpp { kernel }, vec![], vec![])
}

/// Var(𝕊f) = ∫ |f̂|² dσ.
pub fn variance_of_statistic(sigma: &SpectralMeasure, f: &RadialFunction) -> Result<f64> {
    Ok(spectral_covariance(sigma, f, f)?.max(0.0))
}

pub(crate) fn plan_bound(sigma: &SpectralMeasure) -> f64 {
    let atoms = sigma
        .atoms
        .iter()
        .filter(|(p, _)| !matches!(p, SpectralParameter::Complementary(_)))
        .map(|(p, _)| p.value())
        .fold(0.0, f64::max);
    sigma.principal_density.effective_support().max(atoms).max(1e-3)
}

/// ∫ f̂ ĝ dσ, split as c∞⟨f, g⟩ + ∫ f̂ ĝ (ρ − c∞) dσ_P + complementary + atoms,
/// where c∞ is the asymptotic level of ρ; the first term is exact by the
/// Plancherel identity and the second has bounded support.
pub fn spectral_covariance(sigma: &SpectralMeasure, f: &RadialFunction, g: &RadialFunction) -> Result<f64> {
    let bound = plan_bound(sigma);
    let pf = TransformPlan::new(&sigma.space, f, bound)?;
    let pg = TransformPlan::new(&sigma.space, g, bound)?;
    let extent = f.support().extent().max(g.support().extent());
    covariance_with_plans(sigma, f, g, &pf, &pg, extent)
}

pub(crate) fn covariance_with_plans(
    sigma: &SpectralMeasure,
    f: &RadialFunction,
    g: &RadialFunction,
    pf: &TransformPlan,
    pg: &TransformPlan,
    extent: f64,
) -> Result<f64> {
    let space = sigma.space;
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let level = sigma.principal_density.asymptotic_level(&space);
    let mut total = if level != 0.0 { level * l2_inner(&space, f, g)? } else { 0.0 };
    let top = sigma.principal_density.effective_support();
    if top > 0.0 {
        let mut breaks = sigma.principal_density.kinks();
        let period = match space {
            Space::Euclidean { .. } => 0.5 / extent,
            Space::HyperbolicDisk => PI / extent,
        };
        let n = (top / (0.5 * period)).ceil() as usize;
        breaks.extend((1..n.min(20_000)).map(|k| k as f64 * 0.5 * period));
        let failure = std::cell::Cell::new(false);
        let integrand = |x: f64| {
            let p = SpectralParameter::principal(&space, x);
            let dens = match sigma.principal_density.measure_density(&space, x) {
                Ok(v) => v,
                Err(_) => {
                    failure.set(true);
                    return f64::NAN;
                }
            };
            let diff = dens - level * plancherel_density(&space, p);
            pf.eval_unchecked(p) * pg.eval_unchecked(p) * diff
        };
        let scale = total.abs().max(1e-300);
        let v = quad::integrate_with_breaks(
            integrand,
            0.0,
            top,
            &breaks,
            Tolerance::new(1e-14 * scale, 1e-11).with_segments(50_000),
        )?;
        if failure.get() {
            return Err(Error::numeric("density evaluation failed", f64::NAN));
        }
        total += v;
    }
    for &(s0, m) in &sigma.complementary {
        let p = SpectralParameter::Complementary(s0);
        total += m * pf.eval(p)? * pg.eval(p)?;
    }
    for &(p, m) in &sigma.atoms {
        total += m * pf.eval(p)? * pg.eval(p)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Hyperuniform,
    NotHyperuniform,
    Inconclusive,
}

pub const HYPERUNIFORM_THRESHOLD: f64 = 1e-3;
pub const NOT_HYPERUNIFORM_THRESHOLD: f64 = 1e-2;

impl Verdict {
    pub fn from_limit(limit: f64, complementary_mass: f64) -> Verdict {
        if complementary_mass > 0.0 || limit > NOT_HYPERUNIFORM_THRESHOLD {
            Verdict::NotHyperuniform
        } else if limit < HYPERUNIFORM_THRESHOLD {
            Verdict::Hyperuniform
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperuniformityVerdict {
    pub verdict: Verdict,
    pub ratio_trace: Vec<(f64, f64)>,
    pub limit_estimate: f64,
    pub complementary_mass: f64,
}

/// Limit of a sequence from its last three terms by Aitken's Δ² process.
///
/// A sequence that is increasing with non-shrinking increments is treated as
/// divergent and its last term is returned. Estimates are clamped at 0.
pub fn extrapolate_limit(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n == 0 {
        return f64::NAN;
    }
    if n < 3 {
        return seq[n - 1].max(0.0);
    }
    let (a, b, c) = (seq[n - 3], seq[n - 2], seq[n - 1]);
    let d1 = b - a;
    let d2 = c - b;
    if d1 > 0.0 && d2 >= d1 {
        return c;
    }
    let den = d2 - d1;
    if den.abs() <= 1e-14 * c.abs().max(b.abs()) || den == 0.0 {
        return c.max(0.0);
    }
    let l = c - d2 * d2 / den;
    if l.is_finite() {
        l.max(0.0)
    } else {
        c.max(0.0)
    }
}

/// Geometric ε grid eps0, eps0·q, ... (count entries).
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * ratio.powi(k as i32)).collect()
}

/// Ratio trace σ((0,ε])/σ_P((0,ε]) and the resulting verdict.
pub fn classify_hyperuniform(sigma: &SpectralMeasure, eps_grid: &[f64]) -> Result<HyperuniformityVerdict> {
    if eps_grid.is_empty() {
        return Err(Error::validation("empty ε grid"));
    }
    if eps_grid.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::validation("ε grid must be strictly decreasing"));
    }
    if eps_grid.iter().any(|e| !(*e >= 1e-4) || !e.is_finite()) {
        return Err(Error::validation("ε grid entries must be finite and at least 1e-4"));
    }
    let mut trace = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        trace.push((eps, sigma.mass(eps)? / plancherel_mass(&sigma.space, eps)?));
    }
    let values: Vec<f64> = trace.iter().map(|t| t.1).collect();
    let limit = extrapolate_limit(&values);
    let cm = sigma.complementary_mass();
    Ok(HyperuniformityVerdict {
        verdict: Verdict::from_limit(limit, cm),
        ratio_trace: trace,
        limit_estimate: limit,
        complementary_mass: cm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ball_volume;

    const H: Space = Space::HyperbolicDisk;
    const E2: Space = Space::Euclidean { d: 2 };

    #[test]
    fn kappa_hat_examples() {
        assert!((polyanalytic_kappa_hat(2.0 * PI, 0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((polyanalytic_kappa_hat(2.0 * PI, 0, 1.0).unwrap() - (-PI).exp()).abs() < 1e-15);
        assert!((polyanalytic_kappa_hat(4.0 * PI, 0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(polyanalytic_kappa_hat(0.0, 0, 1.0).is_err());
        assert!((bergman_kappa_hat(0.0) - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn weyl_heisenberg_quadrature_matches_closed_forms() {
        let a = weyl_heisenberg_kappa_hat(1, 2.0 * PI, 1, 0.5).unwrap();
        let b = polyanalytic_kappa_hat(2.0 * PI, 1, 0.5).unwrap();
        assert!((a - b).abs() < 1e-8);
        assert!(weyl_heisenberg_kappa_hat(1, 2.0 * PI, 0, 5.0).unwrap().abs() < 1e-10);
        // d = 2, n = 0: the Gaussian e^{-|λ|r²/2} on R^4 has Fourier transform
        // (2π/|λ|)² e^{-2π²ζ²/|λ|}, separable as a product of planar Gaussians.
        for &(l, z) in &[(2.0 * PI, 0.0), (2.0 * PI, 0.7), (3.0, 0.4)] {
            let q = weyl_heisenberg_kappa_hat(2, l, 0, z).unwrap();
            let closed = (2.0 * PI / l).powi(2) * (-2.0 * PI * PI * z * z / l).exp();
            assert!((q - closed).abs() < 1e-9, "λ={l} ζ={z}: {q} vs {closed}");
        }
        // polar closed form for the total mass: (2π/|λ|)^d binom(n+d-1, n)
        let q = weyl_heisenberg_kappa_hat(2, 2.0 * PI, 2, 0.0).unwrap();
        assert!((q - 3.0).abs() < 1e-9);
    }

    #[test]
    fn dpp_rejects_non_contractive_kernel() {
        let k = DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh: PI, n: 0 };
        assert!(matches!(dpp_spectrum(E2, k), Err(Error::Validation(_))));
        assert!((k.density_formula(0.0).unwrap() + 1.0).abs() < 1e-15);
        assert!(dpp_spectrum(H, DppKernelSpec::ginibre()).is_err());
    }

    #[test]
    fn dpp_density_nonnegative_for_shipped_kernels() {
        let kernels = [
            (E2, DppKernelSpec::ginibre()),
            (E2, DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh: 4.0 * PI, n: 0 }),
            (E2, DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh: 2.0 * PI, n: 3 }),
            (H, DppKernelSpec::Bergman),
        ];
        for (space, k) in kernels {
            let s = dpp_spectrum(space, k).unwrap();
            for i in 0..=500 {
                assert!(s.density(i as f64 * 0.02).unwrap() >= 0.0);
            }
        }
    }

    #[test]
    fn trivial_kernel_is_poisson() {
        let s = dpp_spectrum(H, DppKernelSpec::Trivial { space: H, intensity: 1.5 }).unwrap();
        assert_eq!(s, poisson_spectrum(H, 1.5).unwrap());
    }

    #[test]
    fn poisson_variances() {
        let e1 = Space::Euclidean { d: 1 };
        let s = poisson_spectrum(e1, 0.5).unwrap();
        let v = variance_of_statistic(&s, &RadialFunction::ball(1.0).unwrap()).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let s = poisson_spectrum(E2, 1.0).unwrap();
        let v = variance_of_statistic(&s, &RadialFunction::ball(1.0).unwrap()).unwrap();
        assert!((v - PI).abs() < 1e-12);
        let s = poisson_spectrum(H, 2.0).unwrap();
        assert_eq!(s.density(3.0).unwrap(), 2.0);
    }

    #[test]
    fn ginibre_variance_matches_direct_integral() {
        let s = dpp_spectrum(E2, DppKernelSpec::ginibre()).unwrap();
        let v = variance_of_statistic(&s, &RadialFunction::ball(1.0).unwrap()).unwrap();
        let direct = quad::integrate(
            |z| {
                let x = 2.0 * PI * z;
                let j = if z == 0.0 { PI } else { bessel_j(1, x) / z };
                j * j * (1.0 - (-PI * z * z).exp()) * 2.0 * PI * z
            },
            0.0,
            400.0,
            Tolerance::new(1e-12, 1e-10).with_segments(20_000),
        )
        .unwrap();
        // truncated oscillatory tail of the direct integral ~ 1/(π² · 400)
        assert!((v - direct).abs() < 2e-3, "{v} vs {direct}");
        assert!(v < PI);
    }

    #[test]
    fn atom_with_vanishing_transform_contributes_nothing() {
        // sin(2πζ)/(πζ) vanishes at ζ = 1/2 for the unit interval
        let e1 = Space::Euclidean { d: 1 };
        let s = SpectralMeasure::new(e1, Density::Constant { level: 0.0 }, vec![], vec![(SpectralParameter::Euclidean(0.5), 3.0)]).unwrap();
        let v = variance_of_statistic(&s, &RadialFunction::ball(1.0).unwrap()).unwrap();
        assert!(v < 1e-25);
    }

    #[test]
    fn dpp_variance_below_poisson() {
        let s = dpp_spectrum(H, DppKernelSpec::Bergman).unwrap();
        for r in [0.5, 1.0, 2.0, 3.0] {
            let v = variance_of_statistic(&s, &RadialFunction::ball(r).unwrap()).unwrap();
            assert!(v > 0.0 && v < ball_volume(&H, r));
        }
    }

    #[test]
    fn classifier_examples() {
        let grid = geometric_grid(0.05, 0.5, 9);
        let p = classify_hyperuniform(&poisson_spectrum(H, 1.0).unwrap(), &grid).unwrap();
        assert_eq!(p.verdict, Verdict::NotHyperuniform);
        assert!((p.limit_estimate - 1.0).abs() < 1e-9);
        let g = classify_hyperuniform(&dpp_spectrum(E2, DppKernelSpec::ginibre()).unwrap(), &grid).unwrap();
        assert_eq!(g.verdict, Verdict::Hyperuniform);
        let b = classify_hyperuniform(&dpp_spectrum(H, DppKernelSpec::Bergman).unwrap(), &grid).unwrap();
        assert_eq!(b.verdict, Verdict::NotHyperuniform);
        assert!((b.limit_estimate - (1.0 - PI / 4.0)).abs() < 1e-3);
        for (eps, r) in &b.ratio_trace {
            assert!(*eps <= 0.05 && (r - (1.0 - PI / 4.0)).abs() < 0.01);
        }
        assert!(classify_hyperuniform(&poisson_spectrum(H, 1.0).unwrap(), &[0.1, 0.2]).is_err());
        assert!(classify_hyperuniform(&poisson_spectrum(H, 1.0).unwrap(), &[0.1, 1e-5]).is_err());
    }

    #[test]
    fn aitken_on_geometric_sequences() {
        let s: Vec<f64> = (0..6).map(|k| 0.3 + 0.1 * 0.5f64.powi(k)).collect();
        assert!((extrapolate_limit(&s) - 0.3).abs() < 1e-12);
        let s: Vec<f64> = (0..6).map(|k| 0.5f64.powf(0.5 * k as f64)).collect();
        assert!(extrapolate_limit(&s).abs() < 1e-12);
        let s: Vec<f64> = (0..6).map(|k| 2f64.powf(0.5 * k as f64)).collect();
        assert_eq!(extrapolate_limit(&s), s[5]);
    }

    #[test]
    fn csv_round_trip() {
        let s = dpp_spectrum(H, DppKernelSpec::Bergman).unwrap();
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let csv = s.to_csv(&grid).unwrap();
        let meta = s.metadata_json();
        let back = SpectralMeasure::from_csv(&csv, &meta).unwrap();
        for &x in &grid {
            assert!((back.density(x).unwrap() - s.density(x).unwrap()).abs() < 1e-12);
        }
        assert!(SpectralMeasure::from_csv("parameter,density\n0.1,abc\n", &meta).is_err());
    }

    #[test]
    fn measure_validation() {
        assert!(SpectralMeasure::new(E2, Density::Constant { level: 1.0 }, vec![(0.2, 1.0)], vec![]).is_err());
        assert!(SpectralMeasure::new(H, Density::Constant { level: 1.0 }, vec![(0.7, 1.0)], vec![]).is_err());
        assert!(SpectralMeasure::new(E2, Density::Constant { level: 1.0 }, vec![], vec![(SpectralParameter::Euclidean(0.0), 1.0)]).is_err());
        assert!(SpectralMeasure::new(H, Density::Constant { level: -1.0 }, vec![], vec![]).is_err());
        assert!(poisson_spectrum(H, 0.0).is_err());
    }
}
