//! Spherical functions, spherical transforms of radial functions, Plancherel
//! densities and heat kernels.
//!
//! Conventions. On R^d the dual is parameterized by the radial frequency ζ
//! with character e^{-2πi⟨x,ξ⟩}, so ω_ζ(s) = Γ(d/2)(2/x)^{d/2-1}J_{d/2-1}(x)
//! with x = 2πζs and dσ_P = |S^{d-1}| ζ^{d-1} dζ. On the disk
//! ω_λ(s) = P_{-1/2+iλ}(cosh s), evaluated through the Mehler form
//!
//!   ω_λ(s) = (√2/π) ∫₀^s cos(λu) / √(cosh s − cosh u) du,
//!
//! which is the cosine-power integral (1/π)∫₀^π (cosh s − sinh s cos t)^{-1/2-iλ} dt
//! after the substitution e^u = cosh s − sinh s cos t. With the invariant
//! measure dA/(π(1−|z|²)²) the Plancherel density is 2λ·tanh(πλ) dλ.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{sphere_area, Space};
use crate::quad::{self, Tolerance};
use crate::specfun::bessel_j;

/// Point of the positive-definite spherical dual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "branch", content = "value", rename_all = "snake_case")]
pub enum SpectralParameter {
    /// Radial frequency ζ ≥ 0 on R^d.
    Euclidean(f64),
    /// Principal series λ ≥ 0 on the disk.
    Principal(f64),
    /// Complementary series ω_{i s0}, s0 ∈ (0, 1/2], on the disk.
    Complementary(f64),
}

impl SpectralParameter {
    pub fn value(&self) -> f64 {
        match *self {
            SpectralParameter::Euclidean(v)
            | SpectralParameter::Principal(v)
            | SpectralParameter::Complementary(v) => v,
        }
    }

    /// Principal-branch parameter appropriate for the space.
    pub fn principal(space: &Space, v: f64) -> SpectralParameter {
        match space {
            Space::Euclidean { .. } => SpectralParameter::Euclidean(v),
            Space::HyperbolicDisk => SpectralParameter::Principal(v),
        }
    }

    pub fn check(&self, space: &Space) -> Result<()> {
        let ok = match (space, self) {
            (Space::Euclidean { .. }, SpectralParameter::Euclidean(z)) => *z >= 0.0 && z.is_finite(),
            (Space::HyperbolicDisk, SpectralParameter::Principal(l)) => *l >= 0.0 && l.is_finite(),
            (Space::HyperbolicDisk, SpectralParameter::Complementary(s)) => *s > 0.0 && *s <= 0.5,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("parameter {self:?} is not in the dual of {space:?}")))
        }
    }
}

/// Heat time τ > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct HeatTime(f64);

impl HeatTime {
    pub fn new(tau: f64) -> Result<HeatTime> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::validation(format!("heat time must be positive and finite, got {tau}")));
        }
        Ok(HeatTime(tau))
    }

    pub fn tau(&self) -> f64 {
        self.0
    }
}

/// Where a radial profile lives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "radius", rename_all = "snake_case")]
pub enum Support {
    /// Vanishes beyond the radius; may jump there.
    Compact(f64),
    /// Smooth and negligible (including volume growth) beyond the radius.
    RapidDecay(f64),
}

impl Support {
    pub fn extent(&self) -> f64 {
        match *self {
            Support::Compact(r) | Support::RapidDecay(r) => r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileKind {
    Indicator { radius: f64 },
    Gaussian { a: f64 },
    Heat { space: Space, tau: f64 },
    Zero,
    Custom,
}

/// A K-invariant function given by its radial profile s ↦ f(s).
///
/// Profiles must be smooth on the interior of their support.
#[derive(Clone)]
pub struct RadialFunction {
    profile: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Support,
    description: String,
    kind: ProfileKind,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("description", &self.description)
            .field("support", &self.support)
            .finish()
    }
}

impl RadialFunction {
    pub fn custom(
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        support: Support,
        description: impl Into<String>,
    ) -> Result<RadialFunction> {
        let r = support.extent();
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::validation("support radius must be positive and finite"));
        }
        Ok(RadialFunction {
            profile: Arc::new(profile),
            support,
            description: description.into(),
            kind: ProfileKind::Custom,
        })
    }

    /// Indicator of the closed ball of radius r.
    pub fn ball(r: f64) -> Result<RadialFunction> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::validation(format!("ball radius must be positive, got {r}")));
        }
        Ok(RadialFunction {
            profile: Arc::new(move |s| if s <= r { 1.0 } else { 0.0 }),
            support: Support::Compact(r),
            description: format!("indicator of B_{r}"),
            kind: ProfileKind::Indicator { radius: r },
        })
    }

    /// e^{-a s²}.
    pub fn gaussian(a: f64) -> Result<RadialFunction> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::validation(format!("Gaussian rate must be positive, got {a}")));
        }
        // Beyond this radius a s² − s > 40, which also covers exponential volume growth.
        let extent = (1.0 + (1.0 + 160.0 * a).sqrt()) / (2.0 * a);
        Ok(RadialFunction {
            profile: Arc::new(move |s| (-a * s * s).exp()),
            support: Support::RapidDecay(extent),
            description: format!("exp(-{a} s^2)"),
            kind: ProfileKind::Gaussian { a },
        })
    }

    /// Heat kernel profile s ↦ h_τ(s) on the space.
    pub fn heat(space: Space, tau: HeatTime) -> Result<RadialFunction> {
        space.validate()?;
        let t = tau.tau();
        let extent = match space {
            Space::Euclidean { .. } => (200.0 * t).sqrt(),
            Space::HyperbolicDisk => t + (t * t + 200.0 * t).sqrt(),
        };
        Ok(RadialFunction {
            profile: Arc::new(move |s| heat_kernel_spatial(&space, tau, s).unwrap_or(f64::NAN)),
            support: Support::RapidDecay(extent),
            description: format!("heat kernel tau={t}"),
            kind: ProfileKind::Heat { space, tau: t },
        })
    }

    pub fn zero() -> RadialFunction {
        RadialFunction {
            profile: Arc::new(|_| 0.0),
            support: Support::Compact(1.0),
            description: "zero".to_string(),
            kind: ProfileKind::Zero,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        if matches!(self.support, Support::Compact(r) if s > r) {
            return 0.0;
        }
        (self.profile)(s)
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.kind == ProfileKind::Zero
    }
}

fn tight() -> Tolerance {
    Tolerance::new(1e-14, 1e-12).with_segments(20_000)
}

/// Spherical function ω_p(s).
pub fn spherical_function(space: &Space, p: SpectralParameter, s: f64) -> Result<f64> {
    p.check(space)?;
    if !(s >= 0.0) {
        return Err(Error::domain(format!("radius must be nonnegative, got {s}")));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    match *space {
        Space::Euclidean { d } => Ok(euclidean_spherical(d, p.value(), s)),
        Space::HyperbolicDisk => hyperbolic_spherical(p, s),
    }
}

fn euclidean_spherical(d: u32, zeta: f64, s: f64) -> f64 {
    let x = 2.0 * PI * zeta * s;
    if x == 0.0 {
        return 1.0;
    }
    match d {
        1 => x.cos(),
        2 => bessel_j(0, x),
        3 => {
            if x < 1e-4 {
                1.0 - x * x / 6.0
            } else {
                x.sin() / x
            }
        }
        _ => 2.0 * bessel_j(1, x) / x,
    }
}

/// Mehler integrand after u = s − v², smooth on [0, √s].
fn mehler(p: SpectralParameter, s: f64, v: f64) -> f64 {
    let v2 = v * v;
    let u = s - v2;
    let den = (2.0 * (s - 0.5 * v2).sinh() * (0.5 * v2).sinh()).sqrt();
    let jac = if den > 0.0 { 2.0 * v / den } else { 2.0 / s.sinh().sqrt() };
    let osc = match p {
        SpectralParameter::Complementary(s0) => (s0 * u).cosh(),
        other => (other.value() * u).cos(),
    };
    osc * jac
}

fn hyperbolic_spherical(p: SpectralParameter, s: f64) -> Result<f64> {
    let top = s.sqrt();
    let lam = match p {
        SpectralParameter::Complementary(_) => 0.0,
        other => other.value(),
    };
    let breaks = oscillation_breaks(0.0, top, 2.0 * lam * top);
    let v = quad::integrate_with_breaks(|v| mehler(p, s, v), 0.0, top, &breaks, tight())?;
    Ok(SQRT_2 / PI * v)
}

/// Breakpoints spaced a quarter period of the given angular frequency.
fn oscillation_breaks(a: f64, b: f64, freq: f64) -> Vec<f64> {
    if freq <= 0.0 {
        return Vec::new();
    }
    let w = (0.5 * PI / freq).min(b - a);
    let n = ((b - a) / w).ceil() as usize;
    (1..n).map(|k| a + k as f64 * w).collect()
}

/// Density of σ_P in the radial spectral coordinate.
pub fn plancherel_density(space: &Space, p: SpectralParameter) -> f64 {
    match (space, p) {
        (_, SpectralParameter::Complementary(_)) => 0.0,
        (Space::Euclidean { d }, p) => sphere_area(*d) * p.value().powi(*d as i32 - 1),
        (Space::HyperbolicDisk, p) => {
            let l = p.value();
            2.0 * l * (PI * l).tanh()
        }
    }
}

/// σ_P((0, ε]).
pub fn plancherel_mass(space: &Space, eps: f64) -> Result<f64> {
    match space {
        Space::Euclidean { d } => Ok(sphere_area(*d) * eps.powi(*d as i32) / *d as f64),
        Space::HyperbolicDisk => quad::integrate(
            |l| 2.0 * l * (PI * l).tanh(),
            0.0,
            eps,
            Tolerance::new(1e-300, 1e-13),
        ),
    }
}

/// Generic spherical transform f̂(p) = ∫ f(s) ω_p(s) vol'(s) ds by nested quadrature.
pub fn spherical_transform(space: &Space, f: &RadialFunction, p: SpectralParameter) -> Result<f64> {
    p.check(space)?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let top = f.support().extent();
    let freq = match (space, p) {
        (Space::Euclidean { .. }, p) => 2.0 * PI * p.value(),
        (_, SpectralParameter::Principal(l)) => l,
        _ => 0.0,
    };
    let mut breaks = oscillation_breaks(0.0, top, 0.5 * freq);
    if breaks.is_empty() {
        breaks = (1..8).map(|k| top * k as f64 / 8.0).collect();
    }
    let failure = std::cell::Cell::new(None);
    let integrand = |s: f64| match spherical_function(space, p, s) {
        Ok(w) => f.eval(s) * w * space.radial_volume_element(s),
        Err(e) => {
            failure.set(Some(e.to_string()));
            f64::NAN
        }
    };
    let v = quad::integrate_with_breaks(integrand, 0.0, top, &breaks, Tolerance::new(1e-13, 1e-11).with_segments(20_000));
    if let Some(msg) = failure.take() {
        return Err(Error::numeric(format!("spherical function failed inside transform: {msg}"), f64::NAN));
    }
    v
}

/// Transform of the indicator of B_r: closed Hankel pairs on R^d, the Abel
/// form (√2/π) ∫₀^r cos(λu) √(cosh r − cosh u) du on the disk.
pub fn ball_indicator_transform(space: &Space, r: f64, p: SpectralParameter) -> Result<f64> {
    p.check(space)?;
    if !(r > 0.0) {
        return Err(Error::domain(format!("ball radius must be positive, got {r}")));
    }
    match *space {
        Space::Euclidean { d } => Ok(euclidean_ball_transform(d, r, p.value())),
        Space::HyperbolicDisk => {
            let plan = TransformPlan::new(space, &RadialFunction::ball(r)?, p.value().max(1.0))?;
            plan.eval(p)
        }
    }
}

fn euclidean_ball_transform(d: u32, r: f64, zeta: f64) -> f64 {
    let vol = crate::geometry::ball_volume(&Space::Euclidean { d }, r);
    let x = 2.0 * PI * r * zeta;
    if x < 1e-8 {
        return vol;
    }
    match d {
        1 => 2.0 * r * x.sin() / x,
        // r J1(2πrζ)/ζ = 2πr² J1(x)/x
        2 => 2.0 * PI * r * r * bessel_j(1, x) / x,
        // 4π (sin x − x cos x)/k³ with k = 2πζ
        3 => {
            let k = 2.0 * PI * zeta;
            let num = if x < 1e-2 {
                let x2 = x * x;
                x * x2 * (1.0 / 3.0 - x2 / 30.0 + x2 * x2 / 840.0 - x2 * x2 * x2 / 45360.0)
            } else {
                x.sin() - x * x.cos()
            };
            4.0 * PI * num / (k * k * k)
        }
        // 4π² r² J2(x)/k² = 4π² r⁴ J2(x)/x²
        _ => 4.0 * PI * PI * r.powi(4) * bessel_j(2, x) / (x * x),
    }
}

/// Heat kernel h_τ(s) with respect to the invariant measure of the space.
///
/// On the disk this is McKean's closed integral
/// h_τ(s) = e^{-τ/4} / (√(2π) τ^{3/2}) ∫_s^∞ u e^{-u²/4τ} / √(cosh u − cosh s) du.
pub fn heat_kernel_spatial(space: &Space, tau: HeatTime, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("radius must be nonnegative, got {s}")));
    }
    let t = tau.tau();
    match *space {
        Space::Euclidean { d } => Ok((4.0 * PI * t).powf(-(d as f64) / 2.0) * (-s * s / (4.0 * t)).exp()),
        Space::HyperbolicDisk => {
            let b = s / (2.0 * t) + 0.5;
            let ymax = 2.0 * t * (-b + (b * b + 45.0 / t).sqrt());
            let vmax = ymax.sqrt();
            let integrand = |v: f64| {
                let v2 = v * v;
                let u = s + v2;
                let damp = (-(2.0 * s * v2 + v2 * v2) / (4.0 * t)).exp();
                let den = (2.0 * (s + 0.5 * v2).sinh() * (0.5 * v2).sinh()).sqrt();
                if den > 0.0 {
                    u * damp * 2.0 * v / den
                } else {
                    0.0
                }
            };
            let v = quad::integrate(integrand, 0.0, vmax, tight())?;
            let pre = (-t / 4.0 - s * s / (4.0 * t)).exp() / ((2.0 * PI).sqrt() * t.powf(1.5));
            Ok(pre * v)
        }
    }
}

/// Disk heat kernel by the inverse spherical transform
/// ∫₀^∞ e^{-τ(1/4+λ²)} ω_λ(s) dσ_P(λ); a cross-check for moderate s.
pub fn heat_kernel_inverse_spectral(tau: HeatTime, s: f64) -> Result<f64> {
    let t = tau.tau();
    let top = (40.0 / t).sqrt() + 1.0;
    let space = Space::HyperbolicDisk;
    let failure = std::cell::Cell::new(false);
    let integrand = |l: f64| {
        let p = SpectralParameter::Principal(l);
        match spherical_function(&space, p, s) {
            Ok(w) => (-t * (0.25 + l * l)).exp() * w * plancherel_density(&space, p),
            Err(_) => {
                failure.set(true);
                f64::NAN
            }
        }
    };
    let breaks = oscillation_breaks(0.0, top, s);
    let v = quad::integrate_with_breaks(integrand, 0.0, top, &breaks, Tolerance::new(1e-15, 1e-11).with_segments(20_000))?;
    if failure.get() {
        return Err(Error::numeric("spherical function failed", f64::NAN));
    }
    Ok(v)
}

/// Spherical transform of the heat kernel, in closed form.
pub fn heat_kernel_transform(space: &Space, tau: HeatTime, p: SpectralParameter) -> f64 {
    let t = tau.tau();
    match (space, p) {
        (Space::Euclidean { .. }, p) => (-4.0 * PI * PI * t * p.value() * p.value()).exp(),
        (Space::HyperbolicDisk, SpectralParameter::Complementary(s0)) => (-t * (0.25 - s0 * s0)).exp(),
        (Space::HyperbolicDisk, p) => (-t * (0.25 + p.value() * p.value())).exp(),
    }
}

/// ‖f‖² in L²(m).
pub fn l2_norm_sq(space: &Space, f: &RadialFunction) -> Result<f64> {
    l2_inner(space, f, f)
}

/// ⟨f, g⟩ in L²(m) for radial f, g.
pub fn l2_inner(space: &Space, f: &RadialFunction, g: &RadialFunction) -> Result<f64> {
    if f.is_zero() || g.is_zero() {
        return Ok(0.0);
    }
    let top = f.support().extent().min(g.support().extent());
    quad::integrate(
        |s| f.eval(s) * g.eval(s) * space.radial_volume_element(s),
        0.0,
        top,
        Tolerance::new(1e-300, 1e-13).with_segments(20_000),
    )
}

/// Precomputed quadrature representation of a spherical transform, valid for
/// principal parameters up to `max_param` (and all complementary ones).
///
/// On the disk the transform is written as a cosine transform of the Abel
/// transform A_f(u) = ∫_u^∞ f(s) sinh s / √(cosh s − cosh u) ds:
/// f̂(λ) = (√2/2π) ∫₀^∞ cos(λu) A_f(u) du, stored as Σ W_j cos(λ u_j).
/// On R^d it is Σ W_j ω_ζ(s_j) with W_j = w_j f(s_j) vol'(s_j).
#[derive(Debug, Clone)]
pub struct TransformPlan {
    space: Space,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    max_param: f64,
}

impl TransformPlan {
    pub fn new(space: &Space, f: &RadialFunction, max_param: f64) -> Result<TransformPlan> {
        space.validate()?;
        if !(max_param >= 0.0) || !max_param.is_finite() {
            return Err(Error::validation("plan parameter bound must be finite"));
        }
        if f.is_zero() {
            return Ok(TransformPlan { space: *space, nodes: vec![], weights: vec![], max_param });
        }
        let top = f.support().extent();
        let (nodes, weights) = match *space {
            Space::Euclidean { .. } => {
                let panels = (max_param * top).ceil() as usize + 4;
                let (xs, ws) = quad::composite_nodes(0.0, top, panels);
                let weights = xs
                    .iter()
                    .zip(&ws)
                    .map(|(s, w)| w * f.eval(*s) * space.radial_volume_element(*s))
                    .collect();
                (xs, weights)
            }
            Space::HyperbolicDisk => abel_nodes(f, top, max_param)?,
        };
        if weights.iter().any(|w: &f64| !w.is_finite()) {
            return Err(Error::numeric("profile produced non-finite values while building a transform plan", f64::NAN));
        }
        Ok(TransformPlan { space: *space, nodes, weights, max_param })
    }

    pub fn max_param(&self) -> f64 {
        self.max_param
    }

    pub fn eval(&self, p: SpectralParameter) -> Result<f64> {
        p.check(&self.space)?;
        if !matches!(p, SpectralParameter::Complementary(_)) && p.value() > self.max_param * (1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "parameter {} beyond plan bound {}",
                p.value(),
                self.max_param
            )));
        }
        Ok(self.eval_unchecked(p))
    }

    pub(crate) fn eval_unchecked(&self, p: SpectralParameter) -> f64 {
        let mut acc = 0.0;
        match (self.space, p) {
            (Space::Euclidean { d }, p) => {
                for (s, w) in self.nodes.iter().zip(&self.weights) {
                    acc += w * euclidean_spherical(d, p.value(), *s);
                }
            }
            (Space::HyperbolicDisk, SpectralParameter::Complementary(s0)) => {
                for (u, w) in self.nodes.iter().zip(&self.weights) {
                    acc += w * (s0 * u).cosh();
                }
            }
            (Space::HyperbolicDisk, p) => {
                let l = p.value();
                for (u, w) in self.nodes.iter().zip(&self.weights) {
                    acc += w * (l * u).cos();
                }
            }
        }
        acc
    }
}

fn abel_nodes(f: &RadialFunction, top: f64, max_param: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let c = SQRT_2 / (2.0 * PI);
    let panels = (max_param * top / PI).ceil() as usize + 6;
    match (f.kind(), f.support()) {
        (ProfileKind::Indicator { radius }, _) => {
            // A(u) = 2√(cosh r − cosh u); u = r − v² removes the square-root edge.
            let (vs, ws) = quad::composite_nodes(0.0, radius.sqrt(), panels);
            let mut nodes = Vec::with_capacity(vs.len());
            let mut weights = Vec::with_capacity(vs.len());
            for (v, w) in vs.iter().zip(&ws) {
                let v2 = v * v;
                let gap = 2.0 * (radius - 0.5 * v2).sinh() * (0.5 * v2).sinh();
                nodes.push(radius - v2);
                weights.push(c * 2.0 * gap.sqrt() * 2.0 * v * w);
            }
            Ok((nodes, weights))
        }
        (_, Support::Compact(r)) => {
            let (vs, ws) = quad::composite_nodes(0.0, r.sqrt(), panels);
            let mut nodes = Vec::with_capacity(vs.len());
            let mut weights = Vec::with_capacity(vs.len());
            for (v, w) in vs.iter().zip(&ws) {
                let u = r - v * v;
                nodes.push(u);
                weights.push(c * abel_transform(f, u, r)? * 2.0 * v * w);
            }
            Ok((nodes, weights))
        }
        (_, Support::RapidDecay(s)) => {
            let (us, ws) = quad::composite_nodes(0.0, s, panels);
            let mut weights = Vec::with_capacity(us.len());
            for (u, w) in us.iter().zip(&ws) {
                weights.push(c * abel_transform(f, *u, s)? * w);
            }
            Ok((us, weights))
        }
    }
}

/// A_f(u) = ∫_u^top f(s) sinh s / √(cosh s − cosh u) ds with s = u + w².
fn abel_transform(f: &RadialFunction, u: f64, top: f64) -> Result<f64> {
    if u >= top {
        return Ok(0.0);
    }
    let wmax = (top - u).sqrt();
    let integrand = |w: f64| {
        let w2 = w * w;
        let s = u + w2;
        let den = (2.0 * (u + 0.5 * w2).sinh() * (0.5 * w2).sinh()).sqrt();
        if den > 0.0 {
            f.eval(s) * s.sinh() * 2.0 * w / den
        } else if u > 0.0 {
            f.eval(u) * 2.0 * u.sinh().sqrt()
        } else {
            0.0
        }
    };
    quad::integrate(integrand, 0.0, wmax, tight())
}

/// Relative mismatch |‖f‖² − ∫|f̂|² dσ_P| / ‖f‖² of the Plancherel identity.
pub fn plancherel_identity_residual(space: &Space, f: &RadialFunction) -> Result<f64> {
    space.validate()?;
    if f.is_zero() {
        return Ok(0.0);
    }
    let lhs = l2_norm_sq(space, f)?;
    let rhs = plancherel_side(space, f)?;
    Ok((lhs - rhs).abs() / lhs.max(1e-300))
}

/// ∫ |f̂|² dσ_P evaluated directly in the spectral variable.
pub fn plancherel_side(space: &Space, f: &RadialFunction) -> Result<f64> {
    if f.is_zero() {
        return Ok(0.0);
    }
    match f.support() {
        Support::Compact(r) => compact_plancherel_side(space, f, r),
        Support::RapidDecay(s) => rapid_plancherel_side(space, f, s),
    }
}

fn transform_eval<'a>(space: &'a Space, f: &'a RadialFunction, bound: f64) -> Result<Box<dyn Fn(f64) -> f64 + 'a>> {
    if let (ProfileKind::Indicator { radius }, Space::Euclidean { d }) = (f.kind(), space) {
        let (d, r) = (*d, radius);
        return Ok(Box::new(move |z| euclidean_ball_transform(d, r, z)));
    }
    let plan = TransformPlan::new(space, f, bound)?;
    let space = *space;
    Ok(Box::new(move |x| plan.eval_unchecked(SpectralParameter::principal(&space, x))))
}

// A jump at the support edge r makes |f̂|² dσ_P decay like a/λ² with a
// superposed oscillation of period P (π/r on the disk, 1/(2r) on R^d). The
// integral is taken to an integer number of periods; the tail a/Λ uses the
// mean of λ²|f̂|²ρ over the second half, and averaging the partial sums over
// the last period cancels the leading oscillatory remainder.
fn compact_plancherel_side(space: &Space, f: &RadialFunction, r: f64) -> Result<f64> {
    let period = match space {
        Space::Euclidean { .. } => 0.5 / r,
        Space::HyperbolicDisk => PI / r,
    };
    let periods = ((400.0 / r) / period).ceil().max(16.0) as usize;
    let top = periods as f64 * period;
    let fhat = transform_eval(space, f, top)?;
    let sub = 8usize;
    let h = period / sub as f64;
    let (gx, gw) = quad::gl16();
    let mut cumulative = Vec::with_capacity(periods * sub + 1);
    let mut total = 0.0;
    let mut tail_moment = 0.0;
    cumulative.push(0.0);
    let half = periods / 2;
    for k in 0..periods * sub {
        let lo = k as f64 * h;
        let mut acc = 0.0;
        let mut mom = 0.0;
        for (x, w) in gx.iter().zip(gw) {
            let l = lo + 0.5 * h * (x + 1.0);
            let v = fhat(l);
            let g = v * v * plancherel_density(space, SpectralParameter::principal(space, l));
            acc += w * g;
            mom += w * g * l * l;
        }
        total += 0.5 * h * acc;
        if k >= (periods - half) * sub {
            tail_moment += 0.5 * h * mom;
        }
        cumulative.push(total);
    }
    if !total.is_finite() {
        return Err(Error::numeric("non-finite spectral integrand", f64::NAN));
    }
    let a = tail_moment / (half as f64 * period);
    let n = cumulative.len();
    let mut est = 0.0;
    for j in 0..sub {
        let idx = n - 1 - j;
        let lam = idx as f64 * h;
        est += cumulative[idx] + a / lam;
    }
    Ok(est / sub as f64)
}

fn rapid_plancherel_side(space: &Space, f: &RadialFunction, extent: f64) -> Result<f64> {
    let mut bound = match space {
        Space::Euclidean { .. } => 8.0,
        Space::HyperbolicDisk => 16.0,
    };
    for _ in 0..6 {
        let fhat = transform_eval(space, f, bound)?;
        let width = match space {
            Space::Euclidean { .. } => 0.25 / extent,
            Space::HyperbolicDisk => 0.5 * PI / extent,
        };
        let panels = (bound / width).ceil() as usize;
        let h = bound / panels as f64;
        let (gx, gw) = quad::gl16();
        let mut total = 0.0;
        let mut last_max: f64 = 0.0;
        let mut negligible_at = None;
        for k in 0..panels {
            let lo = k as f64 * h;
            let mut acc = 0.0;
            let mut peak: f64 = 0.0;
            for (x, w) in gx.iter().zip(gw) {
                let l = lo + 0.5 * h * (x + 1.0);
                let v = fhat(l);
                let g = v * v * plancherel_density(space, SpectralParameter::principal(space, l));
                acc += w * g;
                peak = peak.max(g.abs());
            }
            total += 0.5 * h * acc;
            last_max = peak;
            if lo > 1.0 && peak * bound < 1e-17 * total.abs() {
                negligible_at = Some(lo);
                break;
            }
        }
        if !total.is_finite() {
            return Err(Error::numeric("non-finite spectral integrand", f64::NAN));
        }
        if negligible_at.is_some() || last_max * bound < 1e-15 * total.abs() {
            return Ok(total);
        }
        bound *= 2.0;
    }
    Err(Error::numeric("spectral integrand did not decay for a rapidly decaying profile", f64::NAN))
}

/// |(1/2π)∫ ω_λ(d(g_s, k_θ h_t)) dθ − ω_λ(s) ω_λ(t)| on the disk.
pub fn functional_equation_residual(lambda: f64, s: f64, t: f64) -> Result<f64> {
    if !(s >= 0.0 && t >= 0.0 && lambda >= 0.0) {
        return Err(Error::domain("λ, s, t must be nonnegative"));
    }
    let space = Space::HyperbolicDisk;
    let p = SpectralParameter::Principal(lambda);
    let ws = spherical_function(&space, p, s)?;
    let wt = spherical_function(&space, p, t)?;
    let a = (0.5 * (s - t)).sinh().powi(2);
    let b = s.sinh() * t.sinh();
    let failure = std::cell::Cell::new(false);
    let integrand = |theta: f64| {
        // cosh c − 1 = 2 sinh²((s−t)/2) + 2 sinh s sinh t sin²(θ/2)
        let c = 2.0 * (a + b * (0.5 * theta).sin().powi(2)).sqrt().asinh();
        spherical_function(&space, p, c).unwrap_or_else(|_| {
            failure.set(true);
            f64::NAN
        })
    };
    let avg = quad::integrate(integrand, 0.0, PI, Tolerance::new(1e-13, 1e-11).with_segments(5000))? / PI;
    if failure.get() {
        return Err(Error::numeric("spherical function failed", f64::NAN));
    }
    Ok((avg - ws * wt).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: Space = Space::HyperbolicDisk;
    const E2: Space = Space::Euclidean { d: 2 };

    fn trapezoid_legendre(l: f64, s: f64) -> f64 {
        // (1/π)∫₀^π Re (cosh s − sinh s cos t)^{-1/2-iλ} dt, periodic trapezoid
        let n = 200_000;
        let h = PI / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let t = k as f64 * h;
            let a = s.cosh() - s.sinh() * t.cos();
            let v = a.powf(-0.5) * (l * a.ln()).cos();
            acc += if k == 0 || k == n { 0.5 * v } else { v };
        }
        acc * h / PI
    }

    #[test]
    fn spherical_function_at_origin_is_one() {
        for p in [SpectralParameter::Principal(3.0), SpectralParameter::Complementary(0.3)] {
            assert_eq!(spherical_function(&H, p, 0.0).unwrap(), 1.0);
        }
        assert_eq!(spherical_function(&E2, SpectralParameter::Euclidean(2.0), 0.0).unwrap(), 1.0);
    }

    #[test]
    fn mehler_form_matches_cosine_power_integral() {
        for &(l, s) in &[(0.0, 1.0), (1.0, 1.0), (2.5, 0.4), (0.7, 3.0)] {
            let w = spherical_function(&H, SpectralParameter::Principal(l), s).unwrap();
            let oracle = trapezoid_legendre(l, s);
            assert!((w - oracle).abs() < 1e-9, "λ={l} s={s}: {w} vs {oracle}");
        }
    }

    #[test]
    fn complementary_matches_cosine_power_integral() {
        let s0: f64 = 0.3;
        let s: f64 = 1.5;
        let n = 100_000;
        let h = PI / n as f64;
        let mut acc = 0.0;
        for k in 0..=n {
            let t = k as f64 * h;
            let a = s.cosh() - s.sinh() * t.cos();
            let v = a.powf(-0.5 + s0);
            acc += if k == 0 || k == n { 0.5 * v } else { v };
        }
        let oracle = acc * h / PI;
        let w = spherical_function(&H, SpectralParameter::Complementary(s0), s).unwrap();
        assert!((w - oracle).abs() < 1e-9);
    }

    #[test]
    fn euclidean_spherical_examples() {
        let w = spherical_function(&E2, SpectralParameter::Euclidean(1.0), 1.0).unwrap();
        let oracle = quad::composite(|t| (2.0 * PI * t.sin()).cos(), 0.0, PI, 16) / PI;
        assert!((w - oracle).abs() < 1e-12);
        let e3 = Space::Euclidean { d: 3 };
        let w = spherical_function(&e3, SpectralParameter::Euclidean(0.5), 1.0).unwrap();
        assert!(w.abs() < 1e-15);
    }

    #[test]
    fn rejects_mismatched_parameters() {
        assert!(spherical_function(&E2, SpectralParameter::Principal(1.0), 1.0).is_err());
        assert!(spherical_function(&H, SpectralParameter::Complementary(0.7), 1.0).is_err());
        assert!(spherical_function(&H, SpectralParameter::Principal(1.0), -1.0).is_err());
    }

    #[test]
    fn plancherel_density_values() {
        assert_eq!(plancherel_density(&H, SpectralParameter::Principal(0.0)), 0.0);
        assert!((plancherel_density(&H, SpectralParameter::Principal(1.0)) - 2.0 * PI.tanh()).abs() < 1e-15);
        assert!((plancherel_density(&E2, SpectralParameter::Euclidean(2.0)) - 4.0 * PI).abs() < 1e-15);
        assert_eq!(plancherel_density(&H, SpectralParameter::Complementary(0.2)), 0.0);
    }

    #[test]
    fn euclidean_ball_transform_examples() {
        let e1 = Space::Euclidean { d: 1 };
        assert!((ball_indicator_transform(&E2, 1.0, SpectralParameter::Euclidean(0.0)).unwrap() - PI).abs() < 1e-14);
        assert!(ball_indicator_transform(&e1, 1.0, SpectralParameter::Euclidean(0.5)).unwrap().abs() < 1e-15);
        let v = ball_indicator_transform(&E2, 1.0, SpectralParameter::Euclidean(1.0)).unwrap();
        assert!((v - bessel_j(1, 2.0 * PI)).abs() < 1e-14);
        // generic quadrature agrees with every closed form
        for d in 1..=4 {
            let sp = Space::Euclidean { d };
            for &z in &[0.0, 0.3, 1.7] {
                let p = SpectralParameter::Euclidean(z);
                let a = ball_indicator_transform(&sp, 1.3, p).unwrap();
                let b = spherical_transform(&sp, &RadialFunction::ball(1.3).unwrap(), p).unwrap();
                assert!((a - b).abs() < 1e-10, "d={d} ζ={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hyperbolic_ball_transform_matches_generic() {
        let f = RadialFunction::ball(2.0).unwrap();
        for p in [SpectralParameter::Principal(1.0), SpectralParameter::Principal(0.0), SpectralParameter::Complementary(0.4)] {
            let a = ball_indicator_transform(&H, 2.0, p).unwrap();
            let b = spherical_transform(&H, &f, p).unwrap();
            assert!((a - b).abs() < 1e-8, "{p:?}: {a} vs {b}");
        }
        // complementary endpoint recovers the volume
        let a = ball_indicator_transform(&H, 2.0, SpectralParameter::Complementary(0.5)).unwrap();
        assert!((a - 1f64.sinh().powi(2)).abs() < 1e-10);
    }

    #[test]
    fn heat_kernel_closed_forms() {
        let t = HeatTime::new(1.0).unwrap();
        assert!((heat_kernel_spatial(&E2, t, 0.0).unwrap() - 1.0 / (4.0 * PI)).abs() < 1e-16);
        for d in 1..=4 {
            let sp = Space::Euclidean { d };
            let mass = quad::integrate(
                |s| heat_kernel_spatial(&sp, t, s).unwrap() * sp.radial_volume_element(s),
                0.0,
                30.0,
                Tolerance::new(1e-14, 1e-12),
            )
            .unwrap();
            assert!((mass - 1.0).abs() < 1e-8);
        }
        assert!((heat_kernel_transform(&H, t, SpectralParameter::Principal(0.0)) - (-0.25f64).exp()).abs() < 1e-16);
        assert_eq!(heat_kernel_transform(&E2, t, SpectralParameter::Euclidean(0.0)), 1.0);
        let t2 = HeatTime::new(2.0).unwrap();
        assert!((heat_kernel_transform(&H, t2, SpectralParameter::Principal(1.0)) - (-2.5f64).exp()).abs() < 1e-16);
        assert!(HeatTime::new(0.0).is_err());
    }

    #[test]
    fn hyperbolic_heat_kernel_has_unit_mass() {
        for tau in [0.3, 1.0, 4.0] {
            let t = HeatTime::new(tau).unwrap();
            let mass = quad::integrate(
                |s| heat_kernel_spatial(&H, t, s).unwrap() * H.radial_volume_element(s),
                0.0,
                tau + (tau * tau + 200.0 * tau).sqrt(),
                Tolerance::new(1e-14, 1e-12),
            )
            .unwrap();
            assert!((mass - 1.0).abs() < 1e-9, "τ={tau}: {mass}");
        }
    }

    #[test]
    fn mckean_form_matches_inverse_spectral() {
        for &(tau, s) in &[(1.0, 0.0), (1.0, 2.0), (0.5, 1.0), (2.0, 3.0)] {
            let t = HeatTime::new(tau).unwrap();
            let a = heat_kernel_spatial(&H, t, s).unwrap();
            let b = heat_kernel_inverse_spectral(t, s).unwrap();
            assert!((a - b).abs() < 1e-9 * a.max(1e-3), "τ={tau} s={s}: {a} vs {b}");
        }
    }

    #[test]
    fn heat_semigroup_in_spectral_form() {
        let a = HeatTime::new(0.7).unwrap();
        let b = HeatTime::new(1.9).unwrap();
        let ab = HeatTime::new(2.6).unwrap();
        for l in [0.0, 0.5, 3.0] {
            let p = SpectralParameter::Principal(l);
            let lhs = heat_kernel_transform(&H, a, p) * heat_kernel_transform(&H, b, p);
            assert!((lhs - heat_kernel_transform(&H, ab, p)).abs() < 1e-15);
        }
    }

    #[test]
    fn functional_equation_examples() {
        assert!(functional_equation_residual(1.0, 0.0, 2.0).unwrap() < 1e-9);
        assert!(functional_equation_residual(0.0, 1.0, 1.0).unwrap() < 1e-6);
        assert!(functional_equation_residual(2.0, 1.0, 2.0).unwrap() < 1e-6);
    }

    #[test]
    fn plancherel_examples() {
        let g = RadialFunction::gaussian(PI).unwrap();
        assert!(plancherel_identity_residual(&E2, &g).unwrap() < 1e-8);
        assert_eq!(plancherel_identity_residual(&H, &RadialFunction::zero()).unwrap(), 0.0);
    }

    #[test]
    fn plan_matches_generic_transform() {
        let f = RadialFunction::gaussian(1.0).unwrap();
        let plan = TransformPlan::new(&H, &f, 6.0).unwrap();
        for p in [SpectralParameter::Principal(0.0), SpectralParameter::Principal(2.5), SpectralParameter::Complementary(0.4)] {
            let a = plan.eval(p).unwrap();
            let b = spherical_transform(&H, &f, p).unwrap();
            assert!((a - b).abs() < 1e-10, "{p:?}: {a} vs {b}");
        }
        assert!(plan.eval(SpectralParameter::Principal(7.0)).is_err());
    }
}
