//! Seeded samplers for the processes with known spectra: Poisson, Ginibre,
//! hyperbolic GAF zeros and the Bergman DPP.
//!
//! Randomness comes from ChaCha20 keyed by the 64-bit seed (little-endian in
//! the first eight key bytes, remaining key bytes zero) with the ChaCha stream
//! selector set to `stream_id`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::geometry::{ball_volume, Point, Space, Window};
use crate::io::fmt_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> RngStream {
        RngStream { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha20Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        let mut rng = ChaCha20Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        rng
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub sampler: String,
    pub seed: u64,
    pub stream_id: u64,
    pub parameters: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfiguration {
    pub space: Space,
    pub points: Vec<Point>,
    pub window: Window,
    pub provenance: Provenance,
}

impl PointConfiguration {
    fn new(window: Window, points: Vec<Point>, sampler: &str, rng: RngStream, parameters: serde_json::Value) -> Self {
        PointConfiguration {
            space: window.space,
            points,
            window,
            provenance: Provenance { sampler: sampler.to_string(), seed: rng.seed, stream_id: rng.stream_id, parameters },
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distances of the points from the origin.
    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(crate::geometry::distance_from_origin).collect()
    }

    /// One point per row; columns x0..x{d-1} on R^d, re,im on the disk.
    pub fn to_csv(&self) -> String {
        let header = match self.space {
            Space::Euclidean { d } => (0..d).map(|i| format!("x{i}")).collect::<Vec<_>>().join(","),
            Space::HyperbolicDisk => "re,im".to_string(),
        };
        let mut out = header + "\n";
        for p in &self.points {
            let row: Vec<String> = p.coords().iter().map(|c| fmt_f64(*c)).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn provenance_json(&self) -> serde_json::Value {
        serde_json::json!({
            "space": self.space,
            "window_radius": self.window.radius,
            "count": self.points.len(),
            "provenance": self.provenance,
        })
    }
}

fn check_window(window: &Window) -> Result<()> {
    window.space.validate()?;
    if !(window.radius > 0.0) || !window.radius.is_finite() {
        return Err(Error::validation("window radius must be positive and finite"));
    }
    Ok(())
}

fn uniform_angle<R: Rng>(rng: &mut R) -> f64 {
    2.0 * PI * rng.random::<f64>()
}

fn std_complex<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Homogeneous Poisson process restricted to the window.
pub fn sample_poisson(space: Space, intensity: f64, window: &Window, rng: RngStream) -> Result<PointConfiguration> {
    check_window(window)?;
    if window.space != space {
        return Err(Error::validation("window lives on a different space"));
    }
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::validation("intensity must be positive"));
    }
    let mut g = rng.rng();
    let mean = intensity * ball_volume(&space, window.radius);
    let count = Poisson::new(mean).map_err(|e| Error::validation(e.to_string()))?.sample(&mut g) as usize;
    let r = window.radius;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        match space {
            Space::Euclidean { d } => {
                let mut v: Vec<f64> = (0..d).map(|_| g.sample(StandardNormal)).collect();
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                let rad = r * g.random::<f64>().powf(1.0 / d as f64);
                for x in v.iter_mut() {
                    *x *= rad / norm;
                }
                points.push(Point::Euclidean(v));
            }
            Space::HyperbolicDisk => {
                // invert m(B_s) = sinh²(s/2) = u sinh²(R/2)
                let u: f64 = g.random();
                let s = 2.0 * (u.sqrt() * (0.5 * r).sinh()).asinh();
                points.push(Point::Disk(Complex64::from_polar((0.5 * s).tanh(), uniform_angle(&mut g))));
            }
        }
    }
    Ok(PointConfiguration::new(
        *window,
        points,
        "poisson",
        rng,
        serde_json::json!({ "intensity": intensity, "expected_count": mean }),
    ))
}

/// Sequential sampling of a projection DPP whose eigenfunctions are the
/// rotation-covariant functions φ_k(z) = z^k g_k(|z|²), orthonormal on the window.
///
/// `log_density(k, t)` is log |φ_k|² at |z|² = t and `sample_t(k, rng)` draws t
/// from |φ_k|² (as a density in the plane, so t has density ∝ π |φ_k|²).
fn radial_projection_dpp<R: Rng>(
    modes: &[usize],
    log_density: impl Fn(usize, f64) -> f64,
    sample_t: impl Fn(usize, &mut R) -> f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let n = modes.len();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let features = |t: f64, theta: f64| -> Vec<Complex64> {
        modes
            .iter()
            .map(|&k| Complex64::from_polar((0.5 * log_density(k, t)).exp(), k as f64 * theta))
            .collect()
    };
    for _ in 0..n {
        let mut accepted = None;
        for _attempt in 0..1_000_000 {
            let k = modes[rng.random_range(0..n)];
            let t = sample_t(k, rng);
            let theta = uniform_angle(rng);
            let v = features(t, theta);
            let total: f64 = v.iter().map(|c| c.norm_sqr()).sum();
            let mut proj = 0.0;
            for e in &basis {
                let ip: Complex64 = e.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                proj += ip.norm_sqr();
            }
            let ratio = ((total - proj) / total).clamp(0.0, 1.0);
            if rng.random::<f64>() < ratio {
                accepted = Some((t, theta, v));
                break;
            }
        }
        let (t, theta, mut v) = accepted.ok_or_else(|| {
            Error::numeric("projection DPP sampler failed to accept a point", points.len() as f64)
        })?;
        for e in &basis {
            let ip: Complex64 = e.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ei) in v.iter_mut().zip(e) {
                *vi -= ip * ei;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::numeric("Gram-Schmidt breakdown in projection DPP sampler", norm));
        }
        basis.push(v.into_iter().map(|c| c / norm).collect());
        points.push(Complex64::from_polar(t.sqrt(), theta));
    }
    Ok(points)
}

/// Inverse CDF of Gamma(a) truncated to [0, x].
fn truncated_gamma_quantile(a: f64, x: f64, u: f64) -> f64 {
    let target = u * gamma_lr(a, x);
    let lg = ln_gamma(a);
    let (mut lo, mut hi) = (0.0, x);
    let mut t = (a - 1.0).clamp(0.5 * x.min(a), x * 0.999);
    for _ in 0..200 {
        let f = gamma_lr(a, t) - target;
        if f > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dens = ((a - 1.0) * t.ln() - t - lg).exp();
        let mut next = t - f / dens;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-14 * t.max(1e-300) || hi - lo <= 1e-15 * hi {
            return next;
        }
        t = next;
    }
    t
}

/// Ginibre eigenvalues (bulk intensity 1 per unit area) inside a centered
/// window, sampled exactly from the n-point ensemble restricted to the window.
///
/// The restricted kernel is diagonal in the monomials z^k, k < n, with
/// eigenvalues P(k+1, πr²) (regularized lower incomplete gamma); modes with
/// eigenvalue below 1e-16 are dropped.
pub fn sample_ginibre(n_matrix: usize, window: &Window, rng: RngStream) -> Result<PointConfiguration> {
    check_ginibre_window(n_matrix, window)?;
    let mut g = rng.rng();
    let x = PI * window.radius * window.radius;
    let mut modes = Vec::new();
    for k in 0..n_matrix {
        let p = gamma_lr(k as f64 + 1.0, x);
        if p < 1e-16 {
            break;
        }
        if g.random::<f64>() < p {
            modes.push(k);
        }
    }
    let log_norm: Vec<f64> = (0..modes.last().map_or(0, |k| k + 1))
        .map(|k| ln_gamma(k as f64 + 1.0) + gamma_lr(k as f64 + 1.0, x).ln())
        .collect();
    // |φ_k|² = π^k t^k e^{-πt} / γ(k+1, πr²)
    let log_density = |k: usize, t: f64| {
        let kf = k as f64;
        let lt = if t > 0.0 { (PI * t).ln() } else { f64::NEG_INFINITY };
        if k == 0 {
            -PI * t - log_norm[0]
        } else {
            kf * lt - PI * t - log_norm[k]
        }
    };
    let sample_t = |k: usize, r: &mut ChaCha20Rng| truncated_gamma_quantile(k as f64 + 1.0, x, r.random::<f64>()) / PI;
    let zs = radial_projection_dpp(&modes, log_density, sample_t, &mut g)?;
    let points = zs.into_iter().map(|z| Point::Euclidean(vec![z.re, z.im])).collect();
    Ok(PointConfiguration::new(
        *window,
        points,
        "ginibre",
        rng,
        serde_json::json!({ "n_matrix": n_matrix, "modes": modes.len(), "method": "restricted projection DPP" }),
    ))
}

fn check_ginibre_window(n_matrix: usize, window: &Window) -> Result<()> {
    check_window(window)?;
    if window.space != (Space::Euclidean { d: 2 }) {
        return Err(Error::validation("Ginibre windows live on Euclidean(2)"));
    }
    if n_matrix == 0 {
        return Err(Error::validation("matrix size must be positive"));
    }
    let bulk = 0.8 * (n_matrix as f64 / PI).sqrt();
    if window.radius > bulk {
        return Err(Error::validation(format!(
            "window radius {} exceeds the bulk limit 0.8·√(n/π) = {bulk}",
            window.radius
        )));
    }
    Ok(())
}

/// Ginibre eigenvalues by diagonalizing an n×n matrix of standard complex
/// Gaussians scaled by 1/√π; a slower cross-check of [`sample_ginibre`].
pub fn sample_ginibre_dense(n_matrix: usize, window: &Window, rng: RngStream) -> Result<PointConfiguration> {
    check_ginibre_window(n_matrix, window)?;
    let mut g = rng.rng();
    let m = DMatrix::from_fn(n_matrix, n_matrix, |_, _| std_complex(&mut g));
    let eig = eigenvalues(m)?;
    let scale = 1.0 / PI.sqrt();
    let points = eig
        .into_iter()
        .map(|z| z * scale)
        .filter(|z| z.norm() <= window.radius)
        .map(|z| Point::Euclidean(vec![z.re, z.im]))
        .collect();
    Ok(PointConfiguration::new(*window, points, "ginibre_dense", rng, serde_json::json!({ "n_matrix": n_matrix })))
}

fn eigenvalues(m: DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let schur = Schur::try_new(m, 1e-15, 100 * n.max(10))
        .ok_or_else(|| Error::numeric("Schur iteration did not converge", f64::NAN))?;
    let ev = schur
        .eigenvalues()
        .ok_or_else(|| Error::numeric("Schur form is not triangular", f64::NAN))?;
    Ok(ev.iter().copied().collect())
}

/// Smallest N with Σ_{n>N} ρ^{2n} < 1e-12.
pub fn gaf_min_truncation(rho: f64) -> usize {
    let q = rho * rho;
    let mut n = 0usize;
    while q.powi(n as i32 + 1) / (1.0 - q) >= 1e-12 {
        n += 1;
    }
    n
}

/// Coefficients a_n √(Γ(t+n)/(Γ(t) n!)), n = 0..=truncation, of the
/// hyperbolic GAF with parameter t.
pub fn gaf_coefficients(t: f64, truncation: usize, rng: RngStream) -> Result<Vec<Complex64>> {
    if !(t > 0.0) {
        return Err(Error::validation("GAF parameter t must be positive"));
    }
    let mut g = rng.rng();
    let lt = ln_gamma(t);
    Ok((0..=truncation)
        .map(|n| {
            let w = (0.5 * (ln_gamma(t + n as f64) - lt - ln_gamma(n as f64 + 1.0))).exp();
            std_complex(&mut g) * w
        })
        .collect())
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64, f64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    let az = z.norm();
    for a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
        scale = scale * az + a.norm();
    }
    (p, dp, scale)
}

/// Zeros of the t = 1 hyperbolic GAF Σ a_n z^n inside the window, from the
/// companion matrix of the truncated series, each polished by Newton steps.
pub fn sample_gaf_zeros(truncation: usize, window: &Window, rng: RngStream) -> Result<PointConfiguration> {
    check_window(window)?;
    if window.space != Space::HyperbolicDisk {
        return Err(Error::validation("GAF windows live on the disk"));
    }
    let rho = window.model_radius();
    let need = gaf_min_truncation(rho);
    if truncation < need {
        return Err(Error::validation(format!("truncation {truncation} below the required {need} for ρ = {rho}")));
    }
    let c = gaf_coefficients(1.0, truncation, rng)?;
    let n = truncation;
    let lead = c[n];
    if lead.norm() == 0.0 {
        return Err(Error::numeric("vanishing leading coefficient", 0.0));
    }
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
    }
    let roots = eigenvalues(comp)?;
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    for r0 in roots {
        if r0.norm() > rho + 0.05 {
            continue;
        }
        let mut z = r0;
        let mut rel = f64::INFINITY;
        for _ in 0..50 {
            let (p, dp, scale) = horner(&c, z);
            rel = p.norm() / scale;
            if rel < 1e-14 || dp.norm() == 0.0 {
                break;
            }
            z -= p / dp;
        }
        let (p, _, scale) = horner(&c, z);
        rel = rel.min(p.norm() / scale);
        worst = worst.max(rel);
        if rel >= 1e-10 {
            return Err(Error::numeric(
                format!("root polish stalled at z = {z}; coefficient range {:.3e}..{:.3e}", min_abs(&c), max_abs(&c)),
                rel,
            ));
        }
        if z.norm() <= rho {
            points.push(Point::Disk(z));
        }
    }
    Ok(PointConfiguration::new(
        *window,
        points,
        "gaf_zeros",
        rng,
        serde_json::json!({ "truncation": truncation, "t": 1.0, "max_relative_residual": worst }),
    ))
}

fn min_abs(c: &[Complex64]) -> f64 {
    c.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min)
}

fn max_abs(c: &[Complex64]) -> f64 {
    c.iter().map(|a| a.norm()).fold(0.0, f64::max)
}

/// Smallest mode count M with ρ^{2M} < 1e-12.
pub fn bergman_min_modes(rho: f64) -> usize {
    let mut m = 1usize;
    while rho.powi(2 * m as i32) >= 1e-12 {
        m += 1;
    }
    m
}

/// Bergman DPP restricted to a centered disk window: mode k (the monomial
/// z^{k-1}) is kept with probability ρ^{2k}, then positions are drawn from the
/// induced projection kernel.
pub fn sample_bergman_dpp(window: &Window, mode_cap: usize, rng: RngStream) -> Result<PointConfiguration> {
    check_window(window)?;
    if window.space != Space::HyperbolicDisk {
        return Err(Error::validation("Bergman windows live on the disk"));
    }
    let rho = window.model_radius();
    let need = bergman_min_modes(rho);
    if mode_cap < need {
        return Err(Error::validation(format!("mode cap {mode_cap} below the required {need} for ρ = {rho}")));
    }
    let mut g = rng.rng();
    let q = rho * rho;
    let modes: Vec<usize> = (1..=mode_cap).filter(|&k| g.random::<f64>() < q.powi(k as i32)).map(|k| k - 1).collect();
    // |φ_j|² = (j+1) t^j / (π ρ^{2(j+1)})
    let log_density = |j: usize, t: f64| {
        let jf = j as f64;
        let lt = if j == 0 { 0.0 } else { jf * t.ln() };
        (jf + 1.0).ln() + lt - PI.ln() - (jf + 1.0) * q.ln()
    };
    let sample_t = |j: usize, r: &mut ChaCha20Rng| q * r.random::<f64>().powf(1.0 / (j as f64 + 1.0));
    let zs = radial_projection_dpp(&modes, log_density, sample_t, &mut g)?;
    Ok(PointConfiguration::new(
        *window,
        zs.into_iter().map(Point::Disk).collect(),
        "bergman_dpp",
        rng,
        serde_json::json!({ "mode_cap": mode_cap, "modes": modes.len() }),
    ))
}

/// Eigenvalues ρ^{2k}, k = 1..=m, of the Bergman kernel restricted to the
/// centered disk of model radius ρ.
pub fn bergman_restricted_eigenvalues(rho: f64, m: usize) -> Vec<f64> {
    (1..=m).map(|k| (rho * rho).powi(k as i32)).collect()
}
