//! Acceptance suites. Each suite computes its checks, returns a pass flag
//! with the measured quantities and a set of deterministic CSV artifacts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussdist::{characteristic_residual, gaussian_covariance, sample_gaussian_statistics};
use crate::geometry::{ball_volume, Space};
use crate::heat::{
    default_tau_grid, equivalence_check, heat_criterion_trace, synthetic_tempered_measure, EquivalenceRecord,
};
use crate::io::fmt_f64;
use crate::mclab::{
    estimate_number_variance, estimates_to_csv, fit_variance_exponent, sample_counts, spectral_number_variances,
    z_score, ComparisonReport, SamplerSpec, VarianceEstimate, Z_BAND,
};
use crate::processes::RngStream;
use crate::spectral::{
    classify_hyperuniform, dpp_spectrum, geometric_grid, poisson_spectrum, Density, DppKernelSpec, SpectralMeasure,
};
use crate::sphtransform::{
    functional_equation_residual, heat_kernel_spatial, heat_kernel_transform, l2_norm_sq, plancherel_side,
    spherical_transform, HeatTime, RadialFunction, SpectralParameter,
};
use crate::stats::{self, chi_square_two_sample};

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub id: u8,
    pub title: String,
    pub pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub artifacts: Vec<Artifact>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: String,
    pub pass: bool,
}

struct Builder {
    id: u8,
    title: &'static str,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl Builder {
    fn new(id: u8, title: &'static str) -> Self {
        Builder { id, title, checks: Vec::new(), artifacts: Vec::new() }
    }

    fn check(&mut self, name: impl Into<String>, value: f64, bound: impl Into<String>, pass: bool) {
        self.checks.push(Check { name: name.into(), value, bound: bound.into(), pass });
    }

    fn artifact(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact { name: format!("c{}_{name}", self.id), contents });
    }

    fn finish(self) -> SuiteReport {
        let pass = !self.checks.is_empty() && self.checks.iter().all(|c| c.pass);
        SuiteReport { id: self.id, title: self.title.to_string(), pass, checks: self.checks, artifacts: self.artifacts }
    }
}

pub fn run_suite(id: u8, seed: u64) -> Result<SuiteReport> {
    match id {
        1 => plancherel_suite(),
        2 => functional_equation_suite(),
        3 => heat_transform_suite(),
        4 => ginibre_suite(seed),
        5 => poisson_suite(seed),
        6 => bergman_suite(seed),
        7 => heat_equivalence_suite(),
        8 => gaussian_suite(seed),
        _ => Err(Error::validation(format!("unknown suite {id}; suites are 1-8"))),
    }
}

fn test_profiles(space: Space) -> Result<Vec<RadialFunction>> {
    Ok(vec![
        RadialFunction::gaussian(PI)?,
        RadialFunction::ball(1.0)?,
        RadialFunction::ball(2.0)?,
        RadialFunction::heat(space, HeatTime::new(0.5)?)?,
        RadialFunction::heat(space, HeatTime::new(1.0)?)?,
    ])
}

fn plancherel_suite() -> Result<SuiteReport> {
    let mut b = Builder::new(1, "Plancherel identity");
    let mut csv = String::from("space,profile,l2_norm_sq,plancherel_side,residual\n");
    for (space, tol) in [(Space::Euclidean { d: 2 }, 1e-6), (Space::HyperbolicDisk, 1e-5)] {
        for f in test_profiles(space)? {
            let lhs = l2_norm_sq(&space, &f)?;
            let rhs = plancherel_side(&space, &f)?;
            let res = (lhs - rhs).abs() / lhs.max(1e-300);
            csv.push_str(&format!("{},{},{},{},{}\n", space.label(), f.description(), fmt_f64(lhs), fmt_f64(rhs), fmt_f64(res)));
            b.check(format!("{} {}", space.label(), f.description()), res, format!("<= {tol:e}"), res <= tol);
        }
    }
    b.artifact("plancherel.csv", csv);
    Ok(b.finish())
}

fn functional_equation_suite() -> Result<SuiteReport> {
    let mut b = Builder::new(2, "spherical functional equation on the disk");
    let mut csv = String::from("lambda,s,t,residual\n");
    let mut worst: f64 = 0.0;
    for l in 0..5 {
        for s in 0..5 {
            for t in 0..5 {
                let (l, s, t) = (l as f64, s as f64, t as f64);
                let r = functional_equation_residual(l, s, t)?;
                worst = worst.max(r);
                csv.push_str(&format!("{},{},{},{}\n", fmt_f64(l), fmt_f64(s), fmt_f64(t), fmt_f64(r)));
            }
        }
    }
    b.check("worst residual on the 5x5x5 grid", worst, "<= 1e-6", worst <= 1e-6);
    b.artifact("functional_equation.csv", csv);
    Ok(b.finish())
}

/// τ^{-1} (1+τ+s)^{-1/2} (1+s) e^{-τ/4 - s/2 - s²/4τ}.
pub fn davies_mandouvalos_shape(tau: f64, s: f64) -> f64 {
    (1.0 + s) / (tau * (1.0 + tau + s).sqrt()) * (-tau / 4.0 - s / 2.0 - s * s / (4.0 * tau)).exp()
}

fn heat_transform_suite() -> Result<SuiteReport> {
    let mut b = Builder::new(3, "heat kernel transforms and envelope");
    let h = Space::HyperbolicDisk;
    let mut csv = String::from("space,tau,parameter,transform,closed_form,abs_error\n");
    let mut worst_h: f64 = 0.0;
    for tau in [0.5, 1.0, 2.0] {
        let ht = HeatTime::new(tau)?;
        let f = RadialFunction::heat(h, ht)?;
        for k in 0..=20 {
            let l = 0.25 * k as f64;
            let p = SpectralParameter::Principal(l);
            let v = spherical_transform(&h, &f, p)?;
            let exact = heat_kernel_transform(&h, ht, p);
            worst_h = worst_h.max((v - exact).abs());
            csv.push_str(&format!("{},{},{},{},{},{}\n", h.label(), fmt_f64(tau), fmt_f64(l), fmt_f64(v), fmt_f64(exact), fmt_f64((v - exact).abs())));
        }
    }
    b.check("disk heat transform vs exp(-tau(1/4+lambda^2))", worst_h, "<= 1e-5", worst_h <= 1e-5);
    let mut worst_e: f64 = 0.0;
    for d in [1u32, 2] {
        let e = Space::Euclidean { d };
        for tau in [0.5, 1.0, 2.0] {
            let ht = HeatTime::new(tau)?;
            let f = RadialFunction::heat(e, ht)?;
            for k in 0..=10 {
                let z = 0.1 * k as f64;
                let p = SpectralParameter::Euclidean(z);
                let v = spherical_transform(&e, &f, p)?;
                let exact = heat_kernel_transform(&e, ht, p);
                worst_e = worst_e.max((v - exact).abs());
                csv.push_str(&format!("{},{},{},{},{},{}\n", e.label(), fmt_f64(tau), fmt_f64(z), fmt_f64(v), fmt_f64(exact), fmt_f64((v - exact).abs())));
            }
        }
    }
    b.check("Euclidean Gaussian pair", worst_e, "<= 1e-10", worst_e <= 1e-10);
    b.artifact("heat_transform.csv", csv);

    let mut env = String::from("tau,s,heat_kernel,shape,ratio\n");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for tau in [0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        for k in 0..=20 {
            let s = 0.5 * k as f64;
            let v = heat_kernel_spatial(&h, HeatTime::new(tau)?, s)?;
            let shape = davies_mandouvalos_shape(tau, s);
            let ratio = v / shape;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            env.push_str(&format!("{},{},{},{},{}\n", fmt_f64(tau), fmt_f64(s), fmt_f64(v), fmt_f64(shape), fmt_f64(ratio)));
        }
    }
    b.check("envelope ratio spread max/min", hi / lo, "<= 10", lo > 0.0 && hi / lo <= 10.0);
    b.artifact("envelope.csv", env);
    Ok(b.finish())
}

fn comparison_csv(report: &ComparisonReport) -> String {
    report.to_csv()
}

fn ginibre_suite(seed: u64) -> Result<SuiteReport> {
    let mut b = Builder::new(4, "Ginibre hyperuniformity");
    let e2 = Space::Euclidean { d: 2 };
    let mut csv = String::from("lambda_wh,density_at_zero,formula,valid_dpp\n");
    for lw in [2.0 * PI, PI, 4.0 * PI] {
        let k = DppKernelSpec::WeylHeisenberg { d: 1, lambda_wh: lw, n: 0 };
        let formula = 1.0 - 2.0 * PI / lw;
        let (density, valid) = match dpp_spectrum(e2, k) {
            Ok(s) => (s.density(0.0)?, true),
            Err(Error::Validation(_)) => (k.density_formula(0.0)?, false),
            Err(e) => return Err(e),
        };
        csv.push_str(&format!("{},{},{},{}\n", fmt_f64(lw), fmt_f64(density), fmt_f64(formula), valid));
        let name = format!("density at zeta=0 for lambda={:.4}", lw);
        if lw == 2.0 * PI {
            b.check(name, density, "== 0", density == 0.0 && valid);
        } else {
            let ok = (density - formula).abs() < 1e-14 && density != 0.0;
            b.check(name, density, format!("== {formula} (nonzero)"), ok);
        }
        if lw == PI {
            b.check("lambda=pi rejected as a DPP kernel", if valid { 1.0 } else { 0.0 }, "== 0", !valid);
        }
    }
    b.artifact("density_at_zero.csv", csv);

    let sampler = SamplerSpec::Ginibre { n_matrix: 1024 };
    let radii = [2.0, 3.0, 4.0, 5.0, 6.0];
    let replicas = 2000;
    let sigma = dpp_spectrum(e2, DppKernelSpec::ginibre())?;
    let est = estimate_number_variance(&sampler, &radii, replicas, seed)?;
    let predicted = spectral_number_variances(&sigma, &radii)?;
    let report = ComparisonReport::from_estimates(sampler, seed, &est, &predicted);
    let worst = report.rows.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    b.check("max |z| Ginibre MC vs spectral", worst, "<= 3", report.pass);
    let gamma = fit_variance_exponent(&est, &e2)?;
    b.check("fitted variance exponent", gamma, "0.5 +- 0.1", (gamma - 0.5).abs() <= 0.1);
    b.artifact("estimates.csv", estimates_to_csv(&est));
    b.artifact("comparison.csv", comparison_csv(&report));
    Ok(b.finish())
}

fn poisson_suite(seed: u64) -> Result<SuiteReport> {
    let mut b = Builder::new(5, "Poisson baseline");
    let mut csv = String::from("space,radius,mc_variance,mc_stderr,volume,spectral_variance,z_score\n");
    for space in [Space::Euclidean { d: 2 }, Space::HyperbolicDisk] {
        let sampler = SamplerSpec::Poisson { space, intensity: 1.0 };
        let radii = [1.0, 2.0, 3.0];
        let est = estimate_number_variance(&sampler, &radii, 10_000, seed)?;
        let sigma = poisson_spectrum(space, 1.0)?;
        let predicted = spectral_number_variances(&sigma, &radii)?;
        for (e, s) in est.iter().zip(&predicted) {
            let vol = ball_volume(&space, e.radius);
            let z = z_score(e.variance, vol, e.stderr_variance);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                space.label(),
                fmt_f64(e.radius),
                fmt_f64(e.variance),
                fmt_f64(e.stderr_variance),
                fmt_f64(vol),
                fmt_f64(*s),
                fmt_f64(z)
            ));
            b.check(format!("{} r={} z vs intensity*volume", space.label(), e.radius), z, "|z| <= 3", z.abs() <= Z_BAND);
            let rel = (s - vol).abs() / vol;
            b.check(format!("{} r={} spectral vs volume", space.label(), e.radius), rel, "<= 1e-6", rel <= 1e-6);
        }
    }
    b.artifact("poisson.csv", csv);
    Ok(b.finish())
}

fn counts_as_f64(c: &[usize]) -> Vec<f64> {
    c.iter().map(|x| *x as f64).collect()
}

fn bergman_suite(seed: u64) -> Result<SuiteReport> {
    let mut b = Builder::new(6, "Bergman kernel and GAF zeros");
    let h = Space::HyperbolicDisk;
    let sigma = dpp_spectrum(h, DppKernelSpec::Bergman)?;
    let eps = geometric_grid(0.05, 0.5, 9);
    let verdict = classify_hyperuniform(&sigma, &eps)?;
    let target = 1.0 - PI / 4.0;
    let mut trace = String::from("epsilon,ratio\n");
    for (e, r) in &verdict.ratio_trace {
        trace.push_str(&format!("{},{}\n", fmt_f64(*e), fmt_f64(*r)));
    }
    b.artifact("ratio_trace.csv", trace);
    let err = (verdict.limit_estimate - target).abs();
    b.check("ratio-trace limit minus (1 - pi/4)", err, "<= 1e-3", err <= 1e-3);

    let radii = [1.0, 2.0];
    let replicas = 2000;
    let predicted = spectral_number_variances(&sigma, &radii)?;
    let gaf = SamplerSpec::GafZeros { truncation: None };
    let berg = SamplerSpec::Bergman { mode_cap: None };
    let gaf_counts = sample_counts(&gaf, &radii, replicas, seed)?;
    let berg_counts = sample_counts(&berg, &radii, replicas, seed.wrapping_add(1))?;
    let mut csv = String::from("radius,sampler,mean_count,mc_variance,mc_stderr,spectral_variance,z_score\n");
    let mut chi = String::from("radius,statistic,dof,p_value\n");
    for (i, r) in radii.iter().enumerate() {
        for (name, counts) in [("gaf_zeros", &gaf_counts[i]), ("bergman_dpp", &berg_counts[i])] {
            let v = counts_as_f64(counts);
            let est = VarianceEstimate {
                radius: *r,
                mean_count: stats::mean(&v),
                variance: stats::sample_variance(&v),
                stderr_variance: stats::variance_stderr(&v),
                replicas,
            };
            let z = z_score(est.variance, predicted[i], est.stderr_variance);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                fmt_f64(*r),
                name,
                fmt_f64(est.mean_count),
                fmt_f64(est.variance),
                fmt_f64(est.stderr_variance),
                fmt_f64(predicted[i]),
                fmt_f64(z)
            ));
            if name == "gaf_zeros" {
                b.check(format!("GAF R={r} z vs Bergman spectrum"), z, "|z| <= 3", z.abs() <= Z_BAND);
            }
        }
        let t = chi_square_two_sample(&gaf_counts[i], &berg_counts[i])?;
        chi.push_str(&format!("{},{},{},{}\n", fmt_f64(*r), fmt_f64(t.statistic), fmt_f64(t.dof), fmt_f64(t.p_value)));
        b.check(format!("GAF vs Bergman counts R={r} chi-square p"), t.p_value, ">= 0.01", t.p_value >= 0.01);
    }
    b.artifact("variance.csv", csv);
    b.artifact("chi_square.csv", chi);
    Ok(b.finish())
}

fn equivalence_row(name: &str, r: &EquivalenceRecord) -> String {
    format!(
        "{},{:?},{:?},{},{},{}\n",
        name,
        r.spectral_verdict,
        r.heat_verdict,
        fmt_f64(r.spectral.limit_estimate),
        fmt_f64(r.heat.limit_estimate),
        r.agree
    )
}

fn heat_equivalence_suite() -> Result<SuiteReport> {
    let mut b = Builder::new(7, "heat-kernel and spectral hyperuniformity");
    let h = Space::HyperbolicDisk;
    let taus = default_tau_grid();
    let eps = geometric_grid(0.05, 0.5, 9);
    let cases: Vec<(&str, SpectralMeasure)> = vec![
        ("ginibre", dpp_spectrum(Space::Euclidean { d: 2 }, DppKernelSpec::ginibre())?),
        ("bergman", dpp_spectrum(h, DppKernelSpec::Bergman)?),
        ("poisson_disk", poisson_spectrum(h, 1.0)?),
        ("synthetic_2.5", synthetic_tempered_measure(h, 2.5, 1.0)?),
        ("synthetic_3.5", synthetic_tempered_measure(h, 3.5, 1.0)?),
    ];
    let mut csv = String::from("measure,spectral_verdict,heat_verdict,spectral_limit,heat_limit,agree\n");
    for (name, s) in &cases {
        let r = equivalence_check(s, &taus, &eps)?;
        csv.push_str(&equivalence_row(name, &r));
        b.check(format!("{name} verdicts agree"), if r.agree { 1.0 } else { 0.0 }, "agree", r.agree);
    }
    b.artifact("equivalence.csv", csv);
    let fixture = SpectralMeasure::new(h, Density::Constant { level: 1.0 }, vec![(0.4, 1.0)], vec![])?;
    let trace = heat_criterion_trace(&fixture, &[1.0, 10.0, 20.0, 30.0, 40.0])?;
    let last = trace.rows.last().map_or(0.0, |r| r.scaled_value);
    b.check("complementary fixture scaled value at tau=40", last, "> 1e6", last > 1e6);
    b.artifact("complementary_trace.csv", trace.to_csv());
    Ok(b.finish())
}

fn gaussian_suite(seed: u64) -> Result<SuiteReport> {
    let mut b = Builder::new(8, "Gaussian random distribution");
    let h = Space::HyperbolicDisk;
    let sigma = synthetic_tempered_measure(h, 4.0, 1.0)?;
    let radii = [1.0, 1.5, 2.0, 2.5, 3.0];
    let fs: Vec<RadialFunction> = radii.iter().map(|r| RadialFunction::ball(*r)).collect::<Result<_>>()?;
    let panel = gaussian_covariance(&sigma, &fs)?;
    let replicas = 10_000;
    let samples = sample_gaussian_statistics(&panel, replicas, RngStream::new(seed, 0))?;
    let mut csv = String::from("radius,covariance,sample_variance,stderr,characteristic_residual\n");
    let mut est = Vec::new();
    for (i, r) in radii.iter().enumerate() {
        let col: Vec<f64> = samples.iter().map(|row| row[i]).collect();
        let e = VarianceEstimate {
            radius: *r,
            mean_count: stats::mean(&col),
            variance: stats::sample_variance(&col),
            stderr_variance: stats::variance_stderr(&col),
            replicas,
        };
        let res = characteristic_residual(&panel, i, &samples)?;
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(*r),
            fmt_f64(panel.covariance[i][i]),
            fmt_f64(e.variance),
            fmt_f64(e.stderr_variance),
            fmt_f64(res)
        ));
        b.check(format!("characteristic residual R={r}"), res, "< 0.02", res < 0.02);
        est.push(e);
    }
    let gamma = fit_variance_exponent(&est, &h)?;
    b.check("fitted exponent of the Gaussian panel", gamma, "< 1", gamma < 1.0);
    b.artifact("panel.csv", csv);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(matches!(run_suite(9, 1), Err(Error::Validation(_))));
    }

    #[test]
    fn shape_positive() {
        assert!(davies_mandouvalos_shape(0.1, 10.0) > 0.0);
    }
}
