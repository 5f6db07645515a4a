use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use bartlett_core::gaussdist::{characteristic_residual, gaussian_covariance, sample_gaussian_statistics, samples_to_csv};
use bartlett_core::geometry::Space;
use bartlett_core::heat::{equivalence_check, heat_criterion_trace, synthetic_tempered_measure};
use bartlett_core::io::{fmt_f64, json_string, write_text};
use bartlett_core::mclab::{
    estimate_number_variance, fit_variance_exponent, spectral_number_variances, ComparisonReport, SamplerSpec,
};
use bartlett_core::processes::RngStream;
use bartlett_core::spectral::{
    classify_hyperuniform, dpp_spectrum, geometric_grid, poisson_spectrum, variance_of_statistic, DppKernelSpec,
    SpectralMeasure,
};
use bartlett_core::sphtransform::{HeatTime, RadialFunction};
use bartlett_core::verify::{run_suite, CRITERIA};
use bartlett_core::{Error, Result};

use crate::grid::{parse_grid, parse_pair};
use crate::{Cli, Command, Kernel, MeasureArgs, Process, ProcessArgs, Profile};

/// Collects artifacts so the manifest can list them.
struct Out<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl Out<'_> {
    fn put(&mut self, name: &str, text: &str) -> Result<()> {
        write_text(&self.dir.join(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn put_json(&mut self, name: &str, v: &Value) -> Result<()> {
        self.put(name, &json_string(v)?)
    }
}

pub fn parse_space(s: &str) -> Result<Space> {
    match s {
        "hyperbolic" | "disk" => Ok(Space::HyperbolicDisk),
        _ => match s.strip_prefix("euclidean").and_then(|d| d.parse::<u32>().ok()) {
            Some(d) => Space::euclidean(d),
            None => Err(Error::validation(format!("unknown space {s:?}; use hyperbolic or euclidean1..euclidean4"))),
        },
    }
}

pub fn build_measure(m: &MeasureArgs) -> Result<SpectralMeasure> {
    let mut sigma = match m.kernel {
        Kernel::Poisson => poisson_spectrum(parse_space(&m.space)?, m.intensity)?,
        Kernel::Ginibre => dpp_spectrum(Space::Euclidean { d: 2 }, DppKernelSpec::ginibre())?,
        Kernel::WeylHeisenberg => {
            let k = DppKernelSpec::WeylHeisenberg { d: m.dim, lambda_wh: m.lambda_wh, n: m.level };
            dpp_spectrum(k.space()?, k)?
        }
        Kernel::Bergman => dpp_spectrum(Space::HyperbolicDisk, DppKernelSpec::Bergman)?,
        Kernel::Synthetic => synthetic_tempered_measure(parse_space(&m.space)?, m.alpha, m.cutoff)?,
    };
    for c in &m.complementary {
        sigma.complementary.push(parse_pair(c)?);
    }
    sigma.validate()?;
    Ok(sigma)
}

fn build_sampler(p: &ProcessArgs) -> Result<SamplerSpec> {
    Ok(match p.process {
        Process::Poisson => SamplerSpec::Poisson { space: parse_space(&p.space)?, intensity: p.intensity },
        Process::Ginibre => SamplerSpec::Ginibre { n_matrix: p.n },
        Process::Gaf => SamplerSpec::GafZeros { truncation: p.truncation },
        Process::Bergman => SamplerSpec::Bergman { mode_cap: p.mode_cap },
    })
}

/// Spectral measure the sampler is predicted to have.
fn sampler_spectrum(s: &SamplerSpec) -> Result<SpectralMeasure> {
    match *s {
        SamplerSpec::Poisson { space, intensity } => poisson_spectrum(space, intensity),
        SamplerSpec::Ginibre { .. } => dpp_spectrum(Space::Euclidean { d: 2 }, DppKernelSpec::ginibre()),
        SamplerSpec::GafZeros { .. } | SamplerSpec::Bergman { .. } => {
            dpp_spectrum(Space::HyperbolicDisk, DppKernelSpec::Bergman)
        }
    }
}

fn eps_grid(eps: &Option<String>) -> Result<Vec<f64>> {
    match eps {
        Some(e) => parse_grid(e),
        None => Ok(geometric_grid(0.05, 0.5, 9)),
    }
}

/// Runs the command. `Ok(false)` means it completed but a check failed.
pub fn run(cli: &Cli, argv: &[String]) -> Result<bool> {
    let mut out = Out { dir: &cli.out, written: Vec::new() };
    let ok = match &cli.command {
        Command::Spectrum { measure, grid, eps } => {
            let sigma = build_measure(measure)?;
            let grid = parse_grid(grid)?;
            let verdict = classify_hyperuniform(&sigma, &eps_grid(eps)?)?;
            out.put("spectrum.csv", &sigma.to_csv(&grid)?)?;
            out.put_json("spectrum.json", &json!({ "measure": sigma.metadata_json(), "classification": verdict }))?;
            true
        }
        Command::Variance { measure, profile, params } => {
            let sigma = build_measure(measure)?;
            let mut csv = String::from("param,profile,variance\n");
            for p in parse_grid(params)? {
                let f = match profile {
                    Profile::Ball => RadialFunction::ball(p)?,
                    Profile::Gaussian => RadialFunction::gaussian(p)?,
                    Profile::Heat => RadialFunction::heat(sigma.space, HeatTime::new(p)?)?,
                };
                let v = variance_of_statistic(&sigma, &f)?;
                csv.push_str(&format!("{},{},{}\n", fmt_f64(p), f.description(), fmt_f64(v)));
            }
            out.put("variance.csv", &csv)?;
            out.put_json("variance.json", &json!({ "measure": sigma.metadata_json() }))?;
            true
        }
        Command::Sample { process, radius, seed, stream } => {
            let sampler = build_sampler(process)?;
            let cfg = sampler.sample(*radius, RngStream::new(*seed, *stream))?;
            out.put("points.csv", &cfg.to_csv())?;
            out.put_json("points.json", &cfg.provenance_json())?;
            true
        }
        Command::Nv { process, radii, replicas, seed } => {
            let sampler = build_sampler(process)?;
            let sigma = sampler_spectrum(&sampler)?;
            let radii = parse_grid(radii)?;
            let est = estimate_number_variance(&sampler, &radii, *replicas, *seed)?;
            let predicted = spectral_number_variances(&sigma, &radii)?;
            let report = ComparisonReport::from_estimates(sampler, *seed, &est, &predicted);
            let exponent = fit_variance_exponent(&est, &sampler.space()).ok();
            out.put("nv.csv", &report.to_csv())?;
            out.put_json("nv.json", &json!({ "report": report, "estimates": est, "volume_exponent": exponent }))?;
            true
        }
        Command::Heat { measure, taus, eps } => {
            let sigma = build_measure(measure)?;
            let taus = parse_grid(taus)?;
            let trace = heat_criterion_trace(&sigma, &taus)?;
            let record = equivalence_check(&sigma, &taus, &eps_grid(eps)?)?;
            out.put("heat.csv", &trace.to_csv())?;
            out.put_json(
                "heat.json",
                &json!({ "measure": sigma.metadata_json(), "trace": trace, "equivalence": record }),
            )?;
            true
        }
        Command::Gaussian { measure, radii, replicas, seed } => {
            let sigma = build_measure(measure)?;
            let fs: Vec<RadialFunction> = parse_grid(radii)?.into_iter().map(RadialFunction::ball).collect::<Result<_>>()?;
            let panel = gaussian_covariance(&sigma, &fs)?;
            let samples = sample_gaussian_statistics(&panel, *replicas, RngStream::new(*seed, 0))?;
            let residuals: Vec<f64> =
                (0..panel.size()).map(|i| characteristic_residual(&panel, i, &samples)).collect::<Result<_>>()?;
            out.put("gaussian_samples.csv", &samples_to_csv(&panel, &samples))?;
            out.put_json("gaussian.json", &json!({ "panel": panel.metadata(), "characteristic_residuals": residuals }))?;
            true
        }
        Command::Verify { suite, seed } => {
            let ids: Vec<u8> = if suite == "all" {
                CRITERIA.to_vec()
            } else {
                vec![suite.parse().map_err(|_| Error::validation(format!("suite must be `all` or 1-8, got {suite:?}")))?]
            };
            let mut reports = Vec::new();
            for id in ids {
                let start = Instant::now();
                let report = run_suite(id, *seed)?;
                eprintln!(
                    "suite {id}: {} ({:.3} s)",
                    if report.pass { "pass" } else { "FAIL" },
                    start.elapsed().as_secs_f64()
                );
                for a in &report.artifacts {
                    out.put(&a.name, &a.contents)?;
                }
                reports.push(report);
            }
            let pass = reports.iter().all(|r| r.pass);
            out.put_json(
                "summary.json",
                &json!({ "version": env!("CARGO_PKG_VERSION"), "seed": seed, "suites": reports, "pass": pass }),
            )?;
            pass
        }
    };
    let manifest = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "argv": argv.get(1..).unwrap_or(&[]),
        "config": cli,
        "artifacts": out.written,
    });
    out.put_json("manifest.json", &manifest)?;
    Ok(ok)
}
