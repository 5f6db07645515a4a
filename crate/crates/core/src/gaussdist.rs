//! Finite-dimensional marginals of the invariant Gaussian random distribution
//! with spectral measure σ: the linear statistics of a panel of radial test
//! functions are jointly Gaussian with covariance ∫ f̂_i f̂_j dσ.

use nalgebra::{DMatrix, SymmetricEigen};
use rand_distr::StandardNormal;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Space;
use crate::io::fmt_f64;
use crate::processes::RngStream;
use crate::spectral::{covariance_with_plans, plan_bound, SpectralMeasure};
use crate::sphtransform::{RadialFunction, TransformPlan};
use crate::stats;

/// Eigenvalues above −PSD_SLACK·max(1, λ_max) are clipped to 0.
pub const PSD_SLACK: f64 = 1e-10;

#[derive(Clone)]
pub struct GaussianPanel {
    pub space: Space,
    pub test_functions: Vec<RadialFunction>,
    pub covariance: Vec<Vec<f64>>,
    pub sigma_ref: Option<SpectralMeasure>,
    factor: DMatrix<f64>,
}

impl std::fmt::Debug for GaussianPanel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GaussianPanel")
            .field("space", &self.space)
            .field("test_functions", &self.descriptions())
            .field("covariance", &self.covariance)
            .finish()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PanelMetadata {
    pub space: Space,
    pub test_functions: Vec<String>,
    pub covariance: Vec<Vec<f64>>,
    pub sigma_ref: Option<SpectralMeasure>,
}

impl GaussianPanel {
    /// Panel with a given covariance matrix and no test functions attached.
    pub fn from_covariance(space: Space, covariance: Vec<Vec<f64>>) -> Result<GaussianPanel> {
        let n = covariance.len();
        if n == 0 || covariance.iter().any(|r| r.len() != n) {
            return Err(Error::validation("covariance must be a nonempty square matrix"));
        }
        let m = DMatrix::from_fn(n, n, |i, j| covariance[i][j]);
        let scale = m.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::validation("covariance is not symmetric"));
                }
            }
        }
        let factor = psd_factor(&m)?;
        Ok(GaussianPanel { space, test_functions: Vec::new(), covariance, sigma_ref: None, factor })
    }

    pub fn size(&self) -> usize {
        self.covariance.len()
    }

    pub fn descriptions(&self) -> Vec<String> {
        self.test_functions.iter().map(|f| f.description().to_string()).collect()
    }

    pub fn metadata(&self) -> PanelMetadata {
        PanelMetadata {
            space: self.space,
            test_functions: self.descriptions(),
            covariance: self.covariance.clone(),
            sigma_ref: self.sigma_ref.clone(),
        }
    }
}

/// F with F Fᵀ equal to the matrix after clipping small negative eigenvalues.
fn psd_factor(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let top = eig.eigenvalues.iter().copied().fold(0.0f64, f64::max).max(1.0);
    let mut factor = eig.eigenvectors.clone();
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        if l < -PSD_SLACK * top {
            return Err(Error::validation(format!("covariance is indefinite: eigenvalue {l:e}")));
        }
        let s = l.max(0.0).sqrt();
        for i in 0..m.nrows() {
            factor[(i, j)] *= s;
        }
    }
    Ok(factor)
}

/// Covariance panel ∫ f̂_i f̂_j dσ.
pub fn gaussian_covariance(sigma: &SpectralMeasure, fs: &[RadialFunction]) -> Result<GaussianPanel> {
    if fs.is_empty() {
        return Err(Error::validation("empty test-function panel"));
    }
    let bound = plan_bound(sigma);
    let plans: Vec<TransformPlan> =
        fs.iter().map(|f| TransformPlan::new(&sigma.space, f, bound)).collect::<Result<_>>()?;
    let n = fs.len();
    let mut cov = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            let extent = fs[i].support().extent().max(fs[j].support().extent());
            let v = covariance_with_plans(sigma, &fs[i], &fs[j], &plans[i], &plans[j], extent)?;
            cov[i][j] = v;
            cov[j][i] = v;
        }
    }
    let mut panel = GaussianPanel::from_covariance(sigma.space, cov)?;
    panel.test_functions = fs.to_vec();
    panel.sigma_ref = Some(sigma.clone());
    Ok(panel)
}

/// Independent centered Gaussian vectors with the panel covariance, one row per replica.
pub fn sample_gaussian_statistics(panel: &GaussianPanel, replicas: usize, rng: RngStream) -> Result<Vec<Vec<f64>>> {
    if replicas == 0 {
        return Err(Error::validation("replicas must be positive"));
    }
    let n = panel.size();
    let mut g = rng.rng();
    let mut out = Vec::with_capacity(replicas);
    let mut z = vec![0.0; n];
    for _ in 0..replicas {
        for zi in z.iter_mut() {
            *zi = g.sample(StandardNormal);
        }
        let row: Vec<f64> = (0..n).map(|i| (0..n).map(|j| panel.factor[(i, j)] * z[j]).sum()).collect();
        out.push(row);
    }
    Ok(out)
}

/// |mean e^{i X_f} − e^{−C_ff/2}| for column `f_index` of the samples.
pub fn characteristic_residual(panel: &GaussianPanel, f_index: usize, samples: &[Vec<f64>]) -> Result<f64> {
    if f_index >= panel.size() {
        return Err(Error::validation("test-function index out of range"));
    }
    if samples.is_empty() {
        return Err(Error::validation("no samples"));
    }
    let cos: Vec<f64> = samples.iter().map(|r| r[f_index].cos()).collect();
    let sin: Vec<f64> = samples.iter().map(|r| r[f_index].sin()).collect();
    let target = (-0.5 * panel.covariance[f_index][f_index]).exp();
    let re = stats::mean(&cos) - target;
    let im = stats::mean(&sin);
    Ok(re.hypot(im))
}

pub fn samples_to_csv(panel: &GaussianPanel, samples: &[Vec<f64>]) -> String {
    let header: Vec<String> = (0..panel.size()).map(|i| format!("f{i}")).collect();
    let mut out = header.join(",") + "\n";
    for row in samples {
        out.push_str(&row.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
