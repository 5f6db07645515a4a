//! Order-independent summary statistics and the goodness-of-fit tests used by
//! the Monte Carlo checks.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Sum after sorting, accumulated pairwise; independent of input order.
pub fn sorted_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    pairwise(&v)
}

fn pairwise(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise(&v[..mid]) + pairwise(&v[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    sorted_sum(values) / values.len() as f64
}

/// Unbiased sample variance.
pub fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(values);
    let sq: Vec<f64> = values.iter().map(|x| (x - m) * (x - m)).collect();
    sorted_sum(&sq) / (n - 1) as f64
}

/// Standard error of the sample variance: jackknife for n ≥ 3, the normal
/// theory value var·√(2/(n−1)) for n = 2.
pub fn variance_stderr(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let var = sample_variance(values);
    if n == 2 {
        return var * (2.0f64 / (n as f64 - 1.0)).sqrt();
    }
    let nf = n as f64;
    let m = mean(values);
    let ss = var * (nf - 1.0);
    let loo: Vec<f64> = values
        .iter()
        .map(|x| (ss - nf / (nf - 1.0) * (x - m) * (x - m)) / (nf - 2.0))
        .collect();
    let lm = mean(&loo);
    let dev: Vec<f64> = loo.iter().map(|v| (v - lm) * (v - lm)).collect();
    ((nf - 1.0) / nf * sorted_sum(&dev)).sqrt()
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let sxx: Vec<f64> = x.iter().map(|a| (a - mx) * (a - mx)).collect();
    sorted_sum(&sxy) / sorted_sum(&sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub dof: f64,
    pub p_value: f64,
}

fn chi2_p(stat: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Ok(1.0);
    }
    let d = ChiSquared::new(dof as f64).map_err(|e| Error::validation(e.to_string()))?;
    Ok(1.0 - d.cdf(stat))
}

/// Pearson goodness of fit of integer samples against a probability vector
/// (index = value); cells with expected count below 5 are pooled upward.
pub fn chi_square_gof(samples: &[usize], probs: &[f64]) -> Result<TestResult> {
    let n = samples.len() as f64;
    let mut observed = vec![0.0; probs.len()];
    for &s in samples {
        let i = s.min(probs.len() - 1);
        observed[i] += 1.0;
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (oi, pi) in observed.iter().zip(probs) {
        o += oi;
        e += pi * n;
        if e >= 5.0 {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += o;
        last.1 += e;
    }
    if cells.len() < 2 {
        return Err(Error::validation("too few cells for a chi-square test"));
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    Ok(TestResult { statistic: stat, dof: dof as f64, p_value: chi2_p(stat, dof)? })
}

/// Two-sample chi-square homogeneity test on integer samples; cells are pooled
/// from the top until the pooled expected count under either sample is ≥ 5.
pub fn chi_square_two_sample(a: &[usize], b: &[usize]) -> Result<TestResult> {
    let top = a.iter().chain(b).copied().max().unwrap_or(0);
    let mut ca = vec![0.0; top + 1];
    let mut cb = vec![0.0; top + 1];
    for &x in a {
        ca[x] += 1.0;
    }
    for &x in b {
        cb[x] += 1.0;
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let total = na + nb;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut oa, mut ob) = (0.0, 0.0);
    for (x, y) in ca.iter().zip(&cb) {
        oa += x;
        ob += y;
        let col = oa + ob;
        if col * na.min(nb) / total >= 5.0 {
            cells.push((oa, ob));
            oa = 0.0;
            ob = 0.0;
        }
    }
    if let Some(last) = cells.last_mut() {
        last.0 += oa;
        last.1 += ob;
    }
    if cells.len() < 2 {
        return Err(Error::validation("too few cells for a chi-square test"));
    }
    let mut stat = 0.0;
    for (x, y) in &cells {
        let col = x + y;
        let ea = col * na / total;
        let eb = col * nb / total;
        stat += (x - ea).powi(2) / ea + (y - eb).powi(2) / eb;
    }
    let dof = cells.len() - 1;
    Ok(TestResult { statistic: stat, dof: dof as f64, p_value: chi2_p(stat, dof)? })
}

/// One-sample Kolmogorov-Smirnov test against Uniform(0, 1), with the
/// asymptotic Kolmogorov distribution (Stephens' small-sample correction).
pub fn ks_uniform(samples: &[f64]) -> TestResult {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in v.iter().enumerate() {
        let i = i as f64;
        d = d.max((i + 1.0) / n - x).max(x - i / n);
    }
    let lam = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powi(j as i32 - 1) * (-2.0 * j * j * lam * lam).exp();
        p += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    TestResult { statistic: d, dof: n, p_value: p.clamp(0.0, 1.0) }
}

/// Distribution of a sum of independent Bernoulli(p_k) variables.
pub fn bernoulli_sum_pmf(ps: &[f64]) -> Vec<f64> {
    let mut pmf = vec![1.0];
    for &p in ps {
        let mut next = vec![0.0; pmf.len() + 1];
        for (k, q) in pmf.iter().enumerate() {
            next[k] += q * (1.0 - p);
            next[k + 1] += q * p;
        }
        pmf = next;
    }
    pmf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_ignore_order() {
        let a = [1e16, 1.0, -1e16, 3.5, 0.25, 7.0, 1e-3, 2.0, 9.0, -4.0];
        let mut b = a;
        b.reverse();
        assert_eq!(sorted_sum(&a).to_bits(), sorted_sum(&b).to_bits());
    }

    #[test]
    fn variance_and_stderr() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert!((sample_variance(&v) - 5.0 / 3.0).abs() < 1e-15);
        assert!(variance_stderr(&v).is_finite());
        assert!(variance_stderr(&[1.0, 3.0]).is_finite());
    }

    #[test]
    fn slope_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((ls_slope(&x, &y) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_pmf_sums_to_one() {
        let pmf = bernoulli_sum_pmf(&[0.5, 0.25, 0.1]);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!((pmf[0] - 0.5 * 0.75 * 0.9).abs() < 1e-15);
    }

    #[test]
    fn ks_detects_nonuniform() {
        let good: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_uniform(&good).p_value > 0.99);
        let bad: Vec<f64> = good.iter().map(|x| x * x).collect();
        assert!(ks_uniform(&bad).p_value < 1e-6);
    }
}
