//! Shared statistics: Kolmogorov-Smirnov distance, kernel density
//! estimation, autocorrelation, and convergence-order estimation.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::grid::{integrate, Grid, RealField};

/// 99% critical value of the one-sample KS statistic, `1.63 / sqrt(n)`.
pub fn ks_critical_99(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// A weighted empirical sample.
#[derive(Debug, Clone)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl EmpiricalSample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteField);
        }
        Ok(Self { values, weights: None })
    }

    /// Weights must be nonnegative and sum to 1.
    pub fn weighted(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if weights.len() != values.len() {
            return Err(Error::Invalid("weights length differs from values".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::Invalid("weights must be nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::Invalid(format!("weights sum to {total}, expected 1")));
        }
        Ok(Self { values, weights: Some(weights) })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        match &self.weights {
            None => self.values.iter().sum::<f64>() / self.len() as f64,
            Some(w) => self.values.iter().zip(w).map(|(&v, &w)| v * w).sum(),
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        match &self.weights {
            None => {
                self.values.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / self.len() as f64
            }
            Some(w) => self
                .values
                .iter()
                .zip(w)
                .map(|(&v, &w)| w * (v - m) * (v - m))
                .sum(),
        }
    }
}

/// Sup-norm distance between the empirical CDF of `sample` and a reference
/// CDF, evaluating both one-sided gaps at every sample point.
pub fn ks_distance(sample: &EmpiricalSample, cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&a, &b| sample.values[a].total_cmp(&sample.values[b]));
    let uniform = 1.0 / sample.len() as f64;
    let mut cum = 0.0;
    let mut sup = 0.0f64;
    for &i in &order {
        let f = cdf(sample.values[i]);
        let below = cum;
        cum += sample.weights.as_ref().map_or(uniform, |w| w[i]);
        sup = sup.max((f - below).abs()).max((cum - f).abs());
    }
    Ok(sup)
}

/// Bandwidth selection for [`kde`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// Silverman's rule, `1.06 std n^{-1/5}`.
    Silverman,
    /// Silverman's rule scaled by the given factor.
    ScaledSilverman(f64),
    Fixed(f64),
}

pub fn silverman_bandwidth(sample: &EmpiricalSample) -> Result<f64> {
    let std = sample.variance().sqrt();
    if std == 0.0 {
        return Err(Error::ZeroVarianceSample);
    }
    Ok(1.06 * std * (sample.len() as f64).powf(-0.2))
}

/// Gaussian-kernel density estimate on the grid, normalized to unit mass.
///
/// Kernels are truncated at eight bandwidths; the clipped tail mass is below
/// 1e-15 and the final renormalization absorbs it.
pub fn kde(sample: &EmpiricalSample, grid: &Grid, bandwidth: Bandwidth) -> Result<RealField> {
    let bw = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(sample)?,
        Bandwidth::ScaledSilverman(s) => {
            if !(s > 0.0) {
                return Err(Error::NonPositiveParameter { name: "bandwidth scale", value: s });
            }
            s * silverman_bandwidth(sample)?
        }
        Bandwidth::Fixed(b) => b,
    };
    if !(bw > 0.0) {
        return Err(Error::NonPositiveParameter { name: "bandwidth", value: bw });
    }
    let n = grid.len();
    let h = grid.spacing();
    let mut values = vec![0.0f64; n];
    let cut = 8.0 * bw;
    let cut_cells = (cut / h).ceil() as i64;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * bw * sample.len() as f64);
    let uniform = 1.0 / sample.len() as f64;
    for (i, &x) in sample.values.iter().enumerate() {
        let w = sample.weights.as_ref().map_or(uniform, |w| w[i]) * sample.len() as f64;
        let center = ((x - grid.origin()) / h).round() as i64;
        for cell in (center - cut_cells)..=(center + cut_cells) {
            let xg = grid.origin() + cell as f64 * h;
            let z = (xg - x) / bw;
            let j = cell.rem_euclid(n as i64) as usize;
            values[j] += w * norm * (-0.5 * z * z).exp();
        }
    }
    let field = RealField::new(grid.clone(), values)?;
    let mass = integrate(&field);
    if !(mass > 0.0) {
        return Err(Error::Invalid("kernel density estimate has zero mass".into()));
    }
    field.map(|v| v / mass)
}

/// Ensemble-and-time averaged autocorrelation `<u(t) u(t+tau)>` for lags
/// `0..=max_lag`, over rows of `series` (one row per path).
pub fn autocorrelation(series: &Array2<f64>, max_lag: usize) -> Result<Vec<f64>> {
    let n_t = series.ncols();
    if n_t == 0 || series.nrows() == 0 {
        return Err(Error::EmptySample);
    }
    if max_lag >= n_t {
        return Err(Error::LagTooLarge { lag: max_lag, len: n_t });
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let mut sum = 0.0;
        let mut count = 0usize;
        for row in series.rows() {
            for t in 0..n_t - lag {
                sum += row[t] * row[t + lag];
                count += 1;
            }
        }
        acf.push(sum / count as f64);
    }
    Ok(acf)
}

/// Least-squares slope of `log(error)` against `log(step)`; the measured
/// convergence order of a refinement study.
pub fn convergence_order(errors: &[f64], steps: &[f64]) -> Result<f64> {
    if errors.len() < 3 || errors.len() != steps.len() {
        return Err(Error::TooFewSamples { need: 3, got: errors.len().min(steps.len()) });
    }
    if errors.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::NonPositiveError);
    }
    if steps.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::NonPositiveParameter { name: "step", value: 0.0 });
    }
    let xs: Vec<f64> = steps.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
