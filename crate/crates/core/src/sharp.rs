//! The leading-homogeneous-term extractor: log-log regression of sampled data
//! over an annulus of radii, one slope per direction, median-aggregated degree.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Accepted power-law fit g(r yhat) ~ profile(yhat) r^{-degree}.
#[derive(Debug, Clone)]
pub struct PowerFit {
    pub degree: f64,
    /// Complex amplitude per direction at the reference radius, scaled back to r = 1.
    pub profile: Vec<Complex64>,
    pub reference_radius: f64,
    /// Max relative deviation of |samples| from the fitted law, over included data.
    pub residual: f64,
    /// Spread (max - min) of the per-direction slopes.
    pub slope_spread: f64,
}

#[derive(Debug, Clone)]
pub enum SharpOutcome {
    /// All samples below the zero threshold: the leading term of a negligible function.
    Zero,
    Fit(PowerFit),
}

/// Fits the highest-order homogeneous term from samples `values[dir][k]` taken at
/// `radii[k] * yhat_dir`.
///
/// Directions whose peak magnitude stays below `zero_threshold` are excluded from
/// the slope estimate and reported with a zero profile. Errors with
/// `InconsistentDegree` when the per-direction slopes spread more than `tol`.
pub fn fit_homogeneous_sharp(
    radii: &[f64],
    values: &[Vec<Complex64>],
    zero_threshold: f64,
    tol: f64,
) -> Result<SharpOutcome> {
    if radii.len() < 4 {
        return Err(Error::Degenerate("sharp fit needs at least 4 radii"));
    }
    let span = radii.last().unwrap() / radii.first().unwrap();
    if span < 8.0 - 1e-9 {
        return Err(Error::Degenerate("sharp fit radii must span a factor >= 8"));
    }
    let global_max = values
        .iter()
        .flat_map(|row| row.iter().map(|v| v.norm()))
        .fold(0.0f64, f64::max);
    if global_max < zero_threshold {
        return Ok(SharpOutcome::Zero);
    }

    let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / logs.len() as f64;
    let var_log: f64 = logs.iter().map(|l| (l - mean_log) * (l - mean_log)).sum();
    // reference radius: the sample closest to the geometric mean
    let k_star = logs
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - mean_log)
                .abs()
                .partial_cmp(&(b.1 - mean_log).abs())
                .unwrap()
        })
        .map(|(k, _)| k)
        .unwrap();
    let r_star = radii[k_star];

    let mut slopes = Vec::new();
    let mut included = vec![false; values.len()];
    for (i, row) in values.iter().enumerate() {
        let peak = row.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
        if peak < zero_threshold {
            continue;
        }
        included[i] = true;
        let mut cov = 0.0;
        for (k, v) in row.iter().enumerate() {
            cov += (logs[k] - mean_log) * v.norm().max(1e-300).ln();
        }
        slopes.push(cov / var_log);
    }
    if slopes.is_empty() {
        return Ok(SharpOutcome::Zero);
    }
    let mut sorted = slopes.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let spread = sorted.last().unwrap() - sorted.first().unwrap();
    let degree = -median;
    if spread > tol {
        return Err(Error::InconsistentDegree { spread, tol });
    }

    let mut profile = Vec::with_capacity(values.len());
    let mut residual = 0.0f64;
    for (i, row) in values.iter().enumerate() {
        if !included[i] {
            profile.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let p = row[k_star] * r_star.powf(degree);
        profile.push(p);
        let amp = p.norm();
        if amp > 0.0 {
            for (k, v) in row.iter().enumerate() {
                let model = amp * radii[k].powf(-degree);
                residual = residual.max((v.norm() - model).abs() / model);
            }
        }
    }
    Ok(SharpOutcome::Fit(PowerFit {
        degree,
        profile,
        reference_radius: r_star,
        residual,
        slope_spread: spread,
    }))
}
