//! Least-squares power laws on log-log data.

use crate::error::{ExperimentError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub slope: f64,
    /// Natural-log intercept: `ln y ≈ intercept + slope · ln x`.
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLaw> {
    if xs.len() != ys.len() {
        return Err(ExperimentError::Domain(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(ExperimentError::Domain(format!("need at least 3 points, got {}", xs.len())));
    }
    if let Some(bad) = xs.iter().chain(ys).find(|v| **v <= 0.0 || !v.is_finite()) {
        return Err(ExperimentError::Domain(format!("power-law fit needs positive finite data, got {bad}")));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::Domain("all abscissae coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PowerLaw { slope, intercept, residual })
}
