//! Least-squares power-law fits in log-log coordinates.

use serde::Serialize;

use crate::error::{AppError, Result};

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln T, ln metric)` pairs the fit was computed on.
    pub points: Vec<(f64, f64)>,
}

/// Fits `ln metric = slope · ln T + intercept` by ordinary least squares.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    fit_slope_with(points, false)
}

/// Like [`fit_slope`]; with `epsilon_offset`, nonpositive metrics are
/// replaced by `f64::EPSILON` instead of rejected.
pub fn fit_slope_with(points: &[(f64, f64)], epsilon_offset: bool) -> Result<SlopeFit> {
    if points.len() < MIN_FIT_POINTS {
        return Err(AppError::Fit(format!(
            "need at least {MIN_FIT_POINTS} points, got {}",
            points.len()
        )));
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(t, y) in points {
        if !(t > 0.0) {
            return Err(AppError::Fit(format!("nonpositive abscissa {t}")));
        }
        let y = match y {
            y if y > 0.0 => y,
            _ if epsilon_offset => f64::EPSILON,
            y => return Err(AppError::Fit(format!("nonpositive metric {y} at T = {t}"))),
        };
        logs.push((t.ln(), y.ln()));
    }
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(AppError::Fit("all abscissae are equal".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: logs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(c: f64, p: f64) -> Vec<(f64, f64)> {
        (10..=16).map(|k| 2f64.powi(k)).map(|t| (t, c * t.powf(p))).collect()
    }

    #[test]
    fn recovers_exponents() {
        for p in [1.0, 0.5, 1.0 / 6.0, 0.25, -0.3] {
            let f = fit_slope(&law(3.7, p)).unwrap();
            assert!((f.slope - p).abs() < 1e-9, "{p}: {}", f.slope);
            assert!((f.intercept - 3.7f64.ln()).abs() < 1e-9);
            assert!((f.r_squared - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn r_squared_in_unit_interval() {
        let pts = [(1.0, 2.0), (2.0, 1.0), (4.0, 3.0), (8.0, 1.5), (16.0, 2.2)];
        let f = fit_slope(&pts).unwrap();
        assert!((0.0..=1.0).contains(&f.r_squared));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_slope(&law(1.0, 0.5)[..3]).is_err());
        let mut pts = law(1.0, 0.5);
        pts[2].1 = 0.0;
        assert!(fit_slope(&pts).is_err());
        assert!(fit_slope_with(&pts, true).is_ok());
    }
}
