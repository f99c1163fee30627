use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub param: f64,
    pub error: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    /// Points in ladder order, coarsest first.
    pub points: Vec<RatePoint>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Parameters of rungs left out of the fit.
    pub dropped: Vec<f64>,
    pub weighted: bool,
}

/// Below this the coarsest rung is taken as pre-asymptotic and dropped once.
pub const MIN_R_SQUARED: f64 = 0.98;

fn least_squares(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..x.len() {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxx += w[i] * dx * dx;
        sxy += w[i] * dx * dy;
        syy += w[i] * dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, intercept, r2)
}

fn fit_once(points: &[RatePoint], weighted: bool) -> (f64, f64, f64) {
    let x: Vec<f64> = points.iter().map(|p| p.param.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.error.ln()).collect();
    // stderr of log(error) is stderr / error
    let w: Vec<f64> = points
        .iter()
        .map(|p| {
            let rel = p.stderr / p.error;
            if weighted && rel > 0.0 {
                1.0 / (rel * rel)
            } else {
                1.0
            }
        })
        .collect();
    least_squares(&x, &y, &w)
}

/// Least-squares slope of `log error` against `log param`.
///
/// Points must be in ladder order, coarsest first. If the fit explains less
/// than [`MIN_R_SQUARED`] and at least four points are available, the
/// coarsest point is dropped and the fit repeated.
pub fn fit_rate(points: &[RatePoint], weighted: bool) -> Result<RateReport> {
    if points.len() < 3 {
        return invalid(format!("rate fit needs at least 3 points, got {}", points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.param > 0.0 && p.error > 0.0) || !p.param.is_finite() || !p.error.is_finite()) {
        return invalid(format!("rate fit needs positive finite values, got ({}, {})", p.param, p.error));
    }
    let distinct = points.iter().any(|p| p.param != points[0].param);
    if !distinct {
        return invalid("rate fit needs at least two distinct parameters");
    }
    let (mut slope, mut intercept, mut r2) = fit_once(points, weighted);
    let mut dropped = Vec::new();
    if r2 < MIN_R_SQUARED && points.len() >= 4 {
        let (s, i, r) = fit_once(&points[1..], weighted);
        slope = s;
        intercept = i;
        r2 = r;
        dropped.push(points[0].param);
    }
    Ok(RateReport {
        points: points.to_vec(),
        slope,
        intercept,
        r_squared: r2,
        dropped,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(rate: f64) -> Vec<RatePoint> {
        (4..=8)
            .map(|e| {
                let k = 0.5f64.powi(e);
                RatePoint {
                    param: k,
                    error: 3.0 * k.powf(rate),
                    stderr: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn exact_power_laws() {
        for rate in [1.0, 0.75, -1.0] {
            let r = fit_rate(&exact(rate), false).unwrap();
            assert!((r.slope - rate).abs() < 1e-10);
            assert!((r.r_squared - 1.0).abs() < 1e-12);
            assert!(r.dropped.is_empty());
            assert!((r.intercept - 3f64.ln()).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_short_or_nonpositive_input() {
        assert!(fit_rate(&exact(1.0)[..2], false).is_err());
        let mut p = exact(1.0);
        p[1].error = 0.0;
        assert!(fit_rate(&p, false).is_err());
    }

    #[test]
    fn drops_a_preasymptotic_coarsest_rung() {
        let mut p = exact(1.0);
        p[0].error *= 20.0;
        let r = fit_rate(&p, false).unwrap();
        assert_eq!(r.dropped, vec![p[0].param]);
        assert!((r.slope - 1.0).abs() < 1e-10);
    }
}
