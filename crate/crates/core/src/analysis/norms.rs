//! Monte Carlo estimates of `L_p(Omega; H)` norms and the two discrete
//! norms on grid processes: the sup norm `max_n ||Z(t_n)||_{L_p}` and the
//! Spijker norm `||Z(t_0)||_{L_p} + max_n ||sum_{j<=n} S_k^{n-j} Z(t_j)||_{L_p}`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `(mean y^p)^{1/p}` with a delta-method standard error.
pub fn lp_estimate(samples: &[f64], p: f64) -> LpEstimate {
    let m = samples.len();
    if m == 0 {
        return LpEstimate {
            value: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let pw: Vec<f64> = samples.iter().map(|y| y.abs().powf(p)).collect();
    let mean = pw.iter().sum::<f64>() / m as f64;
    let value = mean.powf(1.0 / p);
    if m < 2 || mean == 0.0 {
        return LpEstimate { value, stderr: 0.0 };
    }
    let var = pw.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (m - 1) as f64;
    let se_mean = (var / m as f64).sqrt();
    LpEstimate {
        value,
        stderr: mean.powf(1.0 / p - 1.0) / p * se_mean,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub stderr: f64,
    /// Estimate at every time node.
    pub per_node: Vec<LpEstimate>,
    /// Node where the maximum over time is attained.
    pub argmax: usize,
}

/// Per-node `L_p` estimates of `per_path[m][n]` and their maximum over `n`.
pub fn max_over_nodes(per_path: &[Vec<f64>], p: f64) -> Result<NormReport> {
    if per_path.is_empty() {
        return invalid("no paths");
    }
    let nodes = per_path[0].len();
    if per_path.iter().any(|v| v.len() != nodes) {
        return invalid("paths have different numbers of time nodes");
    }
    let mut column = vec![0.0; per_path.len()];
    let mut per_node = Vec::with_capacity(nodes);
    for n in 0..nodes {
        for (c, path) in column.iter_mut().zip(per_path) {
            *c = path[n];
        }
        per_node.push(lp_estimate(&column, p));
    }
    let argmax = per_node
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(NormReport {
        value: per_node[argmax].value,
        stderr: per_node[argmax].stderr,
        per_node,
        argmax,
    })
}

/// Spijker norm from per-path `||V(t_0)||` (column 0) and partial-sum norms
/// `||sum_{j<=n} S^{n-j} V(t_j)||` (columns `1..`).
pub fn spijker_from_partial_sums(per_path: &[Vec<f64>], p: f64) -> Result<NormReport> {
    if per_path.is_empty() || per_path[0].len() < 2 {
        return invalid("need at least one step");
    }
    let initial: Vec<f64> = per_path.iter().map(|v| v[0]).collect();
    let init = lp_estimate(&initial, p);
    let sums: Vec<Vec<f64>> = per_path.iter().map(|v| v[1..].to_vec()).collect();
    let tail = max_over_nodes(&sums, p)?;
    let mut per_node = vec![init];
    per_node.extend(tail.per_node.iter().copied());
    Ok(NormReport {
        value: init.value + tail.value,
        stderr: (init.stderr * init.stderr + tail.stderr * tail.stderr).sqrt(),
        per_node,
        argmax: tail.argmax + 1,
    })
}

/// `err / res`; the two-sided error bound predicts it stays in a fixed
/// interval as the grid is refined.
pub fn two_sided_ratio(err: &NormReport, res: &NormReport) -> f64 {
    err.value / res.value
}

/// `C(p) = (p (p - 1) / 2)^{1/2} (p / (p - 1))^{p/2 - 1}`.
pub fn burkholder_constant(p: f64) -> Result<f64> {
    if !(p >= 2.0 && p.is_finite()) {
        return invalid(format!("Burkholder constant needs p >= 2, got {p}"));
    }
    Ok((0.5 * p * (p - 1.0)).sqrt() * (p / (p - 1.0)).powf(0.5 * p - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn burkholder_values() {
        assert_eq!(burkholder_constant(2.0).unwrap(), 1.0);
        let c4 = burkholder_constant(4.0).unwrap();
        assert!((c4 - 6f64.sqrt() * 4.0 / 3.0).abs() < 1e-14);
        assert!(burkholder_constant(1.5).is_err());
    }

    #[test]
    fn lp_of_constant_samples() {
        let e = lp_estimate(&[2.0; 10], 3.0);
        assert!((e.value - 2.0).abs() < 1e-14);
        assert_eq!(e.stderr, 0.0);
    }
}
