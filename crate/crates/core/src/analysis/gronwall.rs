//! Discrete Gronwall inequality with a weakly singular kernel:
//! `x_n <= C1 + C2 k sum_{j=1}^n (t_n - t_{j-1})^{-1+eta} x_{j-1}`
//! implies `x_n <= C C1` with `C = E_eta(C2 Gamma(eta) T^eta)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scheme::TimeGrid;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    /// The hypothesis holds at every node.
    pub holds: bool,
    pub first_violation: Option<usize>,
    /// `max_n x_n / C1`.
    pub implied_constant: f64,
    /// Bound on the implied constant from the hypothesis alone.
    pub lemma_constant: f64,
}

fn check_args(c1: f64, c2: f64, eta: f64) -> Result<()> {
    if !(c1 > 0.0 && c2 >= 0.0 && c1.is_finite() && c2.is_finite()) {
        return invalid("need C1 > 0 and C2 >= 0");
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return invalid(format!("eta must lie in (0, 1], got {eta}"));
    }
    Ok(())
}

fn kernel_sum(x: &[f64], n: usize, eta: f64, grid: &TimeGrid) -> f64 {
    let k = grid.step();
    (1..=n)
        .map(|j| (grid.time(n) - grid.time(j - 1)).powf(eta - 1.0) * x[j - 1])
        .sum::<f64>()
        * k
}

/// Mittag-Leffler function `E_eta(z) = sum_m z^m / Gamma(eta m + 1)`, `z >= 0`.
pub fn mittag_leffler(eta: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    let lz = z.ln();
    let mut sum = 0.0;
    for m in 0..100_000 {
        let term = (m as f64 * lz - libm::lgamma(eta * m as f64 + 1.0)).exp();
        sum += term;
        if m as f64 * eta > z.powf(1.0 / eta) + 10.0 && term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// `E_eta(C2 Gamma(eta) T^eta)`.
pub fn lemma_constant(c2: f64, eta: f64, horizon: f64) -> f64 {
    mittag_leffler(eta, c2 * libm::tgamma(eta) * horizon.powf(eta))
}

pub fn gronwall_check(x: &[f64], c1: f64, c2: f64, eta: f64, grid: &TimeGrid) -> Result<GronwallReport> {
    check_args(c1, c2, eta)?;
    if x.len() != grid.n_steps() + 1 {
        return invalid("sequence must have one entry per time node");
    }
    let mut first_violation = None;
    for n in 0..x.len() {
        let bound = c1 + c2 * kernel_sum(x, n, eta, grid);
        if x[n] > bound * (1.0 + 1e-12) && first_violation.is_none() {
            first_violation = Some(n);
        }
    }
    Ok(GronwallReport {
        holds: first_violation.is_none(),
        first_violation,
        implied_constant: x.iter().fold(0.0f64, |m, v| m.max(*v)) / c1,
        lemma_constant: lemma_constant(c2, eta, grid.horizon()),
    })
}

/// The sequence that satisfies the hypothesis with equality.
pub fn gronwall_extremal(c1: f64, c2: f64, eta: f64, grid: &TimeGrid) -> Result<Vec<f64>> {
    check_args(c1, c2, eta)?;
    let mut x = Vec::with_capacity(grid.n_steps() + 1);
    x.push(c1);
    for n in 1..=grid.n_steps() {
        let v = c1 + c2 * kernel_sum(&x, n, eta, grid);
        x.push(v);
    }
    Ok(x)
}
