//! Pointwise (Nemytskii) drift `f(x)(s) = b_f(x(s))` and diffusion
//! `(g(x) u)(s) = b_g(x(s)) u(s)`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::problem::ScalarFn;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NemytskiiDrift {
    pub symbol: ScalarFn,
    /// Declared Lipschitz constant `C_f`.
    pub lipschitz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NemytskiiDiffusion {
    pub symbol: ScalarFn,
    /// Declared Lipschitz constant `C_g`.
    pub lipschitz: f64,
    /// Declared Lipschitz constant of the derivative.
    pub derivative_lipschitz: f64,
}

/// Probe points for the sampled checks.
fn probes() -> impl Iterator<Item = f64> {
    (-400..=400).map(|i| i as f64 * 0.025)
}

fn check_lipschitz(name: &str, f: impl Fn(f64) -> f64, c: f64) -> Result<()> {
    if !(c >= 0.0 && c.is_finite()) {
        return invalid(format!("{name}: Lipschitz constant must be finite and non-negative"));
    }
    let pts: Vec<f64> = probes().collect();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if !(fa.is_finite() && fb.is_finite()) {
            return invalid(format!("{name}: not finite near {a}"));
        }
        if (fa - fb).abs() > c * (b - a) * (1.0 + 1e-9) + 1e-12 {
            return invalid(format!(
                "{name}: slope {} near {a} exceeds the declared constant {c}",
                (fa - fb).abs() / (b - a)
            ));
        }
    }
    Ok(())
}

impl NemytskiiDrift {
    /// Uses the symbol's known Lipschitz bound.
    pub fn new(symbol: ScalarFn) -> Result<Self> {
        let lipschitz = symbol
            .lipschitz_bound()
            .ok_or_else(|| crate::Error::InvalidArgument("drift symbol has no Lipschitz bound".into()))?;
        Self::with_constant(symbol, lipschitz)
    }

    pub fn with_constant(symbol: ScalarFn, lipschitz: f64) -> Result<Self> {
        symbol.validate()?;
        check_lipschitz("drift", |u| symbol.eval(u), lipschitz)?;
        Ok(Self { symbol, lipschitz })
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.symbol.eval(u)
    }
}

impl NemytskiiDiffusion {
    pub fn new(symbol: ScalarFn) -> Result<Self> {
        let lipschitz = symbol
            .lipschitz_bound()
            .ok_or_else(|| crate::Error::InvalidArgument("diffusion symbol has no Lipschitz bound".into()))?;
        let derivative_lipschitz = symbol
            .derivative_lipschitz_bound()
            .ok_or_else(|| crate::Error::InvalidArgument("diffusion derivative has no Lipschitz bound".into()))?;
        Self::with_constants(symbol, lipschitz, derivative_lipschitz)
    }

    pub fn with_constants(symbol: ScalarFn, lipschitz: f64, derivative_lipschitz: f64) -> Result<Self> {
        symbol.validate()?;
        check_lipschitz("diffusion", |u| symbol.eval(u), lipschitz)?;
        check_lipschitz("diffusion derivative", |u| symbol.derivative(u), derivative_lipschitz)?;
        Ok(Self {
            symbol,
            lipschitz,
            derivative_lipschitz,
        })
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.symbol.eval(u)
    }

    /// `(b_g(u), b_g'(u))`
    pub fn eval_with_derivative(&self, u: f64) -> (f64, f64) {
        self.symbol.eval_with_derivative(u)
    }

    /// `g'(x)[v]` at one point: `b_g'(x) v`.
    pub fn gateaux(&self, x: f64, v: f64) -> f64 {
        self.symbol.derivative(x) * v
    }
}
