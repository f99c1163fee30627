//! Named scalar functions used as Nemytskii symbols.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFn {
    Zero,
    Constant {
        value: f64,
    },
    /// `slope * u`
    Linear {
        slope: f64,
    },
    /// `u / (1 + u^2)`
    Rational,
    /// `(1 + u^2)^{-1/2} + 0.1 sin u`
    Bump,
    /// `offset + amplitude * sin(frequency * u)`
    Sine {
        offset: f64,
        amplitude: f64,
        frequency: f64,
    },
    /// `factor * inner(u)`
    Scaled {
        factor: f64,
        inner: Box<ScalarFn>,
    },
}

impl ScalarFn {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ScalarFn::Zero => 0.0,
            ScalarFn::Constant { value } => *value,
            ScalarFn::Linear { slope } => slope * u,
            ScalarFn::Rational => u / (1.0 + u * u),
            ScalarFn::Bump => 1.0 / (1.0 + u * u).sqrt() + 0.1 * u.sin(),
            ScalarFn::Sine {
                offset,
                amplitude,
                frequency,
            } => offset + amplitude * (frequency * u).sin(),
            ScalarFn::Scaled { factor, inner } => factor * inner.eval(u),
        }
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, u: f64) -> (f64, f64) {
        match self {
            ScalarFn::Zero => (0.0, 0.0),
            ScalarFn::Constant { value } => (*value, 0.0),
            ScalarFn::Linear { slope } => (slope * u, *slope),
            ScalarFn::Rational => {
                let q = 1.0 + u * u;
                let d = 1.0 / q;
                (u / q, (1.0 - u * u) * d * d)
            }
            ScalarFn::Bump => {
                let q = 1.0 + u * u;
                let s = 1.0 / q.sqrt();
                (s + 0.1 * u.sin(), -u * s / q + 0.1 * u.cos())
            }
            ScalarFn::Sine {
                offset,
                amplitude,
                frequency,
            } => {
                let v = frequency * u;
                (offset + amplitude * v.sin(), amplitude * frequency * v.cos())
            }
            ScalarFn::Scaled { factor, inner } => {
                let (v, d) = inner.eval_with_derivative(u);
                (factor * v, factor * d)
            }
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        self.eval_with_derivative(u).1
    }

    /// Known bound on `sup |f'|`, `None` when unbounded.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        match self {
            ScalarFn::Zero | ScalarFn::Constant { .. } => Some(0.0),
            ScalarFn::Linear { slope } => Some(slope.abs()),
            ScalarFn::Rational => Some(1.0),
            // max of |u| (1 + u^2)^{-3/2} is 2 / (3 sqrt 3)
            ScalarFn::Bump => Some(2.0 / (3.0 * 3f64.sqrt()) + 0.1),
            ScalarFn::Sine {
                amplitude, frequency, ..
            } => Some((amplitude * frequency).abs()),
            ScalarFn::Scaled { factor, inner } => inner.lipschitz_bound().map(|l| l * factor.abs()),
        }
    }

    /// Known bound on `sup |f''|`.
    pub fn derivative_lipschitz_bound(&self) -> Option<f64> {
        match self {
            ScalarFn::Zero | ScalarFn::Constant { .. } | ScalarFn::Linear { .. } => Some(0.0),
            // |(2u^3 - 6u) / (1 + u^2)^3| peaks at 1.5 for u = +-(sqrt 2 - 1)
            ScalarFn::Rational => Some(1.5),
            // |(2u^2 - 1) (1 + u^2)^{-5/2}| <= 1
            ScalarFn::Bump => Some(1.1),
            ScalarFn::Sine {
                amplitude, frequency, ..
            } => Some((amplitude * frequency * frequency).abs()),
            ScalarFn::Scaled { factor, inner } => inner.derivative_lipschitz_bound().map(|l| l * factor.abs()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ScalarFn::Constant { value } if !value.is_finite() => invalid("constant must be finite"),
            ScalarFn::Linear { slope } if !slope.is_finite() => invalid("slope must be finite"),
            ScalarFn::Sine {
                offset,
                amplitude,
                frequency,
            } if !(offset.is_finite() && amplitude.is_finite() && frequency.is_finite()) => {
                invalid("sine parameters must be finite")
            }
            ScalarFn::Scaled { factor, inner } => {
                if !factor.is_finite() {
                    return invalid("scale factor must be finite");
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all() -> Vec<ScalarFn> {
        vec![
            ScalarFn::Zero,
            ScalarFn::Constant { value: 0.7 },
            ScalarFn::Linear { slope: -2.0 },
            ScalarFn::Rational,
            ScalarFn::Bump,
            ScalarFn::Sine {
                offset: 1.0,
                amplitude: 0.5,
                frequency: 3.0,
            },
            ScalarFn::Scaled {
                factor: 2.0,
                inner: Box::new(ScalarFn::Bump),
            },
        ]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for f in all() {
            for &u in &[-3.0, -0.7, 0.0, 0.2, 1.0, 4.5] {
                let h = 1e-6;
                let fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h);
                let (v, d) = f.eval_with_derivative(u);
                assert!((v - f.eval(u)).abs() < 1e-15);
                assert!((d - fd).abs() < 1e-7, "{f:?} at {u}");
            }
        }
    }

    #[test]
    fn declared_bounds_hold_on_a_grid() {
        for f in all() {
            let l = f.lipschitz_bound().unwrap();
            let l2 = f.derivative_lipschitz_bound().unwrap();
            for i in -2000..=2000 {
                let u = i as f64 * 0.005;
                let d = f.derivative(u);
                let d2 = (f.derivative(u + 1e-5) - f.derivative(u - 1e-5)) / 2e-5;
                assert!(d.abs() <= l + 1e-12, "{f:?} at {u}");
                assert!(d2.abs() <= l2 + 1e-6, "{f:?} at {u}");
            }
        }
    }
}
