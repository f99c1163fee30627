use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::noise::CovarianceSpectrum;
use crate::problem::{NemytskiiDiffusion, NemytskiiDrift, ScalarFn};
use crate::spectral::{EigenBasis, SpectralVector};

/// `dX + [AX + f(X)] dt = g(X) dW`, `X(0) = X_0`, on `[0, T]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    pub drift: NemytskiiDrift,
    pub diffusion: NemytskiiDiffusion,
    pub noise: CovarianceSpectrum,
    /// Coefficients of `X_0` in the eigenbasis.
    pub initial: SpectralVector,
    pub horizon: f64,
    /// Spatial regularity `r` in `[0, 1)`.
    pub regularity: f64,
    /// Moment `p >= 2` of the error norms.
    pub moment: f64,
    /// Modes used for lifts and fractional norms of finite element functions.
    pub basis_modes: usize,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return invalid(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(0.0..1.0).contains(&self.regularity) {
            return invalid(format!("regularity must lie in [0, 1), got {}", self.regularity));
        }
        if !(self.moment >= 2.0 && self.moment.is_finite()) {
            return invalid(format!("moment must be at least 2, got {}", self.moment));
        }
        if let Some(beta) = self.noise.decay() {
            // ||A^{r/2} g(x) Q^{1/2}||_HS is finite only for r <= (beta - 1) / 2
            let limit = 0.5 * (beta - 1.0);
            if self.regularity > limit + 1e-12 {
                return invalid(format!(
                    "regularity {} exceeds {limit} allowed by the noise decay {beta}",
                    self.regularity
                ));
            }
        }
        if self.initial.is_empty() {
            return invalid("initial value needs at least one coefficient");
        }
        if self.initial.len() > self.basis_modes {
            return invalid("initial value has more modes than the lift basis");
        }
        if self.basis_modes < self.noise.n_modes() {
            return invalid("lift basis must contain every noise mode");
        }
        Ok(())
    }

    pub fn basis(&self) -> EigenBasis {
        EigenBasis::dirichlet_laplacian(self.basis_modes).expect("validated basis size")
    }

    /// `b_f(u) = u / (1 + u^2)`, `b_g(u) = (1 + u^2)^{-1/2} + 0.1 sin u`,
    /// `mu_j = j^{-2}`, `X_0 = e_1 + e_3 / 2`, `r = 1/2`, `p = 2`, `T = 1`.
    pub fn bump_problem(noise_modes: usize) -> Result<Self> {
        let spec = Self {
            drift: NemytskiiDrift::new(ScalarFn::Rational)?,
            diffusion: NemytskiiDiffusion::new(ScalarFn::Bump)?,
            noise: CovarianceSpectrum::power_law(noise_modes, 2.0)?,
            initial: SpectralVector::from_coefficients(vec![1.0, 0.0, 0.5])?,
            horizon: 1.0,
            regularity: 0.5,
            moment: 2.0,
            basis_modes: (4 * noise_modes).max(1024),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_config(cfg: &ProblemConfig) -> Result<Self> {
        let drift = match cfg.drift_lipschitz {
            Some(c) => NemytskiiDrift::with_constant(cfg.drift.clone(), c)?,
            None => NemytskiiDrift::new(cfg.drift.clone())?,
        };
        let diffusion = match (cfg.diffusion_lipschitz, cfg.diffusion_derivative_lipschitz) {
            (Some(c), Some(d)) => NemytskiiDiffusion::with_constants(cfg.diffusion.clone(), c, d)?,
            (None, None) => NemytskiiDiffusion::new(cfg.diffusion.clone())?,
            _ => return invalid("declare both diffusion constants or neither"),
        };
        let spec = Self {
            drift,
            diffusion,
            noise: CovarianceSpectrum::power_law(cfg.noise_modes, cfg.beta)?,
            initial: SpectralVector::from_coefficients(cfg.initial.clone())?,
            horizon: cfg.horizon,
            regularity: cfg.regularity,
            moment: cfg.moment,
            basis_modes: cfg.basis_modes.unwrap_or((4 * cfg.noise_modes).max(1024)),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Declarative form of a [`ProblemSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default = "default_drift")]
    pub drift: ScalarFn,
    #[serde(default)]
    pub drift_lipschitz: Option<f64>,
    #[serde(default = "default_diffusion")]
    pub diffusion: ScalarFn,
    #[serde(default)]
    pub diffusion_lipschitz: Option<f64>,
    #[serde(default)]
    pub diffusion_derivative_lipschitz: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_noise_modes")]
    pub noise_modes: usize,
    #[serde(default)]
    pub basis_modes: Option<usize>,
    #[serde(default = "default_regularity")]
    pub regularity: f64,
    #[serde(default = "default_moment")]
    pub moment: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_initial")]
    pub initial: Vec<f64>,
}

fn default_drift() -> ScalarFn {
    ScalarFn::Rational
}
fn default_diffusion() -> ScalarFn {
    ScalarFn::Bump
}
fn default_beta() -> f64 {
    2.0
}
fn default_noise_modes() -> usize {
    256
}
fn default_regularity() -> f64 {
    0.5
}
fn default_moment() -> f64 {
    2.0
}
fn default_horizon() -> f64 {
    1.0
}
fn default_initial() -> Vec<f64> {
    vec![1.0, 0.0, 0.5]
}

impl Default for ProblemConfig {
    fn default() -> Self {
        toml::from_str("").expect("all fields have defaults")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_build() {
        let spec = ProblemSpec::from_config(&ProblemConfig::default()).unwrap();
        assert_eq!(spec.noise.n_modes(), 256);
        assert_eq!(spec.initial.coefficient(3), 0.5);
    }

    #[test]
    fn parses_named_symbols() {
        let cfg: ProblemConfig = toml::from_str(
            r#"
            beta = 3.0
            regularity = 0.9
            diffusion = { name = "sine", offset = 1.0, amplitude = 0.5, frequency = 2.0 }
            "#,
        )
        .unwrap();
        let spec = ProblemSpec::from_config(&cfg).unwrap();
        assert_eq!(spec.diffusion.symbol.lipschitz_bound(), Some(1.0));
    }

    #[test]
    fn rejects_regularity_beyond_noise() {
        let cfg: ProblemConfig = toml::from_str("regularity = 0.7").unwrap();
        assert!(ProblemSpec::from_config(&cfg).is_err());
        assert!(toml::from_str::<ProblemConfig>("colour = 1").is_err());
    }
}
