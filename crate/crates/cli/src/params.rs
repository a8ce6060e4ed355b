//! Resolution of model parameters from flags and config values.

use lrchain::ModelParams;
use serde::Serialize;

use crate::args::ParamArgs;
use crate::config::Settings;
use crate::error::{CliError, CliResult};

/// The five couplings, any of which may still be missing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PartialParams {
    pub mu: Option<f64>,
    pub t: f64,
    pub delta: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lock_beta: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamName {
    Mu,
    T,
    Delta,
    Alpha,
    Beta,
}

impl ParamName {
    pub fn parse(s: &str) -> CliResult<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mu" => Ok(ParamName::Mu),
            "t" => Ok(ParamName::T),
            "delta" => Ok(ParamName::Delta),
            "alpha" => Ok(ParamName::Alpha),
            "beta" => Ok(ParamName::Beta),
            other => Err(CliError::Input(format!(
                "unknown parameter `{other}` (expected mu, t, delta, alpha or beta)"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::Mu => "mu",
            ParamName::T => "t",
            ParamName::Delta => "delta",
            ParamName::Alpha => "alpha",
            ParamName::Beta => "beta",
        }
    }
}

impl PartialParams {
    pub fn resolve(args: &ParamArgs, s: &mut Settings) -> CliResult<Self> {
        let p = PartialParams {
            mu: s.get("mu", args.mu)?,
            t: s.or("t", args.t, 1.0)?,
            delta: s.get("delta", args.delta)?,
            alpha: s.get("alpha", args.alpha)?,
            beta: s.get("beta", args.beta)?,
            lock_beta: s.switch("lock_beta", args.lock_beta)?,
        };
        if p.lock_beta && p.beta.is_some() {
            return Err(CliError::Input(
                "--lock-beta and --beta are mutually exclusive".into(),
            ));
        }
        Ok(p)
    }

    pub fn set(&mut self, name: ParamName, v: f64) {
        match name {
            ParamName::Mu => self.mu = Some(v),
            ParamName::T => self.t = v,
            ParamName::Delta => self.delta = Some(v),
            ParamName::Alpha => self.alpha = Some(v),
            ParamName::Beta => self.beta = Some(v),
        }
    }

    pub fn require(&self, name: ParamName) -> CliResult<f64> {
        let v = match name {
            ParamName::Mu => self.mu,
            ParamName::T => Some(self.t),
            ParamName::Delta => self.delta,
            ParamName::Alpha => self.alpha,
            ParamName::Beta => self.beta_value(),
        };
        v.ok_or_else(|| {
            CliError::Input(format!(
                "missing --{0} (or config key `{0}`)",
                name.as_str()
            ))
        })
    }

    fn beta_value(&self) -> Option<f64> {
        if self.lock_beta {
            self.alpha
        } else {
            self.beta
        }
    }

    pub fn model(&self) -> CliResult<ModelParams> {
        Ok(ModelParams::new(
            self.require(ParamName::Mu)?,
            self.t,
            self.require(ParamName::Delta)?,
            self.require(ParamName::Alpha)?,
            self.require(ParamName::Beta)?,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn lock_beta_follows_alpha() {
        let args = ParamArgs {
            mu: Some(-5.0),
            delta: Some(1.3),
            alpha: Some(0.511),
            lock_beta: true,
            ..ParamArgs::default()
        };
        let p = PartialParams::resolve(&args, &mut Settings::default()).unwrap();
        assert_eq!(p.model().unwrap().beta(), 0.511);
    }

    #[test]
    fn missing_and_conflicting_values() {
        let args = ParamArgs {
            mu: Some(-5.0),
            ..ParamArgs::default()
        };
        let p = PartialParams::resolve(&args, &mut Settings::default()).unwrap();
        assert!(matches!(p.model(), Err(CliError::Input(_))));
        let mut s = Settings::new(parse_config("beta = 1\nlock_beta = true").unwrap());
        assert!(PartialParams::resolve(&ParamArgs::default(), &mut s).is_err());
    }

    #[test]
    fn invalid_couplings_are_input_errors() {
        let args = ParamArgs {
            mu: Some(-5.0),
            delta: Some(1.0),
            alpha: Some(-1.0),
            beta: Some(1.0),
            ..ParamArgs::default()
        };
        let p = PartialParams::resolve(&args, &mut Settings::default()).unwrap();
        assert_eq!(p.model().unwrap_err().exit_code(), 1);
    }
}
