//! Line-oriented `key=value` problem files.
//!
//! ```text
//! # comment
//! n = 2
//! K = 8
//! form = d            # d | t | t-derived
//! forcing.3.0 = 1     # coefficient of x^3 (log x)^0
//! perturb.C1.0 = 1/2
//! perturb.Cd.1 = -1
//! free.3 = 0
//! nonlinearity = none # none | model
//! gevrey.convergent_sigma = 0.15
//! gevrey.fit_residual = 0.5
//! ```

use std::collections::BTreeMap;

use crate::cma::{assemble_model, Form, ModelOptions};
use crate::diagnostics::GrowthThresholds;
use crate::error::{ConfigError, FuchsianError};
use crate::fuchsian::FuchsianProblem;
use crate::ring::{parse_rational, Rational};
use crate::series::{PolyhomSeries, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemConfig {
    pub n: u32,
    pub k: u32,
    pub form: Form,
    pub forcing: BTreeMap<(u32, u32), Rational>,
    pub c1: BTreeMap<u32, Rational>,
    pub cd: BTreeMap<u32, Rational>,
    pub free: BTreeMap<u32, Rational>,
    pub nonlinear: bool,
    pub thresholds: GrowthThresholds,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            n: 2,
            k: 8,
            form: Form::D,
            forcing: BTreeMap::new(),
            c1: BTreeMap::new(),
            cd: BTreeMap::new(),
            free: BTreeMap::new(),
            nonlinear: false,
            thresholds: GrowthThresholds::default(),
        }
    }
}

pub fn parse_form(s: &str) -> Option<Form> {
    match s {
        "d" => Some(Form::D),
        "t" => Some(Form::T),
        "t-derived" => Some(Form::TDerived),
        _ => None,
    }
}

pub fn form_name(f: Form) -> &'static str {
    match f {
        Form::D => "d",
        Form::T => "t",
        Form::TDerived => "t-derived",
    }
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let (key, value) = kv.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: 0,
            text: kv.to_string(),
        })?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let invalid = || ConfigError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        let rational = || parse_rational(value).map_err(|_| invalid());
        let index = |s: &str| s.parse::<u32>().map_err(|_| ConfigError::UnknownKey(key.to_string()));
        let float = || {
            value
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(invalid)
        };
        let parts: Vec<&str> = key.split('.').collect();
        match parts.as_slice() {
            ["n"] => self.n = value.parse().map_err(|_| invalid())?,
            ["K"] => self.k = value.parse().map_err(|_| invalid())?,
            ["form"] => self.form = parse_form(value).ok_or_else(invalid)?,
            ["nonlinearity"] => {
                self.nonlinear = match value {
                    "none" => false,
                    "model" => true,
                    _ => return Err(invalid()),
                }
            }
            ["forcing", i, j] => {
                self.forcing.insert((index(i)?, index(j)?), rational()?);
            }
            ["perturb", "C1", i] => {
                self.c1.insert(index(i)?, rational()?);
            }
            ["perturb", "Cd", i] => {
                self.cd.insert(index(i)?, rational()?);
            }
            ["free", m] => {
                self.free.insert(index(m)?, rational()?);
            }
            ["gevrey", "convergent_sigma"] => self.thresholds.convergent_sigma = float()?,
            ["gevrey", "fit_residual"] => self.thresholds.fit_residual = float()?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn var(&self) -> Var {
        match self.form {
            Form::D => Var::D,
            Form::T | Form::TDerived => Var::T,
        }
    }

    fn series(&self, terms: impl IntoIterator<Item = ((u32, u32), Rational)>) -> Result<PolyhomSeries<Rational>, FuchsianError> {
        Ok(PolyhomSeries::from_terms(self.var(), self.k, terms)?)
    }

    pub fn to_problem(&self) -> Result<FuchsianProblem<Rational>, FuchsianError> {
        let forcing = self.series(self.forcing.iter().map(|(k, v)| (*k, v.clone())))?;
        let plain = |m: &BTreeMap<u32, Rational>| -> Result<Option<PolyhomSeries<Rational>>, FuchsianError> {
            if m.is_empty() {
                return Ok(None);
            }
            Ok(Some(self.series(m.iter().map(|(i, v)| ((*i, 0), v.clone())))?))
        };
        let mut p = assemble_model(
            self.n,
            self.form,
            ModelOptions {
                c1: plain(&self.c1)?,
                cd: plain(&self.cd)?,
                forcing: Some(forcing),
                nonlinear: self.nonlinear,
            },
        )?;
        for (m, v) in &self.free {
            p = p.with_free(*m, v.clone());
        }
        Ok(p)
    }
}
