//! Tunable constants shared by the pipelines.
//!
//! The guarantees only hold for "sufficiently small" constants in a fixed
//! hierarchy, which is useless at desk scale. Every constant is therefore
//! explicit, with a default, and the pipelines report which hypotheses
//! failed instead of refusing to run. Unset optional values are derived
//! per pipeline.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    UnknownKey(String),
    #[error("bad value `{value}` for `{key}`")]
    BadValue { key: String, value: String },
    #[error("expected key=value, got `{0}`")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    /// Relative slack in every length target.
    pub eps: f64,
    /// Leakiness constant for mops; also the reservoir rate when a mop
    /// falls back to the dense route.
    pub gamma: f64,
    /// Escape threshold of the Z-growth process. Defaults to `θ/4`.
    pub gamma_prime: Option<f64>,
    pub nu: Option<f64>,
    pub tau: Option<f64>,
    /// Minimum semidegree as a fraction of `n`.
    pub alpha: Option<f64>,
    /// Stage increment of the rearranger. Defaults to `0.05·ε`.
    pub delta: Option<f64>,
    /// Allowed per-vertex degree loss when passing to an expander, as a
    /// fraction of `n`.
    pub degree_loss: f64,
    /// Colour budget of one expansion step. Defaults to `ε/8`.
    pub theta: Option<f64>,
    /// Reservoir sampling rate.
    pub p: Option<f64>,
    /// Exclusion budget per connection. Defaults to `p³ν/100`.
    pub beta: Option<f64>,
    /// Max degree over min degree.
    pub big_k: Option<f64>,
    pub k: usize,
    /// Walk length bound of one expansion step. Defaults to `⌈4/δ⌉`.
    pub ell: Option<usize>,
    pub s0: usize,
    pub s1: usize,
    pub rho0: f64,
    pub ratio: f64,
    /// Whole-reservoir resamples after a failed connection.
    pub resamples: usize,
    /// Draws allowed to satisfy the size and degree conditions.
    pub retry_cap: usize,
    pub cert_samples: u64,
    /// Search nodes per connection.
    pub connect_budget: usize,
    /// Propagate stage failures instead of falling back.
    pub strict: bool,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            eps: 0.5,
            gamma: 0.05,
            gamma_prime: None,
            nu: None,
            tau: None,
            alpha: None,
            delta: None,
            degree_loss: 0.1,
            theta: None,
            p: None,
            beta: None,
            big_k: None,
            k: 2,
            ell: None,
            s0: 8,
            s1: 4,
            rho0: 1e-4,
            ratio: 8.0,
            resamples: 5,
            retry_cap: 20,
            cert_samples: 1000,
            connect_budget: 200_000,
            strict: false,
        }
    }
}

impl ParamSet {
    /// Applies a `key=value,key=value` list on top of the defaults.
    pub fn parse(list: &str) -> Result<Self, ParamError> {
        let mut p = ParamSet::default();
        p.apply(list)?;
        Ok(p)
    }

    pub fn apply(&mut self, list: &str) -> Result<(), ParamError> {
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = item.split_once('=').ok_or_else(|| ParamError::Malformed(item.to_string()))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ParamError> {
        let bad = || ParamError::BadValue { key: key.to_string(), value: value.to_string() };
        let f = || value.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(bad);
        let u = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "eps" => self.eps = f()?,
            "gamma" => self.gamma = f()?,
            "gamma_prime" => self.gamma_prime = Some(f()?),
            "nu" => self.nu = Some(f()?),
            "tau" => self.tau = Some(f()?),
            "alpha" => self.alpha = Some(f()?),
            "delta" => self.delta = Some(f()?),
            "degree_loss" => self.degree_loss = f()?,
            "theta" => self.theta = Some(f()?),
            "p" => self.p = Some(f()?),
            "beta" => self.beta = Some(f()?),
            "K" => self.big_k = Some(f()?),
            "k" => self.k = u()?,
            "ell" => self.ell = Some(u()?),
            "s0" => self.s0 = u()?,
            "s1" => self.s1 = u()?,
            "rho0" => self.rho0 = f()?,
            "ratio" => self.ratio = f()?,
            "resamples" => self.resamples = u()?,
            "retry_cap" => self.retry_cap = u()?,
            "cert_samples" => self.cert_samples = value.parse().map_err(|_| bad())?,
            "connect_budget" => self.connect_budget = u()?,
            "strict" => self.strict = value.parse().map_err(|_| bad())?,
            _ => return Err(ParamError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn theta(&self) -> f64 {
        self.theta.unwrap_or(self.eps / 8.0)
    }

    pub fn gamma_prime(&self) -> f64 {
        self.gamma_prime.unwrap_or(self.theta() / 4.0)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.05 * self.eps)
    }

    pub fn ell(&self) -> usize {
        self.ell.unwrap_or((4.0 / self.delta()).ceil() as usize)
    }

    /// Reservoir rate; `fallback` is the pipeline's own choice.
    pub fn p_or(&self, fallback: f64) -> f64 {
        self.p.unwrap_or(fallback)
    }

    pub fn beta_for(&self, p: f64, nu: f64) -> f64 {
        self.beta.unwrap_or(p * p * p * nu / 100.0)
    }

    /// Hypotheses of the connecting step that fail at this size, as
    /// human-readable lines. Empty means all hold.
    pub fn reservoir_warnings(&self, n: usize, nu: f64, tau: f64, alpha: f64, p: f64) -> Vec<String> {
        let mut out = Vec::new();
        if nu + tau > alpha + 1e-12 {
            out.push(format!("ν+τ = {:.4} exceeds α = {alpha:.4}", nu + tau));
        }
        let lhs = p.powi(3) * nu * nu * n as f64;
        let rhs = 144.0 * (n as f64).ln();
        if lhs < rhs {
            out.push(format!("p³ν²n = {lhs:.3e} is below 144·ln n = {rhs:.1}"));
        }
        out
    }
}
