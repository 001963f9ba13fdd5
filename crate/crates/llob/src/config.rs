//! Flat key=value experiment configuration. Every key has a documented
//! default; unknown keys are rejected so typos fail loudly instead of
//! silently running the defaults.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::solver::SolverConfig;

/// Settings shared by the named experiments. Keys not used by a given
/// experiment are accepted and echoed but ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `d`: latent-order diffusivity (default 1).
    pub d: f64,
    /// `j`: order-flow current at the price (default 1).
    pub j: f64,
    /// `m0`: trading rate (default 1).
    pub m0: f64,
    /// `t_total`: execution horizon T (default 1).
    pub t_total: f64,
    /// `t_max`: observation horizon for decay-type runs (default 10).
    pub t_max: f64,
    /// `dt`: marching step (default 5e-4).
    pub dt: f64,
    /// `tol`: per-step fixed-point tolerance (default 1e-10).
    pub tol: f64,
    /// `n_grid`: book grid nodes (default 2001).
    pub n_grid: usize,
    /// `half_width`: book grid half-width (default 8).
    pub half_width: f64,
    /// `rate_lo`: log10 of the smallest m0/J in sweeps (default -3).
    pub rate_lo: f64,
    /// `rate_hi`: log10 of the largest m0/J in sweeps (default 3).
    pub rate_hi: f64,
    /// `n_points`: sweep sample count (default 61).
    pub n_points: usize,
    /// `gamma_info`: permanent-impact coefficient (default 0.1).
    pub gamma_info: f64,
    /// `zeta`: information correlation decay rate (default 1).
    pub zeta: f64,
    /// `n_trials`: random round-trip count in the audit (default 1000).
    pub n_trials: usize,
    /// `seed`: generator seed (default 42).
    pub seed: u64,
    /// `q_depth`: volume defining the bid/ask quotes (default 0.01).
    pub q_depth: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            d: 1.0,
            j: 1.0,
            m0: 1.0,
            t_total: 1.0,
            t_max: 10.0,
            dt: 5e-4,
            tol: 1e-10,
            n_grid: 2001,
            half_width: 8.0,
            rate_lo: -3.0,
            rate_hi: 3.0,
            n_points: 61,
            gamma_info: 0.1,
            zeta: 1.0,
            n_trials: 1000,
            seed: 42,
            q_depth: 0.01,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse value `{value}`")))
}

impl ExperimentConfig {
    /// Apply one `key=value` assignment; unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "d" => self.d = parse(key, value)?,
            "j" => self.j = parse(key, value)?,
            "m0" => self.m0 = parse(key, value)?,
            "t_total" => self.t_total = parse(key, value)?,
            "t_max" => self.t_max = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "n_grid" => self.n_grid = parse(key, value)?,
            "half_width" => self.half_width = parse(key, value)?,
            "rate_lo" => self.rate_lo = parse(key, value)?,
            "rate_hi" => self.rate_hi = parse(key, value)?,
            "n_points" => self.n_points = parse(key, value)?,
            "gamma_info" => self.gamma_info = parse(key, value)?,
            "zeta" => self.zeta = parse(key, value)?,
            "n_trials" => self.n_trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "q_depth" => self.q_depth = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parse the flat `key=value` text format: one assignment per line,
    /// `#` comments, blank lines ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value, got `{line}`", lineno + 1))
            })?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(&std::fs::read_to_string(path)?)?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<ModelParams<f64>> {
        ModelParams::validate_and_derive(self.d, Some(self.j), None, None)
    }

    pub fn solver_config(&self) -> Result<SolverConfig<f64>> {
        let config = SolverConfig { dt: self.dt, tol: self.tol, ..SolverConfig::for_horizon(1.0) };
        config.validate()?;
        Ok(config)
    }

    /// All keys with their current values, in key order, for the manifest.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        vec![
            ("d", self.d.to_string()),
            ("dt", self.dt.to_string()),
            ("gamma_info", self.gamma_info.to_string()),
            ("half_width", self.half_width.to_string()),
            ("j", self.j.to_string()),
            ("m0", self.m0.to_string()),
            ("n_grid", self.n_grid.to_string()),
            ("n_points", self.n_points.to_string()),
            ("n_trials", self.n_trials.to_string()),
            ("q_depth", self.q_depth.to_string()),
            ("rate_hi", self.rate_hi.to_string()),
            ("rate_lo", self.rate_lo.to_string()),
            ("seed", self.seed.to_string()),
            ("t_max", self.t_max.to_string()),
            ("t_total", self.t_total.to_string()),
            ("tol", self.tol.to_string()),
            ("zeta", self.zeta.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse_into_valid_params() {
        let cfg = ExperimentConfig::default();
        assert!(cfg.params().is_ok());
        assert!(cfg.solver_config().is_ok());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut cfg = ExperimentConfig::default();
        let err = cfg.set("m_0", "1.0").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
    }

    #[test]
    fn text_format_round_trips() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_text("# comment\n\nm0 = 2.5\nseed=7  # inline\n").unwrap();
        assert_eq!(cfg.m0, 2.5);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn malformed_line_is_a_config_error() {
        let mut cfg = ExperimentConfig::default();
        assert!(matches!(cfg.apply_text("m0 2.5").unwrap_err(), Error::Config(_)));
        assert!(matches!(cfg.apply_text("dt=oops").unwrap_err(), Error::Config(_)));
    }

    #[test]
    fn every_field_appears_in_the_echo() {
        let cfg = ExperimentConfig::default();
        let entries = cfg.entries();
        for key in ["d", "j", "m0", "t_total", "dt", "seed", "n_trials"] {
            assert!(entries.iter().any(|(k, _)| *k == key), "missing {key}");
        }
        // echoed keys must all be settable
        let mut cfg2 = ExperimentConfig::default();
        for (k, v) in &entries {
            cfg2.set(k, v).unwrap();
        }
        assert_eq!(cfg, cfg2);
    }
}
