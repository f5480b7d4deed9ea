//! Run configuration: a TOML file with `[params]` and `[run]` sections whose
//! keys are the field names below, optionally seeded from a built-in preset.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use zeno_core::{BareState, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Paper parameters, initial A, unmeasured plus Zeno and anti-Zeno resets.
    #[value(name = "paper-figure-3")]
    PaperFigure3,
    /// Ω = 0, initial B, unmeasured plus Zeno resets.
    #[value(name = "paper-figure-4")]
    PaperFigure4,
}

/// Reset interval used for the Zeno curve of both figure presets.
pub const FIGURE_ZENO_TAU: f64 = 1.0;
/// Reset interval used for the anti-Zeno curve of the figure 3 preset.
pub const FIGURE_ANTI_ZENO_TAU: f64 = 45.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub initial: BareState,
    /// Curves are sampled on `samples` evenly spaced times in `[0, t_max]`.
    pub t_max: f64,
    pub samples: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub lambda_samples: usize,
    /// Log-spaced τ grid for `zeno-scan`.
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_count: usize,
    /// Comparison horizon; 3× the unmeasured 1/e time when absent.
    pub horizon: Option<f64>,
    /// Extra measured curves for `survival`.
    pub zeno_tau: Option<f64>,
    pub anti_zeno_tau: Option<f64>,
    /// Schedule for `interrupted`.
    pub tau: f64,
    pub n: usize,
    /// Oracle grid size and cutoff; the cutoff defaults to `params.omega_max`.
    pub oracle_n: usize,
    pub oracle_omega_max: Option<f64>,
    pub plot: bool,
    pub log_p: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            initial: BareState::A,
            t_max: 50.0,
            samples: 501,
            lambda_min: 0.0,
            lambda_max: 5.0,
            lambda_samples: 2001,
            tau_min: 1e-2,
            tau_max: 60.0,
            tau_count: 50,
            horizon: None,
            zeno_tau: None,
            anti_zeno_tau: None,
            tau: 1.0,
            n: 20,
            oracle_n: 4000,
            oracle_omega_max: None,
            plot: false,
            log_p: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: ModelParams,
    pub run: RunSettings,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = RunConfig::default();
        cfg.run.zeno_tau = Some(FIGURE_ZENO_TAU);
        cfg.run.samples = 1201;
        match preset {
            Preset::PaperFigure3 => {
                cfg.run.t_max = 120.0;
                cfg.run.anti_zeno_tau = Some(FIGURE_ANTI_ZENO_TAU);
            }
            Preset::PaperFigure4 => {
                cfg.params.coupling = 0.0;
                cfg.run.initial = BareState::B;
                cfg.run.t_max = 30.0;
                cfg.run.samples = 601;
            }
        }
        cfg
    }

    /// Parses a config file. Keys missing from the file keep the values of
    /// `base`; unknown keys are rejected.
    pub fn parse(text: &str, base: &RunConfig) -> Result<Self, ConfigError> {
        let mut merged = match toml::Value::try_from(base).map_err(|e| ConfigError(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("config serialises to a table"),
        };
        let overlay: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        for (section, value) in overlay {
            match (merged.get_mut(&section), value) {
                (Some(toml::Value::Table(dst)), toml::Value::Table(src)) => dst.extend(src),
                (_, value) => {
                    merged.insert(section, value);
                }
            }
        }
        // Re-validate the merged document so unknown keys and bad types are
        // reported against the user's text.
        let cfg: RunConfig = toml::from_str(text)
            .map(|_: RunConfig| ())
            .and_then(|_| toml::Value::Table(merged).try_into())
            .map_err(|e: toml::de::Error| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, base: &RunConfig) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text, base).map_err(|e| ConfigError(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.params.validate().map_err(|e| ConfigError(format!("[params] {e}")))?;
        let r = &self.run;
        let bad = |field: &str, why: String| Err(ConfigError(format!("[run] {field}: {why}")));
        if !(r.t_max > 0.0 && r.t_max.is_finite()) {
            return bad("t_max", format!("must be finite and > 0, got {}", r.t_max));
        }
        if r.samples < 2 {
            return bad("samples", format!("must be >= 2, got {}", r.samples));
        }
        if !(r.lambda_min >= 0.0 && r.lambda_max > r.lambda_min && r.lambda_max <= self.params.omega_max) {
            return bad(
                "lambda_max",
                format!("need 0 <= lambda_min < lambda_max <= omega_max, got [{}, {}]", r.lambda_min, r.lambda_max),
            );
        }
        if r.lambda_samples < 2 {
            return bad("lambda_samples", format!("must be >= 2, got {}", r.lambda_samples));
        }
        if !(r.tau_min > 0.0 && r.tau_max >= r.tau_min && r.tau_max.is_finite()) {
            return bad("tau_max", format!("need 0 < tau_min <= tau_max, got [{}, {}]", r.tau_min, r.tau_max));
        }
        if r.tau_count == 0 {
            return bad("tau_count", "must be >= 1".into());
        }
        for (field, v) in [
            ("horizon", r.horizon),
            ("zeno_tau", r.zeno_tau),
            ("anti_zeno_tau", r.anti_zeno_tau),
            ("oracle_omega_max", r.oracle_omega_max),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return bad(field, format!("must be finite and > 0, got {v}"));
                }
            }
        }
        if !(r.tau > 0.0 && r.tau.is_finite()) {
            return bad("tau", format!("must be finite and > 0, got {}", r.tau));
        }
        if r.n == 0 {
            return bad("n", "must be >= 1".into());
        }
        if r.oracle_n < 2 {
            return bad("oracle_n", format!("must be >= 2, got {}", r.oracle_n));
        }
        Ok(())
    }

    /// The resolved configuration as TOML, for the CSV header.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }
}
