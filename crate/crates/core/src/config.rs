//! Flat `key = value` run configuration with `#` comments.
//!
//! Bank keys: `f_max`, `gamma`, `eta`, `scales`, `orientations`,
//! `kernel_radius`, `step`. Boosting keys: `rounds`, `serial_rounds`,
//! `delta_mi` (`inf` disables the filter), `epsilon_floor`, `seed`,
//! `workers`.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::boosting::BoostConfig;
use crate::error::{Error, Result};
use crate::gabor::GaborBankConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub bank: GaborBankConfig,
    pub boost: BoostConfig,
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            bank: GaborBankConfig::default(),
            boost: BoostConfig::default(),
            workers: 1,
        }
    }
}

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::param(format!("invalid value `{raw}` for `{key}`")))
}

/// Reads a real, accepting `inf` / `infinity`.
pub fn parse_real(raw: &str) -> Result<f64> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        s => s
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| Error::param(format!("`{raw}` is not a number"))),
    }
}

impl RunConfig {
    /// Applies one key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        match key {
            "f_max" => self.bank.f_max = parse_real(raw)?,
            "gamma" => self.bank.gamma = parse_real(raw)?,
            "eta" => self.bank.eta = parse_real(raw)?,
            "scales" => self.bank.num_scales = value(key, raw)?,
            "orientations" => self.bank.num_orientations = value(key, raw)?,
            "kernel_radius" => self.bank.kernel_radius = value(key, raw)?,
            "step" => self.bank.downsample_step = value(key, raw)?,
            "rounds" => self.boost.total_rounds = value(key, raw)?,
            "serial_rounds" => self.boost.serial_rounds = value(key, raw)?,
            "delta_mi" => self.boost.mi_threshold = parse_real(raw)?,
            "epsilon_floor" => {
                self.boost.epsilon_floor = match raw {
                    "auto" => None,
                    _ => Some(parse_real(raw)?),
                }
            }
            "seed" => self.boost.seed = value(key, raw)?,
            "workers" => self.workers = value(key, raw)?,
            _ => return Err(Error::param(format!("unknown configuration key `{key}`"))),
        }
        Ok(())
    }

    /// Defaults overridden by the keys in `text`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| Error::param(format!("config line {}: expected `key = value`", n + 1)))?;
            cfg.set(key.trim(), raw.trim())
                .map_err(|e| Error::param(format!("config line {}: {e}", n + 1)))?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        RunConfig::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.bank.validate()?;
        self.boost.validate()?;
        if self.workers == 0 {
            return Err(Error::param("workers must be at least 1"));
        }
        Ok(())
    }
}
