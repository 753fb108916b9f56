//! Text serialization of trained models and binary weight-trajectory dumps.
//!
//! Model file:
//!
//! ```text
//! gaborboost-model 1
//! T <total rounds>
//! S <serial rounds>
//! delta_mi <threshold | inf>
//! epsilon_floor <floor>
//! seed <seed>
//! layout <U=.. V=.. step=.. width=.. height=.. | none>
//! bank <f_max=.. gamma=.. eta=.. radius=.. | none>
//! rounds <count>
//! <j>\t<lambda>\t<polarity>\t<c_n>      (one line per round)
//! ```
//!
//! Reals are written with 17 significant digits so they read back bit-exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::boosting::{BoostConfig, EnsembleModel, ModelRound, WeightTrajectory};
use crate::error::{Error, Result};
use crate::gabor::{FeatureLayout, GaborBankConfig};
use crate::weak::{Polarity, WeakClassifier};

const MODEL_MAGIC: &str = "gaborboost-model 1";
const TRAJECTORY_MAGIC: &str = "gaborboost-trajectory 1";

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

/// Bank parameters that are not already part of the feature layout.
fn bank_descriptor(bank: &GaborBankConfig) -> String {
    format!(
        "f_max={} gamma={} eta={} radius={}",
        real(bank.f_max),
        real(bank.gamma),
        real(bank.eta),
        bank.kernel_radius
    )
}

/// Layout plus bank, as shown in mismatch errors.
pub fn describe_geometry(layout: Option<&FeatureLayout>, bank: Option<&GaborBankConfig>) -> String {
    let layout = layout.map_or("none".to_string(), |l| l.to_string());
    let bank = bank.map_or("none".to_string(), bank_descriptor);
    format!("{layout} {bank}")
}

/// One round as a tab-separated line, without the newline.
pub fn classifier_line(round: &ModelRound) -> String {
    let h = &round.classifier;
    format!(
        "{}\t{}\t{}\t{}",
        h.feature_index,
        real(h.threshold),
        h.polarity.sign(),
        real(round.coefficient)
    )
}

pub fn model_to_string(model: &EnsembleModel) -> String {
    let cfg = &model.config;
    let mut s = String::new();
    let _ = writeln!(s, "{MODEL_MAGIC}");
    let _ = writeln!(s, "T {}", cfg.total_rounds);
    let _ = writeln!(s, "S {}", cfg.serial_rounds);
    let _ = writeln!(s, "delta_mi {}", real(cfg.mi_threshold));
    match cfg.epsilon_floor {
        Some(floor) => {
            let _ = writeln!(s, "epsilon_floor {}", real(floor));
        }
        None => {
            let _ = writeln!(s, "epsilon_floor auto");
        }
    }
    let _ = writeln!(s, "seed {}", cfg.seed);
    match &model.layout {
        Some(l) => {
            let _ = writeln!(s, "layout {l}");
        }
        None => {
            let _ = writeln!(s, "layout none");
        }
    }
    match &model.bank {
        Some(b) => {
            let _ = writeln!(s, "bank {}", bank_descriptor(b));
        }
        None => {
            let _ = writeln!(s, "bank none");
        }
    }
    let _ = writeln!(s, "rounds {}", model.rounds.len());
    for r in &model.rounds {
        let _ = writeln!(s, "{}", classifier_line(r));
    }
    s
}

pub fn write_model<W: Write>(model: &EnsembleModel, mut out: W) -> Result<()> {
    out.write_all(model_to_string(model).as_bytes())?;
    out.flush()?;
    Ok(())
}

struct Lines<'a> {
    lines: std::str::Lines<'a>,
    offset: usize,
}

impl<'a> Lines<'a> {
    /// Next line with its byte offset.
    fn next(&mut self) -> Result<(usize, &'a str)> {
        let at = self.offset;
        let line = self
            .lines
            .next()
            .ok_or_else(|| Error::format(at, "unexpected end of model file"))?;
        self.offset += line.len() + 1;
        Ok((at, line))
    }

    fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (at, line) = self.next()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok((at, v)),
            _ => Err(Error::format(at, format!("expected `{key} ...`, found `{line}`"))),
        }
    }
}

fn parse<T: std::str::FromStr>(at: usize, what: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::format(at, format!("bad {what} `{value}`")))
}

fn parse_bank(at: usize, value: &str, layout: Option<&FeatureLayout>) -> Result<GaborBankConfig> {
    let layout = layout.ok_or_else(|| Error::format(at, "bank given without a layout"))?;
    let mut cfg = GaborBankConfig {
        num_scales: layout.num_scales,
        num_orientations: layout.num_orientations,
        downsample_step: layout.step,
        ..GaborBankConfig::default()
    };
    let mut seen = 0;
    for token in value.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| Error::format(at, format!("malformed bank token `{token}`")))?;
        match k {
            "f_max" => cfg.f_max = parse(at, k, v)?,
            "gamma" => cfg.gamma = parse(at, k, v)?,
            "eta" => cfg.eta = parse(at, k, v)?,
            "radius" => cfg.kernel_radius = parse(at, k, v)?,
            _ => return Err(Error::format(at, format!("unknown bank key `{k}`"))),
        }
        seen += 1;
    }
    if seen != 4 {
        return Err(Error::format(at, "bank line needs f_max, gamma, eta and radius"));
    }
    cfg.validate().map_err(|e| Error::format(at, e.to_string()))?;
    Ok(cfg)
}

pub fn model_from_str(text: &str) -> Result<EnsembleModel> {
    let mut lines = Lines {
        lines: text.lines(),
        offset: 0,
    };
    let (at, magic) = lines.next()?;
    if magic != MODEL_MAGIC {
        return Err(Error::format(at, "not a model file"));
    }
    let (at, v) = lines.field("T")?;
    let total_rounds = parse(at, "T", v)?;
    let (at, v) = lines.field("S")?;
    let serial_rounds = parse(at, "S", v)?;
    let (at, v) = lines.field("delta_mi")?;
    let mi_threshold = parse(at, "delta_mi", v)?;
    let (at, v) = lines.field("epsilon_floor")?;
    let epsilon_floor = if v == "auto" {
        None
    } else {
        Some(parse(at, "epsilon_floor", v)?)
    };
    let (at, v) = lines.field("seed")?;
    let seed = parse(at, "seed", v)?;
    let config = BoostConfig {
        total_rounds,
        serial_rounds,
        mi_threshold,
        epsilon_floor,
        seed,
    };
    config.validate().map_err(|e| Error::format(0, e.to_string()))?;

    let (at, v) = lines.field("layout")?;
    let layout = if v == "none" {
        None
    } else {
        Some(v.parse::<FeatureLayout>().map_err(|e| Error::format(at, e.to_string()))?)
    };
    let (at, v) = lines.field("bank")?;
    let bank = if v == "none" {
        None
    } else {
        Some(parse_bank(at, v, layout.as_ref())?)
    };
    let (at, v) = lines.field("rounds")?;
    let count: usize = parse(at, "round count", v)?;
    if count > total_rounds {
        return Err(Error::format(at, format!("{count} rounds exceed T = {total_rounds}")));
    }

    let mut rounds = Vec::with_capacity(count);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..count {
        let (at, line) = lines.next()?;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::format(at, format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let feature_index: usize = parse(at, "feature index", fields[0])?;
        let threshold: f64 = parse(at, "threshold", fields[1])?;
        let polarity = Polarity::from_sign(parse(at, "polarity", fields[2])?)
            .ok_or_else(|| Error::format(at, format!("bad polarity `{}`", fields[2])))?;
        let coefficient: f64 = parse(at, "coefficient", fields[3])?;
        if !threshold.is_finite() || !coefficient.is_finite() || coefficient < 0.0 {
            return Err(Error::format(at, "threshold and coefficient must be finite, coefficient >= 0"));
        }
        if layout.is_some_and(|l| feature_index >= l.len()) {
            return Err(Error::format(at, format!("feature index {feature_index} outside layout")));
        }
        if !seen.insert(feature_index) {
            return Err(Error::format(at, format!("feature index {feature_index} repeated")));
        }
        rounds.push(ModelRound {
            classifier: WeakClassifier {
                feature_index,
                threshold,
                polarity,
            },
            coefficient,
        });
    }
    if let Ok((at, extra)) = lines.next() {
        if !extra.trim().is_empty() {
            return Err(Error::format(at, "trailing data after last round"));
        }
    }
    Ok(EnsembleModel {
        rounds,
        config,
        layout,
        bank,
    })
}

pub fn read_model<R: BufRead>(mut input: R) -> Result<EnsembleModel> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::format(0, "model file is not valid UTF-8"),
            _ => Error::Io(e),
        })?;
    model_from_str(&text)
}

/// Text header, then `rounds x samples` little-endian `f64`, round-major.
pub fn write_trajectory<W: Write>(trajectory: &WeightTrajectory, mut out: W) -> Result<()> {
    writeln!(out, "{TRAJECTORY_MAGIC}")?;
    writeln!(out, "rounds {}", trajectory.rounds.len())?;
    writeln!(out, "samples {}", trajectory.num_samples())?;
    writeln!(out, "end")?;
    for w in &trajectory.rounds {
        for x in w {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory<R: BufRead>(mut input: R) -> Result<WeightTrajectory> {
    let mut offset = 0;
    let mut header = Vec::new();
    for _ in 0..4 {
        let mut line = String::new();
        let n = input.read_line(&mut line)?;
        if n == 0 {
            return Err(Error::format(offset, "truncated trajectory header"));
        }
        header.push((offset, line.trim_end().to_string()));
        offset += n;
    }
    if header[0].1 != TRAJECTORY_MAGIC || header[3].1 != "end" {
        return Err(Error::format(0, "not a trajectory file"));
    }
    let count = |(at, line): &(usize, String), key: &str| -> Result<usize> {
        match line.split_once(' ') {
            Some((k, v)) if k == key => parse(*at, key, v),
            _ => Err(Error::format(*at, format!("expected `{key} ...`"))),
        }
    };
    let rounds = count(&header[1], "rounds")?;
    let samples = count(&header[2], "samples")?;
    let mut buf = vec![0u8; 8 * samples];
    let mut out = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::format(offset, "truncated trajectory data"))?;
        out.push(
            buf.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        );
        offset += buf.len();
    }
    Ok(WeightTrajectory { rounds: out })
}
