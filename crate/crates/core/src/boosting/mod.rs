//! AdaBoost, Parallel AdaBoost and the mutual-information redundancy filter.
//!
//! Serial rounds follow discrete AdaBoost: pick the lowest-error admissible
//! stump, weight it by `c = ln((1 - eps) / eps) / 2`, and reweight samples
//! by `exp(-c * y * h(x))`. Parallel AdaBoost runs `S` such rounds, fits a
//! Gamma distribution to every sample's weight history and then trains the
//! remaining `T - S` rounds independently on weights drawn from those fits.
//!
//! A stump is admissible when its feature has not been used yet and, with
//! the filter enabled, its largest mutual information against the outputs
//! of every selected stump is at most `mi_threshold` bits.

pub mod gamma;
pub mod mi;

use std::collections::HashSet;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gabor::{FeatureLayout, GaborBankConfig};
use crate::pairs::TrainingSet;
use crate::weak::{classify, Candidate, StumpTable, WeakClassifier, WeightVector};

pub use gamma::{fit_gamma, sample_weights, GammaParams};
pub use mi::{entropy_binary, mutual_information_binary, ClassifierResponseTable};

/// Default redundancy threshold, in bits.
pub const DEFAULT_MI_THRESHOLD: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct BoostConfig {
    pub total_rounds: usize,
    /// Rounds of ordinary AdaBoost before the parallel phase.
    pub serial_rounds: usize,
    /// `f64::INFINITY` disables the filter.
    pub mi_threshold: f64,
    /// Clamp for the round error; `None` means `1 / (2N)`.
    pub epsilon_floor: Option<f64>,
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            total_rounds: 200,
            serial_rounds: 50,
            mi_threshold: DEFAULT_MI_THRESHOLD,
            epsilon_floor: None,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_rounds == 0 {
            return Err(Error::param("total rounds must be at least 1"));
        }
        if self.serial_rounds == 0 || self.serial_rounds > self.total_rounds {
            return Err(Error::param(format!(
                "serial rounds must be in 1..={}, got {}",
                self.total_rounds, self.serial_rounds
            )));
        }
        if self.mi_threshold.is_nan() || self.mi_threshold < 0.0 {
            return Err(Error::param(format!(
                "mutual-information threshold must be >= 0, got {}",
                self.mi_threshold
            )));
        }
        if let Some(floor) = self.epsilon_floor {
            if !(floor > 0.0 && floor < 0.5) {
                return Err(Error::param(format!("epsilon floor must be in (0, 0.5), got {floor}")));
            }
        }
        Ok(())
    }

    pub fn filter_enabled(&self) -> bool {
        self.mi_threshold.is_finite()
    }

    fn floor_for(&self, n: usize) -> f64 {
        self.epsilon_floor.unwrap_or(0.5 / n as f64)
    }
}

/// Clamps the round error into `[floor, 1 - floor]` (and never above 1/2)
/// and returns it with its coefficient `ln((1 - eps) / eps) / 2`.
pub fn round_coefficient(error: f64, floor: f64) -> (f64, f64) {
    let eps = error.max(floor).min(1.0 - floor).min(0.5);
    (eps, 0.5 * ((1.0 - eps) / eps).ln())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelRound {
    pub classifier: WeakClassifier,
    pub coefficient: f64,
}

/// Strong classifier `H(x) = sum_n c_n h_n(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleModel {
    pub rounds: Vec<ModelRound>,
    /// Settings the model was trained with; the epsilon floor is resolved.
    pub config: BoostConfig,
    pub layout: Option<FeatureLayout>,
    /// Bank used to extract the features the layout describes.
    pub bank: Option<GaborBankConfig>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub score: f64,
    pub decision: i8,
}

impl EnsembleModel {
    /// Feature indices in round order.
    pub fn selected_features(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.classifier.feature_index).collect()
    }

    pub fn predict(&self, values: &[f64]) -> Result<Prediction> {
        predict(self, values)
    }
}

/// Weighted vote of the model's stumps; a zero score counts as `+1`.
pub fn predict(model: &EnsembleModel, values: &[f64]) -> Result<Prediction> {
    if let Some(layout) = model.layout {
        if values.len() != layout.len() {
            return Err(Error::param(format!(
                "vector has {} components, model layout has {}",
                values.len(),
                layout.len()
            )));
        }
    }
    if let Some(r) = model.rounds.iter().find(|r| r.classifier.feature_index >= values.len()) {
        return Err(Error::param(format!(
            "model uses feature {} but vector has {} components",
            r.classifier.feature_index,
            values.len()
        )));
    }
    let score: f64 = model
        .rounds
        .iter()
        .map(|r| r.coefficient * f64::from(classify(&r.classifier, values)))
        .sum();
    Ok(Prediction {
        score,
        decision: if score >= 0.0 { 1 } else { -1 },
    })
}

/// Idealized critical path in round units: `S` serial rounds, then the
/// `T - S` parallel rounds spread over `workers`.
pub fn cost_estimate(cfg: &BoostConfig, workers: usize) -> Result<(usize, usize)> {
    if workers == 0 {
        return Err(Error::param("workers must be at least 1"));
    }
    cfg.validate()?;
    let parallel = cfg.total_rounds - cfg.serial_rounds;
    Ok((cfg.serial_rounds, parallel.div_ceil(workers)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Serial,
    Parallel,
}

/// What happened in one boosting round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    /// 1-based.
    pub round: usize,
    pub phase: Phase,
    pub classifier: WeakClassifier,
    /// Weighted error before clamping.
    pub error: f64,
    pub coefficient: f64,
    /// `max_t I(h, h_t)` against earlier rounds, when the filter is active.
    pub max_mi: Option<f64>,
}

/// Weights used in each serial round, `rounds[n][i]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightTrajectory {
    pub rounds: Vec<Vec<f64>>,
}

impl WeightTrajectory {
    pub fn num_samples(&self) -> usize {
        self.rounds.first().map_or(0, Vec::len)
    }

    /// History of sample `i` across the recorded rounds.
    pub fn sample(&self, i: usize) -> Vec<f64> {
        self.rounds.iter().map(|w| w[i]).collect()
    }

    pub fn fit(&self) -> Result<Vec<GammaParams>> {
        (0..self.num_samples()).map(|i| fit_gamma(&self.sample(i))).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub workers: usize,
    pub record_trajectory: bool,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            workers: 1,
            record_trajectory: false,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseTiming {
    pub serial: Duration,
    pub parallel: Duration,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: EnsembleModel,
    pub log: Vec<RoundRecord>,
    pub trajectory: Option<WeightTrajectory>,
    pub timing: PhaseTiming,
}

/// Walks `ranked` and returns the first admissible candidate together with
/// its largest mutual information against the selected rounds.
fn first_admissible<'a>(
    ranked: impl IntoIterator<Item = &'a Candidate>,
    table: &StumpTable,
    responses: &ClassifierResponseTable,
    used: &HashSet<usize>,
    threshold: f64,
) -> Result<Option<(Candidate, Option<f64>)>> {
    for c in ranked {
        if used.contains(&c.feature_index) {
            continue;
        }
        if !threshold.is_finite() {
            return Ok(Some((*c, None)));
        }
        let row = table.outputs(c.feature_index, c.polarity);
        match responses.max_mutual_information(&row)? {
            None => return Ok(Some((*c, None))),
            Some(mi) if mi <= threshold => return Ok(Some((*c, Some(mi)))),
            Some(_) => {}
        }
    }
    Ok(None)
}

/// Lowest-error stump whose feature is unused and whose outputs are not
/// redundant with any already-selected stump.
pub fn mi_filter_pick(
    set: &TrainingSet,
    w: &WeightVector,
    responses: &ClassifierResponseTable,
    cfg: &BoostConfig,
) -> Result<(WeakClassifier, f64)> {
    let table = StumpTable::new(set)?;
    if w.len() != table.num_samples() {
        return Err(Error::param("weight vector does not match training set"));
    }
    w.check()?;
    let used: HashSet<usize> = responses.features().iter().copied().collect();
    let ranked = table.ranked(w, &used);
    let (c, _) = first_admissible(&ranked, &table, responses, &used, cfg.mi_threshold)?
        .ok_or(Error::FilterExhausted {
            round: responses.len() + 1,
        })?;
    Ok((table.classifier(c.feature_index, c.polarity), c.error))
}

/// Result of one serial round.
#[derive(Clone, Debug)]
pub struct RoundStep {
    pub classifier: WeakClassifier,
    pub error: f64,
    pub coefficient: f64,
    pub max_mi: Option<f64>,
    pub weights: WeightVector,
}

/// One AdaBoost round on a precomputed stump table. `round` is 1-based and
/// only used for error reporting.
pub fn adaboost_round(
    table: &StumpTable,
    w: &WeightVector,
    responses: &ClassifierResponseTable,
    cfg: &BoostConfig,
    round: usize,
) -> Result<RoundStep> {
    let used: HashSet<usize> = responses.features().iter().copied().collect();
    let (pick, max_mi) = if cfg.filter_enabled() {
        let ranked = table.ranked(w, &used);
        first_admissible(&ranked, table, responses, &used, cfg.mi_threshold)?
            .ok_or(Error::FilterExhausted { round })?
    } else {
        let best = table.best(w, &used).map_err(|e| match e {
            Error::Exhausted(msg) => Error::Exhausted(format!("round {round}: {msg}")),
            other => other,
        })?;
        (best, None)
    };
    let (_, coefficient) = round_coefficient(pick.error, cfg.floor_for(table.num_samples()));
    let outputs = table.outputs(pick.feature_index, pick.polarity);
    let updated: Vec<f64> = w
        .as_slice()
        .iter()
        .zip(&outputs)
        .zip(table.labels())
        .map(|((&wi, &h), &y)| wi * (-coefficient * f64::from(y * h)).exp())
        .collect();
    Ok(RoundStep {
        classifier: table.classifier(pick.feature_index, pick.polarity),
        error: pick.error,
        coefficient,
        max_mi,
        weights: WeightVector::normalized(updated)?,
    })
}

struct SerialState {
    rounds: Vec<ModelRound>,
    log: Vec<RoundRecord>,
    responses: ClassifierResponseTable,
    trajectory: Vec<Vec<f64>>,
}

fn run_serial(table: &StumpTable, cfg: &BoostConfig, rounds: usize, record: bool) -> Result<SerialState> {
    let mut state = SerialState {
        rounds: Vec::with_capacity(cfg.total_rounds),
        log: Vec::with_capacity(cfg.total_rounds),
        responses: ClassifierResponseTable::new(),
        trajectory: Vec::new(),
    };
    let mut w = WeightVector::uniform(table.num_samples());
    for round in 1..=rounds {
        if record {
            state.trajectory.push(w.as_slice().to_vec());
        }
        let step = adaboost_round(table, &w, &state.responses, cfg, round)?;
        let h = step.classifier;
        state
            .responses
            .push(h.feature_index, table.outputs(h.feature_index, h.polarity));
        state.rounds.push(ModelRound {
            classifier: h,
            coefficient: step.coefficient,
        });
        state.log.push(RoundRecord {
            round,
            phase: Phase::Serial,
            classifier: h,
            error: step.error,
            coefficient: step.coefficient,
            max_mi: step.max_mi,
        });
        w = step.weights;
    }
    Ok(state)
}

fn snapshot(set: &TrainingSet, cfg: &BoostConfig, serial_rounds: usize) -> BoostConfig {
    BoostConfig {
        serial_rounds,
        epsilon_floor: Some(cfg.floor_for(set.len())),
        ..cfg.clone()
    }
}

/// Serial AdaBoost for `total_rounds` rounds; `serial_rounds` is ignored.
pub fn train_ab(set: &TrainingSet, cfg: &BoostConfig) -> Result<EnsembleModel> {
    Ok(train_ab_with(set, cfg, &TrainOptions::default())?.model)
}

pub fn train_ab_with(set: &TrainingSet, cfg: &BoostConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    let cfg = BoostConfig {
        serial_rounds: cfg.total_rounds,
        ..cfg.clone()
    };
    cfg.validate()?;
    let table = StumpTable::new(set)?;
    let start = Instant::now();
    let state = run_serial(&table, &cfg, cfg.total_rounds, opts.record_trajectory)?;
    let serial = start.elapsed();
    Ok(TrainOutcome {
        model: EnsembleModel {
            rounds: state.rounds,
            config: snapshot(set, &cfg, cfg.total_rounds),
            layout: set.layout,
            bank: None,
        },
        log: state.log,
        trajectory: opts.record_trajectory.then_some(WeightTrajectory {
            rounds: state.trajectory,
        }),
        timing: PhaseTiming {
            serial,
            parallel: Duration::ZERO,
        },
    })
}

/// Parallel AdaBoost on the current rayon pool.
pub fn train_pab(set: &TrainingSet, cfg: &BoostConfig) -> Result<EnsembleModel> {
    Ok(train_pab_with(
        set,
        cfg,
        &TrainOptions {
            workers: rayon::current_num_threads(),
            record_trajectory: false,
        },
    )?
    .model)
}

/// Parallel AdaBoost with an explicit worker count. The model depends only
/// on the data, the config and the seed, never on the worker count.
pub fn train_pab_with(set: &TrainingSet, cfg: &BoostConfig, opts: &TrainOptions) -> Result<TrainOutcome> {
    cfg.validate()?;
    if opts.workers == 0 {
        return Err(Error::param("workers must be at least 1"));
    }
    let (s, t) = (cfg.serial_rounds, cfg.total_rounds);
    if s == t {
        return train_ab_with(set, cfg, opts);
    }
    if s < 2 {
        return Err(Error::param(
            "at least 2 serial rounds are needed to fit weight distributions",
        ));
    }
    let table = StumpTable::new(set)?;

    let start = Instant::now();
    let mut state = run_serial(&table, cfg, s, true)?;
    let serial = start.elapsed();

    let start = Instant::now();
    let trajectory = WeightTrajectory {
        rounds: std::mem::take(&mut state.trajectory),
    };
    let params = trajectory.fit()?;
    let serial_used: HashSet<usize> = state.responses.features().iter().copied().collect();
    // Each task keeps only a prefix of its ranking; the merge recomputes the
    // full list for the rare round that runs past it.
    let prefix = (4 * t).max(256);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))?;
    let ranked_rounds: Vec<Vec<Candidate>> = pool.install(|| {
        (s + 1..=t)
            .into_par_iter()
            .map(|round| {
                let w = sample_weights(&params, cfg.seed, round)?;
                Ok(table.ranked_top(&w, &serial_used, prefix))
            })
            .collect::<Result<_>>()
    })?;

    let mut used = serial_used.clone();
    for (offset, ranked) in ranked_rounds.iter().enumerate() {
        let round = s + 1 + offset;
        let mut found = first_admissible(ranked, &table, &state.responses, &used, cfg.mi_threshold)?;
        if found.is_none() && ranked.len() == prefix {
            let w = sample_weights(&params, cfg.seed, round)?;
            let full = table.ranked(&w, &serial_used);
            found = first_admissible(&full, &table, &state.responses, &used, cfg.mi_threshold)?;
        }
        let (pick, max_mi) = found.ok_or(Error::FilterExhausted { round })?;
        let (_, coefficient) = round_coefficient(pick.error, cfg.floor_for(set.len()));
        let h = table.classifier(pick.feature_index, pick.polarity);
        used.insert(h.feature_index);
        state
            .responses
            .push(h.feature_index, table.outputs(h.feature_index, h.polarity));
        state.rounds.push(ModelRound {
            classifier: h,
            coefficient,
        });
        state.log.push(RoundRecord {
            round,
            phase: Phase::Parallel,
            classifier: h,
            error: pick.error,
            coefficient,
            max_mi,
        });
    }
    let parallel = start.elapsed();

    Ok(TrainOutcome {
        model: EnsembleModel {
            rounds: state.rounds,
            config: snapshot(set, cfg, s),
            layout: set.layout,
            bank: None,
        },
        log: state.log,
        trajectory: opts.record_trajectory.then_some(trajectory),
        timing: PhaseTiming { serial, parallel },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairs::{DiffSample, Label};
    use crate::weak::Polarity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set_from(rows: Vec<(Vec<f64>, Label)>) -> TrainingSet {
        TrainingSet::new(
            rows.into_iter()
                .enumerate()
                .map(|(i, (values, label))| DiffSample {
                    values,
                    label,
                    source_pair: (i, i),
                })
                .collect(),
        )
        .unwrap()
    }

    /// Intra samples small on the informative columns, extra samples large,
    /// with noisy overlap.
    fn noisy_set(seed: u64, n: usize, dim: usize) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        set_from(
            (0..n)
                .map(|i| {
                    let label = if i % 4 == 0 { Label::Intra } else { Label::Extra };
                    let values = (0..dim)
                        .map(|j| {
                            let signal = if label == Label::Extra && j % 3 == 0 { 0.4 } else { 0.0 };
                            rng.random::<f64>() + signal * rng.random::<f64>()
                        })
                        .collect();
                    (values, label)
                })
                .collect(),
        )
    }

    #[test]
    fn coefficient_closed_form() {
        assert_eq!(round_coefficient(0.5, 0.01).1, 0.0);
        assert!((round_coefficient(0.1, 0.01).1 - 0.5 * 9f64.ln()).abs() < 1e-15);
        let (eps, c) = round_coefficient(0.0, 0.01);
        assert_eq!(eps, 0.01);
        assert!(c.is_finite() && c > 0.0);
        assert_eq!(round_coefficient(0.5000000000000001, 0.01).1, 0.0);
    }

    #[test]
    fn misclassified_sample_gains_weight() {
        // stump on column 0 gets only sample 2 wrong
        let set = set_from(vec![
            (vec![0.1], Label::Intra),
            (vec![0.9], Label::Extra),
            (vec![0.2], Label::Extra),
        ]);
        let table = StumpTable::new(&set).unwrap();
        let cfg = BoostConfig { mi_threshold: f64::INFINITY, ..Default::default() };
        let w = WeightVector::uniform(3);
        let step = adaboost_round(&table, &w, &ClassifierResponseTable::new(), &cfg, 1).unwrap();
        assert_eq!(step.classifier.polarity, Polarity::Negative);
        assert!((step.error - 1.0 / 3.0).abs() < 1e-15);
        // eps = 1/3: c = ln(2)/2, wrong weight * sqrt(2), right weights / sqrt(2)
        let c = 0.5 * 2f64.ln();
        assert!((step.coefficient - c).abs() < 1e-15);
        let w = step.weights.as_slice();
        assert!((w[2] - 0.5).abs() < 1e-12);
        assert!((w[0] - 0.25).abs() < 1e-12 && (w[1] - 0.25).abs() < 1e-12);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let ok = BoostConfig { total_rounds: 10, serial_rounds: 4, ..Default::default() };
        assert!(ok.validate().is_ok());
        for bad in [
            BoostConfig { total_rounds: 0, serial_rounds: 0, ..ok.clone() },
            BoostConfig { serial_rounds: 0, ..ok.clone() },
            BoostConfig { serial_rounds: 11, ..ok.clone() },
            BoostConfig { mi_threshold: -0.1, ..ok.clone() },
            BoostConfig { mi_threshold: f64::NAN, ..ok.clone() },
            BoostConfig { epsilon_floor: Some(0.5), ..ok.clone() },
            BoostConfig { epsilon_floor: Some(0.0), ..ok.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn predict_conventions() {
        let empty = EnsembleModel {
            rounds: vec![],
            config: BoostConfig::default(),
            layout: None,
            bank: None,
        };
        assert_eq!(predict(&empty, &[0.3]).unwrap(), Prediction { score: 0.0, decision: 1 });

        let stump = |j, p| WeakClassifier { feature_index: j, threshold: 0.5, polarity: p };
        let single = EnsembleModel {
            rounds: vec![ModelRound { classifier: stump(0, Polarity::Negative), coefficient: 1.0 }],
            ..empty.clone()
        };
        assert_eq!(predict(&single, &[0.2]).unwrap().decision, 1);
        assert_eq!(predict(&single, &[0.7]).unwrap().decision, -1);

        let tie = EnsembleModel {
            rounds: vec![
                ModelRound { classifier: stump(0, Polarity::Positive), coefficient: 2.0 },
                ModelRound { classifier: stump(1, Polarity::Positive), coefficient: 1.0 },
                ModelRound { classifier: stump(2, Polarity::Positive), coefficient: 1.0 },
            ],
            ..empty.clone()
        };
        assert_eq!(predict(&tie, &[0.9, 0.1, 0.1]).unwrap(), Prediction { score: 0.0, decision: 1 });
        assert!(predict(&tie, &[0.9, 0.1]).is_err());
    }

    #[test]
    fn cost_units() {
        let cfg = BoostConfig { total_rounds: 200, serial_rounds: 50, ..Default::default() };
        assert_eq!(cost_estimate(&cfg, 150).unwrap(), (50, 1));
        assert_eq!(cost_estimate(&cfg, 1).unwrap(), (50, 150));
        assert_eq!(cost_estimate(&cfg, 4).unwrap(), (50, 38));
        let full = BoostConfig { serial_rounds: 200, ..cfg.clone() };
        assert_eq!(cost_estimate(&full, 8).unwrap(), (200, 0));
        assert!(cost_estimate(&cfg, 0).is_err());
    }

    #[test]
    fn features_are_distinct_and_coefficients_non_negative() {
        let set = noisy_set(1, 120, 24);
        for cfg in [
            BoostConfig { total_rounds: 20, serial_rounds: 20, mi_threshold: f64::INFINITY, ..Default::default() },
            BoostConfig { total_rounds: 20, serial_rounds: 6, mi_threshold: 0.3, seed: 2, ..Default::default() },
        ] {
            let model = train_pab_with(&set, &cfg, &TrainOptions::default()).unwrap().model;
            let mut features = model.selected_features();
            assert_eq!(features.len(), 20);
            features.sort();
            features.dedup();
            assert_eq!(features.len(), 20);
            assert!(model.rounds.iter().all(|r| r.coefficient >= 0.0 && r.coefficient.is_finite()));
        }
    }

    #[test]
    fn mi_threshold_blocks_duplicate_columns() {
        // column 1 duplicates column 0; column 2's stump output is
        // independent of column 0's by construction
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rows = (0..80)
            .map(|i| {
                let label = if i % 2 == 0 { Label::Intra } else { Label::Extra };
                let strong = if label == Label::Intra { 0.2 } else { 0.8 } + 0.3 * (rng.random::<f64>() - 0.5);
                let other = if (i / 2) % 2 == 0 { 0.9 } else { 0.1 };
                (vec![strong, strong, other], label)
            })
            .collect();
        let set = set_from(rows);
        let cfg = BoostConfig { total_rounds: 2, serial_rounds: 2, mi_threshold: 0.01, ..Default::default() };
        let model = train_ab(&set, &cfg).unwrap();
        assert_eq!(model.selected_features(), vec![0, 2]);

        let open = BoostConfig { mi_threshold: f64::INFINITY, ..cfg };
        assert_eq!(train_ab(&set, &open).unwrap().selected_features()[0], 0);
    }

    #[test]
    fn filter_exhaustion_names_round() {
        let set = set_from(vec![
            (vec![0.1, 0.1], Label::Intra),
            (vec![0.2, 0.2], Label::Intra),
            (vec![0.8, 0.8], Label::Extra),
            (vec![0.9, 0.9], Label::Extra),
        ]);
        let cfg = BoostConfig { total_rounds: 2, serial_rounds: 2, mi_threshold: 0.5, ..Default::default() };
        assert!(matches!(train_ab(&set, &cfg), Err(Error::FilterExhausted { round: 2 })));
        let too_many = BoostConfig { total_rounds: 3, serial_rounds: 3, mi_threshold: f64::INFINITY, ..cfg };
        assert!(matches!(train_ab(&set, &too_many), Err(Error::Exhausted(_))));
    }

    #[test]
    fn mi_filter_pick_without_filter_is_best_weak() {
        let set = noisy_set(9, 60, 15);
        let w = WeightVector::uniform(60);
        let cfg = BoostConfig { mi_threshold: f64::INFINITY, ..Default::default() };
        let (h, e) = mi_filter_pick(&set, &w, &ClassifierResponseTable::new(), &cfg).unwrap();
        let (h2, e2) = crate::weak::best_weak(&set, &w, &HashSet::new()).unwrap();
        assert_eq!((h, e), (h2, e2));
    }

    #[test]
    fn trajectory_records_serial_weights() {
        let set = noisy_set(2, 40, 8);
        let cfg = BoostConfig { total_rounds: 8, serial_rounds: 4, mi_threshold: f64::INFINITY, seed: 3, ..Default::default() };
        let out = train_pab_with(&set, &cfg, &TrainOptions { workers: 2, record_trajectory: true }).unwrap();
        let traj = out.trajectory.unwrap();
        assert_eq!(traj.rounds.len(), 4);
        assert!(traj.rounds[0].iter().all(|&w| w == 1.0 / 40.0));
        for w in &traj.rounds {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        assert_eq!(out.log.iter().filter(|r| r.phase == Phase::Parallel).count(), 4);
    }

    #[test]
    fn single_serial_round_cannot_fit() {
        let set = noisy_set(2, 40, 8);
        let cfg = BoostConfig { total_rounds: 8, serial_rounds: 1, ..Default::default() };
        assert!(matches!(train_pab(&set, &cfg), Err(Error::Parameter(_))));
    }
}
