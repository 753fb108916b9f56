//! Single-component threshold stumps.
//!
//! A stump on feature `j` outputs `-1` when `x_j < lambda_j` and `+1`
//! otherwise, times its polarity. The threshold is the midpoint of the
//! intra-class and extra-class means of column `j`, computed once from
//! unweighted data; boosting only chooses `j` and the polarity.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::pairs::{Label, TrainingSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Polarity> {
        match sign {
            1 => Some(Polarity::Positive),
            -1 => Some(Polarity::Negative),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakClassifier {
    pub feature_index: usize,
    pub threshold: f64,
    pub polarity: Polarity,
}

impl WeakClassifier {
    /// Output on a full feature (or difference) vector.
    pub fn classify(&self, values: &[f64]) -> i8 {
        classify(self, values)
    }
}

/// Stump output in `{-1, +1}`; equality with the threshold takes the `+1` branch.
pub fn classify(h: &WeakClassifier, values: &[f64]) -> i8 {
    let raw = if values[h.feature_index] < h.threshold { -1 } else { 1 };
    raw * h.polarity.sign()
}

/// Non-negative sample weights, normalized to sum 1 before use.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn uniform(n: usize) -> Self {
        WeightVector(vec![1.0 / n as f64; n])
    }

    /// Rescales `raw` to sum 1. Fails on negative, non-finite or all-zero input.
    pub fn normalized(raw: Vec<f64>) -> Result<Self> {
        if let Some(w) = raw.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Data(format!("invalid weight {w}")));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(Error::Data("weights sum to zero".into()));
        }
        Ok(WeightVector(raw.into_iter().map(|w| w / total).collect()))
    }

    /// Wraps weights that are already normalized.
    pub fn from_normalized(weights: Vec<f64>) -> Result<Self> {
        let w = WeightVector(weights);
        w.check()?;
        Ok(w)
    }

    pub fn check(&self) -> Result<()> {
        if self.0.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Data("weights must be finite and non-negative".into()));
        }
        let total: f64 = self.0.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Data(format!("weights sum to {total}, expected 1")));
        }
        Ok(())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Midpoint of the intra-class and extra-class means of column `j`.
pub fn threshold_from_means(set: &TrainingSet, j: usize) -> Result<f64> {
    if set.intra_count() == 0 || set.extra_count() == 0 {
        return Err(Error::param(format!(
            "threshold needs both classes, has {} intra and {} extra samples",
            set.intra_count(),
            set.extra_count()
        )));
    }
    if j >= set.dim() {
        return Err(Error::param(format!("feature index {j} out of range 0..{}", set.dim())));
    }
    let (mut intra, mut extra) = (0.0, 0.0);
    for s in set.samples() {
        match s.label {
            Label::Intra => intra += s.values[j],
            Label::Extra => extra += s.values[j],
        }
    }
    Ok(0.5 * (intra / set.intra_count() as f64 + extra / set.extra_count() as f64))
}

fn check_weights(set: &TrainingSet, w: &WeightVector) -> Result<()> {
    if w.len() != set.len() {
        return Err(Error::param(format!(
            "{} weights for {} samples",
            w.len(),
            set.len()
        )));
    }
    w.check()
}

/// Total weight of the samples `h` gets wrong.
pub fn weighted_error(h: &WeakClassifier, set: &TrainingSet, w: &WeightVector) -> Result<f64> {
    check_weights(set, w)?;
    if h.feature_index >= set.dim() {
        return Err(Error::param(format!(
            "feature index {} out of range 0..{}",
            h.feature_index,
            set.dim()
        )));
    }
    let mut err = 0.0;
    for (s, wi) in set.samples().iter().zip(w.as_slice()) {
        if classify(h, &s.values) != s.label.sign() {
            err += wi;
        }
    }
    Ok(err)
}

/// A scored stump.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub feature_index: usize,
    pub polarity: Polarity,
    pub error: f64,
}

/// Thresholds and positive-polarity outputs of every feature's stump,
/// precomputed once per training set.
#[derive(Clone, Debug)]
pub struct StumpTable {
    thresholds: Vec<f64>,
    /// Feature-major: `outputs[j * n + i]`.
    outputs: Vec<i8>,
    labels: Vec<i8>,
    n: usize,
}

impl StumpTable {
    pub fn new(set: &TrainingSet) -> Result<Self> {
        set.check_trainable()?;
        let n = set.len();
        let dim = set.dim();
        let thresholds = (0..dim)
            .map(|j| threshold_from_means(set, j))
            .collect::<Result<Vec<_>>>()?;
        let mut outputs = vec![0i8; dim * n];
        for (i, s) in set.samples().iter().enumerate() {
            for (j, (&x, &lambda)) in s.values.iter().zip(&thresholds).enumerate() {
                outputs[j * n + i] = if x < lambda { -1 } else { 1 };
            }
        }
        let labels = set.samples().iter().map(|s| s.label.sign()).collect();
        Ok(StumpTable {
            thresholds,
            outputs,
            labels,
            n,
        })
    }

    pub fn dim(&self) -> usize {
        self.thresholds.len()
    }

    pub fn num_samples(&self) -> usize {
        self.n
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn threshold(&self, j: usize) -> f64 {
        self.thresholds[j]
    }

    pub fn classifier(&self, j: usize, polarity: Polarity) -> WeakClassifier {
        WeakClassifier {
            feature_index: j,
            threshold: self.thresholds[j],
            polarity,
        }
    }

    /// Positive-polarity outputs of feature `j` over all samples.
    pub fn raw_outputs(&self, j: usize) -> &[i8] {
        &self.outputs[j * self.n..(j + 1) * self.n]
    }

    /// Outputs of stump `(j, polarity)` over all samples.
    pub fn outputs(&self, j: usize, polarity: Polarity) -> Vec<i8> {
        let s = polarity.sign();
        self.raw_outputs(j).iter().map(|&o| o * s).collect()
    }

    /// Weighted errors of feature `j` for (positive, negative) polarity.
    pub fn errors(&self, j: usize, w: &[f64]) -> (f64, f64) {
        let (mut pos, mut neg) = (0.0, 0.0);
        for ((&o, &y), &wi) in self.raw_outputs(j).iter().zip(&self.labels).zip(w) {
            if o != y {
                pos += wi;
            }
            if -o != y {
                neg += wi;
            }
        }
        (pos, neg)
    }

    /// Lowest-error stump over features not in `exclude`; ties go to the
    /// smaller feature index, then to positive polarity.
    pub fn best(&self, w: &WeightVector, exclude: &HashSet<usize>) -> Result<Candidate> {
        let mut best: Option<Candidate> = None;
        for j in (0..self.dim()).filter(|j| !exclude.contains(j)) {
            let (pos, neg) = self.errors(j, w.as_slice());
            for (polarity, error) in [(Polarity::Positive, pos), (Polarity::Negative, neg)] {
                if best.is_none_or(|b| error < b.error) {
                    best = Some(Candidate {
                        feature_index: j,
                        polarity,
                        error,
                    });
                }
            }
        }
        best.ok_or_else(|| Error::Exhausted(format!("all {} features excluded", self.dim())))
    }

    /// Every stump over features not in `exclude`, ascending by error with
    /// the same tie-break as [`StumpTable::best`].
    pub fn ranked(&self, w: &WeightVector, exclude: &HashSet<usize>) -> Vec<Candidate> {
        self.ranked_top(w, exclude, usize::MAX)
    }

    /// The first `limit` entries of [`StumpTable::ranked`].
    pub fn ranked_top(&self, w: &WeightVector, exclude: &HashSet<usize>, limit: usize) -> Vec<Candidate> {
        let mut all = Vec::with_capacity(2 * self.dim());
        for j in (0..self.dim()).filter(|j| !exclude.contains(j)) {
            let (pos, neg) = self.errors(j, w.as_slice());
            all.push(Candidate {
                feature_index: j,
                polarity: Polarity::Positive,
                error: pos,
            });
            all.push(Candidate {
                feature_index: j,
                polarity: Polarity::Negative,
                error: neg,
            });
        }
        let order = |a: &Candidate, b: &Candidate| {
            a.error
                .total_cmp(&b.error)
                .then(a.feature_index.cmp(&b.feature_index))
                .then(a.polarity.cmp(&b.polarity))
        };
        if limit < all.len() {
            all.select_nth_unstable_by(limit, order);
            all.truncate(limit);
        }
        all.sort_by(order);
        all
    }
}

/// Exhaustive search for the best stump outside `exclude`.
pub fn best_weak(set: &TrainingSet, w: &WeightVector, exclude: &HashSet<usize>) -> Result<(WeakClassifier, f64)> {
    check_weights(set, w)?;
    let table = StumpTable::new(set)?;
    let c = table.best(w, exclude)?;
    Ok((table.classifier(c.feature_index, c.polarity), c.error))
}
