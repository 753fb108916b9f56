//! Mutual information between ±1 classifier outputs, estimated from counts.

use crate::error::{Error, Result};

fn bin(x: i8) -> usize {
    usize::from(x > 0)
}

/// Entropy in bits of a ±1 row.
pub fn entropy_binary(a: &[i8]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let pos = a.iter().filter(|&&x| x > 0).count();
    [pos, n - pos]
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| c as f64 / n as f64 * (n as f64 / c as f64).log2())
        .sum()
}

/// `I(a; b)` in bits, probabilities taken as counts over the row length.
pub fn mutual_information_binary(a: &[i8], b: &[i8]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "response rows differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::param("empty response rows"));
    }
    let mut joint = [[0usize; 2]; 2];
    for (&x, &y) in a.iter().zip(b) {
        joint[bin(x)][bin(y)] += 1;
    }
    let n = a.len();
    let row = [joint[0][0] + joint[0][1], joint[1][0] + joint[1][1]];
    let col = [joint[0][0] + joint[1][0], joint[0][1] + joint[1][1]];
    let mut mi = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            let c = joint[x][y];
            if c == 0 {
                continue;
            }
            // p(x,y) / (p(x) p(y)) = c n / (row col), kept in integers
            let ratio = (c * n) as f64 / (row[x] * col[y]) as f64;
            mi += c as f64 / n as f64 * ratio.log2();
        }
    }
    Ok(mi.max(0.0))
}

/// Outputs of every already-selected stump on the training samples.
#[derive(Clone, Debug, Default)]
pub struct ClassifierResponseTable {
    features: Vec<usize>,
    rows: Vec<Vec<i8>>,
}

impl ClassifierResponseTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, feature_index: usize, row: Vec<i8>) {
        debug_assert!(row.iter().all(|&x| x == 1 || x == -1));
        self.features.push(feature_index);
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<i8>] {
        &self.rows
    }

    pub fn features(&self) -> &[usize] {
        &self.features
    }

    pub fn contains_feature(&self, j: usize) -> bool {
        self.features.contains(&j)
    }

    /// Largest mutual information between `candidate` and any selected row,
    /// or `None` when nothing is selected yet.
    pub fn max_mutual_information(&self, candidate: &[i8]) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        for row in &self.rows {
            let mi = mutual_information_binary(candidate, row)?;
            best = Some(best.map_or(mi, |b| b.max(mi)));
        }
        Ok(best)
    }
}
