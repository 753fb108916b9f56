//! Rank-1 nearest-neighbor identification on selected Gabor features.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// `1 - cos(a, b)`, clamped to `[0, 2]`. A zero vector is at distance 1
/// from any non-zero vector and 0 from another zero vector.
pub fn ncc_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::param(format!(
            "vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::param("empty feature vectors"));
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    Ok(match (na == 0.0, nb == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => (1.0 - dot / (na * nb).sqrt()).clamp(0.0, 2.0),
    })
}

/// Gallery feature vectors restricted to the selected components, in
/// selection (boosting round) order.
#[derive(Clone, Debug, PartialEq)]
pub struct GalleryIndex {
    entries: Vec<(String, Vec<f64>)>,
    selection: Vec<usize>,
}

impl GalleryIndex {
    pub fn new(entries: Vec<(String, Vec<f64>)>, selection: Vec<usize>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::param("empty gallery"));
        }
        if let Some((id, v)) = entries.iter().find(|(_, v)| v.len() != selection.len()) {
            return Err(Error::param(format!(
                "gallery entry `{id}` has {} features, selection has {}",
                v.len(),
                selection.len()
            )));
        }
        Ok(GalleryIndex { entries, selection })
    }

    pub fn entries(&self) -> &[(String, Vec<f64>)] {
        &self.entries
    }

    pub fn selection(&self) -> &[usize] {
        &self.selection
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Match {
    pub identity: String,
    /// Position in the gallery.
    pub entry: usize,
    pub distance: f64,
}

/// Closest gallery entry using the first `k_features` selected components;
/// the earliest entry wins ties.
pub fn nearest_neighbor(index: &GalleryIndex, probe: &[f64], k_features: usize) -> Result<Match> {
    let n = index.selection.len();
    if k_features == 0 || k_features > n {
        return Err(Error::param(format!("feature count {k_features} outside 1..={n}")));
    }
    if probe.len() < k_features {
        return Err(Error::param(format!(
            "probe has {} features, need {k_features}",
            probe.len()
        )));
    }
    let mut best: Option<Match> = None;
    for (i, (identity, v)) in index.entries.iter().enumerate() {
        let d = ncc_distance(&v[..k_features], &probe[..k_features])?;
        if best.as_ref().is_none_or(|b| d < b.distance) {
            best = Some(Match {
                identity: identity.clone(),
                entry: i,
                distance: d,
            });
        }
    }
    best.ok_or_else(|| Error::param("empty gallery"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub id: String,
    pub identity: String,
    pub features: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeDecision {
    pub probe_id: String,
    pub predicted: String,
    pub actual: String,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionReport {
    /// `(feature count, accuracy %)`, ascending by feature count.
    pub rows: Vec<(usize, f64)>,
    /// Decisions at the largest feature count.
    pub decisions: Vec<ProbeDecision>,
}

impl RecognitionReport {
    pub fn accuracy_at(&self, k: usize) -> Option<f64> {
        self.rows.iter().find(|(d, _)| *d == k).map(|(_, a)| *a)
    }

    pub fn best(&self) -> Option<(usize, f64)> {
        self.rows
            .iter()
            .copied()
            .fold(None, |best: Option<(usize, f64)>, row| match best {
                Some(b) if b.1 >= row.1 => Some(b),
                _ => Some(row),
            })
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::from("feature_count\taccuracy\n");
        for (k, acc) in &self.rows {
            let _ = writeln!(s, "{k}\t{acc:.1}");
        }
        s
    }

    pub fn decisions_csv(&self) -> String {
        let mut s = String::from("probe,predicted,actual,distance\n");
        for d in &self.decisions {
            let _ = writeln!(s, "{},{},{},{:.6}", d.probe_id, d.predicted, d.actual, d.distance);
        }
        s
    }
}

/// Rank-1 accuracy of `probes` against `index` at every feature count in `dims`.
pub fn evaluate(index: &GalleryIndex, probes: &[Probe], dims: &[usize]) -> Result<RecognitionReport> {
    if dims.is_empty() {
        return Err(Error::param("no feature counts to evaluate"));
    }
    let n = index.selection.len();
    if let Some(k) = dims.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::param(format!("feature count {k} outside 1..={n}")));
    }
    if probes.is_empty() {
        return Err(Error::param("no probes to evaluate"));
    }
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();

    let mut rows = Vec::with_capacity(dims.len());
    let mut decisions = Vec::new();
    for &k in &dims {
        let matches = probes
            .par_iter()
            .map(|p| nearest_neighbor(index, &p.features, k))
            .collect::<Result<Vec<_>>>()?;
        let correct = matches
            .iter()
            .zip(probes)
            .filter(|(m, p)| m.identity == p.identity)
            .count();
        rows.push((k, 100.0 * correct as f64 / probes.len() as f64));
        decisions = matches
            .into_iter()
            .zip(probes)
            .map(|(m, p)| ProbeDecision {
                probe_id: p.id.clone(),
                predicted: m.identity,
                actual: p.identity.clone(),
                distance: m.distance,
            })
            .collect();
    }
    Ok(RecognitionReport { rows, decisions })
}
