//! Intra-person / extra-person difference samples.
//!
//! Every sample is the component-wise absolute difference of two images'
//! feature vectors. Pairs of the same identity are the positive class.

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gabor::{FeatureLayout, FeatureVector};

#[derive(Clone, Debug, PartialEq)]
pub struct GallerySample {
    pub identity: String,
    pub image_ref: String,
    pub features: FeatureVector,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    /// Same identity, `+1`.
    Intra,
    /// Different identities, `-1`.
    Extra,
}

impl Label {
    pub fn sign(self) -> i8 {
        match self {
            Label::Intra => 1,
            Label::Extra => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Label> {
        match sign {
            1 => Some(Label::Intra),
            -1 => Some(Label::Extra),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffSample {
    pub values: Vec<f64>,
    pub label: Label,
    /// Gallery indices of the two images.
    pub source_pair: (usize, usize),
}

impl DiffSample {
    pub fn from_pair(a: &[f64], b: &[f64], label: Label, source_pair: (usize, usize)) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::param(format!(
                "feature vectors differ in length: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        Ok(DiffSample {
            values: a.iter().zip(b).map(|(x, y)| (x - y).abs()).collect(),
            label,
            source_pair,
        })
    }
}

/// `f_j` of a difference sample.
pub fn component(sample: &DiffSample, j: usize) -> Result<f64> {
    sample.values.get(j).copied().ok_or_else(|| {
        Error::param(format!(
            "feature index {j} out of range 0..{}",
            sample.values.len()
        ))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    samples: Vec<DiffSample>,
    dim: usize,
    intra: usize,
    extra: usize,
    pub seed: Option<u64>,
    pub layout: Option<FeatureLayout>,
}

impl TrainingSet {
    pub fn new(samples: Vec<DiffSample>) -> Result<Self> {
        let dim = samples.first().map_or(0, |s| s.values.len());
        if let Some(bad) = samples.iter().position(|s| s.values.len() != dim) {
            return Err(Error::param(format!(
                "sample {bad} has dimension {}, expected {dim}",
                samples[bad].values.len()
            )));
        }
        let intra = samples.iter().filter(|s| s.label == Label::Intra).count();
        let extra = samples.len() - intra;
        Ok(TrainingSet {
            samples,
            dim,
            intra,
            extra,
            seed: None,
            layout: None,
        })
    }

    pub fn samples(&self) -> &[DiffSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn intra_count(&self) -> usize {
        self.intra
    }

    pub fn extra_count(&self) -> usize {
        self.extra
    }

    /// Boosting needs both classes present.
    pub fn check_trainable(&self) -> Result<()> {
        if self.intra == 0 || self.extra == 0 {
            return Err(Error::param(format!(
                "training set needs both classes, has {} intra and {} extra samples",
                self.intra, self.extra
            )));
        }
        if self.dim == 0 {
            return Err(Error::param("training set has zero-dimensional samples"));
        }
        Ok(())
    }
}

/// Number of same-identity and cross-identity pairs available in a gallery.
pub fn available_pairs(gallery: &[GallerySample]) -> (usize, usize) {
    let (intra, extra) = enumerate_pairs(gallery);
    (intra.len(), extra.len())
}

type PairList = Vec<(usize, usize)>;

fn enumerate_pairs(gallery: &[GallerySample]) -> (PairList, PairList) {
    let mut intra = Vec::new();
    let mut extra = Vec::new();
    for i in 0..gallery.len() {
        for j in i + 1..gallery.len() {
            if gallery[i].identity == gallery[j].identity {
                intra.push((i, j));
            } else {
                extra.push((i, j));
            }
        }
    }
    (intra, extra)
}

/// Samples `num_intra` same-identity and `num_extra` cross-identity pairs
/// without replacement and builds their difference vectors.
pub fn build_pairs(gallery: &[GallerySample], num_intra: usize, num_extra: usize, seed: u64) -> Result<TrainingSet> {
    if gallery.is_empty() {
        return Err(Error::param("empty gallery"));
    }
    if let Some(s) = gallery.iter().find(|s| s.identity.is_empty()) {
        return Err(Error::param(format!("gallery image `{}` has an empty identity", s.image_ref)));
    }
    let layout = gallery[0].features.layout;
    if let Some(s) = gallery.iter().find(|s| s.features.layout != layout) {
        return Err(Error::LayoutMismatch {
            expected: layout.to_string(),
            found: s.features.layout.to_string(),
        });
    }

    let (intra, extra) = enumerate_pairs(gallery);
    if intra.is_empty() || intra.len() < num_intra {
        return Err(Error::Capacity(format!(
            "intra-person class: requested {num_intra} pairs, gallery has {}",
            intra.len()
        )));
    }
    if extra.is_empty() || extra.len() < num_extra {
        return Err(Error::Capacity(format!(
            "extra-person class: requested {num_extra} pairs, gallery has {}",
            extra.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picked_intra = index::sample(&mut rng, intra.len(), num_intra);
    let picked_extra = index::sample(&mut rng, extra.len(), num_extra);

    let diff = |(a, b): (usize, usize), label| {
        DiffSample::from_pair(&gallery[a].features.values, &gallery[b].features.values, label, (a, b))
    };
    let mut samples = Vec::with_capacity(num_intra + num_extra);
    for i in picked_intra {
        samples.push(diff(intra[i], Label::Intra)?);
    }
    for i in picked_extra {
        samples.push(diff(extra[i], Label::Extra)?);
    }
    let mut set = TrainingSet::new(samples)?;
    set.seed = Some(seed);
    set.layout = Some(layout);
    Ok(set)
}

const PAIRS_MAGIC: &str = "gaborboost-pairs 1";

/// Text header terminated by `end`, then per sample: label byte (`+1`/`-1`
/// as `i8`), both source indices as little-endian `u32`, and `dim`
/// little-endian `f64` values.
pub fn write_training_set<W: Write>(set: &TrainingSet, mut out: W) -> Result<()> {
    writeln!(out, "{PAIRS_MAGIC}")?;
    writeln!(out, "samples {}", set.len())?;
    writeln!(out, "dim {}", set.dim())?;
    writeln!(out, "intra {}", set.intra_count())?;
    writeln!(out, "extra {}", set.extra_count())?;
    match set.seed {
        Some(seed) => writeln!(out, "seed {seed}")?,
        None => writeln!(out, "seed none")?,
    }
    match set.layout {
        Some(layout) => writeln!(out, "layout {layout}")?,
        None => writeln!(out, "layout none")?,
    }
    writeln!(out, "end")?;
    for s in set.samples() {
        out.write_all(&[s.label.sign() as u8])?;
        out.write_all(&(s.source_pair.0 as u32).to_le_bytes())?;
        out.write_all(&(s.source_pair.1 as u32).to_le_bytes())?;
        for v in &s.values {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_training_set<R: BufRead>(mut input: R) -> Result<TrainingSet> {
    let mut offset = 0usize;
    let mut line = String::new();
    let mut next_line = |input: &mut R, offset: &mut usize| -> Result<String> {
        line.clear();
        let n = input.read_line(&mut line)?;
        if n == 0 {
            return Err(Error::format(*offset, "unexpected end of header"));
        }
        *offset += n;
        Ok(line.trim_end().to_string())
    };

    if next_line(&mut input, &mut offset)? != PAIRS_MAGIC {
        return Err(Error::format(0, "not a pairs file"));
    }
    let mut samples = None;
    let mut dim = None;
    let mut seed = None;
    let mut layout = None;
    loop {
        let at = offset;
        let l = next_line(&mut input, &mut offset)?;
        if l == "end" {
            break;
        }
        let (key, value) = l
            .split_once(' ')
            .ok_or_else(|| Error::format(at, format!("malformed header line `{l}`")))?;
        let count = || value.parse::<usize>().map_err(|_| Error::format(at, format!("bad {key} `{value}`")));
        match key {
            "samples" => samples = Some(count()?),
            "dim" => dim = Some(count()?),
            "intra" | "extra" => {
                count()?;
            }
            "seed" if value == "none" => {}
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| Error::format(at, "bad seed"))?),
            "layout" if value == "none" => {}
            "layout" => layout = Some(value.parse::<FeatureLayout>()?),
            _ => return Err(Error::format(at, format!("unknown header key `{key}`"))),
        }
    }
    let samples_n = samples.ok_or_else(|| Error::format(offset, "header missing `samples`"))?;
    let dim = dim.ok_or_else(|| Error::format(offset, "header missing `dim`"))?;

    let mut out = Vec::with_capacity(samples_n);
    let mut buf = vec![0u8; 9 + 8 * dim];
    for _ in 0..samples_n {
        input
            .read_exact(&mut buf)
            .map_err(|_| Error::format(offset, "truncated sample data"))?;
        let label = Label::from_sign(buf[0] as i8).ok_or_else(|| Error::format(offset, "bad label byte"))?;
        let a = u32::from_le_bytes(buf[1..5].try_into().unwrap()) as usize;
        let b = u32::from_le_bytes(buf[5..9].try_into().unwrap()) as usize;
        let values = buf[9..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        out.push(DiffSample {
            values,
            label,
            source_pair: (a, b),
        });
        offset += buf.len();
    }
    let mut set = TrainingSet::new(out)?;
    if !set.is_empty() && set.dim() != dim {
        return Err(Error::format(offset, "dimension mismatch"));
    }
    set.dim = dim;
    set.seed = seed;
    set.layout = layout;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout(dim: usize) -> FeatureLayout {
        FeatureLayout::new(1, 1, 1, dim, 1).unwrap()
    }

    fn sample(id: &str, values: Vec<f64>) -> GallerySample {
        let dim = values.len();
        GallerySample {
            identity: id.to_string(),
            image_ref: format!("{id}.pgm"),
            features: FeatureVector { values, layout: layout(dim) },
        }
    }

    fn gallery(ids: usize, per_id: usize) -> Vec<GallerySample> {
        let mut g = Vec::new();
        for i in 0..ids {
            for k in 0..per_id {
                g.push(sample(&format!("id{i}"), vec![i as f64, k as f64, (i * k) as f64]));
            }
        }
        g
    }

    #[test]
    fn two_hundred_identities_give_1800_pairs() {
        let g = gallery(200, 2);
        let set = build_pairs(&g, 200, 1600, 1).unwrap();
        assert_eq!(set.len(), 1800);
        assert_eq!(set.intra_count(), 200);
        assert_eq!(set.extra_count(), 1600);
    }

    #[test]
    fn identical_vectors_give_zero_intra() {
        let g = vec![sample("a", vec![1.0, 2.0]), sample("a", vec![1.0, 2.0]), sample("b", vec![0.0, 0.0])];
        let set = build_pairs(&g, 1, 0, 0).unwrap();
        assert_eq!(set.samples()[0].values, vec![0.0, 0.0]);
        assert_eq!(set.samples()[0].label, Label::Intra);
    }

    #[test]
    fn seeded_sampling() {
        let g = gallery(10, 3);
        let a = build_pairs(&g, 10, 40, 5).unwrap();
        let b = build_pairs(&g, 10, 40, 5).unwrap();
        let c = build_pairs(&g, 10, 40, 6).unwrap();
        assert_eq!(a, b);
        let pairs = |s: &TrainingSet| s.samples().iter().map(|d| d.source_pair).collect::<Vec<_>>();
        assert_ne!(pairs(&a), pairs(&c));
    }

    #[test]
    fn labels_follow_identities() {
        let g = gallery(6, 3);
        let set = build_pairs(&g, 12, 60, 3).unwrap();
        for s in set.samples() {
            let same = g[s.source_pair.0].identity == g[s.source_pair.1].identity;
            assert_eq!(same, s.label == Label::Intra);
            assert!(s.values.iter().all(|&v| v >= 0.0));
        }
        let mut seen: Vec<_> = set.samples().iter().map(|s| s.source_pair).collect();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), set.len(), "pairs drawn with replacement");
    }

    #[test]
    fn capacity_and_parameter_errors() {
        assert!(matches!(build_pairs(&[], 1, 1, 0), Err(Error::Parameter(_))));
        let g = gallery(3, 2);
        match build_pairs(&g, 4, 1, 0) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("intra")),
            other => panic!("{other:?}"),
        }
        match build_pairs(&g, 1, 13, 0) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("extra")),
            other => panic!("{other:?}"),
        }
        // single identity has no extra pairs at all
        assert!(matches!(build_pairs(&gallery(1, 3), 1, 0, 0), Err(Error::Capacity(_))));
    }

    #[test]
    fn component_access() {
        let d = DiffSample::from_pair(&[3.0], &[1.0], Label::Extra, (0, 1)).unwrap();
        assert_eq!(component(&d, 0).unwrap(), 2.0);
        assert!(matches!(component(&d, 1), Err(Error::Parameter(_))));
        let zero = DiffSample::from_pair(&[0.5; 4], &[0.5; 4], Label::Intra, (0, 1)).unwrap();
        assert!((0..4).all(|j| component(&zero, j).unwrap() == 0.0));
    }

    #[test]
    fn component_is_absolute_difference() {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<f64> = (0..10).map(|_| rng.random()).collect();
        let b: Vec<f64> = (0..10).map(|_| rng.random()).collect();
        let d = DiffSample::from_pair(&a, &b, Label::Extra, (0, 1)).unwrap();
        let swapped = DiffSample::from_pair(&b, &a, Label::Extra, (1, 0)).unwrap();
        for j in 0..10 {
            assert_eq!(component(&d, j).unwrap(), (a[j] - b[j]).abs());
            assert_eq!(component(&swapped, j).unwrap(), component(&d, j).unwrap());
        }
    }

    #[test]
    fn persistence_round_trip() {
        let g = gallery(5, 2);
        let set = build_pairs(&g, 5, 20, 9).unwrap();
        let mut buf = Vec::new();
        write_training_set(&set, &mut buf).unwrap();
        let back = read_training_set(&buf[..]).unwrap();
        assert_eq!(back, set);

        buf.truncate(buf.len() - 3);
        assert!(matches!(read_training_set(&buf[..]), Err(Error::Format { .. })));
    }
}
