//! Binary PGM images, dataset manifests, gallery/probe splits and the
//! synthetic identity generator used in place of a licensed face database.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gabor::Image;

/// Parses a binary (P5) PGM with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<Image> {
    let mut pos = 0;
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        let found = String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into_owned();
        return Err(Error::format(0, format!("expected binary PGM magic `P5`, found `{found}`")));
    }
    pos += 2;

    let mut header = [0usize; 3];
    for (slot, name) in header.iter_mut().zip(["width", "height", "maxval"]) {
        // whitespace and comments between fields
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(Error::format(pos, format!("header ends before {name}"))),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(start, format!("expected {name}")));
        }
        *slot = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{name} out of range")))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(Error::format(3, format!("zero-sized image {width}x{height}")));
    }
    if maxval != 255 {
        return Err(Error::format(pos, format!("unsupported maxval {maxval}, only 255 is supported")));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::format(pos, "missing whitespace after maxval")),
    }
    let payload = &bytes[pos..];
    let expected = width
        .checked_mul(height)
        .ok_or_else(|| Error::format(3, "image dimensions overflow"))?;
    if payload.len() < expected {
        return Err(Error::format(
            pos + payload.len(),
            format!("truncated pixel data: {} of {expected} bytes", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(Error::format(
            pos + expected,
            format!("{} bytes after pixel data", payload.len() - expected),
        ));
    }
    let pixels = payload.iter().map(|&p| f64::from(p) / 255.0).collect();
    Image::new(width, height, pixels)
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Image> {
    parse_pgm(&fs::read(path)?)
}

/// Encodes an image as P5; pixel values are rounded to the nearest 1/255.
pub fn encode_pgm(image: &Image) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.pixels().iter().map(|&p| (p * 255.0).round().clamp(0.0, 255.0) as u8));
    out
}

pub fn write_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_pgm(image))?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    Gallery,
    Probe,
    Train,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Gallery => "gallery",
            Split::Probe => "probe",
            Split::Train => "train",
        })
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gallery" => Ok(Split::Gallery),
            "probe" => Ok(Split::Probe),
            "train" => Ok(Split::Train),
            _ => Err(Error::param(format!("unknown split tag `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub identity: String,
    pub path: PathBuf,
    /// Entries without a tag count as gallery images.
    pub split: Option<Split>,
}

impl ManifestEntry {
    pub fn split_or_gallery(&self) -> Split {
        self.split.unwrap_or(Split::Gallery)
    }

    /// Gallery and train images are used to build training pairs.
    pub fn is_training(&self) -> bool {
        matches!(self.split_or_gallery(), Split::Gallery | Split::Train)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Parses `<identity>\t<path>[\t<split>]` lines. Relative paths are
    /// resolved against `base`. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut offset = 0;
        for line in text.lines() {
            let at = offset;
            offset += line.len() + 1;
            let trimmed = line.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if !(2..=3).contains(&fields.len()) {
                return Err(Error::format(at, format!("expected 2 or 3 tab-separated fields in `{trimmed}`")));
            }
            if fields[0].is_empty() {
                return Err(Error::format(at, "empty identity"));
            }
            let split = match fields.get(2) {
                Some(tag) => Some(tag.parse().map_err(|_| Error::format(at, format!("unknown split tag `{tag}`")))?),
                None => None,
            };
            let path = Path::new(fields[1]);
            entries.push(ManifestEntry {
                identity: fields[0].to_string(),
                path: if path.is_absolute() { path.to_path_buf() } else { base.join(path) },
                split,
            });
        }
        Ok(DatasetManifest { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        DatasetManifest::parse(&text, base)
    }

    /// Writes paths relative to `base` when possible.
    pub fn to_text(&self, base: &Path) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let path = e.path.strip_prefix(base).unwrap_or(&e.path);
            out.push_str(&e.identity);
            out.push('\t');
            out.push_str(&path.to_string_lossy());
            if let Some(split) = e.split {
                out.push('\t');
                out.push_str(&split.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn with_split(&self, split: Split) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| e.split_or_gallery() == split).collect()
    }

    pub fn training(&self) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| e.is_training()).collect()
    }
}

/// Picks `gallery_per_id` gallery images per identity at random and tags
/// the rest as probes. Output keeps the input order.
pub fn split_dataset(entries: &[ManifestEntry], gallery_per_id: usize, seed: u64) -> Result<DatasetManifest> {
    let mut order: Vec<&str> = Vec::new();
    let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, e) in entries.iter().enumerate() {
        members
            .entry(e.identity.as_str())
            .or_insert_with(|| {
                order.push(e.identity.as_str());
                Vec::new()
            })
            .push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tags = vec![Split::Probe; entries.len()];
    for id in order {
        let idx = &members[id];
        if idx.len() <= gallery_per_id {
            return Err(Error::Capacity(format!(
                "identity `{id}` has {} images, needs more than {gallery_per_id}",
                idx.len()
            )));
        }
        for k in index::sample(&mut rng, idx.len(), gallery_per_id) {
            tags[idx[k]] = Split::Gallery;
        }
    }
    Ok(DatasetManifest {
        entries: entries
            .iter()
            .zip(tags)
            .map(|(e, split)| ManifestEntry {
                split: Some(split),
                ..e.clone()
            })
            .collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub num_identities: usize,
    pub images_per_identity: usize,
    /// Side of the square images.
    pub image_size: usize,
    /// Standard deviation of the per-pixel Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_identities == 0 || self.images_per_identity == 0 || self.image_size == 0 {
            return Err(Error::param("synthetic dataset counts and size must be at least 1"));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::param(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        Ok(())
    }
}

struct Grating {
    frequency: f64,
    orientation: f64,
    phase: f64,
}

struct Identity {
    gratings: [Grating; 3],
    blob_x: f64,
    blob_y: f64,
}

const GRATING_AMPLITUDE: f64 = 0.12;
const BLOB_AMPLITUDE: f64 = 0.35;
const BACKGROUND: f64 = 0.3;

fn draw_identity(rng: &mut ChaCha8Rng, size: f64) -> Identity {
    let mut grating = || Grating {
        frequency: rng.random_range(0.04..0.2),
        orientation: rng.random_range(0.0..PI),
        phase: rng.random_range(0.0..2.0 * PI),
    };
    let gratings = [grating(), grating(), grating()];
    Identity {
        gratings,
        blob_x: rng.random_range(0.25..0.75) * size,
        blob_y: rng.random_range(0.25..0.75) * size,
    }
}

fn base_pattern(id: &Identity, size: usize) -> Vec<f64> {
    let sigma = size as f64 / 8.0;
    let mut out = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let (xf, yf) = (x as f64, y as f64);
            let mut v = BACKGROUND;
            for g in &id.gratings {
                let along = xf * g.orientation.cos() + yf * g.orientation.sin();
                v += GRATING_AMPLITUDE * (2.0 * PI * g.frequency * along + g.phase).cos();
            }
            let d2 = (xf - id.blob_x).powi(2) + (yf - id.blob_y).powi(2);
            v += BLOB_AMPLITUDE * (-d2 / (2.0 * sigma * sigma)).exp();
            out.push(v);
        }
    }
    out
}

/// Identity label of synthetic identity `i`.
pub fn synthetic_identity(i: usize) -> String {
    format!("id{i:03}")
}

/// Each identity is three oriented sinusoidal gratings plus a Gaussian blob,
/// all with identity-specific random parameters; each image adds Gaussian
/// pixel noise, clamps to `[0, 1]` and quantizes to 8 bits so the images
/// survive a PGM round trip unchanged.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Vec<(String, Image)>> {
    spec.validate()?;
    let size = spec.image_size;
    let streams_per_id = spec.images_per_identity as u64 + 1;
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::param(e.to_string()))?;
    let mut out = Vec::with_capacity(spec.num_identities * spec.images_per_identity);
    for i in 0..spec.num_identities {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64 * streams_per_id);
        let base = base_pattern(&draw_identity(&mut rng, size as f64), size);
        for k in 0..spec.images_per_identity {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64 * streams_per_id + 1 + k as u64);
            let pixels = base
                .iter()
                .map(|&b| {
                    let n = if spec.noise_sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                    ((b + n).clamp(0.0, 1.0) * 255.0).round() / 255.0
                })
                .collect();
            out.push((synthetic_identity(i), Image::new(size, size, pixels)?));
        }
    }
    Ok(out)
}

/// Name of the manifest written next to a materialized dataset.
pub const MANIFEST_FILE: &str = "manifest.tsv";

/// Writes every image as `<identity>_<k>.pgm` under `dir` plus a manifest
/// with split tags. When identities have no more than `gallery_per_id`
/// images, every image is tagged gallery.
pub fn materialize_synthetic(spec: &SyntheticSpec, dir: &Path, gallery_per_id: usize) -> Result<DatasetManifest> {
    let images = generate_synthetic(spec)?;
    fs::create_dir_all(dir)?;
    let mut entries = Vec::with_capacity(images.len());
    for (n, (identity, image)) in images.iter().enumerate() {
        let name = format!("{identity}_{}.pgm", n % spec.images_per_identity);
        write_pgm(image, dir.join(&name))?;
        entries.push(ManifestEntry {
            identity: identity.clone(),
            path: dir.join(name),
            split: None,
        });
    }
    let manifest = if spec.images_per_identity > gallery_per_id {
        split_dataset(&entries, gallery_per_id, spec.seed)?
    } else {
        DatasetManifest {
            entries: entries
                .into_iter()
                .map(|e| ManifestEntry { split: Some(Split::Gallery), ..e })
                .collect(),
        }
    };
    fs::write(dir.join(MANIFEST_FILE), manifest.to_text(dir))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn parses_two_by_two() {
        let mut bytes = b"P5\n2 2\n255\n".to_vec();
        bytes.extend([0, 255, 128, 64]);
        let img = parse_pgm(&bytes).unwrap();
        assert_eq!((img.width(), img.height()), (2, 2));
        assert_eq!(img.pixels(), &[0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn header_comments_allowed() {
        let mut bytes = b"P5 # made by hand\n# another\n1 1\n255\n".to_vec();
        bytes.push(51);
        assert_eq!(parse_pgm(&bytes).unwrap().pixels(), &[0.2]);
    }

    #[test]
    fn rejects_bad_files() {
        let cases: Vec<(Vec<u8>, usize)> = vec![
            (b"P2\n1 1\n255\n0\n".to_vec(), 0),
            (b"P5\n2 2\n65535\n".to_vec(), 12),
            (b"P5\n2 2\n255\n\x01\x02\x03".to_vec(), 14),
            (b"P5\n1 1\n255\n\x01\x02".to_vec(), 12),
            (b"P5\n1 x\n255\n\x01".to_vec(), 5),
            (b"P5\n1".to_vec(), 4),
            (b"P5\n0 1\n255\n".to_vec(), 3),
        ];
        for (bytes, offset) in cases {
            match parse_pgm(&bytes) {
                Err(Error::Format { offset: got, .. }) => assert_eq!(got, offset, "{bytes:?}"),
                other => panic!("{bytes:?}: {other:?}"),
            }
        }
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1usize..12, h in 1usize..12, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pixels = (0..w * h).map(|_| rng.random_range(0..=255u8) as f64 / 255.0).collect();
            let img = Image::new(w, h, pixels).unwrap();
            let back = parse_pgm(&encode_pgm(&img)).unwrap();
            prop_assert_eq!(back, img);
        }
    }

    #[test]
    fn noiseless_identities_repeat() {
        let spec = SyntheticSpec { num_identities: 3, images_per_identity: 3, image_size: 16, noise_sigma: 0.0, seed: 1 };
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.len(), 9);
        for id in data.chunks(3) {
            assert!(id.iter().all(|(name, img)| *name == id[0].0 && *img == id[0].1));
        }
        assert_ne!(data[0].1, data[3].1);
    }

    #[test]
    fn generator_is_seeded() {
        let spec = SyntheticSpec { num_identities: 4, images_per_identity: 2, image_size: 12, noise_sigma: 0.05, seed: 7 };
        assert_eq!(generate_synthetic(&spec).unwrap(), generate_synthetic(&spec).unwrap());
        let other = SyntheticSpec { seed: 8, ..spec.clone() };
        assert_ne!(generate_synthetic(&spec).unwrap(), generate_synthetic(&other).unwrap());
        assert!(SyntheticSpec { noise_sigma: -1.0, ..spec }.validate().is_err());
    }

    fn entries(ids: usize, per: usize) -> Vec<ManifestEntry> {
        (0..ids)
            .flat_map(|i| {
                (0..per).map(move |k| ManifestEntry {
                    identity: format!("p{i}"),
                    path: PathBuf::from(format!("p{i}_{k}.pgm")),
                    split: None,
                })
            })
            .collect()
    }

    #[test]
    fn split_leaves_one_probe() {
        let e = entries(5, 3);
        let m = split_dataset(&e, 2, 3).unwrap();
        assert_eq!(m.with_split(Split::Probe).len(), 5);
        assert_eq!(m.with_split(Split::Gallery).len(), 10);
        for i in 0..5 {
            let probes = m.entries.iter().filter(|x| x.identity == format!("p{i}") && x.split == Some(Split::Probe));
            assert_eq!(probes.count(), 1);
        }
        assert_eq!(m, split_dataset(&e, 2, 3).unwrap());
        let paths: Vec<_> = m.entries.iter().map(|x| x.path.clone()).collect();
        assert_eq!(paths, e.iter().map(|x| x.path.clone()).collect::<Vec<_>>());
    }

    #[test]
    fn split_needs_a_probe_left() {
        match split_dataset(&entries(2, 3), 3, 0) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("p0")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_text_round_trip() {
        let base = Path::new("/data/set");
        let m = DatasetManifest {
            entries: vec![
                ManifestEntry { identity: "a".into(), path: base.join("a0.pgm"), split: Some(Split::Gallery) },
                ManifestEntry { identity: "b".into(), path: base.join("b0.pgm"), split: None },
            ],
        };
        let text = m.to_text(base);
        assert_eq!(text, "a\ta0.pgm\tgallery\nb\tb0.pgm\n");
        assert_eq!(DatasetManifest::parse(&text, base).unwrap(), m);
        assert!(DatasetManifest::parse("a\tb\tc\td\n", base).is_err());
        assert!(DatasetManifest::parse("a\tx.pgm\tlater\n", base).is_err());
        assert_eq!(DatasetManifest::parse("# c\n\n", base).unwrap().entries.len(), 0);
    }
}
