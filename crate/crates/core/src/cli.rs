//! Command-line front end and the manifest-level pipeline it drives.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::boosting::{
    cost_estimate, train_ab_with, train_pab_with, BoostConfig, EnsembleModel, Phase, TrainOptions, TrainOutcome,
};
use crate::config::{parse_real, RunConfig};
use crate::dataio::{load_pgm, materialize_synthetic, DatasetManifest, ManifestEntry, Split, SyntheticSpec};
use crate::error::{Error, Result};
use crate::gabor::{extract_features, extract_selected, make_bank, FeatureLayout, GaborBankConfig, GaborKernel};
use crate::model::{read_model, write_model, write_trajectory};
use crate::pairs::{available_pairs, build_pairs, read_training_set, write_training_set, GallerySample, TrainingSet};
use crate::recognizer::{evaluate, GalleryIndex, Probe, RecognitionReport};

/// Feature counts reported by `eval` and `bench`.
pub const DIM_GRID: [usize; 10] = [20, 40, 60, 80, 100, 120, 140, 160, 180, 200];

/// Serial round counts compared by `bench`.
pub const S_GRID: [usize; 4] = [50, 70, 100, 150];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Plain AdaBoost, no redundancy filter.
    Ab,
    /// AdaBoost with the mutual-information filter.
    AbMi,
    /// Parallel AdaBoost with the mutual-information filter.
    PabMi,
}

#[derive(Debug, Parser)]
#[command(name = "gaborboost", version, about = "Boosted Gabor wavelet selection for face recognition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic face-like dataset and its manifest.
    Synth(SynthArgs),
    /// Build intra/extra-person difference pairs from a manifest.
    Pairs(PairsArgs),
    /// Select wavelets by boosting and write a model.
    Train(TrainArgs),
    /// Rank-1 recognition accuracy of a model on a manifest.
    Eval(EvalArgs),
    /// Compare AdaBoost with Parallel AdaBoost for several serial round counts.
    Bench(BenchArgs),
    /// List the selected wavelets of a model.
    ShowSelected(ShowArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 20)]
    pub ids: usize,
    #[arg(long, default_value_t = 3)]
    pub per_id: usize,
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    /// Pixel noise standard deviation.
    #[arg(long, default_value_t = 0.05)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Gallery images per identity; the rest become probes.
    #[arg(long, default_value_t = 2)]
    pub gallery_per_id: usize,
    #[arg(long)]
    pub out: PathBuf,
}

/// Settings shared by every command that touches the filter bank or the
/// booster. Flags override the config file.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub f_max: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub scales: Option<usize>,
    #[arg(long)]
    pub orientations: Option<usize>,
    #[arg(long)]
    pub kernel_radius: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
    /// Total boosting rounds.
    #[arg(long = "T", alias = "rounds")]
    pub total_rounds: Option<usize>,
    /// Serial rounds before the parallel phase.
    #[arg(long = "S", alias = "serial-rounds")]
    pub serial_rounds: Option<usize>,
    /// Redundancy threshold in bits, or `inf`.
    #[arg(long, value_parser = parse_real_arg)]
    pub delta_mi: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
}

fn parse_real_arg(s: &str) -> std::result::Result<f64, String> {
    parse_real(s).map_err(|e| e.to_string())
}

#[derive(Debug, Args)]
pub struct PairSizeArgs {
    /// Intra-person pairs; defaults to all of them.
    #[arg(long)]
    pub num_intra: Option<usize>,
    /// Extra-person pairs; defaults to eight per intra pair when available.
    #[arg(long)]
    pub num_extra: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PairsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[command(flatten)]
    pub sizes: PairSizeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, required_unless_present = "pairs")]
    pub manifest: Option<PathBuf>,
    /// Train on a saved pair set instead of a manifest.
    #[arg(long, conflicts_with = "manifest")]
    pub pairs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "pab-mi")]
    pub mode: Mode,
    #[command(flatten)]
    pub sizes: PairSizeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Model output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the serial-phase weight history.
    #[arg(long)]
    pub trajectory_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Comma-separated feature counts; defaults to 20, 40, ... up to the model size.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Report path instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-probe decisions as CSV.
    #[arg(long)]
    pub per_probe: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Serial round counts to compare.
    #[arg(long = "S-list", value_delimiter = ',', default_values_t = S_GRID)]
    pub s_list: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[command(flatten)]
    pub sizes: PairSizeArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShowArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let bank = &mut cfg.bank;
        if let Some(v) = self.f_max {
            bank.f_max = v;
        }
        if let Some(v) = self.gamma {
            bank.gamma = v;
        }
        if let Some(v) = self.eta {
            bank.eta = v;
        }
        if let Some(v) = self.scales {
            bank.num_scales = v;
        }
        if let Some(v) = self.orientations {
            bank.num_orientations = v;
        }
        if let Some(v) = self.kernel_radius {
            bank.kernel_radius = v;
        }
        if let Some(v) = self.step {
            bank.downsample_step = v;
        }
        let boost = &mut cfg.boost;
        if let Some(v) = self.total_rounds {
            boost.total_rounds = v;
        }
        if let Some(v) = self.serial_rounds {
            boost.serial_rounds = v;
        }
        if let Some(v) = self.delta_mi {
            boost.mi_threshold = v;
        }
        if let Some(v) = self.seed {
            boost.seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        // a lone --T below the default serial count means plain serial training
        if self.serial_rounds.is_none() && cfg.boost.serial_rounds > cfg.boost.total_rounds {
            cfg.boost.serial_rounds = cfg.boost.total_rounds;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Dense features of every listed image.
pub fn extract_entries(entries: &[&ManifestEntry], bank: &[GaborKernel], step: usize) -> Result<Vec<GallerySample>> {
    entries
        .iter()
        .map(|e| {
            let image = load_pgm(&e.path)?;
            Ok(GallerySample {
                identity: e.identity.clone(),
                image_ref: e.path.display().to_string(),
                features: extract_features(&image, bank, step)?,
            })
        })
        .collect()
}

/// Requested pair counts, with the defaults filled in from what the gallery offers.
pub fn pair_counts(gallery: &[GallerySample], num_intra: Option<usize>, num_extra: Option<usize>) -> (usize, usize) {
    let (intra, extra) = available_pairs(gallery);
    let num_intra = num_intra.unwrap_or(intra);
    (num_intra, num_extra.unwrap_or((8 * num_intra).min(extra)))
}

/// Difference pairs from the gallery and train images of a manifest.
pub fn training_set_from_manifest(
    manifest: &DatasetManifest,
    bank_cfg: &GaborBankConfig,
    num_intra: Option<usize>,
    num_extra: Option<usize>,
    seed: u64,
) -> Result<TrainingSet> {
    bank_cfg.validate()?;
    let bank = make_bank(bank_cfg)?;
    let entries = manifest.training();
    if entries.is_empty() {
        return Err(Error::Capacity("manifest has no gallery or train images".into()));
    }
    let gallery = extract_entries(&entries, &bank, bank_cfg.downsample_step)?;
    let (ni, ne) = pair_counts(&gallery, num_intra, num_extra);
    build_pairs(&gallery, ni, ne, seed)
}

/// Trains in the given mode. AB ignores `serial_rounds` and the filter
/// threshold; AB+MI ignores `serial_rounds`.
pub fn train_mode(
    set: &TrainingSet,
    cfg: &BoostConfig,
    mode: Mode,
    workers: usize,
    record_trajectory: bool,
) -> Result<TrainOutcome> {
    let opts = TrainOptions {
        workers,
        record_trajectory,
    };
    match mode {
        Mode::Ab => train_ab_with(
            set,
            &BoostConfig {
                mi_threshold: f64::INFINITY,
                ..cfg.clone()
            },
            &opts,
        ),
        Mode::AbMi => train_ab_with(set, cfg, &opts),
        Mode::PabMi => train_pab_with(set, cfg, &opts),
    }
}

/// Default feature grid cut at the model size.
pub fn default_dims(rounds: usize) -> Vec<usize> {
    let dims: Vec<usize> = DIM_GRID.iter().copied().filter(|&d| d <= rounds).collect();
    if dims.is_empty() {
        vec![rounds]
    } else {
        dims
    }
}

fn check_dims(dims: &[usize], rounds: usize) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::param("no feature counts given"));
    }
    match dims.iter().find(|&&d| d == 0 || d > rounds) {
        Some(d) => Err(Error::param(format!("feature count {d} outside 1..={rounds} (model rounds)"))),
        None => Ok(()),
    }
}

fn selected_vectors(
    entries: &[&ManifestEntry],
    bank: &[GaborKernel],
    bank_cfg: &GaborBankConfig,
    layout: &FeatureLayout,
    selection: &[usize],
) -> Result<Vec<Vec<f64>>> {
    entries
        .iter()
        .map(|e| {
            let image = load_pgm(&e.path)?;
            let found = FeatureLayout::for_image(bank_cfg, image.width(), image.height())?;
            if found != *layout {
                return Err(Error::LayoutMismatch {
                    expected: layout.to_string(),
                    found: format!("{found} ({})", e.path.display()),
                });
            }
            extract_selected(&image, bank, bank_cfg.downsample_step, selection)
        })
        .collect()
}

/// Gallery-tagged images form the gallery, probe-tagged images are
/// identified against it. Without probe tags the gallery probes itself.
pub fn evaluate_model(
    model: &EnsembleModel,
    manifest: &DatasetManifest,
    dims: &[usize],
    workers: usize,
) -> Result<RecognitionReport> {
    check_dims(dims, model.rounds.len())?;
    let bank_cfg = model
        .bank
        .as_ref()
        .ok_or_else(|| Error::param("model does not record its filter bank"))?;
    let layout = model
        .layout
        .ok_or_else(|| Error::param("model does not record its feature layout"))?;
    let expected = FeatureLayout::for_image(bank_cfg, layout.width, layout.height)?;
    if expected != layout {
        return Err(Error::LayoutMismatch {
            expected: layout.to_string(),
            found: expected.to_string(),
        });
    }
    let bank = make_bank(bank_cfg)?;
    let selection = model.selected_features();

    let gallery = manifest.with_split(Split::Gallery);
    if gallery.is_empty() {
        return Err(Error::Capacity("manifest has no gallery images".into()));
    }
    let mut probes = manifest.with_split(Split::Probe);
    if probes.is_empty() {
        probes = gallery.clone();
    }
    let gallery_vectors = selected_vectors(&gallery, &bank, bank_cfg, &layout, &selection)?;
    let probe_vectors = selected_vectors(&probes, &bank, bank_cfg, &layout, &selection)?;
    let index = GalleryIndex::new(
        gallery
            .iter()
            .zip(gallery_vectors)
            .map(|(e, v)| (e.identity.clone(), v))
            .collect(),
        selection,
    )?;
    let probes: Vec<Probe> = probes
        .iter()
        .zip(probe_vectors)
        .map(|(e, v)| Probe {
            id: e.path.display().to_string(),
            identity: e.identity.clone(),
            features: v,
        })
        .collect();
    worker_pool(workers)?.install(|| evaluate(&index, &probes, dims))
}

fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::param("workers must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param(format!("cannot start worker pool: {e}")))
}

/// One benchmark column.
#[derive(Clone, Debug)]
pub struct BenchColumn {
    /// `AB+MI` or `S=<n>`.
    pub name: String,
    pub serial_rounds: usize,
    pub report: RecognitionReport,
    pub serial_time: Duration,
    pub parallel_time: Duration,
    pub cost_units: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub dims: Vec<usize>,
    pub columns: Vec<BenchColumn>,
}

impl BenchReport {
    /// Accuracy per feature count, one column per method.
    pub fn accuracy_table(&self) -> String {
        let mut s = String::from("feature_count");
        for c in &self.columns {
            let _ = write!(s, "\t{}", c.name);
        }
        s.push('\n');
        for &d in &self.dims {
            let _ = write!(s, "{d}");
            for c in &self.columns {
                let _ = write!(s, "\t{:.1}", c.report.accuracy_at(d).unwrap_or(f64::NAN));
            }
            s.push('\n');
        }
        s
    }

    /// Phase wall clock in seconds and idealized cost in round units.
    pub fn timing_table(&self) -> String {
        let mut s = String::from("method\tserial_rounds\tserial_seconds\tparallel_seconds\tserial_units\tparallel_units\n");
        for c in &self.columns {
            let _ = writeln!(
                s,
                "{}\t{}\t{:.6}\t{:.6}\t{}\t{}",
                c.name,
                c.serial_rounds,
                c.serial_time.as_secs_f64(),
                c.parallel_time.as_secs_f64(),
                c.cost_units.0,
                c.cost_units.1
            );
        }
        s
    }
}

/// Trains the AB+MI reference and PAB+MI for every `S` on one training
/// set and evaluates them all on the manifest.
pub fn run_bench(
    set: &TrainingSet,
    manifest: &DatasetManifest,
    bank_cfg: &GaborBankConfig,
    cfg: &BoostConfig,
    s_list: &[usize],
    dims: &[usize],
    workers: usize,
) -> Result<BenchReport> {
    let t = cfg.total_rounds;
    if let Some(s) = s_list.iter().find(|&&s| s == 0 || s > t) {
        return Err(Error::param(format!("serial rounds {s} outside 1..={t}")));
    }
    check_dims(dims, t)?;
    let mut runs = vec![("AB+MI".to_string(), Mode::AbMi, t)];
    runs.extend(s_list.iter().map(|&s| (format!("S={s}"), Mode::PabMi, s)));
    let mut columns = Vec::with_capacity(runs.len());
    for (name, mode, s) in runs {
        let run_cfg = BoostConfig {
            serial_rounds: s,
            ..cfg.clone()
        };
        let mut outcome = train_mode(set, &run_cfg, mode, workers, false)?;
        outcome.model.bank = Some(bank_cfg.clone());
        let report = evaluate_model(&outcome.model, manifest, dims, workers)?;
        columns.push(BenchColumn {
            name,
            serial_rounds: s,
            report,
            serial_time: outcome.timing.serial,
            parallel_time: outcome.timing.parallel,
            cost_units: cost_estimate(&run_cfg, workers)?,
        });
    }
    Ok(BenchReport {
        dims: dims.to_vec(),
        columns,
    })
}

/// Per-round training log.
pub fn format_log(outcome: &TrainOutcome) -> String {
    let mut s = String::from("round\tphase\tfeature\terror\tcoefficient\tmax_mi\n");
    for r in &outcome.log {
        let phase = match r.phase {
            Phase::Serial => "serial",
            Phase::Parallel => "parallel",
        };
        let mi = r.max_mi.map_or("-".to_string(), |m| format!("{m:.6}"));
        let _ = writeln!(
            s,
            "{}\t{phase}\t{}\t{:.6}\t{:.6}\t{mi}",
            r.round, r.classifier.feature_index, r.error, r.coefficient
        );
    }
    s
}

/// `round, u, v, x, y, c_n` for every round of a model.
pub fn format_selected(model: &EnsembleModel) -> Result<String> {
    let layout = model
        .layout
        .ok_or_else(|| Error::param("model does not record its feature layout"))?;
    let mut s = String::from("round\tu\tv\tx\ty\tcoefficient\n");
    for (n, r) in model.rounds.iter().enumerate() {
        let loc = layout.decode(r.classifier.feature_index)?;
        let _ = writeln!(s, "{}\t{}\t{}\t{}\t{}\t{:.6}", n + 1, loc.u, loc.v, loc.x, loc.y, r.coefficient);
    }
    Ok(s)
}

fn load_model(path: &Path) -> Result<EnsembleModel> {
    read_model(BufReader::new(File::open(path)?))
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    f(&mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    let spec = SyntheticSpec {
        num_identities: a.ids,
        images_per_identity: a.per_id,
        image_size: a.size,
        noise_sigma: a.sigma,
        seed: a.seed,
    };
    let manifest = materialize_synthetic(&spec, &a.out, a.gallery_per_id)?;
    writeln!(out, "wrote {} images to {}", manifest.entries.len(), a.out.display())?;
    Ok(())
}

fn cmd_pairs(a: &PairsArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.run.resolve()?;
    let manifest = DatasetManifest::load(&a.manifest)?;
    let set = training_set_from_manifest(&manifest, &cfg.bank, a.sizes.num_intra, a.sizes.num_extra, cfg.boost.seed)?;
    write_file(&a.out, |w| write_training_set(&set, w))?;
    writeln!(
        out,
        "intra\t{}\nextra\t{}\ndim\t{}",
        set.intra_count(),
        set.extra_count(),
        set.dim()
    )?;
    Ok(())
}

fn cmd_train(a: &TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = a.run.resolve()?;
    let set = match (&a.manifest, &a.pairs) {
        (_, Some(p)) => read_training_set(BufReader::new(File::open(p)?))?,
        (Some(m), None) => {
            let manifest = DatasetManifest::load(m)?;
            training_set_from_manifest(&manifest, &cfg.bank, a.sizes.num_intra, a.sizes.num_extra, cfg.boost.seed)?
        }
        (None, None) => return Err(Error::param("either --manifest or --pairs is required")),
    };
    let mut outcome = train_mode(&set, &cfg.boost, a.mode, cfg.workers, a.trajectory_out.is_some())?;
    if let Some(layout) = set.layout {
        if FeatureLayout::for_image(&cfg.bank, layout.width, layout.height)? == layout {
            outcome.model.bank = Some(cfg.bank.clone());
        }
    }
    write_file(&a.out, |w| write_model(&outcome.model, w))?;
    if let (Some(path), Some(traj)) = (&a.trajectory_out, &outcome.trajectory) {
        write_file(path, |w| write_trajectory(traj, w))?;
    }
    out.write_all(format_log(&outcome).as_bytes())?;
    writeln!(
        err,
        "serial phase {:.3} s, parallel phase {:.3} s",
        outcome.timing.serial.as_secs_f64(),
        outcome.timing.parallel.as_secs_f64()
    )?;
    Ok(())
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let manifest = DatasetManifest::load(&a.manifest)?;
    let dims = a.dims.clone().unwrap_or_else(|| default_dims(model.rounds.len()));
    let report = evaluate_model(&model, &manifest, &dims, a.workers)?;
    emit(&report.to_tsv(), a.out.as_deref(), out)?;
    if let Some(p) = &a.per_probe {
        fs::write(p, report.decisions_csv())?;
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.run.resolve()?;
    let manifest = DatasetManifest::load(&a.manifest)?;
    let set = training_set_from_manifest(&manifest, &cfg.bank, a.sizes.num_intra, a.sizes.num_extra, cfg.boost.seed)?;
    let dims = a.dims.clone().unwrap_or_else(|| default_dims(cfg.boost.total_rounds));
    let report = run_bench(&set, &manifest, &cfg.bank, &cfg.boost, &a.s_list, &dims, cfg.workers)?;
    let text = format!("{}\n{}", report.accuracy_table(), report.timing_table());
    emit(&text, a.out.as_deref(), out)
}

fn cmd_show(a: &ShowArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    emit(&format_selected(&model)?, a.out.as_deref(), out)
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a, out),
        Command::Pairs(a) => cmd_pairs(a, out),
        Command::Train(a) => cmd_train(a, out, err),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::ShowSelected(a) => cmd_show(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        <Mode as ValueEnum>::from_str(s, true).map_err(|_| Error::param(format!("unknown mode `{s}`")))
    }
}
