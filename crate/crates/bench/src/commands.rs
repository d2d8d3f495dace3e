//! The pipeline stages behind each subcommand.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use speckle_core::dae::{train_on_images, Checkpoint, Network, NetworkConfig};
use speckle_core::imaging::{
    build_manifest, generate_phantom_corpus, load_resized, save_png, DatasetManifest, GrayImage,
    Split, WORKING_SIZE,
};
use speckle_core::metrics::{score_pair, MetricsRow, PairScores};
use speckle_core::noise::{add_speckle, NoiseSpec};
use speckle_core::rng::derive_seed;

use crate::config::{BenchConfig, DataSource};
use crate::error::{BenchError, Result};
use crate::method::Method;
use crate::report;

const BENCH_NOISE_STREAM: u64 = 0xB3_0001;
const PANEL_NOISE_STREAM: u64 = 0xB3_0002;

/// File layout under the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunPaths {
    pub root: PathBuf,
}

impl RunPaths {
    pub fn new(root: &Path) -> Self {
        Self {
            root: root.to_path_buf(),
        }
    }
    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.tsv")
    }
    pub fn phantoms(&self) -> PathBuf {
        self.root.join("phantoms")
    }
    pub fn checkpoint(&self, use_skip: bool) -> PathBuf {
        self.root
            .join("checkpoints")
            .join(format!("{}.ckpt", variant_name(use_skip)))
    }
    pub fn history(&self, use_skip: bool) -> PathBuf {
        self.root
            .join(format!("history_{}.csv", variant_name(use_skip)))
    }
    pub fn results(&self) -> PathBuf {
        self.root.join("results.csv")
    }
    pub fn markdown(&self) -> PathBuf {
        self.root.join("results.md")
    }
    pub fn curves(&self) -> PathBuf {
        self.root.join("curves.tsv")
    }
    pub fn panel(&self, image_id: &str, variance: f64) -> PathBuf {
        self.root
            .join("panels")
            .join(format!("panel_{image_id}_var{variance}.png"))
    }
}

fn variant_name(use_skip: bool) -> &'static str {
    if use_skip {
        Method::AeSkip.name()
    } else {
        Method::AeNoSkip.name()
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| BenchError::io(path, e))
}

fn read_manifest(paths: &RunPaths) -> Result<DatasetManifest> {
    let path = paths.manifest();
    if !path.is_file() {
        return Err(BenchError::Data(format!(
            "manifest {} not found; run `prepare` first",
            path.display()
        )));
    }
    Ok(DatasetManifest::read(&path)?)
}

fn load_split(manifest: &DatasetManifest, split: Split) -> Result<Vec<GrayImage<f32>>> {
    manifest
        .split(split)
        .into_iter()
        .map(|e| Ok(load_resized(&e.path, WORKING_SIZE)?))
        .collect()
}

/// Writes the dataset manifest, generating phantoms first if configured.
pub fn prepare(cfg: &BenchConfig) -> Result<PathBuf> {
    let paths = RunPaths::new(&cfg.out_dir);
    let root = match &cfg.data {
        DataSource::Phantoms(n) => {
            let dir = paths.phantoms();
            if dir.exists() {
                std::fs::remove_dir_all(&dir).map_err(|e| BenchError::io(&dir, e))?;
            }
            generate_phantom_corpus(*n, cfg.seed, &dir)?;
            dir
        }
        DataSource::Directory(dir) => {
            if !dir.is_dir() {
                return Err(BenchError::Data(format!(
                    "dataset root {} does not exist",
                    dir.display()
                )));
            }
            dir.clone()
        }
    };
    let manifest = build_manifest(&root, cfg.seed)?;
    let out = paths.manifest();
    write_file(&out, manifest.to_text().as_bytes())?;
    Ok(out)
}

/// Trains both autoencoder variants from the shared seed. Returns the
/// checkpoint paths, no-skip first.
pub fn train(cfg: &BenchConfig) -> Result<Vec<PathBuf>> {
    let paths = RunPaths::new(&cfg.out_dir);
    let manifest = read_manifest(&paths)?;
    let train_set = load_split(&manifest, Split::Train)?;
    let val_set = load_split(&manifest, Split::Val)?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(BenchError::Data(
            "manifest needs non-empty train and val splits".into(),
        ));
    }
    let mut written = Vec::new();
    for use_skip in [false, true] {
        let mut net =
            Network::<f32>::new(NetworkConfig::new(use_skip, cfg.base_channels), cfg.seed)?;
        let outcome = train_on_images(&mut net, &train_set, &val_set, &cfg.train)?;
        let ckpt = paths.checkpoint(use_skip);
        write_file(&ckpt, &outcome.checkpoint.to_bytes())?;
        write_file(
            &paths.history(use_skip),
            report::history_csv(&outcome.history).as_bytes(),
        )?;
        written.push(ckpt);
    }
    Ok(written)
}

/// Loaded networks keyed by `use_skip`.
pub struct Denoisers {
    nets: BTreeMap<bool, Network<f32>>,
}

impl Denoisers {
    /// Loads the checkpoints needed by `methods`.
    pub fn load(paths: &RunPaths, methods: &[Method]) -> Result<Self> {
        let mut nets = BTreeMap::new();
        for use_skip in methods.iter().filter_map(|m| m.autoencoder()) {
            let path = paths.checkpoint(use_skip);
            if !path.is_file() {
                return Err(BenchError::Data(format!(
                    "checkpoint {} not found; run `train` first",
                    path.display()
                )));
            }
            let ckpt = Checkpoint::<f32>::load(&path)?;
            if ckpt.config.use_skip != use_skip {
                return Err(BenchError::Data(format!(
                    "{} holds the wrong variant",
                    path.display()
                )));
            }
            nets.insert(use_skip, Network::from_checkpoint(&ckpt)?);
        }
        Ok(Self { nets })
    }

    /// Runs one method on a noisy image.
    pub fn apply(
        &self,
        method: Method,
        cfg: &BenchConfig,
        noisy: &GrayImage<f32>,
    ) -> Result<GrayImage<f32>> {
        match (method.filter(), method.autoencoder()) {
            (Some(kind), _) => Ok(cfg.filters.apply(kind, noisy)?),
            (None, Some(skip)) => {
                let net = self
                    .nets
                    .get(&skip)
                    .ok_or_else(|| BenchError::Data(format!("no network loaded for {method}")))?;
                Ok(net.denoise(noisy)?)
            }
            (None, None) => unreachable!("every method is a filter or an autoencoder"),
        }
    }
}

/// Scores every configured method on every clean image at every variance.
/// Rows are ordered by variance, then by the configured method order.
pub fn evaluate(
    cfg: &BenchConfig,
    clean: &[GrayImage<f32>],
    denoisers: &Denoisers,
) -> Result<Vec<MetricsRow>> {
    let mut rows = Vec::with_capacity(cfg.variances.len() * cfg.methods.len());
    for (vi, &variance) in cfg.variances.iter().enumerate() {
        let per_image: Vec<Vec<PairScores>> = clean
            .par_iter()
            .enumerate()
            .map(|(ii, img)| {
                let seed = derive_seed(cfg.seed, &[BENCH_NOISE_STREAM, vi as u64, ii as u64]);
                let noisy = add_speckle(img, NoiseSpec::new(variance, seed)?)?;
                cfg.methods
                    .iter()
                    .map(|&m| Ok(score_pair(img, &denoisers.apply(m, cfg, &noisy)?)?))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for (mi, method) in cfg.methods.iter().enumerate() {
            let scores: Vec<PairScores> = per_image.iter().map(|s| s[mi]).collect();
            rows.push(MetricsRow::from_scores(
                method.name(),
                variance,
                cfg.seed,
                &scores,
            )?);
        }
    }
    Ok(rows)
}

/// Output files of a benchmark run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportBundle {
    pub results: PathBuf,
    pub markdown: PathBuf,
    pub curves: PathBuf,
    pub panel: PathBuf,
}

/// Benchmarks the test split and writes the report bundle.
pub fn bench(cfg: &BenchConfig) -> Result<ReportBundle> {
    let paths = RunPaths::new(&cfg.out_dir);
    let manifest = read_manifest(&paths)?;
    let test_entries = manifest.split(Split::Test);
    if test_entries.is_empty() {
        return Err(BenchError::Data("manifest has an empty test split".into()));
    }
    let clean = load_split(&manifest, Split::Test)?;
    let denoisers = Denoisers::load(&paths, &cfg.methods)?;
    let rows = evaluate(cfg, &clean, &denoisers)?;

    let csv = report::results_csv(&rows);
    write_file(&paths.results(), csv.as_bytes())?;
    write_file(
        &paths.markdown(),
        report::results_markdown(&rows).as_bytes(),
    )?;
    write_file(
        &paths.curves(),
        report::curves(&report::parse_results(&csv)?).as_bytes(),
    )?;

    let panel_id = cfg
        .panel_image
        .clone()
        .unwrap_or_else(|| test_entries[0].id());
    let panel = panel_with(cfg, &manifest, &denoisers, &panel_id, cfg.panel_variance)?;
    Ok(ReportBundle {
        results: paths.results(),
        markdown: paths.markdown(),
        curves: paths.curves(),
        panel,
    })
}

/// Writes a comparison strip for one manifest image: clean, noisy, then
/// each configured method in registry order, separated by 1-pixel white
/// columns.
pub fn panel(cfg: &BenchConfig, image_id: &str, variance: f64) -> Result<PathBuf> {
    let paths = RunPaths::new(&cfg.out_dir);
    let manifest = read_manifest(&paths)?;
    let denoisers = Denoisers::load(&paths, &cfg.methods)?;
    panel_with(cfg, &manifest, &denoisers, image_id, variance)
}

fn panel_with(
    cfg: &BenchConfig,
    manifest: &DatasetManifest,
    denoisers: &Denoisers,
    image_id: &str,
    variance: f64,
) -> Result<PathBuf> {
    let entry = manifest
        .entries
        .iter()
        .find(|e| e.id() == image_id)
        .ok_or_else(|| BenchError::Data(format!("image {image_id:?} is not in the manifest")))?;
    let clean: GrayImage<f32> = load_resized(&entry.path, WORKING_SIZE)?;
    let seed = derive_seed(cfg.seed, &[PANEL_NOISE_STREAM, variance.to_bits()]);
    let noisy = add_speckle(&clean, NoiseSpec::new(variance, seed)?)?;
    let mut tiles = vec![clean, noisy.clone()];
    for m in Method::ALL.into_iter().filter(|m| cfg.methods.contains(m)) {
        tiles.push(denoisers.apply(m, cfg, &noisy)?);
    }
    let strip = tile_strip(&tiles);
    let out = RunPaths::new(&cfg.out_dir).panel(image_id, variance);
    if let Some(dir) = out.parent() {
        std::fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    save_png(&strip, &out)?;
    Ok(out)
}

/// Lays equally sized tiles out left to right with 1-pixel white separators.
pub fn tile_strip(tiles: &[GrayImage<f32>]) -> GrayImage<f32> {
    let (h, w) = tiles[0].dims();
    let width = tiles.len() * w + tiles.len() - 1;
    GrayImage::from_fn(h, width, |y, x| {
        let (tile, col) = (x / (w + 1), x % (w + 1));
        if col == w {
            1.0
        } else {
            tiles[tile].get(y, col)
        }
    })
}

/// Projects a results CSV onto SSIM-versus-variance series.
pub fn curves(results: &Path, out: &Path) -> Result<PathBuf> {
    let text = std::fs::read_to_string(results).map_err(|e| BenchError::io(results, e))?;
    let records = report::parse_results(&text)?;
    write_file(out, report::curves(&records).as_bytes())?;
    Ok(out.to_path_buf())
}
