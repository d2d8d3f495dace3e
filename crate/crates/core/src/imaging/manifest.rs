//! Dataset manifests and the deterministic train/val/test partition.
//!
//! On-disk form, one tab-separated `path class split` entry per line after a
//! seed header:
//!
//! ```text
//! # seed=42
//! data/benign/img_001.png<TAB>benign<TAB>train
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ImagingError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ClassLabel {
    Normal,
    Benign,
    Malignant,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 3] = [
        ClassLabel::Normal,
        ClassLabel::Benign,
        ClassLabel::Malignant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Normal => "normal",
            ClassLabel::Benign => "benign",
            ClassLabel::Malignant => "malignant",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown class label {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub class: ClassLabel,
    pub split: Split,
}

impl ManifestEntry {
    /// File stem, used as the image id in reports.
    pub fn id(&self) -> String {
        self.path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub seed: u64,
    /// Sorted by path.
    pub entries: Vec<ManifestEntry>,
}

/// `(train, val, test)` sizes for `n` entries: val and test get
/// `floor(0.15·n)` each, train takes the remainder.
pub fn split_counts(n: usize) -> (usize, usize, usize) {
    let held_out = n * 15 / 100;
    (n - 2 * held_out, held_out, held_out)
}

fn is_mask(path: &Path) -> bool {
    path.file_stem()
        .map(|s| s.to_string_lossy().contains("_mask"))
        .unwrap_or(false)
}

fn is_png(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("png"))
        .unwrap_or(false)
}

/// Scans `root/{normal,benign,malignant}/*.png` (mask files excluded) and
/// assigns splits.
///
/// Entries are sorted lexicographically by path, then a `seed`-driven
/// shuffle decides which entries land in train, val and test.
pub fn build_manifest(root: &Path, seed: u64) -> Result<DatasetManifest> {
    let mut found: Vec<(PathBuf, ClassLabel)> = Vec::new();
    for class in ClassLabel::ALL {
        let dir = root.join(class.as_str());
        if !dir.is_dir() {
            continue;
        }
        let listing = std::fs::read_dir(&dir).map_err(|source| ImagingError::Io {
            path: dir.clone(),
            source,
        })?;
        for item in listing {
            let item = item.map_err(|source| ImagingError::Io {
                path: dir.clone(),
                source,
            })?;
            let path = item.path();
            if path.is_file() && is_png(&path) && !is_mask(&path) {
                found.push((path, class));
            }
        }
    }
    if found.is_empty() {
        return Err(ImagingError::EmptyCorpus(root.to_path_buf()));
    }
    found.sort();
    Ok(DatasetManifest::partition(found, seed))
}

impl DatasetManifest {
    /// Assigns splits to an already sorted entry list.
    pub fn partition(sorted: Vec<(PathBuf, ClassLabel)>, seed: u64) -> Self {
        let n = sorted.len();
        let (n_train, n_val, _) = split_counts(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut splits = vec![Split::Test; n];
        for (rank, &idx) in order.iter().enumerate() {
            splits[idx] = if rank < n_train {
                Split::Train
            } else if rank < n_train + n_val {
                Split::Val
            } else {
                Split::Test
            };
        }
        let entries = sorted
            .into_iter()
            .zip(splits)
            .map(|((path, class), split)| ManifestEntry { path, class, split })
            .collect();
        Self { seed, entries }
    }

    /// Entries of one split, in manifest order.
    pub fn split(&self, split: Split) -> Vec<&ManifestEntry> {
        self.entries.iter().filter(|e| e.split == split).collect()
    }

    pub fn count(&self, split: Split) -> usize {
        self.entries.iter().filter(|e| e.split == split).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# seed={}\n", self.seed);
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.path.display(), e.class, e.split));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let seed = match lines.next() {
            Some((_, header)) => header
                .strip_prefix("# seed=")
                .and_then(|s| s.trim().parse::<u64>().ok())
                .ok_or_else(|| ImagingError::ManifestParse {
                    line: 1,
                    reason: format!("expected `# seed=<u64>` header, got {header:?}"),
                })?,
            None => {
                return Err(ImagingError::ManifestParse {
                    line: 1,
                    reason: "empty manifest".into(),
                })
            }
        };
        let mut entries = Vec::new();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| ImagingError::ManifestParse {
                line: i + 1,
                reason,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            let [path, class, split] = fields[..] else {
                return Err(bad(format!(
                    "expected 3 tab-separated fields, got {}",
                    fields.len()
                )));
            };
            entries.push(ManifestEntry {
                path: PathBuf::from(path),
                class: class.parse().map_err(bad)?,
                split: split.parse().map_err(bad)?,
            });
        }
        Ok(Self { seed, entries })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|source| ImagingError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ImagingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }
}
