//! Synthetic ultrasound-like phantoms standing in for a real corpus.
//!
//! Each phantom is a tissue background (linear gradient, slow depth banding
//! and a fine band-limited echotexture) with one to three elliptical lesions
//! whose boundaries are blended through a logistic ramp. Lesions carry a
//! weaker texture than the surrounding tissue. Normal-class phantoms get a single small
//! bright inclusion; benign ones dark smooth ellipses; malignant ones dark
//! ellipses with lobulated boundaries.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::Rng;

use super::{save_png, ClassLabel, GrayImage, ImagingError, Result};
use crate::rng;

/// Side length of generated phantoms.
pub const PHANTOM_SIZE: usize = 500;

const TEXTURE_WAVES: usize = 32;

/// Sum of random plane waves with wavelengths between 2.5% and 7% of the
/// image side, normalized to unit variance.
struct Texture {
    waves: Vec<(f64, f64, f64)>,
}

impl Texture {
    fn random(rng: &mut impl Rng) -> Self {
        let waves = (0..TEXTURE_WAVES)
            .map(|_| {
                let k = 2.0 * PI / rng.random_range(0.025..0.07);
                let dir: f64 = rng.random_range(0.0..2.0 * PI);
                let (s, c) = dir.sin_cos();
                (k * c, k * s, rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        Self { waves }
    }

    fn at(&self, v: f64, u: f64) -> f64 {
        let norm = (2.0 / TEXTURE_WAVES as f64).sqrt();
        norm * self
            .waves
            .iter()
            .map(|&(ku, kv, ph)| (ku * u + kv * v + ph).sin())
            .sum::<f64>()
    }
}

struct Lesion {
    cy: f64,
    cx: f64,
    ry: f64,
    rx: f64,
    angle: f64,
    intensity: f64,
    lobes: f64,
    lobe_depth: f64,
    phase: f64,
}

impl Lesion {
    fn random(rng: &mut impl Rng, class: ClassLabel) -> Self {
        let (r_lo, r_hi, bright) = match class {
            ClassLabel::Normal => (0.04, 0.08, true),
            ClassLabel::Benign => (0.08, 0.18, false),
            ClassLabel::Malignant => (0.08, 0.2, false),
        };
        let lobed = class == ClassLabel::Malignant;
        Self {
            cy: rng.random_range(0.3..0.75),
            cx: rng.random_range(0.25..0.75),
            ry: rng.random_range(r_lo..r_hi),
            rx: rng.random_range(r_lo..r_hi) * 1.3,
            angle: rng.random_range(0.0..PI),
            intensity: if bright {
                rng.random_range(0.75..0.95)
            } else {
                rng.random_range(0.05..0.25)
            },
            lobes: if lobed {
                rng.random_range(3..7) as f64
            } else {
                0.0
            },
            lobe_depth: if lobed {
                rng.random_range(0.1..0.25)
            } else {
                0.0
            },
            phase: rng.random_range(0.0..2.0 * PI),
        }
    }

    /// Lesion opacity in `[0, 1]` at normalized coordinates.
    fn weight(&self, v: f64, u: f64) -> f64 {
        let (dy, dx) = (v - self.cy, u - self.cx);
        let (s, c) = self.angle.sin_cos();
        let (a, b) = (c * dx + s * dy, -s * dx + c * dy);
        let r = ((a / self.rx).powi(2) + (b / self.ry).powi(2)).sqrt();
        let theta = b.atan2(a);
        let boundary = 1.0 + self.lobe_depth * (self.lobes * theta + self.phase).sin();
        1.0 / (1.0 + ((r - boundary) / 0.06).exp())
    }
}

/// One `size`×`size` phantom of the given class.
pub fn phantom_image(size: usize, class: ClassLabel, seed: u64) -> GrayImage<f64> {
    let mut rng = rng::stream(seed, &[]);
    let base = rng.random_range(0.4..0.6);
    let grad_amp = rng.random_range(0.05..0.2);
    let grad_dir = rng.random_range(0.0..2.0 * PI);
    let band_amp = rng.random_range(0.03..0.1);
    let band_freq = rng.random_range(1.0..3.0);
    let band_phase = rng.random_range(0.0..2.0 * PI);
    let count = match class {
        ClassLabel::Normal => 1,
        _ => rng.random_range(1..=3),
    };
    let lesions: Vec<Lesion> = (0..count)
        .map(|_| Lesion::random(&mut rng, class))
        .collect();
    let texture = Texture::random(&mut rng);
    let texture_amp = rng.random_range(0.02..0.04);

    let (gs, gc) = grad_dir.sin_cos();
    let step = 1.0 / size as f64;
    GrayImage::from_fn(size, size, |y, x| {
        let v = (y as f64 + 0.5) * step;
        let u = (x as f64 + 0.5) * step;
        let mut p = base
            + grad_amp * (gc * (u - 0.5) + gs * (v - 0.5))
            + band_amp * (2.0 * PI * (band_freq * v) + band_phase).sin();
        let mut grain = 1.0;
        for l in &lesions {
            let w = l.weight(v, u);
            p = p * (1.0 - w) + l.intensity * w;
            grain *= 1.0 - 0.6 * w;
        }
        p + texture_amp * grain * texture.at(v, u)
    })
}

/// Writes `n` phantoms as `out_dir/<class>/phantom_NNNN.png`, cycling the
/// classes normal, benign, malignant. Returns the written paths in order.
pub fn generate_phantom_corpus(n: usize, seed: u64, out_dir: &Path) -> Result<Vec<PathBuf>> {
    if n == 0 {
        return Err(ImagingError::EmptyCorpus(out_dir.to_path_buf()));
    }
    let mut paths = Vec::with_capacity(n);
    for class in ClassLabel::ALL {
        let dir = out_dir.join(class.as_str());
        std::fs::create_dir_all(&dir).map_err(|source| ImagingError::Io { path: dir, source })?;
    }
    for i in 0..n {
        let class = ClassLabel::ALL[i % 3];
        let img = phantom_image(PHANTOM_SIZE, class, rng::derive_seed(seed, &[i as u64]));
        let path = out_dir
            .join(class.as_str())
            .join(format!("phantom_{i:04}.png"));
        save_png(&img, &path)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phantoms_are_in_range_and_seed_dependent() {
        for class in ClassLabel::ALL {
            let a = phantom_image(64, class, 1);
            assert!(a.pixels().iter().all(|&p| (0.0..=1.0).contains(&p)));
            let b = phantom_image(64, class, 2);
            assert!(a.pixels().iter().zip(b.pixels()).any(|(x, y)| x != y));
            assert_eq!(a, phantom_image(64, class, 1));
        }
    }

    #[test]
    fn corpus_is_reproducible() {
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let p1 = generate_phantom_corpus(4, 11, d1.path()).unwrap();
        let p2 = generate_phantom_corpus(4, 11, d2.path()).unwrap();
        assert_eq!(p1.len(), 4);
        for (a, b) in p1.iter().zip(&p2) {
            assert_eq!(
                a.strip_prefix(d1.path()).unwrap(),
                b.strip_prefix(d2.path()).unwrap()
            );
            assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
        }
        assert!(p1[0].ends_with("normal/phantom_0000.png"));
        assert!(p1[1].ends_with("benign/phantom_0001.png"));
    }
}
