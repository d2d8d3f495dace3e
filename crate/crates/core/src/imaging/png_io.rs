use std::path::Path;

use image::{DynamicImage, ExtendedColorType, ImageFormat, ImageReader};

use super::{GrayImage, ImagingError, Result};
use crate::Real;

/// Rec.601 luma weights.
const LUMA: [f64; 3] = [0.299, 0.587, 0.114];

/// Decodes an 8- or 16-bit gray / gray+alpha / RGB / RGBA PNG into a unit-range
/// grayscale image. Color is collapsed with Rec.601 luma; alpha is ignored.
pub fn load_png<T: Real>(path: &Path) -> Result<GrayImage<T>> {
    let reader = ImageReader::open(path).map_err(|source| ImagingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let decoded = reader
        .with_guessed_format()
        .map_err(|source| ImagingError::Io {
            path: path.to_path_buf(),
            source,
        })?
        .decode()
        .map_err(|source| ImagingError::Decode {
            path: path.to_path_buf(),
            source,
        })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let pixels: Vec<f64> = match &decoded {
        DynamicImage::ImageLuma8(b) => b.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLumaA8(b) => b.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        DynamicImage::ImageLuma16(b) => b.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageLumaA16(b) => b.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        DynamicImage::ImageRgb8(b) => b.pixels().map(|p| luma(&p.0, 255.0)).collect(),
        DynamicImage::ImageRgba8(b) => b.pixels().map(|p| luma(&p.0, 255.0)).collect(),
        DynamicImage::ImageRgb16(b) => b.pixels().map(|p| luma(&p.0, 65535.0)).collect(),
        DynamicImage::ImageRgba16(b) => b.pixels().map(|p| luma(&p.0, 65535.0)).collect(),
        other => {
            return Err(ImagingError::UnsupportedColor {
                path: path.to_path_buf(),
                color: format!("{:?}", other.color()),
            })
        }
    };
    GrayImage::from_clamped(h, w, pixels.into_iter().map(T::of).collect())
}

fn luma<C: Into<f64> + Copy>(rgb: &[C], max: f64) -> f64 {
    let sum: f64 = LUMA.iter().zip(rgb).map(|(w, &c)| w * c.into()).sum();
    sum / max
}

/// Writes an 8-bit grayscale PNG, quantizing with `round(p·255)`, halves
/// rounding up.
pub fn save_png<T: Real>(img: &GrayImage<T>, path: &Path) -> Result<()> {
    let bytes: Vec<u8> = img.pixels().iter().map(|&p| quantize(p)).collect();
    image::save_buffer_with_format(
        path,
        &bytes,
        img.width() as u32,
        img.height() as u32,
        ExtendedColorType::L8,
        ImageFormat::Png,
    )
    .map_err(|source| match source {
        image::ImageError::IoError(source) => ImagingError::Io {
            path: path.to_path_buf(),
            source,
        },
        source => ImagingError::Encode {
            path: path.to_path_buf(),
            source,
        },
    })
}

#[inline]
pub(crate) fn quantize<T: Real>(p: T) -> u8 {
    (p.f64() * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{ImageBuffer, Luma, Rgb, Rgba};

    #[test]
    fn quantization_rule() {
        assert_eq!(quantize(0.5f32), 128);
        assert_eq!(quantize(0.0f64), 0);
        assert_eq!(quantize(1.0f64), 255);
        assert_eq!(quantize(0.3f64), 77); // 76.5 rounds up
    }

    #[test]
    fn gray_and_rgb_decoding() {
        let dir = tempfile::tempdir().unwrap();
        let gray = dir.path().join("g.png");
        ImageBuffer::<Luma<u8>, _>::from_raw(2, 1, vec![255u8, 0])
            .unwrap()
            .save(&gray)
            .unwrap();
        let img = load_png::<f64>(&gray).unwrap();
        assert_eq!(img.pixels(), &[1.0, 0.0]);

        let rgb = dir.path().join("c.png");
        ImageBuffer::<Rgb<u8>, _>::from_raw(2, 1, vec![255u8, 255, 255, 255, 0, 0])
            .unwrap()
            .save(&rgb)
            .unwrap();
        let img = load_png::<f64>(&rgb).unwrap();
        assert!((img.pixels()[0] - 1.0).abs() < 1e-12);
        assert!((img.pixels()[1] - 0.299).abs() < 1e-12);

        let rgba16 = dir.path().join("c16.png");
        ImageBuffer::<Rgba<u16>, _>::from_raw(1, 1, vec![0u16, 65535, 0, 0])
            .unwrap()
            .save(&rgba16)
            .unwrap();
        let img = load_png::<f32>(&rgba16).unwrap();
        assert!((img.pixels()[0] - 0.587).abs() < 1e-6);
    }

    #[test]
    fn save_writes_expected_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("half.png");
        save_png(&GrayImage::<f32>::filled(3, 4, 0.5), &path).unwrap();
        let back = image::open(&path).unwrap().into_luma8();
        assert_eq!(back.dimensions(), (4, 3));
        assert!(back.as_raw().iter().all(|&b| b == 128));
    }

    #[test]
    fn errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("nope.png");
        let err = load_png::<f32>(&missing).unwrap_err();
        assert!(err.to_string().contains("nope.png"));

        let junk = dir.path().join("junk.png");
        std::fs::write(&junk, b"not a png at all").unwrap();
        assert!(load_png::<f32>(&junk).is_err());

        let unwritable = dir.path().join("no/such/dir/x.png");
        let err = save_png(&GrayImage::<f32>::filled(1, 1, 0.0), &unwritable).unwrap_err();
        assert!(err.to_string().contains("x.png"));
    }
}
