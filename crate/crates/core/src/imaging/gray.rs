use super::{ImagingError, Result};
use crate::tensor::Tensor;
use crate::Real;

/// Row-major grayscale image with every pixel in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage<T> {
    height: usize,
    width: usize,
    pixels: Vec<T>,
}

impl<T: Real> GrayImage<T> {
    pub fn new(height: usize, width: usize, pixels: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(ImagingError::EmptyImage { height, width });
        }
        if pixels.len() != height * width {
            return Err(ImagingError::PixelCount {
                height,
                width,
                expected: height * width,
                found: pixels.len(),
            });
        }
        if let Some((index, v)) = pixels
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(ImagingError::PixelRange {
                index,
                value: v.f64(),
            });
        }
        Ok(Self {
            height,
            width,
            pixels,
        })
    }

    /// Builds an image, clamping every value into `[0, 1]` (NaN maps to 0).
    pub fn from_clamped(height: usize, width: usize, mut pixels: Vec<T>) -> Result<Self> {
        for p in &mut pixels {
            *p = clamp_unit(*p);
        }
        Self::new(height, width, pixels)
    }

    /// Builds an image from a per-pixel function, clamping into `[0, 1]`.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let pixels = (0..height * width)
            .map(|i| clamp_unit(f(i / width, i % width)))
            .collect();
        Self {
            height,
            width,
            pixels,
        }
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self::from_fn(height, width, |_, _| value)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, y: usize, x: usize) -> T {
        self.pixels[y * self.width + x]
    }

    /// Pixel lookup with edge replication for out-of-range coordinates.
    #[inline]
    pub fn get_replicated(&self, y: isize, x: isize) -> T {
        let y = y.clamp(0, self.height as isize - 1) as usize;
        let x = x.clamp(0, self.width as isize - 1) as usize;
        self.pixels[y * self.width + x]
    }

    pub fn cast<U: Real>(&self) -> GrayImage<U> {
        GrayImage {
            height: self.height,
            width: self.width,
            pixels: self
                .pixels
                .iter()
                .map(|p| clamp_unit(U::of(p.f64())))
                .collect(),
        }
    }

    pub fn same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(ImagingError::SizeMismatch {
                a: self.dims(),
                b: other.dims(),
            });
        }
        Ok(())
    }

    /// `[1, 1, H, W]` tensor view of the image.
    pub fn to_tensor(&self) -> Tensor<T> {
        Tensor::new(vec![1, 1, self.height, self.width], self.pixels.clone())
            .expect("image pixel count matches its dims")
    }
}

#[inline]
fn clamp_unit<T: Real>(v: T) -> T {
    if v > T::one() {
        T::one()
    } else if v >= T::zero() {
        v
    } else {
        T::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_range_and_length() {
        assert!(GrayImage::<f32>::new(2, 2, vec![0.0, 0.5, 1.0, 0.25]).is_ok());
        assert!(matches!(
            GrayImage::<f32>::new(2, 2, vec![0.0, 1.5, 1.0, 0.25]),
            Err(ImagingError::PixelRange { index: 1, .. })
        ));
        assert!(GrayImage::<f32>::new(2, 2, vec![0.0, f32::NAN, 1.0, 0.25]).is_err());
        assert!(matches!(
            GrayImage::<f32>::new(2, 3, vec![0.0; 5]),
            Err(ImagingError::PixelCount {
                expected: 6,
                found: 5,
                ..
            })
        ));
        assert!(GrayImage::<f32>::new(0, 3, vec![]).is_err());
    }

    #[test]
    fn clamped_constructor() {
        let img = GrayImage::<f64>::from_clamped(1, 3, vec![-0.5, 0.5, 2.0]).unwrap();
        assert_eq!(img.pixels(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn replicated_lookup() {
        let img = GrayImage::<f64>::from_fn(2, 3, |y, x| (y * 3 + x) as f64 / 10.0);
        assert_eq!(img.get_replicated(-3, -1), 0.0);
        assert_eq!(img.get_replicated(5, 7), 0.5);
        assert_eq!(img.get_replicated(1, -1), 0.3);
    }
}
