//! Minimal raster images with values in `[0, 1]`.

use crate::error::{Error, Result};

/// Row-major image, channels interleaved.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::Shape("image dimensions must be positive".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::Shape(format!(
                "{}x{}x{} image needs {} values, got {}",
                width,
                height,
                channels,
                width * height * channels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite pixel value".into()));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Self {
        Self {
            width,
            height,
            channels,
            data: vec![value; width * height * channels],
        }
    }

    /// Channel values at column `x`, row `y`.
    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    pub fn pixel_mut(&mut self, x: usize, y: usize) -> &mut [f64] {
        let start = (y * self.width + x) * self.channels;
        &mut self.data[start..start + self.channels]
    }

    /// Euclidean distance between the colors of two pixels of two images.
    pub fn color_distance(&self, p: (usize, usize), other: &Image, q: (usize, usize)) -> f64 {
        self.pixel(p.0, p.1)
            .iter()
            .zip(other.pixel(q.0, q.1))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Bilinear interpolation at `(x, y)` in pixel units, pixel `(i, j)`
    /// covering `[i, i + 1] × [j, j + 1]`; constant beyond the outer centers.
    pub fn bilinear(&self, x: f64, y: f64) -> Vec<f64> {
        let axis = |t: f64, len: usize| -> (usize, usize, f64) {
            let c = (t - 0.5).clamp(0.0, (len - 1) as f64);
            let lo = (c.floor() as usize).min(len.saturating_sub(2));
            let hi = (lo + 1).min(len - 1);
            (lo, hi, c - lo as f64)
        };
        let (x0, x1, fx) = axis(x, self.width);
        let (y0, y1, fy) = axis(y, self.height);
        (0..self.channels)
            .map(|c| {
                let v = |i: usize, j: usize| self.pixel(i, j)[c];
                (1.0 - fy) * ((1.0 - fx) * v(x0, y0) + fx * v(x1, y0)) + fy * ((1.0 - fx) * v(x0, y1) + fx * v(x1, y1))
            })
            .collect()
    }

    /// Mean over channels, one value per pixel.
    pub fn to_gray(&self) -> Image {
        let data = self
            .data
            .chunks(self.channels)
            .map(|c| c.iter().sum::<f64>() / self.channels as f64)
            .collect();
        Image {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }
}
