//! Scalar-valued problems on images with a total variation regularizer:
//! denoising with a quadratic data term and stereo from a cost volume.

use std::sync::Arc;

use crate::cubical::CubicalComplex;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::lifting::{CostModel, CostVolume, DataTerm, QuadraticData};
use crate::solver::{assemble, BoundaryCondition, ProblemDescription};
use crate::whitney::{generate_samples, SampleMode};

use super::Problem;

#[derive(Clone, Debug, PartialEq)]
pub enum ScalarData {
    /// `β/2 (y − g(x))²` with `g` the input image.
    Quadratic { beta: f64 },
    /// `weight · ρ(x, y)` from a cost volume, one level per label.
    Volume { volume: CostVolume, weight: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSpec {
    pub width: usize,
    pub height: usize,
    /// Gray input for the quadratic data term; ignored for cost volumes.
    pub image: Option<Image>,
    pub data: ScalarData,
    /// Number of label levels, at least 2.
    pub labels: usize,
    /// Codomain `[min, max]`; the levels are equispaced over it.
    pub range: (f64, f64),
    /// Physical pixel size.
    pub pixel: f64,
    pub sample_mode: SampleMode,
}

impl ScalarSpec {
    /// Denoising spec for a gray image with values in `range`.
    pub fn denoise(image: Image, labels: usize, range: (f64, f64), beta: f64) -> Self {
        Self {
            width: image.width,
            height: image.height,
            pixel: 1.0 / image.width.max(image.height) as f64,
            image: Some(image),
            data: ScalarData::Quadratic { beta },
            labels,
            range,
            sample_mode: SampleMode::Codomain {
                domain_dims: 2,
                per_edge: 1,
            },
        }
    }

    /// Stereo spec: the labels are the disparities `0..nlabels`.
    pub fn stereo(volume: CostVolume, weight: f64) -> Self {
        Self {
            width: volume.nx,
            height: volume.ny,
            image: None,
            labels: volume.nlabels,
            range: (0.0, (volume.nlabels - 1) as f64),
            pixel: 1.0,
            data: ScalarData::Volume { volume, weight },
            sample_mode: SampleMode::Codomain {
                domain_dims: 2,
                per_edge: 1,
            },
        }
    }

    pub fn label_spacing(&self) -> f64 {
        (self.range.1 - self.range.0) / (self.labels - 1) as f64
    }

    pub fn complex(&self) -> Result<CubicalComplex> {
        if self.labels < 2 {
            return Err(Error::InvalidConfig("at least two labels are needed".into()));
        }
        if !(self.range.1 > self.range.0) {
            return Err(Error::InvalidConfig("label range must be increasing".into()));
        }
        if !(self.pixel > 0.0) {
            return Err(Error::NegativeParameter {
                name: "pixel size",
                value: self.pixel,
            });
        }
        CubicalComplex::new_box(
            &[self.width, self.height, self.labels - 1],
            &[self.pixel, self.pixel, self.label_spacing()],
        )?
        .with_origin(&[0.0, 0.0, self.range.0])
    }
}

/// A cost volume scaled by a constant.
#[derive(Clone, Debug)]
struct Weighted {
    volume: CostVolume,
    weight: f64,
}

impl DataTerm for Weighted {
    fn rho(&self, ctx: &crate::lifting::PointContext) -> Result<f64> {
        Ok(self.weight * self.volume.rho(ctx)?)
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        self.volume.validate(shape)
    }
}

/// Assembles the free-boundary lifted problem.
pub fn build(spec: &ScalarSpec) -> Result<Problem> {
    let complex = spec.complex()?;
    let data: Arc<dyn DataTerm> = match &spec.data {
        ScalarData::Quadratic { beta } => {
            if !(*beta >= 0.0) {
                return Err(Error::NegativeParameter { name: "beta", value: *beta });
            }
            let image = spec
                .image
                .clone()
                .ok_or_else(|| Error::InvalidConfig("quadratic data needs an input image".into()))?;
            Arc::new(QuadraticData {
                image: image.to_gray(),
                beta: *beta,
            })
        }
        ScalarData::Volume { volume, weight } => {
            if !(*weight >= 0.0) {
                return Err(Error::NegativeParameter {
                    name: "data weight",
                    value: *weight,
                });
            }
            Arc::new(Weighted {
                volume: volume.clone(),
                weight: *weight,
            })
        }
    };
    let model = CostModel::TotalVariation { n: 2, data };
    let samples = generate_samples(&complex, &spec.sample_mode)?;
    let saddle = assemble(&ProblemDescription {
        complex: &complex,
        model: &model,
        samples: &samples,
        boundary: BoundaryCondition::Free,
        bijective: false,
    })?;
    Ok(Problem {
        complex,
        model,
        samples,
        saddle,
    })
}

/// Reorders per-pixel values from complex order (`x` slowest) to row-major.
pub fn to_row_major(values: &[f64], width: usize, height: usize) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    for i in 0..width {
        for j in 0..height {
            out[j * width + i] = values[i * height + j];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denoise_problem_shape() {
        let image = Image::filled(4, 3, 1, 0.5);
        let spec = ScalarSpec::denoise(image, 5, (0.0, 1.0), 10.0);
        let p = build(&spec).unwrap();
        assert_eq!(p.complex.shape(), &[4, 3, 4]);
        assert_eq!(p.saddle.fibers.len(), 12);
        assert_eq!(p.saddle.fibers[0].len(), 5);
        // φ only on 1-cubes over the interior of the image domain
        assert!(p.saddle.boundary_rows.len() < p.complex.num_cubes(1));
        assert_eq!(p.samples.len(), 4 * 3 * 4 * 12);
    }

    #[test]
    fn volume_shape_mismatch_is_rejected() {
        let v = CostVolume::new(2, 2, 3, vec![0.0; 12]).unwrap();
        let mut spec = ScalarSpec::stereo(v, 1.0);
        spec.width = 3;
        assert!(matches!(build(&spec), Err(Error::Shape(_))));
    }

    #[test]
    fn row_major_reorder() {
        // complex order: (0,0) (0,1) (1,0) (1,1) (2,0) (2,1)
        let v = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(to_row_major(&v, 3, 2), vec![0.0, 2.0, 4.0, 1.0, 3.0, 5.0]);
    }
}
