//! Registration of two color images of equal size (n = N = 2).

use std::sync::Arc;

use crate::cubical::CubicalComplex;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::lifting::{CostModel, ImagePairCost};
use crate::solver::{assemble, BoundaryCondition, ProblemDescription};
use crate::whitney::{generate_samples, SampleMode};

use super::graph::translation_chain;
use super::Problem;

/// How the boundary of the first image is matched to the second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundaryMatch {
    /// `∂X` maps to `∂Y` by the identity.
    Identity,
    /// No boundary constraint over `∂X`.
    Free,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegistrationSpec {
    pub fixed: Image,
    pub moving: Image,
    pub epsilon: f64,
    pub boundary: BoundaryMatch,
    pub sample_mode: SampleMode,
}

impl RegistrationSpec {
    pub fn new(fixed: Image, moving: Image, epsilon: f64) -> Self {
        Self {
            fixed,
            moving,
            epsilon,
            boundary: BoundaryMatch::Identity,
            sample_mode: SampleMode::Vertices,
        }
    }

    /// Unit pixels, lattice = pixel corners.
    pub fn complex(&self) -> Result<CubicalComplex> {
        let (a, b) = (&self.fixed, &self.moving);
        if a.width != b.width || a.height != b.height {
            return Err(Error::Shape(format!(
                "images differ in size: {}x{} vs {}x{}",
                a.width, a.height, b.width, b.height
            )));
        }
        if a.channels != b.channels {
            return Err(Error::Shape("images differ in channel count".into()));
        }
        CubicalComplex::new_box(&[a.width, a.height, b.width, b.height], &[1.0; 4])
    }
}

/// Assembles the lifted registration problem with both pushforward
/// constraints and nonnegative aligned components.
pub fn build(spec: &RegistrationSpec) -> Result<Problem> {
    let complex = spec.complex()?;
    let model = CostModel::Registration {
        data: Arc::new(ImagePairCost {
            fixed: spec.fixed.clone(),
            moving: spec.moving.clone(),
        }),
        epsilon: spec.epsilon,
    };
    let samples = generate_samples(&complex, &spec.sample_mode)?;
    let boundary = match spec.boundary {
        BoundaryMatch::Identity => {
            let identity = translation_chain(&complex, [0.0, 0.0])?;
            BoundaryCondition::Dirichlet(complex.boundary(&identity)?)
        }
        BoundaryMatch::Free => BoundaryCondition::Free,
    };
    let saddle = assemble(&ProblemDescription {
        complex: &complex,
        model: &model,
        samples: &samples,
        boundary,
        bijective: true,
    })?;
    Ok(Problem {
        complex,
        model,
        samples,
        saddle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_problem_sizes() {
        let img = Image::filled(3, 3, 3, 0.2);
        let spec = RegistrationSpec::new(img.clone(), img, 0.1);
        let p = build(&spec).unwrap();
        assert_eq!(p.samples.len(), 81 * 16);
        assert_eq!(p.saddle.comps, 6);
        // 9 fibers over X squares and 9 over Y squares
        assert_eq!(p.saddle.fibers.len(), 18);
        assert!(p.saddle.fiber_nonneg.iter().all(|&b| b));
    }

    #[test]
    fn size_mismatch_is_rejected() {
        let spec = RegistrationSpec::new(Image::filled(3, 3, 3, 0.0), Image::filled(4, 3, 3, 0.0), 0.1);
        assert!(matches!(build(&spec), Err(Error::Shape(_))));
    }
}
