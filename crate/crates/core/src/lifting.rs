//! Cost models: the integrand `c`, its perspective `Ψ**` on n-vectors,
//! proximal maps and the dual constraint sets.
//!
//! Per-point data is resolved once into a [`PointCost`], which the solver
//! applies to coefficient slices in the lexicographic layout of
//! [`crate::multivector`].

use std::fmt::Debug;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubical::CubicalComplex;
use crate::error::{Error, Result};
use crate::image::Image;
use crate::multivector::{graph_embed, mass_comass_slice, project_comass_ball_slice, prox_mass_slice, Jacobian};
use crate::whitney::Sample;

/// Where a cost is evaluated: physical point plus host voxel.
#[derive(Clone, Copy, Debug)]
pub struct PointContext<'a> {
    pub z: &'a [f64],
    pub cell: &'a [i64],
    pub local: &'a [f64],
}

impl<'a> PointContext<'a> {
    pub fn new(z: &'a [f64], sample: &'a Sample) -> Self {
        Self {
            z,
            cell: &sample.cell,
            local: &sample.local,
        }
    }
}

/// Data fidelity `ρ(x, y)`.
pub trait DataTerm: Send + Sync + Debug {
    fn rho(&self, ctx: &PointContext) -> Result<f64>;

    /// Checks that the term fits a complex with this cell shape.
    fn validate(&self, _shape: &[usize]) -> Result<()> {
        Ok(())
    }
}

/// Matching cost on a pixel grid times label levels, x fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct CostVolume {
    pub nx: usize,
    pub ny: usize,
    pub nlabels: usize,
    pub data: Vec<f32>,
}

impl CostVolume {
    pub fn new(nx: usize, ny: usize, nlabels: usize, data: Vec<f32>) -> Result<Self> {
        if nx == 0 || ny == 0 || nlabels == 0 {
            return Err(Error::Shape("cost volume dimensions must be positive".into()));
        }
        if data.len() != nx * ny * nlabels {
            return Err(Error::Shape(format!(
                "cost volume {nx}x{ny}x{nlabels} needs {} values, got {}",
                nx * ny * nlabels,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite value in cost volume".into()));
        }
        if data.iter().any(|&v| v < 0.0) {
            return Err(Error::Format("negative value in cost volume".into()));
        }
        Ok(Self { nx, ny, nlabels, data })
    }

    pub fn get(&self, x: usize, y: usize, label: usize) -> f32 {
        self.data[x + self.nx * (y + self.ny * label)]
    }

    /// Absolute-difference cost of a rectified pair: label `l` compares
    /// `left(x, y)` against `right(x - l, y)`, clamped at the image border.
    pub fn from_rectified_pair(left: &Image, right: &Image, nlabels: usize) -> Result<Self> {
        if left.width != right.width || left.height != right.height || left.channels != right.channels {
            return Err(Error::Shape("stereo images differ in size".into()));
        }
        let (nx, ny) = (left.width, left.height);
        let mut data = Vec::with_capacity(nx * ny * nlabels);
        for l in 0..nlabels {
            for y in 0..ny {
                for x in 0..nx {
                    let xr = x.saturating_sub(l);
                    let a = left.pixel(x, y);
                    let b = right.pixel(xr, y);
                    let diff: f64 = a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum::<f64>() / a.len() as f64;
                    data.push(diff as f32);
                }
            }
        }
        Self::new(nx, ny, nlabels, data)
    }
}

impl DataTerm for CostVolume {
    /// Constant over the host pixel, linear in the label between levels.
    fn rho(&self, ctx: &PointContext) -> Result<f64> {
        let (x, y) = (ctx.cell[0] as usize, ctx.cell[1] as usize);
        if self.nlabels == 1 {
            return Ok(self.get(x, y, 0) as f64);
        }
        let u = ctx.cell[2] as f64 + ctx.local[2];
        let l0 = (u.floor().max(0.0) as usize).min(self.nlabels - 2);
        let t = (u - l0 as f64).clamp(0.0, 1.0);
        Ok((1.0 - t) * self.get(x, y, l0) as f64 + t * self.get(x, y, l0 + 1) as f64)
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        if shape.len() != 3 || shape[0] != self.nx || shape[1] != self.ny || shape[2] + 1 != self.nlabels {
            return Err(Error::Shape(format!(
                "cost volume {}x{}x{} does not fit cell grid {:?}",
                self.nx, self.ny, self.nlabels, shape
            )));
        }
        Ok(())
    }
}

/// `ρ(x, y) = β/2 (y - g(x))²` for a gray image `g`, constant per pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticData {
    pub image: Image,
    pub beta: f64,
}

impl DataTerm for QuadraticData {
    fn rho(&self, ctx: &PointContext) -> Result<f64> {
        let n = ctx.z.len() - 1;
        let g = match n {
            1 => self.image.data[ctx.cell[0] as usize],
            _ => self.image.pixel(ctx.cell[0] as usize, ctx.cell[1] as usize)[0],
        };
        let y = ctx.z[n];
        Ok(0.5 * self.beta * (y - g) * (y - g))
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        let ok = match shape.len() {
            2 => self.image.height == 1 && self.image.width == shape[0],
            3 => self.image.width == shape[0] && self.image.height == shape[1],
            _ => false,
        };
        if !ok || self.image.channels != 1 {
            return Err(Error::Shape(format!(
                "{}x{} image does not fit cell grid {:?}",
                self.image.width, self.image.height, shape
            )));
        }
        Ok(())
    }
}

/// `ρ(x, y) = ‖I1(x) - I2(y)‖` with both images interpolated bilinearly at
/// the evaluation point, so samples on voxel corners see the colors there
/// rather than those of one adjacent pixel pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ImagePairCost {
    pub fixed: Image,
    pub moving: Image,
}

impl DataTerm for ImagePairCost {
    fn rho(&self, ctx: &PointContext) -> Result<f64> {
        let u: Vec<f64> = ctx.cell.iter().zip(ctx.local).map(|(&c, &l)| c as f64 + l).collect();
        let a = self.fixed.bilinear(u[0], u[1]);
        let b = self.moving.bilinear(u[2], u[3]);
        Ok(a.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt())
    }

    fn validate(&self, shape: &[usize]) -> Result<()> {
        let ok = shape.len() == 4
            && self.fixed.width == shape[0]
            && self.fixed.height == shape[1]
            && self.moving.width == shape[2]
            && self.moving.height == shape[3]
            && self.fixed.channels == self.moving.channels;
        if !ok {
            return Err(Error::Shape(format!(
                "image pair {}x{} / {}x{} does not fit cell grid {:?}",
                self.fixed.width, self.fixed.height, self.moving.width, self.moving.height, shape
            )));
        }
        Ok(())
    }
}

/// The three experiment families.
#[derive(Clone, Debug)]
pub enum CostModel {
    /// `c = √((1 + ξ²) / (2 g y))`, n = N = 1; `y` is the second coordinate.
    Brachistochrone { gravity: f64, y_min: f64 },
    /// `c = ρ(x, y) + ‖ξ‖`, N = 1.
    TotalVariation { n: usize, data: Arc<dyn DataTerm> },
    /// `c = (ρ(x, y) + ε) √det(I + ξᵀξ)`, n = N = 2.
    Registration { data: Arc<dyn DataTerm>, epsilon: f64 },
}

/// A cost model resolved at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PointCost {
    /// `α |v|`.
    WeightedNorm(f64),
    /// `ρ v_t + ‖v_x‖ + ι(v_t ≥ 0)`, `v_t` the first coefficient.
    Tv { rho: f64 },
    /// `w · mass(v)` on 2-vectors in `R^4`.
    WeightedMass(f64),
}

#[inline]
fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
fn shrink(v: &mut [f64], t: f64) {
    let r = norm(v);
    let s = if r > t { 1.0 - t / r } else { 0.0 };
    for x in v.iter_mut() {
        *x *= s;
    }
}

#[inline]
fn clamp_ball(v: &mut [f64], radius: f64) {
    let r = norm(v);
    if r > radius {
        let s = radius / r;
        for x in v.iter_mut() {
            *x *= s;
        }
    }
}

impl PointCost {
    /// `Ψ**(z, v)`.
    #[inline]
    pub fn psi(&self, v: &[f64]) -> f64 {
        match *self {
            PointCost::WeightedNorm(a) => a * norm(v),
            PointCost::Tv { rho } => {
                if v[0] < 0.0 {
                    f64::INFINITY
                } else {
                    rho * v[0] + norm(&v[1..])
                }
            }
            PointCost::WeightedMass(w) => w * mass_comass_slice(v).0,
        }
    }

    /// `v ← prox_{τΨ**}(v)`.
    #[inline]
    pub fn prox(&self, v: &mut [f64], tau: f64) {
        match *self {
            PointCost::WeightedNorm(a) => shrink(v, tau * a),
            PointCost::Tv { rho } => {
                v[0] = (v[0] - tau * rho).max(0.0);
                shrink(&mut v[1..], tau);
            }
            PointCost::WeightedMass(w) => prox_mass_slice(v, tau * w),
        }
    }

    /// Projection onto `K_z = {Ψ*(z, ·) ≤ 0}`.
    #[inline]
    pub fn project_dual(&self, w: &mut [f64]) {
        match *self {
            PointCost::WeightedNorm(a) => clamp_ball(w, a),
            PointCost::Tv { rho } => {
                w[0] = w[0].min(rho);
                clamp_ball(&mut w[1..], 1.0);
            }
            PointCost::WeightedMass(r) => project_comass_ball_slice(w, r),
        }
    }
}

impl CostModel {
    /// `(n, N)`.
    pub fn dims(&self) -> (usize, usize) {
        match self {
            CostModel::Brachistochrone { .. } => (1, 1),
            CostModel::TotalVariation { n, .. } => (*n, 1),
            CostModel::Registration { .. } => (2, 2),
        }
    }

    pub fn validate(&self, complex: &CubicalComplex) -> Result<()> {
        let (n, big_n) = self.dims();
        if complex.dim() != n + big_n {
            return Err(Error::DimensionMismatch {
                expected: n + big_n,
                got: complex.dim(),
            });
        }
        match self {
            CostModel::Brachistochrone { gravity, y_min } => {
                if !(*gravity > 0.0) {
                    return Err(Error::NegativeParameter {
                        name: "g",
                        value: *gravity,
                    });
                }
                if !(*y_min > 0.0) {
                    return Err(Error::NegativeParameter {
                        name: "y_min",
                        value: *y_min,
                    });
                }
                if complex.origin()[1] < y_min * (1.0 - 1e-12) {
                    return Err(Error::DomainViolation(format!(
                        "codomain starts at y = {} below y_min = {}",
                        complex.origin()[1],
                        y_min
                    )));
                }
                Ok(())
            }
            CostModel::TotalVariation { data, .. } => data.validate(complex.shape()),
            CostModel::Registration { data, epsilon } => {
                if !(*epsilon > 0.0) {
                    return Err(Error::NegativeParameter {
                        name: "epsilon",
                        value: *epsilon,
                    });
                }
                data.validate(complex.shape())
            }
        }
    }

    /// Resolves the model at a point.
    pub fn at(&self, ctx: &PointContext) -> Result<PointCost> {
        match self {
            CostModel::Brachistochrone { gravity, y_min } => {
                let y = ctx.z[1];
                if y < y_min * (1.0 - 1e-12) {
                    return Err(Error::DomainViolation(format!("y = {y} below y_min = {y_min}")));
                }
                Ok(PointCost::WeightedNorm(1.0 / (2.0 * gravity * y).sqrt()))
            }
            CostModel::TotalVariation { data, .. } => {
                let rho = data.rho(ctx)?;
                check_rho(rho)?;
                Ok(PointCost::Tv { rho })
            }
            CostModel::Registration { data, epsilon } => {
                let rho = data.rho(ctx)?;
                check_rho(rho)?;
                Ok(PointCost::WeightedMass(rho + epsilon))
            }
        }
    }

    /// The integrand `c(x, y, ξ)`.
    pub fn evaluate(&self, ctx: &PointContext, xi: &Jacobian) -> Result<f64> {
        let (n, big_n) = self.dims();
        if xi.rows() != big_n || xi.cols() != n {
            return Err(Error::Shape(format!(
                "Jacobian is {}x{}, model needs {big_n}x{n}",
                xi.rows(),
                xi.cols()
            )));
        }
        match self {
            CostModel::Brachistochrone { gravity, y_min } => {
                let y = ctx.z[1];
                if y < y_min * (1.0 - 1e-12) {
                    return Err(Error::DomainViolation(format!("y = {y} below y_min = {y_min}")));
                }
                let s = xi.get(0, 0);
                Ok(((1.0 + s * s) / (2.0 * gravity * y)).sqrt())
            }
            CostModel::TotalVariation { data, .. } => Ok(data.rho(ctx)? + xi.frobenius_norm()),
            CostModel::Registration { data, epsilon } => {
                Ok((data.rho(ctx)? + epsilon) * xi.area_factor_squared().sqrt())
            }
        }
    }

    pub fn psi(&self, ctx: &PointContext, v: &[f64]) -> Result<f64> {
        Ok(self.at(ctx)?.psi(v))
    }

    pub fn psi_prox(&self, ctx: &PointContext, v: &[f64], tau: f64) -> Result<Vec<f64>> {
        if tau < 0.0 {
            return Err(Error::NegativeParameter { name: "tau", value: tau });
        }
        let mut out = v.to_vec();
        self.at(ctx)?.prox(&mut out, tau);
        Ok(out)
    }

    pub fn dual_project(&self, ctx: &PointContext, w: &[f64]) -> Result<Vec<f64>> {
        let mut out = w.to_vec();
        self.at(ctx)?.project_dual(&mut out);
        Ok(out)
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::DomainViolation(format!("data term ρ = {rho}")));
    }
    Ok(())
}

/// A random interior point of the complex.
pub fn random_sample(complex: &CubicalComplex, rng: &mut impl Rng) -> Sample {
    loop {
        let cell: Vec<i64> = complex.shape().iter().map(|&s| rng.random_range(0..s) as i64).collect();
        if complex.voxel_active(&cell) {
            let local = (0..complex.dim()).map(|_| rng.random_range(0.0..1.0)).collect();
            return Sample { cell, local };
        }
    }
}

/// `max |Ψ**(z, M(ξ)) - c(x, y, ξ)|` over random points and Jacobians.
pub fn polyconvex_consistency(model: &CostModel, complex: &CubicalComplex, trials: usize, seed: u64) -> Result<f64> {
    model.validate(complex)?;
    let (n, big_n) = model.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let sample = random_sample(complex, &mut rng);
        let z = sample.position(complex);
        let ctx = PointContext::new(&z, &sample);
        let data = (0..n * big_n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let xi = Jacobian::from_rows(big_n, n, data)?;
        let v = graph_embed(&xi);
        let lhs = model.psi(&ctx, v.coeffs())?;
        let rhs = model.evaluate(&ctx, &xi)?;
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx_for<'a>(z: &'a [f64], cell: &'a [i64], local: &'a [f64]) -> PointContext<'a> {
        PointContext { z, cell, local }
    }

    #[test]
    fn brachistochrone_weight_and_prox() {
        let model = CostModel::Brachistochrone {
            gravity: 9.81,
            y_min: 0.1,
        };
        let (z, c, l) = ([0.5, 1.0], [0, 0], [0.0, 0.0]);
        let ctx = ctx_for(&z, &c, &l);
        match model.at(&ctx).unwrap() {
            PointCost::WeightedNorm(a) => assert!((a - 19.62f64.powf(-0.5)).abs() < 1e-15 && (a - 0.2258).abs() < 1e-3),
            other => panic!("{other:?}"),
        }
        let pc = PointCost::WeightedNorm(1.0);
        let mut v = [1.0, 0.0];
        pc.prox(&mut v, 0.25);
        assert_eq!(v, [0.75, 0.0]);
        let mut v = [0.1, 0.1];
        pc.prox(&mut v, 0.25);
        assert_eq!(v, [0.0, 0.0]);

        let (z, c, l) = ([0.5, 0.05], [0, 0], [0.0, 0.0]);
        assert!(matches!(model.at(&ctx_for(&z, &c, &l)), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn tv_prox_examples() {
        let pc = PointCost::Tv { rho: 2.0 };
        let mut v = [1.0, 0.5, 0.0];
        pc.prox(&mut v, 0.2);
        assert!((v[0] - 0.6).abs() < 1e-15 && (v[1] - 0.3).abs() < 1e-15 && v[2] == 0.0);
        let mut v = [-1.0, 0.0, 0.0];
        pc.prox(&mut v, 0.0);
        assert_eq!(v, [0.0, 0.0, 0.0]);
        let mut v = [-0.5, 0.0];
        PointCost::Tv { rho: 3.0 }.prox(&mut v, 1.0);
        assert_eq!(v, [0.0, 0.0]);
        // vertical parts stay finite
        assert_eq!(pc.psi(&[0.0, 3.0, 4.0]), 5.0);
    }

    #[test]
    fn registration_prox_example() {
        let pc = PointCost::WeightedMass(0.7);
        let mut v = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        pc.prox(&mut v, 1.0);
        assert!((v[0] - 0.3).abs() < 1e-14);
        let mut zero = [0.0; 6];
        pc.prox(&mut zero, 1.0);
        assert_eq!(zero, [0.0; 6]);
    }

    #[test]
    fn cost_volume_interpolates_in_label() {
        let data: Vec<f32> = (0..2 * 1 * 3).map(|i| i as f32).collect();
        let cv = CostVolume::new(2, 1, 3, data).unwrap();
        let (z, c, l) = ([0.0, 0.0, 0.0], [1, 0, 1], [0.0, 0.0, 0.5]);
        // labels 1 and 2 at x = 1: values 3 and 5
        assert!((cv.rho(&ctx_for(&z, &c, &l)).unwrap() - 4.0).abs() < 1e-12);
        assert!(CostVolume::new(2, 1, 3, vec![0.0; 5]).is_err());
        assert!(CostVolume::new(1, 1, 1, vec![f32::NAN]).is_err());
    }
}
