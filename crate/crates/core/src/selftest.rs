//! Quick property checks of the building blocks, run by `lift selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cubical::{Chain, Cochain, CubicalComplex};
use crate::lifting::{polyconvex_consistency, CostModel, CostVolume, ImagePairCost};
use crate::multivector::{mass_comass_slice, project_comass_ball_slice, prox_mass_slice, KVector};
use crate::image::Image;
use crate::solver::project_simplex;
use crate::Result;

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Largest observed error.
    pub error: f64,
    pub tolerance: f64,
}

fn check(name: &'static str, error: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: error <= tolerance,
        error,
        tolerance,
    }
}

fn random_complex(rng: &mut ChaCha8Rng, d: usize) -> Result<CubicalComplex> {
    let shape: Vec<usize> = (0..d).map(|_| rng.random_range(1..=3)).collect();
    let cells = shape.iter().product();
    let mut mask: Vec<bool> = (0..cells).map(|_| rng.random_bool(0.7)).collect();
    mask[0] = true;
    let spacing: Vec<f64> = (0..d).map(|_| rng.random_range(0.5..2.0)).collect();
    CubicalComplex::with_mask(&shape, mask, &spacing)
}

/// `∂∂ = 0` on random masked complexes up to dimension 4.
pub fn boundary_squared(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(1..=4);
        let complex = random_complex(&mut rng, d)?;
        for k in 2..=d {
            // integer coefficients, so the sums are exact
            let coeffs = (0..complex.num_cubes(k)).map(|_| rng.random_range(-1000..=1000) as f64).collect();
            let once = complex.boundary(&Chain { degree: k, coeffs })?;
            let twice = complex.boundary(&once)?;
            worst = twice.coeffs.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    Ok(check("boundary of boundary vanishes", worst, 0.0))
}

/// `⟨∂T, ω⟩ = ⟨T, δω⟩` for random chains and cochains.
pub fn stokes(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(1..=4);
        let complex = random_complex(&mut rng, d)?;
        let k = rng.random_range(1..=d);
        let t = Chain {
            degree: k,
            coeffs: (0..complex.num_cubes(k)).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let w = Cochain {
            degree: k - 1,
            coeffs: (0..complex.num_cubes(k - 1)).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let lhs = complex.pairing(&complex.boundary(&t)?, &w)?;
        let rhs = complex.pairing(&t, &complex.coboundary(&w)?)?;
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1.0));
    }
    Ok(check("discrete Stokes adjointness", worst, 1e-12))
}

/// Mass of simple 2-vectors equals their Euclidean norm and comass of
/// simple covectors as well.
pub fn mass_on_simple_vectors(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w = KVector::vector(&a).wedge(&KVector::vector(&b))?;
        let (m, c) = mass_comass_slice(w.coeffs());
        let n = w.norm();
        worst = worst.max((m - n).abs()).max((c - n).abs());
    }
    Ok(check("mass and comass of simple 2-vectors", worst, 1e-12))
}

/// `prox_{τ mass}(v) + τ·P(v/τ) = v`, `P` the comass unit-ball projection.
pub fn moreau(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let v: Vec<f64> = (0..6).map(|_| rng.random_range(-2.0..2.0)).collect();
        let tau = rng.random_range(0.05..2.0);
        let mut p = v.clone();
        prox_mass_slice(&mut p, tau);
        let mut q: Vec<f64> = v.iter().map(|x| x / tau).collect();
        project_comass_ball_slice(&mut q, 1.0);
        for i in 0..6 {
            worst = worst.max((p[i] + tau * q[i] - v[i]).abs());
        }
    }
    Ok(check("Moreau decomposition of the mass prox", worst, 1e-12))
}

/// Simplex projection lands in the simplex and satisfies the optimality
/// conditions of the projection.
pub fn simplex(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let len = rng.random_range(1..8);
        let v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.5)).collect();
        let mut p = v.clone();
        project_simplex(&mut p);
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
        worst = worst.max(p.iter().fold(0.0f64, |m, x| m.max(-x)));
        // v - p is constant on the support and not larger off it
        let support: Vec<f64> = (0..len).filter(|&i| p[i] > 0.0).map(|i| v[i] - p[i]).collect();
        let mu = support[0];
        for s in &support {
            worst = worst.max((s - mu).abs());
        }
        for i in (0..len).filter(|&i| p[i] == 0.0) {
            worst = worst.max(v[i] - mu);
        }
    }
    Ok(check("simplex projection optimality", worst, 1e-12))
}

/// The lifted costs agree with the original integrands on graphs.
pub fn lifting(seed: u64) -> Result<Check> {
    let brach = CostModel::Brachistochrone {
        gravity: 9.81,
        y_min: 0.1,
    };
    let bc = CubicalComplex::new_box(&[4, 4], &[0.25, 0.25])?.with_origin(&[0.0, 0.1])?;
    let volume = CostVolume::new(2, 2, 3, (0..12).map(|i| (i % 5) as f32 * 0.3).collect())?;
    let tv = CostModel::TotalVariation {
        n: 2,
        data: std::sync::Arc::new(volume),
    };
    let tc = CubicalComplex::new_box(&[2, 2, 2], &[0.5, 0.5, 1.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut img = || {
        let data = (0..12).map(|_| rng.random_range(0.0..1.0)).collect();
        Image::new(2, 2, 3, data)
    };
    let reg = CostModel::Registration {
        data: std::sync::Arc::new(ImagePairCost {
            fixed: img()?,
            moving: img()?,
        }),
        epsilon: 0.1,
    };
    let rc = CubicalComplex::new_box(&[2, 2, 2, 2], &[1.0; 4])?;
    let worst = polyconvex_consistency(&brach, &bc, 300, seed)?
        .max(polyconvex_consistency(&tv, &tc, 300, seed)?)
        .max(polyconvex_consistency(&reg, &rc, 300, seed)?);
    Ok(check("lifted cost agrees with the integrand on graphs", worst, 1e-9))
}

/// Runs all checks with a fixed seed.
pub fn run_all() -> Result<Vec<Check>> {
    Ok(vec![
        boundary_squared(1)?,
        stokes(2)?,
        mass_on_simple_vectors(3)?,
        moreau(4)?,
        simplex(5)?,
        lifting(6)?,
    ])
}
