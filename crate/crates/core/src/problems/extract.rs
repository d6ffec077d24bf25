//! Recovering unlifted solutions from solved chains.

use rayon::prelude::*;

use crate::cubical::{Block, Chain, CubicalComplex};
use crate::error::{Error, Result};
use crate::whitney::{chain_density_at, Sample};

/// Center-of-mass curve or image of a scalar problem.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarSolution {
    /// One value per domain n-cube, in the projected complex's id order;
    /// `NaN` where the fiber carries no mass.
    pub values: Vec<f64>,
    /// Fiber mass `Σ_y w(x, y)`.
    pub mass: Vec<f64>,
    /// Domain cubes whose fiber mass vanishes.
    pub empty: Vec<usize>,
}

/// `f(x) = Σ_y y w(x, y) / Σ_y w(x, y)`, `w` the coefficients of cubes
/// aligned with the domain over `x`.
pub fn extract_scalar(complex: &CubicalComplex, n: usize, t: &Chain) -> Result<ScalarSolution> {
    if t.degree != n || t.coeffs.len() != complex.num_cubes(n) {
        return Err(Error::DimensionMismatch {
            expected: complex.num_cubes(n),
            got: t.coeffs.len(),
        });
    }
    if complex.dim() != n + 1 {
        return Err(Error::InvalidConfig("scalar extraction needs N = 1".into()));
    }
    let (push, domain) = complex.pushforward_matrix(n, Block::First(n));
    let cells = domain.num_cubes(n);
    let mut values = vec![f64::NAN; cells];
    let mut mass = vec![0.0; cells];
    let mut empty = Vec::new();
    for r in 0..cells {
        let (ids, _) = push.row(r);
        let mut m = 0.0;
        let mut moment = 0.0;
        for &id in ids {
            let w = t.coeffs[id as usize];
            let (base, _) = complex.cube_parts(n, id as usize);
            let y = complex.origin()[n] + complex.spacing()[n] * base[n] as f64;
            m += w;
            moment += w * y;
        }
        mass[r] = m;
        if m.abs() > 1e-12 {
            values[r] = moment / m;
        } else {
            empty.push(r);
        }
    }
    Ok(ScalarSolution { values, mass, empty })
}

/// Forward and backward maps of a registration chain on pixel centers.
#[derive(Clone, Debug, PartialEq)]
pub struct MapSolution {
    pub width: usize,
    pub height: usize,
    /// `f(x)` per pixel of the first image, row-major, physical units.
    pub forward: Vec<[f64; 2]>,
    /// `f⁻¹(y)` per pixel of the second image, row-major.
    pub backward: Vec<[f64; 2]>,
    /// Fraction of the aligned fiber mass on the best two levels of each
    /// codomain axis (the smaller of the two), per pixel of the first image.
    pub concentration: Vec<f64>,
    /// Pixels of the first image whose fiber density vanishes.
    pub empty_forward: Vec<usize>,
    pub empty_backward: Vec<usize>,
}

fn top_two_fraction(marginal: &[f64]) -> f64 {
    let total: f64 = marginal.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let mut sorted: Vec<f64> = marginal.iter().map(|v| v.max(0.0)).collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    (sorted[0] + sorted.get(1).copied().unwrap_or(0.0)) / total
}

/// `f(x) = Σ_y y ‖(WT)(x, y)‖ / Σ_y ‖(WT)(x, y)‖` and the symmetric
/// backward map, evaluated at pixel centers.
pub fn extract_map(complex: &CubicalComplex, t: &Chain) -> Result<MapSolution> {
    if complex.dim() != 4 || t.degree != 2 || t.coeffs.len() != complex.num_cubes(2) {
        return Err(Error::InvalidConfig("map extraction needs a 2-chain in dimension 4".into()));
    }
    let s = complex.shape();
    let (w1, h1, w2, h2) = (s[0], s[1], s[2], s[3]);
    if (w1, h1) != (w2, h2) {
        return Err(Error::Shape("map extraction expects equally sized images".into()));
    }
    let center = |lattice: [usize; 4]| -> Vec<f64> {
        let l: Vec<f64> = lattice.iter().map(|&v| v as f64 + 0.5).collect();
        complex.to_physical(&l)
    };
    // density magnitude per (x pixel, y pixel), row-major x then y
    let density: Vec<f64> = (0..h1 * w1)
        .into_par_iter()
        .flat_map_iter(|px| {
            let (xi, xj) = (px % w1, px / w1);
            (0..h2 * w2).map(move |py| {
                let (yi, yj) = (py % w2, py / w2);
                let sample = Sample {
                    cell: vec![xi as i64, xj as i64, yi as i64, yj as i64],
                    local: vec![0.5; 4],
                };
                if !complex.voxel_active(&sample.cell) {
                    return 0.0;
                }
                chain_density_at(complex, t, &sample).norm()
            })
        })
        .collect();
    let npx = w1 * h1;
    let mut forward = vec![[f64::NAN; 2]; npx];
    let mut backward = vec![[f64::NAN; 2]; npx];
    let mut empty_forward = Vec::new();
    let mut empty_backward = Vec::new();
    for px in 0..npx {
        let (mut m, mut a, mut b) = (0.0, 0.0, 0.0);
        for py in 0..npx {
            let d = density[px * npx + py];
            let y = center([0, 0, py % w2, py / w2]);
            m += d;
            a += d * y[2];
            b += d * y[3];
        }
        if m > 1e-12 {
            forward[px] = [a / m, b / m];
        } else {
            empty_forward.push(px);
        }
    }
    for py in 0..npx {
        let (mut m, mut a, mut b) = (0.0, 0.0, 0.0);
        for px in 0..npx {
            let d = density[px * npx + py];
            let x = center([px % w1, px / w1, 0, 0]);
            m += d;
            a += d * x[0];
            b += d * x[1];
        }
        if m > 1e-12 {
            backward[py] = [a / m, b / m];
        } else {
            empty_backward.push(py);
        }
    }

    // aligned component over each x pixel: the (1,2)-cubes
    let mut concentration = vec![0.0; npx];
    let mut marg_a = vec![vec![0.0; w2 + 1]; npx];
    let mut marg_b = vec![vec![0.0; h2 + 1]; npx];
    for id in 0..complex.num_cubes(2) {
        let (base, m) = complex.cube_parts(2, id);
        if m != 0b0011 {
            continue;
        }
        let px = base[1] as usize * w1 + base[0] as usize;
        marg_a[px][base[2] as usize] += t.coeffs[id];
        marg_b[px][base[3] as usize] += t.coeffs[id];
    }
    for px in 0..npx {
        concentration[px] = top_two_fraction(&marg_a[px]).min(top_two_fraction(&marg_b[px]));
    }

    Ok(MapSolution {
        width: w1,
        height: h1,
        forward,
        backward,
        concentration,
        empty_forward,
        empty_backward,
    })
}

impl MapSolution {
    /// Physical center of pixel `(i, j)` of the first image.
    pub fn pixel_center(complex: &CubicalComplex, i: usize, j: usize) -> [f64; 2] {
        let h = complex.spacing();
        let o = complex.origin();
        [o[0] + h[0] * (i as f64 + 0.5), o[1] + h[1] * (j as f64 + 0.5)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::graph::{staircase_chain, translation_chain};

    #[test]
    fn point_mass_and_split_mass() {
        let g = CubicalComplex::new_box(&[2, 6], &[1.0, 1.0]).unwrap();
        let mut t = staircase_chain(&g, &[3, 3]).unwrap();
        let sol = extract_scalar(&g, 1, &t).unwrap();
        assert_eq!(sol.values, vec![3.0, 3.0]);
        let lvl = |l: i64| g.cube_id(&[0, l], 0b01).unwrap();
        t.coeffs[lvl(3)] = 0.5;
        t.coeffs[lvl(4)] = 0.5;
        let sol = extract_scalar(&g, 1, &t).unwrap();
        assert_eq!(sol.values[0], 3.5);
        let zero = Chain::zeros(&g, 1);
        assert_eq!(extract_scalar(&g, 1, &zero).unwrap().empty, vec![0, 1]);
    }

    #[test]
    fn shifting_mass_shifts_value() {
        let g = CubicalComplex::new_box(&[1, 6], &[1.0, 0.25]).unwrap();
        let mut t = Chain::zeros(&g, 1);
        let lvl = |l: i64| g.cube_id(&[0, l], 0b01).unwrap();
        t.coeffs[lvl(1)] = 0.3;
        t.coeffs[lvl(2)] = 0.7;
        let before = extract_scalar(&g, 1, &t).unwrap().values[0];
        let mut shifted = Chain::zeros(&g, 1);
        shifted.coeffs[lvl(2)] = 0.3;
        shifted.coeffs[lvl(3)] = 0.7;
        let after = extract_scalar(&g, 1, &shifted).unwrap().values[0];
        assert!((after - before - 0.25).abs() < 1e-12);
    }

    #[test]
    fn identity_and_translation_maps() {
        let g = CubicalComplex::new_box(&[6, 6, 6, 6], &[1.0; 4]).unwrap();
        let id = translation_chain(&g, [0.0, 0.0]).unwrap();
        let sol = extract_map(&g, &id).unwrap();
        // the outermost ring sees a one-sided fiber
        for j in 1..5 {
            for i in 1..5 {
                let c = MapSolution::pixel_center(&g, i, j);
                let f = sol.forward[j * 6 + i];
                let b = sol.backward[j * 6 + i];
                assert!((f[0] - c[0]).abs() < 1e-12 && (f[1] - c[1]).abs() < 1e-12, "{f:?} vs {c:?}");
                assert!((b[0] - c[0]).abs() < 1e-12 && (b[1] - c[1]).abs() < 1e-12);
                assert!((sol.concentration[j * 6 + i] - 1.0).abs() < 1e-12);
            }
        }
        let shifted = translation_chain(&g, [1.0, 2.0]).unwrap();
        let sol = extract_map(&g, &shifted).unwrap();
        for j in 1..3 {
            for i in 1..4 {
                let c = MapSolution::pixel_center(&g, i, j);
                let f = sol.forward[j * 6 + i];
                assert!((f[0] - c[0] - 1.0).abs() < 1e-12 && (f[1] - c[1] - 2.0).abs() < 1e-12, "{i} {j} {f:?}");
            }
        }
    }
}
