//! Lowest-order Whitney interpolation on cubical complexes.
//!
//! A point is always evaluated relative to a host voxel. Inside the host,
//! the face `κ` with orientation `I` contributes
//! `Π_{i∉I} (t_i if κ sits on the upper side of axis i, else 1 - t_i)`
//! where `t` are the local coordinates in `[0, 1]^d`. Points on interfaces
//! between voxels take the lower neighbour per axis when it is active.

use crate::cubical::{Chain, Cochain, CubicalComplex};
use crate::error::{Error, Result};
use crate::multivector::KVector;
use crate::sparse::SparseMatrix;

const SNAP: f64 = 1e-12;

/// A point of `φ(Q)` together with the voxel that evaluates it.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    /// Lattice coordinates of the host voxel's lower corner.
    pub cell: Vec<i64>,
    /// Local coordinates inside the host voxel, each in `[0, 1]`.
    pub local: Vec<f64>,
}

impl Sample {
    /// Physical position `φ(cell + local)`.
    pub fn position(&self, complex: &CubicalComplex) -> Vec<f64> {
        let lattice: Vec<f64> = self.cell.iter().zip(&self.local).map(|(&c, &t)| c as f64 + t).collect();
        complex.to_physical(&lattice)
    }
}

/// How sample points are placed in every active voxel.
#[derive(Clone, Debug, PartialEq)]
pub enum SampleMode {
    /// All `2^d` corners of every voxel.
    Vertices,
    /// Corners along the first `domain_dims` axes; along the remaining axes
    /// `per_edge` extra equispaced points between the two corners.
    Codomain { domain_dims: usize, per_edge: usize },
    /// Voxel centers only.
    Centers,
    /// A fixed list of points.
    Explicit(Vec<Sample>),
}

/// Locates the host voxel of a physical point.
pub fn locate(complex: &CubicalComplex, x: &[f64]) -> Result<Sample> {
    let d = complex.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let u = complex.to_lattice(x);
    let shape = complex.shape();
    // per axis: candidate cells in preference order
    let mut options: Vec<Vec<i64>> = Vec::with_capacity(d);
    for i in 0..d {
        let v = u[i];
        if !v.is_finite() || v < -SNAP || v > shape[i] as f64 + SNAP {
            return Err(Error::OutsideDomain { point: x.to_vec() });
        }
        let r = v.round();
        if (v - r).abs() <= SNAP {
            options.push(vec![r as i64 - 1, r as i64]);
        } else {
            options.push(vec![v.floor() as i64]);
        }
    }
    let total: usize = options.iter().map(Vec::len).product();
    let mut cell = vec![0i64; d];
    for pick in 0..total {
        let mut rest = pick;
        for i in (0..d).rev() {
            let n = options[i].len();
            cell[i] = options[i][rest % n];
            rest /= n;
        }
        if complex.voxel_active(&cell) {
            let local = (0..d).map(|i| (u[i] - cell[i] as f64).clamp(0.0, 1.0)).collect();
            return Ok(Sample {
                cell: cell.clone(),
                local,
            });
        }
    }
    Err(Error::OutsideDomain { point: x.to_vec() })
}

/// `(orientation slot, cube id, weight)` for every nonzero basis function
/// of degree `k` at the sample.
pub fn basis_weights(complex: &CubicalComplex, sample: &Sample, k: usize) -> Vec<(usize, usize, f64)> {
    let d = complex.dim();
    let mut out = Vec::new();
    let mut base = sample.cell.clone();
    for (slot, &m) in complex.orientations(k).iter().enumerate() {
        let free: Vec<usize> = (0..d).filter(|i| m & (1 << i) == 0).collect();
        for pick in 0..(1u32 << free.len()) {
            let mut w = 1.0;
            for (j, &axis) in free.iter().enumerate() {
                let upper = (pick >> j) & 1 == 1;
                let t = sample.local[axis];
                w *= if upper { t } else { 1.0 - t };
                base[axis] = sample.cell[axis] + upper as i64;
            }
            if w == 0.0 {
                continue;
            }
            let id = complex
                .cube_id(&base, m)
                .expect("faces of an active voxel are in the complex");
            out.push((slot, id, w));
        }
        base.copy_from_slice(&sample.cell);
    }
    out
}

fn interpolate(complex: &CubicalComplex, coeffs: &[f64], k: usize, sample: &Sample) -> KVector {
    let mut v = KVector::zeros(complex.dim(), k);
    let c = v.coeffs_mut();
    for (slot, id, w) in basis_weights(complex, sample, k) {
        c[slot] += w * coeffs[id];
    }
    v
}

fn check_len(complex: &CubicalComplex, k: usize, len: usize) -> Result<()> {
    if k > complex.dim() {
        return Err(Error::DegreeOverflow {
            p: k,
            q: 0,
            dim: complex.dim(),
        });
    }
    if len != complex.num_cubes(k) {
        return Err(Error::DimensionMismatch {
            expected: complex.num_cubes(k),
            got: len,
        });
    }
    Ok(())
}

/// `(Wω)(x)`, a k-covector.
pub fn whitney_eval(complex: &CubicalComplex, omega: &Cochain, x: &[f64]) -> Result<KVector> {
    check_len(complex, omega.degree, omega.coeffs.len())?;
    let sample = locate(complex, x)?;
    Ok(interpolate(complex, &omega.coeffs, omega.degree, &sample))
}

/// Whitney interpolation of chain coefficients, a k-vector field.
pub fn chain_density(complex: &CubicalComplex, chain: &Chain, x: &[f64]) -> Result<KVector> {
    check_len(complex, chain.degree, chain.coeffs.len())?;
    let sample = locate(complex, x)?;
    Ok(interpolate(complex, &chain.coeffs, chain.degree, &sample))
}

/// [`chain_density`] at a precomputed sample.
pub fn chain_density_at(complex: &CubicalComplex, chain: &Chain, sample: &Sample) -> KVector {
    interpolate(complex, &chain.coeffs, chain.degree, sample)
}

/// Sample points for every active voxel, voxels in id order.
pub fn generate_samples(complex: &CubicalComplex, mode: &SampleMode) -> Result<Vec<Sample>> {
    let d = complex.dim();
    let per_axis: Vec<Vec<f64>> = match mode {
        SampleMode::Explicit(list) => {
            for s in list {
                let inside = s.cell.len() == d
                    && s.local.len() == d
                    && complex.voxel_active(&s.cell)
                    && s.local.iter().all(|t| (0.0..=1.0).contains(t));
                if !inside {
                    return Err(Error::OutsideDomain {
                        point: s.local.clone(),
                    });
                }
            }
            return Ok(list.clone());
        }
        SampleMode::Vertices => vec![vec![0.0, 1.0]; d],
        SampleMode::Centers => vec![vec![0.5]; d],
        SampleMode::Codomain {
            domain_dims,
            per_edge,
        } => {
            if *domain_dims > d {
                return Err(Error::InvalidConfig(format!(
                    "{domain_dims} domain axes in dimension {d}"
                )));
            }
            let m = *per_edge;
            let fine: Vec<f64> = (0..=m + 1).map(|j| j as f64 / (m + 1) as f64).collect();
            (0..d)
                .map(|i| if i < *domain_dims { vec![0.0, 1.0] } else { fine.clone() })
                .collect()
        }
    };
    let mut locals: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &per_axis {
        locals = locals
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&t| {
                    let mut p = prefix.clone();
                    p.push(t);
                    p
                })
            })
            .collect();
    }
    let shape = complex.shape();
    let cells: usize = shape.iter().product();
    let mut out = Vec::new();
    let mut cell = vec![0i64; d];
    for lin in 0..cells {
        let mut rest = lin;
        for i in (0..d).rev() {
            cell[i] = (rest % shape[i]) as i64;
            rest /= shape[i];
        }
        if !complex.voxel_active(&cell) {
            continue;
        }
        for local in &locals {
            out.push(Sample {
                cell: cell.clone(),
                local: local.clone(),
            });
        }
    }
    Ok(out)
}

/// Stacked evaluation operator: row `s·C(d,k) + slot` gives component
/// `slot` of `(Wω)` at sample `s`.
pub fn sampling_operator(complex: &CubicalComplex, samples: &[Sample], k: usize) -> SparseMatrix {
    let comps = complex.orientations(k).len();
    let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); samples.len() * comps];
    for (s, sample) in samples.iter().enumerate() {
        for (slot, id, w) in basis_weights(complex, sample, k) {
            rows[s * comps + slot].push((id as u32, w));
        }
    }
    for row in rows.iter_mut() {
        row.sort_by_key(|e| e.0);
    }
    SparseMatrix::from_rows(complex.num_cubes(k), rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hat_function_in_one_dimension() {
        let g = CubicalComplex::new_box(&[2], &[1.0]).unwrap();
        let mut w = Cochain::zeros(&g, 0);
        w.coeffs[g.cube_id(&[0], 0).unwrap()] = 1.0;
        let v = whitney_eval(&g, &w, &[0.4]).unwrap();
        assert!((v.coeffs()[0] - 0.6).abs() < 1e-15);
        assert!(whitney_eval(&g, &w, &[2.5]).is_err());
    }

    #[test]
    fn edge_form_in_two_dimensions() {
        let g = CubicalComplex::new_box(&[2, 2], &[1.0, 1.0]).unwrap();
        let mut w = Cochain::zeros(&g, 1);
        w.coeffs[g.cube_id(&[0, 0], 0b01).unwrap()] = 1.0;
        assert_eq!(whitney_eval(&g, &w, &[0.5, 0.0]).unwrap().coeffs(), &[1.0, 0.0]);
        assert_eq!(whitney_eval(&g, &w, &[0.5, 0.5]).unwrap().coeffs(), &[0.5, 0.0]);
        let zero = Cochain::zeros(&g, 1);
        assert_eq!(whitney_eval(&g, &zero, &[1.3, 0.2]).unwrap().coeffs(), &[0.0, 0.0]);
    }

    #[test]
    fn interface_tie_break_prefers_lower_cell() {
        let g = CubicalComplex::new_box(&[2, 2], &[1.0, 1.0]).unwrap();
        let s = locate(&g, &[1.0, 0.5]).unwrap();
        assert_eq!(s.cell, vec![0, 0]);
        assert_eq!(s.local, vec![1.0, 0.5]);
        let s = locate(&g, &[0.0, 0.0]).unwrap();
        assert_eq!(s.cell, vec![0, 0]);
    }

    #[test]
    fn sampling_operator_matches_eval() {
        let g = CubicalComplex::new_box(&[3, 2, 2], &[0.5, 1.0, 0.25]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..=3 {
            let omega = Cochain {
                degree: k,
                coeffs: (0..g.num_cubes(k)).map(|_| rng.random_range(-1.0..1.0)).collect(),
            };
            let samples: Vec<Sample> = (0..40)
                .map(|_| {
                    let x = [rng.random_range(0.0..1.5), rng.random_range(0.0..2.0), rng.random_range(0.0..0.5)];
                    locate(&g, &x).unwrap()
                })
                .collect();
            let op = sampling_operator(&g, &samples, k);
            let stacked = op.matvec(&omega.coeffs);
            let comps = g.orientations(k).len();
            for (s, sample) in samples.iter().enumerate() {
                let x = sample.position(&g);
                let direct = whitney_eval(&g, &omega, &x).unwrap();
                for c in 0..comps {
                    assert!((stacked[s * comps + c] - direct.coeffs()[c]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn vertex_sample_selects_incident_cubes() {
        let g = CubicalComplex::new_box(&[2, 2], &[1.0, 1.0]).unwrap();
        let sample = Sample {
            cell: vec![0, 0],
            local: vec![1.0, 1.0],
        };
        let weights = basis_weights(&g, &sample, 1);
        assert_eq!(weights.len(), 2);
        assert!(weights.iter().all(|&(_, _, w)| w == 1.0));
        let ids: Vec<usize> = weights.iter().map(|w| w.1).collect();
        assert!(ids.contains(&g.cube_id(&[0, 1], 0b01).unwrap()));
        assert!(ids.contains(&g.cube_id(&[1, 0], 0b10).unwrap()));
    }

    #[test]
    fn sample_counts() {
        let g = CubicalComplex::new_box(&[2, 2, 2, 2], &[1.0; 4]).unwrap();
        assert_eq!(generate_samples(&g, &SampleMode::Vertices).unwrap().len(), 16 * 16);
        let g = CubicalComplex::new_box(&[3, 2], &[1.0; 2]).unwrap();
        let mode = SampleMode::Codomain {
            domain_dims: 1,
            per_edge: 1,
        };
        assert_eq!(generate_samples(&g, &mode).unwrap().len(), 6 * 6);
    }

    #[test]
    fn partition_of_unity_and_de_rham_duality() {
        let g = CubicalComplex::new_box(&[3, 3], &[0.3, 0.7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = [rng.random_range(0.0..0.9), rng.random_range(0.0..2.1)];
            let s = locate(&g, &x).unwrap();
            let total: f64 = basis_weights(&g, &s, 0).iter().map(|w| w.2).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        for k in 0..=2 {
            for id in 0..g.num_cubes(k) {
                let omega = Cochain {
                    degree: k,
                    coeffs: (0..g.num_cubes(k)).map(|j| (j == id) as u8 as f64).collect(),
                };
                for other in 0..g.num_cubes(k) {
                    if g.orientation_slot(k, other) != g.orientation_slot(k, id) {
                        continue;
                    }
                    let center = g.cube_center(k, other);
                    let slot = g.orientation_slot(k, other);
                    let value = whitney_eval(&g, &omega, &center).unwrap().coeffs()[slot];
                    let integral = value * g.volume(k, other);
                    let expected = if other == id { g.volume(k, id) } else { 0.0 };
                    assert!((integral - expected).abs() < 1e-9);
                }
            }
        }
    }
}
