//! Chains of known graphs, used as feasible points and reference solutions.
//!
//! Curves are projected onto the complex with the de Rham map
//! `T_κ H(κ) = ∫_G ⟨Ŵ_κ, τ⟩`. Pieces lying on a cell interface belong to the
//! lower neighbour, as in [`crate::whitney::locate`].

use std::collections::HashMap;

use crate::cubical::{Chain, CubicalComplex};
use crate::error::{Error, Result};
use crate::lifting::{CostModel, PointContext};
use crate::whitney::{basis_weights, locate, Sample};

/// Straight piece inside one host voxel, lattice coordinates.
struct Piece {
    cell: Vec<i64>,
    from: Vec<f64>,
    to: Vec<f64>,
}

/// Splits the lattice segment `p → q` at every integer crossing.
fn split_segment(complex: &CubicalComplex, p: &[f64], q: &[f64]) -> Result<Vec<Piece>> {
    let d = p.len();
    let mut cuts = vec![0.0, 1.0];
    for i in 0..d {
        let (a, b) = (p[i], q[i]);
        if a == b {
            continue;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let mut k = lo.floor() + 1.0;
        while k < hi {
            cuts.push((k - a) / (b - a));
            k += 1.0;
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut pieces = Vec::new();
    for w in cuts.windows(2) {
        let at = |t: f64| -> Vec<f64> { (0..d).map(|i| p[i] + t * (q[i] - p[i])).collect() };
        let (from, to) = (at(w[0]), at(w[1]));
        let mid = at(0.5 * (w[0] + w[1]));
        let host = locate(complex, &complex.to_physical(&mid))?;
        pieces.push(Piece {
            cell: host.cell,
            from,
            to,
        });
    }
    Ok(pieces)
}

fn local_point(cell: &[i64], lattice: &[f64]) -> Vec<f64> {
    cell.iter()
        .zip(lattice)
        .map(|(&c, &u)| (u - c as f64).clamp(0.0, 1.0))
        .collect()
}

/// Simpson nodes and weights on `[0, 1]`; exact for the quadratics met here.
const SIMPSON: [(f64, f64); 3] = [(0.0, 1.0 / 6.0), (0.5, 4.0 / 6.0), (1.0, 1.0 / 6.0)];

/// De Rham projection of a polyline (physical coordinates) in a complex of
/// dimension 2 onto 1-chains.
pub fn polyline_chain(complex: &CubicalComplex, points: &[Vec<f64>]) -> Result<Chain> {
    if complex.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: complex.dim(),
        });
    }
    let mut chain = Chain::zeros(complex, 1);
    let h = complex.spacing();
    for w in points.windows(2) {
        let p = complex.to_lattice(&w[0]);
        let q = complex.to_lattice(&w[1]);
        for piece in split_segment(complex, &p, &q)? {
            // physical tangent of the piece over its unit parameter
            let tangent: Vec<f64> = (0..2).map(|i| (piece.to[i] - piece.from[i]) * h[i]).collect();
            for &(s, wq) in &SIMPSON {
                let x: Vec<f64> = (0..2).map(|i| piece.from[i] + s * (piece.to[i] - piece.from[i])).collect();
                let sample = Sample {
                    local: local_point(&piece.cell, &x),
                    cell: piece.cell.clone(),
                };
                for (slot, id, wt) in basis_weights(complex, &sample, 1) {
                    let axis = complex.orientations(1)[slot].trailing_zeros() as usize;
                    chain.coeffs[id] += wq * wt * tangent[axis];
                }
            }
        }
    }
    for (id, c) in chain.coeffs.iter_mut().enumerate() {
        *c /= complex.volume(1, id);
    }
    Ok(chain)
}

fn check_codomain(complex: &CubicalComplex, axis: usize, value: f64) -> Result<()> {
    let min = complex.origin()[axis];
    let max = min + complex.spacing()[axis] * complex.shape()[axis] as f64;
    let tol = 1e-12 * (max - min).abs().max(1.0);
    if !value.is_finite() || value < min - tol || value > max + tol {
        return Err(Error::OutsideCodomain { value, min, max });
    }
    Ok(())
}

/// Graph of the piecewise-linear function through `(x_i, values[i])` at
/// the domain lattice vertices (n = N = 1).
pub fn graph_chain(complex: &CubicalComplex, values: &[f64]) -> Result<Chain> {
    let cols = complex.shape()[0];
    if values.len() != cols + 1 {
        return Err(Error::Shape(format!(
            "graph needs {} vertex values, got {}",
            cols + 1,
            values.len()
        )));
    }
    let points = graph_points(complex, values)?;
    polyline_chain(complex, &points)
}

fn graph_points(complex: &CubicalComplex, values: &[f64]) -> Result<Vec<Vec<f64>>> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            check_codomain(complex, 1, v)?;
            Ok(vec![complex.origin()[0] + complex.spacing()[0] * i as f64, v])
        })
        .collect()
}

/// Lattice path constant on every domain cell, at integer `levels`, with
/// vertical connectors at the jumps.
pub fn staircase_chain(complex: &CubicalComplex, levels: &[i64]) -> Result<Chain> {
    let cols = complex.shape()[0];
    if levels.len() != cols {
        return Err(Error::Shape(format!("staircase needs {cols} levels, got {}", levels.len())));
    }
    let (o, h) = (complex.origin(), complex.spacing());
    let y = |l: i64| {
        let v = o[1] + h[1] * l as f64;
        check_codomain(complex, 1, v).map(|_| v)
    };
    let mut points = Vec::with_capacity(2 * cols);
    for (i, &l) in levels.iter().enumerate() {
        points.push(vec![o[0] + h[0] * i as f64, y(l)?]);
        points.push(vec![o[0] + h[0] * (i + 1) as f64, y(l)?]);
    }
    polyline_chain(complex, &points)
}

/// Samples of one voxel on a tensor lattice of local coordinates.
struct CellSamples {
    coords: Vec<Vec<f64>>,
    index: HashMap<Vec<u64>, usize>,
}

fn key(local: &[f64]) -> Vec<u64> {
    local.iter().map(|t| (t * 1e9).round() as u64).collect()
}

fn group_samples(samples: &[Sample]) -> Result<HashMap<Vec<i64>, CellSamples>> {
    let mut groups: HashMap<Vec<i64>, CellSamples> = HashMap::new();
    for (s, sample) in samples.iter().enumerate() {
        let entry = groups.entry(sample.cell.clone()).or_insert_with(|| CellSamples {
            coords: vec![Vec::new(); sample.local.len()],
            index: HashMap::new(),
        });
        for (axis, &t) in sample.local.iter().enumerate() {
            if !entry.coords[axis].iter().any(|&c: &f64| (c - t).abs() < 1e-9) {
                entry.coords[axis].push(t);
            }
        }
        entry.index.insert(key(&sample.local), s);
    }
    for g in groups.values_mut() {
        for c in g.coords.iter_mut() {
            c.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        }
        let lattice_size: usize = g.coords.iter().map(Vec::len).product();
        let corners = g.coords.iter().all(|c| c[0] == 0.0 && *c.last().unwrap() == 1.0);
        if lattice_size != g.index.len() || !corners {
            return Err(Error::InvalidConfig(
                "graph energies need samples on a tensor lattice containing the voxel corners".into(),
            ));
        }
    }
    Ok(groups)
}

/// Piecewise-linear nodal weights of the sample lattice at `local`.
fn nodal_weights(g: &CellSamples, local: &[f64]) -> Vec<(usize, f64)> {
    let d = local.len();
    let mut per_axis: Vec<[(f64, f64); 2]> = Vec::with_capacity(d);
    for axis in 0..d {
        let c = &g.coords[axis];
        let t = local[axis];
        let k = c.windows(2).position(|w| t <= w[1]).unwrap_or(c.len() - 2);
        let s = (t - c[k]) / (c[k + 1] - c[k]);
        per_axis.push([(c[k], 1.0 - s), (c[k + 1], s)]);
    }
    let mut out = Vec::with_capacity(1 << d);
    for pick in 0..(1u32 << d) {
        let mut w = 1.0;
        let mut node = Vec::with_capacity(d);
        for (axis, pair) in per_axis.iter().enumerate() {
            let (c, wi) = pair[((pick >> axis) & 1) as usize];
            w *= wi;
            node.push(c);
        }
        if w != 0.0 {
            out.push((g.index[&key(&node)], w));
        }
    }
    out
}

/// The per-sample n-vectors `λ_s = ∫_{G ∩ C} N_s τ` of a polyline, with
/// `N_s` the nodal basis of the sample lattice in the host voxel `C`.
///
/// They satisfy `Wᵀλ = D T` for `T` = [`polyline_chain`] exactly, so
/// `Σ Ψ**(λ_s)` is the discrete energy of a feasible point.
pub fn polyline_lambda(complex: &CubicalComplex, samples: &[Sample], points: &[Vec<f64>]) -> Result<Vec<f64>> {
    if complex.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: complex.dim(),
        });
    }
    let groups = group_samples(samples)?;
    let mut lambda = vec![0.0; 2 * samples.len()];
    let h = complex.spacing();
    for w in points.windows(2) {
        let p = complex.to_lattice(&w[0]);
        let q = complex.to_lattice(&w[1]);
        for piece in split_segment(complex, &p, &q)? {
            let g = groups.get(&piece.cell).ok_or_else(|| {
                Error::InvalidConfig(format!("no samples in voxel {:?}", piece.cell))
            })?;
            let a = local_point(&piece.cell, &piece.from);
            let b = local_point(&piece.cell, &piece.to);
            // split again at the sample sub-lattice
            let mut cuts = vec![0.0, 1.0];
            for axis in 0..2 {
                if a[axis] == b[axis] {
                    continue;
                }
                for &c in &g.coords[axis] {
                    let t = (c - a[axis]) / (b[axis] - a[axis]);
                    if t > 0.0 && t < 1.0 {
                        cuts.push(t);
                    }
                }
            }
            cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
            let tangent: Vec<f64> = (0..2).map(|i| (piece.to[i] - piece.from[i]) * h[i]).collect();
            for c in cuts.windows(2) {
                let len = c[1] - c[0];
                for &(s, wq) in &SIMPSON {
                    let t = c[0] + s * len;
                    let x: Vec<f64> = (0..2).map(|i| a[i] + t * (b[i] - a[i])).collect();
                    for (sample, nw) in nodal_weights(g, &x) {
                        for i in 0..2 {
                            lambda[2 * sample + i] += len * wq * nw * tangent[i];
                        }
                    }
                }
            }
        }
    }
    Ok(lambda)
}

/// Discrete lifted energy `Σ_s Ψ**(λ_s)` of the graph through `values`.
pub fn graph_energy(model: &CostModel, complex: &CubicalComplex, samples: &[Sample], values: &[f64]) -> Result<f64> {
    let points = graph_points(complex, values)?;
    let lambda = polyline_lambda(complex, samples, &points)?;
    let mut total = 0.0;
    for (s, sample) in samples.iter().enumerate() {
        let z = sample.position(complex);
        let cost = model.at(&PointContext::new(&z, sample))?;
        total += cost.psi(&lambda[2 * s..2 * s + 2]);
    }
    Ok(total)
}

/// Graph of a piecewise-constant function on the pixels of a 3-dimensional
/// complex (n = 2, N = 1), with vertical walls at the jumps.
///
/// `levels[i * ny + j]` is the integer label of pixel `(i, j)`.
pub fn piecewise_constant_surface(complex: &CubicalComplex, levels: &[i64]) -> Result<Chain> {
    if complex.dim() != 3 {
        return Err(Error::DimensionMismatch {
            expected: 3,
            got: complex.dim(),
        });
    }
    let (nx, ny, nl) = (complex.shape()[0], complex.shape()[1], complex.shape()[2] as i64);
    if levels.len() != nx * ny {
        return Err(Error::Shape(format!("surface needs {} levels, got {}", nx * ny, levels.len())));
    }
    if let Some(&l) = levels.iter().find(|&&l| l < 0 || l > nl) {
        let y = |l: i64| complex.origin()[2] + complex.spacing()[2] * l as f64;
        return Err(Error::OutsideCodomain {
            value: y(l),
            min: y(0),
            max: y(nl),
        });
    }
    let mut chain = Chain::zeros(complex, 2);
    let mut put = |base: [i64; 3], m: u32, c: f64| -> Result<()> {
        let id = complex.cube_id(&base, m).ok_or_else(|| Error::CubeNotInComplex {
            base: base.to_vec(),
            axes: (0..3).filter(|a| m & (1 << a) != 0).map(|a| a + 1).collect(),
        })?;
        chain.coeffs[id] += c;
        Ok(())
    };
    let at = |i: usize, j: usize| levels[i * ny + j];
    for i in 0..nx {
        for j in 0..ny {
            let a = at(i, j);
            put([i as i64, j as i64, a], 0b011, 1.0)?;
            if i + 1 < nx {
                let b = at(i + 1, j);
                let s = if b > a { -1.0 } else { 1.0 };
                for m in a.min(b)..a.max(b) {
                    put([i as i64 + 1, j as i64, m], 0b110, s)?;
                }
            }
            if j + 1 < ny {
                let b = at(i, j + 1);
                let s = if b > a { 1.0 } else { -1.0 };
                for m in a.min(b)..a.max(b) {
                    put([i as i64, j as i64 + 1, m], 0b101, s)?;
                }
            }
        }
    }
    Ok(chain)
}

/// Product `A × B` in a 4-dimensional complex of a chain `A` on axes
/// `(0, 2)` and a chain `B` on axes `(1, 3)`, each given on its own
/// 2-dimensional complex.
pub fn product_chain(
    complex: &CubicalComplex,
    first: (&CubicalComplex, &Chain),
    second: (&CubicalComplex, &Chain),
) -> Result<Chain> {
    if complex.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: complex.dim(),
        });
    }
    let (ca, ta) = first;
    let (cb, tb) = second;
    let k = ta.degree + tb.degree;
    let mut chain = Chain::zeros(complex, k);
    for (ia, &va) in ta.coeffs.iter().enumerate() {
        if va == 0.0 {
            continue;
        }
        let (ba, ma) = ca.cube_parts(ta.degree, ia);
        for (ib, &vb) in tb.coeffs.iter().enumerate() {
            if vb == 0.0 {
                continue;
            }
            let (bb, mb) = cb.cube_parts(tb.degree, ib);
            let base = [ba[0], bb[0], ba[1], bb[1]];
            // axis 0 of A is 4-axis 0, axis 1 of A is 4-axis 2, and so on
            let spread = |m: u32, shift: u32| ((m & 1) << shift) | (((m >> 1) & 1) << (shift + 2));
            let (a4, b4) = (spread(ma, 0), spread(mb, 1));
            let sign = crate::multivector::merge_sign(a4, b4);
            let id = complex.cube_id(&base, a4 | b4).ok_or_else(|| Error::CubeNotInComplex {
                base: base.to_vec(),
                axes: (0..4).filter(|a| (a4 | b4) & (1 << a) != 0).map(|a| a + 1).collect(),
            })?;
            chain.coeffs[id] += sign * va * vb;
        }
    }
    Ok(chain)
}

/// The two planar factor complexes `(x1, y1)` and `(x2, y2)` of a
/// 4-dimensional box complex.
pub fn factor_complexes(complex: &CubicalComplex) -> Result<(CubicalComplex, CubicalComplex)> {
    let s = complex.shape();
    let h = complex.spacing();
    let o = complex.origin();
    let a = CubicalComplex::new_box(&[s[0], s[2]], &[h[0], h[2]])?.with_origin(&[o[0], o[2]])?;
    let b = CubicalComplex::new_box(&[s[1], s[3]], &[h[1], h[3]])?.with_origin(&[o[1], o[3]])?;
    Ok((a, b))
}

/// Graph chain of the axis-separable map `x ↦ (f1(x1), f2(x2))` given by
/// polylines in the two factor planes.
pub fn separable_map_chain(complex: &CubicalComplex, first: &[Vec<f64>], second: &[Vec<f64>]) -> Result<Chain> {
    let (ca, cb) = factor_complexes(complex)?;
    let ta = polyline_chain(&ca, first)?;
    let tb = polyline_chain(&cb, second)?;
    product_chain(complex, (&ca, &ta), (&cb, &tb))
}

/// Graph chain of the translation `x ↦ x + shift` (lattice units), clipped
/// to the box.
pub fn translation_chain(complex: &CubicalComplex, shift: [f64; 2]) -> Result<Chain> {
    let s = complex.shape();
    let line = |axis_x: usize, axis_y: usize, t: f64| -> Vec<Vec<f64>> {
        let (nx, ny) = (s[axis_x] as f64, s[axis_y] as f64);
        let x0 = (-t).max(0.0);
        let x1 = (ny - t).min(nx);
        let phys = |x: f64, y: f64| {
            vec![
                complex.origin()[axis_x] + complex.spacing()[axis_x] * x,
                complex.origin()[axis_y] + complex.spacing()[axis_y] * y,
            ]
        };
        vec![phys(x0, x0 + t), phys(x1, x1 + t)]
    };
    separable_map_chain(complex, &line(0, 2, shift[0]), &line(1, 3, shift[1]))
}
