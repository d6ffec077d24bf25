//! Cubical sets given as voxel masks, with chains, cochains, the boundary
//! operator, the volume-weighted pairing and block pushforwards.
//!
//! Axes are 0-based in the API (`axis 0` is the paper's `x_1`); orientation
//! masks set bit `i` when axis `i` is a nondegenerate interval of the cube.
//! Cubes of a degree are numbered by base (axis 0 slowest), then by
//! orientation in lexicographic multi-index order.

use crate::error::{Error, Result};
use crate::multivector::{index_masks, MultiIndex};
use crate::sparse::SparseMatrix;

const NONE: u32 = u32::MAX;

/// Product of intervals `[b_i, b_i + 1]` over `axes` and points `b_i` elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryCube {
    pub base: Vec<i64>,
    pub axes: MultiIndex,
}

impl ElementaryCube {
    pub fn new(base: Vec<i64>, axes: MultiIndex) -> Self {
        debug_assert_eq!(base.len(), axes.dim());
        Self { base, axes }
    }

    /// A vertex.
    pub fn vertex(base: Vec<i64>) -> Self {
        let d = base.len();
        Self {
            base,
            axes: MultiIndex::new(d, vec![]).expect("empty index"),
        }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }
}

/// Real coefficients over the k-cubes of a complex.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

/// Real values on the k-cubes of a complex.
#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl Chain {
    pub fn zeros(complex: &CubicalComplex, degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; complex.num_cubes(degree)],
        }
    }
}

impl Cochain {
    pub fn zeros(complex: &CubicalComplex, degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; complex.num_cubes(degree)],
        }
    }
}

/// Which coordinate block a pushforward keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Block {
    /// The first `n` axes (domain `X`).
    First(usize),
    /// The last `N` axes (codomain `Y`).
    Last(usize),
}

impl Block {
    fn axes(self, dim: usize) -> Vec<usize> {
        match self {
            Block::First(n) => (0..n).collect(),
            Block::Last(m) => (dim - m..dim).collect(),
        }
    }
}

#[derive(Clone, Debug)]
struct Level {
    /// Orientation masks in lexicographic order.
    orientations: Vec<u32>,
    /// `(vertex linear index, orientation slot)` per cube id.
    cubes: Vec<(u32, u8)>,
    /// Per orientation slot: cube id per lattice vertex, or `NONE`.
    lookup: Vec<Vec<u32>>,
    /// Volume per orientation slot.
    volumes: Vec<f64>,
}

/// A full-dimensional cubical set inside a box of cells.
#[derive(Clone, Debug)]
pub struct CubicalComplex {
    dim: usize,
    shape: Vec<usize>,
    mask: Vec<bool>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
    vstrides: Vec<usize>,
    cstrides: Vec<usize>,
    levels: Vec<Level>,
}

fn strides(extent: &[usize]) -> Vec<usize> {
    let mut s = vec![1; extent.len()];
    for i in (0..extent.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * extent[i + 1];
    }
    s
}

impl CubicalComplex {
    /// The box `[0, shape_0] × ... × [0, shape_{d-1}]` of unit cells.
    pub fn new_box(shape: &[usize], spacing: &[f64]) -> Result<Self> {
        let cells = shape.iter().product();
        Self::with_mask(shape, vec![true; cells], spacing)
    }

    /// Cells where `mask` is set, indexed with axis 0 slowest.
    pub fn with_mask(shape: &[usize], mask: Vec<bool>, spacing: &[f64]) -> Result<Self> {
        let dim = shape.len();
        if dim == 0 || dim > 8 {
            return Err(Error::InvalidConfig(format!("unsupported dimension {dim}")));
        }
        if spacing.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: spacing.len(),
            });
        }
        if shape.iter().any(|&s| s == 0) {
            return Err(Error::InvalidConfig("every axis needs at least one cell".into()));
        }
        if let Some(&h) = spacing.iter().find(|&&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::NegativeParameter {
                name: "mesh spacing",
                value: h,
            });
        }
        let cells: usize = shape.iter().product();
        if mask.len() != cells {
            return Err(Error::Shape(format!(
                "voxel mask has {} entries, box has {cells} cells",
                mask.len()
            )));
        }
        let vextent: Vec<usize> = shape.iter().map(|s| s + 1).collect();
        let vertices: usize = vextent.iter().product();
        if vertices * (1usize << dim) >= NONE as usize {
            return Err(Error::InvalidConfig("complex too large".into()));
        }
        let mut complex = Self {
            dim,
            shape: shape.to_vec(),
            mask,
            spacing: spacing.to_vec(),
            origin: vec![0.0; dim],
            vstrides: strides(&vextent),
            cstrides: strides(shape),
            levels: Vec::new(),
        };
        for k in 0..=dim {
            let level = complex.build_level(k, vertices);
            complex.levels.push(level);
        }
        Ok(complex)
    }

    /// Moves the physical position of lattice vertex 0.
    pub fn with_origin(mut self, origin: &[f64]) -> Result<Self> {
        if origin.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: origin.len(),
            });
        }
        self.origin = origin.to_vec();
        Ok(self)
    }

    fn build_level(&self, k: usize, vertices: usize) -> Level {
        let orientations = index_masks(self.dim, k);
        let volumes = orientations
            .iter()
            .map(|&m| (0..self.dim).filter(|i| m & (1 << i) != 0).map(|i| self.spacing[i]).product())
            .collect();
        let mut lookup = vec![vec![NONE; vertices]; orientations.len()];
        let mut cubes = Vec::new();
        let mut base = vec![0i64; self.dim];
        for v in 0..vertices {
            self.unravel_vertex(v, &mut base);
            for (slot, &m) in orientations.iter().enumerate() {
                if self.cube_in_set(&base, m) {
                    lookup[slot][v] = cubes.len() as u32;
                    cubes.push((v as u32, slot as u8));
                }
            }
        }
        Level {
            orientations,
            cubes,
            lookup,
            volumes,
        }
    }

    fn unravel_vertex(&self, mut v: usize, out: &mut [i64]) {
        for i in 0..self.dim {
            out[i] = (v / self.vstrides[i]) as i64;
            v %= self.vstrides[i];
        }
    }

    /// Whether the cell with lower corner `cell` exists and is in the mask.
    pub fn voxel_active(&self, cell: &[i64]) -> bool {
        let mut lin = 0;
        for i in 0..self.dim {
            if cell[i] < 0 || cell[i] >= self.shape[i] as i64 {
                return false;
            }
            lin += cell[i] as usize * self.cstrides[i];
        }
        self.mask[lin]
    }

    /// Whether the cube `(base, orientation)` is a face of an active voxel.
    fn cube_in_set(&self, base: &[i64], orientation: u32) -> bool {
        let free: Vec<usize> = (0..self.dim).filter(|i| orientation & (1 << i) == 0).collect();
        let mut cell = base.to_vec();
        for pick in 0..(1u32 << free.len()) {
            for (j, &axis) in free.iter().enumerate() {
                cell[axis] = base[axis] - ((pick >> j) & 1) as i64;
            }
            if self.voxel_active(&cell) {
                return true;
            }
        }
        false
    }

    /// Whether every voxel around the cube is active; false means the cube
    /// lies on the topological boundary of the set.
    pub fn is_interior(&self, k: usize, id: usize) -> bool {
        let (base, orientation) = self.cube_parts(k, id);
        let free: Vec<usize> = (0..self.dim).filter(|i| orientation & (1 << i) == 0).collect();
        let mut cell = base.clone();
        for pick in 0..(1u32 << free.len()) {
            for (j, &axis) in free.iter().enumerate() {
                cell[axis] = base[axis] - ((pick >> j) & 1) as i64;
            }
            if !self.voxel_active(&cell) {
                return false;
            }
        }
        true
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis of the bounding box.
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn num_cubes(&self, k: usize) -> usize {
        self.levels[k].cubes.len()
    }

    /// Orientation masks of degree `k` in lexicographic order.
    pub fn orientations(&self, k: usize) -> &[u32] {
        &self.levels[k].orientations
    }

    /// Lattice coordinates of the lower corner and the orientation mask.
    pub fn cube_parts(&self, k: usize, id: usize) -> (Vec<i64>, u32) {
        let level = &self.levels[k];
        let (v, slot) = level.cubes[id];
        let mut base = vec![0; self.dim];
        self.unravel_vertex(v as usize, &mut base);
        (base, level.orientations[slot as usize])
    }

    /// Orientation slot (lexicographic rank) of a cube.
    pub fn orientation_slot(&self, k: usize, id: usize) -> usize {
        self.levels[k].cubes[id].1 as usize
    }

    pub fn orientation_mask(&self, k: usize, id: usize) -> u32 {
        let level = &self.levels[k];
        level.orientations[level.cubes[id].1 as usize]
    }

    pub fn cube(&self, k: usize, id: usize) -> ElementaryCube {
        let (base, m) = self.cube_parts(k, id);
        ElementaryCube::new(base, MultiIndex::from_mask(self.dim, m))
    }

    /// All k-cubes in id order.
    pub fn enumerate_cubes(&self, k: usize) -> Vec<ElementaryCube> {
        (0..self.num_cubes(k)).map(|id| self.cube(k, id)).collect()
    }

    /// Id of the cube `(base, orientation)` if it belongs to the set.
    pub fn cube_id(&self, base: &[i64], orientation: u32) -> Option<usize> {
        if base.len() != self.dim {
            return None;
        }
        let k = orientation.count_ones() as usize;
        if k > self.dim {
            return None;
        }
        let level = &self.levels[k];
        let slot = level.orientations.iter().position(|&m| m == orientation)?;
        let mut lin = 0;
        for i in 0..self.dim {
            if base[i] < 0 || base[i] > self.shape[i] as i64 {
                return None;
            }
            lin += base[i] as usize * self.vstrides[i];
        }
        let id = level.lookup[slot][lin];
        (id != NONE).then_some(id as usize)
    }

    pub fn find(&self, cube: &ElementaryCube) -> Option<usize> {
        self.cube_id(&cube.base, cube.axes.mask())
    }

    /// `H^k(φ(κ))`, the product of spacings over the cube's intervals.
    pub fn volume(&self, k: usize, id: usize) -> f64 {
        let level = &self.levels[k];
        level.volumes[level.cubes[id].1 as usize]
    }

    pub fn volumes(&self, k: usize) -> Vec<f64> {
        let level = &self.levels[k];
        level.cubes.iter().map(|&(_, s)| level.volumes[s as usize]).collect()
    }

    /// Physical position of a lattice point.
    pub fn to_physical(&self, lattice: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| self.origin[i] + self.spacing[i] * lattice[i]).collect()
    }

    /// Lattice coordinates of a physical point.
    pub fn to_lattice(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim).map(|i| (x[i] - self.origin[i]) / self.spacing[i]).collect()
    }

    /// Physical center of a cube.
    pub fn cube_center(&self, k: usize, id: usize) -> Vec<f64> {
        let (base, m) = self.cube_parts(k, id);
        let lattice: Vec<f64> = (0..self.dim)
            .map(|i| base[i] as f64 + if m & (1 << i) != 0 { 0.5 } else { 0.0 })
            .collect();
        self.to_physical(&lattice)
    }

    /// `∂ : C_k → C_{k-1}` with `∂κ = Σ_j (-1)^{j-1} (κ_j^+ - κ_j^-)`.
    pub fn boundary_matrix(&self, k: usize) -> SparseMatrix {
        assert!(k >= 1 && k <= self.dim, "boundary degree out of range");
        let cols = self.num_cubes(k);
        let mut triplets = Vec::with_capacity(cols * 2 * k);
        for id in 0..cols {
            let (mut base, m) = self.cube_parts(k, id);
            let mut j = 0;
            for axis in 0..self.dim {
                if m & (1 << axis) == 0 {
                    continue;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                j += 1;
                let face = m & !(1 << axis);
                let lower = self.cube_id(&base, face).expect("faces of set cubes are in the set");
                base[axis] += 1;
                let upper = self.cube_id(&base, face).expect("faces of set cubes are in the set");
                base[axis] -= 1;
                triplets.push((upper, id, sign));
                triplets.push((lower, id, -sign));
            }
        }
        SparseMatrix::from_triplets(self.num_cubes(k - 1), cols, triplets)
    }

    pub fn boundary(&self, chain: &Chain) -> Result<Chain> {
        self.check_len(chain.degree, chain.coeffs.len())?;
        if chain.degree == 0 {
            return Err(Error::DegreeMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(Chain {
            degree: chain.degree - 1,
            coeffs: self.boundary_matrix(chain.degree).matvec(&chain.coeffs),
        })
    }

    /// Discrete coboundary `δ = D_k^{-1} ∂ᵀ D_{k-1}`, the adjoint of `∂`
    /// under the weighted pairing; maps a (k-1)-cochain to a k-cochain.
    pub fn coboundary(&self, omega: &Cochain) -> Result<Cochain> {
        self.check_len(omega.degree, omega.coeffs.len())?;
        let k = omega.degree + 1;
        if k > self.dim {
            return Err(Error::DegreeOverflow {
                p: omega.degree,
                q: 1,
                dim: self.dim,
            });
        }
        let weighted: Vec<f64> = omega
            .coeffs
            .iter()
            .zip(self.volumes(omega.degree))
            .map(|(w, v)| w * v)
            .collect();
        let mut out = self.boundary_matrix(k).transpose().matvec(&weighted);
        for (o, v) in out.iter_mut().zip(self.volumes(k)) {
            *o /= v;
        }
        Ok(Cochain {
            degree: k,
            coeffs: out,
        })
    }

    fn check_len(&self, k: usize, len: usize) -> Result<()> {
        if k > self.dim {
            return Err(Error::DegreeOverflow {
                p: k,
                q: 0,
                dim: self.dim,
            });
        }
        if len != self.num_cubes(k) {
            return Err(Error::DimensionMismatch {
                expected: self.num_cubes(k),
                got: len,
            });
        }
        Ok(())
    }

    /// `⟨T, ω⟩_φ = Σ_κ T_κ ω_κ H^k(φ(κ))`.
    pub fn pairing(&self, chain: &Chain, cochain: &Cochain) -> Result<f64> {
        if chain.degree != cochain.degree {
            return Err(Error::DegreeMismatch {
                expected: chain.degree,
                got: cochain.degree,
            });
        }
        self.check_len(chain.degree, chain.coeffs.len())?;
        self.check_len(cochain.degree, cochain.coeffs.len())?;
        let level = &self.levels[chain.degree];
        Ok(chain
            .coeffs
            .iter()
            .zip(&cochain.coeffs)
            .zip(&level.cubes)
            .map(|((t, w), &(_, s))| t * w * level.volumes[s as usize])
            .sum())
    }

    /// The cubical set projected onto a block of axes.
    pub fn projected(&self, block: Block) -> Self {
        let axes = block.axes(self.dim);
        let shape: Vec<usize> = axes.iter().map(|&a| self.shape[a]).collect();
        let spacing: Vec<f64> = axes.iter().map(|&a| self.spacing[a]).collect();
        let origin: Vec<f64> = axes.iter().map(|&a| self.origin[a]).collect();
        let cstrides = strides(&shape);
        let mut mask = vec![false; shape.iter().product()];
        let mut cell = vec![0usize; self.dim];
        for (lin, &on) in self.mask.iter().enumerate() {
            if !on {
                continue;
            }
            let mut rest = lin;
            for i in 0..self.dim {
                cell[i] = rest / self.cstrides[i];
                rest %= self.cstrides[i];
            }
            let p: usize = axes.iter().zip(&cstrides).map(|(&a, s)| cell[a] * s).sum();
            mask[p] = true;
        }
        Self::with_mask(&shape, mask, &spacing)
            .expect("projection of a valid complex is valid")
            .with_origin(&origin)
            .expect("origin length matches")
    }

    /// Projection of a cube onto a block: `Some` when the cube's intervals
    /// all lie in the block.
    pub fn project_cube(&self, block: Block, k: usize, id: usize, target: &Self) -> Option<usize> {
        let axes = block.axes(self.dim);
        let (base, m) = self.cube_parts(k, id);
        let mut pm = 0u32;
        for (j, &a) in axes.iter().enumerate() {
            if m & (1 << a) != 0 {
                pm |= 1 << j;
            }
        }
        if pm.count_ones() != m.count_ones() {
            return None;
        }
        let pb: Vec<i64> = axes.iter().map(|&a| base[a]).collect();
        target.cube_id(&pb, pm)
    }

    /// Pushforward of k-chains onto a block, and the projected complex.
    ///
    /// A cube maps with coefficient +1 to its projection when all of its
    /// intervals lie in the block, and to zero otherwise. Rows of the matrix
    /// are the fibers over the projected cubes.
    pub fn pushforward_matrix(&self, k: usize, block: Block) -> (SparseMatrix, Self) {
        let target = self.projected(block);
        let mut rows: Vec<Vec<(u32, f64)>> = vec![Vec::new(); target.num_cubes(k)];
        for id in 0..self.num_cubes(k) {
            if let Some(p) = self.project_cube(block, k, id, &target) {
                rows[p].push((id as u32, 1.0));
            }
        }
        (SparseMatrix::from_rows(self.num_cubes(k), rows), target)
    }

    /// A chain with the given coefficients on the given cubes; all cubes must
    /// share one degree and belong to the set.
    pub fn dirichlet_datum(&self, degree: usize, entries: &[(ElementaryCube, f64)]) -> Result<Chain> {
        let mut chain = Chain::zeros(self, degree);
        for (cube, coeff) in entries {
            if cube.dim() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    got: cube.dim(),
                });
            }
            let id = self.find(cube).ok_or_else(|| Error::CubeNotInComplex {
                base: cube.base.clone(),
                axes: cube.axes.entries().to_vec(),
            })?;
            chain.coeffs[id] += coeff;
        }
        Ok(chain)
    }

    /// Signed vertex datum, e.g. `[(b, +1), (a, -1)]` for `δ_b - δ_a`.
    pub fn vertex_datum(&self, entries: &[(Vec<i64>, f64)]) -> Result<Chain> {
        let cubes: Vec<(ElementaryCube, f64)> = entries
            .iter()
            .map(|(b, c)| (ElementaryCube::vertex(b.clone()), *c))
            .collect();
        self.dirichlet_datum(0, &cubes)
    }
}
