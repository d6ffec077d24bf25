//! Exterior algebra over `R^d`.
//!
//! Coefficients of a k-vector are stored in lexicographic order of the
//! increasing multi-indices `1 <= i_1 < ... < i_k <= d`. For `d = 4, k = 2`
//! this is `[12, 13, 14, 23, 24, 34]`. Every module in the crate relies on
//! this layout; the first coefficient is always the one on `e_1 ∧ ... ∧ e_k`.
//!
//! Covectors use the same representation with the pairing
//! `<dx_I, e_J> = δ_IJ`, so inner products are plain dot products.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Strictly increasing tuple of axis labels in `{1..d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    dim: usize,
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(dim: usize, entries: Vec<usize>) -> Result<Self> {
        if entries.len() > dim {
            return Err(Error::MalformedIndex {
                entries,
                dim,
                reason: "longer than the ambient dimension",
            });
        }
        if entries.iter().any(|&e| e == 0 || e > dim) {
            return Err(Error::MalformedIndex {
                entries,
                dim,
                reason: "entry outside 1..=d",
            });
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedIndex {
                entries,
                dim,
                reason: "entries not strictly increasing",
            });
        }
        Ok(Self { dim, entries })
    }

    /// The multi-index `(1, ..., k)`.
    pub fn leading(dim: usize, k: usize) -> Self {
        Self {
            dim,
            entries: (1..=k).collect(),
        }
    }

    pub fn from_mask(dim: usize, mask: u32) -> Self {
        let entries = (0..dim).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn mask(&self) -> u32 {
        self.entries.iter().fold(0, |m, &e| m | (1 << (e - 1)))
    }

    /// Increasing complement in `{1..d}`.
    pub fn complement(&self) -> Self {
        let entries = (1..=self.dim).filter(|e| !self.entries.contains(e)).collect();
        Self {
            dim: self.dim,
            entries,
        }
    }

    /// Position in the lexicographic enumeration of `I(d, k)`.
    pub fn lex_rank(&self) -> usize {
        let d = self.dim;
        let k = self.entries.len();
        let mut rank = 0;
        let mut prev = 0;
        for (j, &e) in self.entries.iter().enumerate() {
            for t in (prev + 1)..e {
                rank += binomial(d - t, k - j - 1);
            }
            prev = e;
        }
        rank
    }

    pub fn from_rank(dim: usize, k: usize, mut rank: usize) -> Result<Self> {
        if k > dim || rank >= binomial(dim, k) {
            return Err(Error::MalformedIndex {
                entries: vec![],
                dim,
                reason: "rank out of range",
            });
        }
        let mut entries = Vec::with_capacity(k);
        let mut next = 1;
        for j in 0..k {
            loop {
                let block = binomial(dim - next, k - j - 1);
                if rank < block {
                    break;
                }
                rank -= block;
                next += 1;
            }
            entries.push(next);
            next += 1;
        }
        Ok(Self { dim, entries })
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All of `I(d, k)` in lexicographic order.
pub fn multi_indices(dim: usize, k: usize) -> Vec<MultiIndex> {
    (0..binomial(dim, k))
        .map(|r| MultiIndex::from_rank(dim, k, r).expect("rank in range"))
        .collect()
}

/// Bitmasks of `I(d, k)` in lexicographic order.
pub fn index_masks(dim: usize, k: usize) -> Vec<u32> {
    multi_indices(dim, k).iter().map(MultiIndex::mask).collect()
}

/// Sign of `e_a ∧ e_b` relative to the sorted basis element, for disjoint masks.
pub fn merge_sign(a: u32, b: u32) -> f64 {
    let mut inversions = 0u32;
    let mut bits = a;
    while bits != 0 {
        let i = bits.trailing_zeros();
        inversions += (b & ((1u32 << i) - 1)).count_ones();
        bits &= bits - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn rank_of_mask(dim: usize, mask: u32) -> usize {
    MultiIndex::from_mask(dim, mask).lex_rank()
}

/// Element of `Λ_k R^d` (or, with the same layout, of `Λ^k R^d`).
#[derive(Clone, Debug, PartialEq)]
pub struct KVector {
    dim: usize,
    degree: usize,
    coeffs: Vec<f64>,
}

impl KVector {
    pub fn zeros(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            coeffs: vec![0.0; binomial(dim, degree)],
        }
    }

    pub fn from_coeffs(dim: usize, degree: usize, coeffs: Vec<f64>) -> Result<Self> {
        if degree > dim {
            return Err(Error::DegreeOverflow {
                p: degree,
                q: 0,
                dim,
            });
        }
        let expected = binomial(dim, degree);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        Ok(Self {
            dim,
            degree,
            coeffs,
        })
    }

    /// Basis element `e_I`.
    pub fn basis(index: &MultiIndex) -> Self {
        let mut v = Self::zeros(index.dim(), index.len());
        v.coeffs[index.lex_rank()] = 1.0;
        v
    }

    /// A 1-vector from its coordinates.
    pub fn vector(coords: &[f64]) -> Self {
        Self {
            dim: coords.len(),
            degree: 1,
            coeffs: coords.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, index: &MultiIndex) -> f64 {
        debug_assert_eq!(index.len(), self.degree);
        self.coeffs[index.lex_rank()]
    }

    pub fn set(&mut self, index: &MultiIndex, value: f64) {
        self.coeffs[index.lex_rank()] = value;
    }

    pub fn dot(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.coeffs.len(), other.coeffs.len());
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(self + other)
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let (p, q, d) = (self.degree, other.degree, self.dim);
        if p + q > d {
            return Err(Error::DegreeOverflow { p, q, dim: d });
        }
        let left = index_masks(d, p);
        let right = index_masks(d, q);
        let mut out = Self::zeros(d, p + q);
        for (a, &ma) in left.iter().enumerate() {
            let ca = self.coeffs[a];
            if ca == 0.0 {
                continue;
            }
            for (b, &mb) in right.iter().enumerate() {
                let cb = other.coeffs[b];
                if cb == 0.0 || ma & mb != 0 {
                    continue;
                }
                let r = rank_of_mask(d, ma | mb);
                out.coeffs[r] += merge_sign(ma, mb) * ca * cb;
            }
        }
        Ok(out)
    }

    /// Hodge star: `e_I ↦ sign(I, Ī) e_Ī`.
    pub fn hodge_star(&self) -> Self {
        let d = self.dim;
        let masks = index_masks(d, self.degree);
        let full = if d == 32 { u32::MAX } else { (1u32 << d) - 1 };
        let mut out = Self::zeros(d, d - self.degree);
        for (i, &m) in masks.iter().enumerate() {
            let comp = full & !m;
            out.coeffs[rank_of_mask(d, comp)] += merge_sign(m, comp) * self.coeffs[i];
        }
        out
    }

    /// `true` when `v ∧ v` vanishes relative to `|v|^2`.
    ///
    /// Exact characterization of simplicity for 2-vectors in `R^4`; for
    /// degrees where every vector is simple it returns `true`.
    pub fn is_simple(&self, tol: f64) -> bool {
        if 2 * self.degree > self.dim || self.degree % 2 == 1 {
            return true;
        }
        let ww = self.wedge(self).expect("2k <= d checked");
        ww.norm() <= tol * self.dot(self).max(f64::MIN_POSITIVE)
    }
}

impl Add for &KVector {
    type Output = KVector;
    fn add(self, rhs: &KVector) -> KVector {
        debug_assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        KVector {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &KVector {
    type Output = KVector;
    fn sub(self, rhs: &KVector) -> KVector {
        debug_assert_eq!(self.coeffs.len(), rhs.coeffs.len());
        KVector {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&KVector> for KVector {
    fn add_assign(&mut self, rhs: &KVector) {
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl Mul<f64> for &KVector {
    type Output = KVector;
    fn mul(self, s: f64) -> KVector {
        self.scale(s)
    }
}

impl Neg for &KVector {
    type Output = KVector;
    fn neg(self) -> KVector {
        self.scale(-1.0)
    }
}

/// Jacobian `ξ ∈ R^{N×n}`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Jacobian {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Codomain dimension `N`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Domain dimension `n`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `det(I + ξᵀξ)` for `n <= 2`.
    pub fn area_factor_squared(&self) -> f64 {
        let n = self.cols;
        let gram = |a: usize, b: usize| -> f64 {
            (0..self.rows).map(|j| self.get(j, a) * self.get(j, b)).sum()
        };
        match n {
            0 => 1.0,
            1 => 1.0 + gram(0, 0),
            2 => {
                let (a, b, c) = (1.0 + gram(0, 0), gram(0, 1), 1.0 + gram(1, 1));
                a * c - b * b
            }
            _ => unimplemented!("area factor only needed for n <= 2"),
        }
    }
}

/// The graph map `ξ ↦ (e_1 + ξe_1) ∧ ... ∧ (e_n + ξe_n)` into `Λ_n R^{n+N}`.
pub fn graph_embed(xi: &Jacobian) -> KVector {
    let (big_n, n) = (xi.rows(), xi.cols());
    let d = n + big_n;
    let mut acc = KVector::zeros(d, 0);
    acc.coeffs[0] = 1.0;
    for i in 0..n {
        let mut column = vec![0.0; d];
        column[i] = 1.0;
        for j in 0..big_n {
            column[n + j] = xi.get(j, i);
        }
        acc = acc.wedge(&KVector::vector(&column)).expect("degree stays <= n");
    }
    acc
}

/// Inverse of [`graph_embed`] on simple n-vectors with non-vanishing
/// `(1..n)` component: `[ξ]_{j,i} = (-1)^{n-i} v^{ī,j}` after normalizing
/// by that component.
pub fn jacobian_of(v: &KVector, n: usize) -> Result<Jacobian> {
    if v.degree() != n {
        return Err(Error::DegreeMismatch {
            expected: n,
            got: v.degree(),
        });
    }
    let d = v.dim();
    let big_n = d - n;
    let lead = v.coeffs[0];
    if lead.abs() <= 1e-14 * v.norm().max(f64::MIN_POSITIVE) || lead == 0.0 {
        return Err(Error::VerticalDirection);
    }
    let mut xi = Jacobian::zeros(big_n, n);
    for i in 1..=n {
        let sign = if (n - i) % 2 == 0 { 1.0 } else { -1.0 };
        for j in 1..=big_n {
            let mut entries: Vec<usize> = (1..=n).filter(|&t| t != i).collect();
            entries.push(n + j);
            let idx = MultiIndex { dim: d, entries };
            xi.set(j - 1, i - 1, sign * v.get(&idx) / lead);
        }
    }
    Ok(xi)
}

fn check_2_4(w: &KVector) -> Result<()> {
    if w.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: w.dim(),
        });
    }
    if w.degree() != 2 {
        return Err(Error::DegreeMismatch {
            expected: 2,
            got: w.degree(),
        });
    }
    Ok(())
}

/// Hodge star on `Λ_2 R^4` in lexicographic layout `[12,13,14,23,24,34]`.
#[inline]
fn star_2_4(w: &[f64]) -> [f64; 6] {
    [w[5], -w[4], w[3], w[2], -w[1], w[0]]
}

/// Split into self-dual and anti-self-dual halves, `w± = (w ± ★w)/2`.
#[inline]
pub fn self_dual_split(w: &[f64]) -> ([f64; 6], [f64; 6]) {
    let s = star_2_4(w);
    let mut plus = [0.0; 6];
    let mut minus = [0.0; 6];
    for i in 0..6 {
        plus[i] = 0.5 * (w[i] + s[i]);
        minus[i] = 0.5 * (w[i] - s[i]);
    }
    (plus, minus)
}

#[inline]
fn norm6(v: &[f64; 6]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Self-dual split of a 2-vector in `R^4`.
pub fn hodge_split_2_4(w: &KVector) -> Result<(KVector, KVector)> {
    check_2_4(w)?;
    let (p, m) = self_dual_split(w.coeffs());
    Ok((
        KVector::from_coeffs(4, 2, p.to_vec())?,
        KVector::from_coeffs(4, 2, m.to_vec())?,
    ))
}

/// Mass and comass of a 2-vector in `R^4` as coefficient slice.
#[inline]
pub fn mass_comass_slice(w: &[f64]) -> (f64, f64) {
    let (p, m) = self_dual_split(w);
    let (a, b) = (norm6(&p), norm6(&m));
    (
        std::f64::consts::SQRT_2 * a.max(b),
        (a + b) / std::f64::consts::SQRT_2,
    )
}

/// Mass and comass of a 2-vector in `R^4`.
pub fn mass_comass_2_4(w: &KVector) -> Result<(f64, f64)> {
    check_2_4(w)?;
    Ok(mass_comass_slice(w.coeffs()))
}

/// Mass norm for the degrees the crate supports.
///
/// Degrees `0, 1, d-1, d` contain only simple vectors, so mass equals the
/// Euclidean norm there; 2-vectors in `R^4` use the self-dual split.
pub fn mass(w: &KVector) -> Result<f64> {
    let (d, k) = (w.dim(), w.degree());
    if k <= 1 || k + 1 >= d {
        Ok(w.norm())
    } else if d == 4 && k == 2 {
        Ok(mass_comass_slice(w.coeffs()).0)
    } else {
        Err(Error::InvalidConfig(format!(
            "mass norm not available for degree {k} in dimension {d}"
        )))
    }
}

/// Comass norm for the degrees the crate supports (see [`mass`]).
pub fn comass(w: &KVector) -> Result<f64> {
    let (d, k) = (w.dim(), w.degree());
    if k <= 1 || k + 1 >= d {
        Ok(w.norm())
    } else if d == 4 && k == 2 {
        Ok(mass_comass_slice(w.coeffs()).1)
    } else {
        Err(Error::InvalidConfig(format!(
            "comass norm not available for degree {k} in dimension {d}"
        )))
    }
}

/// In-place Euclidean projection onto `{comass <= radius}`.
///
/// The radius pair `(|w+|, |w-|)` is projected onto the ℓ1 ball of radius
/// `√2·radius`; both halves keep their direction.
#[inline]
pub fn project_comass_ball_slice(w: &mut [f64], radius: f64) {
    let (p, m) = self_dual_split(w);
    let (a, b) = (norm6(&p), norm6(&m));
    let r = std::f64::consts::SQRT_2 * radius;
    if a + b <= r {
        return;
    }
    let shift = if a - b >= r {
        // all mass goes to the self-dual half
        (a - r, a - r)
    } else if b - a >= r {
        (b - r, b - r)
    } else {
        let mu = 0.5 * (a + b - r);
        (mu, mu)
    };
    let na = (a - shift.0).max(0.0);
    let nb = (b - shift.1).max(0.0);
    let sa = if a > 0.0 { na / a } else { 0.0 };
    let sb = if b > 0.0 { nb / b } else { 0.0 };
    for i in 0..6 {
        w[i] = sa * p[i] + sb * m[i];
    }
}

/// Euclidean projection onto the comass ball of radius `radius`.
pub fn project_comass_ball(w: &KVector, radius: f64) -> Result<KVector> {
    check_2_4(w)?;
    if radius < 0.0 {
        return Err(Error::NegativeParameter {
            name: "radius",
            value: radius,
        });
    }
    let mut out = w.clone();
    project_comass_ball_slice(out.coeffs_mut(), radius);
    Ok(out)
}

/// `prox_{τ·mass}` via the Moreau identity, in place.
#[inline]
pub fn prox_mass_slice(w: &mut [f64], tau: f64) {
    let mut proj = [0.0; 6];
    proj.copy_from_slice(&w[..6]);
    project_comass_ball_slice(&mut proj, tau);
    for i in 0..6 {
        w[i] -= proj[i];
    }
}

/// Proximal map of `τ·mass` on 2-vectors in `R^4`.
pub fn prox_mass(w: &KVector, tau: f64) -> Result<KVector> {
    check_2_4(w)?;
    if tau < 0.0 {
        return Err(Error::NegativeParameter {
            name: "tau",
            value: tau,
        });
    }
    let mut out = w.clone();
    prox_mass_slice(out.coeffs_mut(), tau);
    Ok(out)
}
