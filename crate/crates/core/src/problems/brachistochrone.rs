//! Curve of fastest descent between two lattice vertices, and the
//! analytical cycloid it is compared against.
//!
//! The vertical coordinate points downward; the particle starts at rest on
//! `y = 0`, so the codomain is shifted to start at `y_min > 0`.

use crate::cubical::CubicalComplex;
use crate::error::{Error, Result};
use crate::lifting::CostModel;
use crate::solver::{assemble, BoundaryCondition, ProblemDescription};
use crate::whitney::{generate_samples, SampleMode};

use super::Problem;

#[derive(Clone, Debug, PartialEq)]
pub struct BrachistochroneSpec {
    /// Cells along `x` and `y`.
    pub cells: [usize; 2],
    /// Physical width and height of the box.
    pub size: [f64; 2],
    pub gravity: f64,
    /// Physical `y` of the top lattice row; one cell height when `None`.
    pub y_min: Option<f64>,
    /// Lattice vertices of the endpoints.
    pub start: [i64; 2],
    pub end: [i64; 2],
    pub sample_mode: SampleMode,
}

impl Default for BrachistochroneSpec {
    fn default() -> Self {
        Self {
            cells: [24, 13],
            size: [1.0, 1.0],
            gravity: 9.81,
            y_min: None,
            start: [0, 0],
            end: [24, 13],
            sample_mode: SampleMode::Codomain {
                domain_dims: 1,
                per_edge: 1,
            },
        }
    }
}

impl BrachistochroneSpec {
    pub fn spacing(&self) -> [f64; 2] {
        [self.size[0] / self.cells[0] as f64, self.size[1] / self.cells[1] as f64]
    }

    pub fn y_min(&self) -> f64 {
        self.y_min.unwrap_or(self.spacing()[1])
    }

    /// Physical endpoints.
    pub fn endpoints(&self) -> ([f64; 2], [f64; 2]) {
        let h = self.spacing();
        let y0 = self.y_min();
        let p = |v: [i64; 2]| [h[0] * v[0] as f64, y0 + h[1] * v[1] as f64];
        (p(self.start), p(self.end))
    }

    pub fn complex(&self) -> Result<CubicalComplex> {
        if self.size.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::InvalidConfig("box size must be positive".into()));
        }
        CubicalComplex::new_box(&self.cells, &self.spacing())?.with_origin(&[0.0, self.y_min()])
    }
}

/// Assembles the Dirichlet problem `∂T = δ_end − δ_start`.
pub fn build(spec: &BrachistochroneSpec) -> Result<Problem> {
    if spec.start[0] >= spec.end[0] {
        return Err(Error::InvalidConfig("start must lie left of end".into()));
    }
    if spec.start[0] != 0 || spec.end[0] != spec.cells[0] as i64 {
        return Err(Error::InvalidConfig(
            "endpoints must lie on the left and right edges of the box".into(),
        ));
    }
    let complex = spec.complex()?;
    let model = CostModel::Brachistochrone {
        gravity: spec.gravity,
        y_min: spec.y_min(),
    };
    let samples = generate_samples(&complex, &spec.sample_mode)?;
    let datum = complex.vertex_datum(&[(spec.end.to_vec(), 1.0), (spec.start.to_vec(), -1.0)])?;
    let saddle = assemble(&ProblemDescription {
        complex: &complex,
        model: &model,
        samples: &samples,
        boundary: BoundaryCondition::Dirichlet(datum),
        bijective: false,
    })?;
    Ok(Problem {
        complex,
        model,
        samples,
        saddle,
    })
}

/// `x = x0 + r(θ − sin θ)`, `y = r(1 − cos θ)` for `θ ∈ [θa, θb]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cycloid {
    pub radius: f64,
    pub x0: f64,
    pub theta_a: f64,
    pub theta_b: f64,
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 || fhi == 0.0 || (flo < 0.0) == (fhi < 0.0) {
        // no bracket: the better end
        return if flo.abs() <= fhi.abs() { lo } else { hi };
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

impl Cycloid {
    /// The cycloid with cusp on `y = 0` through `a` and `b`, `a` left of
    /// `b`, both below the cusp line; among several, the fastest.
    pub fn through(a: [f64; 2], b: [f64; 2], gravity: f64) -> Result<Self> {
        if !(a[1] > 0.0 && b[1] > 0.0 && b[0] > a[0]) {
            return Err(Error::InvalidConfig("cycloid endpoints need y > 0 and xa < xb".into()));
        }
        let dx = b[0] - a[0];
        let r_min = 0.5 * a[1].max(b[1]);
        let theta = |y: f64, r: f64, upper: bool| {
            let t = (1.0 - y / r).clamp(-1.0, 1.0).acos();
            if upper {
                2.0 * std::f64::consts::PI - t
            } else {
                t
            }
        };
        let s = |t: f64| t - t.sin();
        let mut best: Option<(f64, Cycloid)> = None;
        for (upper_a, upper_b) in [(false, false), (false, true), (true, true)] {
            let gap = |r: f64| r * (s(theta(b[1], r, upper_b)) - s(theta(a[1], r, upper_a))) - dx;
            // scan r on a geometric grid for sign changes
            let mut prev_r = r_min * (1.0 + 1e-12);
            let mut prev = gap(prev_r);
            let mut r = prev_r;
            for _ in 0..4000 {
                r *= 1.005;
                let cur = gap(r);
                if prev.is_finite() && cur.is_finite() && (prev < 0.0) != (cur < 0.0) {
                    let root = bisect(prev_r, r, &gap);
                    let ta = theta(a[1], root, upper_a);
                    let tb = theta(b[1], root, upper_b);
                    if tb > ta {
                        let c = Cycloid {
                            radius: root,
                            x0: a[0] - root * s(ta),
                            theta_a: ta,
                            theta_b: tb,
                        };
                        let time = c.travel_time(gravity);
                        if best.map_or(true, |(t, _)| time < t) {
                            best = Some((time, c));
                        }
                    }
                }
                prev_r = r;
                prev = cur;
            }
        }
        best.map(|(_, c)| c)
            .ok_or_else(|| Error::InvalidConfig("no cycloid through the endpoints".into()))
    }

    pub fn point(&self, theta: f64) -> [f64; 2] {
        [
            self.x0 + self.radius * (theta - theta.sin()),
            self.radius * (1.0 - theta.cos()),
        ]
    }

    /// `y` at abscissa `x`.
    pub fn y_at(&self, x: f64) -> f64 {
        let t = bisect(self.theta_a, self.theta_b, |t| self.point(t)[0] - x);
        self.point(t)[1]
    }

    /// Mean of `y` over `[x0, x1]`.
    pub fn mean_y(&self, x0: f64, x1: f64) -> f64 {
        let m = 64;
        let h = (x1 - x0) / m as f64;
        let mut acc = 0.0;
        for k in 0..=m {
            let w = if k == 0 || k == m {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w * self.y_at(x0 + h * k as f64);
        }
        acc * h / 3.0 / (x1 - x0)
    }

    /// Time of descent along the arc.
    pub fn travel_time(&self, gravity: f64) -> f64 {
        (self.radius / gravity).sqrt() * (self.theta_b - self.theta_a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycloid_hits_both_endpoints() {
        for (a, b) in [
            ([0.0, 0.1], [1.0, 1.1]),
            ([0.0, 0.05], [2.0, 0.6]),
            ([0.3, 0.5], [1.0, 0.2]),
        ] {
            let c = Cycloid::through(a, b, 9.81).unwrap();
            let pa = c.point(c.theta_a);
            let pb = c.point(c.theta_b);
            assert!((pa[0] - a[0]).abs() < 1e-9 && (pa[1] - a[1]).abs() < 1e-9, "{pa:?}");
            assert!((pb[0] - b[0]).abs() < 1e-9 && (pb[1] - b[1]).abs() < 1e-9, "{pb:?}");
            assert!((c.y_at(b[0]) - b[1]).abs() < 1e-9);
            assert!((c.y_at(a[0]) - a[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn cycloid_beats_straight_line() {
        let (a, b) = ([0.0, 0.1], [1.0, 1.1]);
        let c = Cycloid::through(a, b, 9.81).unwrap();
        // straight line: integrate √(1+s²)/√(2gy) dx by midpoint rule
        let slope: f64 = 1.0;
        let m = 100_000;
        let line: f64 = (0..m)
            .map(|k| {
                let x = (k as f64 + 0.5) / m as f64;
                let y = a[1] + slope * x;
                (1.0 + slope * slope).sqrt() / (2.0 * 9.81 * y).sqrt() / m as f64
            })
            .sum();
        assert!(c.travel_time(9.81) < line);
    }

    #[test]
    fn default_problem_sizes() {
        let spec = BrachistochroneSpec::default();
        let p = build(&spec).unwrap();
        assert_eq!(p.complex.num_cubes(0), 25 * 14);
        assert_eq!(p.saddle.fibers.len(), 24);
        assert_eq!(p.saddle.fibers[0].len(), 14);
    }
}
