//! Builders for the three experiment families, reference graph chains and
//! solution extraction.

pub mod brachistochrone;
pub mod extract;
pub mod graph;
pub mod registration;
pub mod scalar;

use crate::cubical::{Chain, CubicalComplex};
use crate::error::Result;
use crate::lifting::CostModel;
use crate::solver::{pdhg_run, SaddleProblem, SolverConfig, SolverReport, SolverState};
use crate::whitney::Sample;

/// A complex, cost model and samples wired into a saddle problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub complex: CubicalComplex,
    pub model: CostModel,
    pub samples: Vec<Sample>,
    pub saddle: SaddleProblem,
}

/// Solver output for a [`Problem`].
#[derive(Clone, Debug)]
pub struct Solution {
    pub chain: Chain,
    pub state: SolverState,
    pub report: SolverReport,
}

impl Problem {
    pub fn dims(&self) -> (usize, usize) {
        self.model.dims()
    }

    pub fn solve(&self, cfg: &SolverConfig) -> Result<Solution> {
        let (state, report) = pdhg_run(&self.saddle, cfg)?;
        let chain = Chain {
            degree: self.saddle.n,
            coeffs: state.t.clone(),
        };
        Ok(Solution { chain, state, report })
    }
}
