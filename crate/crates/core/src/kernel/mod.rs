//! Dense convex solvers sized for the rotation and beamformer subproblems.

pub mod eig;
pub mod lp;
pub mod sdp;

use serde::{Deserialize, Serialize};

pub use eig::{hermitian_eigen, principal_eigpair, rank_metric};
pub use lp::{solve_lp, LpConstraint, LpProblem, LpSolution, LpStatus};
pub use sdp::{solve_sdp, solve_sdp_seeded, GainMatrix, SdpProblem, SdpSolution, SdpStatus};

pub type CMatrix = nalgebra::DMatrix<num_complex::Complex64>;
pub type CVector = nalgebra::DVector<num_complex::Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverTolerances {
    /// Primal feasibility.
    pub feas_tol: f64,
    /// Relative duality gap.
    pub gap_tol: f64,
    /// Interior-point iterations, or simplex pivots for [`solve_lp`].
    pub max_iters: usize,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            feas_tol: 1e-7,
            gap_tol: 1e-6,
            max_iters: 100,
        }
    }
}

impl SolverTolerances {
    /// Defaults with a pivot budget suitable for the simplex.
    pub fn lp() -> Self {
        SolverTolerances {
            max_iters: 20_000,
            ..Self::default()
        }
    }
}
