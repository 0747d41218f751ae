//! Convex solvers: ADMM for (perturbed) MAP problems and a primal-dual
//! method for the TV proximal map.

mod admm;
mod cg;
mod primal_dual;

pub use admm::{
    admm_solve, admm_solve_from, AdmmSettings, AdmmState, MapObjective, SolveStats, XUpdateMode,
};
pub use primal_dual::{tv_prox, PdSettings, TvProxResult, TvProxWorkspace};
