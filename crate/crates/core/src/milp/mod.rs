//! Solver-agnostic MILP representation and model files.

pub mod lp_format;
pub mod model;
pub mod mps;
pub mod solution;

pub use lp_format::export_lp;
pub use model::{
    model_counts, LinConstraint, MilpModel, ModelCounts, ModelKind, ModelMeta, ObjSense, Sense,
    Tag, VarKind, VarRef,
};
pub use mps::{export_mps, import_mps, MpsError};
pub use solution::{Solution, SolveStats, Status};
