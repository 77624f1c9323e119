//! Revenue-maximizing discrete pricing under regret-minimizing and
//! utility-maximizing customers, as mixed-integer linear programs.
//!
//! The pipeline is instance → draws ([`stochastic`]) → model ([`builders`]) →
//! [`solver`] → decoded outcome, with [`oracle`] as exhaustive ground truth.

pub mod builders;
pub mod canonical;
pub mod choice;
pub mod harness;
pub mod instance;
pub mod milp;
pub mod oracle;
pub mod solver;
pub mod stochastic;
