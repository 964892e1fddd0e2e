//! Contract design for an agent whose private type scales the cost of every action.
//!
//! The [`model`] module holds instances, contracts and best responses. Exact optima for
//! finitely many types come from [`solver`], which enumerates action tuples and solves one
//! rational LP per tuple. [`ptas`] handles continuous type laws from [`dist`] by gridding the
//! type space and robustifying the grid optimum. [`hardness`] builds instances from Set Cover,
//! and [`bandit`] learns a near-optimal contract from sampled rewards by phased elimination.
//!
//! Worked examples:
//!
//! ```text
//! cargo run --example model_basics
//! cargo run --example discrete_optimal
//! cargo run --example candidate_set
//! cargo run --example ptas
//! cargo run --example setcover_reduction
//! cargo run --example phased_elimination
//! cargo run --example pac_contract
//! cargo run --release --example regret_curve -- 20000 8
//! ```

pub mod bandit;
pub mod cli;
pub mod dist;
pub mod error;
pub mod hardness;
pub mod io;
pub mod model;
pub mod numerics;
pub mod ptas;
pub mod solver;

pub use error::{Error, Result};
