//! Discrete-time quantum walks on finite graphs with two semi-infinite tails.
//!
//! The walker lives on directed edges and every vertex carries a unitary
//! coin. The crate builds the one-step unitary, runs plain and monitored
//! walks, solves the two-tail scattering problem for transmission and
//! reflection amplitudes, expands `t(z)` into first-arrival amplitudes, finds
//! bound states and tests time-reversal symmetry. Each quantity has a second,
//! independent route so results can be cross-checked:
//!
//! | quantity                 | route 1                      | route 2                                  |
//! |--------------------------|------------------------------|------------------------------------------|
//! | `<e| U^n |e0>`           | [`walk::run_walk`]           | [`oracle::path_sum`]                     |
//! | first arrival `q(n)`     | [`walk::run_measured_walk`]  | `|c_n|^2` from [`scattering::transmission_series`] |
//! | total transmission       | [`scattering::p_out_series`] | [`scattering::p_out_spectral`]           |
//!
//! ```
//! use qwalk::{fixtures, scattering::{ScatteringSystem, p_out_spectral}};
//!
//! let system = ScatteringSystem::new(&fixtures::diamond());
//! let p_out = p_out_spectral(&system, 1024).unwrap();
//! assert!((p_out - 0.8).abs() < 1e-12);
//! ```

pub mod basis;
pub mod coin;
pub mod error;
pub mod fixtures;
pub mod graph;
mod linalg;
pub mod oracle;
pub mod scattering;
pub mod schema;
pub mod spectral;
pub mod walk;

pub use basis::{build_edge_basis, EdgeBasis, TailConfig};
pub use coin::{make_coin, validate_coin_constraints, CoinMatrix, CoinSpec};
pub use error::{CoinViolation, Error, Result};
pub use graph::{Edge, EdgeRef, EdgeSpec, EdgeState, Endpoint, Graph, Side, VertexId};
pub use schema::GraphDocument;
pub use walk::{build_step_operator, run_measured_walk, run_walk, FirstArrivalRecord, StepOperator, WalkState};
