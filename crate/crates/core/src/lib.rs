//! Greedy sparse approximation in finite-dimensional `l_q` spaces: the
//! Chebyshev, orthogonal, relaxed and free-relaxation greedy algorithms,
//! lower-bound dictionaries, and a-priori / a-posteriori error bounds.
//!
//! ```
//! use greedy_sparse::dictionary::build_bt3;
//! use greedy_sparse::greedy::run_oga;
//! use greedy_sparse::TieBreakPolicy;
//!
//! let (dict, f) = build_bt3(52)?;
//! let trace = run_oga(&f, &dict, 50, TieBreakPolicy::PreferGAscending)?;
//! assert!((trace.final_residual_norm() - 1.0 / 102f64.sqrt()).abs() < 1e-9);
//! # Ok::<(), greedy_sparse::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dictionary;
pub mod error;
pub mod experiment;
pub mod greedy;
pub mod lpspace;
pub mod projection;

pub use dictionary::{Dictionary, Selection, TieBreakPolicy};
pub use error::{Error, Result};
pub use greedy::{Algorithm, GreedyStep, GreedyTrace, Termination, WeaknessSequence};
pub use lpspace::{DualFunctional, LqSpace, SeqVector};
pub use projection::ProjectionResult;
