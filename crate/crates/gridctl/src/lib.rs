//! # gridctl
//!
//! Exact eigenstructure and controllability of Laplacian dynamics on path,
//! cycle, grid and cylinder-grid graphs.
//!
//! The Laplacian of a grid graph is the Kronecker sum of two path-graph
//! Laplacians, so its eigenvalues are `4 - 2(cos(a*pi/m) + cos(b*pi/n))`.
//! Deciding which of those values coincide is a question about vanishing
//! sums of four cosines of rational angles, which this crate answers
//! exactly in integer arithmetic ([`diophantine`]). On top of that sit:
//!
//! - closed-form spectra and eigenvector bases for all four families
//!   ([`spectra`]), cross-checked against a dense numeric eigensolver;
//! - the largest eigenvalue multiplicity and the minimal number of control
//!   nodes, by closed-form case tables and by exact enumeration
//!   ([`multiplicity`]);
//! - PBH / Kalman controllability tests, constructive minimal control
//!   sets, and the second-order two-species lift with its reduction to
//!   first-order tests ([`controllability`]);
//! - RK4 integration, minimum-energy Gramian steering and pattern export
//!   for the lifted system ([`sim`]).
//!
//! The `gridctl` binary exposes everything as subcommands with JSON/CSV
//! output; see [`cli`].

pub mod cli;
pub mod controllability;
pub mod diophantine;
pub mod graphs;
pub mod multiplicity;
pub mod sim;
pub mod spectra;

mod error;

pub use error::{Error, Result};
pub use graphs::{build_laplacian, kronecker_sum, GraphSpec, Laplacian, NodeIndex};
pub use spectra::{EigenspaceBasis, ExactEigenvalue};
