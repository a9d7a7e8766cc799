//! Simulation of half-wave plate / polarizing beam splitter mode transformers
//! and the checks needed for qutrit contextuality tests built on them.
//!
//! Layers, bottom up:
//!
//! - [`mode_calculus`]: labeled modes, amplitude vectors, unitary maps.
//! - [`optical_elements`]: plates, splitters, relabelings and networks.
//! - [`observable_extraction`]: the click projector each detector measures,
//!   expressed on logical input modes 0, 1, 2.
//! - [`context_verifier`]: context independence, relabel equivalence and
//!   intensity independence checks.
//! - [`contextuality_oracle`]: noncontextual bounds by exhaustive enumeration
//!   and quantum values of inequality expressions.
//! - [`config`] and [`cli`]: JSON/CSV file formats and the `ctxopt` tool.

// `!(x <= tol)` is used throughout so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod context_verifier;
pub mod contextuality_oracle;
pub mod error;
pub mod mode_calculus;
pub mod observable_extraction;
pub mod optical_elements;

pub use error::{Error, Result};
