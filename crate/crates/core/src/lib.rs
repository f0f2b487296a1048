//! Exact quantitative information flow analysis for the Kuifje language.
//!
//! Programs run forward as hyper-distribution transformers
//! ([`semantics::run`]) and backward as greatest pre-gain transformers
//! ([`wp::wp`]). Both directions use exact rationals, so the pre-gain on a
//! prior can be compared for equality with the post-gain on the output.

pub mod dist;
pub mod error;
pub mod eval;
pub mod gain;
pub mod lang;
pub mod rational;
pub mod semantics;
pub mod space;
pub mod wp;

pub use dist::{avg, hyper_reduce, kleisli, unit, Dist, Hyper};
pub use error::{Error, Result};
pub use rational::Rational;
pub use space::{Domain, Space, State};
