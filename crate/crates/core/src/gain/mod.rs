//! Gain expressions: evaluation, normal form, simplification and comparison.

pub mod compare;
pub mod eval;
pub mod normal;
pub mod simplify;

pub use compare::{random_dist, random_dists, render_dist, semantic_eq, semantic_le, Counterexample, Verdict};
pub use eval::{eval_gain, eval_gain_hyper, expectation, GainEvaluator};
pub use normal::{normalize, NormalForm};
pub use simplify::{apply_context, simplify, simplify_nf, Simplifier};
