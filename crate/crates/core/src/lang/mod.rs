//! The Kuifje language: syntax trees, parsing, printing, typing and
//! syntactic transformations.

pub mod ast;
pub mod check;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod transform;

pub use ast::*;
pub use check::{check_gain, check_program};
pub use parser::{parse_decls, parse_expr, parse_gain, parse_program};
pub use printer::{expr_to_string, gain_to_string, program_to_string, stmt_to_string};
pub use transform::desugar_visible;
