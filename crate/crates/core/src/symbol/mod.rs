//! Symbols, Taylor jets and Poisson brackets.

mod bracket;
mod expr;
pub mod jet;
mod parse;
pub mod poly;

pub use bracket::{
    finite_type_order, poisson_bracket, real_bracket, repeated_brackets, repeated_brackets_with_degree,
    BracketReport, BracketValue, FiniteTypeOrder,
};
pub use expr::{Node, SymbolExpr};
pub use jet::{Jet, Layout};
pub use poly::Poly;

/// Parses `text` as a symbol in `n` phase-space dimensions.
pub fn parse_symbol(text: &str, n: usize) -> crate::Result<SymbolExpr> {
    SymbolExpr::parse(text, n)
}
