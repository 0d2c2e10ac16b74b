//! A small arithmetic language for declaring KPIs over named measures.
//!
//! Aggregation happens in the engine; expressions only combine the already
//! aggregated measures of one slice with `+ - * /`, literals and parentheses.

mod eval;
mod expr;
mod lexer;
mod registry;

pub use eval::{evaluate, MeasureContext, Value, DIVISION_BY_ZERO};
pub use expr::{parse, parse_expression, BinOp, Expr, ParseError};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use registry::{Direction, KpiCategory, KpiDefinition, Registry, RegistryError, Unit};
