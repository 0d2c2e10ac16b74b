use std::collections::BTreeMap;

use num_traits::Zero;

use super::expr::{BinOp, Expr};
use crate::number::Number;

pub const DIVISION_BY_ZERO: &str = "division by zero";

/// Measure values for one (period, filter) slice.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MeasureContext {
    values: BTreeMap<String, Number>,
}

impl MeasureContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Number) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<&Number> {
        self.values.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Number)> {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl FromIterator<(String, Number)> for MeasureContext {
    fn from_iter<I: IntoIterator<Item = (String, Number)>>(iter: I) -> Self {
        MeasureContext {
            values: iter.into_iter().collect(),
        }
    }
}

/// Outcome of evaluating an expression. Undefined carries the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Defined(Number),
    Undefined(String),
}

impl Value {
    pub fn as_number(&self) -> Option<&Number> {
        match self {
            Value::Defined(n) => Some(n),
            Value::Undefined(_) => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Value::Defined(_) => None,
            Value::Undefined(reason) => Some(reason),
        }
    }
}

/// Evaluates `expr` exactly. Never fails: division by zero and missing
/// measures produce [`Value::Undefined`], and the leftmost undefined operand wins.
pub fn evaluate(expr: &Expr, ctx: &MeasureContext) -> Value {
    match expr {
        Expr::Literal(value) => Value::Defined(value.clone()),
        Expr::Measure(name) => match ctx.get(name) {
            Some(value) => Value::Defined(value.clone()),
            None => Value::Undefined(format!("missing measure {name}")),
        },
        Expr::Paren(inner) => evaluate(inner, ctx),
        Expr::Binary { op, left, right } => {
            let l = match evaluate(left, ctx) {
                Value::Defined(v) => v,
                undefined => return undefined,
            };
            let r = match evaluate(right, ctx) {
                Value::Defined(v) => v,
                undefined => return undefined,
            };
            match op {
                BinOp::Add => Value::Defined(l + r),
                BinOp::Sub => Value::Defined(l - r),
                BinOp::Mul => Value::Defined(l * r),
                BinOp::Div if r.is_zero() => Value::Undefined(DIVISION_BY_ZERO.to_string()),
                BinOp::Div => Value::Defined(l / r),
            }
        }
    }
}
