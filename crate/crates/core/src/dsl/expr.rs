use std::collections::BTreeSet;
use std::fmt;

use super::lexer::{tokenize, LexError, Token, TokenKind};
use crate::number::{format_decimal, to_f64, Number};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Expression tree. `Paren` nodes are kept so printing reproduces the source grouping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Literal(Number),
    Measure(String),
    Binary {
        op: BinOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
    Paren(Box<Expr>),
}

impl Expr {
    pub fn measure(name: impl Into<String>) -> Expr {
        Expr::Measure(name.into())
    }

    pub fn paren(inner: Expr) -> Expr {
        Expr::Paren(Box::new(inner))
    }

    /// Builds `left op right`, wrapping either side in a `Paren` when
    /// precedence or left associativity would otherwise regroup it.
    pub fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
        let left = if needs_parens(op, &left, false) {
            Expr::paren(left)
        } else {
            left
        };
        let right = if needs_parens(op, &right, true) {
            Expr::paren(right)
        } else {
            right
        };
        Expr::Binary {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Strips any number of enclosing `Paren` nodes.
    pub fn unparen(&self) -> &Expr {
        let mut e = self;
        while let Expr::Paren(inner) = e {
            e = inner;
        }
        e
    }

    pub fn measures(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_measures(&mut out);
        out
    }

    fn collect_measures<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Measure(name) => {
                out.insert(name);
            }
            Expr::Binary { left, right, .. } => {
                left.collect_measures(out);
                right.collect_measures(out);
            }
            Expr::Paren(inner) => inner.collect_measures(out),
        }
    }

    /// True when the expression is a linear combination of measures: measures
    /// are only added, subtracted, or scaled by literals.
    pub fn is_linear(&self) -> bool {
        match self {
            Expr::Literal(_) | Expr::Measure(_) => true,
            Expr::Paren(inner) => inner.is_linear(),
            Expr::Binary { op, left, right } => match op {
                BinOp::Add | BinOp::Sub => left.is_linear() && right.is_linear(),
                BinOp::Mul => {
                    (left.is_constant() && right.is_linear())
                        || (right.is_constant() && left.is_linear())
                }
                BinOp::Div => left.is_linear() && right.is_constant(),
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Literal(_) => true,
            Expr::Measure(_) => false,
            Expr::Paren(inner) => inner.is_constant(),
            Expr::Binary { left, right, .. } => left.is_constant() && right.is_constant(),
        }
    }
}

fn needs_parens(parent: BinOp, child: &Expr, is_right: bool) -> bool {
    match child {
        Expr::Binary { op, .. } => {
            op.precedence() < parent.precedence()
                || (is_right && op.precedence() == parent.precedence())
        }
        _ => false,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(value) => match format_decimal(value) {
                Some(text) => f.write_str(&text),
                None => write!(f, "{}", to_f64(value)),
            },
            Expr::Measure(name) => f.write_str(name),
            Expr::Paren(inner) => write!(f, "({inner})"),
            Expr::Binary { op, left, right } => {
                // Trees built without Paren nodes still print unambiguously.
                if needs_parens(*op, left, false) {
                    write!(f, "({left})")?;
                } else {
                    write!(f, "{left}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if needs_parens(*op, right, true) {
                    write!(f, "({right})")
                } else {
                    write!(f, "{right}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("unexpected {found} at byte {offset}")]
    Unexpected { found: String, offset: usize },
    #[error("unexpected end of expression at byte {offset}")]
    UnexpectedEnd { offset: usize },
    #[error("unbalanced parenthesis opened at byte {offset}")]
    Unbalanced { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Lex(e) => e.offset,
            ParseError::Unexpected { offset, .. }
            | ParseError::UnexpectedEnd { offset }
            | ParseError::Unbalanced { offset } => *offset,
        }
    }
}

/// Parses a token list with the usual precedence (`*` `/` over `+` `-`),
/// all operators left associative.
pub fn parse_expression(tokens: &[Token]) -> Result<Expr, ParseError> {
    let end = tokens.last().map_or(0, |t| t.offset + 1);
    let mut parser = Parser {
        tokens,
        pos: 0,
        end,
    };
    let expr = parser.expression()?;
    match parser.peek() {
        None => Ok(expr),
        Some(tok) => Err(ParseError::Unexpected {
            found: tok.kind.to_string(),
            offset: tok.offset,
        }),
    }
}

/// Tokenizes and parses in one step.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.expression()?;
    match parser.peek() {
        None => Ok(expr),
        Some(tok) => Err(ParseError::Unexpected {
            found: tok.kind.to_string(),
            offset: tok.offset,
        }),
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn expression(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.term()?;
        while let Some(op) = self.peek().and_then(|t| match t.kind {
            TokenKind::Plus => Some(BinOp::Add),
            TokenKind::Minus => Some(BinOp::Sub),
            _ => None,
        }) {
            self.pos += 1;
            let right = self.term()?;
            left = Expr::Binary {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut left = self.factor()?;
        while let Some(op) = self.peek().and_then(|t| match t.kind {
            TokenKind::Star => Some(BinOp::Mul),
            TokenKind::Slash => Some(BinOp::Div),
            _ => None,
        }) {
            self.pos += 1;
            let right = self.factor()?;
            left = Expr::Binary {
                op,
                left: Box::new(left),
                right: Box::new(right),
            };
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::UnexpectedEnd { offset: self.end });
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number(value) => Ok(Expr::Literal(value)),
            TokenKind::Ident(name) => Ok(Expr::Measure(name)),
            TokenKind::LParen => {
                let inner = match self.expression() {
                    Err(ParseError::UnexpectedEnd { .. }) if self.peek().is_none() => {
                        return Err(ParseError::Unbalanced { offset: tok.offset })
                    }
                    other => other?,
                };
                match self.peek() {
                    Some(Token {
                        kind: TokenKind::RParen,
                        ..
                    }) => {
                        self.pos += 1;
                        Ok(Expr::paren(inner))
                    }
                    Some(other) => Err(ParseError::Unexpected {
                        found: other.kind.to_string(),
                        offset: other.offset,
                    }),
                    None => Err(ParseError::Unbalanced { offset: tok.offset }),
                }
            }
            other => Err(ParseError::Unexpected {
                found: other.to_string(),
                offset: tok.offset,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(name: &str) -> Box<Expr> {
        Box::new(Expr::measure(name))
    }

    #[test]
    fn single_identifier() {
        let tokens = tokenize("x").unwrap();
        assert_eq!(parse_expression(&tokens).unwrap(), Expr::measure("x"));
    }

    #[test]
    fn multiplication_binds_tighter() {
        let expected = Expr::Binary {
            op: BinOp::Add,
            left: m("a"),
            right: Box::new(Expr::Binary {
                op: BinOp::Mul,
                left: m("b"),
                right: m("c"),
            }),
        };
        assert_eq!(parse("a + b * c").unwrap(), expected);
    }

    #[test]
    fn grouped_quotient() {
        let expected = Expr::Binary {
            op: BinOp::Div,
            left: Box::new(Expr::paren(Expr::Binary {
                op: BinOp::Add,
                left: m("a"),
                right: m("b"),
            })),
            right: Box::new(Expr::paren(Expr::Binary {
                op: BinOp::Sub,
                left: m("c"),
                right: m("d"),
            })),
        };
        assert_eq!(parse("(a + b) / (c - d)").unwrap(), expected);
    }

    #[test]
    fn left_associative() {
        let e = parse("a - b - c").unwrap();
        let expected = Expr::Binary {
            op: BinOp::Sub,
            left: Box::new(Expr::Binary {
                op: BinOp::Sub,
                left: m("a"),
                right: m("b"),
            }),
            right: m("c"),
        };
        assert_eq!(e, expected);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            parse("(a + b").unwrap_err(),
            ParseError::Unbalanced { offset: 0 }
        );
        assert_eq!(
            parse("a + * b").unwrap_err(),
            ParseError::Unexpected {
                found: "'*'".into(),
                offset: 4
            }
        );
        assert_eq!(
            parse("a b").unwrap_err(),
            ParseError::Unexpected {
                found: "identifier 'b'".into(),
                offset: 2
            }
        );
        assert_eq!(
            parse("a +").unwrap_err(),
            ParseError::UnexpectedEnd { offset: 3 }
        );
        assert_eq!(
            parse("a)").unwrap_err(),
            ParseError::Unexpected {
                found: "')'".into(),
                offset: 1
            }
        );
        assert_eq!(
            parse("").unwrap_err(),
            ParseError::UnexpectedEnd { offset: 0 }
        );
    }

    #[test]
    fn printing_reparses_to_same_tree() {
        for text in [
            "a + b * c",
            "(a + b) / (c - d)",
            "a - (b - c)",
            "2.5 * ((x))",
            "a / b / c",
        ] {
            let e = parse(text).unwrap();
            assert_eq!(e.to_string(), text);
            assert_eq!(parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn printing_adds_grouping_for_paren_free_trees() {
        let e = Expr::Binary {
            op: BinOp::Sub,
            left: m("a"),
            right: Box::new(Expr::Binary {
                op: BinOp::Sub,
                left: m("b"),
                right: m("c"),
            }),
        };
        assert_eq!(e.to_string(), "a - (b - c)");
    }

    #[test]
    fn linearity() {
        assert!(parse("a + b - 2 * c").unwrap().is_linear());
        assert!(parse("(a - b) / 4").unwrap().is_linear());
        assert!(!parse("a / b").unwrap().is_linear());
        assert!(!parse("a * b").unwrap().is_linear());
    }
}
