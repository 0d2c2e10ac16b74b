use crate::number::{parse_decimal, Number};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Number(Number),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
}

impl std::fmt::Display for TokenKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenKind::Ident(name) => write!(f, "identifier '{name}'"),
            TokenKind::Number(_) => f.write_str("number"),
            TokenKind::Plus => f.write_str("'+'"),
            TokenKind::Minus => f.write_str("'-'"),
            TokenKind::Star => f.write_str("'*'"),
            TokenKind::Slash => f.write_str("'/'"),
            TokenKind::LParen => f.write_str("'('"),
            TokenKind::RParen => f.write_str("')'"),
        }
    }
}

/// A token and the byte offset where it starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("illegal character {ch:?} at byte {offset}")]
pub struct LexError {
    pub ch: char,
    pub offset: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let single = match b {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'+' => Some(TokenKind::Plus),
            b'-' => Some(TokenKind::Minus),
            b'*' => Some(TokenKind::Star),
            b'/' => Some(TokenKind::Slash),
            b'(' => Some(TokenKind::LParen),
            b')' => Some(TokenKind::RParen),
            _ => None,
        };
        if let Some(kind) = single {
            tokens.push(Token {
                kind,
                offset: start,
            });
            i += 1;
        } else if b.is_ascii_lowercase() || b == b'_' {
            while i < bytes.len()
                && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_')
            {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Ident(text[start..i].to_string()),
                offset: start,
            });
        } else if b.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let value = parse_decimal(&text[start..i]).expect("lexed digits form a decimal");
            tokens.push(Token {
                kind: TokenKind::Number(value),
                offset: start,
            });
        } else {
            let ch = text[start..].chars().next().expect("non-empty remainder");
            return Err(LexError { ch, offset: start });
        }
    }
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn empty_input() {
        assert!(kinds("").is_empty());
        assert!(kinds("   \n").is_empty());
    }

    #[test]
    fn ratio_expression() {
        assert_eq!(
            kinds("ebitda / revenue"),
            vec![
                TokenKind::Ident("ebitda".into()),
                TokenKind::Slash,
                TokenKind::Ident("revenue".into())
            ]
        );
    }

    #[test]
    fn nine_tokens_in_source_order() {
        let tokens = tokenize("a + 2.5*(b - c)").unwrap();
        assert_eq!(tokens.len(), 9);
        let offsets: Vec<usize> = tokens.iter().map(|t| t.offset).collect();
        assert_eq!(offsets, vec![0, 2, 4, 7, 8, 9, 11, 13, 14]);
        assert_eq!(
            tokens[2].kind,
            TokenKind::Number(parse_decimal("2.5").unwrap())
        );
    }

    #[test]
    fn illegal_character_reports_offset() {
        assert_eq!(tokenize("a % b"), Err(LexError { ch: '%', offset: 2 }));
        assert_eq!(tokenize("Revenue"), Err(LexError { ch: 'R', offset: 0 }));
        // A trailing dot is not part of a decimal literal.
        assert_eq!(tokenize("5."), Err(LexError { ch: '.', offset: 1 }));
    }
}
