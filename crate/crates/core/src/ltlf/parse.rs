//! Recursive-descent parser for the formula syntax.
//!
//! Precedence, tightest first: `! X N F G`, then `U R` (right-assoc), `&`,
//! `|`, and `->` (right-assoc).

use super::{Formula, LtlfError, Proposition};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    WeakNext,
    Until,
    Release,
    Eventually,
    Globally,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("proposition '{name}'"),
            Tok::True => "'true'".into(),
            Tok::False => "'false'".into(),
            Tok::Not => "'!'".into(),
            Tok::And => "'&'".into(),
            Tok::Or => "'|'".into(),
            Tok::Implies => "'->'".into(),
            Tok::Next => "'X'".into(),
            Tok::WeakNext => "'N'".into(),
            Tok::Until => "'U'".into(),
            Tok::Release => "'R'".into(),
            Tok::Eventually => "'F'".into(),
            Tok::Globally => "'G'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
        }
    }
}

fn syntax(offset: usize, message: impl Into<String>) -> LtlfError {
    LtlfError::Syntax {
        offset,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, LtlfError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    i += 1;
                    Tok::Implies
                } else {
                    return Err(syntax(start, "expected '->'"));
                }
            }
            c if c.is_ascii_alphanumeric() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "N" => Tok::WeakNext,
                    "U" => Tok::Until,
                    "R" => Tok::Release,
                    "F" => Tok::Eventually,
                    "G" => Tok::Globally,
                    _ => {
                        Proposition::new(word).map_err(|_| syntax(start, format!("invalid proposition '{word}'")))?;
                        Tok::Ident(word.to_string())
                    }
                };
                out.push((start, tok));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character '{ch}'")));
            }
        };
        i += 1;
        out.push((start, tok));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        tok
    }

    fn implies(&mut self) -> Result<Formula, LtlfError> {
        let lhs = self.or()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, LtlfError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, LtlfError> {
        let mut lhs = self.binary_temporal()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            lhs = Formula::and(lhs, self.binary_temporal()?);
        }
        Ok(lhs)
    }

    fn binary_temporal(&mut self) -> Result<Formula, LtlfError> {
        let lhs = self.unary()?;
        match self.peek() {
            Some(Tok::Until) => {
                self.bump();
                Ok(Formula::until(lhs, self.binary_temporal()?))
            }
            Some(Tok::Release) => {
                self.bump();
                Ok(Formula::release(lhs, self.binary_temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, LtlfError> {
        let offset = self.offset();
        match self.bump() {
            Some(Tok::Not) => Ok(Formula::not(self.unary()?)),
            Some(Tok::Next) => Ok(Formula::next(self.unary()?)),
            Some(Tok::WeakNext) => Ok(Formula::weak_next(self.unary()?)),
            Some(Tok::Eventually) => Ok(Formula::eventually(self.unary()?)),
            Some(Tok::Globally) => Ok(Formula::globally(self.unary()?)),
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::False),
            Some(Tok::Ident(name)) => Ok(Formula::Atom(Proposition(name))),
            Some(Tok::LParen) => {
                let inner = self.implies()?;
                let close = self.offset();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    Some(tok) => Err(syntax(close, format!("expected ')' but found {}", tok.describe()))),
                    None => Err(syntax(close, "unbalanced '(': missing ')'")),
                }
            }
            Some(tok) => Err(syntax(offset, format!("unexpected {}", tok.describe()))),
            None => Err(syntax(offset, "unexpected end of input")),
        }
    }
}

/// Parses a formula such as `F(c1 & c2 & b) & G(!(c1 & c2) -> !b)`.
pub fn parse(text: &str) -> Result<Formula, LtlfError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(syntax(0, "empty formula"));
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.implies()?;
    if let Some(tok) = parser.peek() {
        let message = match tok {
            Tok::RParen => "unbalanced ')'".to_string(),
            other => format!("unexpected {}", other.describe()),
        };
        return Err(syntax(parser.offset(), message));
    }
    Ok(formula)
}
