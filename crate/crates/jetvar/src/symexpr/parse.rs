//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr    := ['-'] term (('+'|'-') term)*
//! term    := factor (('*' factor) | ('/' rational))*
//! factor  := base ('^' ['-'] integer)?
//! base    := rational | ident | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | ln
//! ```
//!
//! Jet variables use the suffix convention `u_xy`: an underscore followed
//! by a string of coordinate names, order-insensitive (`u_xy` = `u_yx`),
//! resolved to a derivative-count multi-index.

use num::{BigInt, One, Zero};
use thiserror::Error;

use super::{Expr, Func, JetSpace, Rational};
use crate::multiindex::MultiIndex;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("at byte {pos}: unknown identifier `{name}`")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("at byte {pos}: jet order {order} exceeds declared maximum {max}")]
    OrderExceeded { pos: usize, order: u32, max: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn next_token(&mut self) -> Result<(usize, Tok), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((start, Tok::Eof));
        }
        let c = self.src[self.pos];
        let simple = match c {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'^' => Some(Tok::Caret),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok((start, t));
        }
        if c.is_ascii_digit() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let mut denom = BigInt::one();
            let int_part = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let mut numer: BigInt = int_part.parse().unwrap();
            if self.pos < self.src.len() && self.src[self.pos] == b'.' {
                self.pos += 1;
                let frac_start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if self.pos == frac_start {
                    return Err(ParseError::Syntax {
                        pos: self.pos,
                        msg: "expected digits after decimal point".into(),
                    });
                }
                let frac = std::str::from_utf8(&self.src[frac_start..self.pos]).unwrap();
                let scale = BigInt::from(10u32).pow((frac.len()) as u32);
                numer = numer * &scale + frac.parse::<BigInt>().unwrap();
                denom = scale;
            }
            return Ok((start, Tok::Num(Rational::new(numer, denom))));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            return Ok((start, Tok::Ident(name.to_string())));
        }
        Err(ParseError::Syntax {
            pos: start,
            msg: format!("unexpected character `{}`", c as char),
        })
    }
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    space: &'a JetSpace,
}

/// Parse a textual expression over the variables declared in `space`.
pub fn parse_expr(text: &str, space: &JetSpace) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    loop {
        let (pos, tok) = lexer.next_token()?;
        let done = tok == Tok::Eof;
        toks.push((pos, tok));
        if done {
            break;
        }
    }
    let mut p = Parser {
        toks,
        idx: 0,
        space,
    };
    let e = p.expr()?;
    let (pos, tok) = p.peek();
    if tok != &Tok::Eof {
        return Err(ParseError::Syntax {
            pos,
            msg: "unexpected trailing input".into(),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn peek(&self) -> (usize, &Tok) {
        let (pos, ref t) = self.toks[self.idx];
        (pos, t)
    }

    fn bump(&mut self) -> (usize, Tok) {
        let entry = self.toks[self.idx].clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        entry
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut negate_first = false;
        if self.peek().1 == &Tok::Minus {
            self.bump();
            negate_first = true;
        }
        let first = self.term()?;
        let mut terms = vec![if negate_first {
            Expr::Neg(Box::new(first))
        } else {
            first
        }];
        loop {
            match self.peek().1 {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.term()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![self.factor()?];
        loop {
            match self.peek().1 {
                Tok::Star => {
                    self.bump();
                    factors.push(self.factor()?);
                }
                Tok::Slash => {
                    let (pos, _) = self.bump();
                    match self.bump() {
                        (_, Tok::Num(r)) => {
                            if r.is_zero() {
                                return Err(ParseError::Syntax {
                                    pos,
                                    msg: "division by zero".into(),
                                });
                            }
                            factors.push(Expr::Num(r.recip()));
                        }
                        (p, _) => {
                            return Err(ParseError::Syntax {
                                pos: p,
                                msg: "expected a rational literal after `/`".into(),
                            })
                        }
                    }
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 {
            factors.pop().unwrap()
        } else {
            Expr::Mul(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.peek().1 == &Tok::Caret {
            self.bump();
            let mut sign = 1i32;
            if self.peek().1 == &Tok::Minus {
                self.bump();
                sign = -1;
            }
            match self.bump() {
                (pos, Tok::Num(r)) => {
                    if !r.is_integer() {
                        return Err(ParseError::Syntax {
                            pos,
                            msg: "exponent must be an integer".into(),
                        });
                    }
                    let k: i32 = r.to_integer().try_into().map_err(|_| ParseError::Syntax {
                        pos,
                        msg: "exponent out of range".into(),
                    })?;
                    Ok(Expr::Pow(Box::new(base), sign * k))
                }
                (pos, _) => Err(ParseError::Syntax {
                    pos,
                    msg: "expected an integer exponent after `^`".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            (_, Tok::Num(r)) => Ok(Expr::Num(r)),
            (_, Tok::LParen) => {
                let e = self.expr()?;
                match self.bump() {
                    (_, Tok::RParen) => Ok(e),
                    (pos, _) => Err(ParseError::Syntax {
                        pos,
                        msg: "expected `)`".into(),
                    }),
                }
            }
            (pos, Tok::Ident(name)) => self.resolve_ident(pos, &name),
            (pos, t) => Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
        }
    }

    fn resolve_ident(&mut self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        if let Some(f) = match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            _ => None,
        } {
            match self.bump() {
                (_, Tok::LParen) => {}
                (p, _) => {
                    return Err(ParseError::Syntax {
                        pos: p,
                        msg: format!("expected `(` after function `{name}`"),
                    })
                }
            }
            let arg = self.expr()?;
            match self.bump() {
                (_, Tok::RParen) => Ok(Expr::func(f, arg)),
                (p, _) => Err(ParseError::Syntax {
                    pos: p,
                    msg: "expected `)`".into(),
                }),
            }
        } else {
            self.resolve_variable(pos, name)
        }
    }

    fn resolve_variable(&self, pos: usize, name: &str) -> Result<Expr, ParseError> {
        if let Some(i) = self.space.coord_index(name) {
            return Ok(Expr::Base(i));
        }
        if let Some(a) = self.space.field_index(name) {
            return Ok(Expr::Jet(a, MultiIndex::zero(self.space.dim())));
        }
        // Jet suffix: longest field name followed by `_` and coordinate names.
        let mut best: Option<(usize, &str)> = None;
        for a in 0..self.space.num_fields() {
            let f = self.space.field_name(a);
            if name.len() > f.len() + 1 && name.starts_with(f) && name.as_bytes()[f.len()] == b'_'
            {
                if best.map_or(true, |(_, prev)| f.len() > prev.len()) {
                    best = Some((a, f));
                }
            }
        }
        let (field, fname) = best.ok_or_else(|| ParseError::UnknownIdentifier {
            pos,
            name: name.to_string(),
        })?;
        let suffix = &name[fname.len() + 1..];
        let index = self.resolve_suffix(pos, name, suffix)?;
        if index.order() as usize > self.space.max_order() {
            return Err(ParseError::OrderExceeded {
                pos,
                order: index.order(),
                max: self.space.max_order(),
            });
        }
        Ok(Expr::Jet(field, index))
    }

    fn resolve_suffix(
        &self,
        pos: usize,
        full: &str,
        suffix: &str,
    ) -> Result<MultiIndex, ParseError> {
        // Greedy longest coordinate-name match at each position.
        let mut coords: Vec<(usize, &str)> = (0..self.space.dim())
            .map(|i| (i, self.space.coord_name(i)))
            .collect();
        coords.sort_by_key(|(_, n)| std::cmp::Reverse(n.len()));
        let mut counts = vec![0u32; self.space.dim()];
        let mut rest = suffix;
        while !rest.is_empty() {
            let hit = coords.iter().find(|(_, n)| rest.starts_with(*n));
            match hit {
                Some(&(axis, n)) => {
                    counts[axis] += 1;
                    rest = &rest[n.len()..];
                }
                None => {
                    return Err(ParseError::UnknownIdentifier {
                        pos,
                        name: full.to_string(),
                    })
                }
            }
        }
        Ok(MultiIndex::new(counts))
    }
}
