//! Textual element syntax.
//!
//! ```text
//! element  := "(" expr ("|" expr)* ")"   -- products, one expr per factor
//!           | expr                        -- single-factor rings
//! expr     := ["-"] term (("+" | "-") term)*
//! term     := coeff ["*" monomial] | monomial
//! monomial := "T" ["^" "(" rational ")"]
//! rational := int ["/" int]
//! ```
//! Whitespace is insignificant; coefficients are reduced mod p. Rendering an
//! element produces the canonical form accepted by this parser.

use crate::error::{Error, Result};
use crate::ring::{FactorPoly, RingConfig, RingElement};
use crate::valnorm::Exp;
use num_rational::Rational64;
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Int(i64),
    T,
    Caret,
    LParen,
    RParen,
    Slash,
    Star,
    Plus,
    Minus,
    Bar,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Lexer> {
    let mut toks = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let v: i64 = text[start..i]
                    .parse()
                    .map_err(|_| Error::Syntax { pos: start, expected: "integer".into() })?;
                toks.push((start, Tok::Int(v)));
            }
            b'T' => {
                toks.push((i, Tok::T));
                i += 1;
            }
            b'^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b'/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            b'*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            b'+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            b'|' => {
                toks.push((i, Tok::Bar));
                i += 1;
            }
            _ => {
                return Err(Error::Syntax {
                    pos: i,
                    expected: "digit, T, ^, (, ), /, *, +, -, or |".into(),
                })
            }
        }
    }
    Ok(Lexer { toks, pos: 0, end: text.len() })
}

impl Lexer {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).map(|(_, t)| *t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Syntax { pos: self.here(), expected: what.into() })
        }
    }

    fn int(&mut self, what: &str) -> Result<i64> {
        let neg = if self.peek() == Some(Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.next() {
            Some(Tok::Int(v)) => Ok(if neg { -v } else { v }),
            _ => Err(Error::Syntax { pos: self.here(), expected: what.into() }),
        }
    }
}

fn parse_rational(lx: &mut Lexer) -> Result<Exp> {
    let num = lx.int("integer numerator")?;
    if lx.peek() == Some(Tok::Slash) {
        lx.pos += 1;
        let pos = lx.here();
        let den = lx.int("integer denominator")?;
        if den == 0 {
            return Err(Error::Syntax { pos, expected: "nonzero denominator".into() });
        }
        Ok(Rational64::new(num, den))
    } else {
        Ok(Rational64::from_integer(num))
    }
}

/// monomial := 'T' ('^' ('(' rational ')' | integer))?
fn parse_monomial(lx: &mut Lexer, cfg: &RingConfig) -> Result<(Exp, u32)> {
    lx.expect(Tok::T, "T")?;
    let e = if lx.peek() == Some(Tok::Caret) {
        lx.pos += 1;
        if lx.peek() == Some(Tok::LParen) {
            lx.pos += 1;
            let r = parse_rational(lx)?;
            lx.expect(Tok::RParen, ") closing the exponent")?;
            r
        } else {
            Rational64::from_integer(lx.int("exponent after ^")?)
        }
    } else {
        Rational64::from_integer(1)
    };
    cfg.check_exponent(&e)?;
    Ok((e, 1))
}

/// term := coeff ('*' monomial)? | monomial
fn parse_term(lx: &mut Lexer, cfg: &RingConfig) -> Result<(Exp, u32)> {
    match lx.peek() {
        Some(Tok::Int(v)) => {
            lx.pos += 1;
            let c = (v.rem_euclid(i64::from(cfg.p))) as u32;
            if lx.peek() == Some(Tok::Star) {
                lx.pos += 1;
                let (e, _) = parse_monomial(lx, cfg)?;
                Ok((e, c))
            } else {
                cfg.check_exponent(&Exp::zero())?;
                Ok((Exp::zero(), c))
            }
        }
        Some(Tok::T) => parse_monomial(lx, cfg),
        _ => Err(Error::Syntax { pos: lx.here(), expected: "coefficient or T".into() }),
    }
}

/// expr := ['-'] term (('+'|'-') term)*
fn parse_expr(lx: &mut Lexer, cfg: &RingConfig) -> Result<FactorPoly> {
    let mut terms: Vec<(Exp, u32)> = Vec::new();
    let mut sign_neg = false;
    if lx.peek() == Some(Tok::Minus) {
        lx.pos += 1;
        sign_neg = true;
    }
    loop {
        let (e, c) = parse_term(lx, cfg)?;
        let c = if sign_neg { (cfg.p - c % cfg.p) % cfg.p } else { c % cfg.p };
        terms.push((e, c));
        match lx.peek() {
            Some(Tok::Plus) => {
                lx.pos += 1;
                sign_neg = false;
            }
            Some(Tok::Minus) => {
                lx.pos += 1;
                sign_neg = true;
            }
            _ => break,
        }
    }
    Ok(FactorPoly { terms: crate::ring::normalize_terms(cfg.p, terms), lossy: false })
}

/// Parse an element of the configured ring.
pub fn parse_element(text: &str, cfg: &RingConfig) -> Result<RingElement> {
    cfg.validate()?;
    let mut lx = lex(text)?;
    let elt = if cfg.factors > 1 {
        lx.expect(Tok::LParen, "( opening a product tuple")?;
        let mut parts = Vec::with_capacity(cfg.factors as usize);
        parts.push(parse_expr(&mut lx, cfg)?);
        for _ in 1..cfg.factors {
            lx.expect(Tok::Bar, "| between product factors")?;
            parts.push(parse_expr(&mut lx, cfg)?);
        }
        lx.expect(Tok::RParen, ") closing the product tuple")?;
        RingElement::from_parts(cfg, parts)?
    } else {
        let f = parse_expr(&mut lx, cfg)?;
        RingElement::from_parts(cfg, vec![f])?
    };
    if lx.peek().is_some() {
        return Err(Error::Syntax { pos: lx.here(), expected: "end of input".into() });
    }
    Ok(elt)
}
