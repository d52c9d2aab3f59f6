//! Polynomial expression grammar:
//!
//! ```text
//! expr   := sign? term (sign term)*
//! term   := factor ('*' factor)*
//! factor := INT ('/' INT)? | IDENT ('^' '-'? INT)?
//! ```
//!
//! Whitespace is insignificant.  Errors carry the byte offset of the
//! offending token.

use super::poly::{Poly, Rat};
use super::Algebra;
use crate::mono::Mono;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    alg: &'a Algebra,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<BigInt> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()?
            .parse()
            .ok()
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn factor(&mut self, op_at: Option<usize>) -> Result<Poly, ParseError> {
        let c = match self.peek() {
            Some(c) => c,
            None => {
                return match op_at {
                    Some(p) => err(p, "trailing operator"),
                    None => err(self.pos, "expected a coefficient or variable"),
                }
            }
        };
        let n = self.alg.nvars();
        if c.is_ascii_digit() {
            let num = self.digits().expect("digit present");
            let mut value = Rat::from_integer(num);
            if self.peek() == Some(b'/') {
                let slash = self.pos;
                self.pos += 1;
                self.skip_ws();
                let den = match self.digits() {
                    Some(d) => d,
                    None => return err(slash, "trailing operator"),
                };
                if den.is_zero() {
                    return err(slash, "zero denominator");
                }
                value /= Rat::from_integer(den);
            }
            return Ok(Poly::monomial(Mono::one(n), value));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            let name = self.ident();
            let Some(i) = self.alg.var_index(name) else {
                return err(start, format!("unknown variable `{name}`"));
            };
            let mut exp: i64 = 1;
            if self.peek() == Some(b'^') {
                let caret = self.pos;
                self.pos += 1;
                let neg = if self.peek() == Some(b'-') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                self.skip_ws();
                let Some(e) = self.digits() else {
                    return err(caret, "trailing operator");
                };
                let e: i64 = match i64::try_from(e) {
                    Ok(v) if v <= i32::MAX as i64 => v,
                    _ => return err(caret, "exponent too large"),
                };
                exp = if neg { -e } else { e };
            }
            if exp < 0 && !self.alg.is_inverted(i) {
                return err(
                    start,
                    format!("negative exponent on non-inverted variable `{name}`"),
                );
            }
            if self.alg.is_odd(i) && exp > 1 {
                return Ok(Poly::zero());
            }
            let mut e = vec![0; n];
            e[i] = exp as i32;
            return Ok(Poly::monomial(Mono::from_vec(e), Rat::one()));
        }
        err(self.pos, format!("unexpected character `{}`", c as char))
    }

    fn term(&mut self, op_at: Option<usize>) -> Result<Poly, ParseError> {
        let mut acc = self.factor(op_at)?;
        while self.peek() == Some(b'*') {
            let star = self.pos;
            self.pos += 1;
            let f = self.factor(Some(star))?;
            acc = self.alg.mul(&acc, &f);
        }
        Ok(acc)
    }

    fn expr(&mut self) -> Result<Poly, ParseError> {
        let mut total = Poly::zero();
        let mut sign_at = None;
        let mut negative = false;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            sign_at = Some(self.pos);
            negative = c == b'-';
            self.pos += 1;
        }
        loop {
            let t = self.term(sign_at)?;
            total.add_assign(&if negative { t.neg() } else { t });
            match self.peek() {
                None => return Ok(total),
                Some(c @ (b'+' | b'-')) => {
                    sign_at = Some(self.pos);
                    negative = c == b'-';
                    self.pos += 1;
                }
                Some(c) => return err(self.pos, format!("unexpected character `{}`", c as char)),
            }
        }
    }
}

/// Parses an element over the variables of `alg`.
pub fn parse_element(alg: &Algebra, text: &str) -> Result<Poly, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        alg,
    };
    if p.peek().is_none() {
        return err(0, "empty expression");
    }
    p.expr()
}
