//! Parser for the canonical polynomial text form, e.g. `-1/2 x1^2 x3 + 2*x2`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::poly::WeightedPolynomial;
use super::{PolyError, Rational};

pub fn parse_rational(s: &str) -> Result<Rational, PolyError> {
    let t = s.trim();
    let err = |msg: &str| PolyError::Parse {
        column: 1,
        message: format!("{msg}: {t:?}"),
    };
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" || int == "+" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| err("bad decimal"))?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err("bad decimal"));
        }
        let frac_part: BigInt = frac.parse().map_err(|_| err("bad decimal"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let frac_r = Rational::new(frac_part, scale);
        let int_r = Rational::from_integer(int_part);
        return Ok(if negative { int_r - frac_r } else { int_r + frac_r });
    }
    let n: BigInt = t.parse().map_err(|_| err("bad number"))?;
    Ok(Rational::from_integer(n))
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn error(&self, message: impl Into<String>) -> PolyError {
        PolyError::Parse {
            column: self.pos + 1,
            message: message.into(),
        }
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap()
    }

    fn number(&mut self) -> Result<Rational, PolyError> {
        let start = self.pos;
        self.digits();
        if self.peek() == Some(b'.') {
            self.pos += 1;
            self.digits();
        }
        let mut text = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den = self.digits();
            if den.is_empty() {
                return Err(self.error("expected denominator"));
            }
            text = format!("{text}/{den}");
        }
        parse_rational(&text).map_err(|_| PolyError::Parse {
            column: start + 1,
            message: format!("bad coefficient {text:?}"),
        })
    }
}

/// Parses a polynomial in variables `x1..x{num_vars}`.
pub fn parse_polynomial(src: &str, num_vars: usize) -> Result<WeightedPolynomial, PolyError> {
    let mut lx = Lexer {
        src: src.as_bytes(),
        pos: 0,
    };
    let mut out = WeightedPolynomial::zero(num_vars);
    lx.skip_ws();
    if lx.peek().is_none() {
        return Err(lx.error("empty polynomial"));
    }
    let mut first = true;
    loop {
        lx.skip_ws();
        let mut sign = Rational::one();
        match lx.peek() {
            Some(b'+') => lx.pos += 1,
            Some(b'-') => {
                sign = -sign;
                lx.pos += 1;
            }
            Some(_) if first => {}
            None => break,
            Some(c) => return Err(lx.error(format!("expected '+' or '-', found {:?}", c as char))),
        }
        first = false;
        lx.skip_ws();
        let mut coef = sign;
        let mut exps = vec![0u32; num_vars];
        let mut saw_factor = false;
        if matches!(lx.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            coef *= lx.number()?;
            saw_factor = true;
        }
        loop {
            lx.skip_ws();
            match lx.peek() {
                Some(b'*') => {
                    if !saw_factor {
                        return Err(lx.error("'*' without a left operand"));
                    }
                    lx.pos += 1;
                    lx.skip_ws();
                    if lx.peek() != Some(b'x') && !matches!(lx.peek(), Some(c) if c.is_ascii_digit())
                    {
                        return Err(lx.error("expected a factor after '*'"));
                    }
                }
                Some(b'x') => {
                    let col = lx.pos;
                    lx.pos += 1;
                    let idx = lx.digits();
                    let i: usize = idx.parse().map_err(|_| PolyError::Parse {
                        column: col + 1,
                        message: "expected variable index after 'x'".into(),
                    })?;
                    if i == 0 || i > num_vars {
                        return Err(PolyError::Parse {
                            column: col + 1,
                            message: format!("variable x{i} outside x1..x{num_vars}"),
                        });
                    }
                    let mut k = 1u32;
                    lx.skip_ws();
                    if lx.peek() == Some(b'^') {
                        lx.pos += 1;
                        lx.skip_ws();
                        let d = lx.digits();
                        k = d.parse().map_err(|_| lx.error("expected exponent after '^'"))?;
                    }
                    exps[i - 1] += k;
                    saw_factor = true;
                }
                Some(c) if c.is_ascii_digit() && saw_factor => {
                    coef *= lx.number()?;
                }
                _ => break,
            }
        }
        if !saw_factor {
            return Err(lx.error("expected a term"));
        }
        out = &out + &WeightedPolynomial::monomial(exps, coef);
        lx.skip_ws();
        if lx.peek().is_none() {
            break;
        }
    }
    Ok(out)
}
