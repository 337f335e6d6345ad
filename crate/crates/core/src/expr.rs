//! Parser for series expressions such as `x1^2 + x2^2 + p^3`.

use crate::coeff::Dvr;
use crate::error::{Error, Result};
use crate::series::{PrecisionEvent, Series, VarSet};

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: Dvr,
    vars: VarSet,
    degree: u32,
    events: Vec<PrecisionEvent>,
}

/// Parses `src` into a series over `ring` in `vars`, truncated at `degree`.
pub fn parse(src: &str, ring: Dvr, vars: VarSet, degree: u32) -> Result<(Series, Vec<PrecisionEvent>)> {
    Series::try_zero(ring, vars, degree)?;
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        ring,
        vars,
        degree,
        events: Vec::new(),
    };
    let s = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected character"));
    }
    Ok((s, p.events))
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: &str) -> Error {
        let msg = match self.src.get(self.pos) {
            Some(&c) => format!("{msg} '{}'", c as char),
            None => format!("{msg} at end of input"),
        };
        Error::Syntax {
            offset: self.pos,
            message: msg,
        }
    }

    fn expr(&mut self) -> Result<Series> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if c == b'+' { acc.add(&t)? } else { acc.sub(&t)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Series> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let t = self.unary()?;
            acc = acc.mul(&t)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Series> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Series> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let k = self
            .integer()?
            .ok_or_else(|| self.syntax("expected an exponent, found"))?;
        let constant = base.terms().all(|(m, _)| m.degree() == 0);
        if !constant && k > self.degree as u128 {
            return Err(Error::ExponentOverflow {
                exponent: k.min(u64::MAX as u128) as u64,
                degree: self.degree,
                offset: at,
            });
        }
        if constant {
            let ring = self.ring;
            let (mut b, mut e, mut r) = (base.constant_term(), k, ring.one());
            while e > 0 {
                if e & 1 == 1 {
                    r = ring.mul(r, b);
                }
                b = ring.mul(b, b);
                e >>= 1;
            }
            return Ok(base.constant_like(r));
        }
        base.pow(k as u32)
    }

    /// Decimal literal, or `None` if none starts here.
    fn integer(&mut self) -> Result<Option<u128>> {
        let start = self.pos;
        let mut v: u128 = 0;
        while let Some(c) = self.src.get(self.pos).filter(|c| c.is_ascii_digit()) {
            v = v.saturating_mul(10).saturating_add((c - b'0') as u128);
            self.pos += 1;
        }
        Ok(if self.pos == start { None } else { Some(v) })
    }

    fn literal(&mut self) -> Series {
        let start = self.pos;
        let ring = self.ring;
        let mut c = ring.zero();
        let ten = ring.from_int(10);
        while let Some(d) = self.src.get(self.pos).filter(|c| c.is_ascii_digit()) {
            c = ring.add(ring.mul(c, ten), ring.from_int((d - b'0') as i128));
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        if ring.is_zero(c) && text.bytes().any(|b| b != b'0') {
            self.events.push(PrecisionEvent::new(
                "literal_vanished",
                format!("{text} is zero modulo the working precision"),
            ));
        }
        Series::constant(ring, self.vars, self.degree, c)
    }

    fn atom(&mut self) -> Result<Series> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')', found"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => Ok(self.literal()),
            Some(c) if c.is_ascii_alphabetic() => self.symbol(),
            _ => Err(self.syntax("expected an operand, found")),
        }
    }

    fn symbol(&mut self) -> Result<Series> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap_or("")
            .to_string();
        let ring = self.ring;
        let like = Series::zero(ring, self.vars, self.degree);
        match name.as_str() {
            "p" => return Ok(like.constant_like(ring.from_int(ring.p() as i128))),
            "pi" => return Ok(like.constant_like(ring.pi())),
            "y" => {
                if let Some(i) = self.vars.y() {
                    return Ok(like.var_like(i));
                }
            }
            _ => {
                if let Some(i) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if i >= 1 && i <= self.vars.n && !name[1..].starts_with('0') {
                        return Ok(like.var_like(i - 1));
                    }
                }
            }
        }
        Err(Error::UnknownVariable { name, offset: start })
    }
}

/// Parses an integer polynomial in `var`, e.g. `t^2 - 3`, into its
/// coefficients (constant term first).
pub fn parse_int_poly(src: &str, var: &str) -> Result<Vec<i64>> {
    let mut p = PolyParser {
        src: src.as_bytes(),
        pos: 0,
        var,
    };
    let r = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected character"));
    }
    let mut r = r;
    while r.len() > 1 && *r.last().unwrap() == 0 {
        r.pop();
    }
    r.into_iter()
        .map(|c| i64::try_from(c).map_err(|_| Error::InvalidSpec("coefficient out of range".into())))
        .collect()
}

struct PolyParser<'a> {
    src: &'a [u8],
    pos: usize,
    var: &'a str,
}

type Poly = Vec<i128>;

fn poly_add(a: &Poly, b: &Poly, sign: i128) -> Result<Poly> {
    let mut r = vec![0i128; a.len().max(b.len())];
    for (i, c) in a.iter().enumerate() {
        r[i] = *c;
    }
    for (i, c) in b.iter().enumerate() {
        r[i] = r[i].checked_add(sign * c).ok_or_else(overflow)?;
    }
    Ok(r)
}

fn poly_mul(a: &Poly, b: &Poly) -> Result<Poly> {
    let mut r = vec![0i128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            let t = x.checked_mul(*y).ok_or_else(overflow)?;
            r[i + j] = r[i + j].checked_add(t).ok_or_else(overflow)?;
        }
    }
    Ok(r)
}

fn overflow() -> Error {
    Error::InvalidSpec("polynomial coefficients overflow".into())
}

impl PolyParser<'_> {
    fn skip_ws(&mut self) {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, msg: &str) -> Error {
        Error::Syntax {
            offset: self.pos,
            message: msg.into(),
        }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = poly_add(&acc, &t, if c == b'+' { 1 } else { -1 })?;
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let t = self.unary()?;
            acc = poly_mul(&acc, &t)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Poly> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.iter().map(|c| -c).collect());
        }
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let k: u32 = std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .filter(|k| *k <= 64)
            .ok_or_else(|| Error::Syntax {
                offset: start,
                message: "expected a small exponent".into(),
            })?;
        let mut r = vec![1i128];
        for _ in 0..k {
            r = poly_mul(&r, &base)?;
        }
        Ok(r)
    }

    fn atom(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let v: i128 = std::str::from_utf8(&self.src[start..self.pos])
                    .ok()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(overflow)?;
                Ok(vec![v])
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.src.get(self.pos).is_some_and(|c| c.is_ascii_alphanumeric()) {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if name == self.var {
                    Ok(vec![0, 1])
                } else {
                    Err(Error::UnknownVariable {
                        name: name.into(),
                        offset: start,
                    })
                }
            }
            _ => Err(self.syntax("expected an operand")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Monomial;

    fn ring() -> Dvr {
        Dvr::unramified(3, 6).unwrap()
    }

    #[test]
    fn sum_of_squares() {
        let r = ring();
        let (s, _) = parse("x1^2 + x2^2 + p^3", r, VarSet::x(2), 8).unwrap();
        assert_eq!(s.coeff(&Monomial::from_exps(&[2, 0])), r.one());
        assert_eq!(s.coeff(&Monomial::from_exps(&[0, 2])), r.one());
        assert_eq!(s.constant_term(), r.from_int(27));
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn errors_carry_offsets() {
        let r = ring();
        match parse("x1^^2", r, VarSet::x(1), 8) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse("x3", r, VarSet::x(2), 8),
            Err(Error::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse("y", r, VarSet::x(2), 8),
            Err(Error::UnknownVariable { .. })
        ));
        assert!(matches!(
            parse("x1^9", r, VarSet::x(1), 8),
            Err(Error::ExponentOverflow { .. })
        ));
        assert!(parse("p^40", r, VarSet::x(1), 8).unwrap().0.is_zero());
        assert!(matches!(
            parse("(x1", r, VarSet::x(1), 8),
            Err(Error::Syntax { offset: 3, .. })
        ));
    }

    #[test]
    fn eisenstein_polynomials() {
        assert_eq!(parse_int_poly("t^2-3", "t").unwrap(), vec![-3, 0, 1]);
        assert_eq!(parse_int_poly("t^3 + 5*t + 5", "t").unwrap(), vec![5, 5, 0, 1]);
        assert_eq!(parse_int_poly("(t-1)*(t+1)", "t").unwrap(), vec![-1, 0, 1]);
        assert!(matches!(
            parse_int_poly("t^2-3s", "t"),
            Err(Error::Syntax { offset: 5, .. })
        ));
    }

    #[test]
    fn precedence() {
        let r = ring();
        let (a, _) = parse("-x1^2*2 + (x1+1)*(x1-1)", r, VarSet::x(1), 8).unwrap();
        let (b, _) = parse("-x1^2 - 1", r, VarSet::x(1), 8).unwrap();
        assert_eq!(a, b);
    }
}
