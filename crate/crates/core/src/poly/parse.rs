use std::fmt;

use super::{Mono, MultiPoly};
use crate::error::{Error, Result};
use crate::field::{ParamKind, ParamRing};

/// Parses `text` as a polynomial in `x1..x{nvars}` over `ring`.
///
/// Grammar: `+ - * / ^`, parentheses, integers, bracketed extension-field
/// literals such as `[1,0]`, variables `x1..x9` and `t`. Division is only
/// by nonzero constants; negative exponents only on units.
pub fn parse_poly(text: &str, ring: &ParamRing, nvars: usize) -> Result<MultiPoly> {
    let work = if ring.has_param() { ring.with_kind(ParamKind::LaurentT) } else { ring.clone() };
    let mut p = Parser { src: text.as_bytes(), pos: 0, ring: work, nvars };
    let out = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected input"));
    }
    out.promote(ring.kind)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: ParamRing,
    nvars: usize,
}

impl Parser<'_> {
    fn syntax(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MultiPoly> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<MultiPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    let c = d.constant_value().ok_or(Error::Syntax {
                        pos: at,
                        msg: "division is only by constants".into(),
                    })?;
                    let inv = self.ring.field.inv(&c)?;
                    acc = acc.scale(&inv);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<MultiPoly> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<MultiPoly> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let neg = self.src.get(self.pos) == Some(&b'-');
        if neg {
            self.pos += 1;
        }
        let at = self.pos;
        let e = self.digits().ok_or_else(|| self.syntax("expected exponent"))?;
        let e: u32 = e.parse().map_err(|_| Error::Syntax { pos: at, msg: "exponent too large".into() })?;
        if !neg {
            return Ok(base.pow(e));
        }
        match base.unit_inverse() {
            Some(inv) => Ok(inv.pow(e)),
            None if base.is_x_free() && !base.is_constant() => Err(Error::NegativeTPower),
            None => Err(Error::Syntax { pos: at, msg: "negative exponent on a non-unit".into() }),
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn atom(&mut self) -> Result<MultiPoly> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return Err(self.syntax("unexpected end of input")),
        };
        let c = self.src[start];
        if c == b'(' {
            self.pos += 1;
            let inner = self.expr()?;
            if self.peek() != Some(b')') {
                return Err(self.syntax("expected `)`"));
            }
            self.pos += 1;
            return Ok(inner);
        }
        if c == b'[' {
            let end = self.src[start..]
                .iter()
                .position(|&b| b == b']')
                .map(|k| start + k + 1)
                .ok_or_else(|| self.syntax("unterminated `[`"))?;
            let text = String::from_utf8_lossy(&self.src[start..end]).into_owned();
            let v = self.ring.field.parse_value(&text).map_err(|e| relocate(e, start))?;
            self.pos = end;
            return Ok(MultiPoly::constant(&self.ring, self.nvars, v));
        }
        if c.is_ascii_digit() {
            let d = self.digits().unwrap();
            let v = self.ring.field.parse_value(&d).map_err(|e| relocate(e, start))?;
            return Ok(MultiPoly::constant(&self.ring, self.nvars, v));
        }
        if c.is_ascii_alphabetic() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                self.pos += 1;
            }
            let name = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            let unknown = || Error::UnknownVariable { name: name.clone(), pos: start };
            if name == "t" {
                if !self.ring.has_param() {
                    return Err(unknown());
                }
                return Ok(MultiPoly::t(&self.ring, self.nvars));
            }
            let idx = name
                .strip_prefix('x')
                .filter(|d| !d.starts_with('0'))
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&i| (1..=self.nvars).contains(&i))
                .ok_or_else(unknown)?;
            return Ok(MultiPoly::var(&self.ring, self.nvars, idx - 1));
        }
        Err(self.syntax("unexpected character"))
    }
}

fn relocate(e: Error, pos: usize) -> Error {
    match e {
        Error::Syntax { msg, .. } => Error::Syntax { pos, msg },
        other => other,
    }
}

fn write_mono(m: &Mono, nvars: usize, out: &mut Vec<String>) {
    match m.t() {
        0 => {}
        1 => out.push("t".into()),
        e => out.push(format!("t^{e}")),
    }
    for i in 0..nvars {
        match m.x(i) {
            0 => {}
            1 => out.push(format!("x{}", i + 1)),
            e => out.push(format!("x{}^{e}", i + 1)),
        }
    }
}

pub(super) fn write_poly(p: &MultiPoly, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    let field = p.field();
    for (k, (m, c)) in p.terms().rev().enumerate() {
        let negative = field.is_negative(c);
        let mag = if negative { field.neg(c) } else { c.clone() };
        match (k, negative) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let mut factors = Vec::new();
        if !field.is_one(&mag) || *m == Mono::ONE {
            factors.push(field.format_value(&mag));
        }
        write_mono(m, p.nvars(), &mut factors);
        f.write_str(&factors.join("*"))?;
    }
    Ok(())
}
