//! Polynomial endomorphisms `f = (f1, ..., fn)` of affine n-space.
//!
//! `f.compose(&g)` is `f ∘ g`: `g` is applied first, so the components of
//! the result are `f_i(g_1, ..., g_n)`.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, ParamKind, ParamRing, Value};
use crate::linalg::Matrix;
use crate::poly::{parse_poly, Mono, MultiPoly, Substitution, MAX_VARS};

/// Largest dimension for which determinants are expanded.
pub const MAX_DET_DIM: usize = 6;

#[derive(Clone, PartialEq, Eq)]
pub struct Endo {
    ring: ParamRing,
    comps: Vec<MultiPoly>,
}

impl Endo {
    /// Builds an endomorphism; components are promoted to their common ring.
    pub fn new(comps: Vec<MultiPoly>) -> Result<Endo> {
        let n = comps.len();
        if n == 0 || n > MAX_VARS {
            return Err(Error::DimensionTooLarge(n));
        }
        let mut ring = comps[0].ring().clone();
        for c in &comps {
            if c.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.nvars() });
            }
            ring = ring.join(c.ring()).map_err(|e| Error::RingMismatch(e.to_string()))?;
        }
        let comps = comps.iter().map(|c| c.promote(ring.kind)).collect::<Result<_>>()?;
        Ok(Endo { ring, comps })
    }

    pub fn identity(ring: &ParamRing, n: usize) -> Endo {
        Endo { ring: ring.clone(), comps: (0..n).map(|i| MultiPoly::var(ring, n, i)).collect() }
    }

    /// Parses `(p1, ..., pn)` optionally followed by `over RING`. Without a
    /// ring suffix `default` is used.
    pub fn parse(text: &str, default: Option<&ParamRing>) -> Result<Endo> {
        let (body, ring) = match text.rfind(" over ") {
            Some(k) => (&text[..k], text[k + 6..].trim().parse::<ParamRing>()?),
            None => {
                let ring = default.ok_or(Error::Syntax { pos: text.len(), msg: "missing `over RING`".into() })?;
                (text, ring.clone())
            }
        };
        let trimmed = body.trim_end();
        let lead = trimmed.len() - trimmed.trim_start().len();
        let inner = trimmed
            .trim_start()
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or(Error::Syntax { pos: lead, msg: "expected `(p1, ..., pn)`".into() })?;
        let offset = lead + 1;
        let pieces = split_top_level(inner);
        let n = pieces.len();
        if n > MAX_VARS {
            return Err(Error::DimensionTooLarge(n));
        }
        let mut comps = Vec::with_capacity(n);
        for (start, piece) in pieces {
            let p = parse_poly(piece, &ring, n).map_err(|e| shift_error(e, offset + start))?;
            comps.push(p);
        }
        Ok(Endo { ring, comps })
    }

    pub fn ring(&self) -> &ParamRing {
        &self.ring
    }

    pub fn field(&self) -> &Field {
        &self.ring.field
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[MultiPoly] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &MultiPoly {
        &self.comps[i]
    }

    pub fn into_components(self) -> Vec<MultiPoly> {
        self.comps
    }

    pub fn degree(&self) -> u32 {
        self.comps.iter().filter_map(MultiPoly::degree).max().unwrap_or(0)
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.comps.iter().map(|c| c.degree().unwrap_or(0)).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Endo::identity(&self.ring, self.n())
    }

    pub fn promote(&self, kind: ParamKind) -> Result<Endo> {
        Ok(Endo { ring: self.ring.with_kind(kind), comps: self.comps.iter().map(|c| c.promote(kind)).collect::<Result<_>>()? })
    }

    /// `self ∘ g`.
    pub fn compose(&self, g: &Endo) -> Result<Endo> {
        if self.n() != g.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: g.n() });
        }
        if self.field() != g.field() {
            return Err(Error::RingMismatch(format!("{} vs {}", self.ring, g.ring)));
        }
        let mut sub = Substitution::new(&g.comps, None, self.ring.kind)?;
        let comps = self.comps.iter().map(|c| sub.apply(c)).collect::<Result<Vec<_>>>()?;
        Endo::new(comps)
    }

    /// Substitutes the components into `p` (the pullback `p ∘ self`).
    pub fn pullback(&self, p: &MultiPoly) -> Result<MultiPoly> {
        p.substitute(&self.comps, None)
    }

    pub fn derivative_matrix(&self) -> Vec<Vec<MultiPoly>> {
        self.comps.iter().map(|c| (0..self.n()).map(|j| c.partial_derivative(j)).collect()).collect()
    }

    /// `det(Df)`, expanded exactly by cofactors.
    pub fn jacobian(&self) -> Result<MultiPoly> {
        if self.n() > MAX_DET_DIM {
            return Err(Error::DimensionTooLarge(self.n()));
        }
        Ok(poly_det(&self.derivative_matrix()))
    }

    /// Checks `D(f∘g) = g^*(Df) · Dg` entrywise.
    pub fn chain_rule_check(f: &Endo, g: &Endo) -> Result<bool> {
        let fg = f.compose(g)?;
        let lhs = fg.derivative_matrix();
        let df = f.derivative_matrix();
        let dg = g.derivative_matrix();
        let n = f.n();
        let mut sub = Substitution::new(&g.comps, None, f.ring.kind)?;
        let pulled: Vec<Vec<MultiPoly>> =
            df.iter().map(|row| row.iter().map(|e| sub.apply(e)).collect::<Result<_>>()).collect::<Result<_>>()?;
        for i in 0..n {
            for j in 0..n {
                let mut acc = MultiPoly::zero(fg.ring(), n);
                for k in 0..n {
                    acc = acc.checked_add(&pulled[i][k].checked_mul(&dg[k][j])?)?;
                }
                if acc != lhs[i][j].promote(acc.ring().kind.max(lhs[i][j].ring().kind))? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Replaces `t` by `t0`, giving a parameter-free endomorphism.
    pub fn specialize_t(&self, t0: &Value) -> Result<Endo> {
        let comps = self.comps.iter().map(|c| c.specialize_t(t0)).collect::<Result<Vec<_>>>()?;
        Ok(Endo { ring: ParamRing::base(self.field().clone()), comps })
    }

    /// Replaces `t` by `t^a` (`a = 0` means `t = 1`).
    pub fn t_to_power(&self, a: u32) -> Endo {
        Endo { ring: self.ring.clone(), comps: self.comps.iter().map(|c| c.t_to_power(a)).collect() }
    }

    /// `((Df)(0), f(0))` for a parameter-free map.
    pub fn linear_part(&self) -> Result<(Matrix, Vec<Value>)> {
        if self.comps.iter().any(MultiPoly::involves_t) {
            return Err(Error::ParameterPresent);
        }
        let n = self.n();
        let f = self.field();
        let mut m = Matrix::zeros(f, n, n);
        for (i, c) in self.comps.iter().enumerate() {
            for j in 0..n {
                m.set(i, j, c.coefficient(&Mono::var(j)));
            }
        }
        let v = self.comps.iter().map(|c| c.coefficient(&Mono::ONE)).collect();
        Ok((m, v))
    }

    /// Evaluates a parameter-free map at a point of the base field.
    pub fn eval(&self, point: &[Value]) -> Result<Vec<Value>> {
        self.comps.iter().map(|c| c.eval(point)).collect()
    }

    /// The vector `c` if every component is `x_i + c_i` with `c_i` a scalar.
    pub fn translation_vector(&self) -> Option<Vec<Value>> {
        let n = self.n();
        self.comps
            .iter()
            .enumerate()
            .map(|(i, c)| (c - &MultiPoly::var(c.ring(), n, i)).constant_value())
            .collect()
    }

    pub fn is_translation(&self) -> bool {
        self.translation_vector().is_some()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.comps.iter().map(ToString::to_string).collect()
    }
}

/// Determinant of a square matrix of polynomials by Laplace expansion.
pub fn poly_det(m: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = m.len();
    assert!(n >= 1);
    let ring = m.iter().flatten().fold(m[0][0].ring().clone(), |r, p| r.join(p.ring()).expect("matrix entries over one field"));
    let nvars = m[0][0].nvars();
    let cols: Vec<usize> = (0..n).collect();
    det_rec(m, 0, &cols, &ring, nvars)
}

fn det_rec(m: &[Vec<MultiPoly>], row: usize, cols: &[usize], ring: &ParamRing, nvars: usize) -> MultiPoly {
    if cols.len() == 1 {
        return m[row][cols[0]].promote(ring.kind).unwrap();
    }
    let mut acc = MultiPoly::zero(ring, nvars);
    for (k, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let minor = det_rec(m, row + 1, &rest, ring, nvars);
        let term = minor.checked_mul(entry).unwrap();
        acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
    }
    acc
}

fn split_top_level(s: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn shift_error(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { pos, msg } => Error::Syntax { pos: pos + by, msg },
        Error::UnknownVariable { name, pos } => Error::UnknownVariable { name, pos: pos + by },
        other => other,
    }
}

impl fmt::Display for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) over {}", self.to_strings().join(", "), self.ring)
    }
}

impl fmt::Debug for Endo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Endo {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Endo", 2)?;
        st.serialize_field("ring", &self.ring)?;
        st.serialize_field("components", &self.to_strings())?;
        st.end()
    }
}
