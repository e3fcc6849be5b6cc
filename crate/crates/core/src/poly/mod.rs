//! Sparse multivariate polynomials in `x1..xn` with an optional parameter `t`.
//!
//! Terms live in a `BTreeMap` keyed by [`Mono`], whose derived order is graded
//! lexicographic on the `x` exponents with the `t` exponent as a final tie
//! break. That order is the canonical order used for printing and
//! serialization. The `t` exponent is signed; only `k[t, 1/t]` admits
//! negative values.

mod parse;

pub use parse::parse_poly;

use std::collections::hash_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::field::{Field, ParamKind, ParamRing, Scalar, Value};

/// Maximum number of variables `x1..x9`.
pub const MAX_VARS: usize = 9;

/// Exponent vector of a term. Field order gives the graded lex term order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Mono {
    deg: u32,
    x: [u16; MAX_VARS],
    t: i32,
}

impl Mono {
    pub const ONE: Mono = Mono { deg: 0, x: [0; MAX_VARS], t: 0 };

    pub fn new(x: &[u16], t: i32) -> Mono {
        assert!(x.len() <= MAX_VARS);
        let mut e = [0u16; MAX_VARS];
        e[..x.len()].copy_from_slice(x);
        Mono { deg: x.iter().map(|&v| v as u32).sum(), x: e, t }
    }

    pub fn var(i: usize) -> Mono {
        let mut m = Mono::ONE;
        m.x[i] = 1;
        m.deg = 1;
        m
    }

    pub fn t_pow(t: i32) -> Mono {
        Mono { t, ..Mono::ONE }
    }

    /// Total degree in the `x` variables.
    pub fn deg(&self) -> u32 {
        self.deg
    }

    pub fn x(&self, i: usize) -> u16 {
        self.x[i]
    }

    pub fn xs(&self) -> &[u16; MAX_VARS] {
        &self.x
    }

    pub fn t(&self) -> i32 {
        self.t
    }

    pub fn times(&self, other: &Mono) -> Mono {
        let mut x = [0u16; MAX_VARS];
        for (i, slot) in x.iter_mut().enumerate() {
            *slot = self.x[i].checked_add(other.x[i]).expect("exponent overflow");
        }
        Mono { deg: self.deg + other.deg, x, t: self.t + other.t }
    }

    pub fn x_part(&self) -> Mono {
        Mono { t: 0, ..*self }
    }

    fn with_x(&self, i: usize, e: u16) -> Mono {
        let mut m = *self;
        m.deg = m.deg - m.x[i] as u32 + e as u32;
        m.x[i] = e;
        m
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    ring: ParamRing,
    nvars: usize,
    terms: BTreeMap<Mono, Value>,
}

impl MultiPoly {
    pub fn zero(ring: &ParamRing, nvars: usize) -> MultiPoly {
        assert!((1..=MAX_VARS).contains(&nvars), "nvars must be in 1..=9");
        MultiPoly { ring: ring.clone(), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(ring: &ParamRing, nvars: usize, c: Value) -> MultiPoly {
        let mut p = MultiPoly::zero(ring, nvars);
        p.add_term(Mono::ONE, c);
        p
    }

    pub fn one(ring: &ParamRing, nvars: usize) -> MultiPoly {
        MultiPoly::constant(ring, nvars, ring.field.one())
    }

    pub fn from_i64(ring: &ParamRing, nvars: usize, c: i64) -> MultiPoly {
        MultiPoly::constant(ring, nvars, ring.field.from_i64(c))
    }

    /// The variable `x_{i+1}` (indices are 0-based).
    pub fn var(ring: &ParamRing, nvars: usize, i: usize) -> MultiPoly {
        assert!(i < nvars, "variable index out of range");
        MultiPoly::monomial(ring, nvars, Mono::var(i), ring.field.one())
    }

    /// The parameter `t`; the ring must have one.
    pub fn t(ring: &ParamRing, nvars: usize) -> MultiPoly {
        assert!(ring.has_param(), "ring has no parameter");
        MultiPoly::monomial(ring, nvars, Mono::t_pow(1), ring.field.one())
    }

    pub fn monomial(ring: &ParamRing, nvars: usize, m: Mono, c: Value) -> MultiPoly {
        let mut p = MultiPoly::zero(ring, nvars);
        p.add_term(m, c);
        p
    }

    pub fn ring(&self) -> &ParamRing {
        &self.ring
    }

    pub fn field(&self) -> &Field {
        &self.ring.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending canonical order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Mono, &Value)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Mono) -> Value {
        self.terms.get(m).cloned().unwrap_or_else(|| self.ring.field.zero())
    }

    /// Adds `c * m` in place, keeping the no-zero-coefficient invariant.
    pub fn add_term(&mut self, m: Mono, c: Value) {
        let field = &self.ring.field;
        if field.is_zero(&c) {
            return;
        }
        debug_assert!(self.admits(&m), "term {m:?} not allowed in {}", self.ring);
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                field.add_assign(e.get_mut(), &c);
                if field.is_zero(e.get()) {
                    e.remove();
                }
            }
        }
    }

    fn admits(&self, m: &Mono) -> bool {
        let vars_ok = m.x[self.nvars..].iter().all(|&e| e == 0);
        let t_ok = match self.ring.kind {
            ParamKind::NoParam => m.t == 0,
            ParamKind::PolyT => m.t >= 0,
            ParamKind::LaurentT => true,
        };
        vars_ok && t_ok
    }

    /// Total `x`-degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.deg).max()
    }

    pub fn t_min(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.t).min()
    }

    pub fn t_max(&self) -> Option<i32> {
        self.terms.keys().map(|m| m.t).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| *m == Mono::ONE)
    }

    /// The value if the polynomial is a constant of the base field.
    pub fn constant_value(&self) -> Option<Value> {
        if self.is_constant() {
            Some(self.coefficient(&Mono::ONE))
        } else {
            None
        }
    }

    pub fn constant_scalar(&self) -> Option<Scalar> {
        self.constant_value().map(|v| self.ring.field.scalar(v))
    }

    /// Free of all `x` variables (may still involve `t`).
    pub fn is_x_free(&self) -> bool {
        self.terms.keys().all(|m| m.deg == 0)
    }

    pub fn involves(&self, i: usize) -> bool {
        self.terms.keys().any(|m| m.x[i] > 0)
    }

    pub fn involves_t(&self) -> bool {
        self.terms.keys().any(|m| m.t != 0)
    }

    fn compatible(&self, other: &MultiPoly) -> Result<ParamRing> {
        if self.nvars != other.nvars {
            return Err(Error::RingMismatch(format!(
                "{} variables vs {} variables",
                self.nvars, other.nvars
            )));
        }
        self.ring
            .join(&other.ring)
            .map_err(|_| Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)))
    }

    pub fn checked_add(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let ring = self.compatible(other)?;
        let mut out = self.clone();
        out.ring = ring;
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &MultiPoly) -> Result<MultiPoly> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &MultiPoly) -> Result<MultiPoly> {
        let ring = self.compatible(other)?;
        let terms = if ring.field.is_rationals() {
            mul_rational(self, other, u32::MAX)
        } else {
            mul_finite(&ring.field, self, other, u32::MAX)
        };
        Ok(MultiPoly { ring, nvars: self.nvars, terms })
    }

    /// Product with all terms of `x`-degree above `max_deg` discarded.
    pub fn mul_truncated(&self, other: &MultiPoly, max_deg: u32) -> Result<MultiPoly> {
        let ring = self.compatible(other)?;
        let terms = if ring.field.is_rationals() {
            mul_rational(self, other, max_deg)
        } else {
            mul_finite(&ring.field, self, other, max_deg)
        };
        Ok(MultiPoly { ring, nvars: self.nvars, terms })
    }

    fn neg_ref(&self) -> MultiPoly {
        let field = &self.ring.field;
        MultiPoly {
            ring: self.ring.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (*m, field.neg(c))).collect(),
        }
    }

    pub fn scale(&self, c: &Value) -> MultiPoly {
        let field = &self.ring.field;
        if field.is_zero(c) {
            return MultiPoly::zero(&self.ring, self.nvars);
        }
        MultiPoly {
            ring: self.ring.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, v)| (*m, field.mul(v, c))).collect(),
        }
    }

    /// Multiplies by the monomial `m` (exponents may shift `t` downwards).
    pub fn shift(&self, m: &Mono) -> MultiPoly {
        MultiPoly {
            ring: self.ring.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.times(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.ring, self.nvars);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Same polynomial viewed in a ring of another parameter kind.
    pub fn promote(&self, kind: ParamKind) -> Result<MultiPoly> {
        let ring = self.ring.with_kind(kind);
        let mut out = MultiPoly::zero(&ring, self.nvars);
        for (m, c) in &self.terms {
            if !out.admits(m) {
                return Err(if m.t < 0 {
                    Error::NegativeTPower
                } else {
                    Error::RingMismatch(format!("term with t in {ring}"))
                });
            }
            out.terms.insert(*m, c.clone());
        }
        Ok(out)
    }

    /// Same polynomial in more variables.
    pub fn with_nvars(&self, nvars: usize) -> MultiPoly {
        assert!(nvars >= self.nvars || self.terms.keys().all(|m| m.x[nvars..].iter().all(|&e| e == 0)));
        MultiPoly { ring: self.ring.clone(), nvars, terms: self.terms.clone() }
    }

    /// Sum of the terms of `x`-degree exactly `m`.
    pub fn homogeneous_part(&self, m: u32) -> MultiPoly {
        self.filter(|k| k.deg == m)
    }

    /// Sum of the terms of `x`-degree at most `max_deg`.
    pub fn truncate(&self, max_deg: u32) -> MultiPoly {
        self.filter(|k| k.deg <= max_deg)
    }

    /// Highest-degree homogeneous component.
    pub fn leading_form(&self) -> MultiPoly {
        match self.degree() {
            Some(d) => self.homogeneous_part(d),
            None => self.clone(),
        }
    }

    fn filter(&self, keep: impl Fn(&Mono) -> bool) -> MultiPoly {
        MultiPoly {
            ring: self.ring.clone(),
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (*m, c.clone())).collect(),
        }
    }

    /// Coefficient of `x^a` as an `x`-free polynomial in `t`.
    pub fn x_coefficient(&self, a: &Mono) -> MultiPoly {
        let key = a.x_part();
        MultiPoly {
            ring: self.ring.clone(),
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.x_part() == key)
                .map(|(m, c)| (Mono::t_pow(m.t), c.clone()))
                .collect(),
        }
    }

    /// Formal partial derivative with respect to `x_{i+1}`.
    pub fn partial_derivative(&self, i: usize) -> MultiPoly {
        assert!(i < self.nvars, "variable index out of range");
        let field = &self.ring.field;
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        for (m, c) in &self.terms {
            let e = m.x[i];
            if e == 0 {
                continue;
            }
            let coeff = field.mul(c, &field.from_i64(e as i64));
            out.add_term(m.with_x(i, e - 1), coeff);
        }
        out
    }

    /// Evaluates a parameter-free polynomial at a point of the base field.
    pub fn eval(&self, point: &[Value]) -> Result<Value> {
        if self.involves_t() {
            return Err(Error::ParameterPresent);
        }
        if point.len() != self.nvars {
            return Err(Error::DimensionMismatch { expected: self.nvars, found: point.len() });
        }
        let field = &self.ring.field;
        let mut acc = field.zero();
        for (m, c) in &self.terms {
            let mut term = c.clone();
            for (i, v) in point.iter().enumerate() {
                if m.x[i] > 0 {
                    term = field.mul(&term, &field.pow(v, m.x[i] as u64));
                }
            }
            field.add_assign(&mut acc, &term);
        }
        Ok(acc)
    }

    /// Substitutes `x_i -> images[i]` and optionally `t -> t_image`.
    pub fn substitute(&self, images: &[MultiPoly], t_image: Option<&MultiPoly>) -> Result<MultiPoly> {
        Substitution::new(images, t_image, self.ring.kind)?.apply(self)
    }

    /// Replaces `t` by the scalar `t0`; the result is parameter-free.
    pub fn specialize_t(&self, t0: &Value) -> Result<MultiPoly> {
        let field = &self.ring.field;
        let ring = ParamRing::base(field.clone());
        let mut out = MultiPoly::zero(&ring, self.nvars);
        let zero = field.is_zero(t0);
        for (m, c) in &self.terms {
            let factor = if m.t == 0 {
                field.one()
            } else if zero {
                if m.t < 0 {
                    return Err(Error::NegativeTPower);
                }
                continue;
            } else {
                field.powi(t0, m.t as i64)?
            };
            out.add_term(m.x_part(), field.mul(c, &factor));
        }
        Ok(out)
    }

    /// Replaces `t` by `t^a`; `a = 0` substitutes `t = 1`.
    pub fn t_to_power(&self, a: u32) -> MultiPoly {
        if a == 0 {
            return self.specialize_t(&self.ring.field.one()).unwrap().promote(self.ring.kind).unwrap();
        }
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        for (m, c) in &self.terms {
            out.add_term(Mono { t: m.t * a as i32, ..*m }, c.clone());
        }
        out
    }

    /// Decomposition `p = sum_{j,m} q_{j,m} t^j` with `q_{j,m}` free of `t` and
    /// homogeneous of `x`-degree `m`. Keys are `(j, m)`.
    pub fn bigraded_parts(&self) -> BTreeMap<(i32, u32), MultiPoly> {
        let base = self.ring.with_kind(ParamKind::NoParam);
        let mut out: BTreeMap<(i32, u32), MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry((m.t, m.deg))
                .or_insert_with(|| MultiPoly::zero(&base, self.nvars))
                .add_term(m.x_part(), c.clone());
        }
        out
    }

    /// Inverse of [`MultiPoly::bigraded_parts`].
    pub fn from_bigraded(ring: &ParamRing, nvars: usize, parts: &BTreeMap<(i32, u32), MultiPoly>) -> MultiPoly {
        let mut out = MultiPoly::zero(ring, nvars);
        for ((j, _), q) in parts {
            for (m, c) in &q.terms {
                out.add_term(Mono { t: *j, ..*m }, c.clone());
            }
        }
        out
    }

    /// Inverse of a unit `c * t^k`, if the polynomial is one in its ring.
    pub fn unit_inverse(&self) -> Option<MultiPoly> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if m.deg != 0 || (m.t != 0 && self.ring.kind != ParamKind::LaurentT) {
            return None;
        }
        let inv = self.ring.field.inv(c).ok()?;
        Some(MultiPoly::monomial(&self.ring, self.nvars, Mono::t_pow(-m.t), inv))
    }
}

/// Reusable substitution with cached powers of the images.
pub struct Substitution<'a> {
    images: Vec<MultiPoly>,
    t_image: Option<&'a MultiPoly>,
    ring: ParamRing,
    nvars: usize,
    powers: Vec<Vec<MultiPoly>>,
    t_powers: Vec<MultiPoly>,
    t_inv_powers: Vec<MultiPoly>,
    /// Integer forms of the powers of the last image, for rational fields.
    int_powers: Vec<Option<(Vec<(Mono, BigInt)>, BigInt)>>,
    max_deg: u32,
}

impl<'a> Substitution<'a> {
    /// `source_kind` is the parameter kind of the polynomials to be substituted
    /// into; it matters only when `t` is left alone.
    pub fn new(images: &[MultiPoly], t_image: Option<&'a MultiPoly>, source_kind: ParamKind) -> Result<Self> {
        let first = images.first().ok_or(Error::DimensionMismatch { expected: 1, found: 0 })?;
        let nvars = first.nvars;
        let mut ring = first.ring.clone();
        for img in images.iter().chain(t_image) {
            if img.nvars != nvars {
                return Err(Error::RingMismatch("images have different numbers of variables".into()));
            }
            ring = ring.join(&img.ring).map_err(|e| Error::RingMismatch(e.to_string()))?;
        }
        if t_image.is_none() && source_kind != ParamKind::NoParam {
            ring = ring.with_kind(ring.kind.max(source_kind));
        }
        let images: Vec<MultiPoly> = images.iter().map(|p| p.promote(ring.kind)).collect::<Result<_>>()?;
        Ok(Substitution {
            powers: images.iter().map(|_| Vec::new()).collect(),
            images,
            t_image,
            nvars,
            t_powers: Vec::new(),
            t_inv_powers: Vec::new(),
            int_powers: Vec::new(),
            ring,
            max_deg: u32::MAX,
        })
    }

    /// Discards every term of `x`-degree above `max_deg` in the results.
    pub fn truncated(mut self, max_deg: u32) -> Self {
        self.max_deg = max_deg;
        self
    }

    pub fn ring(&self) -> &ParamRing {
        &self.ring
    }

    fn power(&mut self, i: usize, e: usize) -> &MultiPoly {
        let cache = &mut self.powers[i];
        if cache.is_empty() {
            cache.push(MultiPoly::one(&self.ring, self.nvars));
        }
        while cache.len() <= e {
            let next = cache[cache.len() - 1].mul_truncated(&self.images[i], self.max_deg).unwrap();
            cache.push(next);
        }
        &cache[e]
    }

    fn t_power(&mut self, e: i32) -> Result<MultiPoly> {
        let img = match self.t_image {
            Some(img) => img.promote(self.ring.kind)?,
            None => return Ok(MultiPoly::monomial(&self.ring, self.nvars, Mono::t_pow(e), self.ring.field.one())),
        };
        let (cache, base) = if e >= 0 {
            (&mut self.t_powers, img)
        } else {
            let inv = img.unit_inverse().ok_or(Error::NegativeTPower)?;
            (&mut self.t_inv_powers, inv)
        };
        let e = e.unsigned_abs() as usize;
        if cache.is_empty() {
            cache.push(MultiPoly::one(&self.ring, self.nvars));
        }
        while cache.len() <= e {
            let next = &cache[cache.len() - 1] * &base;
            cache.push(next);
        }
        Ok(cache[e].clone())
    }

    pub fn apply(&mut self, p: &MultiPoly) -> Result<MultiPoly> {
        if p.nvars != self.images.len() {
            return Err(Error::DimensionMismatch { expected: p.nvars, found: self.images.len() });
        }
        if p.ring.field != self.ring.field {
            return Err(Error::RingMismatch(format!("{} vs {}", p.ring, self.ring)));
        }
        if self.t_image.is_none() && p.ring.kind > self.ring.kind && p.involves_t() {
            return Err(Error::RingMismatch(format!("{} does not embed in {}", p.ring, self.ring)));
        }
        if self.t_image.is_none() && self.images.iter().all(|img| img.terms.len() == 1) {
            return self.apply_monomial(p);
        }
        let mut terms: Vec<(Mono, Value)> = p.terms.iter().map(|(m, c)| (*m, c.clone())).collect();
        terms.sort_by(|a, b| (a.0.x, a.0.t).cmp(&(b.0.x, b.0.t)));
        self.nested(0, &terms)
    }

    // Every image is a single term: map term by term.
    fn apply_monomial(&self, p: &MultiPoly) -> Result<MultiPoly> {
        let field = &self.ring.field;
        let images: Vec<(&Mono, &Value)> = self.images.iter().map(|img| img.terms.iter().next().unwrap()).collect();
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        for (m, c) in &p.terms {
            let mut mono = Mono::t_pow(m.t);
            let mut coef = c.clone();
            for (k, (im, ic)) in images.iter().enumerate() {
                let e = m.x[k];
                if e == 0 {
                    continue;
                }
                for _ in 0..e {
                    mono = mono.times(im);
                }
                coef = field.mul(&coef, &field.pow(ic, e as u64));
            }
            if mono.deg > self.max_deg {
                continue;
            }
            if mono.t < 0 && self.ring.kind != ParamKind::LaurentT {
                return Err(Error::NegativeTPower);
            }
            out.add_term(mono, coef);
        }
        Ok(out)
    }

    // The sum of `c * t^j * images[k]^e` over the terms, accumulated over a
    // common denominator.
    fn combine_rational(&mut self, k: usize, terms: &[(Mono, Value)]) -> Result<MultiPoly> {
        let mut parts = Vec::with_capacity(terms.len());
        let mut den = BigInt::one();
        for (m, c) in terms {
            if (m.t < 0 && self.ring.kind != ParamKind::LaurentT) || (m.t > 0 && self.ring.kind == ParamKind::NoParam) {
                return Err(Error::NegativeTPower);
            }
            let Value::Q(c) = c else { unreachable!() };
            let e = m.x[k] as usize;
            self.power(k, e);
            while self.int_powers.len() <= e {
                self.int_powers.push(None);
            }
            if self.int_powers[e].is_none() {
                self.int_powers[e] = Some(integral(&self.powers[k][e]));
            }
            let pden = &self.int_powers[e].as_ref().unwrap().1;
            let d = c.denom() * pden;
            den = den.lcm(&d);
            parts.push((e, Mono::t_pow(m.t), c.numer().clone(), d));
        }
        let mut acc: FxHashMap<Mono, BigInt> = FxHashMap::default();
        for (e, shift, num, d) in parts {
            let factor = num * (&den / d);
            for (pm, pv) in &self.int_powers[e].as_ref().unwrap().0 {
                let prod = pv * &factor;
                match acc.entry(pm.times(&shift)) {
                    Entry::Occupied(mut slot) => *slot.get_mut() += prod,
                    Entry::Vacant(slot) => {
                        slot.insert(prod);
                    }
                }
            }
        }
        let mut out = MultiPoly::zero(&self.ring, self.nvars);
        out.terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| (m, Value::Q(BigRational::new(c, den.clone()))))
            .collect();
        Ok(out)
    }

    // Horner-style grouping: terms sharing the exponent of x_k share the
    // multiplication by the cached power of the k-th image.
    fn nested(&mut self, k: usize, terms: &[(Mono, Value)]) -> Result<MultiPoly> {
        let mut acc = MultiPoly::zero(&self.ring, self.nvars);
        if k == self.images.len() {
            for (m, c) in terms {
                let tp = self.t_power(m.t)?;
                if !acc.admits_all(&tp) {
                    return Err(Error::NegativeTPower);
                }
                acc = &acc + &tp.scale(c);
            }
            return Ok(acc);
        }
        // Last variable: a linear combination of cached powers, no products.
        if k + 1 == self.images.len() && self.t_image.is_none() {
            let field = self.ring.field.clone();
            if field.is_rationals() {
                return self.combine_rational(k, terms);
            }
            for (m, c) in terms {
                let shift = Mono::t_pow(m.t);
                if !acc.admits(&shift) {
                    return Err(Error::NegativeTPower);
                }
                for (pm, pv) in &self.power(k, m.x[k] as usize).terms {
                    acc.add_term(pm.times(&shift), field.mul(pv, c));
                }
            }
            return Ok(acc);
        }
        // Horner in the k-th image: only ever multiply by (powers of) the
        // image itself, never two large intermediate results together.
        let mut groups = Vec::new();
        let mut start = 0;
        while start < terms.len() {
            let e = terms[start].0.x[k];
            let mut end = start;
            while end < terms.len() && terms[end].0.x[k] == e {
                end += 1;
            }
            groups.push((e, start, end));
            start = end;
        }
        let mut prev: Option<u16> = None;
        for &(e, s, t) in groups.iter().rev() {
            if let Some(p) = prev {
                let max_deg = self.max_deg;
                acc = acc.mul_truncated(self.power(k, (p - e) as usize), max_deg)?;
            }
            let inner = self.nested(k + 1, &terms[s..t])?;
            acc = &acc + &inner;
            prev = Some(e);
        }
        if let Some(p) = prev.filter(|&p| p > 0) {
            let max_deg = self.max_deg;
            acc = acc.mul_truncated(self.power(k, p as usize), max_deg)?;
        }
        Ok(acc)
    }
}

impl MultiPoly {
    fn admits_all(&self, other: &MultiPoly) -> bool {
        other.terms.keys().all(|m| self.admits(m))
    }
}

/// Integer numerators over the least common denominator.
fn integral(p: &MultiPoly) -> (Vec<(Mono, BigInt)>, BigInt) {
    let den = p.terms.values().fold(BigInt::one(), |acc, v| match v {
        Value::Q(x) => acc.lcm(x.denom()),
        Value::F(_) => unreachable!(),
    });
    let terms = p
        .terms
        .iter()
        .map(|(m, v)| match v {
            Value::Q(x) => (*m, x.numer() * (&den / x.denom())),
            Value::F(_) => unreachable!(),
        })
        .collect();
    (terms, den)
}

fn mul_rational(a: &MultiPoly, b: &MultiPoly, max_deg: u32) -> BTreeMap<Mono, Value> {
    // Multiply integer numerators over a common denominator so that the inner
    // loop never normalises fractions.
    let (ta, da) = integral(a);
    let (tb, db) = integral(b);
    let mut acc: FxHashMap<Mono, BigInt> = FxHashMap::with_capacity_and_hasher((ta.len() * tb.len() / 2 + 1).min(1 << 16), Default::default());
    for (m1, c1) in &ta {
        for (m2, c2) in tb.iter().take_while(|(m2, _)| m1.deg + m2.deg <= max_deg) {
            let prod = c1 * c2;
            match acc.entry(m1.times(m2)) {
                Entry::Occupied(mut e) => *e.get_mut() += prod,
                Entry::Vacant(e) => {
                    e.insert(prod);
                }
            }
        }
    }
    let den = da * db;
    acc.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(m, c)| (m, Value::Q(BigRational::new(c, den.clone()))))
        .collect()
}

fn mul_finite(field: &Field, a: &MultiPoly, b: &MultiPoly, max_deg: u32) -> BTreeMap<Mono, Value> {
    let code = |v: &Value| match v {
        Value::F(x) => *x,
        Value::Q(_) => unreachable!(),
    };
    let mut acc: FxHashMap<Mono, u32> = FxHashMap::with_capacity_and_hasher((a.len() * b.len() / 2 + 1).min(1 << 16), Default::default());
    for (m1, c1) in &a.terms {
        let c1 = code(c1);
        for (m2, c2) in b.terms.iter().take_while(|(m2, _)| m1.deg + m2.deg <= max_deg) {
            let prod = field.mul_codes(c1, code(c2));
            let slot = acc.entry(m1.times(m2)).or_insert(0);
            *slot = field.add_codes(*slot, prod);
        }
    }
    acc.into_iter().filter(|(_, c)| *c != 0).map(|(m, c)| (m, Value::F(c))).collect()
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_add(rhs).expect("polynomial ring mismatch")
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_sub(rhs).expect("polynomial ring mismatch")
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.checked_mul(rhs).expect("polynomial ring mismatch")
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.neg_ref()
    }
}

#[derive(Debug, Clone)]
pub enum PolyOperand<'a> {
    Poly(&'a MultiPoly),
    Scalar(&'a Scalar),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Mul,
    ScalarMul,
    Neg,
}

/// Dispatching entry point mirroring the scalar one.
pub fn poly_arith(op: PolyOp, p: &MultiPoly, q: Option<PolyOperand<'_>>) -> Result<MultiPoly> {
    let missing = || Error::Syntax { pos: 0, msg: "missing operand".into() };
    match (op, q) {
        (PolyOp::Neg, _) => Ok(-p),
        (PolyOp::Add, Some(PolyOperand::Poly(q))) => p.checked_add(q),
        (PolyOp::Mul, Some(PolyOperand::Poly(q))) => p.checked_mul(q),
        (PolyOp::ScalarMul, Some(PolyOperand::Scalar(s))) => {
            if s.field != *p.field() {
                return Err(Error::RingMismatch(format!("{} scalar on {} polynomial", s.field, p.ring)));
            }
            Ok(p.scale(&s.value))
        }
        _ => Err(missing()),
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        parse::write_poly(self, f)
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.ring)
    }
}

impl serde::Serialize for MultiPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
