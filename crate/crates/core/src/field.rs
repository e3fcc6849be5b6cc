//! Exact coefficient fields: the rationals and finite fields `GF(p^r)`.
//!
//! A [`Field`] is a cheap shared handle to a [`FieldDesc`]. Field elements are
//! stored as bare [`Value`]s and all arithmetic goes through the field handle,
//! so polynomials do not carry one handle per coefficient. [`Scalar`] pairs a
//! value with its field for the public API.
//!
//! Elements of `GF(p^r)` are residue polynomials modulo a fixed monic
//! irreducible of degree `r`, encoded as the integer `c_0 + c_1 p + ... `.
//! The modulus is the smallest such polynomial in the lexicographic order of
//! its coefficient list `[c_{r-1}, ..., c_0]`, so encodings are reproducible.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported finite field cardinality.
pub const MAX_CARDINALITY: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    Rationals,
    FiniteField,
}

#[derive(Debug)]
pub struct FieldDesc {
    p: u32,
    r: u32,
    q: u32,
    /// Coefficients of the modulus, lowest degree first, leading 1 included.
    /// Empty for the rationals and for prime fields.
    modulus: Vec<u32>,
    /// Discrete log tables for `r > 1`.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl FieldDesc {
    pub fn kind(&self) -> FieldKind {
        if self.p == 0 {
            FieldKind::Rationals
        } else {
            FieldKind::FiniteField
        }
    }
}

/// Shared handle to a field description.
#[derive(Clone)]
pub struct Field(Arc<FieldDesc>);

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.p == other.0.p && self.0.r == other.0.r)
    }
}
impl Eq for Field {}

impl Hash for Field {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.p.hash(state);
        self.0.r.hash(state);
    }
}

/// A field element without its field. Only meaningful together with a [`Field`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Q(BigRational),
    F(u32),
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

// Dense polynomials over GF(p), lowest degree first, used for the modulus
// search and for multiplication in GF(p^r).

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut a = a.to_vec();
    trim(&mut a);
    let dm = m.len() - 1;
    let lead_inv = inv_mod(m[dm], p);
    while a.len() > dm {
        let da = a.len() - 1;
        let c = (a[da] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &mi) in m.iter().enumerate() {
            let idx = da - dm + i;
            a[idx] = ((a[idx] as u64 + (p - c) as u64 * mi as u64) % p as u64) as u32;
        }
        trim(&mut a);
    }
    a
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let e = (a as i64).extended_gcd(&(p as i64));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(p as i64) as u32
}

/// Digits of `code` in base `p`, lowest first, exactly `r` of them.
fn digits(code: u32, p: u32, r: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(r as usize);
    let mut c = code;
    for _ in 0..r {
        out.push(c % p);
        c /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn is_irreducible(m: &[u32], p: u32) -> bool {
    let r = m.len() - 1;
    for d in 1..=r / 2 {
        // every monic polynomial of degree d
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut f = digits(low as u32, p, d as u32);
            f.push(1);
            if poly_rem(m, &f, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn lowest_irreducible(p: u32, r: u32) -> Vec<u32> {
    // Counting up the code of the lower coefficients walks [c_{r-1},...,c_0]
    // in lexicographic order.
    let count = (p as u64).pow(r);
    for low in 0..count {
        let mut m = digits(low as u32, p, r);
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("an irreducible polynomial of every degree exists")
}

fn mul_mod_poly(a: u32, b: u32, p: u32, r: u32, modulus: &[u32]) -> u32 {
    let da = digits(a, p, r);
    let db = digits(b, p, r);
    let mut prod = vec![0u32; 2 * r as usize];
    for (i, &x) in da.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in db.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    let mut rem = poly_rem(&prod, modulus, p);
    rem.resize(r as usize, 0);
    undigits(&rem, p)
}

impl Field {
    pub fn rationals() -> Field {
        Field(Arc::new(FieldDesc { p: 0, r: 1, q: 0, modulus: vec![], exp: vec![], log: vec![] }))
    }

    /// Builds `QQ` for `p = 0` or `GF(p^r)` otherwise.
    pub fn make(p: u64, r: u32) -> Result<Field> {
        if r == 0 {
            return Err(Error::InvalidDegree(r));
        }
        if p == 0 {
            if r != 1 {
                return Err(Error::InvalidDegree(r));
            }
            return Ok(Field::rationals());
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let q = (p as u128).checked_pow(r).unwrap_or(u128::MAX);
        if q > MAX_CARDINALITY as u128 {
            return Err(Error::CardinalityTooLarge { p, r });
        }
        let (p, q) = (p as u32, q as u32);
        if r == 1 {
            return Ok(Field(Arc::new(FieldDesc { p, r, q, modulus: vec![], exp: vec![], log: vec![] })));
        }
        let modulus = lowest_irreducible(p, r);
        let (exp, log) = Self::log_tables(p, r, q, &modulus);
        Ok(Field(Arc::new(FieldDesc { p, r, q, modulus, exp, log })))
    }

    pub fn finite(p: u64, r: u32) -> Result<Field> {
        if p == 0 {
            return Err(Error::NotPrime(0));
        }
        Field::make(p, r)
    }

    fn log_tables(p: u32, r: u32, q: u32, modulus: &[u32]) -> (Vec<u32>, Vec<u32>) {
        let order = q - 1;
        for g in 2..q {
            let mut exp = Vec::with_capacity(order as usize);
            let mut x = 1u32;
            let mut primitive = true;
            for k in 0..order {
                if k > 0 && x == 1 {
                    primitive = false;
                    break;
                }
                exp.push(x);
                x = mul_mod_poly(x, g, p, r, modulus);
            }
            if primitive && x == 1 {
                let mut log = vec![0u32; q as usize];
                for (k, &e) in exp.iter().enumerate() {
                    log[e as usize] = k as u32;
                }
                return (exp, log);
            }
        }
        unreachable!("the multiplicative group of a finite field is cyclic")
    }

    pub fn desc(&self) -> &FieldDesc {
        &self.0
    }

    pub fn kind(&self) -> FieldKind {
        self.0.kind()
    }

    pub fn is_rationals(&self) -> bool {
        self.0.p == 0
    }

    pub fn is_finite(&self) -> bool {
        self.0.p != 0
    }

    /// Characteristic (0 for the rationals).
    pub fn characteristic(&self) -> u64 {
        self.0.p as u64
    }

    pub fn degree(&self) -> u32 {
        self.0.r
    }

    /// Number of elements, `None` for the rationals.
    pub fn cardinality(&self) -> Option<u64> {
        if self.is_finite() {
            Some(self.0.q as u64)
        } else {
            None
        }
    }

    /// Modulus coefficients `[c_r = 1, c_{r-1}, ..., c_0]`, highest degree first.
    pub fn modulus(&self) -> Option<Vec<u32>> {
        if self.0.modulus.is_empty() {
            None
        } else {
            Some(self.0.modulus.iter().rev().copied().collect())
        }
    }

    pub fn zero(&self) -> Value {
        if self.is_rationals() {
            Value::Q(BigRational::zero())
        } else {
            Value::F(0)
        }
    }

    pub fn one(&self) -> Value {
        if self.is_rationals() {
            Value::Q(BigRational::one())
        } else {
            Value::F(1)
        }
    }

    pub fn from_i64(&self, n: i64) -> Value {
        if self.is_rationals() {
            Value::Q(BigRational::from_integer(BigInt::from(n)))
        } else {
            Value::F(n.rem_euclid(self.0.p as i64) as u32)
        }
    }

    pub fn from_ratio(&self, num: i64, den: i64) -> Result<Value> {
        let d = self.from_i64(den);
        let inv = self.inv(&d)?;
        Ok(self.mul(&self.from_i64(num), &inv))
    }

    /// Element of `GF(q)` with the given code; panics over the rationals.
    pub fn element(&self, code: u32) -> Value {
        assert!(self.is_finite() && code < self.0.q, "code out of range");
        Value::F(code)
    }

    /// All elements in canonical order (codes `0..q`).
    pub fn elements(&self) -> Vec<Value> {
        assert!(self.is_finite(), "the rationals cannot be enumerated");
        (0..self.0.q).map(Value::F).collect()
    }

    pub fn is_zero(&self, a: &Value) -> bool {
        match a {
            Value::Q(x) => x.is_zero(),
            Value::F(x) => *x == 0,
        }
    }

    pub fn is_one(&self, a: &Value) -> bool {
        match a {
            Value::Q(x) => x.is_one(),
            Value::F(x) => *x == 1,
        }
    }

    pub fn add(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Q(x), Value::Q(y)) => Value::Q(x + y),
            (Value::F(x), Value::F(y)) => Value::F(self.add_codes(*x, *y)),
            _ => panic!("mixed value kinds"),
        }
    }

    pub fn add_assign(&self, a: &mut Value, b: &Value) {
        match (a, b) {
            (Value::Q(x), Value::Q(y)) => *x += y,
            (Value::F(x), Value::F(y)) => *x = self.add_codes(*x, *y),
            _ => panic!("mixed value kinds"),
        }
    }

    pub(crate) fn add_codes(&self, x: u32, y: u32) -> u32 {
        let d = &self.0;
        if d.r == 1 {
            (x + y) % d.p
        } else if d.p == 2 {
            x ^ y
        } else {
            let (mut x, mut y, mut out, mut place) = (x, y, 0, 1);
            for _ in 0..d.r {
                out += ((x % d.p + y % d.p) % d.p) * place;
                x /= d.p;
                y /= d.p;
                place *= d.p;
            }
            out
        }
    }

    pub fn neg(&self, a: &Value) -> Value {
        match a {
            Value::Q(x) => Value::Q(-x),
            Value::F(x) => {
                let d = &self.0;
                if d.p == 2 || *x == 0 {
                    Value::F(*x)
                } else if d.r == 1 {
                    Value::F(d.p - x)
                } else {
                    let ds: Vec<u32> = digits(*x, d.p, d.r).into_iter().map(|c| (d.p - c) % d.p).collect();
                    Value::F(undigits(&ds, d.p))
                }
            }
        }
    }

    pub fn sub(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Q(x), Value::Q(y)) => Value::Q(x - y),
            _ => self.add(a, &self.neg(b)),
        }
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Value {
        match (a, b) {
            (Value::Q(x), Value::Q(y)) => Value::Q(x * y),
            (Value::F(x), Value::F(y)) => Value::F(self.mul_codes(*x, *y)),
            _ => panic!("mixed value kinds"),
        }
    }

    pub(crate) fn mul_codes(&self, x: u32, y: u32) -> u32 {
        let d = &self.0;
        if x == 0 || y == 0 {
            0
        } else if d.r == 1 {
            ((x as u64 * y as u64) % d.p as u64) as u32
        } else {
            let k = (d.log[x as usize] as u64 + d.log[y as usize] as u64) % (d.q as u64 - 1);
            d.exp[k as usize]
        }
    }

    pub fn inv(&self, a: &Value) -> Result<Value> {
        if self.is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        Ok(match a {
            Value::Q(x) => Value::Q(x.recip()),
            Value::F(x) => {
                let d = &self.0;
                if d.r == 1 {
                    Value::F(inv_mod(*x, d.p))
                } else {
                    let k = (d.q - 1 - d.log[*x as usize]) % (d.q - 1);
                    Value::F(d.exp[k as usize])
                }
            }
        })
    }

    pub fn div(&self, a: &Value, b: &Value) -> Result<Value> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Value, e: u64) -> Value {
        let mut base = a.clone();
        let mut acc = self.one();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// Integer power allowing negative exponents.
    pub fn powi(&self, a: &Value, e: i64) -> Result<Value> {
        if e >= 0 {
            Ok(self.pow(a, e as u64))
        } else {
            Ok(self.pow(&self.inv(a)?, e.unsigned_abs()))
        }
    }

    /// Integer value of a rational or prime-field element, if it has one.
    pub fn as_integer(&self, a: &Value) -> Option<i64> {
        match a {
            Value::Q(x) if x.is_integer() => x.to_integer().to_i64(),
            Value::F(x) if *x < self.0.p => Some(*x as i64),
            _ => None,
        }
    }

    pub fn parse_value(&self, text: &str) -> Result<Value> {
        let s = text.trim();
        let bad = |msg: &str| Error::Syntax { pos: 0, msg: format!("{msg}: `{s}`") };
        if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            if self.is_rationals() {
                return Err(bad("coefficient lists are only valid over finite fields"));
            }
            let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
            if parts.len() != self.0.r as usize {
                return Err(bad("coefficient list length must equal the extension degree"));
            }
            let mut ds = Vec::with_capacity(parts.len());
            for part in parts.iter().rev() {
                let c: i64 = part.parse().map_err(|_| bad("bad coefficient"))?;
                ds.push(c.rem_euclid(self.0.p as i64) as u32);
            }
            return Ok(Value::F(undigits(&ds, self.0.p)));
        }
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (s, None),
        };
        let num: BigInt = num.parse().map_err(|_| bad("bad integer"))?;
        let den: BigInt = match den {
            Some(d) => d.parse().map_err(|_| bad("bad integer"))?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.is_rationals() {
            Ok(Value::Q(BigRational::new(num, den)))
        } else {
            let p = BigInt::from(self.0.p);
            let n = num.mod_floor(&p).to_i64().unwrap();
            let d = den.mod_floor(&p).to_i64().unwrap();
            self.from_ratio(n, d)
        }
    }

    pub fn format_value(&self, a: &Value) -> String {
        match a {
            Value::Q(x) => {
                if x.is_integer() {
                    x.numer().to_string()
                } else {
                    format!("{}/{}", x.numer(), x.denom())
                }
            }
            Value::F(x) => {
                let d = &self.0;
                if *x < d.p {
                    x.to_string()
                } else {
                    let ds = digits(*x, d.p, d.r);
                    let parts: Vec<String> = ds.iter().rev().map(u32::to_string).collect();
                    format!("[{}]", parts.join(","))
                }
            }
        }
    }

    /// True when the value is a negative rational (used for sign-aware printing).
    pub fn is_negative(&self, a: &Value) -> bool {
        matches!(a, Value::Q(x) if x.is_negative())
    }

    pub fn scalar(&self, value: Value) -> Scalar {
        Scalar { field: self.clone(), value }
    }

    pub fn int(&self, n: i64) -> Scalar {
        self.scalar(self.from_i64(n))
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.0;
        match (d.p, d.r) {
            (0, _) => write!(f, "QQ"),
            (p, 1) => write!(f, "GF({p})"),
            (p, r) => write!(f, "GF({p}^{r})"),
        }
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Field {
    type Err = Error;

    /// Accepts `QQ`, `GF(p)`, `GF(p^r)` and `GF(q)` with `q` a prime power.
    fn from_str(s: &str) -> Result<Field> {
        let s = s.trim();
        let bad = || Error::Syntax { pos: 0, msg: format!("unknown field `{s}`") };
        if s == "QQ" || s == "Q" {
            return Ok(Field::rationals());
        }
        let inner = s
            .strip_prefix("GF(")
            .or_else(|| s.strip_prefix("F("))
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        if let Some((p, r)) = inner.split_once('^') {
            let p: u64 = p.trim().parse().map_err(|_| bad())?;
            let r: u32 = r.trim().parse().map_err(|_| bad())?;
            return Field::finite(p, r);
        }
        let q: u64 = inner.trim().parse().map_err(|_| bad())?;
        if q < 2 {
            return Err(Error::NotPrime(q));
        }
        let p = (2..=q).find(|d| q % d == 0).unwrap();
        let mut r = 0;
        let mut m = q;
        while m % p == 0 {
            m /= p;
            r += 1;
        }
        if m != 1 {
            return Err(Error::NotPrime(q));
        }
        Field::finite(p, r)
    }
}

/// A field element together with its field.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    pub field: Field,
    pub value: Value,
}

impl Scalar {
    pub fn parse(field: &Field, text: &str) -> Result<Scalar> {
        Ok(field.scalar(field.parse_value(text)?))
    }

    fn check(&self, other: &Scalar) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero(&self.value)
    }

    pub fn add(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(self.field.scalar(self.field.add(&self.value, &other.value)))
    }

    pub fn sub(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(self.field.scalar(self.field.sub(&self.value, &other.value)))
    }

    pub fn mul(&self, other: &Scalar) -> Result<Scalar> {
        self.check(other)?;
        Ok(self.field.scalar(self.field.mul(&self.value, &other.value)))
    }

    pub fn neg(&self) -> Scalar {
        self.field.scalar(self.field.neg(&self.value))
    }

    pub fn inv(&self) -> Result<Scalar> {
        Ok(self.field.scalar(self.field.inv(&self.value)?))
    }

    pub fn pow(&self, e: u64) -> Scalar {
        self.field.scalar(self.field.pow(&self.value, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarOp {
    Add,
    Mul,
    Neg,
    Inv,
}

/// Single entry point for scalar arithmetic; `b` is required for the binary ops.
pub fn scalar_arith(op: ScalarOp, a: &Scalar, b: Option<&Scalar>) -> Result<Scalar> {
    let need_b = || b.ok_or_else(|| Error::Syntax { pos: 0, msg: "missing second operand".into() });
    match op {
        ScalarOp::Add => a.add(need_b()?),
        ScalarOp::Mul => a.mul(need_b()?),
        ScalarOp::Neg => Ok(a.neg()),
        ScalarOp::Inv => a.inv(),
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.field.format_value(&self.value))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.field)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Serialize for Field {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Field {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Field, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which parameter ring sits over the base field: `k`, `k[t]` or `k[t, 1/t]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    NoParam,
    PolyT,
    LaurentT,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParamRing {
    pub field: Field,
    pub kind: ParamKind,
}

impl ParamRing {
    pub fn new(field: Field, kind: ParamKind) -> Self {
        ParamRing { field, kind }
    }

    pub fn base(field: Field) -> Self {
        ParamRing { field, kind: ParamKind::NoParam }
    }

    pub fn with_kind(&self, kind: ParamKind) -> Self {
        ParamRing { field: self.field.clone(), kind }
    }

    pub fn has_param(&self) -> bool {
        self.kind != ParamKind::NoParam
    }

    /// Smallest ring containing both, if they share a base field.
    pub fn join(&self, other: &ParamRing) -> Result<ParamRing> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field.to_string(), other.field.to_string()));
        }
        Ok(self.with_kind(self.kind.max(other.kind)))
    }
}

impl fmt::Display for ParamRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ParamKind::NoParam => write!(f, "{}", self.field),
            ParamKind::PolyT => write!(f, "{}[t]", self.field),
            ParamKind::LaurentT => write!(f, "{}[t,1/t]", self.field),
        }
    }
}

impl fmt::Debug for ParamRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ParamRing {
    type Err = Error;

    fn from_str(s: &str) -> Result<ParamRing> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if let Some(base) = compact.strip_suffix("[t,1/t]").or_else(|| compact.strip_suffix("[t,t^-1]")) {
            return Ok(ParamRing::new(base.parse()?, ParamKind::LaurentT));
        }
        if let Some(base) = compact.strip_suffix("[t]") {
            return Ok(ParamRing::new(base.parse()?, ParamKind::PolyT));
        }
        Ok(ParamRing::base(compact.parse()?))
    }
}

impl Serialize for ParamRing {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn make_fields() {
        assert!(Field::make(0, 1).unwrap().is_rationals());
        let f2 = Field::make(2, 1).unwrap();
        assert_eq!(f2.cardinality(), Some(2));
        let f4 = Field::make(2, 2).unwrap();
        // x^2 + x + 1
        assert_eq!(f4.modulus(), Some(vec![1, 1, 1]));
        let f8 = Field::make(2, 3).unwrap();
        assert_eq!(f8.modulus(), Some(vec![1, 0, 1, 1]));
        let f9 = Field::make(3, 2).unwrap();
        // x^2 + 1 is the first irreducible quadratic over GF(3)
        assert_eq!(f9.modulus(), Some(vec![1, 0, 1]));
    }

    #[test]
    fn quadratic_modulus_over_f2_is_unique() {
        // exhaustive factor check over all four monic quadratics
        let irreducible: Vec<u32> = (0..4u32)
            .filter(|&low| {
                let mut m = digits(low, 2, 2);
                m.push(1);
                is_irreducible(&m, 2)
            })
            .collect();
        assert_eq!(irreducible, vec![3]);
    }

    #[test]
    fn make_errors() {
        assert_eq!(Field::make(4, 1), Err(Error::NotPrime(4)));
        assert_eq!(Field::make(2, 17), Err(Error::CardinalityTooLarge { p: 2, r: 17 }));
        assert!(Field::make(2, 16).is_ok());
        assert!(Field::make(0, 2).is_err());
        assert_eq!(Field::make(1, 1), Err(Error::NotPrime(1)));
    }

    #[test]
    fn scalar_examples() {
        let q = Field::rationals();
        let half = scalar_arith(ScalarOp::Inv, &q.int(2), None).unwrap();
        assert_eq!(half.to_string(), "1/2");

        let f2 = Field::make(2, 1).unwrap();
        let s = scalar_arith(ScalarOp::Add, &f2.int(1), Some(&f2.int(1))).unwrap();
        assert!(s.is_zero());

        let f4 = Field::make(2, 2).unwrap();
        let g = f4.scalar(f4.element(2)); // class of x
        let g2 = scalar_arith(ScalarOp::Mul, &g, Some(&g)).unwrap();
        let g_plus_1 = g.add(&f4.int(1)).unwrap();
        assert_eq!(g2, g_plus_1);
        assert_eq!(g2.to_string(), "[1,1]");
    }

    #[test]
    fn scalar_errors() {
        let q = Field::rationals();
        let f2 = Field::make(2, 1).unwrap();
        assert!(matches!(q.int(1).add(&f2.int(1)), Err(Error::FieldMismatch(..))));
        assert_eq!(q.int(0).inv(), Err(Error::DivisionByZero));
        assert_eq!(f2.int(0).inv(), Err(Error::DivisionByZero));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!("GF(2^2)".parse::<Field>().unwrap(), Field::make(2, 2).unwrap());
        assert_eq!("GF(9)".parse::<Field>().unwrap(), Field::make(3, 2).unwrap());
        assert_eq!("GF(5)".parse::<Field>().unwrap().to_string(), "GF(5)");
        assert!("GF(6)".parse::<Field>().is_err());
        let f9 = Field::make(3, 2).unwrap();
        let v = f9.parse_value("[2,1]").unwrap();
        assert_eq!(f9.format_value(&v), "[2,1]");
        let f5 = Field::make(5, 1).unwrap();
        assert_eq!(f5.format_value(&f5.parse_value("1/2").unwrap()), "3");
        assert_eq!(f5.format_value(&f5.parse_value("-1").unwrap()), "4");
        let q = Field::rationals();
        assert_eq!(q.format_value(&q.parse_value("6/-4").unwrap()), "-3/2");
        let r: ParamRing = "GF(2^2)[t]".parse().unwrap();
        assert_eq!(r.to_string(), "GF(2^2)[t]");
        let r: ParamRing = "QQ[t,1/t]".parse().unwrap();
        assert_eq!(r.kind, ParamKind::LaurentT);
    }

    fn small_fields() -> Vec<Field> {
        vec![
            Field::rationals(),
            Field::make(2, 1).unwrap(),
            Field::make(3, 1).unwrap(),
            Field::make(2, 2).unwrap(),
            Field::make(5, 1).unwrap(),
        ]
    }

    fn random_value(field: &Field, seed: u64) -> Value {
        match field.cardinality() {
            Some(q) => field.element((seed % q) as u32),
            None => {
                let n = (seed % 41) as i64 - 20;
                let d = (seed / 41 % 9) as i64 + 1;
                field.from_ratio(n, d).unwrap()
            }
        }
    }

    #[test]
    fn field_axioms_on_random_triples() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for field in small_fields() {
            for _ in 0..10_000 {
                let a = random_value(&field, rng.gen());
                let b = random_value(&field, rng.gen());
                let c = random_value(&field, rng.gen());
                let f = &field;
                assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
                assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
                assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
                assert_eq!(f.add(&a, &b), f.add(&b, &a));
                assert_eq!(f.mul(&a, &b), f.mul(&b, &a));
                assert!(f.is_zero(&f.add(&a, &f.neg(&a))));
                if !f.is_zero(&a) {
                    assert!(f.is_one(&f.mul(&a, &f.inv(&a).unwrap())));
                }
            }
        }
    }

    #[test]
    fn frobenius_fixes_every_element() {
        for (p, r) in [(2, 1), (3, 1), (2, 2), (5, 1), (2, 3), (3, 2), (7, 2), (2, 8)] {
            let f = Field::make(p, r).unwrap();
            let q = f.cardinality().unwrap();
            for a in f.elements() {
                assert_eq!(f.pow(&a, q), a);
            }
        }
    }

    proptest! {
        #[test]
        fn canonical_form_is_idempotent(n in -1000i64..1000, d in 1i64..1000) {
            let q = Field::rationals();
            let v = q.from_ratio(n, d).unwrap();
            let text = q.format_value(&v);
            let again = q.parse_value(&text).unwrap();
            prop_assert_eq!(&again, &v);
            prop_assert_eq!(q.format_value(&again), text);
        }

        #[test]
        fn extension_codes_round_trip(code in 0u32..81) {
            let f = Field::make(3, 4).unwrap();
            let v = f.element(code);
            let text = f.format_value(&v);
            prop_assert_eq!(f.parse_value(&text).unwrap(), v);
        }
    }
}
