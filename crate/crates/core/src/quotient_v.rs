//! The subspace `V ⊆ GF(q)[x]` spanned by `s - a s(ax + b)`, membership in
//! it, and the homomorphism `ρ: SAut(A^2) → GF(q)[x]/V`.
//!
//! Everything is expressed in the basis `m_{i,j} = x^i R^j` with
//! `R = x^q - x`, `0 <= i < q`. Since `R(ax + b) = aR`, each generator
//! `m_{i,j} - a m_{i,j}(ax + b) = (x^i - a^{j+1} (ax + b)^i) R^j` lies in
//! stratum `j`, so `V` is the direct sum of its strata and membership is
//! decided stratum by stratum. Stratum `j` only depends on `j mod (q - 1)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::endo::Endo;
use crate::error::{Error, Result};
use crate::field::{Field, ParamRing, Value};
use crate::finite_action::permutation_of;
use crate::linalg::Echelon;
use crate::poly::{Mono, MultiPoly};
use crate::tame::{jvdk_decompose, saut_normalize_word, TameFactor};

/// A generator `m_{i,j} - a m_{i,j}(ax + b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VGenerator {
    pub i: usize,
    pub j: usize,
    pub a: Value,
    pub b: Value,
}

/// Row-reduced generators of one stratum.
pub struct Stratum {
    echelon: Echelon,
    gens: Vec<(usize, Value, Value)>,
}

type Key = (u64, u32, usize);

fn cache() -> &'static RwLock<HashMap<Key, Arc<Stratum>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<Stratum>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn field_size(field: &Field) -> Result<usize> {
    field.cardinality().map(|q| q as usize).ok_or(Error::FiniteFieldRequired)
}

/// `C(n, k) mod p` by Lucas' theorem.
fn binomial_mod(n: usize, k: usize, p: usize) -> u64 {
    let (mut n, mut k, mut out) = (n, k, 1u64);
    while k > 0 || n > 0 {
        let (ni, ki) = (n % p, k % p);
        if ki > ni {
            return 0;
        }
        let mut c = 1u64;
        for t in 0..ki {
            c = c * ((ni - t) as u64) % p as u64;
            c = c * inv_mod((t + 1) as u64, p as u64) % p as u64;
        }
        out = out * c % p as u64;
        n /= p;
        k /= p;
    }
    out
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut e, mut base, mut acc) = (p - 2, a % p, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

/// Coordinates of the generator `(i, a, b)` in stratum `j`, on `m_{0,j}, ..., m_{q-1,j}`.
fn generator_row(field: &Field, q: usize, j: usize, i: usize, a: &Value, b: &Value) -> Vec<Value> {
    let p = field.characteristic() as usize;
    let aj = field.pow(a, j as u64 + 1);
    let mut row = vec![field.zero(); q];
    row[i] = field.one();
    for (u, slot) in row.iter_mut().enumerate().take(i + 1) {
        let c = field.from_i64(binomial_mod(i, u, p) as i64);
        let term = field.mul(&field.mul(&aj, &c), &field.mul(&field.pow(a, u as u64), &field.pow(b, (i - u) as u64)));
        *slot = field.sub(slot, &term);
    }
    row
}

/// The reduced generator set of stratum `j`, shared between calls.
pub fn stratum(field: &Field, j: usize) -> Result<Arc<Stratum>> {
    let q = field_size(field)?;
    let key = (field.characteristic(), field.degree(), j % (q - 1));
    if let Some(s) = cache().read().unwrap().get(&key) {
        return Ok(s.clone());
    }
    let els = field.elements();
    let mut gens = Vec::with_capacity(q * q * (q - 1));
    for i in 0..q {
        for a in els.iter().skip(1) {
            for b in &els {
                gens.push((i, a.clone(), b.clone()));
            }
        }
    }
    let mut echelon = Echelon::new(field, q, gens.len());
    for (k, (i, a, b)) in gens.iter().enumerate() {
        if echelon.rank() == q {
            break;
        }
        let mut unit = vec![field.zero(); gens.len()];
        unit[k] = field.one();
        echelon.insert(generator_row(field, q, key.2, *i, a, b), unit);
    }
    let s = Arc::new(Stratum { echelon, gens });
    cache().write().unwrap().entry(key).or_insert(s.clone());
    Ok(s)
}

/// Dense coefficients (ascending) of a polynomial in `x1` alone.
pub fn univariate(s: &MultiPoly) -> Result<Vec<Value>> {
    if s.involves_t() || (1..s.nvars()).any(|i| s.involves(i)) {
        return Err(Error::NotUnivariate);
    }
    let field = s.field();
    let d = s.degree().unwrap_or(0) as usize;
    let mut out = vec![field.zero(); d + 1];
    for (m, c) in s.terms() {
        out[m.x(0) as usize] = c.clone();
    }
    Ok(out)
}

fn from_univariate(field: &Field, c: &[Value]) -> MultiPoly {
    let ring = ParamRing::base(field.clone());
    let mut p = MultiPoly::zero(&ring, 1);
    for (e, v) in c.iter().enumerate() {
        if !field.is_zero(v) {
            p.add_term(Mono::new(&[e as u16], 0), v.clone());
        }
    }
    p
}

/// Coefficients on `m_{i,j}`, indexed `[j][i]`, by repeated division by `R`.
pub fn to_m_basis(s: &MultiPoly) -> Result<Vec<Vec<Value>>> {
    let field = s.field().clone();
    let q = field_size(&field)?;
    let mut rest = univariate(s)?;
    let mut strata = Vec::new();
    loop {
        // rest = quot * R + rem with deg rem < q
        let mut quot = vec![field.zero(); rest.len().saturating_sub(q)];
        for d in (q..rest.len()).rev() {
            let c = std::mem::replace(&mut rest[d], field.zero());
            if field.is_zero(&c) {
                continue;
            }
            quot[d - q] = c.clone();
            field.add_assign(&mut rest[d - q + 1], &c);
        }
        rest.resize(q, field.zero());
        strata.push(rest);
        if quot.iter().all(|c| field.is_zero(c)) {
            break;
        }
        rest = quot;
    }
    while strata.len() > 1 && strata.last().unwrap().iter().all(|c| field.is_zero(c)) {
        strata.pop();
    }
    Ok(strata)
}

/// Inverse of [`to_m_basis`].
pub fn from_m_basis(field: &Field, strata: &[Vec<Value>]) -> MultiPoly {
    let ring = ParamRing::base(field.clone());
    let q = field.cardinality().expect("finite field") as u32;
    let r = &MultiPoly::var(&ring, 1, 0).pow(q) - &MultiPoly::var(&ring, 1, 0);
    let mut out = MultiPoly::zero(&ring, 1);
    for coeffs in strata.iter().rev() {
        out = &(&out * &r) + &from_univariate(field, coeffs);
    }
    out
}

/// A class in `GF(q)[x]/V`, stored as its canonical remainder in the m-basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VClass {
    pub field: Field,
    pub strata: Vec<Vec<Value>>,
}

impl VClass {
    /// Drops trailing zero strata so equal classes compare equal.
    pub fn new(field: Field, mut strata: Vec<Vec<Value>>) -> VClass {
        while strata.len() > 1 && strata.last().unwrap().iter().all(|c| field.is_zero(c)) {
            strata.pop();
        }
        VClass { field, strata }
    }

    pub fn is_zero(&self) -> bool {
        self.strata.iter().flatten().all(|c| self.field.is_zero(c))
    }

    /// The representative polynomial `Σ r_{i,j} x^i R^j`.
    pub fn representative(&self) -> MultiPoly {
        from_m_basis(&self.field, &self.strata)
    }

    /// The image in `GF(q)[x]/(V + GF(q) x)`.
    pub fn modulo_x(&self) -> Result<VClass> {
        let q = field_size(&self.field)?;
        let f = &self.field;
        let mut e = Echelon::new(f, q, 0);
        for (i, a, b) in &stratum(f, 0)?.gens {
            e.insert(generator_row(f, q, 0, *i, a, b), Vec::new());
        }
        let mut x = vec![f.zero(); q];
        x[1] = f.one();
        e.insert(x, Vec::new());
        let mut strata = self.strata.clone();
        strata[0] = e.reduce(&strata[0]).0;
        Ok(VClass::new(f.clone(), strata))
    }
}

impl Serialize for VClass {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let coords: Vec<(usize, usize, String)> = self
            .strata
            .iter()
            .enumerate()
            .flat_map(|(j, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, c)| !self.field.is_zero(c))
                    .map(move |(i, c)| (i, j, self.field.format_value(c)))
            })
            .collect();
        let mut st = ser.serialize_struct("VClass", 4)?;
        st.serialize_field("field", &self.field.to_string())?;
        st.serialize_field("representative", &self.representative().to_string())?;
        st.serialize_field("is_zero", &self.is_zero())?;
        st.serialize_field("m_coordinates", &coords)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub member: bool,
    pub class: VClass,
    /// `s - representative = Σ c_k g_k`; for members this expresses `s` itself.
    pub combination: Vec<(VGenerator, Value)>,
}

impl Serialize for Membership {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let f = &self.class.field;
        let combo: Vec<_> = self
            .combination
            .iter()
            .map(|(g, c)| {
                serde_json::json!({
                    "i": g.i, "j": g.j, "a": f.format_value(&g.a), "b": f.format_value(&g.b), "coefficient": f.format_value(c)
                })
            })
            .collect();
        let mut st = ser.serialize_struct("Membership", 3)?;
        st.serialize_field("member", &self.member)?;
        st.serialize_field("class", &self.class)?;
        st.serialize_field("combination", &combo)?;
        st.end()
    }
}

impl VGenerator {
    /// The polynomial `m_{i,j} - a m_{i,j}(ax + b)`.
    pub fn polynomial(&self, field: &Field) -> MultiPoly {
        let q = field.cardinality().expect("finite field") as usize;
        let mut strata = vec![vec![field.zero(); q]; self.j + 1];
        strata[self.j] = generator_row(field, q, self.j, self.i, &self.a, &self.b);
        from_m_basis(field, &strata)
    }
}

/// Decides `s ∈ V` using strata `0..=J`; `J` defaults to `deg(s) / q`.
pub fn v_membership(s: &MultiPoly, bound: Option<usize>) -> Result<Membership> {
    let field = s.field().clone();
    let q = field_size(&field)?;
    let mut strata = to_m_basis(s)?;
    let needed = strata.len() - 1;
    let bound = bound.unwrap_or(needed);
    if bound < needed {
        return Err(Error::StratumTooSmall { given: bound, needed });
    }
    strata.resize(bound + 1, vec![field.zero(); q]);
    let mut combination = Vec::new();
    for (j, row) in strata.iter_mut().enumerate() {
        let st = stratum(&field, j)?;
        let (rem, combo) = st.echelon.reduce(row);
        *row = rem;
        for (k, c) in combo.iter().enumerate() {
            if !field.is_zero(c) {
                let (i, a, b) = st.gens[k].clone();
                combination.push((VGenerator { i, j, a, b }, c.clone()));
            }
        }
    }
    let class = VClass::new(field, strata);
    Ok(Membership { member: class.is_zero(), class, combination })
}

pub fn class_of(s: &MultiPoly) -> Result<VClass> {
    Ok(v_membership(s, None)?.class)
}

/// Whether the classes of `x^{q-1} R^{m(q-1)-1}`, `m = 1..=count`, are
/// linearly independent modulo `V`.
pub fn independence_check(field: &Field, count: usize) -> Result<bool> {
    let q = field_size(field)?;
    let top = count * (q - 1);
    let width = q * top.max(1);
    let mut e = Echelon::new(field, width, 0);
    for m in 1..=count {
        let j = m * (q - 1) - 1;
        let mut strata = vec![vec![field.zero(); q]; j + 1];
        strata[j][q - 1] = field.one();
        let (rem, _) = stratum(field, j)?.echelon.reduce(&strata[j]);
        let mut flat = vec![field.zero(); width];
        flat[j * q..(j + 1) * q].clone_from_slice(&rem);
        if !e.insert(flat, Vec::new()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `ρ(f)` for `f ∈ SAut(A^2)` over a finite field.
///
/// `f` is factored into Jacobian-1 affine and triangular maps. A triangular
/// factor `(a x1 + b, a^{-1} x2 + s(x1))` contributes the class of `a s`,
/// which makes the assignment multiplicative on the triangular group and
/// agrees with the class of `s` on every `(x1, x2 + s(x1))`. An affine factor
/// contributes 0, except over `GF(2)` where an odd permutation of the four
/// points contributes the class of `x`.
pub fn rho(f: &Endo) -> Result<VClass> {
    let field = f.field().clone();
    let q = field_size(&field)?;
    if f.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.n() });
    }
    let word = jvdk_decompose(f)?;
    if word.evaluate() != *f {
        return Err(Error::NotAutomorphism("factorisation does not recompose to the input".into()));
    }
    let word = match saut_normalize_word(&word) {
        Ok(w) => w,
        Err(Error::JacobianNotOne(j)) => return Err(Error::NotSAut(format!("Jacobian {j}"))),
        Err(e) => return Err(e),
    };
    let ring = ParamRing::base(field.clone());
    let mut total = MultiPoly::zero(&ring, 1);
    for factor in &word.factors {
        match factor {
            TameFactor::Triangular { a, b } => {
                let s = univariate(&b[1])?;
                total = &total + &from_univariate(&field, &s).scale(&a[0]);
            }
            TameFactor::Affine { .. } if q == 2 => {
                if permutation_of(&factor.to_endo())?.sign == Some(-1) {
                    total = &total + &MultiPoly::var(&ring, 1, 0);
                }
            }
            TameFactor::Affine { .. } => {}
        }
    }
    class_of(&total)
}
