//! The permutation induced by an endomorphism of `A^n` on the finite point
//! set `GF(q)^n`, with cycle structure and sign.
//!
//! Points are indexed in mixed radix over the canonical element order, with
//! `x1` the most significant digit: `(c1, ..., cn) -> ((c1 q + c2) q + ...) + cn`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::endo::Endo;
use crate::error::{Error, Result};
use crate::field::{Field, ParamRing, Value};
use crate::linalg::Matrix;
use crate::poly::{Mono, MultiPoly};
use crate::tame::{elementary, linear, translation};

pub const MAX_POINTS: u64 = 10_000_000;
pub const MAX_CENSUS_POINTS: u64 = 1_000_000;
/// Above this many point evaluations the elementary census switches to
/// additive generators of the space of `s`.
const CENSUS_WORK: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermRep {
    pub q: u64,
    pub n: usize,
    pub source: Endo,
    #[serde(skip)]
    pub image: Vec<u32>,
    /// Cycle length to number of cycles; empty when not bijective.
    pub cycle_type: BTreeMap<usize, usize>,
    /// `None` when not bijective.
    pub sign: Option<i8>,
    pub bijective: bool,
}

impl PermRep {
    pub fn cycles(&self) -> usize {
        self.cycle_type.values().sum()
    }

    pub fn fixed_points(&self) -> usize {
        self.image.iter().enumerate().filter(|&(i, &j)| i == j as usize).count()
    }

    /// Least common multiple of the cycle lengths.
    pub fn order(&self) -> Option<u64> {
        if !self.bijective {
            return None;
        }
        Some(self.cycle_type.keys().fold(1u64, |acc, &l| {
            let l = l as u64;
            acc / gcd(acc, l) * l
        }))
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A parameter-free map over `GF(q)` flattened for repeated evaluation on codes.
struct Compiled {
    field: Field,
    n: usize,
    q: u32,
    max_deg: usize,
    comps: Vec<Vec<(Mono, u32)>>,
}

impl Compiled {
    fn new(f: &Endo) -> Result<Compiled> {
        let field = f.field().clone();
        let q = match field.cardinality() {
            Some(q) => q,
            None => return Err(Error::FiniteFieldRequired),
        };
        if f.ring().has_param() {
            return Err(Error::ParameterPresent);
        }
        let n = f.n();
        points(q, n)?;
        let comps: Vec<Vec<(Mono, u32)>> = f
            .components()
            .iter()
            .map(|c| {
                c.terms()
                    .map(|(m, v)| match v {
                        Value::F(code) => (*m, *code),
                        Value::Q(_) => unreachable!("finite field values are codes"),
                    })
                    .collect()
            })
            .collect();
        let max_deg = comps.iter().flatten().map(|(m, _)| (0..n).map(|i| m.x(i)).max().unwrap_or(0) as usize).max().unwrap_or(0);
        Ok(Compiled { field, n, q: q as u32, max_deg, comps })
    }

    fn table(&self) -> Vec<u32> {
        let total = (self.q as usize).pow(self.n as u32);
        let mut digits = vec![0u32; self.n];
        let mut powers = vec![vec![1u32; self.max_deg + 1]; self.n];
        let mut out = Vec::with_capacity(total);
        for idx in 0..total {
            let mut rest = idx as u32;
            for i in (0..self.n).rev() {
                digits[i] = rest % self.q;
                rest /= self.q;
            }
            for (i, &d) in digits.iter().enumerate() {
                for e in 1..=self.max_deg {
                    powers[i][e] = self.field.mul_codes(powers[i][e - 1], d);
                }
            }
            let mut image = 0u32;
            for comp in &self.comps {
                let mut acc = 0u32;
                for (m, c) in comp {
                    let mut term = *c;
                    for (i, pw) in powers.iter().enumerate() {
                        let e = m.x(i) as usize;
                        if e > 0 {
                            term = self.field.mul_codes(term, pw[e]);
                        }
                    }
                    acc = self.field.add_codes(acc, term);
                }
                image = image * self.q + acc;
            }
            out.push(image);
        }
        out
    }
}

fn points(q: u64, n: usize) -> Result<u64> {
    let total = (q as u128).saturating_pow(n as u32);
    if total > MAX_POINTS as u128 {
        return Err(Error::TooManyPoints(total));
    }
    Ok(total as u64)
}

fn analyse(image: &[u32]) -> (bool, BTreeMap<usize, usize>) {
    let len = image.len();
    let mut seen = vec![false; len];
    for &j in image {
        if std::mem::replace(&mut seen[j as usize], true) {
            return (false, BTreeMap::new());
        }
    }
    let mut visited = vec![false; len];
    let mut cycle_type = BTreeMap::new();
    for start in 0..len {
        if visited[start] {
            continue;
        }
        let mut l = 0;
        let mut i = start;
        while !visited[i] {
            visited[i] = true;
            i = image[i] as usize;
            l += 1;
        }
        *cycle_type.entry(l).or_insert(0) += 1;
    }
    (true, cycle_type)
}

/// Evaluates `f` at every point of `GF(q)^n`.
pub fn permutation_of(f: &Endo) -> Result<PermRep> {
    let c = Compiled::new(f)?;
    let image = c.table();
    let (bijective, cycle_type) = analyse(&image);
    let sign = bijective.then(|| {
        let moved = image.len() - cycle_type.values().sum::<usize>();
        if moved % 2 == 0 {
            1
        } else {
            -1
        }
    });
    Ok(PermRep { q: c.q as u64, n: c.n, source: f.clone(), image, cycle_type, sign, bijective })
}

pub fn fixed_locus_count(f: &Endo) -> Result<usize> {
    let image = Compiled::new(f)?.table();
    Ok(image.iter().enumerate().filter(|&(i, &j)| i == j as usize).count())
}

fn sign_of(f: &Endo) -> Result<Option<i8>> {
    Ok(permutation_of(f)?.sign)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyCensus {
    pub count: usize,
    pub odd: usize,
    /// First odd member, if any.
    pub odd_example: Option<Endo>,
}

impl FamilyCensus {
    fn run<I: IntoIterator<Item = Endo>>(maps: I) -> Result<FamilyCensus> {
        let mut out = FamilyCensus { count: 0, odd: 0, odd_example: None };
        for f in maps {
            out.count += 1;
            if sign_of(&f)? != Some(1) {
                out.odd += 1;
                if out.odd_example.is_none() {
                    out.odd_example = Some(f);
                }
            }
        }
        Ok(out)
    }

    pub fn all_even(&self) -> bool {
        self.odd == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusReport {
    pub q: u64,
    pub n: usize,
    pub points: u64,
    pub translations: FamilyCensus,
    /// `(q, n) != (2, 1)`.
    pub translations_expected_even: bool,
    /// `"exhaustive"` when every `s` of degree at most 3 is tried,
    /// `"generators"` when only `c m` for `c` nonzero and `m` a monomial.
    pub elementary_mode: String,
    pub elementary: FamilyCensus,
    pub sl_elementary: FamilyCensus,
    /// `q > 2`.
    pub tame_expected_even: bool,
    /// `(x1 + x2 x3 ... xn, x2, ..., xn)`, or `(x1 + 1)` for `n = 1`.
    pub witness: Endo,
    pub witness_sign: i8,
    pub verified: bool,
}

/// Signs of translations, elementary maps `e_s` with `deg s <= 3` and
/// elementary matrices of `SL_n(GF(q))`.
pub fn even_action_census(field: &Field, n: usize) -> Result<CensusReport> {
    let q = field.cardinality().ok_or(Error::FiniteFieldRequired)?;
    let total = (q as u128).saturating_pow(n as u32);
    if total > MAX_CENSUS_POINTS as u128 {
        return Err(Error::TooManyPoints(total));
    }
    let ring = ParamRing::base(field.clone());
    let els = field.elements();

    let translations = FamilyCensus::run(tuples(&els, n).map(|v| translation(field, &v)))?;

    // Monomials of degree <= 3 in x2, ..., xn (just the constant when n = 1).
    let monos: Vec<MultiPoly> = small_monomials(n, 3)
        .into_iter()
        .map(|m| MultiPoly::monomial(&ring, n, m, field.one()))
        .collect();
    let exhaustive = (q as u128).saturating_pow(monos.len() as u32).saturating_mul(total) <= CENSUS_WORK as u128;
    let elementary_maps: Box<dyn Iterator<Item = Endo>> = if exhaustive {
        Box::new(tuples(&els, monos.len()).map(|coeffs| {
            let mut s = MultiPoly::zero(&ring, n);
            for (m, c) in monos.iter().zip(&coeffs) {
                s = &s + &m.scale(c);
            }
            elementary(n, 0, &s).unwrap()
        }))
    } else {
        let units: Vec<Value> = els.iter().filter(|c| !field.is_zero(c)).cloned().collect();
        Box::new(monos.iter().flat_map(move |m| {
            let units = units.clone();
            units.into_iter().map(move |c| elementary(n, 0, &m.scale(&c)).unwrap())
        }))
    };
    let elementary = FamilyCensus::run(elementary_maps)?;

    let mut sl = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for c in els.iter().filter(|c| !field.is_zero(c)) {
                let mut m = Matrix::identity(field, n);
                m.set(i, j, c.clone());
                sl.push(linear(&m)?);
            }
        }
    }
    let sl_elementary = FamilyCensus::run(sl)?;

    let prod = (1..n).fold(MultiPoly::one(&ring, n), |acc, i| &acc * &MultiPoly::var(&ring, n, i));
    let witness = crate::tame::elementary(n, 0, &prod)?;
    let witness_sign = sign_of(&witness)?.ok_or_else(|| Error::Invariant("witness is not bijective".into()))?;

    let translations_expected_even = (q, n) != (2, 1);
    let tame_expected_even = q > 2;
    let verified = translations.all_even() == translations_expected_even
        && if tame_expected_even {
            elementary.all_even() && sl_elementary.all_even() && witness_sign == 1
        } else {
            witness_sign == -1
        };
    Ok(CensusReport {
        q,
        n,
        points: total as u64,
        translations,
        translations_expected_even,
        elementary_mode: if exhaustive { "exhaustive" } else { "generators" }.to_string(),
        elementary,
        sl_elementary,
        tame_expected_even,
        witness,
        witness_sign,
        verified,
    })
}

/// All vectors of length `k` over `els`, last coordinate fastest.
fn tuples(els: &[Value], k: usize) -> impl Iterator<Item = Vec<Value>> + '_ {
    let q = els.len();
    let total = q.pow(k as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![els[0].clone(); k];
        for i in (0..k).rev() {
            v[i] = els[idx % q].clone();
            idx /= q;
        }
        v
    })
}

/// Monomials of degree `<= d` in `x2, ..., xn`.
fn small_monomials(n: usize, d: u16) -> Vec<Mono> {
    let mut out = vec![Mono::ONE];
    for i in 1..n {
        let mut next = Vec::new();
        for m in &out {
            let base = m.deg() as u16;
            for e in 0..=(d - base) {
                let mut x = [0u16; 9];
                x[..n].copy_from_slice(&m.xs()[..n]);
                x[i] = e;
                next.push(Mono::new(&x[..n], 0));
            }
        }
        out = next;
    }
    out
}
