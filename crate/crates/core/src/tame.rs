//! Affine and triangular generators, formal inversion, and the Jung–van der
//! Kulk factorization of plane automorphisms.
//!
//! Triangular maps are lower triangular: component `i` is
//! `a_i x_i + b_i(x_1, ..., x_{i-1})`. An elementary map `elementary(i, s)`
//! adds `s` (free of `x_i`) to coordinate `i`.

use serde::ser::SerializeMap;
use serde::Serialize;

use crate::endo::{poly_det, Endo};
use crate::error::{Error, Result};
use crate::field::{Field, ParamKind, ParamRing, Value};
use crate::linalg::Matrix;
use crate::poly::{Mono, MultiPoly, Substitution};

pub fn translation(field: &Field, v: &[Value]) -> Endo {
    let ring = ParamRing::base(field.clone());
    let n = v.len();
    let comps = v
        .iter()
        .enumerate()
        .map(|(i, c)| &MultiPoly::var(&ring, n, i) + &MultiPoly::constant(&ring, n, c.clone()))
        .collect();
    Endo::new(comps).unwrap()
}

/// `x ↦ M x + v`.
pub fn affine(m: &Matrix, v: &[Value]) -> Result<Endo> {
    if !m.is_square() || m.rows() != v.len() {
        return Err(Error::DimensionMismatch { expected: m.rows(), found: v.len() });
    }
    let f = m.field();
    if f.is_zero(&m.det()) {
        return Err(Error::SingularMatrix);
    }
    Ok(affine_unchecked(m, v))
}

fn affine_unchecked(m: &Matrix, v: &[Value]) -> Endo {
    let ring = ParamRing::base(m.field().clone());
    let n = m.rows();
    let comps = (0..n)
        .map(|i| {
            let mut p = MultiPoly::constant(&ring, n, v[i].clone());
            for j in 0..n {
                p.add_term(Mono::var(j), m.get(i, j).clone());
            }
            p
        })
        .collect();
    Endo::new(comps).unwrap()
}

pub fn linear(m: &Matrix) -> Result<Endo> {
    affine(m, &vec![m.field().zero(); m.rows()])
}

/// `(x_1, ..., x_i + s, ..., x_n)` with `i` 0-based.
pub fn elementary(n: usize, i: usize, s: &MultiPoly) -> Result<Endo> {
    if i >= n || s.nvars() != n {
        return Err(Error::DimensionMismatch { expected: n, found: s.nvars() });
    }
    if s.involves(i) {
        return Err(Error::InvalidGenerator(format!("s involves x{}", i + 1)));
    }
    let mut comps: Vec<MultiPoly> = (0..n).map(|j| MultiPoly::var(s.ring(), n, j)).collect();
    comps[i] = &comps[i] + s;
    Endo::new(comps)
}

/// `(a_1 x_1 + b_1, a_2 x_2 + b_2(x_1), ...)`.
pub fn triangular(a: &[Value], b: &[MultiPoly]) -> Result<Endo> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let ring = b[0].ring().clone();
    if a.iter().any(|x| ring.field.is_zero(x)) {
        return Err(Error::ZeroDiagonal);
    }
    for (i, bi) in b.iter().enumerate() {
        if (i..n).any(|j| bi.involves(j)) {
            return Err(Error::InvalidGenerator(format!("b{} must only involve x1..x{}", i + 1, i)));
        }
    }
    let comps = (0..n)
        .map(|i| {
            let mut p = b[i].clone();
            p.add_term(Mono::var(i), a[i].clone());
            p
        })
        .collect();
    Endo::new(comps)
}

/// Generator requests accepted by [`make_generator`]; indices are 0-based.
#[derive(Clone, Debug)]
pub enum Generator {
    Translation(Vec<Value>),
    Linear(Matrix),
    Elementary { i: usize, s: MultiPoly },
    Triangular { a: Vec<Value>, b: Vec<MultiPoly> },
}

pub fn make_generator(field: &Field, n: usize, g: &Generator) -> Result<Endo> {
    let check = |len: usize| if len == n { Ok(()) } else { Err(Error::DimensionMismatch { expected: n, found: len }) };
    match g {
        Generator::Translation(v) => {
            check(v.len())?;
            Ok(translation(field, v))
        }
        Generator::Linear(m) => {
            check(m.rows())?;
            linear(m)
        }
        Generator::Elementary { i, s } => elementary(n, *i, s),
        Generator::Triangular { a, b } => {
            check(a.len())?;
            triangular(a, b)
        }
    }
}

/// A factor of a tame word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TameFactor {
    Affine { matrix: Matrix, translation: Vec<Value> },
    Triangular { a: Vec<Value>, b: Vec<MultiPoly> },
}

impl TameFactor {
    pub fn to_endo(&self) -> Endo {
        match self {
            TameFactor::Affine { matrix, translation } => affine_unchecked(matrix, translation),
            TameFactor::Triangular { a, b } => triangular(a, b).expect("triangular factor invariants"),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, TameFactor::Affine { .. })
    }

    pub fn jacobian(&self, field: &Field) -> Value {
        match self {
            TameFactor::Affine { matrix, .. } => matrix.det(),
            TameFactor::Triangular { a, .. } => a.iter().fold(field.one(), |acc, x| field.mul(&acc, x)),
        }
    }

    /// Reads `e` back as a factor of the given shape.
    pub fn from_endo(e: &Endo, affine: bool) -> Result<TameFactor> {
        let n = e.n();
        if affine {
            if e.degree() > 1 {
                return Err(Error::InvalidGenerator("affine factor of degree > 1".into()));
            }
            let (matrix, translation) = e.linear_part()?;
            if e.field().is_zero(&matrix.det()) {
                return Err(Error::SingularMatrix);
            }
            return Ok(TameFactor::Affine { matrix, translation });
        }
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        for (i, c) in e.components().iter().enumerate() {
            let ai = c.coefficient(&Mono::var(i));
            let mut bi = c.clone();
            bi.add_term(Mono::var(i), e.field().neg(&ai));
            a.push(ai);
            b.push(bi);
        }
        triangular(&a, &b)?;
        Ok(TameFactor::Triangular { a, b })
    }

    pub fn inverse(&self) -> TameFactor {
        match self {
            TameFactor::Affine { matrix, translation } => {
                let inv = matrix.inverse().expect("affine factor is invertible");
                let field = matrix.field();
                let v = inv.apply(translation).iter().map(|x| field.neg(x)).collect();
                TameFactor::Affine { matrix: inv, translation: v }
            }
            TameFactor::Triangular { a, b } => {
                // x_i = a_i^{-1} (y_i - b_i(x_1, ..., x_{i-1})), solved in order.
                let ring = b[0].ring().clone();
                let field = ring.field.clone();
                let n = a.len();
                let mut sol: Vec<MultiPoly> = Vec::with_capacity(n);
                for i in 0..n {
                    let mut images = sol.clone();
                    images.extend((i..n).map(|j| MultiPoly::var(&ring, n, j)));
                    let bi = b[i].substitute(&images, None).unwrap();
                    let ainv = field.inv(&a[i]).unwrap();
                    sol.push((&MultiPoly::var(&ring, n, i) - &bi).scale(&ainv));
                }
                let inv = Endo::new(sol).unwrap();
                TameFactor::from_endo(&inv, false).unwrap()
            }
        }
    }
}

impl Serialize for TameFactor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(3))?;
        match self {
            TameFactor::Affine { matrix, translation } => {
                let field = matrix.field();
                m.serialize_entry("kind", "affine")?;
                m.serialize_entry("matrix", matrix)?;
                let v: Vec<String> = translation.iter().map(|x| field.format_value(x)).collect();
                m.serialize_entry("vector", &v)?;
            }
            TameFactor::Triangular { a, b } => {
                let field = b[0].field();
                m.serialize_entry("kind", "triangular")?;
                let a: Vec<String> = a.iter().map(|x| field.format_value(x)).collect();
                m.serialize_entry("a", &a)?;
                let b: Vec<String> = b.iter().map(ToString::to_string).collect();
                m.serialize_entry("b", &b)?;
            }
        }
        m.end()
    }
}

/// The composition `factors[0] ∘ factors[1] ∘ ...`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TameWord {
    #[serde(skip)]
    pub field: Field,
    #[serde(skip)]
    pub n: usize,
    pub factors: Vec<TameFactor>,
}

impl TameWord {
    pub fn new(field: &Field, n: usize, factors: Vec<TameFactor>) -> TameWord {
        TameWord { field: field.clone(), n, factors }
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn evaluate(&self) -> Endo {
        let ring = ParamRing::base(self.field.clone());
        let mut acc = Endo::identity(&ring, self.n);
        for w in self.factors.iter().rev() {
            acc = w.to_endo().compose(&acc).unwrap();
        }
        acc
    }

    pub fn inverse(&self) -> TameWord {
        TameWord::new(&self.field, self.n, self.factors.iter().rev().map(TameFactor::inverse).collect())
    }

    pub fn jacobian(&self) -> Value {
        let f = &self.field;
        self.factors.iter().fold(f.one(), |acc, w| f.mul(&acc, &w.jacobian(f)))
    }

    pub fn concat(&self, other: &TameWord) -> TameWord {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        TameWord::new(&self.field, self.n, factors)
    }
}

fn unit_jacobian(f: &Endo) -> Result<MultiPoly> {
    let jac = f.jacobian()?;
    match jac.unit_inverse() {
        Some(inv) => Ok(inv),
        None => Err(Error::JacobianNotUnit(jac.to_string())),
    }
}

/// Inverse of `f` computed degree by degree.
///
/// After normalizing by `f(0)` and the linear part, `F` is tangent to the
/// identity and `G = x + G_2 + G_3 + ...` is solved from `G ∘ F = x` one
/// homogeneous degree at a time, modulo terms above the cap. The resulting
/// candidate `g` is accepted once `f ∘ g = id` holds exactly; as `g` then has
/// a unit Jacobian this makes it a two-sided inverse. The default cap is `deg(f)^(n-1)`.
pub fn formal_inverse(f: &Endo, degree_cap: Option<u32>) -> Result<Endo> {
    let n = f.n();
    unit_jacobian(f)?;
    let ring = f.ring().clone();
    let cap = degree_cap.unwrap_or_else(|| f.degree().max(1).pow(n as u32 - 1));

    let c: Vec<MultiPoly> = f.components().iter().map(|p| p.x_coefficient(&Mono::ONE)).collect();
    let f1: Vec<MultiPoly> = f.components().iter().zip(&c).map(|(p, ci)| p - ci).collect();
    let m: Vec<Vec<MultiPoly>> = f1.iter().map(|p| (0..n).map(|j| p.x_coefficient(&Mono::var(j))).collect()).collect();
    let minv = poly_matrix_inverse(&m)?;
    let big_f = Endo::new(apply_poly_matrix(&minv, &f1))?;

    let xs: Vec<MultiPoly> = (0..n).map(|i| &MultiPoly::var(&ring, n, i) - &c[i]).collect();
    let a_inv = Endo::new(apply_poly_matrix(&minv, &xs))?;
    // Solve modulo terms of degree > bound, doubling the bound up to the cap.
    let mut bound = (2 * f.degree()).clamp(2, cap.max(2));
    loop {
        if let Some(g) = solve_truncated(f, &big_f, &a_inv, bound)? {
            return g.promote(ring.kind.max(g.ring().kind));
        }
        if bound >= cap {
            return Err(Error::NotInvertible(cap));
        }
        bound = (bound * 2).min(cap);
    }
}

/// Degree-by-degree solve of `G(F) = x` modulo degree > `bound`. A candidate
/// is tried after a run of zero parts as long as the current degree of `G`,
/// and once the bound is passed.
fn solve_truncated(f: &Endo, big_f: &Endo, a_inv: &Endo, bound: u32) -> Result<Option<Endo>> {
    let ident = Endo::identity(big_f.ring(), big_f.n());
    let mut sub = Substitution::new(big_f.components(), None, big_f.ring().kind)?.truncated(bound);
    let mut s: Vec<MultiPoly> = big_f.components().iter().map(|p| p.truncate(bound)).collect();
    let mut g_parts: Vec<MultiPoly> = ident.components().to_vec();
    let mut zero_run = 0;
    let mut g_deg = 1;
    let mut j = 2;
    loop {
        let gj: Vec<MultiPoly> =
            if j <= bound { s.iter().map(|p| -&p.homogeneous_part(j)).collect() } else { Vec::new() };
        if gj.iter().all(MultiPoly::is_zero) {
            zero_run += 1;
            if zero_run == g_deg || j > bound {
                let g = Endo::new(g_parts.clone())?.compose(a_inv)?;
                if f.compose(&g)?.is_identity() {
                    return Ok(Some(g));
                }
                if j > bound {
                    return Ok(None);
                }
            }
        } else {
            zero_run = 0;
            g_deg = j;
            for (acc, p) in g_parts.iter_mut().zip(&gj) {
                *acc = acc.checked_add(p)?;
            }
            let step = gj.iter().map(|p| sub.apply(p)).collect::<Result<Vec<_>>>()?;
            for (si, st) in s.iter_mut().zip(step) {
                *si = si.checked_add(&st)?;
            }
        }
        j += 1;
    }
}

fn apply_poly_matrix(m: &[Vec<MultiPoly>], v: &[MultiPoly]) -> Vec<MultiPoly> {
    m.iter()
        .map(|row| {
            row.iter().zip(v).fold(MultiPoly::zero(v[0].ring(), v[0].nvars()), |acc, (a, b)| {
                acc.checked_add(&a.checked_mul(b).unwrap()).unwrap()
            })
        })
        .collect()
}

/// Inverse of a matrix of `x`-free polynomials whose determinant is a unit.
fn poly_matrix_inverse(m: &[Vec<MultiPoly>]) -> Result<Vec<Vec<MultiPoly>>> {
    let n = m.len();
    let det = poly_det(m);
    let dinv = det.unit_inverse().ok_or_else(|| Error::JacobianNotUnit(det.to_string()))?;
    if n == 1 {
        return Ok(vec![vec![dinv]]);
    }
    let mut out = vec![Vec::with_capacity(n); n];
    for (i, row) in out.iter_mut().enumerate() {
        for j in 0..n {
            // adj(M)_{ij} = (-1)^{i+j} det(M without row j, column i)
            let minor: Vec<Vec<MultiPoly>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c].clone()).collect())
                .collect();
            let cof = poly_det(&minor);
            let cof = if (i + j) % 2 == 0 { cof } else { -&cof };
            row.push(cof.checked_mul(&dinv)?);
        }
    }
    Ok(out)
}

fn swap_factor(field: &Field) -> TameFactor {
    TameFactor::Affine { matrix: Matrix::from_i64(field, &[&[0, 1], &[1, 0]]), translation: vec![field.zero(), field.zero()] }
}

fn swap_endo(e: &Endo) -> Endo {
    let c = e.components();
    Endo::new(vec![c[1].clone(), c[0].clone()]).unwrap()
}

/// Factors a plane automorphism over a field into affine and triangular maps.
///
/// Each step removes the leading form of the higher-degree component using
/// a power of the other one (swapping first if needed), so the factors are
/// produced left to right.
pub fn jvdk_decompose(f: &Endo) -> Result<TameWord> {
    if f.n() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: f.n() });
    }
    if f.components().iter().any(MultiPoly::involves_t) {
        return Err(Error::ParameterPresent);
    }
    let field = f.field().clone();
    let base = ParamRing::base(field.clone());
    let f = f.promote(ParamKind::NoParam)?;
    let jac = f.jacobian()?;
    match jac.constant_value() {
        Some(v) if !field.is_zero(&v) => {}
        _ => return Err(Error::NotAutomorphism(format!("Jacobian {jac} is not a nonzero constant"))),
    }
    let mut factors = Vec::new();
    let mut cur = f.clone();
    loop {
        let d = cur.degrees();
        if d[0] <= 1 && d[1] <= 1 {
            let (matrix, translation) = cur.linear_part()?;
            if field.is_zero(&matrix.det()) {
                return Err(Error::NotAutomorphism("degenerate affine part".into()));
            }
            factors.push(TameFactor::Affine { matrix, translation });
            break;
        }
        if d[0] < d[1] {
            factors.push(swap_factor(&field));
            cur = swap_endo(&cur);
            continue;
        }
        let (d1, d2) = (d[0], d[1]);
        let fail = || Error::NotAutomorphism(format!("leading forms of degrees {d1} and {d2} are not related by a power"));
        if d2 == 0 || d1 % d2 != 0 {
            return Err(fail());
        }
        let k = d1 / d2;
        let l1 = cur.component(0).leading_form();
        let l2k = cur.component(1).leading_form().pow(k);
        let (m1, c1) = l1.terms().next_back().unwrap();
        let (m2, c2) = l2k.terms().next_back().unwrap();
        if m1 != m2 {
            return Err(fail());
        }
        let c = field.div(c1, c2)?;
        if l1 != l2k.scale(&c) {
            return Err(fail());
        }
        // cur = E^{-1} ∘ (E ∘ cur) with E = (x1 - c x2^k, x2).
        let reduced = cur.component(0) - &cur.component(1).pow(k).scale(&c);
        cur = Endo::new(vec![reduced, cur.component(1).clone()])?;
        if k == 1 {
            let matrix = Matrix::from_rows(&field, vec![vec![field.one(), c], vec![field.zero(), field.one()]])?;
            factors.push(TameFactor::Affine { matrix, translation: vec![field.zero(), field.zero()] });
        } else {
            let b2 = MultiPoly::var(&base, 2, 0).pow(k).scale(&c);
            factors.push(swap_factor(&field));
            factors.push(TameFactor::Triangular { a: vec![field.one(), field.one()], b: vec![MultiPoly::zero(&base, 2), b2] });
            factors.push(swap_factor(&field));
        }
    }
    Ok(TameWord::new(&field, 2, merge_affine(factors)))
}

/// Merges adjacent affine factors and drops identities.
fn merge_affine(factors: Vec<TameFactor>) -> Vec<TameFactor> {
    let mut out: Vec<TameFactor> = Vec::new();
    for w in factors {
        match (out.last_mut(), &w) {
            (
                Some(TameFactor::Affine { matrix: m1, translation: v1 }),
                TameFactor::Affine { matrix: m2, translation: v2 },
            ) => {
                let field = m1.field().clone();
                let mv = m1.apply(v2);
                let v: Vec<Value> = mv.iter().zip(v1.iter()).map(|(a, b)| field.add(a, b)).collect();
                *m1 = m1.mul(m2).unwrap();
                *v1 = v;
            }
            _ => out.push(w),
        }
        if let Some(TameFactor::Affine { matrix, translation }) = out.last() {
            let field = matrix.field();
            if matrix.is_identity() && translation.iter().all(|x| field.is_zero(x)) {
                out.pop();
            }
        }
    }
    out
}

/// Whether a parameter-free plane map is an automorphism.
pub fn is_automorphism(f: &Endo) -> bool {
    if f.n() != 2 || f.components().iter().any(MultiPoly::involves_t) {
        return false;
    }
    match jvdk_decompose(f) {
        Ok(w) => w.evaluate() == f.promote(ParamKind::NoParam).unwrap(),
        Err(_) => false,
    }
}

fn diag_x1(field: &Field, n: usize, d: &Value) -> TameFactor {
    let mut m = Matrix::identity(field, n);
    m.set(0, 0, d.clone());
    TameFactor::Affine { matrix: m, translation: vec![field.zero(); n] }
}

/// Rewrites a Jacobian-1 word so that every factor has Jacobian 1, by
/// inserting cancelling diagonal maps `diag(p, 1, ..., 1)` between factors.
pub fn saut_normalize_word(w: &TameWord) -> Result<TameWord> {
    let field = &w.field;
    let total = w.jacobian();
    if !field.is_one(&total) {
        return Err(Error::JacobianNotOne(field.format_value(&total)));
    }
    let mut out = Vec::with_capacity(w.len());
    let mut prefix = field.one();
    for factor in &w.factors {
        let left = diag_x1(field, w.n, &prefix).to_endo();
        prefix = field.mul(&prefix, &factor.jacobian(field));
        let right = diag_x1(field, w.n, &field.inv(&prefix)?).to_endo();
        let e = left.compose(&factor.to_endo())?.compose(&right)?;
        out.push(TameFactor::from_endo(&e, factor.is_affine())?);
    }
    Ok(TameWord::new(field, w.n, out))
}

#[cfg(test)]
mod tests;
