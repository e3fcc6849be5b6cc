//! Degenerations of families over `k[t]` to translations, the commutator
//! pipeline built on them, the Alexander trick, and the extraction of an
//! elementary matrix from a map moving a point.

use num_integer::Integer;
use serde::Serialize;

use crate::endo::Endo;
use crate::error::{Error, Result};
use crate::field::{Field, ParamKind, ParamRing, Scalar, Value};
use crate::linalg::Matrix;
use crate::poly::{Mono, MultiPoly};
use crate::tame::{affine, formal_inverse, translation};

/// `(x_i + c_i t^e)` over `k[t]` (`e >= 0`) or `k[t, 1/t]` (`e < 0`).
pub fn param_translation(field: &Field, c: &[Value], e: i32) -> Endo {
    let kind = if e < 0 { ParamKind::LaurentT } else { ParamKind::PolyT };
    let ring = ParamRing::new(field.clone(), kind);
    let n = c.len();
    let comps = c
        .iter()
        .enumerate()
        .map(|(i, ci)| {
            let mut p = MultiPoly::var(&ring, n, i);
            p.add_term(Mono::t_pow(e), ci.clone());
            p
        })
        .collect();
    Endo::new(comps).unwrap()
}

fn negated(field: &Field, v: &[Value]) -> Vec<Value> {
    v.iter().map(|c| field.neg(c)).collect()
}

fn check_family(g: &Endo) -> Result<()> {
    if g.is_identity() {
        return Err(Error::IdentityInput);
    }
    if !g.specialize_t(&g.field().zero())?.is_identity() {
        return Err(Error::NotIdAtZero);
    }
    Ok(())
}

/// Nonzero bigraded parts `(i, j, m, q_{i,j,m})` of `g_i - x_i`.
fn displacement_parts(g: &Endo) -> Vec<(usize, i32, u32, MultiPoly)> {
    let n = g.n();
    let mut out = Vec::new();
    for (i, c) in g.components().iter().enumerate() {
        let d = c - &MultiPoly::var(c.ring(), n, i);
        for ((j, m), q) in d.bigraded_parts() {
            out.push((i, j, m, q));
        }
    }
    out
}

/// The coprime pair `(a, b)` with `a/b = max m/j` over the nonzero parts
/// `q_{i,j,m} t^j` of `g_i - x_i`. Returns `(0, 1)` when every part has
/// `x`-degree 0, i.e. `g` is a family of translations.
pub fn slope(g: &Endo) -> Result<(u32, u32)> {
    check_family(g)?;
    let mut best: Option<(u32, u32)> = None;
    for (_, j, m, _) in displacement_parts(g) {
        let j = j as u32;
        best = match best {
            Some((bm, bj)) if (m as u64) * (bj as u64) <= (bm as u64) * (j as u64) => Some((bm, bj)),
            _ => Some((m, j)),
        };
    }
    let (m, j) = best.ok_or(Error::IdentityInput)?;
    if m == 0 {
        return Ok((0, 1));
    }
    let d = m.gcd(&j);
    Ok((m / d, j / d))
}

/// The polynomials `P_i = sum_{m/j = a/b} q_{i,j,m}`; `h_ε(0) = (x_i + P_i(ε))`.
pub fn limit_polynomials(g: &Endo, (a, b): (u32, u32)) -> Vec<MultiPoly> {
    let base = ParamRing::base(g.field().clone());
    let mut out = vec![MultiPoly::zero(&base, g.n()); g.n()];
    for (i, j, m, q) in displacement_parts(g) {
        if (m as u64) * (b as u64) == (j as u64) * (a as u64) {
            out[i] = &out[i] + &q;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Degeneration {
    pub slope: (u32, u32),
    /// `ρ_ε^{-1} ∘ g(t^a) ∘ ρ_ε`, over `k[t]`.
    pub family: Endo,
    /// The translation `family(0)`.
    pub limit: Endo,
    pub limit_vector: Vec<Scalar>,
    /// True when the slope is `(0, 1)`: `g` is itself a family of
    /// translations, `family = g` and `limit = g(1)`.
    pub short_circuit: bool,
}

/// Conjugates `g(t^a)` by `ρ_ε = (x_i + t^{-b} ε_i)` and specialises at 0.
pub fn degenerate(g: &Endo, eps: &[Value]) -> Result<Degeneration> {
    let field = g.field().clone();
    if eps.len() != g.n() {
        return Err(Error::DimensionMismatch { expected: g.n(), found: eps.len() });
    }
    let (a, b) = slope(g)?;
    let g = g.promote(ParamKind::PolyT)?;
    if a == 0 {
        let limit = g.specialize_t(&field.one())?;
        return finish((a, b), g, limit, true);
    }
    let rho = param_translation(&field, eps, -(b as i32));
    let rho_inv = param_translation(&field, &negated(&field, eps), -(b as i32));
    let h = rho_inv.compose(&g.t_to_power(a).compose(&rho)?)?;
    if h.components().iter().any(|c| c.t_min().is_some_and(|e| e < 0)) {
        return Err(Error::Invariant(format!("negative power of t after conjugation: {h}")));
    }
    let h = h.promote(ParamKind::PolyT)?;
    let limit = h.specialize_t(&field.zero())?;
    finish((a, b), h, limit, false)
}

fn finish(slope: (u32, u32), family: Endo, limit: Endo, short_circuit: bool) -> Result<Degeneration> {
    let field = limit.field().clone();
    let v = limit
        .translation_vector()
        .ok_or_else(|| Error::Invariant(format!("limit {limit} is not a translation")))?;
    let limit_vector = v.into_iter().map(|c| field.scalar(c)).collect();
    Ok(Degeneration { slope, family, limit, limit_vector, short_circuit })
}

/// Checks `h(t0) = ρ_ε(t0)^{-1} ∘ g(t0^a) ∘ ρ_ε(t0)` over the base field.
pub fn sample_check(g: &Endo, eps: &[Value], d: &Degeneration, t0: &Value) -> Result<bool> {
    let field = g.field();
    let (a, b) = d.slope;
    let direct = if d.short_circuit {
        g.specialize_t(t0)?
    } else {
        let s = field.powi(t0, -(b as i64))?;
        let shift: Vec<Value> = eps.iter().map(|e| field.mul(e, &s)).collect();
        let rho = translation(field, &shift);
        let rho_inv = translation(field, &negated(field, &shift));
        let ga = g.specialize_t(&field.pow(t0, a as u64))?;
        rho_inv.compose(&ga.compose(&rho)?)?
    };
    Ok(d.family.specialize_t(t0)? == direct)
}

/// First `ε` in lexicographic order on `{0, ..., H}^n` whose limit is not the
/// identity. `H` defaults to `D = max deg P_i`, so the grid has `(D+1)^n`
/// points and cannot lie in the zero set of a nonzero `P_i`.
pub fn find_witness(g: &Endo, grid: Option<u32>) -> Result<Vec<Value>> {
    let field = g.field().clone();
    if !field.is_rationals() {
        return Err(Error::InfiniteFieldRequired);
    }
    let (a, b) = slope(g)?;
    let n = g.n();
    if a == 0 {
        return Ok(vec![field.zero(); n]);
    }
    let ps = limit_polynomials(g, (a, b));
    let height = grid.unwrap_or_else(|| ps.iter().filter_map(MultiPoly::degree).max().unwrap_or(0));
    let mut point = vec![0u32; n];
    loop {
        let eps: Vec<Value> = point.iter().map(|&c| field.from_i64(c as i64)).collect();
        for p in &ps {
            if !field.is_zero(&p.eval(&eps)?) {
                return Ok(eps);
            }
        }
        // Next point in lexicographic order, last coordinate fastest.
        let mut k = n;
        loop {
            if k == 0 {
                return Err(Error::NoWitness);
            }
            k -= 1;
            if point[k] < height {
                point[k] += 1;
                point[k + 1..].iter_mut().for_each(|c| *c = 0);
                break;
            }
        }
    }
}

/// A coordinate translation `x_i + c`, `c ∈ {1, ..., deg f + 1}`, not
/// commuting with `f`; `None` when `f` is a translation.
pub fn find_noncommuting_translation(f: &Endo) -> Result<Option<Endo>> {
    let field = f.field().clone();
    if f.ring().has_param() {
        return Err(Error::ParameterPresent);
    }
    if !field.is_rationals() {
        return Err(Error::InfiniteFieldRequired);
    }
    if f.is_translation() {
        return Ok(None);
    }
    let n = f.n();
    for i in 0..n {
        for c in 1..=f.degree() as i64 + 1 {
            let mut v = vec![field.zero(); n];
            v[i] = field.from_i64(c);
            let tau = translation(&field, &v);
            if f.compose(&tau)? != tau.compose(f)? {
                return Ok(Some(tau));
            }
        }
    }
    Err(Error::Invariant(format!("{f} commutes with all coordinate shifts but is not a translation")))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleCheck {
    pub t0: Scalar,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerationCertificate {
    pub input: Endo,
    /// The direction `ν` of the translation `τ = (x_i + t ν_i)`.
    pub direction: Vec<Scalar>,
    /// `τ^{-1} ∘ f^{-1} ∘ τ ∘ f`.
    pub commutator: Endo,
    pub slope: (u32, u32),
    pub witness: Vec<Scalar>,
    pub family: Endo,
    pub limit: Endo,
    pub limit_vector: Vec<Scalar>,
    pub nontrivial: bool,
    pub short_circuit: bool,
    pub samples: Vec<SampleCheck>,
}

impl DegenerationCertificate {
    pub fn verified(&self) -> bool {
        self.nontrivial && self.samples.iter().all(|s| s.ok)
    }
}

/// Degenerates the commutator of `f` with a non-commuting translation family
/// to a nontrivial translation. Each `t0` in `samples` is checked against
/// `ρ(t0)^{-1} ∘ τ(t0^a)^{-1} ∘ f^{-1} ∘ τ(t0^a) ∘ f ∘ ρ(t0)` computed over
/// the base field.
pub fn commutator_pipeline(f: &Endo, samples: &[Value]) -> Result<DegenerationCertificate> {
    let field = f.field().clone();
    if f.ring().has_param() {
        return Err(Error::ParameterPresent);
    }
    if !field.is_rationals() {
        return Err(Error::InfiniteFieldRequired);
    }
    if f.is_translation() {
        return Err(Error::IsTranslation);
    }
    let jac = f.jacobian()?;
    if jac.constant_value().is_none_or(|c| !field.is_one(&c)) {
        return Err(Error::JacobianNotOne(jac.to_string()));
    }
    let tau1 = find_noncommuting_translation(f)?.ok_or(Error::IsTranslation)?;
    let nu = tau1.translation_vector().unwrap();
    let f_inv = formal_inverse(f, None)?;
    let tau = param_translation(&field, &nu, 1);
    let tau_inv = param_translation(&field, &negated(&field, &nu), 1);
    let g = tau_inv.compose(&f_inv.compose(&tau.compose(f)?)?)?;
    let (a, b) = slope(&g)?;
    let eps = find_witness(&g, None)?;
    let d = degenerate(&g, &eps)?;

    let mut checks = Vec::with_capacity(samples.len());
    for t0 in samples {
        let ta = if d.short_circuit { t0.clone() } else { field.pow(t0, a as u64) };
        let shift: Vec<Value> = nu.iter().map(|c| field.mul(c, &ta)).collect();
        let tau0 = translation(&field, &shift);
        let tau0_inv = translation(&field, &negated(&field, &shift));
        let mut direct = tau0_inv.compose(&f_inv.compose(&tau0.compose(f)?)?)?;
        if !d.short_circuit {
            let s = field.powi(t0, -(b as i64))?;
            let e: Vec<Value> = eps.iter().map(|c| field.mul(c, &s)).collect();
            let rho = translation(&field, &e);
            let rho_inv = translation(&field, &negated(&field, &e));
            direct = rho_inv.compose(&direct.compose(&rho)?)?;
        }
        checks.push(SampleCheck { t0: field.scalar(t0.clone()), ok: d.family.specialize_t(t0)? == direct });
    }
    Ok(DegenerationCertificate {
        input: f.clone(),
        direction: nu.iter().map(|c| field.scalar(c.clone())).collect(),
        commutator: g,
        slope: d.slope,
        witness: eps.into_iter().map(|c| field.scalar(c)).collect(),
        nontrivial: !d.limit.is_identity(),
        family: d.family,
        limit: d.limit,
        limit_vector: d.limit_vector,
        short_circuit: d.short_circuit,
        samples: checks,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlexanderFamily {
    /// `α^{-1} ∘ f ∘ α` with `α = (t x_1, ..., t x_n)`, over `k[t]`.
    pub family: Endo,
    /// `family(0)`, the linear part of `f`.
    pub linear_part: Matrix,
}

/// The family `α^{-1} ∘ f ∘ α`, checked against `sum_j t^{j-1} f_{i,j}`,
/// with `family(0) = (Df)(0)` and `family(1) = f`.
pub fn alexander_family(f: &Endo) -> Result<AlexanderFamily> {
    let jac = f.jacobian()?;
    if jac.constant_value().is_none_or(|c| f.field().is_zero(&c)) {
        return Err(Error::JacobianNotUnit(jac.to_string()));
    }
    alexander_unchecked(f)
}

// Skips the Jacobian, which is costly for the high-degree commutators built
// by `sln_extraction` and is 1 there by construction.
fn alexander_unchecked(f: &Endo) -> Result<AlexanderFamily> {
    if f.ring().has_param() {
        return Err(Error::ParameterPresent);
    }
    let field = f.field().clone();
    let n = f.n();
    let (m, v) = f.linear_part()?;
    if v.iter().any(|c| !field.is_zero(c)) {
        return Err(Error::DoesNotFixOrigin);
    }
    let laurent = ParamRing::new(field.clone(), ParamKind::LaurentT);
    let scaling = |e: i32| {
        Endo::new((0..n).map(|i| MultiPoly::monomial(&laurent, n, Mono::var(i).times(&Mono::t_pow(e)), field.one())).collect())
            .unwrap()
    };
    let g = scaling(-1).compose(&f.compose(&scaling(1))?)?;
    if g.components().iter().any(|c| c.t_min().is_some_and(|e| e < 0)) {
        return Err(Error::Invariant(format!("negative power of t in {g}")));
    }
    let g = g.promote(ParamKind::PolyT)?;
    let poly_t = laurent.with_kind(ParamKind::PolyT);
    for (gi, fi) in g.components().iter().zip(f.components()) {
        let mut expected = MultiPoly::zero(&poly_t, n);
        for (mono, c) in fi.terms() {
            expected.add_term(mono.times(&Mono::t_pow(mono.deg() as i32 - 1)), c.clone());
        }
        if *gi != expected {
            return Err(Error::Invariant(format!("{gi} differs from the homogeneous expansion {expected}")));
        }
    }
    let g0 = g.specialize_t(&field.zero())?;
    let linear = crate::tame::linear(&m)?;
    if g0 != linear || g.specialize_t(&field.one())? != *f {
        return Err(Error::Invariant("Alexander family endpoints".into()));
    }
    Ok(AlexanderFamily { family: g, linear_part: m })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlnExtraction {
    /// `φ = (x ↦ M x + p)` with `φ(0) = p`, `φ(e_1) = q`.
    pub frame: Endo,
    /// `h` in the frame: `φ^{-1} ∘ h ∘ φ`, sending the origin to `e_1`.
    pub normalized: Endo,
    /// `h'^{-1} ∘ β^{-1} ∘ h' ∘ β`, fixing the origin.
    pub commutator: Endo,
    pub family: Endo,
    pub limit: Matrix,
    pub elementary: bool,
    pub samples: Vec<SampleCheck>,
}

/// `β = (x_1, x_2 + x_1 (x_1 - 1)^2, x_3, ..., x_n)` (or its inverse).
pub fn beta(field: &Field, n: usize, inverse: bool) -> Endo {
    let ring = ParamRing::base(field.clone());
    let x1 = MultiPoly::var(&ring, n, 0);
    let s = &x1 * &(&x1 - &MultiPoly::one(&ring, n)).pow(2);
    let s = if inverse { -&s } else { s };
    crate::tame::elementary(n, 1, &s).unwrap()
}

/// Extracts a nontrivial elementary matrix from `h` and a point `p` it moves
/// (`q` defaults to `h(p)`), via the Alexander family of
/// `h^{-1} ∘ β^{-1} ∘ h ∘ β` in a frame sending `0, e_1` to `p, q`.
pub fn sln_extraction(h: &Endo, p: &[Value], q: Option<&[Value]>, samples: &[Value]) -> Result<SlnExtraction> {
    if h.ring().has_param() {
        return Err(Error::ParameterPresent);
    }
    let field = h.field().clone();
    let n = h.n();
    if n < 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: n });
    }
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: p.len() });
    }
    let hp = h.eval(p)?;
    let q = q.map(<[Value]>::to_vec).unwrap_or_else(|| hp.clone());
    if q.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: q.len() });
    }
    if q == p {
        return Err(Error::DegenerateGeometry);
    }
    if hp != q {
        return Err(Error::FixedPointMissing);
    }
    // Frame: first column q - p, completed by standard basis vectors.
    let v: Vec<Value> = q.iter().zip(p).map(|(a, b)| field.sub(a, b)).collect();
    let k = v.iter().position(|c| !field.is_zero(c)).unwrap();
    let mut m = Matrix::zeros(&field, n, n);
    let mut col = 1;
    for j in 0..n {
        m.set(j, 0, v[j].clone());
        if j != k {
            m.set(j, col, field.one());
            col += 1;
        }
    }
    let phi = affine(&m, p)?;
    let phi_inv = formal_inverse(&phi, None)?;
    let h_inv = formal_inverse(h, None)?;
    let hn = phi_inv.compose(&h.compose(&phi)?)?;
    let hn_inv = phi_inv.compose(&h_inv.compose(&phi)?)?;
    let f = hn_inv.compose(&beta(&field, n, true).compose(&hn.compose(&beta(&field, n, false))?)?)?;
    let fam = alexander_unchecked(&f)?;
    let mut expected = Matrix::identity(&field, n);
    expected.set(1, 0, field.one());
    let elementary = fam.linear_part == expected;
    let mut checks = Vec::with_capacity(samples.len());
    for t0 in samples {
        let inv = field.inv(t0)?;
        let a = crate::tame::linear(&scaled_identity(&field, n, t0))?;
        let a_inv = crate::tame::linear(&scaled_identity(&field, n, &inv))?;
        let direct = a_inv.compose(&f.compose(&a)?)?;
        checks.push(SampleCheck { t0: field.scalar(t0.clone()), ok: fam.family.specialize_t(t0)? == direct });
    }
    Ok(SlnExtraction {
        frame: phi,
        normalized: hn,
        commutator: f,
        family: fam.family,
        limit: fam.linear_part,
        elementary,
        samples: checks,
    })
}

fn scaled_identity(field: &Field, n: usize, c: &Value) -> Matrix {
    let mut m = Matrix::zeros(field, n, n);
    for i in 0..n {
        m.set(i, i, c.clone());
    }
    m
}
