//! Commutator identities among elementary maps, translations and diagonal
//! maps, and the identities of the Nagata family. Every verdict is an exact
//! comparison of canonical forms.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::endo::Endo;
use crate::error::{Error, Result};
use crate::field::{Field, ParamRing, Value};
use crate::poly::MultiPoly;
use crate::tame::{elementary, translation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub left: Vec<MultiPoly>,
    pub right: Vec<MultiPoly>,
    pub verdict: bool,
}

impl IdentityReport {
    fn new(name: &str, parameters: BTreeMap<String, String>, left: Vec<MultiPoly>, right: Vec<MultiPoly>) -> Self {
        let verdict = left == right;
        IdentityReport { name: name.to_string(), parameters, left, right, verdict }
    }

    fn maps(name: &str, parameters: BTreeMap<String, String>, left: Endo, right: Endo) -> Self {
        Self::new(name, parameters, left.into_components(), right.into_components())
    }
}

fn params(field: &Field, named: &[(&str, &Value)]) -> BTreeMap<String, String> {
    named.iter().map(|(k, v)| (k.to_string(), field.format_value(v))).collect()
}

fn vector(field: &Field, v: &[Value]) -> String {
    let items: Vec<String> = v.iter().map(|c| field.format_value(c)).collect();
    format!("({})", items.join(", "))
}

/// `e_q = (x_1 + q, x_2, ..., x_n)` with `q` free of `x_1`.
pub fn e_q(q: &MultiPoly) -> Result<Endo> {
    if q.involves(0) {
        return Err(Error::VariableLeak);
    }
    elementary(q.nvars(), 0, q)
}

/// `τ_ε = (x_1, x_2 + ε_2, ..., x_n + ε_n)` from `ε = (ε_2, ..., ε_n)`.
pub fn tau(field: &Field, eps: &[Value]) -> Endo {
    let mut v = vec![field.zero()];
    v.extend_from_slice(eps);
    translation(field, &v)
}

/// `δ = ((α_2 ⋯ α_n)^{-1} x_1, α_2 x_2, ..., α_n x_n)`.
pub fn delta(field: &Field, alpha: &[Value]) -> Result<Endo> {
    if alpha.iter().any(|a| field.is_zero(a)) {
        return Err(Error::ZeroScalar);
    }
    let prod = alpha.iter().fold(field.one(), |acc, a| field.mul(&acc, a));
    let mut diag = vec![field.inv(&prod)?];
    diag.extend_from_slice(alpha);
    Ok(diagonal(field, &diag))
}

fn diagonal(field: &Field, d: &[Value]) -> Endo {
    let ring = ParamRing::base(field.clone());
    let n = d.len();
    Endo::new(d.iter().enumerate().map(|(i, c)| MultiPoly::var(&ring, n, i).scale(c)).collect()).unwrap()
}

/// `Δ = x_1 x_3 + x_2^2`.
pub fn nagata_invariant(field: &Field) -> MultiPoly {
    let ring = ParamRing::base(field.clone());
    let x = |i| MultiPoly::var(&ring, 3, i);
    &(&x(0) * &x(2)) + &(&x(1) * &x(1))
}

/// `N_α = (x_1 - 2α x_2 Δ - α^2 x_3 Δ^2, x_2 + α x_3 Δ, x_3)`.
pub fn nagata(field: &Field, alpha: &Value) -> Endo {
    let ring = ParamRing::base(field.clone());
    let x = |i| MultiPoly::var(&ring, 3, i);
    let d = nagata_invariant(field);
    let two_a = field.add(alpha, alpha);
    let a2 = field.mul(alpha, alpha);
    let c1 = &(&x(0) - &(&x(1) * &d).scale(&two_a)) - &(&x(2) * &(&d * &d)).scale(&a2);
    let c2 = &x(1) + &(&x(2) * &d).scale(alpha);
    Endo::new(vec![c1, c2, x(2)]).unwrap()
}

/// `L_u = (u x_1, x_2, u^{-1} x_3)`.
pub fn l_u(field: &Field, u: &Value) -> Result<Endo> {
    if field.is_zero(u) {
        return Err(Error::ZeroScalar);
    }
    Ok(diagonal(field, &[u.clone(), field.one(), field.inv(u)?]))
}

/// `h_{q,ε} = e_q^{-1} ∘ τ_ε^{-1} ∘ e_q ∘ τ_ε` against
/// `(x_1 + q(x_2 + ε_2, ...) - q(x_2, ...), x_2, ..., x_n)`.
pub fn verify_h_commutator(q: &MultiPoly, eps: &[Value]) -> Result<IdentityReport> {
    let n = q.nvars();
    let field = q.field().clone();
    if n < 2 || eps.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), found: eps.len() });
    }
    let e = e_q(q)?;
    let e_inv = e_q(&-q)?;
    let t = tau(&field, eps);
    let t_inv = tau(&field, &eps.iter().map(|c| field.neg(c)).collect::<Vec<_>>());
    let left = e_inv.compose(&t_inv.compose(&e.compose(&t)?)?)?;
    let shifted = q.substitute(t.components(), None)?;
    let right = e_q(&(&shifted - q))?;
    let p = BTreeMap::from([("q".to_string(), q.to_string()), ("epsilon".to_string(), vector(&field, eps))]);
    Ok(IdentityReport::maps("h_commutator", p, left, right))
}

/// The product of `h_{θν x_2^3, μ}`, `h_{μν x_2^3, θ}` and the translation
/// `(x_1 + θμν(θ^2 + μ^2), x_2)` against `(x_1 + θμν(θ + μ) x_2, x_2)`.
pub fn verify_char2_identity(field: &Field, theta: &Value, mu: &Value, nu: &Value) -> Result<IdentityReport> {
    if field.characteristic() != 2 {
        return Err(Error::WrongCharacteristic { expected: 2, found: field.characteristic() });
    }
    if field.cardinality() == Some(2) {
        return Err(Error::FieldTooSmall(field.to_string()));
    }
    let ring = ParamRing::base(field.clone());
    let cube = MultiPoly::var(&ring, 2, 1).pow(3);
    let h1 = verify_h_commutator(&cube.scale(&field.mul(theta, nu)), std::slice::from_ref(mu))?;
    let h2 = verify_h_commutator(&cube.scale(&field.mul(mu, nu)), std::slice::from_ref(theta))?;
    let tmn = field.mul(&field.mul(theta, mu), nu);
    let sq = field.add(&field.mul(theta, theta), &field.mul(mu, mu));
    let shift = translation(field, &[field.mul(&tmn, &sq), field.zero()]);
    let h1 = Endo::new(h1.left)?;
    let h2 = Endo::new(h2.left)?;
    let left = h1.compose(&h2.compose(&shift)?)?;
    let x2 = MultiPoly::var(&ring, 2, 1);
    let right = e_q(&x2.scale(&field.mul(&tmn, &field.add(theta, mu))))?;
    let p = params(field, &[("theta", theta), ("mu", mu), ("nu", nu)]);
    Ok(IdentityReport::maps("char2_identity", p, left, right))
}

/// `u_{q,α} = e_q^{-1} ∘ δ^{-1} ∘ e_q ∘ δ` against
/// `(x_1 + α_2⋯α_n q(α_2 x_2, ..., α_n x_n) - q, x_2, ..., x_n)`.
pub fn verify_u_commutator(q: &MultiPoly, alpha: &[Value]) -> Result<IdentityReport> {
    let n = q.nvars();
    let field = q.field().clone();
    if n < 2 || alpha.len() != n - 1 {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), found: alpha.len() });
    }
    let e = e_q(q)?;
    let e_inv = e_q(&-q)?;
    let d = delta(&field, alpha)?;
    let d_inv = delta(&field, &alpha.iter().map(|a| field.inv(a)).collect::<Result<Vec<_>>>()?)?;
    let left = e_inv.compose(&d_inv.compose(&e.compose(&d)?)?)?;
    let prod = alpha.iter().fold(field.one(), |acc, a| field.mul(&acc, a));
    let ring = ParamRing::base(field.clone());
    let mut images = vec![MultiPoly::var(&ring, n, 0)];
    images.extend((1..n).map(|i| MultiPoly::var(&ring, n, i).scale(&alpha[i - 1])));
    let scaled = q.substitute(&images, None)?.scale(&prod);
    let right = e_q(&(&scaled - q))?;
    let p = BTreeMap::from([("q".to_string(), q.to_string()), ("alpha".to_string(), vector(&field, alpha))]);
    Ok(IdentityReport::maps("u_commutator", p, left, right))
}

/// The five Nagata identities: `N_α^*(Δ) = Δ`, `N_α ∘ N_β = N_{α+β}`,
/// `Jac(N_α) = 1`, `L_u^{-1} ∘ N_α ∘ L_u = N_{α/u}` and
/// `N_α ∘ (L_u ∘ N_{α(u-1)/u}) ∘ N_α^{-1} = L_u`.
pub fn nagata_suite(field: &Field, alpha: &Value, beta: &Value, u: &Value) -> Result<Vec<IdentityReport>> {
    if field.is_zero(u) {
        return Err(Error::ZeroScalar);
    }
    let ring = ParamRing::base(field.clone());
    let na = nagata(field, alpha);
    let d = nagata_invariant(field);
    let mut out = Vec::with_capacity(5);

    let pa = params(field, &[("alpha", alpha)]);
    out.push(IdentityReport::new("nagata_invariant", pa.clone(), vec![na.pullback(&d)?], vec![d.clone()]));

    let nb = nagata(field, beta);
    let sum = nagata(field, &field.add(alpha, beta));
    out.push(IdentityReport::maps("nagata_additive", params(field, &[("alpha", alpha), ("beta", beta)]), na.compose(&nb)?, sum));

    out.push(IdentityReport::new("nagata_jacobian", pa, vec![na.jacobian()?], vec![MultiPoly::one(&ring, 3)]));

    let lu = l_u(field, u)?;
    let lu_inv = l_u(field, &field.inv(u)?)?;
    let pu = params(field, &[("alpha", alpha), ("u", u)]);
    let conj = lu_inv.compose(&na.compose(&lu)?)?;
    out.push(IdentityReport::maps("nagata_conjugation", pu.clone(), conj, nagata(field, &field.div(alpha, u)?)));

    // N_α^{-1} is N_{-α}, itself checked by composing back to the identity.
    let na_inv = nagata(field, &field.neg(alpha));
    if !na.compose(&na_inv)?.is_identity() {
        return Err(Error::Invariant(format!("N_{} is not inverted by N_-{}", field.format_value(alpha), field.format_value(alpha))));
    }
    let gamma = field.div(&field.mul(alpha, &field.sub(u, &field.one())), u)?;
    let inner = lu.compose(&nagata(field, &gamma))?;
    let left = na.compose(&inner.compose(&na_inv)?)?;
    out.push(IdentityReport::maps("nagata_normal_closure", pu, left, lu));
    Ok(out)
}
