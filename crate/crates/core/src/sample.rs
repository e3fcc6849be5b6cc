//! Seeded random scalars, polynomials and tame words.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::{Field, ParamRing, Value};
use crate::linalg::Matrix;
use crate::poly::{Mono, MultiPoly};
use crate::tame::{TameFactor, TameWord};

pub struct Sampler {
    rng: ChaCha8Rng,
    field: Field,
    ring: ParamRing,
}

impl Sampler {
    pub fn new(field: &Field, seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), field: field.clone(), ring: ParamRing::base(field.clone()) }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Uniform over a finite field; small integers in `-2..=2` over QQ.
    pub fn scalar(&mut self) -> Value {
        match self.field.cardinality() {
            Some(q) => self.field.element(self.rng.gen_range(0..q as u32)),
            None => self.field.from_i64(self.rng.gen_range(-2..=2)),
        }
    }

    pub fn nonzero_scalar(&mut self) -> Value {
        match self.field.cardinality() {
            Some(q) => self.field.element(self.rng.gen_range(1..q as u32)),
            None => {
                let choices = [(1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)];
                let (a, b) = *choices.choose(&mut self.rng).unwrap();
                self.field.from_ratio(a, b).unwrap()
            }
        }
    }

    /// A polynomial in the listed variables (0-based) of degree at most
    /// `max_deg` with up to `max_terms` terms.
    pub fn poly(&mut self, n: usize, vars: &[usize], max_deg: u32, max_terms: usize) -> MultiPoly {
        let mut p = MultiPoly::zero(&self.ring, n);
        if vars.is_empty() {
            let c = self.scalar();
            p.add_term(Mono::ONE, c);
            return p;
        }
        let count = self.rng.gen_range(1..=max_terms.max(1));
        for _ in 0..count {
            let d = self.rng.gen_range(0..=max_deg);
            let mut e = vec![0u16; n];
            for _ in 0..d {
                e[*vars.choose(&mut self.rng).unwrap()] += 1;
            }
            let c = self.nonzero_scalar();
            p.add_term(Mono::new(&e, 0), c);
        }
        p
    }

    /// A polynomial of exact degree `deg` in the listed variables.
    pub fn poly_of_degree(&mut self, n: usize, vars: &[usize], deg: u32, max_terms: usize) -> MultiPoly {
        loop {
            let mut p = self.poly(n, vars, deg, max_terms);
            let mut e = vec![0u16; n];
            for _ in 0..deg {
                e[*vars.choose(&mut self.rng).unwrap()] += 1;
            }
            let c = self.nonzero_scalar();
            p.add_term(Mono::new(&e, 0), c);
            if p.degree() == Some(deg) {
                return p;
            }
        }
    }

    pub fn matrix(&mut self, n: usize) -> Matrix {
        let mut m = Matrix::zeros(&self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                let v = self.scalar();
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn invertible_matrix(&mut self, n: usize) -> Matrix {
        loop {
            let m = self.matrix(n);
            if !self.field.is_zero(&m.det()) {
                return m;
            }
        }
    }

    /// A random matrix of determinant 1.
    pub fn sl_matrix(&mut self, n: usize) -> Matrix {
        let m = self.invertible_matrix(n);
        let d = self.field.inv(&m.det()).unwrap();
        let mut out = m.clone();
        for j in 0..n {
            out.set(0, j, self.field.mul(m.get(0, j), &d));
        }
        out
    }

    pub fn affine_factor(&mut self, n: usize, special: bool) -> TameFactor {
        let matrix = if special { self.sl_matrix(n) } else { self.invertible_matrix(n) };
        let translation = (0..n).map(|_| self.scalar()).collect();
        TameFactor::Affine { matrix, translation }
    }

    /// A triangular factor whose `b_i` have degree at most `max_deg`, with
    /// at least one of exact degree `max_deg` when `n > 1`.
    pub fn triangular_factor(&mut self, n: usize, max_deg: u32, special: bool) -> TameFactor {
        let mut a: Vec<Value> = (0..n).map(|_| self.nonzero_scalar()).collect();
        if special {
            let prod = a[1..].iter().fold(self.field.one(), |acc, x| self.field.mul(&acc, x));
            a[0] = self.field.inv(&prod).unwrap();
        }
        let top = if n > 1 { self.rng.gen_range(1..n) } else { 0 };
        let b = (0..n)
            .map(|i| {
                let vars: Vec<usize> = (0..i).collect();
                if i == top && n > 1 {
                    self.poly_of_degree(n, &vars, max_deg, 3)
                } else {
                    self.poly(n, &vars, max_deg, 2)
                }
            })
            .collect();
        TameFactor::Triangular { a, b }
    }

    /// Alternating affine/triangular word with `len` factors. Triangular
    /// degrees are drawn so that their product stays at most `max_total_deg`.
    pub fn tame_word(&mut self, n: usize, len: usize, max_factor_deg: u32, max_total_deg: u32, special: bool) -> TameWord {
        let mut factors = Vec::with_capacity(len);
        let mut budget = max_total_deg.max(1);
        let mut affine = self.rng.gen_bool(0.5);
        for _ in 0..len {
            if affine || budget < 2 {
                factors.push(self.affine_factor(n, special));
            } else {
                let d = self.rng.gen_range(2..=max_factor_deg.min(budget).max(2));
                budget /= d;
                factors.push(self.triangular_factor(n, d, special));
            }
            affine = !affine;
        }
        TameWord::new(&self.field, n, factors)
    }
}
