use super::*;
use crate::sample::Sampler;

fn e(text: &str) -> Endo {
    Endo::parse(text, None).unwrap()
}

fn q() -> Field {
    Field::rationals()
}

#[test]
fn generator_examples() {
    let f = q();
    let t = translation(&f, &[f.one(), f.zero()]);
    assert_eq!(t, e("(x1 + 1, x2) over QQ"));
    let ring = ParamRing::base(f.clone());
    let s = crate::poly::parse_poly("x2^3", &ring, 2).unwrap();
    assert_eq!(elementary(2, 0, &s).unwrap(), e("(x1 + x2^3, x2) over QQ"));
    assert!(matches!(elementary(2, 1, &s), Err(Error::InvalidGenerator(_))));
    let rot = linear(&Matrix::from_i64(&f, &[&[0, -1], &[1, 0]])).unwrap();
    assert_eq!(rot, e("(-x2, x1) over QQ"));
    assert_eq!(rot.jacobian().unwrap().to_string(), "1");
    assert_eq!(linear(&Matrix::from_i64(&f, &[&[1, 2], &[2, 4]])), Err(Error::SingularMatrix));
    let b = vec![MultiPoly::zero(&ring, 2), MultiPoly::zero(&ring, 2)];
    assert_eq!(triangular(&[f.zero(), f.one()], &b), Err(Error::ZeroDiagonal));
    let tri = triangular(&[f.from_i64(2), f.from_i64(3)], &[MultiPoly::one(&ring, 2), s.substitute(&[MultiPoly::var(&ring, 2, 1), MultiPoly::var(&ring, 2, 0)], None).unwrap()]).unwrap();
    assert_eq!(tri, e("(2*x1 + 1, 3*x2 + x1^3) over QQ"));
    assert_eq!(tri.jacobian().unwrap().to_string(), "6");
    let g = Generator::Translation(vec![f.one()]);
    assert!(matches!(make_generator(&f, 2, &g), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn formal_inverse_examples() {
    let f = e("(x1 + x2^2, x2) over QQ");
    assert_eq!(formal_inverse(&f, None).unwrap(), e("(x1 - x2^2, x2) over QQ"));
    let nagata = |a: &str| {
        e(&format!(
            "(x1 - 2*({a})*x2*(x1*x3 + x2^2) - ({a})^2*x3*(x1*x3 + x2^2)^2, x2 + ({a})*x3*(x1*x3 + x2^2), x3) over QQ"
        ))
    };
    assert_eq!(formal_inverse(&nagata("1"), None).unwrap(), nagata("-1"));
    assert!(matches!(formal_inverse(&e("(x1^2, x2) over QQ"), None), Err(Error::JacobianNotUnit(_))));
    let affine = e("(2*x1 + x2 + 1, x1 + x2 - 3) over QQ");
    let inv = formal_inverse(&affine, None).unwrap();
    assert!(affine.compose(&inv).unwrap().is_identity());
    // Over k[t] the linear part may involve t.
    let ft = e("(x1 + t*x2 + x2^2, x2 + 1) over QQ[t]");
    let it = formal_inverse(&ft, None).unwrap();
    assert!(ft.compose(&it).unwrap().is_identity());
    assert!(it.compose(&ft).unwrap().is_identity());
    let cap = formal_inverse(&e("(x1 + (x2 + x1^2)^2, x2 + x1^2) over QQ"), Some(2));
    assert_eq!(cap, Err(Error::NotInvertible(2)));
}

#[test]
fn formal_inverse_laurent_unit() {
    let f = e("(t*x1 + x2^2, t^-1*x2) over QQ[t,1/t]");
    let g = formal_inverse(&f, None).unwrap();
    assert!(f.compose(&g).unwrap().is_identity());
    let p = e("(t*x1, x2) over QQ[t]");
    assert!(matches!(formal_inverse(&p, None), Err(Error::JacobianNotUnit(_))));
}

#[test]
fn jvdk_examples() {
    let f = e("(x2, x1 + x2^2) over QQ");
    let w = jvdk_decompose(&f).unwrap();
    assert_eq!(w.evaluate(), f);
    assert_eq!(w.len(), 2);
    assert!(matches!(w.factors[0], TameFactor::Triangular { .. }));
    assert!(w.factors[1].is_affine());
    let id = Endo::identity(f.ring(), 2);
    assert!(jvdk_decompose(&id).unwrap().is_empty());
    assert!(matches!(jvdk_decompose(&e("(x1 + x2^2, x2 + x1^2) over QQ")), Err(Error::NotAutomorphism(_))));
    assert!(is_automorphism(&e("(x1 + x2^2, x2) over QQ")));
    assert!(!is_automorphism(&e("(x1, x2*x1) over QQ")));
    let json = serde_json::to_string(&w).unwrap();
    assert_eq!(
        json,
        r#"{"factors":[{"kind":"triangular","a":["1","1"],"b":["0","x1^2"]},{"kind":"affine","matrix":[["0","1"],["1","0"]],"vector":["0","0"]}]}"#
    );
}

#[test]
fn saut_normalization_examples() {
    let f = q();
    let d = |c: Value| TameFactor::Affine {
        matrix: Matrix::from_rows(&f, vec![vec![c, f.zero()], vec![f.zero(), f.one()]]).unwrap(),
        translation: vec![f.zero(), f.zero()],
    };
    let w = TameWord::new(&f, 2, vec![d(f.from_i64(2)), d(f.from_ratio(1, 2).unwrap())]);
    let nw = saut_normalize_word(&w).unwrap();
    assert!(nw.evaluate().is_identity());
    assert!(nw.factors.iter().all(|x| f.is_one(&x.jacobian(&f))));
    let ring = ParamRing::base(f.clone());
    let bad = TameWord::new(
        &f,
        2,
        vec![TameFactor::Triangular {
            a: vec![f.from_i64(2), f.one()],
            b: vec![MultiPoly::zero(&ring, 2), crate::poly::parse_poly("x1^3", &ring, 2).unwrap()],
        }],
    );
    assert!(matches!(saut_normalize_word(&bad), Err(Error::JacobianNotOne(_))));
}

#[test]
fn random_words_formal_inverse() {
    for (field, budget) in [(q(), 9), (Field::make(3, 1).unwrap(), 16)] {
        let mut s = Sampler::new(&field, 11);
        for _ in 0..25 {
            let w = s.tame_word(2, 5, 4, budget, false);
            let f = w.evaluate();
            let g = formal_inverse(&f, None).unwrap();
            assert!(f.compose(&g).unwrap().is_identity(), "{f}");
            assert!(g.compose(&f).unwrap().is_identity(), "{f}");
            assert_eq!(g.degree(), f.degree());
            assert_eq!(g, w.inverse().evaluate());
        }
    }
}

#[test]
fn random_words_three_variables() {
    let field = q();
    let mut s = Sampler::new(&field, 5);
    for _ in 0..10 {
        let w = s.tame_word(3, 4, 2, 4, false);
        let f = w.evaluate();
        let g = formal_inverse(&f, None).unwrap();
        assert!(f.compose(&g).unwrap().is_identity());
        assert_eq!(TameWord::new(&field, 3, vec![]).concat(&w).evaluate(), f);
    }
}

#[test]
fn random_words_jvdk_round_trip() {
    for (seed, field) in [(3, q()), (4, Field::make(2, 1).unwrap()), (5, Field::make(2, 2).unwrap())] {
        let mut s = Sampler::new(&field, seed);
        for _ in 0..25 {
            let f = s.tame_word(2, 6, 3, 27, false).evaluate();
            let w = jvdk_decompose(&f).unwrap();
            assert_eq!(w.evaluate(), f);
            let nw = saut_normalize_word(&TameWord::new(&field, 2, vec![])).unwrap();
            assert!(nw.is_empty());
        }
    }
}

#[test]
fn factor_inverses_and_jacobians() {
    let field = Field::make(5, 1).unwrap();
    let mut s = Sampler::new(&field, 9);
    for _ in 0..20 {
        for x in [s.affine_factor(3, false), s.triangular_factor(3, 3, false)] {
            let e1 = x.to_endo();
            assert!(e1.compose(&x.inverse().to_endo()).unwrap().is_identity());
            assert_eq!(e1.jacobian().unwrap().constant_value(), Some(x.jacobian(&field)));
        }
    }
}

#[test]
fn saut_normalization_random() {
    let field = Field::make(3, 1).unwrap();
    let mut s = Sampler::new(&field, 21);
    for _ in 0..20 {
        let w = s.tame_word(2, 5, 3, 9, false);
        let scale = field.inv(&w.jacobian()).unwrap();
        let mut factors = w.factors.clone();
        factors.push(TameFactor::Affine {
            matrix: Matrix::from_rows(&field, vec![vec![scale, field.zero()], vec![field.zero(), field.one()]]).unwrap(),
            translation: vec![field.zero(), field.zero()],
        });
        let w = TameWord::new(&field, 2, factors);
        let nw = saut_normalize_word(&w).unwrap();
        assert_eq!(nw.evaluate(), w.evaluate());
        assert!(nw.factors.iter().all(|x| field.is_one(&x.jacobian(&field))));
    }
}
