use saut_core::{tame, Endo, ParamRing};

#[test]
fn inverse_through_public_api() {
    let qq: ParamRing = "QQ".parse().unwrap();
    let f = Endo::parse("(x1 + x2^2, x2)", Some(&qq)).unwrap();
    let g = tame::formal_inverse(&f, None).unwrap();
    assert!(f.compose(&g).unwrap().is_identity());
    assert_eq!(g, Endo::parse("(x1 - x2^2, x2) over QQ", None).unwrap());
}

#[test]
fn endo_json_reparses() {
    let f = Endo::parse("(x1 + t*x2^3 + [1,1], x2) over GF(4)[t]", None).unwrap();
    let v = serde_json::to_value(&f).unwrap();
    let comps: Vec<&str> = v["components"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    let text = format!("({}) over {}", comps.join(", "), v["ring"].as_str().unwrap());
    assert_eq!(Endo::parse(&text, None).unwrap(), f);
}
