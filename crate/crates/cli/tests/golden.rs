//! Replays CLI requests against the JSON files in `tests/golden`. Set
//! `UPDATE_GOLDEN=1` to rewrite them; the semantic checks still apply.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

const N1: &str = "(x1 - 2*x2*(x1*x3+x2^2) - x3*(x1*x3+x2^2)^2, x2 + x3*(x1*x3+x2^2), x3)";
const N_MINUS_1: &str = "(x1 + 2*x2*(x1*x3+x2^2) - x3*(x1*x3+x2^2)^2, x2 - x3*(x1*x3+x2^2), x3)";

struct Case {
    name: &'static str,
    args: Vec<&'static str>,
    exit: i32,
    check: fn(&Value),
}

fn run(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_saut")).args(args).output().expect("run saut");
    (String::from_utf8(out.stdout).unwrap(), out.status.code().unwrap())
}

fn endo(text: &str, field: &str) -> Value {
    let (out, code) = run(&["jacobian", text, "--field", field]);
    assert_eq!(code, 0, "{out}");
    serde_json::from_str::<Value>(&out).unwrap()["input"].clone()
}

fn comps(v: &Value) -> Vec<String> {
    v["components"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect()
}

fn cases() -> Vec<Case> {
    vec![
        Case {
            name: "invert_parabola",
            args: vec!["invert", "(x1+x2^2, x2)", "--field", "QQ"],
            exit: 0,
            check: |v| {
                assert_eq!(comps(&v["inverse"]), ["-x2^2 + x1", "x2"]);
                assert_eq!(v["roundtrip"]["f_after_inverse"], true);
                assert_eq!(v["roundtrip"]["inverse_after_f"], true);
            },
        },
        Case {
            name: "pipeline_parabola",
            args: vec!["degenerate", "--pipeline", "(x1+x2^2, x2)", "--field", "QQ"],
            exit: 0,
            check: |v| {
                assert_eq!(comps(&v["commutator"]), ["x1 - 2*t*x2 - t^2", "x2"]);
                assert_eq!(v["slope"], serde_json::json!([1, 1]));
                // (x1 - 2 ε2, x2) with ε2 = 1.
                assert_eq!(v["witness"], serde_json::json!(["0", "1"]));
                assert_eq!(comps(&v["limit"]), ["x1 - 2", "x2"]);
                assert_eq!(v["nontrivial"], true);
            },
        },
        Case {
            name: "rho_cubic_gf2",
            args: vec!["rho", "(x1, x2+x1^3)", "--field", "GF(2)"],
            exit: 0,
            check: |v| assert_eq!(v["class"]["is_zero"], false),
        },
        Case {
            name: "rho_shear_gf2",
            args: vec!["rho", "(x1+x2, x2)", "--field", "GF(2)"],
            exit: 0,
            check: |v| assert_eq!(v["class"]["representative"], "x1"),
        },
        Case {
            name: "rho_translation_gf3",
            args: vec!["rho", "(x1+1, x2+2)", "--field", "GF(3)"],
            exit: 0,
            check: |v| assert_eq!(v["class"]["is_zero"], true),
        },
        Case {
            name: "rho_rotation_gf3",
            args: vec!["rho", "(-x2, x1)", "--field", "GF(3)"],
            exit: 0,
            check: |v| assert_eq!(v["class"]["is_zero"], true),
        },
        Case {
            name: "nagata_suite",
            args: vec!["nagata", "--alpha", "1", "--beta", "2", "--u", "3", "--field", "QQ"],
            exit: 0,
            check: |v| {
                let reports = v["reports"].as_array().unwrap();
                assert_eq!(reports.len(), 5);
                assert!(reports.iter().all(|r| r["verdict"] == true));
            },
        },
        Case {
            name: "nagata_inverse",
            args: vec!["invert", N1, "--field", "QQ"],
            exit: 0,
            check: |v| assert_eq!(v["inverse"], endo(N_MINUS_1, "QQ")),
        },
        Case {
            name: "nagata_jacobian",
            args: vec!["jacobian", N1, "--field", "QQ"],
            exit: 0,
            check: |v| assert_eq!(v["jacobian"], "1"),
        },
        Case {
            name: "sign_translation_gf2",
            args: vec!["sign", "(x1+1, x2)", "--field", "GF(2)"],
            exit: 0,
            check: |v| {
                assert_eq!(v["cycle_type"], serde_json::json!({ "2": 2 }));
                assert_eq!(v["sign"], 1);
            },
        },
        Case {
            name: "sign_shear_gf2",
            args: vec!["sign", "(x1+x2, x2)", "--field", "GF(2)"],
            exit: 0,
            check: |v| {
                assert_eq!(v["cycle_type"], serde_json::json!({ "1": 2, "2": 1 }));
                assert_eq!(v["sign"], -1);
            },
        },
        Case {
            name: "fixed_points_gf4",
            args: vec!["sign", "(x1+x2, x2)", "--field", "GF(4)"],
            exit: 0,
            check: |v| assert_eq!(v["fixed_points"], 4),
        },
        Case {
            name: "census_gf2_n1",
            args: vec!["census", "--n", "1", "--field", "GF(2)"],
            exit: 0,
            check: |v| {
                assert_eq!(v["translations"]["odd_example"], endo("(x1+1)", "GF(2)"));
                assert_eq!(v["verified"], true);
            },
        },
        Case {
            name: "census_gf4_n2",
            args: vec!["census", "--n", "2", "--field", "GF(4)"],
            exit: 0,
            check: |v| {
                assert_eq!(v["elementary_mode"], "exhaustive");
                assert_eq!(v["elementary"]["odd"], 0);
                assert_eq!(v["verified"], true);
            },
        },
        Case {
            name: "census_gf2_n2",
            args: vec!["census", "--n", "2", "--field", "GF(2)"],
            exit: 0,
            check: |v| {
                assert_eq!(v["translations"]["odd"], 0);
                assert_eq!(v["sl_elementary"]["odd_example"], endo("(x1+x2, x2)", "GF(2)"));
                assert_eq!(v["witness_sign"], -1);
            },
        },
        Case {
            name: "vmember_r_gf2",
            args: vec!["vmember", "x1^2+x1", "--field", "GF(2)"],
            exit: 0,
            check: |v| assert_eq!(v["membership"]["member"], true),
        },
        Case {
            name: "vmember_x_gf2",
            args: vec!["vmember", "x1", "--field", "GF(2)"],
            exit: 1,
            check: |v| assert_eq!(v["membership"]["member"], false),
        },
        Case {
            name: "vmember_x_gf3",
            args: vec!["vmember", "x1", "--field", "GF(3)"],
            exit: 0,
            check: |v| assert_eq!(v["membership"]["member"], true),
        },
        Case {
            name: "vmember_constant_gf5",
            args: vec!["vmember", "3", "--field", "GF(5)"],
            exit: 0,
            check: |v| assert_eq!(v["membership"]["member"], true),
        },
        Case {
            name: "h_commutator_square",
            args: vec!["verify-identities", "h", "--q", "2*x2^2", "--eps", "1"],
            exit: 0,
            check: |v| {
                assert_eq!(v["verdict"], true);
                assert_eq!(v["right"], serde_json::json!(["x1 + 4*x2 + 2", "x2"]));
            },
        },
        Case {
            name: "h_commutator_product",
            args: vec!["verify-identities", "h", "--q", "x2*x3", "--eps", "0,5"],
            exit: 0,
            check: |v| {
                assert_eq!(v["verdict"], true);
                assert_eq!(v["right"], serde_json::json!(["x1 + 5*x2", "x2", "x3"]));
            },
        },
        Case {
            name: "u_commutator_square",
            args: vec!["verify-identities", "u", "--q", "x2^2", "--alpha", "2"],
            exit: 0,
            check: |v| {
                assert_eq!(v["verdict"], true);
                assert_eq!(v["right"], serde_json::json!(["7*x2^2 + x1", "x2"]));
            },
        },
        Case {
            name: "char2_identity_gf4",
            args: vec!["verify-identities", "char2", "--theta", "[1,0]", "--mu", "1", "--nu", "[1,1]", "--field", "GF(4)"],
            exit: 0,
            check: |v| assert_eq!(v["verdict"], true),
        },
        Case {
            name: "degenerate_family",
            args: vec!["degenerate", "(x1 + t*x2^2, x2) over QQ[t]"],
            exit: 0,
            check: |v| {
                assert_eq!(v["nontrivial"], true);
                assert!(v["samples"].as_array().unwrap().iter().all(|s| s["ok"] == true));
            },
        },
        Case {
            name: "alexander_parabola",
            args: vec!["alexander", "(x1+x2^2, x2)"],
            exit: 0,
            check: |v| assert_eq!(v["linear_part"], serde_json::json!([["1", "0"], ["0", "1"]])),
        },
        Case {
            name: "decompose_not_automorphism",
            args: vec!["decompose", "(x1+x2^2, x2^2)"],
            exit: 1,
            check: |v| assert_eq!(v["error"]["kind"], "negative"),
        },
        Case {
            name: "parse_error_position",
            args: vec!["jacobian", "(x1 + x2,\n y)"],
            exit: 2,
            check: |v| {
                assert_eq!(v["error"]["line"], 2);
                assert_eq!(v["error"]["column"], 2);
            },
        },
        Case {
            name: "random_point_needs_seed",
            args: vec!["sln-extract", "(x1+x2^2, x2)"],
            exit: 2,
            check: |v| assert_eq!(v["error"]["kind"], "input"),
        },
    ]
}

#[test]
fn golden() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    for case in cases() {
        let (out, code) = run(&case.args);
        assert_eq!(code, case.exit, "{}: exit status, output {out}", case.name);
        (case.check)(&serde_json::from_str(&out).unwrap_or_else(|e| panic!("{}: {e}", case.name)));
        let (again, _) = run(&case.args);
        assert_eq!(out, again, "{}: output differs between runs", case.name);
        let path = dir.join(format!("{}.json", case.name));
        if update {
            std::fs::write(&path, &out).unwrap();
        } else {
            let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!(out, expected, "{}: differs from golden file", case.name);
        }
    }
}

#[test]
fn seeded_point_is_reproducible() {
    let args = ["sln-extract", "(x1+x2^2, x2)", "--seed", "7"];
    let (a, code) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(a, run(&args).0);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["extraction"]["elementary"], true);
}

#[test]
fn file_input_matches_inline() {
    let path = std::env::temp_dir().join(format!("saut-golden-{}.txt", std::process::id()));
    std::fs::write(&path, "(x1+x2^2, x2)\n").unwrap();
    let at = format!("@{}", path.display());
    let from_file = run(&["invert", &at]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(from_file, run(&["invert", "(x1+x2^2, x2)"]));
}
