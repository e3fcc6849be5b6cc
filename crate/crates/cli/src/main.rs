//! `saut`: command-line front-end for saut-core. Every subcommand prints one
//! JSON document on stdout. Exit status is 0 for a true verdict, 1 for a
//! mathematical negative and 2 for malformed input.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use saut_core::degeneration::{self, SampleCheck};
use saut_core::sample::Sampler;
use saut_core::{finite_action, identities, quotient_v, tame};
use saut_core::{parse_poly, Endo, Error, Field, MultiPoly, ParamKind, ParamRing, Value};
use serde::Serialize;
use serde_json::{json, Value as Json};

#[derive(Parser)]
#[command(name = "saut", version, about = "Exact computations with polynomial automorphisms")]
struct Cli {
    /// Coefficient ring: QQ, GF(p), GF(p^r), optionally with [t] or [t,1/t].
    /// An `over RING` suffix on a map takes precedence.
    #[arg(long, global = true)]
    field: Option<String>,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// f ∘ g (g is applied first).
    Compose { f: String, g: String },
    /// Polynomial inverse with a round-trip check.
    Invert {
        f: String,
        /// Highest degree tried for the inverse.
        #[arg(long)]
        cap: Option<u32>,
    },
    /// Jacobian determinant.
    Jacobian { f: String },
    /// Affine/triangular decomposition of a plane automorphism.
    Decompose { f: String },
    /// Degenerate a family over k[t] with g(0) = id, or run the commutator
    /// pipeline on a map with --pipeline.
    Degenerate {
        f: String,
        #[arg(long)]
        pipeline: bool,
        /// Shift vector ε; searched for on the witness grid when absent.
        #[arg(long)]
        eps: Option<String>,
        /// Witness grid bound H.
        #[arg(long)]
        grid: Option<u32>,
        #[command(flatten)]
        samples: Samples,
    },
    /// The family α^{-1} ∘ f ∘ α with α = (t x1, ..., t xn).
    Alexander { f: String },
    /// Elementary matrix extracted from h and a point it moves.
    SlnExtract {
        h: String,
        /// Point p; drawn at random from --seed when absent.
        #[arg(long)]
        point: Option<String>,
        /// Target q, defaulting to h(p).
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        samples: Samples,
    },
    /// Permutation of the finite point set, with cycle type and sign.
    Sign { f: String },
    /// Parity census of translations, elementary maps and SL_n generators.
    Census {
        #[arg(long)]
        n: usize,
    },
    /// Class of a plane SAut map in k[x]/V.
    Rho {
        f: String,
        /// Also report the class modulo x.
        #[arg(long)]
        modulo_x: bool,
    },
    /// Membership of a polynomial in x1 in V.
    Vmember {
        s: String,
        /// Highest stratum J used.
        #[arg(long)]
        stratum: Option<usize>,
    },
    /// Commutator identities among elementary, translation and diagonal maps.
    #[command(subcommand)]
    VerifyIdentities(IdentityKind),
    /// The five identities of the Nagata family.
    Nagata {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        beta: String,
        #[arg(long)]
        u: String,
    },
}

#[derive(Args)]
struct Samples {
    /// Values t0 at which families are checked against direct composition.
    #[arg(long, default_value = "1,2")]
    samples: String,
}

#[derive(Subcommand)]
enum IdentityKind {
    /// e_q^{-1} ∘ τ_ε^{-1} ∘ e_q ∘ τ_ε.
    H {
        /// q in x2..xn; n is one more than the length of --eps.
        #[arg(long)]
        q: String,
        #[arg(long)]
        eps: String,
    },
    /// e_q^{-1} ∘ δ^{-1} ∘ e_q ∘ δ.
    U {
        #[arg(long)]
        q: String,
        #[arg(long)]
        alpha: String,
    },
    /// The characteristic-2 identity for θ, μ, ν.
    Char2 {
        #[arg(long)]
        theta: String,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
    },
}

enum Failure {
    /// Malformed input, with the offending text for positions.
    Input { error: String, source: Option<(String, usize)> },
    /// A well-formed input failing a mathematical condition.
    Negative(String),
}

impl Failure {
    fn input(e: impl ToString) -> Failure {
        Failure::Input { error: e.to_string(), source: None }
    }
}

type Outcome = Result<(Json, bool), Failure>;

/// Sorts core errors into the two failure classes. Positions are resolved
/// against `text` when it is the input that was being parsed.
fn classify(e: Error, text: Option<&str>) -> Failure {
    use Error::*;
    let pos = match &e {
        Syntax { pos, .. } | UnknownVariable { pos, .. } => Some(*pos),
        _ => None,
    };
    match e {
        JacobianNotUnit(_) | JacobianNotOne(_) | NotInvertible(_) | NotAutomorphism(_) | NotSAut(_) | NoWitness
        | IsTranslation | DoesNotFixOrigin | FixedPointMissing | DegenerateGeometry | NotIdAtZero | IdentityInput
        | SingularMatrix | ZeroDiagonal | Invariant(_) => Failure::Negative(e.to_string()),
        _ => Failure::Input { error: e.to_string(), source: text.zip(pos).map(|(t, p)| (t.to_string(), p)) },
    }
}

/// 1-based line and column (in characters) of byte offset `pos`.
fn line_column(text: &str, pos: usize) -> (usize, usize) {
    let pos = pos.min(text.len());
    let before = &text[..pos];
    let line = before.matches('\n').count() + 1;
    let start = before.rfind('\n').map_or(0, |k| k + 1);
    (line, before[start..].chars().count() + 1)
}

struct Ctx {
    ring: ParamRing,
}

impl Ctx {
    fn field(&self) -> &Field {
        &self.ring.field
    }

    fn endo(&self, arg: &str) -> Result<Endo, Failure> {
        let text = read_input(arg)?;
        Endo::parse(&text, Some(&self.ring)).map_err(|e| classify(e, Some(&text)))
    }

    fn poly(&self, arg: &str, n: usize) -> Result<MultiPoly, Failure> {
        let text = read_input(arg)?;
        parse_poly(&text, &self.ring, n).map_err(|e| classify(e, Some(&text)))
    }

    fn scalar(&self, text: &str) -> Result<Value, Failure> {
        self.field().parse_value(text).map_err(|e| classify(e, Some(text)))
    }

    fn scalars(&self, text: &str) -> Result<Vec<Value>, Failure> {
        split_list(text).iter().map(|s| self.scalar(s)).collect()
    }
}

/// Inline text, or the contents of a file given as `@path`.
fn read_input(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path)
            .map(|s| s.trim_end().to_string())
            .map_err(|e| Failure::input(format!("cannot read {path}: {e}"))),
        None => Ok(arg.to_string()),
    }
}

/// Splits on commas outside brackets, so `[1,0],1` is two values.
fn split_list(text: &str) -> Vec<String> {
    let text = text.trim();
    let text = text.strip_prefix('(').and_then(|r| r.strip_suffix(')')).unwrap_or(text);
    let mut out = Vec::new();
    let mut depth = 0;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur).trim().to_string());
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn to_json<T: Serialize>(v: &T) -> Json {
    serde_json::to_value(v).expect("reports serialize")
}

fn core<T>(r: saut_core::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| classify(e, None))
}

fn samples_ok(s: &[SampleCheck]) -> bool {
    s.iter().all(|c| c.ok)
}

fn compose(ctx: &Ctx, f: &str, g: &str) -> Outcome {
    let (f, g) = (ctx.endo(f)?, ctx.endo(g)?);
    // A map over k is promoted when the other one has a parameter.
    let kind = [f.ring().kind, g.ring().kind]
        .into_iter()
        .max_by_key(|k| match k {
            ParamKind::NoParam => 0,
            ParamKind::PolyT => 1,
            ParamKind::LaurentT => 2,
        })
        .unwrap();
    let (f, g) = (core(f.promote(kind))?, core(g.promote(kind))?);
    let h = core(f.compose(&g))?;
    Ok((json!({ "f": f, "g": g, "composition": h }), true))
}

fn invert(ctx: &Ctx, f: &str, cap: Option<u32>) -> Outcome {
    let f = ctx.endo(f)?;
    let inv = core(tame::formal_inverse(&f, cap))?;
    let right = core(f.compose(&inv))?.is_identity();
    let left = core(inv.compose(&f))?.is_identity();
    let roundtrip = json!({ "f_after_inverse": right, "inverse_after_f": left });
    Ok((json!({ "input": f, "inverse": inv, "roundtrip": roundtrip }), left && right))
}

fn jacobian(ctx: &Ctx, f: &str) -> Outcome {
    let f = ctx.endo(f)?;
    let jac = core(f.jacobian())?;
    let unit = jac.constant_value().is_some_and(|c| !f.field().is_zero(&c));
    Ok((json!({ "input": f, "jacobian": jac, "unit": unit }), true))
}

fn decompose(ctx: &Ctx, f: &str) -> Outcome {
    let f = ctx.endo(f)?;
    let word = core(tame::jvdk_decompose(&f))?;
    let recomposes = word.evaluate() == f;
    Ok((json!({ "input": f, "factors": word.len(), "word": word, "recomposes": recomposes }), recomposes))
}

fn degenerate(ctx: &Ctx, f: &str, pipeline: bool, eps: Option<&str>, grid: Option<u32>, samples: &str) -> Outcome {
    let g = ctx.endo(f)?;
    let ts = ctx.scalars(samples)?;
    if pipeline {
        let cert = core(degeneration::commutator_pipeline(&g, &ts))?;
        let ok = cert.verified();
        return Ok((to_json(&cert), ok));
    }
    let eps = match eps {
        Some(e) => ctx.scalars(e)?,
        None => core(degeneration::find_witness(&g, grid))?,
    };
    let d = core(degeneration::degenerate(&g, &eps))?;
    let checks = ts
        .iter()
        .map(|t0| Ok(SampleCheck { t0: ctx.field().scalar(t0.clone()), ok: core(degeneration::sample_check(&g, &eps, &d, t0))? }))
        .collect::<Result<Vec<_>, Failure>>()?;
    let nontrivial = !d.limit.is_identity();
    let ok = nontrivial && samples_ok(&checks);
    let eps: Vec<_> = eps.into_iter().map(|c| ctx.field().scalar(c)).collect();
    Ok((json!({ "input": g, "witness": eps, "degeneration": d, "nontrivial": nontrivial, "samples": checks }), ok))
}

fn alexander(ctx: &Ctx, f: &str) -> Outcome {
    let f = ctx.endo(f)?;
    Ok((to_json(&core(degeneration::alexander_family(&f))?), true))
}

fn sln_extract(ctx: &Ctx, h: &str, point: Option<&str>, target: Option<&str>, seed: Option<u64>, samples: &str) -> Outcome {
    let h = ctx.endo(h)?;
    let ts = ctx.scalars(samples)?;
    let p = match (point, seed) {
        (Some(p), _) => ctx.scalars(p)?,
        (None, Some(seed)) => random_moved_point(&h, seed)?,
        (None, None) => return Err(Failure::input("a random point needs --seed; give --point or --seed")),
    };
    let q = target.map(|q| ctx.scalars(q)).transpose()?;
    let x = core(degeneration::sln_extraction(&h, &p, q.as_deref(), &ts))?;
    let ok = x.elementary && samples_ok(&x.samples);
    let p: Vec<_> = p.into_iter().map(|c| ctx.field().scalar(c)).collect();
    Ok((json!({ "point": p, "extraction": x }), ok))
}

fn random_moved_point(h: &Endo, seed: u64) -> Result<Vec<Value>, Failure> {
    let mut s = Sampler::new(h.field(), seed);
    for _ in 0..256 {
        let p: Vec<Value> = (0..h.n()).map(|_| s.scalar()).collect();
        if core(h.eval(&p))? != p {
            return Ok(p);
        }
    }
    Err(Failure::Negative("no sampled point is moved by h".into()))
}

fn sign(ctx: &Ctx, f: &str) -> Outcome {
    let f = ctx.endo(f)?;
    let perm = core(finite_action::permutation_of(&f))?;
    let mut out = to_json(&perm);
    out["order"] = json!(perm.order());
    out["fixed_points"] = json!(perm.fixed_points());
    Ok((out, true))
}

fn census(ctx: &Ctx, n: usize) -> Outcome {
    let report = core(finite_action::even_action_census(ctx.field(), n))?;
    let ok = report.verified;
    Ok((to_json(&report), ok))
}

fn rho(ctx: &Ctx, f: &str, modulo_x: bool) -> Outcome {
    let f = ctx.endo(f)?;
    let class = core(quotient_v::rho(&f))?;
    let mut out = json!({ "input": f, "class": class });
    if modulo_x {
        out["modulo_x"] = to_json(&core(class.modulo_x())?);
    }
    Ok((out, true))
}

fn vmember(ctx: &Ctx, s: &str, stratum: Option<usize>) -> Outcome {
    let s = ctx.poly(s, 1)?;
    let m = core(quotient_v::v_membership(&s, stratum))?;
    let member = m.member;
    Ok((json!({ "input": s, "membership": m }), member))
}

fn verify_identities(ctx: &Ctx, kind: &IdentityKind) -> Outcome {
    let report = match kind {
        IdentityKind::H { q, eps } => {
            let eps = ctx.scalars(eps)?;
            let q = ctx.poly(q, eps.len() + 1)?;
            core(identities::verify_h_commutator(&q, &eps))?
        }
        IdentityKind::U { q, alpha } => {
            let alpha = ctx.scalars(alpha)?;
            let q = ctx.poly(q, alpha.len() + 1)?;
            core(identities::verify_u_commutator(&q, &alpha))?
        }
        IdentityKind::Char2 { theta, mu, nu } => {
            let (t, m, n) = (ctx.scalar(theta)?, ctx.scalar(mu)?, ctx.scalar(nu)?);
            core(identities::verify_char2_identity(ctx.field(), &t, &m, &n))?
        }
    };
    let ok = report.verdict;
    Ok((to_json(&report), ok))
}

fn nagata(ctx: &Ctx, alpha: &str, beta: &str, u: &str) -> Outcome {
    let (a, b, u) = (ctx.scalar(alpha)?, ctx.scalar(beta)?, ctx.scalar(u)?);
    let reports = core(identities::nagata_suite(ctx.field(), &a, &b, &u))?;
    let ok = reports.iter().all(|r| r.verdict);
    Ok((json!({ "reports": reports, "all_hold": ok }), ok))
}

fn run(cli: &Cli) -> Outcome {
    let ring = match &cli.field {
        Some(s) => s.parse::<ParamRing>().map_err(|e| classify(e, None))?,
        None => ParamRing::base(Field::rationals()),
    };
    let ctx = Ctx { ring };
    match &cli.command {
        Command::Compose { f, g } => compose(&ctx, f, g),
        Command::Invert { f, cap } => invert(&ctx, f, *cap),
        Command::Jacobian { f } => jacobian(&ctx, f),
        Command::Decompose { f } => decompose(&ctx, f),
        Command::Degenerate { f, pipeline, eps, grid, samples } => {
            degenerate(&ctx, f, *pipeline, eps.as_deref(), *grid, &samples.samples)
        }
        Command::Alexander { f } => alexander(&ctx, f),
        Command::SlnExtract { h, point, target, seed, samples } => {
            sln_extract(&ctx, h, point.as_deref(), target.as_deref(), *seed, &samples.samples)
        }
        Command::Sign { f } => sign(&ctx, f),
        Command::Census { n } => census(&ctx, *n),
        Command::Rho { f, modulo_x } => rho(&ctx, f, *modulo_x),
        Command::Vmember { s, stratum } => vmember(&ctx, s, *stratum),
        Command::VerifyIdentities(kind) => verify_identities(&ctx, kind),
        Command::Nagata { alpha, beta, u } => nagata(&ctx, alpha, beta, u),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (doc, code) = match run(&cli) {
        Ok((doc, verdict)) => (doc, if verdict { 0 } else { 1 }),
        Err(Failure::Negative(msg)) => (json!({ "error": { "kind": "negative", "message": msg } }), 1),
        Err(Failure::Input { error, source }) => {
            let mut err = json!({ "kind": "input", "message": error });
            if let Some((text, pos)) = source {
                let (line, column) = line_column(&text, pos);
                err["line"] = json!(line);
                err["column"] = json!(column);
            }
            (json!({ "error": err }), 2)
        }
    };
    let text = if cli.pretty { serde_json::to_string_pretty(&doc) } else { serde_json::to_string(&doc) };
    println!("{}", text.expect("JSON output"));
    ExitCode::from(code)
}
