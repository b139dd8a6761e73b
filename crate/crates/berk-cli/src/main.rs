//! `berk`: command-line front end for berk-core.
//!
//! Usage errors exit with 2, computational errors with 3 and an error JSON
//! on stdout. Every numeric report field is tagged "exact" or "approx(tol)".

use std::io::Write;
use std::process::ExitCode;

use berk_core::berkovich::{seminorm_eval, BerkPoint};
use berk_core::equilibrium::{
    entropy_lower_bound, equilibrium_approx, invariance_defect, mean_degree, periodic_solution_measure,
    theorem_e_detect, BallPartition,
};
use berk_core::io::{
    approx, exact, fiber_to_json, map_to_json, measure_to_json, parse_constant, parse_map, parse_point,
    parse_rational, point_to_json, tree_to_dot, Constants,
};
use berk_core::measures_potentials::convex_hull_tree;
use berk_core::rational_map::{ExceptionalSet, RationalMap};
use berk_core::skeleton::{
    catalog, cross_validate, entropies, invariant_set, rokhlin_entropy, shift_model, CatalogEntry, Example,
    InvariantSet, SkeletonMap,
};
use berk_core::valued_field::arith::{fmt_q, q_to_f64, qi};
use berk_core::{Backend, BerkError, Q};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

mod suite;

#[derive(Parser)]
#[command(name = "berk", version, about = "Dynamics on the Berkovich projective line, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args, Clone)]
struct FieldArgs {
    /// padic:p=3,prec=40 | laurentq:prec=40 | laurentfp:p=2,k=1,prec=40
    #[arg(long, default_value = "padic:p=3")]
    backend: String,
    /// name=literal, repeatable
    #[arg(long = "const", value_name = "NAME=LIT")]
    consts: Vec<String>,
}

#[derive(Args, Clone)]
struct MapArgs {
    #[command(flatten)]
    field: FieldArgs,
    /// Map literal in z, e.g. "(z^3)/(1+(a*z)^5)"
    #[arg(long)]
    map: String,
}

#[derive(Args, Clone)]
struct PointArgs {
    #[command(flatten)]
    map: MapArgs,
    /// JSON point, or "can"/"inf"
    #[arg(long)]
    point: String,
}

#[derive(Subcommand)]
enum Command {
    /// Valuation and norm of S(P) for a polynomial P
    EvalNorm {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        point: String,
    },
    /// Image point and local degree
    Image(PointArgs),
    /// Fiber with multiplicities
    Preimages(PointArgs),
    LocalDegree(PointArgs),
    /// Degree, topological degree and inseparability exponent
    Degtop(MapArgs),
    /// Whether the map has good reduction in this coordinate
    GoodReduction(MapArgs),
    /// Totally invariant type I points
    Exceptional(MapArgs),
    /// deg(R)^(-n) (R^*)^n [base]
    Equilibrium {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 4)]
        n: usize,
        /// Base point, default the Gauss point
        #[arg(long, default_value = "can")]
        base: String,
        /// e.g. residue:depth=2[,step=1/2]
        #[arg(long)]
        partition: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Detect potential good reduction
    DetectPgr {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 8)]
        n_max: usize,
    },
    /// Entropy lower bound from the level-n pullback, and log degtop
    EntropyBounds {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
    /// [R^n = S] as an atomic measure
    PeriodicMeasure {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// The map S, default the identity
        #[arg(long, default_value = "z")]
        other: String,
    },
    /// Piecewise-affine skeleton models of the catalog
    Skeleton(SkeletonArgs),
    /// Ball tree of p^(-1)(z^p - z^(p^2))
    Shift {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        check_against_solver: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Reproduction suite
    Examples {
        #[command(subcommand)]
        which: ExamplesCmd,
    },
}

#[derive(Subcommand)]
enum ExamplesCmd {
    RunAll {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Args)]
struct SkeletonArgs {
    /// R0 | R1 | LATTES | GENERAL
    #[arg(long)]
    example: String,
    #[arg(long, default_value_t = 5)]
    d: u32,
    #[arg(long, default_value = "1")]
    alog: String,
    #[arg(long, default_value = "2")]
    alog2: String,
    #[arg(long, default_value = "3")]
    alog3: String,
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value = "2")]
    alog_q: String,
    /// Branch degrees of the general family, e.g. 2,4,4
    #[arg(long, value_delimiter = ',')]
    degrees: Vec<u32>,
    #[arg(long, value_delimiter = ',')]
    alogs: Vec<String>,
    /// Backend of the companion map
    #[arg(long)]
    backend: Option<String>,
    /// Comma list of branches, entropies, invariant-set, cylinders, cross-validate, measure
    #[arg(long, default_value = "branches,entropies,invariant-set")]
    report: String,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn backend(spec: &str) -> berk_core::Result<Backend> {
    let b = Backend::parse(spec)?;
    if spec.contains("prec=") {
        return Ok(b);
    }
    match std::env::var("BERK_PRECISION") {
        Ok(v) => {
            let n: u32 = v.trim().parse().map_err(|_| BerkError::Parse(format!("BERK_PRECISION `{v}`")))?;
            if n == 0 {
                return Err(BerkError::ParamDomain("precision must be at least 1".into()));
            }
            Ok(b.with_precision(n))
        }
        Err(_) => Ok(b),
    }
}

fn field(a: &FieldArgs) -> berk_core::Result<(Backend, Constants)> {
    let b = backend(&a.backend)?;
    let consts = a.consts.iter().map(|s| parse_constant(&b, s)).collect::<berk_core::Result<_>>()?;
    Ok((b, consts))
}

fn map_of(a: &MapArgs) -> berk_core::Result<(Backend, RationalMap)> {
    let (b, c) = field(&a.field)?;
    Ok((b, parse_map(&b, &a.map, &c)?))
}

fn q_exact(x: &Q) -> Value {
    exact(Value::String(fmt_q(x)))
}

fn int_exact(n: usize) -> Value {
    exact(json!(n))
}

const F64_TOL: f64 = 1e-12;

enum Out {
    Json(Value),
    Text(String),
}

fn run(cmd: Command) -> berk_core::Result<(Out, bool)> {
    let ok = |v: Value| Ok((Out::Json(v), true));
    match cmd {
        Command::EvalNorm { field: f, poly, point } => {
            let (b, c) = field(&f)?;
            let p = parse_map(&b, &poly, &c)?;
            if p.den().degree() != Some(0) {
                return Err(BerkError::Parse("--poly must be a polynomial".into()));
            }
            let s = parse_point(&b, &point)?;
            let v = seminorm_eval(&s, p.num())?;
            let (val, norm) = match &v {
                Some(v) => (q_exact(v), approx(b.norm_base().powf(-q_to_f64(v)), F64_TOL)),
                None => (exact(Value::Null), exact(json!(0))),
            };
            ok(json!({"point": point_to_json(&s), "valuation": val, "norm": norm}))
        }
        Command::Image(a) => {
            let (b, r) = map_of(&a.map)?;
            let s = parse_point(&b, &a.point)?;
            let t = r.image_point(&s)?;
            ok(json!({"point": point_to_json(&t), "display": t.to_display(), "local_degree": int_exact(r.local_degree(&s)?)}))
        }
        Command::Preimages(a) => {
            let (b, r) = map_of(&a.map)?;
            let s = parse_point(&b, &a.point)?;
            let f = r.preimages(&s)?;
            let total: usize = f.iter().map(|x| x.1).sum();
            ok(json!({"target": point_to_json(&s), "fiber": fiber_to_json(&f), "total_multiplicity": int_exact(total)}))
        }
        Command::LocalDegree(a) => {
            let (b, r) = map_of(&a.map)?;
            let s = parse_point(&b, &a.point)?;
            ok(json!({"point": point_to_json(&s), "local_degree": int_exact(r.local_degree(&s)?)}))
        }
        Command::Degtop(a) => {
            let (_, r) = map_of(&a)?;
            let (qd, sep) = r.deflate();
            ok(json!({
                "map": map_to_json(&r),
                "degree": int_exact(r.degree()),
                "topological_degree": int_exact(r.topological_degree()),
                "inseparable_degree": exact(json!(qd)),
                "separable_part": map_to_json(&sep),
            }))
        }
        Command::GoodReduction(a) => {
            let (_, r) = map_of(&a)?;
            ok(json!({"good_reduction": r.good_reduction_check()}))
        }
        Command::Exceptional(a) => {
            let (_, r) = map_of(&a)?;
            let v = match r.exceptional_set()? {
                ExceptionalSet::FrobeniusInfinite => json!({"kind": "frobenius", "points": null}),
                ExceptionalSet::Points(ps) => {
                    json!({"kind": "finite", "points": ps.iter().map(point_to_json).collect::<Vec<_>>()})
                }
            };
            ok(v)
        }
        Command::Equilibrium { map, n, base, partition, format } => {
            let (b, r) = map_of(&map)?;
            let base = parse_point(&b, &base)?;
            let a = equilibrium_approx(&r, &base, n)?;
            if format == Format::Dot {
                let pts: Vec<BerkPoint> = a.measure.points().cloned().collect();
                return Ok((Out::Text(tree_to_dot(&convex_hull_tree(&pts, &qi(0))?)), true));
            }
            let mut v = json!({
                "n": n,
                "base": point_to_json(&base),
                "measure": measure_to_json(&a.measure),
                "atoms": int_exact(a.measure.len()),
                "total_mass": q_exact(&a.measure.total_mass()),
                "invariance_defect": q_exact(&invariance_defect(&a)?),
            });
            if let Some(p) = partition {
                let part = BallPartition::parse(&p)?;
                let cells: Vec<Value> = part
                    .masses(&a.measure)?
                    .iter()
                    .map(|(c, m)| json!({"ball": point_to_json(&c.ball), "chart": if c.at_infinity { "inf" } else { "0" }, "mass": q_exact(m)}))
                    .collect();
                v["partition"] = json!(cells);
            }
            ok(v)
        }
        Command::DetectPgr { map, n_max } => {
            let (_, r) = map_of(&map)?;
            let d = theorem_e_detect(&r, n_max)?;
            ok(json!({
                "potential_good_reduction": d.good,
                "point": d.point.as_ref().map(point_to_json),
                "level": int_exact(d.level),
            }))
        }
        Command::EntropyBounds { map, n } => {
            let (b, r) = map_of(&map)?;
            let a = equilibrium_approx(&r, &BerkPoint::can(&b), n)?;
            let h = entropy_lower_bound(&r, &a.measure)?;
            ok(json!({
                "n": n,
                "h_lower": approx(h, F64_TOL),
                "mean_degree": approx(mean_degree(&r, &a.measure)?, F64_TOL),
                "degtop_log": approx((r.topological_degree() as f64).ln(), F64_TOL),
                "degree_log": approx((r.degree() as f64).ln(), F64_TOL),
            }))
        }
        Command::PeriodicMeasure { map, n, other } => {
            let (b, r) = map_of(&map)?;
            let c = field(&map.field)?.1;
            let s = parse_map(&b, &other, &c)?;
            let m = periodic_solution_measure(&r, &s, n)?;
            ok(json!({"n": n, "measure": measure_to_json(&m), "total_mass": q_exact(&m.total_mass())}))
        }
        Command::Skeleton(a) => skeleton(a),
        Command::Shift { p, depth, check_against_solver, format } => {
            let m = shift_model(p, depth)?;
            if format == Format::Dot {
                let pts: Vec<BerkPoint> = m.levels.last().unwrap().iter().map(|x| x.point.clone()).collect();
                return Ok((Out::Text(tree_to_dot(&convex_hull_tree(&pts, &qi(0))?)), true));
            }
            let levels: Vec<Value> = m
                .levels
                .iter()
                .enumerate()
                .map(|(k, l)| {
                    json!({
                        "level": k,
                        "logr": q_exact(&m.radii[k]),
                        "count": int_exact(l.len()),
                        "balls": l.iter().map(|x| json!({"word": x.word, "point": point_to_json(&x.point)})).collect::<Vec<_>>(),
                    })
                })
                .collect();
            let mut v = json!({"p": p, "depth": depth, "levels": levels, "images_checked": int_exact(m.check_images()?)});
            if check_against_solver {
                v["solver_fibers_checked"] = int_exact(m.cross_check(3)?);
            }
            ok(v)
        }
        Command::Examples { which: ExamplesCmd::RunAll { format } } => {
            let rows = suite::run_all();
            let pass = rows.iter().all(|r| r.pass);
            let out = match format {
                Format::Json => Out::Json(json!(rows.iter().map(suite::Row::to_json).collect::<Vec<_>>())),
                _ => Out::Text(suite::table(&rows)),
            };
            Ok((out, pass))
        }
    }
}

fn example(a: &SkeletonArgs) -> berk_core::Result<Example> {
    Ok(match a.example.to_ascii_uppercase().as_str() {
        "R0" => Example::R0 { d: a.d, alog: parse_rational(&a.alog)? },
        "R1" => Example::R1 { alog2: parse_rational(&a.alog2)?, alog3: parse_rational(&a.alog3)? },
        "LATTES" => Example::Lattes { m: a.m, alog_q: parse_rational(&a.alog_q)? },
        "GENERAL" => Example::General {
            degrees: a.degrees.clone(),
            alogs: a.alogs.iter().map(|s| parse_rational(s)).collect::<berk_core::Result<_>>()?,
        },
        other => return Err(BerkError::Parse(format!("unknown example `{other}`"))),
    })
}

fn default_companion_backend(ex: &Example) -> Backend {
    match ex {
        Example::Lattes { .. } => Backend::equichar0(),
        _ => Backend::padic(3),
    }
}

fn cylinders_dot(s: &SkeletonMap, depth: usize) -> String {
    let mut out = String::from("digraph cylinders {\n  root [label=\"[]\"];\n");
    for k in 1..=depth {
        for c in s.cylinders(k).cylinders {
            let id = |w: &[usize]| if w.is_empty() { "root".to_string() } else { format!("w{}", w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("_")) };
            out += &format!(
                "  {} [label=\"{:?} [{}, {}] mass {}\"];\n",
                id(&c.word),
                c.word,
                fmt_q(&c.lo),
                fmt_q(&c.hi),
                fmt_q(&c.mass)
            );
            out += &format!("  {} -> {};\n", id(&c.word[..k - 1]), id(&c.word));
        }
    }
    out + "}\n"
}

fn skeleton(a: SkeletonArgs) -> berk_core::Result<(Out, bool)> {
    let ex = example(&a)?;
    let b = match &a.backend {
        Some(s) => backend(s)?,
        None => default_companion_backend(&ex),
    };
    let CatalogEntry { skeleton: s, companion } = catalog(&ex, Some(&b)).or_else(|_| catalog(&ex, None))?;
    if a.format == Format::Dot {
        return Ok((Out::Text(cylinders_dot(&s, a.depth)), true));
    }
    let (lo, hi) = s.segment();
    let mut v = json!({"example": a.example.to_ascii_uppercase(), "segment": [q_exact(lo), q_exact(hi)], "degree": int_exact(s.degree() as usize)});
    for item in a.report.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        match item {
            "branches" => {
                v["branches"] = json!(s
                    .branches()
                    .iter()
                    .map(|br| json!({"lo": q_exact(&br.lo), "hi": q_exact(&br.hi), "rising": br.rising, "slope": int_exact(br.slope as usize)}))
                    .collect::<Vec<_>>());
            }
            "entropies" => {
                let e = entropies(&s)?;
                let mut ent = json!({
                    "h_top": approx(e.h_top, F64_TOL),
                    "h_eq": approx(e.h_eq, F64_TOL),
                    "weights": e.weights.iter().map(q_exact).collect::<Vec<_>>(),
                });
                if let Some(r) = &companion {
                    ent["h_rokhlin_companion"] = approx(rokhlin_entropy(&s, r)?, F64_TOL);
                }
                v["entropies"] = ent;
            }
            "invariant-set" => {
                v["invariant_set"] = match invariant_set(&s) {
                    InvariantSet::FullSegment => json!({"kind": "FULL_SEGMENT"}),
                    InvariantSet::Cantor { branches, scale } => {
                        json!({"kind": "CANTOR", "branches": branches, "scale": q_exact(&scale)})
                    }
                };
            }
            "cylinders" => {
                let code = s.cylinders(a.depth);
                v["cylinders"] = json!({
                    "alphabet": code.alphabet,
                    "depth": code.depth,
                    "cylinders": code.cylinders.iter().map(|c| json!({"word": c.word, "lo": q_exact(&c.lo), "hi": q_exact(&c.hi), "mass": q_exact(&c.mass)})).collect::<Vec<_>>(),
                });
            }
            "cross-validate" => {
                let r = companion.as_ref().ok_or_else(|| BerkError::ParamDomain("no companion map on this backend".into()))?;
                let rep = cross_validate(&s, r, a.samples)?;
                v["cross_validation"] = json!({
                    "backend": b.to_string(),
                    "checked": int_exact(rep.checked),
                    "skipped_gaps": int_exact(rep.skipped),
                    "local_degrees_checked": int_exact(rep.degrees_checked),
                    "mismatches": int_exact(0),
                });
            }
            "measure" => {
                let m = s.bernoulli_measure(&b, a.depth)?;
                v["bernoulli_measure"] = measure_to_json(&m);
            }
            "companion" => {
                v["companion"] = companion.as_ref().map(map_to_json).unwrap_or(Value::Null);
            }
            other => return Err(BerkError::Parse(format!("unknown report item `{other}`"))),
        }
    }
    Ok((Out::Json(v), true))
}

/// A closed pipe is not an error worth a panic.
fn emit(s: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(s.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok((out, pass)) => {
            match out {
                Out::Json(v) => emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("JSON values serialize"))),
                Out::Text(t) => emit(&t),
            }
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            let v = json!({"error": e.code(), "message": e.to_string()});
            emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("JSON values serialize")));
            ExitCode::from(3)
        }
    }
}
