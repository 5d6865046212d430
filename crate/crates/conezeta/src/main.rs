use clap::{Args, Parser, Subcommand, ValueEnum};
use conezeta::cones::{open_subdivision, Cone, Subdivision, SubdivisionKind};
use conezeta::decorated::{algebraic_subdivide, DecoratedClosedCone};
use conezeta::exactlin::{ints, RatVec};
use conezeta::fractions::{decompose_pure, decompose_pure_positive, derive, phi, FracSum};
use conezeta::relations::{
    double_subdivision_relation, reduce_over_chen, transpose, verify_relation, ConePair, Relation,
};
use conezeta::zeta::{eval_lzv, eval_open_czv, eval_shintani, mzv, DecoratedOpenCone};
use conezeta::{Error, Result};
use serde_json::json;

#[derive(Parser)]
#[command(name = "conezeta", version, about = "rational cone calculus and zeta sums")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// truncation depth for numeric evaluation
    #[arg(long, global = true, default_value_t = 1000)]
    depth: usize,
    /// numeric tolerance for verification
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// reserved reproducibility knob
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum SubdivideMode {
    Simplicial,
    Smooth,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalType {
    Open,
    Closed,
    Shintani,
    Mzv,
}

#[derive(Args)]
struct PairArgs {
    /// cone pair as {"matrix": [[ints]], "s": [ints]}
    #[arg(long)]
    pair: String,
    /// star points splitting the open side, as [[ints], ...]
    #[arg(long = "open-split", default_value = "[]")]
    open_split: String,
    /// star points splitting the closed side, as [[ints], ...]
    #[arg(long = "closed-split", default_value = "[]")]
    closed_split: String,
}

#[derive(Subcommand)]
enum Verb {
    /// Subdivide a cone into simplicial or smooth pieces
    Subdivide {
        #[arg(long)]
        cone: String,
        #[arg(long, value_enum, default_value_t = SubdivideMode::Smooth)]
        mode: SubdivideMode,
        /// optional star points, as [[ints], ...]
        #[arg(long, default_value = "[]")]
        star: String,
    },
    /// Map a closed cone to its rational fraction
    Phi {
        #[arg(long)]
        cone: String,
    },
    /// Rewrite a fraction sum as a combination of pure fractions
    Decompose {
        #[arg(long)]
        fraction: String,
        /// use the positivity-preserving single-term decomposition
        #[arg(long)]
        positive: bool,
    },
    /// Apply the coordinate derivation to a fraction sum
    Derive {
        #[arg(long)]
        fraction: String,
        #[arg(long)]
        index: usize,
        #[arg(long, default_value_t = 1)]
        order: u32,
    },
    /// Evaluate a truncated zeta sum
    Eval {
        #[arg(long, value_enum)]
        r#type: EvalType,
        #[arg(long)]
        cone: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[arg(long)]
        decorated: Option<String>,
        #[arg(long)]
        matrix: Option<String>,
    },
    /// Show both sides of a cone pair and the transpose of its closed side
    Pair {
        #[arg(long)]
        pair: String,
    },
    /// Generate the double subdivision relation of a split cone pair
    Relation {
        #[command(flatten)]
        args: PairArgs,
    },
    /// Generate and numerically verify the relation of a split cone pair
    Verify {
        #[command(flatten)]
        args: PairArgs,
    },
}

#[derive(serde::Deserialize)]
struct PairJson {
    matrix: Vec<Vec<i64>>,
    s: Vec<u32>,
}

fn schema<T: serde::de::DeserializeOwned>(what: &str, s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Schema(format!("{}: {}", what, e)))
}

fn split_closed(parent: &Cone, points: &[Vec<i64>]) -> Result<Subdivision> {
    let mut pieces = vec![parent.clone()];
    for p in points {
        let x = RatVec::from_ints(&ints(p));
        let mut next = Vec::new();
        for piece in pieces {
            if piece.contains_point(&x)? && !piece.generators().iter().any(|g| ints(p) == *g) {
                next.extend(piece.star_subdivide(&ints(p))?);
            } else {
                next.push(piece);
            }
        }
        pieces = next;
    }
    pieces.sort();
    Ok(Subdivision {
        parent: parent.clone(),
        pieces,
        kind: SubdivisionKind::Closed,
    })
}

fn build_relation(args: &PairArgs) -> Result<(ConePair, Relation)> {
    let pj: PairJson = schema("pair", &args.pair)?;
    let open_pts: Vec<Vec<i64>> = schema("open-split", &args.open_split)?;
    let closed_pts: Vec<Vec<i64>> = schema("closed-split", &args.closed_split)?;
    let pair = ConePair::new(&pj.matrix, &pj.s)?;
    let closed_of_open = split_closed(&pair.open_side().cone().closure(), &open_pts)?;
    let open_div = open_subdivision(pair.open_side().cone(), &closed_of_open)?;
    let closed_div = split_closed(&pair.closed_side().underlying_cone(), &closed_pts)?;
    let dec = algebraic_subdivide(pair.closed_side(), &closed_div)?;
    let rel = double_subdivision_relation(&pair, &open_div, &dec)?;
    Ok((pair, rel))
}

fn subdivision_json(s: &Subdivision) -> serde_json::Value {
    json!({
        "parent": s.parent,
        "pieces": s.pieces,
        "kind": match s.kind {
            SubdivisionKind::Closed => "closed",
            SubdivisionKind::Open => "open",
        },
    })
}

fn run(cli: &Cli) -> Result<serde_json::Value> {
    match &cli.verb {
        Verb::Subdivide { cone, mode, star } => {
            let c: Cone = schema("cone", cone)?;
            let star_pts: Vec<Vec<i64>> = schema("star", star)?;
            let closed = if !star_pts.is_empty() {
                split_closed(&c.closure(), &star_pts)?
            } else {
                match mode {
                    SubdivideMode::Simplicial => c.closure().simplicialize()?,
                    SubdivideMode::Smooth => c.closure().full_smooth_subdivision()?,
                }
            };
            let result = if c.is_open() {
                open_subdivision(&c, &closed)?
            } else {
                closed
            };
            Ok(subdivision_json(&result))
        }
        Verb::Phi { cone } => {
            let c: Cone = schema("cone", cone)?;
            Ok(serde_json::to_value(phi(&c)?).expect("fraction serialization"))
        }
        Verb::Decompose { fraction, positive } => {
            let f: FracSum = schema("fraction", fraction)?;
            let out = if *positive {
                let mut acc = FracSum::zero();
                for t in f.terms() {
                    acc = acc.add(&decompose_pure_positive(&t)?);
                }
                acc
            } else {
                decompose_pure(&f)?
            };
            Ok(serde_json::to_value(out).expect("fraction serialization"))
        }
        Verb::Derive {
            fraction,
            index,
            order,
        } => {
            let mut f: FracSum = schema("fraction", fraction)?;
            for _ in 0..*order {
                f = derive(&f, *index)?;
            }
            Ok(serde_json::to_value(f).expect("fraction serialization"))
        }
        Verb::Eval {
            r#type,
            cone,
            s,
            decorated,
            matrix,
        } => {
            let need = |o: &Option<String>, name: &str| -> Result<String> {
                o.clone()
                    .ok_or_else(|| Error::Schema(format!("--{} is required for this type", name)))
            };
            let z = match r#type {
                EvalType::Open => {
                    let c: Cone = schema("cone", &need(cone, "cone")?)?;
                    let sv: Vec<u32> = schema("s", &need(s, "s")?)?;
                    eval_open_czv(&DecoratedOpenCone::new(c, sv)?, cli.depth)?
                }
                EvalType::Closed => {
                    let d: DecoratedClosedCone = schema("decorated", &need(decorated, "decorated")?)?;
                    eval_lzv(&d, cli.depth)?
                }
                EvalType::Shintani => {
                    let m: Vec<Vec<i64>> = schema("matrix", &need(matrix, "matrix")?)?;
                    let sv: Vec<u32> = schema("s", &need(s, "s")?)?;
                    eval_shintani(&m, &sv, cli.depth)?
                }
                EvalType::Mzv => {
                    let sv: Vec<u32> = schema("s", &need(s, "s")?)?;
                    mzv(&sv, cli.depth)?
                }
            };
            Ok(serde_json::to_value(z).expect("result serialization"))
        }
        Verb::Pair { pair } => {
            let pj: PairJson = schema("pair", pair)?;
            let p = ConePair::new(&pj.matrix, &pj.s)?;
            let closed = p.closed_side();
            let t = transpose(closed)?;
            Ok(json!({
                "open_side": {"cone": p.open_side().cone(), "s": p.open_side().exponents()},
                "closed_side": closed,
                "closed_transpose": {"cone": t.cone(), "s": t.exponents()},
            }))
        }
        Verb::Relation { args } => {
            let (_, rel) = build_relation(args)?;
            let reduced = reduce_over_chen(&rel)?;
            Ok(rel.to_json(reduced.as_ref()))
        }
        Verb::Verify { args } => {
            let (_, rel) = build_relation(args)?;
            let v = verify_relation(&rel, cli.depth, cli.tol)?;
            if !v.ok {
                eprintln!(
                    "verification failed: total {} exceeds bound {}",
                    v.total, v.bound
                );
                let out = serde_json::to_value(&v).expect("result serialization");
                print_value(&out, cli.format);
                std::process::exit(4);
            }
            Ok(serde_json::to_value(v).expect("result serialization"))
        }
    }
}

fn print_value(v: &serde_json::Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string(v).expect("json output")),
        Format::Pretty => println!("{}", serde_json::to_string_pretty(v).expect("json output")),
    }
}

fn main() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("CONEZETA_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
    let cli = Cli::parse();
    let _ = (cli.seed, cli.tol);
    match run(&cli) {
        Ok(v) => print_value(&v, cli.format),
        Err(e) => {
            eprintln!("error: {}", e);
            let code = match e {
                Error::Schema(_) | Error::Shape(_) => 2,
                Error::Verification(_) => 4,
                _ => 3,
            };
            std::process::exit(code);
        }
    }
}
