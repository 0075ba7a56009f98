//! Command-line front end for the `thetamirror` library.
//!
//! Exit codes: 0 on success, 2 on validation failures, 3 when structure
//! constants are missing from the supplied table (the listing goes to stdout
//! as JSON).

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use thetamirror::broken_lines;
use thetamirror::cone_complex::{integral_points, parallel_transport};
use thetamirror::io;
use thetamirror::render::render_svg;
use thetamirror::scattering2d::{complete, consistency_check, WallStructure};
use thetamirror::snc_pair::{dual_graph_connected, grading, maximality_check};
use thetamirror::theta_algebra::{associativity_check, graded_table, mult_table, relations, InvariantTable};
use thetamirror::trop_types::{balancing_check, basic_monoid};
use thetamirror::{candidates, BasisCone, LatticeVector, MirrorError, Pair, TruncationIdeal, Q};

use report::Report;

#[derive(Parser)]
#[command(name = "thetamirror", version, about = "Truncated intrinsic mirror algebras of log Calabi-Yau pairs")]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunConfig {
    /// Truncation bound: classes of weighted degree >= bound are dropped.
    #[arg(long, global = true, default_value_t = 3)]
    bound: u64,
    /// Comma-separated positive weights, one per class generator.
    #[arg(long, global = true)]
    weights: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for sampling generic endpoints.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
    Svg,
}

#[derive(Args)]
struct PairArg {
    #[arg(long)]
    pair: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    pair: PathBuf,
    /// Invariant table; products without candidates need none.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Points as `0`, `p3` or `1,0,2,0`; repeatable. Defaults to `0` and the rays.
    #[arg(long = "point")]
    points: Vec<String>,
}

#[derive(Args)]
struct WallArgs {
    /// Planar wall structure.
    #[arg(long, conflicts_with = "walls")]
    planar: Option<PathBuf>,
    /// Looijenga wall structure; needs `--pair`.
    #[arg(long, requires = "pair")]
    walls: Option<PathBuf>,
    #[arg(long)]
    pair: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Cone complex, log Calabi-Yau subcomplex and kinks of a pair.
    Tropicalize(PairArg),
    /// Integral points of B up to a height.
    Points {
        #[command(flatten)]
        pair: PairArg,
        #[arg(long, default_value_t = 2)]
        height: u32,
    },
    /// Parallel transport across codimension-one cones.
    Transport {
        #[command(flatten)]
        pair: PairArg,
        /// Restrict to one cone, e.g. `2` or `1,2` (1-based).
        #[arg(long)]
        rho: Option<String>,
    },
    /// Candidate outputs `(r, beta)` of `theta_p theta_q`.
    Candidates {
        #[command(flatten)]
        pair: PairArg,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Multiplication table and quadratic relations.
    ThetaMult {
        #[command(flatten)]
        t: TableArgs,
        /// Graded table up to this total degree (degenerations only).
        #[arg(long)]
        degree: Option<i64>,
    },
    /// Associativity of the table on the given points.
    AssocCheck {
        #[command(flatten)]
        t: TableArgs,
    },
    /// Complete a planar structure to a consistent one.
    ScatterComplete(WallArgs),
    /// Consistency of a wall structure.
    Consistency {
        #[command(flatten)]
        w: WallArgs,
        /// Height of the test points for looijenga structures.
        #[arg(long, default_value_t = 2)]
        height: u32,
    },
    /// Broken lines with asymptotic monomial `p` ending at a point.
    BrokenLines {
        #[command(flatten)]
        w: WallArgs,
        #[arg(long)]
        p: String,
        /// Ambient coordinates, rationals allowed.
        #[arg(long)]
        endpoint: String,
    },
    /// `theta_p theta_q` through broken lines.
    ThetaProduct {
        #[command(flatten)]
        w: WallArgs,
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Moduli cone and balancing of a tropical type.
    TropCheck {
        #[arg(long = "type")]
        ty: PathBuf,
        /// Skip the toric balancing check.
        #[arg(long)]
        non_toric: bool,
    },
    /// SVG drawing of a wall structure and optional broken lines.
    Render {
        #[command(flatten)]
        w: WallArgs,
        #[arg(long, requires = "endpoint")]
        p: Option<String>,
        #[arg(long)]
        endpoint: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            if let Some(MirrorError::MissingInvariant(ms)) = e.downcast_ref::<MirrorError>() {
                print!("{}", report::missing_json(ms));
                eprintln!("error: {} structure constants missing from the table", ms.len());
                return ExitCode::from(3);
            }
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

impl RunConfig {
    fn ideal(&self, rank: usize) -> anyhow::Result<TruncationIdeal> {
        if self.bound < 1 {
            bail!("--bound must be at least 1");
        }
        let weights = match &self.weights {
            None => vec![1; rank],
            Some(w) => w.split(',').map(|x| x.trim().parse::<u64>().with_context(|| format!("bad weight {x:?}"))).collect::<anyhow::Result<Vec<_>>>()?,
        };
        if weights.len() != rank {
            bail!("--weights needs {rank} entries, got {}", weights.len());
        }
        Ok(TruncationIdeal::new(weights, self.bound)?)
    }
}

fn parse_ints(s: &str) -> anyhow::Result<Vec<i64>> {
    s.split(',').map(|x| x.trim().parse::<i64>().with_context(|| format!("bad integer {x:?} in {s:?}"))).collect()
}

/// `0`, `pK` for the K-th ray, or explicit coordinates.
fn parse_point(s: &str, m: usize) -> anyhow::Result<LatticeVector> {
    let s = s.trim();
    if s == "0" {
        return Ok(LatticeVector::zero(m));
    }
    if let Some(k) = s.strip_prefix('p') {
        let k: usize = k.parse().with_context(|| format!("bad point label {s:?}"))?;
        if k == 0 || k > m {
            bail!("point label {s:?} out of range 1..={m}");
        }
        return Ok(LatticeVector::unit(m, k - 1));
    }
    let v = parse_ints(s)?;
    if v.len() != m {
        bail!("point {s:?} needs {m} coordinates");
    }
    Ok(LatticeVector(v))
}

fn parse_rationals(s: &str) -> anyhow::Result<Vec<Q>> {
    s.split(',').map(|x| x.trim().parse::<Q>().map_err(|_| anyhow!("bad rational {x:?} in {s:?}"))).collect()
}

fn load_table(path: &Option<PathBuf>, pair: &Pair) -> anyhow::Result<InvariantTable> {
    match path {
        Some(p) => Ok(io::load_table(p, &pair.descriptor)?),
        None => Ok(InvariantTable::new()),
    }
}

fn points_of(t: &TableArgs, pair: &Pair) -> anyhow::Result<Vec<LatticeVector>> {
    let m = pair.m();
    if t.points.is_empty() {
        let mut pts = vec![LatticeVector::zero(m)];
        pts.extend((0..m).map(|i| LatticeVector::unit(m, i)).filter(|v| pair.trop.cy_sub.contains_vector(v)));
        return Ok(pts);
    }
    t.points.iter().map(|s| parse_point(s, m)).collect()
}

fn load_structure(w: &WallArgs) -> anyhow::Result<(WallStructure, Option<Pair>)> {
    if let Some(p) = &w.planar {
        return Ok((io::load_walls(p, None)?, None));
    }
    let walls = w.walls.as_ref().ok_or_else(|| anyhow!("give --planar FILE or --walls FILE --pair FILE"))?;
    let pair = io::load_pair(w.pair.as_ref().expect("clap enforces --pair"))?;
    Ok((io::load_walls(walls, Some(&pair))?, Some(pair)))
}

fn run(cli: &Cli) -> anyhow::Result<String> {
    let cfg = &cli.run;
    let fmt = cfg.format;
    let text_or_json = |r: Report| -> anyhow::Result<String> {
        match fmt {
            Format::Json => Ok(r.json()),
            Format::Text => Ok(r.text()),
            Format::Svg => bail!("--format svg is only available for broken-lines and render"),
        }
    };
    match &cli.command {
        Command::Tropicalize(a) => {
            let pair = io::load_pair(&a.pair)?;
            text_or_json(report::tropicalize(&pair, maximality_check(&pair.trop), dual_graph_connected(&pair.trop.cy_sub)))
        }
        Command::Points { pair, height } => {
            let pair = io::load_pair(&pair.pair)?;
            let pts = integral_points(&pair.trop.cy_sub, *height);
            let degs = match pair.trop.central_fiber {
                Some(_) => Some(pts.iter().map(|p| grading(&pair.trop, p)).collect::<Result<Vec<_>, _>>()?),
                None => None,
            };
            text_or_json(report::points(&pts, degs.as_deref()))
        }
        Command::Transport { pair, rho } => {
            let pair = io::load_pair(&pair.pair)?;
            let wanted = match rho {
                Some(s) => Some(BasisCone::new(parse_ints(s)?.into_iter().map(|i| (i - 1) as usize))),
                None => None,
            };
            let mut charts = Vec::new();
            for r in pair.trop.cy_sub.codim_one_cones() {
                if wanted.as_ref().is_some_and(|w| *w != r) {
                    continue;
                }
                let maxes = pair.trop.cy_sub.maximal_cones_containing(&r);
                if maxes.len() != 2 {
                    continue;
                }
                let numbers = pair.descriptor.stratum_numbers(&r)?;
                charts.push(parallel_transport(&r, &maxes[0], &maxes[1], &numbers)?.with_rank(pair.m()));
            }
            if let Some(w) = wanted {
                if charts.is_empty() {
                    bail!("{w} is not an interior codimension-one cone of B");
                }
            }
            text_or_json(report::transport(&charts))
        }
        Command::Candidates { pair, p, q } => {
            let pair = io::load_pair(&pair.pair)?;
            let ideal = cfg.ideal(pair.rank())?;
            let c = candidates(&pair, &parse_point(p, pair.m())?, &parse_point(q, pair.m())?, &ideal)?;
            text_or_json(report::candidates(&c, pair.class_names()))
        }
        Command::ThetaMult { t, degree } => {
            let pair = io::load_pair(&t.pair)?;
            let ideal = cfg.ideal(pair.rank())?;
            let table = load_table(&t.table, &pair)?;
            if let Some(d) = degree {
                return text_or_json(report::graded(&graded_table(&pair, *d, &table, &ideal)?, pair.class_names()));
            }
            let mt = mult_table(&pair, &points_of(t, &pair)?, &table, &ideal)?;
            text_or_json(report::mult(&mt, &relations(&mt), pair.class_names()))
        }
        Command::AssocCheck { t } => {
            let pair = io::load_pair(&t.pair)?;
            let ideal = cfg.ideal(pair.rank())?;
            let table = load_table(&t.table, &pair)?;
            let v = associativity_check(&pair, &points_of(t, &pair)?, &table, &ideal)?;
            text_or_json(report::violations(&v, pair.class_names()))
        }
        Command::ScatterComplete(w) => {
            let (s, _) = load_structure(w)?;
            let ideal = cfg.ideal(s.rank)?;
            let c = complete(&s, &ideal)?;
            match fmt {
                Format::Json => Ok(io::serialize_walls(&c.structure)),
                _ => text_or_json(report::completion(&c, &s.class_names)),
            }
        }
        Command::Consistency { w, height } => {
            let (s, _) = load_structure(w)?;
            let ideal = cfg.ideal(s.rank)?;
            text_or_json(report::consistency(&consistency_check(&s, &ideal, *height)?, &s.class_names))
        }
        Command::BrokenLines { w, p, endpoint } => {
            let (s, _) = load_structure(w)?;
            let ideal = cfg.ideal(s.rank)?;
            let dim = s.ambient_dim();
            let p = parse_point(p, dim)?;
            let q = parse_rationals(endpoint)?;
            let lines = broken_lines::enumerate(&s, &p, &q, &ideal)?;
            if fmt == Format::Svg {
                return Ok(render_svg(&s, &lines)?);
            }
            let theta = broken_lines::theta_function(&s, &p, &q, &ideal)?;
            text_or_json(report::broken_lines(&s, &lines, &theta)?)
        }
        Command::ThetaProduct { w, p, q } => {
            let (s, _) = load_structure(w)?;
            let ideal = cfg.ideal(s.rank)?;
            let dim = s.ambient_dim();
            let prod = broken_lines::theta_product(&s, &parse_point(p, dim)?, &parse_point(q, dim)?, &ideal, cfg.seed)?;
            text_or_json(report::theta_product(&prod, &s.class_names))
        }
        Command::TropCheck { ty, non_toric } => {
            let t = io::load_type(ty)?;
            let cone = basic_monoid(&t)?;
            let bal = if *non_toric { None } else { Some(balancing_check(&t, true)?) };
            text_or_json(report::trop(&t, &cone, bal.as_deref()))
        }
        Command::Render { w, p, endpoint } => {
            let (s, _) = load_structure(w)?;
            if fmt == Format::Json {
                bail!("render only writes SVG");
            }
            let ideal = cfg.ideal(s.rank)?;
            let lines = match (p, endpoint) {
                (Some(p), Some(e)) => broken_lines::enumerate(&s, &parse_point(p, s.ambient_dim())?, &parse_rationals(e)?, &ideal)?,
                _ => vec![],
            };
            Ok(render_svg(&s, &lines)?)
        }
    }
}
