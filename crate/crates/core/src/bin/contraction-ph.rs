use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use contraction_ph::contraction::{
    build_combing_contraction, choose_basepoint, verify_lipschitz, verify_piecewise_slopes, verify_retraction,
    CombingMap, LipschitzReport,
};
use contraction_ph::graph::io::{loop_to_json, parse_graph, write_graph};
use contraction_ph::graph::{
    is_geodesic_circle, minimum_cycle_basis, sample_space, shortest_cycle, Loop, LoopChart, MetricGraph,
};
use contraction_ph::module::{barcode_of_module, check_tight, inclusion_morphism, verify_barcode_inclusion, ScaleGrid};
use contraction_ph::obstruction::{
    build_concentric_counterexample, conjecture_harness, winding_obstruction_search, ObstructionOutcome,
};
use contraction_ph::rips::{
    build_rips_filtration_with_budget, circle_barcode_oracle, match_barcodes, reduce_persistence, Barcode,
    DEFAULT_SIMPLEX_BUDGET,
};
use contraction_ph::{Error, Rational, Result};

#[derive(Parser)]
#[command(name = "contraction-ph", version, about = "Contractions on metric graphs and Rips persistence")]
struct Cli {
    /// Output file, or `-` for standard output.
    #[arg(long, short, global = true, default_value = "-")]
    output: PathBuf,
    /// Simplex budget for Rips filtrations.
    #[arg(long, global = true, env = "CONTRACTION_PH_BUDGET", default_value_t = DEFAULT_SIMPLEX_BUDGET)]
    budget: u128,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GraphArg {
    /// Graph JSON file.
    graph: PathBuf,
}

#[derive(Args)]
struct LoopArg {
    /// Edge ids of a simple cycle, comma separated; defaults to a shortest cycle.
    #[arg(long = "loop", value_delimiter = ',')]
    loop_ids: Option<Vec<u64>>,
}

#[derive(Args)]
struct PersistenceArgs {
    /// Sampling mesh.
    #[arg(long, value_parser = parse_rational)]
    mesh: Rational,
    /// Top homology dimension.
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// Prime field characteristic.
    #[arg(long, default_value_t = 2)]
    field: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Shortest cycle.
    Girth(GraphArg),
    /// Minimum cycle basis.
    Basis(GraphArg),
    /// Whether a loop is an isometrically embedded circle.
    CircleCheck {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        lp: LoopArg,
    },
    /// Build and certify the combing contraction onto a loop.
    Comb {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        lp: LoopArg,
        /// Basepoint on the loop, `v<index>` or `e<id>@<offset>`; chosen automatically if absent.
        #[arg(long)]
        basepoint: Option<String>,
        /// Certification mesh.
        #[arg(long, value_parser = parse_rational, default_value = "1/10")]
        mesh: Rational,
    },
    /// Rips filtration summary of a graph sample.
    Rips {
        #[command(flatten)]
        graph: GraphArg,
        #[arg(long, value_parser = parse_rational)]
        mesh: Rational,
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
        /// Also write the sample distance matrix as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Persistence barcode of a graph sample.
    Ph {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        args: PersistenceArgs,
        /// Emit CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Tightness of the inclusion of the loop samples into the graph samples.
    Tight {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        lp: LoopArg,
        #[command(flatten)]
        args: PersistenceArgs,
    },
    /// Analytic barcode of a geodesic circle.
    OracleCircle {
        #[arg(long, value_parser = parse_rational, default_value = "1")]
        length: Rational,
        #[arg(long, default_value_t = 1)]
        max_dim: usize,
    },
    /// Match a computed barcode JSON against a reference within a tolerance.
    Compare {
        computed: PathBuf,
        reference: PathBuf,
        #[arg(long, value_parser = parse_rational)]
        tol: Rational,
    },
    /// Winding-number obstruction search for a contraction onto a loop.
    Obstruct {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        lp: LoopArg,
        /// Extra candidate loops, each a comma separated list of edge ids.
        #[arg(long = "candidate")]
        candidates: Vec<String>,
        #[arg(long, default_value_t = 3)]
        bound: u32,
    },
    /// Certificate that the concentric-circles graph has no contraction onto its inner circle.
    Counterexample {
        #[arg(long, default_value_t = 3)]
        bound: u32,
        /// Also write the graph JSON here.
        #[arg(long)]
        graph_output: Option<PathBuf>,
    },
    /// Obstruction search over random planar grid graphs.
    Conjecture {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        bound: u32,
        /// Grid side length.
        #[arg(long, default_value_t = 4)]
        side: usize,
        /// Directory for certificate dumps.
        #[arg(long, default_value = "conjecture-candidates")]
        dump_dir: PathBuf,
    },
}

fn parse_rational(s: &str) -> std::result::Result<Rational, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a subcommand produced: the artifact text and whether its check passed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }

    fn json(value: Value, passed: bool) -> Self {
        Outcome { text: pretty(&value), passed }
    }
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON value serializes")
}

fn read_graph(path: &Path) -> Result<MetricGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

fn loop_from_ids(g: &MetricGraph, ids: &[u64]) -> Result<Loop> {
    let edges = ids
        .iter()
        .map(|&id| g.edge_index(id).ok_or_else(|| Error::InvalidInput(format!("no edge with id {id}"))))
        .collect::<Result<Vec<_>>>()?;
    Loop::from_edge_cycle(g, &edges)
}

fn pick_loop(g: &MetricGraph, arg: &LoopArg) -> Result<Loop> {
    match &arg.loop_ids {
        Some(ids) => loop_from_ids(g, ids),
        None => shortest_cycle(g),
    }
}

fn lipschitz_json(g: &MetricGraph, r: &LipschitzReport) -> Value {
    json!({
        "passes": r.passes(),
        "pairs_checked": r.pairs_checked,
        "max_ratio": r.max_ratio.as_ref().map(Rational::to_string),
        "witness": r.witness.as_ref().map(|w| json!({
            "x": g.point_label(&w.x),
            "y": g.point_label(&w.y),
            "distance": w.distance.to_string(),
            "image_distance": w.image_distance.to_string(),
        })),
    })
}

fn comb(g: Arc<MetricGraph>, alpha: &Loop, basepoint: Option<&str>, mesh: &Rational) -> Result<Outcome> {
    let (map, lipschitz): (CombingMap, LipschitzReport) = match basepoint {
        Some(text) => {
            let a = g.parse_point(text)?;
            let map = build_combing_contraction(g.clone(), alpha, &a)?;
            let report = verify_lipschitz(&map, mesh)?;
            (map, report)
        }
        None => choose_basepoint(g.clone(), alpha, mesh)?,
    };
    let retraction = verify_retraction(&map, mesh)?;
    let slopes = verify_piecewise_slopes(&map, mesh)?;
    let passed = retraction.holds && lipschitz.passes() && slopes.is_none();
    Ok(Outcome::json(
        json!({
            "loop": loop_to_json(&g, alpha),
            "basepoint": g.point_label(map.basepoint()),
            "requested_basepoint": g.point_label(map.requested_basepoint()),
            "basepoint_shift": map.basepoint_shift().to_string(),
            "antipode": g.point_label(map.antipode()),
            "mesh": mesh.to_string(),
            "retraction": {
                "holds": retraction.holds,
                "points_checked": retraction.points_checked,
                "witness": retraction.witness.as_ref().map(|(x, y)| [g.point_label(x), g.point_label(y)]),
            },
            "lipschitz": lipschitz_json(&g, &lipschitz),
            "piecewise_slopes": slopes.map_or(json!(null), |(e, a, b)| json!({
                "edge": g.edge(e).id, "from": a.to_string(), "to": b.to_string()
            })),
            "certified": passed,
        }),
        passed,
    ))
}

fn barcode_of_graph(g: &MetricGraph, args: &PersistenceArgs, budget: u128) -> Result<Barcode> {
    let space = sample_space(g, &args.mesh)?;
    let f = build_rips_filtration_with_budget(&space, args.max_dim, budget)?;
    reduce_persistence(&f, args.field)
}

fn tight(g: Arc<MetricGraph>, alpha: &Loop, args: &PersistenceArgs, budget: u128) -> Result<Outcome> {
    let space = sample_space(&g, &args.mesh)?;
    let chart = LoopChart::new(&g, alpha)?;
    let points = space.points().expect("graph samples carry points");
    let a_idx: Vec<usize> = (0..points.len()).filter(|&i| chart.contains(&g, &points[i])).collect();
    let fx = build_rips_filtration_with_budget(&space, args.max_dim, budget)?;
    let grid = ScaleGrid::default_for(&fx);
    let phi = inclusion_morphism(&a_idx, &fx, &grid, args.max_dim, args.field)?;
    let report = check_tight(&phi)?;
    let b_a = barcode_of_module(phi.source());
    let b_x = barcode_of_module(phi.target());
    let inclusion = verify_barcode_inclusion(&b_a, &b_x)?;
    let passed = report.tight && inclusion.included;
    Ok(Outcome::json(
        json!({
            "dim": args.max_dim,
            "field": args.field,
            "subspace_points": a_idx.len(),
            "points": space.len(),
            "grid": grid.scales().iter().map(Rational::to_string).collect::<Vec<_>>(),
            "tight": report.tight,
            "pairs_checked": report.pairs_checked,
            "witness": report.witness.as_ref().map(|w| json!({"i": w.i, "j": w.j, "vector": w.vector})),
            "barcode_subspace": b_a.bars(),
            "barcode_space": b_x.bars(),
            "barcode_included": inclusion.included,
            "missing": inclusion.missing,
        }),
        passed,
    ))
}

fn write_artifact(path: &Path, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    if path == Path::new("-") {
        std::io::stdout().write_all(text.as_bytes())?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome> {
    if cli.budget == 0 {
        return Err(Error::InvalidInput("budget must be positive".into()));
    }
    match &cli.command {
        Command::Girth(a) => {
            let g = read_graph(&a.graph)?;
            let lp = shortest_cycle(&g)?;
            Ok(Outcome::json(json!({"length": lp.length().to_string(), "loop": loop_to_json(&g, &lp)}), true))
        }
        Command::Basis(a) => {
            let g = read_graph(&a.graph)?;
            let basis = minimum_cycle_basis(&g);
            Ok(Outcome::json(
                json!({
                    "rank": basis.len(),
                    "lengths": basis.iter().map(|b| b.length().to_string()).collect::<Vec<_>>(),
                    "loops": basis.iter().map(|b| loop_to_json(&g, b)).collect::<Vec<_>>(),
                }),
                true,
            ))
        }
        Command::CircleCheck { graph, lp } => {
            let g = read_graph(&graph.graph)?;
            let alpha = pick_loop(&g, lp)?;
            let check = is_geodesic_circle(&g, &alpha)?;
            Ok(Outcome::json(
                json!({
                    "loop": loop_to_json(&g, &alpha),
                    "is_geodesic": check.is_geodesic,
                    "witness": check.witness.as_ref().map(|w| json!({
                        "p": g.point_label(&w.p),
                        "q": g.point_label(&w.q),
                        "graph_distance": w.graph_distance.to_string(),
                        "loop_distance": w.loop_distance.to_string(),
                    })),
                }),
                check.is_geodesic,
            ))
        }
        Command::Comb { graph, lp, basepoint, mesh } => {
            let g = Arc::new(read_graph(&graph.graph)?);
            let alpha = pick_loop(&g, lp)?;
            comb(g, &alpha, basepoint.as_deref(), mesh)
        }
        Command::Rips { graph, mesh, max_dim, csv } => {
            let g = read_graph(&graph.graph)?;
            let space = sample_space(&g, mesh)?;
            let f = build_rips_filtration_with_budget(&space, *max_dim, cli.budget)?;
            if let Some(path) = csv {
                write_artifact(path, &space.to_csv())?;
            }
            Ok(Outcome::json(
                json!({
                    "points": space.len(),
                    "max_dim": max_dim,
                    "simplices": f.len(),
                    "simplices_by_dim": f.count_by_dim(),
                    "distinct_diameters": f.values().len(),
                }),
                true,
            ))
        }
        Command::Ph { graph, args, csv } => {
            let g = read_graph(&graph.graph)?;
            let b = barcode_of_graph(&g, args, cli.budget)?;
            Ok(Outcome::ok(if *csv { b.to_csv() } else { b.to_json() }))
        }
        Command::Tight { graph, lp, args } => {
            let g = Arc::new(read_graph(&graph.graph)?);
            let alpha = pick_loop(&g, lp)?;
            tight(g, &alpha, args, cli.budget)
        }
        Command::OracleCircle { length, max_dim } => {
            if !length.is_positive() {
                return Err(Error::InvalidInput("circle length must be positive".into()));
            }
            Ok(Outcome::ok(circle_barcode_oracle(length, *max_dim).to_json()))
        }
        Command::Compare { computed, reference, tol } => {
            let c = Barcode::from_json(&std::fs::read_to_string(computed)?, 0)?;
            let r = Barcode::from_json(&std::fs::read_to_string(reference)?, 0)?;
            let report = match_barcodes(&c, &r, tol);
            Ok(Outcome::json(
                json!({
                    "full_match": report.is_full_match(),
                    "matched": report.matched,
                    "unmatched_computed": report.unmatched_computed,
                    "unmatched_reference": report.unmatched_reference,
                }),
                report.is_full_match(),
            ))
        }
        Command::Obstruct { graph, lp, candidates, bound } => {
            let g = read_graph(&graph.graph)?;
            let alpha = pick_loop(&g, lp)?;
            let pool = candidates
                .iter()
                .map(|c| {
                    let ids = c
                        .split(',')
                        .map(|s| s.trim().parse::<u64>().map_err(|_| Error::InvalidInput(format!("bad edge id in {c:?}"))))
                        .collect::<Result<Vec<_>>>()?;
                    loop_from_ids(&g, &ids)
                })
                .collect::<Result<Vec<_>>>()?;
            let out = winding_obstruction_search(&g, &alpha, &pool, *bound)?;
            Ok(Outcome::ok(out.to_json(&g)))
        }
        Command::Counterexample { bound, graph_output } => {
            let (g, alpha, witness) = build_concentric_counterexample();
            if let Some(path) = graph_output {
                write_artifact(path, &write_graph(&g))?;
            }
            let out = winding_obstruction_search(&g, &alpha, &[witness], *bound)?;
            let passed = matches!(out, ObstructionOutcome::Certificate(_));
            Ok(Outcome { text: out.to_json(&g), passed })
        }
        Command::Conjecture { seed, trials, bound, side, dump_dir } => {
            let report = conjecture_harness(*seed, *trials, *bound, *side)?;
            let found = report.total_certificates();
            if found > 0 {
                let written = report.dump_certificates(dump_dir)?;
                log::error!("{found} certificates on planar instances; {written} dumped to {}", dump_dir.display());
            }
            Ok(Outcome { text: report.to_csv(), passed: found == 0 })
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::Internal(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli).and_then(|out| write_artifact(&cli.output, &out.text).map(|_| out.passed)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
