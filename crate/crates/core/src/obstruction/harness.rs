use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{minimum_cycle_basis, MetricGraph};
use crate::rational::Rational;

use super::search::{winding_obstruction_search, ObstructionOutcome};

/// Probability that a grid edge outside the spanning tree is kept.
const EXTRA_EDGE_PROBABILITY: f64 = 0.6;

/// A metric graph whose edges are edges of the triangulated `n × n` grid
/// (right, down and down-right neighbours), hence planar by construction.
#[derive(Clone, Debug)]
pub struct PlanarInstance {
    n: usize,
    graph: MetricGraph,
}

fn grid_edges(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            let v = r * n + c;
            if c + 1 < n {
                out.push((v, v + 1));
            }
            if r + 1 < n {
                out.push((v, v + n));
            }
            if r + 1 < n && c + 1 < n {
                out.push((v, v + n + 1));
            }
        }
    }
    out
}

fn find(parent: &mut [usize], v: usize) -> usize {
    let mut root = v;
    while parent[root] != root {
        root = parent[root];
    }
    let mut at = v;
    while parent[at] != root {
        let next = parent[at];
        parent[at] = root;
        at = next;
    }
    root
}

impl PlanarInstance {
    /// Random spanning tree of the grid plus each remaining edge with
    /// probability 0.6; lengths are multiples of 1/4 in `[1, 3]`.
    pub fn generate(n: usize, rng: &mut impl Rng) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput("grid side must be at least 2".into()));
        }
        let mut candidates = grid_edges(n);
        candidates.shuffle(rng);
        let mut parent: Vec<usize> = (0..n * n).collect();
        let mut chosen = Vec::new();
        for (u, v) in candidates {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            let keep = if ru != rv {
                parent[ru] = rv;
                true
            } else {
                rng.random_bool(EXTRA_EDGE_PROBABILITY)
            };
            if keep {
                chosen.push((u, v));
            }
        }
        chosen.sort_unstable();
        let edges: Vec<(usize, usize, Rational)> =
            chosen.into_iter().map(|(u, v)| (u, v, Rational::new(rng.random_range(4..=12), 4))).collect();
        let graph = MetricGraph::from_edges(n * n, &edges)?;
        Ok(PlanarInstance { n, graph })
    }

    /// Accepts `g` only if it is a subgraph of the triangulated `n × n` grid
    /// on exactly its `n²` vertices.
    pub fn try_from_graph(g: &MetricGraph, n: usize) -> Result<Self> {
        let refuse = |why: &str| Err(Error::InvalidInput(format!("not an instance of the planar grid generator: {why}")));
        if g.vertex_count() != n * n {
            return refuse(&format!("{} vertices, expected {}", g.vertex_count(), n * n));
        }
        let allowed: BTreeSet<(usize, usize)> = grid_edges(n).into_iter().collect();
        let mut seen = BTreeSet::new();
        for e in g.edges() {
            let key = (e.u.min(e.v), e.u.max(e.v));
            if !allowed.contains(&key) {
                return refuse(&format!("edge {} joins {} and {}", e.id, e.u, e.v));
            }
            if !seen.insert(key) {
                return refuse(&format!("parallel edge {}", e.id));
            }
        }
        Ok(PlanarInstance { n, graph: g.clone() })
    }

    pub fn side(&self) -> usize {
        self.n
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }
}

/// Verdict counts for one generated graph.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HarnessTrial {
    pub trial: usize,
    pub seed: u64,
    pub loops_tested: usize,
    pub no_obstruction: usize,
    pub certificates: usize,
    pub inconclusive: usize,
    pub budget_exceeded: usize,
    /// JSON dumps of any certificates, tagged with the basis loop index.
    pub certificate_dumps: Vec<(usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HarnessReport {
    pub trials: Vec<HarnessTrial>,
}

impl HarnessReport {
    pub fn total_certificates(&self) -> usize {
        self.trials.iter().map(|t| t.certificates).sum()
    }

    pub fn total_no_obstruction(&self) -> usize {
        self.trials.iter().map(|t| t.no_obstruction).sum()
    }

    pub fn total_inconclusive(&self) -> usize {
        self.trials.iter().map(|t| t.inconclusive + t.budget_exceeded).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,loops_tested,no_obstruction,certificate,inconclusive,budget_exceeded\n");
        for t in &self.trials {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t.trial, t.seed, t.loops_tested, t.no_obstruction, t.certificates, t.inconclusive, t.budget_exceeded
            ));
        }
        out
    }

    /// Writes every certificate to `dir/trial-<t>-loop-<k>.json`.
    pub fn dump_certificates(&self, dir: &Path) -> Result<usize> {
        let mut written = 0;
        for t in &self.trials {
            for (k, json) in &t.certificate_dumps {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("trial-{}-loop-{k}.json", t.trial)), json)?;
                written += 1;
            }
        }
        Ok(written)
    }
}

/// Runs the obstruction search on every minimum-basis loop of one instance.
pub fn run_instance(instance: &PlanarInstance, bound: u32) -> Result<HarnessTrial> {
    let g = instance.graph();
    let basis = minimum_cycle_basis(g);
    let mut trial = HarnessTrial { loops_tested: basis.len(), ..Default::default() };
    for (k, alpha) in basis.iter().enumerate() {
        match winding_obstruction_search(g, alpha, &[], bound) {
            Ok(ObstructionOutcome::NoObstructionFound { .. }) => trial.no_obstruction += 1,
            Ok(ObstructionOutcome::Inconclusive { .. }) => trial.inconclusive += 1,
            Ok(ObstructionOutcome::Certificate(cert)) => {
                log::error!("planar instance admits an obstruction certificate for basis loop {k}: candidate counterexample");
                trial.certificates += 1;
                trial.certificate_dumps.push((k, cert.to_json(g)));
            }
            Err(Error::BudgetExceeded { .. }) => trial.budget_exceeded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(trial)
}

/// Generates `trials` random planar instances on the `side × side` grid and
/// searches each minimum-basis loop for a winding obstruction. Trial seeds
/// are drawn from the master seed, so the report is reproducible.
pub fn conjecture_harness(seed: u64, trials: usize, bound: u32, side: usize) -> Result<HarnessReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required".into()));
    }
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..trials).map(|_| master.random()).collect();
    let results: Vec<Result<HarnessTrial>> = seeds
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let instance = PlanarInstance::generate(side, &mut rng)?;
            let mut t = run_instance(&instance, bound)?;
            t.trial = i;
            t.seed = s;
            Ok(t)
        })
        .collect();
    Ok(HarnessReport { trials: results.into_iter().collect::<Result<_>>()? })
}
