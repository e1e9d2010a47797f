//! WebAssembly bindings behind `www/index.html`. Every entry point takes
//! plain values and returns a JSON string; errors become JS exceptions.

use critnode::baselines::{run_baseline, BaselineKind};
use critnode::dismantle::{one_shot, AncCurve};
use critnode::dsl::{parse, Evaluator, MetricCache};
use critnode::engine::{run, EvolutionConfig};
use critnode::graph::{generate_ba, load_edge_list, Graph};
use critnode::variation::MockOperator;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Parses `edges` when non-blank, otherwise generates BA(n, m, seed).
pub fn build_graph(edges: &str, n: usize, m: usize, seed: u64) -> Result<Graph, String> {
    let g = if edges.trim().is_empty() {
        if n > 3000 {
            return Err("keep n at 3000 or below in the browser".into());
        }
        generate_ba(n, m, seed).map_err(|e| e.to_string())?
    } else {
        load_edge_list(edges.as_bytes()).map_err(|e| e.to_string())?
    };
    if g.edge_count() == 0 {
        return Err("graph has no edges".into());
    }
    Ok(g)
}

#[derive(Serialize)]
struct Curve {
    name: String,
    anc: f64,
    ratios: Vec<f64>,
}

impl Curve {
    fn new(name: &str, c: AncCurve) -> Self {
        Self {
            name: name.to_string(),
            anc: c.value(),
            ratios: c.ratios,
        }
    }
}

#[derive(Serialize)]
struct CurvesOut {
    nodes: usize,
    edges: usize,
    curves: Vec<Curve>,
}

/// Residual-connectivity curves for each method in `methods`
/// (comma-separated `dc`, `corehd`, `wn`), plus one for `expr` if given.
pub fn curves_json(g: &Graph, methods: &str, expr: &str, fraction: f64, seed: u64) -> Result<String, String> {
    let mut curves = Vec::new();
    for name in methods.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind: BaselineKind = name.parse()?;
        let (_, c) = run_baseline(kind, seed, g, fraction).map_err(|e| e.to_string())?;
        curves.push(Curve::new(kind.name(), c));
    }
    if !expr.trim().is_empty() {
        let e = parse(expr).map_err(|e| e.to_string())?;
        let cache = MetricCache::new();
        let (_, c) = one_shot(&Evaluator::new(g, &cache), &e, fraction).map_err(|e| e.to_string())?;
        curves.push(Curve::new(&e.to_string(), c));
    }
    let out = CurvesOut {
        nodes: g.node_count(),
        edges: g.edge_count(),
        curves,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

#[derive(Serialize)]
struct ScoredNode {
    label: String,
    score: f64,
}

#[derive(Serialize)]
struct ScoreOut {
    canonical: String,
    size: usize,
    depth: usize,
    top: Vec<ScoredNode>,
    anc: f64,
    removal: Vec<String>,
}

/// Scores every node with `expr` and reports the highest-scored ones and
/// the ANC of removing them.
pub fn score_json(g: &Graph, expr: &str, fraction: f64, top: usize) -> Result<String, String> {
    let e = parse(expr).map_err(|e| e.to_string())?;
    let cache = MetricCache::new();
    let ev = Evaluator::new(g, &cache);
    let scores = ev.evaluate(&e);
    let (removal, curve) = one_shot(&ev, &e, fraction).map_err(|e| e.to_string())?;
    let out = ScoreOut {
        canonical: e.to_string(),
        size: e.size(),
        depth: e.depth(),
        top: removal
            .nodes()
            .iter()
            .take(top)
            .map(|&v| ScoredNode {
                label: g.label(v).to_string(),
                score: scores[v],
            })
            .collect(),
        anc: curve.value(),
        removal: removal.nodes().iter().map(|&v| g.label(v).to_string()).collect(),
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

/// Runs the deterministic evolution loop and returns its epoch records.
pub fn evolve_json(g: &Graph, epochs: usize, mutation_rate: f64, tau: f64, seed: u64) -> Result<String, String> {
    if epochs > 200 {
        return Err("keep epochs at 200 or below in the browser".into());
    }
    let cfg = EvolutionConfig {
        epochs,
        mutation_rate,
        similarity_threshold: tau,
        master_seed: seed,
        ..Default::default()
    };
    let r = run(g, &cfg, &MockOperator::default()).map_err(|e| e.to_string())?;
    let out = serde_json::json!({
        "records": r.records,
        "best": { "expr": r.best.expr.to_string(), "fitness": r.best.fitness },
    });
    Ok(out.to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn dismantling_curves(
    edges: &str,
    n: usize,
    m: usize,
    graph_seed: u64,
    methods: &str,
    expr: &str,
    fraction: f64,
    seed: u64,
) -> Result<String, JsError> {
    js(build_graph(edges, n, m, graph_seed).and_then(|g| curves_json(&g, methods, expr, fraction, seed)))
}

#[wasm_bindgen]
pub fn score_expression(
    edges: &str,
    n: usize,
    m: usize,
    graph_seed: u64,
    expr: &str,
    fraction: f64,
    top: usize,
) -> Result<String, JsError> {
    js(build_graph(edges, n, m, graph_seed).and_then(|g| score_json(&g, expr, fraction, top)))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn mock_evolution(
    edges: &str,
    n: usize,
    m: usize,
    graph_seed: u64,
    epochs: usize,
    mutation_rate: f64,
    tau: f64,
    seed: u64,
) -> Result<String, JsError> {
    js(build_graph(edges, n, m, graph_seed).and_then(|g| evolve_json(&g, epochs, mutation_rate, tau, seed)))
}
