//! Report emission: result JSON, convergence trace CSV, graph description,
//! and static SVG plots.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use stldecomp::error::Error as CoreError;
use stldecomp::geometry::Polytope;
use stldecomp::graphs::Edge;
use stldecomp::tasks::Binding;

use crate::pipeline::{PipelineResult, VerificationReport};
use crate::scenario::Scenario;

/// One row of the structural table (per decomposition edge).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeRow {
    /// External edge label.
    pub edge: (usize, usize),
    /// Decomposition paths routed through this edge.
    pub n_paths: usize,
    /// Local variable dimension.
    pub chi_dim: usize,
    /// Shared inclusion rows of the routed paths.
    pub shared_rows: usize,
    /// Potential-conflict sets handled on this edge.
    pub q_sets: usize,
}

/// Serializable result document (`result.json`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultDoc {
    pub scenario: String,
    pub mode: String,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub max_shared_residual: f64,
    pub edges: Vec<EdgeRow>,
    pub verification: VerificationReport,
    /// Per-edge solution vectors, keyed "i-j" with external ids.
    pub chi: BTreeMap<String, Vec<f64>>,
}

pub fn edge_key(scenario: &Scenario, e: Edge) -> String {
    let (i, j) = scenario.external_edge(e);
    format!("{i}-{j}")
}

pub fn build_result_doc(scenario: &Scenario, mode: &str, result: &PipelineResult) -> ResultDoc {
    let edges = result
        .problem
        .edges
        .iter()
        .map(|(e, ep)| EdgeRow {
            edge: scenario.external_edge(*e),
            n_paths: ep.n_param(),
            chi_dim: ep.chi_dim,
            shared_rows: ep
                .tasks
                .parametric_units
                .iter()
                .map(|&u| result.problem.unit_rows[u])
                .sum(),
            q_sets: ep.families.q.len(),
        })
        .collect();
    let chi = result
        .report
        .chi
        .iter()
        .map(|(e, x)| (edge_key(scenario, *e), x.iter().copied().collect()))
        .collect();
    ResultDoc {
        scenario: scenario.name.clone(),
        mode: mode.to_string(),
        objective: result.report.objective,
        converged: result.report.converged,
        iterations: result.report.iterations,
        max_shared_residual: result.report.max_shared_residual,
        edges,
        verification: result.verification.clone(),
        chi,
    }
}

/// Parse an external "i-j" key back to an internal canonical edge.
pub fn parse_edge_key(scenario: &Scenario, key: &str) -> Option<Edge> {
    let (i, j) = key.split_once('-')?;
    let (i, j): (usize, usize) = (i.parse().ok()?, j.parse().ok()?);
    let a = scenario.external_ids.binary_search(&i).ok()?;
    let b = scenario.external_ids.binary_search(&j).ok()?;
    Some(stldecomp::graphs::canonical(a, b))
}

/// Write every artifact of a run into `out_dir`.
pub fn emit_reports(
    out_dir: &Path,
    scenario: &Scenario,
    scenario_source: &Path,
    mode: &str,
    result: &PipelineResult,
) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    fs::copy(scenario_source, out_dir.join("scenario.json"))?;

    let doc = build_result_doc(scenario, mode, result);
    fs::write(
        out_dir.join("result.json"),
        serde_json::to_string_pretty(&doc).expect("result serialization"),
    )?;

    // Convergence trace (column order fixed).
    let mut csv = String::from("iteration,edge,rho,alpha_sum,max_residual\n");
    for row in &result.report.trace {
        csv.push_str(&format!(
            "{},{},{:.9e},{:.9e},{:.9e}\n",
            row.iteration,
            edge_key(scenario, row.edge),
            row.rho,
            row.alpha_sum,
            row.max_residual
        ));
    }
    fs::write(out_dir.join("trace.csv"), csv)?;

    // Graph description.
    #[derive(Serialize)]
    struct Graphs {
        comm_edges: Vec<(usize, usize)>,
        task_edges: Vec<(usize, usize)>,
        rewritten_task_edges: Vec<(usize, usize)>,
        decomposition_edges: Vec<(usize, usize)>,
    }
    let graphs = Graphs {
        comm_edges: result
            .graphs
            .comm_edges
            .iter()
            .map(|&e| scenario.external_edge(e))
            .collect(),
        task_edges: result
            .graphs
            .task_edges
            .keys()
            .filter(|e| e.0 != e.1)
            .map(|&e| scenario.external_edge(e))
            .collect(),
        rewritten_task_edges: result
            .new_edge_tasks
            .keys()
            .map(|&e| scenario.external_edge(e))
            .collect(),
        decomposition_edges: result
            .problem
            .edges
            .keys()
            .map(|&e| scenario.external_edge(e))
            .collect(),
    };
    fs::write(
        out_dir.join("graphs.json"),
        serde_json::to_string_pretty(&graphs).expect("graph serialization"),
    )?;

    if let Ok(svg) = decomposition_plot(scenario, result) {
        fs::write(out_dir.join("decomposition.svg"), svg)?;
    }
    if !result.report.trace.is_empty() {
        fs::write(
            out_dir.join("convergence.svg"),
            convergence_plot(scenario, result),
        )?;
    }
    Ok(())
}

fn hull_order(verts: &[DVector<f64>]) -> Vec<(f64, f64)> {
    let cx = verts.iter().map(|v| v[0]).sum::<f64>() / verts.len() as f64;
    let cy = verts.iter().map(|v| v[1]).sum::<f64>() / verts.len() as f64;
    let mut pts: Vec<(f64, f64)> = verts.iter().map(|v| (v[0], v[1])).collect();
    pts.sort_by(|p, q| {
        let ap = (p.1 - cy).atan2(p.0 - cx);
        let aq = (q.1 - cy).atan2(q.0 - cx);
        ap.partial_cmp(&aq).unwrap()
    });
    pts
}

fn polygon_path(pts: &[(f64, f64)], tf: impl Fn(f64, f64) -> (f64, f64)) -> String {
    let mut d = String::new();
    for (k, &(x, y)) in pts.iter().enumerate() {
        let (px, py) = tf(x, y);
        d.push_str(if k == 0 { "M" } else { "L" });
        d.push_str(&format!("{px:.2},{py:.2} "));
    }
    d.push('Z');
    d
}

/// Original truth sets (solid) and their decomposed Minkowski sums (dashed),
/// one color pair per decomposed task.
fn decomposition_plot(scenario: &Scenario, result: &PipelineResult) -> Result<String, CoreError> {
    use stldecomp::geometry::{minkowski_sum_similar, SimilarityParam};
    use stldecomp::graphs::canonical;

    let mut shapes: Vec<(Vec<(f64, f64)>, Vec<(f64, f64)>, String)> = Vec::new();
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (u, unit) in result.index.units.iter().enumerate() {
        let original = &result.graphs.task_edges[&canonical(unit.edge.0, unit.edge.1)]
            [unit.task_idx];
        let eff = original.effective_set()?;
        if eff.dim() != 2 {
            return Err(CoreError::Contract("plots support 2-D scenarios only".into()));
        }
        let base = Polytope::new(eff.a().clone(), DVector::zeros(2), eff.z().clone())?;
        let mut etas = Vec::new();
        for (e, p) in &result.problem.unit_routing[u] {
            let ep = &result.problem.edges[e];
            let off = ep.eta_offset(*p);
            let x = &result.report.chi[e];
            etas.push(SimilarityParam::new(
                x.rows(off, 2).into_owned(),
                x[off + 2].max(0.0),
            )?);
        }
        if etas.is_empty() {
            continue;
        }
        let sum = minkowski_sum_similar(&base, &etas)?;
        let o = hull_order(eff.vertices()?);
        let s = hull_order(sum.vertices()?);
        for &(x, y) in o.iter().chain(s.iter()) {
            min = (min.0.min(x), min.1.min(y));
            max = (max.0.max(x), max.1.max(y));
        }
        let (i, j) = match original.binding {
            Binding::EdgePair { i, j } => (scenario.external_id(i), scenario.external_id(j)),
            Binding::Agent(i) => (scenario.external_id(i), scenario.external_id(i)),
        };
        shapes.push((o, s, format!("({i},{j})")));
    }

    let (w, h) = (760.0, 640.0);
    let pad = 50.0;
    let sx = if max.0 > min.0 { (w - 2.0 * pad) / (max.0 - min.0) } else { 1.0 };
    let sy = if max.1 > min.1 { (h - 2.0 * pad) / (max.1 - min.1) } else { 1.0 };
    let sc = sx.min(sy);
    let tf = |x: f64, y: f64| (pad + (x - min.0) * sc, h - pad - (y - min.1) * sc);

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (o, s, label) in &shapes {
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"#f5c2d0\" fill-opacity=\"0.35\" stroke=\"#c2185b\" \
             stroke-width=\"1.4\"/>\n",
            polygon_path(o, tf)
        ));
        svg.push_str(&format!(
            "<path d=\"{}\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1.4\" \
             stroke-dasharray=\"5,3\"/>\n",
            polygon_path(s, tf)
        ));
        if let Some(&(x, y)) = o.first() {
            let (px, py) = tf(x, y);
            svg.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" font-size=\"11\" fill=\"#444\">{label}</text>\n",
                py - 4.0
            ));
        }
    }
    svg.push_str(
        "<text x=\"12\" y=\"20\" font-size=\"13\" fill=\"#222\">original truth sets (solid) \
         vs decomposed sums (dashed)</text>\n</svg>\n",
    );
    Ok(svg)
}

/// Per-edge penalty traces on a log scale.
fn convergence_plot(scenario: &Scenario, result: &PipelineResult) -> String {
    let trace = &result.report.trace;
    let iters = trace.iter().map(|r| r.iteration).max().unwrap_or(0).max(1) as f64;
    let floor = 1e-12f64;
    let logs: Vec<f64> = trace.iter().map(|r| r.rho.max(floor).log10()).collect();
    let (lo, hi) = logs.iter().fold((0.0f64, -12.0f64), |(l, h), &v| {
        (l.min(v), h.max(v))
    });
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));

    let (w, h) = (760.0, 480.0);
    let pad = 55.0;
    let tf = |it: f64, lv: f64| {
        (
            pad + it / iters * (w - 2.0 * pad),
            h - pad - (lv - lo) / (hi - lo) * (h - 2.0 * pad),
        )
    };
    let palette = [
        "#e6194b", "#3cb44b", "#4363d8", "#f58231", "#911eb4", "#46f0f0", "#f032e6",
        "#bcf60c", "#008080", "#9a6324", "#800000", "#808000", "#000075", "#f0b400",
    ];

    let mut by_edge: BTreeMap<Edge, Vec<(f64, f64)>> = BTreeMap::new();
    for (row, lv) in trace.iter().zip(&logs) {
        by_edge
            .entry(row.edge)
            .or_default()
            .push(tf(row.iteration as f64, *lv));
    }

    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"12\" y=\"20\" font-size=\"13\" fill=\"#222\">penalty evolution per \
         decomposition edge (log10)</text>\n"
    );
    for (k, (edge, pts)) in by_edge.iter().enumerate() {
        let color = palette[k % palette.len()];
        let mut d = String::new();
        for (i, (x, y)) in pts.iter().enumerate() {
            d.push_str(if i == 0 { "M" } else { "L" });
            d.push_str(&format!("{x:.2},{y:.2} "));
        }
        svg.push_str(&format!(
            "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.1\"/>\n"
        ));
        let (i, j) = scenario.external_edge(*edge);
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"10\" fill=\"{color}\">({i},{j})</text>\n",
            w - pad + 4.0,
            pad + 14.0 * k as f64
        ));
    }
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333\"/>\n\
         <line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{:.1}\" stroke=\"#333\"/>\n</svg>\n",
        h - pad,
        w - pad,
        h - pad,
        h - pad
    ));
    svg
}
