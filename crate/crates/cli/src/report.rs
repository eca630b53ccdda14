//! Output files: candidates.json, candidates.csv, lloyd.json, trace.csv,
//! comparison.csv and figure.svg.

use std::fmt::Write as _;
use std::path::Path;

use coverage_core::homotopy::{PathSummary, TrackerOptions};
use coverage_core::lloyd::{LloydTrace, Termination};
use coverage_core::optimizer::{Candidate, CandidateSearch, Census, Method};
use coverage_core::{BoundaryPin, CoverageProblem};
use serde::{Deserialize, Serialize};

use crate::config::{ProblemSection, Start};

/// Objective gap below which a Lloyd endpoint counts as the global minimum.
pub const GLOBAL_GAP: f64 = 1e-6;

/// The pin patterns the stationarity analysis distinguishes by default:
/// interior, left end and right end.
pub const THREE_PATTERNS: [BoundaryPin; 3] = [BoundaryPin::NONE, BoundaryPin::LEFT, BoundaryPin::RIGHT];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceSummary {
    pub pin: BoundaryPin,
    pub variables: Vec<String>,
    pub bezout: u64,
    pub converged: usize,
    pub diverged: usize,
    pub failed: usize,
    pub singular: usize,
    pub theta: f64,
    pub complex: usize,
    pub real: usize,
    pub feasible: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CensusReport {
    /// Interior, left and right patterns.
    pub three_patterns: Census,
    /// Every enumerated pattern, including both ends pinned.
    pub all_patterns: Census,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub problem: ProblemSection,
    pub method: Method,
    pub seed: u64,
    pub tracker: TrackerOptions,
    pub instances: Vec<InstanceSummary>,
    pub census: CensusReport,
    pub failed_paths: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub pin: BoundaryPin,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub residual: f64,
    pub singular: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidatesDoc {
    pub metadata: Metadata,
    pub winner: Option<Candidate>,
    pub candidates: Vec<Candidate>,
    pub solutions: Vec<SolutionRecord>,
}

fn summary(p: &PathSummary) -> (usize, usize, usize, usize) {
    (p.converged, p.diverged, p.failed, p.singular)
}

pub fn census_report(search: &CandidateSearch, opts: &TrackerOptions) -> CensusReport {
    let all: Vec<BoundaryPin> = search.instances.iter().map(|i| i.pin).collect();
    CensusReport {
        three_patterns: search.census(&THREE_PATTERNS, opts.real_tol, opts.dedup_tol),
        all_patterns: search.census(&all, opts.real_tol, opts.dedup_tol),
    }
}

pub fn candidates_doc(
    problem: &ProblemSection,
    search: &CandidateSearch,
    winner: Option<&Candidate>,
    opts: &TrackerOptions,
) -> CandidatesDoc {
    let instances = search
        .instances
        .iter()
        .map(|i| {
            let (converged, diverged, failed, singular) = summary(&i.paths);
            InstanceSummary {
                pin: i.pin,
                variables: i.variables.clone(),
                bezout: i.bezout,
                converged,
                diverged,
                failed,
                singular,
                theta: i.theta,
                complex: i.complex,
                real: i.real,
                feasible: i.feasible,
            }
        })
        .collect();
    let solutions = search
        .instances
        .iter()
        .flat_map(|i| {
            i.solutions.iter().map(|s| SolutionRecord {
                pin: i.pin,
                re: s.re.clone(),
                im: s.im.clone(),
                residual: s.residual,
                singular: s.singular,
            })
        })
        .collect();
    CandidatesDoc {
        metadata: Metadata {
            tool: "coverage".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            problem: problem.clone(),
            method: search.method,
            seed: search.seed,
            tracker: opts.clone(),
            instances,
            census: census_report(search, opts),
            failed_paths: search.failed_paths(),
        },
        winner: winner.cloned(),
        candidates: search.candidates.clone(),
        solutions,
    }
}

fn csv_error(e: csv::Error) -> std::io::Error {
    std::io::Error::other(e)
}

fn position_header(m: usize) -> impl Iterator<Item = String> {
    (1..=m).map(|i| format!("p{i}"))
}

/// One row per candidate: positions, objective, pin, Hessian class, source.
pub fn candidates_csv(candidates: &[Candidate], m: usize) -> Result<String, std::io::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = position_header(m).collect();
    header.extend(["objective", "pin", "hessian", "source", "gradient_norm"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for c in candidates {
        let mut row: Vec<String> = c.positions.iter().map(|v| format!("{v:.17e}")).collect();
        row.push(format!("{:.17e}", c.objective));
        row.push(c.pin.label().into());
        row.push(c.hessian.label().into());
        row.push(c.source.label().into());
        row.push(format!("{:.3e}", c.gradient_norm));
        w.write_record(&row).map_err(csv_error)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LloydRun {
    pub label: String,
    pub initial: Vec<f64>,
    #[serde(rename = "final")]
    pub final_positions: Vec<f64>,
    pub objective: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub terminated_by: Termination,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LloydDoc {
    pub runs: Vec<LloydRun>,
}

pub fn lloyd_doc(starts: &[Start], traces: &[LloydTrace]) -> LloydDoc {
    LloydDoc {
        runs: starts
            .iter()
            .zip(traces)
            .map(|(s, t)| LloydRun {
                label: s.label.clone(),
                initial: s.positions.clone(),
                final_positions: t.last().positions.clone(),
                objective: t.last().objective,
                grad_norm: t.last().grad_norm,
                iterations: t.iterates.len() - 1,
                terminated_by: t.terminated_by,
            })
            .collect(),
    }
}

/// Every iterate of every run: `run, label, iter, p1..pm, objective, grad_norm, step`.
pub fn trace_csv(starts: &[Start], traces: &[LloydTrace], m: usize) -> Result<String, std::io::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["run", "label", "iter"].map(String::from).to_vec();
    header.extend(position_header(m));
    header.extend(["objective", "grad_norm", "step"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    for (r, (s, t)) in starts.iter().zip(traces).enumerate() {
        for (k, it) in t.iterates.iter().enumerate() {
            let mut row = vec![r.to_string(), s.label.clone(), k.to_string()];
            row.extend(it.positions.iter().map(|v| format!("{v:.17e}")));
            row.push(format!("{:.17e}", it.objective));
            row.push(format!("{:.6e}", it.grad_norm));
            row.push(format!("{:.6e}", it.step));
            w.write_record(&row).map_err(csv_error)?;
        }
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub label: String,
    pub final_positions: Vec<f64>,
    pub objective: f64,
    pub gap: f64,
    pub verdict: &'static str,
}

pub fn verdict(gap: f64) -> &'static str {
    if gap < GLOBAL_GAP {
        "global"
    } else {
        "local"
    }
}

pub fn comparison_rows(winner: &Candidate, lloyd: &LloydDoc) -> Vec<ComparisonRow> {
    lloyd
        .runs
        .iter()
        .map(|r| {
            let gap = r.objective - winner.objective;
            ComparisonRow {
                label: r.label.clone(),
                final_positions: r.final_positions.clone(),
                objective: r.objective,
                gap,
                verdict: verdict(gap),
            }
        })
        .collect()
}

pub fn comparison_csv(winner: &Candidate, rows: &[ComparisonRow]) -> Result<String, std::io::Error> {
    let m = winner.positions.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["run".into()];
    header.extend(position_header(m));
    header.extend(["objective", "gap", "verdict"].map(String::from));
    w.write_record(&header).map_err(csv_error)?;
    let mut first = vec!["global-minimum".to_string()];
    first.extend(winner.positions.iter().map(|v| format!("{v:.17e}")));
    first.extend([format!("{:.17e}", winner.objective), "0".into(), "-".into()]);
    w.write_record(&first).map_err(csv_error)?;
    for r in rows {
        let mut row = vec![r.label.clone()];
        row.extend(r.final_positions.iter().map(|v| format!("{v:.17e}")));
        row.extend([format!("{:.17e}", r.objective), format!("{:.6e}", r.gap), r.verdict.into()]);
        w.write_record(&row).map_err(csv_error)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf8"))
}

fn fmt_positions(p: &[f64]) -> String {
    let inner: Vec<String> = p.iter().map(|v| format!("{v:.6}")).collect();
    format!("({})", inner.join(", "))
}

/// Human-readable comparison table.
pub fn comparison_table(winner: &Candidate, rows: &[ComparisonRow]) -> String {
    let mut s = String::new();
    let width = rows.iter().map(|r| r.label.len()).chain([14]).max().unwrap_or(14);
    let _ = writeln!(s, "{:<width$}  {:<36}  {:>14}  {:>11}  verdict", "run", "final", "objective", "gap");
    let _ = writeln!(
        s,
        "{:<width$}  {:<36}  {:>14.8e}  {:>11}  -",
        "global-minimum",
        fmt_positions(&winner.positions),
        winner.objective,
        "-"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:<36}  {:>14.8e}  {:>11.3e}  {}",
            r.label,
            fmt_positions(&r.final_positions),
            r.objective,
            r.gap,
            r.verdict
        );
    }
    s
}

/// Text summary of a solve: per-instance path statistics, census and winner.
pub fn solve_summary(doc: &CandidatesDoc) -> String {
    let mut s = String::new();
    let md = &doc.metadata;
    let _ = writeln!(s, "method {} seed {}", md.method.label(), md.seed);
    let _ = writeln!(
        s,
        "{:<9} {:>6} {:>9} {:>8} {:>6} {:>8} {:>7} {:>5} {:>8}",
        "pattern", "paths", "converged", "diverged", "failed", "singular", "complex", "real", "feasible"
    );
    for i in &md.instances {
        let _ = writeln!(
            s,
            "{:<9} {:>6} {:>9} {:>8} {:>6} {:>8} {:>7} {:>5} {:>8}",
            i.pin.label(),
            i.bezout,
            i.converged,
            i.diverged,
            i.failed,
            i.singular,
            i.complex,
            i.real,
            i.feasible
        );
    }
    let c3 = md.census.three_patterns;
    let ca = md.census.all_patterns;
    let _ = writeln!(
        s,
        "census (interior, left, right): {} complex / {} real / {} feasible",
        c3.complex, c3.real, c3.feasible
    );
    let _ = writeln!(
        s,
        "census (all patterns):          {} complex / {} real / {} feasible",
        ca.complex, ca.real, ca.feasible
    );
    match &doc.winner {
        Some(w) => {
            let _ = writeln!(
                s,
                "global minimum {} objective {:.12e} ({}, {})",
                fmt_positions(&w.positions),
                w.objective,
                w.pin.label(),
                w.hessian.label()
            );
        }
        None => {
            let _ = writeln!(s, "no feasible candidate");
        }
    }
    s
}

/// Marker roles on the figure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marker {
    Optimum,
    LloydGlobal,
    LloydLocal,
    Lloyd,
}

/// SVG with the density over `[A, B]` and rows of vehicle markers.
pub fn figure_svg(problem: &CoverageProblem, rows: &[(Marker, Vec<f64>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const RIGHT: f64 = 600.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 300.0;
    let (a, b) = (problem.a(), problem.b());
    let sx = |x: f64| LEFT + (x - a) / (b - a) * (RIGHT - LEFT);
    let samples: Vec<(f64, f64)> = (0..=200)
        .map(|k| {
            let x = a + (b - a) * k as f64 / 200.0;
            (x, problem.density_at(x))
        })
        .collect();
    let ymax = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    let ymax = if ymax > 0.0 { ymax } else { 1.0 };
    let sy = |y: f64| BOTTOM - y.max(0.0) / ymax * (BOTTOM - TOP);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT}" y1="{BOTTOM}" x2="{RIGHT}" y2="{BOTTOM}" stroke="black"/>"#
    );
    let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{BOTTOM}" stroke="black"/>"#);
    for k in 0..=4 {
        let x = a + (b - a) * k as f64 / 4.0;
        let px = sx(x);
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{BOTTOM}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            BOTTOM + 5.0,
            BOTTOM + 18.0,
            trim(x)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
        LEFT - 6.0,
        TOP + 4.0,
        trim(ymax)
    );
    let path: Vec<String> = samples
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline fill="none" stroke="red" stroke-width="2" stroke-dasharray="6,4" points="{}"/>"#,
        path.join(" ")
    );

    for (r, (marker, p)) in rows.iter().enumerate() {
        let y = BOTTOM - 14.0 - 14.0 * (r % 8) as f64;
        for &x in p {
            let cx = sx(x);
            let _ = writeln!(s, "{}", marker_svg(*marker, cx, y));
        }
    }

    let legend = [
        (Marker::Optimum, "certified global minimum"),
        (Marker::LloydGlobal, "Lloyd endpoint (global)"),
        (Marker::LloydLocal, "Lloyd endpoint (local)"),
        (Marker::Lloyd, "Lloyd endpoint"),
    ];
    let mut ly = BOTTOM + 40.0;
    for (m, text) in legend {
        if rows.iter().any(|(k, _)| *k == m) {
            let _ = writeln!(s, "{}", marker_svg(m, LEFT + 10.0, ly - 4.0));
            let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{text}</text>"#, LEFT + 22.0);
            ly += 16.0;
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" fill="red">density</text>"#,
        RIGHT,
        TOP - 10.0
    );
    s.push_str("</svg>\n");
    s
}

fn trim(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

fn marker_svg(m: Marker, x: f64, y: f64) -> String {
    match m {
        Marker::Optimum => format!(
            r#"<path d="M {x:.2} {:.2} L {:.2} {y:.2} L {x:.2} {:.2} L {:.2} {y:.2} Z" fill="none" stroke="green" stroke-width="2"/>"#,
            y - 6.0,
            x + 6.0,
            y + 6.0,
            x - 6.0
        ),
        Marker::LloydGlobal => format!(
            r#"<rect x="{:.2}" y="{:.2}" width="9" height="9" fill="blue"/>"#,
            x - 4.5,
            y - 4.5
        ),
        Marker::LloydLocal => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="black"/>"#),
        Marker::Lloyd => format!(r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="none" stroke="black"/>"#),
    }
}

/// Marker rows for a figure from whatever results are present.
pub fn figure_rows(winner: Option<&Candidate>, lloyd: Option<&LloydDoc>) -> Vec<(Marker, Vec<f64>)> {
    let mut rows = Vec::new();
    if let Some(w) = winner {
        rows.push((Marker::Optimum, w.positions.clone()));
    }
    if let Some(l) = lloyd {
        for r in &l.runs {
            let marker = match winner {
                Some(w) if r.objective - w.objective < GLOBAL_GAP => Marker::LloydGlobal,
                Some(_) => Marker::LloydLocal,
                None => Marker::Lloyd,
            };
            rows.push((marker, r.final_positions.clone()));
        }
    }
    rows
}

pub fn write(dir: &Path, name: &str, contents: &str) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)
}
