//! Table rendering and run artifacts.
//!
//! A run directory holds:
//!
//! - `report.json`: the full [`CvReport`], instance records included
//! - `folds.jsonl`: one line per fold with its plan and headline numbers
//! - `strategies.tsv`, `subgroups.tsv`, `tiebreaker.tsv`, `coalition.tsv`
//! - `report.md`: the same tables for reading

use super::{CvReport, FoldPlan};
use crate::dataset::DatasetInstance;
use crate::metrics::{MeanStd, Subgroup};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

fn cell(m: Option<&MeanStd>) -> String {
    m.map(|m| format!("{m:.2}")).unwrap_or_else(|| "-".into())
}

/// Rows of (label, accuracy, CE, score), each mean±std over folds.
pub fn strategy_rows(r: &CvReport) -> Vec<[String; 4]> {
    r.strategies
        .iter()
        .map(|s| {
            let a = &s.aggregate;
            [s.label.clone(), format!("{:.2}", a.accuracy), format!("{:.2}", a.content_effect), format!("{:.2}", a.combined_score)]
        })
        .collect()
}

pub fn subgroup_rows(r: &CvReport) -> Vec<[String; 5]> {
    r.strategies
        .iter()
        .map(|s| {
            let g = |x| cell(s.aggregate.subgroup_accuracy.get(&x));
            [s.label.clone(), g(Subgroup::VB), g(Subgroup::VU), g(Subgroup::IB), g(Subgroup::IU)]
        })
        .collect()
}

fn pct(part: usize, whole: usize) -> String {
    if whole == 0 {
        "-".into()
    } else {
        format!("{:.1}", 100.0 * part as f64 / whole as f64)
    }
}

/// Rows of (metric, count, percent) describing tiebreaker behavior.
pub fn tiebreaker_rows(r: &CvReport) -> Vec<[String; 3]> {
    let t = &r.tiebreaker;
    let row = |name: String, count: usize, p: String| [name, count.to_string(), p];
    vec![
        row("Total evaluation instances".into(), t.total, pct(t.total, t.total)),
        row(format!("Margin > {} (ensemble decides)", t.tau), t.non_splits, pct(t.non_splits, t.total)),
        row(format!("Margin <= {} (tiebreaker triggered)", t.tau), t.splits, pct(t.splits, t.total)),
        row("  Solver available on splits".into(), t.solver_available, pct(t.solver_available, t.splits)),
        row("  Degenerate premises".into(), t.degenerate_premises, pct(t.degenerate_premises, t.total)),
        row("Solver override decisions".into(), t.overrides, String::new()),
        row("  Correct flips".into(), t.correct_flips, String::new()),
        row("  Wrong flips".into(), t.wrong_flips, String::new()),
    ]
}

pub fn coalition_rows(r: &CvReport) -> Vec<[String; 3]> {
    r.coalition
        .minority_counts
        .iter()
        .map(|(id, c)| [id.clone(), c.to_string(), pct(*c, r.coalition.margin1_instances)])
        .collect()
}

fn tsv<const N: usize>(header: [&str; N], rows: &[[String; N]]) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join("\t"));
        out.push('\n');
    }
    out
}

fn markdown<const N: usize>(header: [&str; N], rows: &[[String; N]]) -> String {
    let mut out = format!("| {} |\n|{}\n", header.join(" | "), "---|".repeat(N));
    for r in rows {
        let _ = writeln!(out, "| {} |", r.join(" | "));
    }
    out
}

const STRATEGY_HEADER: [&str; 4] = ["strategy", "acc", "ce", "score"];
const SUBGROUP_HEADER: [&str; 5] = ["strategy", "VB", "VU", "IB", "IU"];
const TIEBREAKER_HEADER: [&str; 3] = ["metric", "count", "percent"];
const COALITION_HEADER: [&str; 3] = ["classifier", "minority", "percent"];

pub fn render_markdown(r: &CvReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# Cross-validation report\n\n{} instances, {} folds, mode {}, seed {}, CE metric {}.\n",
        r.dataset_size,
        r.folds.len(),
        r.settings.mode,
        r.settings.seed,
        r.settings.ce_metric.id()
    );
    let _ = writeln!(out, "## Strategies (mean±std over folds)\n\n{}", markdown(STRATEGY_HEADER, &strategy_rows(r)));
    let _ = writeln!(out, "## Subgroup accuracy\n\n{}", markdown(SUBGROUP_HEADER, &subgroup_rows(r)));
    let _ = writeln!(out, "## Tiebreaker behavior (all folds)\n\n{}", markdown(TIEBREAKER_HEADER, &tiebreaker_rows(r)));
    let _ = writeln!(
        out,
        "## Minority coalition on margin-1 instances ({} instances, chance {:.1}%)\n\n{}",
        r.coalition.margin1_instances,
        r.coalition.chance_percent,
        markdown(COALITION_HEADER, &coalition_rows(r))
    );
    let mut fails = Vec::new();
    for (g, f) in &r.extraction_failures {
        fails.push([g.to_string(), f.failures.to_string(), f.instances.to_string(), f.rate().map(|x| format!("{x:.1}")).unwrap_or("-".into())]);
    }
    let _ = writeln!(out, "## Extraction failures\n\n{}", markdown(["subgroup", "failures", "instances", "percent"], &fails));
    for f in &r.folds {
        let _ = writeln!(out, "Fold {}: ensemble {}", f.index, f.selection.chosen.join(", "));
    }
    out
}

#[derive(Serialize)]
struct FoldLine<'a> {
    fold: usize,
    evaluation_ids: Vec<&'a str>,
    inner_ids: Vec<&'a str>,
    chosen: &'a [String],
    ensemble_accuracy: Option<f64>,
    tiebreaker_accuracy: Option<f64>,
}

pub fn write_artifacts(dir: &Path, dataset: &[DatasetInstance], plan: &FoldPlan, r: &CvReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(r).map_err(io::Error::other)?;
    fs::write(dir.join("report.json"), json + "\n")?;

    let mut lines = String::new();
    for (fold, fr) in plan.folds.iter().zip(&r.folds) {
        let ids = |idx: &[usize]| idx.iter().map(|&i| dataset[i].id.as_str()).collect();
        let line = FoldLine {
            fold: fold.index,
            evaluation_ids: ids(&fold.evaluation),
            inner_ids: ids(&fold.inner),
            chosen: &fr.selection.chosen,
            ensemble_accuracy: fr.run.strategy(crate::fusion::FusionStrategy::EnsembleOnly).map(|m| m.accuracy),
            tiebreaker_accuracy: fr.run.strategy(crate::fusion::FusionStrategy::Tiebreaker { tau: r.settings.tau }).map(|m| m.accuracy),
        };
        lines.push_str(&serde_json::to_string(&line).map_err(io::Error::other)?);
        lines.push('\n');
    }
    fs::write(dir.join("folds.jsonl"), lines)?;
    write_tables(dir, r)
}

/// Writes the TSV tables and `report.md`; also used to re-render from a
/// saved `report.json`.
pub fn write_tables(dir: &Path, r: &CvReport) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("strategies.tsv"), tsv(STRATEGY_HEADER, &strategy_rows(r)))?;
    fs::write(dir.join("subgroups.tsv"), tsv(SUBGROUP_HEADER, &subgroup_rows(r)))?;
    fs::write(dir.join("tiebreaker.tsv"), tsv(TIEBREAKER_HEADER, &tiebreaker_rows(r)))?;
    fs::write(dir.join("coalition.tsv"), tsv(COALITION_HEADER, &coalition_rows(r)))?;
    fs::write(dir.join("report.md"), render_markdown(r))
}
