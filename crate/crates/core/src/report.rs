//! Report assembly: runs the full evaluation pipeline over tool outputs
//! and renders deterministic JSON documents and aligned text tables.
//!
//! All sets serialize in lexicographic order, tools and apps sort by
//! name, and floating point values come from the same arithmetic on every
//! run, so reports are byte-stable across runs and input orderings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ctg::{
    build_ctg, connectivity, degree, edge_classes, flag_high_degree, EdgeClasses,
    HIGH_DEGREE_THRESHOLD,
};
use crate::eval::{
    compare, fn_by_tag, pairwise, single_characteristic_slice, unify, Pairwise, ToolOutput,
    UnifyOptions,
};
use crate::manifest::AppModel;
use crate::matcher::PartialRecord;
use crate::model::IccLink;
use crate::tags::{tag_distribution, Tag};

/// Evaluation knobs shared by every tool plus per-tool overrides.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    pub high_degree_threshold: f64,
    pub default_unify: UnifyOptions,
    pub per_tool: BTreeMap<String, UnifyOptions>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            high_degree_threshold: HIGH_DEGREE_THRESHOLD,
            default_unify: UnifyOptions::default(),
            per_tool: BTreeMap::new(),
        }
    }
}

impl EvalOptions {
    fn unify_for(&self, tool: &str) -> UnifyOptions {
        self.per_tool
            .get(tool)
            .copied()
            .unwrap_or(self.default_unify)
    }
}

/// Oracle-side statistics, reported even when no tool output is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleStats {
    pub links: usize,
    /// Fraction of oracle links carrying each tag; empty for an untagged
    /// or empty oracle.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tag_distribution: BTreeMap<String, f64>,
}

/// Graph metrics over one tool's unified output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphMetrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<f64>,
    pub high_degree: bool,
    pub c_separated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_main_not: Option<usize>,
    pub c_export_not: usize,
    pub edge_classes: EdgeClasses,
}

/// One tool's scores on one app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolReport {
    pub reported: usize,
    pub unified: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    pub fn_rate: f64,
    pub tp_links: Vec<String>,
    pub fp_links: Vec<String>,
    pub fn_links: Vec<String>,
    pub graph: GraphMetrics,
    /// Non-zero FN counts per characteristic tag.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fn_by_tag: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unresolved_records: Vec<PartialRecord>,
    /// TP edges whose payload disagrees with the oracle; informational.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub payload_diffs: Vec<String>,
}

/// Per-tag control-variable slice with per-tool TP/FN counts inside it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub oracle: usize,
    pub tools: BTreeMap<String, SliceCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceCell {
    pub tp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
}

/// Full comparison report for one app.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub app: String,
    pub oracle: OracleStats,
    pub tools: BTreeMap<String, ToolReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pairwise: BTreeMap<String, Pairwise>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub slices: BTreeMap<String, SliceReport>,
}

fn sorted_keys(links: &BTreeSet<IccLink>) -> Vec<String> {
    links.iter().map(|l| l.to_string()).collect()
}

/// Builds the single-app report: unify, compare, graph metrics, pairwise
/// overlaps and tag analyses for every successful tool output.
pub fn build_report(
    app: &str,
    model: &AppModel,
    oracle: &BTreeSet<IccLink>,
    outputs: &[ToolOutput],
    options: &EvalOptions,
) -> EvalReport {
    let tag_dist = if oracle.iter().all(|l| !l.tags.is_empty()) {
        let oracle_vec: Vec<IccLink> = oracle.iter().cloned().collect();
        tag_distribution(&oracle_vec)
            .map(|d| {
                d.into_iter()
                    .filter(|(_, v)| *v > 0.0)
                    .map(|(t, v)| (t.as_str().to_string(), v))
                    .collect()
            })
            .unwrap_or_default()
    } else {
        BTreeMap::new()
    };

    let mut tools = BTreeMap::new();
    let mut failures = Vec::new();
    let mut unified_by_tool: BTreeMap<String, BTreeSet<IccLink>> = BTreeMap::new();

    for output in outputs {
        if !output.success {
            failures.push(output.tool.clone());
            continue;
        }
        let unify_options = options.unify_for(&output.tool);
        let unified = unify(output, model, &unify_options);
        let cmp = compare(&unified.links, oracle);

        let ctg = build_ctg(model, &unified.links);
        let deg = degree(&ctg).ok();
        let conn = connectivity(&ctg, model);
        let graph = GraphMetrics {
            high_degree: deg
                .map(|d| flag_high_degree(d, options.high_degree_threshold))
                .unwrap_or(false),
            degree: deg,
            c_separated: conn.c_separated,
            c_main_not: conn.c_main_not,
            c_export_not: conn.c_export_not,
            edge_classes: edge_classes(&ctg),
        };

        let fn_tags = fn_by_tag(&cmp.fn_, oracle)
            .map(|counts| {
                counts
                    .into_iter()
                    .filter(|(_, c)| *c > 0)
                    .map(|(t, c)| (t.as_str().to_string(), c))
                    .collect()
            })
            .unwrap_or_default();

        let fn_rate = if oracle.is_empty() {
            0.0
        } else {
            cmp.fn_.len() as f64 / oracle.len() as f64
        };

        tools.insert(
            output.tool.clone(),
            ToolReport {
                reported: output.reported_count(),
                unified: unified.links.len(),
                tp: cmp.tp.len(),
                fp: cmp.fp.len(),
                fn_count: cmp.fn_.len(),
                fn_rate,
                tp_links: sorted_keys(&cmp.tp),
                fp_links: sorted_keys(&cmp.fp),
                fn_links: sorted_keys(&cmp.fn_),
                graph,
                fn_by_tag: fn_tags,
                unresolved_records: unified.unresolved.clone(),
                payload_diffs: cmp.payload_diffs.iter().map(|k| k.to_string()).collect(),
            },
        );
        unified_by_tool.insert(output.tool.clone(), unified.links);
    }
    failures.sort();

    let mut pairwise_map = BTreeMap::new();
    let names: Vec<&String> = unified_by_tool.keys().collect();
    for (i, a) in names.iter().enumerate() {
        for b in names.iter().skip(i + 1) {
            let pw = pairwise(&unified_by_tool[*a], &unified_by_tool[*b], oracle);
            pairwise_map.insert(format!("{a}|{b}"), pw);
        }
    }

    let mut slices = BTreeMap::new();
    for tag in Tag::ALL {
        let slice = single_characteristic_slice(oracle, tag);
        if slice.is_empty() {
            continue;
        }
        let mut cells = BTreeMap::new();
        for (tool, unified) in &unified_by_tool {
            let tp = slice.intersection(unified).count();
            cells.insert(
                tool.clone(),
                SliceCell {
                    tp,
                    fn_count: slice.len() - tp,
                },
            );
        }
        slices.insert(
            tag.as_str().to_string(),
            SliceReport {
                oracle: slice.len(),
                tools: cells,
            },
        );
    }

    EvalReport {
        app: app.to_string(),
        oracle: OracleStats {
            links: oracle.len(),
            tag_distribution: tag_dist,
        },
        tools,
        failures,
        pairwise: pairwise_map,
        slices,
    }
}

/// One app's inputs for a suite evaluation.
#[derive(Debug, Clone)]
pub struct AppCase {
    pub app: String,
    pub model: AppModel,
    pub oracle: BTreeSet<IccLink>,
    pub outputs: Vec<ToolOutput>,
}

/// Per-tool aggregate over the apps a tool successfully analyzed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolTotals {
    pub apps_succeeded: usize,
    pub apps_failed: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_count: usize,
    /// Mean of per-app FN rates; failed apps are not counted.
    pub avg_fn_rate: f64,
}

/// Multi-app comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub oracle_links: usize,
    pub apps: Vec<EvalReport>,
    pub totals: BTreeMap<String, ToolTotals>,
}

/// Evaluates every app case and aggregates per-tool totals. Apps sort by
/// name; a tool missing from an app's outputs counts as failed there.
pub fn build_suite_report(cases: &[AppCase], options: &EvalOptions) -> SuiteReport {
    let mut apps: Vec<EvalReport> = cases
        .iter()
        .map(|case| build_report(&case.app, &case.model, &case.oracle, &case.outputs, options))
        .collect();
    apps.sort_by(|a, b| a.app.cmp(&b.app));

    let mut tool_names: BTreeSet<String> = BTreeSet::new();
    for report in &apps {
        tool_names.extend(report.tools.keys().cloned());
        tool_names.extend(report.failures.iter().cloned());
    }

    let mut totals = BTreeMap::new();
    for tool in tool_names {
        let mut agg = ToolTotals {
            apps_succeeded: 0,
            apps_failed: 0,
            tp: 0,
            fp: 0,
            fn_count: 0,
            avg_fn_rate: 0.0,
        };
        let mut rate_sum = 0.0;
        for report in &apps {
            match report.tools.get(&tool) {
                Some(t) => {
                    agg.apps_succeeded += 1;
                    agg.tp += t.tp;
                    agg.fp += t.fp;
                    agg.fn_count += t.fn_count;
                    rate_sum += t.fn_rate;
                }
                None => agg.apps_failed += 1,
            }
        }
        if agg.apps_succeeded > 0 {
            agg.avg_fn_rate = rate_sum / agg.apps_succeeded as f64;
        }
        totals.insert(tool, agg);
    }

    SuiteReport {
        oracle_links: apps.iter().map(|r| r.oracle.links).sum(),
        apps,
        totals,
    }
}

pub fn report_to_json(report: &EvalReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

pub fn suite_to_json(report: &SuiteReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}

/// Renders the per-app/per-tool FP/FN table: one row per app, one column
/// per tool, `FP/FN` cells, `-` where a tool failed, and a Sum row.
pub fn suite_to_table(report: &SuiteReport) -> String {
    let tools: Vec<&String> = report.totals.keys().collect();

    let mut header: Vec<String> = vec!["Bench".to_string(), "#OR".to_string()];
    header.extend(tools.iter().map(|t| (*t).to_string()));

    let mut rows: Vec<Vec<String>> = vec![header];
    for app in &report.apps {
        let mut row = vec![app.app.clone(), app.oracle.links.to_string()];
        for tool in &tools {
            row.push(match app.tools.get(*tool) {
                Some(t) => format!("{}/{}", t.fp, t.fn_count),
                None => "-".to_string(),
            });
        }
        rows.push(row);
    }
    let mut sum_row = vec!["Sum".to_string(), report.oracle_links.to_string()];
    for tool in &tools {
        let t = &report.totals[*tool];
        sum_row.push(format!("{}/{}", t.fp, t.fn_count));
    }
    rows.push(sum_row);

    render_table(&rows)
}

/// Single-app variant of the FP/FN table.
pub fn report_to_table(report: &EvalReport) -> String {
    let mut tools: Vec<&String> = report.tools.keys().collect();
    tools.extend(report.failures.iter());
    tools.sort();

    let mut header: Vec<String> = vec!["Bench".to_string(), "#OR".to_string()];
    header.extend(tools.iter().map(|t| (*t).to_string()));
    let mut row = vec![report.app.clone(), report.oracle.links.to_string()];
    for tool in &tools {
        row.push(match report.tools.get(*tool) {
            Some(t) => format!("{}/{}", t.fp, t.fn_count),
            None => "-".to_string(),
        });
    }
    render_table(&[header, row])
}

fn render_table(rows: &[Vec<String>]) -> String {
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(cell);
            if i + 1 < row.len() {
                line.push_str(&" ".repeat(widths[i] - cell.len()));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}
