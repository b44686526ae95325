//! Component transition graph construction and the number/graph metrics
//! computed over it: average degree, connectivity counts and edge-class
//! counts.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::{classify, AppModel};
use crate::model::{ComponentKind, IccLink};

/// Directed component transition graph.
///
/// Nodes cover all declared components plus any extra endpoints appearing
/// in edges; only declared components count toward `|N|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ctg {
    pub nodes: BTreeMap<String, CtgNode>,
    pub edges: BTreeSet<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CtgNode {
    pub kind: ComponentKind,
    /// False for endpoints that only appear in edges.
    pub declared: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no declared components")]
    EmptyGraph,
}

/// Builds the CTG for a model and a set of extracted or reported links.
pub fn build_ctg<'a>(model: &AppModel, links: impl IntoIterator<Item = &'a IccLink>) -> Ctg {
    let mut nodes = BTreeMap::new();
    for component in model.components.values() {
        nodes.insert(
            component.name.clone(),
            CtgNode {
                kind: component.kind,
                declared: true,
            },
        );
    }
    let mut edges = BTreeSet::new();
    for link in links {
        for endpoint in [&link.source, &link.target] {
            nodes.entry(endpoint.clone()).or_insert_with(|| CtgNode {
                kind: classify(endpoint, model),
                declared: false,
            });
        }
        edges.insert((link.source.clone(), link.target.clone()));
    }
    Ctg { nodes, edges }
}

impl Ctg {
    /// Number of declared components.
    pub fn declared_count(&self) -> usize {
        self.nodes.values().filter(|n| n.declared).count()
    }

    /// Endpoints that only appear in edges, for diagnostics.
    pub fn undeclared_nodes(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|(_, n)| !n.declared)
            .map(|(name, _)| name.as_str())
            .collect()
    }
}

/// Average degree: `2 x |E| / |N|` over deduplicated directed edges and
/// declared components.
pub fn degree(ctg: &Ctg) -> Result<f64, GraphError> {
    let n = ctg.declared_count();
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    Ok(2.0 * ctg.edges.len() as f64 / n as f64)
}

/// Default threshold above which a degree is suspicious.
pub const HIGH_DEGREE_THRESHOLD: f64 = 15.0;

pub fn flag_high_degree(deg: f64, threshold: f64) -> bool {
    deg > threshold
}

/// Connectivity counts over declared components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Connectivity {
    /// Components with no edge in either direction.
    pub c_separated: usize,
    pub separated: Vec<String>,
    /// Components unreachable from the default entry; `None` when the
    /// model has no entry.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_main_not: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub main_not: Vec<String>,
    /// Components unreachable from every exported component.
    pub c_export_not: usize,
    pub export_not: Vec<String>,
}

/// Computes the three connectivity metrics. Reachability follows edge
/// direction (the launch direction); every source reaches itself. Paths
/// may pass through undeclared endpoints, but only declared components are
/// counted.
pub fn connectivity(ctg: &Ctg, model: &AppModel) -> Connectivity {
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (source, target) in &ctg.edges {
        adjacency.entry(source).or_default().push(target);
    }

    let declared: Vec<&str> = ctg
        .nodes
        .iter()
        .filter(|(_, n)| n.declared)
        .map(|(name, _)| name.as_str())
        .collect();

    let mut touched: BTreeSet<&str> = BTreeSet::new();
    for (source, target) in &ctg.edges {
        touched.insert(source);
        touched.insert(target);
    }
    let separated: Vec<String> = declared
        .iter()
        .filter(|name| !touched.contains(**name))
        .map(|s| s.to_string())
        .collect();

    fn reach_from<'a>(
        adjacency: &BTreeMap<&'a str, Vec<&'a str>>,
        starts: &[&'a str],
    ) -> BTreeSet<&'a str> {
        let mut seen: BTreeSet<&str> = starts.iter().copied().collect();
        let mut queue: VecDeque<&str> = starts.iter().copied().collect();
        while let Some(node) = queue.pop_front() {
            for next in adjacency.get(node).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }

    let (c_main_not, main_not) = match model.default_entry.as_deref() {
        Some(entry) => {
            let reachable = reach_from(&adjacency, &[entry]);
            let missing: Vec<String> = declared
                .iter()
                .filter(|name| !reachable.contains(**name))
                .map(|s| s.to_string())
                .collect();
            (Some(missing.len()), missing)
        }
        None => (None, Vec::new()),
    };

    let exported: Vec<&str> = model
        .components
        .values()
        .filter(|c| c.exported)
        .map(|c| c.name.as_str())
        .collect();
    let reachable = reach_from(&adjacency, &exported);
    let export_not: Vec<String> = declared
        .iter()
        .filter(|name| !reachable.contains(**name))
        .map(|s| s.to_string())
        .collect();

    Connectivity {
        c_separated: separated.len(),
        separated,
        c_main_not,
        main_not,
        c_export_not: export_not.len(),
        export_not,
    }
}

/// Edge counts by endpoint class: basic components only, activities only,
/// and basic-or-fragment. Always `a_a <= c_c <= cf_cf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeClasses {
    pub c_c: usize,
    pub a_a: usize,
    pub cf_cf: usize,
}

pub fn edge_classes(ctg: &Ctg) -> EdgeClasses {
    let kind_of = |name: &str| ctg.nodes.get(name).map(|n| n.kind);
    let mut classes = EdgeClasses {
        c_c: 0,
        a_a: 0,
        cf_cf: 0,
    };
    for (source, target) in &ctg.edges {
        let (Some(s), Some(t)) = (kind_of(source), kind_of(target)) else {
            continue;
        };
        if s == ComponentKind::Activity && t == ComponentKind::Activity {
            classes.a_a += 1;
        }
        if s.is_basic() && t.is_basic() {
            classes.c_c += 1;
        }
        let in_cf = |k: ComponentKind| k.is_basic() || k == ComponentKind::Fragment;
        if in_cf(s) && in_cf(t) {
            classes.cf_cf += 1;
        }
    }
    classes
}

/// Edge-list text export: `source<TAB>target` per line.
pub fn to_edge_list(ctg: &Ctg) -> String {
    let mut out = String::new();
    for (source, target) in &ctg.edges {
        out.push_str(source);
        out.push('\t');
        out.push_str(target);
        out.push('\n');
    }
    out
}

/// Parses an edge-list text document into links.
pub fn parse_edge_list(text: &str) -> Result<Vec<IccLink>, String> {
    let mut links = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (source, target) = line
            .split_once('\t')
            .ok_or_else(|| format!("line {}: expected source<TAB>target", idx + 1))?;
        if source.is_empty() || target.is_empty() {
            return Err(format!("line {}: empty endpoint", idx + 1));
        }
        links.push(IccLink::new(source, target.trim()));
    }
    Ok(links)
}

#[derive(Serialize, Deserialize)]
struct CtgRepr {
    nodes: BTreeMap<String, CtgNode>,
    edges: Vec<(String, String)>,
}

/// JSON export with nodes, kinds and edges.
pub fn to_graph_json(ctg: &Ctg) -> String {
    let repr = CtgRepr {
        nodes: ctg.nodes.clone(),
        edges: ctg.edges.iter().cloned().collect(),
    };
    serde_json::to_string_pretty(&repr).expect("graph serializes")
}

pub fn from_graph_json(text: &str) -> Result<Ctg, serde_json::Error> {
    let repr: CtgRepr = serde_json::from_str(text)?;
    Ok(Ctg {
        nodes: repr.nodes,
        edges: repr.edges.into_iter().collect(),
    })
}
