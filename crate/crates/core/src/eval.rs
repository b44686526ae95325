//! The unified evaluation framework: normalizes heterogeneous tool
//! outputs into comparable link sets and scores them against a tagged
//! oracle with TP/FP/FN accounting, pairwise overlap ratios and
//! characteristic analyses.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::{classify, AppModel};
use crate::matcher::{complete_partial, PartialRecord};
use crate::model::{ComponentKind, IccLink, LinkKey};
use crate::tags::{Tag, TagCategory};

/// One tool's raw output for one app.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolOutput {
    pub tool: String,
    pub success: bool,
    pub payload: ToolPayload,
}

/// Tools either report finished edges or partial records carrying intent
/// field values without matched targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ToolPayload {
    Edges(BTreeSet<IccLink>),
    PartialRecords(Vec<PartialRecord>),
}

impl ToolOutput {
    /// Raw size of the payload before unification.
    pub fn reported_count(&self) -> usize {
        match &self.payload {
            ToolPayload::Edges(links) => links.len(),
            ToolPayload::PartialRecords(records) => records.len(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ToolOutputRepr {
    tool: String,
    flavor: String,
    #[serde(default = "default_true")]
    success: bool,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    links: BTreeSet<IccLink>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    records: Vec<PartialRecord>,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("invalid tool output: {0}")]
    InvalidToolOutput(String),
    #[error("false negative {0} is not in the oracle")]
    NotInOracle(LinkKey),
    #[error("empty oracle")]
    EmptyOracle,
}

impl ToolOutput {
    pub fn from_json(text: &str) -> Result<ToolOutput, EvalError> {
        let repr: ToolOutputRepr = serde_json::from_str(text)
            .map_err(|e| EvalError::InvalidToolOutput(e.to_string()))?;
        let payload = match repr.flavor.as_str() {
            "edges" => ToolPayload::Edges(repr.links),
            "partial" => ToolPayload::PartialRecords(repr.records),
            other => {
                return Err(EvalError::InvalidToolOutput(format!(
                    "unknown flavor {other:?}"
                )))
            }
        };
        Ok(ToolOutput {
            tool: repr.tool,
            success: repr.success,
            payload,
        })
    }

    pub fn to_json(&self) -> String {
        let repr = match &self.payload {
            ToolPayload::Edges(links) => ToolOutputRepr {
                tool: self.tool.clone(),
                flavor: "edges".to_string(),
                success: self.success,
                links: links.clone(),
                records: Vec::new(),
            },
            ToolPayload::PartialRecords(records) => ToolOutputRepr {
                tool: self.tool.clone(),
                flavor: "partial".to_string(),
                success: self.success,
                links: BTreeSet::new(),
                records: records.clone(),
            },
        };
        serde_json::to_string_pretty(&repr).expect("tool output serializes")
    }
}

/// Per-tool normalization knobs, mirroring the quirks of real tool
/// output formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnifyOptions {
    /// Strict component filtering: drop edges with any non-component
    /// endpoint instead of only those with both.
    pub drop_noncomponent_any: bool,
    /// Add a direct component edge for every component-fragment-component
    /// chain (computed to a fixpoint across fragment-to-fragment chains).
    pub collapse_fragments: bool,
    /// Drop edges touching a fragment after collapsing.
    pub drop_fragment_edges: bool,
}

impl Default for UnifyOptions {
    fn default() -> Self {
        UnifyOptions {
            drop_noncomponent_any: false,
            collapse_fragments: true,
            drop_fragment_edges: false,
        }
    }
}

/// Unification result: the normalized link set plus partial records that
/// resolved to no target.
#[derive(Debug, Clone, Default)]
pub struct Unified {
    pub links: BTreeSet<IccLink>,
    pub unresolved: Vec<PartialRecord>,
}

/// Normalizes one tool output: target matching for partial records,
/// non-component filtering, then fragment enhancement. Idempotent.
pub fn unify(output: &ToolOutput, model: &AppModel, options: &UnifyOptions) -> Unified {
    let (mut links, unresolved) = match &output.payload {
        ToolPayload::Edges(links) => (links.clone(), Vec::new()),
        ToolPayload::PartialRecords(records) => {
            let completion = complete_partial(records, model);
            (completion.links, completion.unresolved)
        }
    };

    links.retain(|link| {
        let s = classify(&link.source, model);
        let t = classify(&link.target, model);
        if options.drop_noncomponent_any {
            s != ComponentKind::NonComponent && t != ComponentKind::NonComponent
        } else {
            s != ComponentKind::NonComponent || t != ComponentKind::NonComponent
        }
    });

    if options.collapse_fragments {
        collapse_fragments(&mut links, model);
    }
    if options.drop_fragment_edges {
        links.retain(|link| {
            classify(&link.source, model) != ComponentKind::Fragment
                && classify(&link.target, model) != ComponentKind::Fragment
        });
    }

    Unified { links, unresolved }
}

/// Adds `x -> y` for every `x -> f -> y` with `f` a fragment, iterating
/// until no chain remains uncollapsed. Never removes an edge.
fn collapse_fragments(links: &mut BTreeSet<IccLink>, model: &AppModel) {
    loop {
        let mut additions = Vec::new();
        for incoming in links.iter() {
            if classify(&incoming.target, model) != ComponentKind::Fragment {
                continue;
            }
            for outgoing in links.iter() {
                if outgoing.source != incoming.target || incoming.source == outgoing.target {
                    continue;
                }
                let direct = IccLink::new(incoming.source.clone(), outgoing.target.clone());
                if !links.contains(&direct) {
                    additions.push(direct);
                }
            }
        }
        if additions.is_empty() {
            return;
        }
        links.extend(additions);
    }
}

/// TP/FP/FN split against the oracle, matched by endpoint names. TP links
/// keep the oracle's tags; FP links keep the tool's payload.
#[derive(Debug, Clone, Default)]
pub struct Comparison {
    pub tp: BTreeSet<IccLink>,
    pub fp: BTreeSet<IccLink>,
    pub fn_: BTreeSet<IccLink>,
    /// TP edges whose tool payload disagrees with the oracle payload;
    /// informational only.
    pub payload_diffs: Vec<LinkKey>,
}

pub fn compare(unified: &BTreeSet<IccLink>, oracle: &BTreeSet<IccLink>) -> Comparison {
    let mut cmp = Comparison::default();
    for link in unified {
        match oracle.get(link) {
            Some(oracle_link) => {
                if link.intent.is_some()
                    && oracle_link.intent.is_some()
                    && link.intent != oracle_link.intent
                {
                    cmp.payload_diffs.push(link.key());
                }
                cmp.tp.insert(oracle_link.clone());
            }
            None => {
                cmp.fp.insert(link.clone());
            }
        }
    }
    for link in oracle {
        if !unified.contains(link) {
            cmp.fn_.insert(link.clone());
        }
    }
    cmp
}

/// Overlap ratios for a pair of tools.
///
/// Reported ratios are each tool's share of the union of reported links
/// (zero when the union is empty). TP ratios are shares of the oracle and
/// are absent when the oracle is empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pairwise {
    pub reported_ratio_a: f64,
    pub reported_ratio_b: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_ratio_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_ratio_b: Option<f64>,
}

pub fn pairwise(
    a: &BTreeSet<IccLink>,
    b: &BTreeSet<IccLink>,
    oracle: &BTreeSet<IccLink>,
) -> Pairwise {
    let union_len = a.union(b).count();
    let reported = |x: &BTreeSet<IccLink>| {
        if union_len == 0 {
            0.0
        } else {
            x.len() as f64 / union_len as f64
        }
    };
    let tp = |x: &BTreeSet<IccLink>| {
        if oracle.is_empty() {
            None
        } else {
            Some(x.intersection(oracle).count() as f64 / oracle.len() as f64)
        }
    };
    Pairwise {
        reported_ratio_a: reported(a),
        reported_ratio_b: reported(b),
        tp_ratio_a: tp(a),
        tp_ratio_b: tp(b),
    }
}

/// Counts false negatives per characteristic tag. Every tag of the
/// universe appears in the result; a multi-tagged link counts toward each
/// of its tags. Fails if an FN link is not in the oracle.
pub fn fn_by_tag(
    fn_set: &BTreeSet<IccLink>,
    oracle: &BTreeSet<IccLink>,
) -> Result<BTreeMap<Tag, usize>, EvalError> {
    let mut counts: BTreeMap<Tag, usize> = Tag::ALL.iter().map(|t| (*t, 0)).collect();
    for link in fn_set {
        let oracle_link = oracle
            .get(link)
            .ok_or_else(|| EvalError::NotInOracle(link.key()))?;
        for tag in &oracle_link.tags {
            *counts.get_mut(tag).expect("universe is complete") += 1;
        }
    }
    Ok(counts)
}

/// Baseline tags describing a plain ICC; everything else marks a special
/// characteristic for the control-variable slices.
fn is_default_tag(tag: Tag) -> bool {
    matches!(
        tag,
        Tag::Activity | Tag::Normal | Tag::Basic | Tag::ExplicitIntent
    )
}

/// Selects the oracle links related to exactly one characteristic.
///
/// Entry-method tags demand the link carry that single entry tag and no
/// other special tag. Other tags ignore entry tags in the exclusivity test
/// (most links relate to callbacks); Atypical additionally ignores
/// component-type tags, since atypical sends are not limited to one
/// component kind.
pub fn single_characteristic_slice(
    oracle: &BTreeSet<IccLink>,
    tag: Tag,
) -> BTreeSet<IccLink> {
    let ignored = |candidate: Tag| -> bool {
        if candidate == tag || is_default_tag(candidate) {
            return true;
        }
        match tag.category() {
            TagCategory::EntryMethod => false,
            _ if candidate.category() == TagCategory::EntryMethod => true,
            _ => {
                tag == Tag::Atypical && candidate.category() == TagCategory::Component
            }
        }
    };

    oracle
        .iter()
        .filter(|link| {
            if !link.tags.contains(&tag) {
                return false;
            }
            if tag.category() == TagCategory::EntryMethod {
                let entry_tags = link
                    .tags
                    .iter()
                    .filter(|t| t.category() == TagCategory::EntryMethod)
                    .count();
                if entry_tags != 1 {
                    return false;
                }
            }
            link.tags.iter().all(|t| ignored(*t))
        })
        .cloned()
        .collect()
}
