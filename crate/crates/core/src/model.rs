//! Shared domain types: components, intent filters, intent payloads and
//! ICC links.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::tags::Tag;

/// Kind of a class appearing in traces or tool outputs.
///
/// `Fragment` and `NonComponent` never come from a manifest; they arise
/// during unification and enhancement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Activity,
    Service,
    BroadcastReceiver,
    ContentProvider,
    Fragment,
    NonComponent,
}

impl ComponentKind {
    /// The four manifest-registrable component kinds.
    pub fn is_basic(self) -> bool {
        matches!(
            self,
            ComponentKind::Activity
                | ComponentKind::Service
                | ComponentKind::BroadcastReceiver
                | ComponentKind::ContentProvider
        )
    }
}

/// A manifest-declared component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    /// Fully qualified class name, unique within an app model.
    pub name: String,
    pub kind: ComponentKind,
    pub exported: bool,
    /// True for the launcher entry (and for an explicit entry override).
    /// Implies `exported`.
    pub main_entry: bool,
    pub filters: Vec<IntentFilter>,
}

/// A component's declared acceptance rule for implicit intents.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IntentFilter {
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub actions: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub categories: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty", rename = "data")]
    pub data_specs: Vec<DataSpec>,
}

impl IntentFilter {
    pub const ACTION_MAIN: &'static str = "android.intent.action.MAIN";
    pub const CATEGORY_LAUNCHER: &'static str = "android.intent.category.LAUNCHER";

    /// Whether this filter declares the launcher entry.
    pub fn is_launcher(&self) -> bool {
        self.actions.contains(Self::ACTION_MAIN)
            && self.categories.contains(Self::CATEGORY_LAUNCHER)
    }
}

/// Data-test attributes of a filter or an intent.
///
/// A host without a scheme is rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct DataSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub host: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mime_type: Option<String>,
}

impl DataSpec {
    pub fn is_empty(&self) -> bool {
        self.scheme.is_none()
            && self.host.is_none()
            && self.path.is_none()
            && self.mime_type.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntentKind {
    Explicit,
    Implicit,
}

/// The message payload of an ICC send.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentPayload {
    pub kind: IntentKind,
    /// Present iff `kind` is `Explicit`.
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "target")]
    pub target_component: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub categories: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub extras: BTreeSet<String>,
}

impl IntentPayload {
    pub fn explicit(target: impl Into<String>) -> Self {
        IntentPayload {
            kind: IntentKind::Explicit,
            target_component: Some(target.into()),
            action: None,
            categories: BTreeSet::new(),
            data: None,
            extras: BTreeSet::new(),
        }
    }

    pub fn implicit(action: impl Into<String>) -> Self {
        IntentPayload {
            kind: IntentKind::Implicit,
            target_component: None,
            action: Some(action.into()),
            categories: BTreeSet::new(),
            data: None,
            extras: BTreeSet::new(),
        }
    }

    /// The type invariant: explicit iff a target component is present.
    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            IntentKind::Explicit => self.target_component.is_some(),
            IntentKind::Implicit => self.target_component.is_none(),
        }
    }
}

/// How the intent left the sender: a standard send API or an atypical one.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum ExitKind {
    #[default]
    Normal,
    Atypical,
}

/// Set of characteristic tags attached to an oracle link.
pub type TagSet = BTreeSet<Tag>;

/// The (source, target) name pair identifying a link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkKey(pub String, pub String);

impl fmt::Display for LinkKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.0, self.1)
    }
}

/// One directed ICC edge.
///
/// Identity for oracle comparison is the (source, target) name pair only:
/// equality, ordering and hashing all ignore the payload, exit kind and
/// tags. Sets of links therefore deduplicate by endpoint names.
#[derive(Debug, Clone)]
pub struct IccLink {
    pub source: String,
    pub target: String,
    pub intent: Option<IntentPayload>,
    pub exit_kind: ExitKind,
    pub tags: TagSet,
}

impl IccLink {
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        let source = source.into();
        let target = target.into();
        debug_assert!(!source.is_empty() && !target.is_empty());
        IccLink {
            source,
            target,
            intent: None,
            exit_kind: ExitKind::Normal,
            tags: TagSet::new(),
        }
    }

    pub fn key(&self) -> LinkKey {
        LinkKey(self.source.clone(), self.target.clone())
    }
}

impl PartialEq for IccLink {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target
    }
}

impl Eq for IccLink {}

impl PartialOrd for IccLink {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for IccLink {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.source, &self.target).cmp(&(&other.source, &other.target))
    }
}

impl Hash for IccLink {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.source.hash(state);
        self.target.hash(state);
    }
}

impl fmt::Display for IccLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.source, self.target)
    }
}

#[derive(Serialize, Deserialize)]
struct LinkRepr {
    source: String,
    target: String,
    #[serde(default, skip_serializing_if = "TagSet::is_empty")]
    tags: TagSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intent: Option<IntentPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exit: Option<ExitKind>,
}

impl Serialize for IccLink {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LinkRepr {
            source: self.source.clone(),
            target: self.target.clone(),
            tags: self.tags.clone(),
            intent: self.intent.clone(),
            exit: match self.exit_kind {
                ExitKind::Normal => None,
                ExitKind::Atypical => Some(ExitKind::Atypical),
            },
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IccLink {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = LinkRepr::deserialize(deserializer)?;
        // An absent exit field falls back to the Atypical tag when present.
        let exit_kind = repr.exit.unwrap_or(if repr.tags.contains(&Tag::Atypical) {
            ExitKind::Atypical
        } else {
            ExitKind::Normal
        });
        Ok(IccLink {
            source: repr.source,
            target: repr.target,
            intent: repr.intent,
            exit_kind,
            tags: repr.tags,
        })
    }
}

/// True when `links` contains an edge with the given endpoint names.
pub fn links_contain(links: &BTreeSet<IccLink>, source: &str, target: &str) -> bool {
    links.contains(&IccLink::new(source, target))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn link_identity_is_endpoints_only() {
        let plain = IccLink::new("A", "B");
        let mut tagged = IccLink::new("A", "B");
        tagged.tags.insert(Tag::Activity);
        tagged.intent = Some(IntentPayload::explicit("B"));
        assert_eq!(plain, tagged);

        let mut set = BTreeSet::new();
        set.insert(plain);
        assert!(!set.insert(tagged));
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn payload_well_formedness() {
        assert!(IntentPayload::explicit("com.a.B").is_well_formed());
        assert!(IntentPayload::implicit("ACTION").is_well_formed());
        let mut bad = IntentPayload::explicit("com.a.B");
        bad.target_component = None;
        assert!(!bad.is_well_formed());
    }

    #[test]
    fn launcher_filter_detection() {
        let mut filter = IntentFilter::default();
        filter.actions.insert(IntentFilter::ACTION_MAIN.to_string());
        assert!(!filter.is_launcher());
        filter
            .categories
            .insert(IntentFilter::CATEGORY_LAUNCHER.to_string());
        assert!(filter.is_launcher());
    }
}
