//! Characteristic tag taxonomy for ICC links and the consistency checks
//! that run over tagged oracles.
//!
//! The taxonomy is a fixed universe of 25 tags partitioned into 7
//! categories. Tag names serialize as the exact strings below, one per
//! variant, case-sensitive.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{IccLink, IntentKind, TagSet};

/// One of the 25 fixed characteristic tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    // Component
    Activity,
    Service,
    Broadcast,
    DynamicBroadcast,
    // Non-Component
    Fragment,
    Adapter,
    Widget,
    OtherClass,
    // Entry Method
    Lifecycle,
    Dynamic,
    Implicit,
    Static,
    // Exit Method
    Normal,
    Atypical,
    // Method Call
    Basic,
    CallbackListener,
    Asynchronous,
    Polymorphic,
    LibraryMethod,
    // Intent Type
    ExplicitIntent,
    ImplicitIntent,
    // Intent Field Value
    ContextRelated,
    StaticValue,
    ExtraData,
    StringOperation,
}

/// The seven tag categories, in taxonomy order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TagCategory {
    Component,
    NonComponent,
    EntryMethod,
    ExitMethod,
    MethodCall,
    IntentType,
    IntentFieldValue,
}

impl Tag {
    /// Every tag in taxonomy order. Category sizes are 4,4,4,2,5,2,4.
    pub const ALL: [Tag; 25] = [
        Tag::Activity,
        Tag::Service,
        Tag::Broadcast,
        Tag::DynamicBroadcast,
        Tag::Fragment,
        Tag::Adapter,
        Tag::Widget,
        Tag::OtherClass,
        Tag::Lifecycle,
        Tag::Dynamic,
        Tag::Implicit,
        Tag::Static,
        Tag::Normal,
        Tag::Atypical,
        Tag::Basic,
        Tag::CallbackListener,
        Tag::Asynchronous,
        Tag::Polymorphic,
        Tag::LibraryMethod,
        Tag::ExplicitIntent,
        Tag::ImplicitIntent,
        Tag::ContextRelated,
        Tag::StaticValue,
        Tag::ExtraData,
        Tag::StringOperation,
    ];

    pub fn category(self) -> TagCategory {
        match self {
            Tag::Activity | Tag::Service | Tag::Broadcast | Tag::DynamicBroadcast => {
                TagCategory::Component
            }
            Tag::Fragment | Tag::Adapter | Tag::Widget | Tag::OtherClass => {
                TagCategory::NonComponent
            }
            Tag::Lifecycle | Tag::Dynamic | Tag::Implicit | Tag::Static => TagCategory::EntryMethod,
            Tag::Normal | Tag::Atypical => TagCategory::ExitMethod,
            Tag::Basic
            | Tag::CallbackListener
            | Tag::Asynchronous
            | Tag::Polymorphic
            | Tag::LibraryMethod => TagCategory::MethodCall,
            Tag::ExplicitIntent | Tag::ImplicitIntent => TagCategory::IntentType,
            Tag::ContextRelated | Tag::StaticValue | Tag::ExtraData | Tag::StringOperation => {
                TagCategory::IntentFieldValue
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Activity => "Activity",
            Tag::Service => "Service",
            Tag::Broadcast => "Broadcast",
            Tag::DynamicBroadcast => "DynamicBroadcast",
            Tag::Fragment => "Fragment",
            Tag::Adapter => "Adapter",
            Tag::Widget => "Widget",
            Tag::OtherClass => "OtherClass",
            Tag::Lifecycle => "Lifecycle",
            Tag::Dynamic => "Dynamic",
            Tag::Implicit => "Implicit",
            Tag::Static => "Static",
            Tag::Normal => "Normal",
            Tag::Atypical => "Atypical",
            Tag::Basic => "Basic",
            Tag::CallbackListener => "CallbackListener",
            Tag::Asynchronous => "Asynchronous",
            Tag::Polymorphic => "Polymorphic",
            Tag::LibraryMethod => "LibraryMethod",
            Tag::ExplicitIntent => "ExplicitIntent",
            Tag::ImplicitIntent => "ImplicitIntent",
            Tag::ContextRelated => "ContextRelated",
            Tag::StaticValue => "StaticValue",
            Tag::ExtraData => "ExtraData",
            Tag::StringOperation => "StringOperation",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown tag: {0:?}")]
pub struct UnknownTag(pub String);

impl FromStr for Tag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Tag::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownTag(s.to_string()))
    }
}

impl TagCategory {
    pub const ALL: [TagCategory; 7] = [
        TagCategory::Component,
        TagCategory::NonComponent,
        TagCategory::EntryMethod,
        TagCategory::ExitMethod,
        TagCategory::MethodCall,
        TagCategory::IntentType,
        TagCategory::IntentFieldValue,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TagCategory::Component => "Component",
            TagCategory::NonComponent => "Non-Component",
            TagCategory::EntryMethod => "Entry Method",
            TagCategory::ExitMethod => "Exit Method",
            TagCategory::MethodCall => "Method Call",
            TagCategory::IntentType => "Intent Type",
            TagCategory::IntentFieldValue => "Intent Field Value",
        }
    }

    pub fn members(self) -> impl Iterator<Item = Tag> {
        Tag::ALL.iter().copied().filter(move |t| t.category() == self)
    }
}

/// A broken tag-consistency rule.
///
/// `validate_tags` runs the tag-only rules; `validate_link` additionally
/// cross-checks the tags against the link's intent payload.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    /// Non-empty tag set carries no Intent Type tag.
    MissingIntentType,
    /// Both ExplicitIntent and ImplicitIntent present.
    DuplicateIntentType,
    /// Non-empty tag set carries no Exit Method tag.
    MissingExitMethod,
    /// Both exit tags present.
    DuplicateExitMethod,
    /// Non-empty tag set carries no Component tag.
    MissingComponentTag,
    /// Atypical excludes Normal.
    AtypicalWithNormal,
    /// DynamicBroadcast implies a broadcast-class target, so the Broadcast
    /// component tag must accompany it.
    DynamicBroadcastWithoutBroadcast,
    /// ImplicitIntent-tagged link carries an explicit target in its payload.
    ImplicitIntentWithExplicitTarget,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Violation::MissingIntentType => "no Intent Type tag",
            Violation::DuplicateIntentType => "more than one Intent Type tag",
            Violation::MissingExitMethod => "no Exit Method tag",
            Violation::DuplicateExitMethod => "more than one Exit Method tag",
            Violation::MissingComponentTag => "no Component tag",
            Violation::AtypicalWithNormal => "Atypical and Normal are mutually exclusive",
            Violation::DynamicBroadcastWithoutBroadcast => {
                "DynamicBroadcast requires the Broadcast component tag"
            }
            Violation::ImplicitIntentWithExplicitTarget => {
                "ImplicitIntent-tagged link has an explicit target component"
            }
        };
        f.write_str(msg)
    }
}

/// Checks the tag-only consistency rules over a tag set.
///
/// An empty set is vacuously consistent. Deterministic and
/// order-independent: the input is a set and the output is sorted.
pub fn validate_tags(tags: &TagSet) -> Vec<Violation> {
    let mut violations = Vec::new();
    if tags.is_empty() {
        return violations;
    }

    let count_in = |cat: TagCategory| tags.iter().filter(|t| t.category() == cat).count();

    match count_in(TagCategory::IntentType) {
        0 => violations.push(Violation::MissingIntentType),
        1 => {}
        _ => violations.push(Violation::DuplicateIntentType),
    }
    match count_in(TagCategory::ExitMethod) {
        0 => violations.push(Violation::MissingExitMethod),
        1 => {}
        _ => violations.push(Violation::DuplicateExitMethod),
    }
    if count_in(TagCategory::Component) == 0 {
        violations.push(Violation::MissingComponentTag);
    }
    if tags.contains(&Tag::Atypical) && tags.contains(&Tag::Normal) {
        violations.push(Violation::AtypicalWithNormal);
    }
    if tags.contains(&Tag::DynamicBroadcast) && !tags.contains(&Tag::Broadcast) {
        violations.push(Violation::DynamicBroadcastWithoutBroadcast);
    }

    violations.sort();
    violations
}

/// Checks a link's tags plus the cross-field rule that an
/// ImplicitIntent-tagged link must not carry an explicit target payload.
pub fn validate_link(link: &IccLink) -> Vec<Violation> {
    let mut violations = validate_tags(&link.tags);
    if link.tags.contains(&Tag::ImplicitIntent) {
        if let Some(intent) = &link.intent {
            if intent.kind == IntentKind::Explicit || intent.target_component.is_some() {
                violations.push(Violation::ImplicitIntentWithExplicitTarget);
            }
        }
    }
    violations.sort();
    violations
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TagError {
    #[error("empty oracle")]
    EmptyInput,
}

/// Fraction of oracle links carrying each tag.
///
/// Every tag of the universe is present in the result; a link carrying
/// several tags counts once toward each, so fractions within one category
/// may sum past 1.0.
pub fn tag_distribution(oracle: &[IccLink]) -> Result<BTreeMap<Tag, f64>, TagError> {
    if oracle.is_empty() {
        return Err(TagError::EmptyInput);
    }
    let total = oracle.len() as f64;
    let mut dist = BTreeMap::new();
    for tag in Tag::ALL {
        let count = oracle.iter().filter(|l| l.tags.contains(&tag)).count();
        dist.insert(tag, count as f64 / total);
    }
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::IntentPayload;

    fn set(tags: &[Tag]) -> TagSet {
        tags.iter().copied().collect()
    }

    #[test]
    fn universe_is_25_tags_in_7_categories() {
        assert_eq!(Tag::ALL.len(), 25);
        let sizes: Vec<usize> = TagCategory::ALL
            .iter()
            .map(|c| c.members().count())
            .collect();
        assert_eq!(sizes, vec![4, 4, 4, 2, 5, 2, 4]);
    }

    #[test]
    fn tag_strings_round_trip() {
        for tag in Tag::ALL {
            assert_eq!(tag.as_str().parse::<Tag>().unwrap(), tag);
        }
        assert_eq!(
            "NotATag".parse::<Tag>(),
            Err(UnknownTag("NotATag".to_string()))
        );
    }

    #[test]
    fn minimal_consistent_set_passes() {
        let tags = set(&[Tag::ExplicitIntent, Tag::Normal, Tag::Activity, Tag::Lifecycle]);
        assert_eq!(validate_tags(&tags), vec![]);
    }

    #[test]
    fn duplicate_intent_type_flagged() {
        let tags = set(&[Tag::ExplicitIntent, Tag::ImplicitIntent, Tag::Normal, Tag::Activity]);
        assert_eq!(validate_tags(&tags), vec![Violation::DuplicateIntentType]);
    }

    #[test]
    fn missing_component_tag_flagged() {
        let tags = set(&[Tag::Normal, Tag::Lifecycle]);
        let violations = validate_tags(&tags);
        assert!(violations.contains(&Violation::MissingComponentTag));
        assert!(violations.contains(&Violation::MissingIntentType));
    }

    #[test]
    fn empty_set_is_consistent() {
        assert_eq!(validate_tags(&TagSet::new()), vec![]);
    }

    #[test]
    fn atypical_and_normal_conflict() {
        let tags = set(&[Tag::ExplicitIntent, Tag::Normal, Tag::Atypical, Tag::Activity]);
        let violations = validate_tags(&tags);
        assert!(violations.contains(&Violation::AtypicalWithNormal));
        assert!(violations.contains(&Violation::DuplicateExitMethod));
    }

    #[test]
    fn dynamic_broadcast_needs_broadcast() {
        let tags = set(&[Tag::ExplicitIntent, Tag::Normal, Tag::DynamicBroadcast]);
        let violations = validate_tags(&tags);
        assert!(violations.contains(&Violation::DynamicBroadcastWithoutBroadcast));
        let ok = set(&[Tag::ImplicitIntent, Tag::Normal, Tag::DynamicBroadcast, Tag::Broadcast]);
        assert_eq!(validate_tags(&ok), vec![]);
    }

    #[test]
    fn implicit_tag_with_explicit_payload_flagged() {
        let mut link = IccLink::new("com.a.A", "com.a.B");
        link.tags = set(&[Tag::ImplicitIntent, Tag::Normal, Tag::Activity]);
        link.intent = Some(IntentPayload::explicit("com.a.B"));
        assert_eq!(
            validate_link(&link),
            vec![Violation::ImplicitIntentWithExplicitTarget]
        );
    }

    #[test]
    fn distribution_counts_directly() {
        let mut l1 = IccLink::new("A", "B");
        l1.tags = set(&[Tag::Activity, Tag::Service]);
        let mut l2 = IccLink::new("A", "C");
        l2.tags = set(&[Tag::Activity]);
        let dist = tag_distribution(&[l1, l2]).unwrap();
        assert_eq!(dist[&Tag::Activity], 1.0);
        assert_eq!(dist[&Tag::Service], 0.5);
        assert_eq!(dist[&Tag::Fragment], 0.0);
    }

    #[test]
    fn distribution_single_link_all_ones() {
        let mut l = IccLink::new("A", "B");
        l.tags = set(&[Tag::Activity, Tag::ExplicitIntent, Tag::Normal, Tag::Lifecycle]);
        let dist = tag_distribution(&[l]).unwrap();
        for tag in [Tag::Activity, Tag::ExplicitIntent, Tag::Normal, Tag::Lifecycle] {
            assert_eq!(dist[&tag], 1.0);
        }
        assert_eq!(dist[&Tag::Service], 0.0);
    }

    #[test]
    fn distribution_rejects_empty_oracle() {
        assert_eq!(tag_distribution(&[]), Err(TagError::EmptyInput));
    }
}
