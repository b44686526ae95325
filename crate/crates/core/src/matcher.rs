//! Intent resolution: explicit targets by name, implicit ones through the
//! action/category/data tests against declared intent filters, plus
//! completion of partial tool outputs that carry field values but no
//! targets.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::AppModel;
use crate::model::{DataSpec, IccLink, IntentFilter, IntentKind, IntentPayload};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("match_filter expects an implicit intent")]
    WrongIntentKind,
}

/// Runs the three-part filter test for an implicit intent.
///
/// The action test requires a present, declared action (an intent without
/// an action never matches). The category test requires every intent
/// category to be declared. The data test requires some declared data spec
/// to match on each of its populated dimensions: scheme and host by
/// equality, path by prefix, MIME type with a `*` wildcard on the subtype.
/// An intent without data passes only filters declaring no data specs.
pub fn match_filter(intent: &IntentPayload, filter: &IntentFilter) -> Result<bool, MatchError> {
    if intent.kind != IntentKind::Implicit {
        return Err(MatchError::WrongIntentKind);
    }

    let action_ok = intent
        .action
        .as_ref()
        .is_some_and(|a| filter.actions.contains(a));
    if !action_ok {
        return Ok(false);
    }

    if !intent
        .categories
        .iter()
        .all(|c| filter.categories.contains(c))
    {
        return Ok(false);
    }

    match &intent.data {
        None => Ok(filter.data_specs.is_empty()),
        Some(data) => Ok(filter
            .data_specs
            .iter()
            .any(|spec| data_spec_matches(spec, data))),
    }
}

fn data_spec_matches(spec: &DataSpec, data: &DataSpec) -> bool {
    if let Some(scheme) = &spec.scheme {
        if data.scheme.as_ref() != Some(scheme) {
            return false;
        }
    }
    if let Some(host) = &spec.host {
        if data.host.as_ref() != Some(host) {
            return false;
        }
    }
    if let Some(path) = &spec.path {
        match &data.path {
            Some(p) if p.starts_with(path.as_str()) => {}
            _ => return false,
        }
    }
    if let Some(mime) = &spec.mime_type {
        match &data.mime_type {
            Some(m) if mime_matches(mime, m) => {}
            _ => return false,
        }
    }
    true
}

fn mime_matches(declared: &str, actual: &str) -> bool {
    if declared == actual || declared == "*/*" {
        return true;
    }
    match declared.split_once('/') {
        Some((ty, "*")) => actual.split_once('/').is_some_and(|(a, _)| a == ty),
        _ => false,
    }
}

/// Resolution result: matched targets plus the explicit targets that are
/// not registered in the model (kept, since tools report such edges).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Resolution {
    pub targets: BTreeSet<String>,
    pub unregistered: BTreeSet<String>,
}

/// Resolves an intent against the model: explicit intents by name,
/// implicit ones over every component's filters.
pub fn resolve(intent: &IntentPayload, model: &AppModel) -> Resolution {
    let mut resolution = Resolution::default();
    match intent.kind {
        IntentKind::Explicit => {
            if let Some(target) = &intent.target_component {
                resolution.targets.insert(target.clone());
                if !model.components.contains_key(target) {
                    resolution.unregistered.insert(target.clone());
                }
            }
        }
        IntentKind::Implicit => {
            for component in model.components.values() {
                let matched = component
                    .filters
                    .iter()
                    .any(|f| match_filter(intent, f).unwrap_or(false));
                if matched {
                    resolution.targets.insert(component.name.clone());
                }
            }
        }
    }
    resolution
}

/// A tool-reported ICC whose target is still unresolved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialRecord {
    pub source: String,
    pub intent: IntentPayload,
}

/// Result of completing partial records: the emitted links plus the
/// records that resolved to nothing (reported, not silently dropped).
#[derive(Debug, Clone, Default)]
pub struct Completion {
    pub links: BTreeSet<IccLink>,
    pub unresolved: Vec<PartialRecord>,
}

/// Emits one link per resolved target of each record.
pub fn complete_partial(records: &[PartialRecord], model: &AppModel) -> Completion {
    let mut completion = Completion::default();
    for record in records {
        let resolution = resolve(&record.intent, model);
        if resolution.targets.is_empty() {
            completion.unresolved.push(record.clone());
            continue;
        }
        for target in resolution.targets {
            let mut link = IccLink::new(record.source.clone(), target);
            link.intent = Some(record.intent.clone());
            completion.links.insert(link);
        }
    }
    completion
}
