//! ICC link extraction from method-execution traces.
//!
//! The pipeline: polymorphic super-call events are filtered out, stopping
//! lifecycle methods are treated as invalid, and the remaining valid
//! events drive a component stack. A component entering the stack below an
//! existing top yields one ICC link from the previous top; a component
//! already in the stack only moves to the top — a recently visited
//! component is more likely reached by the back button than launched, so
//! no link is reported for it.

use std::collections::BTreeSet;

use crate::lifecycle::{ComponentStatus, LifecycleMethod, StackModel};
use crate::manifest::{ancestors, AppModel};
use crate::model::IccLink;
use crate::trace::{EventKind, TraceEvent};

/// Extraction knobs.
#[derive(Debug, Clone)]
pub struct ExtractorConfig {
    /// Lifecycle methods whose execution lags behind the newly launched
    /// component and would confuse launching-order analysis.
    pub invalid_lifecycles: BTreeSet<LifecycleMethod>,
    /// How far apart (in trace positions) a subclass event may sit from
    /// the super-call event it explains. Must be at least 1.
    pub poly_window: usize,
    /// Upper stack size limit; the bottom element is evicted past it.
    pub stack_limit: Option<usize>,
    /// Clear everything below the top when the default entry component is
    /// re-initialized.
    pub entry_reset: bool,
    /// Also fire the entry reset on the entry's onResume, not only its
    /// onCreate.
    pub entry_reset_on_resume: bool,
}

impl Default for ExtractorConfig {
    fn default() -> Self {
        ExtractorConfig {
            invalid_lifecycles: [LifecycleMethod::OnStop, LifecycleMethod::OnDestroy]
                .into_iter()
                .collect(),
            poly_window: 1,
            stack_limit: None,
            entry_reset: true,
            entry_reset_on_resume: false,
        }
    }
}

/// Removes events produced by polymorphic super calls.
///
/// Two cases are dropped, both measured on the input positions:
/// an event attributed to class `B` with a same-named event of a strict
/// subclass of `B` within `poly_window` positions, and an event whose
/// body class is an ancestor of its runtime class (a super-call execution
/// logged under the parent).
pub fn remove_poly_calls(
    trace: &[TraceEvent],
    model: &AppModel,
    cfg: &ExtractorConfig,
) -> Vec<TraceEvent> {
    let window = cfg.poly_window.max(1);
    let mut keep = vec![true; trace.len()];

    for (i, event) in trace.iter().enumerate() {
        if event.declaring_class != event.component
            && ancestors(&event.component, model).contains(&event.declaring_class)
        {
            keep[i] = false;
            continue;
        }
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(trace.len().saturating_sub(1));
        for (j, other) in trace.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i || other.method != event.method {
                continue;
            }
            // `other` is a strict subclass of this event's class: this
            // event is the super-call execution.
            if ancestors(&other.component, model).contains(&event.component)
            {
                keep[i] = false;
                break;
            }
        }
    }

    trace
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect()
}

/// Whether an event counts toward stack updates: callbacks do, lifecycle
/// methods do unless configured invalid, everything else does not.
pub fn is_valid_event(event: &TraceEvent, cfg: &ExtractorConfig) -> bool {
    match event.kind {
        EventKind::Callback => true,
        EventKind::Lifecycle(m) => !cfg.invalid_lifecycles.contains(&m),
        EventKind::Other => false,
    }
}

/// Extracts the ICC link set from a trace.
///
/// Links are deduplicated by (source, target) and returned in first
/// occurrence order. A self link can never appear.
pub fn extract_iccs(
    trace: &[TraceEvent],
    model: &AppModel,
    cfg: &ExtractorConfig,
) -> Vec<IccLink> {
    let filtered = remove_poly_calls(trace, model, cfg);
    let mut stack = StackModel::new();
    let mut links: Vec<IccLink> = Vec::new();
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();

    for event in &filtered {
        if !is_valid_event(event, cfg) {
            continue;
        }
        let status = status_for(event);
        if stack.contains(&event.component) {
            stack.move_to_top(&event.component);
            stack.set_status(&event.component, status);
        } else {
            stack.push(event.component.clone(), status);
            if stack.len() > 1 {
                let source = stack.second().expect("size > 1").to_string();
                let target = stack.top().expect("non-empty").to_string();
                if seen.insert((source.clone(), target.clone())) {
                    links.push(IccLink::new(source, target));
                }
            }
            if let Some(limit) = cfg.stack_limit {
                if stack.len() > limit {
                    stack.evict_bottom();
                }
            }
        }

        if cfg.entry_reset && stack.top() == model.default_entry.as_deref() {
            let is_reset_method = match event.kind {
                EventKind::Lifecycle(LifecycleMethod::OnCreate) => true,
                EventKind::Lifecycle(LifecycleMethod::OnResume) => cfg.entry_reset_on_resume,
                _ => false,
            };
            if is_reset_method && Some(event.component.as_str()) == model.default_entry.as_deref()
            {
                stack.clear_below_top();
            }
        }
    }
    links
}

fn status_for(event: &TraceEvent) -> ComponentStatus {
    match event.kind {
        EventKind::Lifecycle(m) => match m {
            LifecycleMethod::OnCreate => ComponentStatus::Created,
            LifecycleMethod::OnStart | LifecycleMethod::OnRestart => ComponentStatus::Started,
            LifecycleMethod::OnResume => ComponentStatus::Resumed,
            LifecycleMethod::OnPause => ComponentStatus::Paused,
            LifecycleMethod::OnStop => ComponentStatus::Stopped,
            LifecycleMethod::OnDestroy => ComponentStatus::Destroyed,
        },
        _ => ComponentStatus::Resumed,
    }
}
