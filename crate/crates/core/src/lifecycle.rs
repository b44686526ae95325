//! Component lifecycle state machines: the single-component transition
//! table, the multi-component trace validator, and a deterministic trace
//! generator for scripted UI sessions.
//!
//! The transition table is reconstructed from the lifecycle narrative plus
//! standard platform ordering and frozen here as this crate's normative
//! table. Launch mode is always assumed standard.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::manifest::AppModel;
use crate::trace::{EventKind, TraceEvent};

/// The seven framework lifecycle methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LifecycleMethod {
    OnCreate,
    OnStart,
    OnResume,
    OnPause,
    OnStop,
    OnDestroy,
    OnRestart,
}

impl LifecycleMethod {
    pub const ALL: [LifecycleMethod; 7] = [
        LifecycleMethod::OnCreate,
        LifecycleMethod::OnStart,
        LifecycleMethod::OnResume,
        LifecycleMethod::OnPause,
        LifecycleMethod::OnStop,
        LifecycleMethod::OnDestroy,
        LifecycleMethod::OnRestart,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LifecycleMethod::OnCreate => "onCreate",
            LifecycleMethod::OnStart => "onStart",
            LifecycleMethod::OnResume => "onResume",
            LifecycleMethod::OnPause => "onPause",
            LifecycleMethod::OnStop => "onStop",
            LifecycleMethod::OnDestroy => "onDestroy",
            LifecycleMethod::OnRestart => "onRestart",
        }
    }
}

impl fmt::Display for LifecycleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown lifecycle method: {0:?}")]
pub struct UnknownMethod(pub String);

impl FromStr for LifecycleMethod {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LifecycleMethod::ALL
            .iter()
            .copied()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| UnknownMethod(s.to_string()))
    }
}

/// Lifecycle states, indexed s0..s7 (s5 does not exist in the source
/// figure's recoverable encoding and is omitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LifecycleState {
    /// s0
    Init,
    /// s1
    Created,
    /// s2
    Started,
    /// s3
    Resumed,
    /// s4
    Paused,
    /// s6
    Stopped,
    /// s7
    Destroyed,
}

impl LifecycleState {
    pub fn as_str(self) -> &'static str {
        match self {
            LifecycleState::Init => "init",
            LifecycleState::Created => "created",
            LifecycleState::Started => "started",
            LifecycleState::Resumed => "resumed",
            LifecycleState::Paused => "paused",
            LifecycleState::Stopped => "stopped",
            LifecycleState::Destroyed => "destroyed",
        }
    }
}

impl fmt::Display for LifecycleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// An undefined transition attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepViolation {
    pub state: LifecycleState,
    pub method: LifecycleMethod,
}

impl fmt::Display for StepViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no transition for {} in state {}", self.method, self.state)
    }
}

/// Single-component transition table.
pub fn step(
    state: LifecycleState,
    method: LifecycleMethod,
) -> Result<LifecycleState, StepViolation> {
    use LifecycleMethod::*;
    use LifecycleState::*;
    match (state, method) {
        (Init, OnCreate) => Ok(Created),
        (Created, OnStart) => Ok(Started),
        (Started, OnResume) => Ok(Resumed),
        (Resumed, OnPause) => Ok(Paused),
        (Paused, OnResume) => Ok(Resumed),
        (Paused, OnStop) => Ok(Stopped),
        (Stopped, OnRestart) => Ok(Started),
        (Stopped, OnDestroy) => Ok(Destroyed),
        _ => Err(StepViolation { state, method }),
    }
}

/// Multi-component extension of [`step`]: adds the transitions that only
/// arise from component interactions — re-resuming a stopped component
/// when the one above it leaves, and recreating a destroyed one.
fn step_multi(
    state: LifecycleState,
    method: LifecycleMethod,
) -> Result<LifecycleState, StepViolation> {
    use LifecycleMethod::*;
    use LifecycleState::*;
    match (state, method) {
        (Stopped, OnResume) => Ok(Resumed),
        (Destroyed, OnCreate) => Ok(Created),
        _ => step(state, method),
    }
}

/// Why a trace event broke the lifecycle model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// onStop arrived while the component was still resumed: the stop
    /// overtook the pause it must follow.
    StopBeforePause,
    /// Any other undefined (state, method) combination.
    InvalidStep {
        state: LifecycleState,
        method: LifecycleMethod,
    },
}

/// One broken lifecycle constraint, with the offending event index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LifecycleViolation {
    pub index: usize,
    pub component: String,
    pub kind: ViolationKind,
}

impl fmt::Display for LifecycleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::StopBeforePause => write!(
                f,
                "event {}: {} received onStop before onPause",
                self.index, self.component
            ),
            ViolationKind::InvalidStep { state, method } => write!(
                f,
                "event {}: {} received {} in state {}",
                self.index, self.component, method, state
            ),
        }
    }
}

/// Component status values carried by the stack model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentStatus {
    NotStored,
    Created,
    Started,
    Resumed,
    Paused,
    Stopped,
    Destroyed,
}

impl ComponentStatus {
    fn from_method(method: LifecycleMethod) -> ComponentStatus {
        match method {
            LifecycleMethod::OnCreate => ComponentStatus::Created,
            LifecycleMethod::OnStart | LifecycleMethod::OnRestart => ComponentStatus::Started,
            LifecycleMethod::OnResume => ComponentStatus::Resumed,
            LifecycleMethod::OnPause => ComponentStatus::Paused,
            LifecycleMethod::OnStop => ComponentStatus::Stopped,
            LifecycleMethod::OnDestroy => ComponentStatus::Destroyed,
        }
    }
}

/// Globally maintained component stack. The top is the most recently
/// visited component; names are unique within the stack.
#[derive(Debug, Clone, Default)]
pub struct StackModel {
    entries: Vec<(String, ComponentStatus)>,
}

impl StackModel {
    pub fn new() -> Self {
        StackModel::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }

    pub fn top(&self) -> Option<&str> {
        self.entries.last().map(|(n, _)| n.as_str())
    }

    /// The component directly below the top.
    pub fn second(&self) -> Option<&str> {
        self.entries
            .len()
            .checked_sub(2)
            .map(|i| self.entries[i].0.as_str())
    }

    pub fn status(&self, name: &str) -> ComponentStatus {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, s)| *s)
            .unwrap_or(ComponentStatus::NotStored)
    }

    pub fn set_status(&mut self, name: &str, status: ComponentStatus) {
        if let Some(entry) = self.entries.iter_mut().find(|(n, _)| n == name) {
            entry.1 = status;
        }
    }

    /// Pushes a new component onto the top. The caller checks membership.
    pub fn push(&mut self, name: impl Into<String>, status: ComponentStatus) {
        let name = name.into();
        debug_assert!(!self.contains(&name));
        self.entries.push((name, status));
    }

    /// Moves an existing component to the top, preserving its status.
    pub fn move_to_top(&mut self, name: &str) {
        if let Some(pos) = self.entries.iter().position(|(n, _)| n == name) {
            let entry = self.entries.remove(pos);
            self.entries.push(entry);
        }
    }

    pub fn pop(&mut self) -> Option<(String, ComponentStatus)> {
        self.entries.pop()
    }

    /// Drops every element below the top.
    pub fn clear_below_top(&mut self) {
        if let Some(top) = self.entries.pop() {
            self.entries.clear();
            self.entries.push(top);
        }
    }

    /// Evicts the bottom element.
    pub fn evict_bottom(&mut self) -> Option<(String, ComponentStatus)> {
        if self.entries.is_empty() {
            None
        } else {
            Some(self.entries.remove(0))
        }
    }

    pub fn iter_top_first(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().rev().map(|(n, _)| n.as_str())
    }
}

/// Replays a trace against one EFSM instance per component and reports
/// every broken lifecycle constraint. Non-lifecycle events are skipped, as
/// are lifecycle events of fragment-registry classes (fragments follow a
/// different lifecycle). An empty result means the trace is admissible.
pub fn validate_trace(trace: &[TraceEvent], model: &AppModel) -> Vec<LifecycleViolation> {
    let mut states: BTreeMap<&str, LifecycleState> = BTreeMap::new();
    let mut violations = Vec::new();

    for (index, event) in trace.iter().enumerate() {
        let EventKind::Lifecycle(method) = event.kind else {
            continue;
        };
        if model.fragments.contains(&event.component) {
            continue;
        }
        let state = states
            .entry(event.component.as_str())
            .or_insert(LifecycleState::Init);
        match step_multi(*state, method) {
            Ok(next) => *state = next,
            Err(_) => {
                let kind = if *state == LifecycleState::Resumed
                    && method == LifecycleMethod::OnStop
                {
                    ViolationKind::StopBeforePause
                } else {
                    ViolationKind::InvalidStep {
                        state: *state,
                        method,
                    }
                };
                violations.push(LifecycleViolation {
                    index,
                    component: event.component.clone(),
                    kind,
                });
                // Keep the old state so one bad event is reported once.
            }
        }
    }
    violations
}

/// A scripted UI action driving the trace generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UiAction {
    Launch(String),
    Back,
    Rotate,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum UiActionRepr {
    Launch { launch: String },
    Back { back: bool },
    Rotate { rotate: bool },
}

impl Serialize for UiAction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            UiAction::Launch(name) => UiActionRepr::Launch {
                launch: name.clone(),
            },
            UiAction::Back => UiActionRepr::Back { back: true },
            UiAction::Rotate => UiActionRepr::Rotate { rotate: true },
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for UiAction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match UiActionRepr::deserialize(deserializer)? {
            UiActionRepr::Launch { launch } => UiAction::Launch(launch),
            UiActionRepr::Back { .. } => UiAction::Back,
            UiActionRepr::Rotate { .. } => UiAction::Rotate,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScriptError {
    #[error("script launches unregistered component {0:?}")]
    UnknownComponent(String),
    #[error("script must start by launching the default entry {expected:?}")]
    MustStartAtEntry { expected: String },
    #[error("model has no default entry to start the script from")]
    NoDefaultEntry,
    #[error("action {index} operates on an empty back stack")]
    ActionOnEmptyStack { index: usize },
    #[error("empty script")]
    EmptyScript,
}

/// Generator behavior knobs.
#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    /// Emit onRestart before re-resuming a stopped component. Off by
    /// default: restart is rarely overridden, so real traces rarely log it.
    pub emit_restart: bool,
    /// Probability that a component just pushed below the top is also
    /// destroyed after its stop. Exercises the recreate path.
    pub destroy_previous: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            emit_restart: false,
            destroy_previous: 0.0,
        }
    }
}

/// Emits the exact lifecycle event sequence the multi-component model
/// prescribes for a UI script. Deterministic for a given seed.
pub fn generate_trace(
    model: &AppModel,
    script: &[UiAction],
    seed: u64,
) -> Result<Vec<TraceEvent>, ScriptError> {
    generate_trace_with(model, script, seed, &GeneratorConfig::default())
}

pub fn generate_trace_with(
    model: &AppModel,
    script: &[UiAction],
    seed: u64,
    cfg: &GeneratorConfig,
) -> Result<Vec<TraceEvent>, ScriptError> {
    let entry = model
        .default_entry
        .as_deref()
        .ok_or(ScriptError::NoDefaultEntry)?;
    match script.first() {
        None => return Err(ScriptError::EmptyScript),
        Some(UiAction::Launch(first)) if first == entry => {}
        Some(_) => {
            return Err(ScriptError::MustStartAtEntry {
                expected: entry.to_string(),
            })
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gen = Generator {
        stack: StackModel::new(),
        events: Vec::new(),
        seq: 0,
    };

    for (index, action) in script.iter().enumerate() {
        match action {
            UiAction::Launch(name) => {
                if !model.components.contains_key(name) {
                    return Err(ScriptError::UnknownComponent(name.clone()));
                }
                gen.launch(name, cfg, &mut rng);
            }
            UiAction::Back => {
                if gen.stack.is_empty() {
                    return Err(ScriptError::ActionOnEmptyStack { index });
                }
                gen.back(cfg);
            }
            UiAction::Rotate => {
                if gen.stack.is_empty() {
                    return Err(ScriptError::ActionOnEmptyStack { index });
                }
                gen.rotate();
            }
        }
    }
    Ok(gen.events)
}

struct Generator {
    stack: StackModel,
    events: Vec<TraceEvent>,
    seq: u64,
}

impl Generator {
    fn emit(&mut self, component: &str, method: LifecycleMethod) {
        self.seq += 1;
        self.events.push(TraceEvent {
            seq: self.seq,
            component: component.to_string(),
            declaring_class: component.to_string(),
            method: method.as_str().to_string(),
            kind: EventKind::Lifecycle(method),
        });
        self.stack
            .set_status(component, ComponentStatus::from_method(method));
    }

    fn create_path(&mut self, component: &str) {
        self.emit(component, LifecycleMethod::OnCreate);
        self.emit(component, LifecycleMethod::OnStart);
        self.emit(component, LifecycleMethod::OnResume);
    }

    /// Brings a stack-resident component back to the foreground.
    fn resume_path(&mut self, component: &str, cfg: &GeneratorConfig) {
        if self.stack.status(component) == ComponentStatus::Destroyed {
            self.create_path(component);
        } else {
            if cfg.emit_restart {
                self.emit(component, LifecycleMethod::OnRestart);
            }
            self.emit(component, LifecycleMethod::OnResume);
        }
    }

    fn maybe_destroy(&mut self, component: &str, cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) {
        if cfg.destroy_previous > 0.0 && rng.gen_bool(cfg.destroy_previous) {
            self.emit(component, LifecycleMethod::OnDestroy);
        }
    }

    fn launch(&mut self, name: &str, cfg: &GeneratorConfig, rng: &mut ChaCha8Rng) {
        if self.stack.top() == Some(name) {
            return;
        }
        if self.stack.is_empty() {
            self.stack.push(name, ComponentStatus::NotStored);
            self.create_path(name);
            return;
        }
        let previous = self.stack.top().expect("stack non-empty").to_string();
        self.emit(&previous, LifecycleMethod::OnPause);
        if self.stack.contains(name) {
            self.resume_path(name, cfg);
            self.stack.move_to_top(name);
        } else {
            self.stack.push(name, ComponentStatus::NotStored);
            self.create_path(name);
        }
        self.emit(&previous, LifecycleMethod::OnStop);
        self.maybe_destroy(&previous, cfg, rng);
    }

    fn back(&mut self, cfg: &GeneratorConfig) {
        let top = self.stack.top().expect("checked non-empty").to_string();
        self.emit(&top, LifecycleMethod::OnPause);
        if let Some(previous) = self.stack.second().map(str::to_string) {
            self.resume_path(&previous, cfg);
        }
        self.emit(&top, LifecycleMethod::OnStop);
        self.emit(&top, LifecycleMethod::OnDestroy);
        self.stack.pop();
    }

    fn rotate(&mut self) {
        let top = self.stack.top().expect("checked non-empty").to_string();
        self.emit(&top, LifecycleMethod::OnPause);
        self.emit(&top, LifecycleMethod::OnStop);
        self.emit(&top, LifecycleMethod::OnDestroy);
        self.create_path(&top);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifest::{parse_manifest, ManifestFormat};

    fn model(names: &[&str]) -> AppModel {
        let components: Vec<String> = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                if i == 0 {
                    format!(
                        r#"{{"name":"{n}","kind":"activity","filters":[{{"actions":["android.intent.action.MAIN"],"categories":["android.intent.category.LAUNCHER"]}}]}}"#
                    )
                } else {
                    format!(r#"{{"name":"{n}","kind":"activity"}}"#)
                }
            })
            .collect();
        let json = format!(
            r#"{{"package":"p","components":[{}]}}"#,
            components.join(",")
        );
        parse_manifest(json.as_bytes(), ManifestFormat::Json).unwrap()
    }

    fn methods(trace: &[TraceEvent]) -> Vec<String> {
        trace
            .iter()
            .map(|e| format!("{}.{}", e.component, e.method))
            .collect()
    }

    #[test]
    fn canonical_launch_steps() {
        use LifecycleMethod::*;
        use LifecycleState::*;
        assert_eq!(step(Init, OnCreate), Ok(Created));
        assert_eq!(step(Created, OnStart), Ok(Started));
        assert_eq!(step(Started, OnResume), Ok(Resumed));
        assert_eq!(step(Resumed, OnPause), Ok(Paused));
        assert_eq!(step(Paused, OnResume), Ok(Resumed));
        assert_eq!(step(Paused, OnStop), Ok(Stopped));
        assert_eq!(step(Stopped, OnRestart), Ok(Started));
        assert_eq!(step(Stopped, OnDestroy), Ok(Destroyed));
    }

    #[test]
    fn undefined_step_is_a_violation() {
        let err = step(LifecycleState::Init, LifecycleMethod::OnResume).unwrap_err();
        assert_eq!(err.state, LifecycleState::Init);
        assert_eq!(err.method, LifecycleMethod::OnResume);
    }

    #[test]
    fn single_launch_trace() {
        let m = model(&["A"]);
        let trace = generate_trace(&m, &[UiAction::Launch("A".into())], 0).unwrap();
        assert_eq!(methods(&trace), vec!["A.onCreate", "A.onStart", "A.onResume"]);
        assert_eq!(validate_trace(&trace, &m), vec![]);
    }

    #[test]
    fn two_launches_interleave_pause_and_stop() {
        let m = model(&["A", "B"]);
        let trace = generate_trace(
            &m,
            &[UiAction::Launch("A".into()), UiAction::Launch("B".into())],
            0,
        )
        .unwrap();
        assert_eq!(
            methods(&trace),
            vec![
                "A.onCreate",
                "A.onStart",
                "A.onResume",
                "A.onPause",
                "B.onCreate",
                "B.onStart",
                "B.onResume",
                "A.onStop",
            ]
        );
        assert_eq!(validate_trace(&trace, &m), vec![]);
    }

    #[test]
    fn back_resumes_previous_and_destroys_top() {
        let m = model(&["A", "B"]);
        let trace = generate_trace(
            &m,
            &[
                UiAction::Launch("A".into()),
                UiAction::Launch("B".into()),
                UiAction::Back,
            ],
            0,
        )
        .unwrap();
        let tail: Vec<String> = methods(&trace)[trace.len() - 4..].to_vec();
        assert_eq!(
            tail,
            vec!["B.onPause", "A.onResume", "B.onStop", "B.onDestroy"]
        );
        assert_eq!(validate_trace(&trace, &m), vec![]);
    }

    #[test]
    fn stop_before_pause_is_flagged_once() {
        let m = model(&["A"]);
        let trace: Vec<TraceEvent> = [
            LifecycleMethod::OnCreate,
            LifecycleMethod::OnStart,
            LifecycleMethod::OnResume,
            LifecycleMethod::OnStop,
            LifecycleMethod::OnPause,
        ]
        .iter()
        .enumerate()
        .map(|(i, m)| TraceEvent {
            seq: i as u64 + 1,
            component: "A".into(),
            declaring_class: "A".into(),
            method: m.as_str().into(),
            kind: EventKind::Lifecycle(*m),
        })
        .collect();
        let violations = validate_trace(&trace, &m);
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].index, 3);
        assert_eq!(violations[0].kind, ViolationKind::StopBeforePause);
    }

    #[test]
    fn generator_is_deterministic_per_seed() {
        let m = model(&["A", "B", "C"]);
        let script = vec![
            UiAction::Launch("A".into()),
            UiAction::Launch("B".into()),
            UiAction::Launch("C".into()),
            UiAction::Back,
            UiAction::Rotate,
        ];
        let cfg = GeneratorConfig {
            destroy_previous: 0.5,
            ..GeneratorConfig::default()
        };
        let t1 = generate_trace_with(&m, &script, 42, &cfg).unwrap();
        let t2 = generate_trace_with(&m, &script, 42, &cfg).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn launching_unregistered_component_fails() {
        let m = model(&["A"]);
        let err = generate_trace(
            &m,
            &[UiAction::Launch("A".into()), UiAction::Launch("Z".into())],
            0,
        )
        .unwrap_err();
        assert_eq!(err, ScriptError::UnknownComponent("Z".into()));
    }

    #[test]
    fn script_must_start_at_entry() {
        let m = model(&["A", "B"]);
        let err = generate_trace(&m, &[UiAction::Launch("B".into())], 0).unwrap_err();
        assert_eq!(
            err,
            ScriptError::MustStartAtEntry {
                expected: "A".into()
            }
        );
    }

    #[test]
    fn ui_action_json_round_trip() {
        let script = vec![
            UiAction::Launch("com.pkg.A".into()),
            UiAction::Back,
            UiAction::Rotate,
        ];
        let json = serde_json::to_string(&script).unwrap();
        assert_eq!(
            json,
            r#"[{"launch":"com.pkg.A"},{"back":true},{"rotate":true}]"#
        );
        let parsed: Vec<UiAction> = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, script);
    }
}
