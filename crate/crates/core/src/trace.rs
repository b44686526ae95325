//! Method-execution trace events and their on-disk formats.
//!
//! Two formats are accepted: tab-separated lines
//! `seq<TAB>component<TAB>declaring_class<TAB>method<TAB>kind` and JSON
//! lines with the same field names. `kind` is one of `lifecycle`,
//! `callback`, `other`; lines starting with `#` are comments.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lifecycle::LifecycleMethod;

/// Classification of the executed method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Lifecycle(LifecycleMethod),
    Callback,
    Other,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Lifecycle(_) => "lifecycle",
            EventKind::Callback => "callback",
            EventKind::Other => "other",
        }
    }
}

/// One logged method execution.
///
/// `component` is the runtime class; `declaring_class` is the class whose
/// method body actually ran (they differ for super-call executions).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub seq: u64,
    pub component: String,
    pub declaring_class: String,
    pub method: String,
    pub kind: EventKind,
}

impl TraceEvent {
    /// Convenience constructor for flat events whose body class equals the
    /// runtime class; the kind is inferred from the method name.
    pub fn flat(seq: u64, component: &str, method: &str) -> TraceEvent {
        TraceEvent::super_call(seq, component, component, method)
    }

    /// An event whose body executed in `declaring_class`.
    pub fn super_call(
        seq: u64,
        component: &str,
        declaring_class: &str,
        method: &str,
    ) -> TraceEvent {
        let kind = match LifecycleMethod::from_str(method) {
            Ok(m) => EventKind::Lifecycle(m),
            Err(_) if method.starts_with("on") => EventKind::Callback,
            Err(_) => EventKind::Other,
        };
        TraceEvent {
            seq,
            component: component.to_string(),
            declaring_class: declaring_class.to_string(),
            method: method.to_string(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("malformed trace line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: sequence number {seq} does not increase (previous {previous})")]
    NonMonotonicSeq { line: usize, seq: u64, previous: u64 },
}

impl TraceError {
    /// Syntax errors map to CLI exit 1, semantic ones to exit 2.
    pub fn is_syntax(&self) -> bool {
        matches!(self, TraceError::Syntax { .. })
    }
}

#[derive(Serialize, Deserialize)]
struct EventRepr {
    seq: u64,
    component: String,
    declaring_class: String,
    method: String,
    kind: String,
}

fn event_from_repr(repr: EventRepr, line: usize) -> Result<TraceEvent, TraceError> {
    let kind = match repr.kind.as_str() {
        // A lifecycle-kinded event whose method name is not one of the
        // seven known methods is demoted to Other and later skipped.
        "lifecycle" => match LifecycleMethod::from_str(&repr.method) {
            Ok(m) => EventKind::Lifecycle(m),
            Err(_) => EventKind::Other,
        },
        "callback" => EventKind::Callback,
        "other" => EventKind::Other,
        unknown => {
            return Err(TraceError::Syntax {
                line,
                msg: format!("unknown event kind {unknown:?}"),
            })
        }
    };
    Ok(TraceEvent {
        seq: repr.seq,
        component: repr.component,
        declaring_class: repr.declaring_class,
        method: repr.method,
        kind,
    })
}

/// Parses a trace file in either accepted format, enforcing strictly
/// increasing sequence numbers.
pub fn parse_trace(input: &str) -> Result<Vec<TraceEvent>, TraceError> {
    let mut events = Vec::new();
    let mut previous_seq: Option<u64> = None;

    for (idx, raw) in input.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let event = if trimmed.starts_with('{') {
            let repr: EventRepr =
                serde_json::from_str(trimmed).map_err(|e| TraceError::Syntax {
                    line,
                    msg: e.to_string(),
                })?;
            event_from_repr(repr, line)?
        } else {
            parse_tsv_line(trimmed, line)?
        };
        if let Some(prev) = previous_seq {
            if event.seq <= prev {
                return Err(TraceError::NonMonotonicSeq {
                    line,
                    seq: event.seq,
                    previous: prev,
                });
            }
        }
        previous_seq = Some(event.seq);
        events.push(event);
    }
    Ok(events)
}

fn parse_tsv_line(line_text: &str, line: usize) -> Result<TraceEvent, TraceError> {
    let fields: Vec<&str> = line_text.split('\t').collect();
    if fields.len() != 5 {
        return Err(TraceError::Syntax {
            line,
            msg: format!("expected 5 tab-separated fields, found {}", fields.len()),
        });
    }
    let seq: u64 = fields[0].parse().map_err(|_| TraceError::Syntax {
        line,
        msg: format!("invalid sequence number {:?}", fields[0]),
    })?;
    event_from_repr(
        EventRepr {
            seq,
            component: fields[1].to_string(),
            declaring_class: fields[2].to_string(),
            method: fields[3].to_string(),
            kind: fields[4].to_string(),
        },
        line,
    )
}

/// Serializes events to the tab-separated format.
pub fn write_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            e.seq,
            e.component,
            e.declaring_class,
            e.method,
            e.kind.label()
        )
        .expect("string write");
    }
    out
}

/// Serializes events to JSON lines.
pub fn write_trace_jsonl(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let repr = EventRepr {
            seq: e.seq,
            component: e.component.clone(),
            declaring_class: e.declaring_class.clone(),
            method: e.method.clone(),
            kind: e.kind.label().to_string(),
        };
        out.push_str(&serde_json::to_string(&repr).expect("event serializes"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_round_trip() {
        let events = vec![
            TraceEvent::flat(1, "com.a.A", "onCreate"),
            TraceEvent::super_call(2, "com.a.A", "com.a.Base", "onCreate"),
            TraceEvent::flat(3, "com.a.A", "onClick"),
            TraceEvent::flat(4, "com.a.Util", "compute"),
        ];
        let text = write_trace(&events);
        assert_eq!(parse_trace(&text).unwrap(), events);
        assert_eq!(events[0].kind, EventKind::Lifecycle(LifecycleMethod::OnCreate));
        assert_eq!(events[2].kind, EventKind::Callback);
        assert_eq!(events[3].kind, EventKind::Other);
    }

    #[test]
    fn jsonl_round_trip() {
        let events = vec![
            TraceEvent::flat(1, "A", "onCreate"),
            TraceEvent::flat(7, "B", "onClick"),
        ];
        let text = write_trace_jsonl(&events);
        assert_eq!(parse_trace(&text).unwrap(), events);
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let text = "# header\n\n1\tA\tA\tonCreate\tlifecycle\n# done\n";
        assert_eq!(parse_trace(text).unwrap().len(), 1);
    }

    #[test]
    fn malformed_line_names_its_number() {
        let text = "1\tA\tA\tonCreate\tlifecycle\nbogus line\n";
        match parse_trace(text) {
            Err(TraceError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn non_monotonic_seq_rejected() {
        let text = "5\tA\tA\tonCreate\tlifecycle\n5\tB\tB\tonCreate\tlifecycle\n";
        match parse_trace(text) {
            Err(TraceError::NonMonotonicSeq { line, seq, previous }) => {
                assert_eq!((line, seq, previous), (2, 5, 5));
            }
            other => panic!("expected monotonicity error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_lifecycle_method_demoted_to_other() {
        let text = "1\tA\tA\tonWeird\tlifecycle\n";
        let events = parse_trace(text).unwrap();
        assert_eq!(events[0].kind, EventKind::Other);
    }
}
