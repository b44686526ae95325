//! icc-lens: extraction, validation and scoring of Android
//! inter-component-communication links.
//!
//! The crate covers the full desk pipeline: manifest-summary ingestion,
//! component-lifecycle trace validation and generation, lifecycle-aware
//! stack extraction of ICC links from execution traces, explicit/implicit
//! intent resolution against declared filters, component transition graph
//! metrics, and a unified comparison framework that scores heterogeneous
//! tool outputs against a characteristic-tagged oracle.

pub mod ctg;
pub mod eval;
pub mod extractor;
pub mod lifecycle;
pub mod manifest;
pub mod matcher;
pub mod model;
pub mod report;
pub mod tags;
pub mod trace;

pub use ctg::{build_ctg, connectivity, degree, edge_classes, Ctg};
pub use eval::{compare, pairwise, unify, ToolOutput, ToolPayload, UnifyOptions};
pub use extractor::{extract_iccs, ExtractorConfig};
pub use lifecycle::{
    generate_trace, step, validate_trace, LifecycleMethod, LifecycleState, StackModel, UiAction,
};
pub use manifest::{ancestors, classify, parse_manifest, AppModel, ManifestFormat};
pub use matcher::{complete_partial, match_filter, resolve, PartialRecord};
pub use model::{Component, ComponentKind, IccLink, IntentFilter, IntentPayload, TagSet};
pub use report::{build_report, build_suite_report, AppCase, EvalOptions, EvalReport, SuiteReport};
pub use tags::{tag_distribution, validate_link, validate_tags, Tag, Violation};
pub use trace::{parse_trace, write_trace, EventKind, TraceEvent};
