//! Manifest-summary ingestion: parses a plain-XML subset of the Android
//! manifest vocabulary or the canonical JSON schema into an [`AppModel`].
//!
//! Binary AXML is out of scope; the class hierarchy arrives as an explicit
//! sidecar map and fragment classes come from a registry list, since
//! manifests never register fragments.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Component, ComponentKind, DataSpec, IntentFilter, IntentPayload};

/// Parsed app model: components, intent filters, class hierarchy and the
/// default entry component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppModel {
    pub package: String,
    pub components: BTreeMap<String, Component>,
    /// class -> direct superclass; acyclic, chains end at classes absent
    /// from the map.
    pub hierarchy: BTreeMap<String, String>,
    /// Launcher component, when one could be determined.
    pub default_entry: Option<String>,
    /// Fragment registry: classes classified as fragments.
    pub fragments: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifestFormat {
    Xml,
    Json,
}

/// Knobs for `parse_manifest_with`.
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Overrides launcher detection; the named component becomes the entry.
    pub entry_override: Option<String>,
    /// When false, a missing or ambiguous launcher is tolerated and
    /// `default_entry` stays `None`.
    pub require_entry: bool,
}

impl ParseOptions {
    pub fn strict() -> Self {
        ParseOptions {
            entry_override: None,
            require_entry: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("no launcher component declares MAIN/LAUNCHER")]
    NoDefaultEntry,
    #[error("multiple launcher components: {0:?}")]
    AmbiguousDefaultEntry(Vec<String>),
    #[error("class hierarchy contains a cycle through {0:?}")]
    CyclicHierarchy(String),
    #[error("data spec declares a host without a scheme")]
    HostWithoutScheme,
    #[error("entry override {0:?} names no declared component")]
    UnknownEntryOverride(String),
    #[error("duplicate component name {0:?}")]
    DuplicateComponent(String),
    #[error("component with empty name")]
    EmptyComponentName,
    #[error("unknown component kind {0:?}")]
    UnknownKind(String),
    #[error("missing element or attribute: {0}")]
    Missing(String),
}

impl ManifestError {
    /// True for malformed-input errors (CLI exit 1), false for semantic
    /// validation failures (CLI exit 2).
    pub fn is_syntax(&self) -> bool {
        matches!(self, ManifestError::Syntax { .. } | ManifestError::Json(_))
    }
}

/// Canonical JSON schema.
#[derive(Debug, Serialize, Deserialize)]
struct JsonManifest {
    package: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    default_entry: Option<String>,
    components: Vec<JsonComponent>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    hierarchy: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    fragments: BTreeSet<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonComponent {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    exported: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    filters: Vec<IntentFilter>,
}

fn kind_from_str(s: &str) -> Result<ComponentKind, ManifestError> {
    match s {
        "activity" => Ok(ComponentKind::Activity),
        "service" => Ok(ComponentKind::Service),
        "receiver" => Ok(ComponentKind::BroadcastReceiver),
        "provider" => Ok(ComponentKind::ContentProvider),
        other => Err(ManifestError::UnknownKind(other.to_string())),
    }
}

fn kind_to_str(kind: ComponentKind) -> &'static str {
    match kind {
        ComponentKind::Activity => "activity",
        ComponentKind::Service => "service",
        ComponentKind::BroadcastReceiver => "receiver",
        ComponentKind::ContentProvider => "provider",
        // Never manifest-registered; serialization only sees basic kinds.
        ComponentKind::Fragment | ComponentKind::NonComponent => unreachable!(),
    }
}

/// Parses a manifest summary with strict entry handling.
pub fn parse_manifest(input: &[u8], format: ManifestFormat) -> Result<AppModel, ManifestError> {
    parse_manifest_with(input, format, &ParseOptions::strict())
}

/// Parses a manifest summary.
///
/// The component whose filter carries the MAIN action and LAUNCHER
/// category becomes the default entry and is forced exported. Components
/// without an explicit exported flag default to exported when they own at
/// least one filter.
pub fn parse_manifest_with(
    input: &[u8],
    format: ManifestFormat,
    options: &ParseOptions,
) -> Result<AppModel, ManifestError> {
    let raw = match format {
        ManifestFormat::Json => parse_json(input)?,
        ManifestFormat::Xml => parse_xml(input)?,
    };
    finish_model(raw, options)
}

/// Pre-validation parse result shared by both front-ends.
struct RawModel {
    package: String,
    components: Vec<(String, ComponentKind, Option<bool>, Vec<IntentFilter>)>,
    hierarchy: BTreeMap<String, String>,
    fragments: BTreeSet<String>,
    declared_entry: Option<String>,
}

fn parse_json(input: &[u8]) -> Result<RawModel, ManifestError> {
    let parsed: JsonManifest =
        serde_json::from_slice(input).map_err(|e| ManifestError::Json(e.to_string()))?;
    let mut components = Vec::new();
    for c in parsed.components {
        components.push((c.name, kind_from_str(&c.kind)?, c.exported, c.filters));
    }
    Ok(RawModel {
        package: parsed.package,
        components,
        hierarchy: parsed.hierarchy,
        fragments: parsed.fragments,
        declared_entry: parsed.default_entry,
    })
}

fn finish_model(raw: RawModel, options: &ParseOptions) -> Result<AppModel, ManifestError> {
    for spec in raw.components.iter().flat_map(|c| &c.3).flat_map(|f| &f.data_specs) {
        if spec.host.is_some() && spec.scheme.is_none() {
            return Err(ManifestError::HostWithoutScheme);
        }
    }

    let mut components = BTreeMap::new();
    for (name, kind, exported, filters) in raw.components {
        if name.is_empty() {
            return Err(ManifestError::EmptyComponentName);
        }
        let component = Component {
            exported: exported.unwrap_or(!filters.is_empty()),
            main_entry: false,
            name: name.clone(),
            kind,
            filters,
        };
        if components.insert(name.clone(), component).is_some() {
            return Err(ManifestError::DuplicateComponent(name));
        }
    }

    check_hierarchy(&raw.hierarchy)?;

    let launcher: Vec<String> = components
        .values()
        .filter(|c| c.filters.iter().any(IntentFilter::is_launcher))
        .map(|c| c.name.clone())
        .collect();

    let override_entry = options.entry_override.clone().or(raw.declared_entry);
    let default_entry = match override_entry {
        Some(name) => {
            if !components.contains_key(&name) {
                return Err(ManifestError::UnknownEntryOverride(name));
            }
            Some(name)
        }
        None => match launcher.len() {
            0 if options.require_entry => return Err(ManifestError::NoDefaultEntry),
            0 => None,
            1 => Some(launcher[0].clone()),
            _ if options.require_entry => {
                return Err(ManifestError::AmbiguousDefaultEntry(launcher))
            }
            _ => None,
        },
    };

    for name in launcher.iter().chain(default_entry.iter()) {
        let c = components.get_mut(name).expect("launcher is declared");
        c.main_entry = true;
        c.exported = true;
    }

    Ok(AppModel {
        package: raw.package,
        components,
        hierarchy: raw.hierarchy,
        default_entry,
        fragments: raw.fragments,
    })
}

fn check_hierarchy(hierarchy: &BTreeMap<String, String>) -> Result<(), ManifestError> {
    for start in hierarchy.keys() {
        let mut seen = BTreeSet::new();
        let mut current = start;
        while let Some(parent) = hierarchy.get(current) {
            if !seen.insert(current.clone()) {
                return Err(ManifestError::CyclicHierarchy(current.clone()));
            }
            current = parent;
        }
    }
    Ok(())
}

fn xml_error(e: roxmltree::Error) -> ManifestError {
    let pos = e.pos();
    ManifestError::Syntax {
        line: pos.row,
        col: pos.col,
        msg: e.to_string(),
    }
}

/// Manifest summaries often omit the `xmlns:android` declaration real
/// manifests carry; when that is the sole parse failure, retry with the
/// declaration injected into the root element.
fn tolerant_xml<'a>(
    text: &'a str,
    storage: &'a mut String,
) -> Result<roxmltree::Document<'a>, ManifestError> {
    match roxmltree::Document::parse(text) {
        Ok(doc) => Ok(doc),
        Err(roxmltree::Error::UnknownNamespace(prefix, _)) if prefix == "android" => {
            *storage = inject_android_ns(text);
            roxmltree::Document::parse(storage).map_err(xml_error)
        }
        Err(e) => Err(xml_error(e)),
    }
}

/// Adds the android namespace declaration to the root element.
fn inject_android_ns(text: &str) -> String {
    const DECL: &str = " xmlns:android=\"http://schemas.android.com/apk/res/android\"";
    if let Some(pos) = text.find('<').and_then(|start| {
        // Skip the XML declaration and comments to find the root tag.
        let mut idx = start;
        let bytes = text.as_bytes();
        loop {
            if text[idx..].starts_with("<?") {
                idx += text[idx..].find("?>").map(|p| p + 2)?;
            } else if text[idx..].starts_with("<!--") {
                idx += text[idx..].find("-->").map(|p| p + 3)?;
            } else if bytes.get(idx) == Some(&b'<') {
                // Root tag: insert right after its name.
                let name_end = text[idx + 1..]
                    .find(|c: char| c.is_whitespace() || c == '>' || c == '/')
                    .map(|p| idx + 1 + p)?;
                return Some(name_end);
            } else {
                idx += 1;
            }
            if idx >= text.len() {
                return None;
            }
        }
    }) {
        let mut out = String::with_capacity(text.len() + DECL.len());
        out.push_str(&text[..pos]);
        out.push_str(DECL);
        out.push_str(&text[pos..]);
        out
    } else {
        text.to_string()
    }
}

fn parse_xml(input: &[u8]) -> Result<RawModel, ManifestError> {
    let text = std::str::from_utf8(input).map_err(|e| ManifestError::Syntax {
        line: 1,
        col: 1,
        msg: format!("manifest is not UTF-8: {e}"),
    })?;
    let mut storage = String::new();
    let doc = tolerant_xml(text, &mut storage)?;

    let root = doc.root_element();
    if root.tag_name().name() != "manifest" {
        return Err(ManifestError::Missing("manifest root element".to_string()));
    }
    let package = root.attribute("package").unwrap_or_default().to_string();

    let mut components = Vec::new();
    let application = root
        .children()
        .find(|n| n.has_tag_name("application"))
        .ok_or_else(|| ManifestError::Missing("application element".to_string()))?;

    for node in application.children().filter(|n| n.is_element()) {
        let kind = match node.tag_name().name() {
            "activity" => ComponentKind::Activity,
            "service" => ComponentKind::Service,
            "receiver" => ComponentKind::BroadcastReceiver,
            "provider" => ComponentKind::ContentProvider,
            _ => continue,
        };
        let name = expand_name(android_attr(&node, "name"), &package)
            .ok_or(ManifestError::EmptyComponentName)?;
        let exported = android_attr(&node, "exported").map(|v| v == "true");

        let mut filters = Vec::new();
        for filter_node in node.children().filter(|n| n.has_tag_name("intent-filter")) {
            let mut filter = IntentFilter::default();
            for child in filter_node.children().filter(|n| n.is_element()) {
                match child.tag_name().name() {
                    "action" => {
                        if let Some(v) = android_attr(&child, "name") {
                            filter.actions.insert(v.to_string());
                        }
                    }
                    "category" => {
                        if let Some(v) = android_attr(&child, "name") {
                            filter.categories.insert(v.to_string());
                        }
                    }
                    "data" => {
                        filter.data_specs.push(DataSpec {
                            scheme: android_attr(&child, "scheme").map(String::from),
                            host: android_attr(&child, "host").map(String::from),
                            path: android_attr(&child, "path").map(String::from),
                            mime_type: android_attr(&child, "mimeType").map(String::from),
                        });
                    }
                    _ => {}
                }
            }
            filters.push(filter);
        }
        components.push((name, kind, exported, filters));
    }

    Ok(RawModel {
        package,
        components,
        hierarchy: BTreeMap::new(),
        fragments: BTreeSet::new(),
        declared_entry: None,
    })
}

/// Reads `android:name`-style attributes, also accepting the bare form.
fn android_attr<'a>(node: &roxmltree::Node<'a, 'a>, name: &str) -> Option<&'a str> {
    node.attributes()
        .find(|a| a.name() == name)
        .map(|a| a.value())
}

fn expand_name(name: Option<&str>, package: &str) -> Option<String> {
    let name = name?;
    if name.is_empty() {
        return None;
    }
    if let Some(rest) = name.strip_prefix('.') {
        Some(format!("{package}.{rest}"))
    } else {
        Some(name.to_string())
    }
}

/// Parses a static `<intent .../>` target declaration (the preference-XML
/// vocabulary) into an explicit intent payload, looking for the element
/// anywhere under the given snippet's root.
pub fn parse_intent_element(xml: &str) -> Result<IntentPayload, ManifestError> {
    let mut storage = String::new();
    let doc = tolerant_xml(xml, &mut storage)?;
    let node = doc
        .descendants()
        .find(|n| n.has_tag_name("intent"))
        .ok_or_else(|| ManifestError::Missing("intent element".to_string()))?;

    let target = android_attr(&node, "targetClass")
        .ok_or_else(|| ManifestError::Missing("targetClass attribute".to_string()))?;
    let mut payload = IntentPayload::explicit(target);
    payload.action = android_attr(&node, "action").map(String::from);
    Ok(payload)
}

/// Serializes an app model back to the canonical JSON schema.
pub fn to_json(model: &AppModel) -> String {
    let manifest = JsonManifest {
        package: model.package.clone(),
        default_entry: model.default_entry.clone(),
        components: model
            .components
            .values()
            .map(|c| JsonComponent {
                name: c.name.clone(),
                kind: kind_to_str(c.kind).to_string(),
                exported: Some(c.exported),
                filters: c.filters.clone(),
            })
            .collect(),
        hierarchy: model.hierarchy.clone(),
        fragments: model.fragments.clone(),
    };
    serde_json::to_string_pretty(&manifest).expect("model serializes")
}

/// Strict superclass chain of `class`, nearest first, excluding the class
/// itself. Unknown classes yield an empty list.
pub fn ancestors(class: &str, model: &AppModel) -> Vec<String> {
    let mut chain = Vec::new();
    let mut current = class;
    while let Some(parent) = model.hierarchy.get(current) {
        if chain.iter().any(|c| c == parent) || parent == class {
            break; // cycle guard; impossible for validated models
        }
        chain.push(parent.clone());
        current = parent;
    }
    chain
}

/// Classifies a class name: registered component kind, fragment-registry
/// member, or non-component.
pub fn classify(name: &str, model: &AppModel) -> ComponentKind {
    if let Some(c) = model.components.get(name) {
        c.kind
    } else if model.fragments.contains(name) {
        ComponentKind::Fragment
    } else {
        ComponentKind::NonComponent
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LAUNCHER_XML: &str = r#"<manifest package="com.pkg">
  <application>
    <activity android:name=".Main" >
      <intent-filter>
        <action android:name="android.intent.action.MAIN"/>
        <category android:name="android.intent.category.LAUNCHER"/>
      </intent-filter>
    </activity>
    <service android:name="com.pkg.Sync"/>
  </application>
</manifest>"#;

    #[test]
    fn xml_launcher_becomes_default_entry() {
        let model = parse_manifest(LAUNCHER_XML.as_bytes(), ManifestFormat::Xml).unwrap();
        assert_eq!(model.default_entry.as_deref(), Some("com.pkg.Main"));
        let main = &model.components["com.pkg.Main"];
        assert!(main.exported && main.main_entry);
        assert_eq!(main.kind, ComponentKind::Activity);
        let sync = &model.components["com.pkg.Sync"];
        assert!(!sync.exported && !sync.main_entry);
        assert_eq!(sync.kind, ComponentKind::Service);
    }

    #[test]
    fn missing_launcher_is_an_error_in_strict_mode() {
        let xml = r#"<manifest package="p"><application>
            <activity android:name="p.A"/></application></manifest>"#;
        assert_eq!(
            parse_manifest(xml.as_bytes(), ManifestFormat::Xml),
            Err(ManifestError::NoDefaultEntry)
        );
        let lenient = parse_manifest_with(
            xml.as_bytes(),
            ManifestFormat::Xml,
            &ParseOptions::default(),
        )
        .unwrap();
        assert_eq!(lenient.default_entry, None);
    }

    #[test]
    fn ambiguous_launcher_reports_candidates() {
        let filter = r#"<intent-filter>
            <action android:name="android.intent.action.MAIN"/>
            <category android:name="android.intent.category.LAUNCHER"/>
          </intent-filter>"#;
        let xml = format!(
            r#"<manifest package="p"><application>
            <activity android:name="p.A">{filter}</activity>
            <activity android:name="p.B">{filter}</activity>
            </application></manifest>"#
        );
        match parse_manifest(xml.as_bytes(), ManifestFormat::Xml) {
            Err(ManifestError::AmbiguousDefaultEntry(names)) => {
                assert_eq!(names, vec!["p.A".to_string(), "p.B".to_string()]);
            }
            other => panic!("expected ambiguity error, got {other:?}"),
        }
        // An override settles it.
        let opts = ParseOptions {
            entry_override: Some("p.B".to_string()),
            require_entry: true,
        };
        let model = parse_manifest_with(xml.as_bytes(), ManifestFormat::Xml, &opts).unwrap();
        assert_eq!(model.default_entry.as_deref(), Some("p.B"));
    }

    #[test]
    fn malformed_xml_reports_position() {
        let xml = "<manifest package=\"p\">\n<application>\n<activity </application></manifest>";
        match parse_manifest(xml.as_bytes(), ManifestFormat::Xml) {
            Err(ManifestError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip_is_identity() {
        let json = r#"{
          "package": "com.pkg",
          "components": [
            {"name": "com.pkg.Main", "kind": "activity",
             "filters": [{"actions": ["android.intent.action.MAIN"],
                          "categories": ["android.intent.category.LAUNCHER"]}]},
            {"name": "com.pkg.Recv", "kind": "receiver", "exported": true,
             "filters": [{"actions": ["com.pkg.PING"],
                          "data": [{"scheme": "https", "host": "pkg.com"}]}]}
          ],
          "hierarchy": {"com.pkg.Main": "com.pkg.Base"},
          "fragments": ["com.pkg.ListFragment"]
        }"#;
        let model = parse_manifest(json.as_bytes(), ManifestFormat::Json).unwrap();
        let round = parse_manifest(to_json(&model).as_bytes(), ManifestFormat::Json).unwrap();
        assert_eq!(model, round);
    }

    #[test]
    fn entry_is_stable_across_component_orderings() {
        let a = r#"{"package":"p","components":[
            {"name":"p.A","kind":"activity","filters":[{"actions":["android.intent.action.MAIN"],"categories":["android.intent.category.LAUNCHER"]}]},
            {"name":"p.B","kind":"activity"}]}"#;
        let b = r#"{"package":"p","components":[
            {"name":"p.B","kind":"activity"},
            {"name":"p.A","kind":"activity","filters":[{"actions":["android.intent.action.MAIN"],"categories":["android.intent.category.LAUNCHER"]}]}]}"#;
        let ma = parse_manifest(a.as_bytes(), ManifestFormat::Json).unwrap();
        let mb = parse_manifest(b.as_bytes(), ManifestFormat::Json).unwrap();
        assert_eq!(ma.default_entry, mb.default_entry);
        assert_eq!(ma, mb);
    }

    #[test]
    fn host_without_scheme_rejected() {
        let json = r#"{"package":"p","components":[
            {"name":"p.A","kind":"activity","filters":[
              {"actions":["android.intent.action.MAIN"],
               "categories":["android.intent.category.LAUNCHER"],
               "data":[{"host":"example.com"}]}]}]}"#;
        assert_eq!(
            parse_manifest(json.as_bytes(), ManifestFormat::Json),
            Err(ManifestError::HostWithoutScheme)
        );
    }

    #[test]
    fn cyclic_hierarchy_rejected() {
        let json = r#"{"package":"p","default_entry":"p.A",
            "components":[{"name":"p.A","kind":"activity"}],
            "hierarchy":{"p.A":"p.B","p.B":"p.A"}}"#;
        match parse_manifest(json.as_bytes(), ManifestFormat::Json) {
            Err(ManifestError::CyclicHierarchy(_)) => {}
            other => panic!("expected cycle error, got {other:?}"),
        }
    }

    #[test]
    fn preference_intent_declaration_parses_as_explicit_payload() {
        let xml = r#"<Preference android:key="target">
            <intent android:targetPackage="com.pkg" android:targetClass="com.pkg.Tgt"/>
        </Preference>"#;
        let payload = parse_intent_element(xml).unwrap();
        assert_eq!(payload.target_component.as_deref(), Some("com.pkg.Tgt"));
        assert!(payload.is_well_formed());
    }

    #[test]
    fn ancestors_walks_the_chain() {
        let json = r#"{"package":"p","default_entry":"p.A",
            "components":[{"name":"p.A","kind":"activity"}],
            "hierarchy":{"p.A":"p.B","p.B":"p.C"}}"#;
        let model = parse_manifest(json.as_bytes(), ManifestFormat::Json).unwrap();
        assert_eq!(ancestors("p.A", &model), vec!["p.B", "p.C"]);
        assert_eq!(ancestors("p.C", &model), Vec::<String>::new());
        assert_eq!(ancestors("unknown", &model), Vec::<String>::new());
    }

    #[test]
    fn classify_distinguishes_kinds() {
        let json = r#"{"package":"p","default_entry":"p.A",
            "components":[{"name":"p.A","kind":"activity"}],
            "fragments":["p.Frag"]}"#;
        let model = parse_manifest(json.as_bytes(), ManifestFormat::Json).unwrap();
        assert_eq!(classify("p.A", &model), ComponentKind::Activity);
        assert_eq!(classify("p.Frag", &model), ComponentKind::Fragment);
        assert_eq!(classify("p.Helper", &model), ComponentKind::NonComponent);
    }
}
