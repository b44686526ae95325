//! Command-line front-end wiring the pipeline: trace extraction and
//! validation, graph metrics, intent-aware tool comparison, and scripted
//! trace generation.
//!
//! Exit codes: 0 success, 1 malformed input, 2 semantic/validation
//! failure, 3 lifecycle admissibility violations found. Requested
//! documents go to stdout; diagnostics go to stderr.

mod config;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use icc_lens_core::ctg::{
    build_ctg, connectivity, degree, edge_classes, flag_high_degree, parse_edge_list,
};
use icc_lens_core::eval::ToolOutput;
use icc_lens_core::extractor::extract_iccs;
use icc_lens_core::lifecycle::{generate_trace_with, validate_trace, UiAction};
use icc_lens_core::manifest::{
    parse_manifest_with, AppModel, ManifestError, ManifestFormat, ParseOptions,
};
use icc_lens_core::model::IccLink;
use icc_lens_core::report::{build_report, report_to_json, report_to_table};
use icc_lens_core::tags::validate_link;
use icc_lens_core::trace::{parse_trace, write_trace, write_trace_jsonl};

use config::Config;

#[derive(Parser)]
#[command(
    name = "icc-lens",
    version,
    about = "Android ICC link extraction, metrics and tool comparison"
)]
struct Cli {
    /// Output format for the requested document.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Write the document to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML configuration file with thresholds and per-tool options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Extra fragment classes, one per line.
    #[arg(long, global = true)]
    fragment_registry: Option<PathBuf>,
    /// Default-entry override when the manifest has none or several.
    #[arg(long, global = true)]
    entry: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Extract ICC links from an execution trace.
    Extract { trace: PathBuf, manifest: PathBuf },
    /// Check a trace against the component lifecycle model.
    Validate { trace: PathBuf, manifest: PathBuf },
    /// Compute degree, connectivity and edge-class metrics for a link set.
    Metrics { manifest: PathBuf, links: PathBuf },
    /// Score tool outputs against a tagged oracle.
    Compare {
        manifest: PathBuf,
        oracle: PathBuf,
        /// Tool output files; a missing file marks that tool failed.
        tools: Vec<PathBuf>,
    },
    /// Generate the lifecycle trace for a scripted UI session.
    Gen {
        manifest: PathBuf,
        script: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn parse(message: impl Into<String>) -> CliError {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn semantic(message: impl Into<String>) -> CliError {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("icc-lens: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode, CliError> {
    let config = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Extract { trace, manifest } => cmd_extract(cli, &config, trace, manifest),
        Command::Validate { trace, manifest } => cmd_validate(cli, trace, manifest),
        Command::Metrics { manifest, links } => cmd_metrics(cli, &config, manifest, links),
        Command::Compare {
            manifest,
            oracle,
            tools,
        } => cmd_compare(cli, &config, manifest, oracle, tools),
        Command::Gen {
            manifest,
            script,
            seed,
        } => cmd_gen(cli, &config, manifest, script, *seed),
    }
}

fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    match path {
        None => Ok(Config::default()),
        Some(p) => {
            let text = read_file(p)?;
            Config::parse(&text).map_err(CliError::semantic)
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))
}

fn manifest_format(path: &Path, text: &str) -> ManifestFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => ManifestFormat::Json,
        Some("xml") => ManifestFormat::Xml,
        _ => {
            if text.trim_start().starts_with('{') {
                ManifestFormat::Json
            } else {
                ManifestFormat::Xml
            }
        }
    }
}

fn manifest_error(e: ManifestError) -> CliError {
    if e.is_syntax() {
        CliError::parse(e.to_string())
    } else {
        CliError::semantic(e.to_string())
    }
}

fn load_manifest(cli: &Cli, path: &Path, require_entry: bool) -> Result<AppModel, CliError> {
    let text = read_file(path)?;
    let format = manifest_format(path, &text);
    let options = ParseOptions {
        entry_override: cli.entry.clone(),
        require_entry,
    };
    let mut model =
        parse_manifest_with(text.as_bytes(), format, &options).map_err(manifest_error)?;
    if let Some(registry) = &cli.fragment_registry {
        let text = read_file(registry)?;
        for line in text.lines() {
            let name = line.trim();
            if !name.is_empty() && !name.starts_with('#') {
                model.fragments.insert(name.to_string());
            }
        }
    }
    Ok(model)
}

fn load_trace(path: &Path) -> Result<Vec<icc_lens_core::trace::TraceEvent>, CliError> {
    let text = read_file(path)?;
    parse_trace(&text).map_err(|e| {
        if e.is_syntax() {
            CliError::parse(e.to_string())
        } else {
            CliError::semantic(e.to_string())
        }
    })
}

fn emit(cli: &Cli, document: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => fs::write(path, document)
            .map_err(|e| CliError::semantic(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{document}");
            Ok(())
        }
    }
}

fn cmd_extract(
    cli: &Cli,
    config: &Config,
    trace_path: &Path,
    manifest_path: &Path,
) -> Result<ExitCode, CliError> {
    let extractor_config = config.extractor_config().map_err(CliError::semantic)?;
    // The entry reset needs a default entry; with the reset disabled the
    // manifest may legitimately omit a launcher.
    let model = load_manifest(cli, manifest_path, extractor_config.entry_reset)?;
    let trace = load_trace(trace_path)?;
    let links = extract_iccs(&trace, &model, &extractor_config);

    let document = match cli.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let doc = serde_json::json!({ "links": links });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("links serialize")
            )
        }
        OutputFormat::Text => links
            .iter()
            .map(|l| format!("{}\t{}\n", l.source, l.target))
            .collect(),
    };
    emit(cli, &document)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(cli: &Cli, trace_path: &Path, manifest_path: &Path) -> Result<ExitCode, CliError> {
    let model = load_manifest(cli, manifest_path, false)?;
    let trace = load_trace(trace_path)?;
    let violations = validate_trace(&trace, &model);

    let document = match cli.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Text => {
            let mut text = String::new();
            for v in &violations {
                text.push_str(&v.to_string());
                text.push('\n');
            }
            text.push_str(&format!("{} violations\n", violations.len()));
            text
        }
        OutputFormat::Json => {
            let doc = serde_json::json!({
                "admissible": violations.is_empty(),
                "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("violations serialize")
            )
        }
    };
    emit(cli, &document)?;
    if violations.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(3))
    }
}

/// Accepts a bare link array, a `{"links": [...]}` document (oracle or
/// extract output), a CTG export with an `"edges"` array, or edge-list
/// text.
fn load_links(path: &Path) -> Result<Vec<IccLink>, CliError> {
    let text = read_file(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::parse(e.to_string()))?;
        match &value {
            serde_json::Value::Array(_) => {
                serde_json::from_value(value).map_err(|e| CliError::parse(e.to_string()))
            }
            serde_json::Value::Object(map) => {
                if let Some(links) = map.get("links") {
                    serde_json::from_value(links.clone())
                        .map_err(|e| CliError::parse(e.to_string()))
                } else if let Some(edges) = map.get("edges") {
                    let pairs: Vec<(String, String)> = serde_json::from_value(edges.clone())
                        .map_err(|e| CliError::parse(e.to_string()))?;
                    Ok(pairs
                        .into_iter()
                        .map(|(s, t)| IccLink::new(s, t))
                        .collect())
                } else {
                    Err(CliError::parse(
                        "JSON link document has neither \"links\" nor \"edges\"",
                    ))
                }
            }
            _ => Err(CliError::parse("unsupported link document")),
        }
    } else {
        parse_edge_list(&text).map_err(CliError::parse)
    }
}

fn cmd_metrics(
    cli: &Cli,
    config: &Config,
    manifest_path: &Path,
    links_path: &Path,
) -> Result<ExitCode, CliError> {
    let model = load_manifest(cli, manifest_path, false)?;
    let links = load_links(links_path)?;
    let ctg = build_ctg(&model, &links);
    let deg = degree(&ctg).map_err(|e| CliError::semantic(e.to_string()))?;
    let conn = connectivity(&ctg, &model);
    let classes = edge_classes(&ctg);
    let threshold = config.high_degree_threshold();

    let doc = serde_json::json!({
        "degree": deg,
        "c_separated": conn.c_separated,
        "c_main_not": conn.c_main_not,
        "c_export_not": conn.c_export_not,
        "edge_classes": classes,
        "flags": { "high_degree": flag_high_degree(deg, threshold) },
    });
    let document = match cli.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            format!(
                "{}\n",
                serde_json::to_string_pretty(&doc).expect("metrics serialize")
            )
        }
        OutputFormat::Text => {
            let mut text = String::new();
            text.push_str(&format!("degree: {deg}\n"));
            text.push_str(&format!("c_separated: {}\n", conn.c_separated));
            match conn.c_main_not {
                Some(n) => text.push_str(&format!("c_main_not: {n}\n")),
                None => text.push_str("c_main_not: n/a (no default entry)\n"),
            }
            text.push_str(&format!("c_export_not: {}\n", conn.c_export_not));
            text.push_str(&format!(
                "edge_classes: c_c={} a_a={} cf_cf={}\n",
                classes.c_c, classes.a_a, classes.cf_cf
            ));
            text.push_str(&format!(
                "high_degree: {}\n",
                flag_high_degree(deg, threshold)
            ));
            text
        }
    };
    emit(cli, &document)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(
    cli: &Cli,
    config: &Config,
    manifest_path: &Path,
    oracle_path: &Path,
    tool_paths: &[PathBuf],
) -> Result<ExitCode, CliError> {
    let model = load_manifest(cli, manifest_path, false)?;
    let oracle_text = read_file(oracle_path)?;
    let oracle_doc: serde_json::Value =
        serde_json::from_str(&oracle_text).map_err(|e| CliError::parse(e.to_string()))?;
    let app = oracle_doc
        .get("app")
        .and_then(|v| v.as_str())
        .unwrap_or("app")
        .to_string();
    let links_value = oracle_doc
        .get("links")
        .cloned()
        .ok_or_else(|| CliError::parse("oracle document has no \"links\" key"))?;
    let oracle: BTreeSet<IccLink> =
        serde_json::from_value(links_value).map_err(|e| CliError::parse(e.to_string()))?;

    for link in &oracle {
        for violation in validate_link(link) {
            eprintln!("icc-lens: oracle {link}: {violation}");
        }
    }

    // Per-tool problems mark that tool failed without aborting the rest.
    let mut outputs = Vec::new();
    for path in tool_paths {
        let parsed = fs::read_to_string(path)
            .map_err(|e| e.to_string())
            .and_then(|text| ToolOutput::from_json(&text).map_err(|e| e.to_string()));
        match parsed {
            Ok(output) => outputs.push(output),
            Err(e) => {
                let name = path
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("unknown")
                    .to_string();
                eprintln!("icc-lens: tool {name} marked failed: {e}");
                outputs.push(ToolOutput {
                    tool: name,
                    success: false,
                    payload: icc_lens_core::eval::ToolPayload::Edges(BTreeSet::new()),
                });
            }
        }
    }

    let report = build_report(&app, &model, &oracle, &outputs, &config.eval_options());
    let document = match cli.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => report_to_json(&report),
        OutputFormat::Text => report_to_table(&report),
    };
    emit(cli, &document)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_gen(
    cli: &Cli,
    config: &Config,
    manifest_path: &Path,
    script_path: &Path,
    seed: u64,
) -> Result<ExitCode, CliError> {
    let model = load_manifest(cli, manifest_path, true)?;
    let script_text = read_file(script_path)?;
    let script: Vec<UiAction> =
        serde_json::from_str(&script_text).map_err(|e| CliError::parse(e.to_string()))?;
    let trace = generate_trace_with(&model, &script, seed, &config.generator_config())
        .map_err(|e| CliError::semantic(e.to_string()))?;

    let document = match cli.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Text => write_trace(&trace),
        OutputFormat::Json => write_trace_jsonl(&trace),
    };
    emit(cli, &document)?;
    Ok(ExitCode::SUCCESS)
}
