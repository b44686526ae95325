//! TOML configuration: one file holds every tunable threshold, with
//! command-line flags taking precedence.

use std::collections::BTreeMap;
use std::str::FromStr;

use serde::Deserialize;

use icc_lens_core::eval::UnifyOptions;
use icc_lens_core::extractor::ExtractorConfig;
use icc_lens_core::lifecycle::{GeneratorConfig, LifecycleMethod};
use icc_lens_core::report::EvalOptions;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub extractor: ExtractorSection,
    #[serde(default)]
    pub metrics: MetricsSection,
    #[serde(default)]
    pub generator: GeneratorSection,
    #[serde(default)]
    pub unify: UnifySection,
    #[serde(default)]
    pub tools: BTreeMap<String, UnifySection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractorSection {
    pub poly_window: Option<usize>,
    pub invalid_lifecycles: Option<Vec<String>>,
    pub stack_limit: Option<usize>,
    pub entry_reset: Option<bool>,
    pub entry_reset_on_resume: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    pub high_degree_threshold: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub emit_restart: Option<bool>,
    pub destroy_previous: Option<f64>,
}

#[derive(Debug, Default, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnifySection {
    pub drop_noncomponent_any: Option<bool>,
    pub collapse_fragments: Option<bool>,
    pub drop_fragment_edges: Option<bool>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config, String> {
        toml::from_str(text).map_err(|e| format!("invalid config: {e}"))
    }

    pub fn extractor_config(&self) -> Result<ExtractorConfig, String> {
        let mut cfg = ExtractorConfig::default();
        let section = &self.extractor;
        if let Some(window) = section.poly_window {
            if window == 0 {
                return Err("extractor.poly_window must be at least 1".to_string());
            }
            cfg.poly_window = window;
        }
        if let Some(names) = &section.invalid_lifecycles {
            cfg.invalid_lifecycles = names
                .iter()
                .map(|n| LifecycleMethod::from_str(n).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
        }
        cfg.stack_limit = section.stack_limit.or(cfg.stack_limit);
        if let Some(v) = section.entry_reset {
            cfg.entry_reset = v;
        }
        if let Some(v) = section.entry_reset_on_resume {
            cfg.entry_reset_on_resume = v;
        }
        Ok(cfg)
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        let mut cfg = GeneratorConfig::default();
        if let Some(v) = self.generator.emit_restart {
            cfg.emit_restart = v;
        }
        if let Some(v) = self.generator.destroy_previous {
            cfg.destroy_previous = v;
        }
        cfg
    }

    pub fn eval_options(&self) -> EvalOptions {
        let mut options = EvalOptions::default();
        if let Some(t) = self.metrics.high_degree_threshold {
            options.high_degree_threshold = t;
        }
        options.default_unify = apply_unify(&self.unify, options.default_unify);
        for (tool, section) in &self.tools {
            let base = apply_unify(&self.unify, UnifyOptions::default());
            options.per_tool.insert(tool.clone(), apply_unify(section, base));
        }
        options
    }

    pub fn high_degree_threshold(&self) -> f64 {
        self.metrics
            .high_degree_threshold
            .unwrap_or(icc_lens_core::ctg::HIGH_DEGREE_THRESHOLD)
    }
}

fn apply_unify(section: &UnifySection, mut options: UnifyOptions) -> UnifyOptions {
    if let Some(v) = section.drop_noncomponent_any {
        options.drop_noncomponent_any = v;
    }
    if let Some(v) = section.collapse_fragments {
        options.collapse_fragments = v;
    }
    if let Some(v) = section.drop_fragment_edges {
        options.drop_fragment_edges = v;
    }
    options
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty_config() {
        let config = Config::parse("").unwrap();
        let extractor = config.extractor_config().unwrap();
        assert_eq!(extractor.poly_window, 1);
        assert!(extractor.entry_reset);
        assert_eq!(config.high_degree_threshold(), 15.0);
    }

    #[test]
    fn sections_override_defaults() {
        let text = r#"
[extractor]
poly_window = 3
invalid_lifecycles = ["onStop"]
stack_limit = 4

[metrics]
high_degree_threshold = 10.0

[unify]
drop_noncomponent_any = true

[tools.fragger]
drop_fragment_edges = true
"#;
        let config = Config::parse(text).unwrap();
        let extractor = config.extractor_config().unwrap();
        assert_eq!(extractor.poly_window, 3);
        assert_eq!(extractor.invalid_lifecycles.len(), 1);
        assert_eq!(extractor.stack_limit, Some(4));

        let eval = config.eval_options();
        assert_eq!(eval.high_degree_threshold, 10.0);
        assert!(eval.default_unify.drop_noncomponent_any);
        let fragger = eval.per_tool["fragger"];
        assert!(fragger.drop_fragment_edges);
        assert!(fragger.drop_noncomponent_any); // inherits [unify]
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(Config::parse("[extractor]\nbogus = 1\n").is_err());
        assert!(Config::parse("[extractor]\npoly_window = 0\n")
            .unwrap()
            .extractor_config()
            .is_err());
    }
}
