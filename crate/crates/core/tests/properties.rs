//! Property tests for the module-level invariants.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use icc_lens_core::ctg::{build_ctg, degree};
use icc_lens_core::eval::{pairwise, unify, ToolOutput, ToolPayload, UnifyOptions};
use icc_lens_core::extractor::{extract_iccs, ExtractorConfig};
use icc_lens_core::lifecycle::{generate_trace_with, GeneratorConfig, UiAction};
use icc_lens_core::manifest::AppModel;
use icc_lens_core::matcher::resolve;
use icc_lens_core::model::{Component, ComponentKind, IccLink, IntentFilter, IntentPayload};
use icc_lens_core::tags::{tag_distribution, validate_tags, Tag};

fn tag_strategy() -> impl Strategy<Value = Tag> {
    prop::sample::select(Tag::ALL.to_vec())
}

proptest! {
    // validate_tags sees a set, so any insertion order gives the same
    // sorted violation list.
    #[test]
    fn validate_tags_is_order_independent(tags in prop::collection::vec(tag_strategy(), 0..12)) {
        let forward: BTreeSet<Tag> = tags.iter().copied().collect();
        let mut reversed_input = tags.clone();
        reversed_input.reverse();
        let reversed: BTreeSet<Tag> = reversed_input.into_iter().collect();
        prop_assert_eq!(validate_tags(&forward), validate_tags(&reversed));
    }

    #[test]
    fn tag_distribution_fractions_in_unit_interval(
        tag_sets in prop::collection::vec(prop::collection::btree_set(tag_strategy(), 1..6), 1..20)
    ) {
        let links: Vec<IccLink> = tag_sets
            .into_iter()
            .enumerate()
            .map(|(i, tags)| {
                let mut link = IccLink::new(format!("S{i}"), "T");
                link.tags = tags;
                link
            })
            .collect();
        let dist = tag_distribution(&links).unwrap();
        prop_assert_eq!(dist.len(), 25);
        for fraction in dist.values() {
            prop_assert!((0.0..=1.0).contains(fraction));
        }
    }

    // Degree only sees the deduplicated edge set.
    #[test]
    fn degree_invariant_under_reorder_and_duplicates(
        pairs in prop::collection::vec((0usize..6, 0usize..6), 0..30),
        dup_rounds in 1usize..4,
    ) {
        let names: Vec<&str> = vec!["A", "B", "C", "D", "E", "F"];
        let model = plain_model(&names);
        let links: Vec<IccLink> = pairs
            .iter()
            .filter(|(s, t)| s != t)
            .map(|(s, t)| IccLink::new(names[*s], names[*t]))
            .collect();

        let base = degree(&build_ctg(&model, &links)).unwrap();

        let mut noisy: Vec<IccLink> = Vec::new();
        for _ in 0..dup_rounds {
            noisy.extend(links.iter().cloned());
        }
        noisy.reverse();
        let with_noise = degree(&build_ctg(&model, &noisy)).unwrap();
        prop_assert_eq!(base, with_noise);
    }

    // Adding a filter can only grow an implicit resolution.
    #[test]
    fn resolve_is_monotone_in_filters(
        actions in prop::collection::vec(0usize..5, 1..4),
        extra_action in 0usize..5,
        target in 0usize..4,
    ) {
        let names: Vec<&str> = vec!["A", "B", "C", "D"];
        let mut model = plain_model(&names);
        for (i, action) in actions.iter().enumerate() {
            let mut filter = IntentFilter::default();
            filter.actions.insert(format!("act{action}"));
            let component = model
                .components
                .get_mut(names[i % names.len()])
                .unwrap();
            component.filters.push(filter);
        }
        let intent = IntentPayload::implicit(format!("act{extra_action}"));
        let before = resolve(&intent, &model).targets;

        let mut filter = IntentFilter::default();
        filter.actions.insert(format!("act{extra_action}"));
        model
            .components
            .get_mut(names[target])
            .unwrap()
            .filters
            .push(filter);
        let after = resolve(&intent, &model).targets;
        prop_assert!(before.is_subset(&after));
    }

    // Reported overlap ratios stay in bounds.
    #[test]
    fn pairwise_reported_ratio_bounds(
        a_pairs in prop::collection::btree_set((0usize..5, 0usize..5), 0..12),
        b_pairs in prop::collection::btree_set((0usize..5, 0usize..5), 0..12),
    ) {
        let to_links = |pairs: &BTreeSet<(usize, usize)>| -> BTreeSet<IccLink> {
            pairs
                .iter()
                .filter(|(s, t)| s != t)
                .map(|(s, t)| IccLink::new(format!("N{s}"), format!("N{t}")))
                .collect()
        };
        let a = to_links(&a_pairs);
        let b = to_links(&b_pairs);
        let pw = pairwise(&a, &b, &BTreeSet::new());
        prop_assert!(pw.reported_ratio_a <= 1.0 && pw.reported_ratio_b <= 1.0);
        if !a.is_empty() || !b.is_empty() {
            let floor = a.len().max(b.len()) as f64 / (a.len() + b.len()) as f64;
            prop_assert!(pw.reported_ratio_a.max(pw.reported_ratio_b) >= floor);
        }
    }

    // Fragment collapse never removes an edge that survived filtering.
    #[test]
    fn unify_never_drops_component_edges(
        pairs in prop::collection::btree_set((0usize..8, 0usize..8), 0..20),
    ) {
        let model = fragment_model();
        let node = |i: usize| -> String {
            match i {
                0..=3 => format!("p.K{i}"),
                4..=5 => format!("p.G{}", i - 4),
                _ => format!("p.H{}", i - 6),
            }
        };
        let links: BTreeSet<IccLink> = pairs
            .iter()
            .filter(|(s, t)| s != t)
            .map(|(s, t)| IccLink::new(node(*s), node(*t)))
            .collect();
        let output = ToolOutput {
            tool: "t".to_string(),
            success: true,
            payload: ToolPayload::Edges(links.clone()),
        };
        let unified = unify(&output, &model, &UnifyOptions::default());
        for link in &links {
            let both_non = link.source.starts_with("p.H") && link.target.starts_with("p.H");
            if !both_non {
                prop_assert!(unified.links.contains(link));
            }
        }
    }

    // Isolated components are unreachable from the entry whenever the
    // entry itself has edges, so the separated count bounds the
    // unreachability counts. The exported-side bound needs the isolated
    // components to be unexported, since an exported component reaches
    // itself.
    #[test]
    fn separated_count_bounds_unreachability(
        pairs in prop::collection::btree_set((0usize..8, 0usize..8), 1..20),
    ) {
        let names: Vec<String> = (0..8).map(|i| format!("R{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut model = plain_model(&name_refs);

        let mut links: BTreeSet<IccLink> = pairs
            .iter()
            .filter(|(s, t)| s != t)
            .map(|(s, t)| IccLink::new(names[*s].clone(), names[*t].clone()))
            .collect();
        // Guarantee the entry has an outgoing edge.
        links.insert(IccLink::new(names[0].clone(), names[1].clone()));

        // Export a second component only if it has an edge.
        let touched: BTreeSet<&String> = links
            .iter()
            .flat_map(|l| [&l.source, &l.target])
            .collect();
        if touched.contains(&names[2]) {
            model.components.get_mut(&names[2]).unwrap().exported = true;
        }

        let ctg = build_ctg(&model, &links);
        let conn = icc_lens_core::ctg::connectivity(&ctg, &model);
        prop_assert!(conn.c_separated <= conn.c_main_not.unwrap());
        prop_assert!(conn.c_separated <= conn.c_export_not);
    }
}

fn plain_model(names: &[&str]) -> AppModel {
    let mut components = BTreeMap::new();
    for (i, name) in names.iter().enumerate() {
        components.insert(
            name.to_string(),
            Component {
                name: name.to_string(),
                kind: ComponentKind::Activity,
                exported: i == 0,
                main_entry: i == 0,
                filters: Vec::new(),
            },
        );
    }
    AppModel {
        package: "p".to_string(),
        components,
        hierarchy: BTreeMap::new(),
        default_entry: Some(names[0].to_string()),
        fragments: BTreeSet::new(),
    }
}

fn fragment_model() -> AppModel {
    let mut model = plain_model(&["p.K0", "p.K1", "p.K2", "p.K3"]);
    model.fragments = ["p.G0", "p.G1"].iter().map(|s| s.to_string()).collect();
    model
}

// Launch-chain scripts produce exactly the chain of links, and back
// navigation never adds a reverse edge. Seeded loops rather than proptest:
// the generator input space is structured.
#[test]
fn generated_launch_chains_extract_exactly_the_chain() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC4A1_0000 + seed);
        let count = rng.gen_range(1..=6);
        let names: Vec<String> = (0..count).map(|i| format!("L{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let model = plain_model(&name_refs);

        let script: Vec<UiAction> = names.iter().map(|n| UiAction::Launch(n.clone())).collect();
        let cfg = GeneratorConfig {
            emit_restart: seed % 2 == 0,
            destroy_previous: if seed % 3 == 0 { 0.5 } else { 0.0 },
        };
        let trace = generate_trace_with(&model, &script, seed, &cfg).unwrap();
        let links = extract_iccs(&trace, &model, &ExtractorConfig::default());
        let expected: Vec<(String, String)> = names
            .windows(2)
            .map(|w| (w[0].clone(), w[1].clone()))
            .collect();
        let got: Vec<(String, String)> = links.into_iter().map(|l| (l.source, l.target)).collect();
        assert_eq!(got, expected, "seed {seed}");
    }
}

#[test]
fn back_navigation_never_adds_a_reverse_link() {
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xBAC6_0000 + seed);
        let names: Vec<String> = (0..4).map(|i| format!("B{i}")).collect();
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let model = plain_model(&name_refs);

        // Random walk of launches and backs starting at the entry. The
        // entry is never relaunched and previous components are never
        // destroyed: either would fire the extractor's stack reset or
        // recreate path, after which a back target can legitimately be
        // re-pushed and linked — the reset's documented correction
        // behavior, out of scope for this invariant.
        let mut script = vec![UiAction::Launch(names[0].clone())];
        let mut depth = 1usize;
        for _ in 0..rng.gen_range(1..=10) {
            if depth > 1 && rng.gen_bool(0.4) {
                script.push(UiAction::Back);
                depth -= 1;
            } else {
                let name = names[rng.gen_range(1..names.len())].clone();
                script.push(UiAction::Launch(name));
                depth += 1; // upper bound; revisits keep depth, harmless
            }
        }
        let cfg = GeneratorConfig {
            emit_restart: false,
            destroy_previous: 0.0,
        };
        let trace = generate_trace_with(&model, &script, seed, &cfg).unwrap();
        let links = extract_iccs(&trace, &model, &ExtractorConfig::default());

        // Replay the script to collect launch transitions and the
        // back transitions (backed-from, resumed-previous). A back
        // transition may appear as a link only if the same pair also
        // occurred as a forward launch.
        let mut stack: Vec<String> = Vec::new();
        let mut forward: BTreeSet<(String, String)> = BTreeSet::new();
        let mut back_edges: BTreeSet<(String, String)> = BTreeSet::new();
        for action in &script {
            match action {
                UiAction::Launch(name) => {
                    if stack.last() == Some(name) {
                        continue;
                    }
                    if let Some(top) = stack.last().cloned() {
                        forward.insert((top, name.clone()));
                    }
                    if let Some(pos) = stack.iter().position(|c| c == name) {
                        stack.remove(pos);
                    }
                    stack.push(name.clone());
                }
                UiAction::Back => {
                    if let Some(top) = stack.pop() {
                        if let Some(prev) = stack.last() {
                            back_edges.insert((top, prev.clone()));
                        }
                    }
                }
                UiAction::Rotate => {}
            }
        }
        for link in &links {
            let pair = (link.source.clone(), link.target.clone());
            if back_edges.contains(&pair) {
                assert!(
                    forward.contains(&pair),
                    "seed {seed}: back navigation added {link}"
                );
            }
        }
    }
}
