use std::collections::BTreeSet;

use proptest::prelude::*;

use ugc_core::analysis::{unlink_features, wordplus_grammar};
use ugc_core::assets;
use ugc_core::compiler::{compile, eliminate_left_recursion, CompileOptions};
use ugc_core::lang::{Dawg, Lang, EMPTY};
use ugc_core::oracle::oracle_language;
use ugc_core::pfsg::{build_pfsg, cfg_enumerate, measure, pfsg_enumerate};
use ugc_core::strings::Sentence;
use ugc_core::{parse_grammar, ContextFreeGrammar};

const CAP: usize = 200_000;

fn words() -> impl Strategy<Value = BTreeSet<Vec<u8>>> {
    prop::collection::btree_set(prop::collection::vec(0u8..3, 0..4), 0..6)
}

fn build(d: &mut Dawg, set: &BTreeSet<Vec<u8>>) -> Lang {
    let mut l = EMPTY;
    for w in set {
        let toks: Vec<u32> = w.iter().map(|t| d.intern(&t.to_string())).collect();
        let x = d.word(&toks);
        l = d.union(l, x);
    }
    l
}

fn sentences(set: &BTreeSet<Vec<u8>>) -> BTreeSet<Sentence> {
    set.iter()
        .map(|w| w.iter().map(|t| t.to_string()).collect())
        .collect()
}

/// Random CFG text over `a b c`: every nonterminal has one terminal-only
/// alternative so that all of them are productive.
fn cfg_text() -> impl Strategy<Value = String> {
    let item = prop_oneof![
        (0usize..3).prop_map(|t| format!("\"{}\"", ["a", "b", "c"][t])),
        (0usize..3).prop_map(|n| format!("n{n}")),
    ];
    let alt = prop::collection::vec(item, 1..4).prop_map(|xs| xs.join(" "));
    let body = (
        prop::collection::vec(alt, 0..3),
        prop::collection::vec(0usize..3, 1..3),
    )
        .prop_map(|(alts, base)| {
            let base: Vec<&str> = base
                .iter()
                .map(|t| ["\"a\"", "\"b\"", "\"c\""][*t])
                .collect();
            let mut all = alts;
            all.push(base.join(" "));
            all.join(" | ")
        });
    prop::collection::vec(body, 3).prop_map(|bodies| {
        bodies
            .iter()
            .enumerate()
            .map(|(i, b)| format!("n{i} -> {b} ;\n"))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn automaton_operations_match_sets(a in words(), b in words()) {
        let mut d = Dawg::default();
        let (x, y) = (build(&mut d, &a), build(&mut d, &b));
        let u = d.union(x, y);
        let union: BTreeSet<Vec<u8>> = a.union(&b).cloned().collect();
        prop_assert_eq!(d.strings(u), sentences(&union));
        let diff = d.difference(x, y);
        let minus: BTreeSet<Vec<u8>> = a.difference(&b).cloned().collect();
        prop_assert_eq!(d.strings(diff), sentences(&minus));
        let c = d.concat(x, y);
        let product: BTreeSet<Vec<u8>> = a
            .iter()
            .flat_map(|p| b.iter().map(move |q| [p.clone(), q.clone()].concat()))
            .collect();
        prop_assert_eq!(d.count(c), product.len() as u128);
        prop_assert_eq!(d.strings(c), sentences(&product));
        prop_assert_eq!(u == x, b.is_subset(&a));
    }

    #[test]
    fn left_recursion_elimination_preserves_strings(text in cfg_text()) {
        let before = ContextFreeGrammar::parse(&text).unwrap();
        let after = eliminate_left_recursion(&before).unwrap();
        prop_assert!(!after.has_left_recursion());
        prop_assert_eq!(cfg_enumerate(&before, 5, CAP).unwrap(), cfg_enumerate(&after, 5, CAP).unwrap());
    }

    #[test]
    fn graphs_generate_the_cfg_language_with_normalized_mass(text in cfg_text()) {
        let cfg = eliminate_left_recursion(&ContextFreeGrammar::parse(&text).unwrap()).unwrap();
        let set = build_pfsg(&cfg).unwrap();
        prop_assert!(set.unnormalized(1e-9).is_empty());
        let paths: BTreeSet<Sentence> = pfsg_enumerate(&set, 4, CAP).unwrap().into_keys().collect();
        prop_assert_eq!(paths, cfg_enumerate(&cfg, 4, CAP).unwrap());
    }

    #[test]
    fn adding_an_alternative_never_shrinks_the_graphs(text in cfg_text(), extra in 0usize..3) {
        let small = ContextFreeGrammar::parse(&text).unwrap();
        let grown_text = text.replacen(" ;", &format!(" | \"c\" n{extra} \"a\" ;"), 1);
        let grown = ContextFreeGrammar::parse(&grown_text).unwrap();
        let m = |g: &ContextFreeGrammar| measure(&build_pfsg(&eliminate_left_recursion(g).unwrap()).unwrap());
        let (a, b) = (m(&small), m(&grown));
        prop_assert!(b.total_nodes >= a.total_nodes);
        prop_assert!(b.total_transitions >= a.total_transitions);
    }

    #[test]
    fn wordplus_accepts_every_sequence(vocab in prop::collection::btree_set("[a-c]", 1..4), len in 1usize..5) {
        let g = wordplus_grammar(&vocab).unwrap();
        let c = compile(&g, &CompileOptions::default()).unwrap();
        let got = cfg_enumerate(&c.cfg, len, CAP).unwrap();
        let v = vocab.len();
        let expected: usize = (1..=len).map(|n| v.pow(n as u32)).sum();
        prop_assert_eq!(got.len(), expected);
        prop_assert!(got.iter().all(|s| s.iter().all(|w| vocab.contains(w))));
    }
}

#[test]
fn unlinking_never_shrinks_the_language() {
    for (src, len) in [
        (assets::AGREEMENT, 8),
        (assets::REL_LINKED, 8),
        (assets::SHUTTLE_RELS, 5),
    ] {
        let g = parse_grammar(src).unwrap();
        let mut d = Dawg::default();
        let base = oracle_language(&g, len, None, &mut d, usize::MAX).unwrap();
        for rule in &g.rules {
            let features: Vec<String> = std::iter::once(&rule.mother)
                .chain(&rule.daughters)
                .flat_map(|c| c.constraints.keys().cloned())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            if features.is_empty() {
                continue;
            }
            let loose = unlink_features(&g, &rule.id, &features).unwrap();
            let wider = oracle_language(&loose, len, None, &mut d, usize::MAX).unwrap();
            assert_eq!(
                d.difference(base, wider),
                EMPTY,
                "unlinking {} shrank the language",
                rule.id
            );
        }
    }
}
