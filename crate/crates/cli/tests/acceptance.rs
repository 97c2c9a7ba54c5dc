//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p ugc-cli --test acceptance`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use ugc_core::assets;
use ugc_core::compiler::{compile, eliminate_left_recursion, CompileOptions, Compiled};
use ugc_core::oracle::{oracle_parse, ParseOptions};
use ugc_core::pfsg::{build_pfsg, cfg_enumerate, measure, perplexity, CfgParser, MetricsReport};
use ugc_core::strings::{tokenize, Sentence};
use ugc_core::{parse_grammar, ContextFreeGrammar};

const CHECK_BUDGET: Duration = Duration::from_secs(300);
const MIN_LINKED_GROWTH: f64 = 2.0;
const MAX_UNLINKED_GROWTH: f64 = 1.10;
const MIN_NP_RATIO: f64 = 3.0;
const MIN_REDUCTION: u64 = 1000;
const MASS_TOLERANCE: f64 = 1e-9;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ugc(args: &[&str]) -> (Option<i32>, String) {
    let o = Command::new(env!("CARGO_BIN_EXE_ugc"))
        .args(args)
        .output()
        .expect("run ugc");
    let mut text = String::from_utf8_lossy(&o.stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(&o.stderr));
    (o.status.code(), text)
}

fn build(src: &str) -> Compiled {
    compile(&parse_grammar(src).unwrap(), &CompileOptions::default()).unwrap()
}

fn equivalence_suite() -> Verdict {
    let runs: &[&[&str]] = &[
        &["@agreement"],
        &["@intj"],
        &["@star"],
        &["@recursion"],
        &["@indirect"],
        &["@rel-linked"],
        &["@rel-unlinked"],
        &["@agreement", "--wordplus"],
        &["@shuttle-rels", "--wordplus"],
        &["@shuttle-no-rels"],
        &["@shuttle-rels"],
        &["@shuttle-unlinked"],
    ];
    let start = Instant::now();
    for extra in runs {
        let mut args = vec!["check", "--max-len", "8"];
        args.extend_from_slice(extra);
        let (code, out) = ugc(&args);
        if code != Some(0) {
            return Err(format!(
                "{} exited {:?}: {}",
                extra.join(" "),
                code,
                out.trim()
            ));
        }
    }
    let took = start.elapsed();
    if took > CHECK_BUDGET {
        return Err(format!("took {took:.1?}, budget {CHECK_BUDGET:?}"));
    }
    Ok(format!(
        "{} runs of check --max-len 8 exited 0 (9 fixtures incl. 2 Word+, 3 shuttle variants) in {took:.1?}",
        runs.len()
    ))
}

fn left_recursion() -> Verdict {
    let mut notes = Vec::new();
    for (name, src) in [
        ("direct", assets::LEFTREC_DIRECT),
        ("indirect", assets::LEFTREC_INDIRECT),
    ] {
        let before = ContextFreeGrammar::parse(src).unwrap();
        if !before.has_left_recursion() {
            return Err(format!("{name}: fixture is not left-recursive"));
        }
        let after = eliminate_left_recursion(&before).unwrap();
        if after.has_left_recursion() {
            return Err(format!(
                "{name}: leftmost cycle remains: {:?}",
                after.left_recursive()
            ));
        }
        let want = cfg_enumerate(&before, 6, 1_000_000).unwrap();
        let got = cfg_enumerate(&after, 6, 1_000_000).unwrap();
        if want != got || want.is_empty() {
            return Err(format!("{name}: languages differ up to length 6"));
        }
        let (code, out) = ugc(&["check", &format!("@leftrec-{name}.cfg"), "--max-len", "6"]);
        if code != Some(0) {
            return Err(format!("{name}: check exited {code:?}: {}", out.trim()));
        }
        notes.push(format!("{name} {} strings", want.len()));
    }
    // A -> A "b" | "c": c followed by up to five b.
    let direct = cfg_enumerate(
        &eliminate_left_recursion(&ContextFreeGrammar::parse(assets::LEFTREC_DIRECT).unwrap())
            .unwrap(),
        6,
        1000,
    )
    .unwrap();
    let expected: BTreeSet<Sentence> = (0..6)
        .map(|n| {
            std::iter::once("c")
                .chain(std::iter::repeat_n("b", n))
                .map(String::from)
                .collect()
        })
        .collect();
    if direct != expected {
        return Err(format!("direct: got {direct:?}"));
    }
    Ok(format!(
        "no leftmost cycles; exact match to length 6 ({})",
        notes.join(", ")
    ))
}

fn metrics(src: &str) -> MetricsReport {
    measure(&build_pfsg(&build(src).cfg).unwrap())
}

fn np_mean(m: &MetricsReport) -> f64 {
    m.per_category["np"].mean_transitions
}

fn size_ratios() -> Verdict {
    let base = metrics(assets::SHUTTLE_NO_RELS);
    let rels = metrics(assets::SHUTTLE_RELS);
    let unlinked = metrics(assets::SHUTTLE_UNLINKED);
    let linked_growth = rels.size() as f64 / base.size() as f64;
    let unlinked_growth = unlinked.size() as f64 / base.size() as f64;
    let np_ratio = np_mean(&rels) / np_mean(&unlinked);
    let np_growth = np_mean(&rels) / np_mean(&base);
    let line = format!(
        "size no_rels={} rels={} unlinked={}; rels/no_rels={linked_growth:.3} (>= {MIN_LINKED_GROWTH}), \
         unlinked/no_rels={unlinked_growth:.3} (<= {MAX_UNLINKED_GROWTH}), \
         NP mean transitions rels/no_rels={np_growth:.3} and rels/unlinked={np_ratio:.3} (>= {MIN_NP_RATIO})",
        base.size(),
        rels.size(),
        unlinked.size()
    );
    if linked_growth >= MIN_LINKED_GROWTH
        && unlinked_growth <= MAX_UNLINKED_GROWTH
        && np_ratio >= MIN_NP_RATIO
        && np_growth >= MIN_NP_RATIO
    {
        Ok(line)
    } else {
        Err(line)
    }
}

fn coverage() -> Verdict {
    let grammar = parse_grammar(assets::SHUTTLE_RELS).unwrap();
    let parser = CfgParser::new(&build(assets::SHUTTLE_RELS).cfg);
    let accepts = |s: &str| -> Result<bool, String> {
        let toks = tokenize(s);
        let c = parser.parse(&toks).accepted;
        let o = oracle_parse(&grammar, &toks, &ParseOptions::default())
            .map_err(|e| e.to_string())?
            .accepted;
        if c != o {
            return Err(format!("cfg and oracle disagree on {s:?}"));
        }
        Ok(c)
    };
    let corpus: Vec<&str> = assets::SHUTTLE_COVERAGE.lines().collect();
    for s in &corpus {
        if !accepts(s)? {
            return Err(format!("coverage sentence rejected: {s:?}"));
        }
    }
    let pairs = [
        (
            "the robot that measures the temperature",
            "the robot that measure the temperature",
        ),
        (
            "the robots that measure the temperature",
            "the robots that measures the temperature",
        ),
        (
            "the temperature that you measured",
            "the deck that you measured",
        ),
        (
            "the temperature that the robot measures",
            "the deck that the robot measures",
        ),
        (
            "measure it at flight deck at fifteen oh five",
            "measure it at flight deck in lower deck",
        ),
    ];
    for (good, bad) in pairs {
        if !accepts(good)? {
            return Err(format!("rejected {good:?}"));
        }
        if accepts(bad)? {
            return Err(format!("accepted {bad:?}"));
        }
    }
    Ok(format!(
        "{} coverage sentences parse under rels; {} agreement/sort pairs and the same-sort PP pair behave",
        corpus.len(),
        pairs.len() - 1
    ))
}

fn reduction() -> Verdict {
    let c = build(assets::SHUTTLE_RELS);
    let line = format!(
        "naive_count={} emitted_rules={} factor={} (>= {MIN_REDUCTION})",
        c.stats.naive_count, c.stats.emitted_rules, c.stats.reduction_factor
    );
    if c.stats.reduction_at_least(MIN_REDUCTION) {
        Ok(line)
    } else {
        Err(line)
    }
}

fn digest(path: &Path) -> String {
    Sha256::digest(std::fs::read(path).unwrap())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ugc-acceptance-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn determinism() -> Verdict {
    let (a, b) = (scratch("a"), scratch("b"));
    let mut files = 0;
    for variant in ["shuttle-rels", "shuttle-no-rels", "shuttle-unlinked"] {
        let input = format!("@{variant}");
        let (ca, oa) = ugc(&["compile", &input, "--out", a.to_str().unwrap()]);
        let (cb, ob) = ugc(&["compile", &input, "--out", b.to_str().unwrap()]);
        if ca != Some(0) || cb != Some(0) {
            return Err(format!("compile {variant} failed: {oa} {ob}"));
        }
        for ext in ["cfg", "pfsg", "metrics", "stats"] {
            let name = format!("{variant}.{ext}");
            if digest(&a.join(&name)) != digest(&b.join(&name)) {
                return Err(format!("{name} differs between runs"));
            }
            files += 1;
        }
    }
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
    Ok(format!(
        "{files} artifacts byte-identical across two runs (sha256)"
    ))
}

fn normalization() -> Verdict {
    let sources = [
        assets::AGREEMENT,
        assets::INTJ,
        assets::STAR,
        assets::RECURSION,
        assets::INDIRECT,
        assets::REL_LINKED,
        assets::REL_UNLINKED,
        assets::SHUTTLE_NO_RELS,
        assets::SHUTTLE_RELS,
        assets::SHUTTLE_UNLINKED,
    ];
    let mut nodes = 0;
    for src in sources {
        let set = build_pfsg(&build(src).cfg).unwrap();
        let bad = set.unnormalized(MASS_TOLERANCE);
        if let Some((g, n, m)) = bad.first() {
            return Err(format!("graph {g} node {n} has outgoing mass {m}"));
        }
        nodes += set.graphs.values().map(|g| g.nodes).sum::<usize>();
    }
    let yes = vec![tokenize("yes")];
    let from_cfg = perplexity(&ContextFreeGrammar::parse(assets::INTJ_CFG).unwrap(), &yes).unwrap();
    let from_grammar = perplexity(&build(assets::INTJ).cfg, &yes).unwrap();
    if from_cfg.value != 2.0 || from_grammar.value != 2.0 {
        return Err(format!(
            "perplexity of yes: {} (cfg), {} (grammar)",
            from_cfg.value, from_grammar.value
        ));
    }
    Ok(format!(
        "outgoing mass within {MASS_TOLERANCE:e} at all {nodes} nodes of 10 grammars; perplexity(yes | INTJ) = {}",
        from_cfg.value
    ))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("equivalence suite", equivalence_suite),
        ("left recursion", left_recursion),
        ("size ratios", size_ratios),
        ("linguistic coverage", coverage),
        ("demand-driven reduction", reduction),
        ("determinism", determinism),
        ("normalization and perplexity", normalization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {} {name}: PASS  {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL  {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
