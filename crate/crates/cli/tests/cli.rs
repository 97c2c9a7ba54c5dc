use std::path::PathBuf;
use std::process::{Command, Output};

fn ugc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ugc"))
        .args(args)
        .output()
        .expect("run ugc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ugc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn compile_writes_four_artifacts() {
    let dir = scratch("compile");
    let o = ugc(&["compile", "@shuttle-rels", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("reduction_factor="));
    for ext in ["cfg", "pfsg", "metrics", "stats"] {
        assert!(dir.join(format!("shuttle-rels.{ext}")).is_file(), "{ext}");
    }
    let pfsg = std::fs::read_to_string(dir.join("shuttle-rels.pfsg")).unwrap();
    assert!(pfsg.starts_with("graph utt nodes="));
}

#[test]
fn malformed_grammar_is_an_input_error_with_a_line() {
    let dir = scratch("malformed");
    let path = dir.join("bad.ug");
    std::fs::write(&path, "start S\nrule r S -> X\n").unwrap();
    let o = ugc(&[
        "compile",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.ug:2:"), "{}", stderr(&o));
}

#[test]
fn check_agreement_passes() {
    let o = ugc(&["check", "@agreement", "--max-len", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("equivalent"));
}

#[test]
fn check_against_a_mutant_fails_with_witnesses() {
    let dir = scratch("mutant");
    let path = dir.join("mutant.cfg");
    std::fs::write(&path, "s -> \"dog\" \"barks\" | \"dogs\" \"barks\" ;\n").unwrap();
    let o = ugc(&["check", "@agreement", "--against", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let out = stdout(&o);
    assert!(out.contains("only in grammar: dogs bark"), "{out}");
    assert!(out.contains("only in cfg: dogs barks"), "{out}");
}

#[test]
fn caps_exit_with_three() {
    let o = ugc(&[
        "enumerate",
        "@shuttle-rels",
        "--max-len",
        "6",
        "--cap-strings",
        "100",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("100"));
    let o = ugc(&[
        "compile",
        "@shuttle-rels",
        "--cap-tuples",
        "10",
        "--out",
        scratch("cap").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn stats_on_intj() {
    let o = ugc(&["stats", "@intj.cfg"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "total_nodes=2"));
}

#[test]
fn parse_what_is_the_temperature() {
    for extra in [None, Some("--oracle")] {
        let mut args = vec!["parse", "@shuttle-rels", "what is the temperature"];
        args.extend(extra);
        let o = ugc(&args);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).starts_with("ACCEPT"), "{}", stdout(&o));
    }
    let o = ugc(&[
        "parse",
        "@shuttle-rels",
        "the robot that measure the temperature",
    ]);
    assert_eq!(stdout(&o), "REJECT\n");
}

#[test]
fn diff_puts_np_first() {
    let dir = scratch("diff");
    let out = dir.to_str().unwrap();
    for v in ["@shuttle-rels", "@shuttle-no-rels"] {
        assert_eq!(ugc(&["compile", v, "--out", out]).status.code(), Some(0));
    }
    let o = ugc(&[
        "diff",
        dir.join("shuttle-rels.metrics").to_str().unwrap(),
        dir.join("shuttle-no-rels.metrics").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let first_row = text.lines().nth(5).unwrap();
    assert!(first_row.trim_start().starts_with("np "), "{text}");
}

#[test]
fn unlink_flag_reproduces_the_unlinked_variant() {
    let a = ugc(&["stats", "@shuttle-rels", "--unlink", "rel_mod:agr,sort"]);
    let b = ugc(&["stats", "@shuttle-unlinked"]);
    let body = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("name=") && !l.starts_with("shuttle"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(body(&a), body(&b));
    let o = ugc(&["stats", "@shuttle-rels", "--unlink", "rel_mod:vform"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn variant_round_trips() {
    let dir = scratch("variant");
    let path = dir.join("k1.ug");
    let o = ugc(&[
        "variant",
        "@shuttle-rels",
        "--kwords",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = ugc(&["check", path.to_str().unwrap(), "--max-len", "6"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn enumerate_matches_the_oracle() {
    let a = ugc(&["enumerate", "@rel-linked", "--max-len", "5"]);
    let b = ugc(&["enumerate", "@rel-linked", "--max-len", "5", "--oracle"]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!stdout(&a).is_empty());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn perplexity_reports_out_of_language_sentences() {
    let dir = scratch("ppl");
    let corpus = dir.join("c.txt");
    std::fs::write(&corpus, "# comment\nyes\nmaybe\n").unwrap();
    let o = ugc(&["perplexity", "@intj.cfg", corpus.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("perplexity=2.000000000\n"), "{out}");
    assert!(out.contains("out of language: maybe"));
}

#[test]
fn unknown_asset_is_an_input_error() {
    let o = ugc(&["stats", "@nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("shuttle-rels"));
}
