use ugc_core::assets;
use ugc_core::check::check_equivalence;
use ugc_core::compiler::{compile, CompileOptions};
use ugc_core::parse_grammar;

fn equivalent(src: &str, max_len: usize) {
    let g = parse_grammar(src).unwrap();
    let c = compile(&g, &CompileOptions::default()).unwrap();
    assert!(!c.cfg.has_left_recursion());
    let r = check_equivalence(&c.stripped, None, &c.cfg, max_len, 1_000_000).unwrap();
    assert!(r.equivalent(), "{:?}", r);
    assert!(r.oracle_count > 0);
}

#[test]
fn bundled_fixtures_compile_to_equivalent_cfgs() {
    for src in [
        assets::AGREEMENT,
        assets::INTJ,
        assets::STAR,
        assets::RECURSION,
        assets::INDIRECT,
        assets::REL_LINKED,
        assets::REL_UNLINKED,
    ] {
        equivalent(src, 8);
    }
}
