//! Bundled grammars and corpora.

pub const AGREEMENT: &str = include_str!("../assets/fixtures/agreement.ug");
pub const INTJ: &str = include_str!("../assets/fixtures/intj.ug");
pub const STAR: &str = include_str!("../assets/fixtures/star.ug");
pub const RECURSION: &str = include_str!("../assets/fixtures/recursion.ug");
pub const INDIRECT: &str = include_str!("../assets/fixtures/indirect.ug");
pub const REL_LINKED: &str = include_str!("../assets/fixtures/rel_linked.ug");
pub const REL_UNLINKED: &str = include_str!("../assets/fixtures/rel_unlinked.ug");
pub const LEFTREC_DIRECT: &str = include_str!("../assets/fixtures/leftrec_direct.cfg");
pub const LEFTREC_INDIRECT: &str = include_str!("../assets/fixtures/leftrec_indirect.cfg");
pub const INTJ_CFG: &str = include_str!("../assets/fixtures/intj.cfg");
pub const SHUTTLE_RELS: &str = include_str!("../assets/shuttle/rels.ug");
pub const SHUTTLE_NO_RELS: &str = include_str!("../assets/shuttle/no_rels.ug");
pub const SHUTTLE_UNLINKED: &str = include_str!("../assets/shuttle/unlinked.ug");
/// One sentence per line.
pub const SHUTTLE_COVERAGE: &str = include_str!("../assets/shuttle/coverage.txt");

/// Bundled assets by name, as accepted by the command line after `@`.
pub const BUNDLED: &[(&str, &str)] = &[
    ("agreement", AGREEMENT),
    ("intj", INTJ),
    ("star", STAR),
    ("recursion", RECURSION),
    ("indirect", INDIRECT),
    ("rel-linked", REL_LINKED),
    ("rel-unlinked", REL_UNLINKED),
    ("leftrec-direct.cfg", LEFTREC_DIRECT),
    ("leftrec-indirect.cfg", LEFTREC_INDIRECT),
    ("intj.cfg", INTJ_CFG),
    ("shuttle-rels", SHUTTLE_RELS),
    ("shuttle-no-rels", SHUTTLE_NO_RELS),
    ("shuttle-unlinked", SHUTTLE_UNLINKED),
    ("shuttle-coverage", SHUTTLE_COVERAGE),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
