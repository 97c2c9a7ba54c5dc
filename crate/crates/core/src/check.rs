//! Language equivalence between a grammar and its compiled CFG, up to a
//! length bound.

use thiserror::Error;

use crate::cfg::ContextFreeGrammar;
use crate::grammar::Grammar;
use crate::lang::Dawg;
use crate::oracle::{oracle_language, OracleError};
use crate::pfsg::{CfgParser, PfsgError};
use crate::strings::Sentence;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum CheckError {
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("compiled grammar: {0}")]
    Compiled(#[from] PfsgError),
}

/// Witness strings reported per side on a mismatch.
pub const WITNESSES: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub max_len: usize,
    pub oracle_count: u128,
    pub compiled_count: u128,
    /// Generated by the grammar but not by the CFG, shortest first.
    pub missing: Vec<Sentence>,
    /// Generated by the CFG but not by the grammar, shortest first.
    pub extra: Vec<Sentence>,
}

impl CheckReport {
    pub fn equivalent(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

/// Compares the strings of length `1..=max_len` of `grammar` (restricted
/// to `features`, all when `None`) with those of `cfg`. Both languages are
/// built as shared automata; `cap` bounds the automaton nodes of each.
pub fn check_equivalence(
    grammar: &Grammar,
    features: Option<&[String]>,
    cfg: &ContextFreeGrammar,
    max_len: usize,
    cap: usize,
) -> Result<CheckReport, CheckError> {
    let mut dawg = Dawg::default();
    let want = oracle_language(grammar, max_len, features, &mut dawg, cap)?;
    let base = dawg.len();
    dawg.forget();
    let got = CfgParser::new(cfg).language(max_len, &mut dawg, base.saturating_add(cap))?;
    let missing = dawg.difference(want, got);
    let extra = dawg.difference(got, want);
    Ok(CheckReport {
        max_len,
        oracle_count: dawg.count(want),
        compiled_count: dawg.count(got),
        missing: dawg.sample(missing, WITNESSES),
        extra: dawg.sample(extra, WITNESSES),
    })
}
