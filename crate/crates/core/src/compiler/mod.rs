//! Unification grammar to context-free grammar.

mod emit;
mod instantiate;
mod leftrec;
mod merge;
mod stats;
mod strip;

use thiserror::Error;

use crate::cfg::{CfgError, ContextFreeGrammar};
use crate::grammar::Grammar;

pub use emit::emit_cfg;
pub use instantiate::{
    compute_instantiations, InstantiationSet, Instantiations, SlotInfo, DEFAULT_TUPLE_CAP,
};
pub use leftrec::eliminate_left_recursion;
pub use merge::{merge_ranges, MergedInstance, MergedRule};
pub use stats::{emitted_rules, expansion_stats, naive_count, ExpansionStats};
pub use strip::{strip_features, FeatureSpec};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("start symbol `{start}` derives no string")]
    EmptyLanguage { start: String },
    #[error("more than {cap} rule instantiations")]
    TupleLimit { cap: usize },
    #[error("no merged instances for rule `{0}`")]
    MissingRule(String),
    #[error("nonterminal `{0}` has no alternatives")]
    EmptyProduction(String),
    #[error(transparent)]
    Cfg(#[from] CfgError),
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    pub features: FeatureSpec,
    pub tuple_cap: usize,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            features: FeatureSpec::default(),
            tuple_cap: DEFAULT_TUPLE_CAP,
        }
    }
}

/// Everything the pipeline produces for one grammar.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub stripped: Grammar,
    pub merged: Vec<MergedRule>,
    /// Emitted grammar, possibly left-recursive.
    pub emitted: ContextFreeGrammar,
    /// Left-recursion-free grammar ready for graph construction.
    pub cfg: ContextFreeGrammar,
    pub stats: ExpansionStats,
}

pub fn compile(grammar: &Grammar, options: &CompileOptions) -> Result<Compiled, CompileError> {
    let stripped = strip_features(grammar, &options.features)?;
    let inst = compute_instantiations(&stripped, options.tuple_cap)?;
    let merged: Vec<MergedRule> = inst.sets.iter().map(merge_ranges).collect();
    let emitted = emit_cfg(&stripped, &merged)?;
    let cfg = eliminate_left_recursion(&emitted)?;
    let stats = expansion_stats(&stripped, &emitted);
    Ok(Compiled {
        stripped,
        merged,
        emitted,
        cfg,
        stats,
    })
}
