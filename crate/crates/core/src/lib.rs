//! Compile feature-based unification grammars into context-free grammars
//! and probabilistic finite-state graph (PFSG) language models, and measure
//! how feature sharing inflates the result.
//!
//! The pipeline:
//!
//! 1. [`grammar::parse_grammar`] reads the grammar DSL.
//! 2. [`compiler::strip_features`] drops features not selected for the
//!    language model (semantic ones by default).
//! 3. [`compiler::compute_instantiations`] enumerates the feature
//!    instantiations of every rule that are licensed both bottom-up from the
//!    lexicon and top-down from the start symbol.
//! 4. [`compiler::merge_ranges`] and [`compiler::emit_cfg`] collapse those
//!    instantiations into a context-free grammar with mnemonic nonterminal
//!    names, and [`compiler::eliminate_left_recursion`] makes it suitable for
//!    graph construction.
//! 5. [`pfsg::build_pfsg`] turns each nonterminal into a probabilistic
//!    finite-state graph and [`pfsg::measure`] reports its size.
//!
//! [`oracle`] parses and enumerates directly on the unification grammar and
//! is the reference the compiled grammar is checked against.

pub mod analysis;
pub mod assets;
pub mod cfg;
pub mod check;
pub mod compiler;
pub mod grammar;
pub mod index;
pub mod lang;
pub mod oracle;
pub mod pfsg;
pub mod strings;

pub use cfg::{ContextFreeGrammar, Expr};
pub use grammar::{parse_grammar, Grammar};
