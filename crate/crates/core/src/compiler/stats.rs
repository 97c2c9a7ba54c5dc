use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::cfg::ContextFreeGrammar;
use crate::grammar::Grammar;
use crate::index::IndexedGrammar;

use super::instantiate::layout;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpansionStats {
    /// Instantiations of every rule over full feature domains.
    pub naive_count: BigUint,
    /// Emitted alternatives that contain a nonterminal.
    pub emitted_rules: usize,
    /// `naive_count / max(emitted_rules, 1)`, three decimals.
    pub reduction_factor: String,
}

impl ExpansionStats {
    /// True when `naive_count >= k * max(emitted_rules, 1)`.
    pub fn reduction_at_least(&self, k: u64) -> bool {
        self.naive_count >= BigUint::from(k) * BigUint::from(self.emitted_rules.max(1))
    }
}

fn decimal(num: &BigUint, den: usize) -> String {
    let den = BigUint::from(den.max(1));
    let scaled = (num * 1000u32 + &den / 2u32) / &den;
    let int = &scaled / 1000u32;
    let frac = &scaled % 1000u32;
    format!("{}.{:0>3}", int, frac.to_string())
}

/// Naive instantiation count of a (stripped) grammar: per rule, the
/// product of domain sizes over its independent slots.
pub fn naive_count(grammar: &Grammar) -> BigUint {
    let g = IndexedGrammar::new(grammar, None);
    g.rules
        .iter()
        .map(|r| {
            layout(&g, r)
                .slots
                .iter()
                .fold(BigUint::one(), |acc, s| acc * BigUint::from(s.domain_size))
        })
        .fold(BigUint::zero(), |a, b| a + b)
}

/// Counts emitted alternatives that mention at least one nonterminal.
pub fn emitted_rules(cfg: &ContextFreeGrammar) -> usize {
    cfg.productions
        .values()
        .flat_map(|e| e.alternatives())
        .filter(|a| !a.is_terminal_only())
        .count()
}

/// `grammar` is the stripped grammar and `cfg` the grammar emitted from it,
/// before left-recursion elimination.
pub fn expansion_stats(grammar: &Grammar, cfg: &ContextFreeGrammar) -> ExpansionStats {
    let naive = naive_count(grammar);
    let emitted = emitted_rules(cfg);
    ExpansionStats {
        reduction_factor: decimal(&naive, emitted),
        naive_count: naive,
        emitted_rules: emitted,
    }
}
