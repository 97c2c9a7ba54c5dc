//! Integer-indexed view of a validated grammar shared by the compiler and
//! the oracle. Values become bit positions in a `u64` mask, symbols and
//! features become indices.

use std::collections::BTreeMap;

use crate::grammar::{Category, Constraint, Grammar};

pub type Mask = u64;

pub fn full_mask(size: usize) -> Mask {
    if size >= 64 {
        u64::MAX
    } else {
        (1u64 << size) - 1
    }
}

pub fn mask_values(mask: Mask) -> impl Iterator<Item = u8> {
    (0..64u8).filter(move |i| mask & (1u64 << i) != 0)
}

/// Constraint on one dimension of an indexed category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    Mask(Mask),
    Var(usize),
}

#[derive(Clone, Debug)]
pub struct ICat {
    pub sym: usize,
    /// One entry per dimension of `sym`, aligned with `IndexedGrammar::dims`.
    pub slots: Vec<Slot>,
}

#[derive(Clone, Debug)]
pub struct IRule {
    pub id: String,
    pub mother: ICat,
    pub daughters: Vec<ICat>,
    /// Feature index of each rule variable.
    pub var_features: Vec<usize>,
    pub var_names: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ILex {
    pub tokens: Vec<String>,
    pub cat: ICat,
}

#[derive(Clone, Debug)]
pub struct IndexedGrammar {
    pub feature_names: Vec<String>,
    pub domains: Vec<Vec<String>>,
    pub symbols: Vec<String>,
    pub symbol_ids: BTreeMap<String, usize>,
    /// Feature indices carried by each symbol, in declaration order.
    pub dims: Vec<Vec<usize>>,
    pub rules: Vec<IRule>,
    pub lexicon: Vec<ILex>,
    pub start: usize,
}

impl IndexedGrammar {
    /// Indexes `g`. When `filter` is given, constraints on features outside
    /// it are ignored.
    pub fn new(g: &Grammar, filter: Option<&[String]>) -> Self {
        let keep = |name: &str| filter.is_none_or(|f| f.iter().any(|k| k == name));
        let mut g = g.clone();
        if filter.is_some() {
            let strip = |c: &mut Category| c.constraints.retain(|k, _| keep(k));
            for r in &mut g.rules {
                strip(&mut r.mother);
                r.daughters.iter_mut().for_each(strip);
            }
            for e in &mut g.lexicon {
                strip(&mut e.category);
            }
        }
        let feature_names: Vec<String> = g.features.iter().map(|f| f.name.clone()).collect();
        let domains: Vec<Vec<String>> = g.features.iter().map(|f| f.domain.clone()).collect();
        let symbols: Vec<String> = g.symbols().into_iter().map(str::to_string).collect();
        let symbol_ids: BTreeMap<String, usize> = symbols
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let dims_by_name = g.symbol_dims();
        let dims: Vec<Vec<usize>> = symbols
            .iter()
            .map(|s| dims_by_name.get(s).cloned().unwrap_or_default())
            .collect();

        let index_cat = |cat: &Category, vars: &mut Vec<(String, usize)>| -> ICat {
            let sym = symbol_ids[&cat.symbol];
            let slots = dims[sym]
                .iter()
                .map(|&f| {
                    let decl = &g.features[f];
                    match cat.constraints.get(&decl.name) {
                        None => Slot::Mask(full_mask(decl.domain.len())),
                        Some(Constraint::Atom(v)) => {
                            Slot::Mask(1 << decl.value_index(v).expect("validated value"))
                        }
                        Some(Constraint::Subset(vs)) => Slot::Mask(
                            vs.iter()
                                .map(|v| 1u64 << decl.value_index(v).expect("validated value"))
                                .fold(0, |a, b| a | b),
                        ),
                        Some(Constraint::Var(name)) => {
                            let idx = match vars.iter().position(|(n, _)| n == name) {
                                Some(i) => i,
                                None => {
                                    vars.push((name.clone(), f));
                                    vars.len() - 1
                                }
                            };
                            Slot::Var(idx)
                        }
                    }
                })
                .collect();
            ICat { sym, slots }
        };

        let rules = g
            .rules
            .iter()
            .map(|r| {
                let mut vars = Vec::new();
                let mother = index_cat(&r.mother, &mut vars);
                let daughters = r
                    .daughters
                    .iter()
                    .map(|d| index_cat(d, &mut vars))
                    .collect();
                IRule {
                    id: r.id.clone(),
                    mother,
                    daughters,
                    var_features: vars.iter().map(|(_, f)| *f).collect(),
                    var_names: vars.into_iter().map(|(n, _)| n).collect(),
                }
            })
            .collect();
        let lexicon = g
            .lexicon
            .iter()
            .map(|e| ILex {
                tokens: e.surface.clone(),
                cat: index_cat(&e.category, &mut Vec::new()),
            })
            .collect();
        let start = symbol_ids[&g.start];
        IndexedGrammar {
            feature_names,
            domains,
            symbols,
            symbol_ids,
            dims,
            rules,
            lexicon,
            start,
        }
    }

    pub fn domain_size(&self, feature: usize) -> usize {
        self.domains[feature].len()
    }

    pub fn full(&self, feature: usize) -> Mask {
        full_mask(self.domain_size(feature))
    }

    /// Smallest number of tokens each symbol can derive, ignoring features.
    /// `usize::MAX` marks symbols that derive nothing.
    pub fn min_yield(&self) -> Vec<usize> {
        let mut min = vec![usize::MAX; self.symbols.len()];
        for e in &self.lexicon {
            let s = e.cat.sym;
            min[s] = min[s].min(e.tokens.len());
        }
        loop {
            let mut changed = false;
            for r in &self.rules {
                let total = r
                    .daughters
                    .iter()
                    .map(|d| min[d.sym])
                    .try_fold(0usize, |acc, m| (m != usize::MAX).then(|| acc + m));
                if let Some(t) = total {
                    if t < min[r.mother.sym] {
                        min[r.mother.sym] = t;
                        changed = true;
                    }
                }
            }
            if !changed {
                return min;
            }
        }
    }
}
