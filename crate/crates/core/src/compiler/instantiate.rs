use std::collections::{BTreeSet, HashSet};

use crate::grammar::Grammar;
use crate::index::{mask_values, IRule, IndexedGrammar, Mask, Slot};

use super::CompileError;

pub const DEFAULT_TUPLE_CAP: usize = 10_000_000;

/// One independently valued position of a rule: either a variable (possibly
/// shared by several categories) or a single constrained or unconstrained
/// feature of one category.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotInfo {
    /// Index of the feature in the (stripped) grammar's declarations.
    pub feature: usize,
    pub feature_name: String,
    pub var: Option<String>,
    /// Values the slot admits before any filtering.
    pub allowed: Mask,
    pub domain_size: usize,
    /// (position, dimension) pairs; position 0 is the mother.
    pub occurrences: Vec<(usize, usize)>,
    /// Shared by two or more daughter features. Such slots cannot be merged
    /// into value ranges without changing the language.
    pub linked: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InstantiationSet {
    pub rule_id: String,
    /// Slots in feature-declaration order.
    pub slots: Vec<SlotInfo>,
    /// Full assignments, one value index per slot, sorted.
    pub tuples: Vec<Vec<u8>>,
}

impl InstantiationSet {
    /// Slot holding (position, dimension).
    pub fn slot_at(&self, pos: usize, dim: usize) -> usize {
        self.slots
            .iter()
            .position(|s| s.occurrences.contains(&(pos, dim)))
            .expect("every category dimension has a slot")
    }
}

/// Instantiation sets of every rule, in rule order.
#[derive(Clone, Debug)]
pub struct Instantiations {
    pub sets: Vec<InstantiationSet>,
}

impl Instantiations {
    pub fn get(&self, rule_id: &str) -> Option<&InstantiationSet> {
        self.sets.iter().find(|s| s.rule_id == rule_id)
    }

    pub fn total_tuples(&self) -> usize {
        self.sets.iter().map(|s| s.tuples.len()).sum()
    }
}

/// Slot layout of one rule plus the (position, dimension) → slot map.
pub(crate) struct Layout {
    pub slots: Vec<SlotInfo>,
    pub slot_of: Vec<Vec<usize>>,
}

pub(crate) fn layout(g: &IndexedGrammar, rule: &IRule) -> Layout {
    let mut slots: Vec<SlotInfo> = Vec::new();
    let mut var_slot: Vec<Option<usize>> = vec![None; rule.var_features.len()];
    let cats = std::iter::once(&rule.mother).chain(&rule.daughters);
    for (pos, cat) in cats.enumerate() {
        for (dim, slot) in cat.slots.iter().enumerate() {
            let feature = g.dims[cat.sym][dim];
            let make = |var: Option<String>, allowed| SlotInfo {
                feature,
                feature_name: g.feature_names[feature].clone(),
                var,
                allowed,
                domain_size: g.domain_size(feature),
                occurrences: vec![(pos, dim)],
                linked: false,
            };
            match *slot {
                Slot::Mask(m) => slots.push(make(None, m)),
                Slot::Var(v) => match var_slot[v] {
                    Some(i) => slots[i].occurrences.push((pos, dim)),
                    None => {
                        var_slot[v] = Some(slots.len());
                        slots.push(make(Some(rule.var_names[v].clone()), g.full(feature)));
                    }
                },
            }
        }
    }
    let mut order: Vec<usize> = (0..slots.len()).collect();
    order.sort_by_key(|&i| (slots[i].feature, slots[i].occurrences[0]));
    let mut slots: Vec<SlotInfo> = order.into_iter().map(|i| slots[i].clone()).collect();
    for s in &mut slots {
        s.linked = s.occurrences.iter().filter(|(p, _)| *p > 0).count() >= 2;
    }
    let mut slot_of: Vec<Vec<usize>> = std::iter::once(&rule.mother)
        .chain(&rule.daughters)
        .map(|c| vec![usize::MAX; c.slots.len()])
        .collect();
    for (i, s) in slots.iter().enumerate() {
        for &(p, d) in &s.occurrences {
            slot_of[p][d] = i;
        }
    }
    Layout { slots, slot_of }
}

type Assignment = Vec<u8>;

struct Search<'a> {
    rule: &'a IRule,
    layout: &'a Layout,
    support: &'a [HashSet<Assignment>],
}

impl Search<'_> {
    /// Calls `emit` with every tuple whose daughters are all supported.
    fn run(
        &self,
        emit: &mut dyn FnMut(&[u8]) -> Result<(), CompileError>,
    ) -> Result<(), CompileError> {
        let mut binding: Vec<Option<u8>> = vec![None; self.layout.slots.len()];
        self.daughter(0, &mut binding, emit)
    }

    fn daughter(
        &self,
        k: usize,
        binding: &mut Vec<Option<u8>>,
        emit: &mut dyn FnMut(&[u8]) -> Result<(), CompileError>,
    ) -> Result<(), CompileError> {
        if k == self.rule.daughters.len() {
            return self.free(0, binding, emit);
        }
        let sym = self.rule.daughters[k].sym;
        let slot_of = &self.layout.slot_of[k + 1];
        for assignment in &self.support[sym] {
            let mut bound = Vec::new();
            let mut ok = true;
            for (dim, &v) in assignment.iter().enumerate() {
                let s = slot_of[dim];
                match binding[s] {
                    Some(b) if b != v => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        if self.layout.slots[s].allowed & (1 << v) == 0 {
                            ok = false;
                            break;
                        }
                        binding[s] = Some(v);
                        bound.push(s);
                    }
                }
            }
            if ok {
                self.daughter(k + 1, binding, emit)?;
            }
            for s in bound {
                binding[s] = None;
            }
        }
        Ok(())
    }

    /// Enumerates slots no daughter fixed (those occurring only on the mother).
    fn free(
        &self,
        from: usize,
        binding: &mut Vec<Option<u8>>,
        emit: &mut dyn FnMut(&[u8]) -> Result<(), CompileError>,
    ) -> Result<(), CompileError> {
        match (from..binding.len()).find(|&s| binding[s].is_none()) {
            None => {
                let tuple: Vec<u8> = binding.iter().map(|b| b.unwrap()).collect();
                emit(&tuple)
            }
            Some(s) => {
                for v in mask_values(self.layout.slots[s].allowed) {
                    binding[s] = Some(v);
                    self.free(s + 1, binding, emit)?;
                }
                binding[s] = None;
                Ok(())
            }
        }
    }
}

fn project(tuple: &[u8], slot_of: &[usize]) -> Assignment {
    slot_of.iter().map(|&s| tuple[s]).collect()
}

fn lexical_support(g: &IndexedGrammar) -> Vec<HashSet<Assignment>> {
    let mut support = vec![HashSet::new(); g.symbols.len()];
    for e in &g.lexicon {
        let mut partial: Vec<Assignment> = vec![Vec::new()];
        for slot in &e.cat.slots {
            let Slot::Mask(m) = *slot else {
                unreachable!("lexicon has no variables")
            };
            partial = partial
                .into_iter()
                .flat_map(|p| {
                    mask_values(m).map(move |v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        support[e.cat.sym].extend(partial);
    }
    support
}

/// Enumerates, for every rule, the feature instantiations that are both
/// supported bottom-up (every daughter derivable from the lexicon) and
/// demanded top-down (the mother reachable from the start symbol).
///
/// `grammar` should already be stripped to the features the language model
/// keeps. Fails when the start symbol derives nothing or when more than
/// `tuple_cap` tuples are produced.
pub fn compute_instantiations(
    grammar: &Grammar,
    tuple_cap: usize,
) -> Result<Instantiations, CompileError> {
    let g = IndexedGrammar::new(grammar, None);
    let layouts: Vec<Layout> = g.rules.iter().map(|r| layout(&g, r)).collect();

    // Bottom-up: grow the supported categories to a fixpoint.
    let mut support = lexical_support(&g);
    loop {
        let mut changed = false;
        for (rule, lay) in g.rules.iter().zip(&layouts) {
            let mut found: Vec<Assignment> = Vec::new();
            let mut produced = 0usize;
            let search = Search {
                rule,
                layout: lay,
                support: &support,
            };
            search.run(&mut |t| {
                produced += 1;
                if produced > tuple_cap {
                    return Err(CompileError::TupleLimit { cap: tuple_cap });
                }
                let m = project(t, &lay.slot_of[0]);
                if !support[rule.mother.sym].contains(&m) {
                    found.push(m);
                }
                Ok(())
            })?;
            for m in found {
                changed |= support[rule.mother.sym].insert(m);
            }
        }
        if !changed {
            break;
        }
    }
    if support[g.start].is_empty() {
        return Err(CompileError::EmptyLanguage {
            start: g.symbols[g.start].clone(),
        });
    }

    // Every supported tuple, per rule.
    let mut all: Vec<Vec<Vec<u8>>> = Vec::with_capacity(g.rules.len());
    let mut total = 0usize;
    for (rule, lay) in g.rules.iter().zip(&layouts) {
        let mut tuples = Vec::new();
        Search {
            rule,
            layout: lay,
            support: &support,
        }
        .run(&mut |t| {
            total += 1;
            if total > tuple_cap {
                return Err(CompileError::TupleLimit { cap: tuple_cap });
            }
            tuples.push(t.to_vec());
            Ok(())
        })?;
        all.push(tuples);
    }

    // Top-down: demand flows from the start symbol through supported tuples.
    // Daughters of retained tuples are supported by construction, so one
    // bottom-up and one top-down pass reach the joint fixpoint.
    let mut demand: Vec<HashSet<Assignment>> = vec![HashSet::new(); g.symbols.len()];
    demand[g.start] = support[g.start].clone();
    loop {
        let mut changed = false;
        for ((rule, lay), tuples) in g.rules.iter().zip(&layouts).zip(&all) {
            for t in tuples {
                if !demand[rule.mother.sym].contains(&project(t, &lay.slot_of[0])) {
                    continue;
                }
                for (k, d) in rule.daughters.iter().enumerate() {
                    changed |= demand[d.sym].insert(project(t, &lay.slot_of[k + 1]));
                }
            }
        }
        if !changed {
            break;
        }
    }

    let sets = g
        .rules
        .iter()
        .zip(layouts)
        .zip(all)
        .map(|((rule, lay), tuples)| {
            let kept: BTreeSet<Vec<u8>> = tuples
                .into_iter()
                .filter(|t| demand[rule.mother.sym].contains(&project(t, &lay.slot_of[0])))
                .collect();
            InstantiationSet {
                rule_id: rule.id.clone(),
                slots: lay.slots,
                tuples: kept.into_iter().collect(),
            }
        })
        .collect();
    Ok(Instantiations { sets })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    #[test]
    fn demand_and_support_filter_np_assignments() {
        // Only sort=loc is ever realised lexically, so of the 6 candidate
        // (agr, sort) assignments for the NP rule just the 2 loc ones survive.
        let g = parse_grammar(
            "\
feature agr syn {sg,pl}
feature sort syn {loc,time,agent}
start S
rule s: S -> NP:[agr=A, sort=T] V:[agr=A]
rule np: NP:[agr=A, sort=T] -> N:[agr=A, sort=T]
lex \"deck\": N:[agr=sg, sort=loc]
lex \"decks\": N:[agr=pl, sort=loc]
lex \"is\": V:[agr=sg]
lex \"are\": V:[agr=pl]
",
        )
        .unwrap();
        let inst = compute_instantiations(&g, DEFAULT_TUPLE_CAP).unwrap();
        let np = inst.get("np").unwrap();
        assert_eq!(np.slots.len(), 2);
        assert_eq!(np.tuples, vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn undemanded_tuples_are_dropped() {
        let g = parse_grammar(
            "\
feature f syn {a,b}
start S
rule s: S -> X:[f=a]
rule x: X:[f=F] -> Y:[f=F]
lex \"ya\": Y:[f=a]
lex \"yb\": Y:[f=b]
",
        )
        .unwrap();
        let inst = compute_instantiations(&g, DEFAULT_TUPLE_CAP).unwrap();
        assert_eq!(inst.get("x").unwrap().tuples, vec![vec![0]]);
    }

    #[test]
    fn unsupported_start_is_an_error() {
        let g = parse_grammar(
            "feature f syn {a,b}\nstart S\nrule s: S -> X:[f=a]\nlex \"x\": X:[f=b]\n",
        )
        .unwrap();
        assert_eq!(
            compute_instantiations(&g, DEFAULT_TUPLE_CAP).unwrap_err(),
            CompileError::EmptyLanguage { start: "S".into() }
        );
    }

    #[test]
    fn linked_relative_clause_fixture_has_four_tuples() {
        // agr and sort shared by NP, NP and REL: 16 candidate value pairs
        // for the four occurrences collapse to 2 x 2 consistent tuples.
        let g = parse_grammar(crate::assets::REL_LINKED).unwrap();
        let inst = compute_instantiations(&g, DEFAULT_TUPLE_CAP).unwrap();
        let rel = inst.get("rel_mod").unwrap();
        assert_eq!(rel.tuples.len(), 4);
        assert!(rel.slots.iter().all(|s| s.linked));
    }

    #[test]
    fn tuple_cap_is_enforced() {
        let g = parse_grammar(crate::assets::REL_LINKED).unwrap();
        assert_eq!(
            compute_instantiations(&g, 3).unwrap_err(),
            CompileError::TupleLimit { cap: 3 }
        );
    }
}
