use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use crate::cfg::{ContextFreeGrammar, Expr};
use crate::grammar::Grammar;
use crate::index::{full_mask, mask_values, IndexedGrammar, Mask, Slot};

use super::merge::MergedRule;
use super::CompileError;

/// A nonterminal of the emitted grammar: a symbol plus one value set per
/// dimension. It stands for every category inside the rectangle.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Nt {
    sym: usize,
    masks: Vec<Mask>,
}

fn nt_name(g: &IndexedGrammar, nt: &Nt) -> String {
    let mut name = g.symbols[nt.sym].to_lowercase();
    for (&f, &m) in g.dims[nt.sym].iter().zip(&nt.masks) {
        let values: Vec<&str> = mask_values(m)
            .map(|v| g.domains[f][v as usize].as_str())
            .collect();
        name.push_str("__");
        name.push_str(&g.feature_names[f]);
        name.push('-');
        name.push_str(&values.join("+"));
    }
    name
}

/// Builds the context-free grammar reachable from the start symbol.
///
/// `grammar` must be the stripped grammar the instantiations were computed
/// from, and `merged` must hold one entry per rule.
pub fn emit_cfg(
    grammar: &Grammar,
    merged: &[MergedRule],
) -> Result<ContextFreeGrammar, CompileError> {
    let g = IndexedGrammar::new(grammar, None);
    let by_id: HashMap<&str, &MergedRule> =
        merged.iter().map(|m| (m.rule_id.as_str(), m)).collect();

    // For every rule: slot index of each (position, dimension).
    let mut rules_of: Vec<Vec<(usize, Vec<Vec<usize>>)>> = vec![Vec::new(); g.symbols.len()];
    for (ri, rule) in g.rules.iter().enumerate() {
        let m = by_id
            .get(rule.id.as_str())
            .ok_or_else(|| CompileError::MissingRule(rule.id.clone()))?;
        let mut slot_of: Vec<Vec<usize>> = std::iter::once(&rule.mother)
            .chain(&rule.daughters)
            .map(|c| vec![0; c.slots.len()])
            .collect();
        for (i, s) in m.slots.iter().enumerate() {
            for &(p, d) in &s.occurrences {
                slot_of[p][d] = i;
            }
        }
        rules_of[rule.mother.sym].push((ri, slot_of));
    }

    let start = Nt {
        sym: g.start,
        masks: g.dims[g.start]
            .iter()
            .map(|&f| full_mask(g.domain_size(f)))
            .collect(),
    };
    let mut names: HashMap<Nt, String> = HashMap::new();
    let mut intern = |nt: &Nt, queue: &mut VecDeque<(Nt, String)>| -> String {
        if let Some(n) = names.get(nt) {
            return n.clone();
        }
        let name = nt_name(&g, nt);
        names.insert(nt.clone(), name.clone());
        queue.push_back((nt.clone(), name.clone()));
        name
    };

    let mut queue = VecDeque::new();
    let start_name = intern(&start, &mut queue);
    let mut productions = BTreeMap::new();
    while let Some((nt, name)) = queue.pop_front() {
        let mut alts: Vec<Expr> = Vec::new();
        let mut seen: HashSet<Expr> = HashSet::new();
        for (ri, slot_of) in &rules_of[nt.sym] {
            let rule = &g.rules[*ri];
            let m = by_id[rule.id.as_str()];
            'inst: for inst in &m.instances {
                let mut masks = inst.masks.clone();
                for (d, &s) in slot_of[0].iter().enumerate() {
                    masks[s] &= nt.masks[d];
                    if masks[s] == 0 {
                        continue 'inst;
                    }
                }
                let items: Vec<Expr> = rule
                    .daughters
                    .iter()
                    .enumerate()
                    .map(|(k, dcat)| {
                        let d = Nt {
                            sym: dcat.sym,
                            masks: slot_of[k + 1].iter().map(|&s| masks[s]).collect(),
                        };
                        Expr::nt(&intern(&d, &mut queue))
                    })
                    .collect();
                let alt = Expr::seq(items);
                if seen.insert(alt.clone()) {
                    alts.push(alt);
                }
            }
        }
        let mut lex: Vec<Expr> = Vec::new();
        for e in g.lexicon.iter().filter(|e| e.cat.sym == nt.sym) {
            let hit = e.cat.slots.iter().zip(&nt.masks).all(|(s, &m)| match s {
                Slot::Mask(x) => x & m != 0,
                Slot::Var(_) => true,
            });
            if !hit {
                continue;
            }
            let surface = Expr::seq(e.tokens.iter().map(|t| Expr::term(t)).collect());
            if seen.insert(surface.clone()) {
                lex.push(surface);
            }
        }
        if !lex.is_empty() {
            if alts.is_empty() {
                alts = lex;
            } else {
                alts.push(Expr::alt(lex));
            }
        }
        if alts.is_empty() {
            return Err(CompileError::EmptyProduction(name));
        }
        productions.insert(name, Expr::alt(alts));
    }
    Ok(ContextFreeGrammar {
        start: start_name,
        productions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{compute_instantiations, merge_ranges, DEFAULT_TUPLE_CAP};
    use crate::grammar::parse_grammar;

    fn compile(src: &str) -> ContextFreeGrammar {
        let g = parse_grammar(src).unwrap();
        let inst = compute_instantiations(&g, DEFAULT_TUPLE_CAP).unwrap();
        let merged: Vec<_> = inst.sets.iter().map(merge_ranges).collect();
        emit_cfg(&g, &merged).unwrap()
    }

    #[test]
    fn agreement_splits_np_by_number() {
        let cfg = compile(crate::assets::AGREEMENT);
        let names: Vec<&str> = cfg.productions.keys().map(String::as_str).collect();
        assert!(names.contains(&"np__agr-sg"));
        assert!(names.contains(&"np__agr-pl"));
        assert_eq!(cfg.start, "s");
        assert_eq!(
            cfg.productions["s"].to_string(),
            "np__agr-sg vp__agr-sg | np__agr-pl vp__agr-pl"
        );
    }

    #[test]
    fn unlinked_feature_collapses_to_range() {
        let cfg = compile(
            "\
feature sort syn {loc,time}
start S
rule s: S -> V NP:[sort=T]
rule np: NP:[sort=T] -> N:[sort=T]
lex \"see\": V
lex \"deck\": N:[sort=loc]
lex \"noon\": N:[sort=time]
",
        );
        assert_eq!(cfg.productions["s"].to_string(), "v np__sort-loc+time");
        assert_eq!(
            cfg.productions["np__sort-loc+time"].to_string(),
            "n__sort-loc+time"
        );
        assert_eq!(
            cfg.productions["n__sort-loc+time"].to_string(),
            "\"deck\" | \"noon\""
        );
    }

    #[test]
    fn lexical_and_rule_alternatives_are_grouped() {
        let cfg = compile(
            "\
start S
rule s: S -> X
rule x: X -> Y Y
lex \"a\": X
lex \"b\": X
lex \"y\": Y
",
        );
        assert_eq!(cfg.productions["x"].to_string(), "y y | ( \"a\" | \"b\" )");
    }
}
