use std::collections::{BTreeMap, BTreeSet};

use crate::cfg::{CfgError, ContextFreeGrammar, Expr};

/// Strongly connected components of a directed graph, each sorted, in
/// order of their smallest member.
fn components(graph: &BTreeMap<&str, BTreeSet<&str>>) -> Vec<Vec<String>> {
    let nodes: Vec<&str> = graph.keys().copied().collect();
    let index: BTreeMap<&str, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| {
            graph[n]
                .iter()
                .filter_map(|m| index.get(m).copied())
                .collect()
        })
        .collect();
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (i, ss) in succ.iter().enumerate() {
        for &j in ss {
            pred[j].push(i);
        }
    }
    // Kosaraju, iteratively.
    let mut visited = vec![false; nodes.len()];
    let mut finish = Vec::with_capacity(nodes.len());
    for root in 0..nodes.len() {
        if visited[root] {
            continue;
        }
        visited[root] = true;
        let mut stack = vec![(root, 0usize)];
        while let Some((v, k)) = stack.pop() {
            if k < succ[v].len() {
                stack.push((v, k + 1));
                let w = succ[v][k];
                if !visited[w] {
                    visited[w] = true;
                    stack.push((w, 0));
                }
            } else {
                finish.push(v);
            }
        }
    }
    let mut comp = vec![usize::MAX; nodes.len()];
    let mut comps: Vec<Vec<String>> = Vec::new();
    for &root in finish.iter().rev() {
        if comp[root] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = Vec::new();
        let mut stack = vec![root];
        comp[root] = id;
        while let Some(v) = stack.pop() {
            members.push(nodes[v].to_string());
            for &w in &pred[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort();
        comps.push(members);
    }
    comps.sort();
    comps
}

/// Rewrites an alternative into item sequences that start with a terminal
/// or a nonterminal reference.
fn normalize(items: Vec<Expr>) -> Vec<Vec<Expr>> {
    let mut items = items;
    match items.first().cloned() {
        None => vec![items],
        Some(Expr::Seq(inner)) => {
            items.splice(0..1, inner);
            normalize(items)
        }
        Some(Expr::Alt(alts)) => alts
            .into_iter()
            .flat_map(|a| {
                let mut v = vec![a];
                v.extend_from_slice(&items[1..]);
                normalize(v)
            })
            .collect(),
        Some(Expr::Star(x)) if items.len() > 1 => {
            // X* R  =  R | X X* R
            let rest = items[1..].to_vec();
            let mut out = normalize(rest);
            let mut again = vec![(*x).clone()];
            again.extend(items);
            out.extend(normalize(again));
            out
        }
        Some(_) => vec![items],
    }
}

fn split(e: &Expr) -> Vec<Vec<Expr>> {
    e.alternatives()
        .iter()
        .flat_map(|a| match a {
            Expr::Seq(items) => normalize(items.clone()),
            other => normalize(vec![other.clone()]),
        })
        .collect()
}

fn join(alts: Vec<Vec<Expr>>) -> Expr {
    let mut seen = BTreeSet::new();
    let alts: Vec<Expr> = alts
        .into_iter()
        .map(Expr::seq)
        .filter(|a| seen.insert(a.clone()))
        .collect();
    Expr::alt(alts)
}

fn leads_with(alt: &[Expr], name: &str) -> bool {
    matches!(alt.first(), Some(Expr::Ref(n)) if n == name)
}

/// Removes left recursion without changing the language.
///
/// Grammars with no leftmost cycle are returned unchanged. Otherwise each
/// cyclic component of the leftmost-reference graph is rewritten with the
/// classic substitution ordering; direct recursion `A -> A a | b` becomes
/// `A -> (b) (a)*`, so no new nonterminals are introduced.
pub fn eliminate_left_recursion(cfg: &ContextFreeGrammar) -> Result<ContextFreeGrammar, CfgError> {
    if !cfg.has_left_recursion() {
        return Ok(cfg.clone());
    }
    let graph = cfg.leftmost_graph();
    let cyclic: Vec<Vec<String>> = components(&graph)
        .into_iter()
        .filter(|c| c.len() > 1 || graph[c[0].as_str()].contains(c[0].as_str()))
        .collect();
    let mut out = cfg.clone();
    for comp in cyclic {
        let mut rules: BTreeMap<String, Vec<Vec<Expr>>> = comp
            .iter()
            .map(|n| (n.clone(), split(&cfg.productions[n])))
            .collect();
        for (i, ai) in comp.iter().enumerate() {
            for aj in &comp[..i] {
                let aj_alts = split(&out.productions[aj]);
                let mut next = Vec::new();
                for alt in rules.remove(ai).unwrap() {
                    if leads_with(&alt, aj) {
                        for d in &aj_alts {
                            let mut v = d.clone();
                            v.extend_from_slice(&alt[1..]);
                            next.extend(normalize(v));
                        }
                    } else {
                        next.push(alt);
                    }
                }
                rules.insert(ai.clone(), next);
            }
            let (alphas, betas): (Vec<_>, Vec<_>) =
                rules[ai].iter().cloned().partition(|a| leads_with(a, ai));
            let alphas: Vec<Vec<Expr>> = alphas
                .into_iter()
                .map(|a| a[1..].to_vec())
                .filter(|a| !a.is_empty())
                .collect();
            let body = if alphas.is_empty() {
                join(betas)
            } else if betas.is_empty() {
                return Err(CfgError::Unproductive { name: ai.clone() });
            } else {
                Expr::Seq(vec![join(betas), Expr::star(join(alphas))])
            };
            out.productions.insert(ai.clone(), body);
        }
    }
    debug_assert!(!out.has_left_recursion());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ContextFreeGrammar {
        ContextFreeGrammar::parse(text).unwrap()
    }

    #[test]
    fn direct_recursion_becomes_star() {
        let g = eliminate_left_recursion(&cfg("a -> a \"b\" | \"c\" ;")).unwrap();
        assert_eq!(g.productions["a"].to_string(), "\"c\" \"b\"*");
        assert!(!g.has_left_recursion());
    }

    #[test]
    fn indirect_cycle_is_removed() {
        let g = eliminate_left_recursion(&cfg(
            "s -> a ;\na -> b \"x\" | \"y\" ;\nb -> a \"z\" | \"w\" ;",
        ))
        .unwrap();
        assert!(!g.has_left_recursion());
        assert_eq!(g.productions["s"].to_string(), "a");
        assert_eq!(g.productions["a"].to_string(), "b \"x\" | \"y\"");
        assert_eq!(
            g.productions["b"].to_string(),
            "( \"y\" \"z\" | \"w\" ) ( \"x\" \"z\" )*"
        );
    }

    #[test]
    fn grammar_without_cycles_is_untouched() {
        let g = cfg("s -> \"a\" s | \"b\" ;");
        assert_eq!(eliminate_left_recursion(&g).unwrap(), g);
    }

    #[test]
    fn cycle_without_base_case_is_unproductive() {
        let g = ContextFreeGrammar {
            start: "a".into(),
            productions: [(
                "a".to_string(),
                Expr::seq(vec![Expr::nt("a"), Expr::term("b")]),
            )]
            .into_iter()
            .collect(),
        };
        assert_eq!(
            eliminate_left_recursion(&g),
            Err(CfgError::Unproductive { name: "a".into() })
        );
    }
}
