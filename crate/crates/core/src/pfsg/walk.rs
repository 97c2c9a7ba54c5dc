use std::collections::{BTreeMap, HashMap};

use crate::strings::{Interner, Sentence};

use super::{Label, PfsgError, PfsgSet, END, START};

type Paths = HashMap<Vec<u32>, f64>;

/// Strings of length `1..=max_len` on start-to-end paths of the top graph,
/// with graph references expanded, and the summed probability of their
/// paths. Meant for small graph sets.
pub fn pfsg_enumerate(
    set: &PfsgSet,
    max_len: usize,
    cap: usize,
) -> Result<BTreeMap<Sentence, f64>, PfsgError> {
    let mut words = Interner::default();
    let names: Vec<&str> = set.graphs.keys().map(String::as_str).collect();
    let index: HashMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    enum L {
        W(u32),
        G(usize),
    }
    type Arc = (usize, usize, L, f64);
    let graphs: Vec<(usize, Vec<Arc>)> = names
        .iter()
        .map(|n| {
            let g = &set.graphs[*n];
            let ts = g
                .transitions
                .iter()
                .map(|t| {
                    let label = match &t.label {
                        Label::Word(w) => L::W(words.intern(w)),
                        Label::Graph(h) => L::G(index[h.as_str()]),
                    };
                    (t.from, t.to, label, t.prob)
                })
                .collect();
            (g.nodes, ts)
        })
        .collect();

    // from[l][g][u]: paths from u to the end of g yielding l tokens.
    let mut from: Vec<Vec<Vec<Paths>>> = Vec::new();
    let mut at_end = vec![Paths::new(); 1];
    at_end[0].insert(Vec::new(), 1.0);
    from.push(
        graphs
            .iter()
            .map(|(nodes, _)| {
                (0..*nodes)
                    .map(|u| {
                        if u == END {
                            at_end[0].clone()
                        } else {
                            Paths::new()
                        }
                    })
                    .collect()
            })
            .collect(),
    );
    let mut stored = 0usize;
    for l in 1..=max_len {
        let mut layer: Vec<Vec<Paths>> = graphs
            .iter()
            .map(|(nodes, _)| vec![Paths::new(); *nodes])
            .collect();
        for _pass in 0..=graphs.len() {
            let mut next: Vec<Vec<Paths>> = graphs
                .iter()
                .map(|(nodes, _)| vec![Paths::new(); *nodes])
                .collect();
            for (gi, (_, ts)) in graphs.iter().enumerate() {
                // Interior targets need strictly shorter suffixes, so nodes
                // can be filled in any order.
                for (u, v, label, p) in ts {
                    let mut add = |s: Vec<u32>, q: f64| {
                        *next[gi][*u].entry(s).or_insert(0.0) += p * q;
                    };
                    match label {
                        L::W(w) => {
                            for (s, q) in &from[l - 1][gi][*v] {
                                let mut t = vec![*w];
                                t.extend_from_slice(s);
                                add(t, *q);
                            }
                        }
                        L::G(h) => {
                            for a in 1..=l {
                                let head = if a == l {
                                    &layer[*h][START]
                                } else {
                                    &from[a][*h][START]
                                };
                                let tail = &from[l - a][gi][*v];
                                for (s1, q1) in head {
                                    for (s2, q2) in tail {
                                        let mut t = s1.clone();
                                        t.extend_from_slice(s2);
                                        add(t, q1 * q2);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            let done = next == layer;
            layer = next;
            if done {
                break;
            }
        }
        stored += layer.iter().flatten().map(HashMap::len).sum::<usize>();
        if stored > cap {
            return Err(PfsgError::ResourceLimit { cap });
        }
        from.push(layer);
    }
    let top = index[set.top.as_str()];
    let mut out = BTreeMap::new();
    for layer in &from[1..] {
        for (s, q) in &layer[top][START] {
            out.insert(words.resolve(s), *q);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfg::ContextFreeGrammar;
    use crate::pfsg::{build_pfsg, cfg_enumerate};
    use crate::strings::tokenize;

    #[test]
    fn star_graph_paths() {
        let set = build_pfsg(&ContextFreeGrammar::parse("a -> \"c\" \"b\"* ;").unwrap()).unwrap();
        let got = pfsg_enumerate(&set, 3, 1000).unwrap();
        let want: BTreeMap<Sentence, f64> = [("c", 0.5), ("c b", 0.25), ("c b b", 0.125)]
            .iter()
            .map(|(s, p)| (tokenize(s), *p))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn references_expand_and_match_cfg_side() {
        let cfg = ContextFreeGrammar::parse(
            "s -> np vp | ( \"x\" | \"y\" )* vp ;\nnp -> \"a\" | \"b\" np ;\nvp -> \"v\" \"w\"* ;",
        )
        .unwrap();
        let set = build_pfsg(&cfg).unwrap();
        let paths = pfsg_enumerate(&set, 5, 100_000).unwrap();
        let strings: std::collections::BTreeSet<Sentence> = paths.keys().cloned().collect();
        assert_eq!(strings, cfg_enumerate(&cfg, 5, 100_000).unwrap());
        let total: f64 = paths.values().sum();
        assert!(total < 1.0);
    }
}
