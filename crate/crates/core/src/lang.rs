//! Finite languages as hash-consed acyclic automata.
//!
//! Every node is the minimal automaton of a finite language, so two
//! languages built in the same [`Dawg`] are equal exactly when their ids
//! are. Union and concatenation are memoised, which keeps languages with
//! billions of strings small when they share suffixes.

use std::collections::{BTreeSet, HashMap};

use crate::strings::{Interner, Sentence};

/// Index of a language inside its [`Dawg`].
pub type Lang = u32;

pub const EMPTY: Lang = 0;
pub const EPSILON: Lang = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Node {
    accepting: bool,
    /// Sorted by token, no child is `EMPTY`.
    edges: Box<[(u32, Lang)]>,
}

#[derive(Debug)]
pub struct Dawg {
    tokens: Interner,
    nodes: Vec<Node>,
    unique: HashMap<Node, Lang>,
    unions: HashMap<(Lang, Lang), Lang>,
    concats: HashMap<(Lang, Lang), Lang>,
    diffs: HashMap<(Lang, Lang), Lang>,
    counts: HashMap<Lang, u128>,
}

impl Default for Dawg {
    fn default() -> Self {
        let empty = Node {
            accepting: false,
            edges: Box::new([]),
        };
        let eps = Node {
            accepting: true,
            edges: Box::new([]),
        };
        let mut unique = HashMap::new();
        unique.insert(empty.clone(), EMPTY);
        unique.insert(eps.clone(), EPSILON);
        Dawg {
            tokens: Interner::default(),
            nodes: vec![empty, eps],
            unique,
            unions: HashMap::new(),
            concats: HashMap::new(),
            diffs: HashMap::new(),
            counts: HashMap::new(),
        }
    }
}

impl Dawg {
    pub fn intern(&mut self, token: &str) -> u32 {
        self.tokens.intern(token)
    }

    /// Number of distinct nodes built so far.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 2
    }

    fn node(&mut self, accepting: bool, edges: Vec<(u32, Lang)>) -> Lang {
        let node = Node {
            accepting,
            edges: edges.into_boxed_slice(),
        };
        if let Some(&id) = self.unique.get(&node) {
            return id;
        }
        let id = self.nodes.len() as Lang;
        self.nodes.push(node.clone());
        self.unique.insert(node, id);
        id
    }

    /// The language holding just `tokens`.
    pub fn word(&mut self, tokens: &[u32]) -> Lang {
        tokens
            .iter()
            .rev()
            .fold(EPSILON, |tail, &t| self.node(false, vec![(t, tail)]))
    }

    pub fn union(&mut self, a: Lang, b: Lang) -> Lang {
        if a == b || b == EMPTY {
            return a;
        }
        if a == EMPTY {
            return b;
        }
        let key = (a.min(b), a.max(b));
        if let Some(&r) = self.unions.get(&key) {
            return r;
        }
        let (x, y) = (
            self.nodes[a as usize].clone(),
            self.nodes[b as usize].clone(),
        );
        let mut edges = Vec::with_capacity(x.edges.len() + y.edges.len());
        let (mut i, mut j) = (0, 0);
        while i < x.edges.len() || j < y.edges.len() {
            let left = x.edges.get(i);
            let right = y.edges.get(j);
            match (left, right) {
                (Some(&(s, p)), Some(&(t, q))) if s == t => {
                    edges.push((s, self.union(p, q)));
                    i += 1;
                    j += 1;
                }
                (Some(&(s, p)), Some(&(t, _))) if s < t => {
                    edges.push((s, p));
                    i += 1;
                }
                (Some(&e), None) => {
                    edges.push(e);
                    i += 1;
                }
                (_, Some(&e)) => {
                    edges.push(e);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        let r = self.node(x.accepting || y.accepting, edges);
        self.unions.insert(key, r);
        r
    }

    pub fn concat(&mut self, a: Lang, b: Lang) -> Lang {
        if a == EMPTY || b == EMPTY {
            return EMPTY;
        }
        if a == EPSILON {
            return b;
        }
        if b == EPSILON {
            return a;
        }
        if let Some(&r) = self.concats.get(&(a, b)) {
            return r;
        }
        let x = self.nodes[a as usize].clone();
        let edges = x
            .edges
            .iter()
            .map(|&(t, c)| (t, self.concat(c, b)))
            .collect();
        let stepped = self.node(false, edges);
        let r = if x.accepting {
            self.union(stepped, b)
        } else {
            stepped
        };
        self.concats.insert((a, b), r);
        r
    }

    /// Strings of `a` that are not in `b`.
    pub fn difference(&mut self, a: Lang, b: Lang) -> Lang {
        if a == b || a == EMPTY {
            return EMPTY;
        }
        if b == EMPTY {
            return a;
        }
        if let Some(&r) = self.diffs.get(&(a, b)) {
            return r;
        }
        let (x, y) = (
            self.nodes[a as usize].clone(),
            self.nodes[b as usize].clone(),
        );
        let mut edges = Vec::new();
        for &(t, c) in x.edges.iter() {
            let other = y
                .edges
                .binary_search_by_key(&t, |e| e.0)
                .map_or(EMPTY, |k| y.edges[k].1);
            let d = self.difference(c, other);
            if d != EMPTY {
                edges.push((t, d));
            }
        }
        let r = self.node(x.accepting && !y.accepting, edges);
        self.diffs.insert((a, b), r);
        r
    }

    /// Number of strings, saturating at `u128::MAX`.
    pub fn count(&mut self, a: Lang) -> u128 {
        if let Some(&n) = self.counts.get(&a) {
            return n;
        }
        let x = self.nodes[a as usize].clone();
        let mut n = u128::from(x.accepting);
        for &(_, c) in x.edges.iter() {
            n = n.saturating_add(self.count(c));
        }
        self.counts.insert(a, n);
        n
    }

    /// Bit `n` set when `a` holds a string of length `n`; lengths above 63
    /// share the top bit.
    fn lengths(&self, a: Lang, memo: &mut HashMap<Lang, u64>) -> u64 {
        if let Some(&m) = memo.get(&a) {
            return m;
        }
        let x = &self.nodes[a as usize];
        let mut m = u64::from(x.accepting);
        for &(_, c) in x.edges.iter() {
            let sub = self.lengths(c, memo);
            m |= (sub << 1) | (sub & (1 << 63));
        }
        memo.insert(a, m);
        m
    }

    /// Up to `limit` strings of `a`, shortest first and then by token.
    pub fn sample(&self, a: Lang, limit: usize) -> Vec<Sentence> {
        let mut memo = HashMap::new();
        let all = self.lengths(a, &mut memo);
        let mut out = Vec::new();
        for n in 0..63 {
            if all & (1 << n) != 0 {
                self.walk(a, n, &mut Vec::new(), &mut memo, limit, &mut out);
            }
            if out.len() >= limit {
                break;
            }
        }
        out
    }

    fn walk(
        &self,
        a: Lang,
        n: usize,
        prefix: &mut Vec<u32>,
        memo: &mut HashMap<Lang, u64>,
        limit: usize,
        out: &mut Vec<Sentence>,
    ) {
        if out.len() >= limit {
            return;
        }
        let x = &self.nodes[a as usize];
        if n == 0 {
            if x.accepting {
                out.push(self.tokens.resolve(prefix));
            }
            return;
        }
        for &(t, c) in x.edges.iter() {
            if self.lengths(c, memo) & (1 << (n - 1)) != 0 {
                prefix.push(t);
                self.walk(c, n - 1, prefix, memo, limit, out);
                prefix.pop();
            }
        }
    }

    /// Every string of `a`. Callers bound the size with [`Dawg::count`].
    pub fn strings(&self, a: Lang) -> BTreeSet<Sentence> {
        let mut out = BTreeSet::new();
        let mut stack: Vec<(Vec<u32>, Lang)> = vec![(Vec::new(), a)];
        while let Some((prefix, id)) = stack.pop() {
            let x = &self.nodes[id as usize];
            if x.accepting {
                out.insert(self.tokens.resolve(&prefix));
            }
            for &(t, c) in x.edges.iter() {
                let mut p = prefix.clone();
                p.push(t);
                stack.push((p, c));
            }
        }
        out
    }

    /// Drops the operation caches. Languages stay valid.
    pub fn forget(&mut self) {
        self.unions.clear();
        self.concats.clear();
        self.diffs.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strings::tokenize;

    fn lang(d: &mut Dawg, items: &[&str]) -> Lang {
        let mut l = EMPTY;
        for s in items {
            let toks: Vec<u32> = tokenize(s).iter().map(|t| d.intern(t)).collect();
            let w = d.word(&toks);
            l = d.union(l, w);
        }
        l
    }

    fn set(items: &[&str]) -> BTreeSet<Sentence> {
        items.iter().map(|s| tokenize(s)).collect()
    }

    #[test]
    fn equal_languages_share_an_id() {
        let mut d = Dawg::default();
        let a = lang(&mut d, &["a b", "a c", "d"]);
        let b = lang(&mut d, &["d", "a c", "a b", "a b"]);
        assert_eq!(a, b);
        assert_ne!(a, lang(&mut d, &["a b", "d"]));
    }

    #[test]
    fn concatenation_and_counts() {
        let mut d = Dawg::default();
        let a = lang(&mut d, &["x", "x y"]);
        let b = lang(&mut d, &["y", "y z"]);
        let c = d.concat(a, b);
        assert_eq!(d.strings(c), set(&["x y", "x y z", "x y y", "x y y z"]));
        assert_eq!(d.count(c), 4);
        assert_eq!(d.concat(c, EMPTY), EMPTY);
        assert_eq!(d.concat(EPSILON, c), c);
    }

    #[test]
    fn difference_and_sample() {
        let mut d = Dawg::default();
        let a = lang(&mut d, &["p", "p q", "r s t"]);
        let b = lang(&mut d, &["p q", "u"]);
        let diff = d.difference(a, b);
        assert_eq!(d.strings(diff), set(&["p", "r s t"]));
        assert_eq!(d.sample(diff, 1), vec![tokenize("p")]);
        assert_eq!(d.difference(b, b), EMPTY);
    }

    #[test]
    fn products_stay_compact() {
        let mut d = Dawg::default();
        let digits = lang(&mut d, &["0", "1", "2", "3", "4", "5", "6", "7", "8", "9"]);
        let mut l = EPSILON;
        for _ in 0..12 {
            l = d.concat(l, digits);
        }
        assert_eq!(d.count(l), 10u128.pow(12));
        assert!(d.len() < 50);
    }
}
