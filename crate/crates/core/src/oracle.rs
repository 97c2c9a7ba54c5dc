//! Reference recognizer and string enumerator working directly on the
//! unification grammar.
//!
//! Constituents are represented as feature structures whose features point
//! at shared value cells, so reentrancy introduced by a rule (a variable
//! appearing on two features of the mother) survives into later
//! unifications. Both procedures are independent of the compilation
//! pipeline and serve as its ground truth.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::grammar::Grammar;
use crate::index::{ICat, IRule, IndexedGrammar, Mask, Slot};
use crate::lang::{Dawg, Lang, EMPTY, EPSILON};
use crate::strings::{cap_add, cap_mul, Sentence};

pub const DEFAULT_DERIVATION_CAP: u64 = 1_000_000;
pub const DEFAULT_STRING_CAP: usize = 1_000_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("enumeration exceeded the cap of {cap} strings")]
    ResourceLimit { cap: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseResult {
    pub accepted: bool,
    pub derivation_count: u64,
    /// Bracketed derivation trees, present when requested.
    pub derivations: Option<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub feature_filter: Option<Vec<String>>,
    pub derivation_cap: u64,
    /// Number of bracketed trees to return; 0 returns none.
    pub max_trees: usize,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            feature_filter: None,
            derivation_cap: DEFAULT_DERIVATION_CAP,
            max_trees: 0,
        }
    }
}

/// Feature structure of a constituent: each dimension of its symbol points
/// at a value cell. Cells are numbered by first occurrence, so equal
/// structures compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Fs {
    cells: Vec<u8>,
    masks: Vec<Mask>,
}

#[derive(Clone, Debug)]
struct Uf {
    parent: Vec<u32>,
    mask: Vec<Mask>,
}

impl Uf {
    fn new() -> Self {
        Uf {
            parent: Vec::new(),
            mask: Vec::new(),
        }
    }

    fn add(&mut self, mask: Mask) -> u32 {
        self.parent.push(self.parent.len() as u32);
        self.mask.push(mask);
        self.parent.len() as u32 - 1
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return self.mask[ra as usize] != 0;
        }
        let m = self.mask[ra as usize] & self.mask[rb as usize];
        self.parent[rb as usize] = ra;
        self.mask[ra as usize] = m;
        m != 0
    }

    fn canonical(&mut self, nodes: &[u32]) -> Fs {
        let mut roots: Vec<u32> = Vec::new();
        let mut cells = Vec::with_capacity(nodes.len());
        let mut masks = Vec::new();
        for &n in nodes {
            let r = self.find(n);
            let id = match roots.iter().position(|&x| x == r) {
                Some(i) => i,
                None => {
                    roots.push(r);
                    masks.push(self.mask[r as usize]);
                    roots.len() - 1
                }
            };
            cells.push(id as u8);
        }
        Fs { cells, masks }
    }
}

/// Partially applied rule: unification state plus the node of every
/// (position, dimension) pair.
#[derive(Clone)]
struct RuleState {
    uf: Uf,
    nodes: Vec<Vec<u32>>,
}

impl RuleState {
    fn new(g: &IndexedGrammar, rule: &IRule) -> Self {
        let mut uf = Uf::new();
        let vars: Vec<u32> = rule
            .var_features
            .iter()
            .map(|&f| uf.add(g.full(f)))
            .collect();
        let mut nodes = Vec::with_capacity(rule.daughters.len() + 1);
        for cat in std::iter::once(&rule.mother).chain(&rule.daughters) {
            nodes.push(
                cat.slots
                    .iter()
                    .map(|s| match *s {
                        Slot::Var(v) => vars[v],
                        Slot::Mask(m) => uf.add(m),
                    })
                    .collect(),
            );
        }
        RuleState { uf, nodes }
    }

    /// Unifies the structure of daughter `k` (0-based) into the state.
    fn absorb(&mut self, k: usize, fs: &Fs) -> bool {
        let cells: Vec<u32> = fs.masks.iter().map(|&m| self.uf.add(m)).collect();
        for (j, &c) in fs.cells.iter().enumerate() {
            let node = self.nodes[k + 1][j];
            if !self.uf.union(node, cells[c as usize]) {
                return false;
            }
        }
        true
    }

    /// Canonical structure of the mother under the current bindings.
    fn mother(&mut self) -> Fs {
        let nodes = self.nodes[0].clone();
        self.uf.canonical(&nodes)
    }
}

fn lex_fs(cat: &ICat) -> Fs {
    Fs {
        cells: (0..cat.slots.len() as u8).collect(),
        masks: cat
            .slots
            .iter()
            .map(|s| match *s {
                Slot::Mask(m) => m,
                Slot::Var(_) => unreachable!("validated lexicon has no variables"),
            })
            .collect(),
    }
}

type ItemKey = (usize, Fs);

#[derive(Clone, Debug)]
enum Back {
    Lex(usize),
    Rule(usize, Vec<(usize, usize, Fs)>),
}

#[derive(Clone, Debug, Default)]
struct Item {
    count: u64,
    backs: Vec<Back>,
}

const MAX_BACKS: usize = 16;

impl Item {
    fn add(&mut self, count: u64, back: Back, cap: u64) {
        self.count = cap_add(self.count, count, cap);
        if self.backs.len() < MAX_BACKS {
            self.backs.push(back);
        }
    }
}

/// A completed item: (end, structure, count).
type Done = (usize, Fs, u64);

struct Chart<'g> {
    g: &'g IndexedGrammar,
    cap: u64,
    spans: HashMap<(usize, usize), BTreeMap<ItemKey, Item>>,
    /// Completed items by start position and symbol.
    starts: Vec<HashMap<usize, Vec<Done>>>,
    min_yield: Vec<usize>,
}

impl<'g> Chart<'g> {
    fn fill(&mut self, tokens: &[String]) {
        let n = tokens.len();
        for len in 1..=n {
            for i in 0..=n - len {
                let j = i + len;
                let base = self.base_items(tokens, i, j);
                let items = self.unary_closure(base, i, j);
                for (key, item) in &items {
                    self.starts[i]
                        .entry(key.0)
                        .or_default()
                        .push((j, key.1.clone(), item.count));
                }
                self.spans.insert((i, j), items);
            }
        }
    }

    fn base_items(&self, tokens: &[String], i: usize, j: usize) -> BTreeMap<ItemKey, Item> {
        let mut out: BTreeMap<ItemKey, Item> = BTreeMap::new();
        for (idx, e) in self.g.lexicon.iter().enumerate() {
            if e.tokens.as_slice() == &tokens[i..j] {
                out.entry((e.cat.sym, lex_fs(&e.cat))).or_default().add(
                    1,
                    Back::Lex(idx),
                    self.cap,
                );
            }
        }
        for (ri, rule) in self.g.rules.iter().enumerate() {
            if rule.daughters.len() < 2 {
                continue;
            }
            let state = RuleState::new(self.g, rule);
            self.match_daughters(ri, rule, 0, i, j, state, 1, Vec::new(), &mut out);
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn match_daughters(
        &self,
        ri: usize,
        rule: &IRule,
        k: usize,
        pos: usize,
        end: usize,
        state: RuleState,
        count: u64,
        children: Vec<(usize, usize, Fs)>,
        out: &mut BTreeMap<ItemKey, Item>,
    ) {
        let sym = rule.daughters[k].sym;
        let last = k + 1 == rule.daughters.len();
        let rest_min: usize = rule.daughters[k + 1..]
            .iter()
            .map(|d| self.min_yield[d.sym])
            .sum();
        let Some(cands) = self.starts[pos].get(&sym) else {
            return;
        };
        for (e, fs, c) in cands {
            let fits = if last {
                *e == end
            } else {
                *e < end && end - e >= rest_min
            };
            if !fits {
                continue;
            }
            let mut next = state.clone();
            if !next.absorb(k, fs) {
                continue;
            }
            let count = cap_mul(count, *c, self.cap);
            let mut children = children.clone();
            children.push((pos, *e, fs.clone()));
            if last {
                let key = (rule.mother.sym, next.mother());
                out.entry(key)
                    .or_default()
                    .add(count, Back::Rule(ri, children), self.cap);
            } else {
                self.match_daughters(ri, rule, k + 1, *e, end, next, count, children, out);
            }
        }
    }

    /// Applies single-daughter rules within one span until counts settle.
    /// Counts still rising after every acyclic chain has been exhausted
    /// belong to unary cycles and saturate at the cap.
    fn unary_closure(
        &self,
        base: BTreeMap<ItemKey, Item>,
        i: usize,
        j: usize,
    ) -> BTreeMap<ItemKey, Item> {
        let unary: Vec<(usize, &IRule)> = self
            .g
            .rules
            .iter()
            .enumerate()
            .filter(|(_, r)| r.daughters.len() == 1)
            .collect();
        if unary.is_empty() {
            return base;
        }
        let mut current = base.clone();
        let mut rounds = 0;
        loop {
            let mut next = base.clone();
            for ((sym, fs), item) in &current {
                for &(ri, rule) in &unary {
                    if rule.daughters[0].sym != *sym {
                        continue;
                    }
                    let mut st = RuleState::new(self.g, rule);
                    if !st.absorb(0, fs) {
                        continue;
                    }
                    let key = (rule.mother.sym, st.mother());
                    next.entry(key).or_default().add(
                        item.count,
                        Back::Rule(ri, vec![(i, j, fs.clone())]),
                        self.cap,
                    );
                }
            }
            let stable = next.len() == current.len()
                && next
                    .iter()
                    .zip(&current)
                    .all(|((ka, a), (kb, b))| ka == kb && a.count == b.count);
            rounds += 1;
            if stable {
                return next;
            }
            if rounds > 2 * next.len() + 4 {
                for (key, item) in next.iter_mut() {
                    if current.get(key).map(|c| c.count) != Some(item.count) {
                        item.count = self.cap;
                    }
                }
                return next;
            }
            current = next;
        }
    }

    fn trees(
        &self,
        span: (usize, usize),
        key: &ItemKey,
        limit: usize,
        depth: usize,
    ) -> Vec<String> {
        let Some(item) = self.spans.get(&span).and_then(|m| m.get(key)) else {
            return Vec::new();
        };
        if depth > 64 {
            return Vec::new();
        }
        let label = &self.g.symbols[key.0];
        let mut out = Vec::new();
        for back in &item.backs {
            if out.len() >= limit {
                break;
            }
            match back {
                Back::Lex(idx) => {
                    out.push(format!(
                        "({} {})",
                        label,
                        self.g.lexicon[*idx].tokens.join(" ")
                    ));
                }
                Back::Rule(ri, children) => {
                    let rule = &self.g.rules[*ri];
                    let mut partial = vec![String::new()];
                    for (d, (s, e, fs)) in rule.daughters.iter().zip(children) {
                        let subs = self.trees((*s, *e), &(d.sym, fs.clone()), limit, depth + 1);
                        let mut grown = Vec::new();
                        for p in &partial {
                            for sub in &subs {
                                if grown.len() < limit {
                                    let mut t = p.clone();
                                    let _ = write!(t, " {}", sub);
                                    grown.push(t);
                                }
                            }
                        }
                        partial = grown;
                    }
                    for p in partial {
                        if out.len() < limit {
                            out.push(format!("({}{})", label, p));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Chart-parses `tokens` against the unification grammar. The derivation
/// count is the number of distinct trees rooted in the start symbol that
/// span the whole input, saturating at `options.derivation_cap`.
pub fn oracle_parse(
    grammar: &Grammar,
    tokens: &[String],
    options: &ParseOptions,
) -> Result<ParseResult, OracleError> {
    let vocab: HashSet<&str> = grammar
        .lexicon
        .iter()
        .flat_map(|e| e.surface.iter().map(String::as_str))
        .collect();
    if let Some(t) = tokens.iter().find(|t| !vocab.contains(t.as_str())) {
        return Err(OracleError::UnknownToken(t.clone()));
    }
    let g = IndexedGrammar::new(grammar, options.feature_filter.as_deref());
    if tokens.is_empty() {
        return Ok(ParseResult {
            accepted: false,
            derivation_count: 0,
            derivations: (options.max_trees > 0).then(Vec::new),
        });
    }
    let mut chart = Chart {
        g: &g,
        cap: options.derivation_cap,
        spans: HashMap::new(),
        starts: vec![HashMap::new(); tokens.len() + 1],
        min_yield: g.min_yield(),
    };
    chart.fill(tokens);
    let full = (0, tokens.len());
    let roots: Vec<ItemKey> = chart.spans[&full]
        .keys()
        .filter(|(s, _)| *s == g.start)
        .cloned()
        .collect();
    let count = roots.iter().fold(0, |acc, k| {
        cap_add(acc, chart.spans[&full][k].count, options.derivation_cap)
    });
    let derivations = (options.max_trees > 0).then(|| {
        let mut out = Vec::new();
        for k in &roots {
            let room = options.max_trees - out.len();
            out.extend(chart.trees(full, k, room, 0));
            if out.len() >= options.max_trees {
                break;
            }
        }
        out
    });
    Ok(ParseResult {
        accepted: count > 0,
        derivation_count: count,
        derivations,
    })
}

type Table = HashMap<usize, HashMap<Fs, Lang>>;

struct Enumerator<'g, 'd> {
    g: &'g IndexedGrammar,
    dawg: &'d mut Dawg,
    cap: usize,
    min_yield: Vec<usize>,
    /// Language of each exact length, grouped by symbol and structure.
    tables: Vec<Table>,
}

impl Enumerator<'_, '_> {
    fn check_cap(&self) -> Result<(), OracleError> {
        if self.dawg.len() > self.cap {
            return Err(OracleError::ResourceLimit { cap: self.cap });
        }
        Ok(())
    }

    fn level(&mut self, n: usize, lex: &[(Vec<u32>, usize, Fs)]) -> Result<Table, OracleError> {
        let mut cur: Table = HashMap::new();
        for (toks, sym, fs) in lex {
            if toks.len() == n {
                let w = self.dawg.word(toks);
                let slot = cur
                    .entry(*sym)
                    .or_default()
                    .entry(fs.clone())
                    .or_insert(EMPTY);
                *slot = self.dawg.union(*slot, w);
            }
        }
        for rule in &self.g.rules {
            if rule.daughters.len() < 2 {
                continue;
            }
            let state = RuleState::new(self.g, rule);
            let mut found: Vec<(Fs, Vec<Lang>)> = Vec::new();
            self.compose(rule, 0, n, state, Vec::new(), &mut found);
            for (fs, parts) in found {
                let l = parts
                    .iter()
                    .rev()
                    .fold(EPSILON, |acc, &p| self.dawg.concat(p, acc));
                let slot = cur
                    .entry(rule.mother.sym)
                    .or_default()
                    .entry(fs)
                    .or_insert(EMPTY);
                *slot = self.dawg.union(*slot, l);
            }
            self.check_cap()?;
        }
        // Unary rules stay within the same length; iterate to a fixpoint.
        loop {
            let mut additions: Vec<(usize, Fs, Lang)> = Vec::new();
            for rule in self.g.rules.iter().filter(|r| r.daughters.len() == 1) {
                let Some(classes) = cur.get(&rule.daughters[0].sym) else {
                    continue;
                };
                for (fs, &l) in classes {
                    let mut st = RuleState::new(self.g, rule);
                    if !st.absorb(0, fs) {
                        continue;
                    }
                    additions.push((rule.mother.sym, st.mother(), l));
                }
            }
            let mut grew = false;
            for (sym, fs, l) in additions {
                let slot = cur.entry(sym).or_default().entry(fs).or_insert(EMPTY);
                let merged = self.dawg.union(*slot, l);
                if merged != *slot {
                    *slot = merged;
                    grew = true;
                }
            }
            self.check_cap()?;
            if !grew {
                break;
            }
        }
        Ok(cur)
    }

    fn compose(
        &self,
        rule: &IRule,
        k: usize,
        remaining: usize,
        state: RuleState,
        parts: Vec<Lang>,
        found: &mut Vec<(Fs, Vec<Lang>)>,
    ) {
        let d = &rule.daughters[k];
        let last = k + 1 == rule.daughters.len();
        let rest_min: usize = rule.daughters[k + 1..]
            .iter()
            .map(|d| self.min_yield[d.sym])
            .sum();
        if remaining < rest_min {
            return;
        }
        let lengths: Vec<usize> = if last {
            vec![remaining]
        } else {
            (self.min_yield[d.sym].max(1)..=remaining - rest_min).collect()
        };
        for len in lengths {
            // Only strictly shorter levels are complete at this point.
            let Some(classes) = self.tables.get(len).and_then(|t| t.get(&d.sym)) else {
                continue;
            };
            for (fs, &l) in classes {
                let mut next = state.clone();
                if !next.absorb(k, fs) {
                    continue;
                }
                let mut parts = parts.clone();
                parts.push(l);
                if last {
                    found.push((next.mother(), parts));
                } else {
                    self.compose(rule, k + 1, remaining - len, next, parts, found);
                }
            }
        }
    }
}

/// The language of strings of length `1..=max_len` derivable from the
/// start symbol, built in `dawg`. Fails once `dawg` holds more than `cap`
/// nodes.
pub fn oracle_language(
    grammar: &Grammar,
    max_len: usize,
    feature_filter: Option<&[String]>,
    dawg: &mut Dawg,
    cap: usize,
) -> Result<Lang, OracleError> {
    let g = IndexedGrammar::new(grammar, feature_filter);
    let lex: Vec<(Vec<u32>, usize, Fs)> = g
        .lexicon
        .iter()
        .map(|e| {
            let toks = e.tokens.iter().map(|t| dawg.intern(t)).collect();
            (toks, e.cat.sym, lex_fs(&e.cat))
        })
        .collect();
    let mut en = Enumerator {
        g: &g,
        dawg,
        cap,
        min_yield: g.min_yield(),
        tables: vec![HashMap::new()],
    };
    let mut result = EMPTY;
    for n in 1..=max_len {
        let level = en.level(n, &lex)?;
        if let Some(classes) = level.get(&g.start) {
            for &l in classes.values() {
                result = en.dawg.union(result, l);
            }
        }
        en.tables.push(level);
    }
    Ok(result)
}

/// Every terminal string of length at most `max_len` derivable from the
/// start symbol. Fails when there are more than `cap` of them.
pub fn oracle_enumerate(
    grammar: &Grammar,
    max_len: usize,
    feature_filter: Option<&[String]>,
    cap: usize,
) -> Result<BTreeSet<Sentence>, OracleError> {
    let mut dawg = Dawg::default();
    // A language of `cap` strings needs at most `cap * max_len` nodes.
    let nodes = cap.saturating_mul(max_len.max(1));
    let l = oracle_language(grammar, max_len, feature_filter, &mut dawg, nodes)
        .map_err(|_| OracleError::ResourceLimit { cap })?;
    if dawg.count(l) > cap as u128 {
        return Err(OracleError::ResourceLimit { cap });
    }
    Ok(dawg.strings(l))
}
