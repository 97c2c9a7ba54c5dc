use std::collections::{BTreeSet, HashMap};

use crate::cfg::{ContextFreeGrammar, Expr};
use crate::lang::{Dawg, Lang, EMPTY};
use crate::oracle::DEFAULT_DERIVATION_CAP;
use crate::strings::{cap_add, cap_mul, Interner, Sentence};

use super::PfsgError;

type Sym = u32;

/// Weighted binary grammar equivalent to the graph model: uniform choice
/// among alternatives, and each star decision (skip, repeat, stop) taken
/// with probability 1/2.
pub struct CfgParser {
    words: Interner,
    /// Symbols `0..words.len()` are terminals; nonterminals follow.
    offset: u32,
    symbols: u32,
    start: Sym,
    unary_by_rhs: HashMap<Sym, Vec<(Sym, f64)>>,
    binary_by_left: HashMap<Sym, Vec<(Sym, Sym, f64)>>,
    binary: Vec<(Sym, Sym, Sym)>,
    unary: Vec<(Sym, Sym)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CfgParse {
    pub accepted: bool,
    pub derivation_count: u64,
    /// Natural log of the summed derivation probability; `-inf` if rejected.
    pub log_prob: f64,
}

struct Lowering<'a> {
    words: &'a Interner,
    names: HashMap<&'a str, Sym>,
    next: Sym,
    rules: Vec<(Sym, Vec<Sym>, f64)>,
}

impl<'a> Lowering<'a> {
    fn fresh(&mut self) -> Sym {
        self.next += 1;
        self.next - 1
    }

    fn variants(&mut self, items: &'a [Expr], out: &mut Vec<(Vec<Sym>, f64)>) {
        for item in items {
            match item {
                Expr::Seq(inner) => self.variants(inner, out),
                Expr::Star(x) => {
                    let t = self.fresh();
                    let xs = self.sequence(x);
                    for (v, w) in xs {
                        let mut more = v.clone();
                        more.push(t);
                        self.rules.push((t, more, w * 0.5));
                        self.rules.push((t, v, w * 0.5));
                    }
                    let taken: Vec<(Vec<Sym>, f64)> = out
                        .iter()
                        .map(|(v, w)| {
                            let mut v = v.clone();
                            v.push(t);
                            (v, w * 0.5)
                        })
                        .collect();
                    for o in out.iter_mut() {
                        o.1 *= 0.5;
                    }
                    out.extend(taken);
                }
                other => {
                    let s = self.symbol(other);
                    for o in out.iter_mut() {
                        o.0.push(s);
                    }
                }
            }
        }
    }

    fn sequence(&mut self, e: &'a Expr) -> Vec<(Vec<Sym>, f64)> {
        let mut out = vec![(Vec::new(), 1.0)];
        self.variants(std::slice::from_ref(e), &mut out);
        out.retain(|(v, _)| !v.is_empty());
        out
    }

    fn symbol(&mut self, e: &'a Expr) -> Sym {
        match e {
            Expr::Term(w) => self.words.get(w).expect("interned"),
            Expr::Ref(n) => self.names[n.as_str()],
            Expr::Alt(_) => {
                let f = self.fresh();
                self.production(f, e);
                f
            }
            Expr::Seq(_) | Expr::Star(_) => unreachable!("handled by variants"),
        }
    }

    fn production(&mut self, lhs: Sym, body: &'a Expr) {
        let alts = body.alternatives();
        let share = 1.0 / alts.len() as f64;
        for a in alts {
            for (v, w) in self.sequence(a) {
                self.rules.push((lhs, v, w * share));
            }
        }
    }
}

impl CfgParser {
    pub fn new(cfg: &ContextFreeGrammar) -> Self {
        let mut words = Interner::default();
        for body in cfg.productions.values() {
            collect_words(body, &mut words);
        }
        let offset = words.len() as u32;
        let names: HashMap<&str, Sym> = cfg
            .productions
            .keys()
            .enumerate()
            .map(|(i, n)| (n.as_str(), offset + i as u32))
            .collect();
        let mut low = Lowering {
            words: &words,
            next: offset + names.len() as u32,
            names,
            rules: Vec::new(),
        };
        for (name, body) in &cfg.productions {
            let lhs = low.names[name.as_str()];
            low.production(lhs, body);
        }
        let start = low.names[cfg.start.as_str()];
        let mut next = low.next;
        let rules = low.rules;

        let mut unary_by_rhs: HashMap<Sym, Vec<(Sym, f64)>> = HashMap::new();
        let mut binary_by_left: HashMap<Sym, Vec<(Sym, Sym, f64)>> = HashMap::new();
        let mut binary = Vec::new();
        let mut unary = Vec::new();
        for (lhs, rhs, w) in rules {
            match rhs.len() {
                1 => {
                    unary_by_rhs.entry(rhs[0]).or_default().push((lhs, w));
                    unary.push((lhs, rhs[0]));
                }
                _ => {
                    // lhs -> x1 r1, r1 -> x2 r2, ..., r -> x(n-1) xn
                    let mut left = lhs;
                    let mut weight = w;
                    for i in 0..rhs.len() - 1 {
                        let right = if i == rhs.len() - 2 {
                            rhs[i + 1]
                        } else {
                            next += 1;
                            next - 1
                        };
                        binary_by_left
                            .entry(rhs[i])
                            .or_default()
                            .push((right, left, weight));
                        binary.push((left, rhs[i], right));
                        left = right;
                        weight = 1.0;
                    }
                }
            }
        }
        CfgParser {
            words,
            offset,
            symbols: next,
            start,
            unary_by_rhs,
            binary_by_left,
            binary,
            unary,
        }
    }

    fn close(&self, cell: &mut HashMap<Sym, (f64, u64)>) {
        let base = cell.clone();
        for _ in 0..100 {
            let mut next = base.clone();
            for (&x, &(p, c)) in cell.iter() {
                for &(a, w) in self.unary_by_rhs.get(&x).into_iter().flatten() {
                    let e = next.entry(a).or_insert((0.0, 0));
                    e.0 += w * p;
                    e.1 = cap_add(e.1, c, DEFAULT_DERIVATION_CAP);
                }
            }
            if next == *cell {
                return;
            }
            *cell = next;
        }
    }

    pub fn parse(&self, tokens: &[String]) -> CfgParse {
        let rejected = CfgParse {
            accepted: false,
            derivation_count: 0,
            log_prob: f64::NEG_INFINITY,
        };
        let n = tokens.len();
        let Some(ids) = tokens
            .iter()
            .map(|t| self.words.get(t))
            .collect::<Option<Vec<_>>>()
        else {
            return rejected;
        };
        if n == 0 {
            return rejected;
        }
        // chart[i][l - 1] covers tokens i..i+l
        let mut chart: Vec<Vec<HashMap<Sym, (f64, u64)>>> = vec![Vec::new(); n];
        for l in 1..=n {
            for i in 0..=n - l {
                let mut cell: HashMap<Sym, (f64, u64)> = HashMap::new();
                if l == 1 {
                    cell.insert(ids[i], (1.0, 1));
                } else {
                    for k in 1..l {
                        let (left, right) = (&chart[i][k - 1], &chart[i + k][l - k - 1]);
                        for (x, &(px, cx)) in left {
                            for &(y, a, w) in self.binary_by_left.get(x).into_iter().flatten() {
                                if let Some(&(py, cy)) = right.get(&y) {
                                    let e = cell.entry(a).or_insert((0.0, 0));
                                    e.0 += w * px * py;
                                    e.1 = cap_add(
                                        e.1,
                                        cap_mul(cx, cy, DEFAULT_DERIVATION_CAP),
                                        DEFAULT_DERIVATION_CAP,
                                    );
                                }
                            }
                        }
                    }
                }
                self.close(&mut cell);
                chart[i].push(cell);
            }
        }
        match chart[0][n - 1].get(&self.start) {
            Some(&(p, c)) if c > 0 => CfgParse {
                accepted: true,
                derivation_count: c,
                log_prob: p.ln(),
            },
            _ => rejected,
        }
    }

    /// The language of strings of length `1..=max_len`, built in `dawg`.
    /// Fails once `dawg` holds more than `cap` nodes.
    pub fn language(&self, max_len: usize, dawg: &mut Dawg, cap: usize) -> Result<Lang, PfsgError> {
        let syms = self.symbols as usize;
        let terminals: Vec<u32> = (0..self.offset)
            .map(|t| dawg.intern(&self.words.resolve(&[t])[0]))
            .collect();
        // lang[l - 1][sym]
        let mut lang: Vec<Vec<Lang>> = Vec::new();
        let over = |dawg: &Dawg| {
            if dawg.len() > cap {
                Err(PfsgError::ResourceLimit { cap })
            } else {
                Ok(())
            }
        };
        for l in 1..=max_len {
            let mut layer: Vec<Lang> = vec![EMPTY; syms];
            if l == 1 {
                for (t, &tok) in terminals.iter().enumerate() {
                    layer[t] = dawg.word(&[tok]);
                }
            }
            for &(a, x, y) in &self.binary {
                for k in 1..l {
                    let (left, right) = (lang[k - 1][x as usize], lang[l - k - 1][y as usize]);
                    if left == EMPTY || right == EMPTY {
                        continue;
                    }
                    let c = dawg.concat(left, right);
                    layer[a as usize] = dawg.union(layer[a as usize], c);
                }
                over(dawg)?;
            }
            loop {
                let mut grew = false;
                for &(a, x) in &self.unary {
                    let merged = dawg.union(layer[a as usize], layer[x as usize]);
                    if merged != layer[a as usize] {
                        layer[a as usize] = merged;
                        grew = true;
                    }
                }
                over(dawg)?;
                if !grew {
                    break;
                }
            }
            lang.push(layer);
        }
        Ok(lang.iter().fold(EMPTY, |acc, layer| {
            dawg.union(acc, layer[self.start as usize])
        }))
    }

    /// All strings of length `1..=max_len` the grammar generates. Fails
    /// when there are more than `cap` of them.
    pub fn enumerate(&self, max_len: usize, cap: usize) -> Result<BTreeSet<Sentence>, PfsgError> {
        let mut dawg = Dawg::default();
        // A language of `cap` strings needs at most `cap * max_len` nodes.
        let l = self
            .language(max_len, &mut dawg, cap.saturating_mul(max_len.max(1)))
            .map_err(|_| PfsgError::ResourceLimit { cap })?;
        if dawg.count(l) > cap as u128 {
            return Err(PfsgError::ResourceLimit { cap });
        }
        Ok(dawg.strings(l))
    }
}

fn collect_words(e: &Expr, words: &mut Interner) {
    match e {
        Expr::Term(w) => {
            words.intern(w);
        }
        Expr::Ref(_) => {}
        Expr::Seq(xs) | Expr::Alt(xs) => xs.iter().for_each(|x| collect_words(x, words)),
        Expr::Star(x) => collect_words(x, words),
    }
}

pub fn cfg_parse(cfg: &ContextFreeGrammar, tokens: &[String]) -> CfgParse {
    CfgParser::new(cfg).parse(tokens)
}

pub fn cfg_enumerate(
    cfg: &ContextFreeGrammar,
    max_len: usize,
    cap: usize,
) -> Result<BTreeSet<Sentence>, PfsgError> {
    CfgParser::new(cfg).enumerate(max_len, cap)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Perplexity {
    pub value: f64,
    pub sentences: usize,
    pub words: usize,
    /// Indices of corpus sentences outside the language.
    pub excluded: Vec<usize>,
}

/// `2^(-sum log2 P(s) / sum |s|)` over the in-language sentences.
pub fn perplexity(cfg: &ContextFreeGrammar, corpus: &[Sentence]) -> Result<Perplexity, PfsgError> {
    let parser = CfgParser::new(cfg);
    let mut log2_sum = 0.0;
    let mut words = 0;
    let mut sentences = 0;
    let mut excluded = Vec::new();
    for (i, s) in corpus.iter().enumerate() {
        let r = parser.parse(s);
        if r.accepted {
            log2_sum += r.log_prob / std::f64::consts::LN_2;
            words += s.len();
            sentences += 1;
        } else {
            excluded.push(i);
        }
    }
    if sentences == 0 {
        return Err(PfsgError::NoSentences {
            excluded: excluded.len(),
        });
    }
    Ok(Perplexity {
        value: (-log2_sum / words as f64).exp2(),
        sentences,
        words,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strings::tokenize;

    fn cfg(text: &str) -> ContextFreeGrammar {
        ContextFreeGrammar::parse(text).unwrap()
    }

    const INTJ: &str = "intj -> \"yes\" | \"no\" ;";

    #[test]
    fn intj_yes_has_log_half() {
        let r = cfg_parse(&cfg(INTJ), &tokenize("yes"));
        assert!(r.accepted);
        assert_eq!(r.derivation_count, 1);
        assert_eq!(r.log_prob, 0.5f64.ln());
    }

    #[test]
    fn unknown_word_is_rejected() {
        let r = cfg_parse(&cfg(INTJ), &tokenize("maybe"));
        assert!(!r.accepted);
        assert_eq!(r.log_prob, f64::NEG_INFINITY);
    }

    #[test]
    fn star_strings_and_probabilities() {
        let g = cfg("a -> \"c\" \"b\"* ;");
        let got = cfg_enumerate(&g, 3, 1000).unwrap();
        let want: BTreeSet<Sentence> = ["c", "c b", "c b b"].iter().map(|s| tokenize(s)).collect();
        assert_eq!(got, want);
        // skip 1/2; take, then stop 1/2 -> 1/4; one more loop -> 1/8
        assert_eq!(cfg_parse(&g, &tokenize("c")).log_prob, 0.5f64.ln());
        assert_eq!(cfg_parse(&g, &tokenize("c b")).log_prob, 0.25f64.ln());
        assert_eq!(cfg_parse(&g, &tokenize("c b b")).log_prob, 0.125f64.ln());
    }

    #[test]
    fn intj_perplexity_is_two() {
        let p = perplexity(&cfg(INTJ), &[tokenize("yes")]).unwrap();
        assert_eq!(p.value, 2.0);
        let p = perplexity(
            &cfg(INTJ),
            &[tokenize("yes"), tokenize("no"), tokenize("hm")],
        )
        .unwrap();
        assert_eq!(p.value, 2.0);
        assert_eq!(p.excluded, vec![2]);
    }

    #[test]
    fn all_out_of_language_is_an_error() {
        assert_eq!(
            perplexity(&cfg(INTJ), &[tokenize("hm")]),
            Err(PfsgError::NoSentences { excluded: 1 })
        );
    }

    #[test]
    fn enumeration_cap() {
        let g = cfg("s -> ( \"a\" | \"b\" ) \"c\"* ;");
        assert_eq!(
            cfg_enumerate(&g, 6, 5),
            Err(PfsgError::ResourceLimit { cap: 5 })
        );
    }
}
