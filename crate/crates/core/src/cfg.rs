//! Context-free grammars with regular right-hand sides (sequence,
//! disjunction, Kleene star) and their text format.
//!
//! ```text
//! s -> np__agr-sg vp__agr-sg | np__agr-pl vp__agr-pl ;
//! intj -> "yes" | "no" ;
//! ```
//!
//! The first production names the start symbol; the rest follow in name
//! order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Term(String),
    Ref(String),
    Seq(Vec<Expr>),
    Alt(Vec<Expr>),
    Star(Box<Expr>),
}

impl Expr {
    pub fn term(t: &str) -> Expr {
        Expr::Term(t.to_string())
    }

    pub fn nt(n: &str) -> Expr {
        Expr::Ref(n.to_string())
    }

    /// Sequence of `items`, collapsing the one-element case.
    pub fn seq(mut items: Vec<Expr>) -> Expr {
        if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Expr::Seq(items)
        }
    }

    /// Disjunction of `alts`, collapsing the one-element case.
    pub fn alt(mut alts: Vec<Expr>) -> Expr {
        if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            Expr::Alt(alts)
        }
    }

    pub fn star(e: Expr) -> Expr {
        Expr::Star(Box::new(e))
    }

    /// Top-level alternatives of a production body.
    pub fn alternatives(&self) -> &[Expr] {
        match self {
            Expr::Alt(alts) => alts,
            other => std::slice::from_ref(other),
        }
    }

    pub fn nullable(&self) -> bool {
        match self {
            Expr::Term(_) | Expr::Ref(_) => false,
            Expr::Seq(items) => items.iter().all(Expr::nullable),
            Expr::Alt(alts) => alts.iter().any(Expr::nullable),
            Expr::Star(_) => true,
        }
    }

    /// Nonterminals that can occur leftmost in a derivation step of this
    /// expression.
    pub fn leftmost_refs<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Term(_) => {}
            Expr::Ref(n) => {
                out.insert(n);
            }
            Expr::Seq(items) => {
                for item in items {
                    item.leftmost_refs(out);
                    if !item.nullable() {
                        break;
                    }
                }
            }
            Expr::Alt(alts) => alts.iter().for_each(|a| a.leftmost_refs(out)),
            Expr::Star(inner) => inner.leftmost_refs(out),
        }
    }

    pub fn refs<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Term(_) => {}
            Expr::Ref(n) => {
                out.insert(n);
            }
            Expr::Seq(xs) | Expr::Alt(xs) => xs.iter().for_each(|x| x.refs(out)),
            Expr::Star(inner) => inner.refs(out),
        }
    }

    /// True when the expression mentions no nonterminal.
    pub fn is_terminal_only(&self) -> bool {
        let mut refs = BTreeSet::new();
        self.refs(&mut refs);
        refs.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContextFreeGrammar {
    pub start: String,
    pub productions: BTreeMap<String, Expr>,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CfgError {
    #[error("{line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("nonterminal `{name}` is referenced but has no production")]
    Unresolved { name: String },
    #[error("production for `{name}` can derive the empty string")]
    Nullable { name: String },
    #[error("nonterminal `{name}` derives no string")]
    Unproductive { name: String },
}

impl ContextFreeGrammar {
    /// Checks that every reference resolves and no alternative is nullable.
    pub fn check(&self) -> Result<(), CfgError> {
        if !self.productions.contains_key(&self.start) {
            return Err(CfgError::Unresolved {
                name: self.start.clone(),
            });
        }
        for (name, body) in &self.productions {
            let mut refs = BTreeSet::new();
            body.refs(&mut refs);
            if let Some(missing) = refs.iter().find(|r| !self.productions.contains_key(**r)) {
                return Err(CfgError::Unresolved {
                    name: missing.to_string(),
                });
            }
            if body.nullable() {
                return Err(CfgError::Nullable { name: name.clone() });
            }
        }
        Ok(())
    }

    /// Edges of the leftmost-derivation graph.
    pub fn leftmost_graph(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        self.productions
            .iter()
            .map(|(name, body)| {
                let mut out = BTreeSet::new();
                body.leftmost_refs(&mut out);
                (name.as_str(), out)
            })
            .collect()
    }

    /// Nonterminals lying on a cycle of the leftmost-derivation graph.
    pub fn left_recursive(&self) -> BTreeSet<String> {
        let graph = self.leftmost_graph();
        let mut out = BTreeSet::new();
        for &origin in graph.keys() {
            // Depth-first search for a path back to `origin`.
            let mut stack: Vec<&str> = graph[origin].iter().copied().collect();
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if n == origin {
                    out.insert(origin.to_string());
                    break;
                }
                if seen.insert(n) {
                    if let Some(next) = graph.get(n) {
                        stack.extend(next.iter().copied());
                    }
                }
            }
        }
        out
    }

    pub fn has_left_recursion(&self) -> bool {
        !self.left_recursive().is_empty()
    }

    /// Production names with the start symbol first.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.start.as_str()).chain(
            self.productions
                .keys()
                .map(String::as_str)
                .filter(move |n| *n != self.start),
        )
    }

    pub fn parse(text: &str) -> Result<Self, CfgError> {
        let mut start = None;
        let mut productions = BTreeMap::new();
        let mut p = CfgParser::new(text);
        loop {
            p.skip_trivia();
            if p.at_end() {
                break;
            }
            let name = p.name()?;
            p.expect("->")?;
            let body = p.alts()?;
            p.expect(";")?;
            if productions.insert(name.clone(), body).is_some() {
                return Err(p.error(format!("duplicate production for `{}`", name)));
            }
            start.get_or_insert(name);
        }
        let start = start.ok_or_else(|| p.error("no productions".to_string()))?;
        let cfg = ContextFreeGrammar { start, productions };
        cfg.check()?;
        Ok(cfg)
    }
}

fn write_item(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Term(t) => write!(f, "\"{}\"", t),
        Expr::Ref(n) => f.write_str(n),
        Expr::Star(inner) => {
            write_item(f, inner)?;
            f.write_str("*")
        }
        Expr::Seq(_) | Expr::Alt(_) => {
            f.write_str("( ")?;
            write_alts(f, e)?;
            f.write_str(" )")
        }
    }
}

fn write_seq(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Seq(items) => {
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    f.write_str(" ")?;
                }
                write_item(f, item)?;
            }
            Ok(())
        }
        other => write_item(f, other),
    }
}

fn write_alts(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Alt(alts) => {
            for (i, a) in alts.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write_seq(f, a)?;
            }
            Ok(())
        }
        other => write_seq(f, other),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_alts(f, self)
    }
}

impl fmt::Display for ContextFreeGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in self.names() {
            writeln!(f, "{} -> {} ;", name, self.productions[name])?;
        }
        Ok(())
    }
}

struct CfgParser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> CfgParser<'a> {
    fn new(text: &'a str) -> Self {
        CfgParser { text, pos: 0 }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn error(&self, message: String) -> CfgError {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = self.pos - before.rfind('\n').map_or(0, |i| i + 1) + 1;
        CfgError::Syntax {
            line,
            column,
            message,
        }
    }

    fn skip_trivia(&mut self) {
        loop {
            let trimmed = self.rest().trim_start();
            self.pos = self.text.len() - trimmed.len();
            if trimmed.starts_with('#') {
                self.pos += trimmed.find('\n').unwrap_or(trimmed.len());
            } else {
                return;
            }
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_trivia();
        self.rest().chars().next()
    }

    fn expect(&mut self, tok: &str) -> Result<(), CfgError> {
        self.skip_trivia();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", tok)))
        }
    }

    fn name(&mut self) -> Result<String, CfgError> {
        self.skip_trivia();
        let rest = self.rest().as_bytes();
        let mut len = 0;
        while len < rest.len() {
            let c = rest[len];
            // `->` is punctuation, not part of a name.
            let arrow = c == b'-' && rest.get(len + 1) == Some(&b'>');
            if arrow || !(c.is_ascii_alphanumeric() || b"_+-".contains(&c)) {
                break;
            }
            len += 1;
        }
        if len == 0 {
            return Err(self.error("expected nonterminal name".to_string()));
        }
        let name = self.rest()[..len].to_string();
        self.pos += len;
        Ok(name)
    }

    fn alts(&mut self) -> Result<Expr, CfgError> {
        let mut alts = vec![self.seq()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            alts.push(self.seq()?);
        }
        Ok(Expr::alt(alts))
    }

    fn seq(&mut self) -> Result<Expr, CfgError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if matches!(c, '|' | ')' | ';') {
                break;
            }
            let mut item = self.atom()?;
            while self.peek() == Some('*') {
                self.pos += 1;
                item = Expr::star(item);
            }
            items.push(item);
        }
        if items.is_empty() {
            return Err(self.error("empty alternative".to_string()));
        }
        Ok(Expr::seq(items))
    }

    fn atom(&mut self) -> Result<Expr, CfgError> {
        match self.peek() {
            Some('"') => {
                self.pos += 1;
                let end = self
                    .rest()
                    .find('"')
                    .ok_or_else(|| self.error("unterminated terminal".to_string()))?;
                let t = self.rest()[..end].to_string();
                self.pos += end + 1;
                Ok(Expr::Term(t))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.alts()?;
                self.expect(")")?;
                Ok(inner)
            }
            _ => Ok(Expr::Ref(self.name()?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let text = "a -> \"c\" ( \"b\" )* | b x ;\nb -> ( \"x\" | \"y\" z ) \"w\" ;\nx -> \"q\" ;\nz -> \"z\" ;\n";
        let cfg = ContextFreeGrammar::parse(text).unwrap();
        assert_eq!(cfg.start, "a");
        let printed = cfg.to_string();
        assert_eq!(ContextFreeGrammar::parse(&printed).unwrap(), cfg);
        assert!(printed.starts_with("a -> \"c\" \"b\"* | b x ;"));
    }

    #[test]
    fn mnemonic_names_parse() {
        let cfg =
            ContextFreeGrammar::parse("s -> np__agr-sg+pl ;\nnp__agr-sg+pl -> \"x\" ;").unwrap();
        assert!(cfg.productions.contains_key("np__agr-sg+pl"));
    }

    #[test]
    fn unresolved_reference_is_an_error() {
        assert_eq!(
            ContextFreeGrammar::parse("s -> t ;").unwrap_err(),
            CfgError::Unresolved { name: "t".into() }
        );
    }

    #[test]
    fn detects_direct_and_indirect_left_recursion() {
        let direct = ContextFreeGrammar::parse("a -> a \"b\" | \"c\" ;").unwrap();
        assert!(direct.has_left_recursion());
        let indirect =
            ContextFreeGrammar::parse("a -> b \"x\" | \"p\" ;\nb -> a \"y\" | \"q\" ;").unwrap();
        assert_eq!(indirect.left_recursive().len(), 2);
        let through_star = ContextFreeGrammar::parse("a -> \"b\"* a \"c\" | \"d\" ;").unwrap();
        assert!(through_star.has_left_recursion());
        let none = ContextFreeGrammar::parse("a -> \"c\" a | \"c\" ;").unwrap();
        assert!(!none.has_left_recursion());
    }
}
