//! Unification grammar data model.
//!
//! A [`Grammar`] is the source of truth for everything downstream: feature
//! declarations with finite value domains, phrase-structure rules whose
//! categories carry feature constraints, a lexicon of (possibly multi-word)
//! entries and a start symbol. Grammars are read from a small line-oriented
//! DSL (see [`parse_grammar`]) and printed back by their `Display` impl.

mod parse;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

pub use parse::{parse_grammar, ParseError, SyntaxError};
pub use validate::{validate, Diagnostic, DiagnosticKind};

/// Source line of a declaration. Lines are diagnostic metadata only: two
/// positions always compare equal so that structural equality of grammars
/// ignores where items came from.
#[derive(Clone, Copy, Debug, Default, Eq, PartialOrd, Ord)]
pub struct Line(pub u32);

impl PartialEq for Line {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureKind {
    Syntactic,
    Semantic,
}

impl FeatureKind {
    pub fn keyword(self) -> &'static str {
        match self {
            FeatureKind::Syntactic => "syn",
            FeatureKind::Semantic => "sem",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureDecl {
    pub name: String,
    pub kind: FeatureKind,
    /// Ordered finite value domain.
    pub domain: Vec<String>,
    pub line: Line,
}

impl FeatureDecl {
    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.domain.iter().position(|v| v == value)
    }
}

/// Constraint on one feature of a category. Features missing from a
/// category's constraint map are unconstrained.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    Atom(String),
    /// Nonempty set of admissible values.
    Subset(BTreeSet<String>),
    /// Rule-scoped variable; equal variables force equal values.
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Category {
    pub symbol: String,
    pub constraints: BTreeMap<String, Constraint>,
}

impl Category {
    pub fn new(symbol: impl Into<String>) -> Self {
        Category {
            symbol: symbol.into(),
            constraints: BTreeMap::new(),
        }
    }

    pub fn with(mut self, feature: &str, constraint: Constraint) -> Self {
        self.constraints.insert(feature.to_string(), constraint);
        self
    }

    pub fn has_vars(&self) -> bool {
        self.constraints
            .values()
            .any(|c| matches!(c, Constraint::Var(_)))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub id: String,
    pub mother: Category,
    pub daughters: Vec<Category>,
    pub line: Line,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEntry {
    pub surface: Vec<String>,
    pub category: Category,
    pub line: Line,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grammar {
    pub features: Vec<FeatureDecl>,
    pub rules: Vec<Rule>,
    pub lexicon: Vec<LexEntry>,
    pub start: String,
}

impl Grammar {
    pub fn feature(&self, name: &str) -> Option<&FeatureDecl> {
        self.features.iter().find(|f| f.name == name)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// Symbols that head at least one rule, in first-occurrence order.
    pub fn mother_symbols(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.rules
            .iter()
            .map(|r| r.mother.symbol.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    pub fn lexical_symbols(&self) -> BTreeSet<&str> {
        self.lexicon
            .iter()
            .map(|e| e.category.symbol.as_str())
            .collect()
    }

    /// Every symbol mentioned anywhere, sorted.
    pub fn symbols(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self.lexical_symbols();
        for r in &self.rules {
            out.insert(&r.mother.symbol);
            for d in &r.daughters {
                out.insert(&d.symbol);
            }
        }
        out.insert(&self.start);
        out
    }

    /// Distinct terminal tokens of the lexicon in first-occurrence order.
    pub fn vocabulary(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in &self.lexicon {
            for t in &e.surface {
                if seen.insert(t.as_str()) {
                    out.push(t.clone());
                }
            }
        }
        out
    }

    /// Features carried by each symbol: those constrained on it somewhere in
    /// a rule or lexical entry, in declaration order. Features never
    /// constrained on a symbol cannot distinguish its instances.
    pub fn symbol_dims(&self) -> BTreeMap<String, Vec<usize>> {
        let mut used: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
        let mut note = |cat: &Category| {
            let entry = used.entry(cat.symbol.clone()).or_default();
            for f in cat.constraints.keys() {
                if let Some(i) = self.feature_index(f) {
                    entry.insert(i);
                }
            }
        };
        for r in &self.rules {
            note(&r.mother);
            r.daughters.iter().for_each(&mut note);
        }
        for e in &self.lexicon {
            note(&e.category);
        }
        used.into_iter()
            .map(|(s, set)| (s, set.into_iter().collect()))
            .collect()
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::Atom(v) | Constraint::Var(v) => f.write_str(v),
            Constraint::Subset(vs) => {
                f.write_str("{")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    f.write_str(v)?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Prints a category with its constraints in the given feature order.
struct CatDisplay<'a> {
    cat: &'a Category,
    order: &'a [FeatureDecl],
}

impl fmt::Display for CatDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cat.symbol)?;
        if self.cat.constraints.is_empty() {
            return Ok(());
        }
        f.write_str(":[")?;
        let mut first = true;
        let declared = self.order.iter().map(|d| d.name.as_str());
        let undeclared = self
            .cat
            .constraints
            .keys()
            .map(String::as_str)
            .filter(|k| self.order.iter().all(|d| d.name != *k));
        for name in declared.chain(undeclared) {
            if let Some(c) = self.cat.constraints.get(name) {
                if !first {
                    f.write_str(", ")?;
                }
                first = false;
                write!(f, "{}={}", name, c)?;
            }
        }
        f.write_str("]")
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.features {
            writeln!(
                f,
                "feature {} {} {{{}}}",
                d.name,
                d.kind.keyword(),
                d.domain.join(", ")
            )?;
        }
        writeln!(f, "start {}", self.start)?;
        let cat = |c| CatDisplay {
            cat: c,
            order: &self.features,
        };
        for r in &self.rules {
            write!(f, "rule {}: {} ->", r.id, cat(&r.mother))?;
            for d in &r.daughters {
                write!(f, " {}", cat(d))?;
            }
            writeln!(f)?;
        }
        for e in &self.lexicon {
            writeln!(f, "lex \"{}\": {}", e.surface.join(" "), cat(&e.category))?;
        }
        Ok(())
    }
}
