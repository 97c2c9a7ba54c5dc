//! Grammar variants used to locate size problems, and comparison of two
//! metrics reports.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

use thiserror::Error;

use crate::grammar::{Category, Grammar, LexEntry, Line, Rule};
use crate::pfsg::{CategoryMetrics, MetricsReport};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("empty vocabulary")]
    EmptyVocabulary,
    #[error("no rule with id `{0}`")]
    UnknownRule(String),
    #[error("feature `{feature}` is not constrained in rule `{rule}`")]
    FeatureNotInRule { rule: String, feature: String },
}

/// Accepts every nonempty sequence over `vocab`: `S -> W S | W` and one
/// `W` entry per word.
pub fn wordplus_grammar(vocab: &BTreeSet<String>) -> Result<Grammar, AnalysisError> {
    if vocab.is_empty() {
        return Err(AnalysisError::EmptyVocabulary);
    }
    let rule = |id: &str, daughters: &[&str]| Rule {
        id: id.to_string(),
        mother: Category::new("S"),
        daughters: daughters.iter().map(|d| Category::new(*d)).collect(),
        line: Line(0),
    };
    Ok(Grammar {
        features: Vec::new(),
        rules: vec![rule("more", &["W", "S"]), rule("one", &["W"])],
        lexicon: vocab
            .iter()
            .map(|w| LexEntry {
                surface: vec![w.clone()],
                category: Category::new("W"),
                line: Line(0),
            })
            .collect(),
        start: "S".to_string(),
    })
}

/// Keeps the first `k` lexical entries, in file order, of every distinct
/// lexical category.
pub fn k_words_per_category(grammar: &Grammar, k: usize) -> Grammar {
    let mut seen: HashMap<Category, usize> = HashMap::new();
    let mut g = grammar.clone();
    g.lexicon.retain(|e| {
        let n = seen.entry(e.category.clone()).or_insert(0);
        *n += 1;
        *n <= k
    });
    g
}

/// Drops the listed features from every category of one rule, breaking
/// the variable links that carry them.
pub fn unlink_features(
    grammar: &Grammar,
    rule_id: &str,
    features: &[String],
) -> Result<Grammar, AnalysisError> {
    let mut g = grammar.clone();
    let rule = g
        .rules
        .iter_mut()
        .find(|r| r.id == rule_id)
        .ok_or_else(|| AnalysisError::UnknownRule(rule_id.to_string()))?;
    for f in features {
        let present = std::iter::once(&rule.mother)
            .chain(&rule.daughters)
            .any(|c| c.constraints.contains_key(f));
        if !present {
            return Err(AnalysisError::FeatureNotInRule {
                rule: rule_id.to_string(),
                feature: f.clone(),
            });
        }
    }
    for c in std::iter::once(&mut rule.mother).chain(rule.daughters.iter_mut()) {
        c.constraints.retain(|k, _| !features.contains(k));
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Delta {
    pub left: f64,
    pub right: f64,
}

impl Delta {
    pub fn diff(&self) -> f64 {
        self.right - self.left
    }

    /// `right / left`; 1 when both are zero.
    pub fn ratio(&self) -> f64 {
        if self.left == 0.0 && self.right == 0.0 {
            1.0
        } else {
            self.right / self.left
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryDelta {
    pub category: String,
    pub graph_count: Delta,
    pub mean_nodes: Delta,
    pub mean_transitions: Delta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffReport {
    pub left: String,
    pub right: String,
    pub graphs: Delta,
    pub nodes: Delta,
    pub transitions: Delta,
    /// Categories present on both sides, largest change in mean
    /// transitions first.
    pub categories: Vec<CategoryDelta>,
    pub only_left: Vec<String>,
    pub only_right: Vec<String>,
}

fn delta(l: f64, r: f64) -> Delta {
    Delta { left: l, right: r }
}

/// Compares two reports. Category rows are ordered by how far the ratio of
/// mean transitions is from 1 in either direction (|ln ratio|), then by
/// name.
pub fn compare(left: &MetricsReport, right: &MetricsReport) -> DiffReport {
    let mut categories: Vec<CategoryDelta> = left
        .per_category
        .iter()
        .filter_map(|(c, l)| {
            let r: &CategoryMetrics = right.per_category.get(c)?;
            Some(CategoryDelta {
                category: c.clone(),
                graph_count: delta(l.graph_count as f64, r.graph_count as f64),
                mean_nodes: delta(l.mean_nodes, r.mean_nodes),
                mean_transitions: delta(l.mean_transitions, r.mean_transitions),
            })
        })
        .collect();
    let key = |d: &CategoryDelta| d.mean_transitions.ratio().ln().abs();
    categories.sort_by(|a, b| {
        key(b)
            .total_cmp(&key(a))
            .then_with(|| a.category.cmp(&b.category))
    });
    let only = |a: &MetricsReport, b: &MetricsReport| {
        a.per_category
            .keys()
            .filter(|c| !b.per_category.contains_key(*c))
            .cloned()
            .collect()
    };
    DiffReport {
        left: left.name.clone(),
        right: right.name.clone(),
        graphs: delta(left.graph_count() as f64, right.graph_count() as f64),
        nodes: delta(left.total_nodes as f64, right.total_nodes as f64),
        transitions: delta(
            left.total_transitions as f64,
            right.total_transitions as f64,
        ),
        categories,
        only_left: only(left, right),
        only_right: only(right, left),
    }
}

impl DiffReport {
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "left={}", self.left);
        let _ = writeln!(s, "right={}", self.right);
        let mut row = |key: &str, d: &Delta| {
            let _ = writeln!(s, "{}.left={}", key, d.left);
            let _ = writeln!(s, "{}.right={}", key, d.right);
            let _ = writeln!(s, "{}.diff={:.6}", key, d.diff());
            let _ = writeln!(s, "{}.ratio={:.6}", key, d.ratio());
        };
        row("graphs", &self.graphs);
        row("total_nodes", &self.nodes);
        row("total_transitions", &self.transitions);
        for c in &self.categories {
            row(
                &format!("category.{}.graph_count", c.category),
                &c.graph_count,
            );
            row(
                &format!("category.{}.mean_nodes", c.category),
                &c.mean_nodes,
            );
            row(
                &format!("category.{}.mean_transitions", c.category),
                &c.mean_transitions,
            );
        }
        for c in &self.only_left {
            let _ = writeln!(s, "only_left={}", c);
        }
        for c in &self.only_right {
            let _ = writeln!(s, "only_right={}", c);
        }
        s
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} -> {}", self.left, self.right);
        for (name, d) in [
            ("graphs", &self.graphs),
            ("nodes", &self.nodes),
            ("transitions", &self.transitions),
        ] {
            let _ = writeln!(
                s,
                "  {:<12} {:>10} {:>10} {:>9.3}x",
                name,
                d.left,
                d.right,
                d.ratio()
            );
        }
        let width = self
            .categories
            .iter()
            .map(|c| c.category.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let _ = writeln!(
            s,
            "  {:<width$} {:>13} {:>21} {:>8}",
            "category", "graphs", "mean transitions", "ratio"
        );
        for c in &self.categories {
            let _ = writeln!(
                s,
                "  {:<width$} {:>6} {:>6} {:>10.2} {:>10.2} {:>7.3}x",
                c.category,
                c.graph_count.left,
                c.graph_count.right,
                c.mean_transitions.left,
                c.mean_transitions.right,
                c.mean_transitions.ratio()
            );
        }
        if !self.only_left.is_empty() {
            let _ = writeln!(s, "  only in {}: {}", self.left, self.only_left.join(" "));
        }
        if !self.only_right.is_empty() {
            let _ = writeln!(s, "  only in {}: {}", self.right, self.only_right.join(" "));
        }
        s
    }
}
