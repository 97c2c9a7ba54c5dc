//! Probabilistic finite-state graphs built from a left-recursion-free CFG,
//! their size metrics, and CFG-side recognition, enumeration and
//! perplexity under the same uniform-choice model.

mod bnf;
mod metrics;
mod walk;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::cfg::{ContextFreeGrammar, Expr};

pub use bnf::{cfg_enumerate, cfg_parse, perplexity, CfgParse, CfgParser, Perplexity};
pub use metrics::{measure, CategoryMetrics, MetricsReport};
pub use walk::pfsg_enumerate;

pub const START: usize = 0;
pub const END: usize = 1;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PfsgError {
    #[error("nonterminal `{name}` is referenced but has no production")]
    Unresolved { name: String },
    #[error("production for `{name}` has a nullable part the graph builder cannot realise")]
    Unsupported { name: String },
    #[error("more than {cap} strings")]
    ResourceLimit { cap: usize },
    #[error("perplexity undefined: none of the {excluded} sentences is in the language")]
    NoSentences { excluded: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Label {
    Word(String),
    Graph(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Word(w) => f.write_str(w),
            Label::Graph(g) => write!(f, "@{}", g),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub label: Label,
    pub prob: f64,
}

/// One graph per nonterminal. Node 0 is the start and node 1 the end.
#[derive(Clone, Debug, PartialEq)]
pub struct Pfsg {
    pub name: String,
    pub nodes: usize,
    pub transitions: Vec<Transition>,
}

impl Pfsg {
    /// Outgoing probability mass of every node.
    pub fn outgoing_mass(&self) -> Vec<f64> {
        let mut mass = vec![0.0; self.nodes];
        for t in &self.transitions {
            mass[t.from] += t.prob;
        }
        mass
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PfsgSet {
    pub top: String,
    pub graphs: BTreeMap<String, Pfsg>,
}

impl PfsgSet {
    /// Nodes (other than end nodes) whose outgoing mass differs from 1 by
    /// more than `tol`, as (graph, node, mass).
    pub fn unnormalized(&self, tol: f64) -> Vec<(String, usize, f64)> {
        let mut bad = Vec::new();
        for g in self.graphs.values() {
            for (n, m) in g.outgoing_mass().into_iter().enumerate() {
                if n != END && (m - 1.0).abs() > tol {
                    bad.push((g.name.clone(), n, m));
                }
            }
        }
        bad
    }

    /// Graph names, top first.
    pub fn names(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.top.as_str()).chain(
            self.graphs
                .keys()
                .map(String::as_str)
                .filter(move |n| *n != self.top),
        )
    }
}

impl fmt::Display for PfsgSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for name in self.names() {
            let g = &self.graphs[name];
            writeln!(
                f,
                "graph {} nodes={} start={} end={}",
                g.name, g.nodes, START, END
            )?;
            for t in &g.transitions {
                writeln!(f, "t {} {} {} {:.9}", t.from, t.to, t.label, t.prob)?;
            }
        }
        Ok(())
    }
}

struct Builder<'a> {
    name: &'a str,
    nodes: usize,
    transitions: Vec<Transition>,
}

impl Builder<'_> {
    fn fresh(&mut self) -> usize {
        self.nodes += 1;
        self.nodes - 1
    }

    fn unsupported(&self) -> PfsgError {
        PfsgError::Unsupported {
            name: self.name.to_string(),
        }
    }

    fn item(&mut self, e: &Expr, from: usize, to: usize, p: f64) -> Result<(), PfsgError> {
        match e {
            Expr::Term(w) => self.edge(from, to, Label::Word(w.clone()), p),
            Expr::Ref(n) => self.edge(from, to, Label::Graph(n.clone()), p),
            Expr::Seq(items) => self.seq(items, from, to, p)?,
            Expr::Alt(alts) => {
                let q = p / alts.len() as f64;
                for a in alts {
                    self.item(a, from, to, q)?;
                }
            }
            Expr::Star(_) => return Err(self.unsupported()),
        }
        Ok(())
    }

    fn edge(&mut self, from: usize, to: usize, label: Label, prob: f64) {
        self.transitions.push(Transition {
            from,
            to,
            label,
            prob,
        });
    }

    fn seq(&mut self, items: &[Expr], from: usize, to: usize, p: f64) -> Result<(), PfsgError> {
        let nullable = |xs: &[Expr]| xs.iter().all(Expr::nullable);
        match items {
            [] => Err(self.unsupported()),
            [x] => self.item(x, from, to, p),
            [Expr::Star(x), rest @ ..] => {
                if x.nullable() || nullable(rest) {
                    return Err(self.unsupported());
                }
                // Skip the loop, or take it at least once.
                self.seq(rest, from, to, p / 2.0)?;
                let n = self.fresh();
                self.item(x, from, n, p / 2.0)?;
                self.item(x, n, n, 0.5)?;
                self.seq(rest, n, to, 0.5)
            }
            [y, Expr::Star(x)] => {
                if y.nullable() || x.nullable() {
                    return Err(self.unsupported());
                }
                self.item(y, from, to, p / 2.0)?;
                let n = self.fresh();
                self.item(y, from, n, p / 2.0)?;
                self.item(x, n, n, 0.5)?;
                self.item(x, n, to, 0.5)
            }
            [y, rest @ ..] => {
                if y.nullable() || nullable(rest) {
                    return Err(self.unsupported());
                }
                let m = self.fresh();
                self.item(y, from, m, p)?;
                self.seq(rest, m, to, 1.0)
            }
        }
    }
}

/// Builds one graph per production.
///
/// Every alternative becomes a start-to-end path and choices are uniform.
/// A starred item is a node with a self-loop: loop and exit each take half
/// the mass. No epsilon transitions are produced and no nodes are shared
/// between alternatives beyond the start and end.
pub fn build_pfsg(cfg: &ContextFreeGrammar) -> Result<PfsgSet, PfsgError> {
    if let Err(e) = cfg.check() {
        return Err(match e {
            crate::cfg::CfgError::Unresolved { name } => PfsgError::Unresolved { name },
            crate::cfg::CfgError::Nullable { name } => PfsgError::Unsupported { name },
            other => PfsgError::Unsupported {
                name: other.to_string(),
            },
        });
    }
    let mut graphs = BTreeMap::new();
    for (name, body) in &cfg.productions {
        let mut b = Builder {
            name,
            nodes: 2,
            transitions: Vec::new(),
        };
        b.item(body, START, END, 1.0)?;
        graphs.insert(
            name.clone(),
            Pfsg {
                name: name.clone(),
                nodes: b.nodes,
                transitions: b.transitions,
            },
        );
    }
    Ok(PfsgSet {
        top: cfg.start.clone(),
        graphs,
    })
}
