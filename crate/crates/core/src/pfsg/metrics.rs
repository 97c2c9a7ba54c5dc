use std::collections::BTreeMap;
use std::fmt::Write;

use super::PfsgSet;

#[derive(Clone, Debug, PartialEq)]
pub struct CategoryMetrics {
    pub graph_count: usize,
    pub mean_nodes: f64,
    pub mean_transitions: f64,
}

/// Size of a graph set. Terminals sit on transitions; there are no separate
/// lexical graphs, so every word occurrence counts as one transition.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MetricsReport {
    pub name: String,
    pub total_nodes: usize,
    pub total_transitions: usize,
    /// graph name -> (nodes, transitions)
    pub per_graph: BTreeMap<String, (usize, usize)>,
    pub max_transitions_per_graph: usize,
    pub per_category: BTreeMap<String, CategoryMetrics>,
    /// Extra key=value pairs carried through unchanged (expansion stats).
    pub extra: BTreeMap<String, String>,
}

/// Category of a graph: its name up to the first `__`.
pub fn category_of(graph: &str) -> &str {
    graph.split("__").next().unwrap_or(graph)
}

impl MetricsReport {
    pub fn from_graphs(name: &str, per_graph: BTreeMap<String, (usize, usize)>) -> Self {
        let mut sums: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
        for (g, &(n, t)) in &per_graph {
            let e = sums.entry(category_of(g).to_string()).or_default();
            e.0 += 1;
            e.1 += n;
            e.2 += t;
        }
        MetricsReport {
            name: name.to_string(),
            total_nodes: per_graph.values().map(|p| p.0).sum(),
            total_transitions: per_graph.values().map(|p| p.1).sum(),
            max_transitions_per_graph: per_graph.values().map(|p| p.1).max().unwrap_or(0),
            per_category: sums
                .into_iter()
                .map(|(c, (k, n, t))| {
                    let metrics = CategoryMetrics {
                        graph_count: k,
                        mean_nodes: n as f64 / k as f64,
                        mean_transitions: t as f64 / k as f64,
                    };
                    (c, metrics)
                })
                .collect(),
            per_graph,
            extra: BTreeMap::new(),
        }
    }

    /// Nodes plus transitions.
    pub fn size(&self) -> usize {
        self.total_nodes + self.total_transitions
    }

    pub fn graph_count(&self) -> usize {
        self.per_graph.len()
    }

    pub fn mean_transitions_per_graph(&self) -> f64 {
        self.total_transitions as f64 / self.per_graph.len().max(1) as f64
    }

    /// Machine-readable form, parsed back by [`MetricsReport::parse`].
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        s.push_str("# nodes and transitions of every graph; terminals are counted inline\n");
        s.push_str("# as transitions, with no separate lexical graphs\n");
        let _ = writeln!(s, "name={}", self.name);
        let _ = writeln!(s, "graphs={}", self.per_graph.len());
        let _ = writeln!(s, "total_nodes={}", self.total_nodes);
        let _ = writeln!(s, "total_transitions={}", self.total_transitions);
        let _ = writeln!(
            s,
            "max_transitions_per_graph={}",
            self.max_transitions_per_graph
        );
        let _ = writeln!(
            s,
            "mean_transitions_per_graph={:.6}",
            self.mean_transitions_per_graph()
        );
        for (k, v) in &self.extra {
            let _ = writeln!(s, "{}={}", k, v);
        }
        for (c, m) in &self.per_category {
            let _ = writeln!(s, "category.{}.graph_count={}", c, m.graph_count);
            let _ = writeln!(s, "category.{}.mean_nodes={:.6}", c, m.mean_nodes);
            let _ = writeln!(
                s,
                "category.{}.mean_transitions={:.6}",
                c, m.mean_transitions
            );
        }
        for (g, (n, t)) in &self.per_graph {
            let _ = writeln!(s, "graph.{}.nodes={}", g, n);
            let _ = writeln!(s, "graph.{}.transitions={}", g, t);
        }
        s
    }

    /// Reads the key=value form. Totals and categories are recomputed from
    /// the per-graph lines.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut name = String::new();
        let mut graphs: BTreeMap<String, (usize, usize)> = BTreeMap::new();
        let mut extra = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
            let number = || {
                value
                    .parse::<usize>()
                    .map_err(|_| format!("line {}: `{}` is not a count", i + 1, value))
            };
            if let Some(rest) = key.strip_prefix("graph.") {
                if let Some(g) = rest.strip_suffix(".nodes") {
                    graphs.entry(g.to_string()).or_default().0 = number()?;
                } else if let Some(g) = rest.strip_suffix(".transitions") {
                    graphs.entry(g.to_string()).or_default().1 = number()?;
                } else {
                    return Err(format!("line {}: unknown key `{}`", i + 1, key));
                }
            } else if key == "name" {
                name = value.to_string();
            } else if matches!(key, "naive_count" | "emitted_rules" | "reduction_factor") {
                extra.insert(key.to_string(), value.to_string());
            }
        }
        let mut report = MetricsReport::from_graphs(&name, graphs);
        report.extra = extra;
        Ok(report)
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.name);
        let _ = writeln!(
            s,
            "  graphs {}  nodes {}  transitions {}  max transitions/graph {}",
            self.per_graph.len(),
            self.total_nodes,
            self.total_transitions,
            self.max_transitions_per_graph
        );
        for (k, v) in &self.extra {
            let _ = writeln!(s, "  {} {}", k, v);
        }
        let width = self
            .per_category
            .keys()
            .map(String::len)
            .max()
            .unwrap_or(8)
            .max(8);
        let _ = writeln!(
            s,
            "  {:<width$} {:>7} {:>11} {:>11}",
            "category", "graphs", "mean nodes", "mean trans"
        );
        for (c, m) in &self.per_category {
            let _ = writeln!(
                s,
                "  {:<width$} {:>7} {:>11.2} {:>11.2}",
                c, m.graph_count, m.mean_nodes, m.mean_transitions
            );
        }
        s
    }
}

pub fn measure(set: &PfsgSet) -> MetricsReport {
    let per_graph = set
        .graphs
        .iter()
        .map(|(n, g)| (n.clone(), (g.nodes, g.transitions.len())))
        .collect();
    MetricsReport::from_graphs(&set.top, per_graph)
}
