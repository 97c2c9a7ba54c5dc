use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Category, Constraint, Grammar};

/// Largest supported feature domain; value sets are stored as 64-bit masks.
pub const MAX_DOMAIN: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// Source line, 0 for grammar-wide problems.
    pub line: u32,
    /// Rule id, lexical surface or feature name the problem belongs to.
    pub item: Option<String>,
    pub kind: DiagnosticKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateFeature {
        feature: String,
    },
    DuplicateDomainValue {
        feature: String,
        value: String,
    },
    DomainTooLarge {
        feature: String,
        size: usize,
    },
    UnknownFeature {
        feature: String,
    },
    ValueOutsideDomain {
        feature: String,
        value: String,
    },
    VariableDomainMismatch {
        var: String,
        first: String,
        second: String,
    },
    VariableInLexicon {
        var: String,
    },
    EpsilonRule,
    DuplicateRuleId,
    BadSymbol {
        symbol: String,
    },
    SymbolCaseCollision {
        symbol: String,
        other: String,
    },
    BadToken {
        token: String,
    },
    EmptySurface,
    UndefinedSymbol {
        symbol: String,
    },
    UnreachableStart {
        symbol: String,
    },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line > 0 {
            write!(f, "{}: ", self.line)?;
        }
        if let Some(item) = &self.item {
            write!(f, "[{}] ", item)?;
        }
        use DiagnosticKind::*;
        match &self.kind {
            DuplicateFeature { feature } => write!(f, "duplicate feature `{feature}`"),
            DuplicateDomainValue { feature, value } => {
                write!(f, "value `{value}` listed twice in domain of `{feature}`")
            }
            DomainTooLarge { feature, size } => write!(
                f,
                "feature `{feature}` has {size} values (at most {MAX_DOMAIN} supported)"
            ),
            UnknownFeature { feature } => write!(f, "unknown feature `{feature}`"),
            ValueOutsideDomain { feature, value } => {
                write!(f, "value `{value}` is outside the domain of `{feature}`")
            }
            VariableDomainMismatch { var, first, second } => write!(
                f,
                "variable `{var}` links `{first}` and `{second}`, whose domains differ"
            ),
            VariableInLexicon { var } => write!(f, "variable `{var}` in a lexical entry"),
            EpsilonRule => write!(f, "rule has an empty right-hand side"),
            DuplicateRuleId => write!(f, "duplicate rule id"),
            BadSymbol { symbol } => write!(f, "symbol `{symbol}` must not contain `__`"),
            SymbolCaseCollision { symbol, other } => {
                write!(f, "symbols `{symbol}` and `{other}` differ only in case")
            }
            BadToken { token } => {
                write!(f, "terminal `{token}` must be lowercase without whitespace")
            }
            EmptySurface => write!(f, "lexical entry has no tokens"),
            UndefinedSymbol { symbol } => write!(
                f,
                "symbol `{symbol}` is neither a rule mother nor a lexical category"
            ),
            UnreachableStart { symbol } => {
                write!(f, "start symbol `{symbol}` heads no rule")
            }
        }
    }
}

/// Checks every well-formedness invariant. An empty result means the grammar
/// is valid. Diagnostics are ordered by source line, grammar-wide ones last.
pub fn validate(g: &Grammar) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |line: u32, item: Option<&str>, kind| {
        out.push(Diagnostic {
            line,
            item: item.map(str::to_string),
            kind,
        })
    };

    let mut seen = BTreeSet::new();
    for d in &g.features {
        if !seen.insert(d.name.as_str()) {
            push(
                d.line.0,
                Some(&d.name),
                DiagnosticKind::DuplicateFeature {
                    feature: d.name.clone(),
                },
            );
        }
        let mut vals = BTreeSet::new();
        for v in &d.domain {
            if !vals.insert(v) {
                push(
                    d.line.0,
                    Some(&d.name),
                    DiagnosticKind::DuplicateDomainValue {
                        feature: d.name.clone(),
                        value: v.clone(),
                    },
                );
            }
        }
        if d.domain.len() > MAX_DOMAIN {
            push(
                d.line.0,
                Some(&d.name),
                DiagnosticKind::DomainTooLarge {
                    feature: d.name.clone(),
                    size: d.domain.len(),
                },
            );
        }
    }

    let mothers: BTreeSet<&str> = g.rules.iter().map(|r| r.mother.symbol.as_str()).collect();
    let lexical = g.lexical_symbols();
    let mut rule_ids = BTreeSet::new();

    for r in &g.rules {
        let line = r.line.0;
        let id = Some(r.id.as_str());
        if !rule_ids.insert(r.id.as_str()) {
            push(line, id, DiagnosticKind::DuplicateRuleId);
        }
        if r.daughters.is_empty() {
            push(line, id, DiagnosticKind::EpsilonRule);
        }
        let mut var_feature: BTreeMap<&str, &str> = BTreeMap::new();
        for cat in std::iter::once(&r.mother).chain(&r.daughters) {
            for kind in category_problems(g, cat) {
                push(line, id, kind);
            }
            for (feat, c) in &cat.constraints {
                let Constraint::Var(v) = c else { continue };
                match var_feature.get(v.as_str()) {
                    None => {
                        var_feature.insert(v, feat);
                    }
                    Some(&first) => {
                        let same = match (g.feature(first), g.feature(feat)) {
                            (Some(a), Some(b)) => a.domain == b.domain,
                            // Unknown features are reported separately.
                            _ => true,
                        };
                        if !same {
                            push(
                                line,
                                id,
                                DiagnosticKind::VariableDomainMismatch {
                                    var: v.clone(),
                                    first: first.to_string(),
                                    second: feat.clone(),
                                },
                            );
                        }
                    }
                }
            }
        }
        for d in &r.daughters {
            if !mothers.contains(d.symbol.as_str()) && !lexical.contains(d.symbol.as_str()) {
                push(
                    line,
                    id,
                    DiagnosticKind::UndefinedSymbol {
                        symbol: d.symbol.clone(),
                    },
                );
            }
        }
    }

    for e in &g.lexicon {
        let line = e.line.0;
        let surface = e.surface.join(" ");
        let item = Some(surface.as_str());
        if e.surface.is_empty() {
            push(line, item, DiagnosticKind::EmptySurface);
        }
        for t in &e.surface {
            if t.is_empty() || t.chars().any(|c| c.is_uppercase() || c.is_whitespace()) {
                push(line, item, DiagnosticKind::BadToken { token: t.clone() });
            }
        }
        for kind in category_problems(g, &e.category) {
            push(line, item, kind);
        }
        for c in e.category.constraints.values() {
            if let Constraint::Var(v) = c {
                push(
                    line,
                    item,
                    DiagnosticKind::VariableInLexicon { var: v.clone() },
                );
            }
        }
    }

    let mut folded: BTreeMap<String, &str> = BTreeMap::new();
    for s in g.symbols() {
        if s.contains("__") {
            push(
                0,
                None,
                DiagnosticKind::BadSymbol {
                    symbol: s.to_string(),
                },
            );
        }
        if let Some(prev) = folded.insert(s.to_lowercase(), s) {
            push(
                0,
                None,
                DiagnosticKind::SymbolCaseCollision {
                    symbol: prev.to_string(),
                    other: s.to_string(),
                },
            );
        }
    }
    if !mothers.contains(g.start.as_str()) {
        push(
            0,
            None,
            DiagnosticKind::UnreachableStart {
                symbol: g.start.clone(),
            },
        );
    }

    out.sort_by_key(|d| (d.line == 0, d.line));
    out
}

fn category_problems(g: &Grammar, cat: &Category) -> Vec<DiagnosticKind> {
    let mut out = Vec::new();
    for (feat, c) in &cat.constraints {
        let Some(decl) = g.feature(feat) else {
            out.push(DiagnosticKind::UnknownFeature {
                feature: feat.clone(),
            });
            continue;
        };
        let values: Vec<&String> = match c {
            Constraint::Atom(v) => vec![v],
            Constraint::Subset(vs) => vs.iter().collect(),
            Constraint::Var(_) => vec![],
        };
        for v in values {
            if decl.value_index(v).is_none() {
                out.push(DiagnosticKind::ValueOutsideDomain {
                    feature: feat.clone(),
                    value: v.clone(),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse::parse_unvalidated;

    fn diags(src: &str) -> Vec<Diagnostic> {
        validate(&parse_unvalidated(src).unwrap())
    }

    #[test]
    fn valid_fragment_has_no_diagnostics() {
        let src = "feature agr syn {sg,pl}\nstart S\nrule r: S -> NP:[agr=A] VP:[agr=A]\nlex \"a\": NP\nlex \"b\": VP\n";
        assert!(diags(src).is_empty());
    }

    #[test]
    fn variable_linking_mismatched_domains() {
        let src = "\
feature agr syn {sg,pl}
feature sort syn {s1,s2,s3,s4,s5,s6,s7,s8,s9,s10,s11}
start S
rule r: S -> NP:[agr=A] VP:[sort=A]
lex \"a\": NP
lex \"b\": VP
";
        let ds = diags(src);
        assert_eq!(ds.len(), 1, "{ds:?}");
        assert!(matches!(
            &ds[0].kind,
            DiagnosticKind::VariableDomainMismatch { var, .. } if var == "A"
        ));
    }

    #[test]
    fn start_that_heads_no_rule() {
        let src = "start S\nrule r: T -> X\nlex \"x\": X\n";
        let ds = diags(src);
        assert_eq!(ds.len(), 1);
        assert_eq!(
            ds[0].kind,
            DiagnosticKind::UnreachableStart { symbol: "S".into() }
        );
    }

    #[test]
    fn diagnostics_are_ordered_and_deterministic() {
        let src = "\
feature f syn {a,a}
start Q
rule r: S -> X:[g=b] Y
rule r: S -> X:[f=zz]
lex \"Big\": X:[f=A]
";
        let first = diags(src);
        assert_eq!(first, diags(src));
        let lines: Vec<u32> = first.iter().map(|d| d.line).collect();
        assert_eq!(lines, vec![1, 3, 3, 4, 4, 5, 5, 0]);
    }
}
