use std::str::FromStr;

use crate::grammar::{Category, FeatureKind, Grammar};

use super::CompileError;

/// Which features survive into the compiled language model.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum FeatureSpec {
    /// Keep syntactic features, drop semantic ones.
    #[default]
    SyntacticOnly,
    /// Keep exactly the listed features.
    List(Vec<String>),
    All,
}

impl FromStr for FeatureSpec {
    type Err = std::convert::Infallible;

    /// `syn`, `all`, or a comma-separated feature list (`none` for the
    /// empty list).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim() {
            "syn" => FeatureSpec::SyntacticOnly,
            "all" => FeatureSpec::All,
            "none" | "" => FeatureSpec::List(Vec::new()),
            list => FeatureSpec::List(
                list.split(',')
                    .map(|f| f.trim().to_string())
                    .filter(|f| !f.is_empty())
                    .collect(),
            ),
        })
    }
}

impl FeatureSpec {
    /// Names of the kept features, in declaration order.
    pub fn kept(&self, grammar: &Grammar) -> Result<Vec<String>, CompileError> {
        match self {
            FeatureSpec::All => Ok(grammar.features.iter().map(|f| f.name.clone()).collect()),
            FeatureSpec::SyntacticOnly => Ok(grammar
                .features
                .iter()
                .filter(|f| f.kind == FeatureKind::Syntactic)
                .map(|f| f.name.clone())
                .collect()),
            FeatureSpec::List(names) => {
                if let Some(bad) = names.iter().find(|n| grammar.feature(n).is_none()) {
                    return Err(CompileError::UnknownFeature(bad.clone()));
                }
                Ok(grammar
                    .features
                    .iter()
                    .filter(|f| names.contains(&f.name))
                    .map(|f| f.name.clone())
                    .collect())
            }
        }
    }
}

/// Drops every feature not selected by `keep`: its declaration disappears
/// and its constraints (variables included) become unconstrained.
pub fn strip_features(grammar: &Grammar, keep: &FeatureSpec) -> Result<Grammar, CompileError> {
    let kept = keep.kept(grammar)?;
    let mut g = grammar.clone();
    g.features.retain(|f| kept.contains(&f.name));
    let strip = |c: &mut Category| c.constraints.retain(|k, _| kept.contains(k));
    for r in &mut g.rules {
        strip(&mut r.mother);
        r.daughters.iter_mut().for_each(strip);
    }
    for e in &mut g.lexicon {
        strip(&mut e.category);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grammar::parse_grammar;

    const SRC: &str = "\
feature agr syn {sg,pl}
feature sem_val sem {dog,cat}
feature sort syn {anim,loc}
start S
rule r: S -> NP:[agr=A, sem_val=V, sort=anim] VP:[agr=A, sem_val=V]
lex \"dog\": NP:[agr=sg, sem_val=dog, sort=anim]
lex \"barks\": VP:[agr=sg]
";

    #[test]
    fn default_drops_semantic_features() {
        let g = parse_grammar(SRC).unwrap();
        let s = strip_features(&g, &FeatureSpec::default()).unwrap();
        let names: Vec<_> = s.features.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["agr", "sort"]);
        assert!(!s.rules[0].daughters[0].constraints.contains_key("sem_val"));
        assert!(s.rules[0].daughters[0].constraints.contains_key("agr"));
    }

    #[test]
    fn explicit_list_keeps_only_listed() {
        let g = parse_grammar(SRC).unwrap();
        let s = strip_features(&g, &"sort".parse().unwrap()).unwrap();
        assert_eq!(s.features.len(), 1);
        assert_eq!(s.rules[0].daughters[0].constraints.len(), 1);
        assert!(s.rules[0].daughters[1].constraints.is_empty());
    }

    #[test]
    fn all_is_identity() {
        let g = parse_grammar(SRC).unwrap();
        assert_eq!(strip_features(&g, &FeatureSpec::All).unwrap(), g);
    }

    #[test]
    fn unknown_feature_in_list() {
        let g = parse_grammar(SRC).unwrap();
        assert_eq!(
            strip_features(&g, &"case".parse().unwrap()),
            Err(CompileError::UnknownFeature("case".into()))
        );
    }
}
