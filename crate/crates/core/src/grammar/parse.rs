use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use super::{
    validate, Category, Constraint, Diagnostic, FeatureDecl, FeatureKind, Grammar, LexEntry, Line,
    Rule,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: syntax error: {}",
            self.line, self.column, self.message
        )
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{0}")]
    Syntax(SyntaxError),
    #[error("grammar has {} error(s); first: {}", .0.len(), .0[0])]
    Invalid(Vec<Diagnostic>),
}

impl ParseError {
    /// All messages, one per line, in source order.
    pub fn report(&self) -> String {
        match self {
            ParseError::Syntax(e) => e.to_string(),
            ParseError::Invalid(ds) => ds
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        }
    }
}

/// Parses and validates grammar DSL source.
///
/// ```text
/// feature agr syn {sg, pl}
/// start S
/// rule s: S -> NP:[agr=A] VP:[agr=A]
/// lex "dog": NP:[agr=sg]
/// ```
pub fn parse_grammar(source: &str) -> Result<Grammar, ParseError> {
    let grammar = parse_unvalidated(source).map_err(ParseError::Syntax)?;
    let diagnostics = validate(&grammar);
    if diagnostics.is_empty() {
        Ok(grammar)
    } else {
        Err(ParseError::Invalid(diagnostics))
    }
}

pub(crate) fn parse_unvalidated(source: &str) -> Result<Grammar, SyntaxError> {
    let mut features = Vec::new();
    let mut rules = Vec::new();
    let mut lexicon = Vec::new();
    let mut start: Option<String> = None;

    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let mut cur = Cursor::new(raw, line_no);
        cur.skip_ws();
        if cur.at_end() {
            continue;
        }
        let keyword = cur.ident()?;
        match keyword.as_str() {
            "feature" => features.push(feature_decl(&mut cur)?),
            "start" => {
                let sym = cur.ident()?;
                if start.is_some() {
                    return Err(cur.error("duplicate start declaration"));
                }
                start = Some(sym);
            }
            "rule" => rules.push(rule(&mut cur)?),
            "lex" => lexicon.push(lex_entry(&mut cur)?),
            other => return Err(cur.error_at(0, format!("unknown declaration `{}`", other))),
        }
        cur.expect_end()?;
    }

    let start = start.ok_or_else(|| SyntaxError {
        line: source.lines().count().max(1) as u32,
        column: 1,
        message: "missing `start` declaration".to_string(),
    })?;
    Ok(Grammar {
        features,
        rules,
        lexicon,
        start,
    })
}

fn feature_decl(cur: &mut Cursor) -> Result<FeatureDecl, SyntaxError> {
    let line = Line(cur.line);
    let name = cur.ident()?;
    let kind = match cur.ident()?.as_str() {
        "syn" => FeatureKind::Syntactic,
        "sem" => FeatureKind::Semantic,
        other => return Err(cur.error(format!("expected `syn` or `sem`, found `{}`", other))),
    };
    let domain = cur.value_list()?;
    Ok(FeatureDecl {
        name,
        kind,
        domain,
        line,
    })
}

fn rule(cur: &mut Cursor) -> Result<Rule, SyntaxError> {
    let line = Line(cur.line);
    let id = cur.ident()?;
    cur.expect(':')?;
    let mother = category(cur)?;
    cur.expect_str("->")?;
    let mut daughters = Vec::new();
    loop {
        cur.skip_ws();
        if cur.at_end() {
            break;
        }
        daughters.push(category(cur)?);
    }
    Ok(Rule {
        id,
        mother,
        daughters,
        line,
    })
}

fn lex_entry(cur: &mut Cursor) -> Result<LexEntry, SyntaxError> {
    let line = Line(cur.line);
    let text = cur.quoted()?;
    cur.expect(':')?;
    let category = category(cur)?;
    Ok(LexEntry {
        surface: text.split_whitespace().map(str::to_string).collect(),
        category,
        line,
    })
}

fn category(cur: &mut Cursor) -> Result<Category, SyntaxError> {
    let symbol = cur.ident()?;
    let mut constraints = BTreeMap::new();
    if cur.peek() == Some(':') {
        cur.bump();
        cur.expect('[')?;
        cur.skip_ws();
        if cur.peek() == Some(']') {
            cur.bump();
        } else {
            loop {
                let col = cur.col();
                let feature = cur.ident()?;
                cur.expect('=')?;
                cur.skip_ws();
                let constraint = if cur.peek() == Some('{') {
                    Constraint::Subset(cur.value_list()?.into_iter().collect::<BTreeSet<_>>())
                } else {
                    let v = cur.ident()?;
                    if v.starts_with(|c: char| c.is_ascii_uppercase()) {
                        Constraint::Var(v)
                    } else {
                        Constraint::Atom(v)
                    }
                };
                if constraints.insert(feature.clone(), constraint).is_some() {
                    return Err(
                        cur.error_at(col, format!("feature `{}` constrained twice", feature))
                    );
                }
                cur.skip_ws();
                match cur.bump() {
                    Some(',') => continue,
                    Some(']') => break,
                    _ => return Err(cur.error("expected `,` or `]`")),
                }
            }
        }
    }
    Ok(Category {
        symbol,
        constraints,
    })
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(raw: &'a str, line: u32) -> Self {
        // `#` starts a comment unless it sits inside a quoted surface string.
        let mut chars = Vec::new();
        let mut quoted = false;
        for c in raw.chars() {
            if c == '"' {
                quoted = !quoted;
            }
            if c == '#' && !quoted {
                break;
            }
            chars.push(c);
        }
        Cursor {
            chars,
            pos: 0,
            line,
            _src: raw,
        }
    }

    fn col(&self) -> usize {
        self.pos
    }

    fn error(&self, message: impl Into<String>) -> SyntaxError {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: pos as u32 + 1,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.chars.len()
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", want)))
        }
    }

    fn expect_str(&mut self, want: &str) -> Result<(), SyntaxError> {
        self.skip_ws();
        let n = want.chars().count();
        let found: String = self.chars[self.pos..].iter().take(n).collect();
        if found == want {
            self.pos += n;
            Ok(())
        } else {
            Err(self.error(format!("expected `{}`", want)))
        }
    }

    fn expect_end(&mut self) -> Result<(), SyntaxError> {
        self.skip_ws();
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing input"))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected identifier"));
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn value_list(&mut self) -> Result<Vec<String>, SyntaxError> {
        self.expect('{')?;
        let mut out = Vec::new();
        self.skip_ws();
        if self.peek() == Some('}') {
            return Err(self.error("empty value set"));
        }
        loop {
            out.push(self.ident()?);
            self.skip_ws();
            match self.bump() {
                Some(',') => continue,
                Some('}') => return Ok(out),
                _ => return Err(self.error("expected `,` or `}`")),
            }
        }
    }

    fn quoted(&mut self) -> Result<String, SyntaxError> {
        self.expect('"')?;
        let start = self.pos;
        while self.peek().is_some_and(|c| c != '"') {
            self.pos += 1;
        }
        if self.at_end() {
            return Err(self.error_at(start, "unterminated string"));
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        self.pos += 1;
        Ok(text)
    }
}
