//! Token sequences and the interning used by the enumerators.

use std::collections::{BTreeSet, HashMap};

pub type Sentence = Vec<String>;

/// Splits a sentence on whitespace. Tokens are matched case-sensitively;
/// grammars use lowercase terminals.
pub fn tokenize(text: &str) -> Sentence {
    text.split_whitespace().map(str::to_string).collect()
}

#[derive(Clone, Debug, Default)]
pub struct Interner {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl Interner {
    pub fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn resolve(&self, ids: &[u32]) -> Sentence {
        ids.iter()
            .map(|&i| self.names[i as usize].clone())
            .collect()
    }

    pub fn resolve_all<'a>(
        &self,
        set: impl IntoIterator<Item = &'a Vec<u32>>,
    ) -> BTreeSet<Sentence> {
        set.into_iter().map(|s| self.resolve(s)).collect()
    }
}

/// Saturating counter arithmetic for derivation counts.
pub(crate) fn cap_add(a: u64, b: u64, cap: u64) -> u64 {
    a.saturating_add(b).min(cap)
}

pub(crate) fn cap_mul(a: u64, b: u64, cap: u64) -> u64 {
    a.saturating_mul(b).min(cap)
}
