//! The shared key-value store all nodes of one tree read and write.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("blackboard has no entry for key '{key}'")]
pub struct MissingKeyError {
    pub key: String,
}

/// Keyed store of tagged scalars. One instance is shared by every node of a
/// tree; writes overwrite silently.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Blackboard {
    entries: BTreeMap<String, Value>,
}

impl Blackboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn lookup(&self, key: &str) -> Result<&Value, MissingKeyError> {
        self.entries.get(key).ok_or_else(|| MissingKeyError { key: key.to_owned() })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl<K: Into<String>, V: Into<Value>> FromIterator<(K, V)> for Blackboard {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        let mut bb = Blackboard::new();
        for (k, v) in iter {
            bb.set(k, v);
        }
        bb
    }
}
