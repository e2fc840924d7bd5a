use std::collections::BTreeMap;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::values::{render, Value};

/// Content digest of a state's canonical rendering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId([u8; 32]);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0[..6] {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// Immutable valuation of constants and variables.
#[derive(Debug, Clone)]
pub struct State {
    constants: BTreeMap<String, Value>,
    variables: BTreeMap<String, Value>,
    id: StateId,
}

impl State {
    pub fn new(constants: BTreeMap<String, Value>, variables: BTreeMap<String, Value>) -> Self {
        let mut hasher = Sha256::new();
        for (section, map) in [("C", &constants), ("V", &variables)] {
            hasher.update(section.as_bytes());
            for (k, v) in map {
                hasher.update(k.as_bytes());
                hasher.update(b"=");
                hasher.update(render(v).as_bytes());
                hasher.update(b";");
            }
        }
        Self {
            constants,
            variables,
            id: StateId(hasher.finalize().into()),
        }
    }

    pub fn id(&self) -> StateId {
        self.id
    }

    pub fn constants(&self) -> &BTreeMap<String, Value> {
        &self.constants
    }

    pub fn variables(&self) -> &BTreeMap<String, Value> {
        &self.variables
    }

    pub fn get(&self, id: &str) -> Option<&Value> {
        self.constants.get(id).or_else(|| self.variables.get(id))
    }

    /// Copy with some variables replaced.
    pub fn with_variables(&self, updates: &BTreeMap<String, Value>) -> State {
        let mut variables = self.variables.clone();
        for (k, v) in updates {
            variables.insert(k.clone(), v.clone());
        }
        State::new(self.constants.clone(), variables)
    }

    /// State-file text: `#PREDICATE` then one equality per line.
    pub fn to_predicate(&self) -> String {
        let mut out = String::from("#PREDICATE\n");
        let entries: Vec<String> = self
            .constants
            .iter()
            .chain(&self.variables)
            .map(|(k, v)| format!("{k} = {}", render(v)))
            .collect();
        out.push_str(&entries.join(" &\n"));
        out.push('\n');
        out
    }

    /// Names of identifiers whose values differ between the two states.
    pub fn differences(&self, other: &State) -> Vec<String> {
        let mut out = Vec::new();
        for (a, b) in [(&self.constants, &other.constants), (&self.variables, &other.variables)] {
            for (k, v) in a {
                if b.get(k) != Some(v) {
                    out.push(k.clone());
                }
            }
            for k in b.keys() {
                if !a.contains_key(k) {
                    out.push(k.clone());
                }
            }
        }
        out
    }
}

impl PartialEq for State {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.constants == other.constants && self.variables == other.variables
    }
}

impl Eq for State {}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .constants
            .keys()
            .chain(self.variables.keys())
            .map(String::len)
            .max()
            .unwrap_or(0);
        for (k, v) in self.constants.iter().chain(&self.variables) {
            writeln!(f, "  {k:<width$} = {}", render(v))?;
        }
        Ok(())
    }
}
