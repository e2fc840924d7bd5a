use std::collections::{BTreeSet, HashMap};

use super::{State, StateId};
use crate::error::{EvalError, EvalResult};

/// Index of a state inside a [`StateSpace`].
pub type StateRef = usize;

/// An operation-labelled edge between saved states.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: StateRef,
    pub label: String,
    pub to: StateRef,
}

/// Every visited state and transition, plus the current path.
/// Nothing is ever removed.
#[derive(Debug, Clone, Default)]
pub struct StateSpace {
    states: Vec<State>,
    index: HashMap<StateId, Vec<StateRef>>,
    transitions: BTreeSet<Transition>,
    path: Vec<StateRef>,
}

impl StateSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Save `s`; equal states get the same reference.
    pub fn add_state(&mut self, s: State) -> StateRef {
        let bucket = self.index.entry(s.id()).or_default();
        if let Some(r) = bucket.iter().copied().find(|r| self.states[*r] == s) {
            return r;
        }
        let r = self.states.len();
        bucket.push(r);
        self.states.push(s);
        r
    }

    pub fn add_transition(&mut self, from: StateRef, label: impl Into<String>, to: StateRef) {
        assert!(from < self.states.len() && to < self.states.len(), "unknown state");
        self.transitions.insert(Transition {
            from,
            label: label.into(),
            to,
        });
    }

    pub fn state(&self, r: StateRef) -> &State {
        &self.states[r]
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn path(&self) -> &[StateRef] {
        &self.path
    }

    pub fn current(&self) -> Option<StateRef> {
        self.path.last().copied()
    }

    /// Start a new path at a root state.
    pub fn start_at(&mut self, r: StateRef) {
        self.path = vec![r];
    }

    /// Extend the current path.
    pub fn visit(&mut self, r: StateRef) {
        self.path.push(r);
    }

    /// Step back along the path to the previous state.
    pub fn backtrack(&mut self) -> EvalResult<&State> {
        if self.path.len() <= 1 {
            return Err(EvalError::AtRootState);
        }
        self.path.pop();
        Ok(&self.states[*self.path.last().expect("nonempty path")])
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::values::Value;

    fn st(x: i64) -> State {
        State::new(BTreeMap::new(), BTreeMap::from([("x".to_owned(), Value::int(x))]))
    }

    #[test]
    fn idempotent_add() {
        let mut sp = StateSpace::new();
        let a = sp.add_state(st(1));
        let b = sp.add_state(st(1));
        assert_eq!(a, b);
        assert_eq!(sp.states().len(), 1);
    }

    #[test]
    fn backtracking_keeps_states() {
        let mut sp = StateSpace::new();
        let s0 = sp.add_state(st(0));
        let s1 = sp.add_state(st(1));
        sp.start_at(s0);
        sp.add_transition(s0, "inc", s1);
        sp.visit(s1);
        assert_eq!(sp.backtrack().unwrap(), &st(0));
        assert_eq!(sp.states().len(), 2);
        assert!(matches!(sp.backtrack(), Err(EvalError::AtRootState)));
    }
}
