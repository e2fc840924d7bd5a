use std::collections::BTreeMap;
use std::sync::Arc;

use super::{EvalConfig, State};
use crate::error::{EvalError, EvalResult};
use crate::syntax::SetDeclaration;
use crate::typing::TypedMachine;
use crate::values::{Element, Limits, Value};

/// Frame 0 holds declared sets and their elements, frame 1 the machine
/// state, and every further frame one local scope.
const STATE_FRAME: usize = 1;

/// Identifier frames over an optional loaded machine.
#[derive(Debug, Clone)]
pub struct Environment {
    frames: Vec<BTreeMap<String, Value>>,
    machine: Option<Arc<TypedMachine>>,
    /// Elements of each declared set in declaration order.
    given: BTreeMap<String, Vec<Value>>,
    config: EvalConfig,
    limits: Limits,
}

impl Environment {
    /// Environment without a machine.
    pub fn new(config: EvalConfig) -> Self {
        let limits = config.limits();
        Self {
            frames: vec![BTreeMap::new(), BTreeMap::new()],
            machine: None,
            given: BTreeMap::new(),
            config,
            limits,
        }
    }

    /// Environment with the machine's sets in scope and no state bound.
    pub fn for_machine(machine: Arc<TypedMachine>, config: EvalConfig) -> Self {
        let mut env = Self::new(config);
        for decl in &machine.ast.sets {
            env.declare_set(decl);
        }
        env.machine = Some(machine);
        env
    }

    fn declare_set(&mut self, decl: &SetDeclaration) {
        let names: Vec<String> = match &decl.elements {
            Some(names) => names.clone(),
            None => (1..=self.config.deferred_set_card)
                .map(|i| format!("{}{i}", decl.name))
                .collect(),
        };
        let set: Arc<str> = Arc::from(decl.name.as_str());
        let elements: Vec<Value> = names
            .iter()
            .enumerate()
            .map(|(index, name)| {
                Value::Elem(Element {
                    set: set.clone(),
                    index,
                    name: Arc::from(name.as_str()),
                })
            })
            .collect();
        for (name, e) in names.iter().zip(&elements) {
            self.frames[0].insert(name.clone(), e.clone());
        }
        self.frames[0].insert(decl.name.clone(), Value::set_of(elements.iter().cloned()));
        self.given.insert(decl.name.clone(), elements);
    }

    pub fn config(&self) -> &EvalConfig {
        &self.config
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn machine(&self) -> Option<&Arc<TypedMachine>> {
        self.machine.as_ref()
    }

    /// Elements of a declared set in declaration order.
    pub fn set_elements(&self, name: &str) -> Option<&[Value]> {
        self.given.get(name).map(Vec::as_slice)
    }

    pub fn depth(&self) -> usize {
        self.frames.len()
    }

    pub fn push_frame(&mut self) {
        self.frames.push(BTreeMap::new());
    }

    pub fn pop_frame(&mut self) {
        assert!(self.frames.len() > STATE_FRAME + 1, "cannot pop a machine frame");
        self.frames.pop();
    }

    /// Run `f` in a fresh frame that is popped on every path.
    pub fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        self.push_frame();
        let depth = self.depth();
        let out = f(self);
        debug_assert_eq!(depth, self.depth(), "unbalanced frames");
        self.pop_frame();
        out
    }

    /// Bind in the top frame, shadowing outer bindings.
    pub fn declare(&mut self, id: &str, value: Value) {
        self.frames
            .last_mut()
            .expect("frames")
            .insert(id.to_owned(), value);
    }

    /// Overwrite the innermost binding of `id`, or bind it in the top frame.
    pub fn bind(&mut self, id: &str, value: Value) {
        for frame in self.frames.iter_mut().rev() {
            if let Some(slot) = frame.get_mut(id) {
                *slot = value;
                return;
            }
        }
        self.declare(id, value);
    }

    pub fn lookup(&self, id: &str) -> EvalResult<&Value> {
        self.frames
            .iter()
            .rev()
            .find_map(|f| f.get(id))
            .ok_or_else(|| EvalError::UnknownIdentifier(id.to_owned()))
    }

    /// Bind a constant or variable in the state frame.
    pub fn bind_state(&mut self, id: &str, value: Value) {
        self.frames[STATE_FRAME].insert(id.to_owned(), value);
    }

    /// Current state-frame binding of `id`, ignoring locals.
    pub fn state_value(&self, id: &str) -> Option<&Value> {
        self.frames[STATE_FRAME].get(id)
    }

    /// Set or clear one state-frame binding.
    pub fn set_state_value(&mut self, id: &str, value: Option<Value>) {
        match value {
            Some(v) => self.frames[STATE_FRAME].insert(id.to_owned(), v),
            None => self.frames[STATE_FRAME].remove(id),
        };
    }

    pub fn unbind_state(&mut self) {
        self.frames[STATE_FRAME].clear();
    }

    /// Capture the machine's constants and variables.
    pub fn snapshot(&self) -> EvalResult<State> {
        let machine = self
            .machine
            .as_ref()
            .ok_or_else(|| EvalError::Unsupported("snapshot without a machine".into()))?;
        let frame = &self.frames[STATE_FRAME];
        let capture = |names: Vec<&str>| -> EvalResult<BTreeMap<String, Value>> {
            names
                .into_iter()
                .map(|n| {
                    frame
                        .get(n)
                        .map(|v| (n.to_owned(), v.clone()))
                        .ok_or_else(|| EvalError::MissingBinding(n.to_owned()))
                })
                .collect()
        };
        Ok(State::new(
            capture(machine.constant_names())?,
            capture(machine.variable_names())?,
        ))
    }

    /// Replace the state frame with exactly the bindings of `s`.
    pub fn restore(&mut self, s: &State) {
        let frame = &mut self.frames[STATE_FRAME];
        frame.clear();
        for (k, v) in s.constants().iter().chain(s.variables()) {
            frame.insert(k.clone(), v.clone());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shadowing() {
        let mut env = Environment::new(EvalConfig::default());
        env.bind("x", Value::int(1));
        env.push_frame();
        env.declare("x", Value::int(2));
        assert_eq!(env.lookup("x").unwrap(), &Value::int(2));
        env.pop_frame();
        assert_eq!(env.lookup("x").unwrap(), &Value::int(1));
        assert!(matches!(env.lookup("y"), Err(EvalError::UnknownIdentifier(_))));
    }

    #[test]
    fn scoped_restores_depth_on_error() {
        let mut env = Environment::new(EvalConfig::default());
        let before = env.depth();
        let r: EvalResult<()> = env.scoped(|e| {
            e.declare("z", Value::int(0));
            Err(EvalError::AtRootState)
        });
        assert!(r.is_err());
        assert_eq!(env.depth(), before);
        assert!(env.lookup("z").is_err());
    }
}
