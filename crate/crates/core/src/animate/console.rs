//! Line-oriented interactive animation.
//!
//! Each round prints the current state, the invariant verdict and a numbered
//! list of choices. Input is a choice number, `u` to go back one step or `q`
//! to quit. Before a root state is chosen the choices are the roots.

use std::io::{self, BufRead, Write};

use super::exec::Successor;
use super::machine::{check_invariant, enabled_operations, initialise};
use crate::error::EvalResult;
use crate::state::{Environment, State, StateSpace};

struct Choice {
    label: String,
    target: State,
}

pub struct Animator {
    env: Environment,
    space: StateSpace,
    roots: Vec<Successor>,
}

impl Animator {
    /// Initialise the machine loaded in `env`.
    pub fn new(mut env: Environment) -> EvalResult<Self> {
        let roots = initialise(&mut env)?;
        Ok(Self {
            env,
            space: StateSpace::new(),
            roots,
        })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn current(&self) -> Option<&State> {
        self.space.current().map(|r| self.space.state(r))
    }

    fn choices(&mut self, out: &mut dyn Write) -> io::Result<Vec<Choice>> {
        let Some(current) = self.current().cloned() else {
            return Ok(self
                .roots
                .iter()
                .enumerate()
                .map(|(i, r)| Choice {
                    label: format!("INITIALISATION #{}", i + 1),
                    target: r.state.clone(),
                })
                .collect());
        };
        let enabled = match enabled_operations(&mut self.env, &current) {
            Ok(e) => e,
            Err(e) => {
                writeln!(out, "error: {e}")?;
                return Ok(Vec::new());
            }
        };
        for (name, e) in &enabled.errors {
            writeln!(out, "  operation {name} not explored: {e}")?;
        }
        let mut choices = Vec::new();
        for op in enabled.operations {
            let many = op.successors.len() > 1;
            for (k, s) in op.successors.successors.iter().enumerate() {
                let label = if many {
                    format!("{} [branch {}]", op.label(), k + 1)
                } else {
                    op.label()
                };
                choices.push(Choice {
                    label,
                    target: s.state.clone(),
                });
            }
        }
        Ok(choices)
    }

    fn show(&mut self, out: &mut dyn Write) -> io::Result<Vec<Choice>> {
        match self.current().cloned() {
            None => writeln!(out, "no state chosen yet")?,
            Some(s) => {
                writeln!(out, "state {}:", s.id())?;
                write!(out, "{s}")?;
                match check_invariant(&mut self.env, &s) {
                    Ok(v) => writeln!(out, "{v}")?,
                    Err(e) => writeln!(out, "invariant ERROR: {e}")?,
                }
            }
        }
        let choices = self.choices(out)?;
        if choices.is_empty() {
            writeln!(out, "no enabled operations")?;
        }
        for (i, c) in choices.iter().enumerate() {
            writeln!(out, "  {}: {}", i + 1, c.label)?;
        }
        Ok(choices)
    }

    /// Run until `q` or end of input.
    pub fn run(&mut self, input: &mut dyn BufRead, out: &mut dyn Write) -> io::Result<()> {
        let mut choices = self.show(out)?;
        let mut line = String::new();
        loop {
            write!(out, "> ")?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                return Ok(());
            }
            match line.trim() {
                "" => continue,
                "q" => return Ok(()),
                "u" => match self.space.backtrack() {
                    Ok(_) => choices = self.show(out)?,
                    Err(e) => writeln!(out, "{e}")?,
                },
                cmd => match cmd.parse::<usize>().ok().and_then(|n| n.checked_sub(1)).and_then(|n| choices.get(n)) {
                    Some(c) => {
                        let to = self.space.add_state(c.target.clone());
                        match self.space.current() {
                            Some(from) => {
                                self.space.add_transition(from, c.label.clone(), to);
                                self.space.visit(to);
                            }
                            None => self.space.start_at(to),
                        }
                        choices = self.show(out)?;
                    }
                    None => writeln!(out, "unknown command {cmd:?}: enter a number, u or q")?,
                },
            }
        }
    }
}
