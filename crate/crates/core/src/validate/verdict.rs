use std::fmt;

use serde::Serialize;

use crate::animate::{evaluate_conjuncts, Outcome};
use crate::error::ExitCode;
use crate::state::{Environment, State};

/// An external tool's claim about a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Claim {
    Ok,
    Violation,
}

impl std::str::FromStr for Claim {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ok" => Ok(Claim::Ok),
            "violation" => Ok(Claim::Violation),
            other => Err(format!("claim must be `ok` or `violation`, not `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VerdictOutcome {
    Agree,
    Disagree,
    Error,
    Ok,
    Violation,
}

impl VerdictOutcome {
    pub fn exit_code(self) -> ExitCode {
        match self {
            VerdictOutcome::Agree | VerdictOutcome::Ok => ExitCode::Success,
            VerdictOutcome::Disagree | VerdictOutcome::Violation => ExitCode::Violation,
            VerdictOutcome::Error => ExitCode::EvaluationError,
        }
    }
}

impl fmt::Display for VerdictOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictOutcome::Agree => "AGREE",
            VerdictOutcome::Disagree => "DISAGREE",
            VerdictOutcome::Error => "ERROR",
            VerdictOutcome::Ok => "OK",
            VerdictOutcome::Violation => "VIOLATION",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Section {
    Properties,
    Invariant,
    Assertions,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClauseReport {
    pub section: Section,
    pub clause: String,
    /// `TRUE`, `FALSE` or `ERROR`.
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Result of double-checking one state.
///
/// `outcome` is never `AGREE` while a clause is in error, and `AGREE` or
/// `DISAGREE` only with a claim.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub outcome: VerdictOutcome,
    pub claim: Option<Claim>,
    pub clauses: Vec<ClauseReport>,
    /// Set when the state itself could not be built.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Verdict {
    fn from_clauses(clauses: Vec<ClauseReport>, claim: Option<Claim>) -> Self {
        let outcome = if clauses.iter().any(|c| c.diagnostic.is_some()) {
            VerdictOutcome::Error
        } else {
            let violated = clauses.iter().any(|c| c.result == "FALSE");
            match claim {
                None if violated => VerdictOutcome::Violation,
                None => VerdictOutcome::Ok,
                Some(c) if (c == Claim::Violation) == violated => VerdictOutcome::Agree,
                Some(_) => VerdictOutcome::Disagree,
            }
        };
        Verdict {
            outcome,
            claim,
            clauses,
            error: None,
        }
    }

    /// Verdict for a state that failed to load.
    pub fn load_failure(error: impl fmt::Display, claim: Option<Claim>) -> Self {
        Verdict {
            outcome: VerdictOutcome::Error,
            claim,
            clauses: Vec::new(),
            error: Some(error.to_string()),
        }
    }

    /// Pretty-printed clauses that evaluated to `FALSE`.
    pub fn failed(&self) -> Vec<&str> {
        self.clauses
            .iter()
            .filter(|c| c.result == "FALSE")
            .map(|c| c.clause.as_str())
            .collect()
    }

    /// Line-oriented report ending in `VERDICT: ...`.
    pub fn report(&self) -> String {
        let mut out = String::new();
        if let Some(e) = &self.error {
            out.push_str(&format!("ERROR {e}\n"));
        }
        for c in &self.clauses {
            match &c.diagnostic {
                Some(d) => out.push_str(&format!("CLAUSE {}: {} {d}\n", c.clause, c.result)),
                None => out.push_str(&format!("CLAUSE {}: {}\n", c.clause, c.result)),
            }
        }
        out.push_str(&format!("VERDICT: {}\n", self.outcome));
        out
    }

    /// Pretty JSON document of the verdict.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serialises")
    }
}

/// Evaluate PROPERTIES, INVARIANT and ASSERTIONS conjunct by conjunct in `s`.
pub fn check_state(env: &mut Environment, s: &State, claim: Option<Claim>) -> Verdict {
    let Some(machine) = env.machine().cloned() else {
        return Verdict::load_failure("no machine loaded", claim);
    };
    env.restore(s);
    let ast = &machine.ast;
    let sections = [
        (Section::Properties, ast.properties.iter().collect::<Vec<_>>()),
        (Section::Invariant, ast.invariant.iter().collect()),
        (Section::Assertions, ast.assertions.iter().collect()),
    ];
    let mut clauses = Vec::new();
    for (section, preds) in sections {
        for p in preds {
            for r in evaluate_conjuncts(p, env) {
                let (result, diagnostic) = match r.outcome {
                    Outcome::True => ("TRUE", None),
                    Outcome::False => ("FALSE", None),
                    Outcome::Error(e) => ("ERROR", Some(e)),
                };
                clauses.push(ClauseReport {
                    section,
                    clause: r.clause,
                    result: result.to_owned(),
                    diagnostic,
                });
            }
        }
    }
    Verdict::from_clauses(clauses, claim)
}
