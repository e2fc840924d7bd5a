//! Command-line front end. [`run`] takes its streams as arguments so that
//! sessions can be driven from tests.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;

use crate::animate::{initialise, load_machine, machine_environment, Animator};
use crate::error::{Error, ExitCode, Result};
use crate::interp::{eval_expression, eval_predicate, find_witness};
use crate::state::{Environment, EvalConfig};
use crate::syntax::{parse_formula, UnitKind};
use crate::typing::{infer, TypeContext, TypedMachine};
use crate::validate::{check_state, check_trace, load_state_file, parse_trace, Claim, Verdict};
use crate::values::{self as v, render};

#[derive(Debug, Parser)]
#[command(name = "bcheck", version, about = "Evaluate, animate and double-check B machines")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

/// Overrides of [`EvalConfig`]; flags win over `BCHECK_*` variables.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// Lower bound of INT [default: -128].
    #[arg(long, global = true, env = "BCHECK_MININT", allow_hyphen_values = true)]
    minint: Option<BigInt>,
    /// Upper bound of INT, NAT and NAT1 [default: 127].
    #[arg(long, global = true, env = "BCHECK_MAXINT", allow_hyphen_values = true)]
    maxint: Option<BigInt>,
    /// Candidate budget per quantifier, comprehension or parameter search [default: 65536].
    #[arg(long, global = true, env = "BCHECK_MAX_ENUM")]
    max_enum: Option<usize>,
    /// Largest set built explicitly [default: 1048576].
    #[arg(long, global = true, env = "BCHECK_MAX_SET_SIZE")]
    max_set_size: Option<usize>,
    /// Number of elements given to each deferred set [default: 2].
    #[arg(long, global = true, env = "BCHECK_DEFERRED_CARD")]
    deferred_card: Option<usize>,
    /// Enumerate full types instead of constraint-derived domains.
    #[arg(long, global = true)]
    no_narrowing: bool,
}

impl ConfigArgs {
    fn build(&self) -> std::result::Result<EvalConfig, String> {
        let mut c = EvalConfig::default();
        if let Some(x) = &self.minint {
            c.minint = x.clone();
        }
        if let Some(x) = &self.maxint {
            c.maxint = x.clone();
        }
        if let Some(x) = self.max_enum {
            c.max_enum = x;
        }
        if let Some(x) = self.max_set_size {
            c.max_set_size = x;
        }
        if let Some(x) = self.deferred_card {
            c.deferred_set_card = x;
        }
        c.narrowing = !self.no_narrowing;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an expression or predicate.
    Eval {
        /// Expression or predicate text.
        #[arg(short = 'e', long = "expr")]
        text: String,
        /// Evaluate in the first initial state of this machine.
        #[arg(long)]
        machine: Option<PathBuf>,
    },
    /// Print the inferred type of every constant, variable and parameter.
    Typecheck { machine: PathBuf },
    /// Check PROPERTIES, INVARIANT and ASSERTIONS in externally produced states.
    CheckState {
        machine: PathBuf,
        /// One or more `#PREDICATE` state files.
        #[arg(required = true)]
        states: Vec<PathBuf>,
        /// External result to double-check: `ok` or `violation`.
        #[arg(long)]
        claim: Option<Claim>,
        #[arg(long, value_enum, default_value = "text")]
        report_format: ReportFormat,
        /// Validate up to this many state files in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Replay a trace of operations and compare post-states.
    CheckTrace {
        machine: PathBuf,
        trace: PathBuf,
        /// Initial state to start from when the trace has no INIT line (1-based).
        #[arg(long, default_value_t = 1)]
        root: usize,
        #[arg(long, value_enum, default_value = "text")]
        report_format: ReportFormat,
    },
    /// Animate a machine interactively.
    Animate { machine: PathBuf },
    /// Read-eval-print loop; `:t <formula>` prints a type.
    Repl { machine: Option<PathBuf> },
}

/// Run one invocation and return its exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            return if matches!(e.kind(), DisplayHelp | DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                ExitCode::Success as i32
            } else {
                let _ = write!(stderr, "{}", e.render());
                ExitCode::InputError as i32
            };
        }
    };
    let config = match cli.config.build() {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(stderr, "CONFIG ERROR: {e}");
            return ExitCode::InputError as i32;
        }
    };
    let out = dispatch(cli.command, config, stdin, stdout);
    match out {
        Ok(code) => code as i32,
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            e.exit_code() as i32
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io(e: std::io::Error) -> Error {
    Error::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn machine_env(path: &Path, config: EvalConfig) -> Result<Environment> {
    Ok(machine_environment(load_machine(&read(path)?)?, config))
}

fn dispatch(cmd: Command, config: EvalConfig, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Result<ExitCode> {
    match cmd {
        Command::Eval { text, machine } => {
            let mut session = Session::new(machine.as_deref(), config)?;
            writeln!(out, "{}", session.eval(&text)?).map_err(io)?;
            Ok(ExitCode::Success)
        }
        Command::Typecheck { machine } => {
            let m = load_machine(&read(&machine)?)?;
            write!(out, "{}", type_listing(&m)).map_err(io)?;
            Ok(ExitCode::Success)
        }
        Command::CheckState {
            machine,
            states,
            claim,
            report_format,
            jobs,
        } => check_states(&machine, &states, claim, report_format, jobs, config, out),
        Command::CheckTrace {
            machine,
            trace,
            root,
            report_format,
        } => {
            let mut env = machine_env(&machine, config)?;
            let trace = parse_trace(&read(&trace)?)?;
            let verdict = check_trace(&mut env, &trace, root.saturating_sub(1))?;
            let text = match report_format {
                ReportFormat::Text => verdict.report(),
                ReportFormat::Structured => format!("{}\n", verdict.to_json()),
            };
            write!(out, "{text}").map_err(io)?;
            Ok(if verdict.agrees() {
                ExitCode::Success
            } else {
                ExitCode::Violation
            })
        }
        Command::Animate { machine } => {
            let env = machine_env(&machine, config)?;
            let mut animator = Animator::new(env)?;
            animator.run(stdin, out).map_err(io)?;
            Ok(ExitCode::Success)
        }
        Command::Repl { machine } => {
            let mut session = Session::new(machine.as_deref(), config)?;
            session.repl(stdin, out).map_err(io)?;
            Ok(ExitCode::Success)
        }
    }
}

/// `name : TYPE` per constant and variable, then `op.param : TYPE`.
pub fn type_listing(m: &TypedMachine) -> String {
    let mut out = String::new();
    for name in m.constant_names().into_iter().chain(m.variable_names()) {
        if let Some(t) = m.type_of(name) {
            out.push_str(&format!("{name} : {t}\n"));
        }
    }
    for op in &m.ast.operations {
        for p in &op.params {
            if let (Some(n), Some(t)) = (p.identifier_name(), &p.ty) {
                out.push_str(&format!("{}.{n} : {t}\n", op.name));
            }
        }
    }
    out
}

fn check_one(env: &mut Environment, path: &Path, claim: Option<Claim>) -> (Verdict, ExitCode) {
    match load_state_file(path, env) {
        Ok(s) => {
            let v = check_state(env, &s, claim);
            let code = v.outcome.exit_code();
            (v, code)
        }
        Err(e) => {
            let code = e.exit_code();
            (Verdict::load_failure(e, claim), code)
        }
    }
}

fn check_states(
    machine: &Path,
    states: &[PathBuf],
    claim: Option<Claim>,
    format: ReportFormat,
    jobs: usize,
    config: EvalConfig,
    out: &mut dyn Write,
) -> Result<ExitCode> {
    let env = machine_env(machine, config)?;
    for p in states {
        // Syntax errors in a state file are input errors, not verdicts.
        let text = read(p)?;
        crate::syntax::parse_predicate(&text)?;
    }
    let jobs = jobs.clamp(1, states.len());
    let chunk = states.len().div_ceil(jobs);
    let results: Vec<(Verdict, ExitCode)> = std::thread::scope(|scope| {
        let handles: Vec<_> = states
            .chunks(chunk)
            .map(|group| {
                let mut env = env.clone();
                scope.spawn(move || group.iter().map(|p| check_one(&mut env, p, claim)).collect::<Vec<_>>())
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("validation worker panicked"))
            .collect()
    });
    let mut worst = ExitCode::Success;
    for (path, (verdict, code)) in states.iter().zip(&results) {
        if states.len() > 1 {
            writeln!(out, "== {} ==", path.display()).map_err(io)?;
        }
        match format {
            ReportFormat::Text => write!(out, "{}", verdict.report()),
            ReportFormat::Structured => writeln!(out, "{}", verdict.to_json()),
        }
        .map_err(io)?;
        if (*code as i32) > (worst as i32) {
            worst = *code;
        }
    }
    Ok(worst)
}

/// Evaluation context shared by `eval` and `repl`.
pub struct Session {
    env: Environment,
    machine: Option<std::sync::Arc<TypedMachine>>,
}

impl Session {
    /// Without a machine, or in the first initial state of one.
    pub fn new(machine: Option<&Path>, config: EvalConfig) -> Result<Self> {
        match machine {
            None => Ok(Self {
                env: Environment::new(config),
                machine: None,
            }),
            Some(p) => {
                let mut env = machine_env(p, config)?;
                let roots = initialise(&mut env)?;
                if let Some(r) = roots.first() {
                    env.restore(&r.state);
                }
                let machine = env.machine().cloned();
                Ok(Self { env, machine })
            }
        }
    }

    fn context(&self) -> TypeContext {
        match &self.machine {
            None => TypeContext::new(),
            Some(m) => {
                let mut ctx = TypeContext::for_machine(m);
                ctx.allow_free = true;
                ctx
            }
        }
    }

    /// Rendered value, `TRUE`/`FALSE`, or for predicates with unknown
    /// identifiers `TRUE` followed by the first witness.
    pub fn eval(&mut self, text: &str) -> Result<String> {
        let mut unit = parse_formula(text)?;
        let free = infer(&mut unit, &mut self.context())?;
        let unknown: Vec<(String, _)> = free
            .into_iter()
            .filter(|(n, _)| self.env.lookup(n).is_err())
            .collect();
        match unit.kind {
            UnitKind::Predicate if !unknown.is_empty() => {
                Ok(match find_witness(&unknown, &unit.root, &mut self.env)? {
                    None => "FALSE".to_owned(),
                    Some(w) => {
                        let lim = *self.env.limits();
                        let mut s = String::from("TRUE");
                        for (n, x) in w {
                            let x = v::canonical(&x, &lim)?;
                            s.push_str(&format!("\n  {n} = {}", render(&x)));
                        }
                        s
                    }
                })
            }
            UnitKind::Predicate => Ok(if eval_predicate(&unit.root, &mut self.env)? {
                "TRUE".to_owned()
            } else {
                "FALSE".to_owned()
            }),
            _ => {
                let lim = *self.env.limits();
                Ok(render(&v::canonical(&eval_expression(&unit.root, &mut self.env)?, &lim)?))
            }
        }
    }

    /// Type of a formula: `PREDICATE` or its expression type.
    pub fn type_of(&mut self, text: &str) -> Result<String> {
        let mut unit = parse_formula(text)?;
        infer(&mut unit, &mut self.context())?;
        Ok(match (unit.kind, &unit.root.ty) {
            (UnitKind::Predicate, _) => "PREDICATE".to_owned(),
            (_, Some(t)) => t.to_string(),
            (_, None) => "?".to_owned(),
        })
    }

    /// Evaluate lines until end of input; errors are printed, not fatal.
    pub fn repl(&mut self, input: &mut dyn BufRead, out: &mut dyn Write) -> std::io::Result<()> {
        let mut line = String::new();
        loop {
            write!(out, ">>> ")?;
            out.flush()?;
            line.clear();
            if input.read_line(&mut line)? == 0 {
                writeln!(out)?;
                return Ok(());
            }
            let text = line.trim();
            let result = match text {
                "" => continue,
                ":q" | ":quit" => return Ok(()),
                t if t.starts_with(":t ") => self.type_of(&t[3..]),
                t => self.eval(t),
            };
            match result {
                Ok(s) => writeln!(out, "{s}")?,
                Err(e) => writeln!(out, "{e}")?,
            }
        }
    }
}
