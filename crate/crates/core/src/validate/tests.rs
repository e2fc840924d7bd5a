use std::path::PathBuf;

use super::*;
use crate::animate::{initialise, load_machine, machine_environment};
use crate::error::{Error, StateFileError};
use crate::state::{Environment, EvalConfig};
use crate::values::{render, Value};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn cruise() -> Environment {
    machine_environment(load_machine(&fixture("cruise.mch")).unwrap(), EvalConfig::default())
}

const FUNCS: &str = "MACHINE F
SETS COL = {red, green}; D
CONSTANTS c
PROPERTIES c : NAT
VARIABLES f, g, d
INVARIANT f : INTEGER +-> INTEGER & g : COL --> BOOL & d : D
INITIALISATION f, g := {}, COL * {TRUE} || d :: D
END";

#[test]
fn cruise_state_loads() {
    let mut env = cruise();
    let s = load_state_text(&fixture("cruise_state.txt"), &mut env).unwrap();
    assert_eq!(s.get("NumberOfSetCruise"), Some(&Value::int(0)));
    assert_eq!(s.get("ObstaclePresent"), Some(&Value::Bool(true)));
    assert_eq!(render(s.get("ObstacleDistance").unwrap()), "ODnone");
}

#[test]
fn claims_agree_and_disagree() {
    let mut env = cruise();
    let s = load_state_text(&fixture("cruise_state.txt"), &mut env).unwrap();
    let v = check_state(&mut env, &s, Some(Claim::Ok));
    assert_eq!(v.outcome, VerdictOutcome::Agree, "{}", v.report());
    assert!(v.report().ends_with("VERDICT: AGREE\n"));
    assert_eq!(check_state(&mut env, &s, None).outcome, VerdictOutcome::Ok);
    let bad = load_state_text(&fixture("cruise_state_mutated.txt"), &mut env).unwrap();
    let v = check_state(&mut env, &bad, Some(Claim::Ok));
    assert_eq!(v.outcome, VerdictOutcome::Disagree);
    assert_eq!(
        v.failed(),
        ["(CruiseActive = FALSE) => ((VehicleAtCruiseSpeed = FALSE) & (NumberOfSetCruise = 0))"]
    );
    assert_eq!(check_state(&mut env, &bad, Some(Claim::Violation)).outcome, VerdictOutcome::Agree);
}

#[test]
fn lambda_values_and_closed_terms() {
    let mut env = machine_environment(load_machine(FUNCS).unwrap(), EvalConfig::default());
    let s = load_state_text(
        "#PREDICATE c = 3 & f = %x.(x>0 & x<4|x*x) & g = {red |-> TRUE, green |-> FALSE} & d = D2",
        &mut env,
    )
    .unwrap();
    assert_eq!(render(s.get("f").unwrap()), "{(1|->1),(2|->4),(3|->9)}");
    assert_eq!(render(s.get("d").unwrap()), "D2");
    let err = |text: &str, env: &mut Environment| load_state_text(text, env).unwrap_err();
    assert!(matches!(
        err("#PREDICATE c = 3 & f = {} & g = {}", &mut env),
        Error::StateFile(StateFileError::MissingIdentifier(d)) if d == "d"
    ));
    assert!(matches!(
        err("#PREDICATE c = 3 & c = 4", &mut env),
        Error::StateFile(StateFileError::DuplicateIdentifier(_))
    ));
    assert!(matches!(
        err("#PREDICATE zz = 3", &mut env),
        Error::StateFile(StateFileError::UnknownIdentifier(_))
    ));
    assert!(matches!(
        err("#PREDICATE c = TRUE", &mut env),
        Error::StateFile(StateFileError::Type { .. })
    ));
    assert!(matches!(
        err("#PREDICATE c = f", &mut env),
        Error::StateFile(StateFileError::Type { .. })
    ));
    assert!(matches!(
        err("#PREDICATE c = NATURAL1 - {0}", &mut env),
        Error::StateFile(StateFileError::Type { .. })
    ));
    assert!(matches!(
        err("#PREDICATE c = 1/0", &mut env),
        Error::StateFile(StateFileError::Eval { .. })
    ));
    assert!(matches!(err("c = 1", &mut env), Error::Parse(_)));
}

#[test]
fn rendered_states_reload() {
    let mut env = machine_environment(load_machine(FUNCS).unwrap(), EvalConfig::default());
    for root in initialise(&mut env).unwrap().into_iter().take(3) {
        let again = load_state_text(&root.state.to_predicate(), &mut env).unwrap();
        assert_eq!(again, root.state);
    }
}

#[test]
fn verdict_json_keys() {
    let mut env = cruise();
    let s = load_state_text(&fixture("cruise_state.txt"), &mut env).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&check_state(&mut env, &s, Some(Claim::Ok)).to_json()).unwrap();
    assert_eq!(doc["outcome"], "AGREE");
    assert_eq!(doc["claim"], "ok");
    assert_eq!(doc["clauses"][0]["section"], "INVARIANT");
    assert_eq!(doc["clauses"][0]["result"], "TRUE");
}

#[test]
fn trace_replay() {
    let mut env = cruise();
    let trace = parse_trace(&fixture("cruise_trace.txt")).unwrap();
    assert_eq!(trace.steps.len(), 3);
    let v = check_trace(&mut env, &trace, 0).unwrap();
    assert!(v.agrees(), "{}", v.report());

    let wrong = fixture("cruise_trace.txt").replace("ObstacleDistance = ODclose", "ObstacleDistance = ODveryclose");
    let v = check_trace(&mut env, &parse_trace(&wrong).unwrap(), 0).unwrap();
    match &v.steps.last().unwrap().outcome {
        StepOutcome::NoMatchingSuccessor { differences, .. } => assert_eq!(differences, &["ObstacleDistance"]),
        other => panic!("{other:?}"),
    }

    let disabled = "OP CruiseOff -> #PREDICATE CruiseAllowed = FALSE & CruiseActive = FALSE & VehicleAtCruiseSpeed = FALSE & VehicleCanKeepSpeed = FALSE & VehicleTryKeepSpeed = FALSE & SpeedAboveMax = FALSE & VehicleTryKeepTimeGap = FALSE & NumberOfSetCruise = 0 & CruiseSpeedAtMax = FALSE & ObstacleDistance = ODnone & ObstacleStatusJustChanged = FALSE & CCInitialisationInProgress = FALSE & CruiseSpeedChangeInProgress = FALSE & ObstaclePresent = FALSE & ObstacleRelativeSpeed = RSnone";
    let v = check_trace(&mut env, &parse_trace(disabled).unwrap(), 0).unwrap();
    assert_eq!(v.steps[0].outcome, StepOutcome::OperationNotEnabled);
    assert!(v.report().ends_with("VERDICT: DISAGREE\n"));
}

#[test]
fn malformed_trace_lines() {
    assert!(matches!(
        parse_trace("OP x := 1"),
        Err(Error::StateFile(StateFileError::Trace { line: 1, .. }))
    ));
    assert!(matches!(
        parse_trace("\nSTEP a -> #PREDICATE x = 1"),
        Err(Error::StateFile(StateFileError::Trace { line: 2, .. }))
    ));
}
