use indexmap::IndexMap;

use super::trace::{ArgValue, EventTrace, TraceFile};
use super::{Automaton, Constraint, EventDecl, Literal, Membership, RuleSpec};
use crate::cognicrypt::{self, ClassFindings, ErrorType, Finding, MethodFindings, TextReport};

const ORDINALS: [&str; 10] = [
    "First", "Second", "Third", "Fourth", "Fifth", "Sixth", "Seventh", "Eighth", "Ninth", "Tenth",
];

/// A rule together with its compiled ORDER automaton.
#[derive(Debug, Clone)]
pub struct Checker<'r> {
    rule: &'r RuleSpec,
    automaton: Automaton,
}

/// Where an object got its current value.
struct Binding<'a> {
    value: &'a ArgValue,
    event: &'a EventDecl,
}

impl Binding<'_> {
    fn role(&self, object: &str) -> String {
        match self.event.param_position(object) {
            Some(i) => match ORDINALS.get(i) {
                Some(word) => format!("{word} parameter"),
                None => format!("Parameter {}", i + 1),
            },
            None => "Return value".to_string(),
        }
    }
}

enum Verdict {
    Holds,
    Violated(String),
    Imprecise(String),
}

impl<'r> Checker<'r> {
    pub fn new(rule: &'r RuleSpec) -> Self {
        Checker {
            rule,
            automaton: rule.automaton(),
        }
    }

    pub fn automaton(&self) -> &Automaton {
        &self.automaton
    }

    pub fn evaluate(&self, trace: &EventTrace) -> Vec<Finding> {
        let rule = self.rule;
        let finding = |error_type, message: String, line| Finding {
            error_type,
            rule_class: rule.class_name.clone(),
            object_id: trace.object_id.clone(),
            detail_lines: vec![message],
            statement: None,
            line,
        };
        let mut out = Vec::new();
        let mut state = self.automaton.initial();
        let mut bound: IndexMap<&str, Binding> = IndexMap::new();
        for step in &trace.steps {
            let event = &rule.events[step.label.as_str()];
            match self.automaton.next(state, &step.label) {
                Some(s) => state = s,
                None => out.push(finding(
                    ErrorType::TypestateError,
                    format!(
                        "Unexpected call to method {} on object of type {}.",
                        event.method_name, rule.class_name
                    ),
                    step.line,
                )),
            }
            for (name, value) in &step.args {
                bound.insert(name, Binding { value, event });
            }
            for constraint in &rule.constraints {
                let objects = constraint.objects();
                let touched = objects.iter().any(|o| step.args.contains_key(*o));
                if !touched || !objects.iter().all(|o| bound.contains_key(o)) {
                    continue;
                }
                match check(constraint, &bound) {
                    Verdict::Holds => {}
                    Verdict::Violated(m) => out.push(finding(ErrorType::ConstraintError, m, step.line)),
                    Verdict::Imprecise(m) => {
                        out.push(finding(ErrorType::ImpreciseValueExtractionError, m, step.line))
                    }
                }
            }
        }
        if let Some(last) = trace.steps.last() {
            if !self.automaton.is_accepting(state) {
                let mut methods: Vec<&str> = Vec::new();
                for label in self.automaton.expected(state) {
                    let m = rule.events[label].method_name.as_str();
                    if !methods.contains(&m) {
                        methods.push(m);
                    }
                }
                out.push(finding(
                    ErrorType::IncompleteOperationError,
                    format!(
                        "Operation on object of type {} not completed. Expected call to {}",
                        rule.class_name,
                        methods.join(", ")
                    ),
                    last.line,
                ));
            }
        }
        out
    }
}

fn check(constraint: &Constraint, bound: &IndexMap<&str, Binding>) -> Verdict {
    match constraint {
        Constraint::Membership(m) => membership(m, &bound[m.object.as_str()]),
        Constraint::Implication {
            antecedent,
            consequent,
        } => match membership(antecedent, &bound[antecedent.object.as_str()]) {
            Verdict::Holds => membership(consequent, &bound[consequent.object.as_str()]),
            Verdict::Violated(_) => Verdict::Holds,
            imprecise => imprecise,
        },
    }
}

fn membership(m: &Membership, binding: &Binding) -> Verdict {
    let role = binding.role(&m.object);
    match binding.value {
        ArgValue::Known(v) if m.admits(v) => Verdict::Holds,
        ArgValue::Known(v) => Verdict::Violated(format!(
            "{role} (with value {v}) should be any of {{{}}}",
            join(&m.allowed)
        )),
        ArgValue::Unknown => Verdict::Imprecise(format!(
            "Could not extract the value of {} passed to {}",
            role.to_lowercase(),
            binding.event.method_name
        )),
    }
}

fn join(values: &[Literal]) -> String {
    values.iter().map(Literal::to_string).collect::<Vec<_>>().join(", ")
}

/// Checks one trace; builds the automaton on every call, so prefer
/// [`Checker`] for many traces.
pub fn evaluate(trace: &EventTrace, rule: &RuleSpec) -> Vec<Finding> {
    Checker::new(rule).evaluate(trace)
}

/// Groups the findings of every trace by method, keeping first-seen order.
pub fn check_traces(rule: &RuleSpec, file: &TraceFile) -> TextReport {
    let checker = Checker::new(rule);
    let mut by_method: IndexMap<&str, Vec<Finding>> = IndexMap::new();
    for trace in &file.traces {
        let findings = checker.evaluate(trace);
        if !findings.is_empty() {
            by_method.entry(&trace.method).or_default().extend(findings);
        }
    }
    report(&file.class_name, by_method.into_iter().map(|(m, f)| (m.to_string(), f)))
}

fn report(class_name: &str, methods: impl Iterator<Item = (String, Vec<Finding>)>) -> TextReport {
    TextReport {
        classes: vec![ClassFindings {
            class_name: class_name.to_string(),
            methods: methods
                .filter(|(_, f)| !f.is_empty())
                .map(|(method_signature, findings)| MethodFindings {
                    method_signature,
                    findings,
                })
                .collect(),
        }],
    }
}

pub fn render_report(class_name: &str, methods: &[(String, Vec<Finding>)]) -> String {
    cognicrypt::render(&report(class_name, methods.iter().cloned()))
}
