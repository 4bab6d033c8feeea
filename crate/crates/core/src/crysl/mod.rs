//! A small CrySL subset: enough to express single-object rules such as the
//! JCA `KeyGenerator` specification, compile their ORDER clause to a
//! deterministic automaton and check recorded call traces against ORDER and
//! CONSTRAINTS.
//!
//! REQUIRES and ENSURES are parsed and kept, but predicates are never
//! evaluated, so no `RequiredPredicateError` is produced here.

mod automaton;
mod eval;
mod lexer;
mod parser;
mod trace;

use indexmap::IndexMap;
use std::fmt;

pub use automaton::{build_automaton, Automaton, StateId};
pub use eval::{check_traces, evaluate, render_report, Checker};
pub use parser::{parse_rule, RuleParseError};
pub use trace::{parse_traces, ArgValue, EventTrace, TraceFile, TraceParseError, TraceStep};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSpec {
    pub class_name: String,
    /// Object name to declared type.
    pub objects: IndexMap<String, String>,
    pub events: IndexMap<String, EventDecl>,
    /// Alias name to the labels (events or other aliases) it stands for.
    pub aliases: IndexMap<String, Vec<String>>,
    pub order: OrderExpr,
    pub constraints: Vec<Constraint>,
    pub requires: Vec<PredicateRef>,
    pub ensures: Vec<PredicateRef>,
}

impl RuleSpec {
    /// Event labels an alias or label stands for, aliases expanded.
    pub fn expand(&self, name: &str) -> Vec<&str> {
        let mut out = Vec::new();
        self.expand_into(name, &mut out);
        out
    }

    fn expand_into<'a>(&'a self, name: &str, out: &mut Vec<&'a str>) {
        match self.aliases.get(name) {
            Some(members) => {
                for m in members {
                    self.expand_into(m, out);
                }
            }
            None => {
                if let Some((label, _)) = self.events.get_key_value(name) {
                    if !out.contains(&label.as_str()) {
                        out.push(label);
                    }
                }
            }
        }
    }

    pub fn automaton(&self) -> Automaton {
        build_automaton(&self.order, &self.aliases)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub label: String,
    pub method_name: String,
    pub params: Vec<Param>,
    /// Object receiving the return value, as in `key = generateKey()`.
    pub binds: Option<String>,
}

impl EventDecl {
    /// Zero-based position of `object` among the parameters.
    pub fn param_position(&self, object: &str) -> Option<usize> {
        self.params
            .iter()
            .position(|p| matches!(p, Param::Object(o) if o == object))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Param {
    Object(String),
    Wildcard,
    Literal(Literal),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Literal {
    Str(String),
    Int(i64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Str(s) => write!(f, "{}", serde_json::Value::String(s.clone())),
            Literal::Int(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderExpr {
    Atom(String),
    Seq(Vec<OrderExpr>),
    Alt(Vec<OrderExpr>),
    Opt(Box<OrderExpr>),
    Star(Box<OrderExpr>),
    Plus(Box<OrderExpr>),
}

impl fmt::Display for OrderExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, items: &[OrderExpr], sep: &str) -> fmt::Result {
            write!(f, "(")?;
            for (i, e) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, "{sep}")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, ")")
        }
        match self {
            OrderExpr::Atom(a) => write!(f, "{a}"),
            OrderExpr::Seq(items) => join(f, items, ", "),
            OrderExpr::Alt(items) => join(f, items, " | "),
            OrderExpr::Opt(e) => write!(f, "({e})?"),
            OrderExpr::Star(e) => write!(f, "({e})*"),
            OrderExpr::Plus(e) => write!(f, "({e})+"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub object: String,
    pub allowed: Vec<Literal>,
}

impl Membership {
    pub fn admits(&self, value: &Literal) -> bool {
        self.allowed.contains(value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    Membership(Membership),
    Implication {
        antecedent: Membership,
        consequent: Membership,
    },
}

impl Constraint {
    pub fn objects(&self) -> Vec<&str> {
        match self {
            Constraint::Membership(m) => vec![m.object.as_str()],
            Constraint::Implication {
                antecedent,
                consequent,
            } => {
                let mut v = vec![antecedent.object.as_str()];
                if consequent.object != antecedent.object {
                    v.push(consequent.object.as_str());
                }
                v
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateRef {
    pub name: String,
    pub args: Vec<String>,
}
