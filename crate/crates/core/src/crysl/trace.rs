//! Recorded call sequences, one per tracked object.
//!
//! ```text
//! # comments start with '#'
//! @class Example.Crypto
//! @object bfd7ff31
//! @method void getKey(int)
//! g1(alg="AES") @ 3
//! i1(keySize=512) @ 5
//! gk @ 8
//! ```
//!
//! `@object` starts a new trace; `@method` applies to the current trace if it
//! has no steps yet and to every later one. Values are quoted strings,
//! integers, or `?` for a value the analysis could not determine.

use indexmap::IndexMap;
use thiserror::Error;

use super::{Literal, Param, RuleSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgValue {
    Known(Literal),
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub label: String,
    pub args: IndexMap<String, ArgValue>,
    pub line: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventTrace {
    pub object_id: String,
    pub method: String,
    pub steps: Vec<TraceStep>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFile {
    pub class_name: String,
    pub traces: Vec<EventTrace>,
}

pub const DEFAULT_CLASS: &str = "Main";
pub const DEFAULT_METHOD: &str = "main";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct TraceParseError {
    pub line: usize,
    pub message: String,
}

pub fn parse_traces(text: &str, rule: &RuleSpec) -> Result<TraceFile, TraceParseError> {
    let mut class_name = DEFAULT_CLASS.to_string();
    let mut method = DEFAULT_METHOD.to_string();
    let mut traces: Vec<EventTrace> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        let err = |message: String| TraceParseError { line: no, message };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("@class") {
            class_name = nonempty(rest, "@class").map_err(err)?;
        } else if let Some(rest) = line.strip_prefix("@object") {
            let id = nonempty(rest, "@object").map_err(err)?;
            traces.push(EventTrace {
                object_id: id,
                method: method.clone(),
                steps: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix("@method") {
            method = nonempty(rest, "@method").map_err(err)?;
            if let Some(t) = traces.last_mut().filter(|t| t.steps.is_empty()) {
                t.method = method.clone();
            }
        } else {
            let step = parse_step(line, rule).map_err(err)?;
            if traces.is_empty() {
                traces.push(EventTrace {
                    object_id: format!("o{}", traces.len() + 1),
                    method: method.clone(),
                    steps: Vec::new(),
                });
            }
            traces.last_mut().expect("non-empty").steps.push(step);
        }
    }
    Ok(TraceFile { class_name, traces })
}

fn nonempty(rest: &str, directive: &str) -> Result<String, String> {
    let v = rest.trim();
    if v.is_empty() || !rest.starts_with(char::is_whitespace) {
        return Err(format!("{directive} needs a value"));
    }
    Ok(v.to_string())
}

fn parse_step(line: &str, rule: &RuleSpec) -> Result<TraceStep, String> {
    let (call, at) = line
        .rsplit_once('@')
        .ok_or_else(|| format!("step {line:?} has no '@ line'"))?;
    let at = at.trim();
    let line_no = match at.parse::<u64>() {
        Ok(n) if n >= 1 => n,
        _ => return Err(format!("line number {at:?} is not a positive integer")),
    };
    let call = call.trim();
    let (label, arg_text) = match call.split_once('(') {
        Some((l, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in {call:?}"))?;
            (l.trim(), inner)
        }
        None => (call, ""),
    };
    let event = rule
        .events
        .get(label)
        .ok_or_else(|| format!("{label:?} is not an event of {}", rule.class_name))?;
    let mut args = IndexMap::new();
    for part in split_args(arg_text)? {
        let (name, value) = part
            .split_once('=')
            .ok_or_else(|| format!("argument {part:?} is not name=value"))?;
        let name = name.trim();
        let binds_param = event
            .params
            .iter()
            .any(|p| matches!(p, Param::Object(o) if o == name))
            || event.binds.as_deref() == Some(name);
        if !binds_param {
            return Err(format!("{name:?} is not a parameter of event {label}"));
        }
        if args.insert(name.to_string(), parse_value(value.trim())?).is_some() {
            return Err(format!("{name:?} given twice"));
        }
    }
    Ok(TraceStep {
        label: label.to_string(),
        args,
        line: line_no,
    })
}

/// Splits on commas outside string literals.
fn split_args(text: &str) -> Result<Vec<&str>, String> {
    let mut parts = Vec::new();
    let (mut start, mut in_str, mut escaped) = (0, false, false);
    for (i, c) in text.char_indices() {
        match c {
            _ if escaped => escaped = false,
            '\\' if in_str => escaped = true,
            '"' => in_str = !in_str,
            ',' if !in_str => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    if in_str {
        return Err("unterminated string".into());
    }
    let last = text[start..].trim();
    if !last.is_empty() || !parts.is_empty() {
        parts.push(last);
    }
    if parts.iter().any(|p| p.is_empty()) {
        return Err("empty argument".into());
    }
    Ok(parts)
}

fn parse_value(text: &str) -> Result<ArgValue, String> {
    if text == "?" {
        return Ok(ArgValue::Unknown);
    }
    if text.starts_with('"') {
        let s: String = serde_json::from_str(text).map_err(|_| format!("bad string {text}"))?;
        return Ok(ArgValue::Known(Literal::Str(s)));
    }
    text.parse::<i64>()
        .map(|n| ArgValue::Known(Literal::Int(n)))
        .map_err(|_| format!("value {text:?} is neither a string, an integer nor '?'"))
}
