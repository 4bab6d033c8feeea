//! Structural validation of SARIF 2.0.0 logs.
//!
//! Check catalog:
//!
//! | id    | severity | check |
//! |-------|----------|-------|
//! | SV000 | error    | document does not fit the model (missing key, wrong type, fractional integer) |
//! | SV001 | error    | `version` is `"2.0.0"` |
//! | SV002 | error    | `$schema` is the schema URI of a known version |
//! | SV003 | error    | every `ruleId` resolves in `resources.rules`; rule ids equal their keys |
//! | SV004 | error    | `parentKey` of files and logical locations resolves, chains are acyclic |
//! | SV005 | error    | nested file keys are `parent + "#" + fragment`, fragment starting with `/` |
//! | SV006 | error    | every result has a location, and every location is physical or logical |
//! | SV007 | error    | message text non-empty, `ruleMessageId`/`richMessageId` resolvable |
//! | SV008 | warning  | `baselineState`, `suppressionStates`, `kind`, `importance` vocabularies |
//! | SV009 | error    | thread-flow steps positive and strictly increasing |
//! | SV010 | error    | regions: positive lines and columns, `endLine >= startLine` |
//! | SV011 | warning  | `fullyQualifiedLogicalName` has a `logicalLocations` entry (when that map is non-empty) |
//! | SV012 | warning  | `runs` is empty |
//! | SV013 | error    | invocation `startTime <= endTime` |
//! | SV014 | error    | tool `name` is present |
//! | SV015 | error    | thread-flow locations, stack frames, fix changes and replacements are non-empty |
//! | SV016 | error    | logical location `name` is the last `::` segment of its key |

use serde::Serialize;
use std::collections::HashSet;
use std::fmt;

use crate::model::{
    Level, Location, Region, Run, SarifLog, SarifResult, SARIF_SCHEMA_URI, SARIF_VERSION,
};
use crate::path::JsonPath;
use crate::writer::{self, ParseError};

pub const BASELINE_STATES: &[&str] = &["new", "existing", "absent"];
pub const SUPPRESSION_STATES: &[&str] = &["suppressedExternally", "suppressedInSource"];
pub const LOGICAL_KINDS: &[&str] = &[
    "namespace",
    "type",
    "function",
    "member",
    "package",
    "module",
    "resource",
    "field",
    "parameter",
    "variable",
    "property",
];
pub const IMPORTANCE_VALUES: &[&str] = &["essential", "important", "unimportant"];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostic {
    pub check_id: &'static str,
    pub severity: Level,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn is_error(&self) -> bool {
        self.severity == Level::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.severity.as_str().to_uppercase(),
            self.check_id,
            self.path,
            self.message
        )
    }
}

/// Every violation of the check catalog, ordered by (path, check id).
pub fn validate(log: &SarifLog) -> Vec<Diagnostic> {
    let mut v = Validator::default();
    v.log(log);
    let mut out = v.out;
    out.sort_by(|a, b| (&a.path, a.check_id).cmp(&(&b.path, b.check_id)));
    out.dedup();
    out
}

/// Parses and validates `bytes`; documents that do not fit the model yield a
/// single SV000 diagnostic. Only JSON syntax errors are returned as `Err`.
pub fn validate_bytes(bytes: &[u8]) -> Result<Vec<Diagnostic>, ParseError> {
    match writer::parse(bytes) {
        Ok(log) => Ok(validate(&log)),
        Err(ParseError::Model { path, message }) => Ok(vec![Diagnostic {
            check_id: "SV000",
            severity: Level::Error,
            path,
            message,
        }]),
        Err(e) => Err(e),
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

#[derive(Default)]
struct Validator {
    out: Vec<Diagnostic>,
}

impl Validator {
    fn error(&mut self, check_id: &'static str, path: &JsonPath, message: impl Into<String>) {
        self.push(check_id, Level::Error, path, message);
    }

    fn warning(&mut self, check_id: &'static str, path: &JsonPath, message: impl Into<String>) {
        self.push(check_id, Level::Warning, path, message);
    }

    fn push(&mut self, check_id: &'static str, severity: Level, path: &JsonPath, message: impl Into<String>) {
        self.out.push(Diagnostic {
            check_id,
            severity,
            path: path.to_string(),
            message: message.into(),
        });
    }

    fn log(&mut self, log: &SarifLog) {
        let root = JsonPath::root();
        if log.version != SARIF_VERSION {
            self.error(
                "SV001",
                &root.key("version"),
                format!("version must be {SARIF_VERSION:?}, found {:?}", log.version),
            );
        } else if log.schema_uri != SARIF_SCHEMA_URI {
            self.error(
                "SV002",
                &root.key("$schema"),
                format!("$schema must be {SARIF_SCHEMA_URI:?} for version {SARIF_VERSION}"),
            );
        }
        if log.runs.is_empty() {
            self.warning("SV012", &root.key("runs"), "log has no runs");
        }
        for (i, run) in log.runs.iter().enumerate() {
            self.run(run, &root.key("runs").index(i));
        }
    }

    fn run(&mut self, run: &Run, path: &JsonPath) {
        if run.tool.name.is_empty() {
            self.error("SV014", &path.key("tool").key("name"), "tool name is missing or empty");
        }
        for (i, inv) in run.invocations.iter().flatten().enumerate() {
            let at = path.key("invocations").index(i);
            if let (Some(start), Some(end)) = (&inv.start_time, &inv.end_time) {
                if start > end {
                    self.error("SV013", &at.key("endTime"), "endTime precedes startTime");
                }
            }
            let notes = inv
                .configuration_notifications
                .iter()
                .enumerate()
                .map(|(j, n)| (at.key("configurationNotifications").index(j), n))
                .chain(
                    inv.tool_notifications
                        .iter()
                        .enumerate()
                        .map(|(j, n)| (at.key("toolNotifications").index(j), n)),
                );
            for (p, n) in notes {
                if n.message.text.is_empty() {
                    self.error("SV007", &p.key("message").key("text"), "message text is empty");
                }
            }
        }
        self.files(run, &path.key("files"));
        self.logical_locations(run, &path.key("logicalLocations"));
        self.rules(run, &path.key("resources").key("rules"));
        for (i, result) in run.results.iter().enumerate() {
            self.result(run, result, &path.key("results").index(i));
        }
    }

    fn files(&mut self, run: &Run, path: &JsonPath) {
        for (key, entry) in &run.files {
            let at = path.key(key);
            if let Some((_, fragment)) = key.split_once('#') {
                if !fragment.starts_with('/') {
                    self.error("SV005", &at, "nested fragment after '#' must start with '/'");
                }
            }
            let Some(parent) = &entry.parent_key else {
                continue;
            };
            match &entry.uri {
                Some(uri) if uri.starts_with('/') => {
                    if *key != format!("{parent}#{uri}") {
                        self.error("SV005", &at, "nested file key must equal parentKey + '#' + uri");
                    }
                }
                _ => self.error("SV005", &at.key("uri"), "nested file uri must start with '/'"),
            }
            if !run.files.contains_key(parent) {
                self.error("SV004", &at.key("parentKey"), format!("parentKey {parent:?} is not a file of this run"));
            } else if cyclic(key, |k| run.files.get(k).and_then(|e| e.parent_key.as_deref())) {
                self.error("SV004", &at.key("parentKey"), "parentKey chain is cyclic");
            }
        }
    }

    fn logical_locations(&mut self, run: &Run, path: &JsonPath) {
        for (key, loc) in &run.logical_locations {
            let at = path.key(key);
            if key.rsplit("::").next() != Some(loc.name.as_str()) {
                self.error("SV016", &at.key("name"), "name must be the last '::' segment of its key");
            }
            if !LOGICAL_KINDS.contains(&loc.kind.as_str()) {
                self.warning("SV008", &at.key("kind"), format!("unlisted logical location kind {:?}", loc.kind));
            }
            let Some(parent) = &loc.parent_key else {
                continue;
            };
            if !run.logical_locations.contains_key(parent) {
                self.error("SV004", &at.key("parentKey"), format!("parentKey {parent:?} is not a logical location of this run"));
            } else if cyclic(key, |k| run.logical_locations.get(k).and_then(|e| e.parent_key.as_deref())) {
                self.error("SV004", &at.key("parentKey"), "parentKey chain is cyclic");
            }
        }
    }

    fn rules(&mut self, run: &Run, path: &JsonPath) {
        for (key, rule) in &run.resources.rules {
            let at = path.key(key);
            if rule.id != *key || rule.id.is_empty() {
                self.error("SV003", &at.key("id"), format!("rule id {:?} must equal its key {key:?}", rule.id));
            }
            for (name, m) in [("shortDescription", &rule.short_description), ("fullDescription", &rule.full_description)] {
                if m.as_ref().is_some_and(|m| m.text.is_empty()) {
                    self.error("SV007", &at.key(name).key("text"), "message text is empty");
                }
            }
        }
    }

    fn result(&mut self, run: &Run, result: &SarifResult, path: &JsonPath) {
        let rule = run.resources.rules.get(&result.rule_id);
        if rule.is_none() {
            self.error(
                "SV003",
                &path.key("ruleId"),
                format!("ruleId {:?} does not resolve in resources.rules", result.rule_id),
            );
        }
        match &result.message {
            Some(m) if m.text.is_empty() => {
                self.error("SV007", &path.key("message").key("text"), "message text is empty")
            }
            Some(_) => {}
            None if result.rule_message_id.is_none() => self.error(
                "SV007",
                path,
                "result has neither message nor ruleMessageId",
            ),
            None => {}
        }
        if let (Some(id), Some(rule)) = (&result.rule_message_id, rule) {
            if !rule.message_strings.as_ref().is_some_and(|m| m.contains_key(id)) {
                self.error("SV007", &path.key("ruleMessageId"), format!("ruleMessageId {id:?} has no messageStrings entry"));
            }
        }
        if let (Some(id), Some(rule)) = (&result.rich_message_id, rule) {
            if !rule.rich_message_strings.as_ref().is_some_and(|m| m.contains_key(id)) {
                self.error("SV007", &path.key("richMessageId"), format!("richMessageId {id:?} has no richMessageStrings entry"));
            }
        }
        if let Some(state) = &result.baseline_state {
            if !BASELINE_STATES.contains(&state.as_str()) {
                self.warning("SV008", &path.key("baselineState"), format!("unknown baselineState {state:?}"));
            }
        }
        for (i, state) in result.suppression_states.iter().flatten().enumerate() {
            if !SUPPRESSION_STATES.contains(&state.as_str()) {
                self.warning("SV008", &path.key("suppressionStates").index(i), format!("unknown suppression state {state:?}"));
            }
        }

        if result.locations.is_empty() {
            self.error("SV006", &path.key("locations"), "result has no locations");
        }
        for (i, loc) in result.locations.iter().enumerate() {
            let at = path.key("locations").index(i);
            self.location(loc, &at);
            if let Some(name) = &loc.fully_qualified_logical_name {
                if !run.logical_locations.is_empty() && !run.logical_locations.contains_key(name) {
                    self.warning(
                        "SV011",
                        &at.key("fullyQualifiedLogicalName"),
                        format!("{name:?} has no logicalLocations entry"),
                    );
                }
            }
        }

        for (i, flow) in result.code_flows.iter().flatten().enumerate() {
            let at = path.key("codeFlows").index(i);
            for (j, tf) in flow.thread_flows.iter().enumerate() {
                let locs = at.key("threadFlows").index(j).key("locations");
                if tf.locations.is_empty() {
                    self.error("SV015", &locs, "thread flow has no locations");
                }
                let mut previous = 0;
                for (k, tfl) in tf.locations.iter().enumerate() {
                    let here = locs.index(k);
                    if tfl.step <= previous {
                        self.error("SV009", &here.key("step"), format!("step {} does not increase on {previous}", tfl.step));
                    }
                    previous = previous.max(tfl.step);
                    if let Some(imp) = &tfl.importance {
                        if !IMPORTANCE_VALUES.contains(&imp.as_str()) {
                            self.warning("SV008", &here.key("importance"), format!("unknown importance {imp:?}"));
                        }
                    }
                    self.location(&tfl.location, &here.key("location"));
                }
            }
        }
        for (i, stack) in result.stacks.iter().flatten().enumerate() {
            let at = path.key("stacks").index(i);
            if stack.frames.is_empty() {
                self.error("SV015", &at.key("frames"), "stack has no frames");
            }
            for (j, frame) in stack.frames.iter().enumerate() {
                self.location(&frame.location, &at.key("frames").index(j).key("location"));
            }
        }
        for (i, fix) in result.fixes.iter().flatten().enumerate() {
            let at = path.key("fixes").index(i);
            if fix.description.text.is_empty() {
                self.error("SV007", &at.key("description").key("text"), "message text is empty");
            }
            if fix.file_changes.is_empty() {
                self.error("SV015", &at.key("fileChanges"), "fix has no file changes");
            }
            for (j, change) in fix.file_changes.iter().enumerate() {
                let reps = at.key("fileChanges").index(j).key("replacements");
                if change.replacements.is_empty() {
                    self.error("SV015", &reps, "file change has no replacements");
                }
                for (k, rep) in change.replacements.iter().enumerate() {
                    self.region(&rep.deleted_region, &reps.index(k).key("deletedRegion"));
                }
            }
        }
    }

    fn location(&mut self, loc: &Location, path: &JsonPath) {
        if loc.physical_location.is_none() && loc.fully_qualified_logical_name.is_none() {
            self.error(
                "SV006",
                path,
                "location needs physicalLocation or fullyQualifiedLogicalName",
            );
        }
        if let Some(region) = loc.physical_location.as_ref().and_then(|p| p.region.as_ref()) {
            self.region(region, &path.key("physicalLocation").key("region"));
        }
    }

    fn region(&mut self, region: &Region, path: &JsonPath) {
        if region.start_line == 0 {
            self.error("SV010", &path.key("startLine"), "startLine must be positive");
        }
        if let Some(end) = region.end_line {
            if end < region.start_line {
                self.error("SV010", &path.key("endLine"), format!("endLine {end} precedes startLine {}", region.start_line));
            }
        }
        for (name, col) in [("startColumn", region.start_column), ("endColumn", region.end_column)] {
            if col == Some(0) {
                self.error("SV010", &path.key(name), format!("{name} must be positive"));
            }
        }
    }
}

/// Whether following parents from `start` revisits a key.
fn cyclic<'a>(start: &'a str, parent: impl Fn(&str) -> Option<&'a str>) -> bool {
    let mut seen = HashSet::new();
    let mut current = Some(start);
    while let Some(key) = current {
        if !seen.insert(key) {
            return true;
        }
        current = parent(key);
    }
    false
}
