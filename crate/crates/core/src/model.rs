//! In-memory model of a SARIF 2.0.0 log.
//!
//! Every object keeps the keys it does not model in an `extra` side map so
//! vendor properties survive a parse/write cycle. Optional keys that are
//! absent stay absent on output.
//!
//! Fields are public so foreign documents can be represented as-is and then
//! checked by the validator. The `new`/`try_*` constructors enforce the local
//! invariants of each type, and [`SarifLog::new`] additionally checks the
//! cross-references inside every run.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::collections::HashSet;
use thiserror::Error;

use crate::path::JsonPath;

pub const SARIF_VERSION: &str = "2.0.0";
pub const SARIF_SCHEMA_URI: &str = "http://json.schemastore.org/sarif-2.0.0";

/// Unmodelled keys of one JSON object, in input order.
pub type Extra = Map<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{path}: {message}")]
    Invariant { path: String, message: String },
    #[error("result for rule {rule_id:?} has no message and no resolvable ruleMessageId")]
    MissingMessage { rule_id: String },
    #[error("nested fragment {0:?} must start with '/'")]
    BadFragment(String),
    #[error("unknown logical location {0:?}")]
    UnknownKey(String),
    #[error("parent chain of {0:?} is cyclic")]
    CyclicParent(String),
}

impl ModelError {
    fn invariant(path: &JsonPath, message: impl Into<String>) -> Self {
        ModelError::Invariant {
            path: path.to_string(),
            message: message.into(),
        }
    }
}

/// The path is only built when the check fails.
macro_rules! ensure {
    ($cond:expr, $path:expr, $message:expr $(,)?) => {
        if $cond {
            Ok(())
        } else {
            Err(ModelError::invariant($path, $message))
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Warning,
    Note,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Error => "error",
            Level::Warning => "warning",
            Level::Note => "note",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarifLog {
    pub version: String,
    #[serde(rename = "$schema")]
    pub schema_uri: String,
    pub runs: Vec<Run>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl SarifLog {
    /// A 2.0.0 log over `runs`, with every run checked by [`Run::check`].
    pub fn new(runs: Vec<Run>) -> Result<Self, ModelError> {
        let root = JsonPath::root().key("runs");
        for (i, run) in runs.iter().enumerate() {
            run.check_at(&root.index(i))?;
        }
        Ok(SarifLog {
            version: SARIF_VERSION.to_string(),
            schema_uri: SARIF_SCHEMA_URI.to_string(),
            runs,
            extra: Extra::new(),
        })
    }

    /// Reorders every keyed collection of the log by key.
    pub fn sort_maps(&mut self) {
        for run in &mut self.runs {
            run.sort_maps();
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Run {
    pub tool: Tool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invocations: Option<Vec<Invocation>>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub files: IndexMap<String, FileEntry>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub logical_locations: IndexMap<String, LogicalLocation>,
    #[serde(default)]
    pub results: Vec<SarifResult>,
    #[serde(default)]
    pub resources: Resources,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Run {
    pub fn new(tool: Tool) -> Self {
        Run {
            tool,
            invocations: None,
            files: IndexMap::new(),
            logical_locations: IndexMap::new(),
            results: Vec::new(),
            resources: Resources::default(),
            extra: Extra::new(),
        }
    }

    /// Checks the run-level invariants: rule resolution, message fallbacks,
    /// file nesting and logical-location parent chains.
    pub fn check(&self) -> Result<(), ModelError> {
        self.check_at(&JsonPath::root())
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        self.tool.check_at(&path.key("tool"))?;
        let files = path.key("files");
        for (key, entry) in &self.files {
            let at = files.key(key);
            entry.check_at(&at)?;
            if let Some(parent) = &entry.parent_key {
                ensure!(
                    self.files.contains_key(parent),
                    &at.key("parentKey"),
                    "parentKey does not name a file of this run",
                )?;
                let uri = entry.uri.as_deref().unwrap_or_default();
                ensure!(
                    *key == format!("{parent}#{uri}"),
                    &at,
                    "nested file key must be parentKey + '#' + uri",
                )?;
            }
        }
        let logical = path.key("logicalLocations");
        for (key, loc) in &self.logical_locations {
            let at = logical.key(key);
            ensure!(
                key.rsplit("::").next() == Some(loc.name.as_str()),
                &at.key("name"),
                "name must be the last '::' segment of its key",
            )?;
            match self.parent_chain(key) {
                Ok(_) => {}
                Err(ModelError::UnknownKey(_)) => {
                    return Err(ModelError::invariant(
                        &at.key("parentKey"),
                        "parentKey does not name a logical location of this run",
                    ))
                }
                Err(e) => return Err(e),
            }
        }
        let rules = path.key("resources").key("rules");
        for (key, rule) in &self.resources.rules {
            ensure!(rule.id == *key, &rules.key(key).key("id"), "rule id must equal its key")?;
            ensure!(!rule.id.is_empty(), &rules.key(key).key("id"), "rule id is empty")?;
        }
        let results = path.key("results");
        for (i, result) in self.results.iter().enumerate() {
            let at = results.index(i);
            result.check_at(&at)?;
            let Some(rule) = self.resources.rules.get(&result.rule_id) else {
                return Err(ModelError::invariant(
                    &at.key("ruleId"),
                    "ruleId does not resolve in resources.rules",
                ));
            };
            if let Some(id) = &result.rule_message_id {
                ensure!(
                    rule.message_strings.as_ref().is_some_and(|m| m.contains_key(id)),
                    &at.key("ruleMessageId"),
                    "ruleMessageId does not name a messageStrings entry",
                )?;
            }
            if let Some(id) = &result.rich_message_id {
                ensure!(
                    rule.rich_message_strings.as_ref().is_some_and(|m| m.contains_key(id)),
                    &at.key("richMessageId"),
                    "richMessageId does not name a richMessageStrings entry",
                )?;
            }
        }
        if let Some(invocations) = &self.invocations {
            for (i, inv) in invocations.iter().enumerate() {
                inv.check_at(&path.key("invocations").index(i))?;
            }
        }
        Ok(())
    }

    /// The message of `result`, falling back to the rule's message string
    /// named by `ruleMessageId`.
    pub fn resolve_message(&self, result: &SarifResult) -> Result<Message, ModelError> {
        if let Some(message) = &result.message {
            if !message.text.is_empty() {
                return Ok(message.clone());
            }
        }
        result
            .rule_message_id
            .as_ref()
            .and_then(|id| {
                self.resources
                    .rules
                    .get(&result.rule_id)?
                    .message_strings
                    .as_ref()?
                    .get(id)
            })
            .filter(|text| !text.is_empty())
            .map(|text| Message::plain(text.clone()))
            .ok_or_else(|| ModelError::MissingMessage {
                rule_id: result.rule_id.clone(),
            })
    }

    /// `logical_key` followed by each ancestor up to the top-level entry.
    pub fn parent_chain(&self, logical_key: &str) -> Result<Vec<String>, ModelError> {
        let mut chain = Vec::new();
        let mut seen = HashSet::new();
        let mut current = logical_key;
        loop {
            let entry = self
                .logical_locations
                .get(current)
                .ok_or_else(|| ModelError::UnknownKey(current.to_string()))?;
            if !seen.insert(current) {
                return Err(ModelError::CyclicParent(logical_key.to_string()));
            }
            chain.push(current.to_string());
            match &entry.parent_key {
                Some(parent) => current = parent,
                None => return Ok(chain),
            }
        }
    }

    fn sort_maps(&mut self) {
        self.files.sort_keys();
        self.logical_locations.sort_keys();
        self.resources.rules.sort_keys();
        for rule in self.resources.rules.values_mut() {
            if let Some(m) = &mut rule.message_strings {
                m.sort_keys();
            }
            if let Some(m) = &mut rule.rich_message_strings {
                m.sort_keys();
            }
        }
        if let Some(p) = &mut self.tool.properties {
            p.sort_keys();
        }
        for inv in self.invocations.iter_mut().flatten() {
            inv.environment_variables.sort_keys();
        }
    }
}

/// `parent_key + "#" + fragment`, the key of a file nested in a container.
pub fn nested_file_key(parent_key: &str, fragment: &str) -> Result<String, ModelError> {
    if !fragment.starts_with('/') {
        return Err(ModelError::BadFragment(fragment.to_string()));
    }
    Ok(format!("{parent_key}#{fragment}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Tool {
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic_version: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub properties: Option<IndexMap<String, String>>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Tool {
    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let tool = Tool {
            name: name.into(),
            full_name: None,
            version: None,
            semantic_version: None,
            language: None,
            properties: None,
            extra: Extra::new(),
        };
        tool.check_at(&JsonPath::root())?;
        Ok(tool)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        ensure!(!self.name.is_empty(), &path.key("name"), "tool name is empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Invocation {
    pub command_line: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub response_files: Vec<FileLocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_time: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_time: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_directory: Option<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub environment_variables: IndexMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub configuration_notifications: Vec<Notification>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tool_notifications: Vec<Notification>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Invocation {
    /// Start and end are RFC-3339 UTC timestamps; `start` must not be after `end`.
    pub fn new(
        command_line: impl Into<String>,
        start_time: impl Into<String>,
        end_time: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let inv = Invocation {
            command_line: command_line.into(),
            response_files: Vec::new(),
            start_time: Some(start_time.into()),
            end_time: Some(end_time.into()),
            file_name: None,
            working_directory: None,
            environment_variables: IndexMap::new(),
            configuration_notifications: Vec::new(),
            tool_notifications: Vec::new(),
            extra: Extra::new(),
        };
        inv.check_at(&JsonPath::root())?;
        Ok(inv)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        if let (Some(start), Some(end)) = (&self.start_time, &self.end_time) {
            // Same-format UTC timestamps order lexicographically.
            ensure!(start <= end, &path.key("endTime"), "endTime precedes startTime")?;
        }
        for (i, n) in self.tool_notifications.iter().enumerate() {
            n.message
                .check_at(&path.key("toolNotifications").index(i).key("message"))?;
        }
        for (i, n) in self.configuration_notifications.iter().enumerate() {
            n.message
                .check_at(&path.key("configurationNotifications").index(i).key("message"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub level: Level,
    pub message: Message,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Notification {
    pub fn new(level: Level, message: Message) -> Self {
        Notification {
            level,
            message,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uri: Option<String>,
    pub mime_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_key: Option<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl FileEntry {
    pub fn new(mime_type: impl Into<String>) -> Self {
        FileEntry {
            uri: None,
            mime_type: mime_type.into(),
            length: None,
            parent_key: None,
            extra: Extra::new(),
        }
    }

    /// A file nested inside `parent_key`; returns the map key alongside the
    /// entry.
    pub fn nested(
        parent_key: impl Into<String>,
        fragment: impl Into<String>,
        mime_type: impl Into<String>,
    ) -> Result<(String, Self), ModelError> {
        let parent_key = parent_key.into();
        let fragment = fragment.into();
        let key = nested_file_key(&parent_key, &fragment)?;
        let entry = FileEntry {
            uri: Some(fragment),
            parent_key: Some(parent_key),
            ..FileEntry::new(mime_type)
        };
        Ok((key, entry))
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        if self.parent_key.is_some() {
            ensure!(
                self.uri.as_deref().is_some_and(|u| u.starts_with('/')),
                &path.key("uri"),
                "nested file uri must start with '/'",
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogicalLocation {
    pub name: String,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent_key: Option<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl LogicalLocation {
    /// The entry stored under `key`; its name is the last `::` segment.
    pub fn for_key(key: &str, kind: impl Into<String>, parent_key: Option<String>) -> Self {
        LogicalLocation {
            name: key.rsplit("::").next().unwrap_or(key).to_string(),
            kind: kind.into(),
            parent_key,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Message {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rich_text: Option<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Message {
    pub fn new(text: impl Into<String>) -> Result<Self, ModelError> {
        let m = Message::plain(text);
        m.check_at(&JsonPath::root())?;
        Ok(m)
    }

    pub fn with_rich_text(
        text: impl Into<String>,
        rich_text: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let mut m = Message::new(text)?;
        m.rich_text = Some(rich_text.into());
        Ok(m)
    }

    fn plain(text: impl Into<String>) -> Self {
        Message {
            text: text.into(),
            rich_text: None,
            extra: Extra::new(),
        }
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        ensure!(!self.text.is_empty(), &path.key("text"), "message text is empty")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SarifResult {
    pub rule_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_message_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rich_message_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suppression_states: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_state: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<Level>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis_target: Option<FileLocation>,
    pub locations: Vec<Location>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code_flows: Option<Vec<CodeFlow>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stacks: Option<Vec<Stack>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixes: Option<Vec<Fix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub work_item_uris: Option<Vec<String>>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl SarifResult {
    /// A result carrying its own message.
    pub fn new(
        rule_id: impl Into<String>,
        message: Message,
        locations: Vec<Location>,
    ) -> Result<Self, ModelError> {
        let r = SarifResult::bare(rule_id.into(), Some(message), None, locations);
        r.check_at(&JsonPath::root())?;
        Ok(r)
    }

    /// A result whose message comes from the rule's `messageStrings[message_id]`.
    pub fn with_message_id(
        rule_id: impl Into<String>,
        message_id: impl Into<String>,
        locations: Vec<Location>,
    ) -> Result<Self, ModelError> {
        let r = SarifResult::bare(rule_id.into(), None, Some(message_id.into()), locations);
        r.check_at(&JsonPath::root())?;
        Ok(r)
    }

    fn bare(
        rule_id: String,
        message: Option<Message>,
        rule_message_id: Option<String>,
        locations: Vec<Location>,
    ) -> Self {
        SarifResult {
            rule_id,
            rule_message_id,
            rich_message_id: None,
            message,
            suppression_states: None,
            baseline_state: None,
            level: None,
            analysis_target: None,
            locations,
            code_flows: None,
            stacks: None,
            fixes: None,
            work_item_uris: None,
            extra: Extra::new(),
        }
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        ensure!(!self.rule_id.is_empty(), &path.key("ruleId"), "ruleId is empty")?;
        ensure!(
            !self.locations.is_empty(),
            &path.key("locations"),
            "a result needs at least one location",
        )?;
        match &self.message {
            Some(m) => m.check_at(&path.key("message"))?,
            None => ensure!(
                self.rule_message_id.is_some(),
                &path.key("ruleMessageId"),
                "a result without message needs a ruleMessageId",
            )?,
        }
        for (i, loc) in self.locations.iter().enumerate() {
            loc.check_at(&path.key("locations").index(i))?;
        }
        for (i, flow) in self.code_flows.iter().flatten().enumerate() {
            flow.check_at(&path.key("codeFlows").index(i))?;
        }
        for (i, stack) in self.stacks.iter().flatten().enumerate() {
            stack.check_at(&path.key("stacks").index(i))?;
        }
        for (i, fix) in self.fixes.iter().flatten().enumerate() {
            fix.check_at(&path.key("fixes").index(i))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Location {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical_location: Option<PhysicalLocation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fully_qualified_logical_name: Option<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Location {
    pub fn try_new(
        physical_location: Option<PhysicalLocation>,
        fully_qualified_logical_name: Option<String>,
    ) -> Result<Self, ModelError> {
        let loc = Location {
            physical_location,
            fully_qualified_logical_name,
            extra: Extra::new(),
        };
        loc.check_at(&JsonPath::root())?;
        Ok(loc)
    }

    pub fn physical(uri: impl Into<String>, region: Option<Region>) -> Self {
        Location {
            physical_location: Some(PhysicalLocation::new(uri, region)),
            fully_qualified_logical_name: None,
            extra: Extra::new(),
        }
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        ensure!(
            self.physical_location.is_some() || self.fully_qualified_logical_name.is_some(),
            path,
            "location needs physicalLocation or fullyQualifiedLogicalName",
        )?;
        if let Some(region) = self.physical_location.as_ref().and_then(|p| p.region.as_ref()) {
            region.check_at(&path.key("physicalLocation").key("region"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PhysicalLocation {
    pub file_location: FileLocation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<Region>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl PhysicalLocation {
    pub fn new(uri: impl Into<String>, region: Option<Region>) -> Self {
        PhysicalLocation {
            file_location: FileLocation::new(uri),
            region,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileLocation {
    pub uri: String,
    #[serde(flatten)]
    pub extra: Extra,
}

impl FileLocation {
    pub fn new(uri: impl Into<String>) -> Self {
        FileLocation {
            uri: uri.into(),
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Region {
    pub start_line: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_column: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_line: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_column: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_offset: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet: Option<TextContent>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Region {
    pub fn line(start_line: u64) -> Result<Self, ModelError> {
        let r = Region {
            start_line,
            start_column: None,
            end_line: None,
            end_column: None,
            char_length: None,
            char_offset: None,
            snippet: None,
            extra: Extra::new(),
        };
        r.check_at(&JsonPath::root())?;
        Ok(r)
    }

    /// A line/column span; columns are 1-based.
    pub fn span(
        start_line: u64,
        start_column: u64,
        end_line: u64,
        end_column: u64,
    ) -> Result<Self, ModelError> {
        let r = Region {
            start_column: Some(start_column),
            end_line: Some(end_line),
            end_column: Some(end_column),
            ..Region::line(start_line)?
        };
        r.check_at(&JsonPath::root())?;
        Ok(r)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        ensure!(self.start_line >= 1, &path.key("startLine"), "startLine must be positive")?;
        if let Some(end) = self.end_line {
            ensure!(end >= self.start_line, &path.key("endLine"), "endLine precedes startLine")?;
        }
        ensure!(
            self.start_column != Some(0),
            &path.key("startColumn"),
            "startColumn must be positive",
        )?;
        ensure!(
            self.end_column != Some(0),
            &path.key("endColumn"),
            "endColumn must be positive",
        )?;
        Ok(())
    }
}

/// `{ "text": ... }`, used for snippets and inserted content.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextContent {
    pub text: String,
    #[serde(flatten)]
    pub extra: Extra,
}

impl TextContent {
    pub fn new(text: impl Into<String>) -> Self {
        TextContent {
            text: text.into(),
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CodeFlow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    pub thread_flows: Vec<ThreadFlow>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl CodeFlow {
    pub fn new(message: Option<Message>, thread_flows: Vec<ThreadFlow>) -> Result<Self, ModelError> {
        let flow = CodeFlow {
            message,
            thread_flows,
            extra: Extra::new(),
        };
        flow.check_at(&JsonPath::root())?;
        Ok(flow)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        for (i, tf) in self.thread_flows.iter().enumerate() {
            tf.check_at(&path.key("threadFlows").index(i))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadFlow {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub locations: Vec<ThreadFlowLocation>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl ThreadFlow {
    pub fn new(id: Option<String>, locations: Vec<ThreadFlowLocation>) -> Result<Self, ModelError> {
        let tf = ThreadFlow {
            id,
            locations,
            extra: Extra::new(),
        };
        tf.check_at(&JsonPath::root())?;
        Ok(tf)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        let locs = path.key("locations");
        ensure!(!self.locations.is_empty(), &locs, "thread flow has no locations")?;
        let mut previous = 0;
        for (i, tfl) in self.locations.iter().enumerate() {
            ensure!(
                tfl.step > previous,
                &locs.index(i).key("step"),
                "steps must be positive and strictly increasing",
            )?;
            previous = tfl.step;
            tfl.location.check_at(&locs.index(i).key("location"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreadFlowLocation {
    pub step: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub importance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    pub location: Location,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub module: Option<String>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl ThreadFlowLocation {
    pub fn new(step: u64, location: Location) -> Self {
        ThreadFlowLocation {
            step,
            importance: None,
            message: None,
            location,
            module: None,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    pub frames: Vec<StackFrame>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Stack {
    pub fn new(message: Option<Message>, frames: Vec<StackFrame>) -> Result<Self, ModelError> {
        let s = Stack {
            message,
            frames,
            extra: Extra::new(),
        };
        s.check_at(&JsonPath::root())?;
        Ok(s)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        ensure!(!self.frames.is_empty(), &path.key("frames"), "stack has no frames")?;
        for (i, frame) in self.frames.iter().enumerate() {
            frame
                .location
                .check_at(&path.key("frames").index(i).key("location"))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StackFrame {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
    pub location: Location,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thread_id: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub address: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Vec<String>>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl StackFrame {
    pub fn new(location: Location) -> Self {
        StackFrame {
            message: None,
            location,
            thread_id: None,
            address: None,
            parameters: None,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Fix {
    pub description: Message,
    pub file_changes: Vec<FileChange>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Fix {
    pub fn new(description: Message, file_changes: Vec<FileChange>) -> Result<Self, ModelError> {
        let fix = Fix {
            description,
            file_changes,
            extra: Extra::new(),
        };
        fix.check_at(&JsonPath::root())?;
        Ok(fix)
    }

    fn check_at(&self, path: &JsonPath) -> Result<(), ModelError> {
        self.description.check_at(&path.key("description"))?;
        let changes = path.key("fileChanges");
        ensure!(!self.file_changes.is_empty(), &changes, "fix has no file changes")?;
        for (i, change) in self.file_changes.iter().enumerate() {
            let reps = changes.index(i).key("replacements");
            ensure!(!change.replacements.is_empty(), &reps, "file change has no replacements")?;
            for (j, rep) in change.replacements.iter().enumerate() {
                rep.deleted_region
                    .check_at(&reps.index(j).key("deletedRegion"))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FileChange {
    pub file_location: FileLocation,
    pub replacements: Vec<Replacement>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl FileChange {
    pub fn new(uri: impl Into<String>, replacements: Vec<Replacement>) -> Self {
        FileChange {
            file_location: FileLocation::new(uri),
            replacements,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Replacement {
    pub deleted_region: Region,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inserted_content: Option<TextContent>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Replacement {
    pub fn new(deleted_region: Region, inserted_content: Option<TextContent>) -> Self {
        Replacement {
            deleted_region,
            inserted_content,
            extra: Extra::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Resources {
    #[serde(default)]
    pub rules: IndexMap<String, RuleDescriptor>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl Resources {
    /// Adds `rule` under its own id, keeping the first descriptor on repeats.
    pub fn insert_rule(&mut self, rule: RuleDescriptor) -> &RuleDescriptor {
        self.rules.entry(rule.id.clone()).or_insert(rule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleDescriptor {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub short_description: Option<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full_description: Option<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_strings: Option<IndexMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rich_message_strings: Option<IndexMap<String, String>>,
    #[serde(flatten)]
    pub extra: Extra,
}

impl RuleDescriptor {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        ensure!(!id.is_empty(), &JsonPath::root().key("id"), "rule id is empty")?;
        Ok(RuleDescriptor {
            id,
            short_description: None,
            full_description: None,
            message_strings: None,
            rich_message_strings: None,
            extra: Extra::new(),
        })
    }
}
