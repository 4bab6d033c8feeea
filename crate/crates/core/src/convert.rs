//! CogniCrypt text report to SARIF.
//!
//! One run per report. Each distinct class becomes a `files` entry keyed by
//! its source path, each finding a result whose `ruleId` is the error type,
//! and each distinct error type a rule descriptor with the catalog
//! description. Logical locations are synthesized from the
//! `package::Class::method` names, since the text report carries none.

use indexmap::IndexMap;
use serde::Deserialize;
use thiserror::Error;

use crate::cognicrypt::{bare_method_name, Finding, TextReport};
use crate::model::{
    Location, LogicalLocation, Message, ModelError, PhysicalLocation, Region, RuleDescriptor,
    Run, SarifLog, SarifResult, Tool, FileEntry,
};

pub const JAVA_MIME_TYPE: &str = "text/java";

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ToolConfig {
    pub name: String,
    pub full_name: String,
    pub version: String,
    pub semantic_version: String,
    pub language: String,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            name: "CogniCrypt".into(),
            full_name: "CogniCrypt (en-US)".into(),
            version: "1.0.0".into(),
            semantic_version: "1.0.0".into(),
            language: "en-US".into(),
        }
    }
}

impl ToolConfig {
    pub fn tool(&self) -> Result<Tool, ModelError> {
        let mut tool = Tool::new(&self.name)?;
        tool.full_name = Some(self.full_name.clone());
        tool.version = Some(self.version.clone());
        tool.semantic_version = Some(self.semantic_version.clone());
        tool.language = Some(self.language.clone());
        Ok(tool)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvertError {
    #[error("invalid class name {0:?}")]
    BadClassName(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `example.TypestateErrorExample` → `example/TypestateErrorExample.java`.
pub fn class_to_uri(fqcn: &str) -> Result<String, ConvertError> {
    if fqcn.is_empty() || fqcn.contains('/') {
        return Err(ConvertError::BadClassName(fqcn.to_string()));
    }
    Ok(format!("{}.java", fqcn.replace('.', "/")))
}

/// `("example.TypestateErrorExample", "void main(String[])")` →
/// `example::TypestateErrorExample::main`.
pub fn logical_name(fqcn: &str, method_signature: &str) -> String {
    format!("{}::{}", fqcn.replace('.', "::"), bare_method_name(method_signature))
}

/// Message text from the first detail line, rich text from the error header
/// without the object hash.
pub fn split_message(finding: &Finding) -> Message {
    let first = finding
        .detail_lines
        .first()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .unwrap_or(finding.error_type.description().short_text);
    let mut text = first.to_string();
    if !text.ends_with('.') {
        text.push('.');
    }
    let rich = format!(
        "{} violating CrySL rule for {}.",
        finding.error_type, finding.rule_class
    );
    Message::with_rich_text(text, rich).expect("text is never empty")
}

/// Logical locations for every `fullyQualifiedLogicalName` in `results`:
/// the last segment is a member, the one before it a type, the rest
/// namespaces. A single-segment name is a namespace.
pub fn derive_logical_locations(results: &[SarifResult]) -> IndexMap<String, LogicalLocation> {
    let mut out = IndexMap::new();
    for name in results
        .iter()
        .flat_map(|r| &r.locations)
        .filter_map(|l| l.fully_qualified_logical_name.as_deref())
    {
        let segments: Vec<&str> = name.split("::").collect();
        let n = segments.len();
        for depth in (1..=n).rev() {
            let key = segments[..depth].join("::");
            if out.contains_key(&key) {
                // Its ancestors were added along with it.
                break;
            }
            let kind = match (n - depth, n) {
                (_, 1) => "namespace",
                (0, _) => "member",
                (1, _) => "type",
                _ => "namespace",
            };
            let parent = (depth > 1).then(|| segments[..depth - 1].join("::"));
            out.insert(key.clone(), LogicalLocation::for_key(&key, kind, parent));
        }
    }
    out
}

fn result_for(uri: &str, logical: String, finding: &Finding) -> Result<SarifResult, ModelError> {
    let region = Region::line(finding.line)?;
    let location = Location::try_new(
        Some(PhysicalLocation::new(uri, Some(region))),
        Some(logical),
    )?;
    SarifResult::new(finding.error_type.as_str(), split_message(finding), vec![location])
}

pub fn convert(report: &TextReport, config: &ToolConfig) -> Result<SarifLog, ConvertError> {
    let mut run = Run::new(config.tool()?);
    for class in &report.classes {
        let uri = class_to_uri(&class.class_name)?;
        run.files
            .entry(uri.clone())
            .or_insert_with(|| FileEntry::new(JAVA_MIME_TYPE));
        for method in &class.methods {
            let logical = logical_name(&class.class_name, &method.method_signature);
            for finding in &method.findings {
                run.results.push(result_for(&uri, logical.clone(), finding)?);
                if !run.resources.rules.contains_key(finding.error_type.as_str()) {
                    let mut rule = RuleDescriptor::new(finding.error_type.as_str())?;
                    rule.full_description =
                        Some(Message::new(finding.error_type.description().full_text)?);
                    run.resources.insert_rule(rule);
                }
            }
        }
    }
    run.logical_locations = derive_logical_locations(&run.results);
    Ok(SarifLog::new(vec![run])?)
}
