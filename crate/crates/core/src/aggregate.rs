//! Merging several logs into one. Runs are carried over whole and in input
//! order; two runs are never fused, even when they come from the same tool.

use indexmap::IndexMap;
use thiserror::Error;

use crate::model::SarifLog;

#[derive(Debug, Clone, PartialEq)]
pub struct AggregationReport {
    pub merged: SarifLog,
    pub source_count: usize,
    /// Informational notes; none of them stop the merge.
    pub conflicts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AggregateError {
    #[error("nothing to aggregate")]
    EmptyInput,
    #[error("version mismatch: input {index} has version {found:?}, expected {expected:?}")]
    VersionMismatch {
        index: usize,
        expected: String,
        found: String,
    },
}

pub fn aggregate(logs: &[SarifLog]) -> Result<AggregationReport, AggregateError> {
    let first = logs.first().ok_or(AggregateError::EmptyInput)?;
    for (index, log) in logs.iter().enumerate().skip(1) {
        if log.version != first.version {
            return Err(AggregateError::VersionMismatch {
                index,
                expected: first.version.clone(),
                found: log.version.clone(),
            });
        }
    }

    let mut merged = first.clone();
    merged.runs = logs.iter().flat_map(|l| l.runs.iter().cloned()).collect();

    let mut by_tool: IndexMap<&str, usize> = IndexMap::new();
    for run in &merged.runs {
        *by_tool.entry(run.tool.name.as_str()).or_default() += 1;
    }
    let conflicts = by_tool
        .into_iter()
        .filter(|(name, n)| *n > 1 && !name.is_empty())
        .map(|(name, n)| format!("{n} runs share the tool name {name:?}"))
        .collect();

    Ok(AggregationReport {
        merged,
        source_count: logs.len(),
        conflicts,
    })
}
