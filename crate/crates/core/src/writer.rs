//! Canonical JSON serialization of [`SarifLog`] and parsing back.
//!
//! Output is UTF-8 without BOM, pretty-printed with a configurable indent and
//! terminated by a newline. Key order follows the model's field order, so the
//! root is always `version`, `$schema`, `runs`, and a run is always `tool`,
//! `invocations`, `files`, `logicalLocations`, `results`, `resources`.

use serde::Serialize;
use serde_json::ser::{PrettyFormatter, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::model::SarifLog;
use crate::path::JsonPath;

pub const MAX_INDENT_WIDTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WriteOptions {
    indent_width: usize,
    sort_maps: bool,
}

impl Default for WriteOptions {
    fn default() -> Self {
        WriteOptions {
            indent_width: 2,
            sort_maps: false,
        }
    }
}

impl WriteOptions {
    pub fn new(indent_width: usize, sort_maps: bool) -> Result<Self, WriteOptionsError> {
        if indent_width > MAX_INDENT_WIDTH {
            return Err(WriteOptionsError(indent_width));
        }
        Ok(WriteOptions {
            indent_width,
            sort_maps,
        })
    }

    pub fn indent_width(&self) -> usize {
        self.indent_width
    }

    pub fn sort_maps(&self) -> bool {
        self.sort_maps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("indent width {0} exceeds the maximum of {MAX_INDENT_WIDTH}")]
pub struct WriteOptionsError(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("JSON syntax error at byte {offset} (line {line}, column {column}): {message}")]
    JsonSyntax {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Model { path: String, message: String },
}

pub fn write(log: &SarifLog, options: &WriteOptions) -> Vec<u8> {
    let sorted;
    let log = if options.sort_maps {
        let mut copy = log.clone();
        copy.sort_maps();
        sorted = copy;
        &sorted
    } else {
        log
    };
    let indent = vec![b' '; options.indent_width];
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, PrettyFormatter::with_indent(&indent));
    log.serialize(&mut ser)
        .expect("serializing an in-memory model to a Vec cannot fail");
    out.push(b'\n');
    out
}

/// [`write`] with default options, as a `String`.
pub fn to_string(log: &SarifLog) -> String {
    String::from_utf8(write(log, &WriteOptions::default())).expect("serde_json emits UTF-8")
}

pub fn parse(bytes: &[u8]) -> Result<SarifLog, ParseError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| syntax_error(bytes, &e))?;
    from_value(value)
}

/// Builds the model from an already-parsed JSON value.
pub fn from_value(value: Value) -> Result<SarifLog, ParseError> {
    serde_path_to_error::deserialize(value).map_err(|err| {
        let mut path = JsonPath::root();
        for segment in err.path().iter() {
            path = match segment {
                serde_path_to_error::Segment::Seq { index } => path.index(*index),
                serde_path_to_error::Segment::Map { key } => path.key(key),
                serde_path_to_error::Segment::Enum { variant } => path.key(variant),
                serde_path_to_error::Segment::Unknown => path,
            };
        }
        let message = err.inner().to_string();
        // Missing keys are reported against the enclosing object.
        if let Some(field) = missing_field(&message) {
            path = path.key(field);
        }
        ParseError::Model {
            path: path.into_string(),
            message,
        }
    })
}

fn missing_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("missing field `")?;
    rest.split('`').next()
}

fn syntax_error(bytes: &[u8], err: &serde_json::Error) -> ParseError {
    let (line, column) = (err.line(), err.column());
    let line_start: usize = bytes
        .split_inclusive(|b| *b == b'\n')
        .take(line.saturating_sub(1))
        .map(<[u8]>::len)
        .sum();
    ParseError::JsonSyntax {
        offset: (line_start + column.saturating_sub(1)).min(bytes.len()),
        line,
        column,
        message: err.to_string(),
    }
}
