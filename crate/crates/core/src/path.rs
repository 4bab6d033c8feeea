//! JSON-path-like locators used by parse errors and validator diagnostics.
//!
//! Object keys that look like identifiers render as `.key`; anything else
//! renders as `["key"]` with JSON string escaping. Both the parser and the
//! validator build paths through [`JsonPath`] so their locators agree.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JsonPath(String);

impl JsonPath {
    pub fn root() -> Self {
        JsonPath("$".to_string())
    }

    pub fn key(&self, key: &str) -> Self {
        let mut s = String::with_capacity(self.0.len() + key.len() + 4);
        s.push_str(&self.0);
        if is_identifier(key) {
            s.push('.');
            s.push_str(key);
        } else {
            s.push('[');
            s.push_str(&serde_json::to_string(key).expect("strings always serialize"));
            s.push(']');
        }
        JsonPath(s)
    }

    pub fn index(&self, index: usize) -> Self {
        JsonPath(format!("{}[{}]", self.0, index))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_identifier(key: &str) -> bool {
    let mut chars = key.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

/// Segment-aware prefix test: `$.a[1]` is a prefix of `$.a[1].b` but not of
/// `$.a[10]`.
pub fn is_within(path: &str, prefix: &str) -> bool {
    match path.strip_prefix(prefix) {
        Some(rest) => rest.is_empty() || rest.starts_with('.') || rest.starts_with('['),
        None => false,
    }
}
