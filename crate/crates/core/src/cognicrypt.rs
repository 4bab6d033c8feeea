//! CogniCrypt command-line reports.
//!
//! ```text
//! Findings in Java Class: Example.Crypto
//!
//!      in Method: void getKey(int)
//!         ConstraintError violating CrySL rule for javax.crypto.KeyGenerator (on Object #bfd7...)
//!             First parameter (with value 512) should be any of {128, 192, 256}
//!             at statement: virtualinvoke r1.<javax.crypto.KeyGenerator: void init(int)>(varReplacer29)
//!             at line: 5
//! ```
//!
//! Lines are trimmed before interpretation, so tabs and spaces are
//! interchangeable and indentation carries no meaning. Blank lines separate
//! blocks.

use std::fmt;
use std::str::FromStr;
use thiserror::Error;

const CLASS_HEADER: &str = "Findings in Java Class:";
const METHOD_HEADER: &str = "in Method:";
const STATEMENT_PREFIX: &str = "at statement:";
const LINE_PREFIX: &str = "at line:";
const RULE_INFIX: &str = " violating CrySL rule for ";
const OBJECT_PREFIX: &str = "(on Object #";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorType {
    ConstraintError,
    NeverTypeOfError,
    ForbiddenMethodError,
    TypestateError,
    RequiredPredicateError,
    ImpreciseValueExtractionError,
    IncompleteOperationError,
}

impl ErrorType {
    pub const ALL: [ErrorType; 7] = [
        ErrorType::ConstraintError,
        ErrorType::NeverTypeOfError,
        ErrorType::ForbiddenMethodError,
        ErrorType::TypestateError,
        ErrorType::RequiredPredicateError,
        ErrorType::ImpreciseValueExtractionError,
        ErrorType::IncompleteOperationError,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorType::ConstraintError => "ConstraintError",
            ErrorType::NeverTypeOfError => "NeverTypeOfError",
            ErrorType::ForbiddenMethodError => "ForbiddenMethodError",
            ErrorType::TypestateError => "TypestateError",
            ErrorType::RequiredPredicateError => "RequiredPredicateError",
            ErrorType::ImpreciseValueExtractionError => "ImpreciseValueExtractionError",
            ErrorType::IncompleteOperationError => "IncompleteOperationError",
        }
    }

    pub fn description(self) -> ErrorDescription {
        let (short_text, full_text) = match self {
            ErrorType::ConstraintError => (
                "Wrong parameter supplied to a method call.",
                "A constraint of a CrySL rule is violated, e.g., a key is generated with the wrong key size.",
            ),
            ErrorType::NeverTypeOfError => (
                "A variable has an insecure type.",
                "A value is held in a variable of an insecure type, e.g., a password stored in a String instead of a char array.",
            ),
            ErrorType::ForbiddenMethodError => (
                "A deprecated or insecure method is called.",
                "A method that is deprecated or insecure is called, e.g., the constructor PBEKeySpec(char[] password).",
            ),
            ErrorType::TypestateError => (
                "A method is called out of the expected order.",
                "The ORDER block of CrySL is violated, i.e., the expected method sequence call to be made is incorrect. For example, a Signature object expects a call to initSign(key) prior to update(data).",
            ),
            ErrorType::RequiredPredicateError => (
                "An object was not prepared as another object requires.",
                "An object relies on another object having been used in a specific way and that did not happen, e.g., a Cipher receiving a hardcoded key.",
            ),
            ErrorType::ImpreciseValueExtractionError => (
                "A parameter value could not be determined.",
                "The value passed to a cryptographic method could not be extracted, e.g., a key size read from a configuration file, so the call may be insecure.",
            ),
            ErrorType::IncompleteOperationError => (
                "A required method call is missing.",
                "An expected method call is never made on an object, e.g., Cipher.doFinal() is never called on a cipher object.",
            ),
        };
        ErrorDescription {
            short_text,
            full_text,
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown error type {0:?}")]
pub struct UnknownErrorType(pub String);

impl FromStr for ErrorType {
    type Err = UnknownErrorType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| UnknownErrorType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorDescription {
    pub short_text: &'static str,
    pub full_text: &'static str,
}

/// Descriptions of all seven error types, in declaration order.
pub fn error_catalog() -> Vec<(ErrorType, ErrorDescription)> {
    ErrorType::ALL.iter().map(|t| (*t, t.description())).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TextReport {
    pub classes: Vec<ClassFindings>,
}

impl TextReport {
    pub fn finding_count(&self) -> usize {
        self.findings().count()
    }

    /// Every finding with its class and method, in report order.
    pub fn findings(&self) -> impl Iterator<Item = (&ClassFindings, &MethodFindings, &Finding)> {
        self.classes.iter().flat_map(|c| {
            c.methods
                .iter()
                .flat_map(move |m| m.findings.iter().map(move |f| (c, m, f)))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassFindings {
    pub class_name: String,
    pub methods: Vec<MethodFindings>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodFindings {
    /// As printed, e.g. `void getKey(int)` or `getPrivateKey`.
    pub method_signature: String,
    pub findings: Vec<Finding>,
}

impl MethodFindings {
    pub fn bare_name(&self) -> &str {
        bare_method_name(&self.method_signature)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub error_type: ErrorType,
    pub rule_class: String,
    pub object_id: String,
    pub detail_lines: Vec<String>,
    pub statement: Option<String>,
    pub line: u64,
}

/// The identifier right before `(` in a signature, or the whole trimmed
/// token when there is no parameter list.
pub fn bare_method_name(signature: &str) -> &str {
    let head = match signature.find('(') {
        Some(i) => &signature[..i],
        None => signature,
    };
    head.split_whitespace().last().unwrap_or_else(|| head.trim())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ReportParseError {
    pub line: usize,
    pub message: String,
}

struct OpenFinding {
    finding: Finding,
    started_at: usize,
    closed: bool,
}

#[derive(Default)]
struct ReportBuilder {
    report: TextReport,
    class: Option<usize>,
    has_method: bool,
    open: Option<OpenFinding>,
}

impl ReportBuilder {
    fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ReportParseError> {
        Err(ReportParseError {
            line,
            message: message.into(),
        })
    }

    /// Files the current finding; a finding must have seen its `at line:`.
    fn close(&mut self) -> Result<(), ReportParseError> {
        let Some(open) = self.open.take() else {
            return Ok(());
        };
        if !open.closed {
            return Self::err(open.started_at, "finding has no 'at line:' entry");
        }
        let class = self.class.expect("findings only open inside a class");
        let method = self.report.classes[class]
            .methods
            .last_mut()
            .expect("findings only open inside a method");
        method.findings.push(open.finding);
        Ok(())
    }

    fn check_method_nonempty(&self, line: usize) -> Result<(), ReportParseError> {
        if let Some(class) = self.class {
            if let Some(m) = self.report.classes[class].methods.last() {
                if self.has_method && m.findings.is_empty() {
                    return Self::err(line, format!("method {:?} has no findings", m.method_signature));
                }
            }
        }
        Ok(())
    }

    fn class_header(&mut self, no: usize, name: &str) -> Result<(), ReportParseError> {
        self.close()?;
        self.check_method_nonempty(no)?;
        if name.is_empty() || name.contains('/') || name.contains(char::is_whitespace) {
            return Self::err(no, format!("invalid class name {name:?}"));
        }
        let idx = match self.report.classes.iter().position(|c| c.class_name == name) {
            Some(i) => i,
            None => {
                self.report.classes.push(ClassFindings {
                    class_name: name.to_string(),
                    methods: Vec::new(),
                });
                self.report.classes.len() - 1
            }
        };
        self.class = Some(idx);
        self.has_method = false;
        Ok(())
    }

    fn method_header(&mut self, no: usize, signature: &str) -> Result<(), ReportParseError> {
        self.close()?;
        self.check_method_nonempty(no)?;
        let Some(class) = self.class else {
            return Self::err(no, "'in Method:' before any 'Findings in Java Class:' header");
        };
        if signature.is_empty() || bare_method_name(signature).is_empty() {
            return Self::err(no, "empty method signature");
        }
        self.report.classes[class].methods.push(MethodFindings {
            method_signature: signature.to_string(),
            findings: Vec::new(),
        });
        self.has_method = true;
        Ok(())
    }

    fn finding_header(&mut self, no: usize, type_token: &str, rest: &str) -> Result<(), ReportParseError> {
        self.close()?;
        if !self.has_method {
            return Self::err(no, "finding outside an 'in Method:' block");
        }
        let error_type = type_token
            .parse::<ErrorType>()
            .or_else(|e| Self::err(no, e.to_string()))?;
        let (rule_class, object_id) = match rest.find(OBJECT_PREFIX) {
            Some(i) => {
                let Some(hex) = rest[i + OBJECT_PREFIX.len()..].strip_suffix(')') else {
                    return Self::err(no, "unterminated '(on Object #' clause");
                };
                // The hash may be wrapped with embedded whitespace.
                let id: String = hex.chars().filter(|c| !c.is_whitespace()).collect();
                (rest[..i].trim(), id)
            }
            None => (rest.trim(), String::new()),
        };
        if rule_class.is_empty() || rule_class.contains(char::is_whitespace) {
            return Self::err(no, format!("invalid rule class {rule_class:?}"));
        }
        self.open = Some(OpenFinding {
            finding: Finding {
                error_type,
                rule_class: rule_class.to_string(),
                object_id,
                detail_lines: Vec::new(),
                statement: None,
                line: 0,
            },
            started_at: no,
            closed: false,
        });
        Ok(())
    }

    fn open_unclosed(&mut self, no: usize, what: &str) -> Result<&mut Finding, ReportParseError> {
        match &mut self.open {
            Some(open) if !open.closed => Ok(&mut open.finding),
            _ => Self::err(no, format!("{what} outside a finding")),
        }
    }

    fn statement(&mut self, no: usize, text: &str) -> Result<(), ReportParseError> {
        let finding = self.open_unclosed(no, "'at statement:'")?;
        if finding.statement.is_some() {
            return Self::err(no, "duplicate 'at statement:'");
        }
        finding.statement = Some(text.to_string());
        Ok(())
    }

    fn line(&mut self, no: usize, text: &str) -> Result<(), ReportParseError> {
        let line = match text.parse::<u64>() {
            Ok(n) if n >= 1 => n,
            _ => return Self::err(no, format!("'at line:' value {text:?} is not a positive integer")),
        };
        let finding = self.open_unclosed(no, "'at line:'")?;
        if finding.detail_lines.is_empty() {
            return Self::err(no, "finding has no message line");
        }
        finding.line = line;
        self.open.as_mut().expect("checked above").closed = true;
        Ok(())
    }

    fn detail(&mut self, no: usize, text: &str) -> Result<(), ReportParseError> {
        let finding = self.open_unclosed(no, "text")?;
        if finding.statement.is_some() {
            return Self::err(no, "message line after 'at statement:'");
        }
        finding.detail_lines.push(text.to_string());
        Ok(())
    }

    fn finish(mut self, last_line: usize) -> Result<TextReport, ReportParseError> {
        self.close()?;
        self.check_method_nonempty(last_line)?;
        Ok(self.report)
    }
}

pub fn parse_report(text: &str) -> Result<TextReport, ReportParseError> {
    let mut b = ReportBuilder::default();
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        last = no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix(CLASS_HEADER) {
            b.class_header(no, name.trim())?;
        } else if let Some(sig) = line.strip_prefix(METHOD_HEADER) {
            b.method_header(no, sig.trim())?;
        } else if let Some(stmt) = line.strip_prefix(STATEMENT_PREFIX) {
            b.statement(no, stmt.trim())?;
        } else if let Some(n) = line.strip_prefix(LINE_PREFIX) {
            b.line(no, n.trim())?;
        } else if let Some((head, rest)) = finding_header(line) {
            b.finding_header(no, head, rest)?;
        } else {
            b.detail(no, line)?;
        }
    }
    b.finish(last)
}

/// Splits `<Type> violating CrySL rule for <rest>` when the head is a single
/// token.
fn finding_header(line: &str) -> Option<(&str, &str)> {
    let (head, rest) = line.split_once(RULE_INFIX)?;
    if head.is_empty() || head.contains(char::is_whitespace) {
        return None;
    }
    Some((head, rest))
}

/// Prints `report` in the command-line format; [`parse_report`] inverts it.
pub fn render(report: &TextReport) -> String {
    let mut out = String::new();
    for (i, class) in report.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("{CLASS_HEADER} {}\n", class.class_name));
        for method in &class.methods {
            out.push_str(&format!("\n\t {METHOD_HEADER} {}\n", method.method_signature));
            for (j, f) in method.findings.iter().enumerate() {
                if j > 0 {
                    out.push('\n');
                }
                out.push_str(&format!(
                    "\t\t{}{RULE_INFIX}{} {OBJECT_PREFIX}{})\n",
                    f.error_type, f.rule_class, f.object_id
                ));
                for d in &f.detail_lines {
                    out.push_str(&format!("\t\t\t{d}\n"));
                }
                if let Some(s) = &f.statement {
                    out.push_str(&format!("\t\t\t{STATEMENT_PREFIX} {s}\n"));
                }
                out.push_str(&format!("\t\t\t{LINE_PREFIX} {}\n", f.line));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CRYPTO_REPORT: &str = "Findings in Java Class: Example.Crypto

\t in Method: void getKey(int)
\t\tConstraintError violating CrySL rule for javax.crypto.KeyGenerator (on Object #bfd7ff31836bf8643830e32ce26e9ef95 4d0522793ed0e9722ce44f0b255d4ef)
\t\t\tFirst parameter (with value 512) should be any of {128, 192, 256}
\t\t\tat statement: virtualinvoke r1.<javax.crypto.KeyGenerator: void init(int)>(varReplacer29)
\t\t\tat line: 5

\t\tTypestateError violating CrySL rule for javax.crypto.KeyGenerator (on Object #bfd7ff31836bf8643830e32ce26e9ef95 4d0522793ed0e9722ce44f0b255d4ef)
\t\t\tUnexpected call to method generateKey on object of type javax.crypto.KeyGenerator.
\t\t\tat statement: virtualinvoke r1.<javax.crypto.KeyGenerator: javax.crypto.SecretKey generateKey()>()
\t\t\tat line: 7
";

    #[test]
    fn parses_constraint_and_typestate_block() {
        let report = parse_report(CRYPTO_REPORT).unwrap();
        assert_eq!(report.classes.len(), 1);
        let class = &report.classes[0];
        assert_eq!(class.class_name, "Example.Crypto");
        assert_eq!(class.methods.len(), 1);
        let m = &class.methods[0];
        assert_eq!(m.method_signature, "void getKey(int)");
        assert_eq!(m.bare_name(), "getKey");
        assert_eq!(m.findings.len(), 2);
        let c = &m.findings[0];
        assert_eq!(c.error_type, ErrorType::ConstraintError);
        assert_eq!(c.rule_class, "javax.crypto.KeyGenerator");
        assert_eq!(c.line, 5);
        assert_eq!(c.object_id, "bfd7ff31836bf8643830e32ce26e9ef954d0522793ed0e9722ce44f0b255d4ef");
        assert_eq!(c.detail_lines, vec!["First parameter (with value 512) should be any of {128, 192, 256}"]);
        assert!(c.statement.as_deref().unwrap().starts_with("virtualinvoke r1."));
        assert_eq!(m.findings[1].error_type, ErrorType::TypestateError);
        assert_eq!(m.findings[1].line, 7);
    }

    #[test]
    fn empty_input_has_no_classes() {
        assert_eq!(parse_report("").unwrap(), TextReport::default());
        assert_eq!(parse_report("\n\n  \n").unwrap(), TextReport::default());
    }

    #[test]
    fn error_paths_carry_line_numbers() {
        let e = parse_report("\t in Method: main\n").unwrap_err();
        assert_eq!(e.line, 1);
        let unknown = "Findings in Java Class: A\n in Method: m\n  BogusError violating CrySL rule for X (on Object #1)\n   msg\n   at line: 3\n";
        let e = parse_report(unknown).unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("BogusError"));
        let bad_line = "Findings in Java Class: A\n in Method: m\n  TypestateError violating CrySL rule for X (on Object #1)\n   msg\n   at line: seven\n";
        assert_eq!(parse_report(bad_line).unwrap_err().line, 5);
        let unterminated = "Findings in Java Class: A\n in Method: m\n  TypestateError violating CrySL rule for X (on Object #1)\n   msg\n";
        assert_eq!(parse_report(unterminated).unwrap_err().line, 3);
    }

    #[test]
    fn duplicate_class_headers_merge() {
        let text = "Findings in Java Class: A\n in Method: m\n  TypestateError violating CrySL rule for X (on Object #1)\n   msg\n   at line: 3\n\
                    Findings in Java Class: B\n\
                    Findings in Java Class: A\n in Method: n\n  TypestateError violating CrySL rule for X (on Object #1)\n   msg\n   at line: 4\n";
        let r = parse_report(text).unwrap();
        assert_eq!(r.classes.len(), 2);
        assert_eq!(r.classes[0].methods.len(), 2);
        assert!(r.classes[1].methods.is_empty());
    }

    #[test]
    fn catalog_has_seven_entries_with_verbatim_texts() {
        let cat = error_catalog();
        assert_eq!(cat.len(), 7);
        assert_eq!(
            ErrorType::ConstraintError.description().full_text,
            "A constraint of a CrySL rule is violated, e.g., a key is generated with the wrong key size."
        );
        assert!(ErrorType::TypestateError
            .description()
            .full_text
            .starts_with("The ORDER block of CrySL is violated"));
        assert!(ErrorType::ForbiddenMethodError
            .description()
            .short_text
            .contains("deprecated or insecure method is called"));
        for (t, d) in cat {
            assert_eq!(t.as_str().parse::<ErrorType>().unwrap(), t);
            assert!(!d.short_text.is_empty() && !d.full_text.is_empty());
        }
    }

    #[test]
    fn bare_names() {
        assert_eq!(bare_method_name("void getKey(int)"), "getKey");
        assert_eq!(bare_method_name("getPrivateKey"), "getPrivateKey");
        assert_eq!(bare_method_name("java.lang.String run$1(int, byte[])"), "run$1");
        assert_eq!(bare_method_name("<init>(char[])"), "<init>");
    }

    #[test]
    fn render_then_parse_is_identity_on_sample_report() {
        let report = parse_report(CRYPTO_REPORT).unwrap();
        assert_eq!(parse_report(&render(&report)).unwrap(), report);
    }
}
