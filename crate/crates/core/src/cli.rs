//! The `cognisarif` command line. Machine output goes to `stdout`,
//! diagnostics to `stderr`.
//!
//! Exit codes: 0 on success, 1 when validation errors or findings are
//! present, 2 on usage, I/O or parse failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use clap::{Parser, Subcommand, ValueEnum};

use crate::aggregate::aggregate;
use crate::cognicrypt::{parse_report, render};
use crate::convert::{convert, ToolConfig};
use crate::crysl::{check_traces, parse_rule, parse_traces};
use crate::model::{Invocation, SarifLog};
use crate::validator::{has_errors, validate_bytes};
use crate::writer::{self, ParseError, WriteOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "cognisarif", version, about = "CogniCrypt reports to SARIF 2.0.0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a CogniCrypt text report into `<stem>.sarif`
    Convert {
        input: PathBuf,
        /// Accepted for compatibility; output is always SARIF
        #[arg(long = "sarifReport")]
        sarif_report: bool,
        /// Directory for the generated file
        #[arg(long = "reportDir", short = 'o', visible_alias = "out-dir", default_value = ".")]
        report_dir: PathBuf,
        /// JSON file overriding the tool block
        #[arg(long)]
        tool_config: Option<PathBuf>,
        /// Record an invocation with command line and timestamps
        #[arg(long)]
        with_invocation: bool,
    },
    /// Check a SARIF file against the structural rules
    Validate {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Merge several SARIF files into one
    Aggregate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Output file; stdout when absent
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Evaluate call traces against a CrySL rule
    Check {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Emit {
    Text,
    Sarif,
}

/// Failure carried to `stderr` with exit code 2.
struct Failure(String);

type Outcome = Result<i32, Failure>;

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_FAILURE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let outcome = match cli.command {
        Command::Convert {
            input,
            sarif_report: _,
            report_dir,
            tool_config,
            with_invocation,
        } => {
            let command_line = with_invocation.then(|| {
                args.iter()
                    .map(|a| a.to_string_lossy().into_owned())
                    .collect::<Vec<_>>()
                    .join(" ")
            });
            cmd_convert(&input, &report_dir, tool_config.as_deref(), command_line, stdout)
        }
        Command::Validate { path, format } => cmd_validate(&path, format, stdout),
        Command::Aggregate { paths, out } => cmd_aggregate(&paths, out.as_deref(), stdout, stderr),
        Command::Check { rule, trace, emit } => cmd_check(&rule, &trace, emit, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure(message)) => {
            let _ = writeln!(stderr, "error: {message}");
            EXIT_FAILURE
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    String::from_utf8(read(path)?).map_err(|_| Failure(format!("{}: not UTF-8", path.display())))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn cmd_convert(
    input: &Path,
    report_dir: &Path,
    tool_config: Option<&Path>,
    command_line: Option<String>,
    stdout: &mut dyn Write,
) -> Outcome {
    let start = now();
    let config = match tool_config {
        Some(p) => serde_json::from_slice(&read(p)?)
            .map_err(|e| Failure(format!("{}: {e}", p.display())))?,
        None => ToolConfig::default(),
    };
    let text = read_text(input)?;
    let report = parse_report(&text).map_err(|e| Failure(format!("{}:{e}", input.display())))?;
    let mut log = convert(&report, &config)?;
    if let Some(cmd) = command_line {
        log.runs[0]
            .invocations
            .get_or_insert_with(Vec::new)
            .push(Invocation::new(cmd, start, now())?);
    }
    let stem = input
        .file_stem()
        .ok_or_else(|| Failure(format!("{}: no file name", input.display())))?;
    let out = report_dir.join(Path::new(stem).with_extension("sarif"));
    fs::create_dir_all(report_dir)?;
    write_log(&log, &out)?;
    writeln!(stdout, "{}", out.display())?;
    Ok(EXIT_OK)
}

fn write_log(log: &SarifLog, path: &Path) -> Result<(), Failure> {
    fs::write(path, writer::write(log, &WriteOptions::default()))
        .map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn cmd_validate(path: &Path, format: Format, stdout: &mut dyn Write) -> Outcome {
    let diagnostics = match validate_bytes(&read(path)?) {
        Ok(d) => d,
        Err(e @ ParseError::JsonSyntax { .. }) => {
            return Err(Failure(format!("{}: {e}", path.display())))
        }
        Err(e) => return Err(e.into()),
    };
    match format {
        Format::Text => {
            for d in &diagnostics {
                writeln!(stdout, "{d}")?;
            }
        }
        Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&diagnostics)?)?,
    }
    Ok(if has_errors(&diagnostics) { EXIT_FINDINGS } else { EXIT_OK })
}

fn cmd_aggregate(
    paths: &[PathBuf],
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Outcome {
    let logs = paths
        .iter()
        .map(|p| writer::parse(&read(p)?).map_err(|e| Failure(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let report = aggregate(&logs)?;
    for note in &report.conflicts {
        writeln!(stderr, "note: {note}")?;
    }
    match out {
        Some(path) => {
            write_log(&report.merged, path)?;
            writeln!(stdout, "{}", path.display())?;
        }
        None => stdout.write_all(&writer::write(&report.merged, &WriteOptions::default()))?,
    }
    Ok(EXIT_OK)
}

fn cmd_check(rule: &Path, trace: &Path, emit: Emit, stdout: &mut dyn Write) -> Outcome {
    let spec = parse_rule(&read_text(rule)?).map_err(|e| Failure(format!("{}:{e}", rule.display())))?;
    let traces = parse_traces(&read_text(trace)?, &spec)
        .map_err(|e| Failure(format!("{}:{e}", trace.display())))?;
    let report = check_traces(&spec, &traces);
    match emit {
        Emit::Text => stdout.write_all(render(&report).as_bytes())?,
        Emit::Sarif => {
            let log = convert(&report, &ToolConfig::default())?;
            stdout.write_all(&writer::write(&log, &WriteOptions::default()))?;
        }
    }
    Ok(if report.finding_count() > 0 { EXIT_FINDINGS } else { EXIT_OK })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(
            std::iter::once("cognisarif").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&[]).0, EXIT_FAILURE);
        assert_eq!(call(&["validate"]).0, EXIT_FAILURE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_FAILURE);
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("convert"));
    }

    #[test]
    fn unreadable_input_exits_two() {
        let (code, _, err) = call(&["validate", "/nonexistent/x.sarif"]);
        assert_eq!(code, EXIT_FAILURE);
        assert!(err.starts_with("error: /nonexistent/x.sarif"));
    }
}
