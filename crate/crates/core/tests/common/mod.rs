#![allow(dead_code)]

use std::path::PathBuf;

use cognisarif::cognicrypt::{ClassFindings, ErrorType, Finding, MethodFindings, TextReport};
use cognisarif::convert::{convert, ToolConfig};
use cognisarif::crysl::{check_traces, parse_rule, parse_traces, RuleSpec};
use cognisarif::model::{
    CodeFlow, Fix, FileChange, Invocation, Message, Region, Replacement, SarifLog, Stack,
    StackFrame, TextContent, ThreadFlow, ThreadFlowLocation,
};
use proptest::collection::{btree_set, vec};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::Value;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap()
}

pub fn key_generator() -> RuleSpec {
    parse_rule(&data("KeyGenerator.crysl")).unwrap()
}

/// Draws `n` values from `strategy` with a fixed seed.
pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

fn error_type() -> impl Strategy<Value = ErrorType> {
    proptest::sample::select(ErrorType::ALL.to_vec())
}

fn detail_line() -> impl Strategy<Value = String> {
    "[A-Z][a-zA-Z0-9 ,.(){}#=<>\\[\\]'\"-]{0,60}[a-z0-9.)}]"
}

fn finding() -> impl Strategy<Value = Finding> {
    (
        error_type(),
        "[a-z]{1,6}(\\.[A-Z][A-Za-z0-9]{0,8}){1,2}",
        "[0-9a-f]{1,64}",
        vec(detail_line(), 1..3),
        proptest::option::of("virtualinvoke r[0-9]\\.<[a-zA-Z.]{1,20}: void [a-z]{1,8}\\(\\)>\\(\\)"),
        1u64..100_000,
    )
        .prop_map(|(error_type, rule_class, object_id, detail_lines, statement, line)| Finding {
            error_type,
            rule_class,
            object_id,
            detail_lines,
            statement,
            line,
        })
}

fn method_signature() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z][A-Za-z0-9]{0,10}",
        "(void|int|byte\\[\\]) [a-z][A-Za-z0-9]{0,10}\\((int|String|byte\\[\\])?\\)",
    ]
}

fn class_name() -> impl Strategy<Value = String> {
    "[a-z]{1,6}(\\.[a-z]{1,6}){0,2}\\.[A-Z][A-Za-z0-9]{0,10}"
}

/// Reports that survive `render` and `parse_report` unchanged: unique class
/// names, unique methods per class, and every method non-empty.
pub fn arb_report() -> impl Strategy<Value = TextReport> {
    btree_set(class_name(), 0..4)
        .prop_flat_map(|names| {
            let n = names.len();
            (
                Just(names.into_iter().collect::<Vec<_>>()),
                vec(
                    btree_set(method_signature(), 0..4)
                        .prop_flat_map(|sigs| {
                            let k = sigs.len();
                            (Just(sigs.into_iter().collect::<Vec<_>>()), vec(vec(finding(), 1..4), k))
                        }),
                    n,
                ),
            )
        })
        .prop_map(|(names, methods)| TextReport {
            classes: names
                .into_iter()
                .zip(methods)
                .map(|(class_name, (sigs, findings))| ClassFindings {
                    class_name,
                    methods: sigs
                        .into_iter()
                        .zip(findings)
                        .map(|(method_signature, findings)| MethodFindings {
                            method_signature,
                            findings,
                        })
                        .collect(),
                })
                .collect(),
        })
}

/// Optional additions layered onto converter output.
#[derive(Debug, Clone)]
pub struct Decorations {
    invocation: Option<(u32, u32)>,
    flow_steps: Vec<u64>,
    stack_depth: usize,
    fix: Option<(u64, u64, String)>,
    extra: Option<(String, i64)>,
    tool_version: String,
}

fn decorations() -> impl Strategy<Value = Decorations> {
    (
        proptest::option::of((0u32..1000, 0u32..1000)),
        btree_set(1u64..50, 0..5),
        0usize..3,
        proptest::option::of((1u64..40, 0u64..5, "[ -~]{0,20}")),
        proptest::option::of(("x-[a-z]{1,8}", any::<i64>())),
        "[0-9]\\.[0-9]\\.[0-9]",
    )
        .prop_map(|(invocation, steps, stack_depth, fix, extra, tool_version)| Decorations {
            invocation,
            flow_steps: steps.into_iter().collect(),
            stack_depth,
            fix,
            extra,
            tool_version,
        })
}

fn decorate(mut log: SarifLog, d: &Decorations) -> SarifLog {
    let run = &mut log.runs[0];
    run.tool.version = Some(d.tool_version.clone());
    if let Some((a, b)) = d.invocation {
        let (lo, hi) = (a.min(b), a.max(b));
        let ts = |s: u32| format!("2019-05-01T{:02}:{:02}:{:02}.000Z", s / 3600, s / 60 % 60, s % 60);
        let inv = Invocation::new("cognicrypt --sarifReport", ts(lo), ts(hi)).unwrap();
        run.invocations = Some(vec![inv]);
    }
    if let Some(result) = run.results.first_mut() {
        let loc = result.locations[0].clone();
        if !d.flow_steps.is_empty() {
            let tfl = d
                .flow_steps
                .iter()
                .map(|s| ThreadFlowLocation::new(*s, loc.clone()))
                .collect();
            let flow = CodeFlow::new(None, vec![ThreadFlow::new(None, tfl).unwrap()]).unwrap();
            result.code_flows = Some(vec![flow]);
        }
        if d.stack_depth > 0 {
            let frames = vec![StackFrame::new(loc.clone()); d.stack_depth];
            result.stacks = Some(vec![Stack::new(None, frames).unwrap()]);
        }
        if let Some((line, extra_lines, text)) = &d.fix {
            let uri = loc.physical_location.as_ref().unwrap().file_location.uri.clone();
            let region = Region::span(*line, 1, line + extra_lines, 2).unwrap();
            let rep = Replacement::new(region, Some(TextContent::new(text.clone())));
            let fix = Fix::new(Message::new("Use a stronger key").unwrap(), vec![FileChange::new(uri, vec![rep])]);
            result.fixes = Some(vec![fix.unwrap()]);
        }
        if let Some((key, n)) = &d.extra {
            result.extra.insert(key.clone(), Value::from(*n));
        }
    }
    log
}

/// Model-valid logs: converter output for 1 to 3 reports, one run each,
/// with invocations, code flows, stacks, fixes and unknown keys mixed in.
pub fn arb_log() -> impl Strategy<Value = SarifLog> {
    vec((arb_report(), decorations()), 1..4).prop_map(|parts| {
        let runs = parts
            .iter()
            .flat_map(|(report, d)| {
                let log = convert(report, &ToolConfig::default()).unwrap();
                decorate(log, d).runs
            })
            .collect();
        SarifLog::new(runs).unwrap()
    })
}

/// Synthetic report with `n` findings spread over classes and methods.
pub fn synthetic_report(n: usize) -> TextReport {
    let mut classes: Vec<ClassFindings> = Vec::new();
    for i in 0..n {
        let (c, m) = (i / 100, i / 10);
        if classes.len() <= c {
            classes.push(ClassFindings {
                class_name: format!("pkg{}.sub.Class{c}", c % 7),
                methods: Vec::new(),
            });
        }
        let class = classes.last_mut().unwrap();
        if class.methods.len() <= m % 10 {
            class.methods.push(MethodFindings {
                method_signature: format!("void method{m}(int)"),
                findings: Vec::new(),
            });
        }
        let error_type = ErrorType::ALL[i % ErrorType::ALL.len()];
        class.methods.last_mut().unwrap().findings.push(Finding {
            error_type,
            rule_class: "javax.crypto.Cipher".into(),
            object_id: format!("{:064x}", i * 7919),
            detail_lines: vec![format!("First parameter (with value {i}) should be any of {{128, 256}}")],
            statement: None,
            line: 1 + i as u64 % 500,
        });
    }
    TextReport { classes }
}

/// Traces over the KeyGenerator rule, each producing at least one finding.
pub fn crysl_reports() -> Vec<TextReport> {
    let rule = key_generator();
    let algs = ["\"AES\"", "\"DES\"", "\"HmacSHA256\"", "?"];
    let bodies = [
        "g1(alg={a}) @ 3\ni1(keySize={k}) @ 5\ngk @ 8",
        "g2(alg={a}) @ 3\ni2(keySize={k}) @ 4",
        "g1(alg={a}) @ 3\ngk @ 7\ngk @ 8",
        "i1(keySize={k}) @ 2\ng1(alg={a}) @ 4\ngk @ 6",
        "g1(alg={a}) @ 3\ni3 @ 4\ni1(keySize={k}) @ 5\ngk @ 9",
        "g2(alg={a}) @ 10",
    ];
    let mut out = Vec::new();
    for (b, body) in bodies.iter().enumerate() {
        for (a, alg) in algs.iter().enumerate() {
            let key = ["512", "128", "?", "1024"][(a + b) % 4];
            let text = format!(
                "@class gen.pkg{b}.Case{a}\n@method void run{a}(int)\n@object {b:x}{a:x}ff\n{}\n",
                body.replace("{a}", alg).replace("{k}", key)
            );
            let report = check_traces(&rule, &parse_traces(&text, &rule).unwrap());
            if report.finding_count() > 0 {
                out.push(report);
            }
        }
    }
    out
}
