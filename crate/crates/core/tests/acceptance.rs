mod common;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cognisarif::aggregate::aggregate;
use cognisarif::cognicrypt::{parse_report, render, ErrorType};
use cognisarif::convert::{convert, ToolConfig};
use cognisarif::crysl::{check_traces, parse_traces};
use cognisarif::path::{is_within, JsonPath};
use cognisarif::validator::{validate, validate_bytes};
use cognisarif::writer::{parse, to_string, write, WriteOptions};
use regex::Regex;
use serde_json::{json, Value};

use common::{arb_log, arb_report, data, key_generator, sample, synthetic_report};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn convert_text(text: &str) -> Value {
    let log = convert(&parse_report(text).unwrap(), &ToolConfig::default()).unwrap();
    serde_json::from_str(&to_string(&log)).unwrap()
}

fn golden() -> Value {
    serde_json::from_str(&data("TypestateErrorExample.sarif")).unwrap()
}

fn golden_conversion() -> Verdict {
    let start = Instant::now();
    let converted = convert_text(&data("TypestateErrorExample.txt"));
    let elapsed = start.elapsed();
    ensure(converted == golden(), || {
        format!("converted document differs:\n{}", serde_json::to_string_pretty(&converted).unwrap())
    })?;
    let results = converted["runs"][0]["results"].as_array().unwrap();
    let lines: Vec<_> = results
        .iter()
        .map(|r| r["locations"][0]["physicalLocation"]["region"]["startLine"].as_u64().unwrap())
        .collect();
    ensure(lines == [29, 24], || format!("startLines {lines:?}"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("structurally equal, 2 results, {elapsed:?}"))
}

/// `/runs/0/files/a~1b` to `$.runs[0].files["a/b"]`.
fn pointer_to_path(pointer: &str) -> String {
    let mut path = JsonPath::root();
    for seg in pointer.split('/').skip(1) {
        let seg = seg.replace("~1", "/").replace("~0", "~");
        path = match seg.parse::<usize>() {
            Ok(i) => path.index(i),
            Err(_) => path.key(&seg),
        };
    }
    path.into_string()
}

enum Edit {
    Set(&'static str, Value),
    Remove(&'static str),
}

impl Edit {
    /// Apply the edit and return the JSON path of the mutated subtree. A
    /// removed key mutates its parent object.
    fn apply(&self, doc: &mut Value) -> String {
        match self {
            Edit::Set(ptr, v) => {
                let (parent, key) = ptr.rsplit_once('/').unwrap();
                match doc.pointer_mut(parent).unwrap_or_else(|| panic!("no {parent}")) {
                    Value::Object(map) => {
                        map.insert(key.replace("~1", "/").replace("~0", "~"), v.clone());
                    }
                    other => other[key.parse::<usize>().unwrap()] = v.clone(),
                }
                pointer_to_path(ptr)
            }
            Edit::Remove(ptr) => {
                let (parent, key) = ptr.rsplit_once('/').unwrap();
                let key = key.replace("~1", "/").replace("~0", "~");
                let removed = doc.pointer_mut(parent).unwrap().as_object_mut().unwrap().shift_remove(&key);
                assert!(removed.is_some(), "no {ptr}");
                pointer_to_path(parent)
            }
        }
    }
}

fn mutations() -> Vec<Edit> {
    use Edit::{Remove, Set};
    let bad_flow = json!([{"threadFlows": [{"locations": [
        {"step": 2, "location": {"fullyQualifiedLogicalName": "example::TypestateErrorExample::main"}},
        {"step": 1, "location": {"fullyQualifiedLogicalName": "example::TypestateErrorExample::main"}}
    ]}]}]);
    vec![
        Set("/version", json!("1.0.0")),
        Set("/version", json!(2)),
        Remove("/version"),
        Set("/$schema", json!("http://example.com/schema")),
        Set("/$schema", json!(5)),
        Set("/runs", json!({})),
        Set("/runs/0/tool", json!("CogniCrypt")),
        Set("/runs/0/tool/name", json!("")),
        Set("/runs/0/tool/name", json!(7)),
        Set("/runs/0/tool/version", json!(1)),
        Set("/runs/0/tool/fullName", json!([])),
        Set("/runs/0/files", json!([])),
        Set("/runs/0/files/example~1TypestateErrorExample.java/mimeType", json!(3)),
        Set("/runs/0/files/example~1TypestateErrorExample.java", json!("text/java")),
        Set("/runs/0/logicalLocations/example::TypestateErrorExample/parentKey", json!("nowhere")),
        Set("/runs/0/logicalLocations/example/parentKey", json!("example")),
        Set("/runs/0/logicalLocations/example::TypestateErrorExample::main/name", json!("other")),
        Set("/runs/0/logicalLocations/example::TypestateErrorExample::main/kind", json!("gadget")),
        Set("/runs/0/logicalLocations/example/name", json!(1)),
        Set("/runs/0/results", json!({})),
        Set("/runs/0/results/0/ruleId", json!("NoSuchRule")),
        Remove("/runs/0/results/0/ruleId"),
        Set("/runs/0/results/1/ruleId", json!(12)),
        Remove("/runs/0/results/0/message"),
        Set("/runs/0/results/0/message/text", json!("")),
        Set("/runs/0/results/0/message/text", json!(false)),
        Set("/runs/0/results/1/message/richText", json!(4)),
        Set("/runs/0/results/0/locations", json!([])),
        Set("/runs/0/results/0/locations", json!("here")),
        Set("/runs/0/results/0/locations/0", json!({})),
        Set("/runs/0/results/0/locations/0/physicalLocation/region/startLine", json!(0)),
        Set("/runs/0/results/0/locations/0/physicalLocation/region/startLine", json!(-3)),
        Set("/runs/0/results/0/locations/0/physicalLocation/region/startLine", json!("29")),
        Set("/runs/0/results/0/locations/0/physicalLocation/region/startLine", json!(29.5)),
        Set("/runs/0/results/1/locations/0/physicalLocation/region/endLine", json!(3)),
        Set("/runs/0/results/1/locations/0/physicalLocation/region/startColumn", json!(0)),
        Remove("/runs/0/results/0/locations/0/physicalLocation/fileLocation"),
        Set("/runs/0/results/0/locations/0/physicalLocation/fileLocation/uri", json!(9)),
        Set("/runs/0/results/0/locations/0/fullyQualifiedLogicalName", json!("nowhere::X")),
        Set("/runs/0/results/0/level", json!("fatal")),
        Set("/runs/0/results/0/baselineState", json!("unknown")),
        Set("/runs/0/results/1/suppressionStates", json!(["maybe"])),
        Set("/runs/0/results/0/codeFlows", bad_flow),
        Set("/runs/0/results/0/stacks", json!([{"frames": []}])),
        Set("/runs/0/results/0/fixes", json!([{"description": {"text": "d"}, "fileChanges": []}])),
        Set("/runs/0/resources/rules/TypestateError/id", json!("Other")),
        Set("/runs/0/resources/rules", json!([])),
        Set("/runs/0/resources/rules/ConstraintError/fullDescription/text", json!("")),
        Set(
            "/runs/0/invocations",
            json!([{"commandLine": "x", "startTime": "2019-01-02T00:00:00Z", "endTime": "2019-01-01T00:00:00Z"}]),
        ),
        Remove("/runs/0/resources/rules/TypestateError"),
    ]
}

fn validator_pass() -> Verdict {
    let mut corpus: Vec<(String, String)> = common::crysl_reports()
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("crysl#{i}"), render(r)))
        .collect();
    let generated = corpus.len();
    ensure(generated >= 20, || format!("only {generated} generated reports"))?;
    corpus.push(("Crypto.txt".into(), data("Crypto.txt")));
    corpus.push(("TypestateErrorExample.txt".into(), data("TypestateErrorExample.txt")));
    for (name, text) in &corpus {
        let log = convert(&parse_report(text).unwrap(), &ToolConfig::default()).unwrap();
        let errors: Vec<_> = validate_bytes(&write(&log, &WriteOptions::default()))
            .unwrap()
            .into_iter()
            .filter(|d| d.is_error())
            .collect();
        ensure(errors.is_empty(), || format!("{name}: {errors:?}"))?;
    }

    let edits = mutations();
    let mut misses = Vec::new();
    for edit in &edits {
        let mut doc = golden();
        let subtree = edit.apply(&mut doc);
        let bytes = serde_json::to_vec(&doc).unwrap();
        let diagnostics = validate_bytes(&bytes).unwrap();
        if !diagnostics.iter().any(|d| is_within(&d.path, &subtree)) {
            misses.push(format!("{subtree} -> {:?}", diagnostics.iter().map(|d| &d.path).collect::<Vec<_>>()));
        }
    }
    let hits = edits.len() - misses.len();
    ensure(edits.len() == 50 && hits >= 48, || format!("{hits}/{} localized; misses: {misses:?}", edits.len()))?;
    Ok(format!(
        "{} reports clean ({generated} generated); {hits}/{} mutations localized{}",
        corpus.len(),
        edits.len(),
        if misses.is_empty() { String::new() } else { format!(", missed {misses:?}") }
    ))
}

fn crysl_oracle() -> Verdict {
    let rule = key_generator();
    let automaton = rule.automaton();
    let alphabet = [("g1", 'a'), ("g2", 'b'), ("i1", 'c'), ("i2", 'd'), ("i3", 'e'), ("i4", 'f'), ("i5", 'g'), ("gk", 'h')];
    let oracle = Regex::new("^[ab][c-g]?h$").unwrap();
    let (mut checked, mut disagreements) = (0usize, Vec::new());
    let mut frontier: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..=5 {
        let mut next = Vec::new();
        for seq in &frontier {
            let labels: Vec<&str> = seq.iter().map(|&i| alphabet[i].0).collect();
            let word: String = seq.iter().map(|&i| alphabet[i].1).collect();
            checked += 1;
            if automaton.accepts(labels.iter().copied()) != oracle.is_match(&word) {
                disagreements.push(labels.join(","));
            }
            for i in 0..alphabet.len() {
                let mut s = seq.clone();
                s.push(i);
                next.push(s);
            }
        }
        frontier = next;
    }
    ensure(checked == (0..=5).map(|k| 8usize.pow(k)).sum::<usize>(), || format!("checked {checked}"))?;
    ensure(disagreements.is_empty(), || format!("{} disagreements, e.g. {:?}", disagreements.len(), &disagreements[..1]))?;

    let report = check_traces(&rule, &parse_traces(&data("Crypto.trace"), &rule).unwrap());
    let mut types: Vec<ErrorType> = report.findings().map(|(_, _, f)| f.error_type).collect();
    types.sort_by_key(|t| t.as_str());
    let expected: Vec<ErrorType> = {
        let mut t: Vec<_> = parse_report(&data("Crypto.txt")).unwrap().findings().map(|(_, _, f)| f.error_type).collect();
        t.sort_by_key(|t| t.as_str());
        t
    };
    ensure(types == expected && types == [ErrorType::ConstraintError, ErrorType::TypestateError], || {
        format!("types {types:?} vs {expected:?}")
    })?;
    let constraint = report
        .findings()
        .find(|(_, _, f)| f.error_type == ErrorType::ConstraintError)
        .unwrap()
        .2;
    let expected = "First parameter (with value 512) should be any of {128, 192, 256}";
    ensure(constraint.detail_lines == [expected], || format!("{:?}", constraint.detail_lines))?;
    Ok(format!("{checked} sequences, 0 disagreements; reference types and message match"))
}

fn round_trips() -> Verdict {
    let reports = sample(arb_report(), 1000);
    for (i, r) in reports.iter().enumerate() {
        ensure(parse_report(&render(r)).as_ref() == Ok(r), || format!("report #{i} changed"))?;
    }
    let logs = sample(arb_log(), 1000);
    let opts = WriteOptions::default();
    for (i, log) in logs.iter().enumerate() {
        let bytes = write(log, &opts);
        let back = parse(&bytes).map_err(|e| format!("log #{i}: {e}"))?;
        ensure(&back == log, || format!("log #{i} changed"))?;
        ensure(write(&back, &opts) == bytes, || format!("log #{i} bytes changed"))?;
    }
    let findings: usize = reports.iter().map(|r| r.finding_count()).sum();
    Ok(format!("1000 reports ({findings} findings), 1000 logs, 0 failures"))
}

fn linearity() -> Verdict {
    let start = Instant::now();
    let sizes = [1000usize, 2000, 4000, 8000];
    let texts: Vec<String> = sizes.iter().map(|&n| render(&synthetic_report(n))).collect();
    let mut times = [Duration::MAX; 4];
    // Sizes are interleaved so that machine drift hits all of them alike.
    for _ in 0..7 {
        for (i, text) in texts.iter().enumerate() {
            let t = Instant::now();
            let log = convert(&parse_report(text).unwrap(), &ToolConfig::default()).unwrap();
            let bytes = write(&log, &WriteOptions::default());
            times[i] = times[i].min(t.elapsed());
            assert_eq!(log.runs[0].results.len(), sizes[i]);
            assert!(!bytes.is_empty());
        }
    }
    let ratio = times[3].as_secs_f64() / times[0].as_secs_f64();
    let per_finding: Vec<f64> = times.iter().zip(sizes).map(|(t, n)| t.as_secs_f64() * 1e6 / n as f64).collect();
    let total = start.elapsed();
    let shown: Vec<String> = times.iter().map(|t| format!("{:.1}ms", t.as_secs_f64() * 1e3)).collect();
    ensure(ratio <= 10.0 && total < Duration::from_secs(30), || {
        format!("times {shown:?}, 8k/1k ratio {ratio:.2}, total {total:?}")
    })?;
    Ok(format!(
        "times {} for 1k..8k, ratio {ratio:.2}, max {:.2}us per finding",
        shown.join("/"),
        per_finding.iter().cloned().fold(0.0, f64::max)
    ))
}

fn aggregation() -> Verdict {
    let logs = sample(arb_log(), 300);
    let ks = sample(1usize..6, 50);
    let mut offset = 0;
    for k in ks {
        let group: Vec<_> = logs.iter().cycle().skip(offset).take(k).cloned().collect();
        offset += k;
        let expected: usize = group.iter().map(|l| l.runs.len()).sum();
        let merged = aggregate(&group).map_err(|e| e.to_string())?.merged;
        ensure(merged.runs.len() == expected, || format!("{} runs, expected {expected}", merged.runs.len()))?;
    }
    for (i, t) in logs.chunks(3).take(100).enumerate() {
        let all = aggregate(t).unwrap().merged;
        let nested = aggregate(&[aggregate(&t[..2]).unwrap().merged, t[2].clone()]).unwrap().merged;
        ensure(all.runs == nested.runs, || format!("triple #{i} not associative"))?;
        let inputs_clean = t.iter().all(|l| validate(l).iter().all(|d| !d.is_error()));
        let merged_clean = validate(&all).iter().all(|d| !d.is_error());
        ensure(!inputs_clean || merged_clean, || format!("triple #{i} gained errors"))?;
    }
    Ok("50 run-count checks, 100 triples associative and valid".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 6] = [
        ("golden conversion", golden_conversion),
        ("validator pass and mutation localization", validator_pass),
        ("CrySL oracle equivalence", crysl_oracle),
        ("round trips", round_trips),
        ("linearity", linearity),
        ("aggregation", aggregation),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    let _ = panic::take_hook();
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
