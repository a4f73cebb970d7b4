//! CLI contract checks shared by the integration tests and the acceptance
//! target. Each check returns a list of problems; empty means it held.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amalgam_core::format::{parse_bms, parse_dds, parse_edge_list, serialize_bms, serialize_dds};
use amalgam_core::girth::dd_from_digraph_on;
use amalgam_core::Digraph;
use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn amalgam(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amalgam"))
        .args(args)
        .current_dir(fixtures())
        .env_remove("AMALGAM_MAX_POINTS")
        .env_remove("AMALGAM_MAX_BOUND")
        .output()
        .expect("binary runs")
}

pub fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = amalgam(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap_or(-1), v)
}

/// Every line of `cases.txt` exits with its listed code.
pub fn exit_codes(tmp: &Path) -> Vec<String> {
    let manifest = fs::read_to_string(fixtures().join("cases.txt")).unwrap();
    let mut problems = Vec::new();
    for line in manifest
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
    {
        let line = line.replace("{tmp}", tmp.to_str().unwrap());
        let mut toks = line.split_whitespace();
        let want: i32 = toks.next().unwrap().parse().unwrap();
        let args: Vec<&str> = toks.collect();
        let out = amalgam(&args);
        let got = out.status.code().unwrap_or(-1);
        if got != want {
            problems.push(format!(
                "`amalgam {}` exited {got}, expected {want}; stderr: {}",
                args.join(" "),
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
        // the JSON report agrees with the exit code
        let (code, report) = json(&args);
        let outcome = report["outcome"].as_str().unwrap_or("");
        let consistent = match code {
            0 => outcome == "pass",
            1 => outcome == "fail" || outcome == "error",
            _ => outcome == "error" || report.is_null(),
        };
        if code != want || !consistent {
            problems.push(format!(
                "`amalgam --json {}`: exit {code}, outcome {outcome:?}",
                args.join(" ")
            ));
        }
    }
    problems
}

fn canonical_of(cmd: &str, path: &Path) -> Option<String> {
    let (_, v) = json(&[cmd, path.to_str().unwrap()]);
    v["result"]["canonical"].as_str().map(str::to_string)
}

/// Canonical output is a fixed point, matches the library serializer, and
/// equals the input for files already in canonical form.
pub fn round_trips(tmp: &Path) -> Vec<String> {
    let mut problems = Vec::new();
    let mut names: Vec<PathBuf> = fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    names.sort();
    for path in names {
        let (cmd, ext) = match path.extension().and_then(|e| e.to_str()) {
            Some("bms") => ("validate", "bms"),
            Some("dds") => ("digraph-check", "dds"),
            _ => continue,
        };
        let text = fs::read_to_string(&path).unwrap();
        let library = match ext {
            "bms" => parse_bms(&text).ok().map(|f| serialize_bms(&f)),
            _ => parse_dds(&text).ok().map(|s| serialize_dds(&s)),
        };
        let cli = canonical_of(cmd, &path);
        if cli != library {
            problems.push(format!(
                "{}: CLI canonical form {cli:?} != library {library:?}",
                path.display()
            ));
            continue;
        }
        let Some(canon) = cli else { continue };
        let copy = tmp.join(format!("canon.{ext}"));
        fs::write(&copy, &canon).unwrap();
        if canonical_of(cmd, &copy).as_deref() != Some(canon.as_str()) {
            problems.push(format!(
                "{}: canonical form is not a fixed point",
                path.display()
            ));
        }
        let stem = path.file_stem().unwrap().to_str().unwrap();
        if ["metric", "consistent", "bidirected"].contains(&stem) && canon != text {
            problems.push(format!(
                "{}: canonical input changed on round trip",
                path.display()
            ));
        }
    }

    // complete, then validate and complete again
    let done = tmp.join("completed.bms");
    let out = amalgam(&["complete", "partial.bms", "--out", done.to_str().unwrap()]);
    if !out.status.success() {
        problems.push("complete partial.bms failed".into());
    } else {
        let first = fs::read_to_string(&done).unwrap();
        let f = parse_bms(&first).unwrap();
        if !f.is_total() || amalgam(&["validate", done.to_str().unwrap()]).status.code() != Some(0)
        {
            problems.push("completion is not a total metric".into());
        }
        let again = amalgam(&["complete", done.to_str().unwrap()]);
        if String::from_utf8_lossy(&again.stdout).trim_end() != first.trim_end() {
            problems.push("completing a complete space changed it".into());
        }
    }

    // amalgam output is a metric containing both sides
    let am = tmp.join("amalgam.bms");
    let out = amalgam(&[
        "amalgamate",
        "--left",
        "left.bms",
        "--right",
        "right.bms",
        "--base",
        "c0,c1",
        "--out",
        am.to_str().unwrap(),
    ]);
    if !out.status.success()
        || amalgam(&["validate", am.to_str().unwrap()]).status.code() != Some(0)
    {
        problems.push("amalgamate output does not validate".into());
    } else {
        let space = parse_bms(&fs::read_to_string(&am).unwrap())
            .unwrap()
            .spec
            .into_space()
            .unwrap();
        for side in ["left.bms", "right.bms"] {
            let s = parse_bms(&fs::read_to_string(fixtures().join(side)).unwrap())
                .unwrap()
                .spec
                .into_space()
                .unwrap();
            for p in s.points() {
                for q in s.points() {
                    if space.dist_by_name(p, q) != s.dist_by_name(p, q) {
                        problems.push(format!("amalgam changes {side} distance {p}-{q}"));
                    }
                }
            }
        }
    }

    // realized edge list reads back to the same directed distances
    for dds in ["consistent.dds", "bidirected.dds"] {
        let edges_path = tmp.join("realized.edges");
        let out = amalgam(&[
            "digraph-realize",
            dds,
            "--out",
            edges_path.to_str().unwrap(),
        ]);
        if !out.status.success() {
            problems.push(format!("digraph-realize {dds} failed"));
            continue;
        }
        let s = parse_dds(&fs::read_to_string(fixtures().join(dds)).unwrap()).unwrap();
        let edges = parse_edge_list(&fs::read_to_string(&edges_path).unwrap()).unwrap();
        let g = Digraph::from_edges(&edges);
        let back = dd_from_digraph_on(&g, s.bound(), s.points());
        if back.as_ref() != Ok(&s) {
            problems.push(format!("{dds}: realized graph reads back as {back:?}"));
        }
    }

    // identical inputs, identical reports (modulo duration)
    let strip = |mut v: Value| {
        v["duration_ms"] = Value::Null;
        v
    };
    for args in [
        &["accept", "sop-arith"][..],
        &["digraph-check", "inconsistent.dds"][..],
    ] {
        let (a, b) = (strip(json(args).1), strip(json(args).1));
        if a != b {
            problems.push(format!("`{}` report differs between runs", args.join(" ")));
        }
    }
    problems
}

/// Cap overrides from the environment reach the harness.
pub fn env_caps() -> Vec<String> {
    let out = Command::new(env!("CARGO_BIN_EXE_amalgam"))
        .args(["--json", "accept", "oddgirth-realization"])
        .env("AMALGAM_MAX_POINTS", "2")
        .env("AMALGAM_MAX_BOUND", "3")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    let caps = &v["result"][0]["caps"];
    if caps["max_points"] != 2 || caps["max_bound"] != 3 || !out.status.success() {
        return vec![format!("env caps not applied: {caps}")];
    }
    Vec::new()
}
