//! Runs every acceptance criterion at its stated caps and prints one
//! pass/fail line per criterion. Exits nonzero if any criterion fails.
//!
//! `cargo test -p amalgam-cli --test acceptance`

mod common;

use std::process::ExitCode;
use std::time::Instant;

use amalgam_core::harness::{run_acceptance, SuiteCaps};

struct Criterion {
    name: &'static str,
    suite: &'static str,
    caps: SuiteCaps,
}

const fn caps(max_points: usize, max_bound: u32) -> SuiteCaps {
    SuiteCaps {
        max_points,
        max_bound,
    }
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        name: "amalgam validity",
        suite: "amalgam-validity",
        caps: caps(4, 6),
    },
    Criterion {
        name: "sum bound >= gap bound",
        suite: "profile-order",
        caps: caps(4, 6),
    },
    Criterion {
        name: "distance composition",
        suite: "distance-lemma",
        caps: caps(5, 6),
    },
    Criterion {
        name: "d* extension",
        suite: "sequence-extension",
        caps: caps(5, 6),
    },
    Criterion {
        name: "ladder recursion",
        suite: "ladder",
        caps: caps(4, 8),
    },
    Criterion {
        name: "digraph checker-oracle agreement",
        suite: "digraph-agreement",
        caps: caps(4, 7),
    },
    Criterion {
        name: "directed amalgam doubling",
        suite: "digraph-doubling",
        caps: caps(4, 7),
    },
    Criterion {
        name: "cycle arithmetic",
        suite: "sop-arith",
        caps: caps(0, 3),
    },
    Criterion {
        name: "odd-girth realization",
        suite: "oddgirth-realization",
        caps: caps(4, 7),
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let report = run_acceptance(c.suite, c.caps).expect("known suite");
        let mark = if report.passed() { "PASS" } else { "FAIL" };
        println!("{mark}  {:<34} {report}", c.name);
        for line in &report.counterexamples {
            println!("        {line}");
        }
        failed += usize::from(!report.passed());
    }

    let start = Instant::now();
    let tmp = tempfile::tempdir().expect("temp dir");
    let mut problems = common::exit_codes(tmp.path());
    problems.extend(common::round_trips(tmp.path()));
    problems.extend(common::env_caps());
    let mark = if problems.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "{mark}  {:<34} cli: {} problems, {} ms",
        "CLI round trip and exit codes",
        problems.len(),
        start.elapsed().as_millis()
    );
    for p in &problems {
        println!("        {p}");
    }
    failed += usize::from(!problems.is_empty());

    println!(
        "{} of {} criteria passed",
        CRITERIA.len() + 1 - failed,
        CRITERIA.len() + 1
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
