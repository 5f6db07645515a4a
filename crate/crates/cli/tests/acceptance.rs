//! Runs `bartlett verify --suite all --seed 7` twice and prints one line per
//! acceptance criterion. Exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use serde_json::Value;

const TITLES: [&str; 9] = [
    "Plancherel identity",
    "spherical functional equation",
    "heat transform and heat kernel envelope",
    "Ginibre hyperuniformity",
    "Poisson baseline",
    "Bergman spectrum and GAF zeros",
    "heat-kernel and spectral verdicts agree",
    "Gaussian linear statistics",
    "determinism of verify artifacts",
];

/// Wall-clock budget per suite in seconds; suite 3 has none.
fn budget(id: u8) -> Option<f64> {
    match id {
        1 => Some(30.0),
        2 => Some(60.0),
        4 => Some(600.0),
        5 => Some(120.0),
        6 => Some(900.0),
        7 | 8 => Some(300.0),
        _ => None,
    }
}

struct Run {
    status: i32,
    summary: Value,
    timings: BTreeMap<u8, f64>,
}

fn run_verify(dir: &Path) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_bartlett"))
        .args(["verify", "--suite", "all", "--seed", "7"])
        .env("BARTLETT_OUT_DIR", dir)
        .output()
        .expect("failed to launch bartlett");
    let stderr = String::from_utf8_lossy(&out.stderr);
    let mut timings = BTreeMap::new();
    for line in stderr.lines() {
        // "suite 4: pass (37.512 s)"
        let Some(rest) = line.strip_prefix("suite ") else { continue };
        let Some((id, tail)) = rest.split_once(':') else { continue };
        let secs = tail.split('(').nth(1).and_then(|t| t.trim_end_matches(" s)").trim().parse::<f64>().ok());
        if let (Ok(id), Some(secs)) = (id.parse::<u8>(), secs) {
            timings.insert(id, secs);
        }
    }
    let summary = fs::read_to_string(dir.join("summary.json"))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or(Value::Null);
    if summary.is_null() {
        eprintln!("{stderr}");
    }
    Run { status: out.status.code().unwrap_or(-1), summary, timings }
}

fn files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut m = BTreeMap::new();
    for e in fs::read_dir(dir).into_iter().flatten().flatten() {
        if e.path().is_file() {
            m.insert(e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap_or_default());
        }
    }
    m
}

fn main() -> ExitCode {
    let a = tempfile::tempdir().expect("tempdir");
    let b = tempfile::tempdir().expect("tempdir");
    let first = run_verify(a.path());
    let second = run_verify(b.path());
    let mut all = true;

    for id in 1u8..=8 {
        let report = first.summary["suites"]
            .as_array()
            .and_then(|s| s.iter().find(|r| r["id"].as_u64() == Some(id as u64)));
        let checks_pass = report.and_then(|r| r["pass"].as_bool()).unwrap_or(false);
        let secs = first.timings.get(&id).copied();
        let in_budget = match (budget(id), secs) {
            (Some(limit), Some(s)) => s < limit,
            (None, Some(_)) => true,
            _ => false,
        };
        let pass = checks_pass && in_budget;
        all &= pass;
        let time = secs.map_or("no timing".to_string(), |s| format!("{s:.1} s"));
        let limit = budget(id).map_or(String::new(), |l| format!(" of {l:.0} s"));
        println!("criterion {id} {:<4} {} [{time}{limit}]", if pass { "PASS" } else { "FAIL" }, TITLES[id as usize - 1]);
        if !checks_pass {
            if let Some(checks) = report.and_then(|r| r["checks"].as_array()) {
                for c in checks.iter().filter(|c| c["pass"] != Value::Bool(true)) {
                    println!("    failed check: {} = {} (bound {})", c["name"], c["value"], c["bound"]);
                }
            }
        }
    }

    let (fa, fb) = (files(a.path()), files(b.path()));
    let differing: Vec<&String> = fa.keys().chain(fb.keys()).filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let deterministic = !fa.is_empty() && differing.is_empty() && first.status == second.status;
    all &= deterministic;
    println!(
        "criterion 9 {:<4} {} [{} files compared]",
        if deterministic { "PASS" } else { "FAIL" },
        TITLES[8],
        fa.len()
    );
    for k in differing {
        println!("    differs: {k}");
    }

    if all && first.status == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
