//! Acceptance suite: one PASS/FAIL line per criterion, with the numbers
//! behind each verdict. A failing criterion is reported, not raised; only a
//! criterion that cannot produce a verdict at all fails the target.
//!
//! `ACCEPTANCE_ONLY=1,3` restricts the run; `ACCEPTANCE_OUT=dir` also writes
//! the data tables.

use std::time::Instant;

use kicked_spin_cli::output::write_tables;
use kicked_spin_cli::verify::{self, CRITERIA};

const SEED: u64 = 1;

fn main() {
    // `cargo test -- --list` and friends must not start the long run
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let only: Vec<u8> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect())
        .unwrap_or_else(|| (1..=CRITERIA).collect());
    let out = std::env::var_os("ACCEPTANCE_OUT");

    let mut reports = Vec::new();
    let mut errors = 0;
    for id in only {
        let start = Instant::now();
        match verify::criterion(id, SEED) {
            Ok(r) => {
                println!("{} ({:.0} s)", r.line(), start.elapsed().as_secs_f64());
                for d in &r.details {
                    println!("    {d}");
                }
                reports.push(r);
            }
            Err(e) => {
                errors += 1;
                println!("FAIL criterion {id:>2}: {} (no verdict: {e})", verify::name(id));
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.pass).count() + errors;
    println!("acceptance: {} passed, {failed} failed", reports.len() + errors - failed);

    if let Some(dir) = out {
        let mut tables: Vec<_> = reports.iter().flat_map(|r| r.tables.iter().cloned()).collect();
        tables.push(verify::summary(&reports));
        write_tables(std::path::Path::new(&dir), &tables, "verify", "acceptance").expect("tables written");
    }
    if errors > 0 {
        std::process::exit(1);
    }
}
