#![allow(dead_code)]

pub mod oracle;

use std::io::Write;

/// One result line per criterion, written past the test harness capture.
pub fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "[{verdict}] criterion {id:>2} {title}: {detail}");
    let _ = out.flush();
}
