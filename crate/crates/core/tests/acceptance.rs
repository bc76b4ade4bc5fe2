//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Claims that are known to miss their targets are reported as FAIL but do
//! not make the run exit nonzero; any other failure does.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use macjsc::mixture::l2_objective;
use macjsc::region::gmac_example_pair;
use macjsc::report::{reproduce, ClaimReport, ReportOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const KNOWN_FAILURES: [&str; 4] = [
    "lemma3_gmac",
    "fit_rho06",
    "mc_i1_conditional",
    "mc_i2_conditional",
];

const TITLES: [&str; 9] = [
    "exact discrete values",
    "side-information ladder",
    "rate-distortion values",
    "correlation bounds",
    "Gaussian MAC closed forms",
    "mixture fit",
    "Monte Carlo estimates",
    "random-coding simulator",
    "property suites",
];

struct Line {
    criterion: u8,
    failures: Vec<String>,
    flags: Vec<String>,
    notes: Vec<String>,
}

fn from_report(report: &ClaimReport, k: u8) -> Line {
    let claims: Vec<_> = report.criterion(k).collect();
    Line {
        criterion: k,
        failures: claims
            .iter()
            .filter(|c| !c.pass && !c.flagged)
            .map(|c| c.id.clone())
            .collect(),
        flags: claims
            .iter()
            .filter(|c| c.flagged)
            .map(|c| c.id.clone())
            .collect(),
        notes: vec![format!("{} claims", claims.len())],
    }
}

/// Closed-form objective against quadrature on 20 random feasible specs.
fn quadrature_oracle() -> (Vec<String>, String) {
    let pmf = gmac_example_pair();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for i in 0..20 {
        let spec = common::random_feasible_spec(&mut rng, &pmf);
        let rho = [0.3, 0.6][i % 2];
        let closed = l2_objective(&spec, &pmf, rho).unwrap().objective;
        let quad = common::quadrature_objective(&spec, &pmf, rho);
        let err = (closed - quad).abs();
        worst = worst.max(err);
        if err > 1e-6 {
            failures.push(format!("quadrature_spec_{i}"));
        }
    }
    (failures, format!("quadrature worst {worst:.1e}"))
}

fn property_line() -> Line {
    let mut failures = Vec::new();
    for (name, suite) in common::suites() {
        if let Err(e) = suite() {
            eprintln!("property `{name}` failed: {e}");
            failures.push(name.replace(' ', "_"));
        }
    }
    Line {
        criterion: 9,
        failures,
        flags: vec![],
        notes: vec![format!(
            "{} suites x {} cases",
            common::suites().len(),
            common::CASES
        )],
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let report = reproduce(&ReportOptions::default()).expect("reproduction runs");
    let report_secs = start.elapsed().as_secs_f64();

    let mut lines: Vec<Line> = (1..=8).map(|k| from_report(&report, k)).collect();
    let (quad_failures, quad_note) = quadrature_oracle();
    lines[5].failures.extend(quad_failures);
    lines[5].notes.push(quad_note);
    let t = Instant::now();
    let mut props = property_line();
    props
        .notes
        .push(format!("{:.1}s", t.elapsed().as_secs_f64()));
    lines.push(props);

    let mut unexpected = Vec::new();
    for line in &lines {
        let verdict = if line.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        let mut detail = line.notes.join(", ");
        if !line.flags.is_empty() {
            detail.push_str(&format!("; flagged: {}", line.flags.join(" ")));
        }
        if !line.failures.is_empty() {
            detail.push_str(&format!("; failing: {}", line.failures.join(" ")));
        }
        println!(
            "{verdict} criterion {} {} ({detail})",
            line.criterion,
            TITLES[line.criterion as usize - 1]
        );
        unexpected.extend(
            line.failures
                .iter()
                .filter(|id| !KNOWN_FAILURES.contains(&id.as_str()))
                .cloned(),
        );
    }
    println!(
        "reproduction {report_secs:.1}s, total {:.1}s",
        start.elapsed().as_secs_f64()
    );

    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(" "));
        ExitCode::FAILURE
    }
}
