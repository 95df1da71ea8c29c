//! Acceptance run on the Grushin system: one line per criterion with the
//! measured values, their limits and the runtime against its budget.

use std::process::ExitCode;
use std::time::Instant;

use hypoheat::fields::PolyVectorField;
use hypoheat::io::grushin;
use hypoheat::polyalg::parse_polynomial;
use hypoheat::suite::{CheckResult, Status, Suite, SuiteConfig, CHECKS};

/// `Z_1 = d/dx1` and `Z_2 = x1 d/dx2 + d/dxi` in the split coordinates.
fn grushin_lifted_fields_match(suite: &Suite) -> bool {
    let group = suite.group();
    let field = |comps: [&str; 3]| {
        let polys = comps.iter().map(|c| parse_polynomial(c, 3).unwrap()).collect();
        PolyVectorField::new(polys, group.weights().clone()).unwrap()
    };
    group.z_fields() == [field(["1", "0", "0"]), field(["0", "x1", "1"])]
}

fn line(result: &CheckResult, secs: f64, budget: f64, passed: bool) -> String {
    let metrics: Vec<String> = result
        .metrics
        .iter()
        .map(|m| format!("{}={:.3e} (limit {:.1e})", m.name, m.value, m.limit))
        .collect();
    let mut text = format!(
        "{} criterion {:>2} {:<26} {:>7.2}s / {:>4}s  {}",
        if passed { "PASS" } else { "FAIL" },
        result.id,
        result.name,
        secs,
        budget,
        metrics.join(", ")
    );
    if let Some(d) = &result.detail {
        text.push_str(&format!("  [{d}]"));
    }
    text
}

fn main() -> ExitCode {
    let started = Instant::now();
    let suite = Suite::new(&grushin(), SuiteConfig::default()).expect("Grushin system lifts");
    let lift_secs = started.elapsed().as_secs_f64();
    let mut failures = 0;
    for info in CHECKS.iter() {
        let clock = Instant::now();
        let result = suite.run(info.id);
        let mut secs = clock.elapsed().as_secs_f64();
        let mut passed = result.status == Status::Pass;
        if info.id == 2 {
            secs += lift_secs;
            let forms = grushin_lifted_fields_match(&suite);
            if !forms {
                println!("lifted Grushin fields differ from d/dx1 and x1 d/dx2 + d/dxi");
            }
            passed &= forms;
        }
        passed &= secs < info.budget_secs;
        if !passed {
            failures += 1;
        }
        println!("{}", line(&result, secs, info.budget_secs, passed));
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        CHECKS.len() - failures,
        CHECKS.len(),
        started.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
