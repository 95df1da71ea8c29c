//! Quick run of the verification suite on a field system.
//!
//! cargo run --release --example verify -- crates/core/examples/grushin.json

use hypoheat::io::{grushin, FieldSystem};
use hypoheat::suite::{Profile, Suite, SuiteConfig};

fn main() -> hypoheat::Result<()> {
    let system = match std::env::args().nth(1) {
        Some(path) => FieldSystem::load(path.as_ref())?,
        None => grushin(),
    };
    let suite = Suite::new(&system, SuiteConfig { profile: Profile::Quick, ..Default::default() })?;
    let report = suite.run_all();
    for c in &report.checks {
        println!("{:>2} {:<26} {:?}", c.id, c.name, c.status);
    }
    println!("all passed: {}", report.all_passed);
    Ok(())
}
