//! Lift a vector-field system to a Carnot group and print the group law, the
//! lifted fields and the exact identities that were checked.
//!
//! cargo run --example lift -- crates/core/examples/engel.json

use hypoheat::carnot::lift_system;
use hypoheat::io::{grushin, FieldSystem};

fn main() -> hypoheat::Result<()> {
    let system = match std::env::args().nth(1) {
        Some(path) => FieldSystem::load(path.as_ref())?,
        None => grushin(),
    };
    let (group, report) = lift_system(&system)?;
    println!("N = {}, p = {}, step {}, Q = {}", report.big_n, report.p, report.step, report.big_q);
    println!("basis words: {}", report.basis_words.join(", "));
    for (k, p) in group.law().iter().enumerate() {
        println!("(g * h)_{} = {}", k + 1, p);
    }
    for (j, z) in group.z_fields().iter().enumerate() {
        println!("Z_{} = {:?}", j + 1, z.to_strings());
    }
    for (name, ok) in &report.checks {
        println!("  {name:<28} {}", if *ok { "ok" } else { "FAILED" });
    }
    println!("heat kernel: {}", report.kernel_family);
    Ok(())
}
