#[path = "support/oracle.rs"]
mod oracle;

use std::time::Instant;

#[test]
fn estimates_match_extended_precision() {
    let start = Instant::now();
    let checks = oracle::run(0x5eed_0001, 1000);
    for c in &checks {
        eprintln!("{:<28} n={:<5} max rel err {:.2e} {:?}", c.name, c.samples, c.max_rel, c.elapsed);
    }
    for c in &checks {
        assert!(c.samples > 0, "{} never ran", c.name);
        assert!(c.max_rel <= 1e-12, "{}: max rel err {:e}", c.name, c.max_rel);
    }
    eprintln!("elapsed {:?}", start.elapsed());
}

#[test]
fn spot_values() {
    let s2 = hireg_core::estimates::poincare_sobolev_constant(2).unwrap();
    let s3 = hireg_core::estimates::poincare_sobolev_constant(3).unwrap();
    let want2 = oracle::poincare(2).to_f64();
    let want3 = oracle::poincare(3).to_f64();
    assert!(((s2 - want2) / want2).abs() <= 1e-12);
    assert!(((s3 - want3) / want3).abs() <= 1e-12);
    // 1/(2√π) in closed form.
    assert!((want2 - 0.5 / std::f64::consts::PI.sqrt()).abs() < 1e-16);
    assert!((want3 - 0.2054).abs() < 5e-4);
}
