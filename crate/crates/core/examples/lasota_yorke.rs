//! Fit `‖M^p f‖ ≤ C1 r^p ‖f‖ + C2 R^p |f|` at `r = α^{k-1}` for each fiber
//! and for products along the sampled path.

use pf_cocycle::harness::{check_ly, ExperimentConfig};

fn main() -> pf_cocycle::Result<()> {
    let cfg = ExperimentConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/two_fiber.json").as_ref())?;
    let report = check_ly(&cfg)?;
    println!("r = {}, powers 1..={}, {} random probes", report.r, report.max_power, report.samples);
    for line in &report.lines {
        println!("{:8} pass {} C1 = {} C2 = {:.4} R = {}", line.label, line.pass, line.c1, line.c2, line.big_r);
        for p in line.per_power.iter().flatten() {
            println!("    p = {}: C1 = {}, C2 = {:.4}", p.power, p.c1, p.c2);
        }
    }
    Ok(())
}
