//! Fejér-order self-convergence: runs at increasing truncation orders are
//! compared with the highest order after zero padding.

use pf_cocycle::harness::{sweep_fejer, ExperimentConfig};

fn main() -> pf_cocycle::Result<()> {
    let cfg = ExperimentConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/two_fiber.json").as_ref())?;
    let sweep = sweep_fejer(&cfg, &[8, 12, 16, 24], 32)?;
    println!("reference order {} ({})", sweep.reference.order, sweep.summary.comparison);
    for r in &sweep.records {
        println!(
            "n = {:2}: |Δγ| = {:.2e} (noise {:.1e}), |ΔΠ| = {:.2e}, fast gap {:.2e}",
            r.axis, r.gamma_diff[1], r.gamma_noise[1], r.proj_tnorm_diff[0], r.fast_gap
        );
    }
    for d in &sweep.summary.defects {
        println!("defect n = {:2}: {:.5} {}", d.n, d.defect, d.doubling_ratio.map_or(String::new(), |q| format!("(x{q:.3} at 2n)")));
    }
    Ok(())
}
