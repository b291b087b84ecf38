//! Fast/slow splittings from graph-transform fixed points, their
//! equivariance defects, an Oseledets projection and the hyperbolicity
//! certificate.

use pf_cocycle::harness::{run_reference, ExperimentConfig};
use pf_cocycle::spectral::triple_norm;

fn main() -> pf_cocycle::Result<()> {
    let mut cfg = ExperimentConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/two_fiber.json").as_ref())?;
    cfg.splitting.blocks = 2;
    let reference = run_reference(&cfg)?;
    let a = &reference.analysis;
    println!("split dimensions {:?}", a.dims);
    for states in &a.splittings {
        for s in states {
            println!(
                "  d = {} t = {:3}: |U| = {:.3e}, fast defect {:.1e}, slow defect {:.1e}, block {}, |Π| = {:.3}",
                s.dim(),
                s.t,
                s.chart_norm,
                s.fast_defect,
                s.slow_defect,
                s.block,
                s.proj.norm()
            );
        }
    }
    let saks = a.saks(&cfg);
    println!("triple norm of Π_2 at t = 0: {:.4}", triple_norm(&a.projections[1][0], &saks)?);
    let c = &a.certificate;
    println!("certificate: Θ = {:.2}, C = {:.2}, η = {:.4}, min gap {:.4}, pass {}", c.theta, c.c, c.eta, c.min_gap, c.pass);
    Ok(())
}
