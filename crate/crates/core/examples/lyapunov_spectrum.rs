//! Lyapunov spectrum of a random two-map cocycle by discrete QR, and the top
//! exponent again from volume growth of the top Oseledets space.

use pf_cocycle::grassmann::Subspace;
use pf_cocycle::harness::{build_path, fiber_matrices, ExperimentConfig};
use pf_cocycle::oseledets::{equivariant_family, exponent_via_det, fast_space_pullforward, qr_spectrum, QrOptions};
use pf_cocycle::transfer::Cocycle;

fn main() -> pf_cocycle::Result<()> {
    let cfg = ExperimentConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/two_fiber.json").as_ref())?;
    let cocycle = Cocycle::new(build_path(&cfg)?, fiber_matrices(&cfg.maps, cfg.order, None, true)?)?;
    let spectrum = qr_spectrum(&cocycle, &QrOptions::new(2000, 6).with_warmup(200).with_seed(11))?;
    println!("tau = {:.4}", spectrum.tau);
    for ((g, m), e) in spectrum.exponents.iter().zip(&spectrum.multiplicities).zip(&spectrum.stderr) {
        println!("  exponent {g:+.6} ± {e:.1e}  (multiplicity {m})");
    }
    if let Some(tail) = spectrum.tail {
        println!("  remaining exponents <= {tail:.4}");
    }

    let top: Subspace = fast_space_pullforward(&cocycle, 0, 1, 200, None, 3)?.space;
    let family = equivariant_family(&cocycle, &top, 0, 25, 40)?;
    let est = exponent_via_det(&cocycle, &family, 50)?;
    println!("volume growth: {:+.3e} ± {:.1e}, bracket [{:+.3e}, {:+.3e}]", est.exponent, est.stderr, est.conorm, est.norm);
    Ok(())
}
