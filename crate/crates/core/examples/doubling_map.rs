//! Fourier matrix of the doubling map and of a perturbed degree-3 map:
//! the `δ_{ℓ,2j}` pattern, the Markov row and the Fejér defect.

use pf_cocycle::maps::{CircleMap, LyClassParams};
use pf_cocycle::transfer::{assemble, fejer_defect};

fn main() -> pf_cocycle::Result<()> {
    let n = 4;
    let doubling = assemble(&CircleMap::linear(2)?, n, Some(2048))?;
    println!("doubling map, n = {n}: nonzero entries");
    for j in -(n as i64)..=n as i64 {
        for l in -(n as i64)..=n as i64 {
            let z = doubling.entry(j, l);
            if z.norm() > 1e-12 {
                println!("  M[{j:+}, {l:+}] = {:.3}", z.re);
            }
        }
    }

    let params = LyClassParams::new(2, 0.5, 10.0)?;
    let map: CircleMap = serde_json::from_str(r#"{"degree": 3, "harmonics": [[1, 0.05, 0.3]]}"#)?;
    let v = map.validate(&params, map.default_grid())?;
    println!("\ndegree-3 map: inf |T'| = {:.4}, C^k bound = {:.4}, in class: {}", v.inf_deriv, v.ck_bound, v.ok);
    let m = assemble(&map, 16, None)?;
    let row0 = (-16..=16).map(|l| (m.entry(0, l) - if l == 0 { 1.0 } else { 0.0 }).norm()).fold(0.0, f64::max);
    println!("Markov row deviation: {row0:.2e}");

    println!("\nFejér defect (k = 2):");
    for n in [8, 16, 32, 64] {
        println!("  n = {n:2}: {:.5}", fejer_defect(n, 2));
    }
    Ok(())
}
