//! Charts, forward and backward graph transforms, gaps and oblique
//! projections on a random 6-dimensional example.

use std::sync::Arc;

use pf_cocycle::grassmann::{backward_transform, chart, chart_inverse, forward_transform, gap, hausdorff, oblique_proj, Frame, GraphChart, Subspace};
use pf_cocycle::linalg::random_matrix;

fn main() -> pf_cocycle::Result<()> {
    let (dim, d) = (6, 2);
    let frame = Arc::new(Frame::orthogonal(Subspace::coordinate(dim, &[0, 1])?)?);
    let e_prime = Subspace::new(&(frame.e().basis() + random_matrix(dim, d, 1).scale(0.3)))?;
    let u = chart(&frame, &e_prime)?;
    println!("chart norm {:.4}, round trip gap {:.2e}", u.norm(), gap(&chart_inverse(&u), &e_prime));

    let s = random_matrix(dim, dim, 2);
    let image = e_prime.image(&s)?;
    let target = Arc::new(Frame::orthogonal(image.clone())?);
    let pushed = forward_transform(&s, &frame, &target, &u)?;
    println!("forward transform vs direct image: gap {:.2e}", gap(&chart_inverse(&pushed), &image));

    // backward: the preimage of a complement of the image, charted on swapped frames
    let f_next = Subspace::new(&random_matrix(dim, dim - d, 3))?;
    let on_target = chart(&Arc::new(target.swapped()), &f_next)?;
    let pulled = backward_transform(&s, &frame, &target, &on_target)?;
    let preimage = chart_inverse(&pulled);
    let check = preimage.image(&s)?;
    println!("backward transform: gap(S F', F) = {:.2e}", gap(&check, &f_next));

    let p = oblique_proj(&e_prime, &preimage)?;
    println!("oblique projection norm {:.4}, Hausdorff(E, E') = {:.4}", p.norm(), hausdorff(frame.e(), &e_prime));
    println!("zero chart norm {}", GraphChart::zero(frame).norm());
    Ok(())
}
