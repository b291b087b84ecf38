use proptest::prelude::*;

use pf_cocycle::grassmann::{gap, hausdorff, log_det_on, oblique_proj, Subspace};
use pf_cocycle::linalg::{max_abs, random_matrix, CMat};
use pf_cocycle::transfer::{Cocycle, CocyclePath, Driver};

fn space(dim: usize, d: usize, seed: u64) -> Subspace {
    Subspace::new(&random_matrix(dim, d, seed)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volume_is_multiplicative(dim in 2usize..8, seed in any::<u64>(), frac in 0.0f64..1.0) {
        let d = 1 + ((dim - 1) as f64 * frac) as usize;
        let d = d.min(dim);
        let a = random_matrix(dim, dim, seed);
        let b = random_matrix(dim, dim, seed.wrapping_add(1));
        let e = space(dim, d, seed.wrapping_add(2));
        let be = e.image(&b).unwrap();
        let lhs = log_det_on(&(&a * &b), &e);
        let rhs = log_det_on(&a, &be) + log_det_on(&b, &e);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn products_compose(p in 1usize..12, q in 1usize..12, t in -20i64..20, seed in any::<u64>()) {
        let mats = vec![random_matrix(5, 5, seed).scale(0.5), random_matrix(5, 5, seed ^ 1).scale(0.5)];
        let path = CocyclePath::sample(&Driver::iid(vec![0.3, 0.7], vec![0, 1], seed), 40, 40).unwrap();
        let c = Cocycle::new(path, mats).unwrap();
        let whole = c.product(t, p + q).unwrap();
        let split = c.product(t + p as i64, q).unwrap() * c.product(t, p).unwrap();
        prop_assert!(max_abs(&(&whole - &split)) <= 1e-12 * (1.0 + max_abs(&whole)));
        let stable = c.product_stabilized(t, p + q).unwrap().to_dense();
        prop_assert!(max_abs(&(&whole - stable)) <= 1e-10 * (1.0 + max_abs(&whole)));
    }

    #[test]
    fn hausdorff_is_a_bounded_symmetric_metric(dim in 2usize..8, seed in any::<u64>()) {
        let d = 1 + (seed as usize) % (dim - 1);
        let (a, b, c) = (space(dim, d, seed), space(dim, d, seed ^ 7), space(dim, d, seed ^ 9));
        let ab = hausdorff(&a, &b);
        prop_assert!((ab - hausdorff(&b, &a)).abs() < 1e-14);
        prop_assert!(ab <= std::f64::consts::SQRT_2 + 1e-15);
        prop_assert!(hausdorff(&a, &a) < 1e-7);
        prop_assert!(hausdorff(&a, &c) <= ab + hausdorff(&b, &c) + 1e-12);
        prop_assert!(gap(&a, &b) <= ab + 1e-15);
    }

    #[test]
    fn oblique_projections_are_idempotent(dim in 2usize..9, seed in any::<u64>()) {
        let d = 1 + (seed as usize) % (dim - 1);
        let e = space(dim, d, seed);
        let f = space(dim, dim - d, seed ^ 3);
        let p = oblique_proj(&e, &f).unwrap();
        let m = &p.matrix;
        let scale = 1.0 + max_abs(m) * max_abs(m);
        prop_assert!(max_abs(&(m * m - m)) <= 1e-10 * scale);
        prop_assert!(max_abs(&(m * f.basis())) <= 1e-10 * scale);
        let q = p.complementary().matrix;
        prop_assert!(max_abs(&(m + q - CMat::identity(dim, dim))) <= 1e-12 * scale);
    }
}
