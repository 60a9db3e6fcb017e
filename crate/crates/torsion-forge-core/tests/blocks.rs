use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torsion_forge::blocks::{
    dblock_direct_scaled, dblock_torsion, pants_direct_scaled, pants_torsion, s_invariant, short_edge_expansion,
    verify_gram_identity, Method,
};
use torsion_forge::rep::{BlockGeometry, PantsGeometry};
use torsion_forge::{sample, Error, TorsionValue, C64};

const PERMS: [[usize; 4]; 4] = [[1, 2, 3, 4], [2, 3, 4, 1], [4, 1, 3, 2], [3, 4, 2, 1]];

#[test]
fn reports_carry_both_values() {
    let r = dblock_torsion(&BlockGeometry::fsl([PI / 4.0; 6]), Method::Both).unwrap();
    assert!(r.residual.unwrap() < 1e-10);
    assert!(r.s_invariant.is_some());
    let r = pants_torsion(&PantsGeometry::boundary([1.0; 3]), Method::Closed).unwrap();
    assert!(r.direct.is_none() && r.residual.is_none());
}

#[test]
fn invalid_geometries_rejected() {
    assert!(matches!(
        pants_torsion(&PantsGeometry::cone([1.0, 1.0, 1.2]), Method::Both),
        Err(Error::InvalidShape(_))
    ));
    assert!(dblock_torsion(&BlockGeometry::fsl([PI / 3.0; 6]), Method::Both).is_err());
    assert!(s_invariant(&BlockGeometry::fsl([0.5; 6]), [1, 1, 2, 3]).is_err());
}

#[test]
fn regular_gram_identity() {
    let r = verify_gram_identity(&BlockGeometry::fsl([PI / 4.0; 6])).unwrap();
    assert!(r.residual < 1e-12);
    assert!((r.det.re + 5.5784271).abs() < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn s_invariant_ignores_labelling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g in [sample::fsl_block(&mut rng), sample::dual_block(&mut rng)] {
            let s0 = TorsionValue(s_invariant(&g, PERMS[0]).unwrap());
            for p in PERMS {
                prop_assert!(s0.distance(&TorsionValue(s_invariant(&g, p).unwrap())) < 1e-9);
                let (lhs, rhs) = short_edge_expansion(&g, p).unwrap();
                prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn direct_torsion_scales_with_invariant_vectors(seed in any::<u64>(), k in 0usize..6, re in 0.5f64..2.0, im in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = C64::new(re, im);
        let g = sample::dual_block(&mut rng);
        let mut sc = [C64::new(1.0, 0.0); 6];
        let base = dblock_direct_scaled(&g, sc).unwrap();
        sc[k] = z;
        let scaled = dblock_direct_scaled(&g, sc).unwrap();
        prop_assert!(TorsionValue(base.0 * z).distance(&scaled) < 1e-9);
        let p = sample::cone_pants(&mut rng);
        let mut ps = [C64::new(1.0, 0.0); 3];
        let pb = pants_direct_scaled(&p, ps).unwrap();
        ps[k % 3] = z;
        prop_assert!(TorsionValue(pb.0 * z).distance(&pants_direct_scaled(&p, ps).unwrap()) < 1e-9);
    }
}
