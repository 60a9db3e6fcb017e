use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torsion_forge::gram::PAIRS;
use torsion_forge::hyptrig::TwoMatrix;
use torsion_forge::rep::{
    block_holonomy, expected_trace, invariant_vector, pants_holonomy, sym2, BlockGeometry, PantsGeometry,
};
use torsion_forge::{sample, C64};

fn trace_gap(m: &TwoMatrix, e: f64) -> f64 {
    let t = m.trace();
    (t - e).norm().min((t + e).norm())
}

#[test]
fn regular_block_traces() {
    let h = block_holonomy(&BlockGeometry::fsl([PI / 4.0; 6])).unwrap();
    for &(j, k) in &PAIRS {
        assert!(trace_gap(&h.get(j, k), 2f64.sqrt()) < 1e-12);
        assert!((h.get(j, k).det() - 1.0).norm() < 1e-12);
    }
}

#[test]
fn all_block_traces_on_random_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        for g in [sample::fsl_block(&mut rng), sample::dual_block(&mut rng)] {
            let h = block_holonomy(&g).unwrap();
            for &(j, k) in &PAIRS {
                assert!(trace_gap(&h.get(j, k), expected_trace(g.kind, &h.data, j, k)) < 1e-9);
            }
        }
    }
}

#[test]
fn pants_relation_and_traces() {
    for g in [PantsGeometry::cone([0.4, 0.7, 0.9]), PantsGeometry::boundary([0.5, 1.0, 1.5])] {
        let h = pants_holonomy(&g).unwrap();
        for (m, p) in h.rho.iter().zip(g.params) {
            let e = match g.kind {
                torsion_forge::rep::PantsKind::Cone => 2.0 * p.cos(),
                torsion_forge::rep::PantsKind::Boundary => 2.0 * p.cosh(),
            };
            assert!(trace_gap(m, e) < 1e-10);
        }
    }
}

#[test]
fn invariant_vector_is_fixed_by_adjoint() {
    let m = block_holonomy(&BlockGeometry::dual([1.0, 1.2, 0.9, 1.1, 1.3, 0.8])).unwrap().get(2, 4);
    let v = invariant_vector(&m).unwrap();
    let a = sym2(&m).unwrap();
    let w = a.matvec(&v);
    for (x, y) in v.iter().zip(&w) {
        assert!((x - y).norm() < 1e-10);
    }
    assert!(v.iter().any(|z| z.norm() > 0.1));
    assert!(invariant_vector(&TwoMatrix::IDENTITY).is_err());
    let _ = C64::new(0.0, 0.0);
}
