use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torsion_forge::gram::{angles_from_lengths, gram, relabel_complement, lengths_from_angles, regular_angles, validate_hyperideal, TetShape};
use torsion_forge::{sample, Error};

#[test]
fn regular_lengths() {
    let l = lengths_from_angles(&regular_angles(PI / 4.0)).unwrap().lengths();
    for x in l {
        assert_abs_diff_eq!(x.cosh(), (2.0 + 2f64.sqrt()) / 2.0, epsilon = 1e-12);
    }
}

#[test]
fn wrong_kind_rejected() {
    let a = regular_angles(0.5);
    assert!(matches!(angles_from_lengths(&a), Err(Error::InvalidShape(_))));
    assert!(matches!(lengths_from_angles(&TetShape::from_lengths([1.0; 6])), Err(Error::InvalidShape(_))));
    assert!(lengths_from_angles(&regular_angles(PI / 3.0)).is_err());
}

#[test]
fn invalid_shapes_report_vertices() {
    let v = validate_hyperideal(&TetShape::from_angles([1.2, 1.2, 1.2, 0.2, 0.2, 0.2]));
    assert!(!v.valid);
    assert_eq!(v.failing_vertices, vec![1]);
    assert!(!v.diagnostics.is_empty());
}

#[test]
fn gram_is_symmetric_with_unit_diagonal() {
    let g = gram(&TetShape::from_lengths([0.3, 0.5, 0.7, 1.1, 1.3, 1.7]));
    let m = g.matrix();
    for i in 0..4 {
        assert_eq!(m[(i, i)].re, 1.0);
        for j in 0..4 {
            assert_eq!(m[(i, j)], m[(j, i)]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angle_length_round_trip(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = sample::angle_shape(&mut rng);
        let l = relabel_complement(&lengths_from_angles(&a).unwrap());
        let back = relabel_complement(&angles_from_lengths(&l).unwrap());
        for (x, y) in a.angles().iter().zip(back.angles()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
