use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use torsion_forge::hyptrig::{arccosh, dz, hexagon_side, ss, triangle_side, TwoMatrix};
use torsion_forge::{Error, C64};

#[test]
fn ss_at_one() {
    let m = ss(C64::new(1.0, 0.0));
    let [a, b, c, d] = m.entries();
    assert_abs_diff_eq!(a.re, 1.1276260, epsilon = 1e-7);
    assert_abs_diff_eq!(b.re, 0.5210953, epsilon = 1e-7);
    assert_eq!(b, c);
    assert_eq!(a, d);
}

#[test]
fn regular_triangle_and_hexagon() {
    let a = std::f64::consts::FRAC_PI_4;
    let c = a.cos();
    let s = triangle_side(a, a, a).unwrap();
    assert_abs_diff_eq!(s.cosh(), (c + c * c) / (1.0 - c * c), epsilon = 1e-12);
    let h = hexagon_side(1.0, 1.0, 1.0).unwrap();
    let ch = 1f64.cosh();
    assert_abs_diff_eq!(h.cosh(), ch / (ch - 1.0), epsilon = 1e-12);
}

#[test]
fn arccosh_rejects_below_one() {
    assert_eq!(arccosh(1.0).unwrap(), 0.0);
    assert!(matches!(arccosh(0.5), Err(Error::Domain(_))));
}

proptest! {
    #[test]
    fn builders_are_unimodular(re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let z = C64::new(re, im);
        prop_assert!((dz(z).det() - 1.0).norm() < 1e-9 * z.norm().exp());
        prop_assert!((ss(z).det() - 1.0).norm() < 1e-9 * z.norm().exp());
    }

    #[test]
    fn dz_is_a_homomorphism(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let lhs = dz(C64::new(a, 0.3)) * dz(C64::new(b, -0.1));
        let rhs = dz(C64::new(a + b, 0.2));
        prop_assert!(lhs.dist(&rhs) < 1e-12 * (a.abs() + b.abs()).exp());
        prop_assert!((dz(C64::new(a, 0.0)) * dz(C64::new(-a, 0.0))).dist(&TwoMatrix::IDENTITY) < 1e-12);
    }
}
