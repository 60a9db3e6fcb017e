use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use torsion_forge::assembly::{
    assemble_many, assemble_many_seq, assemble_torsion, change_of_curves, core_curves, fixtures, from_face_pairings,
    jacobian_step_gap, mv_matrices, peripheral_holonomies, random_character, solve_filling, surgery_apply,
    AssemblyMethod, CharacterPoint, FacePairing, ManifoldKind, PieceKind,
};
use torsion_forge::gram::{lengths_from_angles, regular_angles};
use torsion_forge::{Error, TorsionValue, C64};

fn is_gluing(r: Result<impl std::fmt::Debug, Error>) -> bool {
    matches!(r, Err(Error::Gluing(_)))
}

#[test]
fn fixture_counts() {
    let expected = [(1, 2, 4, 3), (2, 0, 4, 3), (1, 2, 4, 3), (2, 0, 4, 3), (2, 0, 4, 1)];
    for ((name, g), e) in fixtures::all().into_iter().zip(expected) {
        let l = g.validate().unwrap();
        assert_eq!((l.d, l.c, l.p, l.n), e, "{name}");
        assert_eq!(l.p, l.c + 2 * l.d);
    }
}

#[test]
fn broken_graphs_are_rejected() {
    let g = fixtures::fsl_d2();
    let mut h = g.clone();
    h.interfaces.pop();
    assert!(is_gluing(h.validate()));

    let mut h = g.clone();
    h.interfaces[0].right.0 = h.interfaces[0].left.0;
    assert!(is_gluing(h.validate()));

    let mut h = g.clone();
    h.tori[0].traversal.pop();
    assert!(is_gluing(h.validate()));

    let mut h = g.clone();
    h.blocks.iter_mut().for_each(|b| b.kind = PieceKind::ThickenedPants);
    assert!(is_gluing(h.validate()));

    let mut h = g.clone();
    h.blocks[0].kind = PieceKind::DualDBlock;
    assert!(is_gluing(h.validate()));

    let twice = FacePairing { a: (0, 1), b: (0, 2), slot_map: [(12, 12), (13, 23), (14, 24)] };
    assert!(is_gluing(from_face_pairings(ManifoldKind::Fsl, 1, &[twice.clone(), twice])));
    let bad_map = FacePairing { a: (0, 1), b: (0, 2), slot_map: [(12, 12), (12, 23), (14, 24)] };
    assert!(is_gluing(from_face_pairings(ManifoldKind::Fsl, 1, &[bad_map])));
}

#[test]
fn mixed_character_rejected() {
    let mut g = fixtures::fsl_d2();
    g.blocks[0].u = Some([C64::new(0.1, 0.7); 6]);
    assert!(matches!(CharacterPoint::from_graph(&g), Err(Error::InvalidShape(_))));
    let g = fixtures::fsl_d2();
    assert!(CharacterPoint::from_graph(&g).is_err());
}

#[test]
fn relabelings_preserve_everything() {
    for (name, g) in fixtures::all() {
        let chi = CharacterPoint::from_graph(&g).unwrap();
        let base = assemble_torsion(&g, &chi, AssemblyMethod::Both).unwrap();
        assert!(base.residual.unwrap() < 1e-10, "{name}");
        for seed in 1..6 {
            let h = g.relabeled(seed);
            let r = assemble_torsion(&h, &CharacterPoint::from_graph(&h).unwrap(), AssemblyMethod::Mv).unwrap();
            assert!(r.mv.unwrap().distance(&base.mv.unwrap()) < 1e-10, "{name} seed {seed}");
            let t = torsion_forge::torsion::exact_sequence_torsion(&mv_matrices(&h).unwrap()).unwrap();
            assert!((t.0.norm() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn parallel_matches_sequential() {
    let g = fixtures::double_d2();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pts: Vec<_> = (0..16).map(|_| random_character(&g, &mut rng).unwrap()).collect();
    let a = assemble_many(&g, &pts, AssemblyMethod::Both);
    let b = assemble_many_seq(&g, &pts, AssemblyMethod::Both);
    assert_eq!(a, b);
}

#[test]
fn regular_longitudes() {
    let g = fixtures::regular(&fixtures::fsl_d1());
    let chi = CharacterPoint::from_graph(&g).unwrap();
    let (um, ul) = peripheral_holonomies(&g, &chi).unwrap();
    let l = lengths_from_angles(&regular_angles(PI / 4.0)).unwrap().lengths()[0];
    for z in &um {
        assert!((z - C64::new(0.0, PI / 2.0)).norm() < 1e-15);
    }
    let total: f64 = ul.iter().map(|z| z.re).sum();
    assert!((total - 6.0 * l).abs() < 1e-12);
}

#[test]
fn curve_errors() {
    let g = fixtures::regular(&fixtures::fsl_d1());
    let chi = CharacterPoint::from_graph(&g).unwrap();
    assert!(matches!(change_of_curves(&g, &chi, &[(1, 0)]), Err(Error::Index(_))));
    assert!(matches!(change_of_curves(&g, &chi, &[(1, 0), (0, 0), (1, 0)]), Err(Error::Domain(_))));
    assert!(matches!(core_curves(&[(2, 4)]), Err(Error::Domain(_))));
    let t = TorsionValue(C64::new(1.0, 0.0));
    assert!(matches!(surgery_apply(t, &[C64::new(0.0, 2.0 * PI)]), Err(Error::Singular(_))));
}

#[test]
fn meridian_change_is_trivial_for_fsl() {
    let g = fixtures::regular(&fixtures::fsl_d2());
    let chi = CharacterPoint::from_graph(&g).unwrap();
    let cc = change_of_curves(&g, &chi, &[(1, 0); 3]).unwrap();
    assert!((cc.jacobian_det - 1.0).norm() < 1e-15);
    assert!(cc.torsion.distance(&cc.base) < 1e-15);
    assert!(jacobian_step_gap(&g, &chi).unwrap() < 1e-6);
}

#[test]
fn fillings() {
    let g = fixtures::fsl_d1();
    let start = CharacterPoint::new(ManifoldKind::Fsl, vec![0.8, 0.75, 0.7]);
    let s = solve_filling(&g, &[(4, 0); 3], &start).unwrap();
    assert!(s.residual < 1e-10);
    for a in &s.point.params {
        assert!((a - PI / 4.0).abs() < 1e-10);
    }

    let g = fixtures::double_d2_single();
    let s = solve_filling(&g, &[(1, 0)], &CharacterPoint::new(ManifoldKind::Double, vec![1.0])).unwrap();
    let l = lengths_from_angles(&regular_angles(PI / 6.0)).unwrap().lengths()[0];
    assert!((s.point.params[0] - l).abs() < 1e-9);
    assert!((l - 0.5961338949).abs() < 1e-9);
}

proptest! {
    #[test]
    fn core_curves_are_dual(p in -20i64..20, q in -20i64..20) {
        prop_assume!(num_gcd(p, q) == 1);
        let (r, s) = core_curves(&[(p, q)]).unwrap()[0];
        prop_assert_eq!(p * s - q * r, 1);
    }
}

fn num_gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { num_gcd(b, a % b) }
}
