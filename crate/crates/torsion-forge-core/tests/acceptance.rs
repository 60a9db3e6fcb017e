//! End-to-end acceptance checks. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line.

use std::f64::consts::PI;
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use torsion_forge::assembly::{
    self, change_of_curves, core_holonomy, fixtures, mv_matrices, peripheral_holonomies, surgery_apply,
    AssemblyMethod, CharacterPoint, GluingGraph, ManifoldKind,
};
use torsion_forge::blocks::{
    dblock_closed, dblock_complex, dblock_direct, dblock_lemma_checks, pants_closed, pants_complex, pants_direct,
    pants_lemma_checks, verify_gram_identity,
};
use torsion_forge::gram::{gram, regular_angles, sqrt_det, TetShape};
use torsion_forge::linalg::{ComplexMatrix, C64, I, ONE};
use torsion_forge::rep::{block_holonomy, expected_trace, PantsGeometry};
use torsion_forge::sample;
use torsion_forge::torsion::{
    chain_torsion, chain_torsion_with, check_multiplicativity, exact_sequence_torsion, random_short_exact_sequence,
    BasedChainComplex, PivotRule, TorsionOptions, TorsionValue,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gram_identity() -> Outcome {
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let g = sample::fsl_block(&mut r);
        worst = worst.max(verify_gram_identity(&g).unwrap().residual);
        let g = sample::dual_block(&mut r);
        worst = worst.max(verify_gram_identity(&g).unwrap().residual);
    }
    let det = gram(&regular_angles(PI / 4.0)).det();
    let anchor = (det - C64::new(-5.5784271, 0.0)).norm();
    outcome(
        worst <= 1e-9 && anchor < 1e-7,
        format!("max |S^2 - det G| / max(1, |det G|) = {worst:.2e} over 2000 shapes; regular det = {:.7}", det.re),
    )
}

fn pants_torsion() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        for g in [sample::cone_pants(&mut r), sample::boundary_pants(&mut r)] {
            worst = worst.max(pants_closed(&g).unwrap().distance(&pants_direct(&g).unwrap()));
        }
    }
    let cone = PantsGeometry::cone([PI / 4.0; 3]);
    let bdry = PantsGeometry::boundary([1.0; 3]);
    let cone_ref = TorsionValue(I * (2f64.sqrt() / 8.0));
    let bdry_ref = TorsionValue(C64::new(1.0 / (16.0 * 1f64.sinh().powi(3)), 0.0));
    let anchors = [(cone, cone_ref), (bdry, bdry_ref)]
        .iter()
        .map(|(g, v)| v.distance(&pants_direct(g).unwrap()).max(v.distance(&pants_closed(g).unwrap())))
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-9 && anchors <= 1e-12,
        format!("max direct/closed gap {worst:.2e} over 400 pants; anchors 0.1767767i, 0.0385073 within {anchors:.1e}"),
    )
}

fn block_torsion() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        for g in [sample::fsl_block(&mut r), sample::dual_block(&mut r)] {
            worst = worst.max(dblock_closed(&g).unwrap().distance(&dblock_direct(&g).unwrap()));
        }
    }
    let g = torsion_forge::rep::BlockGeometry::fsl([PI / 4.0; 6]);
    let anchor = TorsionValue(I * 0.5904673533);
    let gap = anchor.distance(&dblock_direct(&g).unwrap()).max(anchor.distance(&dblock_closed(&g).unwrap()));
    outcome(
        worst <= 1e-9 && gap <= 1e-9,
        format!("max direct/closed gap {worst:.2e} over 400 blocks; regular anchor 0.5904674i within {gap:.1e}"),
    )
}

fn lemma_checks() -> Outcome {
    let mut r = rng(4);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..200 {
        for g in [sample::fsl_block(&mut r), sample::dual_block(&mut r)] {
            for c in dblock_lemma_checks(&g).unwrap() {
                worst = worst.max(c.residual());
                count += 1;
            }
        }
        for g in [sample::cone_pants(&mut r), sample::boundary_pants(&mut r)] {
            for c in pants_lemma_checks(&g).unwrap() {
                worst = worst.max(c.residual());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-9, format!("max determinant residual {worst:.2e} over {count} checks"))
}

fn fixture_set() -> Vec<(&'static str, GluingGraph)> {
    fixtures::all()
}

fn mv_sequence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut integral = true;
    let mut count = 0;
    for (_, g) in fixture_set() {
        for seed in 0..=50u64 {
            let h = if seed == 0 { g.clone() } else { g.relabeled(seed) };
            let seq = mv_matrices(&h).unwrap();
            integral &= seq
                .boundaries
                .iter()
                .all(|m| m.columns().iter().flatten().all(|z| z.im == 0.0 && z.re.fract() == 0.0));
            let t = exact_sequence_torsion(&seq).unwrap();
            worst = worst.max(t.distance(&TorsionValue(ONE)));
            count += 1;
        }
    }
    outcome(
        integral && worst <= 1e-12,
        format!("Tor(H) = +-1 within {worst:.1e} on {count} sequences (5 fixtures, 50 relabelings each); integer maps: {integral}"),
    )
}

fn closed_form_assembly() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (_, g) in fixture_set() {
        let mut points = vec![CharacterPoint::from_graph(&g).unwrap()];
        for _ in 0..10 {
            points.push(assembly::random_character(&g, &mut r).unwrap());
        }
        for rep in assembly::assemble_many(&g, &points, AssemblyMethod::Both) {
            worst = worst.max(rep.unwrap().residual.unwrap());
            count += 1;
        }
    }
    let g = fixtures::regular(&fixtures::fsl_d1());
    let rep = assembly::assemble_torsion(&g, &CharacterPoint::from_graph(&g).unwrap(), AssemblyMethod::Both).unwrap();
    let anchor = TorsionValue(I * 18.894955305);
    let gap = anchor.distance(&rep.mv.unwrap());
    outcome(
        worst <= 1e-8 && gap <= 1e-9,
        format!("max MV/closed gap {worst:.2e} over {count} characters; d=1 regular value {:.9}i", rep.mv.unwrap().canonical().im),
    )
}

fn closed_sqrt_product(g: &GluingGraph, chi: &CharacterPoint) -> C64 {
    let layout = g.validate().unwrap();
    let geom = assembly::geometry(g, &layout, chi).unwrap();
    geom.blocks
        .iter()
        .flatten()
        .map(|b| match g.kind {
            ManifoldKind::Fsl => sqrt_det(&gram(&TetShape::from_angles(b.shape.angles()))),
            ManifoldKind::Double => sqrt_det(&gram(&TetShape::from_lengths(b.shape.lengths()))),
        })
        .product()
}

/// `d theta / d l` by central differences, independent of the curve machinery.
fn angle_sum_jacobian(g: &GluingGraph, chi: &CharacterPoint) -> C64 {
    let n = chi.params.len();
    let theta = |x: &[f64]| -> Vec<f64> {
        let (um, _) = peripheral_holonomies(g, &CharacterPoint::new(g.kind, x.to_vec())).unwrap();
        um.iter().map(|z| z.im).collect()
    };
    let mut j = ComplexMatrix::zeros(n, n);
    for t in 0..n {
        let h = 1e-5;
        let mut xp = chi.params.clone();
        let mut xm = chi.params.clone();
        xp[t] += h;
        xm[t] -= h;
        let (a, b) = (theta(&xp), theta(&xm));
        for s in 0..n {
            j[(s, t)] = C64::new((a[s] - b[s]) / (2.0 * h), 0.0);
        }
    }
    j.det()
}

fn curve_surgery() -> Outcome {
    let mut r = rng(7);
    let mut algebraic: f64 = 0.0;
    let mut jacobian: f64 = 0.0;
    let mut count = 0;
    for (_, g) in fixture_set() {
        let n = g.tori.len();
        let d = g.validate().unwrap().d as i32;
        let mut points = vec![CharacterPoint::from_graph(&g).unwrap()];
        points.push(assembly::random_character(&g, &mut r).unwrap());
        for chi in &points {
            let root = closed_sqrt_product(&g, chi);
            let meridians = vec![(1i64, 0i64); n];
            let cc = change_of_curves(&g, chi, &meridians).unwrap();
            let core = core_holonomy(&g, chi, &meridians).unwrap();
            let filled = surgery_apply(cc.torsion, &core).unwrap();
            let (t2, t3) = match g.kind {
                ManifoldKind::Fsl => {
                    let t2 = 2f64.powi(3 * d) * cc.jacobian_det * root;
                    let sinh2: C64 = core.iter().map(|u| (u / 2.0).sinh().powi(2)).product();
                    (t2, 2f64.powi(3 * d - 2 * n as i32) * cc.jacobian_det * root / sinh2)
                }
                ManifoldKind::Double => {
                    let dtheta = cc.jacobian_det * (2.0 / I).powi(n as i32);
                    jacobian = jacobian.max((dtheta - angle_sum_jacobian(&g, chi)).norm() / dtheta.norm().max(1.0));
                    let i_n = I.powi(n as i32);
                    let t2 = i_n * 2f64.powi(3 * d - n as i32) * dtheta * root;
                    let sinh2: f64 = chi.params.iter().map(|l| l.sinh().powi(2)).product();
                    (t2, i_n * 2f64.powi(3 * d - 3 * n as i32) * dtheta * root / sinh2)
                }
            };
            algebraic = algebraic
                .max(TorsionValue(t2).distance(&cc.torsion))
                .max(TorsionValue(t3).distance(&filled));
            count += 1;
        }
    }
    outcome(
        algebraic <= 1e-12 && jacobian <= 1e-6,
        format!(
            "surgery bookkeeping residual {algebraic:.1e} on {count} characters; angle-sum Jacobian agrees to {jacobian:.1e}"
        ),
    )
}

fn random_unimodular(r: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            ONE
        } else if i < j {
            C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
        } else {
            C64::new(0.0, 0.0)
        }
    });
    if n > 1 {
        let lower = ComplexMatrix::from_fn(n, n, |i, j| if i == j { ONE } else if i > j { C64::new(r.gen_range(-1.0..1.0), 0.0) } else { C64::new(0.0, 0.0) });
        m = &lower * &m;
    }
    m
}

/// Cell permutations, unimodular changes of the homology lifts and added
/// boundaries, each re-run with shuffled pivots.
fn perturbed(cx: &BasedChainComplex, r: &mut ChaCha8Rng) -> BasedChainComplex {
    let mut out = cx.clone();
    for k in 0..out.dims.len() {
        let hs = &out.homology[k];
        if hs.is_empty() {
            continue;
        }
        let u = random_unimodular(r, hs.len());
        let mut lifted: Vec<Vec<C64>> = (0..hs.len())
            .map(|i| {
                let mut v = vec![C64::new(0.0, 0.0); out.dims[k]];
                for (j, h) in hs.iter().enumerate() {
                    for (a, b) in v.iter_mut().zip(h) {
                        *a += u[(i, j)] * b;
                    }
                }
                v
            })
            .collect();
        if let Some(d) = out.boundaries.get(k) {
            for v in lifted.iter_mut() {
                let c: Vec<C64> = (0..d.cols()).map(|_| C64::new(r.gen_range(-1.0..1.0), 0.0)).collect();
                for (a, b) in v.iter_mut().zip(d.matvec(&c)) {
                    *a += b;
                }
            }
        }
        out.homology[k] = lifted;
    }
    let perms: Vec<Vec<usize>> = out
        .dims
        .iter()
        .map(|&n| {
            let mut p: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(p.as_mut_slice(), r);
            p
        })
        .collect();
    out.permuted(&perms)
}

fn fixture_complexes() -> Vec<BasedChainComplex> {
    let mut out = Vec::new();
    for (_, g) in fixture_set() {
        let layout = g.validate().unwrap();
        let chi = CharacterPoint::from_graph(&g).unwrap();
        let geom = assembly::geometry(&g, &layout, &chi).unwrap();
        for b in geom.blocks.iter().flatten() {
            out.push(dblock_complex(b, [ONE; 6]).unwrap());
        }
        for p in geom.thickened.iter().flatten().chain(geom.interfaces.iter()) {
            out.push(pants_complex(p, [ONE; 3]).unwrap());
        }
        out.push(mv_matrices(&g).unwrap());
    }
    out
}

fn well_defined() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    let complexes = fixture_complexes();
    for cx in &complexes {
        let base = chain_torsion(cx).unwrap();
        for trial in 0..10u64 {
            let other = perturbed(cx, &mut r);
            let opts = TorsionOptions {
                pivots: PivotRule::Shuffled(trial),
                ..TorsionOptions::default()
            };
            worst = worst.max(base.distance(&chain_torsion_with(&other, &opts).unwrap()));
        }
    }
    outcome(
        worst <= 1e-11,
        format!("max spread {worst:.1e} over {} complexes x 10 randomized re-runs", complexes.len()),
    )
}

fn multiplicativity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut lifts: f64 = 0.0;
    for seed in 0..100 {
        let ses = random_short_exact_sequence(seed).unwrap();
        let rep = check_multiplicativity(&ses, 1e-9).unwrap();
        worst = worst.max(rep.residual);
        for z in rep.lift_determinants {
            lifts = lifts.max(TorsionValue(z).distance(&TorsionValue(ONE)));
        }
    }
    outcome(
        worst <= 1e-9 && lifts <= 1e-9,
        format!("max residual {worst:.1e} over 100 sequences; lifted-basis determinants +-1 within {lifts:.1e}"),
    )
}

fn trace_closure() -> Outcome {
    let mut r = rng(10);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let g = if i % 2 == 0 { sample::fsl_block(&mut r) } else { sample::dual_block(&mut r) };
        let h = block_holonomy(&g).unwrap();
        let tr = h.get(3, 4).trace();
        let e = expected_trace(g.kind, &h.data, 3, 4);
        worst = worst.max((tr - e).norm().min((tr + e).norm()));
    }
    outcome(worst <= 1e-9, format!("max |tr rho(gamma_34) -+ expected| = {worst:.1e} over 500 blocks"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("Gram identity", gram_identity),
        ("pants torsion", pants_torsion),
        ("D-block torsion", block_torsion),
        ("determinant formulas", lemma_checks),
        ("Mayer-Vietoris sequence", mv_sequence),
        ("closed form assembly", closed_form_assembly),
        ("change of curves and surgery", curve_surgery),
        ("torsion well-definedness", well_defined),
        ("multiplicativity", multiplicativity),
        ("trace closure", trace_closure),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = std::panic::catch_unwind(f).unwrap_or_else(|_| outcome(false, "panicked".into()));
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {} ({name}): {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
