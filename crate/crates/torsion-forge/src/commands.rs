//! The four subcommands. Each returns a JSON result and the list of checks
//! that exceeded the tolerance.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use torsion_forge::assembly::{
    self, assemble_torsion, change_of_curves, core_curves, core_holonomy, fixtures, peripheral_holonomies,
    solve_filling, surgery_apply, AssemblyMethod, CharacterPoint, GluingGraph, ManifoldKind,
};
use torsion_forge::blocks::{self, dblock_lemma_checks, dblock_torsion, pants_lemma_checks, pants_torsion, LemmaCheck, Method};
use torsion_forge::gram::{self, TetShape};
use torsion_forge::rep::{block_holonomy, expected_trace, BlockGeometry, PantsGeometry};
use torsion_forge::torsion::{check_multiplicativity, exact_sequence_torsion, random_short_exact_sequence, TorsionValue};
use torsion_forge::{par, sample, C64};

use crate::canonical::{complex, complex_list, matrix, opt_float, opt_torsion, torsion};
use crate::input::{self, Shape};
use crate::CliError;

pub struct Outcome {
    pub result: Value,
    pub failures: Vec<String>,
}

fn check(failures: &mut Vec<String>, name: &str, residual: Option<f64>, tol: f64) {
    if let Some(r) = residual {
        if r.is_nan() || r > tol {
            failures.push(format!("{name}: residual {r:e} exceeds tolerance {tol:e}"));
        }
    }
}

fn fixed<const N: usize>(v: &[f64], what: &str) -> Result<[f64; N], CliError> {
    v.try_into()
        .map_err(|_| CliError::Input(format!("{what} needs {N} values, got {}", v.len())))
}

pub fn gram(path: &Path) -> Result<Outcome, CliError> {
    let shape = match input::read_shape(path)? {
        Shape::Alpha(a) => TetShape::from_angles(fixed(&a, "alpha")?),
        Shape::Length(l) => TetShape::from_lengths(fixed(&l, "length")?),
        Shape::Complex(u) => TetShape::mixed(u.try_into().map_err(|u: Vec<C64>| {
            CliError::Input(format!("u needs 6 values, got {}", u.len()))
        })?),
    };
    let g = gram::gram(&shape);
    let mut cof = torsion_forge::ComplexMatrix::zeros(4, 4);
    for s in 1..=4 {
        for t in 1..=4 {
            cof[(s - 1, t - 1)] = g.cofactor(s, t)?;
        }
    }
    let mut result = json!({
        "u": complex_list(&shape.u),
        "gram": matrix(g.matrix()),
        "det": complex(g.det()),
        "sqrt_det": complex(gram::sqrt_det(&g)),
        "cofactors": matrix(&cof),
    });
    match shape.kind {
        gram::ShapeKind::Angles => {
            let v = gram::validate_hyperideal(&shape);
            result["validity"] = json!({
                "valid": v.valid,
                "failing_vertices": v.failing_vertices,
                "diagnostics": v.diagnostics,
            });
            if !v.valid {
                return Err(CliError::Input(format!("invalid angle shape: {}", v.diagnostics.join("; "))));
            }
            result["shape"] = json!("alpha");
            result["lengths"] = json!(gram::lengths_from_angles(&shape)?.lengths());
        }
        gram::ShapeKind::Lengths => {
            result["shape"] = json!("length");
            result["angles"] = json!(gram::angles_from_lengths(&shape)?.angles());
        }
        gram::ShapeKind::Mixed => result["shape"] = json!("u"),
    }
    Ok(Outcome {
        result,
        failures: Vec::new(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    Pants,
    Dblock,
}

fn lemma_json(checks: &[LemmaCheck]) -> Value {
    Value::Array(
        checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "computed": complex(c.computed),
                    "expected": complex(c.expected),
                    "residual": c.residual(),
                })
            })
            .collect(),
    )
}

pub fn block(path: &Path, kind: BlockKind, method: Method, tol: f64) -> Result<Outcome, CliError> {
    let shape = input::read_shape(path)?;
    let mut failures = Vec::new();
    let (report, lemmas, geometry) = match (kind, &shape) {
        (BlockKind::Pants, Shape::Alpha(a)) => {
            let g = PantsGeometry::cone(fixed(a, "alpha")?);
            (pants_torsion(&g, method)?, pants_lemma_checks(&g)?, "cone pants")
        }
        (BlockKind::Pants, Shape::Length(l)) => {
            let g = PantsGeometry::boundary(fixed(l, "length")?);
            (pants_torsion(&g, method)?, pants_lemma_checks(&g)?, "boundary pants")
        }
        (BlockKind::Dblock, Shape::Alpha(a)) => {
            let g = BlockGeometry::fsl(fixed(a, "alpha")?);
            (dblock_torsion(&g, method)?, dblock_lemma_checks(&g)?, "D-block")
        }
        (BlockKind::Dblock, Shape::Length(l)) => {
            let g = BlockGeometry::dual(fixed(l, "length")?);
            (dblock_torsion(&g, method)?, dblock_lemma_checks(&g)?, "dual D-block")
        }
        (_, Shape::Complex(_)) => {
            return Err(CliError::Input("block geometries take \"alpha\" or \"length\"".into()));
        }
    };
    check(&mut failures, "closed form vs direct", report.residual, tol);
    for c in &lemmas {
        check(&mut failures, c.name, Some(c.residual()), tol);
    }
    let params = match &shape {
        Shape::Alpha(v) | Shape::Length(v) => v.clone(),
        Shape::Complex(_) => unreachable!(),
    };
    Ok(Outcome {
        result: json!({
            "geometry": geometry,
            "params": params,
            "closed_form": opt_torsion(&report.closed_form),
            "direct": opt_torsion(&report.direct),
            "residual": opt_float(report.residual),
            "s_invariant": report.s_invariant.map_or(Value::Null, complex),
            "normalization": report.normalization,
            "lemma_checks": lemma_json(&lemmas),
        }),
        failures,
    })
}

fn curves_section(g: &GluingGraph, chi: &CharacterPoint, curves: &[(i64, i64)]) -> Result<Value, CliError> {
    let cc = change_of_curves(g, chi, curves)?;
    let mut out = json!({
        "curves": curves.iter().map(|&(p, q)| json!([p, q])).collect::<Vec<_>>(),
        "jacobian": matrix(&cc.jacobian),
        "jacobian_det": complex(cc.jacobian_det),
        "torsion": torsion(&cc.torsion),
        "core_curves": Value::Null,
        "core_holonomy": Value::Null,
        "surgery": Value::Null,
    });
    match core_curves(curves) {
        Ok(core) => {
            let u_gamma = core_holonomy(g, chi, curves)?;
            out["core_curves"] = core.iter().map(|&(r, s)| json!([r, s])).collect();
            out["core_holonomy"] = complex_list(&u_gamma);
            out["surgery"] = torsion(&surgery_apply(cc.torsion, &u_gamma)?);
        }
        Err(e) => out["note"] = json!(format!("no surgery factor: {e}")),
    }
    Ok(out)
}

pub fn assemble(
    path: &Path,
    method: AssemblyMethod,
    curves: Option<&str>,
    fill: bool,
    tol: f64,
) -> Result<Outcome, CliError> {
    let g = input::read_graph(path)?;
    let chi = CharacterPoint::from_graph(&g)?;
    let rep = assemble_torsion(&g, &chi, method)?;
    let mut failures = Vec::new();
    check(&mut failures, "closed form vs Mayer-Vietoris", rep.residual, tol);
    if let Some(h) = rep.tor_h {
        check(&mut failures, "Tor(H) = ±1", Some(h.distance(&TorsionValue(C64::new(1.0, 0.0)))), tol);
    }
    let (um, ul) = peripheral_holonomies(&g, &chi)?;
    let mut result = json!({
        "kind": if g.kind == ManifoldKind::Fsl { "fsl" } else { "double" },
        "counts": { "d": rep.d, "c": rep.c, "p": rep.p, "n": rep.n },
        "torus_values": chi.params,
        "closed_form": opt_torsion(&rep.closed_form),
        "mayer_vietoris": opt_torsion(&rep.mv),
        "tor_h": opt_torsion(&rep.tor_h),
        "residual": opt_float(rep.residual),
        "holonomy": {
            "meridian": complex_list(&um),
            "longitude": complex_list(&ul),
            "longitude_model": match g.kind {
                ManifoldKind::Fsl => "sum of real edge lengths along the torus",
                ManifoldKind::Double => "twice the edge length",
            },
        },
    });
    if let Some(spec) = curves {
        let curves = input::parse_curves(spec)?;
        result["change_of_curves"] = curves_section(&g, &chi, &curves)?;
        if fill {
            let sol = solve_filling(&g, &curves, &chi)?;
            let at = assemble_torsion(&g, &sol.point, AssemblyMethod::Closed)?;
            result["filling"] = json!({
                "iterations": sol.iterations,
                "residual": sol.residual,
                "torus_values": sol.point.params,
                "closed_form": opt_torsion(&at.closed_form),
                "change_of_curves": curves_section(&g, &sol.point, &curves)?,
            });
        }
    } else if fill {
        return Err(CliError::Input("--fill requires --curves".into()));
    }
    Ok(Outcome { result, failures })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Identities,
    Torsion,
    All,
}

type Probe = fn(&mut ChaCha8Rng, u64) -> torsion_forge::Result<f64>;

fn max_lemma(checks: Vec<LemmaCheck>) -> f64 {
    checks.iter().map(LemmaCheck::residual).fold(0.0, f64::max)
}

fn identity_probes() -> Vec<(&'static str, Probe)> {
    vec![
        ("gram identity, angle shapes", |r, _| Ok(blocks::verify_gram_identity(&sample::fsl_block(r))?.residual)),
        ("gram identity, length shapes", |r, _| Ok(blocks::verify_gram_identity(&sample::dual_block(r))?.residual)),
        ("determinant formulas, blocks", |r, _| {
            Ok(max_lemma(dblock_lemma_checks(&sample::fsl_block(r))?).max(max_lemma(dblock_lemma_checks(&sample::dual_block(r))?)))
        }),
        ("determinant formulas, pants", |r, _| {
            Ok(max_lemma(pants_lemma_checks(&sample::cone_pants(r))?).max(max_lemma(pants_lemma_checks(&sample::boundary_pants(r))?)))
        }),
        ("angle/length round trip", |r, _| {
            let a = sample::angle_shape(r);
            let l = gram::relabel_complement(&gram::lengths_from_angles(&a)?);
            let back = gram::relabel_complement(&gram::angles_from_lengths(&l)?);
            Ok(a.angles().iter().zip(back.angles()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
        }),
        ("trace closure", |r, _| {
            let mut worst: f64 = 0.0;
            for g in [sample::fsl_block(r), sample::dual_block(r)] {
                let h = block_holonomy(&g)?;
                let (t, e) = (h.get(3, 4).trace(), expected_trace(g.kind, &h.data, 3, 4));
                worst = worst.max((t - e).norm().min((t + e).norm()));
            }
            Ok(worst)
        }),
    ]
}

fn torsion_probes() -> Vec<(&'static str, Probe)> {
    vec![
        ("pants closed vs direct", |r, _| {
            let a = blocks::pants_torsion(&sample::cone_pants(r), Method::Both)?.residual.unwrap_or(0.0);
            let b = blocks::pants_torsion(&sample::boundary_pants(r), Method::Both)?.residual.unwrap_or(0.0);
            Ok(a.max(b))
        }),
        ("D-block closed vs direct", |r, _| {
            let a = dblock_torsion(&sample::fsl_block(r), Method::Both)?.residual.unwrap_or(0.0);
            let b = dblock_torsion(&sample::dual_block(r), Method::Both)?.residual.unwrap_or(0.0);
            Ok(a.max(b))
        }),
        ("Mayer-Vietoris Tor(H) = ±1", |_, seed| {
            let all = fixtures::all();
            let g = all[(seed % all.len() as u64) as usize].1.relabeled(seed);
            let t = exact_sequence_torsion(&assembly::mv_matrices(&g)?)?;
            Ok(t.distance(&TorsionValue(C64::new(1.0, 0.0))))
        }),
        ("assembly closed vs Mayer-Vietoris", |r, seed| {
            let all = fixtures::all();
            let g = &all[(seed % all.len() as u64) as usize].1;
            let chi = assembly::random_character(g, r)?;
            Ok(assemble_torsion(g, &chi, AssemblyMethod::Both)?.residual.unwrap_or(0.0))
        }),
        ("multiplicativity", |_, seed| Ok(check_multiplicativity(&random_short_exact_sequence(seed)?, 1e-9)?.residual)),
    ]
}

/// Runs every probe of the suite on `samples` seeds `seed, seed + 1, ...`;
/// a failing seed is replayed with `--seed <it> --samples 1`.
pub fn verify(suite: Suite, samples: usize, seed: u64, tol: f64) -> Outcome {
    let mut probes = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        probes.extend(identity_probes());
    }
    if matches!(suite, Suite::Torsion | Suite::All) {
        probes.extend(torsion_probes());
    }
    let mut failures = Vec::new();
    let mut checks = Vec::new();
    for (name, probe) in probes {
        let runs = par::map_indexed(samples, |i| {
            let s = seed.wrapping_add(i as u64);
            (s, probe(&mut ChaCha8Rng::seed_from_u64(s), s))
        });
        let mut worst: f64 = 0.0;
        let mut failing = Vec::new();
        let mut errors = Vec::new();
        for (s, r) in runs {
            match r {
                Ok(x) => {
                    worst = worst.max(x);
                    if x.is_nan() || x > tol {
                        failing.push(s);
                    }
                }
                Err(e) => {
                    failing.push(s);
                    errors.push(format!("seed {s}: {e}"));
                }
            }
        }
        if !failing.is_empty() {
            failures.push(format!("{name}: {} failing samples, seeds {failing:?}", failing.len()));
        }
        checks.push(json!({
            "name": name,
            "samples": samples,
            "max_residual": worst,
            "passed": failing.is_empty(),
            "failing_seeds": failing,
            "errors": errors,
        }));
    }
    let mut result = json!({
        "suite": match suite {
            Suite::Identities => "identities",
            Suite::Torsion => "torsion",
            Suite::All => "all",
        },
        "samples": samples,
        "checks": checks,
    });
    if samples == 0 {
        result["warning"] = json!("no samples requested; every check passes vacuously");
    }
    Outcome { result, failures }
}
