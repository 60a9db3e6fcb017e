//! Torsion of pairs of pants and D-blocks, closed form and direct.

use crate::error::{Error, Result};
use crate::gram::{self, pair_index, PAIRS};
use crate::hyptrig::TwoMatrix;
use crate::linalg::{ComplexMatrix, C64, I, ONE};
use crate::rep::{self, BlockGeometry, BlockKind, PantsGeometry, PantsKind};
use crate::torsion::{chain_torsion, edge_difference, twisted_graph_complex, BasedChainComplex, Spine, TorsionValue};

/// Smallest sin/sinh factor accepted before a geometry counts as degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Closed,
    Direct,
    Both,
}

/// Torsion of a single piece by one or both pipelines.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTorsionReport {
    pub closed_form: Option<TorsionValue>,
    pub direct: Option<TorsionValue>,
    /// Mod-sign distance between the two values when both are computed.
    pub residual: Option<f64>,
    pub s_invariant: Option<C64>,
    /// Invariant vectors are scaled so their eigenbasis has determinant 1.
    pub normalization: &'static str,
}

pub const NORMALIZATION: &str = "unimodular eigenbasis";

fn check_factors(factors: &[f64]) -> Result<()> {
    if factors.iter().any(|f| f.abs() < DEGENERACY_FLOOR) {
        return Err(Error::InvalidShape("degenerate geometry (vanishing sin/sinh factor)".into()));
    }
    Ok(())
}

fn ad_t(m: &TwoMatrix) -> Result<ComplexMatrix> {
    rep::sym2(&m.transpose())
}

fn report(closed: Option<TorsionValue>, direct: Option<TorsionValue>, s: Option<C64>) -> BlockTorsionReport {
    let residual = match (closed, direct) {
        (Some(c), Some(d)) => Some(c.distance(&d)),
        _ => None,
    };
    BlockTorsionReport {
        closed_form: closed,
        direct,
        residual,
        s_invariant: s,
        normalization: NORMALIZATION,
    }
}

pub fn pants_closed(g: &PantsGeometry) -> Result<TorsionValue> {
    g.validate()?;
    let p = g.params;
    Ok(match g.kind {
        PantsKind::Cone => {
            let f = [p[0].sin(), p[1].sin(), p[2].sin()];
            check_factors(&f)?;
            TorsionValue(I / (16.0 * f[0] * f[1] * f[2]))
        }
        PantsKind::Boundary => {
            let f = [p[0].sinh(), p[1].sinh(), p[2].sinh()];
            check_factors(&f)?;
            TorsionValue(C64::new(1.0 / (16.0 * f[0] * f[1] * f[2]), 0.0))
        }
    })
}

/// Invariant vectors `I_1, I_2, I_3` of the pants boundary loops.
pub fn pants_invariant_vectors(g: &PantsGeometry) -> Result<[[C64; 3]; 3]> {
    let h = rep::pants_holonomy(g)?;
    Ok([
        rep::invariant_vector(&h.rho[0].transpose())?,
        rep::invariant_vector(&h.rho[1].transpose())?,
        rep::invariant_vector(&h.rho[2].transpose())?,
    ])
}

/// Twisted complex of the pants spine. Edge words are `gamma_3^{-1}`,
/// `gamma_2` and the identity; `scales[k]` rescales `I_k`.
pub fn pants_complex(g: &PantsGeometry, scales: [C64; 3]) -> Result<BasedChainComplex> {
    let h = rep::pants_holonomy(g)?;
    let words = [h.rho[2].inv(), h.rho[1], TwoMatrix::IDENTITY];
    let edges = words.iter().map(ad_t).collect::<Result<Vec<_>>>()?;
    let iv = pants_invariant_vectors(g)?;
    let v = |k: usize| iv[k].map(|z| z * scales[k]);
    let lifts = vec![
        edge_difference(3, 0, 1, &v(0)),
        edge_difference(3, 1, 2, &v(1)),
        edge_difference(3, 0, 2, &v(2)),
    ];
    Ok(twisted_graph_complex(&Spine { edges }, lifts)?.with_expected_ranks(vec![6]))
}

pub fn pants_direct(g: &PantsGeometry) -> Result<TorsionValue> {
    pants_direct_scaled(g, [ONE; 3])
}

pub fn pants_direct_scaled(g: &PantsGeometry, scales: [C64; 3]) -> Result<TorsionValue> {
    let cx = pants_complex(g, scales)?;
    cx.validate(1e-9).map_err(|e| Error::Inconsistent(format!("pants complex: {e}")))?;
    chain_torsion(&cx)
}

pub fn pants_torsion(g: &PantsGeometry, method: Method) -> Result<BlockTorsionReport> {
    let closed = matches!(method, Method::Closed | Method::Both)
        .then(|| pants_closed(g))
        .transpose()?;
    let direct = matches!(method, Method::Direct | Method::Both)
        .then(|| pants_direct(g))
        .transpose()?;
    Ok(report(closed, direct, None))
}

/// Closed form of the block torsion.
pub fn dblock_closed(g: &BlockGeometry) -> Result<TorsionValue> {
    let d = g.data()?;
    Ok(match g.kind {
        BlockKind::Fsl => {
            let f = [d.alpha(1, 2).sin(), d.alpha(1, 3).sin(), d.alpha(2, 3).sin()];
            let n = [d.l(1, 4).sinh(), d.s(2, 4).sinh(), d.s(3, 4).sinh()];
            check_factors(&f)?;
            check_factors(&n)?;
            TorsionValue(I * n[0] * n[1] * n[2] / (32.0 * f[0] * f[1] * f[2]))
        }
        BlockKind::Dual => {
            let f = [d.l(1, 2).sinh(), d.l(1, 3).sinh(), d.l(2, 3).sinh()];
            let n = [d.alpha(1, 4).sin(), d.s(2, 4).sinh(), d.s(3, 4).sinh()];
            check_factors(&f)?;
            check_factors(&n)?;
            TorsionValue(I * n[0] * n[1] * n[2] / (32.0 * f[0] * f[1] * f[2]))
        }
    })
}

/// Invariant vectors `I_jk` in `PAIRS` order.
pub fn dblock_invariant_vectors(g: &BlockGeometry) -> Result<[[C64; 3]; 6]> {
    let h = rep::block_holonomy(g)?;
    let mut out = [[ONE; 3]; 6];
    for (i, m) in h.rho.iter().enumerate() {
        out[i] = rep::invariant_vector(&m.transpose())?;
    }
    Ok(out)
}

/// Twisted complex of the block spine: edge words `gamma_13`, `gamma_23`, the
/// identity and `gamma_24^{-1} gamma_23`; lifts `I_jk (x) (a_j - a_k)`.
pub fn dblock_complex(g: &BlockGeometry, scales: [C64; 6]) -> Result<BasedChainComplex> {
    let h = rep::block_holonomy(g)?;
    let (r13, r23, r24) = (h.get(1, 3), h.get(2, 3), h.get(2, 4));
    let words = [r13, r23, TwoMatrix::IDENTITY, r24.inv() * r23];
    let edges = words.iter().map(ad_t).collect::<Result<Vec<_>>>()?;
    let iv = dblock_invariant_vectors(g)?;
    let lifts = PAIRS
        .iter()
        .enumerate()
        .map(|(i, &(j, k))| edge_difference(4, j - 1, k - 1, &iv[i].map(|z| z * scales[i])))
        .collect();
    Ok(twisted_graph_complex(&Spine { edges }, lifts)?.with_expected_ranks(vec![6]))
}

pub fn dblock_direct(g: &BlockGeometry) -> Result<TorsionValue> {
    dblock_direct_scaled(g, [ONE; 6])
}

pub fn dblock_direct_scaled(g: &BlockGeometry, scales: [C64; 6]) -> Result<TorsionValue> {
    let cx = dblock_complex(g, scales)?;
    cx.validate(1e-9).map_err(|e| Error::Inconsistent(format!("block complex: {e}")))?;
    chain_torsion(&cx)
}

pub fn dblock_torsion(g: &BlockGeometry, method: Method) -> Result<BlockTorsionReport> {
    let closed = matches!(method, Method::Closed | Method::Both)
        .then(|| dblock_closed(g))
        .transpose()?;
    let direct = matches!(method, Method::Direct | Method::Both)
        .then(|| dblock_direct(g))
        .transpose()?;
    let s = s_invariant(g, [1, 2, 3, 4])?;
    Ok(report(closed, direct, Some(s)))
}

/// `S(D)` computed from the vertex labelling `(a, b, c, d) = perm`.
pub fn s_invariant(g: &BlockGeometry, perm: [usize; 4]) -> Result<C64> {
    let mut sorted = perm;
    sorted.sort_unstable();
    if sorted != [1, 2, 3, 4] {
        return Err(Error::Index(format!("{perm:?} is not a permutation of 1..4")));
    }
    let data = g.data()?;
    let [a, b, c, d] = perm;
    let v = match g.kind {
        BlockKind::Fsl => {
            data.l(c, d).sinh()
                * data.s(a, d).sinh()
                * data.s(b, d).sinh()
                * data.alpha(a, d).sin()
                * data.alpha(b, d).sin()
                * data.alpha(c, d).sin()
        }
        BlockKind::Dual => {
            data.alpha(c, d).sin()
                * data.s(a, d).sinh()
                * data.s(b, d).sinh()
                * data.l(a, d).sinh()
                * data.l(b, d).sinh()
                * data.l(c, d).sinh()
        }
    };
    Ok(I * v)
}

/// Comparison of `S(D)^2` with the Gram determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GramIdentityReport {
    pub s_squared: C64,
    pub det: C64,
    pub residual: f64,
}

/// `S(D)^2 = det G` with the angle Gram matrix for cone blocks and the length
/// Gram matrix for dual blocks.
pub fn verify_gram_identity(g: &BlockGeometry) -> Result<GramIdentityReport> {
    let s = s_invariant(g, [1, 2, 3, 4])?;
    let det = gram::gram(&g.shape).det();
    let s2 = s * s;
    Ok(GramIdentityReport {
        s_squared: s2,
        det,
        residual: (s2 - det).norm() / det.norm().max(1.0),
    })
}

/// A computed determinant next to its closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub computed: C64,
    pub expected: C64,
}

impl LemmaCheck {
    pub fn residual(&self) -> f64 {
        TorsionValue(self.expected).distance(&TorsionValue(self.computed))
    }
}

fn det3(cols: [&[C64; 3]; 3]) -> C64 {
    ComplexMatrix::from_columns(3, &cols.map(|c| c.to_vec())).det()
}

fn moved(a: &ComplexMatrix, v: &[C64; 3]) -> [C64; 3] {
    let w = a.matvec(v);
    [v[0] - w[0], v[1] - w[1], v[2] - w[2]]
}

/// Invariant-vector determinants of a pair of pants.
pub fn pants_lemma_checks(g: &PantsGeometry) -> Result<Vec<LemmaCheck>> {
    let h = rep::pants_holonomy(g)?;
    let iv = pants_invariant_vectors(g)?;
    let [s1, s2, s3] = h.sides.map(f64::sinh);
    let p = g.params;
    let a3 = ad_t(&h.rho[2].inv())?;
    let a2 = ad_t(&h.rho[1])?;
    let diff = det3([&moved(&a3, &iv[0]), &moved(&a3, &iv[1]), &moved(&a2, &iv[2])]);
    let base = det3([&iv[0], &iv[1], &iv[2]]);
    Ok(match g.kind {
        PantsKind::Cone => {
            let [c1, c2, c3] = p.map(f64::sin);
            vec![
                LemmaCheck {
                    name: "pants cone basis",
                    computed: base,
                    expected: -I * 0.5 * c1 * s2 * s3,
                },
                LemmaCheck {
                    name: "pants cone differences",
                    computed: diff,
                    expected: I * 4.0 * c1 * c2 * c3.powi(3) * s1 * s1 * s2 * s2,
                },
            ]
        }
        PantsKind::Boundary => {
            let [h1, h2, h3] = p.map(f64::sinh);
            vec![
                LemmaCheck {
                    name: "pants boundary basis",
                    computed: base,
                    expected: C64::new(-0.5 * h1 * s2 * s3, 0.0),
                },
                LemmaCheck {
                    name: "pants boundary differences",
                    computed: diff,
                    expected: C64::new(4.0 * h1 * h2.powi(3) * h3 * s1 * s1 * s3 * s3, 0.0),
                },
            ]
        }
    })
}

/// Invariant-vector determinants of a block.
pub fn dblock_lemma_checks(g: &BlockGeometry) -> Result<Vec<LemmaCheck>> {
    let h = rep::block_holonomy(g)?;
    let d = h.data;
    let iv = dblock_invariant_vectors(g)?;
    let v = |j, k| &iv[pair_index(j, k)];
    let sh = |j, k| d.s(j, k).sinh();
    let lh = |j, k| d.l(j, k).sinh();
    let sa = |j, k| d.alpha(j, k).sin();
    let a13 = ad_t(&h.get(1, 3))?;
    let a23 = ad_t(&h.get(2, 3))?;
    let diff = det3([&moved(&a13, v(1, 2)), &moved(&a13, v(1, 4)), &moved(&a23, v(2, 4))]);
    let bases = [
        det3([v(1, 2), v(1, 3), v(1, 4)]),
        det3([v(1, 2), v(2, 3), v(2, 4)]),
        det3([v(1, 3), v(2, 3), v(3, 4)]),
        det3([v(1, 4), v(2, 4), v(3, 4)]),
    ];
    let re = |x: f64| C64::new(x, 0.0);
    let (names, expected): ([&'static str; 5], [C64; 5]) = match g.kind {
        BlockKind::Fsl => (
            [
                "cone block 12-13-14",
                "cone block 12-23-24",
                "cone block 13-23-34",
                "cone block 14-24-34",
                "cone block differences",
            ],
            [
                re(-0.5 * lh(1, 2) * sh(3, 1) * sh(4, 1)),
                re(0.5 * lh(1, 2) * sh(3, 2) * sh(4, 2)),
                re(-0.5 * lh(1, 3) * sh(2, 3) * sh(4, 3)),
                re(0.5 * lh(1, 4) * sh(2, 4) * sh(3, 4)),
                I * 4.0
                    * sa(1, 2)
                    * sa(1, 3).powi(2)
                    * lh(1, 3)
                    * lh(2, 3)
                    * sh(1, 2)
                    * sh(2, 1)
                    * sh(4, 1).powi(2),
            ],
        ),
        BlockKind::Dual => (
            [
                "dual block 12-13-14",
                "dual block 12-23-24",
                "dual block 13-23-34",
                "dual block 14-24-34",
                "dual block differences",
            ],
            [
                I * 0.5 * sa(1, 2) * sh(3, 1) * sh(4, 1),
                -I * 0.5 * sa(1, 2) * sh(3, 2) * sh(4, 2),
                I * 0.5 * sa(1, 3) * sh(2, 3) * sh(4, 3),
                -I * 0.5 * sa(1, 4) * sh(2, 4) * sh(3, 4),
                re(-4.0
                    * sa(1, 3)
                    * sa(2, 3)
                    * lh(1, 2)
                    * lh(1, 3).powi(2)
                    * sh(1, 2)
                    * sh(2, 1)
                    * sh(4, 1).powi(2)),
            ],
        ),
    };
    let computed = [bases[0], bases[1], bases[2], bases[3], diff];
    Ok((0..5)
        .map(|i| LemmaCheck {
            name: names[i],
            computed: computed[i],
            expected: expected[i],
        })
        .collect())
}

/// Both sides of the expansion of `sinh^2 l_cd sinh^2 s_ad sinh^2 s_bd` (cone
/// blocks) or `sin^2 alpha_cd sinh^2 s_ad sinh^2 s_bd` (dual blocks) in the
/// hyperbolic cosines of the short edges `s_ad, s_bd, s_cd`.
pub fn short_edge_expansion(g: &BlockGeometry, perm: [usize; 4]) -> Result<(f64, f64)> {
    let data = g.data()?;
    let [a, b, c, d] = perm;
    let (ca, cb, cc) = (data.s(a, d).cosh(), data.s(b, d).cosh(), data.s(c, d).cosh());
    let shs = (data.s(a, d).sinh() * data.s(b, d).sinh()).powi(2);
    Ok(match g.kind {
        BlockKind::Fsl => (
            data.l(c, d).sinh().powi(2) * shs,
            2.0 * ca * cb * cc + ca * ca + cb * cb + cc * cc - 1.0,
        ),
        BlockKind::Dual => (
            data.alpha(c, d).sin().powi(2) * shs,
            2.0 * ca * cb * cc - ca * ca - cb * cb - cc * cc + 1.0,
        ),
    })
}
