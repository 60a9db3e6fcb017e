//! Holonomy matrices of pants and D-blocks, the symmetric-square lift and
//! invariant vectors.
//!
//! Holonomies are assembled from `dz`/`ss` words. Each word below is written for
//! the transpose `T = rho^T`; `rho` itself is returned. Loops `gamma_13`,
//! `gamma_24` (cone blocks) and `gamma_2`, `gamma_3` (boundary pants) go
//! clockwise, which is where the negative exponents come from.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gram::{self, complement, pair_index, TetShape, PAIRS};
use crate::hyptrig::{dz, hexagon_side, product, ss, triangle_side, TwoMatrix};
use crate::linalg::{ComplexMatrix, C64, I};

pub type ThreeMatrix = ComplexMatrix;

/// Tolerance on `det A = 1` accepted by `sym2`.
pub const UNIMODULAR_TOL: f64 = 1e-8;

/// Action of `A` on quadratic forms in the basis `(X^2, XY, Y^2)`.
pub fn sym2(m: &TwoMatrix) -> Result<ThreeMatrix> {
    let det = m.det();
    if (det - 1.0).norm() > UNIMODULAR_TOL * m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().max(1.0) {
        return Err(Error::NonUnimodular(format!("{:.3e}{:+.3e}i", det.re, det.im)));
    }
    Ok(sym2_raw(m))
}

fn sym2_raw(m: &TwoMatrix) -> ThreeMatrix {
    let TwoMatrix { a, b, c, d } = *m;
    ComplexMatrix::from_rows(&[
        vec![a * a, a * b, b * b],
        vec![a * c * 2.0, a * d + b * c, b * d * 2.0],
        vec![c * c, c * d, d * d],
    ])
}

fn eigenvector(m: &TwoMatrix, lambda: C64) -> [C64; 2] {
    let u = [m.b, lambda - m.a];
    let w = [lambda - m.d, m.c];
    let nu = u[0].norm() + u[1].norm();
    let nw = w[0].norm() + w[1].norm();
    if nu >= nw {
        u
    } else {
        w
    }
}

/// Fixed vector of `sym2(M)`: with eigenvectors `v+ = (a, b)`, `v- = (c, d)`
/// scaled so that `det[v+, v-] = 1`, returns `(ac, ad + bc, bd)`.
///
/// `v+` belongs to the eigenvalue of larger modulus, ties going to the larger
/// imaginary part. The result is determined up to sign by the conjugacy class.
pub fn invariant_vector(m: &TwoMatrix) -> Result<[C64; 3]> {
    let scale = m.entries().iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tr = m.trace();
    let det = m.det();
    let disc = (tr * tr - det * 4.0).sqrt();
    if disc.norm() <= 1e-9 * scale {
        let kind = if m.b.norm() + m.c.norm() <= 1e-12 * scale {
            "central"
        } else {
            "parabolic"
        };
        return Err(Error::Degenerate(format!("{kind} element has no invariant axis")));
    }
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    let first = l1.norm() > l2.norm() * (1.0 + 1e-12)
        || ((l1.norm() - l2.norm()).abs() <= 1e-12 * l1.norm().max(1.0) && l1.im >= l2.im);
    let (lp, lm) = if first { (l1, l2) } else { (l2, l1) };
    let vp = eigenvector(m, lp);
    let mut vm = eigenvector(m, lm);
    let d = vp[0] * vm[1] - vp[1] * vm[0];
    if d.norm() <= 1e-14 {
        return Err(Error::Degenerate("eigenvectors are dependent".into()));
    }
    vm = [vm[0] / d, vm[1] / d];
    let (a, b, c, dd) = (vp[0], vp[1], vm[0], vm[1]);
    Ok([a * c, a * dd + b * c, b * dd])
}

/// Rescales a vector so its largest-modulus entry is 1.
pub fn normalize_max(v: &[C64; 3]) -> [C64; 3] {
    let k = (0..3).max_by(|&x, &y| v[x].norm().total_cmp(&v[y].norm())).unwrap();
    let s = v[k];
    v.map(|z| z / s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PantsKind {
    /// Three cone points of angles `2 alpha_k`.
    Cone,
    /// Three geodesic boundaries of lengths `2 l_k`.
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PantsGeometry {
    pub kind: PantsKind,
    pub params: [f64; 3],
}

impl PantsGeometry {
    pub fn cone(alpha: [f64; 3]) -> Self {
        Self {
            kind: PantsKind::Cone,
            params: alpha,
        }
    }

    pub fn boundary(l: [f64; 3]) -> Self {
        Self {
            kind: PantsKind::Boundary,
            params: l,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PantsKind::Cone => {
                if self.params.iter().any(|&a| !(a > 0.0 && a < PI)) {
                    return Err(Error::InvalidShape(format!("cone angles {:?} outside (0, pi)", self.params)));
                }
                let sum: f64 = self.params.iter().sum();
                if sum >= PI {
                    return Err(Error::InvalidShape(format!("cone angle sum {sum} >= pi")));
                }
            }
            PantsKind::Boundary => {
                if self.params.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
                    return Err(Error::InvalidShape(format!("lengths {:?} not positive", self.params)));
                }
            }
        }
        Ok(())
    }

    /// Side `s_k` of the triangle or hexagon opposite parameter `k` (0-based).
    pub fn sides(&self) -> Result<[f64; 3]> {
        self.validate()?;
        let p = self.params;
        let f = match self.kind {
            PantsKind::Cone => triangle_side,
            PantsKind::Boundary => hexagon_side,
        };
        Ok([
            f(p[0], p[1], p[2])?,
            f(p[1], p[0], p[2])?,
            f(p[2], p[0], p[1])?,
        ])
    }
}

/// Holonomies of the three boundary loops of a pair of pants.
#[derive(Clone, Debug, PartialEq)]
pub struct PantsHolonomy {
    pub rho: [TwoMatrix; 3],
    /// Second factorizations of `rho(gamma_2)` and `rho(gamma_3)`.
    pub rho_alt: [TwoMatrix; 2],
    pub sides: [f64; 3],
}

fn dr(x: f64) -> TwoMatrix {
    dz(C64::new(x, 0.0))
}

fn di(x: f64) -> TwoMatrix {
    dz(I * x)
}

fn sr(x: f64) -> TwoMatrix {
    ss(C64::new(x, 0.0))
}

pub fn pants_holonomy(g: &PantsGeometry) -> Result<PantsHolonomy> {
    let s = g.sides()?;
    let [s1, s2, s3] = [sr(s[0]), sr(s[1]), sr(s[2])];
    let p = g.params;
    let t = match g.kind {
        PantsKind::Cone => {
            let d1 = di(p[0]);
            [
                di(2.0 * p[0]),
                product(&[d1, s3.inv(), di(2.0 * p[1]), s3, d1.inv()]),
                product(&[s2.inv(), di(2.0 * p[2]), s2]),
                product(&[s2.inv(), di(-p[2]), s1, di(2.0 * p[1]), s1.inv(), di(-p[2]).inv(), s2]),
                product(&[
                    d1,
                    s3.inv(),
                    di(p[1]),
                    s1,
                    di(2.0 * p[2]),
                    s1.inv(),
                    di(p[1]).inv(),
                    s3,
                    d1.inv(),
                ]),
            ]
        }
        PantsKind::Boundary => {
            let d1 = dr(p[0]);
            [
                dr(2.0 * p[0]),
                product(&[s3.inv(), dr(-2.0 * p[1]), s3]),
                product(&[d1.inv(), s2.inv(), dr(-2.0 * p[2]), s2, d1]),
                product(&[d1.inv(), s2.inv(), dr(p[2]), s1, dr(2.0 * p[1]), s1.inv(), dr(p[2]).inv(), s2, d1]),
                product(&[s3.inv(), dr(p[1]).inv(), s1, dr(2.0 * p[2]), s1.inv(), dr(p[1]), s3]),
            ]
        }
    };
    Ok(PantsHolonomy {
        rho: [t[0].transpose(), t[1].transpose(), t[2].transpose()],
        rho_alt: [t[3].transpose(), t[4].transpose()],
        sides: s,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockKind {
    /// Double of a truncated tetrahedron along its hexagons, edges removed.
    Fsl,
    /// Double along the truncation triangles, doubled edges removed.
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockGeometry {
    pub kind: BlockKind,
    pub shape: TetShape,
}

impl BlockGeometry {
    pub fn fsl(alpha: [f64; 6]) -> Self {
        Self {
            kind: BlockKind::Fsl,
            shape: TetShape::from_angles(alpha),
        }
    }

    pub fn dual(l: [f64; 6]) -> Self {
        Self {
            kind: BlockKind::Dual,
            shape: TetShape::from_lengths(l),
        }
    }

    /// Angles, lengths and short edges of the underlying truncated tetrahedron.
    pub fn data(&self) -> Result<BlockData> {
        let (angles, lengths) = match self.kind {
            BlockKind::Fsl => {
                let l = gram::lengths_from_angles(&self.shape)?;
                (self.shape.angles(), l.lengths())
            }
            BlockKind::Dual => {
                let a = gram::angles_from_lengths(&self.shape)?;
                (a.angles(), self.shape.lengths())
            }
        };
        let mut short = [[0.0; 4]; 4];
        for j in 1..=4 {
            for k in 1..=4 {
                if j == k {
                    continue;
                }
                let (m, n) = complement(j, k);
                short[j - 1][k - 1] = match self.kind {
                    BlockKind::Fsl => triangle_side(
                        angles[pair_index(m, n)],
                        angles[pair_index(k, m)],
                        angles[pair_index(k, n)],
                    )?,
                    BlockKind::Dual => hexagon_side(
                        lengths[pair_index(m, n)],
                        lengths[pair_index(k, m)],
                        lengths[pair_index(k, n)],
                    )?,
                };
            }
        }
        Ok(BlockData {
            angles,
            lengths,
            short,
        })
    }
}

/// Derived metric data of a block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockData {
    pub angles: [f64; 6],
    pub lengths: [f64; 6],
    /// `short[j-1][k-1]` is `s_jk`.
    pub short: [[f64; 4]; 4],
}

impl BlockData {
    pub fn alpha(&self, j: usize, k: usize) -> f64 {
        self.angles[pair_index(j, k)]
    }

    pub fn l(&self, j: usize, k: usize) -> f64 {
        self.lengths[pair_index(j, k)]
    }

    pub fn s(&self, j: usize, k: usize) -> f64 {
        self.short[j - 1][k - 1]
    }
}

/// Holonomies of the six edge meridians of a block, in `PAIRS` order.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockHolonomy {
    pub rho: [TwoMatrix; 6],
    /// Second factorization of `rho(gamma_14)`.
    pub rho14_alt: TwoMatrix,
    pub data: BlockData,
}

impl BlockHolonomy {
    pub fn get(&self, j: usize, k: usize) -> TwoMatrix {
        self.rho[pair_index(j, k)]
    }
}

pub fn block_holonomy(g: &BlockGeometry) -> Result<BlockHolonomy> {
    let bd = g.data()?;
    let s = |j, k| sr(bd.s(j, k));
    let a = |j, k| bd.alpha(j, k);
    let l = |j, k| bd.l(j, k);
    let (t12, t13, t14, t14b, t23, t24) = match g.kind {
        BlockKind::Fsl => {
            let d12 = di(a(1, 2));
            (
                di(2.0 * a(1, 2)),
                product(&[s(4, 1).inv(), di(-2.0 * a(1, 3)), s(4, 1)]),
                product(&[dr(l(1, 2)).inv(), s(3, 1).inv(), di(2.0 * a(1, 4)), s(3, 1), dr(l(1, 2))]),
                product(&[
                    s(4, 1).inv(),
                    dr(l(1, 3)).inv(),
                    s(2, 1),
                    di(-2.0 * a(1, 4)),
                    s(2, 1).inv(),
                    dr(l(1, 3)),
                    s(4, 1),
                ]),
                product(&[d12, s(4, 2).inv(), di(2.0 * a(2, 3)), s(4, 2), d12.inv()]),
                product(&[
                    d12,
                    s(4, 2).inv(),
                    dr(l(2, 3)).inv(),
                    s(1, 2),
                    di(-2.0 * a(2, 4)),
                    s(1, 2).inv(),
                    dr(l(2, 3)),
                    s(4, 2),
                    d12.inv(),
                ]),
            )
        }
        BlockKind::Dual => {
            let d12 = dr(l(1, 2));
            (
                dr(-2.0 * l(1, 2)),
                product(&[s(4, 1).inv(), dr(-2.0 * l(1, 3)), s(4, 1)]),
                product(&[di(a(1, 2)), s(3, 1).inv(), dr(-2.0 * l(1, 4)), s(3, 1), di(a(1, 2)).inv()]),
                product(&[
                    s(4, 1).inv(),
                    di(a(1, 3)).inv(),
                    s(2, 1),
                    dr(2.0 * l(1, 4)),
                    s(2, 1).inv(),
                    di(a(1, 3)),
                    s(4, 1),
                ]),
                product(&[d12.inv(), s(4, 2).inv(), dr(2.0 * l(2, 3)), s(4, 2), d12]),
                product(&[
                    d12.inv(),
                    s(4, 2).inv(),
                    di(a(2, 3)).inv(),
                    s(1, 2),
                    dr(2.0 * l(2, 4)),
                    s(1, 2).inv(),
                    di(a(2, 3)),
                    s(4, 2),
                    d12,
                ]),
            )
        }
    };
    let rho23 = t23.transpose();
    let rho24 = t24.transpose();
    let rho34 = rho23.inv() * rho24;
    let mut rho = [TwoMatrix::IDENTITY; 6];
    for (&(j, k), m) in PAIRS.iter().zip([
        t12.transpose(),
        t13.transpose(),
        t14.transpose(),
        rho23,
        rho24,
        rho34,
    ]) {
        rho[pair_index(j, k)] = m;
    }
    Ok(BlockHolonomy {
        rho,
        rho14_alt: t14b.transpose(),
        data: bd,
    })
}

/// Expected `trace rho(gamma_jk)` up to sign: `2 cos alpha_jk` or `2 cosh l_jk`.
pub fn expected_trace(kind: BlockKind, data: &BlockData, j: usize, k: usize) -> f64 {
    match kind {
        BlockKind::Fsl => 2.0 * data.alpha(j, k).cos(),
        BlockKind::Dual => 2.0 * data.l(j, k).cosh(),
    }
}
