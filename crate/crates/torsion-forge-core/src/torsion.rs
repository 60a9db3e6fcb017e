//! Torsion of based chain complexes.
//!
//! A complex `C_n -> ... -> C_0` is stored as `boundaries[k] = d_{k+1}`, a
//! `dim C_k x dim C_{k+1}` matrix. With `b_k` a basis of the image of `d_{k+1}`,
//! `b~_k` preimage cells and `h~_k` homology lifts,
//!
//! ```text
//! Tor = prod_k [b_k, b~_{k-1}, h~_k / c_k]^((-1)^(k+1)).
//! ```
//!
//! For `0 -> C_1 -> C_0 -> 0` with `d` invertible this is `1 / det d`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, ComplexMatrix, C64, ONE, RANK_RTOL, ZERO};

/// A nonzero complex number taken up to sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorsionValue(pub C64);

impl TorsionValue {
    pub fn value(&self) -> C64 {
        self.0
    }

    /// `min(|a - b|, |a + b|) / max(1, |a|)`.
    pub fn distance(&self, other: &TorsionValue) -> f64 {
        let (a, b) = (self.0, other.0);
        (a - b).norm().min((a + b).norm()) / a.norm().max(1.0)
    }

    pub fn eq_mod_sign(&self, other: &TorsionValue, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    pub fn inv(&self) -> TorsionValue {
        TorsionValue(ONE / self.0)
    }

    /// Representative with positive real part, or with positive imaginary part
    /// when the real part is below `1e-12 |z|`.
    pub fn canonical(&self) -> C64 {
        let z = self.0;
        let flip = if z.re.abs() > 1e-12 * z.norm() { z.re < 0.0 } else { z.im < 0.0 };
        if flip {
            -z
        } else {
            z
        }
    }
}

impl std::ops::Mul for TorsionValue {
    type Output = TorsionValue;
    fn mul(self, r: TorsionValue) -> TorsionValue {
        TorsionValue(self.0 * r.0)
    }
}

impl std::ops::Div for TorsionValue {
    type Output = TorsionValue;
    fn div(self, r: TorsionValue) -> TorsionValue {
        TorsionValue(self.0 / r.0)
    }
}

/// Chain complex with standard cell bases and explicit homology lifts.
#[derive(Clone, Debug, PartialEq)]
pub struct BasedChainComplex {
    pub dims: Vec<usize>,
    pub boundaries: Vec<ComplexMatrix>,
    pub homology: Vec<Vec<Vec<C64>>>,
    /// Known ranks of `d_{k+1}`; checked when present.
    pub expected_ranks: Option<Vec<usize>>,
}

impl BasedChainComplex {
    pub fn new(dims: Vec<usize>, boundaries: Vec<ComplexMatrix>, homology: Vec<Vec<Vec<C64>>>) -> Result<Self> {
        if dims.is_empty() || boundaries.len() + 1 != dims.len() || homology.len() != dims.len() {
            return Err(Error::Inconsistent("degree counts disagree".into()));
        }
        for (k, d) in boundaries.iter().enumerate() {
            if d.rows() != dims[k] || d.cols() != dims[k + 1] {
                return Err(Error::Inconsistent(format!(
                    "boundary {} has shape {}x{}, expected {}x{}",
                    k + 1,
                    d.rows(),
                    d.cols(),
                    dims[k],
                    dims[k + 1]
                )));
            }
        }
        for (k, hs) in homology.iter().enumerate() {
            if hs.iter().any(|h| h.len() != dims[k]) {
                return Err(Error::Inconsistent(format!("homology lift of wrong length in degree {k}")));
            }
        }
        Ok(Self {
            dims,
            boundaries,
            homology,
            expected_ranks: None,
        })
    }

    pub fn with_expected_ranks(mut self, ranks: Vec<usize>) -> Self {
        self.expected_ranks = Some(ranks);
        self
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    /// `d_k : C_k -> C_{k-1}` for `k >= 1`.
    pub fn boundary(&self, k: usize) -> Option<&ComplexMatrix> {
        if k == 0 {
            None
        } else {
            self.boundaries.get(k - 1)
        }
    }

    /// Checks `d d = 0`, that lifts are cycles, and Euler bookkeeping.
    pub fn validate(&self, tol: f64) -> Result<()> {
        for k in 1..self.boundaries.len() {
            let dd = &self.boundaries[k - 1] * &self.boundaries[k];
            let scale = self.boundaries[k - 1].max_abs() * self.boundaries[k].max_abs();
            if dd.max_abs() > tol * scale.max(1.0) {
                return Err(Error::Inconsistent(format!("d_{} d_{} != 0", k, k + 1)));
            }
        }
        for (k, hs) in self.homology.iter().enumerate() {
            if let Some(d) = self.boundary(k) {
                for h in hs {
                    let r = norm(&d.matvec(h));
                    if r > tol * (norm(h) * d.max_abs()).max(1.0) {
                        return Err(Error::Inconsistent(format!("homology lift in degree {k} is not a cycle ({r:e})")));
                    }
                }
            }
        }
        let euler: i64 = self
            .dims
            .iter()
            .enumerate()
            .map(|(k, &d)| if k % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum();
        let hom: i64 = self
            .homology
            .iter()
            .enumerate()
            .map(|(k, h)| if k % 2 == 0 { h.len() as i64 } else { -(h.len() as i64) })
            .sum();
        if euler != hom {
            return Err(Error::Inconsistent(format!(
                "Euler characteristic {euler} differs from homology count {hom}"
            )));
        }
        Ok(())
    }

    /// Same complex with the cells of every degree permuted by `perms[k]`
    /// (new cell `i` is old cell `perms[k][i]`).
    pub fn permuted(&self, perms: &[Vec<usize>]) -> BasedChainComplex {
        let boundaries = self
            .boundaries
            .iter()
            .enumerate()
            .map(|(k, d)| d.select_rows(&perms[k]).select_columns(&perms[k + 1]))
            .collect();
        let homology = self
            .homology
            .iter()
            .enumerate()
            .map(|(k, hs)| hs.iter().map(|h| perms[k].iter().map(|&i| h[i]).collect()).collect())
            .collect();
        BasedChainComplex {
            dims: self.dims.clone(),
            boundaries,
            homology,
            expected_ranks: self.expected_ranks.clone(),
        }
    }
}

/// How image bases are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PivotRule {
    /// Column-pivoted selection, largest residual first.
    Largest,
    /// Greedy selection in a seeded random column order.
    Shuffled(u64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorsionOptions {
    pub rtol: f64,
    pub pivots: PivotRule,
}

impl Default for TorsionOptions {
    fn default() -> Self {
        Self {
            rtol: RANK_RTOL,
            pivots: PivotRule::Largest,
        }
    }
}

pub fn chain_torsion(cx: &BasedChainComplex) -> Result<TorsionValue> {
    chain_torsion_with(cx, &TorsionOptions::default())
}

fn pivots(d: &ComplexMatrix, opts: &TorsionOptions, salt: u64) -> Vec<usize> {
    match opts.pivots {
        PivotRule::Largest => d.pivot_columns(opts.rtol),
        PivotRule::Shuffled(seed) => {
            let mut order: Vec<usize> = (0..d.cols()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            order.shuffle(&mut rng);
            d.pivot_columns_in_order(&order, opts.rtol)
        }
    }
}

pub fn chain_torsion_with(cx: &BasedChainComplex, opts: &TorsionOptions) -> Result<TorsionValue> {
    let n = cx.top_degree();
    let piv: Vec<Vec<usize>> = cx
        .boundaries
        .iter()
        .enumerate()
        .map(|(k, d)| pivots(d, opts, k as u64))
        .collect();
    if let Some(expected) = &cx.expected_ranks {
        for (k, p) in piv.iter().enumerate() {
            if let Some(&e) = expected.get(k) {
                if e != p.len() {
                    return Err(Error::RankMismatch {
                        degree: k + 1,
                        expected: e,
                        found: p.len(),
                    });
                }
            }
        }
    }
    let mut tor = ONE;
    for k in 0..=n {
        let dim = cx.dims[k];
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(dim);
        if k < n {
            for &j in &piv[k] {
                cols.push(cx.boundaries[k].column(j));
            }
        }
        if k > 0 {
            for &j in &piv[k - 1] {
                let mut e = vec![ZERO; dim];
                e[j] = ONE;
                cols.push(e);
            }
        }
        cols.extend(cx.homology[k].iter().cloned());
        if cols.len() != dim {
            return Err(Error::Inconsistent(format!(
                "degree {k}: ranks and homology give {} vectors for dimension {dim}",
                cols.len()
            )));
        }
        if dim == 0 {
            continue;
        }
        let m = ComplexMatrix::from_columns(dim, &cols);
        let det = m.det();
        let scale: f64 = cols.iter().map(|c| norm(c)).product();
        if det.norm() <= 1e-16 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Singular(format!("transition matrix in degree {k}")));
        }
        if k % 2 == 1 {
            tor *= det;
        } else {
            tor /= det;
        }
    }
    Ok(TorsionValue(tor))
}

/// Torsion of an acyclic complex.
pub fn exact_sequence_torsion(seq: &BasedChainComplex) -> Result<TorsionValue> {
    exact_sequence_torsion_with(seq, &TorsionOptions::default())
}

pub fn exact_sequence_torsion_with(seq: &BasedChainComplex, opts: &TorsionOptions) -> Result<TorsionValue> {
    if seq.homology.iter().any(|h| !h.is_empty()) {
        return Err(Error::NotAcyclic("homology lifts supplied".into()));
    }
    let ranks: Vec<usize> = seq.boundaries.iter().map(|d| d.rank(opts.rtol)).collect();
    for k in 0..seq.dims.len() {
        let out = if k > 0 { ranks[k - 1] } else { 0 };
        let inc = ranks.get(k).copied().unwrap_or(0);
        if out + inc != seq.dims[k] {
            return Err(Error::NotAcyclic(format!(
                "degree {k}: dimension {} but ranks {out} + {inc}",
                seq.dims[k]
            )));
        }
    }
    chain_torsion_with(seq, opts)
}

/// Graph with two vertices `x1, x2` and edges `a_j : x1 -> x2`, twisted by a
/// 3x3 matrix per edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Spine {
    pub edges: Vec<ComplexMatrix>,
}

/// `C_1 = C^3 (x) edges`, `C_0 = C^3 (x) {x1, x2}`, with
/// `d(v (x) a_j) = v (x) x1 - A_j v (x) x2`.
pub fn twisted_graph_complex(spine: &Spine, lifts: Vec<Vec<C64>>) -> Result<BasedChainComplex> {
    let m = spine.edges.len();
    if m < 2 {
        return Err(Error::Inconsistent(format!("spine needs at least 2 edges, got {m}")));
    }
    if spine.edges.iter().any(|a| a.rows() != 3 || a.cols() != 3) {
        return Err(Error::Inconsistent("edge twist is not 3x3".into()));
    }
    let mut d = ComplexMatrix::zeros(6, 3 * m);
    let id = ComplexMatrix::identity(3);
    for (j, a) in spine.edges.iter().enumerate() {
        d.set_block(0, 3 * j, &id);
        d.set_block(3, 3 * j, &-a);
    }
    BasedChainComplex::new(vec![6, 3 * m], vec![d], vec![Vec::new(), lifts])
}

/// The chain `v (x) (a_j - a_k)` in a spine with `m` edges.
pub fn edge_difference(m: usize, j: usize, k: usize, v: &[C64; 3]) -> Vec<C64> {
    let mut out = vec![ZERO; 3 * m];
    for i in 0..3 {
        out[3 * j + i] += v[i];
        out[3 * k + i] -= v[i];
    }
    out
}

/// Solves `A x = b` in the least-squares sense for full-column-rank `A`.
fn lstsq(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let ah = conj_transpose(a);
    let lhs = &ah * a;
    let rhs = ComplexMatrix::from_columns(a.cols(), &[ah.matvec(b)]);
    Ok(lhs.solve(&rhs)?.column(0))
}

/// Minimum-norm solution of `A x = b` for full-row-rank `A`.
fn min_norm(a: &ComplexMatrix, b: &[C64]) -> Result<Vec<C64>> {
    let ah = conj_transpose(a);
    let lhs = a * &ah;
    let rhs = ComplexMatrix::from_columns(a.rows(), &[b.to_vec()]);
    let y = lhs.solve(&rhs)?.column(0);
    Ok(ah.matvec(&y))
}

fn conj_transpose(a: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)].conj())
}

/// Basis of the null space of `a`.
pub fn null_space(a: &ComplexMatrix, rtol: f64) -> Vec<Vec<C64>> {
    let n = a.cols();
    let rows = conj_transpose(a);
    let row_space: Vec<Vec<C64>> = rows
        .pivot_columns(rtol)
        .into_iter()
        .map(|j| rows.column(j))
        .collect();
    let mut q: Vec<Vec<C64>> = Vec::new();
    for v in row_space {
        push_orthonormal(&mut q, v);
    }
    let mut out = Vec::new();
    for i in 0..n {
        let mut e = vec![ZERO; n];
        e[i] = ONE;
        let before = q.len();
        if push_orthonormal(&mut q, e) && q.len() > before {
            out.push(q.last().unwrap().clone());
        }
        if q.len() == n {
            break;
        }
    }
    out
}

fn push_orthonormal(q: &mut Vec<Vec<C64>>, mut v: Vec<C64>) -> bool {
    for _ in 0..2 {
        for b in q.iter() {
            let c = dot(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let nv = norm(&v);
    if nv < 1e-8 {
        return false;
    }
    q.push(v.into_iter().map(|x| x / nv).collect());
    true
}

/// Homology lifts of degree `k`: cycles independent of the boundaries.
pub fn homology_basis(cx: &BasedChainComplex, k: usize, rtol: f64) -> Vec<Vec<C64>> {
    let dim = cx.dims[k];
    let cycles = match cx.boundary(k) {
        Some(d) => null_space(d, rtol),
        None => (0..dim)
            .map(|i| {
                let mut e = vec![ZERO; dim];
                e[i] = ONE;
                e
            })
            .collect(),
    };
    let image: Vec<Vec<C64>> = match cx.boundaries.get(k) {
        Some(d) => d.pivot_columns(rtol).into_iter().map(|j| d.column(j)).collect(),
        None => Vec::new(),
    };
    let mut q = Vec::new();
    for v in &image {
        push_orthonormal(&mut q, v.clone());
    }
    cycles
        .into_iter()
        .filter(|z| push_orthonormal(&mut q, z.clone()))
        .collect()
}

/// Chain maps `f : E -> F`, `g : F -> G` given per degree.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub e: BasedChainComplex,
    pub f: BasedChainComplex,
    pub g: BasedChainComplex,
    pub f_maps: Vec<ComplexMatrix>,
    pub g_maps: Vec<ComplexMatrix>,
}

/// Factors of the multiplicativity identity and its residual.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicativityReport {
    pub tor_e: TorsionValue,
    pub tor_f: TorsionValue,
    pub tor_g: TorsionValue,
    pub tor_h: TorsionValue,
    /// `[f(c_E), c~_G / c_F]` per degree; each should be `+-1`.
    pub lift_determinants: Vec<C64>,
    pub residual: f64,
}

/// Coordinates of a cycle `z` of `C_k` in the homology lifts of degree `k`.
fn homology_coords(cx: &BasedChainComplex, k: usize, z: &[C64], rtol: f64) -> Result<Vec<C64>> {
    let mut cols: Vec<Vec<C64>> = match cx.boundaries.get(k) {
        Some(d) => d.pivot_columns(rtol).into_iter().map(|j| d.column(j)).collect(),
        None => Vec::new(),
    };
    let nb = cols.len();
    cols.extend(cx.homology[k].iter().cloned());
    if cols.is_empty() {
        return Ok(Vec::new());
    }
    let a = ComplexMatrix::from_columns(cx.dims[k], &cols);
    let c = lstsq(&a, z)?;
    let floor = 1e-9 * norm(z).max(1.0);
    Ok(c[nb..].iter().map(|&x| if x.norm() < floor { ZERO } else { x }).collect())
}

/// Verifies `Tor(F) = Tor(E) Tor(G) Tor(H)` for the long exact homology sequence `H`.
pub fn check_multiplicativity(ses: &ShortExactSequence, tol: f64) -> Result<MultiplicativityReport> {
    let rtol = RANK_RTOL;
    let ShortExactSequence { e, f, g, f_maps, g_maps } = ses;
    let n = f.top_degree();
    if e.dims.len() != f.dims.len() || g.dims.len() != f.dims.len() {
        return Err(Error::Inconsistent("complexes have different lengths".into()));
    }
    let mut lift_determinants = Vec::new();
    for k in 0..=n {
        let fk = &f_maps[k];
        let gk = &g_maps[k];
        if fk.rows() != f.dims[k] || fk.cols() != e.dims[k] || gk.rows() != g.dims[k] || gk.cols() != f.dims[k] {
            return Err(Error::Inconsistent(format!("chain map shapes in degree {k}")));
        }
        if (gk * fk).max_abs() > tol * (gk.max_abs() * fk.max_abs()).max(1.0) {
            return Err(Error::Inconsistent(format!("g f != 0 in degree {k}")));
        }
        if e.dims[k] + g.dims[k] != f.dims[k] || fk.rank(rtol) != e.dims[k] || gk.rank(rtol) != g.dims[k] {
            return Err(Error::Inconsistent(format!("sequence not exact in degree {k}")));
        }
        if f.dims[k] == 0 {
            lift_determinants.push(ONE);
            continue;
        }
        let mut cols = fk.columns();
        for i in 0..g.dims[k] {
            let mut ei = vec![ZERO; g.dims[k]];
            ei[i] = ONE;
            cols.push(min_norm(gk, &ei)?);
        }
        lift_determinants.push(ComplexMatrix::from_columns(f.dims[k], &cols).det());
    }
    for (k, d) in lift_determinants.iter().enumerate() {
        if ((*d).norm() - 1.0).abs() > 1e-8 {
            return Err(Error::Inconsistent(format!(
                "lifted bases in degree {k} have determinant {d}, not +-1"
            )));
        }
    }
    let tor_e = chain_torsion(e)?;
    let tor_f = chain_torsion(f)?;
    let tor_g = chain_torsion(g)?;

    // Long exact sequence ... -> H_k(E) -> H_k(F) -> H_k(G) -> H_{k-1}(E) -> ...
    // placed in degrees 3k+2, 3k+1, 3k.
    let hdim = |cx: &BasedChainComplex, k: usize| cx.homology[k].len();
    let total = 3 * (n + 1);
    let mut dims = vec![0; total];
    for k in 0..=n {
        dims[3 * k] = hdim(g, k);
        dims[3 * k + 1] = hdim(f, k);
        dims[3 * k + 2] = hdim(e, k);
    }
    let mut bds: Vec<ComplexMatrix> = (0..total - 1)
        .map(|d| ComplexMatrix::zeros(dims[d], dims[d + 1]))
        .collect();
    for k in 0..=n {
        // f_* : H_k(E) -> H_k(F), degree 3k+2 -> 3k+1.
        let mut m = ComplexMatrix::zeros(dims[3 * k + 1], dims[3 * k + 2]);
        for (j, h) in e.homology[k].iter().enumerate() {
            m.set_column(j, &homology_coords(f, k, &f_maps[k].matvec(h), rtol)?);
        }
        bds[3 * k + 1] = m;
        // g_* : H_k(F) -> H_k(G), degree 3k+1 -> 3k.
        let mut m = ComplexMatrix::zeros(dims[3 * k], dims[3 * k + 1]);
        for (j, h) in f.homology[k].iter().enumerate() {
            m.set_column(j, &homology_coords(g, k, &g_maps[k].matvec(h), rtol)?);
        }
        bds[3 * k] = m;
        // Connecting map H_k(G) -> H_{k-1}(E), degree 3k -> 3k-1.
        if k > 0 {
            let mut m = ComplexMatrix::zeros(dims[3 * k - 1], dims[3 * k]);
            for (j, h) in g.homology[k].iter().enumerate() {
                let x = min_norm(&g_maps[k], h)?;
                let dx = f.boundaries[k - 1].matvec(&x);
                let y = lstsq(&f_maps[k - 1], &dx)?;
                m.set_column(j, &homology_coords(e, k - 1, &y, rtol)?);
            }
            bds[3 * k - 1] = m;
        }
    }
    let hcx = BasedChainComplex::new(dims.clone(), bds, vec![Vec::new(); total])?;
    let tor_h = exact_sequence_torsion(&hcx)?;
    let predicted = tor_e * tor_g * tor_h;
    let residual = tor_f.distance(&predicted);
    Ok(MultiplicativityReport {
        tor_e,
        tor_f,
        tor_g,
        tor_h,
        lift_determinants,
        residual,
    })
}

fn random_entry(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| random_entry(rng))
}

/// Random invertible matrix with determinant 1.
fn random_unimodular(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    loop {
        let mut a = random_matrix(rng, n, n);
        let det = a.det();
        if det.norm() > 1e-2 {
            for j in 0..n {
                a[(0, j)] /= det;
            }
            return a;
        }
    }
}

fn inverse_or_empty(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.rows() == 0 {
        Ok(a.clone())
    } else {
        a.inverse()
    }
}

/// Random complex with prescribed ranks `ranks[k]` of `d_{k+1}` and Betti
/// numbers `betti[k]`, in random bases, with computed homology lifts.
pub fn random_based_complex(rng: &mut ChaCha8Rng, ranks: &[usize], betti: &[usize]) -> Result<BasedChainComplex> {
    let top = betti.len();
    if ranks.len() + 1 != top {
        return Err(Error::Inconsistent("need one rank per boundary map".into()));
    }
    let r = |k: usize| if k < ranks.len() { ranks[k] } else { 0 };
    let r_in = |k: usize| if k > 0 { ranks[k - 1] } else { 0 };
    // C_k = (rank of d_k) + betti + (rank of d_{k+1}); d_k maps the first block onto the last block of C_{k-1}.
    let dims: Vec<usize> = (0..top).map(|k| r_in(k) + betti[k] + r(k)).collect();
    let bases: Vec<ComplexMatrix> = dims.iter().map(|&n| random_unimodular(rng, n)).collect();
    let mut bds = Vec::new();
    for k in 0..ranks.len() {
        let mut d = ComplexMatrix::zeros(dims[k], dims[k + 1]);
        let off = r_in(k) + betti[k];
        for i in 0..ranks[k] {
            d[(off + i, i)] = ONE;
        }
        bds.push(&(&bases[k] * &d) * &inverse_or_empty(&bases[k + 1])?);
    }
    let cx = BasedChainComplex::new(dims, bds, vec![Vec::new(); top])?;
    let homology = (0..top).map(|k| homology_basis(&cx, k, RANK_RTOL)).collect();
    Ok(BasedChainComplex { homology, ..cx })
}

/// Seeded short exact sequence `0 -> E -> F -> G -> 0` with `F` a direct sum
/// in a random basis of determinant 1, so the lifted bases satisfy the `+-1`
/// condition. `F` carries its own homology lifts.
pub fn random_short_exact_sequence(seed: u64) -> Result<ShortExactSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pick = |rng: &mut ChaCha8Rng| -> (Vec<usize>, Vec<usize>) {
        let ranks = vec![rng.gen_range(0..3), rng.gen_range(0..3)];
        let betti = vec![rng.gen_range(0..2), rng.gen_range(0..2), rng.gen_range(0..2)];
        (ranks, betti)
    };
    let (re, be) = pick(&mut rng);
    let (rg, bg) = pick(&mut rng);
    let e = random_based_complex(&mut rng, &re, &be)?;
    let g = random_based_complex(&mut rng, &rg, &bg)?;
    let top = e.dims.len();
    let mut f_maps = Vec::new();
    let mut g_maps = Vec::new();
    let mut a_inv = Vec::new();
    let mut a_all = Vec::new();
    for k in 0..top {
        let (ne, ng) = (e.dims[k], g.dims[k]);
        let a = random_unimodular(&mut rng, ne + ng);
        let inc = ComplexMatrix::from_fn(ne + ng, ne, |i, j| if i == j { ONE } else { ZERO });
        let proj = ComplexMatrix::from_fn(ng, ne + ng, |i, j| if j == ne + i { ONE } else { ZERO });
        let ai = inverse_or_empty(&a)?;
        f_maps.push(&a * &inc);
        g_maps.push(&proj * &ai);
        a_inv.push(ai);
        a_all.push(a);
    }
    let mut bds = Vec::new();
    for k in 0..top - 1 {
        let (ne0, ng0, ne1, ng1) = (e.dims[k], g.dims[k], e.dims[k + 1], g.dims[k + 1]);
        let mut d = ComplexMatrix::zeros(ne0 + ng0, ne1 + ng1);
        d.set_block(0, 0, &e.boundaries[k]);
        d.set_block(ne0, ne1, &g.boundaries[k]);
        bds.push(&(&a_all[k] * &d) * &a_inv[k + 1]);
    }
    let dims: Vec<usize> = (0..top).map(|k| e.dims[k] + g.dims[k]).collect();
    let f0 = BasedChainComplex::new(dims, bds, vec![Vec::new(); top])?;
    let homology = (0..top).map(|k| homology_basis(&f0, k, RANK_RTOL)).collect();
    let f = BasedChainComplex { homology, ..f0 };
    Ok(ShortExactSequence { e, f, g, f_maps, g_maps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_complex(lambda: C64) -> BasedChainComplex {
        BasedChainComplex::new(
            vec![1, 1],
            vec![ComplexMatrix::from_rows(&[vec![lambda]])],
            vec![Vec::new(), Vec::new()],
        )
        .unwrap()
    }

    #[test]
    fn one_by_one() {
        let t = chain_torsion(&scalar_complex(C64::new(3.0, 0.0))).unwrap();
        assert!(t.eq_mod_sign(&TorsionValue(C64::new(1.0 / 3.0, 0.0)), 1e-15));
        let t = exact_sequence_torsion(&scalar_complex(ONE)).unwrap();
        assert!(t.eq_mod_sign(&TorsionValue(ONE), 1e-15));
    }

    #[test]
    fn non_acyclic_rejected() {
        let cx = scalar_complex(ZERO);
        assert!(matches!(exact_sequence_torsion(&cx), Err(Error::NotAcyclic(_))));
    }

    #[test]
    fn random_sequences_are_multiplicative() {
        for seed in 0..20 {
            let ses = random_short_exact_sequence(seed).unwrap();
            let r = check_multiplicativity(&ses, 1e-9).unwrap();
            assert!(r.residual < 1e-9, "seed {seed}: {r:?}");
        }
    }

    #[test]
    fn trivial_twist() {
        let id = ComplexMatrix::identity(3);
        let spine = Spine {
            edges: vec![id.clone(), id.clone(), id],
        };
        let cx = twisted_graph_complex(&spine, Vec::new()).unwrap();
        assert_eq!(cx.boundaries[0].rank(RANK_RTOL), 3);
        assert_eq!(homology_basis(&cx, 0, RANK_RTOL).len(), 3);
        assert_eq!(homology_basis(&cx, 1, RANK_RTOL).len(), 6);
    }
}
