//! Gram matrices of truncated hyperideal tetrahedra and the angle/length conversions.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hyptrig::arccosh;
use crate::linalg::{ComplexMatrix, C64, I};

/// Edge labels in storage order.
pub const PAIRS: [(usize, usize); 6] = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)];

/// Storage index of the edge joining vertices `j` and `k` (1-based, any order).
pub fn pair_index(j: usize, k: usize) -> usize {
    let key = (j.min(k), j.max(k));
    PAIRS
        .iter()
        .position(|&p| p == key)
        .unwrap_or_else(|| panic!("no edge {j}{k}"))
}

/// The two vertices not in `{j, k}`, ascending.
pub fn complement(j: usize, k: usize) -> (usize, usize) {
    let mut rest = (1..=4).filter(|&v| v != j && v != k);
    (rest.next().unwrap(), rest.next().unwrap())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShapeKind {
    Angles,
    Lengths,
    Mixed,
}

/// Six complex edge parameters of a tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TetShape {
    pub u: [C64; 6],
    pub kind: ShapeKind,
}

impl TetShape {
    /// Angle shape with `u = i alpha`.
    pub fn from_angles(alpha: [f64; 6]) -> Self {
        Self {
            u: alpha.map(|a| I * a),
            kind: ShapeKind::Angles,
        }
    }

    /// Length shape with `u = l`.
    pub fn from_lengths(l: [f64; 6]) -> Self {
        Self {
            u: l.map(|x| C64::new(x, 0.0)),
            kind: ShapeKind::Lengths,
        }
    }

    pub fn mixed(u: [C64; 6]) -> Self {
        Self {
            u,
            kind: ShapeKind::Mixed,
        }
    }

    /// Dihedral angles `alpha = Im u`.
    pub fn angles(&self) -> [f64; 6] {
        self.u.map(|z| z.im)
    }

    /// Edge lengths `l = Re u`.
    pub fn lengths(&self) -> [f64; 6] {
        self.u.map(|z| z.re)
    }

    pub fn get(&self, j: usize, k: usize) -> C64 {
        self.u[pair_index(j, k)]
    }
}

/// Symmetric 4x4 matrix with unit diagonal and entries `-cosh u_jk`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix(pub ComplexMatrix);

impl GramMatrix {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn det(&self) -> C64 {
        self.0.det()
    }

    /// Signed cofactor `(-1)^{s+t} det(minor_st)`, 1-based indices.
    pub fn cofactor(&self, s: usize, t: usize) -> Result<C64> {
        if !(1..=4).contains(&s) || !(1..=4).contains(&t) {
            return Err(Error::Index(format!("cofactor ({s},{t})")));
        }
        let rows: Vec<usize> = (0..4).filter(|&r| r != s - 1).collect();
        let cols: Vec<usize> = (0..4).filter(|&c| c != t - 1).collect();
        let minor = self.0.select_rows(&rows).select_columns(&cols).det();
        Ok(if (s + t).is_multiple_of(2) { minor } else { -minor })
    }
}

pub fn gram(shape: &TetShape) -> GramMatrix {
    let mut m = ComplexMatrix::identity(4);
    for (idx, &(j, k)) in PAIRS.iter().enumerate() {
        let v = -shape.u[idx].cosh();
        m[(j - 1, k - 1)] = v;
        m[(k - 1, j - 1)] = v;
    }
    GramMatrix(m)
}

pub fn gram_cofactor(g: &GramMatrix, s: usize, t: usize) -> Result<C64> {
    g.cofactor(s, t)
}

/// Real cofactor ratio `G^{st} / sqrt(G^{ss} G^{tt})` for the edge `jk`.
fn cofactor_ratio(g: &GramMatrix, j: usize, k: usize) -> Result<f64> {
    let (s, t) = complement(j, k);
    let gst = g.cofactor(s, t)?;
    let gss = g.cofactor(s, s)?;
    let gtt = g.cofactor(t, t)?;
    let scale = gst.norm().max(gss.norm()).max(gtt.norm()).max(1.0);
    for z in [gst, gss, gtt] {
        if z.im.abs() > 1e-9 * scale {
            return Err(Error::InvalidShape(format!("complex cofactor at edge {j}{k}")));
        }
    }
    let prod = gss.re * gtt.re;
    if prod <= 0.0 {
        return Err(Error::InvalidShape(format!(
            "cofactor product {prod} not positive at edge {j}{k}"
        )));
    }
    Ok(gst.re / prod.sqrt())
}

/// Edge lengths of the truncated tetrahedron with the given dihedral angles.
pub fn lengths_from_angles(shape: &TetShape) -> Result<TetShape> {
    if shape.kind != ShapeKind::Angles {
        return Err(Error::InvalidShape("expected an angle shape".into()));
    }
    let v = validate_hyperideal(shape);
    if !v.valid {
        return Err(Error::InvalidShape(v.diagnostics.join("; ")));
    }
    let g = gram(shape);
    let mut l = [0.0; 6];
    for (idx, &(j, k)) in PAIRS.iter().enumerate() {
        let x = cofactor_ratio(&g, j, k)?;
        if x < 1.0 - crate::hyptrig::ACOSH_CLAMP {
            return Err(Error::InvalidShape(format!("cosh l_{j}{k} = {x} < 1")));
        }
        l[idx] = arccosh(x)?;
        if l[idx] <= 0.0 {
            return Err(Error::InvalidShape(format!("degenerate edge {j}{k}")));
        }
    }
    Ok(TetShape::from_lengths(l))
}

/// Dihedral angles of the truncated tetrahedron with the given edge lengths.
pub fn angles_from_lengths(shape: &TetShape) -> Result<TetShape> {
    if shape.kind != ShapeKind::Lengths {
        return Err(Error::InvalidShape("expected a length shape".into()));
    }
    for (idx, l) in shape.lengths().iter().enumerate() {
        let (j, k) = PAIRS[idx];
        if !(*l > 0.0 && l.is_finite()) || shape.u[idx].im != 0.0 {
            return Err(Error::InvalidShape(format!("length l_{j}{k} = {l} is not positive")));
        }
    }
    let g = gram(shape);
    let mut a = [0.0; 6];
    for (idx, &(j, k)) in PAIRS.iter().enumerate() {
        let x = cofactor_ratio(&g, j, k)?;
        if !(-1.0..=1.0).contains(&x) {
            return Err(Error::InvalidShape(format!("cos alpha_{j}{k} = {x} outside [-1, 1]")));
        }
        a[idx] = x.acos();
        if !(a[idx] > 0.0 && a[idx] < PI) {
            return Err(Error::InvalidShape(format!("degenerate angle at edge {j}{k}")));
        }
    }
    Ok(TetShape::from_angles(a))
}

/// Outcome of the hyperideal validity test.
#[derive(Clone, Debug, PartialEq)]
pub struct Validity {
    pub valid: bool,
    pub failing_vertices: Vec<usize>,
    pub diagnostics: Vec<String>,
}

/// Every angle in `(0, pi)` and every vertex angle sum below `pi`.
pub fn validate_hyperideal(shape: &TetShape) -> Validity {
    let mut diagnostics = Vec::new();
    let mut failing_vertices = Vec::new();
    if shape.kind != ShapeKind::Angles {
        diagnostics.push("shape is not an angle shape".to_string());
    }
    let a = shape.angles();
    for (idx, &(j, k)) in PAIRS.iter().enumerate() {
        if !(a[idx] > 0.0 && a[idx] < PI) || shape.u[idx].re != 0.0 {
            diagnostics.push(format!("alpha_{j}{k} = {} outside (0, pi)", a[idx]));
        }
    }
    for v in 1..=4 {
        let sum: f64 = (1..=4).filter(|&w| w != v).map(|w| a[pair_index(v, w)]).sum();
        if sum >= PI {
            failing_vertices.push(v);
            diagnostics.push(format!("vertex {v}: angle sum {sum} >= pi"));
        }
    }
    Validity {
        valid: diagnostics.is_empty(),
        failing_vertices,
        diagnostics,
    }
}

/// Relabels every edge `jk` by its complementary pair `st`.
///
/// Angle shapes label an edge by the two hexagons it borders, length shapes by
/// the two truncation triangles it joins; this converts between the two.
pub fn relabel_complement(shape: &TetShape) -> TetShape {
    let mut u = shape.u;
    for (idx, &(j, k)) in PAIRS.iter().enumerate() {
        let (s, t) = complement(j, k);
        u[pair_index(s, t)] = shape.u[idx];
    }
    TetShape { u, kind: shape.kind }
}

/// Principal square root of `det G`.
pub fn sqrt_det(g: &GramMatrix) -> C64 {
    let d = g.det();
    C64::new(d.re, d.im + 0.0).sqrt()
}

/// Shape whose six parameters all equal `alpha` (angles).
pub fn regular_angles(alpha: f64) -> TetShape {
    TetShape::from_angles([alpha; 6])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn right_angles_give_identity() {
        let g = gram(&regular_angles(PI / 2.0));
        assert!((&g.0 - &ComplexMatrix::identity(4)).max_abs() < 1e-15);
    }

    #[test]
    fn zero_shape_det() {
        let g = gram(&TetShape::mixed([C64::new(0.0, 0.0); 6]));
        assert!((g.det() - C64::new(-16.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn regular_cofactors() {
        let g = gram(&regular_angles(PI / 4.0));
        let c = (PI / 4.0).cos();
        assert!((g.det().re - (1.0 + c).powi(3) * (1.0 - 3.0 * c)).abs() < 1e-12);
        assert!((g.det().re + 5.5784271).abs() < 1e-7);
        assert!((g.cofactor(1, 1).unwrap().re + 1.2071068).abs() < 1e-7);
        assert!((g.cofactor(1, 2).unwrap().re - 2.0606602).abs() < 1e-7);
        assert!(g.cofactor(0, 1).is_err());
    }

    #[test]
    fn validity_diagnostics() {
        assert!(validate_hyperideal(&regular_angles(PI / 4.0)).valid);
        assert!(!validate_hyperideal(&regular_angles(PI / 3.0)).valid);
        let v = validate_hyperideal(&TetShape::from_angles([2.8, 0.3, 0.3, 0.3, 0.3, 0.3]));
        assert_eq!(v.failing_vertices, vec![1, 2]);
    }
}
