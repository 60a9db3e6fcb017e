//! Hyperbolic trigonometry and the 2x2 matrix builders used for holonomies.

use std::f64::consts::PI;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::linalg::{C64, ONE, ZERO};

/// Default comparison tolerance.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Width of the band below 1 that `arccosh` clamps to 1.
pub const ACOSH_CLAMP: f64 = 1e-12;

/// `|a - b| <= tol * max(1, |a|)`.
pub fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(1.0)
}

/// 2x2 complex matrix `[[a, b], [c, d]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoMatrix {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl TwoMatrix {
    pub const IDENTITY: TwoMatrix = TwoMatrix {
        a: ONE,
        b: ZERO,
        c: ZERO,
        d: ONE,
    };

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    /// Inverse; exact adjugate form for unimodular matrices.
    pub fn inv(&self) -> Self {
        let det = self.det();
        Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Max-entry distance to `other`.
    pub fn dist(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry distance to `other` modulo sign.
    pub fn dist_mod_sign(&self, other: &Self) -> f64 {
        self.dist(other).min(self.dist(&other.neg()))
    }
}

impl Mul for TwoMatrix {
    type Output = TwoMatrix;
    fn mul(self, r: TwoMatrix) -> TwoMatrix {
        TwoMatrix::new(
            self.a * r.a + self.b * r.c,
            self.a * r.b + self.b * r.d,
            self.c * r.a + self.d * r.c,
            self.c * r.b + self.d * r.d,
        )
    }
}

/// Product of a sequence of matrices, left to right.
pub fn product(ms: &[TwoMatrix]) -> TwoMatrix {
    ms.iter().fold(TwoMatrix::IDENTITY, |acc, m| acc * *m)
}

/// `diag(e^{z/2}, e^{-z/2})`.
pub fn dz(z: C64) -> TwoMatrix {
    let h = (z / 2.0).exp();
    TwoMatrix::new(h, ZERO, ZERO, ONE / h)
}

/// `[[cosh(s/2), sinh(s/2)], [sinh(s/2), cosh(s/2)]]`.
pub fn ss(s: C64) -> TwoMatrix {
    let ch = (s / 2.0).cosh();
    let sh = (s / 2.0).sinh();
    TwoMatrix::new(ch, sh, sh, ch)
}

/// Real arccosh with a clamp band just below 1.
pub fn arccosh(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("arccosh of non-finite {x}")));
    }
    if x >= 1.0 {
        Ok(x.acosh())
    } else if x >= 1.0 - ACOSH_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Domain(format!("arccosh argument {x} < 1")))
    }
}

/// Side of a hyperbolic triangle opposite `alpha_opposite`, from its three angles.
pub fn triangle_side(alpha_opposite: f64, alpha_adj1: f64, alpha_adj2: f64) -> Result<f64> {
    for a in [alpha_opposite, alpha_adj1, alpha_adj2] {
        if !(a > 0.0 && a < PI) {
            return Err(Error::Domain(format!("angle {a} outside (0, pi)")));
        }
    }
    let sum = alpha_opposite + alpha_adj1 + alpha_adj2;
    if sum >= PI {
        return Err(Error::Domain(format!("angle sum {sum} >= pi")));
    }
    let x = (alpha_opposite.cos() + alpha_adj1.cos() * alpha_adj2.cos())
        / (alpha_adj1.sin() * alpha_adj2.sin());
    arccosh(x)
}

/// Side of a right-angled hexagon opposite `l_opposite`, from the alternate sides.
pub fn hexagon_side(l_opposite: f64, l_adj1: f64, l_adj2: f64) -> Result<f64> {
    for l in [l_opposite, l_adj1, l_adj2] {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::Domain(format!("length {l} is not positive")));
        }
    }
    let x = (l_opposite.cosh() + l_adj1.cosh() * l_adj2.cosh()) / (l_adj1.sinh() * l_adj2.sinh());
    arccosh(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_at_zero_are_identity() {
        assert_eq!(dz(ZERO), TwoMatrix::IDENTITY);
        assert_eq!(ss(ZERO), TwoMatrix::IDENTITY);
    }

    #[test]
    fn ss_one() {
        let m = ss(C64::new(1.0, 0.0));
        assert!((m.a.re - 1.1276260).abs() < 1e-7);
        assert!((m.b.re - 0.5210953).abs() < 1e-7);
    }

    #[test]
    fn regular_triangle_side() {
        let q = PI / 4.0;
        let s = triangle_side(q, q, q).unwrap();
        assert!((s - 1.5285709).abs() < 1e-7);
        assert!((s.cosh() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!(triangle_side(PI / 2.0, q, q).is_err());
    }

    #[test]
    fn unit_hexagon_side() {
        let s = hexagon_side(1.0, 1.0, 1.0).unwrap();
        assert!((s.cosh() - 1f64.cosh() / (1f64.cosh() - 1.0)).abs() < 1e-12);
        assert!((s - 1.7049128).abs() < 1e-7);
        assert!(hexagon_side(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn arccosh_clamp_band() {
        assert_eq!(arccosh(1.0 - 1e-13).unwrap(), 0.0);
        assert!(arccosh(1.0 - 1e-9).is_err());
    }
}
