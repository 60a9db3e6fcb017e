//! Seeded random valid geometries for sweeps and verification.

use std::f64::consts::PI;

use rand::Rng;

use crate::gram::{pair_index, TetShape};
use crate::rep::{BlockGeometry, PantsGeometry};

/// Margin kept from the boundary of the valid domain.
const MARGIN: f64 = 0.1;

/// Dihedral angles with every vertex sum below `pi - MARGIN` and valid derived data.
pub fn angle_shape(rng: &mut impl Rng) -> TetShape {
    loop {
        let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(MARGIN..1.4));
        let ok = (1..=4).all(|v| {
            (1..=4)
                .filter(|&w| w != v)
                .map(|w| a[pair_index(v, w)])
                .sum::<f64>()
                < PI - MARGIN
        });
        if ok && BlockGeometry::fsl(a).data().is_ok() {
            return TetShape::from_angles(a);
        }
    }
}

/// Edge lengths whose dual block has valid derived data.
pub fn length_shape(rng: &mut impl Rng) -> TetShape {
    loop {
        let l: [f64; 6] = std::array::from_fn(|_| rng.gen_range(0.3..2.2));
        let ok = BlockGeometry::dual(l)
            .data()
            .is_ok_and(|d| d.angles.iter().all(|&a| a > MARGIN && a < PI - MARGIN));
        if ok {
            return TetShape::from_lengths(l);
        }
    }
}

pub fn fsl_block(rng: &mut impl Rng) -> BlockGeometry {
    BlockGeometry::fsl(angle_shape(rng).angles())
}

pub fn dual_block(rng: &mut impl Rng) -> BlockGeometry {
    BlockGeometry::dual(length_shape(rng).lengths())
}

pub fn cone_pants(rng: &mut impl Rng) -> PantsGeometry {
    loop {
        let a: [f64; 3] = std::array::from_fn(|_| rng.gen_range(MARGIN..1.4));
        if a.iter().sum::<f64>() < PI - MARGIN {
            return PantsGeometry::cone(a);
        }
    }
}

pub fn boundary_pants(rng: &mut impl Rng) -> PantsGeometry {
    PantsGeometry::boundary(std::array::from_fn(|_| rng.gen_range(0.1..2.5)))
}
