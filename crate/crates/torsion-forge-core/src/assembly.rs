//! Gluing of blocks along pants, Mayer-Vietoris assembly of the torsion,
//! change of peripheral curves and Dehn filling.

use std::collections::{HashMap, HashSet};
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::blocks::{dblock_direct_scaled, pants_direct_scaled};
use crate::error::{Error, Result};
use crate::gram::{self, pair_index, TetShape, PAIRS};
use crate::linalg::{ComplexMatrix, C64, I, ONE};
use crate::par;
use crate::rep::{BlockData, BlockGeometry, PantsGeometry};
use crate::torsion::{exact_sequence_torsion, BasedChainComplex, TorsionValue};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ManifoldKind {
    /// Fundamental shadow link complement built from D-blocks.
    Fsl,
    /// Double of a polyhedral manifold built from dual D-blocks.
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PieceKind {
    DBlock,
    DualDBlock,
    ThickenedPants,
}

/// `(piece, face)` to `(interface, (other piece, other face))`.
type FaceMap = HashMap<(usize, usize), (usize, (usize, usize))>;

const BLOCK_SLOTS: [usize; 6] = [12, 13, 14, 23, 24, 34];
const PANTS_SLOTS: [usize; 3] = [1, 2, 3];

fn digits(slot: usize) -> (usize, usize) {
    (slot / 10, slot % 10)
}

/// Edge label `jk` of a block slot.
pub fn slot_edge(slot: usize) -> (usize, usize) {
    digits(slot)
}

impl PieceKind {
    /// Slot labels: `12, ..., 34` for blocks and `1, 2, 3` for thickened pants.
    pub fn slots(self) -> &'static [usize] {
        match self {
            PieceKind::ThickenedPants => &PANTS_SLOTS,
            _ => &BLOCK_SLOTS,
        }
    }

    pub fn faces(self) -> &'static [usize] {
        match self {
            PieceKind::ThickenedPants => &[1, 2],
            _ => &[1, 2, 3, 4],
        }
    }

    pub fn has_slot(self, slot: usize) -> bool {
        self.slots().contains(&slot)
    }

    /// The two faces whose pants contain `slot`.
    pub fn slot_faces(self, slot: usize) -> [usize; 2] {
        let (j, k) = digits(slot);
        match self {
            PieceKind::DBlock => [j, k],
            PieceKind::DualDBlock => {
                let (m, n) = gram::complement(j, k);
                [m, n]
            }
            PieceKind::ThickenedPants => [1, 2],
        }
    }

    /// Slots on `face`, ascending.
    pub fn face_slots(self, face: usize) -> Vec<usize> {
        self.slots()
            .iter()
            .copied()
            .filter(|&s| self.slot_faces(s).contains(&face))
            .collect()
    }

    pub fn is_block(self) -> bool {
        self != PieceKind::ThickenedPants
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Piece {
    pub id: usize,
    pub kind: PieceKind,
    /// Optional inline edge parameters in `PAIRS` order.
    pub u: Option<[C64; 6]>,
}

/// A pair of pants identifying a face of one piece with a face of another.
#[derive(Clone, Debug, PartialEq)]
pub struct Interface {
    pub id: usize,
    /// `(piece id, face)`.
    pub left: (usize, usize),
    pub right: (usize, usize),
}

/// A boundary torus and the cyclic sequence of piece slots it runs through.
#[derive(Clone, Debug, PartialEq)]
pub struct Torus {
    pub id: usize,
    /// `(piece id, slot)` in traversal order.
    pub traversal: Vec<(usize, usize)>,
    /// Half cone angle `alpha` (fsl) or edge length `l` (doubles).
    pub value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GluingGraph {
    pub kind: ManifoldKind,
    pub blocks: Vec<Piece>,
    pub interfaces: Vec<Interface>,
    pub tori: Vec<Torus>,
}

/// One passage of a torus through an interface pants.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Crossing {
    pub interface: usize,
    pub torus: usize,
    /// `(piece index, slot)` before and after the interface.
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// Faces of `from` and `to` lying in the interface.
    pub faces: (usize, usize),
}

/// Combinatorics derived from a validated graph. Pieces, interfaces and tori
/// are referred to by position.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub d: usize,
    pub c: usize,
    pub p: usize,
    pub n: usize,
    /// Crossings `3i, 3i+1, 3i+2` belong to interface `i`.
    pub crossings: Vec<Crossing>,
    /// Crossing indices of each torus in traversal order.
    pub torus_crossings: Vec<Vec<usize>>,
    /// Torus of each `(piece index, slot)`.
    pub component: HashMap<(usize, usize), usize>,
    /// First basis index of each piece in the direct sum of piece homologies.
    pub slot_offset: Vec<usize>,
}

impl Layout {
    pub fn slot_index(&self, kinds: &[PieceKind], piece: usize, slot: usize) -> usize {
        let pos = kinds[piece].slots().iter().position(|&s| s == slot).unwrap();
        self.slot_offset[piece] + pos
    }
}

fn gluing(msg: impl Into<String>) -> Error {
    Error::Gluing(msg.into())
}

impl GluingGraph {
    pub fn piece_kinds(&self) -> Vec<PieceKind> {
        self.blocks.iter().map(|b| b.kind).collect()
    }

    fn piece_index(&self) -> Result<HashMap<usize, usize>> {
        let mut idx = HashMap::new();
        for (i, b) in self.blocks.iter().enumerate() {
            if idx.insert(b.id, i).is_some() {
                return Err(gluing(format!("duplicate block id {}", b.id)));
            }
        }
        Ok(idx)
    }

    /// Checks every structural invariant and derives the interface crossings.
    pub fn validate(&self) -> Result<Layout> {
        let expected = match self.kind {
            ManifoldKind::Fsl => PieceKind::DBlock,
            ManifoldKind::Double => PieceKind::DualDBlock,
        };
        for b in &self.blocks {
            if b.kind.is_block() && b.kind != expected {
                return Err(gluing(format!("block {} has kind {:?} in a {:?} manifold", b.id, b.kind, self.kind)));
            }
        }
        let idx = self.piece_index()?;
        let d = self.blocks.iter().filter(|b| b.kind.is_block()).count();
        let c = self.blocks.len() - d;
        let p = self.interfaces.len();
        let n = self.tori.len();
        if d == 0 {
            return Err(gluing("no D-block in the decomposition"));
        }
        if p != c + 2 * d {
            return Err(gluing(format!("p = c + 2d violated: p = {p}, c = {c}, d = {d}")));
        }
        let mut ids = HashSet::new();
        if !self.interfaces.iter().all(|f| ids.insert(f.id)) {
            return Err(gluing("duplicate interface id"));
        }
        ids.clear();
        if !self.tori.iter().all(|t| ids.insert(t.id)) {
            return Err(gluing("duplicate torus id"));
        }

        let mut face_map: FaceMap = HashMap::new();
        for (i, f) in self.interfaces.iter().enumerate() {
            let mut ends = [(0, 0); 2];
            for (e, &(bid, face)) in [f.left, f.right].iter().enumerate() {
                let b = *idx
                    .get(&bid)
                    .ok_or_else(|| gluing(format!("interface {} refers to unknown block {bid}", f.id)))?;
                if !self.blocks[b].kind.faces().contains(&face) {
                    return Err(gluing(format!("interface {}: block {bid} has no face {face}", f.id)));
                }
                ends[e] = (b, face);
            }
            if ends[0].0 == ends[1].0 {
                return Err(gluing(format!(
                    "interface {} glues block {} to itself; insert a thickened pants",
                    f.id, f.left.0
                )));
            }
            for e in 0..2 {
                if face_map.insert(ends[e], (i, ends[1 - e])).is_some() {
                    let (b, face) = ends[e];
                    return Err(gluing(format!("face {face} of block {} lies in two interfaces", self.blocks[b].id)));
                }
            }
        }
        for (b, piece) in self.blocks.iter().enumerate() {
            for &face in piece.kind.faces() {
                if !face_map.contains_key(&(b, face)) {
                    return Err(gluing(format!("face {face} of block {} lies in no interface", piece.id)));
                }
            }
        }

        let mut component = HashMap::new();
        for (t, torus) in self.tori.iter().enumerate() {
            if torus.traversal.is_empty() {
                return Err(gluing(format!("torus {} has an empty traversal", torus.id)));
            }
            for &(bid, slot) in &torus.traversal {
                let b = *idx
                    .get(&bid)
                    .ok_or_else(|| gluing(format!("torus {} refers to unknown block {bid}", torus.id)))?;
                if !self.blocks[b].kind.has_slot(slot) {
                    return Err(gluing(format!("torus {}: block {bid} has no slot {slot}", torus.id)));
                }
                if component.insert((b, slot), t).is_some() {
                    return Err(gluing(format!("slot {slot} of block {bid} lies in two tori")));
                }
            }
        }
        for (b, piece) in self.blocks.iter().enumerate() {
            for &slot in piece.kind.slots() {
                if !component.contains_key(&(b, slot)) {
                    return Err(gluing(format!("slot {slot} of block {} lies in no torus", piece.id)));
                }
            }
        }

        let mut per_interface: Vec<Vec<Crossing>> = vec![Vec::new(); p];
        let mut used = HashSet::new();
        for (t, torus) in self.tori.iter().enumerate() {
            let entries: Vec<(usize, usize)> = torus.traversal.iter().map(|&(bid, s)| (idx[&bid], s)).collect();
            let walk = self
                .walk(&entries, &face_map, t)
                .ok_or_else(|| gluing(format!("traversal of torus {} does not follow the interfaces", torus.id)))?;
            for x in walk {
                let out = (x.from.0, x.faces.0, x.from.1);
                let inn = (x.to.0, x.faces.1, x.to.1);
                if !used.insert(out) || !used.insert(inn) {
                    return Err(gluing(format!("torus {} crosses a pants circle twice", torus.id)));
                }
                per_interface[x.interface].push(x);
            }
        }
        let mut crossings = Vec::with_capacity(3 * p);
        for (i, mut xs) in per_interface.into_iter().enumerate() {
            if xs.len() != 3 {
                return Err(gluing(format!(
                    "interface {} is crossed {} times, expected 3",
                    self.interfaces[i].id,
                    xs.len()
                )));
            }
            xs.sort_by_key(|x| (x.from.0.min(x.to.0), if x.from.0 < x.to.0 { x.from.1 } else { x.to.1 }));
            crossings.extend(xs);
        }
        let mut torus_crossings = vec![Vec::new(); n];
        let mut order: Vec<(usize, usize, usize)> = Vec::new();
        for (k, x) in crossings.iter().enumerate() {
            let pos = self.tori[x.torus]
                .traversal
                .iter()
                .position(|&(bid, s)| idx[&bid] == x.from.0 && s == x.from.1)
                .unwrap();
            order.push((x.torus, pos, k));
        }
        order.sort_unstable();
        for (t, _, k) in order {
            torus_crossings[t].push(k);
        }
        let mut slot_offset = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            slot_offset.push(acc);
            acc += b.kind.slots().len();
        }
        Ok(Layout {
            d,
            c,
            p,
            n,
            crossings,
            torus_crossings,
            component,
            slot_offset,
        })
    }

    /// Follows a traversal through the interfaces, trying both starting faces.
    fn walk(
        &self,
        entries: &[(usize, usize)],
        face_map: &FaceMap,
        torus: usize,
    ) -> Option<Vec<Crossing>> {
        let m = entries.len();
        let (b0, s0) = entries[0];
        'start: for &f0 in &self.blocks[b0].kind.slot_faces(s0) {
            let mut entry = f0;
            let mut out = Vec::with_capacity(m);
            for k in 0..m {
                let (b, s) = entries[k];
                let faces = self.blocks[b].kind.slot_faces(s);
                let exit = if faces[0] == entry { faces[1] } else { faces[0] };
                let &(iface, (b2, f2)) = face_map.get(&(b, exit))?;
                let next = entries[(k + 1) % m];
                if next.0 != b2 || !self.blocks[b2].kind.slot_faces(next.1).contains(&f2) {
                    continue 'start;
                }
                out.push(Crossing {
                    interface: iface,
                    torus,
                    from: (b, s),
                    to: next,
                    faces: (exit, f2),
                });
                entry = f2;
            }
            if entry == f0 {
                return Some(out);
            }
        }
        None
    }

    /// Copy with the given per-torus values.
    pub fn with_values(&self, values: &[f64]) -> GluingGraph {
        let mut g = self.clone();
        for (t, v) in g.tori.iter_mut().zip(values) {
            t.value = Some(*v);
        }
        g
    }

    /// Random reordering and renumbering of blocks, interfaces and tori,
    /// with interface sides swapped and traversals rotated at random.
    pub fn relabeled(&self, seed: u64) -> GluingGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = self.clone();
        let mut ids: Vec<usize> = (0..g.blocks.len()).map(|i| 100 + i).collect();
        ids.shuffle(&mut rng);
        let remap: HashMap<usize, usize> = g.blocks.iter().map(|b| b.id).zip(ids.iter().copied()).collect();
        for b in &mut g.blocks {
            b.id = remap[&b.id];
        }
        g.blocks.shuffle(&mut rng);
        for f in &mut g.interfaces {
            f.left.0 = remap[&f.left.0];
            f.right.0 = remap[&f.right.0];
            if rng.gen_bool(0.5) {
                std::mem::swap(&mut f.left, &mut f.right);
            }
        }
        g.interfaces.shuffle(&mut rng);
        for (i, f) in g.interfaces.iter_mut().enumerate() {
            f.id = 10 * i + 7;
        }
        for t in &mut g.tori {
            for e in &mut t.traversal {
                e.0 = remap[&e.0];
            }
            let r = rng.gen_range(0..t.traversal.len());
            t.traversal.rotate_left(r);
        }
        g.tori.shuffle(&mut rng);
        for (i, t) in g.tori.iter_mut().enumerate() {
            t.id = 3 * i + 1;
        }
        g
    }
}

/// Identification of a face of one block with a face of another (or the
/// same) block, mapping each slot of the first face to a slot of the second.
#[derive(Clone, Debug, PartialEq)]
pub struct FacePairing {
    /// `(block index, face)`.
    pub a: (usize, usize),
    pub b: (usize, usize),
    pub slot_map: [(usize, usize); 3],
}

/// Builds a gluing graph of `d` blocks from face pairings, inserting a
/// thickened pants wherever a block is glued to itself, and traces the tori.
pub fn from_face_pairings(kind: ManifoldKind, d: usize, pairings: &[FacePairing]) -> Result<GluingGraph> {
    let bkind = match kind {
        ManifoldKind::Fsl => PieceKind::DBlock,
        ManifoldKind::Double => PieceKind::DualDBlock,
    };
    let mut blocks: Vec<Piece> = (0..d)
        .map(|id| Piece {
            id,
            kind: bkind,
            u: None,
        })
        .collect();
    let mut interfaces = Vec::new();
    type Glue = HashMap<(usize, usize), ((usize, usize), HashMap<usize, usize>)>;
    let mut glue: Glue = HashMap::new();
    let link = |glue: &mut Glue, x: (usize, usize), y: (usize, usize), map: &[(usize, usize)]| -> Result<()> {
        let fwd: HashMap<usize, usize> = map.iter().copied().collect();
        let bwd: HashMap<usize, usize> = map.iter().map(|&(s, t)| (t, s)).collect();
        if glue.insert(x, (y, fwd)).is_some() || glue.insert(y, (x, bwd)).is_some() {
            return Err(gluing(format!("face {x:?} or {y:?} paired twice")));
        }
        Ok(())
    };
    for fp in pairings {
        for &(b, face) in &[fp.a, fp.b] {
            if b >= d || !bkind.faces().contains(&face) {
                return Err(gluing(format!("no face {face} on block {b}")));
            }
        }
        let (sa, sb) = (bkind.face_slots(fp.a.1), bkind.face_slots(fp.b.1));
        let mut lhs: Vec<usize> = fp.slot_map.iter().map(|m| m.0).collect();
        let mut rhs: Vec<usize> = fp.slot_map.iter().map(|m| m.1).collect();
        lhs.sort_unstable();
        rhs.sort_unstable();
        if lhs != sa || rhs != sb {
            return Err(gluing(format!("slot map {:?} is not a bijection {sa:?} -> {sb:?}", fp.slot_map)));
        }
        if fp.a.0 == fp.b.0 {
            let t = blocks.len();
            blocks.push(Piece {
                id: t,
                kind: PieceKind::ThickenedPants,
                u: None,
            });
            let into: Vec<(usize, usize)> = sa.iter().enumerate().map(|(k, &s)| (s, k + 1)).collect();
            let fwd: HashMap<usize, usize> = fp.slot_map.iter().copied().collect();
            let out: Vec<(usize, usize)> = sa.iter().enumerate().map(|(k, &s)| (k + 1, fwd[&s])).collect();
            link(&mut glue, fp.a, (t, 1), &into)?;
            link(&mut glue, (t, 2), fp.b, &out)?;
            interfaces.push((fp.a, (t, 1)));
            interfaces.push(((t, 2), fp.b));
        } else {
            link(&mut glue, fp.a, fp.b, &fp.slot_map)?;
            interfaces.push((fp.a, fp.b));
        }
    }
    let total: usize = blocks.iter().map(|b| b.kind.slots().len()).sum();
    let mut seen = HashSet::new();
    let mut tori = Vec::new();
    for b in 0..blocks.len() {
        for &s in blocks[b].kind.slots() {
            if seen.contains(&(b, s)) {
                continue;
            }
            let start_face = blocks[b].kind.slot_faces(s)[0];
            let (mut cb, mut cs, mut entry) = (b, s, start_face);
            let mut trav = Vec::new();
            loop {
                trav.push((cb, cs));
                seen.insert((cb, cs));
                let faces = blocks[cb].kind.slot_faces(cs);
                let exit = if faces[0] == entry { faces[1] } else { faces[0] };
                let ((nb, nf), map) = glue
                    .get(&(cb, exit))
                    .ok_or_else(|| gluing(format!("face {exit} of block {cb} is not paired")))?;
                cs = map[&cs];
                cb = *nb;
                entry = *nf;
                if (cb, cs) == (b, s) {
                    if entry != start_face {
                        return Err(gluing("orientation-reversing cycle"));
                    }
                    break;
                }
                if trav.len() > total {
                    return Err(gluing("torus trace does not close"));
                }
            }
            tori.push(Torus {
                id: tori.len(),
                traversal: trav,
                value: None,
            });
        }
    }
    let interfaces = interfaces
        .into_iter()
        .enumerate()
        .map(|(id, (left, right))| Interface { id, left, right })
        .collect();
    let g = GluingGraph {
        kind,
        blocks,
        interfaces,
        tori,
    };
    g.validate()?;
    Ok(g)
}

/// Per-torus geometric parameters: half cone angles `alpha_j` (fsl) or edge
/// lengths `l_j` (doubles).
#[derive(Clone, Debug, PartialEq)]
pub struct CharacterPoint {
    pub kind: ManifoldKind,
    pub params: Vec<f64>,
}

impl CharacterPoint {
    pub fn new(kind: ManifoldKind, params: Vec<f64>) -> Self {
        Self { kind, params }
    }

    /// Reads torus values, falling back to inline block parameters, and checks
    /// that all edges of one torus carry one value.
    pub fn from_graph(g: &GluingGraph) -> Result<Self> {
        let layout = g.validate()?;
        let mut params: Vec<Option<f64>> = g.tori.iter().map(|t| t.value).collect();
        for (b, piece) in g.blocks.iter().enumerate() {
            let Some(u) = piece.u else { continue };
            if !piece.kind.is_block() {
                return Err(gluing(format!("thickened pants {} carries edge parameters", piece.id)));
            }
            for (i, &(j, k)) in PAIRS.iter().enumerate() {
                let z = u[i];
                let v = match g.kind {
                    ManifoldKind::Fsl if z.re == 0.0 => z.im,
                    ManifoldKind::Double if z.im == 0.0 => z.re,
                    _ => {
                        return Err(Error::InvalidShape(format!(
                            "block {}: mixed edge parameter at {j}{k} is not supported",
                            piece.id
                        )))
                    }
                };
                let t = layout.component[&(b, 10 * j + k)];
                match params[t] {
                    None => params[t] = Some(v),
                    Some(w) if (w - v).abs() <= 1e-9 * w.abs().max(1.0) => {}
                    Some(w) => {
                        return Err(gluing(format!(
                            "torus {} carries two values {w} and {v}",
                            g.tori[t].id
                        )))
                    }
                }
            }
        }
        let params = params
            .into_iter()
            .enumerate()
            .map(|(t, v)| v.ok_or_else(|| gluing(format!("no value for torus {}", g.tori[t].id))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kind: g.kind, params })
    }
}

/// Geometry of every piece and interface at a character.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub blocks: Vec<Option<BlockGeometry>>,
    pub thickened: Vec<Option<PantsGeometry>>,
    pub interfaces: Vec<PantsGeometry>,
}

fn pants_of(kind: ManifoldKind, params: [f64; 3]) -> PantsGeometry {
    match kind {
        ManifoldKind::Fsl => PantsGeometry::cone(params),
        ManifoldKind::Double => PantsGeometry::boundary(params),
    }
}

pub fn geometry(g: &GluingGraph, layout: &Layout, chi: &CharacterPoint) -> Result<Geometry> {
    if chi.kind != g.kind {
        return Err(Error::InvalidShape("character and gluing graph are of different kinds".into()));
    }
    if chi.params.len() != layout.n {
        return Err(Error::Index(format!("{} torus values for {} tori", chi.params.len(), layout.n)));
    }
    let val = |b: usize, s: usize| chi.params[layout.component[&(b, s)]];
    let mut blocks = Vec::new();
    let mut thickened = Vec::new();
    for (b, piece) in g.blocks.iter().enumerate() {
        match piece.kind {
            PieceKind::ThickenedPants => {
                blocks.push(None);
                thickened.push(Some(pants_of(g.kind, [val(b, 1), val(b, 2), val(b, 3)])));
            }
            kind => {
                let v = BLOCK_SLOTS.map(|s| val(b, s));
                let geom = if kind == PieceKind::DBlock {
                    BlockGeometry::fsl(v)
                } else {
                    BlockGeometry::dual(v)
                };
                blocks.push(Some(geom));
                thickened.push(None);
            }
        }
    }
    let interfaces = (0..layout.p)
        .map(|i| {
            let x = &layout.crossings[3 * i..3 * i + 3];
            pants_of(g.kind, [x[0], x[1], x[2]].map(|c| chi.params[c.torus]))
        })
        .collect();
    Ok(Geometry {
        blocks,
        thickened,
        interfaces,
    })
}

/// Integer maps `delta`, `partial`, `epsilon` of the Mayer-Vietoris sequence
/// `H_2(M) -> (+) H_1(P_j) -> (+) H_1(D_k) -> H_1(M)`, placed in degrees 3..0.
pub fn mv_matrices(g: &GluingGraph) -> Result<BasedChainComplex> {
    let layout = g.validate()?;
    mv_matrices_for(g, &layout)
}

pub fn mv_matrices_for(g: &GluingGraph, layout: &Layout) -> Result<BasedChainComplex> {
    let kinds = g.piece_kinds();
    let n = layout.n;
    let np = 3 * layout.p;
    let nd: usize = kinds.iter().map(|k| k.slots().len()).sum();
    let one = ONE;
    let mut eps = ComplexMatrix::zeros(n, nd);
    for (&(b, s), &t) in &layout.component {
        eps[(t, layout.slot_index(&kinds, b, s))] = one;
    }
    let sigma = |x: &Crossing, end: (usize, usize)| -> f64 {
        let other = if end == x.from { x.to.0 } else { x.from.0 };
        if end.0 < other {
            1.0
        } else {
            -1.0
        }
    };
    let mut delta = ComplexMatrix::zeros(nd, np);
    for (k, x) in layout.crossings.iter().enumerate() {
        for end in [x.from, x.to] {
            delta[(layout.slot_index(&kinds, end.0, end.1), k)] = C64::new(sigma(x, end), 0.0);
        }
    }
    let mut partial = ComplexMatrix::zeros(np, n);
    for (t, xs) in layout.torus_crossings.iter().enumerate() {
        let m = xs.len();
        let mut y = 1.0;
        partial[(xs[0], t)] = C64::new(y, 0.0);
        for k in 0..m {
            let (a, b) = (&layout.crossings[xs[k]], &layout.crossings[xs[(k + 1) % m]]);
            if a.to != b.from {
                return Err(Error::Inconsistent(format!("crossings of torus {t} are not consecutive")));
            }
            y *= -sigma(a, a.to) * sigma(b, b.from);
            if k + 1 < m {
                partial[(xs[k + 1], t)] = C64::new(y, 0.0);
            } else if y != 1.0 {
                return Err(Error::Inconsistent(format!("sign rule does not close on torus {t}")));
            }
        }
    }
    BasedChainComplex::new(
        vec![n, nd, np, n],
        vec![eps, delta, partial],
        vec![Vec::new(); 4],
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AssemblyMethod {
    Closed,
    Mv,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssemblyReport {
    pub closed_form: Option<TorsionValue>,
    pub mv: Option<TorsionValue>,
    pub tor_h: Option<TorsionValue>,
    pub residual: Option<f64>,
    pub d: usize,
    pub c: usize,
    pub p: usize,
    pub n: usize,
}

/// `2^{3d} prod_k sqrt(det G_k)`.
pub fn closed_form(g: &GluingGraph, layout: &Layout, chi: &CharacterPoint) -> Result<TorsionValue> {
    let geom = geometry(g, layout, chi)?;
    let mut v = ONE;
    for b in geom.blocks.iter().flatten() {
        b.data()?;
        let shape = match g.kind {
            ManifoldKind::Fsl => TetShape::from_angles(b.shape.angles()),
            ManifoldKind::Double => TetShape::from_lengths(b.shape.lengths()),
        };
        v *= 8.0 * gram::sqrt_det(&gram::gram(&shape));
    }
    Ok(TorsionValue(v))
}

/// Mayer-Vietoris product with invariant vectors of torus `t` scaled by
/// `scales[t]` in every piece. Returns the torsion and `Tor(H)`.
pub fn mv_torsion(
    g: &GluingGraph,
    layout: &Layout,
    chi: &CharacterPoint,
    scales: &[C64],
) -> Result<(TorsionValue, TorsionValue)> {
    let geom = geometry(g, layout, chi)?;
    let sc = |b: usize, s: usize| scales[layout.component[&(b, s)]];
    let mut v = ONE;
    for (b, piece) in g.blocks.iter().enumerate() {
        let t = match piece.kind {
            PieceKind::ThickenedPants => {
                pants_direct_scaled(geom.thickened[b].as_ref().unwrap(), PANTS_SLOTS.map(|s| sc(b, s)))?
            }
            _ => dblock_direct_scaled(geom.blocks[b].as_ref().unwrap(), BLOCK_SLOTS.map(|s| sc(b, s)))?,
        };
        v *= t.0;
    }
    for (i, pg) in geom.interfaces.iter().enumerate() {
        let x = &layout.crossings[3 * i..3 * i + 3];
        let t = pants_direct_scaled(pg, [x[0], x[1], x[2]].map(|c| scales[c.torus]))?;
        v /= t.0;
    }
    let tor_h = exact_sequence_torsion(&mv_matrices_for(g, layout)?)?;
    Ok((TorsionValue(v / tor_h.0), tor_h))
}

pub fn assemble_torsion(g: &GluingGraph, chi: &CharacterPoint, method: AssemblyMethod) -> Result<AssemblyReport> {
    let layout = g.validate()?;
    let closed = matches!(method, AssemblyMethod::Closed | AssemblyMethod::Both)
        .then(|| closed_form(g, &layout, chi))
        .transpose()?;
    let (mv, tor_h) = if matches!(method, AssemblyMethod::Mv | AssemblyMethod::Both) {
        let (v, h) = mv_torsion(g, &layout, chi, &vec![ONE; layout.n])?;
        (Some(v), Some(h))
    } else {
        (None, None)
    };
    let residual = match (closed, mv) {
        (Some(a), Some(b)) => Some(a.distance(&b)),
        _ => None,
    };
    Ok(AssemblyReport {
        closed_form: closed,
        mv,
        tor_h,
        residual,
        d: layout.d,
        c: layout.c,
        p: layout.p,
        n: layout.n,
    })
}

/// Evaluates `assemble_torsion` at many characters, in parallel when enabled.
pub fn assemble_many(g: &GluingGraph, points: &[CharacterPoint], method: AssemblyMethod) -> Vec<Result<AssemblyReport>> {
    par::map_indexed(points.len(), |i| assemble_torsion(g, &points[i], method))
}

/// Sequential counterpart of [`assemble_many`].
pub fn assemble_many_seq(
    g: &GluingGraph,
    points: &[CharacterPoint],
    method: AssemblyMethod,
) -> Vec<Result<AssemblyReport>> {
    par::map_seq(points.len(), |i| assemble_torsion(g, &points[i], method))
}

fn block_data(g: &GluingGraph, layout: &Layout, chi: &CharacterPoint) -> Result<Vec<Option<BlockData>>> {
    geometry(g, layout, chi)?
        .blocks
        .iter()
        .map(|b| b.as_ref().map(|b| b.data()).transpose())
        .collect()
}

/// Logarithmic holonomies `(u_m, u_l)` of meridians and longitudes.
///
/// fsl: `u_m = 2i alpha`, `u_l` the sum of the edge lengths along the torus.
/// doubles: `u_l = 2l`, `u_m = i theta` with `theta` the sum of the dihedral
/// angles along the torus.
pub fn peripheral_holonomies(g: &GluingGraph, chi: &CharacterPoint) -> Result<(Vec<C64>, Vec<C64>)> {
    let layout = g.validate()?;
    let data = block_data(g, &layout, chi)?;
    let idx = g.piece_index()?;
    let mut um = Vec::with_capacity(layout.n);
    let mut ul = Vec::with_capacity(layout.n);
    for (t, torus) in g.tori.iter().enumerate() {
        let mut sum = 0.0;
        for &(bid, s) in &torus.traversal {
            if let Some(bd) = &data[idx[&bid]] {
                let (j, k) = digits(s);
                sum += match g.kind {
                    ManifoldKind::Fsl => bd.lengths[pair_index(j, k)],
                    ManifoldKind::Double => bd.angles[pair_index(j, k)],
                };
            }
        }
        let x = chi.params[t];
        match g.kind {
            ManifoldKind::Fsl => {
                um.push(I * (2.0 * x));
                ul.push(C64::new(sum, 0.0));
            }
            ManifoldKind::Double => {
                um.push(I * sum);
                ul.push(C64::new(2.0 * x, 0.0));
            }
        }
    }
    Ok((um, ul))
}

pub fn longitude_holonomy(g: &GluingGraph, chi: &CharacterPoint) -> Result<Vec<C64>> {
    Ok(peripheral_holonomies(g, chi)?.1)
}

pub fn meridian_holonomy(g: &GluingGraph, chi: &CharacterPoint) -> Result<Vec<C64>> {
    Ok(peripheral_holonomies(g, chi)?.0)
}

/// Central-difference step for parameter `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// `d u_other / d u_base` where the base system is the meridians (fsl) or the
/// longitudes (doubles), by central differences in the torus parameters
/// with steps `scale * fd_step(x)`.
pub fn holonomy_jacobian(g: &GluingGraph, chi: &CharacterPoint, scale: f64) -> Result<ComplexMatrix> {
    let n = chi.params.len();
    let base = match g.kind {
        ManifoldKind::Fsl => 2.0 * I,
        ManifoldKind::Double => C64::new(2.0, 0.0),
    };
    let other = |x: &[f64]| -> Result<Vec<C64>> {
        let (um, ul) = peripheral_holonomies(g, &CharacterPoint::new(g.kind, x.to_vec()))?;
        Ok(match g.kind {
            ManifoldKind::Fsl => ul,
            ManifoldKind::Double => um,
        })
    };
    let mut j = ComplexMatrix::zeros(n, n);
    for t in 0..n {
        let h = scale * fd_step(chi.params[t]);
        let mut xp = chi.params.clone();
        let mut xm = chi.params.clone();
        xp[t] += h;
        xm[t] -= h;
        let (fp, fm) = (other(&xp)?, other(&xm)?);
        for s in 0..n {
            j[(s, t)] = (fp[s] - fm[s]) / (2.0 * h) / base;
        }
    }
    Ok(j)
}

/// Relative change of the finite-difference Jacobian when the step is halved.
pub fn jacobian_step_gap(g: &GluingGraph, chi: &CharacterPoint) -> Result<f64> {
    let a = holonomy_jacobian(g, chi, 1.0)?;
    let b = holonomy_jacobian(g, chi, 0.5)?;
    Ok((&a - &b).max_abs() / b.max_abs().max(1e-300))
}

fn check_curves(curves: &[(i64, i64)], n: usize) -> Result<()> {
    if curves.len() != n {
        return Err(Error::Index(format!("{} curves for {n} tori", curves.len())));
    }
    if let Some(k) = curves.iter().position(|&c| c == (0, 0)) {
        return Err(Error::Domain(format!("curve {k} is (0, 0)")));
    }
    Ok(())
}

/// `d u_mu / d u_base` for `u_mu = p u_m + q u_l`.
pub fn curve_jacobian(g: &GluingGraph, chi: &CharacterPoint, curves: &[(i64, i64)]) -> Result<ComplexMatrix> {
    check_curves(curves, chi.params.len())?;
    let n = chi.params.len();
    let needs_fd = curves.iter().any(|&(p, q)| match g.kind {
        ManifoldKind::Fsl => q != 0,
        ManifoldKind::Double => p != 0,
    });
    let other = if needs_fd {
        holonomy_jacobian(g, chi, 1.0)?
    } else {
        ComplexMatrix::zeros(n, n)
    };
    let mut j = ComplexMatrix::zeros(n, n);
    for (s, &(p, q)) in curves.iter().enumerate() {
        let (own, cross) = match g.kind {
            ManifoldKind::Fsl => (p as f64, q as f64),
            ManifoldKind::Double => (q as f64, p as f64),
        };
        for t in 0..n {
            j[(s, t)] = other[(s, t)] * cross;
        }
        j[(s, s)] += C64::new(own, 0.0);
    }
    Ok(j)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveChange {
    pub jacobian: ComplexMatrix,
    pub jacobian_det: C64,
    /// Torsion with respect to meridians (fsl) or longitudes (doubles).
    pub base: TorsionValue,
    pub torsion: TorsionValue,
}

/// Torsion with respect to the curves `p m + q l` on each torus.
pub fn change_of_curves(g: &GluingGraph, chi: &CharacterPoint, curves: &[(i64, i64)]) -> Result<CurveChange> {
    let layout = g.validate()?;
    let base = closed_form(g, &layout, chi)?;
    let jacobian = curve_jacobian(g, chi, curves)?;
    let det = jacobian.det();
    if det.norm().is_nan() || det.norm() <= 1e-12 {
        return Err(Error::SingularJacobian(format!("det = {det}")));
    }
    Ok(CurveChange {
        torsion: TorsionValue(base.0 * det),
        jacobian,
        jacobian_det: det,
        base,
    })
}

/// `T prod_j 1 / (4 sinh^2(u_j / 2))`.
pub fn surgery_apply(t: TorsionValue, u_gamma: &[C64]) -> Result<TorsionValue> {
    let mut v = t.0;
    for (j, u) in u_gamma.iter().enumerate() {
        let sh = (u / 2.0).sinh();
        if sh.norm() < 1e-12 {
            return Err(Error::Singular(format!("sinh(u/2) vanishes for core curve {j} (u = {u})")));
        }
        v /= 4.0 * sh * sh;
    }
    Ok(TorsionValue(v))
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

/// Curves `(r, s)` with `p s - q r = 1`, dual to the filling curves `(p, q)`.
pub fn core_curves(curves: &[(i64, i64)]) -> Result<Vec<(i64, i64)>> {
    curves
        .iter()
        .map(|&(p, q)| {
            let (g, x, y) = ext_gcd(p, -q);
            // p x + (-q) y = g
            if g.abs() != 1 {
                return Err(Error::Domain(format!("curve ({p}, {q}) is not primitive")));
            }
            Ok((y * g, x * g))
        })
        .collect()
}

/// Logarithmic holonomies `r u_m + s u_l` of the core curves.
pub fn core_holonomy(g: &GluingGraph, chi: &CharacterPoint, curves: &[(i64, i64)]) -> Result<Vec<C64>> {
    check_curves(curves, chi.params.len())?;
    let (um, ul) = peripheral_holonomies(g, chi)?;
    Ok(core_curves(curves)?
        .iter()
        .enumerate()
        .map(|(j, &(r, s))| um[j] * r as f64 + ul[j] * s as f64)
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct FillingSolution {
    pub point: CharacterPoint,
    pub iterations: usize,
    pub residual: f64,
}

pub const FILLING_TOL: f64 = 1e-10;
pub const FILLING_MAX_ITER: usize = 100;

fn filling_residual(g: &GluingGraph, x: &[f64], curves: &[(i64, i64)]) -> Result<Vec<f64>> {
    let (um, ul) = peripheral_holonomies(g, &CharacterPoint::new(g.kind, x.to_vec()))?;
    let mut r = Vec::with_capacity(2 * x.len());
    for (j, &(p, q)) in curves.iter().enumerate() {
        let f = um[j] * p as f64 + ul[j] * q as f64 - 2.0 * PI * I;
        r.push(f.re);
        r.push(f.im);
    }
    Ok(r)
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Damped Gauss-Newton for `p u_m + q u_l = 2 pi i` on every torus.
pub fn solve_filling(g: &GluingGraph, curves: &[(i64, i64)], initial: &CharacterPoint) -> Result<FillingSolution> {
    let n = initial.params.len();
    check_curves(curves, n)?;
    let mut x = initial.params.clone();
    let mut r = filling_residual(g, &x, curves)?;
    let mut it = 0;
    loop {
        let res = inf_norm(&r);
        if res < FILLING_TOL {
            return Ok(FillingSolution {
                point: CharacterPoint::new(g.kind, x),
                iterations: it,
                residual: res,
            });
        }
        if it == FILLING_MAX_ITER {
            return Err(Error::NonConvergence {
                iterations: it,
                residual: res,
            });
        }
        it += 1;
        let mut jac = ComplexMatrix::zeros(2 * n, n);
        for t in 0..n {
            let h = fd_step(x[t]);
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[t] += h;
            xm[t] -= h;
            let (fp, fm) = (filling_residual(g, &xp, curves)?, filling_residual(g, &xm, curves)?);
            for s in 0..2 * n {
                jac[(s, t)] = C64::new((fp[s] - fm[s]) / (2.0 * h), 0.0);
            }
        }
        let jt = jac.transpose();
        let normal = &jt * &jac;
        let rhs: Vec<C64> = jt.matvec(&r.iter().map(|&v| C64::new(-v, 0.0)).collect::<Vec<_>>());
        let scale = normal.max_abs();
        let det = normal.det().norm();
        if det.is_nan() || det <= 1e-14 * scale.powi(n as i32).max(f64::MIN_POSITIVE) {
            return Err(Error::SingularJacobian(format!("Gauss-Newton normal matrix at iteration {it}")));
        }
        let step = normal
            .solve(&ComplexMatrix::from_columns(n, &[rhs]))
            .map_err(|e| Error::SingularJacobian(e.to_string()))?
            .column(0);
        let norm2 = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        let current = norm2(&r);
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + lambda * d.re).collect();
            if let Ok(rt) = filling_residual(g, &trial, curves) {
                if norm2(&rt) < current {
                    x = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Err(Error::NonConvergence {
                    iterations: it,
                    residual: res,
                });
            }
        }
    }
}

/// Rejection-samples torus values giving a valid geometry on every piece.
pub fn random_character(g: &GluingGraph, rng: &mut impl Rng) -> Result<CharacterPoint> {
    let layout = g.validate()?;
    for _ in 0..10_000 {
        let params: Vec<f64> = (0..layout.n)
            .map(|_| match g.kind {
                ManifoldKind::Fsl => rng.gen_range(0.15..1.0),
                ManifoldKind::Double => rng.gen_range(0.6..2.0),
            })
            .collect();
        let chi = CharacterPoint::new(g.kind, params);
        let Ok(geom) = geometry(g, &layout, &chi) else { continue };
        let blocks_ok = geom.blocks.iter().flatten().all(|b| b.data().is_ok());
        let pants_ok = geom.interfaces.iter().chain(geom.thickened.iter().flatten()).all(|p| p.sides().is_ok());
        if blocks_ok && pants_ok {
            return Ok(chi);
        }
    }
    Err(Error::InvalidShape("no valid random geometry found".into()))
}

/// Shipped example decompositions.
pub mod fixtures {
    use super::*;

    fn pairing(a: (usize, usize), b: (usize, usize), map: [(usize, usize); 3]) -> FacePairing {
        FacePairing { a, b, slot_map: map }
    }

    fn identical_faces(d_faces: [[usize; 3]; 4], kind: PieceKind) -> Vec<FacePairing> {
        (1..=4)
            .map(|f| {
                let src = kind.face_slots(f);
                let dst = d_faces[f - 1];
                pairing((0, f), (1, f), [(src[0], dst[0]), (src[1], dst[1]), (src[2], dst[2])])
            })
            .collect()
    }

    /// One D-block with faces 1, 2 and faces 3, 4 paired through thickened
    /// pants; tori `{12}`, `{13, 23, 14, 24}`, `{34}`.
    pub fn fsl_d1() -> GluingGraph {
        let p = [
            pairing((0, 1), (0, 2), [(12, 12), (13, 23), (14, 24)]),
            pairing((0, 3), (0, 4), [(13, 14), (23, 24), (34, 34)]),
        ];
        from_face_pairings(ManifoldKind::Fsl, 1, &p).expect("fixture")
    }

    /// Two D-blocks glued along all four faces, three tori.
    pub fn fsl_d2() -> GluingGraph {
        let faces = [[12, 13, 14], [12, 23, 24], [13, 34, 23], [24, 34, 14]];
        from_face_pairings(ManifoldKind::Fsl, 2, &identical_faces(faces, PieceKind::DBlock)).expect("fixture")
    }

    /// One dual D-block with faces paired through thickened pants.
    pub fn double_d1() -> GluingGraph {
        let p = [
            pairing((0, 1), (0, 2), [(23, 13), (24, 14), (34, 34)]),
            pairing((0, 3), (0, 4), [(12, 12), (14, 13), (24, 23)]),
        ];
        from_face_pairings(ManifoldKind::Double, 1, &p).expect("fixture")
    }

    /// Two dual D-blocks glued along all four faces, three tori.
    pub fn double_d2() -> GluingGraph {
        let faces = [[23, 24, 34], [13, 14, 34], [12, 24, 14], [13, 23, 12]];
        from_face_pairings(ManifoldKind::Double, 2, &identical_faces(faces, PieceKind::DualDBlock)).expect("fixture")
    }

    /// Two dual D-blocks whose twelve edge slots form a single torus.
    pub fn double_d2_single() -> GluingGraph {
        let faces = [[23, 24, 34], [13, 34, 14], [14, 24, 12], [13, 23, 12]];
        from_face_pairings(ManifoldKind::Double, 2, &identical_faces(faces, PieceKind::DualDBlock)).expect("fixture")
    }

    /// Regular values: `alpha = pi/4` (fsl) or `l = 1` (doubles) on every torus.
    pub fn regular(g: &GluingGraph) -> GluingGraph {
        let v = match g.kind {
            ManifoldKind::Fsl => PI / 4.0,
            ManifoldKind::Double => 1.0,
        };
        g.with_values(&vec![v; g.tori.len()])
    }

    /// All shipped fixtures with regular values, by name.
    pub fn all() -> Vec<(&'static str, GluingGraph)> {
        vec![
            ("fsl_d1", regular(&fsl_d1())),
            ("fsl_d2", regular(&fsl_d2())),
            ("double_d1", regular(&double_d1())),
            ("double_d2", regular(&double_d2())),
            ("double_d2_single", regular(&double_d2_single())),
        ]
    }
}
