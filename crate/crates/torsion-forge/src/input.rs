//! JSON input files.
//!
//! Shape files hold exactly one of `"alpha"` (half cone angles), `"length"`
//! (edge lengths) or `"u"` (complex parameters as `[re, im]`). Gluing files
//! describe blocks, interfaces and tori; see `README.md`.

use std::path::Path;

use serde::Deserialize;
use torsion_forge::assembly::{GluingGraph, Interface, ManifoldKind, Piece, PieceKind, Torus};
use torsion_forge::C64;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeFile {
    pub alpha: Option<Vec<f64>>,
    pub length: Option<Vec<f64>>,
    pub u: Option<Vec<[f64; 2]>>,
}

/// Parameters of a shape file, by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Alpha(Vec<f64>),
    Length(Vec<f64>),
    Complex(Vec<C64>),
}

impl Shape {
    pub fn len(&self) -> usize {
        match self {
            Shape::Alpha(v) | Shape::Length(v) => v.len(),
            Shape::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum KindIn {
    Fsl,
    Double,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PieceKindIn {
    Dblock,
    DualDblock,
    ThickenedPants,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockIn {
    id: usize,
    kind: PieceKindIn,
    u: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InterfaceIn {
    id: usize,
    left: [usize; 2],
    right: [usize; 2],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TorusIn {
    id: usize,
    traversal: Vec<[usize; 2]>,
    alpha: Option<f64>,
    length: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphIn {
    kind: KindIn,
    blocks: Vec<BlockIn>,
    interfaces: Vec<InterfaceIn>,
    tori: Vec<TorusIn>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn parse_shape(path: &Path, text: &str) -> Result<Shape, CliError> {
    let f: ShapeFile = parse(path, text)?;
    match (f.alpha, f.length, f.u) {
        (Some(a), None, None) => Ok(Shape::Alpha(a)),
        (None, Some(l), None) => Ok(Shape::Length(l)),
        (None, None, Some(u)) => Ok(Shape::Complex(u.iter().map(|&[re, im]| C64::new(re, im)).collect())),
        _ => Err(CliError::Input(format!(
            "{}: expected exactly one of \"alpha\", \"length\", \"u\"",
            path.display()
        ))),
    }
}

pub fn read_shape(path: &Path) -> Result<Shape, CliError> {
    parse_shape(path, &read(path)?)
}

pub fn parse_graph(path: &Path, text: &str) -> Result<GluingGraph, CliError> {
    let g: GraphIn = parse(path, text)?;
    let kind = match g.kind {
        KindIn::Fsl => ManifoldKind::Fsl,
        KindIn::Double => ManifoldKind::Double,
    };
    let mut blocks = Vec::with_capacity(g.blocks.len());
    for b in g.blocks {
        let u = match b.u {
            None => None,
            Some(v) if v.len() == 6 => Some(std::array::from_fn(|i| C64::new(v[i][0], v[i][1]))),
            Some(v) => {
                return Err(CliError::Input(format!("block {}: \"u\" has {} entries, expected 6", b.id, v.len())))
            }
        };
        let kind = match b.kind {
            PieceKindIn::Dblock => PieceKind::DBlock,
            PieceKindIn::DualDblock => PieceKind::DualDBlock,
            PieceKindIn::ThickenedPants => PieceKind::ThickenedPants,
        };
        blocks.push(Piece { id: b.id, kind, u });
    }
    let interfaces = g
        .interfaces
        .into_iter()
        .map(|f| Interface {
            id: f.id,
            left: (f.left[0], f.left[1]),
            right: (f.right[0], f.right[1]),
        })
        .collect();
    let mut tori = Vec::with_capacity(g.tori.len());
    for t in g.tori {
        let value = match (kind, t.alpha, t.length) {
            (_, None, None) => None,
            (ManifoldKind::Fsl, Some(a), None) => Some(a),
            (ManifoldKind::Double, None, Some(l)) => Some(l),
            (ManifoldKind::Fsl, _, _) => {
                return Err(CliError::Input(format!("torus {}: fsl tori take \"alpha\" only", t.id)))
            }
            (ManifoldKind::Double, _, _) => {
                return Err(CliError::Input(format!("torus {}: double tori take \"length\" only", t.id)))
            }
        };
        tori.push(Torus {
            id: t.id,
            traversal: t.traversal.iter().map(|&[b, s]| (b, s)).collect(),
            value,
        });
    }
    Ok(GluingGraph {
        kind,
        blocks,
        interfaces,
        tori,
    })
}

pub fn read_graph(path: &Path) -> Result<GluingGraph, CliError> {
    parse_graph(path, &read(path)?)
}

/// Serializes a gluing graph in the input format.
pub fn graph_to_json(g: &GluingGraph) -> serde_json::Value {
    use serde_json::json;
    let kind = match g.kind {
        ManifoldKind::Fsl => "fsl",
        ManifoldKind::Double => "double",
    };
    let blocks: Vec<_> = g
        .blocks
        .iter()
        .map(|b| {
            let k = match b.kind {
                PieceKind::DBlock => "dblock",
                PieceKind::DualDBlock => "dual_dblock",
                PieceKind::ThickenedPants => "thickened_pants",
            };
            let mut o = json!({ "id": b.id, "kind": k });
            if let Some(u) = b.u {
                o["u"] = crate::canonical::complex_list(&u);
            }
            o
        })
        .collect();
    let interfaces: Vec<_> = g
        .interfaces
        .iter()
        .map(|f| json!({ "id": f.id, "left": [f.left.0, f.left.1], "right": [f.right.0, f.right.1] }))
        .collect();
    let tori: Vec<_> = g
        .tori
        .iter()
        .map(|t| {
            let mut o = json!({
                "id": t.id,
                "traversal": t.traversal.iter().map(|&(b, s)| json!([b, s])).collect::<Vec<_>>(),
            });
            if let Some(v) = t.value {
                o[if g.kind == ManifoldKind::Fsl { "alpha" } else { "length" }] = json!(v);
            }
            o
        })
        .collect();
    json!({ "kind": kind, "blocks": blocks, "interfaces": interfaces, "tori": tori })
}

/// Parses `"p,q;p,q;..."`.
pub fn parse_curves(spec: &str) -> Result<Vec<(i64, i64)>, CliError> {
    spec.split(';')
        .map(|pair| {
            let bad = || CliError::Input(format!("curve \"{pair}\" is not of the form p,q"));
            let (p, q) = pair.split_once(',').ok_or_else(bad)?;
            Ok((p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}
