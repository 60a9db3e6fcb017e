//! Canonical JSON: sorted keys, two-space indentation and every float written
//! with 17 significant digits, so parsing and re-emitting a report reproduces
//! it byte for byte.

use serde_json::{Number, Value};
use torsion_forge::{TorsionValue, C64};

/// Convention attached to every torsion value in a report.
pub const SIGN_CONVENTION: &str = "mod ±1 (shown with positive real part, or positive imaginary part when the real part is negligible)";

pub fn to_string(v: &Value) -> String {
    let mut out = String::new();
    write(v, 0, &mut out);
    out.push('\n');
    out
}

fn number(n: &Number) -> String {
    if let Some(u) = n.as_u64() {
        u.to_string()
    } else if let Some(i) = n.as_i64() {
        i.to_string()
    } else {
        float(n.as_f64().unwrap_or(f64::NAN))
    }
}

fn float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

fn scalar(v: &Value) -> bool {
    !matches!(v, Value::Array(_) | Value::Object(_))
}

fn write(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&number(n)),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(a) if a.is_empty() => out.push_str("[]"),
        Value::Array(a) if a.iter().all(scalar) => {
            out.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write(x, indent, out);
            }
            out.push(']');
        }
        Value::Array(a) => {
            out.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write(x, indent + 1, out);
                out.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) if m.is_empty() => out.push_str("{}"),
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push_str(": ");
                write(&m[k.as_str()], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// A complex number as `[re, im]`.
pub fn complex(z: C64) -> Value {
    Value::from(vec![z.re, z.im])
}

pub fn complex_list(zs: &[C64]) -> Value {
    Value::Array(zs.iter().map(|&z| complex(z)).collect())
}

pub fn matrix(m: &torsion_forge::ComplexMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| complex_list(&m.row(i))).collect())
}

pub fn torsion(t: &TorsionValue) -> Value {
    serde_json::json!({
        "value": complex(t.canonical()),
        "convention": SIGN_CONVENTION,
    })
}

pub fn opt_torsion(t: &Option<TorsionValue>) -> Value {
    t.as_ref().map_or(Value::Null, torsion)
}

pub fn opt_float(x: Option<f64>) -> Value {
    x.map_or(Value::Null, Value::from)
}
