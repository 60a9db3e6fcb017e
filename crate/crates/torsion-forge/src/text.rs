//! Plain-text rendering of a report.

use serde_json::Value;

fn complex_pair(v: &Value) -> Option<(f64, f64)> {
    match v.as_array()?.as_slice() {
        [a, b] if a.is_f64() && b.is_f64() => Some((a.as_f64()?, b.as_f64()?)),
        _ => None,
    }
}

fn fmt_f(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e6) {
        format!("{x:.6e}")
    } else {
        format!("{x:.10}")
    }
}

fn inline(v: &Value) -> Option<String> {
    if let Some((re, im)) = complex_pair(v) {
        let sign = if im.is_sign_negative() { '-' } else { '+' };
        return Some(format!("{} {sign} {}i", fmt_f(re), fmt_f(im.abs())));
    }
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) if n.is_f64() => Some(fmt_f(n.as_f64().unwrap_or(f64::NAN))),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.is_empty() => Some("[]".into()),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) || a.iter().all(|x| complex_pair(x).is_some()) => {
            Some(format!("[{}]", a.iter().map(|x| inline(x).unwrap_or_default()).collect::<Vec<_>>().join(", ")))
        }
        _ => None,
    }
}

fn render(key: &str, v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    if let Some(s) = inline(v) {
        out.push_str(&format!("{pad}{key}: {s}\n"));
        return;
    }
    out.push_str(&format!("{pad}{key}:\n"));
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for k in keys {
                render(k, &m[k.as_str()], indent + 1, out);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                render(&format!("[{i}]"), x, indent + 1, out);
            }
        }
        _ => {}
    }
}

pub fn to_string(report: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(m) = report {
        let mut keys: Vec<&String> = m.keys().collect();
        keys.sort();
        for k in keys {
            render(k, &m[k.as_str()], 0, &mut out);
        }
    }
    out
}
