//! Plain-text rendering of a report for `--format table`.

use serde_json::Value;

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

fn walk(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            for (k, val) in map {
                match inline(val) {
                    Some(s) => out.push_str(&format!("{pad}{k:<width$}  {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}\n"));
                        walk(val, indent + 2, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                match inline(item) {
                    Some(s) => out.push_str(&format!("{pad}[{i}] {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        walk(item, indent + 2, out);
                    }
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v).unwrap_or_default())),
    }
}

// Scalars and short arrays of scalars fit on one line.
fn inline(v: &Value) -> Option<String> {
    if let Some(s) = scalar(v) {
        return Some(s);
    }
    match v {
        Value::Array(items) if items.is_empty() => Some("(none)".into()),
        Value::Array(items) if items.len() <= 8 => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            parts.map(|p| p.join(", "))
        }
        _ => None,
    }
}

pub fn render(v: &Value) -> String {
    let mut out = String::new();
    walk(v, 0, &mut out);
    out
}
