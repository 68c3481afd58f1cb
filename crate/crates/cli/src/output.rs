use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Json,
    Table,
}

/// JSON mode prints pretty JSON; table mode prints `custom` when a command
/// supplies one, else one `path  value` line per leaf.
pub fn render(v: &Value, mode: Mode, custom: Option<&str>) -> String {
    match mode {
        Mode::Json => format!("{}\n", serde_json::to_string_pretty(v).expect("values serialize")),
        Mode::Table => match custom {
            Some(t) => t.to_string(),
            None => {
                let mut rows = Vec::new();
                flatten("", v, &mut rows);
                let w = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
                rows.iter().map(|(k, v)| format!("{k:<w$}  {v}\n")).collect()
            }
        },
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) if !m.is_empty() => {
            for (k, x) in m {
                flatten(&join(k), x, out);
            }
        }
        // short lists of scalars stay on one line
        Value::Array(xs) if xs.iter().any(|x| x.is_object() || x.is_array()) => {
            for (i, x) in xs.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        other => out.push((prefix.to_string(), other.to_string())),
    }
}
