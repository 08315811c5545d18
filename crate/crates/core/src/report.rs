//! Report output: one header line with run metadata, then a deterministic JSON body.

use serde::Serialize;
use serde_json::{json, Value};
use std::time::{SystemTime, UNIX_EPOCH};

/// Header line. Only this line varies between identical runs.
pub fn header(command: &str, scenario: &str) -> String {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "tool": "hyuntil",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "scenario": scenario,
        "timestamp_unix": ts,
    })
    .to_string()
}

/// Pretty JSON body; map keys are sorted, non-finite numbers become null.
pub fn body<T: Serialize>(value: &T) -> String {
    let v: Value = serde_json::to_value(value).unwrap_or(Value::Null);
    serde_json::to_string_pretty(&v).expect("json value serializes")
}

pub fn render<T: Serialize>(command: &str, scenario: &str, value: &T) -> String {
    format!("{}\n{}\n", header(command, scenario), body(value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_is_stable() {
        let v = json!({"b": 1, "a": [f64::NAN, 2.0]});
        assert_eq!(body(&v), body(&v));
        assert!(body(&v).find("\"a\"").unwrap() < body(&v).find("\"b\"").unwrap());
        let r = render("monitor", "timer", &v);
        let first: Value = serde_json::from_str(r.lines().next().unwrap()).unwrap();
        assert_eq!(first["command"], "monitor");
    }
}
