use std::path::Path;

use bessel_forge::{Command, RunSpec};
use serde_json::{Map, Value};

fn schema() -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/run-spec.schema.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Schema branches for a subcommand, keyed by action (empty if none).
fn branches(schema: &Value, command: Command) -> Vec<(String, Map<String, Value>)> {
    let node = &schema["$defs"][command.name()];
    let list: Vec<&Value> = match node.get("oneOf") {
        Some(Value::Array(a)) => a.iter().collect(),
        _ => vec![node],
    };
    list.into_iter()
        .map(|b| {
            let action = b["properties"]["action"]["const"]
                .as_str()
                .unwrap_or("")
                .to_string();
            (action, b.clone().as_object().unwrap().clone())
        })
        .collect()
}

fn minimal_value(prop: &str) -> Value {
    match prop {
        "W" | "H" | "v" => Value::from("pow(r, -2)"),
        "geometry" => Value::from("euclidean:n=5"),
        "profile" => serde_json::json!({"family": "gaussian", "sigma": 0.3, "radius": 1}),
        "family" => Value::from("near-extremal"),
        "values" => serde_json::json!([0.1]),
        "radii" => serde_json::json!({"from": 1, "to": 2, "count": 3}),
        "seed" | "samples" | "n" => Value::from(5),
        _ => Value::from(2.5),
    }
}

fn same_value(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => x.as_f64() == y.as_f64(),
        (Value::Array(x), Value::Array(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(u, v)| same_value(u, v))
        }
        _ => a == b,
    }
}

#[test]
fn schema_matches_spec_records() {
    let schema = schema();
    for command in [
        Command::Certify,
        Command::Ode,
        Command::Picone,
        Command::Hardy,
        Command::Rellich,
        Command::GeometryCheck,
    ] {
        for (action, branch) in branches(&schema, command) {
            let mut spec = Map::new();
            for req in branch["required"].as_array().unwrap() {
                let key = req.as_str().unwrap();
                let v = if key == "action" {
                    Value::from(action.as_str())
                } else {
                    minimal_value(key)
                };
                spec.insert(key.into(), v);
            }
            let text = Value::Object(spec).to_string();
            let parsed = RunSpec::parse(command, &text)
                .unwrap_or_else(|e| panic!("{command} {action}: required set rejected: {e}"));
            let echo = parsed.echo();
            let props = branch["properties"].as_object().unwrap();
            let mut echoed: Vec<&String> = echo.as_object().unwrap().keys().collect();
            let mut declared: Vec<&String> = props.keys().collect();
            echoed.sort();
            declared.sort();
            assert_eq!(echoed, declared, "{command} {action}");
            for (key, p) in props {
                if let Some(default) = p.get("default") {
                    let got = &echo[key];
                    assert!(
                        same_value(got, default),
                        "{command} {action}: default of `{key}` is {got}, schema says {default}"
                    );
                }
            }
        }
    }
}
