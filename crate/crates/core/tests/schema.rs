//! The shipped JSON schema accepts and rejects the same documents as the
//! scenario reader.

use serde_json::{json, Map, Value};

use uavplan_core::dataset::{builtin_recipe, generate_dataset, BUILTIN_RECIPES};
use uavplan_core::io::{parse_scenario, scenario_to_string};
use uavplan_core::MissionScenario;

const SCHEMA: &str = include_str!("../../../schema/scenario.schema.json");

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn builtin(name: &str) -> Value {
    let s = generate_dataset(&builtin_recipe(name).unwrap()).unwrap();
    serde_json::from_str(&scenario_to_string(&s)).unwrap()
}

/// d5 plus the optional fields the generator never writes.
fn every_variant() -> Value {
    let mut v = builtin("d5");
    v["map_swath_nm"] = json!(0.5);
    let task = v["tasks"]
        .as_array_mut()
        .unwrap()
        .iter_mut()
        .find(|t| t["kind"] == json!("MAP"))
        .expect("d5 has a mapping task");
    task["multi_uav"] = json!(true);
    task["required_uavs"] = json!(2);
    let uav = &mut v["uavs"][0];
    for kind in ["climb", "descent"] {
        uav["profiles"].as_array_mut().unwrap().push(json!({
            "id": kind, "kind": kind, "speed": 150.0, "fuel_ratio": 80.0, "angle": 5.0
        }));
    }
    uav["sensor_performance"] = json!([
        { "sensor": uav["sensors"][0], "speed": 120.0, "altitude": 8000.0 }
    ]);
    v
}

fn object_paths(v: &Value, at: &mut Vec<Value>, out: &mut Vec<Vec<Value>>) {
    match v {
        Value::Object(m) => {
            out.push(at.clone());
            for (k, x) in m {
                at.push(json!(k));
                object_paths(x, at, out);
                at.pop();
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                at.push(json!(i));
                object_paths(x, at, out);
                at.pop();
            }
        }
        _ => {}
    }
}

fn object_at<'a>(v: &'a mut Value, path: &[Value]) -> &'a mut Map<String, Value> {
    let mut cur = v;
    for step in path {
        cur = match step {
            Value::String(k) => &mut cur[k.as_str()],
            Value::Number(i) => &mut cur[i.as_u64().unwrap() as usize],
            _ => unreachable!(),
        };
    }
    cur.as_object_mut().unwrap()
}

fn reader_accepts(v: &Value) -> bool {
    serde_json::from_value::<MissionScenario>(v.clone()).is_ok()
}

#[test]
fn builtin_scenarios_validate() {
    let schema = validator();
    for name in BUILTIN_RECIPES {
        let v = builtin(name);
        let errors: Vec<String> = schema.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
    }
}

#[test]
fn the_full_variant_fixture_is_valid_both_ways() {
    let v = every_variant();
    assert!(validator().is_valid(&v));
    parse_scenario(&v.to_string()).unwrap();
}

#[test]
fn dropped_and_unknown_fields_get_the_same_verdict() {
    let schema = validator();
    let base = every_variant();
    let mut paths = Vec::new();
    object_paths(&base, &mut Vec::new(), &mut paths);
    let mut checked = 0;
    for path in &paths {
        let keys: Vec<String> = object_at(&mut base.clone(), path).keys().cloned().collect();
        for key in keys {
            let mut m = base.clone();
            object_at(&mut m, path).remove(&key);
            assert_eq!(
                schema.is_valid(&m),
                reader_accepts(&m),
                "dropping {key} at {path:?}"
            );
            checked += 1;
        }
        let mut m = base.clone();
        object_at(&mut m, path).insert("extra".into(), json!(1));
        assert!(!schema.is_valid(&m), "extra field at {path:?}");
        assert!(!reader_accepts(&m), "extra field at {path:?}");
    }
    assert!(checked > 300, "{checked}");
}
