//! Numeric formatting and file writers shared by the subcommands.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// Rounds to 12 significant digits; zero (including `-0.0`) maps to `0.0`.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if !x.is_finite() {
        x
    } else {
        format!("{x:.11e}").parse().expect("formatted float parses")
    }
}

/// Plain decimal for moderate magnitudes, exponent form otherwise.
pub fn fmt_num(x: f64) -> String {
    let r = sig12(x);
    if r == 0.0 || (1e-4..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig12(n.as_f64().expect("is_f64"));
            *v = serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Serializes with every floating-point number rounded to 12 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut v = serde_json::to_value(value).map_err(|e| CliError::Invalid(format!("serialize: {e}")))?;
    round_floats(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_text(path, &to_json_string(value)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(0.207_106_781_186_547_5), 0.207_106_781_187);
        assert_eq!(sig12(-0.0), 0.0);
        assert_eq!(sig12(2.000_000_000_000_001_8), 2.0);
        assert_eq!(sig12(1.234_567_890_123_4e-20), 1.234_567_890_12e-20);
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(1e-9), "1e-9");
        assert_eq!(fmt_num(-4.681_337_853_651e-11), "-4.68133785365e-11");
        assert_eq!(fmt_num(0.25), "0.25");
    }

    #[test]
    fn json_rounding_leaves_integers() {
        let v = serde_json::json!({"n": 1_000_000u64, "x": 0.333_333_333_333_333_3, "v": [1.0, 2.5e-17]});
        let s = to_json_string(&v).unwrap();
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["n"], 1_000_000u64);
        assert_eq!(back["x"].as_f64().unwrap(), 0.333_333_333_333);
        assert_eq!(back["v"][1].as_f64().unwrap(), 2.5e-17);
    }
}
