//! Fixed-precision number formatting for reproducible text output.

use serde_json::Value;

/// Significant digits kept in printed output.
pub const SIG_DIGITS: usize = 12;

/// Rounds `x` to [`SIG_DIGITS`] significant decimal digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIG_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

/// Shortest decimal form of `round_sig(x)`, as it would appear in JSON.
pub fn json_number(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&round_sig(x)).expect("finite floats serialize")
    } else {
        "nan".to_string()
    }
}

/// Rounds every floating-point number inside `value` in place.
pub fn round_value(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            if let Some(r) = n.as_f64().map(round_sig).and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}
