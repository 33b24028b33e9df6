use serde::{Serialize, Serializer};
use serde_json::{Number, Value};

use crate::fnexpr::Interval;

/// 17 significant digits, trailing zeros removed; positional notation for
/// decimal exponents in `[-5, 16]`, scientific otherwise.
pub fn format_float(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..=16).contains(&exp) {
        let fixed = format!("{v:.*}", (16 - exp) as usize);
        trim_fraction(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn reformat(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *v = if x.is_finite() {
                Value::Number(format_float(x).parse::<Number>().expect("valid JSON number"))
            } else {
                Value::Null
            };
        }
        Value::Array(items) => items.iter_mut().for_each(reformat),
        Value::Object(map) => map.values_mut().for_each(reformat),
        _ => {}
    }
}

/// Pretty JSON with sorted keys and every float at 17 significant digits.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut v = serde_json::to_value(value).unwrap_or_else(|e| Value::String(format!("serialization failed: {e}")));
    reformat(&mut v);
    serde_json::to_string_pretty(&v).expect("JSON values always serialize")
}

pub(super) fn interval<S: Serializer>(i: &Interval, s: S) -> Result<S::Ok, S::Error> {
    i.to_string().serialize(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_float(2.0), "2");
        assert_eq!(format_float(0.5), "0.5");
        assert_eq!(format_float(0.1), "0.10000000000000001");
        assert_eq!(format_float(-1e-7), "-9.9999999999999995e-8");
        assert_eq!(format_float(-(2f64.powi(-20))), "-9.5367431640625e-7");
        assert_eq!(format_float(2f64.powi(100)), "1.2676506002282294e30");
        assert_eq!(format_float(123456.0), "123456");
        for v in [0.1, 1.0 / 3.0, std::f64::consts::E, -7.25e-12, 6.02e23] {
            assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_is_sorted_and_reformatted() {
        let v = serde_json::json!({"b": 0.1, "a": [1, 2.5], "c": 3u32});
        assert_eq!(
            to_json(&v),
            "{\n  \"a\": [\n    1,\n    2.5\n  ],\n  \"b\": 0.10000000000000001,\n  \"c\": 3\n}"
        );
    }
}
