//! Unit-suffixed literals such as `14um`, `4mm`, `1610nm` and `3percm`.
//!
//! Values are converted by shifting the decimal exponent of the literal, so
//! `14um` parses to exactly the double nearest 1.4e-5 and formatting any
//! double back produces a literal that parses to the same bits.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

const LENGTH_UNITS: [(&str, i32); 7] = [
    ("nm", -9),
    ("um", -6),
    ("µm", -6),
    ("mm", -3),
    ("cm", -2),
    ("km", 3),
    ("m", 0),
];

const INVERSE_LENGTH_UNITS: [(&str, i32); 6] = [
    ("percm", 2),
    ("permm", 3),
    ("perm", 0),
    ("/cm", 2),
    ("/mm", 3),
    ("/m", 0),
];

/// `number × 10^shift`, rounded once.
fn scaled(number: &str, shift: i32) -> Option<f64> {
    let number = number.trim();
    if number.is_empty() || number.contains(['_', ' ', 'i', 'n', 'I', 'N']) {
        return None;
    }
    let (mantissa, exp) = match number.find(['e', 'E']) {
        Some(i) => (&number[..i], number[i + 1..].parse::<i32>().ok()?),
        None => (number, 0),
    };
    mantissa.parse::<f64>().ok()?;
    format!("{mantissa}e{}", exp + shift).parse::<f64>().ok()
}

fn parse_with(text: &str, units: &[(&str, i32)]) -> Option<f64> {
    let t = text.trim();
    for (suffix, exp) in units {
        if let Some(number) = t.strip_suffix(suffix) {
            if let Some(v) = scaled(number, *exp) {
                if v.is_finite() {
                    return Some(v);
                }
            }
        }
    }
    None
}

/// Length in metres from a literal such as `14um`.
pub fn parse_length(text: &str) -> Result<f64, String> {
    parse_with(text, &LENGTH_UNITS).ok_or_else(|| {
        format!("`{text}` is not a length; write a number with a unit suffix nm, um, mm, cm or m")
    })
}

/// Inverse length in 1/m from a literal such as `3percm`.
pub fn parse_inverse_length(text: &str) -> Result<f64, String> {
    parse_with(text, &INVERSE_LENGTH_UNITS).ok_or_else(|| {
        format!("`{text}` is not an inverse length; write e.g. `3percm`, `0.3permm` or `300perm`")
    })
}

/// Plain decimal digits of `value × 10^shift` from its shortest round-trip form.
fn shifted_decimal(value: f64, shift: i32) -> String {
    let s = format!("{:e}", value.abs());
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    // value = 0.digits × 10^(exp + 1)
    let point = exp + 1 + shift;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    if value < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

/// Literal for a length, in the largest of nm, um, mm, m that keeps the number ≥ 1.
pub fn format_length(value: f64) -> String {
    if value == 0.0 {
        return "0m".into();
    }
    let mag = value.abs();
    let (unit, exp) = if mag >= 1.0 {
        ("m", 0)
    } else if mag >= 1e-3 {
        ("mm", -3)
    } else if mag >= 1e-6 {
        ("um", -6)
    } else {
        ("nm", -9)
    };
    format!("{}{unit}", shifted_decimal(value, -exp))
}

/// Literal for an inverse length in cm⁻¹.
pub fn format_inverse_length(value: f64) -> String {
    if value == 0.0 {
        return "0percm".into();
    }
    format!("{}percm", shifted_decimal(value, -2))
}

macro_rules! quantity {
    ($name:ident, $parse:ident, $what:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                struct V;
                impl Visitor<'_> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        f.write_str(concat!("a quoted ", $what, " with a unit suffix"))
                    }
                    fn visit_str<E: de::Error>(self, s: &str) -> Result<$name, E> {
                        $parse(s).map($name).map_err(E::custom)
                    }
                    fn visit_i64<E: de::Error>(self, v: i64) -> Result<$name, E> {
                        if v == 0 {
                            Ok($name(0.0))
                        } else {
                            Err(E::custom(concat!("a bare number is ambiguous for a ", $what, "; add a unit suffix")))
                        }
                    }
                    fn visit_f64<E: de::Error>(self, v: f64) -> Result<$name, E> {
                        if v == 0.0 {
                            Ok($name(0.0))
                        } else {
                            Err(E::custom(concat!("a bare number is ambiguous for a ", $what, "; add a unit suffix")))
                        }
                    }
                }
                d.deserialize_any(V)
            }
        }
    };
}

quantity!(Length, parse_length, "length");
quantity!(InverseLength, parse_inverse_length, "inverse length");
