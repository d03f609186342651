//! Structural checks run on every JSON document before it is written.

use serde_json::Value;

pub enum Shape {
    Uint,
    Num,
    Str,
    /// A decimal integer encoded as a string.
    IntStr,
    Bool,
    OneOf(&'static [&'static str]),
    Array(Box<Shape>),
    Object(Vec<(&'static str, Shape)>),
    Nullable(Box<Shape>),
    Any,
}

use Shape::*;

fn arr(s: Shape) -> Shape {
    Array(Box::new(s))
}

fn opt(s: Shape) -> Shape {
    Nullable(Box::new(s))
}

pub fn validate(v: &Value, shape: &Shape) -> Result<(), String> {
    check(v, shape, "$")
}

fn check(v: &Value, shape: &Shape, path: &str) -> Result<(), String> {
    let fail = |what: &str| Err(format!("{path}: expected {what}, found {v}"));
    match shape {
        Any => Ok(()),
        Uint => if v.is_u64() { Ok(()) } else { fail("a nonnegative integer") },
        Num => if v.is_number() { Ok(()) } else { fail("a number") },
        Str => if v.is_string() { Ok(()) } else { fail("a string") },
        Bool => if v.is_boolean() { Ok(()) } else { fail("a boolean") },
        IntStr => match v.as_str() {
            Some(s) if s.parse::<i128>().is_ok() => Ok(()),
            _ => fail("a decimal integer string"),
        },
        OneOf(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Ok(()),
            _ => fail(&format!("one of {options:?}")),
        },
        Nullable(inner) => if v.is_null() { Ok(()) } else { check(v, inner, path) },
        Array(inner) => {
            let Some(items) = v.as_array() else { return fail("an array") };
            items
                .iter()
                .enumerate()
                .try_for_each(|(i, item)| check(item, inner, &format!("{path}[{i}]")))
        }
        Object(fields) => {
            let Some(map) = v.as_object() else { return fail("an object") };
            for (name, field) in fields {
                let child = format!("{path}.{name}");
                match map.get(*name) {
                    Some(value) => check(value, field, &child)?,
                    None if matches!(field, Nullable(_)) => {}
                    None => return Err(format!("{child}: missing")),
                }
            }
            Ok(())
        }
    }
}

pub fn windows(integer_sums: bool) -> Shape {
    Object(vec![
        ("W", Uint),
        ("K", Uint),
        ("sums", arr(if integer_sums { IntStr } else { Num })),
    ])
}

pub fn certificate() -> Shape {
    Object(vec![
        ("d", Uint),
        ("W", Uint),
        ("p", Uint),
        ("pi0", arr(Any)),
        ("window_sums", arr(IntStr)),
        ("jacobian", arr(arr(IntStr))),
        ("det_mod_p", Uint),
        ("nonzero", Bool),
        ("exact", Bool),
    ])
}

const FLAGS: &[&str] = &[
    "hankel_singular",
    "repeated_nodes",
    "zero_node",
    "zero_amplitude",
    "complex_nodes",
    "non_positive",
    "neutral_inconsistent",
];

pub fn model() -> Shape {
    Object(vec![
        ("nodes", arr(arr(Num))),
        ("amplitudes", arr(arr(Num))),
        ("char_coeffs", arr(Num)),
        ("hankel_condition", opt(Num)),
        ("vandermonde_condition", opt(Num)),
        ("flags", arr(OneOf(FLAGS))),
    ])
}

pub fn report() -> Shape {
    Object(vec![
        ("decision", OneOf(&["zero", "nonzero", "inconclusive"])),
        ("certificate_value", opt(Num)),
        ("defect", opt(Num)),
        ("threshold", opt(Num)),
        ("eps_bound", opt(Num)),
        ("L", opt(Num)),
        ("flags", arr(OneOf(FLAGS))),
        ("model", opt(model())),
    ])
}

pub fn fixture() -> Shape {
    Object(vec![
        ("label", Str),
        ("d", Uint),
        ("W", Uint),
        ("mixture", Object(vec![("rates", arr(Num)), ("weights", arr(Num))])),
        ("true_windows", arr(Num)),
        ("observed_windows", arr(Num)),
        ("noise_level", Num),
    ])
}

pub fn preset() -> Shape {
    Object(vec![("label", Str), ("d", Uint), ("W", Uint)])
}

pub fn collision() -> Shape {
    Object(vec![
        ("W", Uint),
        ("K", Uint),
        ("d", Uint),
        ("N", Uint),
        ("bumps", arr(Uint)),
        ("windows", arr(Num)),
    ])
}
