//! Table and JSON rendering.

use qif_core::{Dist, Hyper, Rational, Space, State};
use serde_json::{json, Value};

/// `p/q` with the denominator always present.
pub fn rational_json(r: &Rational) -> Value {
    Value::String(format!("{}/{}", r.numer(), r.denom()))
}

pub fn state_json(space: &Space, s: &State) -> Value {
    let mut m = serde_json::Map::new();
    for v in space.vars() {
        let slots = &s.slots()[v.offset..v.offset + v.domain.width()];
        let scalar = |x: i64| {
            if v.domain.slot_domain().is_bool() {
                Value::Bool(x != 0)
            } else {
                Value::from(x)
            }
        };
        let val = if v.domain.is_array() {
            Value::Array(slots.iter().map(|&x| scalar(x)).collect())
        } else {
            scalar(slots[0])
        };
        m.insert(v.name.clone(), val);
    }
    Value::Object(m)
}

pub fn dist_json(space: &Space, d: &Dist<State>) -> Value {
    Value::Array(
        d.iter()
            .map(|(s, p)| json!({ "state": state_json(space, s), "p": rational_json(p) }))
            .collect(),
    )
}

pub fn hyper_json(space: &Space, h: &Hyper<State>) -> Value {
    Value::Array(
        h.iter()
            .map(|(inner, w)| json!({ "outer": rational_json(w), "inner": dist_json(space, inner) }))
            .collect(),
    )
}

pub fn dist_table(space: &Space, d: &Dist<State>, indent: &str) -> String {
    let mut out = String::new();
    for (s, p) in d.iter() {
        out.push_str(&format!("{indent}{} : {p}\n", space.show(s)));
    }
    out
}

/// One `inner k : outer` block per inner, in canonical order.
pub fn hyper_table(space: &Space, h: &Hyper<State>) -> String {
    let mut out = String::new();
    for (k, (inner, w)) in h.iter().enumerate() {
        out.push_str(&format!("inner {} : {w}\n", k + 1));
        out.push_str(&dist_table(space, inner, "  "));
    }
    out
}

/// A verdict word, coloured when styling is on.
pub fn verdict(pass: bool, color: bool) -> String {
    let (word, code) = if pass { ("PASS", "32") } else { ("FAIL", "31") };
    if color {
        format!("\x1b[{code}m{word}\x1b[0m")
    } else {
        word.to_string()
    }
}
