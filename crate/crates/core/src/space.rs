//! Finite variable domains, state spaces and states.
//!
//! A [`State`] is a flat vector of `i64` slots. Variables are laid out in
//! name order and arrays occupy one slot per element, so the derived
//! lexicographic order on slots is the canonical state order: by variable
//! name, then by domain order (`false < true`, ascending integers,
//! arrays elementwise).

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Domain {
    Bool,
    /// Inclusive integer range `lo..hi`.
    Int { lo: i64, hi: i64 },
    /// Fixed-length array of a scalar domain.
    Array { elem: Box<Domain>, len: usize },
}

impl Domain {
    pub fn int(lo: i64, hi: i64) -> Result<Domain> {
        if lo > hi {
            return Err(Error::Domain(format!("empty integer range {lo}..{hi}")));
        }
        Ok(Domain::Int { lo, hi })
    }

    pub fn array(elem: Domain, len: usize) -> Result<Domain> {
        if len == 0 {
            return Err(Error::Domain("array length must be at least 1".into()));
        }
        if elem.is_array() {
            return Err(Error::Domain("array elements must be scalar".into()));
        }
        Ok(Domain::Array { elem: Box::new(elem), len })
    }

    pub fn is_array(&self) -> bool {
        matches!(self, Domain::Array { .. })
    }

    pub fn is_bool(&self) -> bool {
        matches!(self, Domain::Bool)
    }

    /// Number of state slots the domain occupies.
    pub fn width(&self) -> usize {
        match self {
            Domain::Array { len, .. } => *len,
            _ => 1,
        }
    }

    /// The scalar domain of each slot.
    pub fn slot_domain(&self) -> &Domain {
        match self {
            Domain::Array { elem, .. } => elem,
            d => d,
        }
    }

    /// Values of a scalar domain in domain order (booleans as 0/1).
    pub fn scalar_values(&self) -> Vec<i64> {
        match self.slot_domain() {
            Domain::Bool => vec![0, 1],
            Domain::Int { lo, hi } => (*lo..=*hi).collect(),
            Domain::Array { .. } => unreachable!("array elements are scalar"),
        }
    }

    pub fn scalar_contains(&self, v: i64) -> bool {
        match self.slot_domain() {
            Domain::Bool => v == 0 || v == 1,
            Domain::Int { lo, hi } => *lo <= v && v <= *hi,
            Domain::Array { .. } => false,
        }
    }

    /// Smallest slot value; used to fill slots an evaluation does not read.
    pub fn min_value(&self) -> i64 {
        match self.slot_domain() {
            Domain::Int { lo, .. } => *lo,
            _ => 0,
        }
    }

    /// Number of values, saturating.
    pub fn cardinality(&self) -> u128 {
        let per = self.slot_domain().scalar_values().len() as u128;
        (0..self.width()).fold(1u128, |acc, _| acc.saturating_mul(per))
    }

    /// Whether every value of the scalar domain is non-negative.
    pub fn is_non_negative(&self) -> bool {
        match self.slot_domain() {
            Domain::Int { lo, .. } => *lo >= 0,
            _ => false,
        }
    }

    pub fn format_slot(&self, v: i64) -> String {
        match self.slot_domain() {
            Domain::Bool => if v != 0 { "true" } else { "false" }.to_string(),
            _ => v.to_string(),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Bool => write!(f, "bool"),
            Domain::Int { lo, hi } => write!(f, "int[{lo}..{hi}]"),
            Domain::Array { elem, len } => write!(f, "{elem}[{len}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub domain: Domain,
    pub offset: usize,
}

/// The declared state space: variables sorted by name with slot offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    vars: Vec<VarInfo>,
    slots: usize,
    index: HashMap<String, usize>,
}

impl Space {
    pub fn new<I, S>(decls: I) -> Result<Space>
    where
        I: IntoIterator<Item = (S, Domain)>,
        S: Into<String>,
    {
        let mut vars: Vec<(String, Domain)> =
            decls.into_iter().map(|(n, d)| (n.into(), d)).collect();
        vars.sort_by(|a, b| a.0.cmp(&b.0));
        for w in vars.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Domain(format!("variable `{}` declared twice", w[0].0)));
            }
        }
        let mut offset = 0;
        let mut infos = Vec::with_capacity(vars.len());
        let mut index = HashMap::new();
        for (i, (name, domain)) in vars.into_iter().enumerate() {
            let w = domain.width();
            index.insert(name.clone(), i);
            infos.push(VarInfo { name, domain, offset });
            offset += w;
        }
        Ok(Space { vars: infos, slots: offset, index })
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn var(&self, name: &str) -> Option<&VarInfo> {
        self.index.get(name).map(|&i| &self.vars[i])
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    /// Number of states, saturating at `u128::MAX`.
    pub fn size(&self) -> u128 {
        self.vars
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.domain.cardinality()))
    }

    /// Domain of the scalar stored at `slot`.
    pub fn slot_domain(&self, slot: usize) -> &Domain {
        let v = self
            .vars
            .iter()
            .rev()
            .find(|v| v.offset <= slot)
            .expect("slot in range");
        v.domain.slot_domain()
    }

    /// All states in canonical order.
    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        let per_slot: Vec<Vec<i64>> = (0..self.slots)
            .map(|s| self.slot_domain(s).scalar_values())
            .collect();
        Odometer::new(per_slot).map(|v| State(v.into_boxed_slice()))
    }

    pub fn contains(&self, s: &State) -> bool {
        s.0.len() == self.slots
            && s.0
                .iter()
                .enumerate()
                .all(|(i, &v)| self.slot_domain(i).scalar_contains(v))
    }

    /// Renders a state as `a=true x=3 A=[1,2]`.
    pub fn show(&self, s: &State) -> String {
        self.vars
            .iter()
            .map(|v| format!("{}={}", v.name, self.show_var(v, s)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn show_var(&self, v: &VarInfo, s: &State) -> String {
        let slots = &s.0[v.offset..v.offset + v.domain.width()];
        if v.domain.is_array() {
            let items: Vec<String> = slots.iter().map(|&x| v.domain.format_slot(x)).collect();
            format!("[{}]", items.join(","))
        } else {
            v.domain.format_slot(slots[0])
        }
    }

    /// Parses a single value of `v`'s domain: `true`, `3`, `[1,2,3]`.
    pub fn parse_value(&self, v: &VarInfo, text: &str) -> Result<Vec<i64>> {
        let text = text.trim();
        let bad = || Error::Domain(format!("`{text}` is not a value of {} ({})", v.name, v.domain));
        let scalar = |t: &str| -> Result<i64> {
            let t = t.trim();
            let x = match v.domain.slot_domain() {
                Domain::Bool => match t {
                    "true" => 1,
                    "false" => 0,
                    _ => return Err(bad()),
                },
                _ => t.parse::<i64>().map_err(|_| bad())?,
            };
            if v.domain.scalar_contains(x) {
                Ok(x)
            } else {
                Err(bad())
            }
        };
        if v.domain.is_array() {
            let inner = text
                .strip_prefix('[')
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(bad)?;
            let items: Vec<i64> = inner.split(',').map(scalar).collect::<Result<_>>()?;
            if items.len() != v.domain.width() {
                return Err(bad());
            }
            Ok(items)
        } else {
            Ok(vec![scalar(text)?])
        }
    }

    /// Builds a state from `(name, value-text)` bindings covering every variable.
    pub fn state_from_bindings(&self, bindings: &[(String, String)]) -> Result<State> {
        let mut slots: Vec<Option<i64>> = vec![None; self.slots];
        for (name, text) in bindings {
            let v = self
                .var(name)
                .ok_or_else(|| Error::Domain(format!("unknown variable `{name}`")))?;
            let vals = self.parse_value(v, text)?;
            for (i, x) in vals.into_iter().enumerate() {
                if slots[v.offset + i].replace(x).is_some() {
                    return Err(Error::Domain(format!("variable `{name}` bound twice")));
                }
            }
        }
        let mut out = Vec::with_capacity(self.slots);
        for (i, s) in slots.into_iter().enumerate() {
            match s {
                Some(x) => out.push(x),
                None => {
                    let v = self.vars.iter().rev().find(|v| v.offset <= i).unwrap();
                    return Err(Error::Domain(format!("variable `{}` is not bound", v.name)));
                }
            }
        }
        Ok(State(out.into_boxed_slice()))
    }
}

/// A total assignment of values to the declared variables.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub(crate) Box<[i64]>);

impl State {
    pub fn from_slots(slots: Vec<i64>) -> State {
        State(slots.into_boxed_slice())
    }

    pub fn slots(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State{:?}", &self.0)
    }
}

/// Cartesian-product iterator over per-position value lists.
pub(crate) struct Odometer {
    values: Vec<Vec<i64>>,
    idx: Vec<usize>,
    done: bool,
}

impl Odometer {
    pub(crate) fn new(values: Vec<Vec<i64>>) -> Odometer {
        let done = values.iter().any(|v| v.is_empty());
        let idx = vec![0; values.len()];
        Odometer { values, idx, done }
    }
}

impl Iterator for Odometer {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let out: Vec<i64> = self
            .idx
            .iter()
            .zip(&self.values)
            .map(|(&i, v)| v[i])
            .collect();
        let mut pos = self.idx.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            self.idx[pos] += 1;
            if self.idx[pos] < self.values[pos].len() {
                break;
            }
            self.idx[pos] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> Space {
        Space::new([
            ("x", Domain::int(0, 2).unwrap()),
            ("a", Domain::Bool),
            ("A", Domain::array(Domain::int(0, 1).unwrap(), 2).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn layout_is_by_name() {
        let s = space();
        let names: Vec<&str> = s.vars().iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["A", "a", "x"]);
        assert_eq!(s.slots(), 4);
        assert_eq!(s.size(), 4 * 2 * 3);
    }

    #[test]
    fn enumeration_is_sorted_and_complete() {
        let s = space();
        let states: Vec<State> = s.states().collect();
        assert_eq!(states.len(), 24);
        assert!(states.windows(2).all(|w| w[0] < w[1]));
        assert!(states.iter().all(|st| s.contains(st)));
    }

    #[test]
    fn bindings_round_trip() {
        let s = space();
        let st = s
            .state_from_bindings(&[
                ("x".into(), "2".into()),
                ("a".into(), "true".into()),
                ("A".into(), "[1,0]".into()),
            ])
            .unwrap();
        assert_eq!(s.show(&st), "A=[1,0] a=true x=2");
        assert!(s.state_from_bindings(&[("x".into(), "2".into())]).is_err());
        assert!(s
            .state_from_bindings(&[
                ("x".into(), "5".into()),
                ("a".into(), "true".into()),
                ("A".into(), "[1,0]".into()),
            ])
            .is_err());
    }

    #[test]
    fn bad_domains() {
        assert!(Domain::int(3, 2).is_err());
        assert!(Domain::array(Domain::Bool, 0).is_err());
        assert!(Space::new([("x", Domain::Bool), ("x", Domain::Bool)]).is_err());
    }
}
