//! Text formats for priors and hypers.
//!
//! A prior is one of
//!
//! ```text
//! uniform
//! product a:{true:1/3,false:2/3} b:uniform c:false
//! pointset x=0; x=3; x=6
//! a=true x=3 : 1/6        (one entry per line)
//! ```
//!
//! Variables a `product` leaves out are uniform. A hyper is a sequence of
//! `inner <k> : <outer>` headers, each followed by the inner's entries in
//! table form, exactly as `qif run` prints it.

use qif_core::{Dist, Error, Hyper, Rational, Result, Space, State};

fn strip_comments(text: &str) -> Vec<&str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect()
}

/// Splits on whitespace outside brackets and braces.
fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
        } else if !c.is_whitespace() {
            cur.push(c);
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// Splits on `sep` outside brackets.
fn split_top(text: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    for c in text.chars() {
        match c {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            _ => {}
        }
        if c == sep && depth == 0 {
            out.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    out.push(cur);
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn parse_prob(text: &str) -> Result<Rational> {
    text.trim().parse::<Rational>().map_err(|e| bad(format!("bad probability `{text}`: {}", e.0)))
}

/// Parses `a=true x=3 A=[1,2]` into a state.
pub fn parse_state(space: &Space, text: &str) -> Result<State> {
    let mut bindings = Vec::new();
    for w in words(text) {
        let (name, value) = w.split_once('=').ok_or_else(|| bad(format!("expected name=value, found `{w}`")))?;
        bindings.push((name.to_string(), value.to_string()));
    }
    space.state_from_bindings(&bindings)
}

fn parse_entry(space: &Space, line: &str) -> Result<(State, Rational)> {
    let (lhs, p) = line.rsplit_once(':').ok_or_else(|| bad(format!("expected `state : p`, found `{line}`")))?;
    Ok((parse_state(space, lhs)?, parse_prob(p)?))
}

/// Every value of one variable, as slot vectors.
fn all_values(space: &Space, name: &str) -> Result<Vec<Vec<i64>>> {
    let v = space.var(name).ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
    let scalars = v.domain.slot_domain().scalar_values();
    let mut out = vec![Vec::new()];
    for _ in 0..v.domain.width() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                scalars.iter().map(move |&x| {
                    let mut p = prefix.clone();
                    p.push(x);
                    p
                })
            })
            .collect();
    }
    Ok(out)
}

fn parse_marginal(space: &Space, name: &str, spec: &str) -> Result<Vec<(Vec<i64>, Rational)>> {
    let v = space.var(name).ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
    if spec == "uniform" {
        let vals = all_values(space, name)?;
        let p = Rational::new(1, vals.len() as i64);
        return Ok(vals.into_iter().map(|x| (x, p.clone())).collect());
    }
    if let Some(inner) = spec.strip_prefix('{').and_then(|s| s.strip_suffix('}')) {
        let mut out = Vec::new();
        for item in split_top(inner, ',') {
            let (val, p) = item.rsplit_once(':').ok_or_else(|| bad(format!("expected value:p, found `{item}`")))?;
            out.push((space.parse_value(v, val)?, parse_prob(p)?));
        }
        return Ok(out);
    }
    Ok(vec![(space.parse_value(v, spec)?, Rational::one())])
}

fn parse_product(space: &Space, rest: &str) -> Result<Dist<State>> {
    let mut marginals: Vec<Option<Vec<(Vec<i64>, Rational)>>> = vec![None; space.vars().len()];
    for w in words(rest) {
        let (name, spec) = w.split_once(':').ok_or_else(|| bad(format!("expected name:spec, found `{w}`")))?;
        let i = space
            .vars()
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| bad(format!("unknown variable `{name}`")))?;
        if marginals[i].is_some() {
            return Err(bad(format!("variable `{name}` given twice")));
        }
        marginals[i] = Some(parse_marginal(space, name, spec)?);
    }
    let mut acc: Vec<(Vec<i64>, Rational)> = vec![(Vec::new(), Rational::one())];
    for (i, m) in marginals.into_iter().enumerate() {
        let m = match m {
            Some(m) => m,
            None => parse_marginal(space, &space.vars()[i].name, "uniform")?,
        };
        acc = acc
            .iter()
            .flat_map(|(slots, p)| {
                m.iter().filter(|(_, q)| !q.is_zero()).map(move |(x, q)| {
                    let mut s = slots.clone();
                    s.extend(x);
                    (s, p * q)
                })
            })
            .collect();
    }
    Dist::from_entries(acc.into_iter().map(|(s, p)| (State::from_slots(s), p)))
}

/// Parses a prior over `space`.
pub fn parse_prior(space: &Space, text: &str) -> Result<Dist<State>> {
    let lines = strip_comments(text);
    let joined = lines.join("\n");
    let head = joined.split_whitespace().next().unwrap_or("");
    match head {
        "" => Err(bad("empty prior")),
        "uniform" if joined.trim() == "uniform" => Dist::uniform(space.states()),
        "product" => parse_product(space, &joined["product".len()..]),
        "pointset" => {
            let rest = &joined["pointset".len()..];
            let mut states = Vec::new();
            for part in rest.split([';', '\n']) {
                if !part.trim().is_empty() {
                    states.push(parse_state(space, part)?);
                }
            }
            Dist::uniform(states)
        }
        _ => Dist::from_entries(lines.iter().map(|l| parse_entry(space, l)).collect::<Result<Vec<_>>>()?),
    }
}

/// Parses a hyper; text without `inner` headers is read as a single prior.
pub fn parse_hyper(space: &Space, text: &str) -> Result<Hyper<State>> {
    let lines = strip_comments(text);
    if !lines.iter().any(|l| l.starts_with("inner")) {
        return Ok(qif_core::unit(parse_prior(space, text)?));
    }
    let mut raw = Vec::new();
    let mut cur: Option<(Rational, Vec<(State, Rational)>)> = None;
    for l in lines {
        if let Some(h) = l.strip_prefix("inner") {
            if let Some((w, entries)) = cur.take() {
                raw.push((Dist::from_entries(entries)?, w));
            }
            let (_, w) = h.rsplit_once(':').ok_or_else(|| bad(format!("expected `inner k : p`, found `{l}`")))?;
            cur = Some((parse_prob(w)?, Vec::new()));
        } else {
            let entry = parse_entry(space, l)?;
            cur.as_mut().ok_or_else(|| bad("entry before the first `inner` header"))?.1.push(entry);
        }
    }
    if let Some((w, entries)) = cur {
        raw.push((Dist::from_entries(entries)?, w));
    }
    let total: Rational = raw.iter().map(|(_, w)| w.clone()).sum();
    if !total.is_one() {
        return Err(Error::SumNotOne(total));
    }
    Dist::reduce(raw)
}

/// Reads `spec` as a file if one exists at that path, else as inline text.
pub fn read_spec(spec: &str) -> std::io::Result<String> {
    let path = std::path::Path::new(spec);
    if path.is_file() {
        std::fs::read_to_string(path)
    } else {
        Ok(spec.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qif_core::lang::parse_decls;
    use qif_core::semantics::space_of;

    fn space() -> Space {
        space_of(&parse_decls("hidden a, b: bool; hidden x: int[0..3];").unwrap()).unwrap()
    }

    #[test]
    fn formats_agree() {
        let sp = space();
        let product = parse_prior(&sp, "product a:{true:1/3,false:2/3} b:true").unwrap();
        assert_eq!(product.len(), 8);
        let s = parse_state(&sp, "a=true b=true x=2").unwrap();
        assert_eq!(product.prob(&s), Rational::new(1, 12));
        let table = parse_prior(&sp, "a=true b=true x=2 : 1/2\n# note\na=false b=true x=0 : 1/2").unwrap();
        let points = parse_prior(&sp, "pointset a=true b=true x=2; a=false b=true x=0").unwrap();
        assert_eq!(table, points);
        assert_eq!(parse_prior(&sp, "uniform").unwrap().len(), 16);
        assert!(parse_prior(&sp, "a=true b=true x=2 : 1/3").is_err());
        assert!(parse_prior(&sp, "product z:uniform").is_err());
    }

    #[test]
    fn hyper_round_trip() {
        let sp = space();
        let text = "inner 1 : 1/4\n  a=true b=true x=0 : 1\ninner 2 : 3/4\n  a=false b=true x=0 : 1/3\n  a=false b=true x=1 : 2/3\n";
        let h = parse_hyper(&sp, text).unwrap();
        assert_eq!(h.len(), 2);
        assert!(parse_hyper(&sp, "inner 1 : 1/2\n  a=true b=true x=0 : 1\n").is_err());
    }
}
