//! Structural evaluation of gain expressions.
//!
//! A distribution is carried as a measure: states with integer weights
//! over one shared denominator, so expectations need no per-term gcd.
//! `AND` rescales the measure, `MAX` and `PLUS` combine the values of
//! their operands, and a quantifier takes the maximum over its instances.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::dist::{Dist, Hyper};
use crate::error::{Error, Result};
use crate::eval::{compile, Compiled, Value};
use crate::lang::ast::{Expr, Gain};
use crate::lang::printer::expr_to_string;
use crate::rational::Rational;
use crate::space::{Space, State};

enum CGain {
    Atom(Compiled, Expr),
    Max(Vec<CGain>),
    Plus(Vec<CGain>),
    And(Compiled, Expr, Box<CGain>),
    Quant(Vec<i64>, Box<CGain>),
}

fn compile_gain(g: &Gain, space: &Space, bound: &mut Vec<String>) -> Result<CGain> {
    Ok(match g {
        Gain::Atom(e) => CGain::Atom(compile(e, space, bound)?, e.clone()),
        Gain::Max(v) => CGain::Max(v.iter().map(|x| compile_gain(x, space, bound)).collect::<Result<_>>()?),
        Gain::Plus(v) => CGain::Plus(v.iter().map(|x| compile_gain(x, space, bound)).collect::<Result<_>>()?),
        Gain::And(e, b) => CGain::And(compile(e, space, bound)?, e.clone(), Box::new(compile_gain(b, space, bound)?)),
        Gain::QuantMax { var, set, body } => {
            if set.is_empty() {
                return Err(Error::RangeEmpty(format!("MAX {var}")));
            }
            bound.push(var.clone());
            let body = compile_gain(body, space, bound);
            bound.pop();
            CGain::Quant(set.values(), Box::new(body?))
        }
    })
}

/// Weighted states over a common denominator.
#[derive(Clone)]
struct Measure<'d> {
    items: Vec<(&'d State, BigInt)>,
    denom: BigInt,
}

impl<'d> Measure<'d> {
    fn of(d: &'d Dist<State>) -> Measure<'d> {
        let denom = d.iter().fold(BigInt::one(), |acc, (_, p)| acc.lcm(p.denom()));
        let items = d.iter().map(|(s, p)| (s, p.numer() * (&denom / p.denom()))).collect();
        Measure { items, denom }
    }
}

struct Evaluator<'a> {
    space: &'a Space,
    bound: Vec<i64>,
}

fn atom_value(space: &Space, c: &Compiled, e: &Expr, s: &State, bound: &[i64]) -> Result<Value> {
    let v = c.eval(s, bound)?;
    let negative = match &v {
        Value::Int(n) => *n < 0,
        Value::Rat(r) => r.is_negative(),
        other => return Err(Error::Type(format!("gain atom `{}` has value {other:?}", expr_to_string(e)))),
    };
    if negative {
        return Err(Error::NegativeAtom {
            atom: expr_to_string(e),
            value: v.to_rational()?,
            state: space.show(s),
        });
    }
    Ok(v)
}

impl Evaluator<'_> {
    fn eval(&mut self, g: &CGain, m: &Measure) -> Result<Rational> {
        match g {
            CGain::Atom(c, e) => {
                let mut acc = BigInt::zero();
                let mut frac = Rational::zero();
                for (s, w) in &m.items {
                    match atom_value(self.space, c, e, s, &self.bound)? {
                        Value::Int(n) => {
                            if n != 0 {
                                acc += w * BigInt::from(n);
                            }
                        }
                        Value::Rat(r) => frac += r * Rational::from_bigint(w.clone()),
                        _ => unreachable!("checked numeric"),
                    }
                }
                Ok((Rational::from_bigint(acc) + frac) / Rational::from_bigint(m.denom.clone()))
            }
            CGain::Max(v) => {
                let mut best: Option<Rational> = None;
                for x in v {
                    let r = self.eval(x, m)?;
                    best = Some(match best {
                        Some(b) => b.max(r),
                        None => r,
                    });
                }
                Ok(best.unwrap_or_else(Rational::zero))
            }
            CGain::Plus(v) => {
                let mut acc = Rational::zero();
                for x in v {
                    acc += self.eval(x, m)?;
                }
                Ok(acc)
            }
            CGain::And(c, e, body) => {
                let scaled = self.scale(c, e, m)?;
                if scaled.items.is_empty() {
                    return Ok(Rational::zero());
                }
                self.eval(body, &scaled)
            }
            CGain::Quant(values, body) => {
                let mut best: Option<Rational> = None;
                for &v in values {
                    self.bound.push(v);
                    let r = self.eval(body, m);
                    self.bound.pop();
                    let r = r?;
                    best = Some(match best {
                        Some(b) => b.max(r),
                        None => r,
                    });
                }
                Ok(best.unwrap_or_else(Rational::zero))
            }
        }
    }

    /// Multiplies each weight by the scalar `c`, dropping zeros.
    fn scale<'d>(&self, c: &Compiled, e: &Expr, m: &Measure<'d>) -> Result<Measure<'d>> {
        let mut vals = Vec::with_capacity(m.items.len());
        let mut lcm = BigInt::one();
        for (s, _) in &m.items {
            let v = atom_value(self.space, c, e, s, &self.bound)?.to_rational()?;
            lcm = lcm.lcm(v.denom());
            vals.push(v);
        }
        let mut items = Vec::with_capacity(m.items.len());
        for ((s, w), v) in m.items.iter().zip(vals) {
            if v.is_zero() {
                continue;
            }
            let factor = v.numer() * (&lcm / v.denom());
            items.push((*s, w * factor));
        }
        Ok(Measure { items, denom: &m.denom * lcm })
    }
}

/// Vulnerability `V[E](d)`: the adversary's best expected gain on `d`.
pub fn eval_gain(g: &Gain, space: &Space, d: &Dist<State>) -> Result<Rational> {
    let c = compile_gain(g, space, &mut Vec::new())?;
    Evaluator { space, bound: Vec::new() }.eval(&c, &Measure::of(d))
}

/// Conditional expected vulnerability over the inners of a hyper.
pub fn eval_gain_hyper(g: &Gain, space: &Space, h: &Hyper<State>) -> Result<Rational> {
    let c = compile_gain(g, space, &mut Vec::new())?;
    let mut ev = Evaluator { space, bound: Vec::new() };
    let mut acc = Rational::zero();
    for (inner, w) in h.iter() {
        acc += w * ev.eval(&c, &Measure::of(inner))?;
    }
    Ok(acc)
}

/// A gain compiled once for repeated evaluation on many distributions.
pub struct GainEvaluator<'a> {
    space: &'a Space,
    code: CGain,
}

impl<'a> GainEvaluator<'a> {
    pub fn new(g: &Gain, space: &'a Space) -> Result<GainEvaluator<'a>> {
        Ok(GainEvaluator { space, code: compile_gain(g, space, &mut Vec::new())? })
    }

    pub fn eval(&self, d: &Dist<State>) -> Result<Rational> {
        Evaluator { space: self.space, bound: Vec::new() }.eval(&self.code, &Measure::of(d))
    }

    pub fn eval_hyper(&self, h: &Hyper<State>) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (inner, w) in h.iter() {
            acc += w * self.eval(inner)?;
        }
        Ok(acc)
    }

    /// Value at a point distribution.
    pub fn eval_point(&self, s: &State) -> Result<Rational> {
        let m = Measure { items: vec![(s, BigInt::one())], denom: BigInt::one() };
        Evaluator { space: self.space, bound: Vec::new() }.eval(&self.code, &m)
    }
}

/// Expectation of a numeric expression on `d`.
pub fn expectation(e: &Expr, space: &Space, d: &Dist<State>) -> Result<Rational> {
    let c = compile(e, space, &[])?;
    d.try_expectation(|s| c.eval_rational(s, &[]))
}
