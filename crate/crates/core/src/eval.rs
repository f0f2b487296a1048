//! Expression evaluation over states.
//!
//! Expressions are compiled once against a [`Space`] so variable lookups
//! become slot offsets. Quantifier-bound indices live in a separate
//! `bound` slice, addressed by binding depth.

use crate::error::{Error, Result};
use crate::lang::ast::{BinOp, Expr, Func, UnOp};
use crate::rational::Rational;
use crate::space::{Domain, Space, State};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Rat(Rational),
    /// Array elements; booleans are stored as 0/1.
    Arr { elems: Vec<i64>, bools: bool },
}

impl Value {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            Value::Int(n) => Ok(Rational::from_int(*n)),
            Value::Rat(r) => Ok(r.clone()),
            v => Err(Error::Type(format!("expected a number, found {v:?}"))),
        }
    }

    /// Scalar slot encoding: booleans as 0/1, integers as themselves.
    pub fn to_slot(&self) -> Result<i64> {
        match self {
            Value::Bool(b) => Ok(*b as i64),
            Value::Int(n) => Ok(*n),
            v => Err(Error::Type(format!("expected a scalar, found {v:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
enum C {
    Lit(Value),
    Slot { slot: usize, bool: bool },
    Bound(usize),
    ArrVar { offset: usize, len: usize, bools: bool },
    Index(Box<C>, Box<C>),
    Slice(Box<C>, Option<Box<C>>, Option<Box<C>>),
    Store(Box<C>, Box<C>, Box<C>),
    Unary(UnOp, Box<C>),
    Binary(BinOp, Box<C>, Box<C>),
    Call(Func, Vec<C>),
    Reduce(Func, Box<C>),
    Iverson(Box<C>),
    Ite(Box<C>, Box<C>, Box<C>),
}

/// An expression resolved against a state space.
#[derive(Debug, Clone)]
pub struct Compiled {
    code: C,
}

/// Compiles `e`; `bound` lists quantifier variables, innermost last.
pub fn compile(e: &Expr, space: &Space, bound: &[String]) -> Result<Compiled> {
    Ok(Compiled { code: comp(e, space, bound)? })
}

fn comp(e: &Expr, space: &Space, bound: &[String]) -> Result<C> {
    let b = |x: &Expr| comp(x, space, bound).map(Box::new);
    Ok(match e {
        Expr::Int(n) => C::Lit(Value::Int(*n)),
        Expr::Bool(v) => C::Lit(Value::Bool(*v)),
        Expr::Rat(r) => C::Lit(Value::Rat(r.clone())),
        Expr::Var(name) => {
            if let Some(i) = bound.iter().rposition(|x| x == name) {
                C::Bound(i)
            } else {
                let v = space
                    .var(name)
                    .ok_or_else(|| Error::Type(format!("undeclared variable `{name}`")))?;
                match &v.domain {
                    Domain::Array { elem, len } => C::ArrVar { offset: v.offset, len: *len, bools: elem.is_bool() },
                    d => C::Slot { slot: v.offset, bool: d.is_bool() },
                }
            }
        }
        Expr::Index(a, i) => C::Index(b(a)?, b(i)?),
        Expr::Slice(a, lo, hi) => {
            let lo = match lo {
                Some(x) => Some(b(x)?),
                None => None,
            };
            let hi = match hi {
                Some(x) => Some(b(x)?),
                None => None,
            };
            C::Slice(b(a)?, lo, hi)
        }
        Expr::Store(a, i, v) => C::Store(b(a)?, b(i)?, b(v)?),
        Expr::Unary(op, x) => C::Unary(*op, b(x)?),
        Expr::Binary(op, l, r) => C::Binary(*op, b(l)?, b(r)?),
        Expr::Call(f, args) => C::Call(*f, args.iter().map(|a| comp(a, space, bound)).collect::<Result<_>>()?),
        Expr::Reduce(f, a) => C::Reduce(*f, b(a)?),
        Expr::Iverson(x) => C::Iverson(b(x)?),
        Expr::Ite(c, x, y) => C::Ite(b(c)?, b(x)?, b(y)?),
    })
}

impl Compiled {
    pub fn eval(&self, s: &State, bound: &[i64]) -> Result<Value> {
        ev(&self.code, s.slots(), bound)
    }

    pub fn eval_bool(&self, s: &State, bound: &[i64]) -> Result<bool> {
        match self.eval(s, bound)? {
            Value::Bool(b) => Ok(b),
            v => Err(Error::Type(format!("expected a boolean, found {v:?}"))),
        }
    }

    pub fn eval_rational(&self, s: &State, bound: &[i64]) -> Result<Rational> {
        self.eval(s, bound)?.to_rational()
    }

    /// Value as a 0/1 or integer slot, as used for observations.
    pub fn eval_slot(&self, s: &State, bound: &[i64]) -> Result<i64> {
        self.eval(s, bound)?.to_slot()
    }
}

fn int(v: Value) -> Result<i64> {
    match v {
        Value::Int(n) => Ok(n),
        Value::Rat(r) if r.is_integer() => r.to_i64().ok_or(Error::Overflow),
        v => Err(Error::Type(format!("expected an integer, found {v:?}"))),
    }
}

fn boolean(v: Value) -> Result<bool> {
    match v {
        Value::Bool(b) => Ok(b),
        v => Err(Error::Type(format!("expected a boolean, found {v:?}"))),
    }
}

fn arr(v: Value) -> Result<(Vec<i64>, bool)> {
    match v {
        Value::Arr { elems, bools } => Ok((elems, bools)),
        v => Err(Error::Type(format!("expected an array, found {v:?}"))),
    }
}

fn elem_value(x: i64, bools: bool) -> Value {
    if bools {
        Value::Bool(x != 0)
    } else {
        Value::Int(x)
    }
}

fn check_index(i: i64, len: usize) -> Result<usize> {
    if i < 0 || i as usize >= len {
        Err(Error::IndexOutOfBounds { index: i, len })
    } else {
        Ok(i as usize)
    }
}

fn num_op(op: BinOp, a: Value, b: Value) -> Result<Value> {
    if let (Value::Int(x), Value::Int(y)) = (&a, &b) {
        let (x, y) = (*x, *y);
        let r = match op {
            BinOp::Add => x.checked_add(y),
            BinOp::Sub => x.checked_sub(y),
            BinOp::Mul => x.checked_mul(y),
            BinOp::Max => Some(x.max(y)),
            BinOp::Min => Some(x.min(y)),
            _ => None,
        };
        if let Some(r) = r {
            return Ok(Value::Int(r));
        }
        if op != BinOp::Div {
            return Err(Error::Overflow);
        }
    }
    let (x, y) = (a.to_rational()?, b.to_rational()?);
    let r = match op {
        BinOp::Add => x + y,
        BinOp::Sub => x - y,
        BinOp::Mul => x * y,
        BinOp::Max => x.max(y),
        BinOp::Min => x.min(y),
        BinOp::Div => {
            if y.is_zero() {
                return Err(Error::DivisionByZero);
            }
            x / y
        }
        _ => unreachable!("numeric operator"),
    };
    Ok(match r.to_i64() {
        Some(n) if op != BinOp::Div || matches!(a, Value::Int(_)) && matches!(b, Value::Int(_)) => Value::Int(n),
        _ => Value::Rat(r),
    })
}

fn compare(op: BinOp, a: Value, b: Value) -> Result<bool> {
    use std::cmp::Ordering;
    let ord: Ordering = match (&a, &b) {
        (Value::Int(x), Value::Int(y)) => x.cmp(y),
        (Value::Bool(x), Value::Bool(y)) => x.cmp(y),
        _ => a.to_rational()?.cmp(&b.to_rational()?),
    };
    Ok(match op {
        BinOp::Eq => ord == Ordering::Equal,
        BinOp::Ne => ord != Ordering::Equal,
        BinOp::Lt => ord == Ordering::Less,
        BinOp::Le => ord != Ordering::Greater,
        BinOp::Gt => ord == Ordering::Greater,
        BinOp::Ge => ord != Ordering::Less,
        _ => unreachable!("comparison"),
    })
}

fn is_zero(v: &Value) -> bool {
    match v {
        Value::Int(n) => *n == 0,
        Value::Rat(r) => r.is_zero(),
        _ => false,
    }
}

fn ev(c: &C, s: &[i64], bound: &[i64]) -> Result<Value> {
    let e = |x: &C| ev(x, s, bound);
    Ok(match c {
        C::Lit(v) => v.clone(),
        C::Slot { slot, bool } => elem_value(s[*slot], *bool),
        C::Bound(i) => Value::Int(bound[*i]),
        C::ArrVar { offset, len, bools } => Value::Arr { elems: s[*offset..offset + len].to_vec(), bools: *bools },
        C::Index(a, i) => {
            if let C::ArrVar { offset, len, bools } = a.as_ref() {
                let k = check_index(int(e(i)?)?, *len)?;
                return Ok(elem_value(s[offset + k], *bools));
            }
            let (elems, bools) = arr(e(a)?)?;
            let k = check_index(int(e(i)?)?, elems.len())?;
            elem_value(elems[k], bools)
        }
        C::Slice(a, lo, hi) => {
            let (elems, bools) = arr(e(a)?)?;
            let n = elems.len() as i64;
            let lo = match lo {
                Some(x) => int(e(x)?)?.clamp(0, n),
                None => 0,
            };
            let hi = match hi {
                Some(x) => int(e(x)?)?.clamp(0, n),
                None => n,
            };
            let elems = if lo < hi { elems[lo as usize..hi as usize].to_vec() } else { Vec::new() };
            Value::Arr { elems, bools }
        }
        C::Store(a, i, v) => {
            let (mut elems, bools) = arr(e(a)?)?;
            let k = check_index(int(e(i)?)?, elems.len())?;
            elems[k] = e(v)?.to_slot()?;
            Value::Arr { elems, bools }
        }
        C::Unary(UnOp::Not, x) => Value::Bool(!boolean(e(x)?)?),
        C::Unary(UnOp::Neg, x) => match e(x)? {
            Value::Int(n) => Value::Int(n.checked_neg().ok_or(Error::Overflow)?),
            Value::Rat(r) => Value::Rat(-r),
            v => return Err(Error::Type(format!("cannot negate {v:?}"))),
        },
        C::Binary(op, l, r) => {
            use BinOp::*;
            match op {
                And => Value::Bool(boolean(e(l)?)? && boolean(e(r)?)?),
                Or => Value::Bool(boolean(e(l)?)? || boolean(e(r)?)?),
                Mul => {
                    let a = e(l)?;
                    if is_zero(&a) {
                        return Ok(a);
                    }
                    num_op(Mul, a, e(r)?)?
                }
                Add | Sub | Max | Min | Div => num_op(*op, e(l)?, e(r)?)?,
                IntDiv | Mod => {
                    let (a, b) = (int(e(l)?)?, int(e(r)?)?);
                    if b == 0 {
                        return Err(Error::DivisionByZero);
                    }
                    let r = if *op == IntDiv { a.checked_div_euclid(b) } else { a.checked_rem_euclid(b) };
                    Value::Int(r.ok_or(Error::Overflow)?)
                }
                BitAnd => Value::Int(int(e(l)?)? & int(e(r)?)?),
                Eq | Ne | Lt | Le | Gt | Ge => Value::Bool(compare(*op, e(l)?, e(r)?)?),
                In | NotIn => {
                    let x = e(l)?.to_slot()?;
                    let (elems, _) = arr(e(r)?)?;
                    Value::Bool(elems.contains(&x) == (*op == In))
                }
            }
        }
        C::Call(f, args) => {
            let mut acc = e(&args[0])?;
            let op = if *f == Func::Max { BinOp::Max } else { BinOp::Min };
            for a in &args[1..] {
                acc = num_op(op, acc, e(a)?)?;
            }
            acc
        }
        C::Reduce(f, a) => {
            let (elems, _) = arr(e(a)?)?;
            let r = match f {
                Func::Max => elems.iter().max(),
                Func::Min => elems.iter().min(),
            };
            Value::Int(*r.ok_or_else(|| Error::Domain("max or min of an empty slice".into()))?)
        }
        C::Iverson(x) => Value::Int(boolean(e(x)?)? as i64),
        C::Ite(cnd, x, y) => {
            if boolean(e(cnd)?)? {
                e(x)?
            } else {
                e(y)?
            }
        }
    })
}

/// Evaluates a closed-over-`space` expression at a state.
pub fn eval_expr(e: &Expr, space: &Space, s: &State) -> Result<Value> {
    compile(e, space, &[])?.eval(s, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_expr;

    fn space() -> Space {
        Space::new([
            ("x", Domain::Int { lo: 0, hi: 9 }),
            ("H", Domain::Int { lo: 0, hi: 63 }),
            ("A", Domain::array(Domain::Int { lo: 0, hi: 3 }, 3).unwrap()),
            ("c", Domain::Bool),
        ])
        .unwrap()
    }

    fn at(space: &Space, bindings: &[(&str, &str)]) -> State {
        let b: Vec<(String, String)> = bindings.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect();
        space.state_from_bindings(&b).unwrap()
    }

    fn ev(src: &str, s: &State) -> Result<Value> {
        eval_expr(&parse_expr(src).unwrap(), &space(), s)
    }

    #[test]
    fn arithmetic() {
        let sp = space();
        let s = at(&sp, &[("x", "6"), ("H", "7"), ("A", "[1,2,3]"), ("c", "true")]);
        assert_eq!(ev("[x mod 3 = 0]", &s).unwrap(), Value::Int(1));
        let s7 = at(&sp, &[("x", "7"), ("H", "7"), ("A", "[1,2,3]"), ("c", "true")]);
        assert_eq!(ev("x div 2", &s7).unwrap(), Value::Int(3));
        assert_eq!(ev("H & 0b11", &s).unwrap(), Value::Int(3));
        assert_eq!(ev("-7 mod 3", &s).unwrap(), Value::Int(2));
        assert_eq!(ev("-7 div 2", &s).unwrap(), Value::Int(-4));
        assert_eq!(ev("x / 4", &s).unwrap(), Value::Rat(Rational::new(3, 2)));
        assert_eq!(ev("x / 3", &s).unwrap(), Value::Int(2));
        assert_eq!(ev("1/10 * [c]", &s).unwrap(), Value::Rat(Rational::new(1, 10)));
    }

    #[test]
    fn arrays_and_errors() {
        let sp = space();
        let s = at(&sp, &[("x", "2"), ("H", "0"), ("A", "[1,2,3]"), ("c", "false")]);
        assert_eq!(ev("x in A", &s).unwrap(), Value::Bool(true));
        assert_eq!(ev("x in A[2:]", &s).unwrap(), Value::Bool(false));
        assert_eq!(ev("x in A[:9]", &s).unwrap(), Value::Bool(true));
        assert_eq!(ev("A[0 := 3][0]", &s).unwrap(), Value::Int(3));
        assert_eq!(ev("max(A)", &s).unwrap(), Value::Int(3));
        assert_eq!(ev("A[x + 1]", &s), Err(Error::IndexOutOfBounds { index: 3, len: 3 }));
        assert_eq!(ev("x div 0", &s), Err(Error::DivisionByZero));
        // Short-circuiting guards the out-of-bounds access.
        assert_eq!(ev("x != 2 and A[x + 1] = 0", &s).unwrap(), Value::Bool(false));
        assert_eq!(ev("[x = 0] * A[x + 1]", &s).unwrap(), Value::Int(0));
    }
}
