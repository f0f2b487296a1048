//! Static typing of programs and gain expressions.
//!
//! Besides ordinary typing, gain atoms must be non-negative by
//! construction: Iverson brackets, non-negative literals and variables
//! whose domains are non-negative, closed under `+ * / div mod & max min`
//! and conditionals, or integer expressions whose interval over the
//! declared domains is non-negative.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::lang::ast::*;
use crate::lang::printer::{expr_to_string, gain_to_string};
use crate::space::Domain;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ty {
    Bool,
    Int,
    /// Rational-valued, produced by `/` or rational literals.
    Num,
    /// Array of a scalar type; the length is unknown for slices.
    Array(Box<Ty>, Option<usize>),
}

impl Ty {
    fn name(&self) -> String {
        match self {
            Ty::Bool => "bool".into(),
            Ty::Int => "int".into(),
            Ty::Num => "rational".into(),
            Ty::Array(e, Some(n)) => format!("{}[{n}]", e.name()),
            Ty::Array(e, None) => format!("{} slice", e.name()),
        }
    }

    fn is_numeric(&self) -> bool {
        matches!(self, Ty::Int | Ty::Num)
    }

    fn of_domain(d: &Domain) -> Ty {
        match d {
            Domain::Bool => Ty::Bool,
            Domain::Int { .. } => Ty::Int,
            Domain::Array { elem, len } => Ty::Array(Box::new(Ty::of_domain(elem)), Some(*len)),
        }
    }
}

/// Typing environment: declared variables plus quantifier-bound indices.
#[derive(Debug, Clone, Default)]
pub struct Env {
    vars: HashMap<String, Domain>,
    /// Bound index and whether all its values are non-negative.
    bound: Vec<(String, bool)>,
}

impl Env {
    pub fn new(decls: &[Decl]) -> Env {
        Env { vars: decls.iter().map(|d| (d.name.clone(), d.domain.clone())).collect(), bound: Vec::new() }
    }

    fn bound(&self, name: &str) -> Option<bool> {
        self.bound.iter().rev().find(|(n, _)| n == name).map(|(_, nn)| *nn)
    }
}

fn mismatch(e: &Expr, want: &str, got: &Ty) -> Error {
    Error::Type(format!("`{}`: expected {want}, found {}", expr_to_string(e), got.name()))
}

pub fn type_of(e: &Expr, env: &Env) -> Result<Ty> {
    let want = |x: &Expr, t: Ty| -> Result<()> {
        let got = type_of(x, env)?;
        if got == t || (t == Ty::Num && got == Ty::Int) {
            Ok(())
        } else {
            Err(mismatch(x, &t.name(), &got))
        }
    };
    let numeric = |x: &Expr| -> Result<Ty> {
        let t = type_of(x, env)?;
        if t.is_numeric() {
            Ok(t)
        } else {
            Err(mismatch(x, "a number", &t))
        }
    };
    let array = |x: &Expr| -> Result<(Ty, Option<usize>)> {
        match type_of(x, env)? {
            Ty::Array(elem, len) => Ok((*elem, len)),
            t => Err(mismatch(x, "an array", &t)),
        }
    };
    Ok(match e {
        Expr::Int(_) => Ty::Int,
        Expr::Bool(_) => Ty::Bool,
        Expr::Rat(_) => Ty::Num,
        Expr::Var(v) => {
            if env.bound(v).is_some() {
                Ty::Int
            } else {
                match env.vars.get(v) {
                    Some(d) => Ty::of_domain(d),
                    None => return Err(Error::Type(format!("undeclared variable `{v}`"))),
                }
            }
        }
        Expr::Index(a, i) => {
            let (elem, len) = array(a)?;
            want(i, Ty::Int)?;
            if let (Expr::Int(k), Some(n)) = (i.as_ref(), len) {
                if *k < 0 || *k as usize >= n {
                    return Err(Error::Type(format!(
                        "`{}`: index {k} out of bounds for length {n}",
                        expr_to_string(e)
                    )));
                }
            }
            elem
        }
        Expr::Slice(a, lo, hi) => {
            let (elem, _) = array(a)?;
            for b in [lo, hi].into_iter().flatten() {
                want(b, Ty::Int)?;
            }
            Ty::Array(Box::new(elem), None)
        }
        Expr::Store(a, i, v) => {
            let (elem, len) = array(a)?;
            want(i, Ty::Int)?;
            want(v, elem.clone())?;
            Ty::Array(Box::new(elem), len)
        }
        Expr::Unary(UnOp::Neg, x) => numeric(x)?,
        Expr::Unary(UnOp::Not, x) => {
            want(x, Ty::Bool)?;
            Ty::Bool
        }
        Expr::Binary(op, l, r) => {
            use BinOp::*;
            match op {
                Add | Sub | Mul | Max | Min => {
                    let (a, b) = (numeric(l)?, numeric(r)?);
                    if a == Ty::Int && b == Ty::Int {
                        Ty::Int
                    } else {
                        Ty::Num
                    }
                }
                Div => {
                    numeric(l)?;
                    numeric(r)?;
                    Ty::Num
                }
                IntDiv | Mod | BitAnd => {
                    want(l, Ty::Int)?;
                    want(r, Ty::Int)?;
                    Ty::Int
                }
                Eq | Ne => {
                    let (a, b) = (type_of(l, env)?, type_of(r, env)?);
                    let ok = (a.is_numeric() && b.is_numeric()) || (a == Ty::Bool && b == Ty::Bool);
                    if !ok {
                        return Err(Error::Type(format!(
                            "`{}`: cannot compare {} with {}",
                            expr_to_string(e),
                            a.name(),
                            b.name()
                        )));
                    }
                    Ty::Bool
                }
                Lt | Le | Gt | Ge => {
                    numeric(l)?;
                    numeric(r)?;
                    Ty::Bool
                }
                And | Or => {
                    want(l, Ty::Bool)?;
                    want(r, Ty::Bool)?;
                    Ty::Bool
                }
                In | NotIn => {
                    let t = type_of(l, env)?;
                    let (elem, _) = array(r)?;
                    let ok = (t == Ty::Bool) == (elem == Ty::Bool) && !matches!(t, Ty::Array(..));
                    if !ok {
                        return Err(mismatch(l, &elem.name(), &t));
                    }
                    Ty::Bool
                }
            }
        }
        Expr::Call(_, args) => {
            let mut all_int = true;
            for a in args {
                all_int &= numeric(a)? == Ty::Int;
            }
            if all_int {
                Ty::Int
            } else {
                Ty::Num
            }
        }
        Expr::Reduce(_, a) => {
            let (elem, _) = array(a)?;
            if elem != Ty::Int {
                return Err(mismatch(a, "an int array", &Ty::Array(Box::new(elem), None)));
            }
            Ty::Int
        }
        Expr::Iverson(b) => {
            want(b, Ty::Bool)?;
            Ty::Int
        }
        Expr::Ite(c, a, b) => {
            want(c, Ty::Bool)?;
            let (ta, tb) = (type_of(a, env)?, type_of(b, env)?);
            match (&ta, &tb) {
                _ if ta == tb => ta,
                (x, y) if x.is_numeric() && y.is_numeric() => Ty::Num,
                _ => return Err(mismatch(b, &ta.name(), &tb)),
            }
        }
    })
}

/// Whether `e` is non-negative by construction.
pub fn nonneg(e: &Expr, env: &Env) -> bool {
    use BinOp::*;
    let nn = |x: &Expr| nonneg(x, env);
    match e {
        Expr::Int(n) => *n >= 0,
        Expr::Rat(r) => !r.is_negative(),
        Expr::Bool(_) => false,
        Expr::Var(v) => match env.bound(v) {
            Some(b) => b,
            None => env.vars.get(v).is_some_and(|d| !d.is_array() && d.is_non_negative()),
        },
        Expr::Index(a, _) | Expr::Reduce(_, a) => array_nonneg(a, env),
        Expr::Iverson(_) => true,
        Expr::Ite(_, a, b) => nn(a) && nn(b),
        Expr::Binary(op, l, r) => match op {
            Add | Mul | Div | IntDiv | Min => nn(l) && nn(r),
            Max => nn(l) || nn(r),
            Mod => true,
            BitAnd => nn(l) || nn(r),
            _ => int_bounds(e, env).is_some_and(|(lo, _)| lo >= 0),
        },
        Expr::Call(Func::Max, args) => args.iter().any(nn),
        Expr::Call(Func::Min, args) => args.iter().all(nn),
        _ => int_bounds(e, env).is_some_and(|(lo, _)| lo >= 0),
    }
}

/// Interval of an integer expression over declared variables.
fn int_bounds(e: &Expr, env: &Env) -> Option<(i64, i64)> {
    use BinOp::*;
    let of = |d: &Domain| match d.slot_domain() {
        Domain::Int { lo, hi } => Some((*lo, *hi)),
        _ => None,
    };
    match e {
        Expr::Int(n) => Some((*n, *n)),
        Expr::Iverson(_) => Some((0, 1)),
        Expr::Var(v) if env.bound(v).is_none() => env.vars.get(v).filter(|d| !d.is_array()).and_then(of),
        Expr::Index(a, _) | Expr::Reduce(_, a) => match &**a {
            Expr::Var(v) => env.vars.get(v).filter(|d| d.is_array()).and_then(of),
            _ => None,
        },
        Expr::Unary(UnOp::Neg, x) => {
            let (lo, hi) = int_bounds(x, env)?;
            Some((hi.checked_neg()?, lo.checked_neg()?))
        }
        Expr::Binary(op, l, r) => {
            let (a, b) = (int_bounds(l, env)?, int_bounds(r, env)?);
            match op {
                Add => Some((a.0.checked_add(b.0)?, a.1.checked_add(b.1)?)),
                Sub => Some((a.0.checked_sub(b.1)?, a.1.checked_sub(b.0)?)),
                Max => Some((a.0.max(b.0), a.1.max(b.1))),
                Min => Some((a.0.min(b.0), a.1.min(b.1))),
                _ => None,
            }
        }
        _ => None,
    }
}

fn array_nonneg(a: &Expr, env: &Env) -> bool {
    match a {
        Expr::Var(v) => env.vars.get(v).is_some_and(|d| d.is_array() && d.is_non_negative()),
        Expr::Slice(b, ..) => array_nonneg(b, env),
        Expr::Store(b, _, v) => array_nonneg(b, env) && nonneg(v, env),
        _ => false,
    }
}

fn check_atom(e: &Expr, env: &Env) -> Result<()> {
    let t = type_of(e, env)?;
    if !t.is_numeric() {
        return Err(mismatch(e, "a numeric gain", &t));
    }
    if !nonneg(e, env) {
        return Err(Error::Type(format!(
            "gain atom `{}` is not non-negative by construction",
            expr_to_string(e)
        )));
    }
    Ok(())
}

fn check_gain_in(g: &Gain, env: &mut Env) -> Result<()> {
    match g {
        Gain::Atom(e) => check_atom(e, env),
        Gain::Max(v) | Gain::Plus(v) => {
            if v.is_empty() {
                return Err(Error::Type("empty MAX or PLUS".into()));
            }
            v.iter().try_for_each(|x| check_gain_in(x, env))
        }
        Gain::And(e, b) => {
            check_atom(e, env)?;
            check_gain_in(b, env)
        }
        Gain::QuantMax { var, set, body } => {
            if env.vars.contains_key(var) || env.bound(var).is_some() {
                return Err(Error::Type(format!(
                    "bound variable `{var}` in `{}` shadows another variable",
                    gain_to_string(g)
                )));
            }
            if set.is_empty() {
                return Err(Error::RangeEmpty(format!("MAX {var}")));
            }
            let nn = set.values().iter().all(|&x| x >= 0);
            env.bound.push((var.clone(), nn));
            let r = check_gain_in(body, env);
            env.bound.pop();
            r
        }
    }
}

pub fn check_gain(g: &Gain, decls: &[Decl]) -> Result<()> {
    check_gain_in(g, &mut Env::new(decls))
}

fn assignable(target: &Ty, value: &Ty) -> bool {
    match (target, value) {
        (Ty::Array(a, n), Ty::Array(b, m)) => a == b && n == m,
        (a, b) => a == b,
    }
}

fn check_stmt(s: &Stmt, env: &Env) -> Result<()> {
    let at = |e: Error| match e {
        Error::Type(m) => Error::Type(format!("{}: {m}", s.pos)),
        other => other,
    };
    match &s.kind {
        StmtKind::Skip => Ok(()),
        StmtKind::Assign(pairs) => {
            let mut seen = BTreeSet::new();
            for (l, e) in pairs {
                let name = l.name();
                let dom = env
                    .vars
                    .get(name)
                    .ok_or_else(|| Error::Type(format!("{}: undeclared variable `{name}`", s.pos)))?;
                let target = match l {
                    LValue::Var(_) => {
                        if !seen.insert(name.to_string()) {
                            return Err(Error::Type(format!("{}: `{name}` assigned twice", s.pos)));
                        }
                        Ty::of_domain(dom)
                    }
                    LValue::Elem(_, i) => {
                        if !dom.is_array() {
                            return Err(Error::Type(format!("{}: `{name}` is not an array", s.pos)));
                        }
                        let ti = type_of(i, env).map_err(at)?;
                        if ti != Ty::Int {
                            return Err(at(mismatch(i, "int", &ti)));
                        }
                        Ty::of_domain(dom.slot_domain())
                    }
                };
                let got = type_of(e, env).map_err(at)?;
                if !assignable(&target, &got) {
                    return Err(at(mismatch(e, &target.name(), &got)));
                }
            }
            if pairs.iter().any(|(l, _)| matches!(l, LValue::Var(_)))
                && pairs.iter().any(|(l, _)| matches!(l, LValue::Elem(n, _) if seen.contains(n)))
            {
                return Err(Error::Type(format!("{}: array assigned both whole and by element", s.pos)));
            }
            Ok(())
        }
        StmtKind::Seq(v) => v.iter().try_for_each(|x| check_stmt(x, env)),
        StmtKind::If(g, t, e) => {
            let tg = type_of(g, env).map_err(at)?;
            if tg != Ty::Bool {
                return Err(at(mismatch(g, "bool", &tg)));
            }
            check_stmt(t, env)?;
            check_stmt(e, env)
        }
        StmtKind::While { guard, body, invariant } => {
            let tg = type_of(guard, env).map_err(at)?;
            if tg != Ty::Bool {
                return Err(at(mismatch(guard, "bool", &tg)));
            }
            if let Some(inv) = invariant {
                check_gain_in(inv, &mut env.clone()).map_err(at)?;
            }
            check_stmt(body, env)
        }
        StmtKind::Print(e) => {
            let t = type_of(e, env).map_err(at)?;
            if !matches!(t, Ty::Bool | Ty::Int) {
                return Err(at(Error::Type(format!(
                    "`{}`: only bool and int values can be printed, found {}",
                    expr_to_string(e),
                    t.name()
                ))));
            }
            Ok(())
        }
    }
}

pub fn check_program(p: &Program) -> Result<()> {
    let mut names = BTreeSet::new();
    for d in &p.decls {
        if !names.insert(d.name.as_str()) {
            return Err(Error::Type(format!("variable `{}` declared twice", d.name)));
        }
    }
    let env = Env::new(&p.decls);
    check_stmt(&p.body, &env)?;
    if let Some(g) = &p.post {
        check_gain_in(g, &mut env.clone())?;
    }
    Ok(())
}
