//! Syntactic operations on expressions, gains and statements: traversal,
//! free variables, capture-avoiding substitution, constant folding and the
//! visible-variable desugaring.

use std::collections::{BTreeSet, HashMap};

use crate::lang::ast::*;
use crate::rational::Rational;

pub fn for_each_child(e: &Expr, mut f: impl FnMut(&Expr)) {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Rat(_) | Expr::Var(_) => {}
        Expr::Index(a, b) | Expr::Binary(_, a, b) => {
            f(a);
            f(b);
        }
        Expr::Slice(a, lo, hi) => {
            f(a);
            if let Some(lo) = lo {
                f(lo);
            }
            if let Some(hi) = hi {
                f(hi);
            }
        }
        Expr::Store(a, b, c) | Expr::Ite(a, b, c) => {
            f(a);
            f(b);
            f(c);
        }
        Expr::Unary(_, a) | Expr::Reduce(_, a) | Expr::Iverson(a) => f(a),
        Expr::Call(_, args) => args.iter().for_each(f),
    }
}

/// Rebuilds `e` with `f` applied to each direct child.
pub fn map_children(e: &Expr, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
    let mut b = |x: &Expr| Box::new(f(x));
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Rat(_) | Expr::Var(_) => e.clone(),
        Expr::Index(a, i) => Expr::Index(b(a), b(i)),
        Expr::Binary(op, l, r) => Expr::Binary(*op, b(l), b(r)),
        Expr::Slice(a, lo, hi) => {
            let a = b(a);
            let lo = lo.as_ref().map(|x| b(x));
            let hi = hi.as_ref().map(|x| b(x));
            Expr::Slice(a, lo, hi)
        }
        Expr::Store(a, i, v) => Expr::Store(b(a), b(i), b(v)),
        Expr::Ite(c, x, y) => Expr::Ite(b(c), b(x), b(y)),
        Expr::Unary(op, a) => Expr::Unary(*op, b(a)),
        Expr::Reduce(fun, a) => Expr::Reduce(*fun, b(a)),
        Expr::Iverson(a) => Expr::Iverson(b(a)),
        Expr::Call(fun, args) => Expr::Call(*fun, args.iter().map(&mut f).collect()),
    }
}

pub fn free_vars(e: &Expr) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_vars(e, &mut out);
    out
}

fn collect_vars(e: &Expr, out: &mut BTreeSet<String>) {
    if let Expr::Var(v) = e {
        out.insert(v.clone());
    }
    for_each_child(e, |c| collect_vars(c, out));
}

pub fn gain_free_vars(g: &Gain) -> BTreeSet<String> {
    match g {
        Gain::Atom(e) => free_vars(e),
        Gain::Max(v) | Gain::Plus(v) => v.iter().flat_map(gain_free_vars).collect(),
        Gain::And(e, b) => {
            let mut s = free_vars(e);
            s.extend(gain_free_vars(b));
            s
        }
        Gain::QuantMax { var, body, .. } => {
            let mut s = gain_free_vars(body);
            s.remove(var);
            s
        }
    }
}

/// Every variable name occurring anywhere, bound or free.
pub fn gain_all_names(g: &Gain, out: &mut BTreeSet<String>) {
    match g {
        Gain::Atom(e) => collect_vars(e, out),
        Gain::Max(v) | Gain::Plus(v) => v.iter().for_each(|x| gain_all_names(x, out)),
        Gain::And(e, b) => {
            collect_vars(e, out);
            gain_all_names(b, out);
        }
        Gain::QuantMax { var, body, .. } => {
            out.insert(var.clone());
            gain_all_names(body, out);
        }
    }
}

/// Simultaneous substitution of variables by expressions.
pub fn subst_expr(e: &Expr, map: &HashMap<String, Expr>) -> Expr {
    match e {
        Expr::Var(v) => map.get(v).cloned().unwrap_or_else(|| e.clone()),
        _ => map_children(e, |c| subst_expr(c, map)),
    }
}

pub fn subst1(e: &Expr, var: &str, with: &Expr) -> Expr {
    let mut m = HashMap::new();
    m.insert(var.to_string(), with.clone());
    subst_expr(e, &m)
}

fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let mut n = format!("{base}'");
    while avoid.contains(&n) {
        n.push('\'');
    }
    n
}

/// Simultaneous, capture-avoiding substitution into a gain expression.
pub fn subst_gain(g: &Gain, map: &HashMap<String, Expr>) -> Gain {
    if map.is_empty() {
        return g.clone();
    }
    match g {
        Gain::Atom(e) => Gain::Atom(subst_expr(e, map)),
        Gain::Max(v) => Gain::Max(v.iter().map(|x| subst_gain(x, map)).collect()),
        Gain::Plus(v) => Gain::Plus(v.iter().map(|x| subst_gain(x, map)).collect()),
        Gain::And(e, b) => Gain::And(subst_expr(e, map), Box::new(subst_gain(b, map))),
        Gain::QuantMax { var, set, body } => {
            let mut inner = map.clone();
            inner.remove(var);
            let captures = inner.values().any(|r| free_vars(r).contains(var));
            if !captures {
                return Gain::QuantMax { var: var.clone(), set: set.clone(), body: Box::new(subst_gain(body, &inner)) };
            }
            let mut avoid = BTreeSet::new();
            gain_all_names(body, &mut avoid);
            for (k, r) in &inner {
                avoid.insert(k.clone());
                avoid.extend(free_vars(r));
            }
            let renamed = fresh_name(var, &avoid);
            let mut rename = HashMap::new();
            rename.insert(var.clone(), Expr::Var(renamed.clone()));
            let body = subst_gain(body, &rename);
            Gain::QuantMax { var: renamed, set: set.clone(), body: Box::new(subst_gain(&body, &inner)) }
        }
    }
}

/// Value of a closed integer expression, if it folds to one.
pub fn const_int(e: &Expr) -> Option<i64> {
    match fold(e) {
        Expr::Int(n) => Some(n),
        _ => None,
    }
}

fn lit(e: &Expr) -> Option<Rational> {
    e.as_rational()
}

fn int_lit(e: &Expr) -> Option<i64> {
    match e {
        Expr::Int(n) => Some(*n),
        _ => None,
    }
}

fn bool_lit(e: &Expr) -> Option<bool> {
    match e {
        Expr::Bool(b) => Some(*b),
        _ => None,
    }
}

fn cmp_holds(op: BinOp, o: std::cmp::Ordering) -> bool {
    use std::cmp::Ordering::*;
    match op {
        BinOp::Eq => o == Equal,
        BinOp::Ne => o != Equal,
        BinOp::Lt => o == Less,
        BinOp::Le => o != Greater,
        BinOp::Gt => o == Greater,
        BinOp::Ge => o != Less,
        _ => unreachable!(),
    }
}

fn flip(op: BinOp) -> BinOp {
    match op {
        BinOp::Lt => BinOp::Gt,
        BinOp::Le => BinOp::Ge,
        BinOp::Gt => BinOp::Lt,
        BinOp::Ge => BinOp::Le,
        o => o,
    }
}

/// Splits `e` into `base + k` for an integer offset `k`.
fn offset_form(e: &Expr) -> (Expr, i64) {
    match e {
        Expr::Binary(BinOp::Add, a, b) => {
            if let Some(k) = int_lit(b) {
                let (base, j) = offset_form(a);
                if let Some(s) = j.checked_add(k) {
                    return (base, s);
                }
            }
            (e.clone(), 0)
        }
        Expr::Binary(BinOp::Sub, a, b) => {
            if let Some(k) = int_lit(b) {
                let (base, j) = offset_form(a);
                if let Some(s) = k.checked_neg().and_then(|nk| j.checked_add(nk)) {
                    return (base, s);
                }
            }
            (e.clone(), 0)
        }
        _ => (e.clone(), 0),
    }
}

fn with_offset(base: Expr, k: i64) -> Expr {
    if let Some(b) = int_lit(&base) {
        if let Some(s) = b.checked_add(k) {
            return Expr::Int(s);
        }
    }
    match k.cmp(&0) {
        std::cmp::Ordering::Equal => base,
        std::cmp::Ordering::Greater => Expr::bin(BinOp::Add, base, Expr::Int(k)),
        std::cmp::Ordering::Less => match k.checked_neg() {
            Some(nk) => Expr::bin(BinOp::Sub, base, Expr::Int(nk)),
            None => Expr::bin(BinOp::Add, base, Expr::Int(k)),
        },
    }
}

/// Pushes a negation one level inward.
pub fn negate(e: &Expr) -> Expr {
    match e {
        Expr::Bool(b) => Expr::Bool(!b),
        Expr::Unary(UnOp::Not, x) => (**x).clone(),
        Expr::Binary(op, l, r) => {
            if let Some(n) = op.negated() {
                return Expr::Binary(n, l.clone(), r.clone());
            }
            match op {
                BinOp::And => Expr::bin(BinOp::Or, negate(l), negate(r)),
                BinOp::Or => Expr::bin(BinOp::And, negate(l), negate(r)),
                _ => Expr::not(e.clone()),
            }
        }
        _ => Expr::not(e.clone()),
    }
}

fn arith(op: BinOp, a: &Rational, b: &Rational) -> Option<Rational> {
    Some(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => {
            if b.is_zero() {
                return None;
            }
            a / b
        }
        BinOp::Max => a.clone().max(b.clone()),
        BinOp::Min => a.clone().min(b.clone()),
        _ => return None,
    })
}

fn int_arith(op: BinOp, a: i64, b: i64) -> Option<i64> {
    match op {
        BinOp::Add => a.checked_add(b),
        BinOp::Sub => a.checked_sub(b),
        BinOp::Mul => a.checked_mul(b),
        BinOp::IntDiv => a.checked_div_euclid(b),
        BinOp::Mod => a.checked_rem_euclid(b),
        BinOp::BitAnd => Some(a & b),
        BinOp::Max => Some(a.max(b)),
        BinOp::Min => Some(a.min(b)),
        _ => None,
    }
}

/// Bottom-up syntactic simplification. Semantics-preserving wherever the
/// input is defined; it may make an erroring expression defined.
pub fn fold(e: &Expr) -> Expr {
    let e = map_children(e, fold);
    fold_node(e)
}

fn fold_node(e: Expr) -> Expr {
    match e {
        Expr::Unary(UnOp::Neg, x) => match *x {
            Expr::Int(n) if n != i64::MIN => Expr::Int(-n),
            Expr::Rat(r) => Expr::Rat(-r),
            Expr::Unary(UnOp::Neg, y) => *y,
            other => Expr::Unary(UnOp::Neg, Box::new(other)),
        },
        Expr::Unary(UnOp::Not, x) => {
            let n = negate(&x);
            match n {
                Expr::Unary(UnOp::Not, _) => n,
                other => fold_node(other),
            }
        }
        Expr::Iverson(b) => match *b {
            Expr::Bool(true) => Expr::Int(1),
            Expr::Bool(false) => Expr::Int(0),
            other => Expr::Iverson(Box::new(other)),
        },
        Expr::Ite(c, a, b) => match bool_lit(&c) {
            Some(true) => *a,
            Some(false) => *b,
            None if a == b => *a,
            None => Expr::Ite(c, a, b),
        },
        Expr::Slice(a, lo, hi) => {
            let lo_zero = lo.as_ref().map_or(true, |l| int_lit(l) == Some(0));
            if lo_zero && hi.is_none() {
                *a
            } else {
                Expr::Slice(a, lo, hi)
            }
        }
        Expr::Index(a, i) => {
            if let Expr::Store(base, j, v) = a.as_ref() {
                match (int_lit(&i), int_lit(j)) {
                    (Some(x), Some(y)) if x == y => return (**v).clone(),
                    (Some(_), Some(_)) => return fold_node(Expr::Index(base.clone(), i)),
                    _ => {}
                }
                if i == *j {
                    return (**v).clone();
                }
            }
            Expr::Index(a, i)
        }
        Expr::Call(f, args) => {
            if args.iter().all(|a| lit(a).is_some()) {
                let vals = args.iter().map(|a| lit(a).unwrap());
                let r = match f {
                    Func::Max => vals.reduce(|a, b| a.max(b)),
                    Func::Min => vals.reduce(|a, b| a.min(b)),
                };
                return Expr::from_rational(r.expect("non-empty call"));
            }
            Expr::Call(f, args)
        }
        Expr::Binary(op, l, r) => fold_binary(op, *l, *r),
        other => other,
    }
}

fn fold_binary(op: BinOp, l: Expr, r: Expr) -> Expr {
    use BinOp::*;
    match op {
        And => match (bool_lit(&l), bool_lit(&r)) {
            (Some(false), _) | (_, Some(false)) => Expr::Bool(false),
            (Some(true), _) => r,
            (_, Some(true)) => l,
            _ if l == r => l,
            _ => Expr::bin(And, l, r),
        },
        Or => match (bool_lit(&l), bool_lit(&r)) {
            (Some(true), _) | (_, Some(true)) => Expr::Bool(true),
            (Some(false), _) => r,
            (_, Some(false)) => l,
            _ if l == r => l,
            _ => Expr::bin(Or, l, r),
        },
        op if op.is_comparison() => fold_comparison(op, l, r),
        Add | Sub | Mul | Div | IntDiv | Mod | BitAnd | Max | Min => {
            if let (Some(a), Some(b)) = (int_lit(&l), int_lit(&r)) {
                if op != Div {
                    if let Some(v) = int_arith(op, a, b) {
                        return Expr::Int(v);
                    }
                }
            }
            if let (Some(a), Some(b)) = (lit(&l), lit(&r)) {
                if !matches!(op, IntDiv | Mod | BitAnd) {
                    if let Some(v) = arith(op, &a, &b) {
                        return Expr::from_rational(v);
                    }
                }
            }
            fold_arith(op, l, r)
        }
        _ => Expr::bin(op, l, r),
    }
}

fn fold_arith(op: BinOp, l: Expr, r: Expr) -> Expr {
    use BinOp::*;
    let is = |e: &Expr, n: i64| int_lit(e) == Some(n);
    match op {
        Add | Sub => {
            if op == Add && is(&l, 0) {
                return r;
            }
            if is(&r, 0) {
                return l;
            }
            if int_lit(&r).is_some() {
                let (base, k) = offset_form(&Expr::bin(op, l.clone(), r.clone()));
                if base != Expr::bin(op, l.clone(), r.clone()) {
                    return with_offset(base, k);
                }
            }
            Expr::bin(op, l, r)
        }
        Mul => {
            if is(&l, 0) || is(&r, 0) {
                return Expr::Int(0);
            }
            if is(&l, 1) {
                return r;
            }
            if is(&r, 1) {
                return l;
            }
            match (l, r) {
                (Expr::Iverson(p), Expr::Iverson(q)) => {
                    fold_node(Expr::Iverson(Box::new(fold_binary(And, *p, *q))))
                }
                (Expr::Iverson(p), Expr::Binary(Mul, q, rest)) if matches!(*q, Expr::Iverson(_)) => {
                    let Expr::Iverson(q) = *q else { unreachable!() };
                    let merged = fold_node(Expr::Iverson(Box::new(fold_binary(And, *p, *q))));
                    fold_arith(Mul, merged, *rest)
                }
                (l, r) => Expr::bin(Mul, l, r),
            }
        }
        IntDiv if is(&r, 1) => l,
        Div if is(&r, 1) => l,
        _ => Expr::bin(op, l, r),
    }
}

fn fold_comparison(op: BinOp, l: Expr, r: Expr) -> Expr {
    if let (Some(a), Some(b)) = (lit(&l), lit(&r)) {
        return Expr::Bool(cmp_holds(op, a.cmp(&b)));
    }
    if let (Some(a), Some(b)) = (bool_lit(&l), bool_lit(&r)) {
        return match op {
            BinOp::Eq => Expr::Bool(a == b),
            BinOp::Ne => Expr::Bool(a != b),
            _ => Expr::bin(op, l, r),
        };
    }
    if l == r && !l.is_literal() {
        return Expr::Bool(cmp_holds(op, std::cmp::Ordering::Equal));
    }
    // Boolean equality against a literal.
    if matches!(op, BinOp::Eq | BinOp::Ne) {
        if let Some(b) = bool_lit(&r) {
            return if (op == BinOp::Eq) == b { l } else { fold_node(Expr::not(l)) };
        }
        if let Some(b) = bool_lit(&l) {
            return if (op == BinOp::Eq) == b { r } else { fold_node(Expr::not(r)) };
        }
    }
    // Literal to the right, constant offsets moved across.
    if lit(&l).is_some() && lit(&r).is_none() {
        return fold_comparison(flip(op), r, l);
    }
    // `k - b op c` to `b op' k - c`.
    if let (Some(c), Expr::Binary(BinOp::Sub, a, b)) = (int_lit(&r), &l) {
        if let Some(d) = int_lit(a).and_then(|k| k.checked_sub(c)) {
            return fold_comparison(flip(op), (**b).clone(), Expr::Int(d));
        }
    }
    if let Some(c) = int_lit(&r) {
        let (base, k) = offset_form(&l);
        if k != 0 {
            if let Some(c2) = c.checked_sub(k) {
                return Expr::bin(op, base, Expr::Int(c2));
            }
        }
    }
    Expr::bin(op, l, r)
}

/// Constant-folds every expression in a gain without restructuring it.
pub fn fold_gain_exprs(g: &Gain) -> Gain {
    match g {
        Gain::Atom(e) => Gain::Atom(fold(e)),
        Gain::Max(v) => Gain::Max(v.iter().map(fold_gain_exprs).collect()),
        Gain::Plus(v) => Gain::Plus(v.iter().map(fold_gain_exprs).collect()),
        Gain::And(e, b) => Gain::And(fold(e), Box::new(fold_gain_exprs(b))),
        Gain::QuantMax { var, set, body } => Gain::QuantMax {
            var: var.clone(),
            set: set.clone(),
            body: Box::new(fold_gain_exprs(body)),
        },
    }
}

/// Flattens nested sequences and drops singleton wrappers.
pub fn flatten(s: Stmt) -> Stmt {
    let pos = s.pos;
    let kind = match s.kind {
        StmtKind::Seq(v) => {
            let mut out = Vec::new();
            for x in v {
                match flatten(x) {
                    Stmt { kind: StmtKind::Seq(inner), .. } => out.extend(inner),
                    y => out.push(y),
                }
            }
            if out.len() == 1 {
                return out.pop().unwrap();
            }
            if out.is_empty() {
                StmtKind::Skip
            } else {
                StmtKind::Seq(out)
            }
        }
        StmtKind::If(g, t, e) => StmtKind::If(g, Box::new(flatten(*t)), Box::new(flatten(*e))),
        StmtKind::While { guard, body, invariant } => {
            StmtKind::While { guard, body: Box::new(flatten(*body)), invariant }
        }
        k => k,
    };
    Stmt { kind, pos }
}

/// Inserts `print v` after every assignment to a visible `v` and marks all
/// declarations hidden.
pub fn desugar_visible(p: &Program) -> Program {
    let visible: BTreeSet<String> = p
        .decls
        .iter()
        .filter(|d| d.visibility == Visibility::Visible)
        .map(|d| d.name.clone())
        .collect();
    let decls = p
        .decls
        .iter()
        .map(|d| Decl { visibility: Visibility::Hidden, ..d.clone() })
        .collect();
    let body = if visible.is_empty() { p.body.clone() } else { flatten(insert_prints(&p.body, &visible)) };
    Program { decls, body, post: p.post.clone() }
}

fn insert_prints(s: &Stmt, visible: &BTreeSet<String>) -> Stmt {
    let kind = match &s.kind {
        StmtKind::Assign(pairs) => {
            let mut names: Vec<&str> = Vec::new();
            for (l, _) in pairs {
                if visible.contains(l.name()) && !names.contains(&l.name()) {
                    names.push(l.name());
                }
            }
            if names.is_empty() {
                return s.clone();
            }
            let mut v = vec![s.clone()];
            for n in names {
                v.push(Stmt::at(StmtKind::Print(Expr::Var(n.to_string())), s.pos));
            }
            StmtKind::Seq(v)
        }
        StmtKind::Seq(v) => StmtKind::Seq(v.iter().map(|x| insert_prints(x, visible)).collect()),
        StmtKind::If(g, t, e) => {
            StmtKind::If(g.clone(), Box::new(insert_prints(t, visible)), Box::new(insert_prints(e, visible)))
        }
        StmtKind::While { guard, body, invariant } => StmtKind::While {
            guard: guard.clone(),
            body: Box::new(insert_prints(body, visible)),
            invariant: invariant.clone(),
        },
        k => k.clone(),
    };
    Stmt { kind, pos: s.pos }
}
