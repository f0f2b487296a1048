//! Semantics-preserving simplification of gain expressions.
//!
//! Structural rules push `AND` down to the atoms and standard summands of
//! a `PLUS` into its non-standard operand. Semantic rules work on truth
//! tables over the finite domains of an expression's free variables:
//! constant atoms become literals, dominated `MAX` operands and quantifier
//! instances are dropped, disjoint Iverson addends merge, and Iverson
//! contents are minimised to a disjunctive normal form, treating truth
//! value combinations that no valuation realises as don't-cares.
//!
//! A valuation on which an expression fails to evaluate counts as a
//! don't-care when deciding whether to drop an operand, and blocks every
//! other semantic rewrite.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use crate::error::Result;
use crate::eval::{compile, Value};
use crate::gain::normal::NormalForm;
use crate::lang::ast::*;
use crate::lang::printer::gain_to_string;
use crate::lang::transform::{fold, free_vars, gain_all_names, gain_free_vars, negate, subst_gain};
use crate::rational::Rational;
use crate::space::{Odometer, Space, State};

/// Largest number of valuations a truth table may have.
pub const TABLE_LIMIT: u128 = 1 << 16;

/// Most propositional atoms an Iverson bracket may have for minimisation.
const QM_ATOMS: usize = 10;

struct Table {
    scope: Vec<String>,
    rows: Vec<(State, Vec<i64>)>,
}

type TableKey = (Vec<String>, Vec<(String, Vec<i64>)>);

pub struct Simplifier<'a> {
    space: &'a Space,
    scope: Vec<(String, Vec<i64>)>,
    tables: HashMap<TableKey, Option<Rc<Table>>>,
}

fn sort_key(g: &Gain) -> String {
    gain_to_string(g)
}

/// Renames `var` in a quantifier so it avoids `avoid`.
fn rename_bound(var: &str, body: &Gain, avoid: &BTreeSet<String>) -> (String, Gain) {
    let mut taken = avoid.clone();
    gain_all_names(body, &mut taken);
    let mut fresh = format!("{var}'");
    while taken.contains(&fresh) {
        fresh.push('\'');
    }
    let mut m = HashMap::new();
    m.insert(var.to_string(), Expr::Var(fresh.clone()));
    (fresh.clone(), subst_gain(body, &m))
}

fn sum_terms(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Binary(BinOp::Add, l, r) => {
            sum_terms(l, out);
            sum_terms(r, out);
        }
        _ => out.push(e.clone()),
    }
}

fn build_sum(terms: Vec<Expr>) -> Expr {
    let mut it = terms.into_iter();
    let first = it.next().unwrap_or(Expr::Int(0));
    it.fold(first, |acc, t| fold(&Expr::bin(BinOp::Add, acc, t)))
}

/// Boolean formula over numbered propositional atoms.
#[derive(Debug, Clone)]
enum Bf {
    Const(bool),
    Atom(usize),
    Not(Box<Bf>),
    And(Box<Bf>, Box<Bf>),
    Or(Box<Bf>, Box<Bf>),
}

impl Bf {
    fn eval(&self, v: u32) -> bool {
        match self {
            Bf::Const(b) => *b,
            Bf::Atom(i) => v >> i & 1 == 1,
            Bf::Not(x) => !x.eval(v),
            Bf::And(a, b) => a.eval(v) && b.eval(v),
            Bf::Or(a, b) => a.eval(v) || b.eval(v),
        }
    }

    fn leaves(&self) -> usize {
        match self {
            Bf::Const(_) => 0,
            Bf::Atom(_) => 1,
            Bf::Not(x) => x.leaves(),
            Bf::And(a, b) | Bf::Or(a, b) => a.leaves() + b.leaves(),
        }
    }
}

fn to_bf(e: &Expr, atoms: &mut Vec<Expr>) -> Bf {
    let atom = |x: Expr, atoms: &mut Vec<Expr>| match atoms.iter().position(|a| *a == x) {
        Some(i) => Bf::Atom(i),
        None => {
            atoms.push(x);
            Bf::Atom(atoms.len() - 1)
        }
    };
    match e {
        Expr::Bool(b) => Bf::Const(*b),
        Expr::Unary(UnOp::Not, x) => Bf::Not(Box::new(to_bf(x, atoms))),
        Expr::Binary(BinOp::And, l, r) => Bf::And(Box::new(to_bf(l, atoms)), Box::new(to_bf(r, atoms))),
        Expr::Binary(BinOp::Or, l, r) => Bf::Or(Box::new(to_bf(l, atoms)), Box::new(to_bf(r, atoms))),
        Expr::Binary(op @ (BinOp::Ne | BinOp::NotIn | BinOp::Ge | BinOp::Gt), l, r) => {
            let pos = op.negated().expect("negatable comparison");
            Bf::Not(Box::new(atom(Expr::Binary(pos, l.clone(), r.clone()), atoms)))
        }
        _ => atom(e.clone(), atoms),
    }
}

/// Propositional atoms of every Iverson bracket in `e`.
fn collect_brackets(e: &Expr, atoms: &mut Vec<Expr>, bfs: &mut Vec<Bf>) {
    if let Expr::Iverson(b) = e {
        bfs.push(to_bf(b, atoms));
        return;
    }
    crate::lang::transform::for_each_child(e, |c| collect_brackets(c, atoms, bfs));
}

/// An implicant: the bits in `care` must equal those in `value`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Implicant {
    care: u32,
    value: u32,
}

impl Implicant {
    fn covers(&self, m: u32) -> bool {
        m & self.care == self.value
    }

    fn literals(&self) -> u32 {
        self.care.count_ones()
    }
}

fn prime_implicants(n: usize, terms: &[u32]) -> Vec<Implicant> {
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut current: BTreeSet<Implicant> = terms.iter().map(|&t| Implicant { care: full, value: t }).collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let mut next = BTreeSet::new();
        let mut used = HashSet::new();
        let list: Vec<Implicant> = current.iter().copied().collect();
        let set: HashSet<Implicant> = list.iter().copied().collect();
        for a in &list {
            for bit in 0..n {
                let b = 1u32 << bit;
                if a.care & b == 0 || a.value & b != 0 {
                    continue;
                }
                let partner = Implicant { care: a.care, value: a.value | b };
                if set.contains(&partner) {
                    used.insert(*a);
                    used.insert(partner);
                    next.insert(Implicant { care: a.care & !b, value: a.value & !b });
                }
            }
        }
        for a in list {
            if !used.contains(&a) {
                primes.insert(a);
            }
        }
        current = next;
    }
    primes.into_iter().collect()
}

/// Cheapest cover of `on` by prime implicants: fewest terms, then fewest
/// literals. Exact search with a node budget, then greedy.
fn min_cover(on: &[u32], primes: &[Implicant]) -> Vec<Implicant> {
    fn cost(c: &[Implicant]) -> (usize, u32) {
        (c.len(), c.iter().map(Implicant::literals).sum())
    }
    fn search(
        uncovered: &[u32],
        primes: &[Implicant],
        chosen: &mut Vec<Implicant>,
        best: &mut Option<Vec<Implicant>>,
        budget: &mut usize,
    ) {
        if *budget == 0 {
            return;
        }
        *budget -= 1;
        if uncovered.is_empty() {
            if best.as_ref().is_none_or(|b| cost(chosen) < cost(b)) {
                *best = Some(chosen.clone());
            }
            return;
        }
        if let Some(b) = best {
            if chosen.len() + 1 > b.len() {
                return;
            }
        }
        let pivot = uncovered
            .iter()
            .min_by_key(|&&m| primes.iter().filter(|p| p.covers(m)).count())
            .copied()
            .unwrap();
        let mut options: Vec<&Implicant> = primes.iter().filter(|p| p.covers(pivot)).collect();
        options.sort_by_key(|p| (p.literals(), **p));
        for p in options {
            chosen.push(*p);
            let rest: Vec<u32> = uncovered.iter().copied().filter(|&m| !p.covers(m)).collect();
            search(&rest, primes, chosen, best, budget);
            chosen.pop();
        }
    }
    let mut best = None;
    let mut budget = 20_000;
    search(on, primes, &mut Vec::new(), &mut best, &mut budget);
    if let Some(b) = best {
        return b;
    }
    let mut uncovered: Vec<u32> = on.to_vec();
    let mut chosen = Vec::new();
    while !uncovered.is_empty() {
        let p = primes
            .iter()
            .max_by_key(|p| {
                let n = uncovered.iter().filter(|&&m| p.covers(m)).count();
                (n, std::cmp::Reverse(p.literals()))
            })
            .copied()
            .unwrap();
        uncovered.retain(|&m| !p.covers(m));
        chosen.push(p);
    }
    chosen
}

fn literal(atom: &Expr, positive: bool) -> Expr {
    if positive {
        atom.clone()
    } else {
        fold(&negate(atom))
    }
}

fn render_dnf(cover: &[Implicant], atoms: &[Expr]) -> Expr {
    let mut terms: Vec<Vec<(usize, bool)>> = cover
        .iter()
        .map(|imp| {
            (0..atoms.len())
                .filter(|i| imp.care >> i & 1 == 1)
                .map(|i| (i, imp.value >> i & 1 == 1))
                .collect()
        })
        .collect();
    terms.sort_by_key(|t| t.iter().map(|&(i, pos)| (i, !pos)).collect::<Vec<_>>());
    let conj = |t: &Vec<(usize, bool)>| {
        let mut it = t.iter().map(|&(i, pos)| literal(&atoms[i], pos));
        let first = it.next().unwrap_or(Expr::Bool(true));
        it.fold(first, |acc, l| Expr::bin(BinOp::And, acc, l))
    };
    let mut it = terms.iter().map(conj);
    let first = it.next().unwrap_or(Expr::Bool(false));
    it.fold(first, |acc, t| Expr::bin(BinOp::Or, acc, t))
}

/// Values of a numeric expression on the rows of a table.
struct Profile {
    vals: Vec<Option<Value>>,
    /// Rows where the value is defined and non-zero.
    support: Vec<usize>,
    negative: bool,
}

fn value_le(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => x <= y,
        _ => matches!((a.to_rational(), b.to_rational()), (Ok(x), Ok(y)) if x <= y),
    }
}

impl Profile {
    /// Pointwise `<=` wherever both sides are defined.
    fn le(&self, other: &Profile) -> bool {
        let at = |r: usize| match (&self.vals[r], &other.vals[r]) {
            (Some(x), Some(y)) => value_le(x, y),
            _ => true,
        };
        if other.negative {
            (0..self.vals.len()).all(at)
        } else {
            self.support.iter().all(|&r| at(r))
        }
    }
}

/// Indices of the non-zero profiles not dominated by another; of equal
/// profiles the first is kept.
fn undominated_refs(ps: &[&Profile]) -> Vec<usize> {
    let live: Vec<usize> = (0..ps.len()).filter(|&i| !ps[i].support.is_empty()).collect();
    live.iter()
        .copied()
        .filter(|&i| !live.iter().any(|&j| j != i && ps[i].le(ps[j]) && (j < i || !ps[j].le(ps[i]))))
        .collect()
}

fn undominated(ps: &[Profile]) -> Vec<usize> {
    undominated_refs(&ps.iter().collect::<Vec<_>>())
}

fn expr_size(e: &Expr) -> usize {
    let mut n = 1;
    crate::lang::transform::for_each_child(e, |c| n += expr_size(c));
    n
}

impl<'a> Simplifier<'a> {
    pub fn new(space: &'a Space) -> Simplifier<'a> {
        Simplifier { space, scope: Vec::new(), tables: HashMap::new() }
    }

    fn scope_names(&self) -> Vec<String> {
        self.scope.iter().map(|(n, _)| n.clone()).collect()
    }

    fn bound_values(&self, name: &str) -> Option<&Vec<i64>> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    /// Truth table over the free variables of `exprs`.
    fn table(&mut self, exprs: &[&Expr]) -> Option<Rc<Table>> {
        let mut free = BTreeSet::new();
        for e in exprs {
            free.extend(free_vars(e));
        }
        let mut declared = Vec::new();
        let mut bound = Vec::new();
        for v in &free {
            if let Some(vals) = self.bound_values(v) {
                bound.push((v.clone(), vals.clone()));
            } else if self.space.var(v).is_some() {
                declared.push(v.clone());
            } else {
                return None;
            }
        }
        let key = (declared.clone(), bound.clone());
        if let Some(t) = self.tables.get(&key) {
            return t.clone();
        }
        let t = self.build_table(&declared, &bound).map(Rc::new);
        self.tables.insert(key, t.clone());
        t
    }

    fn build_table(&self, declared: &[String], bound: &[(String, Vec<i64>)]) -> Option<Table> {
        let mut size: u128 = 1;
        for v in declared {
            size = size.saturating_mul(self.space.var(v)?.domain.cardinality());
        }
        for (_, vals) in bound {
            size = size.saturating_mul(vals.len() as u128);
        }
        if size > TABLE_LIMIT {
            return None;
        }
        let base: Vec<i64> = (0..self.space.slots()).map(|s| self.space.slot_domain(s).min_value()).collect();
        let mut dims: Vec<Vec<i64>> = Vec::new();
        let mut slots = Vec::new();
        for v in declared {
            let info = self.space.var(v)?;
            for k in 0..info.domain.width() {
                slots.push(info.offset + k);
                dims.push(info.domain.scalar_values());
            }
        }
        let scope = self.scope_names();
        let mut bslots = Vec::new();
        for (name, vals) in bound {
            bslots.push(scope.iter().rposition(|n| n == name)?);
            dims.push(vals.clone());
        }
        let default_bound: Vec<i64> = self.scope.iter().map(|(_, v)| v.first().copied().unwrap_or(0)).collect();
        let rows = Odometer::new(dims)
            .map(|vals| {
                let mut st = base.clone();
                let mut b = default_bound.clone();
                for (i, &slot) in slots.iter().enumerate() {
                    st[slot] = vals[i];
                }
                for (j, &bs) in bslots.iter().enumerate() {
                    b[bs] = vals[slots.len() + j];
                }
                (State::from_slots(st), b)
            })
            .collect();
        Some(Table { scope, rows })
    }

    fn values(&self, e: &Expr, t: &Table) -> Option<Vec<Option<Value>>> {
        let c = compile(e, self.space, &t.scope).ok()?;
        Some(t.rows.iter().map(|(s, b)| c.eval(s, b).ok()).collect())
    }

    fn profile(&self, e: &Expr, t: &Table) -> Option<Profile> {
        let vals = self.values(e, t)?;
        let mut support = Vec::new();
        let mut negative = false;
        for (r, v) in vals.iter().enumerate() {
            match v {
                None => {}
                Some(Value::Int(0)) => {}
                Some(Value::Int(n)) => {
                    negative |= *n < 0;
                    support.push(r);
                }
                Some(Value::Rat(q)) => {
                    negative |= q.is_negative();
                    if !q.is_zero() {
                        support.push(r);
                    }
                }
                Some(_) => return None,
            }
        }
        Some(Profile { vals, support, negative })
    }

    /// Profiles of `exprs` over one shared table.
    fn profiles(&mut self, exprs: &[Expr]) -> Option<Vec<Profile>> {
        let refs: Vec<&Expr> = exprs.iter().collect();
        let t = self.table(&refs)?;
        exprs.iter().map(|e| self.profile(e, &t)).collect()
    }

    /// Zero on every valuation where it is defined.
    fn zero_where_defined(&mut self, e: &Expr) -> bool {
        if let Expr::Int(0) = e {
            return true;
        }
        let Some(t) = self.table(&[e]) else { return false };
        self.profile(e, &t).is_some_and(|p| p.support.is_empty())
    }

    /// The constant value of `e`, if it is defined and constant everywhere.
    fn constant(&mut self, e: &Expr) -> Option<Value> {
        let t = self.table(&[e])?;
        let vals = self.values(e, &t)?;
        let first = vals.first()?.clone()?;
        if vals.iter().all(|v| v.as_ref() == Some(&first)) {
            Some(first)
        } else {
            None
        }
    }

    fn disjoint(&mut self, p: &Expr, q: &Expr) -> bool {
        let Some(t) = self.table(&[p, q]) else { return false };
        let (Some(vp), Some(vq)) = (self.values(p, &t), self.values(q, &t)) else { return false };
        vp.iter().zip(&vq).all(|(x, y)| match (x, y) {
            (Some(Value::Bool(a)), Some(Value::Bool(b))) => !(*a && *b),
            _ => false,
        })
    }

    /// Minimises a Boolean expression over its realisable atom valuations.
    pub fn simplify_bool(&mut self, b: &Expr) -> Expr {
        self.simplify_bool_in(b, &[])
    }

    /// Minimises `b` on the valuations where every condition of `ctx` holds.
    fn simplify_bool_in(&mut self, b: &Expr, ctx: &[Expr]) -> Expr {
        let out = self.minimise(b, ctx);
        match self.comparison_form(&out, ctx) {
            Some(c) if expr_size(&c) < expr_size(&out) => c,
            _ => out,
        }
    }

    /// `b` as one comparison of its only variable, an integer, with constants.
    fn comparison_form(&mut self, b: &Expr, ctx: &[Expr]) -> Option<Expr> {
        let fv = free_vars(b);
        let [v] = fv.iter().collect::<Vec<_>>()[..] else { return None };
        let var = Expr::var(v);
        if self.bound_values(v).is_none() {
            let d = &self.space.var(v)?.domain;
            if d.is_array() || d.is_bool() {
                return None;
            }
        }
        let refs: Vec<&Expr> = std::iter::once(b).chain(ctx).collect();
        let t = self.table(&refs)?;
        let xs = self.values(&var, &t)?;
        let bs = self.values(b, &t)?;
        let mut live = vec![true; t.rows.len()];
        for c in ctx {
            for (l, x) in live.iter_mut().zip(self.values(c, &t)?) {
                *l &= x == Some(Value::Bool(true));
            }
        }
        let (mut yes, mut no) = (BTreeSet::new(), BTreeSet::new());
        for ((x, y), l) in xs.into_iter().zip(bs).zip(live) {
            match (l, x, y) {
                (false, ..) => {}
                (true, Some(Value::Int(x)), Some(Value::Bool(y))) => {
                    if y {
                        yes.insert(x);
                    } else {
                        no.insert(x);
                    }
                }
                _ => return None,
            }
        }
        let (lo, hi) = (*yes.first()?, *yes.last()?);
        let int = Expr::Int;
        let cmp = |op, k| Expr::bin(op, var.clone(), int(k));
        Some(if yes.len() == 1 {
            cmp(BinOp::Eq, lo)
        } else if no.len() == 1 {
            cmp(BinOp::Ne, *no.first()?)
        } else if no.iter().all(|&x| x > hi) {
            cmp(BinOp::Le, hi)
        } else if no.iter().all(|&x| x < lo) {
            cmp(BinOp::Ge, lo)
        } else if no.iter().all(|&x| x < lo || x > hi) {
            Expr::bin(BinOp::And, cmp(BinOp::Ge, lo), cmp(BinOp::Le, hi))
        } else {
            return None;
        })
    }

    fn minimise(&mut self, b: &Expr, ctx: &[Expr]) -> Expr {
        let b = fold(b);
        if let Expr::Bool(_) = b {
            return b;
        }
        let mut atoms = Vec::new();
        let bf = to_bf(&b, &mut atoms);
        if atoms.is_empty() || atoms.len() > QM_ATOMS {
            return b;
        }
        let refs: Vec<&Expr> = atoms.iter().chain(ctx).collect();
        let Some(t) = self.table(&refs) else {
            return if ctx.is_empty() { b } else { self.simplify_bool_in(&b, &[]) };
        };
        let mut live = vec![true; t.rows.len()];
        for c in ctx {
            let Some(vals) = self.values(c, &t) else { return b };
            for (l, v) in live.iter_mut().zip(vals) {
                *l &= v == Some(Value::Bool(true));
            }
        }
        let mut columns = Vec::with_capacity(atoms.len());
        for a in &atoms {
            let Some(vals) = self.values(a, &t) else { return b };
            let mut col = Vec::with_capacity(vals.len());
            for (v, &l) in vals.into_iter().zip(&live) {
                match v {
                    Some(Value::Bool(x)) => col.push(x),
                    _ if !l => col.push(false),
                    _ => return b,
                }
            }
            columns.push(col);
        }
        let mut realized = BTreeSet::new();
        for r in (0..t.rows.len()).filter(|&r| live[r]) {
            let mut v = 0u32;
            for (i, col) in columns.iter().enumerate() {
                if col[r] {
                    v |= 1 << i;
                }
            }
            realized.insert(v);
        }
        let on: Vec<u32> = realized.iter().copied().filter(|&v| bf.eval(v)).collect();
        if on.is_empty() {
            return Expr::Bool(false);
        }
        if on.len() == realized.len() {
            return Expr::Bool(true);
        }
        let n = atoms.len();
        let terms: Vec<u32> = (0..1u32 << n).filter(|v| !realized.contains(v) || bf.eval(*v)).collect();
        let primes = prime_implicants(n, &terms);
        let cover = min_cover(&on, &primes);
        let lits: u32 = cover.iter().map(Implicant::literals).sum();
        if lits as usize <= bf.leaves() {
            render_dnf(&cover, &atoms)
        } else {
            b
        }
    }

    fn map_iversons(&mut self, e: &Expr) -> Expr {
        self.map_iversons_in(e, &[])
    }

    /// Simplifies every bracket, using the brackets multiplied in from the
    /// left as context: `[c] * x` is zero wherever `c` fails, whatever `x`.
    fn map_iversons_in(&mut self, e: &Expr, ctx: &[Expr]) -> Expr {
        match e {
            Expr::Iverson(b) => fold(&Expr::iverson(self.simplify_bool_in(b, ctx))),
            Expr::Binary(BinOp::Mul, l, r) if matches!(**l, Expr::Iverson(_)) => {
                let Expr::Iverson(c) = &**l else { unreachable!() };
                let c = self.simplify_bool_in(c, ctx);
                match c {
                    Expr::Bool(false) => return Expr::Int(0),
                    Expr::Bool(true) => return self.map_iversons_in(r, ctx),
                    _ => {}
                }
                let mut inner = ctx.to_vec();
                inner.push(c.clone());
                let r = self.map_iversons_in(r, &inner);
                let joined = match &r {
                    Expr::Iverson(c2) => Some((c2.clone(), None)),
                    Expr::Binary(BinOp::Mul, l2, rest) => match &**l2 {
                        Expr::Iverson(c2) => Some((c2.clone(), Some(rest.clone()))),
                        _ => None,
                    },
                    _ => None,
                };
                match joined {
                    Some((c2, rest)) => {
                        let both = self.simplify_bool_in(&Expr::bin(BinOp::And, c, *c2), ctx);
                        let head = fold(&Expr::iverson(both));
                        match rest {
                            Some(x) => fold(&Expr::bin(BinOp::Mul, head, *x)),
                            None => head,
                        }
                    }
                    None => fold(&Expr::bin(BinOp::Mul, Expr::iverson(c), r)),
                }
            }
            _ => {
                let mut kids = Vec::new();
                crate::lang::transform::for_each_child(e, |c| kids.push(c.clone()));
                if kids.is_empty() {
                    return e.clone();
                }
                let mapped: Vec<Expr> = kids.iter().map(|k| self.map_iversons_in(k, ctx)).collect();
                let mut it = mapped.into_iter();
                fold(&crate::lang::transform::map_children(e, |_| it.next().unwrap()))
            }
        }
    }

    /// Merges pairwise disjoint Iverson addends: `[p] + [q]` to `[p or q]`.
    fn merge_addends(&mut self, e: &Expr) -> Expr {
        let mut terms = Vec::new();
        sum_terms(e, &mut terms);
        if terms.len() < 2 {
            return e.clone();
        }
        let mut constant = Rational::zero();
        let mut rest: Vec<Expr> = Vec::new();
        for t in terms {
            match t.as_rational() {
                Some(r) => constant += r,
                None => rest.push(t),
            }
        }
        let mut i = 0;
        while i < rest.len() {
            let mut j = i + 1;
            while j < rest.len() {
                if let (Expr::Iverson(p), Expr::Iverson(q)) = (&rest[i], &rest[j]) {
                    if self.disjoint(p, q) {
                        let merged = Expr::bin(BinOp::Or, (**p).clone(), (**q).clone());
                        rest[i] = Expr::iverson(merged);
                        rest.remove(j);
                        continue;
                    }
                }
                j += 1;
            }
            i += 1;
        }
        if !constant.is_zero() || rest.is_empty() {
            rest.push(Expr::from_rational(constant));
        }
        build_sum(rest)
    }

    pub fn simplify_atom(&mut self, e: &Expr) -> Expr {
        let e = fold(e);
        let e = self.merge_addends(&e);
        let e = self.map_iversons(&e);
        if !e.is_literal() {
            if let Some(v) = self.constant(&e) {
                if let Ok(r) = v.to_rational() {
                    return Expr::from_rational(r);
                }
            }
            if expr_size(&e) > 4 {
                if let Some(r) = self.recognize(&e) {
                    return r;
                }
            }
        }
        e
    }

    /// A smaller equivalent of a numeric atom: an array reduction, an array
    /// membership test, or, for a 0/1-valued atom, one minimised bracket.
    fn recognize(&mut self, e: &Expr) -> Option<Expr> {
        let t = self.table(&[e])?;
        let target = self.values(e, &t)?;
        if target.iter().any(Option::is_none) {
            return None;
        }
        let fv = free_vars(e);
        let mut arrays = Vec::new();
        let mut scalars = Vec::new();
        for v in &fv {
            if self.bound_values(v).is_some() {
                scalars.push(v.clone());
            } else if let Some(info) = self.space.var(v) {
                if info.domain.is_array() {
                    if !info.domain.slot_domain().is_bool() {
                        arrays.push(v.clone());
                    }
                } else if !info.domain.is_bool() {
                    scalars.push(v.clone());
                }
            }
        }
        let size = expr_size(e);
        let mut candidates = Vec::new();
        for a in &arrays {
            let arr = Expr::var(a);
            candidates.push(Expr::Reduce(Func::Max, Box::new(arr.clone())));
            candidates.push(Expr::Reduce(Func::Min, Box::new(arr.clone())));
            for x in &scalars {
                candidates.push(Expr::iverson(Expr::bin(BinOp::In, Expr::var(x), arr.clone())));
                candidates.push(Expr::iverson(Expr::bin(BinOp::NotIn, Expr::var(x), arr.clone())));
            }
        }
        for c in candidates {
            if expr_size(&c) < size && self.values(&c, &t).as_ref() == Some(&target) {
                return Some(c);
            }
        }
        if matches!(e, Expr::Iverson(_)) {
            return None;
        }
        let bit = |v: &Option<Value>| match v {
            Some(Value::Int(0)) => Some(false),
            Some(Value::Int(1)) => Some(true),
            _ => None,
        };
        let bits: Vec<bool> = target.iter().map(bit).collect::<Option<_>>()?;
        let mut atoms = Vec::new();
        let mut bfs = Vec::new();
        collect_brackets(e, &mut atoms, &mut bfs);
        if atoms.is_empty() || atoms.len() > QM_ATOMS {
            return None;
        }
        let mut truth: HashMap<u32, bool> = HashMap::new();
        let columns: Vec<Vec<Option<Value>>> = atoms.iter().map(|a| self.values(a, &t)).collect::<Option<_>>()?;
        for (r, &b) in bits.iter().enumerate() {
            let mut v = 0u32;
            for (i, col) in columns.iter().enumerate() {
                match col[r] {
                    Some(Value::Bool(true)) => v |= 1 << i,
                    Some(Value::Bool(false)) => {}
                    _ => return None,
                }
            }
            if *truth.entry(v).or_insert(b) != b {
                return None;
            }
        }
        let on: Vec<u32> = truth.iter().filter(|(_, &b)| b).map(|(&v, _)| v).collect();
        let n = atoms.len();
        let terms: Vec<u32> = (0..1u32 << n).filter(|v| truth.get(v).copied().unwrap_or(true)).collect();
        let mut on = on;
        on.sort_unstable();
        let cover = min_cover(&on, &prime_implicants(n, &terms));
        let c = fold(&Expr::iverson(render_dnf(&cover, &atoms)));
        (expr_size(&c) < size).then_some(c)
    }

    /// Simplifies a gain expression; the result contains no `AND` nodes.
    pub fn simplify(&mut self, g: &Gain) -> Result<Gain> {
        Ok(match g {
            Gain::Atom(e) => Gain::Atom(self.simplify_atom(e)),
            Gain::And(c, body) => {
                let c = self.simplify_atom(c);
                self.and_into(&c, body)?
            }
            Gain::Max(v) => {
                let mut kids = Vec::new();
                for x in v {
                    match self.simplify(x)? {
                        Gain::Max(inner) => kids.extend(inner),
                        y => kids.push(y),
                    }
                }
                self.max_of(kids)
            }
            Gain::Plus(v) => {
                let mut kids = Vec::new();
                for x in v {
                    match self.simplify(x)? {
                        Gain::Plus(inner) => kids.extend(inner),
                        y => kids.push(y),
                    }
                }
                self.plus_of(kids)?
            }
            Gain::QuantMax { var, set, body } => self.quant(var, &set.values(), body)?,
        })
    }

    fn and_into(&mut self, c: &Expr, g: &Gain) -> Result<Gain> {
        match c {
            Expr::Int(0) => return Ok(Gain::zero()),
            Expr::Int(1) => return self.simplify(g),
            _ => {}
        }
        let pushed = match g {
            Gain::Atom(a) => return Ok(Gain::Atom(self.simplify_atom(&Expr::bin(BinOp::Mul, c.clone(), a.clone())))),
            Gain::And(c2, inner) => {
                let c = self.simplify_atom(&Expr::bin(BinOp::Mul, c.clone(), c2.clone()));
                return self.and_into(&c, inner);
            }
            Gain::Max(v) => Gain::Max(v.iter().map(|x| Gain::and(c.clone(), x.clone())).collect()),
            Gain::Plus(v) => Gain::Plus(v.iter().map(|x| Gain::and(c.clone(), x.clone())).collect()),
            Gain::QuantMax { var, set, body } => {
                let (var, body) = if free_vars(c).contains(var) {
                    rename_bound(var, body, &free_vars(c))
                } else {
                    (var.clone(), (**body).clone())
                };
                Gain::QuantMax { var, set: set.clone(), body: Box::new(Gain::and(c.clone(), body)) }
            }
        };
        self.simplify(&pushed)
    }

    fn max_of(&mut self, kids: Vec<Gain>) -> Gain {
        let mut atoms: Vec<Expr> = Vec::new();
        let mut others: Vec<Gain> = Vec::new();
        for k in kids {
            match k {
                Gain::Atom(e) => {
                    if !self.zero_where_defined(&e) && !atoms.contains(&e) {
                        atoms.push(e);
                    }
                }
                g => others.push(g),
            }
        }
        atoms.sort_by_key(|e| sort_key(&Gain::Atom(e.clone())));
        let kept: Vec<Expr> = match self.profiles(&atoms) {
            Some(ps) => undominated(&ps).into_iter().map(|i| atoms[i].clone()).collect(),
            None => atoms,
        };
        let mut out: Vec<Gain> = kept.into_iter().map(Gain::Atom).collect();
        out.extend(others);
        out.sort_by_key(sort_key);
        out.dedup();
        match out.len() {
            0 => Gain::zero(),
            1 => out.pop().unwrap(),
            _ => Gain::Max(out),
        }
    }

    fn width(g: &Gain) -> usize {
        match g {
            Gain::Max(v) => v.len(),
            Gain::QuantMax { set, .. } => set.values().len(),
            _ => 1,
        }
    }

    /// Adds a standard expression to every action of `g`.
    fn push_standard(&mut self, s: &Expr, g: &Gain) -> Result<Gain> {
        let pushed = match g {
            Gain::Max(v) => Gain::Max(v.iter().map(|x| Gain::plus(Gain::Atom(s.clone()), x.clone())).collect()),
            Gain::QuantMax { var, set, body } => {
                let (var, body) = if free_vars(s).contains(var) {
                    rename_bound(var, body, &free_vars(s))
                } else {
                    (var.clone(), (**body).clone())
                };
                Gain::QuantMax { var, set: set.clone(), body: Box::new(Gain::plus(Gain::Atom(s.clone()), body)) }
            }
            other => Gain::plus(Gain::Atom(s.clone()), other.clone()),
        };
        self.simplify(&pushed)
    }

    fn instances(g: &Gain) -> Vec<Gain> {
        match g {
            Gain::Max(v) => v.clone(),
            Gain::QuantMax { var, set, body } => set
                .values()
                .into_iter()
                .map(|v| {
                    let mut m = HashMap::new();
                    m.insert(var.clone(), Expr::Int(v));
                    subst_gain(body, &m)
                })
                .collect(),
            other => vec![other.clone()],
        }
    }

    fn plus_of(&mut self, kids: Vec<Gain>) -> Result<Gain> {
        let mut std_terms: Vec<Expr> = Vec::new();
        let mut others: Vec<Gain> = Vec::new();
        for k in kids {
            match k {
                Gain::Atom(e) => {
                    if !self.zero_where_defined(&e) {
                        std_terms.push(e);
                    }
                }
                g => others.push(g),
            }
        }
        let standard = if std_terms.is_empty() { None } else { Some(self.simplify_atom(&build_sum(std_terms))) };
        others.sort_by_key(sort_key);
        if others.is_empty() {
            return Ok(Gain::Atom(standard.unwrap_or(Expr::Int(0))));
        }
        if let Some(s) = standard.filter(|s| !matches!(s, Expr::Int(0))) {
            let first = others.remove(0);
            let merged = self.push_standard(&s, &first)?;
            match merged {
                Gain::Plus(inner) => others.extend(inner),
                m => others.push(m),
            }
            if others.len() == 1 {
                return Ok(others.pop().unwrap());
            }
            return self.plus_of(others);
        }
        if others.len() == 1 {
            return Ok(others.pop().unwrap());
        }
        let widths: Vec<usize> = others.iter().map(Self::width).collect();
        let product = widths.iter().try_fold(1usize, |acc, w| acc.checked_mul(*w));
        let sum: usize = widths.iter().sum();
        if product.is_some_and(|p| p <= sum) {
            let mut combos: Vec<Vec<Gain>> = vec![Vec::new()];
            for g in &others {
                let inst = Self::instances(g);
                combos = combos
                    .into_iter()
                    .flat_map(|c| {
                        inst.iter().map(move |i| {
                            let mut c = c.clone();
                            c.push(i.clone());
                            c
                        })
                    })
                    .collect();
            }
            let options: Vec<Gain> = combos.into_iter().map(Gain::Plus).collect();
            return self.simplify(&Gain::Max(options));
        }
        Ok(Gain::Plus(others))
    }

    fn quant(&mut self, var: &str, values: &[i64], body: &Gain) -> Result<Gain> {
        self.scope.push((var.to_string(), values.to_vec()));
        let simplified = self.simplify(body);
        self.scope.pop();
        let simplified = simplified?;
        if !gain_free_vars(&simplified).contains(var) {
            return Ok(simplified);
        }
        let kept = self.prune_instances(var, values, &simplified);
        if kept.is_empty() {
            return Ok(Gain::zero());
        }
        if kept.len() == 1 {
            let mut m = HashMap::new();
            m.insert(var.to_string(), Expr::Int(kept[0]));
            return self.simplify(&subst_gain(&simplified, &m));
        }
        let body = if kept.len() < values.len() {
            self.scope.push((var.to_string(), kept.clone()));
            let b = self.simplify(&simplified);
            self.scope.pop();
            b?
        } else {
            simplified
        };
        if !gain_free_vars(&body).contains(var) {
            return Ok(body);
        }
        Ok(Gain::QuantMax { var: var.to_string(), set: IndexSet::from_values(kept), body: Box::new(body) })
    }

    /// Instances of a quantifier body that are neither zero nor dominated.
    fn prune_instances(&mut self, var: &str, values: &[i64], body: &Gain) -> Vec<i64> {
        let inst = |v: i64| {
            let mut m = HashMap::new();
            m.insert(var.to_string(), Expr::Int(v));
            subst_gain(body, &m)
        };
        let atoms_of = |g: &Gain| -> Option<Vec<Expr>> {
            match g {
                Gain::Atom(e) => Some(vec![fold(e)]),
                Gain::Max(v) => v
                    .iter()
                    .map(|x| match x {
                        Gain::Atom(e) => Some(fold(e)),
                        _ => None,
                    })
                    .collect(),
                _ => None,
            }
        };
        let Some(groups) = values.iter().map(|&v| atoms_of(&inst(v))).collect::<Option<Vec<_>>>() else {
            return values.to_vec();
        };
        let flat: Vec<Expr> = groups.iter().flatten().cloned().collect();
        let Some(ps) = self.profiles(&flat) else { return values.to_vec() };
        let mut at = 0;
        let mut kept = Vec::new();
        let mut single = Vec::new();
        for (k, g) in groups.iter().enumerate() {
            let mine = &ps[at..at + g.len()];
            at += g.len();
            if mine.iter().any(|p| !p.support.is_empty()) {
                kept.push(values[k]);
                if g.len() == 1 {
                    single.push(at - 1);
                }
            }
        }
        if single.len() != kept.len() {
            return kept;
        }
        let chosen: Vec<&Profile> = single.iter().map(|&i| &ps[i]).collect();
        undominated_refs(&chosen).into_iter().map(|i| kept[i]).collect()
    }
}

/// Simplifies `g` against the declared state space.
pub fn simplify(g: &Gain, space: &Space) -> Result<Gain> {
    Simplifier::new(space).simplify(g)
}

/// Simplifies each atom of a normal form and drops zero and dominated ones.
pub fn simplify_nf(nf: &NormalForm, space: &Space) -> NormalForm {
    let mut s = Simplifier::new(space);
    let kids: Vec<Gain> = nf.atoms.iter().map(|a| Gain::Atom(s.simplify_atom(a))).collect();
    match s.max_of(kids) {
        Gain::Max(v) => NormalForm {
            atoms: v
                .into_iter()
                .map(|g| match g {
                    Gain::Atom(e) => e,
                    _ => unreachable!("atoms only"),
                })
                .collect(),
        },
        Gain::Atom(e) => NormalForm { atoms: vec![e] },
        _ => unreachable!("atoms only"),
    }
}

/// Strengthens `g` with a known assertion: `[assertion] AND g`, simplified.
pub fn apply_context(assertion: &Expr, g: &Gain, space: &Space) -> Result<Gain> {
    simplify(&Gain::and(Expr::iverson(assertion.clone()), g.clone()), space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gain::normal::normalize;
    use crate::lang::parser::{parse_decls, parse_expr, parse_gain};
    use crate::semantics::space_of;

    fn simp(decls: &str, src: &str) -> String {
        let d = parse_decls(decls).unwrap();
        let sp = space_of(&d).unwrap();
        gain_to_string(&simplify(&parse_gain(src, &d).unwrap(), &sp).unwrap())
    }

    const AB: &str = "hidden a, b, c: bool;";
    const X: &str = "hidden x: int[0..9];";

    #[test]
    fn conditional_three_steps() {
        assert_eq!(simp(AB, "[a] AND 1 PLUS [not a] AND ([b] MAX [not b])"), "[a or b] MAX [a or not b]");
        assert_eq!(simp(AB, "[true] MAX [false]"), "1");
        assert_eq!(simp(AB, "[a] AND [b] PLUS [not a] AND [b]"), "[b]");
    }

    #[test]
    fn quantifier_pruning() {
        assert_eq!(simp(X, "MAX n in 0..9: [x div 2 = n]"), "MAX n in 0..4: [x div 2 = n]");
        assert_eq!(
            simp(X, "[x mod 3 = 0] AND (MAX n in 0..9: [x = n]) PLUS [not (x mod 3 = 0)] AND (MAX n in 0..9: [x = n])"),
            "(MAX n in {0, 3, 6, 9}: [x = n]) PLUS (MAX n in {1, 2, 4, 5, 7, 8}: [x = n])"
        );
        assert_eq!(simp(X, "MAX n in 0..9: [x = 3]"), "[x = 3]");
        assert_eq!(simp(X, "MAX n in 0..9: [n = 3] * [x = n]"), "[x = 3]");
    }

    #[test]
    fn assertion_context() {
        let d = parse_decls("hidden x: int[0..3];").unwrap();
        let sp = space_of(&d).unwrap();
        let g = parse_gain("MAX i in 0..3: [x = i]", &d).unwrap();
        let ctx = |a: &str| gain_to_string(&apply_context(&parse_expr(a).unwrap(), &g, &sp).unwrap());
        assert_eq!(ctx("x <= 2"), "MAX i in 0..2: [x = i]");
        assert_eq!(ctx("true"), "MAX i in 0..3: [x = i]");
        assert_eq!(ctx("false"), "0");
    }

    #[test]
    fn normal_form_pruning() {
        let d = parse_decls(X).unwrap();
        let sp = space_of(&d).unwrap();
        let g = parse_gain("MAX n in 0..9: [x div 2 = n]", &d).unwrap();
        let nf = simplify_nf(&normalize(&g).unwrap(), &sp);
        assert_eq!(nf.atoms.len(), 5);
        assert_eq!(simplify_nf(&nf, &sp), nf);
    }

    #[test]
    fn boolean_minimisation() {
        let d = parse_decls("hidden a, b: bool; hidden x: int[0..3];").unwrap();
        let sp = space_of(&d).unwrap();
        let mut s = Simplifier::new(&sp);
        let b = |src: &str, s: &mut Simplifier| crate::lang::printer::expr_to_string(&s.simplify_bool(&parse_expr(src).unwrap()));
        assert_eq!(b("a or not a and b", &mut s), "a or b");
        assert_eq!(b("x < 2 and x != 0", &mut s), "x = 1");
        assert_eq!(b("x < 2 and x != 0 or x = 1", &mut s), "x = 1");
        assert_eq!(b("x = 1 or x = 2 or x = 0", &mut s), "x != 3");
        assert_eq!(b("a and x < 2 or a and x = 3", &mut s), "a and x < 2 or a and x = 3");
        assert_eq!(b("x >= 0", &mut s), "true");
        assert_eq!(b("x = 2 and x = 1", &mut s), "false");
    }
}
