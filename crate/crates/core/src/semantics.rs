//! Forward semantics: programs as maps from priors to hyper-distributions.
//!
//! Assignments are Markov updates pushed through every inner; `print` and
//! the guards of conditionals and loops are channels that split each inner
//! into posteriors. Every step re-reduces the hyper.

use std::collections::BTreeMap;

use crate::dist::{avg, kleisli, unit, Dist, Hyper};
use crate::error::{Error, Result};
use crate::eval::{compile, Compiled};
use crate::lang::ast::*;
use crate::lang::printer::stmt_head;
use crate::lang::transform::desugar_visible;
use crate::rational::Rational;
use crate::space::{Space, State};

pub const DEFAULT_LOOP_BOUND: u64 = 10_000;

pub fn space_of(decls: &[Decl]) -> Result<Space> {
    Space::new(decls.iter().map(|d| (d.name.clone(), d.domain.clone())))
}

/// A deterministic channel: each state emits exactly one observation.
pub struct Channel<'a> {
    obs: Box<dyn Fn(&State) -> Result<i64> + 'a>,
}

/// Stochastic-matrix view of a channel: rows are states, columns
/// observations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMatrix {
    pub observations: Vec<i64>,
    pub rows: Vec<Vec<Rational>>,
}

impl<'a> Channel<'a> {
    pub fn new(f: impl Fn(&State) -> Result<i64> + 'a) -> Channel<'a> {
        Channel { obs: Box::new(f) }
    }

    /// Leaks the value of `e`.
    pub fn from_expr(space: &Space, e: &Expr) -> Result<Channel<'a>> {
        let c = compile(e, space, &[])?;
        Ok(Channel::new(move |s| c.eval_slot(s, &[])))
    }

    pub fn observe(&self, s: &State) -> Result<i64> {
        (self.obs)(s)
    }

    pub fn matrix(&self, states: &[State]) -> Result<ChannelMatrix> {
        let obs: Vec<i64> = states.iter().map(|s| self.observe(s)).collect::<Result<_>>()?;
        let mut observations = obs.clone();
        observations.sort_unstable();
        observations.dedup();
        let rows = obs
            .iter()
            .map(|o| {
                observations
                    .iter()
                    .map(|c| if c == o { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Ok(ChannelMatrix { observations, rows })
    }
}

/// A deterministic state update.
pub struct MarkovUpdate<'a> {
    step: Box<dyn Fn(&State) -> Result<State> + 'a>,
}

impl<'a> MarkovUpdate<'a> {
    pub fn new(f: impl Fn(&State) -> Result<State> + 'a) -> MarkovUpdate<'a> {
        MarkovUpdate { step: Box::new(f) }
    }

    /// The simultaneous assignment `pairs`, with domain checks on the result.
    pub fn from_assign(space: &'a Space, pairs: &[(LValue, Expr)]) -> Result<MarkovUpdate<'a>> {
        let mut targets = Vec::with_capacity(pairs.len());
        for (l, e) in pairs {
            let v = space
                .var(l.name())
                .ok_or_else(|| Error::Type(format!("undeclared variable `{}`", l.name())))?;
            let index = match l {
                LValue::Var(_) => None,
                LValue::Elem(_, i) => Some(compile(i, space, &[])?),
            };
            targets.push((v, index, compile(e, space, &[])?));
        }
        Ok(MarkovUpdate::new(move |s: &State| {
            let mut writes: Vec<(usize, Vec<i64>)> = Vec::with_capacity(targets.len());
            for (v, index, rhs) in &targets {
                let value = rhs.eval(s, &[])?;
                let (offset, slots) = match index {
                    None if v.domain.is_array() => match value {
                        crate::eval::Value::Arr { elems, .. } => (v.offset, elems),
                        other => return Err(Error::Type(format!("array `{}` assigned {other:?}", v.name))),
                    },
                    None => (v.offset, vec![value.to_slot()?]),
                    Some(i) => {
                        let k = i.eval_slot(s, &[])?;
                        if k < 0 || k as usize >= v.domain.width() {
                            return Err(Error::IndexOutOfBounds { index: k, len: v.domain.width() });
                        }
                        (v.offset + k as usize, vec![value.to_slot()?])
                    }
                };
                for x in &slots {
                    if !v.domain.scalar_contains(*x) {
                        return Err(Error::Domain(format!(
                            "`{}` gets {}, outside {}",
                            v.name,
                            v.domain.format_slot(*x),
                            v.domain
                        )));
                    }
                }
                writes.push((offset, slots));
            }
            let mut out = s.slots().to_vec();
            for (offset, slots) in writes {
                out[offset..offset + slots.len()].copy_from_slice(&slots);
            }
            Ok(State::from_slots(out))
        }))
    }

    pub fn apply(&self, s: &State) -> Result<State> {
        (self.step)(s)
    }
}

pub fn apply_markov(m: &MarkovUpdate, h: &Hyper<State>) -> Result<Hyper<State>> {
    kleisli(h, |d| Ok(unit(d.try_map(|s| m.apply(s))?)))
}

/// Splits one distribution into the posteriors of a channel.
pub fn split_channel(c: &Channel, d: &Dist<State>) -> Result<Hyper<State>> {
    let parts = d.try_split_by(|s| c.observe(s))?;
    Dist::reduce(parts.into_iter().map(|(_, mass, post)| (post, mass)))
}

pub fn apply_channel(c: &Channel, h: &Hyper<State>) -> Result<Hyper<State>> {
    kleisli(h, |d| split_channel(c, d))
}

struct Interp<'a> {
    space: &'a Space,
    loop_bound: u64,
}

impl Interp<'_> {
    fn run(&self, s: &Stmt, d: &Dist<State>) -> Result<Hyper<State>> {
        match &s.kind {
            StmtKind::Skip => Ok(unit(d.clone())),
            StmtKind::Assign(pairs) => {
                let m = MarkovUpdate::from_assign(self.space, pairs)?;
                Ok(unit(d.try_map(|x| m.apply(x))?))
            }
            StmtKind::Print(e) => split_channel(&Channel::from_expr(self.space, e)?, d),
            StmtKind::Seq(v) => {
                let mut h = unit(d.clone());
                for x in v {
                    h = kleisli(&h, |inner| self.run(x, inner))?;
                }
                Ok(h)
            }
            StmtKind::If(g, t, e) => {
                let guard = compile(g, self.space, &[])?;
                let mut raw = Vec::new();
                for (b, mass, post) in d.try_split_by(|x| guard.eval_bool(x, &[]))? {
                    let branch = if b { t } else { e };
                    for (inner, w) in self.run(branch, &post)? {
                        raw.push((inner, &mass * &w));
                    }
                }
                Dist::reduce(raw)
            }
            StmtKind::While { guard, body, .. } => self.run_while(guard, body, d),
        }
    }

    fn run_while(&self, g: &Expr, body: &Stmt, d: &Dist<State>) -> Result<Hyper<State>> {
        let guard = compile(g, self.space, &[])?;
        let mut active: BTreeMap<Dist<State>, Rational> = BTreeMap::new();
        active.insert(d.clone(), Rational::one());
        let mut done = Vec::new();
        let mut iterations = 0u64;
        while !active.is_empty() {
            let mut next: BTreeMap<Dist<State>, Rational> = BTreeMap::new();
            for (inner, w) in active {
                for (b, mass, post) in inner.try_split_by(|x| guard.eval_bool(x, &[]))? {
                    let w = &w * &mass;
                    if !b {
                        done.push((post, w));
                        continue;
                    }
                    if iterations >= self.loop_bound {
                        return Err(Error::LoopBoundExceeded(self.loop_bound));
                    }
                    for (out, v) in self.run(body, &post)? {
                        *next.entry(out).or_insert_with(Rational::zero) += &w * &v;
                    }
                }
            }
            active = next;
            iterations += 1;
        }
        Dist::reduce(done)
    }
}

fn check_prior(space: &Space, prior: &Dist<State>) -> Result<()> {
    for s in prior.support() {
        if !space.contains(s) {
            return Err(Error::Domain(format!("prior state {s:?} is outside the declared space")));
        }
    }
    Ok(())
}

/// Runs one statement on a prior over `space`.
pub fn run_stmt(space: &Space, s: &Stmt, prior: &Dist<State>, loop_bound: u64) -> Result<Hyper<State>> {
    check_prior(space, prior)?;
    Interp { space, loop_bound }.run(s, prior)
}

/// Runs a program (desugaring visible variables first) on a prior.
pub fn run(p: &Program, prior: &Dist<State>, loop_bound: u64) -> Result<Hyper<State>> {
    let p = desugar_visible(p);
    let space = space_of(&p.decls)?;
    run_stmt(&space, &p.body, prior, loop_bound)
}

/// Events reported by the traced executor.
pub trait Observer {
    /// A guard or `print` at `site` emitted `value`.
    fn observe(&mut self, _site: usize, _value: i64) {}
    /// The loop at `site` is about to test its guard for the `iteration`-th time
    /// (counting from zero) in state `s`.
    fn loop_head(&mut self, _site: usize, _iteration: u64, _s: &State) {}
}

impl Observer for () {}

/// Identifies a statement within a borrowed program by address.
pub fn site(s: &Stmt) -> usize {
    s as *const Stmt as usize
}

struct Exec<'a, 'o> {
    space: &'a Space,
    loop_bound: u64,
    obs: &'o mut dyn Observer,
}

impl Exec<'_, '_> {
    fn guard(&mut self, s: &Stmt, g: &Compiled, x: &State) -> Result<bool> {
        let b = g.eval_bool(x, &[])?;
        self.obs.observe(site(s), b as i64);
        Ok(b)
    }

    fn exec(&mut self, s: &Stmt, x: State) -> Result<State> {
        match &s.kind {
            StmtKind::Skip => Ok(x),
            StmtKind::Assign(pairs) => MarkovUpdate::from_assign(self.space, pairs)?.apply(&x),
            StmtKind::Print(e) => {
                let v = compile(e, self.space, &[])?.eval_slot(&x, &[])?;
                self.obs.observe(site(s), v);
                Ok(x)
            }
            StmtKind::Seq(v) => v.iter().try_fold(x, |acc, y| self.exec(y, acc)),
            StmtKind::If(g, t, e) => {
                let g = compile(g, self.space, &[])?;
                if self.guard(s, &g, &x)? {
                    self.exec(t, x)
                } else {
                    self.exec(e, x)
                }
            }
            StmtKind::While { guard, body, .. } => {
                let g = compile(guard, self.space, &[])?;
                let mut x = x;
                let mut k = 0u64;
                loop {
                    self.obs.loop_head(site(s), k, &x);
                    if !self.guard(s, &g, &x)? {
                        return Ok(x);
                    }
                    if k >= self.loop_bound {
                        return Err(Error::LoopBoundExceeded(self.loop_bound));
                    }
                    x = self.exec(body, x)?;
                    k += 1;
                }
            }
        }
    }
}

/// Executes `s` from a single state, reporting leaks and loop heads.
pub fn exec_traced(space: &Space, s: &Stmt, x: State, loop_bound: u64, obs: &mut dyn Observer) -> Result<State> {
    Exec { space, loop_bound, obs }.exec(s, x)
}

/// Leak-blind execution from a single state.
pub fn exec_state(space: &Space, s: &Stmt, x: State, loop_bound: u64) -> Result<State> {
    exec_traced(space, s, x, loop_bound, &mut ())
}

/// The final-state distribution, ignoring all leaks.
pub fn classical_run(p: &Program, prior: &Dist<State>, loop_bound: u64) -> Result<Dist<State>> {
    let space = space_of(&p.decls)?;
    check_prior(&space, prior)?;
    prior.try_map(|x| exec_state(&space, &p.body, x.clone(), loop_bound))
}

/// Forward-semantics cross-check: the average of the output hyper.
pub fn erased_run(p: &Program, prior: &Dist<State>, loop_bound: u64) -> Result<Dist<State>> {
    Ok(avg(&run(p, prior, loop_bound)?))
}

/// Human-readable location of a statement, for diagnostics.
pub fn describe_stmt(s: &Stmt) -> String {
    format!("{} `{}`", s.pos, stmt_head(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_program;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn uniform(space: &Space) -> Dist<State> {
        Dist::uniform(space.states()).unwrap()
    }

    #[test]
    fn guess_mod3_splits() {
        let p = parse_program("hidden x: int[0..9]; print x mod 3 = 0").unwrap();
        let sp = space_of(&p.decls).unwrap();
        let h = run(&p, &uniform(&sp), DEFAULT_LOOP_BOUND).unwrap();
        let weights: Vec<Rational> = h.iter().map(|(_, w)| w.clone()).collect();
        assert_eq!(weights.len(), 2);
        assert!(weights.contains(&r(2, 5)) && weights.contains(&r(3, 5)));
        assert_eq!(avg(&h), uniform(&sp));
    }

    #[test]
    fn halving_pushes_forward() {
        let p = parse_program("hidden x: int[0..9]; x := x div 2").unwrap();
        let sp = space_of(&p.decls).unwrap();
        let h = run(&p, &uniform(&sp), DEFAULT_LOOP_BOUND).unwrap();
        assert!(h.is_point());
        let d = h.support().next().unwrap();
        assert_eq!(d.len(), 5);
        assert!(d.iter().all(|(_, p)| *p == r(1, 5)));
    }

    #[test]
    fn constant_print_is_skip() {
        let p = parse_program("hidden x: int[0..3]; print true; print 2").unwrap();
        let sp = space_of(&p.decls).unwrap();
        let prior = uniform(&sp);
        assert_eq!(run(&p, &prior, 10).unwrap(), unit(prior));
    }

    #[test]
    fn loop_bound_is_enforced() {
        let p = parse_program("hidden x: int[0..3]; while x < 3 do x := x + 1 od").unwrap();
        let sp = space_of(&p.decls).unwrap();
        let prior = uniform(&sp);
        assert!(run(&p, &prior, 3).is_ok());
        assert_eq!(run(&p, &prior, 2), Err(Error::LoopBoundExceeded(2)));
        assert_eq!(classical_run(&p, &prior, 2), Err(Error::LoopBoundExceeded(2)));
        // The iteration count leaks x completely.
        assert_eq!(run(&p, &prior, 3).unwrap().len(), 1);
    }

    #[test]
    fn domain_violation() {
        let p = parse_program("hidden x: int[0..3]; x := x + 1").unwrap();
        let sp = space_of(&p.decls).unwrap();
        assert!(matches!(run(&p, &uniform(&sp), 10), Err(Error::Domain(_))));
    }

    #[test]
    fn channel_matrix_rows_are_stochastic() {
        let sp = space_of(&parse_program("hidden x: int[0..5];").unwrap().decls).unwrap();
        let c = Channel::from_expr(&sp, &crate::lang::parser::parse_expr("x mod 3").unwrap()).unwrap();
        let states: Vec<State> = sp.states().collect();
        let m = c.matrix(&states).unwrap();
        assert_eq!(m.observations, vec![0, 1, 2]);
        for row in &m.rows {
            assert_eq!(row.iter().cloned().sum::<Rational>(), Rational::one());
        }
    }
}
