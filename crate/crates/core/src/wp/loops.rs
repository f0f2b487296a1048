//! Loop rules: unfolding to the exact iteration bound, and invariant checks.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, InvariantFailure, Obligation, Result};
use crate::eval::compile;
use crate::gain::compare::{render_dist, test_dists};
use crate::gain::eval::GainEvaluator;
use crate::lang::ast::*;
use crate::lang::printer::gain_to_string;
use crate::semantics::{exec_traced, site, Observer};
use crate::space::{Space, State};
use crate::wp::Wp;

type Trace = Vec<(usize, i64)>;

/// What forward execution from every initial state reveals about loops.
#[derive(Debug, Clone, Default)]
pub struct LoopStats {
    /// Largest number of body executions, per loop site.
    iterations: HashMap<usize, u64>,
    /// Loop-head states grouped by the observations made before reaching
    /// them, per loop site. A posterior at the loop head is supported on
    /// one group.
    classes: HashMap<usize, Vec<Vec<State>>>,
}

#[derive(Default)]
struct Recorder {
    trace: Trace,
    current: Option<usize>,
    iterations: HashMap<usize, u64>,
    classes: BTreeMap<(usize, Trace), BTreeSet<State>>,
}

impl Observer for Recorder {
    fn observe(&mut self, site: usize, value: i64) {
        self.trace.push((site, value));
    }

    fn loop_head(&mut self, site: usize, iteration: u64, s: &State) {
        self.current = Some(site);
        let k = self.iterations.entry(site).or_insert(0);
        *k = (*k).max(iteration);
        self.classes.entry((site, self.trace.clone())).or_default().insert(s.clone());
    }
}

fn loop_positions(s: &Stmt, out: &mut HashMap<usize, Pos>) {
    match &s.kind {
        StmtKind::Seq(v) => v.iter().for_each(|x| loop_positions(x, out)),
        StmtKind::If(_, t, e) => {
            loop_positions(t, out);
            loop_positions(e, out);
        }
        StmtKind::While { body, .. } => {
            out.insert(site(s), s.pos);
            loop_positions(body, out);
        }
        _ => {}
    }
}

impl LoopStats {
    /// Executes `root` from every state of `space`. States whose execution
    /// fails at run time are skipped; a loop exceeding `bound` is an error.
    pub fn explore(space: &Space, root: &Stmt, bound: u64) -> Result<LoopStats> {
        let mut rec = Recorder::default();
        for s in space.states() {
            rec.trace.clear();
            rec.current = None;
            match exec_traced(space, root, s, bound, &mut rec) {
                Ok(_) => {}
                Err(Error::LoopBoundExceeded(_)) => {
                    let mut pos = HashMap::new();
                    loop_positions(root, &mut pos);
                    let at = rec.current.and_then(|c| pos.get(&c)).copied().unwrap_or_default();
                    return Err(Error::BoundTooSmall { pos: at.to_string(), bound });
                }
                Err(e) if e.is_runtime() => {}
                Err(e) => return Err(e),
            }
        }
        let mut classes: HashMap<usize, Vec<Vec<State>>> = HashMap::new();
        for ((site, _), states) in rec.classes {
            let states: Vec<State> = states.into_iter().collect();
            let list = classes.entry(site).or_default();
            if !list.contains(&states) {
                list.push(states);
            }
        }
        Ok(LoopStats { iterations: rec.iterations, classes })
    }

    /// Largest number of times the body of the loop at `site` runs.
    pub fn iterations(&self, site: usize) -> u64 {
        self.iterations.get(&site).copied().unwrap_or(0)
    }

    pub fn classes(&self, site: usize) -> &[Vec<State>] {
        self.classes.get(&site).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn split(guard: &Expr, g_pre: Gain, post: &Gain) -> Gain {
    Gain::Plus(vec![
        Gain::and(Expr::iverson(guard.clone()), g_pre),
        Gain::and(Expr::iverson(Expr::not(guard.clone())), post.clone()),
    ])
}

/// `W0 = [not g] AND post`, `Wk = [g] AND wp(body, Wk-1) PLUS [not g] AND post`,
/// taken to the largest iteration count any execution reaches.
pub(crate) fn unfold(w: &mut Wp, s: &Stmt, guard: &Expr, body: &Stmt, post: &Gain) -> Result<Gain> {
    let k = w.stats()?.iterations(site(s));
    let mut acc = w.finish(Gain::and(Expr::iverson(Expr::not(guard.clone())), post.clone()))?;
    for _ in 0..k {
        let b = w.stmt(body, &acc)?;
        acc = w.finish(split(guard, b, post))?;
    }
    Ok(acc)
}

/// Checks `inv = [g] AND wp(body, inv) PLUS [not g] AND post` on every
/// loop-head posterior class and returns `inv` as the loop's pre-gain.
pub(crate) fn check_invariant(
    w: &mut Wp,
    s: &Stmt,
    guard: &Expr,
    body: &Stmt,
    inv: &Gain,
    post: &Gain,
) -> Result<Gain> {
    let body_pre = w.stmt(body, inv)?;
    let rhs = split(guard, body_pre, post);
    let classes = w.stats()?.classes(site(s)).to_vec();
    let space = w.space;
    let lhs_ev = GainEvaluator::new(inv, space)?;
    let rhs_ev = GainEvaluator::new(&rhs, space)?;
    let g = compile(guard, space, &[])?;
    let per_class = (w.cfg.trials / classes.len().max(1)).max(4);
    for (i, class) in classes.iter().enumerate() {
        for d in test_dists(class, per_class, w.cfg.seed.wrapping_add(i as u64)) {
            let (lhs, rhs) = (lhs_ev.eval(&d)?, rhs_ev.eval(&d)?);
            if lhs == rhs {
                continue;
            }
            let mut truths = BTreeSet::new();
            for x in d.support() {
                truths.insert(g.eval_bool(x, &[])?);
            }
            let obligation = match (truths.contains(&true), truths.contains(&false)) {
                (true, false) => Obligation::Then,
                (false, true) => Obligation::Else,
                _ => Obligation::Combine,
            };
            return Err(Error::InvariantCheckFailed(Box::new(InvariantFailure {
                obligation,
                invariant: gain_to_string(inv),
                counterexample: render_dist(space, &d),
                lhs,
                rhs,
            })));
        }
    }
    w.finish(inv.clone())
}
