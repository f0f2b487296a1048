//! Backward greatest pre-gain transformer.
//!
//! `wp(P, E)` is a gain expression whose vulnerability on any prior equals
//! the conditional expected vulnerability of `E` on the output hyper of
//! `P`. Assignments substitute, conditionals and `print` split the post
//! along what the adversary observes, and loops are either unfolded to
//! their exact iteration bound or justified by an annotated invariant.

mod loops;

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::gain::normal::normalize;
use crate::gain::simplify::Simplifier;
use crate::lang::ast::*;
use crate::lang::check::{check_gain, check_program};
use crate::lang::printer::stmt_head;
use crate::lang::transform::{desugar_visible, free_vars, subst_gain};
use crate::semantics::{space_of, DEFAULT_LOOP_BOUND};
use crate::space::Space;

pub use loops::LoopStats;

/// How loops are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Use the annotated invariant when present, otherwise unfold.
    Auto,
    Unfold,
    Invariant,
}

#[derive(Debug, Clone)]
pub struct WpConfig {
    /// Simplify after every step.
    pub simplify: bool,
    /// Account for the implicit leak of conditional guards. Turning this
    /// off gives the classical, unsound rule.
    pub branch_leak: bool,
    pub loop_bound: u64,
    pub strategy: Strategy,
    /// Random distributions per invariant check.
    pub trials: usize,
    pub seed: u64,
}

impl Default for WpConfig {
    fn default() -> WpConfig {
        WpConfig {
            simplify: true,
            branch_leak: true,
            loop_bound: DEFAULT_LOOP_BOUND,
            strategy: Strategy::Auto,
            trials: 100,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub pos: Pos,
    pub head: String,
    /// Pre-gain of the statement.
    pub gain: Gain,
}

#[derive(Debug, Clone)]
pub struct WpResult {
    pub pre: Gain,
    /// Per-statement pre-gains in program order.
    pub trace: Vec<TraceEntry>,
}

/// Simultaneous substitution of an assignment into `post`.
pub fn wp_assign(pairs: &[(LValue, Expr)], post: &Gain) -> Gain {
    let mut map: HashMap<String, Expr> = HashMap::new();
    for (lv, e) in pairs {
        match lv {
            LValue::Var(n) => {
                map.insert(n.clone(), e.clone());
            }
            LValue::Elem(n, i) => {
                let base = map.remove(n).unwrap_or_else(|| Expr::var(n));
                map.insert(n.clone(), Expr::Store(Box::new(base), Box::new(i.clone()), Box::new(e.clone())));
            }
        }
    }
    subst_gain(post, &map)
}

/// `[g] AND then PLUS [not g] AND else`.
pub fn wp_if(guard: &Expr, then_pre: Gain, else_pre: Gain) -> Gain {
    Gain::Plus(vec![
        Gain::and(Expr::iverson(guard.clone()), then_pre),
        Gain::and(Expr::iverson(Expr::not(guard.clone())), else_pre),
    ])
}

/// Every value `e` takes on the declared space, or `None` for a Boolean.
fn print_values(e: &Expr, space: &Space) -> Result<Option<Vec<i64>>> {
    let vars: Vec<_> = free_vars(e)
        .into_iter()
        .filter_map(|v| space.var(&v).map(|i| (v, i.domain.clone())))
        .collect();
    let sub = Space::new(vars)?;
    if sub.size() > 1 << 20 {
        return Err(Error::Type(format!("cannot enumerate the values of a print over {} states", sub.size())));
    }
    let c = crate::eval::compile(e, &sub, &[])?;
    let mut vals = std::collections::BTreeSet::new();
    for s in sub.states() {
        match c.eval(&s, &[]) {
            Ok(crate::eval::Value::Bool(_)) => return Ok(None),
            Ok(v) => {
                vals.insert(v.to_slot()?);
            }
            Err(e) if e.is_runtime() => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Some(vals.into_iter().collect()))
}

/// `PLUS` over the values `v` of `e` of `[e = v] AND post`.
pub fn wp_print(e: &Expr, post: &Gain, space: &Space) -> Result<Gain> {
    Ok(match print_values(e, space)? {
        None => wp_if(e, post.clone(), post.clone()),
        Some(vals) if vals.len() <= 1 => post.clone(),
        Some(vals) => Gain::Plus(
            vals.into_iter()
                .map(|v| Gain::and(Expr::iverson(Expr::bin(BinOp::Eq, e.clone(), Expr::Int(v))), post.clone()))
                .collect(),
        ),
    })
}

pub(crate) struct Wp<'a> {
    space: &'a Space,
    cfg: &'a WpConfig,
    root: &'a Stmt,
    simp: Simplifier<'a>,
    stats: Option<LoopStats>,
    trace: Vec<TraceEntry>,
    record: bool,
}

impl<'a> Wp<'a> {
    fn new(space: &'a Space, root: &'a Stmt, cfg: &'a WpConfig) -> Wp<'a> {
        Wp { space, cfg, root, simp: Simplifier::new(space), stats: None, trace: Vec::new(), record: true }
    }

    fn finish(&mut self, g: Gain) -> Result<Gain> {
        if self.cfg.simplify {
            self.simp.simplify(&g)
        } else {
            Ok(g)
        }
    }

    fn stats(&mut self) -> Result<&LoopStats> {
        if self.stats.is_none() {
            self.stats = Some(LoopStats::explore(self.space, self.root, self.cfg.loop_bound)?);
        }
        Ok(self.stats.as_ref().unwrap())
    }

    pub(crate) fn stmt(&mut self, s: &Stmt, post: &Gain) -> Result<Gain> {
        let pre = match &s.kind {
            StmtKind::Seq(v) => {
                let mut g = post.clone();
                for x in v.iter().rev() {
                    g = self.stmt(x, &g)?;
                }
                return Ok(g);
            }
            StmtKind::Skip => post.clone(),
            StmtKind::Assign(pairs) => {
                let g = wp_assign(pairs, post);
                self.finish(g)?
            }
            StmtKind::Print(e) => {
                let g = wp_print(e, post, self.space)?;
                self.finish(g)?
            }
            StmtKind::If(g, t, e) => {
                if self.cfg.branch_leak {
                    let tp = self.stmt(t, post)?;
                    let ep = self.stmt(e, post)?;
                    self.finish(wp_if(g, tp, ep))?
                } else {
                    self.if_without_leak(g, t, e, post)?
                }
            }
            StmtKind::While { guard, body, invariant } => self.while_(s, guard, body, invariant.as_ref(), post)?,
        };
        if self.record {
            self.trace.push(TraceEntry { pos: s.pos, head: stmt_head(s), gain: pre.clone() });
        }
        Ok(pre)
    }

    /// The classical rule applied to each atom of the post's normal form,
    /// ignoring what the guard reveals.
    fn if_without_leak(&mut self, g: &Expr, t: &Stmt, e: &Stmt, post: &Gain) -> Result<Gain> {
        let record = std::mem::replace(&mut self.record, false);
        let mut options = Vec::new();
        for atom in normalize(post)?.atoms {
            let a = Gain::Atom(atom);
            let tp = self.stmt(t, &a)?;
            let ep = self.stmt(e, &a)?;
            options.push(wp_if(g, tp, ep));
        }
        self.record = record;
        self.finish(Gain::Max(options))
    }

    fn while_(&mut self, s: &Stmt, guard: &Expr, body: &Stmt, inv: Option<&Gain>, post: &Gain) -> Result<Gain> {
        let use_invariant = match (self.cfg.strategy, inv) {
            (Strategy::Unfold, _) | (Strategy::Auto, None) => None,
            (_, Some(i)) => Some(i),
            (Strategy::Invariant, None) => {
                return Err(Error::LoopNeedsInvariantOrBound(s.pos.to_string(), "no invariant annotation".into()))
            }
        };
        let record = std::mem::replace(&mut self.record, false);
        let out = match use_invariant {
            Some(i) => loops::check_invariant(self, s, guard, body, i, post),
            None => loops::unfold(self, s, guard, body, post),
        };
        self.record = record;
        out
    }
}

/// Pre-gain of `post` through a statement over `space`.
pub fn wp_stmt(space: &Space, s: &Stmt, post: &Gain, cfg: &WpConfig) -> Result<Gain> {
    Wp::new(space, s, cfg).stmt(s, post)
}

/// Pre-gain of `post` through a program, with its per-statement trace.
pub fn wp(p: &Program, post: &Gain, cfg: &WpConfig) -> Result<WpResult> {
    check_program(p)?;
    check_gain(post, &p.decls)?;
    let p = desugar_visible(p);
    let space = space_of(&p.decls)?;
    let mut w = Wp::new(&space, &p.body, cfg);
    let pre = w.stmt(&p.body, post)?;
    let mut trace = w.trace;
    trace.reverse();
    trace.sort_by_key(|t| t.pos);
    Ok(WpResult { pre, trace })
}

/// Pre-gain of a program's `@post` annotation.
pub fn wp_program(p: &Program, cfg: &WpConfig) -> Result<WpResult> {
    let post = p.post.as_ref().ok_or_else(|| Error::Type("program has no @post annotation".into()))?;
    wp(p, post, cfg)
}
