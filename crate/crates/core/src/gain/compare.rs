//! Semantic comparison of gain expressions on sampled distributions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::Dist;
use crate::error::Result;
use crate::gain::eval::GainEvaluator;
use crate::lang::ast::Gain;
use crate::rational::Rational;
use crate::space::{Space, State};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub dist: Dist<State>,
    pub lhs: Rational,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails(Box<Counterexample>),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Random distribution over `states` with integer weights in `0..=16`.
pub fn random_dist(states: &[State], rng: &mut impl Rng) -> Dist<State> {
    loop {
        let weights: Vec<(State, Rational)> = states
            .iter()
            .map(|s| (s.clone(), Rational::from_int(rng.gen_range(0..=16))))
            .collect();
        if let Ok(d) = Dist::normalized(weights) {
            return d;
        }
    }
}

/// `n` random distributions over `states` from a seeded generator.
pub fn random_dists(states: &[State], n: usize, seed: u64) -> Vec<Dist<State>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_dist(states, &mut rng)).collect()
}

/// One `state : p` line per support element.
pub fn render_dist(space: &Space, d: &Dist<State>) -> String {
    d.iter()
        .map(|(s, p)| format!("{} : {p}", space.show(s)))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Test distributions over `states`: each point, the uniform one, then
/// `trials` random ones drawn from a seeded generator.
pub fn test_dists(states: &[State], trials: usize, seed: u64) -> impl Iterator<Item = Dist<State>> + '_ {
    let points = states.iter().cloned().map(Dist::point);
    let uniform = Dist::uniform(states.iter().cloned()).ok().filter(|_| states.len() > 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = (0..trials).map(move |_| random_dist(states, &mut rng));
    points.chain(uniform).chain(random)
}

/// Checks `rel(V[e1](d), V[e2](d))` on the distributions of [`test_dists`].
pub fn semantic_check(
    e1: &Gain,
    e2: &Gain,
    space: &Space,
    states: &[State],
    trials: usize,
    seed: u64,
    rel: impl Fn(&Rational, &Rational) -> bool,
) -> Result<Verdict> {
    let a = GainEvaluator::new(e1, space)?;
    let b = GainEvaluator::new(e2, space)?;
    for d in test_dists(states, trials, seed) {
        let (lhs, rhs) = (a.eval(&d)?, b.eval(&d)?);
        if !rel(&lhs, &rhs) {
            return Ok(Verdict::Fails(Box::new(Counterexample { dist: d, lhs, rhs })));
        }
    }
    Ok(Verdict::Holds)
}

/// `V[e1] <= V[e2]` on every state space test distribution.
pub fn semantic_le(e1: &Gain, e2: &Gain, space: &Space, trials: usize, seed: u64) -> Result<Verdict> {
    let states: Vec<State> = space.states().collect();
    semantic_check(e1, e2, space, &states, trials, seed, |x, y| x <= y)
}

/// `V[e1] = V[e2]` on every state space test distribution.
pub fn semantic_eq(e1: &Gain, e2: &Gain, space: &Space, trials: usize, seed: u64) -> Result<Verdict> {
    let states: Vec<State> = space.states().collect();
    semantic_check(e1, e2, space, &states, trials, seed, |x, y| x == y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_decls, parse_gain};
    use crate::semantics::space_of;

    #[test]
    fn certainty_beats_choice() {
        let d = parse_decls("hidden b: bool;").unwrap();
        let sp = space_of(&d).unwrap();
        let choose = parse_gain("[b] MAX [not b]", &d).unwrap();
        let certain = parse_gain("[b] PLUS [not b]", &d).unwrap();
        assert!(semantic_le(&choose, &certain, &sp, 20, 1).unwrap().holds());
        match semantic_le(&certain, &choose, &sp, 20, 1).unwrap() {
            Verdict::Fails(c) => assert!(c.lhs > c.rhs),
            Verdict::Holds => panic!("expected a counterexample"),
        }
        assert!(semantic_eq(&certain, &parse_gain("1", &d).unwrap(), &sp, 20, 1).unwrap().holds());
    }
}
