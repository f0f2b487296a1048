//! Seeded property tests for the MAX / PLUS / AND algebra and for the
//! normal form, checked against a set-of-actions oracle.

use qif_core::gain::{eval_gain, expectation, normalize, random_dist, simplify};
use qif_core::lang::{parse_decls, parse_expr, Expr, Gain, IndexSet};
use qif_core::semantics::space_of;
use qif_core::{Dist, Rational, Space, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 600;

const POOL: &[&str] = &[
    "0",
    "1",
    "[b]",
    "[not b]",
    "[x = 0]",
    "[x = 3]",
    "[x < 2]",
    "[b and x > 0]",
    "x",
    "x mod 2",
    "1/2 * [x != 1]",
    "2 * [b or x = 2]",
    "1/3 * x",
];

const CONTEXTS: &[&str] = &["[b]", "[x < 2]", "1/2", "[x != 3 and not b]", "x", "2"];

const QUANTIFIED: &[&str] = &["[x = i]", "[x = i and b]", "i * [x = i]", "[x + i = 3]"];

struct World {
    space: Space,
    states: Vec<State>,
}

fn world() -> World {
    let decls = parse_decls("hidden x: int[0..3]; hidden b: bool;").unwrap();
    let space = space_of(&decls).unwrap();
    let states = space.states().collect();
    World { space, states }
}

fn pick(rng: &mut ChaCha8Rng, pool: &[&str]) -> Expr {
    parse_expr(pool[rng.gen_range(0..pool.len())]).unwrap()
}

fn gen_gain(rng: &mut ChaCha8Rng, depth: u32) -> Gain {
    let choice = if depth == 0 { 0 } else { rng.gen_range(0..5) };
    match choice {
        0 => Gain::Atom(pick(rng, POOL)),
        1 => Gain::Max((0..rng.gen_range(2..4)).map(|_| gen_gain(rng, depth - 1)).collect()),
        2 => Gain::Plus((0..rng.gen_range(2..4)).map(|_| gen_gain(rng, depth - 1)).collect()),
        3 => Gain::and(pick(rng, CONTEXTS), gen_gain(rng, depth - 1)),
        _ => Gain::QuantMax {
            var: "i".into(),
            set: IndexSet::Range(0, 3),
            body: Box::new(Gain::Atom(pick(rng, QUANTIFIED))),
        },
    }
}

/// A gain as its set of actions, each a reward per state.
fn actions(g: &Gain, w: &World) -> Vec<Vec<Rational>> {
    let pointwise = |e: &Expr| -> Vec<Rational> {
        w.states
            .iter()
            .map(|s| expectation(e, &w.space, &Dist::point(s.clone())).unwrap())
            .collect()
    };
    match g {
        Gain::Atom(e) => vec![pointwise(e)],
        Gain::Max(v) => v.iter().flat_map(|x| actions(x, w)).collect(),
        Gain::Plus(v) => v.iter().fold(vec![vec![Rational::zero(); w.states.len()]], |acc, x| {
            let mut out = Vec::new();
            for a in &acc {
                for b in actions(x, w) {
                    out.push(a.iter().zip(&b).map(|(p, q)| p + q).collect());
                }
            }
            out
        }),
        Gain::And(c, x) => {
            let c = pointwise(c);
            actions(x, w)
                .into_iter()
                .map(|a| a.iter().zip(&c).map(|(p, q)| p * q).collect())
                .collect()
        }
        Gain::QuantMax { var, set, body } => set
            .values()
            .into_iter()
            .flat_map(|v| {
                let mut m = std::collections::HashMap::new();
                m.insert(var.clone(), Expr::Int(v));
                actions(&qif_core::lang::transform::subst_gain(body, &m), w)
            })
            .collect(),
    }
}

fn oracle(g: &Gain, w: &World, d: &Dist<State>) -> Rational {
    actions(g, w)
        .iter()
        .map(|a| w.states.iter().zip(a).map(|(s, r)| d.prob(s) * r).fold(Rational::zero(), |x, y| x + y))
        .max()
        .unwrap()
}

fn v(g: &Gain, w: &World, d: &Dist<State>) -> Rational {
    eval_gain(g, &w.space, d).unwrap()
}

fn max(a: &Gain, b: &Gain) -> Gain {
    Gain::max(a.clone(), b.clone())
}

fn plus(a: &Gain, b: &Gain) -> Gain {
    Gain::plus(a.clone(), b.clone())
}

fn cases(seed: u64, mut f: impl FnMut(&World, &mut ChaCha8Rng, &Dist<State>)) {
    let w = world();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..CASES {
        let d = if k < w.states.len() {
            Dist::point(w.states[k].clone())
        } else {
            random_dist(&w.states, &mut rng)
        };
        f(&w, &mut rng, &d);
    }
}

#[test]
fn evaluator_matches_action_sets() {
    cases(1, |w, rng, d| {
        let g = gen_gain(rng, 3);
        assert_eq!(v(&g, w, d), oracle(&g, w, d), "{g:?}");
    });
}

#[test]
fn max_laws() {
    cases(2, |w, rng, d| {
        let (e1, e2, e3) = (gen_gain(rng, 2), gen_gain(rng, 2), gen_gain(rng, 2));
        assert_eq!(v(&max(&e1, &max(&e2, &e3)), w, d), v(&max(&max(&e1, &e2), &e3), w, d));
        assert_eq!(v(&max(&e1, &e2), w, d), v(&max(&e2, &e1), w, d));
        assert_eq!(v(&max(&e1, &Gain::zero()), w, d), v(&e1, w, d));
        // e1 <= e1 PLUS e2 since rewards are non-negative.
        let big = plus(&e1, &e2);
        assert_eq!(v(&max(&e1, &big), w, d), v(&big, w, d));
    });
}

#[test]
fn plus_laws() {
    cases(3, |w, rng, d| {
        let (e1, e2, e3) = (gen_gain(rng, 2), gen_gain(rng, 2), gen_gain(rng, 2));
        assert_eq!(v(&plus(&e1, &plus(&e2, &e3)), w, d), v(&plus(&plus(&e1, &e2), &e3), w, d));
        assert_eq!(v(&plus(&e1, &e2), w, d), v(&plus(&e2, &e1), w, d));
        assert_eq!(v(&plus(&e1, &Gain::zero()), w, d), v(&e1, w, d));
        let bigger = max(&e1, &e3);
        assert!(v(&plus(&e1, &e2), w, d) <= v(&plus(&bigger, &e2), w, d));
    });
}

#[test]
fn max_plus_distribution() {
    cases(4, |w, rng, d| {
        let (e1, e2, e3) = (gen_gain(rng, 2), gen_gain(rng, 2), gen_gain(rng, 2));
        assert_eq!(v(&plus(&e1, &max(&e2, &e3)), w, d), v(&max(&plus(&e1, &e2), &plus(&e1, &e3)), w, d));
        assert!(v(&max(&e1, &plus(&e2, &e3)), w, d) <= v(&plus(&max(&e1, &e2), &max(&e1, &e3)), w, d));
    });
}

#[test]
fn and_distribution() {
    cases(5, |w, rng, d| {
        let c = pick(rng, CONTEXTS);
        let (e1, e2) = (gen_gain(rng, 2), gen_gain(rng, 2));
        let and = |g: Gain| Gain::and(c.clone(), g);
        assert_eq!(v(&and(max(&e1, &e2)), w, d), v(&Gain::max(and(e1.clone()), and(e2.clone())), w, d));
        assert_eq!(v(&and(plus(&e1, &e2)), w, d), v(&Gain::plus(and(e1.clone()), and(e2.clone())), w, d));
    });
}

#[test]
fn normal_form_preserves_value() {
    cases(6, |w, rng, d| {
        let g = gen_gain(rng, 3);
        let nf = normalize(&g).unwrap();
        assert!(nf.to_gain().is_standard() || matches!(nf.to_gain(), Gain::Max(ref v) if v.iter().all(Gain::is_standard)));
        assert_eq!(v(&nf.to_gain(), w, d), oracle(&g, w, d), "{g:?}");
    });
}

#[test]
fn simplification_preserves_value() {
    cases(7, |w, rng, d| {
        let g = gen_gain(rng, 3);
        let s = simplify(&g, &w.space).unwrap();
        assert_eq!(v(&s, w, d), oracle(&g, w, d), "{g:?} became {s:?}");
    });
}
