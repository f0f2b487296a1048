//! Properties of the backward semantics on randomly generated programs.

use qif_core::gain::{eval_gain, eval_gain_hyper, expectation, random_dist};
use qif_core::lang::{parse_gain, parse_program, Gain, Program, StmtKind};
use qif_core::semantics::{classical_run, run, space_of};
use qif_core::wp::{wp, WpConfig};
use qif_core::{Dist, Rational, Space, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DECLS: &str = "hidden x: int[0..3]; hidden b: bool; visible y: int[0..3];\n";

const ASSIGNS: &[&str] = &[
    "x := (x + 1) mod 4",
    "x := 3 - x",
    "b := x < 2",
    "b := not b",
    "x, b := x max 1, b or x = 0",
    "y := x div 2",
    "y := 0",
    "x := y",
];

const PRINTS: &[&str] = &["print x mod 2", "print b", "print x = 3", "print x + y"];

const GUARDS: &[&str] = &["b", "x < 2", "x = y", "not b and x != 0"];

const POSTS: &[&str] = &[
    "MAX i in 0..3: [x = i]",
    "[b] MAX [not b]",
    "x",
    "[x = 0] PLUS [b]",
    "[b] AND (MAX i in 0..3: [x = i])",
    "(MAX i in 0..3: [x = i]) PLUS ([b] MAX [not b])",
];

fn gen_stmt(rng: &mut ChaCha8Rng, depth: u32) -> String {
    let pick = |rng: &mut ChaCha8Rng, p: &[&str]| p[rng.gen_range(0..p.len())].to_string();
    match if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..7) } {
        0 | 1 => pick(rng, ASSIGNS),
        2 => pick(rng, PRINTS),
        3 => format!("if {} then {} else {} fi", pick(rng, GUARDS), gen_stmt(rng, depth - 1), gen_stmt(rng, depth - 1)),
        4 => format!("if {} then {} fi", pick(rng, GUARDS), gen_stmt(rng, depth - 1)),
        5 => format!("while x > 0 and not b do x := x - 1; {} od", pick(rng, PRINTS)),
        _ => format!("{}; {}", gen_stmt(rng, depth - 1), gen_stmt(rng, depth - 1)),
    }
}

fn gen_program(rng: &mut ChaCha8Rng) -> Program {
    let body: Vec<String> = (0..rng.gen_range(1..4)).map(|_| gen_stmt(rng, 2)).collect();
    parse_program(&format!("{DECLS}{}\n", body.join(";\n"))).unwrap()
}

fn setup() -> (Space, Vec<State>) {
    let p = parse_program(&format!("{DECLS}skip\n")).unwrap();
    let sp = space_of(&p.decls).unwrap();
    let states = sp.states().collect();
    (sp, states)
}

fn pre(p: &Program, post: &Gain, cfg: &WpConfig) -> Gain {
    wp(p, post, cfg).unwrap().pre
}

fn priors(states: &[State], rng: &mut ChaCha8Rng, n: usize) -> Vec<Dist<State>> {
    (0..n).map(|_| random_dist(states, rng)).collect()
}

#[test]
fn pre_gain_matches_forward_run() {
    let (sp, states) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let p = gen_program(&mut rng);
        let post = parse_gain(POSTS[rng.gen_range(0..POSTS.len())], &p.decls).unwrap();
        for simplify in [true, false] {
            let g = pre(&p, &post, &WpConfig { simplify, ..WpConfig::default() });
            for d in priors(&states, &mut rng, 6) {
                let h = run(&p, &d, 100).unwrap();
                assert_eq!(
                    eval_gain(&g, &sp, &d).unwrap(),
                    eval_gain_hyper(&post, &sp, &h).unwrap(),
                    "{p:?}"
                );
            }
        }
    }
}

#[test]
fn sequential_composition() {
    let (sp, states) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cfg = WpConfig::default();
    for _ in 0..40 {
        let (p1, p2) = (gen_program(&mut rng), gen_program(&mut rng));
        let post = parse_gain(POSTS[rng.gen_range(0..POSTS.len())], &p1.decls).unwrap();
        let mut joined = p1.clone();
        joined.body.kind = StmtKind::Seq(vec![p1.body.clone(), p2.body.clone()]);
        let whole = pre(&joined, &post, &cfg);
        let staged = pre(&p1, &pre(&p2, &post, &cfg), &cfg);
        for d in priors(&states, &mut rng, 6) {
            assert_eq!(eval_gain(&whole, &sp, &d).unwrap(), eval_gain(&staged, &sp, &d).unwrap());
        }
    }
}

#[test]
fn plus_is_linear_and_max_is_monotone() {
    let (sp, states) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = WpConfig::default();
    for _ in 0..40 {
        let p = gen_program(&mut rng);
        let e1 = parse_gain(POSTS[rng.gen_range(0..POSTS.len())], &p.decls).unwrap();
        let e2 = parse_gain(POSTS[rng.gen_range(0..POSTS.len())], &p.decls).unwrap();
        let (w1, w2) = (pre(&p, &e1, &cfg), pre(&p, &e2, &cfg));
        let sum = pre(&p, &Gain::plus(e1.clone(), e2.clone()), &cfg);
        let choice = pre(&p, &Gain::max(e1.clone(), e2.clone()), &cfg);
        for d in priors(&states, &mut rng, 6) {
            let (v1, v2) = (eval_gain(&w1, &sp, &d).unwrap(), eval_gain(&w2, &sp, &d).unwrap());
            assert_eq!(eval_gain(&sum, &sp, &d).unwrap(), &v1 + &v2);
            let vc = eval_gain(&choice, &sp, &d).unwrap();
            assert!(vc >= v1 && vc >= v2);
        }
    }
}

#[test]
fn standard_posts_ignore_leaks() {
    let (sp, states) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let standard = ["x", "[b]", "2 * [x = 0] + [b and x > 1]", "y + x"];
    for _ in 0..40 {
        let p = gen_program(&mut rng);
        let post = parse_gain(standard[rng.gen_range(0..standard.len())], &p.decls).unwrap();
        let Gain::Atom(e) = &post else { unreachable!() };
        let sound = pre(&p, &post, &WpConfig::default());
        let blind = pre(&p, &post, &WpConfig { branch_leak: false, ..WpConfig::default() });
        for d in priors(&states, &mut rng, 6) {
            let classical = expectation(e, &sp, &classical_run(&p, &d, 100).unwrap()).unwrap();
            assert_eq!(eval_gain(&sound, &sp, &d).unwrap(), classical);
            assert_eq!(eval_gain(&blind, &sp, &d).unwrap(), classical);
        }
    }
}

#[test]
fn leak_blind_rule_overestimates_nothing_it_should_not() {
    // Ignoring the branch leak can only lose information for the adversary.
    let (sp, states) = setup();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..40 {
        let p = gen_program(&mut rng);
        let post = parse_gain(POSTS[rng.gen_range(0..POSTS.len())], &p.decls).unwrap();
        let sound = pre(&p, &post, &WpConfig::default());
        let blind = pre(&p, &post, &WpConfig { branch_leak: false, ..WpConfig::default() });
        for d in priors(&states, &mut rng, 6) {
            let (s, b): (Rational, Rational) = (eval_gain(&sound, &sp, &d).unwrap(), eval_gain(&blind, &sp, &d).unwrap());
            assert!(b <= s, "{p:?}");
        }
    }
}
