//! WebAssembly entry points for the browser demo in `www/`.

use qif_cli::prior::parse_prior;
use qif_cli::render::hyper_table;
use qif_core::gain::{eval_gain, eval_gain_hyper};
use qif_core::lang::{gain_to_string, parse_program, Program};
use qif_core::semantics::{run, space_of, DEFAULT_LOOP_BOUND};
use qif_core::wp::{wp_program, WpConfig};
use qif_core::{Rational, Space};
use wasm_bindgen::prelude::*;

const GUESS_BOOL: &str = include_str!("../../cli/examples/guess_bool.kuif");

fn load(source: &str) -> Result<(Program, Space), String> {
    let p = parse_program(source).map_err(|e| e.to_string())?;
    let sp = space_of(&p.decls).map_err(|e| e.to_string())?;
    Ok((p, sp))
}

/// Runs `source` forward from `prior` and renders the output hyper.
#[wasm_bindgen]
pub fn run_program(source: &str, prior: &str) -> Result<String, String> {
    let (p, sp) = load(source)?;
    let d = parse_prior(&sp, prior).map_err(|e| e.to_string())?;
    let h = run(&p, &d, DEFAULT_LOOP_BOUND).map_err(|e| e.to_string())?;
    Ok(hyper_table(&sp, &h))
}

/// The pre-gain of the program's `@post`.
#[wasm_bindgen]
pub fn pre_gain(source: &str, simplify: bool) -> Result<String, String> {
    let (p, _) = load(source)?;
    let cfg = WpConfig { simplify, ..WpConfig::default() };
    let r = wp_program(&p, &cfg).map_err(|e| e.to_string())?;
    Ok(gain_to_string(&r.pre))
}

/// The Boolean guessing program under the product prior `P(a) = alpha`,
/// `P(b) = beta`: the sound and the leak-blind pre-gain, each with its
/// value, next to the forward vulnerability.
#[wasm_bindgen]
pub fn guess_bool(alpha: &str, beta: &str) -> Result<String, String> {
    let prob = |s: &str| -> Result<Rational, String> {
        let r: Rational = s.trim().parse().map_err(|_| format!("not a rational: {s}"))?;
        if r < Rational::zero() || r > Rational::one() {
            return Err(format!("not a probability: {s}"));
        }
        Ok(r)
    };
    let (a, b) = (prob(alpha)?, prob(beta)?);
    let (p, sp) = load(GUESS_BOOL)?;
    let spec = format!(
        "product a:{{true:{a},false:{}}} b:{{true:{b},false:{}}} c:false",
        Rational::one() - &a,
        Rational::one() - &b
    );
    let d = parse_prior(&sp, &spec).map_err(|e| e.to_string())?;
    let post = p.post.clone().ok_or("missing @post")?;
    let h = run(&p, &d, DEFAULT_LOOP_BOUND).map_err(|e| e.to_string())?;
    let forward = eval_gain_hyper(&post, &sp, &h).map_err(|e| e.to_string())?;
    let mut out = format!("forward    {forward}\n");
    for (label, branch_leak) in [("sound", true), ("leak-blind", false)] {
        let cfg = WpConfig { branch_leak, ..WpConfig::default() };
        let pre = wp_program(&p, &cfg).map_err(|e| e.to_string())?.pre;
        let v = eval_gain(&pre, &sp, &d).map_err(|e| e.to_string())?;
        let mark = if v == forward { "agrees" } else { "WRONG" };
        out += &format!("{label:<10} {v}  {mark}  {}\n", gain_to_string(&pre));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guessing_a_boolean() {
        let out = guess_bool("1/3", "1/2").unwrap();
        assert!(out.starts_with("forward    2/3\n"), "{out}");
        assert!(out.contains("sound      2/3  agrees  [a or b] MAX [a or not b]"), "{out}");
        let out = guess_bool("1/3", "1/4").unwrap();
        assert!(out.starts_with("forward    5/6\n"), "{out}");
        assert!(out.contains("leak-blind 1/2  WRONG"), "{out}");
        assert!(guess_bool("3/2", "0").is_err());
    }

    #[test]
    fn run_and_pre_gain() {
        let src = "hidden x: int[0..3];\nprint x mod 2 = 0\n@post { MAX n in 0..3: [x = n] }\n";
        let out = run_program(src, "uniform").unwrap();
        assert!(out.contains("inner 1 : 1/2"), "{out}");
        assert!(pre_gain(src, true).is_ok());
        assert!(run_program("x :=", "uniform").is_err());
    }
}
