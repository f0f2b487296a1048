//! The demo's entry points on the programs the page ships with.

use qif_web::{guess_bool, pre_gain, run_program};

const GUESS10: &str = "hidden x: int[0..9];\nprint x mod 3 = 0\n@post { MAX n in 0..9: [x = n] }\n";

#[test]
fn page_defaults() {
    let out = run_program(GUESS10, "uniform").unwrap();
    assert!(out.starts_with("inner 1 : 2/5\n"), "{out}");
    assert!(out.contains("inner 2 : 3/5\n"), "{out}");
    assert_eq!(
        pre_gain(GUESS10, true).unwrap(),
        "(MAX n in {0, 3, 6, 9}: [x = n]) PLUS (MAX n in {1, 2, 4, 5, 7, 8}: [x = n])"
    );
    assert!(!pre_gain(GUESS10, false).unwrap().is_empty());
}

#[test]
fn sound_rule_tracks_the_forward_value() {
    for (a, b) in [("1/3", "1/2"), ("1/2", "1/2"), ("3/10", "3/10"), ("1/3", "1/4"), ("0", "1")] {
        let out = guess_bool(a, b).unwrap();
        let sound = out.lines().find(|l| l.starts_with("sound")).unwrap();
        assert!(sound.contains("agrees"), "{out}");
    }
}

#[test]
fn errors_are_messages() {
    assert!(run_program(GUESS10, "product y:uniform").is_err());
    assert!(pre_gain("hidden x: int[0..3];\nskip\n", true).unwrap_err().contains("@post"));
    assert!(guess_bool("half", "1/2").is_err());
}
