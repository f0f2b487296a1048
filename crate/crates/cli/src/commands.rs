//! The four commands. Each returns a [`Report`] instead of printing, so
//! tests can drive them directly.

use std::fmt::Write as _;

use qif_core::gain::{random_dists, GainEvaluator};
use qif_core::lang::{check_gain, check_program, gain_to_string, parse_decls, parse_gain, parse_program, Program};
use qif_core::semantics::{classical_run, run, space_of};
use qif_core::wp::{wp_program, Strategy, WpConfig};
use qif_core::{avg, Dist, Error, Space, State};
use serde_json::json;

use crate::prior::{parse_hyper, parse_prior, read_spec};
use crate::render::{hyper_json, hyper_table, rational_json, verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_STATIC: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone)]
pub struct Options {
    pub loop_bound: u64,
    pub seed: u64,
    pub format: Format,
    pub color: bool,
    pub strategy: Strategy,
}

impl Default for Options {
    fn default() -> Options {
        Options {
            loop_bound: qif_core::semantics::DEFAULT_LOOP_BOUND,
            seed: 42,
            format: Format::Table,
            color: false,
            strategy: Strategy::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub out: String,
    pub err: String,
    pub code: i32,
}

impl Report {
    fn ok(out: String) -> Report {
        Report { out, err: String::new(), code: EXIT_OK }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvariantCheckFailed(_) => EXIT_INVARIANT,
        e if e.is_runtime() || matches!(e, Error::NormalFormTooLarge(_)) => EXIT_RUNTIME,
        _ => EXIT_STATIC,
    }
}

fn failure(context: &str, e: &Error) -> Report {
    Report { out: String::new(), err: format!("error: {context}: {e}\n"), code: exit_code(e) }
}

fn io_failure(path: &str, e: std::io::Error) -> Report {
    Report { out: String::new(), err: format!("error: {path}: {e}\n"), code: EXIT_STATIC }
}

fn load(path: &str) -> Result<Program, Report> {
    let src = std::fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let p = parse_program(&src).map_err(|e| failure(path, &e))?;
    check_program(&p).map_err(|e| failure(path, &e))?;
    Ok(p)
}

fn space(path: &str, p: &Program) -> Result<Space, Report> {
    space_of(&p.decls).map_err(|e| failure(path, &e))
}

fn prior(space: &Space, spec: &str) -> Result<Dist<State>, Report> {
    let text = read_spec(spec).map_err(|e| io_failure(spec, e))?;
    parse_prior(space, &text).map_err(|e| failure("prior", &e))
}

fn wp_config(opts: &Options, simplify: bool, branch_leak: bool) -> WpConfig {
    WpConfig {
        simplify,
        branch_leak,
        loop_bound: opts.loop_bound,
        strategy: opts.strategy,
        seed: opts.seed,
        ..WpConfig::default()
    }
}

fn pretty(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("json");
    s.push('\n');
    s
}

/// Runs a program forward and prints the output hyper.
pub fn cmd_run(path: &str, prior_spec: &str, opts: &Options) -> Report {
    let go = || -> Result<Report, Report> {
        let p = load(path)?;
        let sp = space(path, &p)?;
        let d = prior(&sp, prior_spec)?;
        let h = run(&p, &d, opts.loop_bound).map_err(|e| failure(path, &e))?;
        Ok(Report::ok(match opts.format {
            Format::Table => format!("# run {path} --prior {prior_spec}\n{}", hyper_table(&sp, &h)),
            Format::Json => pretty(json!({
                "command": "run",
                "file": path,
                "prior": prior_spec,
                "hyper": hyper_json(&sp, &h),
            })),
        }))
    };
    go().unwrap_or_else(|r| r)
}

/// Prints the pre-gain of the program's `@post`, optionally with the
/// pre-gain of every statement.
pub fn cmd_wp(path: &str, no_simplify: bool, show_trace: bool, opts: &Options) -> Report {
    let go = || -> Result<Report, Report> {
        let p = load(path)?;
        let r = wp_program(&p, &wp_config(opts, !no_simplify, true)).map_err(|e| failure(path, &e))?;
        let pre = gain_to_string(&r.pre);
        Ok(Report::ok(match opts.format {
            Format::Table if show_trace => {
                let mut out = String::new();
                for t in &r.trace {
                    writeln!(out, "{{ {} }}", gain_to_string(&t.gain)).unwrap();
                    writeln!(out, "  {}  {}", t.pos, t.head).unwrap();
                }
                let post = p.post.as_ref().map(gain_to_string).unwrap_or_default();
                if r.trace.is_empty() {
                    writeln!(out, "{{ {pre} }}").unwrap();
                }
                writeln!(out, "{{ {post} }}").unwrap();
                out
            }
            Format::Table => format!("{pre}\n"),
            Format::Json => {
                let trace: Vec<_> = r
                    .trace
                    .iter()
                    .map(|t| json!({ "pos": t.pos.to_string(), "stmt": t.head, "pre": gain_to_string(&t.gain) }))
                    .collect();
                pretty(json!({ "command": "wp", "file": path, "pre": pre, "trace": trace }))
            }
        }))
    };
    go().unwrap_or_else(|r| r)
}

/// A family of priors for `check`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PriorSet {
    /// Every point prior.
    Exhaustive,
    Random { count: usize, seed: u64 },
}

impl PriorSet {
    /// Parses `exhaustive`, `random:N` or `random:N:SEED`.
    pub fn parse(text: &str, default_seed: u64) -> Result<PriorSet, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| format!("bad number `{s}` in `{text}`"));
        match parts.as_slice() {
            ["exhaustive"] => Ok(PriorSet::Exhaustive),
            ["random", n] => Ok(PriorSet::Random { count: num(n)? as usize, seed: default_seed }),
            ["random", n, s] => Ok(PriorSet::Random { count: num(n)? as usize, seed: num(s)? }),
            _ => Err(format!("unknown prior set `{text}`; expected exhaustive or random:N:SEED")),
        }
    }
}

pub struct CheckArgs<'a> {
    pub priors: Vec<PriorSet>,
    pub prior: Option<&'a str>,
    pub also_forward: bool,
    pub unsound_no_branch_leak: bool,
}

/// Compares the pre-gain on each prior with the post-gain on the output.
pub fn cmd_check(path: &str, args: &CheckArgs, opts: &Options) -> Report {
    let go = || -> Result<Report, Report> {
        let p = load(path)?;
        let sp = space(path, &p)?;
        let cfg = wp_config(opts, true, !args.unsound_no_branch_leak);
        let r = wp_program(&p, &cfg).map_err(|e| failure(path, &e))?;
        let post = p.post.clone().expect("checked by wp");
        let lhs_ev = GainEvaluator::new(&r.pre, &sp).map_err(|e| failure(path, &e))?;
        let rhs_ev = GainEvaluator::new(&post, &sp).map_err(|e| failure(path, &e))?;

        let mut priors: Vec<(String, Dist<State>)> = Vec::new();
        if let Some(spec) = args.prior {
            priors.push(("prior".to_string(), prior(&sp, spec)?));
        }
        let mut sets = args.priors.clone();
        if sets.is_empty() && args.prior.is_none() {
            sets = vec![PriorSet::Exhaustive, PriorSet::Random { count: 100, seed: opts.seed }];
        }
        let states: Vec<State> = sp.states().collect();
        for set in &sets {
            match set {
                PriorSet::Exhaustive => {
                    priors.extend(states.iter().map(|s| (format!("point {}", sp.show(s)), Dist::point(s.clone()))))
                }
                PriorSet::Random { count, seed } => priors.extend(
                    random_dists(&states, *count, *seed)
                        .into_iter()
                        .enumerate()
                        .map(|(i, d)| (format!("random {}/{count} seed {seed}", i + 1), d)),
                ),
            }
        }

        let mut rows = Vec::new();
        let (mut passed, mut failed, mut errors) = (0usize, 0usize, 0usize);
        for (label, d) in &priors {
            let outcome = (|| -> qif_core::Result<_> {
                let lhs = lhs_ev.eval(d)?;
                let h = run(&p, d, opts.loop_bound)?;
                let rhs = rhs_ev.eval_hyper(&h)?;
                let erasure = if args.also_forward {
                    Some(avg(&h) == classical_run(&p, d, opts.loop_bound)?)
                } else {
                    None
                };
                Ok((lhs, rhs, erasure))
            })();
            match outcome {
                Ok((lhs, rhs, erasure)) => {
                    let pass = lhs == rhs && erasure != Some(false);
                    if pass {
                        passed += 1;
                    } else {
                        failed += 1;
                    }
                    rows.push((label.clone(), Ok((lhs, rhs, erasure, pass))));
                }
                Err(e) => {
                    errors += 1;
                    rows.push((label.clone(), Err(e)));
                }
            }
        }
        let code = if errors > 0 {
            EXIT_RUNTIME
        } else if failed > 0 {
            EXIT_MISMATCH
        } else {
            EXIT_OK
        };
        let pre = gain_to_string(&r.pre);
        let out = match opts.format {
            Format::Table => {
                let mut out = format!("# check {path}\npre-gain: {pre}\npost-gain: {}\n", gain_to_string(&post));
                for (label, row) in &rows {
                    match row {
                        Ok((lhs, rhs, erasure, pass)) => {
                            write!(out, "{}  {label}  lhs={lhs} rhs={rhs}", verdict(*pass, opts.color)).unwrap();
                            if let Some(e) = erasure {
                                write!(out, " erasure={}", verdict(*e, opts.color)).unwrap();
                            }
                            out.push('\n');
                        }
                        Err(e) => writeln!(out, "ERROR  {label}  {e}").unwrap(),
                    }
                }
                writeln!(
                    out,
                    "summary: {} priors, {passed} passed, {failed} failed, {errors} errors",
                    priors.len()
                )
                .unwrap();
                out
            }
            Format::Json => {
                let results: Vec<_> = rows
                    .iter()
                    .map(|(label, row)| match row {
                        Ok((lhs, rhs, erasure, pass)) => json!({
                            "prior": label,
                            "lhs": rational_json(lhs),
                            "rhs": rational_json(rhs),
                            "erasure": erasure,
                            "pass": pass,
                        }),
                        Err(e) => json!({ "prior": label, "error": e.to_string() }),
                    })
                    .collect();
                pretty(json!({
                    "command": "check",
                    "file": path,
                    "pre": pre,
                    "results": results,
                    "passed": passed,
                    "failed": failed,
                    "errors": errors,
                }))
            }
        };
        Ok(Report { out, err: String::new(), code })
    };
    go().unwrap_or_else(|r| r)
}

/// Where `eval` takes its distribution from.
pub enum EvalTarget<'a> {
    Prior(&'a str),
    Hyper(&'a str),
}

/// Evaluates a gain on a prior or on a hyper read from a file.
pub fn cmd_eval(decls_path: &str, gain: &str, target: EvalTarget, opts: &Options) -> Report {
    let go = || -> Result<Report, Report> {
        let src = read_spec(decls_path).map_err(|e| io_failure(decls_path, e))?;
        let decls = parse_decls(&src).map_err(|e| failure(decls_path, &e))?;
        let sp = space_of(&decls).map_err(|e| failure(decls_path, &e))?;
        let g = parse_gain(gain, &decls).map_err(|e| failure("gain", &e))?;
        check_gain(&g, &decls).map_err(|e| failure("gain", &e))?;
        let ev = GainEvaluator::new(&g, &sp).map_err(|e| failure("gain", &e))?;
        let value = match target {
            EvalTarget::Prior(spec) => ev.eval(&prior(&sp, spec)?),
            EvalTarget::Hyper(file) => {
                let text = std::fs::read_to_string(file).map_err(|e| io_failure(file, e))?;
                let h = parse_hyper(&sp, &text).map_err(|e| failure(file, &e))?;
                ev.eval_hyper(&h)
            }
        }
        .map_err(|e| failure("gain", &e))?;
        Ok(Report::ok(match opts.format {
            Format::Table => format!("{value}\n"),
            Format::Json => pretty(json!({ "command": "eval", "gain": gain, "value": rational_json(&value) })),
        }))
    };
    go().unwrap_or_else(|r| r)
}
