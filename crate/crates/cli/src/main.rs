use std::io::{IsTerminal, Write};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qif_cli::commands::{self, CheckArgs, EvalTarget, Format, Options, PriorSet, Report};
use qif_core::wp::Strategy;

#[derive(Parser)]
#[command(name = "qif", version, about = "Exact quantitative information flow analysis for Kuifje programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Maximum iterations of any single loop.
    #[arg(long, global = true, default_value_t = qif_core::semantics::DEFAULT_LOOP_BOUND)]
    loop_bound: u64,
    /// Seed for random priors and invariant falsification.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Table)]
    format: FormatArg,
    /// How `wp` treats loops.
    #[arg(long, global = true, value_enum, default_value_t = LoopsArg::Auto)]
    loops: LoopsArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum LoopsArg {
    Auto,
    Unfold,
    Invariant,
}

#[derive(Subcommand)]
enum Command {
    /// Run a program forward and print the output hyper-distribution.
    Run {
        file: String,
        /// Prior: a file path or inline text.
        #[arg(long, default_value = "uniform")]
        prior: String,
    },
    /// Print the pre-gain of the program's @post annotation.
    Wp {
        file: String,
        #[arg(long)]
        no_simplify: bool,
        /// Print the pre-gain of every statement.
        #[arg(long)]
        show_trace: bool,
    },
    /// Check pre-gain on the prior against post-gain on the output hyper.
    Check {
        file: String,
        /// `exhaustive` or `random:N:SEED`; repeatable.
        #[arg(long)]
        priors: Vec<String>,
        /// An additional explicit prior.
        #[arg(long)]
        prior: Option<String>,
        /// Also check that the averaged output equals the leak-blind run.
        #[arg(long)]
        also_forward: bool,
        #[arg(long, hide = true)]
        unsound_no_branch_leak: bool,
    },
    /// Evaluate a gain expression on a prior or a hyper.
    Eval {
        /// A program or declarations file.
        decls: String,
        #[arg(long)]
        gain: String,
        #[arg(long, conflicts_with = "hyper", required_unless_present = "hyper")]
        prior: Option<String>,
        #[arg(long)]
        hyper: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let color = std::env::var("QIF_COLOR").map_or(true, |v| v != "0") && std::io::stdout().is_terminal();
    let opts = Options {
        loop_bound: cli.loop_bound,
        seed: cli.seed,
        format: match cli.format {
            FormatArg::Table => Format::Table,
            FormatArg::Json => Format::Json,
        },
        color,
        strategy: match cli.loops {
            LoopsArg::Auto => Strategy::Auto,
            LoopsArg::Unfold => Strategy::Unfold,
            LoopsArg::Invariant => Strategy::Invariant,
        },
    };
    let report = match &cli.command {
        Command::Run { file, prior } => commands::cmd_run(file, prior, &opts),
        Command::Wp { file, no_simplify, show_trace } => commands::cmd_wp(file, *no_simplify, *show_trace, &opts),
        Command::Check { file, priors, prior, also_forward, unsound_no_branch_leak } => {
            let sets: Result<Vec<PriorSet>, String> = priors.iter().map(|p| PriorSet::parse(p, opts.seed)).collect();
            match sets {
                Ok(priors) => {
                    let args = CheckArgs {
                        priors,
                        prior: prior.as_deref(),
                        also_forward: *also_forward,
                        unsound_no_branch_leak: *unsound_no_branch_leak,
                    };
                    commands::cmd_check(file, &args, &opts)
                }
                Err(msg) => Report { out: String::new(), err: format!("error: {msg}\n"), code: commands::EXIT_STATIC },
            }
        }
        Command::Eval { decls, gain, prior, hyper } => {
            let target = match (prior, hyper) {
                (Some(p), _) => EvalTarget::Prior(p),
                (None, Some(h)) => EvalTarget::Hyper(h),
                (None, None) => unreachable!("enforced by clap"),
            };
            commands::cmd_eval(decls, gain, target, &opts)
        }
    };
    print!("{}", report.out);
    eprint!("{}", report.err);
    let _ = std::io::stdout().flush();
    ExitCode::from(report.code as u8)
}
