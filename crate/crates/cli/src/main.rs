use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use destx::estimation::check_prop1_with_budget;
use destx::observer::observer_dot;
use destx::synthesis::{
    consistency_fixpoint, extract_min_transmit, prune_dissatisfying, InitialPin, NzMode,
};
use destx::{
    brute_force_max_s, build_observer_with_budget, check_problem1, check_thm1, distinguishability,
    format, max_s, realize_policy, Error, LabeledSystem, Plant, Policy, Runtime,
    DEFAULT_STATE_BUDGET,
};

#[derive(Parser)]
#[command(
    name = "destx",
    version,
    about = "Transmission-policy synthesis for discrete-event plants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the observer of all feasible policies and print its size.
    BuildObserver {
        plant: PathBuf,
        #[command(flatten)]
        budget: Budget,
        /// Write the observer as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Synthesize a policy keeping the given state pairs apart.
    Synthesize(SynthArgs),
    /// Check a policy against brute-force estimation and the pair specification.
    Verify {
        plant: PathBuf,
        policy: PathBuf,
        pairs: PathBuf,
        #[command(flatten)]
        depth: Depth,
        #[command(flatten)]
        budget: Budget,
    },
    /// Replay an event trace through a policy, one line per event.
    Simulate {
        plant: PathBuf,
        policy: PathBuf,
        /// Space-separated events; empty for the initial estimate only.
        #[arg(long, default_value = "")]
        trace: String,
    },
    /// Compare max_s with the exhaustive reference, per labeled seed.
    OracleMaxs {
        plant: PathBuf,
        /// Only this labeled seed, e.g. q2N.
        #[arg(long)]
        seed: Option<String>,
        /// Reference search depth (default: twice the reach size plus two).
        #[arg(long, value_parser = clap::value_parser!(u32).range(0..=32))]
        depth: Option<u32>,
    },
}

#[derive(Args)]
struct SynthArgs {
    plant: PathBuf,
    pairs: PathBuf,
    #[command(flatten)]
    budget: Budget,
    /// Pick an initial observer state containing this labeled state, e.g. q0NNY.
    #[arg(long)]
    pin_initial: Option<String>,
    #[arg(long, value_enum, default_value_t = Mode::Labeled)]
    nz_mode: Mode,
    /// Where to write the policy (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the pruned observer as Graphviz DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct Depth {
    /// Longest plant word checked.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(0..=32))]
    depth: u32,
}

#[derive(Args)]
struct Budget {
    /// Upper bound on explored observer states.
    #[arg(long, env = "DESTX_BUDGET", default_value_t = DEFAULT_STATE_BUDGET as u64,
          value_parser = clap::value_parser!(u64).range(1..))]
    budget: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(alias = "default")]
    Labeled,
    Unlabeled,
}

impl From<Mode> for NzMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Labeled => NzMode::Labeled,
            Mode::Unlabeled => NzMode::Unlabeled,
        }
    }
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Lib(Error),
    /// A library error while reading the named file.
    File(PathBuf, Error),
    Verdict,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(PathBuf::from("<stdout>"), e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(path.to_owned(), e))
}

fn load_plant(path: &Path) -> Result<Plant, Failure> {
    format::parse_des(&read(path)?).map_err(|e| in_file(path, e))
}

fn in_file(path: &Path, e: Error) -> Failure {
    Failure::File(path.to_owned(), e)
}

fn build_observer(
    out: &mut dyn Write,
    plant: &Path,
    budget: &Budget,
    dot: Option<&Path>,
) -> Outcome {
    let sys = LabeledSystem::new(load_plant(plant)?)?;
    let obs = build_observer_with_budget(&sys, budget.budget as usize)?;
    writeln!(out, "states {}", obs.states().len())?;
    writeln!(out, "initials {}", obs.initials().len())?;
    writeln!(out, "transitions {}", obs.transition_count())?;
    if let Some(path) = dot {
        write(path, &observer_dot(&sys, &obs))?;
    }
    Ok(())
}

fn synthesize(out: &mut dyn Write, args: &SynthArgs) -> Outcome {
    let SynthArgs {
        plant,
        pairs,
        budget,
        pin_initial,
        nz_mode,
        out: policy_path,
        dot,
    } = args;
    let sys = LabeledSystem::new(load_plant(plant)?)?;
    let spec = format::parse_pairs(&read(pairs)?, sys.plant()).map_err(|e| in_file(pairs, e))?;
    let pin = pin_initial
        .as_deref()
        .map(|p| sys.parse_state(p).map(InitialPin::Member))
        .transpose()?;
    let full = build_observer_with_budget(&sys, budget.budget as usize)?;
    let g0 = prune_dissatisfying(&full, &distinguishability(spec));
    let gstar = consistency_fixpoint(&full, &g0)?;
    if let Some(path) = dot {
        write(path, &observer_dot(&sys, &gstar))?;
    }
    let sched = extract_min_transmit(&sys, &gstar, pin.as_ref(), (*nz_mode).into())?;
    let policy = realize_policy(&sys, &sched)?;
    let text = format::write_policy(&policy, &sys);
    match policy_path {
        Some(path) => {
            write(path, &text)?;
            writeln!(out, "feasible: {} policy states", policy.states().len())?;
        }
        None => write!(out, "{text}")?,
    }
    Ok(())
}

fn load_policy(sys: &LabeledSystem, path: &Path) -> Result<Policy, Failure> {
    format::parse_policy(&read(path)?, sys).map_err(|e| in_file(path, e))
}

fn verify(
    out: &mut dyn Write,
    plant: &Path,
    policy: &Path,
    pairs: &Path,
    depth: usize,
    budget: &Budget,
) -> Outcome {
    let sys = LabeledSystem::new(load_plant(plant)?)?;
    let policy = load_policy(&sys, policy)?;
    let spec = format::parse_pairs(&read(pairs)?, sys.plant()).map_err(|e| in_file(pairs, e))?;
    let prop = distinguishability(spec);
    let reports = [
        check_thm1(&sys, &policy, depth)?,
        check_prop1_with_budget(&sys, &policy, depth, budget.budget as usize)?,
        check_problem1(&sys, &policy, &prop, depth)?,
    ];
    for r in &reports {
        writeln!(out, "{}", r.line(&sys))?;
    }
    if reports.iter().all(|r| r.ok()) {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn simulate(out: &mut dyn Write, plant: &Path, policy: &Path, trace: &str) -> Outcome {
    let sys = LabeledSystem::new(load_plant(plant)?)?;
    let g = sys.plant();
    let policy = load_policy(&sys, policy)?;
    let word = g.parse_word(trace)?;
    if !g.generates(&word) {
        return Err(Error::WordNotInPlant(g.render_word(&word)).into());
    }
    let mut rt = Runtime::new(&sys, &policy)?;
    writeln!(out, "step\tevent\tsent\tprojection\testimate")?;
    writeln!(out, "0\t-\t-\tε\t{}", g.render_states(&rt.estimate()))?;
    for (i, &e) in word.iter().enumerate() {
        let (sent, est) = rt.step(e)?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            i + 1,
            g.event_name(e),
            if sent { "Y" } else { "N" },
            g.render_word(rt.projection()),
            g.render_states(&est)
        )?;
    }
    Ok(())
}

fn oracle_maxs(
    out: &mut dyn Write,
    plant: &Path,
    seed: Option<&str>,
    depth: Option<u32>,
) -> Outcome {
    let sys = LabeledSystem::new(load_plant(plant)?)?;
    let seeds = match seed {
        Some(s) => vec![sys.parse_state(s)?],
        None => sys.iter().collect(),
    };
    let mut agree = true;
    for seed in seeds {
        let d = depth.map_or(2 * sys.unobservable_reach(seed).len() + 2, |d| d as usize);
        let fast = max_s(&sys, seed)?;
        let slow = brute_force_max_s(&sys, seed, d)?;
        let verdict = if fast == slow { "ok" } else { "diff" };
        writeln!(
            out,
            "{} max_s={} oracle={} depth={d} {verdict}",
            sys.render(seed),
            fast.len(),
            slow.len()
        )?;
        for z in fast.difference(&slow) {
            writeln!(out, "  + {}", z.render(&sys))?;
        }
        for z in slow.difference(&fast) {
            writeln!(out, "  - {}", z.render(&sys))?;
        }
        agree &= fast == slow;
    }
    if agree {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::UnknownState(_)
        | Error::UnknownEvent(_)
        | Error::InvalidPlant(_)
        | Error::AlphabetTooLarge { .. }
        | Error::UndefinedEvent { .. }
        | Error::UnknownInitial(_)
        | Error::InvalidPolicy(_)
        | Error::WordNotInPlant(_) => 2,
        Error::StateBudgetExceeded(_) | Error::InstanceTooLarge(_) => 3,
        Error::Infeasible(_) => 4,
        _ => 1,
    }
}

fn run(cli: &Cli, out: &mut dyn Write) -> Outcome {
    match &cli.command {
        Command::BuildObserver { plant, budget, dot } => {
            build_observer(out, plant, budget, dot.as_deref())
        }
        Command::Synthesize(args) => synthesize(out, args),
        Command::Verify {
            plant,
            policy,
            pairs,
            depth,
            budget,
        } => verify(out, plant, policy, pairs, depth.depth as usize, budget),
        Command::Simulate {
            plant,
            policy,
            trace,
        } => simulate(out, plant, policy, trace),
        Command::OracleMaxs { plant, seed, depth } => {
            oracle_maxs(out, plant, seed.as_deref(), *depth)
        }
    }
}

/// Print the error, if any, and pick the exit code.
fn report(outcome: Outcome, err: &mut dyn Write) -> u8 {
    let (code, msg) = match outcome {
        Ok(()) => return 0,
        Err(Failure::Verdict) => return 5,
        Err(Failure::Io(path, e)) => (1, format!("{}: {e}", path.display())),
        Err(Failure::Lib(e)) => (exit_code(&e), e.to_string()),
        Err(Failure::File(path, e)) => (exit_code(&e), format!("{}: {e}", path.display())),
    };
    let _ = writeln!(err, "error: {msg}");
    code
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli, &mut io::stdout().lock());
    ExitCode::from(report(outcome, &mut io::stderr()))
}
