use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use serde::Serialize;

use anonqc::analysis::{
    minimal_d_one, minimal_d_two, run_experiment, success_prob_one, success_prob_two, ExperimentProtocol,
    MinimalDimension, SuccessProbInput,
};
use anonqc::apps::{anonymous_rank, anonymous_survey, anonymous_vote, AppConfig, AppInput, AppOutcome, Ballot, VoteMode};
use anonqc::channel::{ChannelConfig, EveModel};
use anonqc::protocol::{
    run_protocol_one_seeded, run_protocol_two_seeded, verify_transcript, Announcement, EngineKind, ProtocolOneConfig,
    ProtocolTwoConfig, SymmetricFunction, Transcript,
};
use anonqc::qudit::Dimension;
use anonqc::random::{seeded, trial_stream, Coins};
use anonqc::swap::{swap_check, SwapCheckMode};
use anonqc::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_ABORT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

/// Stream index reserved for generating example data from the master seed.
const DATA_STREAM: u64 = u64::MAX;

#[derive(Parser)]
#[command(name = "anonqc", version, about = "Anonymous multi-party quantum computation simulator")]
struct Cli {
    /// Master seed. Without it (and without ANONQC_SEED) a fresh seed is
    /// drawn and recorded in the output.
    #[arg(long, global = true, env = "ANONQC_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol instance and write its transcript.
    Run(RunArgs),
    /// Compare the label-level swap rule against the dense oracle.
    Swapcheck(SwapcheckArgs),
    /// Repeat a protocol many times and report statistics.
    Experiment(ExperimentArgs),
    /// Anonymous tally of ballots.
    Vote(VoteArgs),
    /// Anonymous ranking of values.
    Rank(AppArgs),
    /// Anonymous sum of values.
    Survey(AppArgs),
    /// Evaluate the success-probability product on a (u, w) grid.
    Successprob(SuccessArgs),
    /// Smallest admissible dimension for a data set.
    Mind(MindArgs),
    /// Re-derive a transcript's rounds and check them.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProtocolChoice {
    One,
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineChoice {
    Label,
    Dense,
}

impl From<EngineChoice> for EngineKind {
    fn from(e: EngineChoice) -> Self {
        match e {
            EngineChoice::Label => EngineKind::Label,
            EngineChoice::Dense => EngineKind::Dense,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnnounceChoice {
    Reduced,
    Integer,
}

impl From<AnnounceChoice> for Announcement {
    fn from(a: AnnounceChoice) -> Self {
        match a {
            AnnounceChoice::Reduced => Announcement::Reduced,
            AnnounceChoice::Integer => Announcement::Integer,
        }
    }
}

/// `auto` or an explicit dimension.
#[derive(Clone, Copy, Debug)]
enum DimArg {
    Auto,
    Fixed(Dimension),
}

impl FromStr for DimArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(DimArg::Auto);
        }
        let d: usize = s.parse().map_err(|_| format!("expected `auto` or an integer, got `{s}`"))?;
        Dimension::new(d).map(DimArg::Fixed).map_err(|e| e.to_string())
    }
}

#[derive(Args, Clone)]
struct InputArgs {
    /// Number of participants (inferred from the data when given).
    #[arg(long)]
    n: Option<usize>,
    /// Protocol two values, comma separated.
    #[arg(long, value_delimiter = ',')]
    values: Option<Vec<usize>>,
    /// Protocol one data sets: participants separated by `;`, values by spaces.
    #[arg(long)]
    sets: Option<String>,
    /// Data file: one participant per line, space-separated values.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Largest admissible value ξ for protocol one.
    #[arg(long)]
    xi: Option<usize>,
}

#[derive(Args, Clone)]
struct SettingsArgs {
    /// Qudit dimension, or `auto` for the smallest admissible one.
    #[arg(long, default_value = "auto")]
    d: DimArg,
    /// Protocol one: require d > Σ l_i so counts never wrap.
    #[arg(long)]
    strict_d: bool,
    /// Protocol two: singlet test copies per participant.
    #[arg(long, default_value_t = ProtocolTwoConfig::DEFAULT_TAU)]
    tau: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum)]
    engine: Option<EngineChoice>,
    #[arg(long, value_enum, default_value = "reduced")]
    announce: AnnounceChoice,
}

#[derive(Args, Clone)]
struct ChannelArgs {
    /// Decoys per channel session (default: one per payload qudit).
    #[arg(long)]
    decoys: Option<usize>,
    /// Mismatches tolerated before aborting.
    #[arg(long, default_value_t = 0)]
    threshold: usize,
    /// none, intercept, intercept-computational or intercept-fourier.
    #[arg(long, default_value = "none")]
    eve: EveModel,
}

impl ChannelArgs {
    fn config(&self) -> ChannelConfig {
        ChannelConfig { decoys: self.decoys, threshold: self.threshold }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    protocol: ProtocolChoice,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    settings: SettingsArgs,
    /// Symmetric function: sum, max, min, sorted, histogram or mean.
    #[arg(long, default_value = "sum")]
    f: SymmetricFunction,
    /// Transcript path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SwapcheckArgs {
    #[arg(long)]
    d: usize,
    /// Shift marks per cat label.
    #[arg(long)]
    m: usize,
    /// Check this many random cases instead of all of them.
    #[arg(long, conflicts_with = "exhaustive")]
    samples: Option<usize>,
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExperimentChoice {
    One,
    Two,
    Decoys,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    protocol: ExperimentChoice,
    #[arg(long, default_value_t = 500)]
    trials: usize,
    #[command(flatten)]
    input: InputArgs,
    /// Dimensions to sweep, comma separated (`auto` allowed for protocols).
    #[arg(long, value_delimiter = ',', default_value = "auto")]
    d: Vec<DimArg>,
    #[arg(long)]
    strict_d: bool,
    #[arg(long, default_value_t = ProtocolTwoConfig::DEFAULT_TAU)]
    tau: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value = "reduced")]
    announce: AnnounceChoice,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AppSettings {
    #[arg(long, default_value = "auto")]
    d: DimArg,
    /// Use the weaker d > max l_i bound instead of d > Σ l_i.
    #[arg(long)]
    loose_d: bool,
    #[arg(long, default_value_t = ProtocolTwoConfig::DEFAULT_TAU)]
    tau: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl AppSettings {
    fn config(&self) -> AppConfig {
        AppConfig {
            d: match self.d {
                DimArg::Auto => None,
                DimArg::Fixed(d) => Some(d),
            },
            strict_d: !self.loose_d,
            tau: self.tau,
            channel: self.channel.config(),
            eve: self.channel.eve,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeChoice {
    OneVote,
    MultiVote,
}

#[derive(Args)]
struct VoteArgs {
    /// One voter per line, candidate numbers (from 1) separated by spaces.
    #[arg(long)]
    data: PathBuf,
    /// Number of candidates.
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "one-vote")]
    mode: ModeChoice,
    #[command(flatten)]
    settings: AppSettings,
}

#[derive(Args)]
struct AppArgs {
    /// One participant per line. Lines with a single value run protocol two;
    /// otherwise every line is a data set for protocol one.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    settings: AppSettings,
}

#[derive(Args)]
struct SuccessArgs {
    #[arg(long, value_enum)]
    protocol: ProtocolChoice,
    #[arg(long)]
    d: usize,
    /// Rounds separated by `;`, participants by `,`, each cell `u:w`.
    #[arg(long)]
    grid: String,
}

#[derive(Args)]
struct MindArgs {
    #[arg(long, value_enum)]
    protocol: ProtocolChoice,
    /// Data set lengths (protocol one) or values (protocol two).
    #[arg(required = true, num_args = 1..)]
    values: Vec<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    transcript: PathBuf,
}

/// What a command produced, before it is turned into an exit code.
enum Finished {
    Ok,
    Aborted,
    Mismatch,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let seed = cli.seed.unwrap_or_else(|| rand::thread_rng().gen());
    match dispatch(cli.command, seed) {
        Ok(Finished::Ok) => ExitCode::SUCCESS,
        Ok(Finished::Aborted) => ExitCode::from(EXIT_ABORT),
        Ok(Finished::Mismatch) => ExitCode::from(EXIT_MISMATCH),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn dispatch(command: Command, seed: u64) -> Result<Finished, Error> {
    match command {
        Command::Run(args) => cmd_run(args, seed),
        Command::Swapcheck(args) => cmd_swapcheck(args, seed),
        Command::Experiment(args) => cmd_experiment(args, seed),
        Command::Vote(args) => cmd_vote(args, seed),
        Command::Rank(args) => {
            let input = app_input(&read_data(&args.data)?);
            let outcome = anonymous_rank(&input, &args.settings.config(), &mut seeded(seed))?;
            emit_app(&outcome, args.settings.out.as_deref())
        }
        Command::Survey(args) => {
            let input = app_input(&read_data(&args.data)?);
            let outcome = anonymous_survey(&input, &args.settings.config(), &mut seeded(seed))?;
            emit_app(&outcome, args.settings.out.as_deref())
        }
        Command::Successprob(args) => cmd_successprob(args),
        Command::Mind(args) => {
            let min = match args.protocol {
                ProtocolChoice::One => minimal_d_one(&args.values)?,
                ProtocolChoice::Two => minimal_d_two(&args.values)?,
            };
            emit(&min, None)?;
            Ok(Finished::Ok)
        }
        Command::Verify(args) => {
            let transcript = Transcript::from_json(&read_text(&args.transcript)?)?;
            let report = verify_transcript(&transcript);
            emit(&report, None)?;
            Ok(if report.is_consistent() { Finished::Ok } else { Finished::Mismatch })
        }
    }
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Domain(format!("cannot read {}: {e}", path.display())))
}

/// One participant per line; `#` starts a comment line; blank lines are
/// empty data sets.
fn parse_row(row: &str, place: impl Fn() -> String) -> Result<Vec<usize>, Error> {
    row.split_whitespace()
        .map(|tok| {
            tok.parse()
                .map_err(|_| Error::Domain(format!("{}: `{tok}` is not a nonnegative integer", place())))
        })
        .collect()
}

fn parse_data(text: &str) -> Result<Vec<Vec<usize>>, Error> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim_start().starts_with('#'))
        .map(|(i, line)| parse_row(line, || format!("line {}", i + 1)))
        .collect()
}

fn read_data(path: &Path) -> Result<Vec<Vec<usize>>, Error> {
    parse_data(&read_text(path)?)
}

fn parse_sets(text: &str) -> Result<Vec<Vec<usize>>, Error> {
    text.split(';').enumerate().map(|(i, set)| parse_row(set, || format!("set {}", i + 1))).collect()
}

fn app_input(rows: &[Vec<usize>]) -> AppInput {
    if !rows.is_empty() && rows.iter().all(|r| r.len() == 1) {
        AppInput::Single(rows.iter().map(|r| r[0]).collect())
    } else {
        AppInput::Multi(rows.to_vec())
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Internal(e.to_string()))?;
    text.push('\n');
    write_out(&text, out)
}

fn write_out(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Domain(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Error::Internal(format!("cannot write output: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn emit_app<T: Serialize>(outcome: &AppOutcome<T>, out: Option<&Path>) -> Result<Finished, Error> {
    emit(outcome, out)?;
    Ok(match outcome {
        AppOutcome::Completed { .. } => Finished::Ok,
        AppOutcome::Aborted { reason } => {
            eprintln!("aborted: {reason}");
            Finished::Aborted
        }
    })
}

fn note_clamp(min: MinimalDimension) -> Dimension {
    if min.clamped {
        eprintln!("note: minimal dimension raised to {}", min.d);
    }
    min.d
}

const EXAMPLE_PARTICIPANTS: usize = 3;
const EXAMPLE_MAX_VALUE: usize = 3;

/// Protocol one data sets from the flags, or a random example drawn from the
/// seed's data stream.
fn protocol_one_data(input: &InputArgs, seed: u64) -> Result<(Vec<Vec<usize>>, usize), Error> {
    let sets = match (&input.data, &input.sets) {
        (Some(path), None) => Some(read_data(path)?),
        (None, Some(text)) => Some(parse_sets(text)?),
        (None, None) => None,
        (Some(_), Some(_)) => return Err(Error::Domain("give either --data or --sets, not both".into())),
    };
    if input.values.is_some() {
        return Err(Error::Domain("--values is for protocol two; use --sets or --data".into()));
    }
    let sets = match sets {
        Some(sets) => sets,
        None => {
            let xi = input.xi.unwrap_or(EXAMPLE_MAX_VALUE);
            let mut rng = trial_stream(seed, DATA_STREAM);
            let n = input.n.unwrap_or(EXAMPLE_PARTICIPANTS);
            let sets: Vec<Vec<usize>> = (0..n)
                .map(|_| {
                    let len = 1 + rng.uniform(EXAMPLE_MAX_VALUE);
                    (0..len).map(|_| rng.uniform(xi + 1)).collect()
                })
                .collect();
            eprintln!("note: no data given; generated {n} random data sets");
            sets
        }
    };
    if let Some(n) = input.n {
        if n != sets.len() {
            return Err(Error::Domain(format!("--n {n} but {} data sets were given", sets.len())));
        }
    }
    let largest = sets.iter().flatten().copied().max().unwrap_or(0);
    let xi = input.xi.unwrap_or(largest);
    Ok((sets, xi))
}

fn protocol_two_data(input: &InputArgs, seed: u64) -> Result<Vec<usize>, Error> {
    if input.sets.is_some() {
        return Err(Error::Domain("--sets is for protocol one; use --values or --data".into()));
    }
    let values = match (&input.data, &input.values) {
        (Some(path), None) => {
            let rows = read_data(path)?;
            rows.iter()
                .enumerate()
                .map(|(i, r)| match r.as_slice() {
                    [x] => Ok(*x),
                    _ => Err(Error::Domain(format!("line {}: protocol two needs exactly one value", i + 1))),
                })
                .collect::<Result<_, _>>()?
        }
        (None, Some(values)) => values.clone(),
        (None, None) => {
            let mut rng = trial_stream(seed, DATA_STREAM);
            let n = input.n.unwrap_or(EXAMPLE_PARTICIPANTS);
            let bound = input.xi.unwrap_or(EXAMPLE_MAX_VALUE);
            eprintln!("note: no data given; generated {n} random values");
            (0..n).map(|_| rng.uniform(bound + 1)).collect()
        }
        (Some(_), Some(_)) => return Err(Error::Domain("give either --data or --values, not both".into())),
    };
    if let Some(n) = input.n {
        if n != values.len() {
            return Err(Error::Domain(format!("--n {n} but {} values were given", values.len())));
        }
    }
    Ok(values)
}

fn dimension_one(d: DimArg, sets: &[Vec<usize>], strict: bool) -> Result<Dimension, Error> {
    Ok(match d {
        DimArg::Fixed(d) => d,
        DimArg::Auto if strict => note_clamp(minimal_d_one(&[sets.iter().map(Vec::len).sum()])?),
        DimArg::Auto => note_clamp(minimal_d_one(&sets.iter().map(Vec::len).collect::<Vec<_>>())?),
    })
}

fn dimension_two(d: DimArg, values: &[usize]) -> Result<Dimension, Error> {
    Ok(match d {
        DimArg::Fixed(d) => d,
        DimArg::Auto => note_clamp(minimal_d_two(values)?),
    })
}

fn protocol_one_config(settings: &SettingsArgs, sets: &[Vec<usize>], xi: usize) -> Result<ProtocolOneConfig, Error> {
    let mut config = ProtocolOneConfig::new(sets.len(), xi, dimension_one(settings.d, sets, settings.strict_d)?);
    config.strict_d = settings.strict_d;
    config.channel = settings.channel.config();
    config.announcement = settings.announce.into();
    config.engine = settings.engine.map(Into::into);
    Ok(config)
}

fn protocol_two_config(settings: &SettingsArgs, values: &[usize]) -> Result<ProtocolTwoConfig, Error> {
    let mut config = ProtocolTwoConfig::new(values.len(), dimension_two(settings.d, values)?);
    config.tau = settings.tau;
    config.channel = settings.channel.config();
    config.announcement = settings.announce.into();
    config.engine = settings.engine.map(Into::into);
    Ok(config)
}

fn cmd_run(args: RunArgs, seed: u64) -> Result<Finished, Error> {
    let eve = args.settings.channel.eve;
    let transcript = match args.protocol {
        ProtocolChoice::One => {
            let (sets, xi) = protocol_one_data(&args.input, seed)?;
            let config = protocol_one_config(&args.settings, &sets, xi)?;
            run_protocol_one_seeded(&config, &sets, &args.f, &eve, seed)?
        }
        ProtocolChoice::Two => {
            let values = protocol_two_data(&args.input, seed)?;
            let config = protocol_two_config(&args.settings, &values)?;
            run_protocol_two_seeded(&config, &values, &args.f, &eve, seed)?
        }
    };
    write_out(&transcript.to_json(), args.out.as_deref())?;
    match (transcript.function_value(), &transcript.outcome) {
        (Some(value), _) => {
            eprintln!("completed: {} = {}", args.f.name(), serde_json::to_string(value).unwrap_or_default());
            Ok(Finished::Ok)
        }
        (None, anonqc::protocol::Outcome::Aborted { reason, .. }) => {
            eprintln!("aborted: {reason}");
            Ok(Finished::Aborted)
        }
        (None, _) => Err(Error::Internal("completed transcript without a function value".into())),
    }
}

fn cmd_swapcheck(args: SwapcheckArgs, seed: u64) -> Result<Finished, Error> {
    let mode = match args.samples {
        Some(samples) => SwapCheckMode::Sampled { samples, seed },
        None => SwapCheckMode::Exhaustive,
    };
    let report = swap_check(Dimension::new(args.d)?, args.m, mode, args.tol)?;
    emit(&report, None)?;
    eprintln!("{} of {} cases agree", report.cases - report.mismatches.len(), report.cases);
    Ok(if report.passed() { Finished::Ok } else { Finished::Mismatch })
}

fn cmd_experiment(args: ExperimentArgs, seed: u64) -> Result<Finished, Error> {
    let eve = args.channel.eve;
    let settings = |d: DimArg| SettingsArgs {
        d,
        strict_d: args.strict_d,
        tau: args.tau,
        channel: args.channel.clone(),
        engine: None,
        announce: args.announce,
    };
    let mut reports = Vec::new();
    for &d in &args.d {
        let protocol = match args.protocol {
            ExperimentChoice::One => {
                let (secrets, xi) = protocol_one_data(&args.input, seed)?;
                let config = protocol_one_config(&settings(d), &secrets, xi)?;
                ExperimentProtocol::One { config, secrets }
            }
            ExperimentChoice::Two => {
                let values = protocol_two_data(&args.input, seed)?;
                let config = protocol_two_config(&settings(d), &values)?;
                ExperimentProtocol::Two { config, values }
            }
            ExperimentChoice::Decoys => {
                let DimArg::Fixed(d) = d else {
                    return Err(Error::Domain("decoy experiments need explicit dimensions, e.g. --d 2,3,5".into()));
                };
                let decoys = args.channel.decoys.unwrap_or(50);
                ExperimentProtocol::DecoyDetection { d, decoys, threshold: args.channel.threshold }
            }
        };
        reports.push(run_experiment(&protocol, &eve, args.trials, seed)?);
    }
    emit(&reports, args.out.as_deref())?;
    Ok(Finished::Ok)
}

fn cmd_vote(args: VoteArgs, seed: u64) -> Result<Finished, Error> {
    let ballots: Vec<Ballot> = read_data(&args.data)?.into_iter().map(Ballot::new).collect();
    let mode = match args.mode {
        ModeChoice::OneVote => VoteMode::OneVote,
        ModeChoice::MultiVote => VoteMode::MultiVote,
    };
    let outcome = anonymous_vote(&ballots, args.m, mode, &args.settings.config(), &mut seeded(seed))?;
    emit_app(&outcome, args.settings.out.as_deref())
}

fn parse_grid(text: &str) -> Result<Vec<Vec<(usize, usize)>>, Error> {
    let bad = |cell: &str| Error::Domain(format!("grid cell `{cell}` is not of the form u:w"));
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|cell| {
                    let (u, w) = cell.trim().split_once(':').ok_or_else(|| bad(cell))?;
                    Ok((u.trim().parse().map_err(|_| bad(cell))?, w.trim().parse().map_err(|_| bad(cell))?))
                })
                .collect()
        })
        .collect()
}

fn cmd_successprob(args: SuccessArgs) -> Result<Finished, Error> {
    let cells = parse_grid(&args.grid)?;
    let n = cells.first().map_or(0, Vec::len);
    let input = SuccessProbInput { d: Dimension::new(args.d)?, cells };
    let p = match args.protocol {
        ProtocolChoice::One => success_prob_one(&input, input.cells.len().saturating_sub(1), n)?,
        ProtocolChoice::Two => success_prob_two(&input, n)?,
    };
    emit(&p, None)?;
    Ok(Finished::Ok)
}
