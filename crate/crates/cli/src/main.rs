use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use persuasion_core::environment::{Environment, OracleMode, RoundOracle};
use persuasion_core::exactnum::{format_rational, parse_rational, Rational};
use persuasion_core::learner::action_oracle;
use persuasion_core::model::{chosen_action, compute_opt, Instance};
use persuasion_lab::{
    gen_hardness1, gen_hardness2_known, gen_hardness3, gen_random_instance, run_experiment,
    ExperimentConfig, Mode, ProfileKind,
};

#[derive(Parser)]
#[command(name = "persuasion-lab", about = "Online Bayesian persuasion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the explore-then-commit regret learner over seeded trials.
    RunRegret(RunRegretArgs),
    /// Run the unknown-prior PAC learner over seeded trials.
    RunPac(RunPacArgs),
    /// Run the known-prior PAC learner over seeded trials.
    RunPacKnown(RunPacArgs),
    /// Generate an instance (random or a lower-bound family) as JSON.
    GenInstance(GenArgs),
    /// Validate an instance file and print its parameters and OPT.
    VerifyInstance(VerifyArgs),
    /// Cross-check the environment's receiver against the ground truth.
    OracleCheck(OracleCheckArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Practical,
    Theoretical,
}

impl From<ProfileArg> for ProfileKind {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Practical => ProfileKind::Practical,
            ProfileArg::Theoretical => ProfileKind::Theoretical,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Simulated,
    Direct,
}

impl From<OracleArg> for OracleMode {
    fn from(o: OracleArg) -> Self {
        match o {
            OracleArg::Simulated => OracleMode::Simulated,
            OracleArg::Direct => OracleMode::Direct,
        }
    }
}

/// Flags shared by the run subcommands; any flag left unset falls back to
/// the config file (when given), then to the default.
#[derive(Args)]
struct CommonRunArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// Single seed (shorthand for --seeds with one entry).
    #[arg(long, conflicts_with = "seeds")]
    seed: Option<u64>,
    /// Comma-separated list of trial seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    #[arg(long, value_enum)]
    oracle: Option<OracleArg>,
    /// Output directory for CSVs and the text summary.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file mirroring these flags; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exit with code 2 if any trial aborted.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct RunRegretArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Horizon T; a comma-separated list runs a sweep.
    #[arg(long, value_delimiter = ',')]
    rounds: Option<Vec<usize>>,
    /// Re-solve the commitment LP every this many rounds.
    #[arg(long)]
    stride: Option<usize>,
    /// Exploration accuracy override, as "p/q".
    #[arg(long)]
    epsilon: Option<String>,
    /// Phase-1 length override.
    #[arg(long)]
    t1: Option<usize>,
}

#[derive(Args)]
struct RunPacArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Suboptimality tolerance γ, as "p/q".
    #[arg(long)]
    gamma: Option<String>,
    /// Failure probability η, as "p/q".
    #[arg(long)]
    eta: Option<String>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: GenKind,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 6)]
    bit_cap: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// hardness1 bit vector, e.g. "1,0".
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<u8>>,
    /// Which instance of a lower-bound pair (1 or 2).
    #[arg(long, default_value_t = 1)]
    which: u8,
    /// hardness3 prior tilt, as "p/q".
    #[arg(long)]
    eps: Option<String>,
    /// hardness2 tolerance γ, as "p/q".
    #[arg(long)]
    gamma: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GenKind {
    Random,
    Hardness1,
    Hardness3,
    Hardness2Known,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    instance: PathBuf,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Slice grid resolution per coordinate.
    #[arg(long, default_value_t = 20)]
    grid: usize,
}

/// File form of the shared run flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    instance: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    rounds: Option<Vec<usize>>,
    gamma: Option<String>,
    eta: Option<String>,
    profile: Option<String>,
    oracle: Option<String>,
    stride: Option<usize>,
    epsilon: Option<String>,
    t1: Option<usize>,
    out: Option<PathBuf>,
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn parse_rat_flag(flag: &Option<String>, name: &str) -> Result<Option<Rational>> {
    flag.as_ref()
        .map(|s| parse_rational(s).with_context(|| format!("parsing --{name} {s}")))
        .transpose()
}

fn load_instance(path: &PathBuf) -> Result<Instance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::from_json_str(&text).with_context(|| format!("validating {}", path.display()))
}

struct ResolvedCommon {
    instance: Instance,
    seeds: Vec<u64>,
    profile: ProfileKind,
    oracle: OracleMode,
    out: Option<PathBuf>,
}

fn resolve_common(common: &CommonRunArgs, file: &FileConfig) -> Result<ResolvedCommon> {
    let instance_path = common
        .instance
        .clone()
        .or_else(|| file.instance.clone())
        .context("an instance file is required (--instance or config)")?;
    let seeds = common
        .seed
        .map(|s| vec![s])
        .or_else(|| common.seeds.clone())
        .or_else(|| file.seeds.clone())
        .unwrap_or_else(|| vec![0]);
    let profile = common
        .profile
        .map(ProfileKind::from)
        .or_else(|| match file.profile.as_deref() {
            Some("practical") => Some(ProfileKind::Practical),
            Some("theoretical") => Some(ProfileKind::Theoretical),
            _ => None,
        })
        .unwrap_or(ProfileKind::Practical);
    let oracle = common
        .oracle
        .map(OracleMode::from)
        .or_else(|| match file.oracle.as_deref() {
            Some("simulated") => Some(OracleMode::Simulated),
            Some("direct") => Some(OracleMode::Direct),
            _ => None,
        })
        .unwrap_or(OracleMode::Simulated);
    Ok(ResolvedCommon {
        instance: load_instance(&instance_path)?,
        seeds,
        profile,
        oracle,
        out: common.out.clone().or_else(|| file.out.clone()),
    })
}

fn finish(report: persuasion_lab::ExperimentReport, strict: bool) -> ExitCode {
    print!("{}", report.summary_text());
    if strict && report.any_abort() {
        eprintln!("at least one trial aborted (strict mode)");
        return ExitCode::from(2);
    }
    ExitCode::SUCCESS
}

fn cmd_run_regret(args: &RunRegretArgs) -> Result<ExitCode> {
    let file = load_file_config(&args.common.config)?;
    let resolved = resolve_common(&args.common, &file)?;
    let horizons = args
        .rounds
        .clone()
        .or_else(|| file.rounds.clone())
        .context("--rounds is required in regret mode")?;
    let cfg = ExperimentConfig {
        mode: Mode::Regret {
            horizons,
            resolve_stride: args.stride.or(file.stride).unwrap_or(1),
            epsilon_override: parse_rat_flag(&args.epsilon, "epsilon")?
                .or(parse_rat_flag(&file.epsilon, "epsilon")?),
            t1_override: args.t1.or(file.t1),
        },
        instance: resolved.instance,
        seeds: resolved.seeds,
        profile: resolved.profile,
        oracle: resolved.oracle,
        out_dir: resolved.out,
    };
    Ok(finish(run_experiment(&cfg)?, args.common.strict))
}

fn cmd_run_pac(args: &RunPacArgs, known: bool) -> Result<ExitCode> {
    let file = load_file_config(&args.common.config)?;
    let resolved = resolve_common(&args.common, &file)?;
    let gamma = parse_rat_flag(&args.gamma, "gamma")?
        .or(parse_rat_flag(&file.gamma, "gamma")?)
        .context("--gamma is required in pac mode")?;
    let eta = parse_rat_flag(&args.eta, "eta")?
        .or(parse_rat_flag(&file.eta, "eta")?)
        .context("--eta is required in pac mode")?;
    let mode = if known {
        Mode::PacKnown { gamma, eta }
    } else {
        Mode::Pac { gamma, eta }
    };
    let cfg = ExperimentConfig {
        mode,
        instance: resolved.instance,
        seeds: resolved.seeds,
        profile: resolved.profile,
        oracle: resolved.oracle,
        out_dir: resolved.out,
    };
    Ok(finish(run_experiment(&cfg)?, args.common.strict))
}

fn cmd_gen_instance(args: &GenArgs) -> Result<()> {
    let inst = match args.kind {
        GenKind::Random => {
            let d = args.d.context("--d is required for random instances")?;
            let n = args.n.context("--n is required for random instances")?;
            gen_random_instance(d, n, args.bit_cap, args.seed)?
        }
        GenKind::Hardness1 => {
            let d = args.d.context("--d is required for hardness1")?;
            let default_p: Vec<u8> = (0..d).map(|i| u8::from(i < d / 2)).collect();
            let p = args.p.clone().unwrap_or(default_p);
            gen_hardness1(d, &p)?
        }
        GenKind::Hardness3 => {
            let eps = parse_rat_flag(&args.eps, "eps")?.context("--eps is required for hardness3")?;
            gen_hardness3(args.which, &eps)?
        }
        GenKind::Hardness2Known => {
            let gamma =
                parse_rat_flag(&args.gamma, "gamma")?.context("--gamma is required for hardness2")?;
            gen_hardness2_known(&gamma, args.which)?
        }
    };
    let json = inst.to_json_string();
    match &args.out {
        Some(path) => fs::write(path, json).with_context(|| format!("writing {}", path.display()))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_verify_instance(args: &VerifyArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let (opt, _) = compute_opt(&inst);
    println!(
        "valid instance: d={}, n={}, B={}, OPT={} ({:.6})",
        inst.d,
        inst.n,
        inst.bit_complexity_b(),
        format_rational(&opt),
        persuasion_core::exactnum::to_f64(&opt),
    );
    Ok(())
}

fn cmd_oracle_check(args: &OracleCheckArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    if inst.d != 2 {
        bail!("oracle-check grids slices over d = 2 instances only");
    }
    let k = args.grid.max(2);
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    let mut direct = Environment::new(inst.clone(), args.seed, OracleMode::Direct);
    for i in 0..=k {
        for j in 0..=k {
            if i == 0 && j == 0 {
                continue;
            }
            let x = vec![
                Rational::new(i.into(), k.into()),
                Rational::new(j.into(), k.into()),
            ];
            let truth = chosen_action(&inst, &x).expect("nonzero grid slice");
            let answered = direct.direct_action_query(&x).expect("direct mode");
            checked += 1;
            if truth != answered {
                mismatches += 1;
            }
        }
    }
    // Spot-check the round-based oracle on a few grid points.
    let mut sim = Environment::new(inst.clone(), args.seed, OracleMode::Simulated);
    for i in 1..k.min(5) {
        let x = vec![
            Rational::new(i.into(), k.into()),
            Rational::new((k - i).into(), k.into()),
        ];
        let truth = chosen_action(&inst, &x).expect("nonzero slice");
        let answered = action_oracle(&mut sim, &x, 100_000)
            .map_err(|e| anyhow::anyhow!("simulated oracle: {e}"))?;
        checked += 1;
        if truth != answered {
            mismatches += 1;
        }
    }
    println!("oracle-check: {checked} queries, {mismatches} mismatches");
    if mismatches > 0 {
        bail!("oracle disagreement detected");
    }
    Ok(())
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.command {
        Command::RunRegret(args) => cmd_run_regret(args),
        Command::RunPac(args) => cmd_run_pac(args, false),
        Command::RunPacKnown(args) => cmd_run_pac(args, true),
        Command::GenInstance(args) => cmd_gen_instance(args).map(|()| ExitCode::SUCCESS),
        Command::VerifyInstance(args) => cmd_verify_instance(args).map(|()| ExitCode::SUCCESS),
        Command::OracleCheck(args) => cmd_oracle_check(args).map(|()| ExitCode::SUCCESS),
    }
}
