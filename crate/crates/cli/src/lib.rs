//! Command-line front end: channel gains, single allocations and the
//! throughput/SINR sweep over user counts.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use wdm_vlc::allocator::{
    baseline_greedy, baseline_random, build_instance, formulate_milp, solve_bnb, ObjectiveMode,
};
use wdm_vlc::config::Config;
use wdm_vlc::io::{self, OutputFormat};
use wdm_vlc::linkbudget::{link_reports, standalone_reports};
use wdm_vlc::optics::gain_matrix;
use wdm_vlc::scenario::{generate_users, run_trend, splitmix64, AllocatorMode, Preset, ScenarioSpec};
use wdm_vlc::{AllocationInstance, AllocationSolution, Assignment, LinkReport, UserPosition};

pub const OUT_DIR_ENV: &str = "WDM_VLC_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const IO: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] wdm_vlc::Error),
    #[error("invalid arguments: {0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use wdm_vlc::Error as E;
        match self {
            CliError::Usage(_) => exit::CONFIG,
            CliError::Core(e) => match e {
                E::Infeasible { .. } | E::OracleScale { .. } => exit::INFEASIBLE,
                E::Io { .. } | E::Csv(_) => exit::IO,
                E::Config(_)
                | E::SemiAngle(_)
                | E::ZeroDistance
                | E::TransmitterBelowPlane { .. }
                | E::OutOfRoom(_)
                | E::NoUsers
                | E::Assignment(_)
                | E::Instance(_)
                | E::Json(_) => exit::CONFIG,
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "wdm-vlc", version, about = "Multi-user WDM visible-light downlink simulator")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON configuration with optional room, receiver and scenario sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = OUT_DIR_ENV, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value = "both")]
    pub format: OutputFormat,
    /// optimal_surrogate, optimal_true_sinr, greedy or random.
    #[arg(long, global = true)]
    pub mode: Option<AllocatorMode>,
    /// table1 or calibrated; overrides the configuration's preset.
    #[arg(long, global = true)]
    pub preset: Option<Preset>,
    /// Transmit power multiplier; applied after the preset.
    #[arg(long = "power-mult", global = true)]
    pub power_mult: Option<f64>,
    /// Print a summary to stdout.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Line-of-sight gain from every luminaire to every user.
    Channel(UserArgs),
    /// Allocate one set of users and evaluate their links.
    Allocate(AllocateArgs),
    /// Sweep user counts with Monte-Carlo placements.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct UserArgs {
    /// JSON array of {"x": .., "y": ..} user positions.
    #[arg(long, conflicts_with_all = ["user", "random_users"])]
    pub users: Option<PathBuf>,
    /// Inline user position `x,y`; repeatable.
    #[arg(long, value_parser = parse_point, conflicts_with = "random_users")]
    pub user: Vec<(f64, f64)>,
    /// Place this many users uniformly from the seed.
    #[arg(long)]
    pub random_users: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[command(flatten)]
    pub users: UserArgs,
    /// Allocate a stored coefficient instance instead of a placement.
    #[arg(long, conflicts_with_all = ["users", "user", "random_users"])]
    pub instance: Option<PathBuf>,
    /// Also write the linearised model in LP format.
    #[arg(long)]
    pub write_lp: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated user counts, e.g. `1,2,3` or a range `1-10`.
    #[arg(long, value_parser = parse_counts)]
    pub counts: Option<Counts>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts(pub Vec<usize>);

fn parse_point(s: &str) -> std::result::Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected x,y, got '{s}'"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"));
    Ok((num(x)?, num(y)?))
}

fn parse_counts(s: &str) -> std::result::Result<Counts, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let num = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("'{v}': {e}"));
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (num(a)?, num(b)?);
                if a > b {
                    return Err(format!("empty range '{part}'"));
                }
                out.extend(a..=b);
            }
            None => out.push(num(part)?),
        }
    }
    Ok(Counts(out))
}

/// Configuration file plus command-line overrides.
pub fn resolve_spec(common: &Common) -> Result<ScenarioSpec> {
    let mut cfg = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(preset) = common.preset {
        cfg.scenario.preset = preset;
    }
    let mut spec = cfg.to_spec()?;
    if let Some(seed) = common.seed {
        spec.seed = seed;
    }
    if let Some(mode) = common.mode {
        spec.allocator_mode = mode;
    }
    if let Some(k) = common.power_mult {
        spec.room.power_multiplier = k;
    }
    spec.validate()?;
    Ok(spec)
}

fn load_users(args: &UserArgs, spec: &ScenarioSpec) -> Result<Vec<UserPosition>> {
    let users = if let Some(path) = &args.users {
        let text = std::fs::read_to_string(path).map_err(|source| wdm_vlc::Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str::<Vec<UserPosition>>(&text)
            .map_err(|e| wdm_vlc::Error::Config(format!("{}: {e}", path.display())))?
    } else if let Some(n) = args.random_users {
        generate_users(&spec.room, n, spec.seed)
    } else {
        args.user.iter().map(|&(x, y)| UserPosition::new(x, y)).collect()
    };
    if users.is_empty() {
        return Err(CliError::Usage(
            "no users given; use --users, --user or --random-users".into(),
        ));
    }
    for u in &users {
        spec.room.check_user(u)?;
    }
    Ok(users)
}

#[derive(Serialize)]
struct ChannelOutput<'a> {
    users: &'a [UserPosition],
    gains: &'a wdm_vlc::GainMatrix,
    /// Interference-free report for every user and pair.
    pairs: &'a [LinkReport],
}

#[derive(Serialize)]
struct AllocationOutput<'a> {
    allocator_mode: AllocatorMode,
    seed: u64,
    power_multiplier: f64,
    users: Option<&'a [UserPosition]>,
    assignment: &'a Assignment,
    surrogate_objective: f64,
    sum_sinr: f64,
    nodes_explored: u64,
    nodes_pruned: u64,
    throughput_bps: Option<f64>,
    links: Option<&'a [LinkReport]>,
}

fn allocate_instance(inst: &AllocationInstance, spec: &ScenarioSpec) -> Result<AllocationSolution> {
    Ok(match spec.allocator_mode {
        AllocatorMode::OptimalSurrogate => solve_bnb(inst, ObjectiveMode::Surrogate)?,
        AllocatorMode::OptimalTrueSinr => solve_bnb(inst, ObjectiveMode::TrueSinr)?,
        AllocatorMode::Greedy => baseline_greedy(inst)?,
        AllocatorMode::Random => baseline_random(inst, splitmix64(spec.seed))?,
    })
}

/// Runs one command; returns the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let spec = resolve_spec(&cli.common)?;
    let out = &cli.common.out;
    let format = cli.common.format;
    let verbose = cli.common.verbose > 0;
    io::create_dir(out)?;
    let mut written = Vec::new();
    match &cli.command {
        Command::Channel(args) => {
            let users = load_users(args, &spec)?;
            let gains = gain_matrix(&spec.room, &users, &spec.receiver)?;
            let mut pairs = Vec::with_capacity(users.len() * 32);
            for u in 0..users.len() {
                pairs.extend(standalone_reports(&spec.room, &spec.receiver, &gains, u, spec.target_ber)?);
            }
            if format.csv() {
                let path = out.join("gains.csv");
                io::write_with(&path, |b| io::write_gains_csv(b, &gains))?;
                written.push(path);
                let path = out.join("pairs.csv");
                io::write_with(&path, |b| io::write_links_csv(b, &pairs))?;
                written.push(path);
            }
            if format.json() {
                let path = out.join("gains.json");
                let doc = ChannelOutput { users: &users, gains: &gains, pairs: &pairs };
                io::write_file(&path, io::to_json(&doc)?.as_bytes())?;
                written.push(path);
            }
            if verbose {
                println!("user luminaire wavelength signal_sq noise_var sinr_db rate_gbps");
                for r in &pairs {
                    println!(
                        "{} {} {} {:.4e} {:.4e} {:.2} {:.3}",
                        r.user,
                        r.luminaire,
                        r.wavelength.name(),
                        r.signal_sq,
                        r.noise_var,
                        r.sinr_db,
                        r.achievable_rate / 1e9
                    );
                }
            }
        }
        Command::Allocate(args) => {
            let (inst, users) = match &args.instance {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|source| wdm_vlc::Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    let inst: AllocationInstance = serde_json::from_str(&text)
                        .map_err(|e| wdm_vlc::Error::Config(format!("{}: {e}", path.display())))?;
                    inst.validate()?;
                    (inst, None)
                }
                None => {
                    let users = load_users(&args.users, &spec)?;
                    let inst = build_instance(&spec.room, &users, &spec.receiver)?.with_weights(spec.weights);
                    (inst, Some(users))
                }
            };
            let sol = allocate_instance(&inst, &spec)?;
            let links = match &users {
                Some(users) => {
                    let gains = gain_matrix(&spec.room, users, &spec.receiver)?;
                    Some(link_reports(&spec.room, &spec.receiver, &gains, &sol.assignment, spec.target_ber)?)
                }
                None => None,
            };
            let doc = AllocationOutput {
                allocator_mode: spec.allocator_mode,
                seed: spec.seed,
                power_multiplier: spec.room.power_multiplier,
                users: users.as_deref(),
                assignment: &sol.assignment,
                surrogate_objective: sol.surrogate_objective,
                sum_sinr: sol.sum_sinr,
                nodes_explored: sol.stats.nodes_explored,
                nodes_pruned: sol.stats.nodes_pruned,
                throughput_bps: links.as_ref().map(|l| l.iter().map(|r| r.achievable_rate).sum()),
                links: links.as_deref(),
            };
            if format.json() {
                let path = out.join("allocation.json");
                io::write_file(&path, io::to_json(&doc)?.as_bytes())?;
                written.push(path);
            }
            if format.csv() {
                if let Some(links) = &links {
                    let path = out.join("links.csv");
                    io::write_with(&path, |b| io::write_links_csv(b, links))?;
                    written.push(path);
                }
            }
            if args.write_lp {
                let path = out.join("model.lp");
                io::write_file(&path, formulate_milp(&inst).to_lp().as_bytes())?;
                written.push(path);
            }
            if verbose {
                for (u, link) in sol.assignment.links().iter().enumerate() {
                    println!("user {u}: luminaire {} {}", link.luminaire, link.wavelength);
                }
                println!("surrogate objective {:e}, sum SINR {:e}", sol.surrogate_objective, sol.sum_sinr);
                if let Some(t) = doc.throughput_bps {
                    println!("throughput {:.3} Gb/s", t / 1e9);
                }
            }
        }
        Command::Simulate(args) => {
            let mut spec = spec;
            if let Some(t) = args.trials {
                spec.trials_per_point = t;
            }
            if let Some(c) = &args.counts {
                spec.user_counts = c.0.clone();
            }
            let trend = run_trend(&spec)?;
            written.extend(io::write_trend_outputs(out, &trend, format)?);
            println!("{:>3} {:>16} {:>12} {:>12}", "n", "throughput_gbps", "sinr_db", "served_db");
            for p in &trend.points {
                println!(
                    "{:>3} {:>16.4} {:>12.3} {:>12}",
                    p.n,
                    p.mean_throughput_bps / 1e9,
                    p.mean_sinr_db_all,
                    p.mean_sinr_db_served.map(|s| format!("{s:.3}")).unwrap_or_default()
                );
            }
        }
    }
    Ok(written)
}
