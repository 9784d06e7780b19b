//! Command-line front end: `train`, `region` and `eval`.

use std::ffi::OsString;
use std::ops::ControlFlow;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use misoifc_core::environment::{sample_channel, ChannelRealization, EnvConfig};
use misoifc_core::harness::{evaluate, reference_sample_channel, single_sample_figure, LearnedPolicy, TestSet};
use misoifc_core::madrl::{train, EpisodeRecord};
use misoifc_core::numerics::{RngStream, StreamId};
use misoifc_core::precoders::{pareto_indices, sweep_rate_region, DEFAULT_GRID_SIZE};

use crate::config::{parse_key_values, RunConfig};
use crate::error::{CliError, Result};
use crate::formats::{
    channel_from_json, checkpoint_to_json, learning_curve_csv, load_checkpoint, read_to_string, region_csv,
    sweep_csv, to_json, write_bytes, ReportJson,
};
use crate::manifest::{Artifact, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "misoifc", version, about = "Learned precoding for the two-cell MISO interference channel")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train both actors and the shared critic, then write the learning
    /// curve, checkpoint, final report and run manifest.
    Train(TrainArgs),
    /// Sweep the MRT/ZF rate region of one channel.
    Region(RegionArgs),
    /// Evaluate a checkpoint on a seeded test set.
    Eval(EvalArgs),
}

fn on_off(s: &str) -> std::result::Result<bool, String> {
    match s {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

fn unit_interval(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1]"))
    }
}

fn finite(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("must be finite".into())
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be positive".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

fn hidden_widths(s: &str) -> std::result::Result<[usize; 3], String> {
    let widths = s
        .split(',')
        .map(|w| positive_usize(w.trim()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    <[usize; 3]>::try_from(widths).map_err(|w| format!("expected three widths, got {}", w.len()))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Flat `key = value` file; keys are long flag names, flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weight of UE 1 in the collective reward.
    #[arg(long, value_parser = unit_interval)]
    pub alpha: Option<f64>,
    #[arg(long, value_parser = positive_usize)]
    pub nt: Option<usize>,
    #[arg(long, value_parser = finite, allow_negative_numbers = true)]
    pub snr_db: Option<f64>,
    #[arg(long, value_parser = positive_usize)]
    pub episodes: Option<usize>,
    /// Steps per episode.
    #[arg(long, value_parser = positive_usize)]
    pub steps: Option<usize>,
    /// Phase ambiguity elimination on the observations: on or off.
    #[arg(long, value_parser = on_off)]
    pub pae: Option<bool>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial exploration variance.
    #[arg(long)]
    pub sigma_p2: Option<f64>,
    /// Per-episode multiplier of the exploration variance.
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long, value_parser = positive_usize)]
    pub test_size: Option<usize>,
    #[arg(long)]
    pub test_seed: Option<u64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Critic learning rate.
    #[arg(long)]
    pub eta_c: Option<f64>,
    /// Actor learning rate.
    #[arg(long)]
    pub eta_a: Option<f64>,
    /// sgd or adam.
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long, value_parser = positive_usize)]
    pub batch: Option<usize>,
    /// Experience replay: on or off (off updates on the latest transition).
    #[arg(long, value_parser = on_off)]
    pub replay: Option<bool>,
    #[arg(long, value_parser = positive_usize)]
    pub replay_capacity: Option<usize>,
    /// Soft-updated target networks: on or off.
    #[arg(long, value_parser = on_off)]
    pub targets: Option<bool>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Weight of the raw-action norm penalty in the actor objective.
    #[arg(long)]
    pub norm_penalty: Option<f64>,
    /// Hidden layer widths, e.g. 64,64,64.
    #[arg(long, value_parser = hidden_widths)]
    pub hidden: Option<[usize; 3]>,
    /// relu or tanh.
    #[arg(long)]
    pub activation: Option<String>,
    /// Stop early once the test ratio to the SLNR baseline reaches this.
    #[arg(long)]
    pub stop_at_ratio: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Suppress per-episode progress on stderr.
    #[arg(long)]
    pub quiet: bool,
}

impl TrainArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let alpha = self
            .alpha
            .ok_or_else(|| CliError::Usage("--alpha is required (flag or config file)".into()))?;
        let mut c = RunConfig::with_alpha(alpha);
        macro_rules! take {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { c.$target = v; })*
            };
        }
        take!(
            nt => nt, snr_db => snr_db, episodes => episodes, steps => steps, pae => pae,
            seed => seed, sigma_p2 => sigma_p2, decay => decay, test_size => test_size,
            test_seed => test_seed, gamma => gamma, eta_c => eta_c, eta_a => eta_a,
            optimizer => optimizer, batch => batch, replay => replay,
            replay_capacity => replay_capacity, targets => targets, tau => tau,
            norm_penalty => norm_penalty, activation => activation, hidden => hidden,
        );
        c.stop_at_ratio = self.stop_at_ratio;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Use the built-in reference sample channel.
    #[arg(long)]
    pub paper_sample: bool,
    /// Draw a random channel from this seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Read the channel from a JSON file.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// Antennas per base station (random channels only).
    #[arg(long, value_parser = positive_usize, default_value_t = 3)]
    pub nt: usize,
    #[arg(long, value_parser = finite, allow_negative_numbers = true, default_value_t = 10.0)]
    pub snr_db: f64,
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid: usize,
    /// Add the rate pair reached by a trained checkpoint (repeatable).
    #[arg(long)]
    pub checkpoint: Vec<PathBuf>,
    /// Also write the raw sweep with frontier flags.
    #[arg(long)]
    pub sweep_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Defaults to the test seed recorded in the checkpoint.
    #[arg(long)]
    pub test_seed: Option<u64>,
    #[arg(long, value_parser = positive_usize)]
    pub test_size: Option<usize>,
    /// Report path; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses the command line, splicing in `train --config` file entries ahead
/// of the explicit flags so that flags take precedence.
pub fn parse_args<I, T>(args: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args)?;
    let path = match &cli.command {
        Command::Train(TrainArgs {
            config: Some(path), ..
        }) => path.clone(),
        _ => return Ok(cli),
    };
    let config_error = |msg: String| clap::Error::raw(clap::error::ErrorKind::ValueValidation, format!("--config: {msg}\n"));
    let text = std::fs::read_to_string(&path).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
    let entries = parse_key_values(&text).map_err(|e| config_error(e.to_string()))?;
    let sub = args.iter().position(|a| a == "train").expect("train subcommand present");
    let mut spliced: Vec<OsString> = args[..=sub].to_vec();
    for (k, v) in entries {
        if k == "config" || k == "quiet" {
            return Err(config_error(format!("key {k:?} is not allowed in a config file")));
        }
        spliced.push(format!("--{k}={v}").into());
    }
    spliced.extend_from_slice(&args[sub + 1..]);
    Cli::try_parse_from(spliced)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => cmd_train(&a).map(|_| ()),
        Command::Region(a) => cmd_region(&a),
        Command::Eval(a) => cmd_eval(&a),
    }
}

pub const CURVE_FILE: &str = "learning_curve.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

pub fn cmd_train(a: &TrainArgs) -> Result<RunManifest> {
    let cfg = a.resolve()?;
    let out = a.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let env = cfg.env()?;
    let tcfg = cfg.training()?;
    let hash = cfg.content_hash();
    let started = SystemTime::now();
    let clock = Instant::now();

    let ts = TestSet::generate(tcfg.test_seed, tcfg.test_size, &env);
    let stop = cfg.stop_at_ratio;
    let quiet = a.quiet;
    let mut observer = |r: &EpisodeRecord| {
        if !quiet {
            eprintln!(
                "episode {:>4}  sigma_p2 {:.5}  sum rate {:.4}  ({:.2}% of SLNR)",
                r.episode,
                r.sigma_p2,
                r.avg_sum_rate,
                r.pct_of_slnr_baseline()
            );
        }
        match stop {
            Some(s) if r.ratio_to_slnr >= s => ControlFlow::Break(()),
            _ => ControlFlow::Continue(()),
        }
    };
    let outcome = train(&tcfg, &env, &ts, &mut observer)?;

    let report = ReportJson::new(&outcome.final_report, &cfg, &hash);
    let files: [(&str, Vec<u8>); 3] = [
        (CURVE_FILE, learning_curve_csv(&outcome.curve)?),
        (CHECKPOINT_FILE, checkpoint_to_json(&cfg, &hash, &outcome.model)?.into_bytes()),
        (REPORT_FILE, to_json(&report)?.into_bytes()),
    ];
    let mut artifacts = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        write_bytes(&out.join(name), bytes)?;
        artifacts.push(Artifact::new(name, bytes));
    }
    let manifest = RunManifest::new(
        cfg,
        &env,
        artifacts,
        outcome.curve.len(),
        unix_seconds(started),
        clock.elapsed().as_secs_f64(),
    );
    write_bytes(&out.join(MANIFEST_FILE), to_json(&manifest)?.as_bytes())?;
    Ok(manifest)
}

fn region_channel(a: &RegionArgs, env: &EnvConfig) -> Result<ChannelRealization> {
    let sources = usize::from(a.paper_sample) + usize::from(a.seed.is_some()) + usize::from(a.channel.is_some());
    if sources != 1 {
        return Err(CliError::Usage(
            "exactly one of --paper-sample, --seed or --channel is required".into(),
        ));
    }
    if a.paper_sample {
        Ok(reference_sample_channel())
    } else if let Some(seed) = a.seed {
        Ok(sample_channel(&mut RngStream::derive(seed, StreamId::Fixture), env))
    } else {
        let path = a.channel.as_deref().expect("one source is set");
        channel_from_json(&read_to_string(path)?)
    }
}

pub fn cmd_region(a: &RegionArgs) -> Result<()> {
    if a.grid < 2 {
        return Err(CliError::Usage("--grid: must be at least 2".into()));
    }
    let env = EnvConfig::from_snr_db(a.nt, a.snr_db).map_err(|e| CliError::Usage(format!("--nt/--snr-db: {e}")))?;
    let ch = region_channel(a, &env)?;
    let env = EnvConfig::new(ch.n_t(), env.sigma_n2())?;

    let mut learned: Vec<(f64, LearnedPolicy)> = Vec::with_capacity(a.checkpoint.len());
    for path in &a.checkpoint {
        let cp = load_checkpoint(path)?;
        if cp.config.nt != ch.n_t() {
            return Err(CliError::Usage(format!(
                "--checkpoint {}: trained for n_t = {}, channel has {}",
                path.display(),
                cp.config.nt,
                ch.n_t()
            )));
        }
        learned.push((cp.config.alpha, cp.model.policy(cp.config.pae)));
    }
    let refs: Vec<(f64, &LearnedPolicy)> = learned.iter().map(|(al, p)| (*al, p)).collect();
    let rows = single_sample_figure(&ch, &refs, &env, a.grid)?;
    write_bytes(&a.out, &region_csv(&rows)?)?;

    if let Some(path) = &a.sweep_out {
        let points = sweep_rate_region(&ch, &env, a.grid)?;
        let rates: Vec<_> = points.iter().map(|p| p.rates).collect();
        write_bytes(path, &sweep_csv(&points, &pareto_indices(&rates))?)?;
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<()> {
    let cp = load_checkpoint(&a.checkpoint)?;
    let mut cfg = cp.config.clone();
    if let Some(s) = a.test_seed {
        cfg.test_seed = s;
    }
    if let Some(n) = a.test_size {
        cfg.test_size = n;
    }
    let env = cfg.env()?;
    let ts = TestSet::generate(cfg.test_seed, cfg.test_size, &env);
    let report = evaluate([&cp.model.actor1, &cp.model.actor2], &ts, &env, cfg.pae)?;
    let text = to_json(&ReportJson::new(&report, &cfg, &cp.config_hash))?;
    match &a.out {
        Some(path) => write_bytes(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
