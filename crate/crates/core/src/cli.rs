//! `ma-noma` command-line front end.
//!
//! Settings are resolved as defaults < config file < flags. A config file is
//! flat `key = value` text; `#` starts a comment. Recognised keys:
//!
//! ```text
//! trials seed schemes workers grid starts stationarity
//! d1 d2 alpha paths wavelength region_width pmax_db noise1 noise2 blocklength t0
//! ```
//!
//! `region_width` is the side length of the movable region in wavelengths;
//! `grid` and `schemes` are comma-separated lists. Grid values of `sweep-p2`
//! are fractions of `Pmax`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::alloc::{solve_noma, solve_oma, AllocProblem, AllocSolution, StationarityForm};
use crate::channel::{gain, sample_channel_pair, AntennaPosition};
use crate::error::{Error, Result};
use crate::experiments::{run_sweep, to_csv, trial_seed, ExperimentConfig, Scheme, SweepKind};
use crate::fbl::LinkGains;
use crate::placement::{optimize_position, MultiStart, Placement, ScaConfig};
use crate::plot::sweep_svg;
use crate::selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ma-noma", version, about = "Movable-antenna NOMA short-packet downlink: placement, allocation and Monte Carlo sweeps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one random instance end to end and print the allocation.
    Solve(RunArgs),
    /// Core-user throughput against the edge-user power share.
    #[command(name = "sweep-p2")]
    SweepP2(RunArgs),
    /// Core-user throughput against the blocklength.
    #[command(name = "sweep-n")]
    SweepN(RunArgs),
    /// Core-user throughput against the edge-user target.
    #[command(name = "sweep-t0")]
    SweepT0(RunArgs),
    /// Randomised invariant checks.
    Selftest(RunArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for CSV/SVG output; CSV goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG chart next to the CSV.
    #[arg(long)]
    pub plot: bool,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated subset of ma_noma, fpa_noma, ma_oma, fpa_oma.
    #[arg(long)]
    pub schemes: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    /// Comma-separated sweep grid.
    #[arg(long)]
    pub grid: Option<String>,
    /// Placement starts per antenna (1 = origin only).
    #[arg(long)]
    pub starts: Option<String>,
    /// `derivative` (default) or `printed`.
    #[arg(long)]
    pub stationarity: Option<String>,
    #[arg(long)]
    pub d1: Option<String>,
    #[arg(long)]
    pub d2: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub paths: Option<String>,
    #[arg(long)]
    pub wavelength: Option<String>,
    /// Side length of the movable region, in wavelengths.
    #[arg(long = "region-width")]
    pub region_width: Option<String>,
    /// Pmax over noise power, dB.
    #[arg(long = "pmax-db")]
    pub pmax_db: Option<String>,
    #[arg(long)]
    pub noise1: Option<String>,
    #[arg(long)]
    pub noise2: Option<String>,
    #[arg(long)]
    pub blocklength: Option<String>,
    #[arg(long)]
    pub t0: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs: [(&'static str, &Option<String>); 18] = [
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("schemes", &self.schemes),
            ("workers", &self.workers),
            ("grid", &self.grid),
            ("starts", &self.starts),
            ("stationarity", &self.stationarity),
            ("d1", &self.d1),
            ("d2", &self.d2),
            ("alpha", &self.alpha),
            ("paths", &self.paths),
            ("wavelength", &self.wavelength),
            ("region_width", &self.region_width),
            ("pmax_db", &self.pmax_db),
            ("noise1", &self.noise1),
            ("noise2", &self.noise2),
            ("blocklength", &self.blocklength),
            ("t0", &self.t0),
        ];
        pairs.into_iter().filter_map(|(k, v)| v.as_deref().map(|v| (k, v))).collect()
    }
}

/// Parse a flat `key = value` file; later duplicates win.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got `{}`", lineno + 1, raw.trim())))?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("key `{key}`: cannot parse `{value}`")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>> {
    value.split(',').map(|v| parse_num(key, v)).collect()
}

/// Apply one setting; unknown keys are errors.
pub fn apply_setting(cfg: &mut ExperimentConfig, region_wavelengths: &mut f64, key: &str, value: &str) -> Result<()> {
    let ch = &mut cfg.physical.channel;
    match key {
        "trials" => cfg.trials = parse_num(key, value)?,
        "seed" => cfg.master_seed = parse_num(key, value)?,
        "workers" => cfg.workers = Some(parse_num(key, value)?),
        "starts" => cfg.placement_starts = parse_num(key, value)?,
        "grid" => cfg.sweep.values = parse_list(key, value)?,
        "schemes" => cfg.schemes = value.split(',').map(str::parse).collect::<Result<_>>()?,
        "stationarity" => {
            cfg.alloc.form = match value.trim() {
                "derivative" => StationarityForm::Derivative,
                "printed" => StationarityForm::Printed,
                other => return Err(Error::Config(format!("key `{key}`: expected derivative or printed, got `{other}`"))),
            }
        }
        "d1" => ch.d1 = parse_num(key, value)?,
        "d2" => ch.d2 = parse_num(key, value)?,
        "alpha" => ch.path_loss_exponent = parse_num(key, value)?,
        "paths" => ch.num_paths = parse_num(key, value)?,
        "wavelength" => ch.wavelength = parse_num(key, value)?,
        "region_width" => *region_wavelengths = parse_num(key, value)?,
        "noise1" => ch.noise1 = parse_num(key, value)?,
        "noise2" => ch.noise2 = parse_num(key, value)?,
        "pmax_db" => cfg.physical.pmax_db = parse_num(key, value)?,
        "blocklength" => cfg.physical.blocklength = parse_num(key, value)?,
        "t0" => cfg.physical.t0 = parse_num(key, value)?,
        other => return Err(Error::Config(format!("unknown key `{other}`"))),
    }
    Ok(())
}

/// Defaults for `kind`, then the config file, then flag overrides.
pub fn resolve_config(kind: SweepKind, args: &RunArgs, file_text: Option<&str>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::standard(kind);
    let mut region = cfg.physical.channel.region_width / cfg.physical.channel.wavelength;
    if let Some(text) = file_text {
        for (k, v) in parse_config_text(text)? {
            apply_setting(&mut cfg, &mut region, &k, &v)?;
        }
    }
    for (k, v) in args.overrides() {
        apply_setting(&mut cfg, &mut region, k, v)?;
    }
    if !(region > 0.0) {
        return Err(Error::Config(format!("key `region_width`: must be positive, got {region}")));
    }
    cfg.physical.channel.region_width = region * cfg.physical.channel.wavelength;
    Ok(cfg)
}

fn read_config(args: &RunArgs) -> Result<Option<String>> {
    args.config
        .as_ref()
        .map(|p| fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display()))))
        .transpose()
}

fn report_placement(out: &mut dyn Write, label: &str, p: &Placement, fixed_gain: f64) -> std::io::Result<()> {
    writeln!(
        out,
        "  {label}: position=({:.6}, {:.6}) gain={:.6e} origin_gain={:.6e} iterations={} converged={}",
        p.position.x, p.position.y, p.gain, fixed_gain, p.diagnostics.iterations, p.diagnostics.converged
    )
}

fn report_solution(out: &mut dyn Write, s: &AllocSolution, t0: f64) -> std::io::Result<()> {
    let a = &s.allocation;
    writeln!(out, "  P1={:.6e} P2={:.6e} P2_lower={:.6e}", a.p1, a.p2, s.p2_lower)?;
    writeln!(out, "  R1={:.9} R2={:.9} N={}", a.r1, a.r2, a.blocklength)?;
    writeln!(out, "  T1={:.9} T2={:.9}", s.t1, s.t2)?;
    if let Some((n1, n2)) = s.diagnostics.oma_split {
        writeln!(out, "  split: N1={n1} N2={n2}")?;
    }
    let state = if t0 == 0.0 { "inactive" } else { "active" };
    writeln!(
        out,
        "  T2 constraint {state} (T0={t0}); edge rate via {:?} in {} iterations, R1 candidate {:?}, {} evaluations",
        s.diagnostics.edge_rate.method, s.diagnostics.edge_rate.iterations, s.diagnostics.r1_candidate, s.diagnostics.evaluations
    )
}

fn run_solve(cfg: &ExperimentConfig, schemes_given: bool, out: &mut dyn Write) -> Result<i32> {
    cfg.physical.channel.validate()?;
    let seed = trial_seed(cfg.master_seed, 0);
    let (core, edge) = sample_channel_pair(seed, &cfg.physical.channel)?;
    let sca = ScaConfig {
        multi_start: (cfg.placement_starts > 1).then(|| MultiStart { starts: cfg.placement_starts, seed: trial_seed(seed, 1) }),
        ..cfg.sca.clone()
    };
    let pc = optimize_position(&core, &sca);
    let pe = optimize_position(&edge, &sca);
    let fixed = [gain(&core, AntennaPosition::ORIGIN), gain(&edge, AntennaPosition::ORIGIN)];
    let pmax = cfg.physical.pmax();
    let io = |e: std::io::Error| Error::io("stdout", &e);
    writeln!(out, "seed={} pmax={:.6e} N={} T0={}", cfg.master_seed, pmax, cfg.physical.blocklength, cfg.physical.t0).map_err(io)?;
    writeln!(out, "placement").map_err(io)?;
    report_placement(out, "core", &pc, fixed[0]).map_err(io)?;
    report_placement(out, "edge", &pe, fixed[1]).map_err(io)?;
    let schemes: Vec<Scheme> = if schemes_given { cfg.schemes.clone() } else { vec![Scheme::MaNoma, Scheme::FpaNoma] };
    let mut code = EXIT_OK;
    for scheme in schemes {
        let g = if scheme.movable() { [pc.gain, pe.gain] } else { fixed };
        let problem = AllocProblem {
            gains: LinkGains::new(g[0], g[1], core.noise_power(), edge.noise_power()),
            pmax,
            blocklength: cfg.physical.blocklength,
            t0: cfg.physical.t0,
        };
        let solved = if scheme.noma() { solve_noma(&problem, &cfg.alloc) } else { solve_oma(&problem, &cfg.alloc) };
        writeln!(out, "scheme {scheme}").map_err(io)?;
        match solved {
            Ok(s) => report_solution(out, &s, problem.t0).map_err(io)?,
            Err(e) if e.is_infeasible() => {
                writeln!(out, "  infeasible: {e}").map_err(io)?;
                code = EXIT_INFEASIBLE;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(code)
}

fn run_sweep_cmd(kind: SweepKind, cfg: &ExperimentConfig, args: &RunArgs, out: &mut dyn Write) -> Result<i32> {
    let results = run_sweep(cfg)?;
    let csv = to_csv(&results);
    let stem = format!("sweep_{}", kind.name());
    let io = |p: &Path, e: std::io::Error| Error::io(&p.display().to_string(), &e);
    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            let path = dir.join(format!("{stem}.csv"));
            fs::write(&path, &csv).map_err(|e| io(&path, e))?;
        }
        None => out.write_all(csv.as_bytes()).map_err(|e| io(Path::new("stdout"), e))?,
    }
    if args.plot {
        let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        let path = dir.join(format!("{stem}.svg"));
        fs::write(&path, sweep_svg(kind, &results)).map_err(|e| io(&path, e))?;
    }
    Ok(EXIT_OK)
}

fn run_selftest(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<i32> {
    let checks = selftest::run(cfg.trials.min(200), cfg.master_seed);
    let io = |e: std::io::Error| Error::io("stdout", &e);
    for c in &checks {
        writeln!(out, "{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail).map_err(io)?;
    }
    Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_INFEASIBLE })
}

/// Entry point; returns the process exit status.
pub fn parse_and_run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (kind, args) = match &cli.command {
        Command::Solve(a) => (SweepKind::T0, a),
        Command::SweepP2(a) => (SweepKind::P2, a),
        Command::SweepN(a) => (SweepKind::Blocklength, a),
        Command::SweepT0(a) => (SweepKind::T0, a),
        Command::Selftest(a) => (SweepKind::T0, a),
    };
    let cfg = match read_config(args).and_then(|text| resolve_config(kind, args, text.as_deref())) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => run_solve(&cfg, a.schemes.is_some() || a.config.is_some(), out),
        Command::Selftest(_) => run_selftest(&cfg, out),
        _ => run_sweep_cmd(kind, &cfg, args, out),
    };
    match result {
        Ok(code) => code,
        // A closed downstream pipe is not a failure of the run.
        Err(Error::Io { kind: std::io::ErrorKind::BrokenPipe, .. }) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) | Error::InvalidParameter { .. } | Error::Io { .. } => EXIT_USAGE,
                Error::Infeasible { .. } => EXIT_INFEASIBLE,
                _ => EXIT_INFEASIBLE,
            }
        }
    }
}
