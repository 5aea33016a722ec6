//! Monte Carlo comparison of MA/FPA receivers under NOMA/OMA.
//!
//! Every trial draws one channel pair and reuses it for all schemes and all
//! grid values, so scheme differences are paired. Trials run in parallel; the
//! per-trial seed depends only on `(master_seed, trial_index)` and results are
//! reduced in trial-index order, so output does not depend on worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::alloc::{solve_noma, solve_noma_at, solve_oma, AllocConfig, AllocProblem};
use crate::channel::{gain, sample_channel_pair, AntennaPosition, ChannelParams};
use crate::error::{Error, Result};
use crate::fbl::LinkGains;
use crate::placement::{optimize_position, MultiStart, ScaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    MaNoma,
    FpaNoma,
    MaOma,
    FpaOma,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::MaNoma, Scheme::FpaNoma, Scheme::MaOma, Scheme::FpaOma];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MaNoma => "ma_noma",
            Scheme::FpaNoma => "fpa_noma",
            Scheme::MaOma => "ma_oma",
            Scheme::FpaOma => "fpa_oma",
        }
    }

    pub fn movable(self) -> bool {
        matches!(self, Scheme::MaNoma | Scheme::MaOma)
    }

    pub fn noma(self) -> bool {
        matches!(self, Scheme::MaNoma | Scheme::FpaNoma)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown scheme `{s}` (expected ma_noma, fpa_noma, ma_oma or fpa_oma)")))
    }
}

/// Swept quantity. Values of a `P2` sweep are fractions of `Pmax`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    P2,
    Blocklength,
    T0,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::P2 => "p2",
            SweepKind::Blocklength => "n",
            SweepKind::T0 => "t0",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub kind: SweepKind,
    pub values: Vec<f64>,
}

/// System parameters shared by all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalParams {
    pub channel: ChannelParams,
    /// `Pmax / σ1²` in dB.
    pub pmax_db: f64,
    pub blocklength: u32,
    pub t0: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { channel: ChannelParams::default(), pmax_db: 60.0, blocklength: 100, t0: 1.0 }
    }
}

impl PhysicalParams {
    pub fn pmax(&self) -> f64 {
        self.channel.noise1 * 10f64.powf(self.pmax_db / 10.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub trials: usize,
    pub master_seed: u64,
    pub sweep: Sweep,
    pub physical: PhysicalParams,
    pub sca: ScaConfig,
    /// Starts per placement (1 = initial position only).
    pub placement_starts: usize,
    pub alloc: AllocConfig,
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    /// Defaults of the three standard sweeps.
    pub fn standard(kind: SweepKind) -> Self {
        let (values, schemes, blocklength, t0) = match kind {
            SweepKind::P2 => (
                vec![0.59, 0.60, 0.61, 0.62, 0.64, 0.66, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95],
                vec![Scheme::MaNoma, Scheme::FpaNoma],
                100,
                1.0,
            ),
            SweepKind::Blocklength => (vec![25.0, 50.0, 100.0, 200.0, 400.0, 800.0], Scheme::ALL.to_vec(), 100, 2.0),
            SweepKind::T0 => (vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0], Scheme::ALL.to_vec(), 200, 1.0),
        };
        Self {
            schemes,
            trials: 1000,
            master_seed: 1,
            sweep: Sweep { kind, values },
            physical: PhysicalParams { blocklength, t0, ..Default::default() },
            sca: ScaConfig::default(),
            placement_starts: 1,
            alloc: AllocConfig::default(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        if self.placement_starts == 0 {
            return Err(Error::Config("starts must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        let values = &self.sweep.values;
        if values.is_empty() {
            return Err(Error::Config("sweep grid is empty".into()));
        }
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("sweep grid must be strictly increasing".into()));
        }
        self.physical.channel.validate()?;
        if !self.physical.pmax_db.is_finite() {
            return Err(Error::Config("pmax_db must be finite".into()));
        }
        let min_n = if self.schemes.iter().any(|s| !s.noma()) { 2 } else { 1 };
        let check_n = |n: f64| {
            if n.fract() != 0.0 || n < f64::from(min_n) || n > f64::from(u32::MAX) {
                Err(Error::Config(format!("blocklength {n} must be an integer ≥ {min_n}")))
            } else {
                Ok(())
            }
        };
        check_n(f64::from(self.physical.blocklength))?;
        if !(self.physical.t0 >= 0.0) {
            return Err(Error::Config("t0 must be nonnegative".into()));
        }
        match self.sweep.kind {
            SweepKind::P2 => {
                if let Some(s) = self.schemes.iter().find(|s| !s.noma()) {
                    return Err(Error::Config(format!("scheme {s} has no power split; P2 sweeps take NOMA schemes only")));
                }
                if values.iter().any(|&v| !(v > 0.0 && v <= 1.0)) {
                    return Err(Error::Config("P2 grid values are fractions of Pmax in (0, 1]".into()));
                }
            }
            SweepKind::Blocklength => values.iter().try_for_each(|&v| check_n(v))?,
            SweepKind::T0 => {
                if values.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
                    return Err(Error::Config("t0 grid values must be nonnegative".into()));
                }
            }
        }
        Ok(())
    }
}

/// Stateless per-trial seed (SplitMix64 finaliser over the pair).
pub fn trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    let mut z = master_seed ^ trial_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Channel gains of one trial at the optimised and the fixed positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialGains {
    pub ma: [f64; 2],
    pub fpa: [f64; 2],
    pub ma_positions: [AntennaPosition; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOutcome {
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub gains: TrialGains,
    /// `outcomes[grid][scheme]`; `None` marks an infeasible target.
    pub outcomes: Vec<Vec<Option<SchemeOutcome>>>,
}

fn solve_scheme(config: &ExperimentConfig, scheme: Scheme, gains: LinkGains, value: f64) -> Result<Option<SchemeOutcome>> {
    let phys = &config.physical;
    let mut problem = AllocProblem { gains, pmax: phys.pmax(), blocklength: phys.blocklength, t0: phys.t0 };
    let solved = match config.sweep.kind {
        SweepKind::P2 => solve_noma_at(&problem, value * problem.pmax, &config.alloc),
        kind => {
            if kind == SweepKind::Blocklength {
                problem.blocklength = value as u32;
            } else {
                problem.t0 = value;
            }
            if scheme.noma() {
                solve_noma(&problem, &config.alloc)
            } else {
                solve_oma(&problem, &config.alloc)
            }
        }
    };
    match solved {
        Ok(s) => Ok(Some(SchemeOutcome { t1: s.t1, t2: s.t2 })),
        Err(e) if e.is_infeasible() => Ok(None),
        Err(e) => Err(e),
    }
}

/// One Monte Carlo trial over every grid value and scheme.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<TrialRecord> {
    let seed = trial_seed(config.master_seed, trial_index);
    let (core, edge) = sample_channel_pair(seed, &config.physical.channel)?;
    let fpa = [gain(&core, AntennaPosition::ORIGIN), gain(&edge, AntennaPosition::ORIGIN)];
    let (ma, ma_positions) = if config.schemes.iter().any(|s| s.movable()) {
        let sca = ScaConfig {
            multi_start: (config.placement_starts > 1)
                .then(|| MultiStart { starts: config.placement_starts, seed: trial_seed(seed, 1) }),
            ..config.sca.clone()
        };
        let p1 = optimize_position(&core, &sca);
        let p2 = optimize_position(&edge, &sca);
        ([p1.gain, p2.gain], [p1.position, p2.position])
    } else {
        (fpa, [AntennaPosition::ORIGIN; 2])
    };
    let (n1, n2) = (core.noise_power(), edge.noise_power());
    let outcomes = config
        .sweep
        .values
        .iter()
        .map(|&value| {
            config
                .schemes
                .iter()
                .map(|&scheme| {
                    let g = if scheme.movable() { ma } else { fpa };
                    solve_scheme(config, scheme, LinkGains::new(g[0], g[1], n1, n2), value)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialRecord { trial_index, gains: TrialGains { ma, fpa, ma_positions }, outcomes })
}

/// All trials, in trial-index order.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        (0..config.trials as u64)
            .into_par_iter()
            .map(|i| run_trial(config, i))
            .collect()
    })
}

/// Aggregate of one `(grid value, scheme)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub sweep_value: f64,
    pub scheme: Scheme,
    /// Mean over feasible trials; NaN when none was feasible.
    pub mean_t1: f64,
    pub stderr_t1: f64,
    pub mean_t2: f64,
    pub feasible_rate: f64,
    pub trials: usize,
}

pub fn aggregate(config: &ExperimentConfig, records: &[TrialRecord]) -> Vec<SweepResult> {
    let mut out = Vec::with_capacity(config.sweep.values.len() * config.schemes.len());
    for (gi, &value) in config.sweep.values.iter().enumerate() {
        for (si, &scheme) in config.schemes.iter().enumerate() {
            let feasible: Vec<SchemeOutcome> = records.iter().filter_map(|r| r.outcomes[gi][si]).collect();
            let n = feasible.len();
            let mean = |f: fn(&SchemeOutcome) -> f64| {
                if n == 0 {
                    f64::NAN
                } else {
                    feasible.iter().map(f).sum::<f64>() / n as f64
                }
            };
            let mean_t1 = mean(|o| o.t1);
            let stderr_t1 = if n > 1 {
                let ss: f64 = feasible.iter().map(|o| (o.t1 - mean_t1).powi(2)).sum();
                (ss / (n - 1) as f64 / n as f64).sqrt()
            } else {
                0.0
            };
            out.push(SweepResult {
                sweep_value: value,
                scheme,
                mean_t1,
                stderr_t1,
                mean_t2: mean(|o| o.t2),
                feasible_rate: if records.is_empty() { 0.0 } else { n as f64 / records.len() as f64 },
                trials: records.len(),
            });
        }
    }
    out
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepResult>> {
    let records = run_trials(config)?;
    Ok(aggregate(config, &records))
}

pub const CSV_HEADER: &str = "sweep_value,scheme,mean_t1,stderr_t1,mean_t2,feasible_rate,trials";

/// CSV table with one row per `(grid value, scheme)`.
pub fn to_csv(results: &[SweepResult]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in results {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.sweep_value, r.scheme, r.mean_t1, r.stderr_t1, r.mean_t2, r.feasible_rate, r.trials
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: SweepKind) -> ExperimentConfig {
        ExperimentConfig { trials: 4, workers: Some(2), ..ExperimentConfig::standard(kind) }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("ma-noma".parse::<Scheme>().is_err());
    }

    #[test]
    fn trial_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(trial_seed(7, 0), trial_seed(8, 0));
    }

    #[test]
    fn validation_catches_bad_grids() {
        let mut c = small(SweepKind::T0);
        c.sweep.values = vec![1.0, 0.5];
        assert!(c.validate().is_err());
        c.sweep.values.clear();
        assert!(c.validate().is_err());
        let mut c = small(SweepKind::P2);
        c.schemes.push(Scheme::MaOma);
        assert!(c.validate().is_err());
        let mut c = small(SweepKind::Blocklength);
        c.sweep.values = vec![1.0, 50.0];
        assert!(c.validate().is_err());
        c.sweep.values = vec![10.5];
        assert!(c.validate().is_err());
        assert!(ExperimentConfig { trials: 0, ..small(SweepKind::T0) }.validate().is_err());
    }

    #[test]
    fn trial_is_reproducible_and_ma_dominates_fpa_gain() {
        let c = small(SweepKind::T0);
        let a = run_trial(&c, 3).unwrap();
        assert_eq!(a, run_trial(&c, 3).unwrap());
        assert!(a.gains.ma[0] >= a.gains.fpa[0] && a.gains.ma[1] >= a.gains.fpa[1]);
    }

    #[test]
    fn single_trial_single_point_sweep_equals_trial() {
        let mut c = small(SweepKind::T0);
        c.trials = 1;
        c.sweep.values = vec![1.0];
        let rec = run_trial(&c, 0).unwrap();
        let res = run_sweep(&c).unwrap();
        assert_eq!(res.len(), c.schemes.len());
        for (r, o) in res.iter().zip(&rec.outcomes[0]) {
            let o = o.unwrap();
            assert_eq!(r.mean_t1, o.t1);
            assert_eq!(r.mean_t2, o.t2);
            assert_eq!(r.stderr_t1, 0.0);
            assert_eq!(r.feasible_rate, 1.0);
        }
    }

    #[test]
    fn csv_layout() {
        let c = ExperimentConfig { trials: 2, ..small(SweepKind::P2) };
        let csv = to_csv(&run_sweep(&c).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), c.sweep.values.len() * c.schemes.len());
        assert!(rows[0].starts_with("0.59,ma_noma,"));
        assert!(rows.iter().all(|r| r.split(',').count() == 7));
    }
}
