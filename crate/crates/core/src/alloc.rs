//! Power and rate allocation at the access point.
//!
//! NOMA: maximise the core user's throughput `T1` over `(P1, P2, R1, R2)`
//! subject to `P1 + P2 ≤ Pmax` and `T2 ≥ T0`. At the optimum the power budget
//! is spent and `T2 = T0`, so the search is one-dimensional in `P2`:
//!
//! 1. for a given `P2`, `R2` solves `R2·(1 − ε2(R2)) = T0` (fixed-point iteration),
//! 2. `R1` is the stationary point of `T1` in whichever SIC branch wins,
//! 3. `P2` is bounded below by the smallest power whose best `T2` reaches `T0`,
//! 4. `P2` is searched over `[P2_lower, Pmax]`.
//!
//! OMA: the block is split in time, `N1 + N2 = N`, each slot at full power.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fbl::{
    capacity, dispersion_f, effective_error_u1, error_prob, q_function, rate_scale, sinr_set, throughput,
    throughput_pair, LinkGains, NomaAllocation, SinrSet,
};
use crate::numeric::{bisect, golden_section_max, linspace};

/// Which expression is used for `d/dR [R(1 − Q(f(γ, N, R)))]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StationarityForm {
    /// `1 − Q(f) − R·ln2·sqrt(N/(1−(1+γ)^{-2}))·φ(f)`, the exact derivative.
    #[default]
    Derivative,
    /// Same with the factor `N·R` in place of `R·sqrt(N)`, as it is usually
    /// printed. Kept for replication; its root is not the throughput peak.
    Printed,
}

/// Stationarity function `U(γ, N, R)`; positive while `R(1−ε)` still grows.
pub fn stationarity_u(gamma: f64, blocklength: u32, rate: f64, form: StationarityForm) -> f64 {
    let f = dispersion_f(gamma, blocklength, rate);
    let density = (-0.5 * f * f).exp() / (2.0 * PI).sqrt();
    let scale = match form {
        StationarityForm::Derivative => rate_scale(gamma, blocklength),
        StationarityForm::Printed => rate_scale(gamma, blocklength) * f64::from(blocklength).sqrt(),
    };
    1.0 - q_function(f) - rate * scale * density
}

/// Rate solving `U = 0` and the single-link throughput there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputPeak {
    pub rate: f64,
    pub throughput: f64,
}

/// Rate-tolerance of every bracketed root on rates.
pub const RATE_TOL: f64 = 1e-10;

/// Root of `U(γ, N, ·)`, i.e. the rate maximising `R(1 − ε)` for the
/// derivative form.
pub fn throughput_peak(gamma: f64, blocklength: u32, form: StationarityForm) -> ThroughputPeak {
    if !(gamma > 0.0) {
        return ThroughputPeak { rate: 0.0, throughput: 0.0 };
    }
    // U(0) ≥ 1/2 and U < 0 once f ≤ −10, i.e. R ≥ C + 10/scale.
    let hi = capacity(gamma) + 10.0 / rate_scale(gamma, blocklength);
    let rate = bisect(|r| stationarity_u(gamma, blocklength, r, form), 0.0, hi, RATE_TOL)
        .map(|b| b.root)
        .unwrap_or(hi);
    ThroughputPeak { rate, throughput: throughput(rate, error_prob(gamma, blocklength, rate)) }
}

/// How the edge-user rate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    /// `T0 = 0`; no iteration needed.
    Trivial,
    FixedPoint,
    /// The fixed-point map stalled; bisection on `T2(R2) − T0` took over.
    BisectionFallback,
    /// `T0` equals the peak throughput; the peak rate is the only root.
    Peak,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRate {
    pub rate: f64,
    pub iterations: usize,
    pub method: RateMethod,
    /// `R2(1 − ε2) − T0` at the returned rate.
    pub residual: f64,
}

fn edge_throughput(gamma: f64, blocklength: u32, rate: f64) -> f64 {
    throughput(rate, error_prob(gamma, blocklength, rate))
}

/// Smaller root of `R(1 − Q(f(γ, N, R))) = T0` by the iteration
/// `R ← T0 / (1 − Q(f(γ, N, R)))` started at `R = T0`.
///
/// From below, the map is increasing and converges monotonically to the
/// smaller root. The remaining error is estimated from the observed
/// contraction ratio; if the iteration stalls (ratio near 1 close to the
/// peak) or runs out of iterations, bisection on `[T0, R_peak]` finishes.
pub fn fixed_point_r2(gamma: f64, blocklength: u32, target: f64, tol: f64, max_iter: usize) -> Result<EdgeRate> {
    if !(target >= 0.0) {
        return Err(Error::invalid("t0", format!("target throughput must be nonnegative, got {target}")));
    }
    if target == 0.0 {
        return Ok(EdgeRate { rate: 0.0, iterations: 0, method: RateMethod::Trivial, residual: 0.0 });
    }
    let peak = throughput_peak(gamma, blocklength, StationarityForm::Derivative);
    if peak.throughput < target {
        if peak.throughput >= target * (1.0 - 1e-12) {
            return Ok(EdgeRate {
                rate: peak.rate,
                iterations: 0,
                method: RateMethod::Peak,
                residual: peak.throughput - target,
            });
        }
        return Err(Error::Infeasible { target, max_achievable: peak.throughput });
    }
    let mut rate = target;
    let mut prev_step: Option<f64> = None;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let success = 1.0 - error_prob(gamma, blocklength, rate);
        if success <= 0.0 {
            break;
        }
        let mut step = target / success - rate;
        let ratio = prev_step.map(|p| step / p);
        if let Some(r) = ratio {
            if r < 0.0 {
                step *= 0.5;
            }
        }
        rate += step;
        if rate > peak.rate {
            break;
        }
        // Geometric tail bound on the distance to the fixed point.
        let remaining = match ratio {
            Some(r) if (0.0..1.0).contains(&r) => step.abs() * r / (1.0 - r),
            Some(_) => f64::INFINITY,
            None => step.abs(),
        };
        if remaining <= tol && step.abs() <= tol {
            converged = true;
            break;
        }
        prev_step = Some(step);
    }
    if converged {
        let residual = edge_throughput(gamma, blocklength, rate) - target;
        return Ok(EdgeRate { rate, iterations, method: RateMethod::FixedPoint, residual });
    }
    let root = bisect(
        |r| edge_throughput(gamma, blocklength, r) - target,
        target,
        peak.rate,
        tol.min(RATE_TOL),
    )?;
    let rate = root.root;
    Ok(EdgeRate {
        rate,
        iterations: iterations + root.iterations,
        method: RateMethod::BisectionFallback,
        residual: edge_throughput(gamma, blocklength, rate) - target,
    })
}

/// Which candidate produced the core-user rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum R1Candidate {
    /// Root of the mixed stationarity condition in the SIC-tolerant region.
    Tolerant,
    /// Root of `U(γ1¹, N, ·)` in the SIC-required region.
    SicRequired,
    /// Region boundary `log2(1 + γ1¹′)` or another bracket endpoint.
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R1Choice {
    pub rate: f64,
    pub t1: f64,
    pub candidate: R1Candidate,
}

/// Core-user throughput at rate `r1`, or `-∞` outside its domain.
fn core_throughput(sinr: &SinrSet, blocklength: u32, r1: f64, r2: f64) -> f64 {
    effective_error_u1(sinr, blocklength, r1, r2)
        .map(|(eps, _)| throughput(r1, eps))
        .unwrap_or(f64::NEG_INFINITY)
}

/// Points of the sign-change scan in the SIC-tolerant region; the mixed
/// stationarity condition may have more than one root there.
const R1_SCAN_POINTS: usize = 33;

/// Throughput-maximising core-user rate for fixed powers and edge rate.
pub fn optimal_r1(sinr: &SinrSet, blocklength: u32, r2: f64, form: StationarityForm) -> R1Choice {
    let n = blocklength;
    let eps21 = error_prob(sinr.edge_at_core, n, r2);
    let c_lo = capacity(sinr.core_no_sic);
    let c_hi = capacity(sinr.core_sic);
    let mut candidates: Vec<(f64, R1Candidate)> = vec![(c_lo, R1Candidate::Boundary), (c_hi, R1Candidate::Boundary)];

    if c_lo > 0.0 {
        let mixed = |r: f64| {
            (1.0 - eps21) * stationarity_u(sinr.core_sic, n, r, form)
                + eps21 * stationarity_u(sinr.core_no_sic, n, r, form)
        };
        let grid: Vec<f64> = linspace(0.0, c_lo, R1_SCAN_POINTS).collect();
        let values: Vec<f64> = grid.iter().map(|&r| mixed(r)).collect();
        for i in 1..grid.len() {
            if values[i - 1] > 0.0 && values[i] <= 0.0 {
                if let Ok(b) = bisect(mixed, grid[i - 1], grid[i], RATE_TOL) {
                    candidates.push((b.root, R1Candidate::Tolerant));
                }
            }
        }
    }
    if c_hi > c_lo {
        let u = |r: f64| stationarity_u(sinr.core_sic, n, r, form);
        if let Ok(b) = bisect(u, c_lo, c_hi, RATE_TOL) {
            candidates.push((b.root, R1Candidate::SicRequired));
        }
    }

    candidates
        .into_iter()
        .map(|(rate, candidate)| R1Choice { rate, t1: core_throughput(sinr, n, rate, r2), candidate })
        .fold(R1Choice { rate: 0.0, t1: 0.0, candidate: R1Candidate::Boundary }, |best, c| {
            if c.t1 > best.t1 {
                c
            } else {
                best
            }
        })
}

/// Inputs of the access-point allocation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocProblem {
    pub gains: LinkGains,
    pub pmax: f64,
    pub blocklength: u32,
    /// Minimum effective throughput of the edge user.
    pub t0: f64,
}

impl AllocProblem {
    pub fn validate(&self) -> Result<()> {
        self.gains.validate()?;
        if !(self.pmax > 0.0 && self.pmax.is_finite()) {
            return Err(Error::invalid("pmax", format!("must be positive, got {}", self.pmax)));
        }
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::invalid("t0", format!("must be nonnegative, got {}", self.t0)));
        }
        if self.blocklength == 0 {
            return Err(Error::invalid("blocklength", "must be at least 1"));
        }
        Ok(())
    }

    /// Edge-user SINR when it receives `p2` and the core user the rest.
    pub fn edge_sinr(&self, p2: f64) -> f64 {
        let g2 = self.gains.gain2;
        p2 * g2 / ((self.pmax - p2) * g2 + self.gains.noise2)
    }
}

/// Solver tolerances and search sizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocConfig {
    pub form: StationarityForm,
    /// Stop tolerance of the edge-rate fixed-point iteration.
    pub fixed_point_tol: f64,
    pub fixed_point_max_iter: usize,
    /// Bisection width on `P2_lower`, relative to `Pmax`.
    pub power_tol: f64,
    /// Points of the linear pre-scan over `[P2_lower, Pmax]`.
    pub prescan_points: usize,
    /// Golden-section width, relative to `Pmax`.
    pub golden_tol: f64,
    /// Points of the final local scan around the golden-section optimum.
    pub refine_points: usize,
}

impl Default for AllocConfig {
    fn default() -> Self {
        Self {
            form: StationarityForm::Derivative,
            fixed_point_tol: 1e-12,
            fixed_point_max_iter: 1000,
            power_tol: 1e-13,
            prescan_points: 64,
            golden_tol: 1e-9,
            refine_points: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocDiagnostics {
    /// Objective evaluations spent in the `P2` search.
    pub evaluations: usize,
    pub edge_rate: EdgeRate,
    pub r1_candidate: R1Candidate,
    /// `(N1, N2)` for the OMA baseline.
    pub oma_split: Option<(u32, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocSolution {
    pub allocation: NomaAllocation,
    pub t1: f64,
    pub t2: f64,
    pub p2_lower: f64,
    pub diagnostics: AllocDiagnostics,
}

/// Smallest `P2` at which the edge user's best throughput reaches `T0`.
pub fn p2_lower_bound(problem: &AllocProblem, config: &AllocConfig) -> Result<f64> {
    problem.validate()?;
    if problem.t0 == 0.0 {
        return Ok(0.0);
    }
    let best_t2 = |p2: f64| throughput_peak(problem.edge_sinr(p2), problem.blocklength, config.form).throughput;
    let at_max = best_t2(problem.pmax);
    if at_max < problem.t0 {
        return Err(Error::Infeasible { target: problem.t0, max_achievable: at_max });
    }
    let root = bisect(|p2| best_t2(p2) - problem.t0, 0.0, problem.pmax, config.power_tol * problem.pmax)?;
    // Upper end of the bracket is on the feasible side.
    Ok(root.hi)
}

/// Best `(R1, R2)` with `P2` fixed and `P1 = Pmax − P2`.
pub fn solve_noma_at(problem: &AllocProblem, p2: f64, config: &AllocConfig) -> Result<AllocSolution> {
    problem.validate()?;
    if !(0.0..=problem.pmax).contains(&p2) {
        return Err(Error::invalid("p2", format!("{p2} outside [0, {}]", problem.pmax)));
    }
    let p1 = problem.pmax - p2;
    let n = problem.blocklength;
    let sinr = sinr_set(&problem.gains, p1, p2);
    let edge_rate = fixed_point_r2(sinr.edge, n, problem.t0, config.fixed_point_tol, config.fixed_point_max_iter)?;
    let r1 = optimal_r1(&sinr, n, edge_rate.rate, config.form);
    let allocation = NomaAllocation { p1, p2, r1: r1.rate, r2: edge_rate.rate, blocklength: n };
    let (t1, t2) = throughput_pair(&problem.gains, &allocation)?;
    Ok(AllocSolution {
        allocation,
        t1,
        t2,
        p2_lower: f64::NAN,
        diagnostics: AllocDiagnostics { evaluations: 1, edge_rate, r1_candidate: r1.candidate, oma_split: None },
    })
}

/// Full NOMA allocation: lower bound on `P2`, then a search over
/// `[P2_lower, Pmax]`.
///
/// `T1(P2)` is not guaranteed unimodal, so a linear pre-scan brackets the
/// best region before golden-section search and a final local scan.
pub fn solve_noma(problem: &AllocProblem, config: &AllocConfig) -> Result<AllocSolution> {
    let p2_lower = p2_lower_bound(problem, config)?;
    let pmax = problem.pmax;
    let mut evaluations = 0usize;
    let mut best: Option<AllocSolution> = None;
    let mut eval = |p2: f64, best: &mut Option<AllocSolution>| -> f64 {
        evaluations += 1;
        match solve_noma_at(problem, p2.clamp(p2_lower, pmax), config) {
            Ok(s) => {
                let t1 = s.t1;
                if best.as_ref().map_or(true, |b| t1 > b.t1) {
                    *best = Some(s);
                }
                t1
            }
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let scan: Vec<f64> = linspace(p2_lower, pmax, config.prescan_points.max(2)).collect();
    let values: Vec<f64> = scan.iter().map(|&p| eval(p, &mut best)).collect();
    let i_best = values
        .iter()
        .enumerate()
        .fold(0, |bi, (i, &v)| if v > values[bi] { i } else { bi });
    let lo = scan[i_best.saturating_sub(1)];
    let hi = scan[(i_best + 1).min(scan.len() - 1)];
    if hi > lo {
        let g = golden_section_max(|p| eval(p, &mut best), lo, hi, config.golden_tol * pmax);
        let width = (hi - lo) / 8.0;
        for p in linspace((g.arg - width).max(lo), (g.arg + width).min(hi), config.refine_points) {
            eval(p, &mut best);
        }
    }

    let mut solution = best.ok_or(Error::Infeasible { target: problem.t0, max_achievable: f64::NAN })?;
    solution.p2_lower = p2_lower;
    solution.diagnostics.evaluations = evaluations;
    Ok(solution)
}

/// TDMA baseline: `N2 ∈ [1, N−1]` channel uses for the edge user, the rest for
/// the core user, each slot at full power with no interference.
pub fn solve_oma(problem: &AllocProblem, config: &AllocConfig) -> Result<AllocSolution> {
    problem.validate()?;
    let n = problem.blocklength;
    if n < 2 {
        return Err(Error::invalid("blocklength", "OMA needs at least two channel uses"));
    }
    let g = &problem.gains;
    let gamma1 = problem.pmax * g.gain1 / g.noise1;
    let gamma2 = problem.pmax * g.gain2 / g.noise2;
    let total = f64::from(n);
    let mut best: Option<AllocSolution> = None;
    let mut best_t2 = 0.0f64;
    for n2 in 1..n {
        let n1 = n - n2;
        let share2 = f64::from(n2) / total;
        let share1 = f64::from(n1) / total;
        best_t2 = best_t2.max(share2 * throughput_peak(gamma2, n2, StationarityForm::Derivative).throughput);
        let edge_rate = match fixed_point_r2(
            gamma2,
            n2,
            problem.t0 / share2,
            config.fixed_point_tol,
            config.fixed_point_max_iter,
        ) {
            Ok(r) => r,
            Err(Error::Infeasible { .. }) => continue,
            Err(e) => return Err(e),
        };
        let peak1 = throughput_peak(gamma1, n1, config.form);
        let t1 = share1 * peak1.throughput;
        let t2 = share2 * edge_throughput(gamma2, n2, edge_rate.rate);
        if best.as_ref().map_or(true, |b| t1 > b.t1) {
            best = Some(AllocSolution {
                allocation: NomaAllocation {
                    p1: problem.pmax,
                    p2: problem.pmax,
                    r1: peak1.rate,
                    r2: edge_rate.rate,
                    blocklength: n,
                },
                t1,
                t2,
                p2_lower: problem.pmax,
                diagnostics: AllocDiagnostics {
                    evaluations: n2 as usize,
                    edge_rate,
                    r1_candidate: R1Candidate::SicRequired,
                    oma_split: Some((n1, n2)),
                },
            });
        }
    }
    best.ok_or(Error::Infeasible { target: problem.t0, max_achievable: best_t2 })
}

/// Roots of `U(γ, N, ·)` under the derivative and the printed form.
pub fn stationarity_form_gap(gamma: f64, blocklength: u32) -> (f64, f64) {
    (
        throughput_peak(gamma, blocklength, StationarityForm::Derivative).rate,
        throughput_peak(gamma, blocklength, StationarityForm::Printed).rate,
    )
}
