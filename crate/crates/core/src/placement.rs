//! Antenna placement by successive convex approximation.
//!
//! Around the current point `u_k` the gain `|h(u)|² = fᴴ(u) W f(u)` with
//! `W = w wᴴ` is bounded below by `2·G(u) − gain(u_k)`, where
//! `G(u) = Re{vᴴ f(u)}` and `v = W f(u_k)`. `G` is in turn bounded below by the
//! concave quadratic
//!
//! ```text
//! G(u_k) + ∇G(u_k)ᵀ(u − u_k) − (δ/2)‖u − u_k‖²,   δ = (8π²/λ²)·Σ|v_p|,
//! ```
//!
//! whose maximiser over the square region is available in closed form. Each
//! step therefore never decreases the gain.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{gain, AntennaPosition, UserChannel};

/// Local model of `G` built at an expansion point.
#[derive(Debug, Clone)]
struct Surrogate {
    /// `|v_p|` and `∠v_p`.
    magnitudes: Vec<f64>,
    phases: Vec<f64>,
    directions: Vec<[f64; 2]>,
    wavenumber: f64,
}

impl Surrogate {
    fn new(channel: &UserChannel, u_k: AntennaPosition) -> Self {
        let v = expansion_vector(channel, u_k);
        Self {
            magnitudes: v.iter().map(|b| b.norm()).collect(),
            phases: v.iter().map(|b| b.arg()).collect(),
            directions: channel.geometry().directions().collect(),
            wavenumber: channel.geometry().wavenumber(),
        }
    }

    /// `Γ_p(u) = (2π/λ)·ρ_pᵀu − ∠v_p` for every path.
    fn phase_terms(&self, u: AntennaPosition) -> impl Iterator<Item = (f64, [f64; 2], f64)> + '_ {
        self.magnitudes
            .iter()
            .zip(&self.directions)
            .zip(&self.phases)
            .map(move |((&m, &d), &ph)| (m, d, self.wavenumber * (u.x * d[0] + u.y * d[1]) - ph))
    }

    fn value(&self, u: AntennaPosition) -> f64 {
        self.phase_terms(u).map(|(m, _, g)| m * g.cos()).sum()
    }

    fn gradient(&self, u: AntennaPosition) -> [f64; 2] {
        let (gx, gy) = self.phase_terms(u).fold((0.0, 0.0), |(gx, gy), (m, d, g)| {
            let s = m * g.sin();
            (gx + s * d[0], gy + s * d[1])
        });
        [-self.wavenumber * gx, -self.wavenumber * gy]
    }

    fn delta(&self) -> f64 {
        2.0 * self.wavenumber * self.wavenumber * self.magnitudes.iter().sum::<f64>()
    }
}

/// `v = W f(u_k) = w·(wᴴ f(u_k))`.
pub fn expansion_vector(channel: &UserChannel, u_k: AntennaPosition) -> Vec<Complex64> {
    let h = channel.response(u_k);
    channel.eprv().iter().map(|w| w * h).collect()
}

/// `G(u) = Re{fᴴ(u_k) W f(u)}`, expanded at `u_k`.
pub fn surrogate_g(channel: &UserChannel, u_k: AntennaPosition, u: AntennaPosition) -> f64 {
    Surrogate::new(channel, u_k).value(u)
}

/// Gradient of [`surrogate_g`] with respect to `u`.
pub fn grad_g(channel: &UserChannel, u_k: AntennaPosition, u: AntennaPosition) -> [f64; 2] {
    Surrogate::new(channel, u_k).gradient(u)
}

/// Curvature constant `δ = (8π²/λ²)·Σ|v_p|`; `δ·I ⪰ ∇²G(u)` for every `u`.
pub fn delta_bound(channel: &UserChannel, u_k: AntennaPosition) -> f64 {
    Surrogate::new(channel, u_k).delta()
}

/// Iterate of the placement solver.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    pub position: AntennaPosition,
    /// `v = W f(u_k)` at `position`.
    pub v: Vec<Complex64>,
    pub gain: f64,
    pub iteration: usize,
}

impl ScaState {
    pub fn at(channel: &UserChannel, position: AntennaPosition, iteration: usize) -> Self {
        Self {
            position,
            v: expansion_vector(channel, position),
            gain: gain(channel, position),
            iteration,
        }
    }
}

/// Quadratic minorant of `G` expanded at `state.position`, evaluated at `u`.
pub fn quadratic_minorant(channel: &UserChannel, state: &ScaState, u: AntennaPosition) -> f64 {
    let s = Surrogate::new(channel, state.position);
    let uk = state.position;
    let g = s.gradient(uk);
    let (dx, dy) = (u.x - uk.x, u.y - uk.y);
    s.value(uk) + g[0] * dx + g[1] * dy - 0.5 * s.delta() * (dx * dx + dy * dy)
}

/// One minorize-maximize step.
///
/// The minorant has Hessian `−δI`, so it is separable in `x` and `y` and the
/// box-constrained maximiser is exactly the componentwise clamp of the
/// unconstrained one, `u_k + ∇G(u_k)/δ`.
pub fn sca_step(channel: &UserChannel, state: &ScaState) -> ScaState {
    let s = Surrogate::new(channel, state.position);
    let delta = s.delta();
    if delta <= 0.0 {
        return ScaState { iteration: state.iteration + 1, ..state.clone() };
    }
    let g = s.gradient(state.position);
    let target = AntennaPosition::new(state.position.x + g[0] / delta, state.position.y + g[1] / delta);
    let next = channel.geometry().clamp(target);
    ScaState::at(channel, next, state.iteration + 1)
}

/// Random restarts on top of the configured initial position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiStart {
    /// Total number of starts, including the initial position.
    pub starts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaConfig {
    pub max_iterations: usize,
    /// Stop once the relative gain improvement of a step drops below this.
    pub convergence_tol: f64,
    pub initial_position: AntennaPosition,
    pub multi_start: Option<MultiStart>,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            convergence_tol: 1e-8,
            initial_position: AntennaPosition::ORIGIN,
            multi_start: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaDiagnostics {
    /// Iterations of the winning run.
    pub iterations: usize,
    pub converged: bool,
    /// Gain after every iteration of the winning run, starting point first.
    pub gain_trace: Vec<f64>,
    pub start: AntennaPosition,
    pub initial_gain: f64,
    /// Best gain of each start, in start order.
    pub start_gains: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub position: AntennaPosition,
    pub gain: f64,
    pub diagnostics: ScaDiagnostics,
}

struct Run {
    state: ScaState,
    trace: Vec<f64>,
    converged: bool,
}

fn ascend(channel: &UserChannel, start: AntennaPosition, config: &ScaConfig) -> Run {
    let mut state = ScaState::at(channel, channel.geometry().clamp(start), 0);
    let mut trace = vec![state.gain];
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let next = sca_step(channel, &state);
        let improvement = next.gain - state.gain;
        trace.push(next.gain);
        let done = state.gain <= 0.0 || improvement <= config.convergence_tol * state.gain;
        if next.gain >= state.gain {
            state = next;
        } else {
            state.iteration = next.iteration;
        }
        if done {
            converged = true;
            break;
        }
    }
    Run { state, trace, converged }
}

/// Maximise the gain over the movable region from `config.initial_position`
/// (plus random restarts when `config.multi_start` is set).
pub fn optimize_position(channel: &UserChannel, config: &ScaConfig) -> Placement {
    let mut starts = vec![config.initial_position];
    if let Some(ms) = config.multi_start {
        let h = channel.geometry().half_width();
        let mut rng = ChaCha8Rng::seed_from_u64(ms.seed);
        starts.extend(
            (1..ms.starts).map(|_| AntennaPosition::new(rng.random_range(-h..=h), rng.random_range(-h..=h))),
        );
    }
    let initial_gain = gain(channel, channel.geometry().clamp(config.initial_position));
    let mut best: Option<(Run, AntennaPosition)> = None;
    let mut start_gains = Vec::with_capacity(starts.len());
    for start in starts {
        let run = ascend(channel, start, config);
        start_gains.push(run.state.gain);
        if best.as_ref().map_or(true, |(b, _)| run.state.gain > b.state.gain) {
            best = Some((run, start));
        }
    }
    let (run, start) = best.expect("at least one start");
    Placement {
        position: run.state.position,
        gain: run.state.gain,
        diagnostics: ScaDiagnostics {
            iterations: run.state.iteration,
            converged: run.converged,
            gain_trace: run.trace,
            start,
            initial_gain,
            start_gains,
        },
    }
}
