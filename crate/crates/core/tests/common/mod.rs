//! Brute-force oracles shared by the integration targets.
#![allow(dead_code)]

use ma_noma::alloc::{p2_lower_bound, AllocConfig, AllocProblem};
use ma_noma::channel::{gain, sample_channel_pair, AntennaPosition, ChannelParams, UserChannel};
use ma_noma::fbl::{capacity, error_prob, rate_scale, sinr_set, throughput, throughput_pair, LinkGains, NomaAllocation};

pub const PMAX: f64 = 1e6;

pub fn t_single(gamma: f64, n: u32, r: f64) -> f64 {
    throughput(r, error_prob(gamma, n, r))
}

/// Feasible problems built from sampled channels at the origin.
pub fn problems(count: usize, blocklength: u32, t0: f64) -> Vec<AllocProblem> {
    let params = ChannelParams::default();
    (0u64..)
        .filter_map(|s| {
            let (c, e) = sample_channel_pair(500 + s, &params).ok()?;
            let gains = LinkGains::new(gain(&c, AntennaPosition::ORIGIN), gain(&e, AntennaPosition::ORIGIN), 1.0, 1.0);
            let p = AllocProblem { gains, pmax: PMAX, blocklength, t0 };
            p2_lower_bound(&p, &AllocConfig::default()).ok().map(|_| p)
        })
        .take(count)
        .collect()
}

/// Argmax rate, max throughput and grid step of `R(1 − ε)` over `points`
/// rates in `[0, C + 10/scale]`.
pub fn grid_peak(gamma: f64, n: u32, points: usize) -> (f64, f64, f64) {
    let hi = capacity(gamma) + 10.0 / rate_scale(gamma, n);
    let step = hi / (points - 1) as f64;
    let (i, t) = (0..points)
        .map(|i| (i, t_single(gamma, n, i as f64 * step)))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    (i as f64 * step, t, step)
}

/// Smaller root of `T(R) = target` by plain bisection on `[0, peak_rate]`.
pub fn reference_root(gamma: f64, n: u32, target: f64, peak_rate: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, peak_rate);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_single(gamma, n, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Best core throughput over a `P2 × R2 × R1` grid subject to `T2 ≥ T0`.
pub fn grid_noma(p: &AllocProblem, np2: usize, nr2: usize, nr1: usize) -> f64 {
    let n = p.blocklength;
    let pmax = p.pmax;
    let mut best = 0.0f64;
    for i in 0..np2 {
        let p2 = pmax * i as f64 / (np2 - 1) as f64;
        let sinr = sinr_set(&p.gains, pmax - p2, p2);
        let r2_hi = capacity(sinr.edge) + 10.0 / rate_scale(sinr.edge.max(1e-300), n);
        let c1 = capacity(sinr.core_sic);
        for j in 0..nr2 {
            let r2 = r2_hi * j as f64 / (nr2 - 1) as f64;
            if t_single(sinr.edge, n, r2) < p.t0 {
                continue;
            }
            for k in 0..nr1 {
                let alloc = NomaAllocation { p1: pmax - p2, p2, r1: c1 * k as f64 / (nr1 - 1) as f64, r2, blocklength: n };
                if let Ok((t1, _)) = throughput_pair(&p.gains, &alloc) {
                    best = best.max(t1);
                }
            }
        }
    }
    best
}

/// Best gain over a square grid of spacing `step` covering the region.
pub fn grid_gain(ch: &UserChannel, step: f64) -> f64 {
    let h = ch.geometry().half_width();
    let n = (2.0 * h / step).round() as usize;
    let mut best = 0.0f64;
    for i in 0..=n {
        for j in 0..=n {
            let u = AntennaPosition::new(-h + 2.0 * h * i as f64 / n as f64, -h + 2.0 * h * j as f64 / n as f64);
            best = best.max(gain(ch, u));
        }
    }
    best
}
