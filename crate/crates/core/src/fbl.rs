//! Normal-approximation error probabilities and effective throughput for the
//! two-user NOMA downlink.
//!
//! A packet of `N` channel uses sent at rate `R` over a link with SINR `γ` is
//! lost with probability `ε ≈ Q(f(γ, N, R))`, where
//! `f = ln2·sqrt(N / (1 − (1+γ)^{-2}))·(log2(1+γ) − R)`.

use std::f64::consts::{LN_2, SQRT_2};

use crate::error::{Error, Result};

/// Gaussian tail `Q(x) = P(Z > x)`, via `Q(x) = erfc(x/√2)/2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Channel dispersion factor `1 − (1+γ)^{-2}`.
///
/// Evaluated as `γ(2+γ)/(1+γ)²`, which has no cancellation for small `γ`.
pub fn dispersion_factor(gamma: f64) -> f64 {
    if gamma.is_infinite() {
        return 1.0;
    }
    let one_plus = 1.0 + gamma;
    gamma * (2.0 + gamma) / (one_plus * one_plus)
}

/// `log2(1+γ)` without loss of precision for small `γ`.
pub fn capacity(gamma: f64) -> f64 {
    gamma.ln_1p() / LN_2
}

/// Scale `ln2·sqrt(N / (1 − (1+γ)^{-2}))` multiplying the rate gap in `f`.
pub fn rate_scale(gamma: f64, blocklength: u32) -> f64 {
    LN_2 * (f64::from(blocklength) / dispersion_factor(gamma)).sqrt()
}

/// Argument `f(γ, N, R)` of the Q-function.
///
/// At `γ = 0` a positive rate is undecodable and `-∞` is returned (so that
/// `Q(f) = 1`); with `R = 0` the limit is `0`.
pub fn dispersion_f(gamma: f64, blocklength: u32, rate: f64) -> f64 {
    debug_assert!(gamma >= 0.0, "negative SINR {gamma}");
    debug_assert!(rate >= 0.0, "negative rate {rate}");
    if gamma <= 0.0 {
        return if rate > 0.0 { f64::NEG_INFINITY } else { 0.0 };
    }
    if gamma.is_infinite() {
        return f64::INFINITY;
    }
    // ln2·(log2(1+γ) − R) = ln(1+γ) − R·ln2
    (f64::from(blocklength) / dispersion_factor(gamma)).sqrt() * (gamma.ln_1p() - rate * LN_2)
}

/// Decoding error probability `ε ≈ Q(f(γ, N, R))`, clamped to `[0, 1]`.
pub fn error_prob(gamma: f64, blocklength: u32, rate: f64) -> f64 {
    q_function(dispersion_f(gamma, blocklength, rate)).clamp(0.0, 1.0)
}

/// Effective throughput `R(1 − ε)` of a link that uses the full block.
pub fn throughput(rate: f64, eps: f64) -> f64 {
    rate * (1.0 - eps.clamp(0.0, 1.0))
}

/// Channel gains and noise powers of the two users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGains {
    pub gain1: f64,
    pub gain2: f64,
    pub noise1: f64,
    pub noise2: f64,
}

impl LinkGains {
    pub fn new(gain1: f64, gain2: f64, noise1: f64, noise2: f64) -> Self {
        Self { gain1, gain2, noise1, noise2 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain1 >= 0.0 && self.gain2 >= 0.0) {
            return Err(Error::invalid("gain", "channel gains must be nonnegative"));
        }
        if !(self.noise1 > 0.0 && self.noise2 > 0.0) {
            return Err(Error::invalid("noise", "noise powers must be positive"));
        }
        Ok(())
    }
}

/// Transmit powers, rates and blocklength chosen by the access point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NomaAllocation {
    pub p1: f64,
    pub p2: f64,
    pub r1: f64,
    pub r2: f64,
    pub blocklength: u32,
}

impl NomaAllocation {
    pub fn validate(&self) -> Result<()> {
        if !(self.p1 >= 0.0 && self.p2 >= 0.0) {
            return Err(Error::invalid("power", "powers must be nonnegative"));
        }
        if !(self.r1 >= 0.0 && self.r2 >= 0.0) {
            return Err(Error::invalid("rate", "rates must be nonnegative"));
        }
        if self.blocklength == 0 {
            return Err(Error::invalid("blocklength", "must be at least 1"));
        }
        Ok(())
    }
}

/// The four SINRs of the downlink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrSet {
    /// Edge-user message at the core user, before SIC.
    pub edge_at_core: f64,
    /// Core-user message at the core user after successful SIC.
    pub core_sic: f64,
    /// Core-user message at the core user when SIC fails.
    pub core_no_sic: f64,
    /// Edge-user message at the edge user.
    pub edge: f64,
}

pub fn sinr_set(gains: &LinkGains, p1: f64, p2: f64) -> SinrSet {
    let LinkGains { gain1: g1, gain2: g2, noise1: n1, noise2: n2 } = *gains;
    SinrSet {
        edge_at_core: g1 * p2 / (g1 * p1 + n1),
        core_sic: g1 * p1 / n1,
        core_no_sic: g1 * p1 / (g1 * p2 + n1),
        edge: g2 * p2 / (g2 * p1 + n2),
    }
}

/// Which expression for the core user's error probability applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SicBranch {
    /// `R1 ≤ log2(1+γ1¹′)`: the core message survives a failed SIC with
    /// probability `1 − ε1¹′`.
    Tolerant,
    /// `log2(1+γ1¹′) < R1 ≤ log2(1+γ1¹)`: a failed SIC loses the packet.
    SicRequired,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkErrorProfile {
    pub eps2_at_1: f64,
    pub eps1_sic: f64,
    pub eps1_nosic: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub branch: SicBranch,
}

impl LinkErrorProfile {
    /// Factor `I` with `ε1 = ε1¹(1 − ε2¹) + I·ε2¹`.
    pub fn indicator(&self) -> f64 {
        match self.branch {
            SicBranch::Tolerant => self.eps1_nosic,
            SicBranch::SicRequired => 1.0,
        }
    }
}

/// Relative slack on the `R1 ≤ log2(1+γ1¹)` domain check.
const DOMAIN_SLACK: f64 = 1e-12;

/// Core user's effective error probability and the branch that produced it.
///
/// Fails with [`Error::RateOutOfDomain`] when `R1 > log2(1+γ1¹)`.
pub fn effective_error_u1(sinr: &SinrSet, blocklength: u32, r1: f64, r2: f64) -> Result<(f64, SicBranch)> {
    let limit = capacity(sinr.core_sic);
    if r1 > limit * (1.0 + DOMAIN_SLACK) + f64::MIN_POSITIVE {
        return Err(Error::RateOutOfDomain { rate: r1, limit });
    }
    let e21 = error_prob(sinr.edge_at_core, blocklength, r2);
    let e11 = error_prob(sinr.core_sic, blocklength, r1);
    if r1 <= capacity(sinr.core_no_sic) {
        let e11p = error_prob(sinr.core_no_sic, blocklength, r1);
        Ok(((e11 * (1.0 - e21) + e11p * e21).clamp(0.0, 1.0), SicBranch::Tolerant))
    } else {
        Ok(((e11 * (1.0 - e21) + e21).clamp(0.0, 1.0), SicBranch::SicRequired))
    }
}

/// All error probabilities of an allocation.
pub fn error_profile(gains: &LinkGains, alloc: &NomaAllocation) -> Result<LinkErrorProfile> {
    let sinr = sinr_set(gains, alloc.p1, alloc.p2);
    let n = alloc.blocklength;
    let (eps1, branch) = effective_error_u1(&sinr, n, alloc.r1, alloc.r2)?;
    Ok(LinkErrorProfile {
        eps2_at_1: error_prob(sinr.edge_at_core, n, alloc.r2),
        eps1_sic: error_prob(sinr.core_sic, n, alloc.r1),
        eps1_nosic: error_prob(sinr.core_no_sic, n, alloc.r1),
        eps1,
        eps2: error_prob(sinr.edge, n, alloc.r2),
        branch,
    })
}

/// Effective throughputs `(T1, T2)` of both users under NOMA (`N_i = N`).
pub fn throughput_pair(gains: &LinkGains, alloc: &NomaAllocation) -> Result<(f64, f64)> {
    let profile = error_profile(gains, alloc)?;
    Ok((throughput(alloc.r1, profile.eps1), throughput(alloc.r2, profile.eps2)))
}
