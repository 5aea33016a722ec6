//! Randomised invariant checks behind `ma-noma selftest`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alloc::{solve_noma, AllocConfig, AllocProblem};
use crate::channel::{frv, gain, sample_channel_pair, AntennaPosition, ChannelParams, UserChannel};
use crate::experiments::trial_seed;
use crate::fbl::{error_profile, throughput_pair, LinkGains, NomaAllocation};
use crate::placement::{delta_bound, grad_g, optimize_position, surrogate_g, ScaConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub detail: String,
}

fn random_position<R: Rng>(rng: &mut R, ch: &UserChannel) -> AntennaPosition {
    let h = ch.geometry().half_width();
    AntennaPosition::new(rng.random_range(-h..=h), rng.random_range(-h..=h))
}

fn check(name: &'static str, worst: f64, limit: f64) -> Check {
    Check { name, passed: worst <= limit, detail: format!("worst {worst:.3e} (limit {limit:.0e})") }
}

/// Run every check on `instances` random channel pairs.
pub fn run(instances: usize, seed: u64) -> Vec<Check> {
    let params = ChannelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let channels: Vec<UserChannel> = (0..instances as u64)
        .filter_map(|i| sample_channel_pair(trial_seed(seed, i), &params).ok())
        .flat_map(|(c, e)| [c, e])
        .collect();

    let mut modulus = 0.0f64;
    let mut l1 = 0.0f64;
    let mut quad_form = 0.0f64;
    let mut minorant = 0.0f64;
    let mut grad = 0.0f64;
    let mut hessian = 0.0f64;
    let mut monotone = 0.0f64;
    for ch in &channels {
        let bound = ch.l1_norm().powi(2);
        let uk = random_position(&mut rng, ch);
        let gk = gain(ch, uk);
        for _ in 0..20 {
            let u = random_position(&mut rng, ch);
            let f = frv(ch.geometry(), u);
            modulus = f.iter().map(|c| (c.norm() - 1.0).abs()).fold(modulus, f64::max);
            let g = gain(ch, u);
            l1 = l1.max((g - bound) / bound);
            // fᴴ (w wᴴ) f summed entrywise.
            let w = ch.eprv();
            let mut q = num_complex::Complex64::new(0.0, 0.0);
            for (i, fi) in f.iter().enumerate() {
                for (j, fj) in f.iter().enumerate() {
                    q += fi.conj() * w[i] * w[j].conj() * fj;
                }
            }
            quad_form = quad_form.max((q.re - g).abs() / g.max(1e-300));
            minorant = minorant.max(2.0 * surrogate_g(ch, uk, u) - gk - g);

            let h = 1e-6 * ch.geometry().wavelength();
            let gr = grad_g(ch, uk, u);
            let fd = [
                (surrogate_g(ch, uk, AntennaPosition::new(u.x + h, u.y)) - surrogate_g(ch, uk, AntennaPosition::new(u.x - h, u.y))) / (2.0 * h),
                (surrogate_g(ch, uk, AntennaPosition::new(u.x, u.y + h)) - surrogate_g(ch, uk, AntennaPosition::new(u.x, u.y - h))) / (2.0 * h),
            ];
            let scale = gr[0].hypot(gr[1]).max(1e-3 * delta_bound(ch, uk) * h);
            grad = grad.max((gr[0] - fd[0]).hypot(gr[1] - fd[1]) / scale);

            let hh = 1e-4 * ch.geometry().wavelength();
            let gxx = |a: AntennaPosition| grad_g(ch, uk, a);
            let dx = gxx(AntennaPosition::new(u.x + hh, u.y));
            let mx = gxx(AntennaPosition::new(u.x - hh, u.y));
            let dy = gxx(AntennaPosition::new(u.x, u.y + hh));
            let my = gxx(AntennaPosition::new(u.x, u.y - hh));
            let (a, b, c) = ((dx[0] - mx[0]) / (2.0 * hh), 0.5 * ((dx[1] - mx[1]) + (dy[0] - my[0])) / (2.0 * hh), (dy[1] - my[1]) / (2.0 * hh));
            let spectral = 0.5 * (a + c).abs() + (0.25 * (a - c).powi(2) + b * b).sqrt();
            hessian = hessian.max(spectral - delta_bound(ch, uk));
        }
        let p = optimize_position(ch, &ScaConfig::default());
        monotone = p.diagnostics.gain_trace.windows(2).map(|w| w[0] - w[1]).fold(monotone, f64::max);
    }

    let mut gain_monotone = 0.0f64;
    let mut t1_forms = 0.0f64;
    let mut feasibility = 0.0f64;
    for _ in 0..instances {
        let gains = LinkGains::new(rng.random_range(0.01..0.2), rng.random_range(0.001..0.05), 1.0, 1.0);
        let pmax = 1e6;
        let p2 = rng.random_range(0.5..0.95) * pmax;
        let alloc = NomaAllocation {
            p1: pmax - p2,
            p2,
            r1: rng.random_range(0.0..12.0),
            r2: rng.random_range(0.0..2.0),
            blocklength: 100,
        };
        let Ok((t1, t2)) = throughput_pair(&gains, &alloc) else { continue };
        for k in [1.1, 2.0, 10.0] {
            if let Ok((s1, _)) = throughput_pair(&LinkGains { gain1: gains.gain1 * k, ..gains }, &alloc) {
                gain_monotone = gain_monotone.max(t1 - s1);
            }
            if let Ok((_, s2)) = throughput_pair(&LinkGains { gain2: gains.gain2 * k, ..gains }, &alloc) {
                gain_monotone = gain_monotone.max(t2 - s2);
            }
        }
        if let Ok(e) = error_profile(&gains, &alloc) {
            let closed = alloc.r1 * (1.0 - e.eps1_sic + (e.eps1_sic - e.indicator()) * e.eps2_at_1);
            t1_forms = t1_forms.max((closed - t1).abs() / t1.abs().max(1e-300));
        }
        let problem = AllocProblem { gains, pmax, blocklength: 100, t0: 1.0 };
        if let Ok(s) = solve_noma(&problem, &AllocConfig::default()) {
            feasibility = feasibility.max((s.t2 - 1.0).abs());
        }
    }

    vec![
        check("frv_unit_modulus", modulus, 1e-12),
        check("gain_l1_bound", l1, 1e-9),
        check("gain_quadratic_form", quad_form, 1e-10),
        check("surrogate_global_lower_bound", minorant, 1e-9),
        check("surrogate_gradient_vs_central_difference", grad, 1e-6),
        check("delta_dominates_hessian", hessian, 0.0),
        check("sca_gain_monotone", monotone, 1e-9),
        check("throughput_monotone_in_gain", gain_monotone, 1e-12),
        check("t1_branch_forms_agree", t1_forms, 1e-12),
        check("noma_edge_constraint_active", feasibility, 1e-6),
    ]
}
