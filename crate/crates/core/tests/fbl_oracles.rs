use ma_noma::fbl::{
    capacity, dispersion_f, effective_error_u1, error_prob, error_profile, q_function, sinr_set, throughput_pair,
    LinkGains, NomaAllocation, SicBranch,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn q_function_matches_high_precision_values() {
    let table = [
        (1.0, 0.158_655_253_931_457_051_41),
        (-1.0, 0.841_344_746_068_542_948_59),
        (2.5, 0.006_209_665_325_776_135_167),
        (5.0, 2.866_515_718_791_939_116_7e-7),
        (8.0, 6.220_960_574_271_784_123_5e-16),
        (-8.0, 0.999_999_999_999_999_377_9),
        (0.3, 0.382_088_577_811_047_366_93),
    ];
    for (x, want) in table {
        let got = q_function(x);
        assert!(rel(got, want) < 1e-12, "Q({x}) = {got}, want {want}");
    }
}

#[test]
fn dispersion_f_matches_high_precision_values() {
    let table = [
        (1.0, 100, 0.0, 8.003_774_225_686_291_181, 1e-12),
        (1e-9, 100, 0.0, 0.000_223_606_797_805_880_669_03, 1e-8),
        (3.0, 50, 1.2, 4.049_625_028_947_076_308_4, 1e-12),
        (0.01, 200, 0.005, 0.653_312_844_390_753_630_71, 1e-12),
    ];
    for (g, n, r, want, tol) in table {
        let got = dispersion_f(g, n, r);
        assert!(rel(got, want) < tol, "f({g}, {n}, {r}) = {got}, want {want}");
    }
    let eps = error_prob(1.0, 100, 0.0);
    assert!(rel(eps, 6.033_126_887_406_505_151_9e-16) < 1e-11, "{eps}");
}

#[test]
fn zero_sinr_limits() {
    assert_eq!(error_prob(0.0, 100, 0.5), 1.0);
    assert_eq!(error_prob(0.0, 100, 0.0), 0.5);
}

#[test]
fn sinr_set_matches_hand_fractions() {
    let s = sinr_set(&LinkGains::new(1.0, 0.1, 1.0, 1.0), 10.0, 90.0);
    assert!(rel(s.edge_at_core, 90.0 / 11.0) < 1e-15);
    assert!(rel(s.core_sic, 10.0) < 1e-15);
    assert!(rel(s.core_no_sic, 10.0 / 91.0) < 1e-15);
    assert!(rel(s.edge, 4.5) < 1e-15);
}

#[test]
fn branch_boundary_follows_no_sic_capacity() {
    let s = sinr_set(&LinkGains::new(1.0, 0.1, 1.0, 1.0), 10.0, 90.0);
    let c = capacity(s.core_no_sic);
    assert_eq!(effective_error_u1(&s, 100, c, 0.5).unwrap().1, SicBranch::Tolerant);
    assert_eq!(effective_error_u1(&s, 100, c * 1.001, 0.5).unwrap().1, SicBranch::SicRequired);
    assert!(effective_error_u1(&s, 100, capacity(s.core_sic) * 1.01, 0.5).is_err());
}

fn arb_case() -> impl Strategy<Value = (LinkGains, NomaAllocation)> {
    (1e-3f64..1.0, 1e-4f64..0.1, 0.5f64..0.99, 0.0f64..1.0, 0.0f64..3.0, prop::sample::select(vec![25u32, 100, 400]))
        .prop_map(|(g1, g2, frac, r1_frac, r2, n)| {
            let gains = LinkGains::new(g1, g2, 1.0, 1.0);
            let pmax = 1e4;
            let (p1, p2) = ((1.0 - frac) * pmax, frac * pmax);
            let r1 = r1_frac * capacity(g1 * p1);
            (gains, NomaAllocation { p1, p2, r1, r2, blocklength: n })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn branch_form_and_closed_form_agree((gains, alloc) in arb_case()) {
        let e = error_profile(&gains, &alloc).unwrap();
        let (t1, _) = throughput_pair(&gains, &alloc).unwrap();
        let closed = alloc.r1 * (1.0 - e.eps1_sic + (e.eps1_sic - e.indicator()) * e.eps2_at_1);
        prop_assert!((closed - t1).abs() <= 1e-12 * t1.abs().max(1e-12));
    }

    #[test]
    fn error_prob_is_monotone(g in 1e-4f64..1e3, n in 1u32..1000, r in 0.0f64..10.0, k in 1.0f64..10.0) {
        prop_assert!(error_prob(g * k, n, r) <= error_prob(g, n, r));
        prop_assert!(error_prob(g, n, r * k) >= error_prob(g, n, r));
    }

    #[test]
    fn throughput_is_nondecreasing_in_each_gain((gains, alloc) in arb_case(), k in prop::sample::select(vec![1.1, 2.0, 10.0])) {
        let (t1, t2) = throughput_pair(&gains, &alloc).unwrap();
        let (s1, _) = throughput_pair(&LinkGains { gain1: gains.gain1 * k, ..gains }, &alloc).unwrap();
        let (_, s2) = throughput_pair(&LinkGains { gain2: gains.gain2 * k, ..gains }, &alloc).unwrap();
        prop_assert!(s1 >= t1 - 1e-12 * t1.max(1.0));
        prop_assert!(s2 >= t2 - 1e-12 * t2.max(1.0));
    }

    #[test]
    fn error_probabilities_are_probabilities((gains, alloc) in arb_case()) {
        let e = error_profile(&gains, &alloc).unwrap();
        for p in [e.eps2_at_1, e.eps1_sic, e.eps1_nosic, e.eps1, e.eps2] {
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }
}
