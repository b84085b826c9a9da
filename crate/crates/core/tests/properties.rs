use heun_core::closed_forms::{eval_family_negative, eval_sample_family, FamilyParamsNeg};
use heun_core::coincidence::{entropy, eval_f, eval_g, eval_k, eval_k_derivative, k_termwise_derivative};
use heun_core::hypergeom::{coefficient_a, gauss_2f1, gauss_2f1_derivatives, harmonic};
use heun_core::series::{
    eval_confluent_heun, eval_confluent_heun_derivatives, eval_heun_local, eval_heun_local_derivatives,
    heun_slope_at_origin, transform_homotopy,
};
use heun_core::verify::{
    check_identity_a, check_identity_b, check_relation, relation_sides, sweep_identities, Mutation, RelationPoint,
};
use heun_core::{
    ConfluentHeunParams, EntropyKind, ExactInteger, ExactRational, FMethod, GMethod, Gauss2F1Params,
    GeneralHeunParams, RelationId, SeriesOptions,
};
use proptest::prelude::*;

fn opts() -> SeriesOptions {
    SeriesOptions::default()
}

fn scaled(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}

/// Parameters in the randomized ranges used by the relation checker, with
/// a point inside the safe disk.
fn heun_case() -> impl Strategy<Value = (GeneralHeunParams, f64)> {
    (
        prop_oneof![0.3..0.7f64, 1.5..3.0f64, -3.0..-1.5f64],
        -3.0..3.0f64,
        -3.0..3.0f64,
        -3.0..3.0f64,
        0.5..3.0f64,
        0.5..3.0f64,
        -1.0..1.0f64,
    )
        .prop_map(|(a, q, alpha, beta, gamma, delta, t)| {
            let p = GeneralHeunParams::new(a, q, alpha, beta, gamma, delta).unwrap();
            (p, t * 0.45 * a.abs().min(1.0))
        })
}

fn confluent_case() -> impl Strategy<Value = (ConfluentHeunParams, f64)> {
    (
        prop_oneof![-2.0..-0.25f64, 0.25..2.0f64],
        0.5..3.0f64,
        0.0..3.0f64,
        -3.0..3.0f64,
        -5.0..5.0f64,
        -0.45..0.45f64,
    )
        .prop_map(|(p, gamma, delta, alpha, sigma, x)| {
            (ConfluentHeunParams::new(p, gamma, delta, alpha, sigma).unwrap(), x)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn heun_ode_residual((p, x) in heun_case()) {
        let d = eval_heun_local_derivatives(&p, x, &opts()).unwrap();
        prop_assert!(d.converged);
        let (a, eps) = (p.a(), p.epsilon());
        let residual = x * (x - 1.0) * (x - a) * d.second
            + (p.gamma() * (x - 1.0) * (x - a) + p.delta() * x * (x - a) + eps * x * (x - 1.0)) * d.first
            + (p.alpha() * p.beta() * x - p.q()) * d.value;
        let scale = d.value.abs().max(d.first.abs()).max(d.second.abs()).max(1.0);
        prop_assert!(residual.abs() / scale < 1e-8, "residual {residual:e}");
    }

    #[test]
    fn confluent_ode_residual((p, x) in confluent_case()) {
        let d = eval_confluent_heun_derivatives(&p, x, &opts()).unwrap();
        prop_assert!(d.converged);
        let residual = x * (x - 1.0) * d.second
            + (4.0 * p.p() * x * (x - 1.0) + p.gamma() * (x - 1.0) + p.delta() * x) * d.first
            + (4.0 * p.p() * p.alpha() * x - p.sigma()) * d.value;
        let scale = d.value.abs().max(d.first.abs()).max(d.second.abs()).max(1.0);
        prop_assert!(residual.abs() / scale < 1e-8, "residual {residual:e}");
    }

    #[test]
    fn slope_at_origin((p, _) in heun_case()) {
        // Richardson extrapolation of the one-sided difference quotient
        let h = 1e-4 * p.a().abs().min(1.0);
        let quotient = |h: f64| (eval_heun_local(&p, h, &opts()).unwrap().value - 1.0) / h;
        let extrapolated = 2.0 * quotient(h / 2.0) - quotient(h);
        let slope = heun_slope_at_origin(&p);
        prop_assert!(scaled(extrapolated, slope) < 1e-6);
        let d = eval_heun_local_derivatives(&p, 0.0, &opts()).unwrap();
        prop_assert!(scaled(d.first, slope) < 1e-14);
    }

    #[test]
    fn homotopy_invariance((p, x) in heun_case()) {
        let (e, t) = transform_homotopy(&p);
        let lhs = eval_heun_local(&p, x, &opts()).unwrap().value;
        let rhs = (1.0 - x / p.a()).powf(e) * eval_heun_local(&t, x, &opts()).unwrap().value;
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1e-300), "{lhs} vs {rhs}");
    }

    #[test]
    fn out_of_disk_is_refused((p, _) in heun_case(), t in 1.0..2.0f64) {
        let r = p.radius();
        prop_assert!(eval_heun_local(&p, t * r, &opts()).is_err());
        prop_assert!(eval_heun_local(&p, -t * r, &opts()).is_err());
    }

    #[test]
    fn confluent_is_k(n in 1u32..=10, x in 0.0..0.9f64) {
        let nf = n as f64;
        let p = ConfluentHeunParams::new(nf, 1.0, 0.0, 0.5, 2.0 * nf).unwrap();
        let hc = eval_confluent_heun(&p, x, &opts()).unwrap().value;
        let k = eval_k(n, x, &opts()).unwrap().value;
        prop_assert!((hc - k).abs() < 1e-10, "{hc} vs {k}");
    }

    #[test]
    fn indices_are_probabilities(n in 1u32..=30, x in 0.0..1.0f64, y in 0.0..20.0f64) {
        for m in FMethod::ALL {
            let f = eval_f(n, x, m).unwrap();
            prop_assert!(f > 0.0 && f <= 1.0 + 1e-15, "F {m} = {f}");
        }
        for m in GMethod::ALL {
            let g = eval_g(n, y, m, &opts()).unwrap().value;
            prop_assert!(g > 0.0 && g <= 1.0 + 1e-15, "G {m} = {g}");
        }
        let k = eval_k(n, y, &opts()).unwrap().value;
        prop_assert!(k > 0.0 && k <= 1.0);
    }

    #[test]
    fn f_routes_agree(n in 1u32..=40, x in 0.0..=1.0f64) {
        let reference = eval_f(n, x, FMethod::Definitional).unwrap();
        for m in FMethod::ALL {
            let v = eval_f(n, x, m).unwrap();
            prop_assert!((v - reference).abs() <= 1e-12 * reference, "{m}: {v} vs {reference}");
        }
    }

    #[test]
    fn g_routes_agree(n in 1u32..=20, x in 0.0..5.0f64) {
        let reference = eval_g(n, x, GMethod::Definitional, &opts()).unwrap().value;
        for m in GMethod::ALL {
            let v = eval_g(n, x, m, &opts()).unwrap().value;
            prop_assert!((v - reference).abs() <= 1e-10, "{m}: {v} vs {reference}");
        }
    }

    #[test]
    fn k_derivative_routes_agree(n in 1u32..=5, j in 0u32..=4, x in 0.0..=1.0f64) {
        let quad = eval_k_derivative(n, j, x).unwrap().value;
        let termwise = k_termwise_derivative(n, j, x).unwrap();
        prop_assert!(scaled(quad, termwise) < 1e-8, "{quad} vs {termwise}");
    }

    #[test]
    fn entropy_contract(s in 1e-300..=1.0f64) {
        prop_assert_eq!(entropy(s, EntropyKind::Renyi).unwrap(), -s.ln());
        prop_assert_eq!(entropy(s, EntropyKind::Tsallis).unwrap(), 1.0 - s);
        prop_assert!(entropy(-s, EntropyKind::Renyi).is_err());
    }

    #[test]
    fn family_symmetry(n in 1u32..=10, gamma in 0.5..3.0f64, theta in 0.1..3.0f64, x in -0.5..1.5f64) {
        let fp = FamilyParamsNeg::new(n, theta, gamma).unwrap();
        let (a, b) = (eval_family_negative(&fp, x), eval_family_negative(&fp, 1.0 - x));
        prop_assert!(scaled(a, b) < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn sample_family_starts_at_f(n in 1u32..=20, x in -0.45..0.45f64) {
        let s = eval_sample_family(n, 0, x).unwrap();
        let f = eval_f(n, x, FMethod::Established).unwrap();
        prop_assert!(scaled(s, f) < 1e-12);
    }

    #[test]
    fn gauss_increment(a in -3.0..3.0f64, b in -3.0..3.0f64, c in 0.5..4.0f64, x in -0.9..0.9f64) {
        let p = Gauss2F1Params::new(a, b, c).unwrap();
        let d = gauss_2f1_derivatives(&p, x, &opts()).unwrap();
        let up = Gauss2F1Params::new(a + 1.0, b + 1.0, c + 1.0).unwrap();
        let rhs = a * b / c * gauss_2f1(&up, x, &opts()).unwrap().value;
        prop_assert!(scaled(d.first, rhs) < 1e-10, "{} vs {rhs}", d.first);
    }

    #[test]
    fn identities_hold(n in 0u64..=60, t in 0.0..=1.0f64) {
        let k = (t * n as f64).round() as u64;
        prop_assert!(check_identity_a(n, k).unwrap().passed);
        prop_assert!(check_identity_b(n, k).unwrap().passed);
    }

    #[test]
    fn harmonic_steps(n in 1u64..200) {
        let step = harmonic(n) - harmonic(n - 1);
        prop_assert_eq!(step, ExactRational::new(ExactInteger::from(1), ExactInteger::from(n)));
    }

    #[test]
    fn prop_2_1_right_sides_agree(seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let point = heun_core::verify::sample_point(RelationId::Rel2_3, &mut rng);
        let (_, r3) = relation_sides(RelationId::Rel2_3, &point, &opts()).unwrap();
        let (_, r4) = relation_sides(RelationId::Rel2_4, &point, &opts()).unwrap();
        prop_assert!(scaled(r3, r4) < 1e-10, "{r3} vs {r4}");
    }

    #[test]
    fn report_pass_matches_tolerance(seed in any::<u64>(), tol_exp in -16i32..-6) {
        let tol = 10f64.powi(tol_exp);
        for id in [RelationId::Rel2_5, RelationId::Rel4_1, RelationId::Rel5_2] {
            let r = check_relation(id, 5, tol, seed).unwrap();
            prop_assert_eq!(r.passed, r.worst_residual <= tol);
            prop_assert_eq!(r.trials, 5);
        }
    }
}

#[test]
fn every_mutation_is_caught_by_n_10() {
    for m in Mutation::all() {
        assert!(!sweep_identities(10, Some(&m)).passed(), "{m}");
    }
    assert!(sweep_identities(10, None).passed());
}

#[test]
fn coefficient_a_edges() {
    // e_0 = 0 gives a_{j,0} from the harmonic numbers alone
    let zero = ExactRational::from_integer(ExactInteger::from(0));
    assert_eq!(harmonic(0), zero);
    assert_eq!(coefficient_a(0, 0), zero);
    for j in 1..8u64 {
        assert_eq!(coefficient_a(j, 0), ExactRational::new(ExactInteger::from(1), ExactInteger::from(j)));
    }
}

#[test]
fn degenerate_gamma_rejected_at_construction() {
    for g in [0.0, -1.0, -2.0] {
        assert!(GeneralHeunParams::new(0.5, 1.0, 1.0, 1.0, g, 1.0).is_err());
        assert!(ConfluentHeunParams::new(1.0, g, 0.0, 0.5, 1.0).is_err());
    }
    assert!(GeneralHeunParams::new(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
}

#[test]
fn options_validated() {
    assert!(SeriesOptions::new(1, 1e-10).is_err());
    assert!(SeriesOptions::new(10, 0.0).is_err());
    assert!(SeriesOptions::new(10, 1.0).is_err());
    let tight = SeriesOptions::new(3, 1e-15).unwrap();
    let p = GeneralHeunParams::new(0.5, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
    let r = eval_heun_local(&p, 0.4, &tight).unwrap();
    assert!(!r.converged);
    assert!(r.terms_used <= 3);
    assert!(r.error_estimate > 0.0);
}

#[test]
fn relation_point_round_trip() {
    let point = RelationPoint::new(vec![0.5, 1.0, 2.0, 1.0, 1.0, 1.0], 0.2);
    let (l, r) = relation_sides(RelationId::Rel1_9, &point, &opts()).unwrap();
    assert!((l - r).abs() < 1e-10);
}
