use confsense_core::copula_sens::{ace_given_rho, bias_given_rho, CopulaMode, CopulaSummary};
use confsense_core::estimators::{OlsFit, INTERCEPT};
use confsense_core::mediation_sens::{acme_given_rho, mediation_bounds};
use confsense_core::ovb::{adjusted_estimate, robustness_value, Direction, OvbParams};
use confsense_core::registry::{
    builtin_registry, recommend, Choice, ConfounderPosition, Estimand, FunctionalClass, Metric,
    ValueType, WorkflowAnswers,
};
use confsense_core::scm::{build_paper_dgp, simulate};
use confsense_core::summary_sens::{evalue_point, manski_bounds};
use confsense_core::MediationFit;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn fit(est: f64, se: f64, df: usize) -> OlsFit {
    OlsFit {
        names: vec![INTERCEPT.into(), "a".into()],
        coef: vec![0.0, est],
        std_error: vec![1.0, se],
        t_stat: vec![0.0, est / se],
        resid_sd: 1.0,
        df,
        r2: 0.0,
        n: df + 2,
    }
}

fn mediation_fit() -> impl Strategy<Value = MediationFit> {
    (
        -5.0..5.0f64,
        -3.0..3.0f64,
        0.1..5.0f64,
        0.1..5.0f64,
        -0.95..0.95f64,
    )
        .prop_map(|(b1, b2, s1, s2, rt)| MediationFit {
            beta_total: b1,
            beta_mediator: b2,
            beta_direct: 0.0,
            gamma: 0.0,
            sigma_total: s1,
            sigma_mediator: s2,
            rho_tilde: rt,
            n: 100,
        })
}

fn choice<T: Clone + std::fmt::Debug + 'static>(
    all: &'static [T],
) -> impl Strategy<Value = Choice<T>> {
    prop_oneof![
        Just(Choice::Any),
        subsequence(all.to_vec(), 1..=all.len()).prop_map(Choice::Only),
    ]
}

fn answers() -> impl Strategy<Value = WorkflowAnswers> {
    (
        choice(Estimand::ALL),
        choice(ConfounderPosition::ALL),
        choice(Metric::ALL),
        prop::sample::select(ValueType::ALL),
        choice(FunctionalClass::ALL),
        any::<bool>(),
        prop::sample::select(ValueType::ALL),
        any::<bool>(),
        1u32..4,
        any::<bool>(),
    )
        .prop_map(|(e, p, m, o, c, cov, u, prior, count, free)| {
            let mut a = WorkflowAnswers::wildcard();
            a.step1.estimands = e;
            a.step2.position = p;
            a.step3.metrics = m;
            a.step3.outcome = o;
            a.step6.classes = c;
            a.step4.covariate_adjustment = cov;
            a.step5.u_type = u;
            a.step5.distribution_prior = prior;
            a.step5.count = count;
            a.step5.assumption_free = free;
            a
        })
}

proptest! {
    #[test]
    fn evalue_inversion_and_monotone(rr in 1.0..50.0f64, d in 0.001..5.0f64) {
        // Exact only where the reciprocal round-trips in floating point.
        if 1.0 / (1.0 / rr) == rr {
            prop_assert_eq!(evalue_point(rr).unwrap(), evalue_point(1.0 / rr).unwrap());
        } else {
            prop_assert!((evalue_point(rr).unwrap() - evalue_point(1.0 / rr).unwrap()).abs() <= 4.0 * f64::EPSILON * rr);
        }
        prop_assert!(evalue_point(rr + d).unwrap() > evalue_point(rr).unwrap());
    }

    #[test]
    fn manski_width_is_one(p in 0.001..0.999f64, p1 in 0.0..=1.0f64, p0 in 0.0..=1.0f64) {
        let b = manski_bounds(p, p1, p0).unwrap();
        prop_assert_eq!(b.ate.width(), 1.0);
        prop_assert!(b.y1.lower >= 0.0 && b.y1.upper <= 1.0 + 1e-15);
    }

    #[test]
    fn copula_zero_and_antisymmetry(tau in -10.0..10.0f64, p in 0.02..0.98f64, s in 0.1..10.0f64, rho in 0.0..0.99f64) {
        let sm = CopulaSummary::new(tau, p, s, 100).unwrap();
        for mode in [CopulaMode::Naive, CopulaMode::Exact] {
            prop_assert_eq!(ace_given_rho(&sm, 0.0, mode).unwrap(), tau);
            prop_assert_eq!(bias_given_rho(&sm, -rho, mode).unwrap(), -bias_given_rho(&sm, rho, mode).unwrap());
        }
    }

    #[test]
    fn mediation_complement_and_root(f in mediation_fit(), rho_max in 0.05..0.99f64) {
        prop_assert_eq!(acme_given_rho(&f, f.rho_tilde).unwrap(), 0.0);
        let g = mediation_bounds(&f, rho_max, 21).unwrap();
        prop_assert_eq!(g.at_zero().rho, 0.0);
        for row in &g.rows {
            let tol = f64::EPSILON * row.nde.abs().max(row.nie.abs());
            prop_assert!((row.nde + row.nie - f.beta_total).abs() <= tol);
        }
        if f.beta_mediator != 0.0 {
            for w in g.rows.windows(2) {
                prop_assert_eq!((w[1].nie - w[0].nie).signum(), -f.beta_mediator.signum());
            }
        }
    }

    #[test]
    fn ovb_monotone(est in 0.1..10.0f64, se in 0.01..2.0f64, df in 10usize..5000, a in 0.0..0.9f64, b in 0.0..0.9f64, d in 0.001..0.09f64) {
        let f = fit(est, se, df);
        let adj = |yu, au| adjusted_estimate(&f, "a", OvbParams::new(yu, au).unwrap(), Direction::Positive).unwrap();
        prop_assert!(adj(a + d, b) <= adj(a, b));
        prop_assert!(adj(a, b + d) <= adj(a, b));
        let rv = |q| robustness_value(&f, "a", q).unwrap();
        prop_assert!(rv(0.5) <= rv(1.0));
        let g = fit(est + 1.0, se, df);
        prop_assert!(robustness_value(&g, "a", 1.0).unwrap() >= rv(1.0));
    }

    #[test]
    fn recommendation_invariants(a in answers()) {
        let reg = builtin_registry();
        let rec = recommend(&a, &reg).unwrap();
        prop_assert_eq!(rec.ranked.len() + rec.excluded.len(), reg.methods.len());
        for m in &rec.ranked {
            prop_assert!(!rec.excluded.iter().any(|e| e.id == m.id));
        }
        // Ranking order is the documented key.
        for w in rec.ranked.windows(2) {
            let key = |m: &confsense_core::registry::RankedMethod| {
                (!m.implemented_here, m.unmet.len(), std::cmp::Reverse(m.year), m.id.clone())
            };
            prop_assert!(key(&w[0]) < key(&w[1]));
        }
        let mut relaxed = a.clone();
        relaxed.step6.classes = Choice::Any;
        relaxed.step2.position = Choice::Any;
        let more = recommend(&relaxed, &reg).unwrap();
        for m in &rec.ranked {
            prop_assert!(more.ranked.iter().any(|r| r.id == m.id));
        }
        prop_assert_eq!(rec, recommend(&a, &reg).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn simulation_prefix_stable(seed in any::<u64>(), n in 1usize..6000) {
        let spec = build_paper_dgp();
        let long = simulate(&spec, n + 5000, seed).unwrap();
        let short = simulate(&spec, n, seed).unwrap();
        for (a, b) in long.columns().iter().zip(short.columns()) {
            prop_assert_eq!(&a[..n], &b[..]);
        }
    }
}
