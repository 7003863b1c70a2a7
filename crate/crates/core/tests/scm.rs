mod common;

use common::paper;
use confsense_core::scm::{build_paper_dgp, path_trace_effect, simulate, truth_with, TruthOptions};
use confsense_core::{EstimandKind, EstimandQuery, ScmSpec, TruthMethod};

fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn paper_model_marginals() {
    let data = simulate(&build_paper_dgp(), 1_000_000, 1).unwrap();
    let (ma, sa) = mean_se(data.column("A").unwrap());
    assert!((ma - paper::P_TREATED).abs() < 3.0 * sa, "{ma}");
    let (mi, si) = mean_se(data.column("I").unwrap());
    assert!((mi - paper::P_INSTRUMENT).abs() < 3.0 * si, "{mi}");
    for u in ["U_IY", "U_AY", "U_MY"] {
        let (m, _) = mean_se(data.column(u).unwrap());
        assert!(m.abs() < 4.0 / 1000.0, "{u} {m}");
    }
}

fn mc(spec: &ScmSpec, q: &EstimandQuery, seed: u64) -> (f64, f64) {
    let r = truth_with(
        spec,
        q,
        TruthOptions {
            n_mc: 400_000,
            seed,
            method: Some(TruthMethod::MonteCarlo),
        },
    )
    .unwrap();
    (r.value, r.mc_std_error)
}

#[test]
fn path_trace_values_are_exact() {
    let spec = build_paper_dgp();
    assert_eq!(path_trace_effect(&spec, "A", "M").unwrap(), -1.5);
    assert_eq!(path_trace_effect(&spec, "M", "Y").unwrap(), 2.0);
    let q = |k| EstimandQuery::new(k, "A", "Y").with_mediator("M");
    let pt = |k| {
        truth_with(
            &spec,
            &q(k),
            TruthOptions {
                n_mc: 0,
                seed: 0,
                method: Some(TruthMethod::PathTrace),
            },
        )
        .unwrap()
        .value
    };
    assert_eq!(pt(EstimandKind::Ace), 0.0);
    assert_eq!(pt(EstimandKind::Nde), 3.0);
    assert_eq!(pt(EstimandKind::Nie), -3.0);
}

#[test]
fn monte_carlo_agrees_with_path_trace() {
    let spec = build_paper_dgp();
    for (k, want) in [
        (EstimandKind::Ace, 0.0),
        (EstimandKind::Nde, 3.0),
        (EstimandKind::Nie, -3.0),
    ] {
        let (v, se) = mc(
            &spec,
            &EstimandQuery::new(k, "A", "Y").with_mediator("M"),
            17,
        );
        assert!((v - want).abs() <= 3.0 * se + 1e-9, "{k:?}: {v} (se {se})");
    }
    let (v, se) = mc(&spec, &EstimandQuery::new(EstimandKind::Ace, "A", "M"), 18);
    assert!((v + 1.5).abs() <= 3.0 * se + 1e-9);
}

#[test]
fn decomposition_holds_under_monte_carlo() {
    let spec = build_paper_dgp();
    let q = |k| EstimandQuery::new(k, "A", "Y").with_mediator("M");
    let (nde, s1) = mc(&spec, &q(EstimandKind::Nde), 31);
    let (nie, s2) = mc(&spec, &q(EstimandKind::Nie), 32);
    let (tot, s3) = mc(&spec, &q(EstimandKind::Total), 33);
    let se = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
    assert!((nde + nie - tot).abs() <= 3.0 * se + 1e-9);
}

#[test]
fn late_refuses_exclusion_violation_and_recovers_when_restored() {
    let spec = build_paper_dgp();
    let q = EstimandQuery::new(EstimandKind::Late, "A", "Y").with_instrument("I");
    assert!(matches!(
        truth_with(
            &spec,
            &q,
            TruthOptions {
                n_mc: 10_000,
                seed: 1,
                method: None
            }
        ),
        Err(confsense_core::Error::LateExclusionViolated { .. })
    ));
    let restored = spec.with_edge("U_IY", "Y", 0.0).unwrap();
    let r = truth_with(
        &restored,
        &q,
        TruthOptions {
            n_mc: 400_000,
            seed: 2,
            method: None,
        },
    )
    .unwrap();
    // Constant effect 3 + 2·(−1.5) = 0 for every complier.
    assert!(r.value.abs() <= 3.0 * r.mc_std_error + 1e-9);
}

#[test]
fn spec_file_round_trips() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs/paper_dgp.toml");
    let text = std::fs::read_to_string(path).unwrap();
    let spec = ScmSpec::from_toml(&text).unwrap();
    assert_eq!(spec, build_paper_dgp());
    assert_eq!(ScmSpec::from_toml(&spec.to_toml()).unwrap(), spec);
}
