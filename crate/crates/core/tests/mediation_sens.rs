mod common;

use common::{batch_means, mediation_data, paper, rng, table, MediationTruth};
use confsense_core::estimators::fit_mediation;
use confsense_core::mediation_sens::{acme_given_rho, mediation_bounds, nde_given_rho};
use confsense_core::scm::{build_paper_dgp, simulate};
use confsense_core::DataTable;

const TRUTH: MediationTruth = MediationTruth {
    beta_m: -1.5,
    gamma: 2.0,
    direct: 3.0,
};

#[test]
fn acme_recovers_generative_truth() {
    for (k, rho0) in [-0.5, 0.0, 0.5].into_iter().enumerate() {
        let data = mediation_data(&mut rng(200 + k as u64), 200_000, &TRUTH, rho0);
        let acme = |d: &DataTable| {
            acme_given_rho(&fit_mediation(d, "A", "M", "Y", &[]).unwrap(), rho0).unwrap()
        };
        let nde = |d: &DataTable| {
            nde_given_rho(&fit_mediation(d, "A", "M", "Y", &[]).unwrap(), rho0).unwrap()
        };
        let (_, se) = batch_means(&data, 20, acme);
        let got = acme(&data);
        assert!(
            (got - TRUTH.acme()).abs() < 3.0 * se,
            "rho0 {rho0}: {got} (se {se})"
        );
        let (_, se) = batch_means(&data, 20, nde);
        let got = nde(&data);
        assert!(
            (got - TRUTH.direct).abs() < 3.0 * se,
            "rho0 {rho0}: nde {got} (se {se})"
        );
    }
}

#[test]
fn complement_and_monotonicity() {
    let data = mediation_data(&mut rng(9), 5000, &TRUTH, 0.3);
    let fit = fit_mediation(&data, "A", "M", "Y", &[]).unwrap();
    assert_eq!(acme_given_rho(&fit, fit.rho_tilde).unwrap(), 0.0);
    assert_eq!(nde_given_rho(&fit, fit.rho_tilde).unwrap(), fit.beta_total);
    let grid = mediation_bounds(&fit, 0.9, 19).unwrap();
    assert_eq!(grid.at_zero().rho, 0.0);
    for w in grid.rows.windows(2) {
        // β₂ < 0, so the ACME increases in ρ.
        assert!(w[1].nie > w[0].nie);
    }
    for row in &grid.rows {
        assert!(
            (row.nde + row.nie - fit.beta_total).abs()
                <= f64::EPSILON * row.nde.abs().max(row.nie.abs())
        );
    }
}

#[test]
fn treatment_flip_negates_curves() {
    let data = mediation_data(&mut rng(10), 5000, &TRUTH, 0.3);
    let flipped: Vec<f64> = data.column("A").unwrap().iter().map(|a| 1.0 - a).collect();
    let other = table(vec![
        ("A", flipped),
        ("M", data.column("M").unwrap().to_vec()),
        ("Y", data.column("Y").unwrap().to_vec()),
    ]);
    let f = fit_mediation(&data, "A", "M", "Y", &[]).unwrap();
    let g = fit_mediation(&other, "A", "M", "Y", &[]).unwrap();
    assert!((f.beta_total + g.beta_total).abs() < 1e-10);
    assert!((f.beta_mediator + g.beta_mediator).abs() < 1e-10);
    for rho in [-0.9, -0.3, 0.0, 0.4, 0.8] {
        let (a, b) = (
            acme_given_rho(&f, rho).unwrap(),
            acme_given_rho(&g, rho).unwrap(),
        );
        assert!((a + b).abs() < 1e-10, "{a} {b}");
    }
}

/// Population bounds for the paper model with U_AY and U_IY adjusted, from a 10⁶-row run.
#[test]
fn paper_model_population_bounds() {
    let data = simulate(&build_paper_dgp(), 1_000_000, 5).unwrap();
    let fit = fit_mediation(&data, "A", "M", "Y", &["U_AY", "U_IY"]).unwrap();
    let g = mediation_bounds(&fit, 0.9, 19).unwrap();
    assert!((g.nie.lower - paper::MED_NIE.0).abs() < 0.05, "{:?}", g.nie);
    assert!((g.nie.upper - paper::MED_NIE.1).abs() < 0.05, "{:?}", g.nie);
    assert!((g.nde.lower - paper::MED_NDE.0).abs() < 0.05, "{:?}", g.nde);
    assert!((g.nde.upper - paper::MED_NDE.1).abs() < 0.05, "{:?}", g.nde);
    assert!(g.nie.contains(-3.0) && g.nde.contains(3.0));
}
