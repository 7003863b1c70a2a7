//! Error-correlation sensitivity of natural direct and indirect effects in
//! the linear mediation system.
//!
//! With the treatment's total-effect regression residual ε₁ and the mediator
//! regression residual ε₂, the mediated effect under a correlation ρ between
//! the mediator and outcome structural errors is
//!
//! ```text
//! NIE(ρ) = β₂ (σ₁/σ₂) (ρ̃ − ρ sqrt((1 − ρ̃²)/(1 − ρ²))),   NDE(ρ) = β₁ − NIE(ρ).
//! ```

use crate::error::{Error, Result};
use crate::estimators::MediationFit;
use crate::summary_sens::Interval;

fn check(fit: &MediationFit, rho: f64) -> Result<()> {
    if rho.is_nan() || rho.abs() >= 1.0 {
        return Err(Error::Domain(format!("|rho| must be < 1, got {rho}")));
    }
    if fit.sigma_mediator.is_nan() || fit.sigma_mediator <= 0.0 {
        return Err(Error::DegenerateOutcome(
            "mediator residual sd is zero".into(),
        ));
    }
    Ok(())
}

/// Average causal mediation effect (NIE) at error correlation ρ.
pub fn acme_given_rho(fit: &MediationFit, rho: f64) -> Result<f64> {
    check(fit, rho)?;
    let rt = fit.rho_tilde;
    let shrink = ((1.0 - rt * rt) / (1.0 - rho * rho)).sqrt();
    Ok(fit.beta_mediator * (fit.sigma_total / fit.sigma_mediator) * (rt - rho * shrink))
}

/// Natural direct effect at ρ, the complement of the ACME in the total effect.
pub fn nde_given_rho(fit: &MediationFit, rho: f64) -> Result<f64> {
    Ok(fit.beta_total - acme_given_rho(fit, rho)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediationRow {
    pub rho: f64,
    pub nie: f64,
    pub nde: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoGridResult {
    pub rho_max: f64,
    pub n_points: usize,
    /// ρ strictly increasing; the middle row is ρ = 0.
    pub rows: Vec<MediationRow>,
    pub nie: Interval,
    pub nde: Interval,
    pub total: f64,
}

impl RhoGridResult {
    pub fn at_zero(&self) -> MediationRow {
        self.rows[self.n_points / 2]
    }
}

/// Both curves on the symmetric grid of `n_points` (odd) values in `[−ρ_max, ρ_max]`.
pub fn mediation_bounds(
    fit: &MediationFit,
    rho_max: f64,
    n_points: usize,
) -> Result<RhoGridResult> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::Domain(format!(
            "rho_max must lie in (0, 1), got {rho_max}"
        )));
    }
    if n_points < 3 || n_points.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "n_points must be odd and ≥ 3, got {n_points}"
        )));
    }
    let last = (n_points - 1) as f64;
    let rows = (0..n_points)
        .map(|i| {
            let rho = rho_max * (2.0 * i as f64 - last) / last;
            let nie = acme_given_rho(fit, rho)?;
            Ok(MediationRow {
                rho,
                nie,
                nde: fit.beta_total - nie,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let range = |f: fn(&MediationRow) -> f64| Interval {
        lower: rows.iter().map(f).fold(f64::INFINITY, f64::min),
        upper: rows.iter().map(f).fold(f64::NEG_INFINITY, f64::max),
    };
    Ok(RhoGridResult {
        rho_max,
        n_points,
        nie: range(|r| r.nie),
        nde: range(|r| r.nde),
        rows,
        total: fit.beta_total,
    })
}
