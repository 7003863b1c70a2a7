//! Gaussian-copula ρ sensitivity for the effect of a binary treatment on a
//! continuous outcome.
//!
//! Treatment is `1(η > z_c)` for a standard-normal index η, with
//! `z_c = Φ⁻¹(1 − p)`. The outcome's structural residual ε has correlation ρ
//! with η, which biases the difference in means by
//!
//! ```text
//! bias(ρ) = ρ · σ_ε · φ(z_c) / (p (1 − p)),      τ(ρ) = τ̂ − bias(ρ).
//! ```
//!
//! In [`CopulaMode::Naive`] σ_ε is the pooled within-arm sd `s`. In
//! [`CopulaMode::Exact`] σ_ε is backed out of `s` using the variances of the
//! truncated index in each arm, `s² = σ_ε² (1 + ρ² c)` with
//! `c = p (v₁ − 1) + (1 − p)(v₀ − 1)`.

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::estimators::{mean, sum_sq_dev};
use crate::normal;

/// Observational inputs of the copula model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaSummary {
    /// Difference in means.
    pub tau_unadj: f64,
    /// Treated fraction.
    pub p: f64,
    /// Pooled within-arm residual sd of the outcome.
    pub s: f64,
    pub n: usize,
}

impl CopulaSummary {
    pub fn new(tau_unadj: f64, p: f64, s: f64, n: usize) -> Result<Self> {
        if !tau_unadj.is_finite() {
            return Err(Error::Domain("tau_unadj must be finite".into()));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p must lie in (0, 1), got {p}")));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::DegenerateOutcome(format!(
                "within-arm sd must be > 0, got {s}"
            )));
        }
        Ok(Self { tau_unadj, p, s, n })
    }

    /// `z_c = Φ⁻¹(1 − p)`.
    pub fn z_c(&self) -> f64 {
        normal::quantile(1.0 - self.p)
    }

    /// Bias per unit of ρ·σ_ε: `φ(z_c) / (p (1 − p))`.
    fn slope(&self) -> f64 {
        normal::pdf(self.z_c()) / (self.p * (1.0 - self.p))
    }

    /// `c` in `s² = σ_ε² (1 + ρ² c)`; always negative.
    fn variance_shrink(&self) -> f64 {
        let z = self.z_c();
        let phi = normal::pdf(z);
        let l1 = phi / self.p;
        let l0 = -phi / (1.0 - self.p);
        let v1 = 1.0 + z * l1 - l1 * l1;
        let v0 = 1.0 + z * l0 - l0 * l0;
        self.p * (v1 - 1.0) + (1.0 - self.p) * (v0 - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CopulaMode {
    /// σ_ε = s.
    Naive,
    /// σ_ε corrected for truncation of the index.
    #[default]
    Exact,
}

/// Difference in means, treated share and pooled within-arm sd (divisor n − 2).
pub fn summarize_for_copula(
    data: &DataTable,
    treatment: &str,
    outcome: &str,
) -> Result<CopulaSummary> {
    let a = data.binary_column(treatment)?;
    let y = data.column(outcome)?;
    let (mut one, mut zero) = (Vec::new(), Vec::new());
    for (&ai, &yi) in a.iter().zip(y) {
        if ai == 1.0 {
            one.push(yi)
        } else {
            zero.push(yi)
        }
    }
    for (arm, level) in [(&zero, 0u8), (&one, 1u8)] {
        if arm.is_empty() {
            return Err(Error::DegenerateArm {
                column: treatment.to_string(),
                level,
            });
        }
    }
    let n = a.len();
    if n < 3 {
        return Err(Error::InvalidData("need at least 3 rows".into()));
    }
    let ss = sum_sq_dev(&one) + sum_sq_dev(&zero);
    let s = (ss / (n - 2) as f64).sqrt();
    CopulaSummary::new(mean(&one) - mean(&zero), one.len() as f64 / n as f64, s, n)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho.is_nan() || rho.abs() >= 1.0 {
        return Err(Error::Domain(format!("|rho| must be < 1, got {rho}")));
    }
    Ok(())
}

fn sigma_eps(summary: &CopulaSummary, rho: f64, mode: CopulaMode) -> f64 {
    match mode {
        CopulaMode::Naive => summary.s,
        CopulaMode::Exact => summary.s / (1.0 + rho * rho * summary.variance_shrink()).sqrt(),
    }
}

/// Confounding bias at ρ.
pub fn bias_given_rho(summary: &CopulaSummary, rho: f64, mode: CopulaMode) -> Result<f64> {
    check_rho(rho)?;
    Ok(rho * sigma_eps(summary, rho, mode) * summary.slope())
}

/// τ(ρ).
pub fn ace_given_rho(summary: &CopulaSummary, rho: f64, mode: CopulaMode) -> Result<f64> {
    Ok(summary.tau_unadj - bias_given_rho(summary, rho, mode)?)
}

/// The ρ at which τ(ρ) = 0, or `None` when it lies outside (−1, 1).
pub fn rho_nullifying(summary: &CopulaSummary, mode: CopulaMode) -> Option<f64> {
    if summary.tau_unadj == 0.0 {
        return Some(0.0);
    }
    // g = ρ σ_ε(ρ) / s
    let g = summary.tau_unadj / (summary.s * summary.slope());
    let rho = match mode {
        CopulaMode::Naive => g,
        CopulaMode::Exact => {
            g.signum() * (g * g / (1.0 - summary.variance_shrink() * g * g)).sqrt()
        }
    };
    (rho.abs() < 1.0).then_some(rho)
}

/// `(τ(ρ_max), τ(−ρ_max))`, the extremes of τ over `[−ρ_max, ρ_max]`.
pub fn ace_bounds(summary: &CopulaSummary, rho_max: f64, mode: CopulaMode) -> Result<(f64, f64)> {
    if !(rho_max > 0.0 && rho_max < 1.0) {
        return Err(Error::Domain(format!(
            "rho_max must lie in (0, 1), got {rho_max}"
        )));
    }
    Ok((
        ace_given_rho(summary, rho_max, mode)?,
        ace_given_rho(summary, -rho_max, mode)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoCurve {
    pub mode: CopulaMode,
    /// `(ρ, τ(ρ))`, ρ increasing.
    pub points: Vec<(f64, f64)>,
    pub rho_star: Option<f64>,
    pub bounds: (f64, f64),
}

/// τ(ρ) on `n_points` evenly spaced values of `[−ρ_max, ρ_max]`.
pub fn rho_curve(
    summary: &CopulaSummary,
    rho_max: f64,
    n_points: usize,
    mode: CopulaMode,
) -> Result<RhoCurve> {
    if n_points < 2 {
        return Err(Error::Domain("need at least 2 points".into()));
    }
    let bounds = ace_bounds(summary, rho_max, mode)?;
    let last = (n_points - 1) as f64;
    let points = (0..n_points)
        .map(|i| {
            let rho = rho_max * (2.0 * i as f64 - last) / last;
            ace_given_rho(summary, rho, mode).map(|t| (rho, t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RhoCurve {
        mode,
        points,
        rho_star: rho_nullifying(summary, mode),
        bounds,
    })
}
