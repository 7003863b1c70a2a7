//! Closed-form methods on summary statistics: E-values and assumption-free
//! bounds for binary outcomes.

use crate::data::DataTable;
use crate::error::{Error, Result};

/// Conversion factor from a standardized mean difference to the risk-ratio
/// scale, `RR ≈ exp(0.91·d)`; imported from the E-value literature.
pub const SMD_TO_LOG_RR: f64 = 0.91;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSummary {
    pub rr_point: f64,
    pub rr_lower: Option<f64>,
    pub rr_upper: Option<f64>,
}

impl RiskSummary {
    pub fn new(rr_point: f64, rr_lower: Option<f64>, rr_upper: Option<f64>) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(rr_point) || rr_lower.is_some_and(|v| !ok(v)) || rr_upper.is_some_and(|v| !ok(v)) {
            return Err(Error::Domain("risk ratios must be finite and > 0".into()));
        }
        if rr_lower.is_some_and(|l| l > rr_point) || rr_upper.is_some_and(|u| u < rr_point) {
            return Err(Error::Domain("need lower ≤ point ≤ upper".into()));
        }
        Ok(Self {
            rr_point,
            rr_lower,
            rr_upper,
        })
    }
}

/// Minimum risk-ratio association with both treatment and outcome that an
/// unmeasured confounder needs to explain away `rr`.
pub fn evalue_point(rr: f64) -> Result<f64> {
    if !(rr.is_finite() && rr > 0.0) {
        return Err(Error::Domain(format!(
            "risk ratio must be finite and > 0, got {rr}"
        )));
    }
    let r = if rr < 1.0 { 1.0 / rr } else { rr };
    Ok(r + (r * (r - 1.0)).sqrt())
}

/// E-values for the point estimate and for the confidence limit closest to 1
/// (1 when the interval covers the null).
pub fn evalue_ci(summary: &RiskSummary) -> Result<(f64, f64)> {
    let (lo, hi) = match (summary.rr_lower, summary.rr_upper) {
        (Some(l), Some(u)) => (l, u),
        _ => return Err(Error::Domain("confidence limits are required".into())),
    };
    let point = evalue_point(summary.rr_point)?;
    let ci = if lo <= 1.0 && hi >= 1.0 {
        1.0
    } else if summary.rr_point > 1.0 {
        evalue_point(lo)?
    } else {
        evalue_point(hi)?
    };
    Ok((point, ci))
}

/// Approximate risk ratio for a standardized mean difference of a continuous outcome.
pub fn rr_from_smd(d: f64) -> f64 {
    (SMD_TO_LOG_RR * d).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AteBounds {
    pub y1: Interval,
    pub y0: Interval,
    pub ate: Interval,
}

fn unchecked_bounds(p_treat: f64, p_y1_t1: f64, p_y1_t0: f64) -> AteBounds {
    let l1 = p_y1_t1 * p_treat;
    let l0 = p_y1_t0 * (1.0 - p_treat);
    let y1 = Interval {
        lower: l1,
        upper: l1 + (1.0 - p_treat),
    };
    let y0 = Interval {
        lower: l0,
        upper: l0 + p_treat,
    };
    let lower = y1.lower - y0.upper;
    AteBounds {
        y1,
        y0,
        ate: Interval {
            lower,
            upper: lower + 1.0,
        },
    }
}

/// Worst-case bounds for a binary outcome from P(A=1), P(Y=1|A=1), P(Y=1|A=0).
pub fn manski_bounds(p_treat: f64, p_y1_t1: f64, p_y1_t0: f64) -> Result<AteBounds> {
    if !(p_treat > 0.0 && p_treat < 1.0) {
        return Err(Error::Domain(format!(
            "p_treat must lie in (0, 1), got {p_treat}"
        )));
    }
    for (name, v) in [("p_y1_t1", p_y1_t1), ("p_y1_t0", p_y1_t0)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain(format!("{name} must lie in [0, 1], got {v}")));
        }
    }
    Ok(unchecked_bounds(p_treat, p_y1_t1, p_y1_t0))
}

/// Manski bounds with the three inputs taken from binary data columns.
pub fn manski_from_data(data: &DataTable, treatment: &str, outcome: &str) -> Result<AteBounds> {
    let (p, p1, p0) = arm_rates(
        data.binary_column(treatment)?,
        data.binary_column(outcome)?,
        |_| true,
    )?;
    manski_bounds(p, p1, p0)
}

fn arm_rates(a: &[f64], y: &[f64], keep: impl Fn(usize) -> bool) -> Result<(f64, f64, f64)> {
    let (mut n, mut n1, mut y1, mut y0) = (0.0, 0.0, 0.0, 0.0);
    for i in (0..a.len()).filter(|&i| keep(i)) {
        n += 1.0;
        if a[i] == 1.0 {
            n1 += 1.0;
            y1 += y[i];
        } else {
            y0 += y[i];
        }
    }
    if n == 0.0 {
        return Err(Error::InvalidData("no rows".into()));
    }
    let n0 = n - n1;
    let rate = |s: f64, m: f64| if m > 0.0 { s / m } else { 0.0 };
    Ok((n1 / n, rate(y1, n1), rate(y0, n0)))
}

/// Bounds computed within each level of a discrete covariate and averaged
/// with the covariate's empirical weights. Strata with a single arm are allowed.
pub fn manski_stratified(
    data: &DataTable,
    treatment: &str,
    outcome: &str,
    covariate: &str,
) -> Result<AteBounds> {
    let a = data.binary_column(treatment)?;
    let y = data.binary_column(outcome)?;
    let x = data.column(covariate)?;
    let mut levels: Vec<f64> = x.to_vec();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let n = x.len() as f64;
    let mut acc = [0.0; 4];
    for level in levels {
        let weight = x.iter().filter(|&&v| v == level).count() as f64 / n;
        let (p, p1, p0) = arm_rates(a, y, |i| x[i] == level)?;
        let b = unchecked_bounds(p, p1, p0);
        for (slot, v) in acc
            .iter_mut()
            .zip([b.y1.lower, b.y1.upper, b.y0.lower, b.y0.upper])
        {
            *slot += weight * v;
        }
    }
    let y1 = Interval {
        lower: acc[0],
        upper: acc[1],
    };
    let y0 = Interval {
        lower: acc[2],
        upper: acc[3],
    };
    let lower = y1.lower - y0.upper;
    Ok(AteBounds {
        y1,
        y0,
        ate: Interval {
            lower,
            upper: lower + 1.0,
        },
    })
}
