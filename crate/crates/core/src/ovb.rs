//! Omitted-variable bias on the partial-R² scale.
//!
//! For a regression `Y ~ D + X` that omits a confounder `Z`, the bias in the
//! coefficient of `D` has magnitude
//!
//! ```text
//! |bias| = se(τ̂) · sqrt(R²_{Y~Z|D,X} · R²_{D~Z|X} / (1 − R²_{D~Z|X})) · sqrt(df)
//! ```
//!
//! which holds exactly in sample when the partial R² values are those of the
//! omitted column.

use crate::error::{Error, Result};
use crate::estimators::OlsFit;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OvbParams {
    /// Partial R² of the confounder with the outcome given treatment and covariates.
    pub r2_yu: f64,
    /// Partial R² of the confounder with the treatment given covariates.
    pub r2_au: f64,
}

impl OvbParams {
    pub fn new(r2_yu: f64, r2_au: f64) -> Result<Self> {
        if r2_au == 1.0 {
            return Err(Error::Domain("singular: r2_au = 1".into()));
        }
        for (name, v) in [("r2_yu", r2_yu), ("r2_au", r2_au)] {
            if !(v.is_finite() && (0.0..1.0).contains(&v)) {
                return Err(Error::Domain(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        Ok(Self { r2_yu, r2_au })
    }
}

/// Sign applied to the bias: `adjusted = τ̂ − sign · bias`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Subtract the bias (moves a positive estimate toward and past zero).
    Positive,
    /// Add the bias.
    Negative,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Positive => 1.0,
            Direction::Negative => -1.0,
        }
    }

    /// The direction that shrinks `estimate` toward zero.
    pub fn toward_zero(estimate: f64) -> Self {
        if estimate < 0.0 {
            Direction::Negative
        } else {
            Direction::Positive
        }
    }
}

fn treatment_stats(fit: &OlsFit, treatment: &str) -> Result<(f64, f64, f64)> {
    if fit.df == 0 {
        return Err(Error::Domain("residual df must be positive".into()));
    }
    Ok((
        fit.coefficient(treatment)?,
        fit.se(treatment)?,
        fit.df as f64,
    ))
}

fn bias(se: f64, df: f64, r2_yu: f64, r2_au: f64) -> f64 {
    se * (r2_yu * r2_au / (1.0 - r2_au)).sqrt() * df.sqrt()
}

/// Bias magnitude implied by `params`.
pub fn bias_magnitude(fit: &OlsFit, treatment: &str, params: OvbParams) -> Result<f64> {
    let (_, se, df) = treatment_stats(fit, treatment)?;
    Ok(bias(se, df, params.r2_yu, params.r2_au))
}

/// Treatment coefficient after removing the bias implied by `params`.
pub fn adjusted_estimate(
    fit: &OlsFit,
    treatment: &str,
    params: OvbParams,
    direction: Direction,
) -> Result<f64> {
    let (est, se, df) = treatment_stats(fit, treatment)?;
    Ok(est - direction.sign() * bias(se, df, params.r2_yu, params.r2_au))
}

/// Standard error of the adjusted estimate.
pub fn adjusted_se(fit: &OlsFit, treatment: &str, params: OvbParams) -> Result<f64> {
    let (_, se, df) = treatment_stats(fit, treatment)?;
    Ok(adj_se(se, df, params.r2_yu, params.r2_au))
}

fn adj_se(se: f64, df: f64, r2_yu: f64, r2_au: f64) -> f64 {
    se * ((1.0 - r2_yu) / (1.0 - r2_au)).sqrt() * (df / (df - 1.0)).sqrt()
}

/// Partial R² of a regressor with the outcome, `t² / (t² + df)`.
pub fn partial_r2(fit: &OlsFit, name: &str) -> Result<f64> {
    let t = fit.t(name)?;
    let df = fit.df as f64;
    Ok(t * t / (t * t + df))
}

/// Partial R² a confounder must share equally with treatment and outcome to
/// reduce |τ̂| by the fraction `q`.
pub fn robustness_value(fit: &OlsFit, treatment: &str, q: f64) -> Result<f64> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("q must lie in (0, 1], got {q}")));
    }
    let (_, _, df) = treatment_stats(fit, treatment)?;
    let t = fit.t(treatment)?;
    let f = q * t.abs() / df.sqrt();
    let f2 = f * f;
    Ok(0.5 * ((f2 * f2 + 4.0 * f2).sqrt() - f2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkMarker {
    pub label: String,
    pub r2_au: f64,
    pub r2_yu: f64,
    pub estimate: f64,
}

/// Adjusted estimates and t statistics over a square grid of partial R² values.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub r2_au: Vec<f64>,
    pub r2_yu: Vec<f64>,
    /// `estimate[i][j]` at `(r2_au[i], r2_yu[j])`.
    pub estimate: Vec<Vec<f64>>,
    pub t_stat: Vec<Vec<f64>>,
    /// Worst case `r2_yu = 1` for each `r2_au`; its t statistic is undefined.
    pub extreme: Vec<f64>,
    pub markers: Vec<BenchmarkMarker>,
    pub unadjusted: f64,
}

/// One row of the long-format CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourRow {
    pub r2_au: f64,
    pub r2_yu: f64,
    pub estimate: f64,
    /// `None` on the extreme scenario row.
    pub t_stat: Option<f64>,
    pub extreme: bool,
}

impl ContourGrid {
    pub fn rows(&self) -> Vec<ContourRow> {
        let mut rows = Vec::new();
        for (i, &au) in self.r2_au.iter().enumerate() {
            for (j, &yu) in self.r2_yu.iter().enumerate() {
                rows.push(ContourRow {
                    r2_au: au,
                    r2_yu: yu,
                    estimate: self.estimate[i][j],
                    t_stat: Some(self.t_stat[i][j]),
                    extreme: false,
                });
            }
            rows.push(ContourRow {
                r2_au: au,
                r2_yu: 1.0,
                estimate: self.extreme[i],
                t_stat: None,
                extreme: true,
            });
        }
        rows
    }

    /// Whether some pair of adjacent grid cells brackets zero.
    pub fn has_zero_contour(&self) -> bool {
        let n = self.r2_au.len();
        let m = self.r2_yu.len();
        let flips = |a: f64, b: f64| a == 0.0 || b == 0.0 || (a < 0.0) != (b < 0.0);
        (0..n).any(|i| {
            (0..m).any(|j| {
                (j + 1 < m && flips(self.estimate[i][j], self.estimate[i][j + 1]))
                    || (i + 1 < n && flips(self.estimate[i][j], self.estimate[i + 1][j]))
            })
        })
    }
}

/// Grid over `[0, r2_max]²` with `n_points` per axis; bias pushes toward zero.
pub fn contour_grid(
    fit: &OlsFit,
    treatment: &str,
    n_points: usize,
    r2_max: f64,
) -> Result<ContourGrid> {
    if n_points < 2 {
        return Err(Error::Domain("need at least 2 grid points".into()));
    }
    if !(r2_max > 0.0 && r2_max < 1.0) {
        return Err(Error::Domain(format!(
            "r2_max must lie in (0, 1), got {r2_max}"
        )));
    }
    let (est, se, df) = treatment_stats(fit, treatment)?;
    let sign = Direction::toward_zero(est).sign();
    let axis: Vec<f64> = (0..n_points)
        .map(|i| r2_max * i as f64 / (n_points - 1) as f64)
        .collect();
    let mut estimate = Vec::with_capacity(n_points);
    let mut t_stat = Vec::with_capacity(n_points);
    let mut extreme = Vec::with_capacity(n_points);
    for &au in &axis {
        let row: Vec<f64> = axis
            .iter()
            .map(|&yu| est - sign * bias(se, df, yu, au))
            .collect();
        t_stat.push(
            row.iter()
                .zip(&axis)
                .map(|(e, &yu)| e / adj_se(se, df, yu, au))
                .collect(),
        );
        estimate.push(row);
        extreme.push(est - sign * bias(se, df, 1.0, au));
    }
    Ok(ContourGrid {
        r2_au: axis.clone(),
        r2_yu: axis,
        estimate,
        t_stat,
        extreme,
        markers: vec![BenchmarkMarker {
            label: "unadjusted".into(),
            r2_au: 0.0,
            r2_yu: 0.0,
            estimate: est,
        }],
        unadjusted: est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::INTERCEPT;

    fn fit(est: f64, se: f64, df: usize) -> OlsFit {
        OlsFit {
            names: vec![INTERCEPT.into(), "a".into()],
            coef: vec![0.0, est],
            std_error: vec![1.0, se],
            t_stat: vec![0.0, est / se],
            resid_sd: 1.0,
            df,
            r2: 0.1,
            n: df + 2,
        }
    }

    #[test]
    fn no_confounding_leaves_estimate() {
        let f = fit(2.0, 0.1, 100);
        for r2 in [0.0, 0.3, 0.9] {
            let p = OvbParams::new(r2, 0.0).unwrap();
            assert_eq!(
                adjusted_estimate(&f, "a", p, Direction::Positive).unwrap(),
                2.0
            );
            let p = OvbParams::new(0.0, r2).unwrap();
            assert_eq!(
                adjusted_estimate(&f, "a", p, Direction::Negative).unwrap(),
                2.0
            );
        }
    }

    #[test]
    fn singular_and_out_of_range_params() {
        assert!(
            matches!(OvbParams::new(0.2, 1.0), Err(Error::Domain(m)) if m.contains("singular"))
        );
        assert!(OvbParams::new(-0.1, 0.2).is_err());
        assert!(OvbParams::new(0.1, f64::NAN).is_err());
    }

    #[test]
    fn robustness_value_edges_and_self_consistency() {
        assert_eq!(robustness_value(&fit(0.0, 0.2, 50), "a", 1.0).unwrap(), 0.0);
        let f = fit(1.3, 0.4, 200);
        for q in [0.25, 0.5, 1.0] {
            let rv = robustness_value(&f, "a", q).unwrap();
            assert!(rv > 0.0 && rv < 1.0);
            let p = OvbParams::new(rv, rv).unwrap();
            let adj = adjusted_estimate(&f, "a", p, Direction::Positive).unwrap();
            assert!((adj - (1.0 - q) * 1.3).abs() < 1e-8 * 1.3);
        }
        assert!(robustness_value(&f, "a", 0.0).is_err());
    }

    #[test]
    fn grid_origin_and_continuity() {
        let f = fit(2.0, 0.05, 1000);
        let g = contour_grid(&f, "a", 5, 0.5).unwrap();
        assert_eq!(g.estimate[0][0], 2.0);
        assert_eq!(g.rows().len(), 5 * 6);
        let tiny = contour_grid(&f, "a", 2, 1e-12).unwrap();
        for row in &tiny.estimate {
            for &v in row {
                assert!((v - 2.0).abs() < 1e-6);
            }
        }
        assert!(contour_grid(&f, "a", 1, 0.5).is_err());
        assert!(contour_grid(&f, "a", 3, 1.0).is_err());
    }

    #[test]
    fn grid_monotone_in_r2_yu() {
        let g = contour_grid(&fit(-0.7, 0.03, 500), "a", 11, 0.8).unwrap();
        for row in &g.estimate {
            assert!(row.windows(2).all(|w| w[1] >= w[0]));
        }
        assert!(g.has_zero_contour());
    }
}
