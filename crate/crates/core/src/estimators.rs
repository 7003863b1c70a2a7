//! Observational estimators that feed the sensitivity methods.

use crate::data::DataTable;
use crate::error::{Error, Result};

/// Label of the intercept term in [`OlsFit`].
pub const INTERCEPT: &str = "(intercept)";

/// Relative size of a pivot below which a column counts as linearly dependent.
const RANK_TOL: f64 = 1e-10;

const WEAK_FIRST_STAGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// Regressor names, intercept first.
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    pub std_error: Vec<f64>,
    pub t_stat: Vec<f64>,
    pub resid_sd: f64,
    /// n minus the number of coefficients (intercept included).
    pub df: usize,
    pub r2: f64,
    pub n: usize,
}

impl OlsFit {
    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }

    pub fn coefficient(&self, name: &str) -> Result<f64> {
        Ok(self.coef[self.index_of(name)?])
    }

    pub fn se(&self, name: &str) -> Result<f64> {
        Ok(self.std_error[self.index_of(name)?])
    }

    pub fn t(&self, name: &str) -> Result<f64> {
        Ok(self.t_stat[self.index_of(name)?])
    }
}

/// Least squares via Householder QR with column pivoting.
struct PivotedQr {
    /// Upper triangle of R in pivoted order, row-major k×k.
    r: Vec<f64>,
    perm: Vec<usize>,
    qty: Vec<f64>,
    k: usize,
}

impl PivotedQr {
    fn factor(mut cols: Vec<Vec<f64>>, mut y: Vec<f64>, names: &[String]) -> Result<Self> {
        let k = cols.len();
        let n = y.len();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut r = vec![0.0; k * k];
        let mut lead = 0.0;
        for j in 0..k {
            let norm2 = |c: &Vec<f64>| c[j..].iter().map(|v| v * v).sum::<f64>();
            let (best, best_norm2) = (j..k)
                .map(|c| (c, norm2(&cols[c])))
                .fold((j, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            cols.swap(j, best);
            perm.swap(j, best);
            for i in 0..j {
                r.swap(i * k + j, i * k + best);
            }
            let norm = best_norm2.sqrt();
            if j == 0 {
                lead = norm;
            }
            if norm == 0.0 || norm <= RANK_TOL * lead {
                return Err(Error::RankDeficient {
                    column: names[perm[j]].clone(),
                });
            }
            let alpha = if cols[j][j] > 0.0 { -norm } else { norm };
            let mut v = cols[j][j..].to_vec();
            v[0] -= alpha;
            let vtv: f64 = v.iter().map(|x| x * x).sum();
            let reflect = |target: &mut [f64]| {
                let dot: f64 = v.iter().zip(target.iter()).map(|(a, b)| a * b).sum();
                let f = 2.0 * dot / vtv;
                for (t, vi) in target.iter_mut().zip(&v) {
                    *t -= f * vi;
                }
            };
            for col in cols.iter_mut().skip(j + 1) {
                reflect(&mut col[j..]);
            }
            reflect(&mut y[j..]);
            r[j * k + j] = alpha;
            for c in j + 1..k {
                r[j * k + c] = cols[c][j];
            }
            debug_assert!(n > j);
        }
        Ok(Self {
            r,
            perm,
            qty: y[..k].to_vec(),
            k,
        })
    }

    /// Coefficients and diag((XᵀX)⁻¹), both in original column order.
    fn solve(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let r = |i: usize, j: usize| self.r[i * k + j];
        let mut beta_p = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|j| r(i, j) * beta_p[j]).sum();
            beta_p[i] = (self.qty[i] - s) / r(i, i);
        }
        // R⁻¹, upper triangular, column by column.
        let mut rinv = vec![0.0; k * k];
        for c in 0..k {
            for i in (0..=c).rev() {
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s: f64 = (i + 1..=c).map(|j| r(i, j) * rinv[j * k + c]).sum();
                rinv[i * k + c] = (rhs - s) / r(i, i);
            }
        }
        let mut beta = vec![0.0; k];
        let mut diag = vec![0.0; k];
        for j in 0..k {
            beta[self.perm[j]] = beta_p[j];
            diag[self.perm[j]] = (j..k).map(|m| rinv[j * k + m].powi(2)).sum();
        }
        (beta, diag)
    }
}

/// OLS with an intercept, also returning the residual vector.
pub fn ols_with_residuals(
    data: &DataTable,
    outcome: &str,
    regressors: &[&str],
) -> Result<(OlsFit, Vec<f64>)> {
    let y = data.column(outcome)?;
    let n = data.n_rows();
    let mut names = vec![INTERCEPT.to_string()];
    let mut cols = vec![vec![1.0; n]];
    for &name in regressors {
        if names.iter().any(|n| n == name) {
            return Err(Error::RankDeficient {
                column: name.to_string(),
            });
        }
        cols.push(data.column(name)?.to_vec());
        names.push(name.to_string());
    }
    let k = cols.len();
    if n <= k {
        return Err(Error::InvalidData(format!(
            "{n} rows cannot support {k} coefficients with positive residual df"
        )));
    }
    let qr = PivotedQr::factor(cols, y.to_vec(), &names)?;
    let (coef, diag) = qr.solve();

    let mut resid = y.to_vec();
    for (j, &b) in coef.iter().enumerate() {
        if j == 0 {
            resid.iter_mut().for_each(|e| *e -= b);
        } else {
            let x = data.column(&names[j])?;
            resid.iter_mut().zip(x).for_each(|(e, xv)| *e -= b * xv);
        }
    }
    let df = n - k;
    let rss: f64 = resid.iter().map(|e| e * e).sum();
    let sigma2 = rss / df as f64;
    let ybar = y.iter().sum::<f64>() / n as f64;
    let tss: f64 = y.iter().map(|v| (v - ybar).powi(2)).sum();
    let r2 = if tss > 0.0 { 1.0 - rss / tss } else { 0.0 };
    let std_error: Vec<f64> = diag.iter().map(|d| (sigma2 * d).sqrt()).collect();
    let t_stat = coef.iter().zip(&std_error).map(|(b, s)| b / s).collect();
    Ok((
        OlsFit {
            names,
            coef,
            std_error,
            t_stat,
            resid_sd: sigma2.sqrt(),
            df,
            r2,
            n,
        },
        resid,
    ))
}

/// Ordinary least squares of `outcome` on `regressors` plus an intercept.
pub fn ols(data: &DataTable, outcome: &str, regressors: &[&str]) -> Result<OlsFit> {
    ols_with_residuals(data, outcome, regressors).map(|(fit, _)| fit)
}

/// Both arms of a 0/1 column split `values`; errors if either arm is empty.
fn split_arms<'a>(
    data: &'a DataTable,
    binary: &str,
    values: &'a [f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let g = data.binary_column(binary)?;
    let (mut one, mut zero) = (Vec::new(), Vec::new());
    for (&gi, &v) in g.iter().zip(values) {
        if gi == 1.0 {
            one.push(v);
        } else {
            zero.push(v);
        }
    }
    for (arm, level) in [(&zero, 0u8), (&one, 1u8)] {
        if arm.is_empty() {
            return Err(Error::DegenerateArm {
                column: binary.to_string(),
                level,
            });
        }
    }
    Ok((one, zero))
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub(crate) fn sum_sq_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum()
}

/// Difference in arm means with the Welch standard error.
pub fn diff_in_means(data: &DataTable, treatment: &str, outcome: &str) -> Result<(f64, f64)> {
    let y = data.column(outcome)?;
    let (one, zero) = split_arms(data, treatment, y)?;
    let var = |v: &[f64]| {
        if v.len() > 1 {
            sum_sq_dev(v) / (v.len() - 1) as f64
        } else {
            0.0
        }
    };
    let est = mean(&one) - mean(&zero);
    let se = (var(&one) / one.len() as f64 + var(&zero) / zero.len() as f64).sqrt();
    Ok((est, se))
}

/// Wald ratio: reduced-form contrast over first-stage contrast.
pub fn wald_iv(data: &DataTable, instrument: &str, treatment: &str, outcome: &str) -> Result<f64> {
    let (y1, y0) = split_arms(data, instrument, data.column(outcome)?)?;
    let (a1, a0) = split_arms(data, instrument, data.column(treatment)?)?;
    let first = mean(&a1) - mean(&a0);
    if first.is_nan() || first.abs() < WEAK_FIRST_STAGE {
        return Err(Error::WeakFirstStage(first));
    }
    Ok((mean(&y1) - mean(&y0)) / first)
}

/// The three regressions of a linear mediation analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct MediationFit {
    /// Treatment coefficient in `Y ~ A (+ X)`.
    pub beta_total: f64,
    /// Treatment coefficient in `M ~ A (+ X)`.
    pub beta_mediator: f64,
    /// Treatment coefficient in `Y ~ A + M (+ X)`.
    pub beta_direct: f64,
    /// Mediator coefficient in `Y ~ A + M (+ X)`.
    pub gamma: f64,
    /// Residual sd of the total-effect regression.
    pub sigma_total: f64,
    /// Residual sd of the mediator regression.
    pub sigma_mediator: f64,
    /// Correlation of the total-effect and mediator residuals.
    pub rho_tilde: f64,
    pub n: usize,
}

/// Fit `Y ~ A`, `M ~ A`, `Y ~ A + M`, each with the same observed covariates.
pub fn fit_mediation(
    data: &DataTable,
    treatment: &str,
    mediator: &str,
    outcome: &str,
    covariates: &[&str],
) -> Result<MediationFit> {
    data.binary_column(treatment)?;
    let mut short = vec![treatment];
    short.extend_from_slice(covariates);
    let mut long = vec![treatment, mediator];
    long.extend_from_slice(covariates);
    let (total, e1) = ols_with_residuals(data, outcome, &short)?;
    let (med, e2) = ols_with_residuals(data, mediator, &short)?;
    let full = ols(data, outcome, &long)?;

    let (s11, s22, s12) = e1
        .iter()
        .zip(&e2)
        .fold((0.0, 0.0, 0.0), |(a, b, c), (x, y)| {
            (a + x * x, b + y * y, c + x * y)
        });
    let rho_tilde = if s11 > 0.0 && s22 > 0.0 {
        (s12 / (s11 * s22).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    Ok(MediationFit {
        beta_total: total.coefficient(treatment)?,
        beta_mediator: med.coefficient(treatment)?,
        beta_direct: full.coefficient(treatment)?,
        gamma: full.coefficient(mediator)?,
        sigma_total: total.resid_sd,
        sigma_mediator: med.resid_sd,
        rho_tilde,
        n: data.n_rows(),
    })
}
