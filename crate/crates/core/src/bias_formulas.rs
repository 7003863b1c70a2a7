//! Confounding bias over a finite joint of (X, U, A).
//!
//! With observed confounders X and an unmeasured U, the fully adjusted effect is
//!
//! ```text
//! τ  = Σ_x Σ_u {E[Y|a₁,x,u] − E[Y|a₀,x,u]} P(u|x) P(x)
//! ```
//!
//! and the contrast that adjusts for X alone is
//!
//! ```text
//! τ* = Σ_x {E[Y|a₁,x] − E[Y|a₀,x]} P(x),   E[Y|a,x] = Σ_u E[Y|a,x,u] P(u|x,a).
//! ```
//!
//! The confounding bias is τ* − τ. X and U may take any finite number of levels.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Probabilities below this count as zero for positivity.
pub const POSITIVITY_TOL: f64 = 1e-15;

const MASS_TOL: f64 = 1e-12;

/// One cell of a joint table: `P(x, u, a) = p` and `E[Y | a, x, u] = ey`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCell {
    pub x: String,
    pub u: String,
    pub a: u8,
    pub p: f64,
    pub ey: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    x_labels: Vec<String>,
    u_labels: Vec<String>,
    /// `p[(x * nu + u)][a]`
    p: Vec<[f64; 2]>,
    /// `ey[(x * nu + u)][a]`
    ey: Vec<[f64; 2]>,
}

impl DiscreteJoint {
    /// `p[x][u][a]` and `ey[x][u][a]` with `a ∈ {0 = a₀, 1 = a₁}`.
    pub fn new(
        x_labels: Vec<String>,
        u_labels: Vec<String>,
        p: Vec<Vec<[f64; 2]>>,
        ey: Vec<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        let (nx, nu) = (x_labels.len(), u_labels.len());
        if nx == 0 || nu == 0 {
            return Err(Error::InvalidData("X and U need at least one level".into()));
        }
        let shape_ok = |t: &Vec<Vec<[f64; 2]>>| t.len() == nx && t.iter().all(|r| r.len() == nu);
        if !shape_ok(&p) || !shape_ok(&ey) {
            return Err(Error::InvalidData(format!("tables must be {nx}×{nu}×2")));
        }
        let p: Vec<[f64; 2]> = p.into_iter().flatten().collect();
        let ey: Vec<[f64; 2]> = ey.into_iter().flatten().collect();
        if p.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidData(
                "probabilities must be finite and ≥ 0".into(),
            ));
        }
        if ey.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData(
                "conditional means must be finite".into(),
            ));
        }
        let total: f64 = p.iter().flatten().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidData(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            x_labels,
            u_labels,
            p,
            ey,
        })
    }

    /// Build from cells (the CSV layout `x,u,a,p,ey`). Labels keep first-seen
    /// order; absent cells have probability zero.
    pub fn from_cells(cells: &[JointCell]) -> Result<Self> {
        let mut xs: Vec<String> = Vec::new();
        let mut us: Vec<String> = Vec::new();
        for c in cells {
            if !xs.contains(&c.x) {
                xs.push(c.x.clone());
            }
            if !us.contains(&c.u) {
                us.push(c.u.clone());
            }
        }
        let mut p = vec![vec![[0.0; 2]; us.len()]; xs.len()];
        let mut ey = p.clone();
        let mut seen = HashMap::new();
        for c in cells {
            if c.a > 1 {
                return Err(Error::InvalidData(format!(
                    "treatment level {} not in {{0, 1}}",
                    c.a
                )));
            }
            let xi = xs.iter().position(|x| *x == c.x).expect("collected");
            let ui = us.iter().position(|u| *u == c.u).expect("collected");
            if seen.insert((xi, ui, c.a), ()).is_some() {
                return Err(Error::InvalidData(format!(
                    "duplicate cell x={}, u={}, a={}",
                    c.x, c.u, c.a
                )));
            }
            p[xi][ui][c.a as usize] = c.p;
            ey[xi][ui][c.a as usize] = c.ey;
        }
        Self::new(xs, us, p, ey)
    }

    /// Derive conditional means from a full joint `P(x, u, a, y)` over
    /// outcome values `y_values`; `prob[x][u][a][k]` is the mass at `y_values[k]`.
    pub fn from_full_joint(
        x_labels: Vec<String>,
        u_labels: Vec<String>,
        y_values: &[f64],
        prob: &[Vec<[Vec<f64>; 2]>],
    ) -> Result<Self> {
        let mut p = Vec::with_capacity(prob.len());
        let mut ey = Vec::with_capacity(prob.len());
        for row in prob {
            let mut prow = Vec::with_capacity(row.len());
            let mut erow = Vec::with_capacity(row.len());
            for cell in row {
                let mut pc = [0.0; 2];
                let mut ec = [0.0; 2];
                for a in 0..2 {
                    if cell[a].len() != y_values.len() {
                        return Err(Error::InvalidData("outcome support mismatch".into()));
                    }
                    let mass: f64 = cell[a].iter().sum();
                    pc[a] = mass;
                    ec[a] = if mass > 0.0 {
                        cell[a]
                            .iter()
                            .zip(y_values)
                            .map(|(w, y)| w * y)
                            .sum::<f64>()
                            / mass
                    } else {
                        0.0
                    };
                }
                prow.push(pc);
                erow.push(ec);
            }
            p.push(prow);
            ey.push(erow);
        }
        Self::new(x_labels, u_labels, p, ey)
    }

    pub fn x_labels(&self) -> &[String] {
        &self.x_labels
    }

    pub fn u_labels(&self) -> &[String] {
        &self.u_labels
    }

    /// `P(x, u, a)`.
    pub fn p(&self, x: usize, u: usize, a: usize) -> f64 {
        self.p[x * self.u_labels.len() + u][a]
    }

    /// `E[Y | a, x, u]`.
    pub fn ey(&self, x: usize, u: usize, a: usize) -> f64 {
        self.ey[x * self.u_labels.len() + u][a]
    }

    fn p_xu(&self, x: usize, u: usize) -> f64 {
        self.p(x, u, 0) + self.p(x, u, 1)
    }
}

/// τ: the effect adjusting for both X and U.
pub fn tau_adjusted(joint: &DiscreteJoint) -> Result<f64> {
    let mut tau = 0.0;
    for x in 0..joint.x_labels.len() {
        for u in 0..joint.u_labels.len() {
            let pxu = joint.p_xu(x, u);
            if pxu <= POSITIVITY_TOL {
                continue;
            }
            if joint.p(x, u, 0) <= POSITIVITY_TOL || joint.p(x, u, 1) <= POSITIVITY_TOL {
                return Err(Error::Positivity {
                    stratum: format!("x={}, u={}", joint.x_labels[x], joint.u_labels[u]),
                });
            }
            tau += (joint.ey(x, u, 1) - joint.ey(x, u, 0)) * pxu;
        }
    }
    Ok(tau)
}

/// τ*: the effect adjusting for X only.
pub fn tau_star(joint: &DiscreteJoint) -> Result<f64> {
    let nu = joint.u_labels.len();
    let mut tau = 0.0;
    for x in 0..joint.x_labels.len() {
        let px: f64 = (0..nu).map(|u| joint.p_xu(x, u)).sum();
        if px <= POSITIVITY_TOL {
            continue;
        }
        let mut mean = [0.0; 2];
        for (a, m) in mean.iter_mut().enumerate() {
            let pxa: f64 = (0..nu).map(|u| joint.p(x, u, a)).sum();
            if pxa <= POSITIVITY_TOL {
                return Err(Error::Positivity {
                    stratum: format!("x={}, a={a}", joint.x_labels[x]),
                });
            }
            *m = (0..nu)
                .map(|u| joint.ey(x, u, a) * (joint.p(x, u, a) / pxa))
                .sum();
        }
        tau += (mean[1] - mean[0]) * px;
    }
    Ok(tau)
}

/// τ* − τ.
pub fn confounding_bias(joint: &DiscreteJoint) -> Result<f64> {
    Ok(tau_star(joint)? - tau_adjusted(joint)?)
}
