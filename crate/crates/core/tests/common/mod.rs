//! Independent oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use confsense_core::DataTable;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn table(cols: Vec<(&str, Vec<f64>)>) -> DataTable {
    let names = cols.iter().map(|(n, _)| n.to_string()).collect();
    DataTable::new(names, cols.into_iter().map(|(_, c)| c).collect()).unwrap()
}

/// Population values for the paper model, from a 2·10⁶-row simulation and
/// closed forms computed outside this crate.
pub mod paper {
    pub const P_TREATED: f64 = 0.453128;
    pub const P_INSTRUMENT: f64 = 0.4;
    pub const NAIVE_ACE: f64 = 2.316;
    pub const WALD: f64 = 6.30751;
    /// Mediation fit with U_AY and U_IY as covariates.
    pub const MED_NIE: (f64, f64) = (-4.205, 0.275);
    pub const MED_NDE: (f64, f64) = (-0.274, 4.206);
    pub const RHO_STAR_EXACT: f64 = 0.447;
    pub const RHO_STAR_NAIVE: f64 = 0.478;
}

// ---- discrete-joint bias formulas ----

/// One atom `(x, u, a)` of a joint with its mass and conditional mean.
#[derive(Clone, Copy)]
struct Atom {
    x: usize,
    u: usize,
    a: usize,
    p: f64,
    ey: f64,
}

/// τ, τ* and τ* − τ by summing over atoms, each conditional built from scratch.
pub fn enumerate_bias(p: &[Vec<[f64; 2]>], ey: &[Vec<[f64; 2]>]) -> (f64, f64, f64) {
    let mut atoms = Vec::new();
    for (x, row) in p.iter().enumerate() {
        for (u, cell) in row.iter().enumerate() {
            for a in 0..2 {
                atoms.push(Atom {
                    x,
                    u,
                    a,
                    p: cell[a],
                    ey: ey[x][u][a],
                });
            }
        }
    }
    let mass = |f: &dyn Fn(&Atom) -> bool| atoms.iter().filter(|t| f(t)).map(|t| t.p).sum::<f64>();
    let find = |x: usize, u: usize, a: usize| {
        atoms
            .iter()
            .find(|t| t.x == x && t.u == u && t.a == a)
            .unwrap()
            .ey
    };
    let nx = p.len();
    let nu = p[0].len();
    let mut tau = 0.0;
    let mut tau_star = 0.0;
    for x in 0..nx {
        let px = mass(&|t| t.x == x);
        for u in 0..nu {
            let pu_x = mass(&|t| t.x == x && t.u == u) / px;
            tau += (find(x, u, 1) - find(x, u, 0)) * pu_x * px;
        }
        let mut ey_ax = [0.0; 2];
        for (a, slot) in ey_ax.iter_mut().enumerate() {
            let pax = mass(&|t| t.x == x && t.a == a);
            for u in 0..nu {
                *slot += find(x, u, a) * mass(&|t| t.x == x && t.u == u && t.a == a) / pax;
            }
        }
        tau_star += (ey_ax[1] - ey_ax[0]) * px;
    }
    (tau, tau_star, tau_star - tau)
}

pub type Joint = (Vec<Vec<[f64; 2]>>, Vec<Vec<[f64; 2]>>);

/// Strictly positive joint over `nx × nu × 2` with means in [−5, 5].
pub fn random_joint(rng: &mut ChaCha8Rng, nx: usize, nu: usize) -> Joint {
    let mut p: Vec<Vec<[f64; 2]>> = (0..nx)
        .map(|_| {
            (0..nu)
                .map(|_| [rng.random_range(0.01..1.0), rng.random_range(0.01..1.0)])
                .collect()
        })
        .collect();
    let total: f64 = p.iter().flatten().flatten().sum();
    p.iter_mut().flatten().flatten().for_each(|v| *v /= total);
    let ey = (0..nx)
        .map(|_| {
            (0..nu)
                .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                .collect()
        })
        .collect();
    (p, ey)
}

/// Joint with `P(x, u, a) = P(x) P(u|x) P(a|x)`.
pub fn independent_joint(rng: &mut ChaCha8Rng, nx: usize, nu: usize) -> Joint {
    let weights = |rng: &mut ChaCha8Rng, k: usize| {
        let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|v| v / s).collect::<Vec<_>>()
    };
    let px = weights(rng, nx);
    let mut p = Vec::new();
    for &pxv in &px {
        let pu = weights(rng, nu);
        let pa1: f64 = rng.random_range(0.1..0.9);
        p.push(
            pu.iter()
                .map(|&puv| [pxv * puv * (1.0 - pa1), pxv * puv * pa1])
                .collect(),
        );
    }
    let ey = (0..nx)
        .map(|_| {
            (0..nu)
                .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                .collect()
        })
        .collect();
    (p, ey)
}

// ---- E-value ----

/// Bounding factor of a confounder with risk ratios `eu` (treatment) and `ud` (outcome).
pub fn bounding_factor(eu: f64, ud: f64) -> f64 {
    eu * ud / (eu + ud - 1.0)
}

/// min over (RR_EU, RR_UD) with bounding factor ≥ rr of max(RR_EU, RR_UD),
/// scanning RR_EU on a grid and bisecting for the smallest admissible RR_UD.
pub fn evalue_grid(rr: f64) -> f64 {
    let rr = if rr < 1.0 { 1.0 / rr } else { rr };
    if rr == 1.0 {
        return 1.0;
    }
    let step = 1e-4;
    let mut best = f64::INFINITY;
    let mut eu = rr + step;
    while eu < 4.0 * rr + 2.0 {
        let (mut lo, mut hi) = (1.0, 1e6);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if bounding_factor(eu, mid) >= rr {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        best = best.min(eu.max(hi));
        eu += step;
    }
    best
}

// ---- Manski ----

/// ATE range over every imputation of the missing potential outcomes, for
/// `n1` treated units with `k1` events and `n0` controls with `k0` events.
pub fn manski_imputation(n1: u32, k1: u32, n0: u32, k0: u32) -> (f64, f64) {
    let n = (n1 + n0) as f64;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    // j1 of the controls' missing Y(1) are 1; j0 of the treated units' missing Y(0) are 1.
    for j1 in 0..=n0 {
        for j0 in 0..=n1 {
            let ate = (k1 + j1) as f64 / n - (k0 + j0) as f64 / n;
            lo = lo.min(ate);
            hi = hi.max(ate);
        }
    }
    (lo, hi)
}

// ---- OVB ----

/// Dataset with covariates `X0..`, omitted `U`, treatment `A` and outcome `Y`.
pub fn ovb_dataset(rng: &mut ChaCha8Rng) -> (DataTable, Vec<String>) {
    let n = rng.random_range(40..400);
    let k = rng.random_range(0..4);
    let binary = rng.random_bool(0.5);
    let mut cols: Vec<(String, Vec<f64>)> = Vec::new();
    let xs: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..n).map(|_| normal(rng)).collect())
        .collect();
    let u: Vec<f64> = (0..n).map(|_| normal(rng)).collect();
    let gu: f64 = rng.random_range(-2.0..2.0);
    let bu: f64 = rng.random_range(-2.0..2.0);
    let tau: f64 = rng.random_range(-3.0..3.0);
    let gx: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut a = Vec::with_capacity(n);
    for i in 0..n {
        let idx = gu * u[i] + (0..k).map(|j| gx[j] * xs[j][i]).sum::<f64>() + normal(rng);
        a.push(if binary { f64::from(idx > 0.0) } else { idx });
    }
    if binary && (a.iter().all(|&v| v == 1.0) || a.iter().all(|&v| v == 0.0)) {
        a[0] = 1.0 - a[0];
    }
    let y: Vec<f64> = (0..n)
        .map(|i| tau * a[i] + bu * u[i] + (0..k).map(|j| xs[j][i]).sum::<f64>() + normal(rng))
        .collect();
    let mut names = Vec::new();
    for (j, x) in xs.into_iter().enumerate() {
        names.push(format!("X{j}"));
        cols.push((format!("X{j}"), x));
    }
    cols.push(("U".into(), u));
    cols.push(("A".into(), a));
    cols.push(("Y".into(), y));
    let (n, c): (Vec<String>, Vec<Vec<f64>>) = cols.into_iter().unzip();
    (DataTable::new(n, c).unwrap(), names)
}

// ---- copula generative model ----

/// `A = 1(Z > Φ⁻¹(1 − p))`, `Y = τ₀ A + σ ε` with `corr(Z, ε) = ρ₀`.
pub fn copula_data(
    rng: &mut ChaCha8Rng,
    n: usize,
    tau0: f64,
    rho0: f64,
    p: f64,
    sigma: f64,
) -> DataTable {
    let zc = confsense_core::normal::quantile(1.0 - p);
    let mut a = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    let c = (1.0 - rho0 * rho0).sqrt();
    for _ in 0..n {
        let z = normal(rng);
        let e = rho0 * z + c * normal(rng);
        let ai = f64::from(z > zc);
        a.push(ai);
        y.push(tau0 * ai + sigma * e);
    }
    table(vec![("A", a), ("Y", y)])
}

// ---- linear mediation with correlated errors ----

pub struct MediationTruth {
    pub beta_m: f64,
    pub gamma: f64,
    pub direct: f64,
}

impl MediationTruth {
    pub fn acme(&self) -> f64 {
        self.beta_m * self.gamma
    }
}

/// `M = β_M A + σ_M ε₂`, `Y = direct·A + γ M + σ_Y ε₃`, `corr(ε₂, ε₃) = ρ₀`.
pub fn mediation_data(
    rng: &mut ChaCha8Rng,
    n: usize,
    truth: &MediationTruth,
    rho0: f64,
) -> DataTable {
    let c = (1.0 - rho0 * rho0).sqrt();
    let (mut a, mut m, mut y) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    for _ in 0..n {
        let ai = f64::from(rng.random_bool(0.5));
        let e2 = normal(rng);
        let e3 = rho0 * e2 + c * normal(rng);
        let mi = truth.beta_m * ai + 1.2 * e2;
        a.push(ai);
        m.push(mi);
        y.push(truth.direct * ai + truth.gamma * mi + 0.8 * e3);
    }
    table(vec![("A", a), ("M", m), ("Y", y)])
}

/// Mean and standard error of `f` over `batches` equal row blocks of `data`.
pub fn batch_means(data: &DataTable, batches: usize, f: impl Fn(&DataTable) -> f64) -> (f64, f64) {
    let n = data.n_rows() / batches;
    let vals: Vec<f64> = (0..batches)
        .map(|b| {
            let cols = data
                .columns()
                .iter()
                .map(|c| c[b * n..(b + 1) * n].to_vec())
                .collect();
            f(&DataTable::new(data.names().to_vec(), cols).unwrap())
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / batches as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}
