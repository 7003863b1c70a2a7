use super::simulate::{chunk_bounds, noise_chunk, seed_key};
use super::{path_sum, EstimandKind, EstimandQuery, ScmSpec, TruthMethod, TruthResult};
use crate::error::{Error, Result};
use rayon::prelude::*;

const MIN_MC_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthOptions {
    pub n_mc: usize,
    pub seed: u64,
    /// `None` picks path tracing when admissible, Monte Carlo otherwise.
    pub method: Option<TruthMethod>,
}

/// Ground-truth value of an estimand, by path tracing when the model is
/// linear along the relevant paths and by Monte Carlo intervention otherwise.
pub fn true_estimand(
    spec: &ScmSpec,
    query: &EstimandQuery,
    n_mc: usize,
    seed: u64,
) -> Result<TruthResult> {
    truth_with(
        spec,
        query,
        TruthOptions {
            n_mc,
            seed,
            method: None,
        },
    )
}

struct Resolved {
    kind: EstimandKind,
    t: usize,
    y: usize,
    m: Option<usize>,
    z: Option<usize>,
    base: f64,
    active: f64,
}

fn resolve(spec: &ScmSpec, q: &EstimandQuery) -> Result<Resolved> {
    let t = spec.index_of(&q.treatment)?;
    let y = spec.index_of(&q.outcome)?;
    if t == y {
        return Err(Error::InvalidQuery("treatment and outcome coincide".into()));
    }
    if !(q.baseline.is_finite() && q.active.is_finite()) {
        return Err(Error::InvalidQuery(
            "treatment levels must be finite".into(),
        ));
    }
    let mut m = None;
    let mut z = None;
    match q.kind {
        EstimandKind::Nde | EstimandKind::Nie => {
            let name = q
                .mediator
                .as_deref()
                .ok_or_else(|| Error::InvalidQuery("NDE/NIE need a mediator".into()))?;
            let mi = spec.index_of(name)?;
            if mi == t || mi == y || !spec.reaches(t, mi, None) || !spec.reaches(mi, y, None) {
                return Err(Error::InvalidQuery(format!(
                    "mediator `{name}` is not on a directed path {} -> {}",
                    q.treatment, q.outcome
                )));
            }
            m = Some(mi);
        }
        EstimandKind::Late => {
            let name = q
                .instrument
                .as_deref()
                .ok_or_else(|| Error::InvalidQuery("LATE needs an instrument".into()))?;
            let zi = spec.index_of(name)?;
            if zi == t || zi == y {
                return Err(Error::InvalidQuery(
                    "instrument must differ from treatment and outcome".into(),
                ));
            }
            // Exclusion: nothing upstream of the instrument may reach the outcome around the treatment.
            for v in 0..spec.len() {
                if v != t && spec.reaches(v, zi, None) && spec.reaches(v, y, Some(t)) {
                    return Err(Error::LateExclusionViolated {
                        via: spec.nodes()[v].name.clone(),
                    });
                }
            }
            z = Some(zi);
        }
        EstimandKind::Ace | EstimandKind::Total => {}
    }
    Ok(Resolved {
        kind: q.kind,
        t,
        y,
        m,
        z,
        base: q.baseline,
        active: q.active,
    })
}

pub fn truth_with(
    spec: &ScmSpec,
    query: &EstimandQuery,
    opts: TruthOptions,
) -> Result<TruthResult> {
    let r = resolve(spec, query)?;
    if opts.method != Some(TruthMethod::MonteCarlo) && r.kind != EstimandKind::Late {
        match trace(spec, &r) {
            Ok(value) => {
                return Ok(TruthResult {
                    value,
                    mc_std_error: 0.0,
                    method: TruthMethod::PathTrace,
                })
            }
            Err(e) if opts.method == Some(TruthMethod::PathTrace) => return Err(e),
            Err(Error::NonlinearPath { .. }) => {}
            Err(e) => return Err(e),
        }
    } else if opts.method == Some(TruthMethod::PathTrace) {
        return Err(Error::InvalidQuery("LATE has no path-tracing form".into()));
    }
    monte_carlo(spec, &r, opts.n_mc, opts.seed)
}

fn trace(spec: &ScmSpec, r: &Resolved) -> Result<f64> {
    let scale = r.active - r.base;
    let sum = match (r.kind, r.m) {
        (EstimandKind::Nde, Some(m)) => path_sum(spec, r.t, r.y, |p| !p.contains(&m))?,
        (EstimandKind::Nie, Some(m)) => path_sum(spec, r.t, r.y, |p| p.contains(&m))?,
        _ => path_sum(spec, r.t, r.y, |_| true)?,
    };
    Ok(sum * scale)
}

/// Count, mean and sum of squared deviations; merged in chunk order.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * other.n / n,
            m2: self.m2 + other.m2 + d * d * self.n * other.n / n,
        }
    }
}

fn monte_carlo(spec: &ScmSpec, r: &Resolved, n_mc: usize, seed: u64) -> Result<TruthResult> {
    if n_mc < MIN_MC_DRAWS {
        return Err(Error::InvalidQuery(format!(
            "Monte Carlo needs at least {MIN_MC_DRAWS} draws, got {n_mc}"
        )));
    }
    let k = spec.len();
    let key = seed_key(seed);
    let parents = spec.parent_indices();

    let per_chunk: Vec<Moments> = chunk_bounds(n_mc)
        .map(|(c, rows)| {
            let noise = noise_chunk(spec, &key, c, rows);
            let mut overrides = vec![None; k];
            let mut out = vec![0.0; k];
            let mut acc = Moments::default();
            let mut world = |noise: &[f64], set: &[(usize, f64)], out: &mut [f64]| {
                overrides.iter_mut().for_each(|o| *o = None);
                for &(i, v) in set {
                    overrides[i] = Some(v);
                }
                spec.evaluate(&parents, noise, &overrides, out);
            };
            for row in 0..rows {
                let u = &noise[row * k..(row + 1) * k];
                let contrast = match r.kind {
                    EstimandKind::Ace | EstimandKind::Total => {
                        world(u, &[(r.t, r.active)], &mut out);
                        let y1 = out[r.y];
                        world(u, &[(r.t, r.base)], &mut out);
                        Some(y1 - out[r.y])
                    }
                    EstimandKind::Nde | EstimandKind::Nie => {
                        let m = r.m.expect("resolved");
                        world(u, &[(r.t, r.base)], &mut out);
                        let (m0, y00) = (out[m], out[r.y]);
                        world(u, &[(r.t, r.active), (m, m0)], &mut out);
                        let y10 = out[r.y];
                        if r.kind == EstimandKind::Nde {
                            Some(y10 - y00)
                        } else {
                            world(u, &[(r.t, r.active)], &mut out);
                            Some(out[r.y] - y10)
                        }
                    }
                    EstimandKind::Late => {
                        let z = r.z.expect("resolved");
                        world(u, &[(z, 0.0)], &mut out);
                        let t0 = out[r.t];
                        world(u, &[(z, 1.0)], &mut out);
                        let t1 = out[r.t];
                        if t0 == r.base && t1 == r.active {
                            world(u, &[(r.t, r.active)], &mut out);
                            let y1 = out[r.y];
                            world(u, &[(r.t, r.base)], &mut out);
                            Some(y1 - out[r.y])
                        } else {
                            None
                        }
                    }
                };
                if let Some(x) = contrast {
                    acc.push(x);
                }
            }
            acc
        })
        .collect();

    let total = per_chunk
        .into_iter()
        .fold(Moments::default(), Moments::merge);
    if total.n < 2.0 {
        return Err(Error::InvalidQuery(
            "no units contribute to the contrast (no compliers?)".into(),
        ));
    }
    let var = total.m2 / (total.n - 1.0);
    Ok(TruthResult {
        value: total.mean,
        mc_std_error: (var / total.n).sqrt(),
        method: TruthMethod::MonteCarlo,
    })
}
