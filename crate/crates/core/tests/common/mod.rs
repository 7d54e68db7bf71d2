//! Random instances and brute-force reference implementations shared by the
//! integration tests.
#![allow(dead_code)]

use ndarray::Array2;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use wgf::data::{Dataset, DatasetMeta};
use wgf::models::{Design, Model, ModelKind, ScoreObjective};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Group, label and two score vectors of length `n`, each group holding at
/// least two rows. With `ties`, scores are coarsened so that ties occur.
pub struct Instance {
    pub z: Vec<u8>,
    pub y: Vec<u8>,
    pub f: Vec<f64>,
    pub fstar: Vec<f64>,
}

pub fn instance(rng: &mut ChaCha8Rng, n: usize, ties: bool) -> Instance {
    assert!(n >= 4);
    let mut z: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
    z[0] = 0;
    z[1] = 0;
    z[2] = 1;
    z[3] = 1;
    let p1 = rng.random_range(0.1..0.9);
    let y = (0..n).map(|_| rng.random_bool(p1) as u8).collect();
    let draw = |rng: &mut ChaCha8Rng| {
        let v: f64 = rng.sample(StandardNormal);
        if ties {
            (v * 2.0).round() / 2.0
        } else {
            v
        }
    };
    let fstar: Vec<f64> = (0..n).map(|_| draw(rng)).collect();
    let f = (0..n)
        .map(|i| {
            if rng.random_bool(0.3) {
                fstar[i]
            } else {
                draw(rng)
            }
        })
        .collect();
    Instance { z, y, f, fstar }
}

pub fn preds(s: &[f64]) -> Vec<u8> {
    s.iter().map(|&v| (v > 0.0) as u8).collect()
}

pub fn to_f64(r: Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn frac(num: usize, den: usize) -> Ratio<u64> {
    if den == 0 {
        Ratio::from_integer(0)
    } else {
        Ratio::new(num as u64, den as u64)
    }
}

fn absdiff(a: Ratio<u64>, b: Ratio<u64>) -> Ratio<u64> {
    if a > b {
        a - b
    } else {
        b - a
    }
}

/// Rows satisfying `keep`, counted by a plain loop.
fn count(n: usize, keep: impl Fn(usize) -> bool) -> usize {
    (0..n).filter(|&i| keep(i)).count()
}

pub fn oracle_di(inst: &Instance) -> Ratio<u64> {
    let n = inst.z.len();
    let rate = |g: u8| {
        frac(
            count(n, |i| inst.z[i] == g && inst.f[i] > 0.0),
            count(n, |i| inst.z[i] == g),
        )
    };
    absdiff(rate(0), rate(1))
}

pub fn oracle_me(inst: &Instance) -> Ratio<u64> {
    let n = inst.z.len();
    let rate = |g: u8| {
        frac(
            count(n, |i| {
                inst.z[i] == g && ((inst.f[i] > 0.0) as u8) != inst.y[i]
            }),
            count(n, |i| inst.z[i] == g),
        )
    };
    absdiff(rate(0), rate(1))
}

pub fn oracle_eop(inst: &Instance) -> Option<Ratio<u64>> {
    let n = inst.z.len();
    let pos = |g: u8| count(n, |i| inst.z[i] == g && inst.y[i] == 1);
    if pos(0) == 0 || pos(1) == 0 {
        return None;
    }
    let tpr = |g: u8| {
        frac(
            count(n, |i| inst.z[i] == g && inst.y[i] == 1 && inst.f[i] > 0.0),
            pos(g),
        )
    };
    Some(absdiff(tpr(0), tpr(1)))
}

pub fn oracle_msp(inst: &Instance) -> f64 {
    let mean = |g: u8| {
        let v: Vec<f64> = (0..inst.z.len())
            .filter(|&i| inst.z[i] == g)
            .map(|i| 1.0 / (1.0 + (-inst.f[i]).exp()))
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    (mean(1) - mean(0)).abs()
}

/// `a_{ij}` within the rows selected by `keep`.
fn a(inst: &Instance, keep: &dyn Fn(usize) -> bool, i: u8, j: u8) -> Ratio<u64> {
    let n = inst.z.len();
    let cs = preds(&inst.fstar);
    let cf = preds(&inst.f);
    frac(
        count(n, |r| keep(r) && cs[r] == i && cf[r] == j),
        count(n, keep),
    )
}

fn ref_rate(inst: &Instance, keep: &dyn Fn(usize) -> bool) -> Ratio<u64> {
    let n = inst.z.len();
    frac(count(n, |r| keep(r) && inst.fstar[r] > 0.0), count(n, keep))
}

pub fn oracle_wgf(inst: &Instance) -> Ratio<u64> {
    (0..2u8)
        .map(|g| {
            let keep = |r: usize| inst.z[r] == g;
            a(inst, &keep, 0, 1).min(a(inst, &keep, 1, 0))
        })
        .max()
        .unwrap()
}

fn directed(inst: &Instance, label: Option<u8>) -> Ratio<u64> {
    let keep = |g: u8| move |r: usize| inst.z[r] == g && label.is_none_or(|y| inst.y[r] == y);
    let (u, v) = if ref_rate(inst, &keep(0)) <= ref_rate(inst, &keep(1)) {
        (0, 1)
    } else {
        (1, 0)
    };
    a(inst, &keep(u), 1, 0).max(a(inst, &keep(v), 0, 1))
}

pub fn oracle_dwgf_di(inst: &Instance) -> Ratio<u64> {
    directed(inst, None)
}

pub fn oracle_dwgf_eop(inst: &Instance) -> Ratio<u64> {
    let neg = (0..2u8)
        .map(|g| {
            let keep = |r: usize| inst.z[r] == g && inst.y[r] == 0;
            a(inst, &keep, 0, 1).min(a(inst, &keep, 1, 0))
        })
        .max()
        .unwrap();
    directed(inst, Some(1)).max(neg)
}

/// Share of strictly concordant pairs in group `g`, by enumeration.
pub fn oracle_tau(f: &[f64], fstar: &[f64], z: &[u8], g: u8) -> Ratio<u64> {
    let rows: Vec<usize> = (0..z.len()).filter(|&i| z[i] == g).collect();
    let mut hits = 0;
    let mut total = 0;
    for a in 0..rows.len() {
        for b in a + 1..rows.len() {
            let (i, j) = (rows[a], rows[b]);
            total += 1;
            if (f[i] - f[j]) * (fstar[i] - fstar[j]) > 0.0 {
                hits += 1;
            }
        }
    }
    frac(hits, total)
}

/// Gaussian features with random groups and labels; both groups hold
/// positive and negative labels.
pub fn batch(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset<f64> {
    loop {
        let raw = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        let z: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let ok =
            (0..2).all(|g| (0..2).all(|c| (0..n).filter(|&i| z[i] == g && y[i] == c).count() >= 2));
        if ok {
            let names = (0..p).map(|j| format!("x{j}")).collect();
            return Dataset::from_raw("random", raw, z, y, names, None, DatasetMeta::default())
                .unwrap();
        }
    }
}

pub fn random_model(rng: &mut ChaCha8Rng, kind: ModelKind, p: usize, scale: f64) -> Model<f64> {
    let params = (0..kind.n_params(p))
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    Model::new(kind, p, 0, params).unwrap()
}

pub enum GradCheck {
    Pass,
    /// A kink lies within the finite-difference stencil.
    Kink,
    Fail(String),
}

/// Central differences with step `h` against the analytic parameter gradient.
pub fn grad_check(
    model: &Model<f64>,
    obj: &dyn ScoreObjective<f64>,
    design: &Design<f64>,
    h: f64,
    rtol: f64,
) -> GradCheck {
    let at = |params: Vec<f64>| {
        model
            .with_params(params)
            .unwrap()
            .objective_gradient_design(obj, design)
            .unwrap()
    };
    let base = at(model.params().to_vec());
    let scale = base
        .grad
        .iter()
        .fold(0.0f64, |m, g| m.max(g.abs()))
        .max(1e-8);
    let mut kink = false;
    for j in 0..base.grad.len() {
        let mut plus = model.params().to_vec();
        let mut minus = plus.clone();
        plus[j] += h;
        minus[j] -= h;
        let (gp, gm) = (at(plus), at(minus));
        let fd = (gp.value - gm.value) / (2.0 * h);
        if (fd - base.grad[j]).abs() <= rtol * scale {
            continue;
        }
        if (gp.grad[j] - gm.grad[j]).abs() > 1e-3 * scale {
            kink = true;
            continue;
        }
        return GradCheck::Fail(format!(
            "{}: coordinate {j}: analytic {} vs finite difference {fd}",
            obj.name(),
            base.grad[j]
        ));
    }
    if kink {
        GradCheck::Kink
    } else {
        GradCheck::Pass
    }
}

/// Largest gap between the empirical CDFs of two samples.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let cdf = |v: &[f64], t: f64| v.iter().filter(|&&x| x <= t).count() as f64 / v.len() as f64;
    a.iter()
        .chain(b)
        .map(|&t| (cdf(a, t) - cdf(b, t)).abs())
        .fold(0.0, f64::max)
}
