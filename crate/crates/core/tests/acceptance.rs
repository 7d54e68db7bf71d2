//! Acceptance suite: every criterion runs at its pinned tolerance and prints
//! one PASS/FAIL line. Adult data is read from `data/adult` at the workspace root.

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use num_rational::Ratio;
use wgf::data::{
    load_dataset_with_test, make_synthetic, split, Dataset, DatasetName, SplitMode, SplitSpec,
};
use wgf::metrics::{
    bgf_metrics, cross_table, dwgf_value, kendall_tau, wgf_value, CrossTable, DwgfTarget,
    FairnessReport, TauMode,
};
use wgf::models::{CrossEntropy, Design, ModelKind, ScoreObjective};
use wgf::penalties::{
    bgf_objective, BgfKind, KendallSurrogate, PenaltySpec, ReferenceModel, WgfKind, WgfSurrogate,
};
use wgf::repair::{fit_quantile_repair, massage, swap_count};
use wgf::training::{
    report, select, sweep, train_constrained, train_constrained_model, train_unconstrained,
    wgf_badness, write_frontier_csv, write_trace_csv, OptimizerConfig, SweepCell, SweepGrid,
    SweepOptions, SweepOutcome,
};
use wgf::{Model64, Result};

type Outcome = std::result::Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/adult")
}

/// Both Adult splits with the reference model trained on the official training file.
struct Adult {
    train: Dataset<f64>,
    test: Dataset<f64>,
    reference: ReferenceModel<f64>,
}

/// Penalized runs use a shortened schedule.
const EPOCHS: usize = 2_000;

fn load_adult() -> Result<Adult> {
    let dir = data_dir();
    let ds = load_dataset_with_test::<f64>(
        DatasetName::Adult,
        dir.join("adult.data"),
        dir.join("adult.test"),
    )?;
    let spec = SplitSpec {
        mode: SplitMode::FixedTestFile,
        ratio: 0.8,
        repeats: 1,
        seed: 0,
    };
    let (train, test) = split(&ds, &spec, 0)?;
    let fstar = train_unconstrained(
        ModelKind::Linear,
        &train,
        &OptimizerConfig::new(1.0, 10_000, 0),
    )?;
    let reference = ReferenceModel::new(fstar, &train)?;
    Ok(Adult {
        train,
        test,
        reference,
    })
}

fn adult_sweep(
    adult: &Adult,
    bgf: BgfKind,
    wgf: WgfKind,
    lambdas: &[f64],
    etas: &[f64],
    lr: f64,
    epsilon: f64,
) -> Result<SweepOutcome<f64>> {
    let base = PenaltySpec::new(bgf, wgf, 0.0, 0.0, epsilon, 1.0)?;
    let grid = SweepGrid {
        lambdas: lambdas.to_vec(),
        etas: etas.to_vec(),
    };
    let opt = OptimizerConfig::new(lr, EPOCHS, 0);
    sweep(
        ModelKind::Linear,
        &adult.train,
        &adult.test,
        &adult.reference,
        &grid,
        &base,
        &opt,
        &SweepOptions::default(),
    )
}

/// The cells with `eta == 0` and those with `eta > 0`.
fn partition(out: &SweepOutcome<f64>) -> (Vec<SweepCell<f64>>, Vec<SweepCell<f64>>) {
    out.cells.iter().cloned().partition(|c| c.eta == 0.0)
}

fn describe(c: &SweepCell<f64>, d: &str) -> String {
    let r = &c.result.report_test;
    format!(
        "{d} cell (lambda {}, eta {}): acc {:.4}, auc {:.4}, bgf {:.4}, wgf {:.4}",
        c.lambda,
        c.eta,
        r.acc,
        r.auc.unwrap_or(f64::NAN),
        c.bgf_exact.unwrap_or(f64::NAN),
        c.wgf_exact
    )
}

fn criterion_1(adult: &Adult) -> Outcome {
    let r = report(&adult.reference.fstar, &adult.reference.fstar, &adult.test)
        .map_err(|e| e.to_string())?;
    let eop = r.eop.unwrap_or(f64::NAN);
    let ok = (r.acc - 0.852).abs() <= 0.010
        && (r.di - 0.172).abs() <= 0.020
        && (eop - 0.070).abs() <= 0.015
        && (r.me - 0.117).abs() <= 0.020;
    check(
        ok,
        format!(
            "acc {:.4}, DI {:.4}, EOp {:.4}, ME {:.4}",
            r.acc, r.di, eop, r.me
        ),
    )
}

#[allow(clippy::too_many_arguments)]
fn classifier_criterion(
    adult: &Adult,
    bgf: BgfKind,
    wgf: WgfKind,
    lambdas: &[f64],
    etas: &[f64],
    lr: f64,
    bgf_max: f64,
    acc_min: f64,
    wgf_max: f64,
    sweeps: &mut Vec<(WgfKind, SweepOutcome<f64>)>,
) -> std::result::Result<(String, SweepOutcome<f64>), String> {
    let out =
        adult_sweep(adult, bgf, wgf, lambdas, etas, lr, bgf_max).map_err(|e| e.to_string())?;
    sweeps.push((wgf, out.clone()));
    let (plain, doubly) = partition(&out);
    let bgf_cell = plain
        .iter()
        .filter(|c| c.bgf_exact.is_some_and(|b| b <= bgf_max))
        .max_by(|a, b| {
            a.result
                .report_test
                .acc
                .total_cmp(&b.result.report_test.acc)
        });
    let (i, feasible) = select(&doubly, bgf_max);
    let df = &doubly[i];
    let mut detail = String::new();
    let bgf_ok = match bgf_cell {
        Some(c) => {
            detail.push_str(&describe(c, "BGF"));
            c.result.report_test.acc >= acc_min
        }
        None => {
            detail.push_str("no eta = 0 cell meets the BGF bound");
            false
        }
    };
    detail.push_str("; ");
    detail.push_str(&describe(df, "DF"));
    let ok = bgf_ok && feasible && df.wgf_exact <= wgf_max;
    if ok {
        Ok((detail, out))
    } else {
        Err(detail)
    }
}

fn criterion_2(
    adult: &Adult,
    sweeps: &mut Vec<(WgfKind, SweepOutcome<f64>)>,
) -> std::result::Result<(String, SweepOutcome<f64>), String> {
    let (mut detail, out) = classifier_criterion(
        adult,
        BgfKind::HingeDi,
        WgfKind::DirectedDi,
        &[0.1, 0.35, 0.6, 1.0],
        &[0.0, 1.0, 5.0],
        0.1,
        0.045,
        0.818,
        0.008,
        sweeps,
    )?;
    // the selected doubly fair cell improves on every eta = 0 cell meeting the bound
    let (plain, doubly) = partition(&out);
    let df = &doubly[select(&doubly, 0.045).0];
    let best_plain = plain
        .iter()
        .filter(|c| c.bgf_exact.is_some_and(|b| b <= 0.045))
        .map(|c| c.wgf_exact)
        .fold(f64::INFINITY, f64::min);
    detail.push_str(&format!("; best eta = 0 dWGF {best_plain:.4}"));
    if df.wgf_exact < best_plain {
        Ok((detail, out))
    } else {
        Err(detail)
    }
}

fn criterion_5(adult: &Adult, sweeps: &mut Vec<(WgfKind, SweepOutcome<f64>)>) -> Outcome {
    let out = adult_sweep(
        adult,
        BgfKind::Msp,
        WgfKind::Kendall,
        &[0.6, 1.0],
        &[0.0, 0.5, 1.0],
        0.01,
        0.05,
    )
    .map_err(|e| e.to_string())?;
    sweeps.push((WgfKind::Kendall, out.clone()));
    let (plain, doubly) = partition(&out);
    let auc = |c: &SweepCell<f64>| c.result.report_test.auc.unwrap_or(f64::NAN);
    let tau = |c: &SweepCell<f64>| c.result.report_test.tau_bar;
    let Some(bgf_cell) = plain
        .iter()
        .filter(|c| c.bgf_exact.is_some_and(|b| b <= 0.05))
        .max_by(|a, b| auc(a).total_cmp(&auc(b)))
    else {
        return Err("no eta = 0 cell has MSP <= 0.05".into());
    };
    let (i, feasible) = select(&doubly, 0.05);
    let df = &doubly[i];
    let detail = format!(
        "BGF cell (lambda {}): auc {:.4}, MSP {:.4}, tau {:.4}; DF cell (lambda {}, eta {}): auc {:.4}, MSP {:.4}, tau {:.4}",
        bgf_cell.lambda,
        auc(bgf_cell),
        bgf_cell.bgf_exact.unwrap(),
        tau(bgf_cell),
        df.lambda,
        df.eta,
        auc(df),
        df.bgf_exact.unwrap_or(f64::NAN),
        tau(df)
    );
    let ok = auc(bgf_cell) >= 0.86
        && (0.80..=0.91).contains(&tau(bgf_cell))
        && feasible
        && tau(df) >= tau(bgf_cell) + 0.02
        && auc(df) >= auc(bgf_cell) - 0.005;
    check(ok, detail)
}

/// For every fixed lambda, the best training-set WGF badness over eta > 0 is
/// no worse than the eta = 0 cell.
fn sweep_monotonicity(sweeps: &[(WgfKind, SweepOutcome<f64>)]) -> Outcome {
    let mut details = Vec::new();
    let mut ok = !sweeps.is_empty();
    for (kind, out) in sweeps {
        let badness = |c: &SweepCell<f64>| wgf_badness(&c.result.report_train, kind.metric());
        for base in out.cells.iter().filter(|c| c.eta == 0.0) {
            let best = out
                .cells
                .iter()
                .filter(|c| c.lambda == base.lambda && c.eta > 0.0)
                .map(badness)
                .fold(f64::INFINITY, f64::min);
            if best > badness(base) {
                ok = false;
                details.push(format!(
                    "{kind} lambda {}: {best:.4} > {:.4}",
                    base.lambda,
                    badness(base)
                ));
            }
        }
    }
    if details.is_empty() {
        details.push(format!("holds for every lambda in {} sweeps", sweeps.len()));
    }
    check(ok, details.join("; "))
}

fn criterion_6(adult: &Adult) -> Outcome {
    let run = || -> Result<(FairnessReport<f64>, FairnessReport<f64>, usize)> {
        let (massaged, plan) = massage(&adult.train, &adult.reference.fstar)?;
        let reference = ReferenceModel::new(adult.reference.fstar.clone(), &massaged)?;
        let opt = OptimizerConfig::new(0.1, EPOCHS, 0);
        let spec = PenaltySpec::new(BgfKind::None, WgfKind::DirectedDi, 0.0, 0.0, 1.0, 1.0)?;
        let plain = train_constrained(
            ModelKind::Linear,
            &massaged,
            &adult.test,
            &reference,
            &spec,
            &opt,
        )?;
        let doubly = train_constrained(
            ModelKind::Linear,
            &massaged,
            &adult.test,
            &reference,
            &spec.with_weights(0.0, 1.0),
            &opt,
        )?;
        Ok((plain.report_test, doubly.report_test, plan.promote.len()))
    };
    let (plain, doubly, k) = run().map_err(|e| e.to_string())?;
    let ok = doubly.di <= 0.055
        && doubly.dwgf_di <= 0.006
        && doubly.acc >= 0.826
        && doubly.di < plain.di;
    check(
        ok,
        format!(
            "{k} swaps; eta 0: acc {:.4}, DI {:.4}, dWGF {:.4}; eta 1: acc {:.4}, DI {:.4}, dWGF {:.4}",
            plain.acc, plain.di, plain.dwgf_di, doubly.acc, doubly.di, doubly.dwgf_di
        ),
    )
}

fn criterion_7() -> Outcome {
    let ct = CrossTable::from_counts([[[4592, 350], [13, 466]], [[7966, 86], [945, 1863]]]);
    let exact = wgf::metrics::dwgf_di_exact(&ct);
    let v: f64 = dwgf_value(&ct, DwgfTarget::Di).map_err(|e| e.to_string())?;
    let ok = exact == Ratio::new(13, 5421).max(Ratio::new(86, 10860))
        && (v - 0.00792).abs() < 5e-6
        && (v - 0.008).abs() <= 0.001;
    check(ok, format!("dWGF = {exact} = {v:.5}"))
}

fn criterion_8() -> Outcome {
    let mut rng = rng(8);
    let names: Vec<String> = ["cross_entropy"]
        .iter()
        .map(|s| s.to_string())
        .chain(
            BgfKind::ALL
                .iter()
                .filter(|k| **k != BgfKind::None)
                .map(|k| k.to_string()),
        )
        .chain(
            [
                WgfKind::Undirected,
                WgfKind::DirectedDi,
                WgfKind::DirectedEop,
                WgfKind::Kendall,
            ]
            .iter()
            .map(|k| k.to_string()),
        )
        .collect();
    let mut summary = Vec::new();
    for (idx, name) in names.iter().enumerate() {
        let (mut passed, mut kinks, mut attempts) = (0, 0, 0);
        while passed < 50 {
            attempts += 1;
            if attempts > 2_000 {
                return Err(format!(
                    "{name}: only {passed} kink-free instances in 2000 draws"
                ));
            }
            let kind = if attempts % 2 == 0 {
                ModelKind::Linear
            } else {
                ModelKind::Mlp
            };
            let ds = batch(&mut rng, 24, 3);
            let model = random_model(&mut rng, kind, 3, 0.7);
            let fstar = random_model(&mut rng, ModelKind::Linear, 3, 1.0);
            let reference = ReferenceModel::new(fstar, &ds).unwrap();
            let (z, y) = (ds.sensitive(), ds.labels());
            let obj: Box<dyn ScoreObjective<f64>> = match idx {
                0 => Box::new(CrossEntropy::new(y)),
                i if i <= 7 => bgf_objective(BgfKind::ALL[i - 1], z, y).unwrap().unwrap(),
                8 => Box::new(
                    WgfSurrogate::new(WgfKind::Undirected, &reference.fstar_preds, z, y)
                        .unwrap()
                        .unwrap(),
                ),
                9 => Box::new(
                    WgfSurrogate::new(WgfKind::DirectedDi, &reference.fstar_preds, z, y)
                        .unwrap()
                        .unwrap(),
                ),
                10 => Box::new(
                    WgfSurrogate::new(WgfKind::DirectedEop, &reference.fstar_preds, z, y)
                        .unwrap()
                        .unwrap(),
                ),
                _ => Box::new(
                    KendallSurrogate::new(&reference.fstar_scores, z, 40, attempts as u64).unwrap(),
                ),
            };
            match grad_check(
                &model,
                obj.as_ref(),
                &Design::new(ds.features()),
                1e-6,
                1e-4,
            ) {
                GradCheck::Pass => passed += 1,
                GradCheck::Kink => kinks += 1,
                GradCheck::Fail(msg) => return Err(msg),
            }
        }
        summary.push(format!("{name} ({kinks} kinked draws skipped)"));
    }
    Ok(format!("50 checks each: {}", summary.join(", ")))
}

fn criterion_9() -> Outcome {
    let mut rng = rng(9);
    for k in 0..200 {
        let n = 4 + (k * 37) % 197;
        let inst = instance(&mut rng, n, k % 3 == 0);
        let m = bgf_metrics(&inst.f, &inst.z, &inst.y).map_err(|e| e.to_string())?;
        let ct = cross_table(&preds(&inst.fstar), &preds(&inst.f), &inst.z, Some(&inst.y))
            .map_err(|e| e.to_string())?;
        let tau = kendall_tau(&inst.f, &inst.fstar, &inst.z, TauMode::Exact)
            .map_err(|e| e.to_string())?;
        let fail = |what: &str| {
            Err(format!(
                "instance {k} (n = {n}): {what} differs from the brute-force value"
            ))
        };
        if m.di != to_f64(oracle_di(&inst)) {
            return fail("DI");
        }
        if m.me != to_f64(oracle_me(&inst)) {
            return fail("ME");
        }
        if m.eop != oracle_eop(&inst).map(to_f64) {
            return fail("EOp");
        }
        if (m.msp - oracle_msp(&inst)).abs() > 1e-12 {
            return fail("MSP");
        }
        if wgf::metrics::wgf_exact(&ct) != oracle_wgf(&inst) {
            return fail("WGF");
        }
        if wgf::metrics::dwgf_di_exact(&ct) != oracle_dwgf_di(&inst) {
            return fail("dWGF (DI)");
        }
        if wgf::metrics::dwgf_eop_exact(&ct).unwrap() != oracle_dwgf_eop(&inst) {
            return fail("dWGF (EOp)");
        }
        for g in 0..2u8 {
            if tau.tau[g as usize] != to_f64(oracle_tau(&inst.f, &inst.fstar, &inst.z, g)) {
                return fail("tau");
            }
        }
    }
    Ok("200 instances with n <= 200 match exactly".into())
}

fn criterion_10() -> Outcome {
    let mut rng = rng(10);
    let mut worst = f64::INFINITY;
    for k in 0..1000 {
        let n = 20 + (k * 13) % 181;
        let ds = batch(&mut rng, n, 3);
        let kind = if k % 2 == 0 {
            ModelKind::Linear
        } else {
            ModelKind::Mlp
        };
        let model = random_model(&mut rng, kind, 3, 1.0);
        let fstar = random_model(&mut rng, ModelKind::Linear, 3, 1.0);
        let reference = ReferenceModel::new(fstar, &ds).unwrap();
        let scores = model.scores_on(&ds).unwrap();
        let (z, y) = (ds.sensitive(), ds.labels());
        let ct = cross_table(&reference.fstar_preds, &preds(&scores), z, Some(y)).unwrap();
        let exact = [
            wgf_value::<f64>(&ct),
            dwgf_value::<f64>(&ct, DwgfTarget::Di).unwrap(),
            dwgf_value::<f64>(&ct, DwgfTarget::Eop).unwrap(),
        ];
        for (kind, e) in [
            WgfKind::Undirected,
            WgfKind::DirectedDi,
            WgfKind::DirectedEop,
        ]
        .into_iter()
        .zip(exact)
        {
            let s = WgfSurrogate::new(kind, &reference.fstar_preds, z, y)
                .unwrap()
                .unwrap();
            let v = s.evaluate(&scores, &mut vec![0.0; n]);
            if v < e {
                return Err(format!(
                    "model {k}: {kind} surrogate {v} below exact value {e}"
                ));
            }
            worst = worst.min(v - e);
        }
    }
    Ok(format!("1000 models, smallest surrogate margin {worst:.4}"))
}

fn criterion_11() -> Outcome {
    let mut rng = rng(11);
    for k in 0..50 {
        let inst = instance(&mut rng, 10 + k * 6, false);
        let base = kendall_tau(&inst.f, &inst.fstar, &inst.z, TauMode::Exact).unwrap();
        let transforms: [fn(f64) -> f64; 3] =
            [|x| (x / 3.0).exp(), |x| x * x * x + x, |x| 2.0 * x + 5.0];
        for t in transforms {
            let f2: Vec<f64> = inst.f.iter().map(|&x| t(x)).collect();
            let s2: Vec<f64> = inst.fstar.iter().map(|&x| t(x)).collect();
            if kendall_tau(&f2, &inst.fstar, &inst.z, TauMode::Exact)
                .unwrap()
                .tau
                != base.tau
                || kendall_tau(&inst.f, &s2, &inst.z, TauMode::Exact)
                    .unwrap()
                    .tau
                    != base.tau
            {
                return Err(format!(
                    "instance {k}: tau changed under a strictly increasing transform"
                ));
            }
        }
        if kendall_tau(&inst.fstar, &inst.fstar, &inst.z, TauMode::Exact)
            .unwrap()
            .tau
            != [1.0, 1.0]
        {
            return Err(format!("instance {k}: tau(f*, f*) != 1"));
        }
    }
    let inst = instance(&mut rng, 2000, false);
    let exact = kendall_tau(&inst.f, &inst.fstar, &inst.z, TauMode::Exact).unwrap();
    let mut close = 0;
    let mut worst = 0.0f64;
    for seed in 0..100 {
        let s = kendall_tau(
            &inst.f,
            &inst.fstar,
            &inst.z,
            TauMode::Sampled {
                pairs: 50_000,
                seed,
            },
        )
        .unwrap();
        let err = (0..2)
            .map(|g| (s.tau[g] - exact.tau[g]).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
        if err <= 0.01 {
            close += 1;
        }
    }
    check(close >= 99, format!("invariances hold on 50 instances; sampled tau within 0.01 for {close}/100 seeds (worst {worst:.4})"))
}

fn criterion_12() -> Outcome {
    let mut rng = rng(12);
    let mut worst_ks = 0.0f64;
    for k in 0..100 {
        let inst = instance(&mut rng, 8 + k * 5, false);
        let map = fit_quantile_repair(&inst.f, &inst.z).unwrap();
        let repaired = map.apply_all(&inst.f, &inst.z).unwrap();
        let group = |g: u8| -> Vec<f64> {
            (0..inst.z.len())
                .filter(|&i| inst.z[i] == g)
                .map(|i| repaired[i])
                .collect()
        };
        let n_min = (0..2u8)
            .map(|g| inst.z.iter().filter(|&&z| z == g).count())
            .min()
            .unwrap() as f64;
        let ks = ks_distance(&group(0), &group(1));
        worst_ks = worst_ks.max(ks * n_min);
        if ks > 2.0 / n_min {
            return Err(format!("instance {k}: KS distance {ks} above 2/{n_min}"));
        }
        for g in 0..2u8 {
            if oracle_tau(&repaired, &inst.f, &inst.z, g) != Ratio::from_integer(1) {
                return Err(format!("instance {k}: repair reordered group {g}"));
            }
        }
    }
    for k in 0..300u64 {
        let ds = batch(&mut rng, 8 + (k % 23) as usize, 1);
        let ranker = random_model(&mut rng, ModelKind::Linear, 1, 1.0);
        let (out, plan) = massage(&ds, &ranker).map_err(|e| e.to_string())?;
        let count = |d: &Dataset<f64>, g: u8, pos: bool| {
            (0..d.n())
                .filter(|&i| d.sensitive()[i] == g && (!pos || d.labels()[i] == 1))
                .count() as u64
        };
        let n_g = [count(&ds, 0, false), count(&ds, 1, false)];
        let rate = |d: &Dataset<f64>, g: u8| Ratio::new(count(d, g, true), n_g[g as usize]);
        let bound = Ratio::new(1, n_g[0].min(n_g[1]));
        let gap = |a: Ratio<u64>, b: Ratio<u64>| if a > b { a - b } else { b - a };
        if gap(rate(&out, 0), rate(&out, 1)) > bound {
            return Err(format!(
                "fixture {k}: post-massaging rates differ by more than 1/min(n0, n1)"
            ));
        }
        // brute force: no smaller balanced swap count meets the bound
        let lo = plan.raised_group;
        let hi = 1 - lo;
        for kk in 0..plan.promote.len() as u64 {
            let r_lo = Ratio::new(count(&ds, lo, true) + kk, n_g[lo as usize]);
            let r_hi = Ratio::new(count(&ds, hi, true) - kk, n_g[hi as usize]);
            if gap(r_lo, r_hi) <= bound {
                return Err(format!(
                    "fixture {k}: {kk} swaps already suffice, {} used",
                    plan.promote.len()
                ));
            }
        }
        let pos = [count(&ds, lo, true), count(&ds, hi, true)];
        if swap_count(pos, [n_g[lo as usize], n_g[hi as usize]]) != Some(plan.promote.len() as u64)
        {
            return Err(format!("fixture {k}: swap count disagrees with the plan"));
        }
    }
    Ok(format!("quantile repair on 100 instances (max KS * min n = {worst_ks:.2}); massaging on 300 fixtures with n <= 30"))
}

fn criterion_13(adult: &Adult) -> Outcome {
    let same = |a: &Model64, b: &Model64| {
        a.params()
            .iter()
            .zip(b.params())
            .all(|(x, y)| x.to_bits() == y.to_bits())
    };
    let opt = OptimizerConfig::new(0.1, 300, 4);
    let spec =
        PenaltySpec::new(BgfKind::HingeDi, WgfKind::DirectedDi, 0.0, 0.0, 0.05, 0.01).unwrap();
    let plain =
        train_unconstrained(ModelKind::Linear, &adult.train, &opt).map_err(|e| e.to_string())?;
    let reference = ReferenceModel::new(plain.clone(), &adult.train).unwrap();
    let (model, _) =
        train_constrained_model(ModelKind::Linear, &adult.train, &reference, &spec, &opt)
            .map_err(|e| e.to_string())?;
    if !same(&plain, &model) {
        return Err("adult linear: constrained run differs from the unconstrained run".into());
    }
    let ds = make_synthetic::<f64>(300, 4, 1.0, 13).unwrap();
    let spec = PenaltySpec::new(BgfKind::Msp, WgfKind::Kendall, 0.0, 0.0, 0.05, 0.01).unwrap();
    let plain = train_unconstrained(ModelKind::Mlp, &ds, &opt).unwrap();
    let reference = ReferenceModel::new(plain.clone(), &ds).unwrap();
    let (model, _) = train_constrained_model(ModelKind::Mlp, &ds, &reference, &spec, &opt).unwrap();
    check(
        same(&plain, &model),
        "bit-identical on adult (linear) and synthetic (network)".into(),
    )
}

fn criterion_14(out: &SweepOutcome<f64>) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let trace_path = dir.path().join("trace.csv");
    let frontier_path = dir.path().join("frontier.csv");
    let df = out
        .cells
        .iter()
        .find(|c| c.eta > 0.0)
        .ok_or("no eta > 0 cell")?;
    write_trace_csv(&trace_path, &df.result.loss_trace).map_err(|e| e.to_string())?;
    write_frontier_csv(&frontier_path, &out.cells).map_err(|e| e.to_string())?;
    let columns = |path: &Path, a: &str, b: &str| -> std::result::Result<usize, String> {
        let mut r = csv::Reader::from_path(path).map_err(|e| e.to_string())?;
        let h = r.headers().map_err(|e| e.to_string())?.clone();
        let ia = h
            .iter()
            .position(|c| c == a)
            .ok_or(format!("{a} missing"))?;
        let ib = h
            .iter()
            .position(|c| c == b)
            .ok_or(format!("{b} missing"))?;
        let mut rows = 0;
        for rec in r.records() {
            let rec = rec.map_err(|e| e.to_string())?;
            for i in [ia, ib] {
                let v: f64 = rec[i]
                    .parse()
                    .map_err(|_| format!("non-numeric {}", &rec[i]))?;
                if !v.is_finite() {
                    return Err(format!("non-finite value in {}", path.display()));
                }
            }
            rows += 1;
        }
        Ok(rows)
    };
    let t = columns(&trace_path, "wgf_surr", "exact_wgf")?;
    let f = columns(&frontier_path, "wgf_surr", "wgf_exact")?;
    check(
        t > 1 && f == out.cells.len(),
        format!("trace.csv has {t} finite rows, frontier.csv {f}"),
    )
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(u32, Outcome, f64)> = Vec::new();
    let mut monotone = true;
    let mut record = |id: u32, t: Instant, o: Outcome| {
        let secs = t.elapsed().as_secs_f64();
        match &o {
            Ok(d) => println!("criterion {id}: PASS ({secs:.1}s) {d}"),
            Err(d) => println!("criterion {id}: FAIL ({secs:.1}s) {d}"),
        }
        results.push((id, o, secs));
    };
    let t = Instant::now();
    match load_adult() {
        Ok(adult) => {
            record(1, t, criterion_1(&adult));
            let t = Instant::now();
            let mut sweeps = Vec::new();
            let c2 = criterion_2(&adult, &mut sweeps);
            let sweep2 = c2.as_ref().ok().map(|(_, o)| o.clone());
            record(2, t, c2.map(|(d, _)| d));
            let t = Instant::now();
            let c3 = classifier_criterion(
                &adult,
                BgfKind::HingeMe,
                WgfKind::Undirected,
                &[0.35, 1.0, 2.0],
                &[0.0, 0.5, 1.0],
                0.1,
                0.075,
                0.819,
                0.010,
                &mut sweeps,
            );
            record(3, t, c3.map(|(d, _)| d));
            let t = Instant::now();
            let c4 = classifier_criterion(
                &adult,
                BgfKind::HingeEop,
                WgfKind::DirectedEop,
                &[0.35, 1.0, 2.0],
                &[0.0, 1.0, 5.0],
                0.01,
                0.025,
                0.836,
                0.004,
                &mut sweeps,
            );
            record(4, t, c4.map(|(d, _)| d));
            let t = Instant::now();
            record(5, t, criterion_5(&adult, &mut sweeps));
            match sweep_monotonicity(&sweeps) {
                Ok(d) => println!("sweep monotonicity: PASS {d}"),
                Err(d) => {
                    println!("sweep monotonicity: FAIL {d}");
                    monotone = false;
                }
            }
            let t = Instant::now();
            record(6, t, criterion_6(&adult));
            let t = Instant::now();
            record(7, t, criterion_7());
            for (id, f) in [
                (8, criterion_8 as fn() -> Outcome),
                (9, criterion_9),
                (10, criterion_10),
                (11, criterion_11),
                (12, criterion_12),
            ] {
                let t = Instant::now();
                record(id, t, f());
            }
            let t = Instant::now();
            record(13, t, criterion_13(&adult));
            let t = Instant::now();
            let c14 = match &sweep2 {
                Some(o) => criterion_14(o),
                None => adult_sweep(
                    &adult,
                    BgfKind::HingeDi,
                    WgfKind::DirectedDi,
                    &[0.35],
                    &[0.0, 1.0],
                    0.1,
                    0.045,
                )
                .map_err(|e| e.to_string())
                .and_then(|o| criterion_14(&o)),
            };
            record(14, t, c14);
        }
        Err(e) => {
            for id in 1..=14 {
                let o = if matches!(id, 7..=12) {
                    match id {
                        7 => criterion_7(),
                        8 => criterion_8(),
                        9 => criterion_9(),
                        10 => criterion_10(),
                        11 => criterion_11(),
                        _ => criterion_12(),
                    }
                } else {
                    Err(format!(
                        "adult data unavailable under {}: {e}",
                        data_dir().display()
                    ))
                };
                record(id, Instant::now(), o);
            }
        }
    }
    let failed: Vec<u32> = results
        .iter()
        .filter(|r| r.1.is_err())
        .map(|r| r.0)
        .collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0}s",
        results.len() - failed.len(),
        results.len(),
        start.elapsed().as_secs_f64()
    );
    if !failed.is_empty() || !monotone {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
