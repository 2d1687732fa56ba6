//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use fairsect::counts::{Confusion, CountsTable};
use fairsect::lp::LpProblem;
use fairsect::postprocess::{GroupParams, ModelStats, RocPoint, RtdpParams, SubgroupStats};
use fairsect::{AttributeSchema, RngStream};

/// Schema with `sizes[a]` labels on attribute `a`.
pub fn schema_of(sizes: &[usize]) -> AttributeSchema {
    AttributeSchema::new(sizes.iter().enumerate().map(|(a, &n)| {
        (
            format!("a{a}"),
            (0..n).map(|l| format!("v{l}")).collect::<Vec<_>>(),
        )
    }))
    .unwrap()
}

/// Counts table from per-subgroup `[tn, fp, fn, tp]` cells.
pub fn table(schema: AttributeSchema, cells: &[[u64; 4]]) -> CountsTable {
    let conf: Vec<Confusion> = cells
        .iter()
        .map(|c| Confusion {
            tn: c[0],
            fp: c[1],
            fn_: c[2],
            tp: c[3],
        })
        .collect();
    let n = conf.iter().map(Confusion::total).collect();
    let n1 = conf.iter().map(|c| c.tp + c.fn_).collect();
    CountsTable::from_parts(schema, n, n1, Some(conf)).unwrap()
}

/// Random ROC curves: `points` thresholds per subgroup, rates nondecreasing
/// as the threshold falls, ends slightly inside `(0, 1)` like smoothed
/// sentinels.
pub fn random_stats(k: usize, points: usize, rng: &mut RngStream) -> ModelStats {
    let labels: Vec<String> = (0..k).map(|i| format!("s{i}")).collect();
    let mut mass: Vec<f64> = (0..k).map(|_| 0.2 + rng.uniform()).collect();
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    let groups = mass
        .into_iter()
        .map(|mu| {
            let mut tprs: Vec<f64> = (0..points - 2)
                .map(|_| 0.01 + 0.98 * rng.uniform())
                .collect();
            let mut fprs: Vec<f64> = (0..points - 2)
                .map(|_| 0.01 + 0.98 * rng.uniform())
                .collect();
            tprs.sort_by(f64::total_cmp);
            fprs.sort_by(f64::total_cmp);
            let mut roc = vec![RocPoint {
                tau: 1.0,
                tpr: 0.004,
                fpr: 0.003,
            }];
            for j in 0..points - 2 {
                roc.push(RocPoint {
                    tau: 1.0 - (j + 1) as f64 / (points - 1) as f64,
                    tpr: tprs[j],
                    fpr: fprs[j],
                });
            }
            roc.push(RocPoint {
                tau: 0.0,
                tpr: 0.996,
                fpr: 0.997,
            });
            SubgroupStats {
                mu,
                mu1: 0.05 + 0.9 * rng.uniform(),
                roc,
            }
        })
        .collect();
    ModelStats {
        schema: AttributeSchema::new([("g", labels)]).unwrap(),
        groups,
        binary_cut: None,
    }
}

/// Random thresholds from each ROC grid and random probabilities.
pub fn random_params(stats: &ModelStats, rng: &mut RngStream) -> RtdpParams {
    let groups = stats
        .groups
        .iter()
        .map(|g| GroupParams {
            tau: g.roc[rng.below(g.roc.len() as u64) as usize].tau,
            p1: rng.uniform(),
            p0: rng.uniform(),
        })
        .collect();
    RtdpParams::new(stats.schema.clone(), groups).unwrap()
}

/// Random LP over `[0, 1]^4` that is feasible at a random interior point.
pub fn random_box_lp(rng: &mut RngStream) -> LpProblem {
    let nv = 4;
    let m = 2 + rng.below(5) as usize;
    let x0: Vec<f64> = (0..nv).map(|_| rng.uniform()).collect();
    let mut a_ub = Vec::with_capacity(m);
    let mut b_ub = Vec::with_capacity(m);
    for _ in 0..m {
        let row: Vec<f64> = (0..nv).map(|_| 2.0 * rng.uniform() - 1.0).collect();
        let at: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        b_ub.push(at + 0.4 * rng.uniform());
        a_ub.push(row);
    }
    LpProblem {
        c: (0..nv).map(|_| 2.0 * rng.uniform() - 1.0).collect(),
        a_ub,
        b_ub,
        bounds: vec![(0.0, 1.0); nv],
    }
}

#[allow(clippy::needless_range_loop)]
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Exact optimum of a bounded LP by enumerating every vertex.
pub fn vertex_optimum(p: &LpProblem) -> f64 {
    let nv = p.c.len();
    let mut rows: Vec<(Vec<f64>, f64)> =
        p.a_ub.iter().cloned().zip(p.b_ub.iter().copied()).collect();
    for (i, &(lo, hi)) in p.bounds.iter().enumerate() {
        let mut e = vec![0.0; nv];
        e[i] = 1.0;
        rows.push((e.clone(), hi));
        e[i] = -1.0;
        rows.push((e, -lo));
    }
    let feasible = |x: &[f64]| {
        rows.iter()
            .all(|(a, b)| a.iter().zip(x).map(|(a, x)| a * x).sum::<f64>() <= b + 1e-9)
    };
    let mut best = f64::INFINITY;
    let mut pick = vec![0usize; nv];
    fn next(pick: &mut [usize], n: usize) -> bool {
        let k = pick.len();
        for i in (0..k).rev() {
            if pick[i] < n - k + i {
                pick[i] += 1;
                for j in i + 1..k {
                    pick[j] = pick[j - 1] + 1;
                }
                return true;
            }
        }
        false
    }
    for (i, v) in pick.iter_mut().enumerate() {
        *v = i;
    }
    loop {
        let a = pick.iter().map(|&r| rows[r].0.clone()).collect();
        let b = pick.iter().map(|&r| rows[r].1).collect();
        if let Some(x) = solve_square(a, b) {
            if feasible(&x) {
                best = best.min(p.c.iter().zip(&x).map(|(c, x)| c * x).sum());
            }
        }
        if !next(&mut pick, rows.len()) {
            break;
        }
    }
    best
}

/// Exact minimum over feasible points of the `step` grid, provided it is
/// within `tol` of the LP optimum; `None` certifies that no grid point is.
///
/// Any such point satisfies every row plus `c·x ≤ opt + tol`, so it lies in
/// the bounding box of that polytope, and the box is enumerated in full.
pub fn grid_optimum_within(p: &LpProblem, step: f64, tol: f64) -> Option<f64> {
    let nv = p.c.len();
    let opt = vertex_optimum(p);
    let mut cut = p.clone();
    cut.a_ub.push(p.c.clone());
    cut.b_ub.push(opt + tol);
    let ranges: Vec<(i64, i64)> = (0..nv)
        .map(|i| {
            let mut q = cut.clone();
            q.c = vec![0.0; nv];
            q.c[i] = 1.0;
            let lo = vertex_optimum(&q) - 1e-9;
            q.c[i] = -1.0;
            let hi = -vertex_optimum(&q) + 1e-9;
            ((lo / step).ceil() as i64, (hi / step).floor() as i64)
        })
        .collect();
    let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; nv];
    'outer: loop {
        for i in 0..nv {
            x[i] = idx[i] as f64 * step;
        }
        let inside = p
            .bounds
            .iter()
            .zip(&x)
            .all(|(&(lo, hi), &v)| v >= lo && v <= hi)
            && p.a_ub
                .iter()
                .zip(&p.b_ub)
                .all(|(a, b)| a.iter().zip(&x).map(|(a, x)| a * x).sum::<f64>() <= *b);
        if inside {
            best = best.min(p.c.iter().zip(&x).map(|(c, x)| c * x).sum());
        }
        for i in (0..nv).rev() {
            idx[i] += 1;
            if idx[i] <= ranges[i].1 {
                continue 'outer;
            }
            idx[i] = ranges[i].0;
        }
        break;
    }
    (best <= opt + tol).then_some(best)
}

/// Runs the CLI binary with `args` and optional extra environment.
pub fn fairsect(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fairsect"));
    cmd.args(args)
        .env_remove("FAIRSECT_SEED")
        .env("RUST_LOG", "error");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Random statistics, thresholds and loss for which keeping every
/// thresholded prediction is strictly optimal: at the chosen point of each
/// subgroup the positive-class odds lie strictly between
/// `FPR/TPR · l01/l10` and `TNR/FNR · l01/l10`.
pub fn keep_optimal_case(
    k: usize,
    rng: &mut RngStream,
) -> (ModelStats, Vec<f64>, fairsect::postprocess::LossSpec) {
    let loss =
        fairsect::postprocess::LossSpec::new(0.2 + rng.uniform(), 0.2 + rng.uniform()).unwrap();
    let mut st = random_stats(k, 10, rng);
    let mut taus = Vec::with_capacity(k);
    for g in &mut st.groups {
        let ok: Vec<usize> = (0..g.roc.len())
            .filter(|&i| g.roc[i].tpr > g.roc[i].fpr)
            .collect();
        let pt = g.roc[ok[rng.below(ok.len() as u64) as usize]];
        let ratio = loss.l01 / loss.l10;
        let (lo, hi) = (
            (pt.fpr / pt.tpr * ratio).ln(),
            ((1.0 - pt.fpr) / (1.0 - pt.tpr) * ratio).ln(),
        );
        let odds = (lo + (hi - lo) * (0.05 + 0.9 * rng.uniform())).exp();
        g.mu1 = odds / (1.0 + odds);
        taus.push(pt.tau);
    }
    (st, taus, loss)
}
