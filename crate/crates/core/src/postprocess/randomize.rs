use crate::error::{Error, Result};
use crate::lp::{solve, LpProblem, LpStatus, DEFAULT_MAX_ITERS};

use super::{
    rate_bounds, FairnessConstraint, Fit, GroupParams, LossSpec, ModelStats, RateKind, RtdpParams,
};

/// How ratio bounds enter the linear program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Form {
    /// `r_s ≤ e^ε·r_{s'}` for every ordered pair.
    Pairwise,
    /// `L ≤ r_s ≤ e^ε·L` with one free level `L` per rate kind; the same
    /// feasible set for the probabilities with `2k` rows instead of `k(k−1)`.
    Band,
}

/// Optimal probabilities at fixed ROC points `idx`; returns the expected
/// loss and `(p1, p0)` per subgroup.
pub(crate) fn solve_at(
    stats: &ModelStats,
    idx: &[usize],
    loss: LossSpec,
    bounds: &[(RateKind, f64)],
    form: Form,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let k = stats.len();
    let levels = if form == Form::Band { bounds.len() } else { 0 };
    let nv = 2 * k + levels;
    let mut c = vec![0.0; nv];
    let mut constant = 0.0;
    let mut coef = Vec::with_capacity(k);
    for (s, g) in stats.groups.iter().enumerate() {
        let pt = g.roc[idx[s]];
        let fp_w = g.mu * (1.0 - g.mu1) * loss.l01;
        let fn_w = g.mu * g.mu1 * loss.l10;
        // loss_s = fp_w·F̃PR + fn_w·(1 − T̃PR)
        constant += fn_w;
        c[2 * s] = fp_w * pt.fpr - fn_w * pt.tpr;
        c[2 * s + 1] = fp_w * (1.0 - pt.fpr) - fn_w * (1.0 - pt.tpr);
        coef.push(pt);
    }

    let mut a_ub = Vec::new();
    for (m, &(kind, eps)) in bounds.iter().enumerate() {
        let scale = eps.exp();
        let lin: Vec<(f64, f64)> = (0..k)
            .map(|s| kind.coefficients(&coef[s], stats.groups[s].mu1))
            .collect();
        match form {
            Form::Pairwise => {
                for s in 0..k {
                    for t in 0..k {
                        if s != t {
                            let mut row = vec![0.0; nv];
                            row[2 * s] = lin[s].0;
                            row[2 * s + 1] = lin[s].1;
                            row[2 * t] -= scale * lin[t].0;
                            row[2 * t + 1] -= scale * lin[t].1;
                            a_ub.push(row);
                        }
                    }
                }
            }
            Form::Band => {
                let level = 2 * k + m;
                for s in 0..k {
                    let mut above = vec![0.0; nv];
                    above[level] = 1.0;
                    above[2 * s] = -lin[s].0;
                    above[2 * s + 1] = -lin[s].1;
                    a_ub.push(above);
                    let mut below = vec![0.0; nv];
                    below[2 * s] = lin[s].0;
                    below[2 * s + 1] = lin[s].1;
                    below[level] = -scale;
                    a_ub.push(below);
                }
            }
        }
    }
    let b_ub = vec![0.0; a_ub.len()];
    let problem = LpProblem {
        c,
        a_ub,
        b_ub,
        bounds: vec![(0.0, 1.0); nv],
    };
    let sol = solve(&problem, DEFAULT_MAX_ITERS)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::InfeasibleConstraint(format!(
                "no probabilities satisfy {} rate bounds over {k} subgroups",
                bounds.len()
            )))
        }
        status => {
            return Err(Error::Solver(format!(
                "linear program ended with {status:?}"
            )))
        }
    }
    let ps = (0..k).map(|s| (sol.x[2 * s], sol.x[2 * s + 1])).collect();
    Ok((constant + sol.objective, ps))
}

pub(crate) fn params_from(
    stats: &ModelStats,
    idx: &[usize],
    ps: &[(f64, f64)],
) -> Result<RtdpParams> {
    let groups = (0..stats.len())
        .map(|s| GroupParams {
            tau: stats.groups[s].roc[idx[s]].tau,
            p1: ps[s].0,
            p0: ps[s].1,
        })
        .collect();
    RtdpParams::new(stats.schema.clone(), groups)
}

/// Binary-input mode: thresholds fixed at the statistics' cut, probabilities
/// from the linear program.
pub fn optimize_randomization(
    stats: &ModelStats,
    loss: LossSpec,
    constraints: &[FairnessConstraint],
) -> Result<Fit> {
    let cut = stats.binary_cut.ok_or_else(|| {
        Error::InvalidArgument(
            "randomization needs binary-input statistics; use optimize_randomization_at".into(),
        )
    })?;
    optimize_randomization_at(stats, &vec![cut; stats.len()], loss, constraints)
}

/// Optimal `(p1_s, p0_s)` with every threshold fixed at `taus[s]`.
pub fn optimize_randomization_at(
    stats: &ModelStats,
    taus: &[f64],
    loss: LossSpec,
    constraints: &[FairnessConstraint],
) -> Result<Fit> {
    if taus.len() != stats.len() {
        return Err(Error::InvalidArgument(format!(
            "{} thresholds for {} subgroups",
            taus.len(),
            stats.len()
        )));
    }
    let bounds = rate_bounds(constraints)?;
    let idx = (0..stats.len())
        .map(|s| {
            stats.groups[s]
                .point_at(taus[s])
                .ok_or_else(|| Error::MissingRocPoint {
                    subgroup: stats.schema.render_index(s),
                    tau: taus[s],
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, ps) = solve_at(stats, &idx, loss, &bounds, Form::Pairwise)?;
    Fit::evaluate(
        params_from(stats, &idx, &ps)?,
        stats,
        loss,
        constraints,
        false,
    )
}
