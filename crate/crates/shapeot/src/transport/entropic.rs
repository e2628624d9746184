//! Log-domain Sinkhorn iterations with ε-annealing and marginal repair.
//!
//! Potentials f, g live in cost units; the plan is
//! γ_ij = w_i v_j exp((f_i + g_j − C_ij)/ε). Updates are exact coordinate
//! ascent (softmin), so the row marginals are exact right after an f-update
//! and the stopping rule watches the column residual. Annealing starts at a
//! quarter of the cost range and halves down to the requested ε. The final
//! plan is repaired to lie exactly in Adm(μ,ν): scale rows, scale columns,
//! then add back the rank-one residual correction.

use nalgebra::DMatrix;

use super::TransportError;

/// Iterations spent per annealing stage before ε halves.
const STAGE_ITERS: usize = 24;

pub(super) fn solve(
    w: &[f64],
    v: &[f64],
    cost: &DMatrix<f64>,
    epsilon: f64,
    max_iter: usize,
    marginal_tol: f64,
) -> Result<(DMatrix<f64>, usize), TransportError> {
    let m = w.len();
    let k = v.len();

    // zero-weight atoms carry no mass; run on the positive support
    let rows: Vec<usize> = (0..m).filter(|&i| w[i] > 0.0).collect();
    let cols: Vec<usize> = (0..k).filter(|&j| v[j] > 0.0).collect();
    let wa: Vec<f64> = rows.iter().map(|&i| w[i]).collect();
    let vb: Vec<f64> = cols.iter().map(|&j| v[j]).collect();
    let log_w: Vec<f64> = wa.iter().map(|&x| x.ln()).collect();
    let log_v: Vec<f64> = vb.iter().map(|&x| x.ln()).collect();
    let c = DMatrix::from_fn(rows.len(), cols.len(), |a, b| cost[(rows[a], cols[b])]);
    let (mr, kr) = (rows.len(), cols.len());

    let c_max = c.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    let mut eps = (0.25 * c_max).max(epsilon);
    let mut f = vec![0.0_f64; mr];
    let mut g = vec![0.0_f64; kr];
    let mut iterations = 0usize;
    let mut scratch = vec![0.0_f64; mr.max(kr)];

    'outer: loop {
        let final_stage = eps <= epsilon;
        let stage_budget = if final_stage { max_iter.saturating_sub(iterations) } else { STAGE_ITERS };
        for _ in 0..stage_budget {
            iterations += 1;
            // f-update: exact row marginals afterwards
            for a in 0..mr {
                for b in 0..kr {
                    scratch[b] = (g[b] - c[(a, b)]) / eps + log_v[b];
                }
                f[a] = -eps * logsumexp(&scratch[..kr]);
            }
            // g-update: exact column marginals afterwards
            for b in 0..kr {
                for a in 0..mr {
                    scratch[a] = (f[a] - c[(a, b)]) / eps + log_w[a];
                }
                g[b] = -eps * logsumexp(&scratch[..mr]);
            }
            if f.iter().chain(g.iter()).any(|x| !x.is_finite()) {
                return Err(TransportError::NumericalUnderflow(epsilon));
            }
            // after the g-update columns are exact; rows carry the residual
            let mut row_residual = 0.0;
            for a in 0..mr {
                let mut sum = 0.0;
                for b in 0..kr {
                    sum += plan_entry(&f, &g, &c, &log_w, &log_v, eps, a, b);
                }
                row_residual += (sum - wa[a]).abs();
            }
            if final_stage && row_residual <= marginal_tol {
                break 'outer;
            }
            if iterations >= max_iter {
                break 'outer;
            }
        }
        if final_stage {
            break;
        }
        eps = (eps * 0.5).max(epsilon);
    }

    let mut gamma_r = DMatrix::zeros(mr, kr);
    for a in 0..mr {
        for b in 0..kr {
            gamma_r[(a, b)] = plan_entry(&f, &g, &c, &log_w, &log_v, eps, a, b);
        }
    }
    if gamma_r.iter().any(|x| !x.is_finite()) {
        return Err(TransportError::NumericalUnderflow(epsilon));
    }
    repair_marginals(&mut gamma_r, &wa, &vb);

    // scatter back into the full index set; zero-weight rows and columns stay zero
    let mut gamma = DMatrix::zeros(m, k);
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            gamma[(i, j)] = gamma_r[(a, b)];
        }
    }
    Ok((gamma, iterations))
}

#[allow(clippy::too_many_arguments)]
#[inline]
fn plan_entry(
    f: &[f64],
    g: &[f64],
    c: &DMatrix<f64>,
    log_w: &[f64],
    log_v: &[f64],
    eps: f64,
    a: usize,
    b: usize,
) -> f64 {
    ((f[a] + g[b] - c[(a, b)]) / eps + log_w[a] + log_v[b]).exp()
}

fn logsumexp(xs: &[f64]) -> f64 {
    let max = xs.iter().fold(f64::NEG_INFINITY, |acc, &x| acc.max(x));
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Benamou-style rounding: clip row scalings, clip column scalings, then add
/// the rank-one correction err_r err_cᵀ / ‖err_r‖₁. The output has the exact
/// prescribed marginals (up to the last float additions) and stays
/// nonnegative.
fn repair_marginals(gamma: &mut DMatrix<f64>, w: &[f64], v: &[f64]) {
    let (m, k) = gamma.shape();
    for i in 0..m {
        let sum: f64 = gamma.row(i).sum();
        if sum > 0.0 {
            let scale = (w[i] / sum).min(1.0);
            for j in 0..k {
                gamma[(i, j)] *= scale;
            }
        }
    }
    for j in 0..k {
        let sum: f64 = gamma.column(j).sum();
        if sum > 0.0 {
            let scale = (v[j] / sum).min(1.0);
            for i in 0..m {
                gamma[(i, j)] *= scale;
            }
        }
    }
    let mut err_r = vec![0.0_f64; m];
    let mut err_c = vec![0.0_f64; k];
    let mut total = 0.0;
    for i in 0..m {
        err_r[i] = (w[i] - gamma.row(i).sum()).max(0.0);
        total += err_r[i];
    }
    for j in 0..k {
        err_c[j] = (v[j] - gamma.column(j).sum()).max(0.0);
    }
    if total > 0.0 {
        for i in 0..m {
            if err_r[i] == 0.0 {
                continue;
            }
            for j in 0..k {
                gamma[(i, j)] += err_r[i] * err_c[j] / total;
            }
        }
    }
}
