//! Transportation network simplex.
//!
//! Specialization of the network simplex to the complete bipartite
//! transportation problem: m supply nodes, k demand nodes, one artificial
//! root. Arcs are uncapacitated, so the only arc states are Tree and Lower.
//! Entering arcs come from a block search over reduced costs (Dantzig-style
//! within the block); past a pivot budget the rule degrades to Bland's, which
//! cannot cycle. The final basis is checked against an optimality certificate
//! (dual feasibility + marginals), so a wrong answer cannot escape silently.

use nalgebra::DMatrix;

use super::TransportError;

/// Entering threshold and certificate tolerance, relative to the cost scale.
const ENTER_REL_TOL: f64 = 1e-13;
const CERT_REL_TOL: f64 = 1e-9;

/// Solves min Σ c_ij γ_ij s.t. Σ_j γ_ij = supply_i, Σ_i γ_ij = demand_j, γ ≥ 0.
///
/// Returns the nonzero plan entries and the pivot count. Supplies and demands
/// must be nonnegative with (nearly) equal totals; the tiny float imbalance
/// left by weight normalization is absorbed into the largest demand.
pub(super) fn solve(
    supply: &[f64],
    demand: &[f64],
    cost: &DMatrix<f64>,
) -> Result<(Vec<(usize, usize, f64)>, usize), TransportError> {
    let m = supply.len();
    let k = demand.len();
    debug_assert_eq!(cost.nrows(), m);
    debug_assert_eq!(cost.ncols(), k);

    let mut demand = demand.to_vec();
    let imbalance: f64 = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
    let argmax = (0..k).max_by(|&a, &b| demand[a].total_cmp(&demand[b])).unwrap();
    demand[argmax] += imbalance;
    if demand[argmax] < 0.0 {
        return Err(TransportError::SolverFailure("unbalanced marginals".into()));
    }

    let num_nodes = m + k + 1;
    let root = m + k;
    let num_real = m * k;
    let num_arcs = num_real + m + k;
    let cost_scale = cost.iter().fold(1.0_f64, |acc, &c| acc.max(c.abs()));
    let big = 2.0 * (num_nodes as f64) * cost_scale + 1.0;

    // arc a < num_real: tail a/k -> head m + a%k, cost c
    // arc num_real + u: artificial, between node u and root
    let arc_cost = |a: usize| -> f64 {
        if a < num_real {
            cost[(a / k, a % k)]
        } else {
            big
        }
    };
    // artificial arcs point u -> root for supplies, root -> u for demands
    let arc_tail = |a: usize| -> usize {
        if a < num_real {
            a / k
        } else {
            let u = a - num_real;
            if u < m {
                u
            } else {
                root
            }
        }
    };
    let arc_head = |a: usize| -> usize {
        if a < num_real {
            m + a % k
        } else {
            let u = a - num_real;
            if u < m {
                root
            } else {
                u
            }
        }
    };

    let mut flow = vec![0.0_f64; num_arcs];
    let mut in_tree = vec![false; num_arcs];
    let mut tree_adj: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
    for u in 0..(m + k) {
        let a = num_real + u;
        flow[a] = if u < m { supply[u] } else { demand[u - m] };
        in_tree[a] = true;
        tree_adj[u].push(a);
        tree_adj[root].push(a);
    }

    let mut parent = vec![usize::MAX; num_nodes];
    let mut parent_arc = vec![usize::MAX; num_nodes];
    let mut depth = vec![0usize; num_nodes];
    let mut pi = vec![0.0_f64; num_nodes];
    rebuild_tree(
        root,
        &tree_adj,
        &arc_tail,
        &arc_head,
        &arc_cost,
        &mut parent,
        &mut parent_arc,
        &mut depth,
        &mut pi,
    );

    let enter_tol = ENTER_REL_TOL * cost_scale * 10.0;
    let block = ((num_real as f64).sqrt() as usize).max(8);
    let pivot_budget = 2_000 + 200 * (m + k) + 20 * num_real;
    let bland_after = pivot_budget / 2;

    let mut pivots = 0usize;
    let mut cursor = 0usize;
    loop {
        // entering arc
        let mut entering = None;
        if pivots < bland_after {
            // block search over real arcs, most negative reduced cost in block
            let mut scanned = 0;
            while scanned < num_real {
                let mut best = -enter_tol;
                let mut best_arc = None;
                let upper = (cursor + block).min(cursor + num_real - scanned);
                for pos in cursor..upper {
                    let a = pos % num_real;
                    if in_tree[a] {
                        continue;
                    }
                    let rc = arc_cost(a) - pi[arc_tail(a)] + pi[arc_head(a)];
                    if rc < best {
                        best = rc;
                        best_arc = Some(a);
                    }
                }
                scanned += upper - cursor;
                cursor = upper % num_real;
                if best_arc.is_some() {
                    entering = best_arc;
                    break;
                }
            }
        } else {
            // Bland: smallest-index eligible arc
            for a in 0..num_real {
                if !in_tree[a] {
                    let rc = arc_cost(a) - pi[arc_tail(a)] + pi[arc_head(a)];
                    if rc < -enter_tol {
                        entering = Some(a);
                        break;
                    }
                }
            }
        }
        let Some(e) = entering else { break };
        pivots += 1;
        if pivots > pivot_budget {
            return Err(TransportError::SolverFailure(format!(
                "pivot budget {pivot_budget} exhausted on {m}x{k} instance"
            )));
        }

        // cycle: e = (u -> v) plus the tree path between v and u
        let (u, v) = (arc_tail(e), arc_head(e));
        // collect (arc, node, on_u_side) walking both endpoints up to the join
        let mut u_path: Vec<usize> = Vec::new(); // nodes whose parent_arc is on the path
        let mut v_path: Vec<usize> = Vec::new();
        let (mut a, mut b) = (u, v);
        while a != b {
            if depth[a] >= depth[b] {
                u_path.push(a);
                a = parent[a];
            } else {
                v_path.push(b);
                b = parent[b];
            }
        }

        // flow change direction: +delta along e from u to v, so the cycle is
        // traversed v -> join on the v side and join -> u on the u side.
        // For a node x on the v side, traversal direction is x -> parent[x]:
        // the parent arc is aligned if it points x -> parent[x].
        // On the u side the cycle runs parent[x] -> x, so alignment flips.
        let mut delta = f64::INFINITY;
        let mut leaving: Option<(usize, bool)> = None; // (node index owning the arc, on_u_side)
        for &x in &u_path {
            let pa = parent_arc[x];
            let aligned = arc_head(pa) == x; // parent -> x matches cycle direction
            if !aligned && flow[pa] < delta {
                delta = flow[pa];
                leaving = Some((x, true));
            }
        }
        for &x in &v_path {
            let pa = parent_arc[x];
            let aligned = arc_tail(pa) == x; // x -> parent matches cycle direction
            if !aligned && flow[pa] < delta {
                delta = flow[pa];
                leaving = Some((x, false));
            }
        }
        let Some((leave_node, _)) = leaving else {
            return Err(TransportError::SolverFailure("unbounded pivot cycle".into()));
        };
        let leaving_arc = parent_arc[leave_node];

        // apply the flow change around the cycle
        flow[e] += delta;
        for &x in &u_path {
            let pa = parent_arc[x];
            let aligned = arc_head(pa) == x;
            if aligned {
                flow[pa] += delta;
            } else {
                flow[pa] -= delta;
            }
        }
        for &x in &v_path {
            let pa = parent_arc[x];
            let aligned = arc_tail(pa) == x;
            if aligned {
                flow[pa] += delta;
            } else {
                flow[pa] -= delta;
            }
        }
        flow[leaving_arc] = 0.0;

        // swap basis arcs and refresh the tree structure
        in_tree[leaving_arc] = false;
        in_tree[e] = true;
        detach(&mut tree_adj, arc_tail(leaving_arc), leaving_arc);
        detach(&mut tree_adj, arc_head(leaving_arc), leaving_arc);
        tree_adj[arc_tail(e)].push(e);
        tree_adj[arc_head(e)].push(e);
        rebuild_tree(
            root,
            &tree_adj,
            &arc_tail,
            &arc_head,
            &arc_cost,
            &mut parent,
            &mut parent_arc,
            &mut depth,
            &mut pi,
        );
    }

    // certificate: primal feasibility, artificial flows empty, dual feasibility
    let cert_tol = CERT_REL_TOL * cost_scale;
    for u in 0..(m + k) {
        if flow[num_real + u] > MASS_TOL {
            return Err(TransportError::SolverFailure(format!(
                "artificial arc at node {u} kept flow {}",
                flow[num_real + u]
            )));
        }
    }
    let mut row_sums = vec![0.0_f64; m];
    let mut col_sums = vec![0.0_f64; k];
    let mut triplets = Vec::new();
    for a in 0..num_real {
        let f = flow[a];
        if f < -MASS_TOL {
            return Err(TransportError::SolverFailure(format!("negative flow {f}")));
        }
        if f > 0.0 {
            let (i, j) = (a / k, a % k);
            row_sums[i] += f;
            col_sums[j] += f;
            triplets.push((i, j, f));
        }
    }
    for i in 0..m {
        if (row_sums[i] - supply[i]).abs() > MASS_TOL {
            return Err(TransportError::SolverFailure("row marginal violated".into()));
        }
    }
    for j in 0..k {
        if (col_sums[j] - demand[j]).abs() > MASS_TOL {
            return Err(TransportError::SolverFailure("column marginal violated".into()));
        }
    }
    for a in 0..num_real {
        if !in_tree[a] {
            let rc = arc_cost(a) - pi[arc_tail(a)] + pi[arc_head(a)];
            if rc < -cert_tol {
                return Err(TransportError::SolverFailure(format!(
                    "optimality certificate failed: reduced cost {rc:.3e}"
                )));
            }
        }
    }
    Ok((triplets, pivots))
}

/// Marginal slack allowed in the certificate (total mass is 1).
const MASS_TOL: f64 = 1e-10;

fn detach(tree_adj: &mut [Vec<usize>], node: usize, arc: usize) {
    if let Some(pos) = tree_adj[node].iter().position(|&a| a == arc) {
        tree_adj[node].swap_remove(pos);
    }
}

/// Recomputes parent pointers, depths and potentials by a DFS from the root.
/// Tree arcs have zero reduced cost: c_a = pi[tail] − pi[head].
#[allow(clippy::too_many_arguments)]
fn rebuild_tree(
    root: usize,
    tree_adj: &[Vec<usize>],
    arc_tail: &impl Fn(usize) -> usize,
    arc_head: &impl Fn(usize) -> usize,
    arc_cost: &impl Fn(usize) -> f64,
    parent: &mut [usize],
    parent_arc: &mut [usize],
    depth: &mut [usize],
    pi: &mut [f64],
) {
    parent[root] = usize::MAX;
    parent_arc[root] = usize::MAX;
    depth[root] = 0;
    pi[root] = 0.0;
    let mut stack = vec![root];
    while let Some(x) = stack.pop() {
        for &a in &tree_adj[x] {
            let (t, h) = (arc_tail(a), arc_head(a));
            let other = if t == x { h } else { t };
            if other == parent[x] && parent_arc[x] == a {
                continue;
            }
            if other == x {
                continue;
            }
            parent[other] = x;
            parent_arc[other] = a;
            depth[other] = depth[x] + 1;
            // zero reduced cost across tree arcs
            pi[other] = if t == other { arc_cost(a) + pi[x] } else { pi[x] - arc_cost(a) };
            stack.push(other);
        }
    }
}
