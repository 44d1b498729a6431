//! Stationary distributions of row-stochastic matrices.
//!
//! [`stationary`] solves the linear system directly; [`tree_stationary`]
//! recomputes the same distribution by enumerating rooted spanning trees and
//! is kept as an independent oracle for small chains.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::strategy::MixedStrategy;

/// Tolerance on each row summing to one.
pub const ROW_SUM_TOL: f64 = 1e-12;
/// Residual `‖pQ − p‖₁` the solver aims for.
pub const RESIDUAL_TARGET: f64 = 1e-10;
/// Residual above which the solve is reported as failed.
pub const RESIDUAL_FAILURE: f64 = 1e-8;
/// Largest chain handled by the spanning-tree enumeration.
pub const MAX_TREE_STATES: usize = 6;
/// Largest chain the dense solver accepts.
pub const MAX_STATES: usize = 64;

/// A dense row-stochastic `n × n` matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("empty chain".into()));
        }
        if entries.len() != n * n {
            return Err(Error::Dimension {
                what: "matrix entries",
                expected: n * n,
                found: entries.len(),
            });
        }
        for (i, row) in entries.chunks(n).enumerate() {
            if row.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::Parameter(format!("row {i} has a negative or non-finite entry")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::Parameter(format!("row {i} sums to {sum}")));
            }
        }
        Ok(StochasticMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::Dimension {
                what: "matrix row",
                expected: n,
                found: r.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    /// The matrix whose `i`-th row is `rows[i]`.
    pub fn from_strategies(rows: &[MixedStrategy]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::Dimension {
                    what: "matrix row",
                    expected: n,
                    found: r.len(),
                });
            }
            entries.extend_from_slice(r.probs());
        }
        Self::new(n, entries)
    }

    pub fn uniform(n: usize) -> Self {
        StochasticMatrix {
            n,
            entries: vec![1.0 / n as f64; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `p · Q`.
    pub fn left_multiply(&self, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (i, &pi) in p.iter().enumerate() {
            for (o, q) in out.iter_mut().zip(self.row(i)) {
                *o += pi * q;
            }
        }
        out
    }

    /// `‖pQ − p‖₁`.
    pub fn residual(&self, p: &[f64]) -> f64 {
        self.left_multiply(p).iter().zip(p).map(|(a, b)| (a - b).abs()).sum()
    }

    /// Relabels states: state `i` of the result is state `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        StochasticMatrix { n, entries }
    }

    /// True when the chain has exactly one closed communicating class, which
    /// is exactly when its stationary distribution is unique.
    pub fn has_unique_stationary(&self) -> bool {
        if self.min_entry() > 0.0 {
            return true;
        }
        let n = self.n;
        // reach[a][b]: b reachable from a.
        let mut reach = vec![false; n * n];
        let mut stack = Vec::with_capacity(n);
        for a in 0..n {
            reach[a * n + a] = true;
            stack.push(a);
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if self.get(u, v) > 0.0 && !reach[a * n + v] {
                        reach[a * n + v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        (0..n).any(|r| (0..n).all(|a| reach[a * n + r]))
    }
}

/// Solves `p = pQ`, `Σp = 1` by LU factorization with partial pivoting.
///
/// The system is `(Qᵀ − I) p = 0` with its last equation replaced by the
/// normalization row. One step of iterative refinement is applied when the
/// first solve misses [`RESIDUAL_TARGET`].
pub fn stationary(q: &StochasticMatrix) -> Result<MixedStrategy> {
    let n = q.n();
    if n > MAX_STATES {
        return Err(Error::Capacity {
            what: "chain",
            size: n,
            limit: MAX_STATES,
        });
    }
    if !q.has_unique_stationary() {
        return Err(Error::NotErgodic);
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = q.get(j, i) - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[(n - 1) * n..].iter_mut().for_each(|v| *v = 1.0);
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;

    let lu = Lu::factor(a.clone(), n).ok_or(Error::NotErgodic)?;
    let mut p = lu.solve(&rhs);
    if q.residual(&p) > RESIDUAL_TARGET {
        let ap: Vec<f64> = (0..n).map(|i| (0..n).map(|j| a[i * n + j] * p[j]).sum()).collect();
        let r: Vec<f64> = rhs.iter().zip(&ap).map(|(b, v)| b - v).collect();
        let d = lu.solve(&r);
        p.iter_mut().zip(&d).for_each(|(v, dv)| *v += dv);
    }

    // Round-off can leave entries a hair below zero.
    for v in p.iter_mut() {
        if *v < 0.0 {
            if *v < -RESIDUAL_TARGET {
                return Err(Error::Numerical {
                    what: "stationary distribution",
                    residual: -*v,
                });
            }
            *v = 0.0;
        }
    }
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= sum);
    let residual = q.residual(&p);
    if !(residual <= RESIDUAL_FAILURE) {
        return Err(Error::Numerical {
            what: "stationary distribution",
            residual,
        });
    }
    Ok(MixedStrategy::from_normalized(p))
}

struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(mut a: Vec<f64>, n: usize) -> Option<Self> {
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let pivot_row = (k..n)
                .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
                .unwrap();
            if a[pivot_row * n + k].abs() <= scale * 1e-14 {
                return None;
            }
            if pivot_row != k {
                for j in 0..n {
                    a.swap(k * n + j, pivot_row * n + j);
                }
                perm.swap(k, pivot_row);
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                a[i * n + k] = f;
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
        Some(Lu { n, lu: a, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[i * n + j] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[i * n + j] * y[j];
            }
            y[i] /= self.lu[i * n + i];
        }
        y
    }
}

/// Stationary distribution from the Markov chain tree theorem: `p_i` is the
/// total weight of directed spanning trees rooted at `i`, normalized.
///
/// A tree rooted at `i` gives every other state exactly one outgoing edge
/// and contains no cycle; its weight is the product of its edges' transition
/// probabilities. Trees are enumerated by assigning outgoing edges state by
/// state and rejecting assignments that close a cycle.
pub fn tree_stationary(q: &StochasticMatrix) -> Result<MixedStrategy> {
    let n = q.n();
    if n > MAX_TREE_STATES {
        return Err(Error::Capacity {
            what: "spanning-tree enumeration",
            size: n,
            limit: MAX_TREE_STATES,
        });
    }
    let weights: Vec<f64> = (0..n).map(|root| rooted_tree_weight(q, root)).collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NotErgodic);
    }
    Ok(MixedStrategy::from_normalized(weights.iter().map(|w| w / total).collect()))
}

/// Sum over directed spanning trees rooted at `root` of the product of edge weights.
pub fn rooted_tree_weight(q: &StochasticMatrix, root: usize) -> f64 {
    let n = q.n();
    let mut parent = vec![usize::MAX; n];
    assign(q, root, 0, &mut parent, 1.0)
}

fn assign(q: &StochasticMatrix, root: usize, node: usize, parent: &mut [usize], weight: f64) -> f64 {
    let n = q.n();
    if node == n {
        return weight;
    }
    if node == root {
        return assign(q, root, node + 1, parent, weight);
    }
    let mut total = 0.0;
    for target in (0..n).filter(|&t| t != node) {
        let w = q.get(node, target);
        if w == 0.0 {
            continue;
        }
        parent[node] = target;
        if !closes_cycle(parent, node, root) {
            total += assign(q, root, node + 1, parent, weight * w);
        }
    }
    parent[node] = usize::MAX;
    total
}

/// Follows outgoing edges from `start`; a cycle exists if the walk returns to
/// `start` before reaching the root or an unassigned state.
fn closes_cycle(parent: &[usize], start: usize, root: usize) -> bool {
    let mut cur = parent[start];
    let mut steps = 0;
    while cur != root && cur != usize::MAX && steps <= parent.len() {
        if cur == start {
            return true;
        }
        cur = parent[cur];
        steps += 1;
    }
    false
}

/// Row-wise multiplicative closeness `(1−η_i) q'_ij ≤ q_ij ≤ (1+η_i) q'_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativeCert {
    pub etas: Vec<f64>,
}

impl MultiplicativeCert {
    pub fn sum(&self) -> f64 {
        self.etas.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.etas.iter().copied().fold(0.0, f64::max)
    }
}

/// Smallest per-row `η_i = max_j |q_ij / q'_ij − 1|` certifying that
/// `reference` (`Q'`) is `(η_1, …, η_n)`-approximate to `q`.
pub fn certify_multiplicative(q: &StochasticMatrix, reference: &StochasticMatrix) -> Result<MultiplicativeCert> {
    if q.n() != reference.n() {
        return Err(Error::Dimension {
            what: "chain size",
            expected: reference.n(),
            found: q.n(),
        });
    }
    let n = q.n();
    let mut etas = vec![0.0f64; n];
    for (i, eta) in etas.iter_mut().enumerate() {
        for j in 0..n {
            let (a, b) = (q.get(i, j), reference.get(i, j));
            if b == 0.0 {
                if a != 0.0 {
                    return Err(Error::CertificateImpossible { row: i, col: j });
                }
                continue;
            }
            *eta = f64::max(*eta, (a / b - 1.0).abs());
        }
    }
    Ok(MultiplicativeCert { etas })
}

/// `(‖p − p'‖₁, 8·Σ η_i)` for the stationary distributions of `q` and
/// `reference` and the certificate between them.
pub fn perturbation_gap(q: &StochasticMatrix, reference: &StochasticMatrix) -> Result<(f64, f64)> {
    let cert = certify_multiplicative(q, reference)?;
    let p = stationary(q)?;
    let p_ref = stationary(reference)?;
    Ok((p.l1_distance(&p_ref), 8.0 * cert.sum()))
}
