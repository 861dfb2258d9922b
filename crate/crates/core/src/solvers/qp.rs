//! Diagonal-weighted least squares under linear inequalities.
//!
//! Zero-weight coordinates are removed first by Fourier–Motzkin elimination
//! (they only matter through feasibility), which leaves a strictly convex
//! problem in the weighted coordinates. Substituting `u_k = √w_k (v_k − m_k)`
//! turns that into a least-distance problem `min ‖u‖² s.t. G u ≥ h`, solved
//! exactly through its NNLS dual. The active set found by NNLS is then
//! re-solved as an equality-constrained least-distance problem to recover
//! full precision, and the eliminated coordinates are restored by
//! back-substitution (midpoint of their feasible interval).

use super::nnls::nnls_flat;
use super::{ConstraintSet, QuadObjective, Row, SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::linalg::{dot, Cholesky, Mat};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QpOptions {
    /// Cap on NNLS least-squares solves.
    pub max_iterations: usize,
    /// Allowed constraint violation of an optimal point.
    pub feasibility_tol: f64,
    /// Allowed KKT stationarity residual of an optimal point.
    pub kkt_tol: f64,
}

impl Default for QpOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100_000,
            feasibility_tol: 1e-8,
            kkt_tol: 1e-7,
        }
    }
}

pub fn solve_qp<T: Real>(obj: &QuadObjective<T>, cons: &ConstraintSet<T>) -> Result<SolveResult<T>> {
    solve_qp_with(obj, cons, &QpOptions::default())
}

/// True iff some point satisfies every row within `1e-8`.
pub fn feasible<T: Real>(cons: &ConstraintSet<T>) -> bool {
    feasible_with(cons, &QpOptions::default())
}

pub fn feasible_with<T: Real>(cons: &ConstraintSet<T>, opts: &QpOptions) -> bool {
    if cons.is_empty() {
        return true;
    }
    // Project the origin onto the set loosened by half the tolerance; any
    // point found there satisfies the original rows within the tolerance.
    let tol = T::tol(opts.feasibility_tol);
    let loosened = cons.relaxed(tol / T::c(2.0));
    let obj = QuadObjective::least_distance(vec![T::zero(); cons.dim()]).expect("unit weights are valid");
    match solve_qp_with(&obj, &loosened, opts) {
        Ok(r) if r.is_optimal() => cons.max_violation(&r.argmin) <= tol,
        _ => false,
    }
}

/// Minimizes `Σ w_k (v_k − m_k)²` over `cons`.
///
/// `Infeasible` and `MaxIterations` are reported through the status; an
/// `Err` means the inputs were malformed or the optimality certificate failed.
pub fn solve_qp_with<T: Real>(
    obj: &QuadObjective<T>,
    cons: &ConstraintSet<T>,
    opts: &QpOptions,
) -> Result<SolveResult<T>> {
    solve_qp_warm(obj, cons, opts, &mut Vec::new())
}

/// As [`solve_qp_with`]. `active` holds indices of rows guessed to be
/// binding and is replaced by the rows binding at the solution; the guess
/// only affects speed.
pub(crate) fn solve_qp_warm<T: Real>(
    obj: &QuadObjective<T>,
    cons: &ConstraintSet<T>,
    opts: &QpOptions,
    active: &mut Vec<usize>,
) -> Result<SolveResult<T>> {
    let n = obj.dim();
    if cons.dim() != n {
        return Err(Error::LengthMismatch {
            what: "objective and constraint dimensions",
            left: n,
            right: cons.dim(),
        });
    }
    let feas_tol = T::tol(opts.feasibility_tol);
    let weights = obj.weights();
    let targets = obj.targets();

    // Stage 1: eliminate zero-weight coordinates.
    let free: Vec<usize> = (0..n).filter(|&k| weights[k] == T::zero()).collect();
    let mut eliminated: Vec<(usize, Vec<Row<T>>)> = Vec::with_capacity(free.len());
    let owned: Vec<Row<T>>;
    let reduced: Vec<&Row<T>> = if free.is_empty() {
        cons.rows().iter().collect()
    } else {
        let mut rows: Vec<Row<T>> = cons.rows().iter().filter_map(normalize_row).collect();
        for &k in &free {
            let (touching, rest): (Vec<Row<T>>, Vec<Row<T>>) = rows.into_iter().partition(|r| r.coeffs[k] != T::zero());
            let mut next = rest;
            for p in touching.iter().filter(|r| r.coeffs[k] > T::zero()) {
                for q in touching.iter().filter(|r| r.coeffs[k] < T::zero()) {
                    let (sp, sq) = (-q.coeffs[k], p.coeffs[k]);
                    let mut coeffs: Vec<T> = p.coeffs.iter().zip(&q.coeffs).map(|(&a, &b)| a * sp + b * sq).collect();
                    coeffs[k] = T::zero();
                    let combined = Row {
                        coeffs,
                        bound: p.bound * sp + q.bound * sq,
                    };
                    if let Some(r) = normalize_row(&combined) {
                        next.push(r);
                    }
                }
            }
            rows = dedup_rows(next);
            eliminated.push((k, touching));
        }
        owned = rows;
        owned.iter().collect()
    };

    // Stage 2: least-distance problem in the weighted coordinates.
    let weighted: Vec<usize> = (0..n).filter(|&k| weights[k] > T::zero()).collect();
    let nw = weighted.len();
    let sqrt_w: Vec<T> = weighted.iter().map(|&k| weights[k].sqrt()).collect();
    let mut v = targets.to_vec();
    let mut iterations = 0;
    let mut kkt_residual = T::zero();
    // Columns [g; h] of the NNLS dual, stored back to back, for
    // G u ≥ h with G = −ã / ‖ã‖, h = −(b − a·m) / ‖ã‖.
    let mut cols: Vec<T> = Vec::with_capacity(reduced.len() * (nw + 1));
    // Row of `reduced` behind each column.
    let mut col_row: Vec<usize> = Vec::with_capacity(reduced.len());
    for (i, r) in reduced.iter().enumerate() {
        let start = cols.len();
        let mut norm_sq = T::zero();
        let mut fitted = T::zero();
        for (&k, &s) in weighted.iter().zip(&sqrt_w) {
            let x = r.coeffs[k] / s;
            norm_sq += x * x;
            fitted += r.coeffs[k] * targets[k];
            cols.push(x);
        }
        let slack = r.bound - fitted;
        if norm_sq == T::zero() {
            // No weighted coordinate left in this row: a pure bound check.
            cols.truncate(start);
            if slack < -feas_tol {
                return Ok(SolveResult::infeasible(0));
            }
            continue;
        }
        let norm = norm_sq.sqrt();
        for x in &mut cols[start..] {
            *x = -*x / norm;
        }
        cols.push(-slack / norm);
        col_row.push(i);
    }
    // Row indices only carry over when no coordinate was eliminated.
    let guess: Vec<usize> = if free.is_empty() {
        active.iter().filter_map(|&r| col_row.binary_search(&r).ok()).collect()
    } else {
        Vec::new()
    };
    active.clear();
    if !cols.is_empty() {
        match least_distance(&cols, nw, opts.max_iterations, &guess) {
            Ldp::Solved {
                u,
                residual,
                iters,
                binding,
            } => {
                iterations = iters;
                kkt_residual = residual;
                if free.is_empty() {
                    active.extend(binding.iter().map(|&c| col_row[c]));
                }
                for ((&k, &s), &uk) in weighted.iter().zip(&sqrt_w).zip(&u) {
                    v[k] = targets[k] + uk / s;
                }
            }
            Ldp::Infeasible { iters } => return Ok(SolveResult::infeasible(iters)),
            Ldp::MaxIterations { iters } => {
                return Ok(SolveResult {
                    value: obj.eval(&v),
                    argmin: v,
                    status: SolveStatus::MaxIterations,
                    iterations: iters,
                    max_violation: T::infinity(),
                    kkt_residual: T::infinity(),
                })
            }
        }
    }

    // Stage 3: restore eliminated coordinates in reverse order.
    for (k, touching) in eliminated.iter().rev() {
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        for r in touching {
            let ak = r.coeffs[*k];
            let rest: T = r
                .coeffs
                .iter()
                .zip(&v)
                .enumerate()
                .filter(|(i, _)| i != k)
                .map(|(_, (&a, &x))| a * x)
                .sum();
            let limit = (r.bound - rest) / ak;
            if ak > T::zero() {
                hi = hi.min(limit);
            } else {
                lo = lo.max(limit);
            }
        }
        v[*k] = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo + hi) / T::c(2.0),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => targets[*k],
        };
    }

    let max_violation = cons.max_violation(&v);
    let kkt_tol = T::tol(opts.kkt_tol);
    if max_violation > feas_tol {
        return Err(Error::Solver(format!(
            "returned point violates constraints by {max_violation}"
        )));
    }
    if kkt_residual > kkt_tol {
        return Err(Error::Solver(format!(
            "KKT stationarity residual {kkt_residual} exceeds {kkt_tol}"
        )));
    }
    Ok(SolveResult {
        value: obj.eval(&v),
        argmin: v,
        status: SolveStatus::Optimal,
        iterations,
        max_violation,
        kkt_residual,
    })
}

/// Scales a row so its largest coefficient has magnitude one and flushes
/// rounding-level coefficients to zero. `None` for an all-zero row that is
/// trivially satisfied.
fn normalize_row<T: Real>(r: &Row<T>) -> Option<Row<T>> {
    let scale = r.coeffs.iter().fold(T::zero(), |a, c| a.max(c.abs()));
    if scale == T::zero() {
        return if r.bound >= T::zero() { None } else { Some(r.clone()) };
    }
    let flush = T::epsilon() * T::c(64.0);
    let coeffs = r
        .coeffs
        .iter()
        .map(|&c| {
            let c = c / scale;
            if c.abs() <= flush {
                T::zero()
            } else {
                c
            }
        })
        .collect();
    Some(Row {
        coeffs,
        bound: r.bound / scale,
    })
}

/// Keeps the tightest bound among rows with identical coefficients.
fn dedup_rows<T: Real>(mut rows: Vec<Row<T>>) -> Vec<Row<T>> {
    rows.sort_by(|a, b| {
        a.coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.bound.partial_cmp(&b.bound).unwrap())
    });
    rows.dedup_by(|later, earlier| later.coeffs == earlier.coeffs);
    rows
}

enum Ldp<T> {
    Solved {
        u: Vec<T>,
        residual: T,
        iters: usize,
        binding: Vec<usize>,
    },
    Infeasible {
        iters: usize,
    },
    MaxIterations {
        iters: usize,
    },
}

/// Rows of `G` and entries of `h`, stored as back-to-back columns `[g_i; h_i]`.
struct LdpRows<'a, T> {
    cols: &'a [T],
    n: usize,
}

impl<T: Real> LdpRows<'_, T> {
    fn len(&self) -> usize {
        self.cols.len() / (self.n + 1)
    }

    fn g(&self, i: usize) -> &[T] {
        let s = i * (self.n + 1);
        &self.cols[s..s + self.n]
    }

    fn h(&self, i: usize) -> T {
        self.cols[i * (self.n + 1) + self.n]
    }
}

/// `min ‖u‖² s.t. G u ≥ h` via NNLS on `E = [Gᵀ; hᵀ]`, `f = e_{n+1}`.
fn least_distance<T: Real>(cols: &[T], n: usize, max_iterations: usize, guess: &[usize]) -> Ldp<T> {
    let rows = LdpRows { cols, n };
    let mut f = vec![T::zero(); n + 1];
    f[n] = T::one();
    let out = nnls_flat(cols, n + 1, &f, max_iterations, guess);
    if !out.converged {
        return Ldp::MaxIterations { iters: out.iterations };
    }
    // residual = f − E z; the NNLS residual in LDP form is E z − f.
    let denom = out.residual[n];
    if denom <= T::epsilon() * T::c(64.0) {
        return Ldp::Infeasible { iters: out.iterations };
    }
    let mut u: Vec<T> = out.residual[..n].iter().map(|&r| -r / denom).collect();
    let active: Vec<usize> = (0..rows.len()).filter(|&i| out.z[i] > T::zero()).collect();
    let mut multipliers: Vec<T> = active.iter().map(|&i| out.z[i] / denom).collect();

    // Polish on the active set: u = G_Aᵀ μ_A with G_A G_Aᵀ μ_A = h_A.
    if !active.is_empty() {
        if let Some((pu, pmu)) = polish(&rows, &active) {
            let viol = (0..rows.len())
                .map(|i| rows.h(i) - dot(rows.g(i), &pu))
                .fold(T::zero(), T::max);
            let scale = T::one() + dot(&pu, &pu).sqrt();
            if pmu.iter().all(|&x| x >= T::zero()) && viol <= T::epsilon() * T::c(1e4) * scale {
                u = pu;
                multipliers = pmu;
            }
        }
    }

    // Stationarity of ½‖u‖² − μᵀ(G u − h): u − Gᵀ μ = 0.
    let mut grad = u.clone();
    for (&i, &m) in active.iter().zip(&multipliers) {
        for (gk, &gi) in grad.iter_mut().zip(rows.g(i)) {
            *gk -= m * gi;
        }
    }
    let scale = T::one() + u.iter().fold(T::zero(), |a, x| a.max(x.abs()));
    let residual = grad.iter().fold(T::zero(), |a, x| a.max(x.abs())) / scale;
    Ldp::Solved {
        u,
        residual,
        iters: out.iterations,
        binding: active,
    }
}

fn polish<T: Real>(rows: &LdpRows<'_, T>, active: &[usize]) -> Option<(Vec<T>, Vec<T>)> {
    let k = active.len();
    let mut gram = Mat::zeros(k, k);
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate().take(a + 1) {
            let d = dot(rows.g(i), rows.g(j));
            gram[(a, b)] = d;
            gram[(b, a)] = d;
        }
    }
    let chol = Cholesky::new(&gram)?;
    let rhs: Vec<T> = active.iter().map(|&i| rows.h(i)).collect();
    let mut mu = chol.solve(&rhs);
    let build = |mu: &[T]| {
        let mut u = vec![T::zero(); rows.n];
        for (&i, &m) in active.iter().zip(mu) {
            for (uk, &gi) in u.iter_mut().zip(rows.g(i)) {
                *uk += m * gi;
            }
        }
        u
    };
    // One round of iterative refinement on the normal equations.
    let u0 = build(&mu);
    let r: Vec<T> = active.iter().map(|&i| rows.h(i) - dot(rows.g(i), &u0)).collect();
    let corr = chol.solve(&r);
    for (m, c) in mu.iter_mut().zip(corr) {
        *m += c;
    }
    if mu.iter().any(|x| !x.is_finite()) {
        return None;
    }
    Some((build(&mu), mu))
}
