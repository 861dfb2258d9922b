//! Lawson–Hanson nonnegative least squares.

use crate::linalg::{dot, Lstsq};
use crate::scalar::Real;

#[derive(Debug, Clone)]
pub struct NnlsOutcome<T> {
    pub z: Vec<T>,
    /// `f − E z`.
    pub residual: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves `min ‖E z − f‖₂ s.t. z ≥ 0` where `E` is given by its columns.
pub fn nnls<T: Real>(cols: &[Vec<T>], f: &[T], max_iterations: usize) -> NnlsOutcome<T> {
    let flat: Vec<T> = cols.iter().flat_map(|c| c.iter().copied()).collect();
    nnls_flat(&flat, f.len(), f, max_iterations, &[])
}

/// As [`nnls`] with the columns of length `m` stored back to back. Columns
/// in `guess` start in the passive set; a good guess saves most of the
/// exchange steps and a bad one costs only a few extra solves.
pub(crate) fn nnls_flat<T: Real>(
    flat: &[T],
    m: usize,
    f: &[T],
    max_iterations: usize,
    guess: &[usize],
) -> NnlsOutcome<T> {
    let col = |j: usize| &flat[j * m..(j + 1) * m];
    let n = flat.len().checked_div(m).unwrap_or(0);
    let mut z = vec![T::zero(); n];
    let mut z_before = vec![T::zero(); n];
    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let mut set: Vec<usize> = Vec::with_capacity(n);
    let mut s: Vec<T> = Vec::with_capacity(n);
    let mut lstsq = Lstsq::with_capacity(m, n.min(m));
    let mut residual = f.to_vec();
    let mut iterations = 0;

    // Dual entries are judged relative to |col|·|residual| so that columns
    // of very different magnitude do not mask each other.
    let norms: Vec<T> = (0..n).map(|j| dot(col(j), col(j)).sqrt()).collect();
    let rel = T::epsilon() * T::c(10.0 * (m.max(n).max(1)) as f64);
    let zero_tol = T::epsilon() * T::c(16.0);

    // Shrink the guess until its least-squares solution is positive.
    for &j in guess {
        if j < n && !passive[j] {
            passive[j] = true;
            set.push(j);
        }
    }
    while !set.is_empty() {
        iterations += 1;
        if !lstsq.solve(set.len(), |i| col(set[i]), f, &mut s) {
            set.iter().for_each(|&j| passive[j] = false);
            set.clear();
            break;
        }
        if s.iter().all(|&x| x > T::zero()) {
            for (&j, &x) in set.iter().zip(&s) {
                z[j] = x;
            }
            break;
        }
        let mut keep = s.iter().map(|&x| x > T::zero());
        set.retain(|&j| {
            let k = keep.next().unwrap_or(false);
            passive[j] = k;
            k
        });
    }
    for (j, &zj) in z.iter().enumerate() {
        if zj != T::zero() {
            for (r, &e) in residual.iter_mut().zip(col(j)) {
                *r -= e * zj;
            }
        }
    }

    loop {
        let mut best = None;
        let mut best_w = T::zero();
        let res_norm = dot(&residual, &residual).sqrt();
        for j in 0..n {
            if passive[j] || blocked[j] {
                continue;
            }
            let w = dot(col(j), &residual);
            if w > rel * norms[j] * res_norm && w / norms[j] > best_w {
                best_w = w / norms[j];
                best = Some(j);
            }
        }
        let Some(t) = best else {
            return NnlsOutcome {
                z,
                residual,
                iterations,
                converged: true,
            };
        };
        passive[t] = true;
        set.push(t);
        z_before.copy_from_slice(&z);
        let mut first = true;
        loop {
            iterations += 1;
            if iterations > max_iterations {
                return NnlsOutcome {
                    z,
                    residual,
                    iterations,
                    converged: false,
                };
            }
            let solved = lstsq.solve(set.len(), |i| col(set[i]), f, &mut s);
            let t_pos = set.iter().position(|&j| j == t);
            // The entering column should always get a positive coefficient;
            // if it is numerically dependent on the set or rounding says
            // otherwise, skip it.
            if !solved || (first && t_pos.is_some_and(|p| s[p] <= T::zero())) {
                set.retain(|&j| j != t);
                passive[t] = false;
                blocked[t] = true;
                z.copy_from_slice(&z_before);
                break;
            }
            if s.iter().all(|&x| x > T::zero()) {
                for (&j, &x) in set.iter().zip(&s) {
                    z[j] = x;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            first = false;
            let mut alpha = T::one();
            for (&j, &x) in set.iter().zip(&s) {
                if x <= T::zero() {
                    let a = z[j] / (z[j] - x);
                    if a < alpha {
                        alpha = a;
                    }
                }
            }
            for (&j, &x) in set.iter().zip(&s) {
                z[j] = z[j] + alpha * (x - z[j]);
            }
            set.retain(|&j| {
                if z[j] <= zero_tol * (T::one() + z_before[j].abs()) {
                    z[j] = T::zero();
                    passive[j] = false;
                    false
                } else {
                    true
                }
            });
            if set.is_empty() {
                break;
            }
        }
        residual.copy_from_slice(f);
        for (j, &zj) in z.iter().enumerate() {
            if zj != T::zero() {
                for (r, &e) in residual.iter_mut().zip(col(j)) {
                    *r -= e * zj;
                }
            }
        }
    }
}
