//! Convex-optimization kernel.
//!
//! * [`min_profile_ssq`]: exact breakpoint scan for the Gaussian bandit
//!   profile, `min_λ w_j(λ − m_j)² + Σ_{k≠j} w_k (m_k − λ)_+²`.
//! * [`solve_qp`]: diagonal-weighted least squares under linear inequalities.
//! * [`feasible`]: nonemptiness of a polytope.
//! * [`max_bernoulli_loglik`]: constrained Bernoulli maximum likelihood.

pub(crate) mod bernoulli;
mod nnls;
mod profile;
mod qp;

pub use bernoulli::{
    bernoulli_loglik, max_bernoulli_loglik, max_bernoulli_loglik_with, BernoulliOptions, BOUNDARY_DELTA,
};
pub use nnls::{nnls, NnlsOutcome};
pub use profile::{min_profile_ssq, min_profile_ssq_all};
pub use qp::{feasible, feasible_with, solve_qp, solve_qp_with, QpOptions};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `Σ w_k (v_k − m_k)²` with nonnegative weights.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadObjective<T> {
    weights: Vec<T>,
    targets: Vec<T>,
}

impl<T: Real> QuadObjective<T> {
    pub fn new(weights: Vec<T>, targets: Vec<T>) -> Result<Self> {
        if weights.len() != targets.len() {
            return Err(Error::LengthMismatch {
                what: "objective weights and targets",
                left: weights.len(),
                right: targets.len(),
            });
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w >= T::zero()) || !w.is_finite())
        {
            return Err(Error::InvalidArgument(format!("weight {i} is {w}")));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("non-finite target".into()));
        }
        Ok(Self { weights, targets })
    }

    /// Unit weights.
    pub fn least_distance(targets: Vec<T>) -> Result<Self> {
        Self::new(vec![T::one(); targets.len()], targets)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn eval(&self, v: &[T]) -> T {
        self.weights
            .iter()
            .zip(&self.targets)
            .zip(v)
            .filter(|((w, _), _)| **w > T::zero())
            .map(|((&w, &m), &x)| w * (x - m) * (x - m))
            .sum()
    }
}

/// One row `a · v ≤ b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub coeffs: Vec<T>,
    pub bound: T,
}

/// A system of linear inequalities over `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSet<T> {
    dim: usize,
    rows: Vec<Row<T>>,
}

impl<T: Real> ConstraintSet<T> {
    pub fn new(dim: usize) -> Self {
        Self { dim, rows: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Row<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds `coeffs · v ≤ bound`.
    pub fn push(&mut self, coeffs: Vec<T>, bound: T) -> Result<&mut Self> {
        if coeffs.len() != self.dim {
            return Err(Error::LengthMismatch {
                what: "constraint row and dimension",
                left: coeffs.len(),
                right: self.dim,
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) || bound.is_nan() {
            return Err(Error::InvalidArgument("non-finite constraint row".into()));
        }
        self.rows.push(Row { coeffs, bound });
        Ok(self)
    }

    /// Adds `Σ c_i v_{k_i} ≤ bound` from sparse terms.
    pub fn push_sparse(&mut self, terms: &[(usize, T)], bound: T) -> &mut Self {
        let mut coeffs = vec![T::zero(); self.dim];
        for &(k, c) in terms {
            coeffs[k] += c;
        }
        self.rows.push(Row { coeffs, bound });
        self
    }

    /// `v_i ≤ b`.
    pub fn upper(&mut self, i: usize, b: T) -> &mut Self {
        self.push_sparse(&[(i, T::one())], b)
    }

    /// `v_i ≥ b`.
    pub fn lower(&mut self, i: usize, b: T) -> &mut Self {
        self.push_sparse(&[(i, -T::one())], -b)
    }

    /// `v_i − v_j ≤ c`.
    pub fn diff_le(&mut self, i: usize, j: usize, c: T) -> &mut Self {
        self.push_sparse(&[(i, T::one()), (j, -T::one())], c)
    }

    /// `|v_i − v_j| ≤ c`.
    pub fn abs_diff_le(&mut self, i: usize, j: usize, c: T) -> &mut Self {
        self.diff_le(i, j, c).diff_le(j, i, c)
    }

    /// Box `lo ≤ v_i ≤ hi` on every coordinate.
    pub fn boxed(&mut self, lo: T, hi: T) -> &mut Self {
        for i in 0..self.dim {
            self.lower(i, lo).upper(i, hi);
        }
        self
    }

    pub fn extend(&mut self, other: &Self) -> Result<&mut Self> {
        if other.dim != self.dim {
            return Err(Error::LengthMismatch {
                what: "constraint set dimensions",
                left: other.dim,
                right: self.dim,
            });
        }
        self.rows.extend(other.rows.iter().cloned());
        Ok(self)
    }

    /// The optimality polytope `{v : v_j ≥ v_k ∀k}`.
    pub fn arm_optimal(dim: usize, j: usize) -> Self {
        let mut c = Self::new(dim);
        for k in (0..dim).filter(|&k| k != j) {
            c.diff_le(k, j, T::zero());
        }
        c
    }

    /// Largest `a·v − b` over rows (0 when empty or satisfied).
    pub fn max_violation(&self, v: &[T]) -> T {
        self.rows
            .iter()
            .map(|r| crate::linalg::dot(&r.coeffs, v) - r.bound)
            .fold(T::zero(), T::max)
    }

    pub fn contains(&self, v: &[T], tol: T) -> bool {
        self.max_violation(v) <= tol
    }

    /// Copy with every bound loosened by `slack`.
    pub fn relaxed(&self, slack: T) -> Self {
        Self {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| Row {
                    coeffs: r.coeffs.clone(),
                    bound: r.bound + slack,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<T> {
    /// Objective at the returned point (`+inf` when infeasible).
    pub value: T,
    /// Empty when infeasible.
    pub argmin: Vec<T>,
    pub status: SolveStatus,
    pub iterations: usize,
    /// Largest constraint violation at `argmin`.
    pub max_violation: T,
    /// Stationarity residual of the KKT certificate.
    pub kkt_residual: T,
}

impl<T: Real> SolveResult<T> {
    pub fn infeasible(iterations: usize) -> Self {
        Self {
            value: T::infinity(),
            argmin: Vec::new(),
            status: SolveStatus::Infeasible,
            iterations,
            max_violation: T::infinity(),
            kkt_residual: T::infinity(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// `Ok(self)` if optimal, otherwise a solver error naming the status.
    pub fn require_optimal(self) -> Result<Self> {
        match self.status {
            SolveStatus::Optimal => Ok(self),
            s => Err(Error::Solver(format!("{s:?}"))),
        }
    }
}
