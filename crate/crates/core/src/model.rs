//! Datasets, beliefs over candidate optima, and the generalized-Bayes
//! reweighting step shared by every problem family.

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Real;

/// What the agent chose in one round.
#[derive(Debug, Clone, PartialEq)]
pub enum Decision<T> {
    /// Arm or price index.
    Index(usize),
    /// Point of a continuous decision set.
    Point(Vec<T>),
}

/// What the environment returned in one round.
#[derive(Debug, Clone, PartialEq)]
pub enum Feedback<T> {
    /// Reward, demand bit, or function value.
    Scalar(T),
    /// Subgradient.
    Vector(Vec<T>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeedbackKind {
    Scalar,
    Vector,
}

impl FeedbackKind {
    fn name(self) -> &'static str {
        match self {
            FeedbackKind::Scalar => "scalar",
            FeedbackKind::Vector => "vector",
        }
    }
}

impl<T> Feedback<T> {
    pub fn kind(&self) -> FeedbackKind {
        match self {
            Feedback::Scalar(_) => FeedbackKind::Scalar,
            Feedback::Vector(_) => FeedbackKind::Vector,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation<T> {
    pub decision: Decision<T>,
    pub feedback: Feedback<T>,
}

/// Append-only history of observations in round order. The feedback kind is
/// fixed by the first observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    observations: Vec<Observation<T>>,
}

impl<T> Default for Dataset<T> {
    fn default() -> Self {
        Self {
            observations: Vec::new(),
        }
    }
}

impl<T: Clone> Dataset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[Observation<T>] {
        &self.observations
    }

    pub fn kind(&self) -> Option<FeedbackKind> {
        self.observations.first().map(|o| o.feedback.kind())
    }

    /// In-place append; rejects a feedback kind different from the dataset's.
    pub fn push(&mut self, decision: Decision<T>, feedback: Feedback<T>) -> Result<()> {
        if let Some(kind) = self.kind() {
            if kind != feedback.kind() {
                return Err(Error::FeedbackKind {
                    expected: kind.name(),
                    found: feedback.kind().name(),
                });
            }
        }
        self.observations.push(Observation { decision, feedback });
        Ok(())
    }
}

/// Value-semantic append: returns a new dataset one longer than `d`.
pub fn append_observation<T: Clone>(
    d: &Dataset<T>,
    decision: Decision<T>,
    feedback: Feedback<T>,
) -> Result<Dataset<T>> {
    let mut out = d.clone();
    out.push(decision, feedback)?;
    Ok(out)
}

/// A discrete probability distribution over candidate optima.
#[derive(Debug, Clone, PartialEq)]
pub struct Belief<S, T> {
    support: Vec<S>,
    weights: Vec<T>,
}

impl<S: Clone, T: Real> Belief<S, T> {
    /// Validates nonnegativity and normalization (within `1e-12`).
    pub fn new(support: Vec<S>, weights: Vec<T>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::LengthMismatch {
                what: "belief support and weights",
                left: support.len(),
                right: weights.len(),
            });
        }
        if support.is_empty() {
            return Err(Error::InvalidBelief("empty support".into()));
        }
        let mut total = T::zero();
        for (i, &w) in weights.iter().enumerate() {
            if !(w >= T::zero()) || !w.is_finite() {
                return Err(Error::InvalidBelief(format!("weight {i} is {w}")));
            }
            total += w;
        }
        if (total - T::one()).abs() > T::tol(1e-12) * T::c(weights.len() as f64) {
            return Err(Error::InvalidBelief(format!("weights sum to {total}")));
        }
        Ok(Self { support, weights })
    }

    pub fn uniform(support: Vec<S>) -> Result<Self> {
        let n = support.len();
        if n == 0 {
            return Err(Error::InvalidBelief("empty support".into()));
        }
        let w = T::one() / T::c(n as f64);
        Self::new(support, vec![w; n])
    }

    pub fn point_mass(support: Vec<S>, index: usize) -> Result<Self> {
        if index >= support.len() {
            return Err(Error::InvalidArgument(format!(
                "point mass index {index} outside support of size {}",
                support.len()
            )));
        }
        let mut weights = vec![T::zero(); support.len()];
        weights[index] = T::one();
        Self::new(support, weights)
    }

    pub fn support(&self) -> &[S] {
        &self.support
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Log prior weights (`-inf` where the weight is zero).
    pub fn log_weights(&self) -> Vec<T> {
        self.weights.iter().map(|w| w.ln()).collect()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> T {
        self.weights
            .iter()
            .filter(|&&w| w > T::zero())
            .map(|&w| -w * w.ln())
            .sum()
    }

    /// Index of the largest weight; lowest index on ties.
    pub fn mode_index(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.weights.iter().enumerate() {
            if w > self.weights[best] {
                best = i;
            }
        }
        best
    }

    /// Reweights this belief (as a prior) by `exp(log_lik)`. When every
    /// supported candidate has the same log-likelihood the prior is returned
    /// unchanged, bit for bit.
    pub fn reweight(&self, log_lik: &[T]) -> Result<Self> {
        if log_lik.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "log-likelihood and belief support",
                left: log_lik.len(),
                right: self.len(),
            });
        }
        let live: Vec<T> = self
            .weights
            .iter()
            .zip(log_lik)
            .filter(|(w, _)| **w > T::zero())
            .map(|(_, l)| *l)
            .collect();
        if live.iter().any(|l| l.is_nan() || *l == T::infinity()) {
            return Err(Error::InvalidArgument("log-likelihood is NaN or +inf".into()));
        }
        if live.windows(2).all(|p| p[0] == p[1]) && live[0].is_finite() {
            return Ok(self.clone());
        }
        let weights = posterior_from_log_weights(log_lik, &self.log_weights())?
            .weights
            .clone();
        Ok(Self {
            support: self.support.clone(),
            weights,
        })
    }

    /// Draws one candidate with probability equal to its weight.
    pub fn sample(&self, rng: &mut RngStream) -> Result<S> {
        sample_from_belief(self, rng)
    }
}

/// Normalizes `exp(log_lik + log_prior)` with max-subtraction. Entries may be
/// `-inf` (impossible candidates) but not all of them.
pub fn posterior_from_log_weights<T: Real>(log_lik: &[T], log_prior: &[T]) -> Result<Belief<usize, T>> {
    if log_lik.len() != log_prior.len() {
        return Err(Error::LengthMismatch {
            what: "log-likelihood and log-prior",
            left: log_lik.len(),
            right: log_prior.len(),
        });
    }
    if log_lik.is_empty() {
        return Err(Error::InvalidBelief("empty support".into()));
    }
    let mut scores = Vec::with_capacity(log_lik.len());
    for (&l, &p) in log_lik.iter().zip(log_prior) {
        if l.is_nan() || p.is_nan() || l == T::infinity() || p == T::infinity() {
            return Err(Error::InvalidArgument("log-weight is NaN or +inf".into()));
        }
        // -inf + finite stays -inf; never form -inf - -inf.
        scores.push(if l == T::neg_infinity() || p == T::neg_infinity() {
            T::neg_infinity()
        } else {
            l + p
        });
    }
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return Err(Error::EmptyPosterior);
    }
    let mut weights: Vec<T> = scores
        .iter()
        .map(|&s| {
            if s == T::neg_infinity() {
                T::zero()
            } else {
                (s - max).exp()
            }
        })
        .collect();
    let total: T = weights.iter().copied().sum();
    for w in &mut weights {
        *w /= total;
    }
    Belief::new((0..log_lik.len()).collect(), weights)
}

/// Draws `support[i]` with probability `weights[i]`; exactly one categorical draw.
pub fn sample_from_belief<S: Clone, T: Real>(b: &Belief<S, T>, rng: &mut RngStream) -> Result<S> {
    let i = rng.categorical(&b.weights)?;
    Ok(b.support[i].clone())
}

/// One round of an episode: what was played, what came back, and the
/// instantaneous regret of the choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Round<D, T, F = T> {
    /// 1-based round index.
    pub t: usize,
    pub decision: D,
    pub feedback: F,
    pub regret: T,
    /// Entropy of the belief the decision was sampled from, if it has one.
    pub entropy: Option<T>,
}

/// Per-round log with the cumulative regret trace `R(t) = Σ_{s≤t} Δ_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord<D, T, F = T> {
    rounds: Vec<Round<D, T, F>>,
    cumulative: Vec<T>,
}

impl<D, T: Real, F> Default for EpisodeRecord<D, T, F> {
    fn default() -> Self {
        Self {
            rounds: Vec::new(),
            cumulative: Vec::new(),
        }
    }
}

impl<D, T: Real, F> EpisodeRecord<D, T, F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(n: usize) -> Self {
        Self {
            rounds: Vec::with_capacity(n),
            cumulative: Vec::with_capacity(n),
        }
    }

    /// Appends round `len() + 1`.
    pub fn record(&mut self, decision: D, feedback: F, regret: T, entropy: Option<T>) {
        let prev = self.cumulative.last().copied().unwrap_or_else(T::zero);
        self.cumulative.push(prev + regret);
        self.rounds.push(Round {
            t: self.rounds.len() + 1,
            decision,
            feedback,
            regret,
            entropy,
        });
    }

    pub fn rounds(&self) -> &[Round<D, T, F>] {
        &self.rounds
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// `R(t)` for `1 ≤ t ≤ len()`.
    pub fn regret_at(&self, t: usize) -> T {
        self.cumulative[t - 1]
    }

    pub fn cumulative_regret(&self) -> &[T] {
        &self.cumulative
    }

    pub fn total_regret(&self) -> T {
        self.cumulative.last().copied().unwrap_or_else(T::zero)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_to_empty_and_preserve_prefix() {
        let d: Dataset<f64> = Dataset::new();
        let d1 = append_observation(&d, Decision::Index(2), Feedback::Scalar(0.7)).unwrap();
        assert_eq!(d1.len(), 1);
        assert!(d.is_empty());

        let mut d3 = Dataset::new();
        for (arm, y) in [(0, 0.1), (1, 0.4), (2, -1.0)] {
            d3.push(Decision::Index(arm), Feedback::Scalar(y)).unwrap();
        }
        let d4 = append_observation(&d3, Decision::Index(1), Feedback::Scalar(-0.2)).unwrap();
        assert_eq!(d4.len(), 4);
        assert_eq!(&d4.observations()[..3], d3.observations());
    }

    #[test]
    fn kind_mismatch_is_rejected() {
        let mut d = Dataset::new();
        d.push(Decision::Index(0), Feedback::Scalar(1.0f64)).unwrap();
        let err = append_observation(&d, Decision::Index(0), Feedback::Vector(vec![1.0, 2.0]));
        assert!(matches!(err, Err(Error::FeedbackKind { .. })));
    }

    #[test]
    fn symmetric_log_weights_give_uniform() {
        let lp = vec![(1.0f64 / 3.0).ln(); 3];
        let b = posterior_from_log_weights(&[0.0, 0.0, 0.0], &lp).unwrap();
        for &w in b.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_candidate_closed_form() {
        let lp = vec![0.5f64.ln(); 2];
        let b = posterior_from_log_weights(&[0.0, -0.5], &lp).unwrap();
        let e = 0.5f64.exp();
        assert!((b.weights()[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((b.weights()[0] - 0.62246).abs() < 1e-5);
        assert!((b.weights()[1] - 0.37754).abs() < 1e-5);
    }

    #[test]
    fn extreme_gap_no_overflow() {
        let lp = vec![0.5f64.ln(); 2];
        let b = posterior_from_log_weights(&[-1000.0, 0.0], &lp).unwrap();
        assert!(b.weights()[0] < 1e-300 && b.weights()[0].is_finite());
        assert!((b.weights()[1] - 1.0).abs() < 1e-15);
        let b = posterior_from_log_weights(&[1e6, -1e6], &lp).unwrap();
        assert_eq!(b.weights()[0], 1.0);
    }

    #[test]
    fn neg_infinity_handling() {
        let lp = vec![0.0f64, 0.0, f64::NEG_INFINITY];
        let b = posterior_from_log_weights(&[f64::NEG_INFINITY, 0.0, 0.0], &lp).unwrap();
        assert_eq!(b.weights(), &[0.0, 1.0, 0.0]);
        let err = posterior_from_log_weights(&[f64::NEG_INFINITY; 2], &[0.0, 0.0]);
        assert_eq!(err.unwrap_err(), Error::EmptyPosterior);
        let err = posterior_from_log_weights(&[0.0], &[0.0, 0.0]);
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn reweight_zero_data_is_exact() {
        let prior = Belief::new(vec![0usize, 1, 2], vec![0.2f64, 0.3, 0.5]).unwrap();
        assert_eq!(prior.reweight(&[0.0, 0.0, 0.0]).unwrap(), prior);
        assert_eq!(prior.reweight(&[-4.0, -4.0, -4.0]).unwrap(), prior);
    }

    #[test]
    fn degenerate_belief_always_same_arm() {
        let b = Belief::<usize, f64>::point_mass(vec![0, 1, 2, 3], 3).unwrap();
        let mut rng = RngStream::new(5);
        for _ in 0..1000 {
            assert_eq!(b.sample(&mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn fixed_seed_reproduces_draw() {
        let b = Belief::new(vec![0usize, 1, 2], vec![0.2f64, 0.3, 0.5]).unwrap();
        let first = sample_from_belief(&b, &mut RngStream::new(42)).unwrap();
        for _ in 0..10 {
            assert_eq!(sample_from_belief(&b, &mut RngStream::new(42)).unwrap(), first);
        }
    }

    #[test]
    fn uniform_frequencies_within_six_sigma() {
        let b = Belief::<usize, f64>::uniform(vec![0, 1, 2, 3]).unwrap();
        let mut rng = RngStream::new(2024);
        let mut counts = [0u32; 4];
        let n = 1_000_000;
        for _ in 0..n {
            counts[b.sample(&mut rng).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / n as f64;
            assert!((0.248..=0.252).contains(&f), "frequency {f}");
        }
    }

    #[test]
    fn invalid_beliefs() {
        assert!(Belief::new(vec![0usize, 1], vec![0.5f64, 0.6]).is_err());
        assert!(Belief::new(vec![0usize, 1], vec![1.5f64, -0.5]).is_err());
        assert!(Belief::<usize, f64>::new(vec![], vec![]).is_err());
    }

    #[test]
    fn f32_posterior() {
        let lp = vec![0.5f32.ln(); 2];
        let b = posterior_from_log_weights(&[0.0f32, -0.5], &lp).unwrap();
        assert!((b.weights()[0] - 0.62246).abs() < 1e-5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn shift_invariance(
                ll in prop::collection::vec(-50.0f64..50.0, 1..10),
                c in -1e3f64..1e3,
            ) {
                let lp = vec![-(ll.len() as f64).ln(); ll.len()];
                let a = posterior_from_log_weights(&ll, &lp).unwrap();
                let shifted: Vec<f64> = ll.iter().map(|x| x + c).collect();
                let b = posterior_from_log_weights(&shifted, &lp).unwrap();
                for (x, y) in a.weights().iter().zip(b.weights()) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }

            #[test]
            fn zero_data_returns_prior(raw in prop::collection::vec(0.01f64..1.0, 1..10)) {
                let total: f64 = raw.iter().sum();
                let prior: Vec<f64> = raw.iter().map(|w| w / total).collect();
                let lp: Vec<f64> = prior.iter().map(|w| w.ln()).collect();
                let b = posterior_from_log_weights(&vec![0.0; prior.len()], &lp).unwrap();
                for (x, y) in b.weights().iter().zip(&prior) {
                    prop_assert!((x - y).abs() <= 1e-15);
                }
            }
        }
    }
}
