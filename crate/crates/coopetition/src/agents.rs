//! Online learning opponents.
//!
//! All agents receive full-information feedback: a per-action expected
//! payoff vector computed against the opponents' submitted mixed strategies
//! for the round. Payoffs are affinely rescaled into [-1, 1] inside the
//! agent (the toolkit computes the bounds from the game in effect), which
//! preserves argmax structure; learning rates are quoted on that scale.
//!
//! Kinds:
//! - `Mwu`: multiplicative weights, `w *= exp(eta * payoff)`.
//! - `Lmwu`: linear multiplicative weights, `w *= 1 + eta * payoff`; the
//!   traditional slow-rate variant. Requires `|eta * payoff| < 1`.
//! - `Ftrl`: follow-the-regularized-leader with the entropic regularizer,
//!   i.e. softmax of `eta` times cumulative payoffs. Pointwise identical to
//!   `Mwu` at the same rate.
//! - `Ftl`: follow-the-leader, argmax of cumulative payoffs (ties to the
//!   lowest index). Persistent but not no-regret.
//! - `Constant`: plays a fixed action.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polymatrix::{GameError, MixedStrategy};
use crate::scalar::Real;

/// Learning rate applied after payoffs are rescaled into [-1, 1]. The
/// paper-style theory rate `sqrt(8 ln m / T)` optimizes worst-case regret
/// but converges too slowly for 100-round experiments; the defaults here are
/// the "fast" (MWU/FTRL) and "slow" (LMWU) rates used in the built-in
/// experiment configurations.
pub const DEFAULT_FAST_ETA: f64 = 10.0;
pub const DEFAULT_LMWU_ETA: f64 = 0.12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AgentKind {
    Mwu,
    Lmwu,
    Ftrl,
    Ftl,
    Constant(usize),
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("feedback vector length {got}, agent has {want} actions")]
    FeedbackLength { want: usize, got: usize },
    #[error("non-finite feedback entry")]
    NonFinite,
    #[error("LMWU update would drive a weight nonpositive: |eta * payoff| = {0} >= 1")]
    LmwuStep(f64),
    #[error("rescaled payoff {0} outside [-1, 1]; widen the payoff bounds")]
    OutOfBounds(f64),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Affine map taking game payoffs into [-1, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct PayoffBounds<S: Real> {
    pub lo: S,
    pub hi: S,
}

impl<S: Real> PayoffBounds<S> {
    pub fn new(lo: S, hi: S) -> Self {
        Self { lo, hi }
    }

    /// The identity on payoffs already in [-1, 1].
    pub fn unit() -> Self {
        Self { lo: -S::one(), hi: S::one() }
    }

    fn rescale(&self, p: S) -> S {
        let span = self.hi - self.lo;
        if span <= S::zero() {
            return S::zero();
        }
        (S::of(2.0) * p - self.hi - self.lo) / span
    }
}

/// Per-round feedback bookkeeping: realized expected payoffs and the full
/// counterfactual vectors, enough to evaluate regret against any fixed
/// action in hindsight.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct RegretLedger<S: Real> {
    pub realized: Vec<S>,
    pub counterfactual: Vec<Vec<S>>,
}

impl<S: Real> Default for RegretLedger<S> {
    fn default() -> Self {
        Self { realized: Vec::new(), counterfactual: Vec::new() }
    }
}

impl<S: Real> RegretLedger<S> {
    pub fn rounds(&self) -> usize {
        self.realized.len()
    }

    /// `(best fixed action's cumulative payoff - realized cumulative) / t`.
    pub fn average_regret(&self, t: usize) -> S {
        assert!(t > 0 && t <= self.rounds(), "regret horizon out of range");
        let actions = self.counterfactual[0].len();
        let best = (0..actions)
            .map(|a| self.counterfactual[..t].iter().map(|v| v[a]).sum::<S>())
            .fold(S::neg_infinity(), S::max);
        let realized: S = self.realized[..t].iter().copied().sum();
        (best - realized) / S::from_usize(t).unwrap()
    }
}

#[derive(Clone, Debug)]
pub struct AgentState<S: Real> {
    pub kind: AgentKind,
    pub num_actions: usize,
    pub eta: S,
    bounds: PayoffBounds<S>,
    /// Cumulative *rescaled* payoff per action.
    cumulative: Vec<S>,
    /// Multiplicative weights (MWU/LMWU), renormalized every update.
    weights: Vec<S>,
    pub round: usize,
    pub ledger: RegretLedger<S>,
}

impl<S: Real> AgentState<S> {
    pub fn new(kind: AgentKind, num_actions: usize, eta: S, bounds: PayoffBounds<S>) -> Self {
        assert!(num_actions > 0);
        if let AgentKind::Constant(a) = kind {
            assert!(a < num_actions, "constant action out of range");
        }
        Self {
            kind,
            num_actions,
            eta,
            bounds,
            cumulative: vec![S::zero(); num_actions],
            weights: vec![S::one() / S::from_usize(num_actions).unwrap(); num_actions],
            round: 0,
            ledger: RegretLedger::default(),
        }
    }

    pub fn with_default_eta(kind: AgentKind, num_actions: usize, bounds: PayoffBounds<S>) -> Self {
        let eta = match kind {
            AgentKind::Lmwu => S::of(DEFAULT_LMWU_ETA),
            _ => S::of(DEFAULT_FAST_ETA),
        };
        Self::new(kind, num_actions, eta, bounds)
    }

    /// The strategy to submit this round.
    pub fn act(&self) -> MixedStrategy<S> {
        let probs: Vec<S> = match self.kind {
            AgentKind::Constant(a) => {
                return MixedStrategy::pure(a, self.num_actions).expect("validated action")
            }
            AgentKind::Ftl => {
                // argmax of cumulative payoff, lowest index on ties; before
                // any feedback, action 0
                let mut best = 0usize;
                for a in 1..self.num_actions {
                    if self.cumulative[a] > self.cumulative[best] {
                        best = a;
                    }
                }
                return MixedStrategy::pure(best, self.num_actions).expect("in range");
            }
            AgentKind::Mwu | AgentKind::Lmwu => self.weights.clone(),
            AgentKind::Ftrl => {
                // softmax(eta * cumulative), stabilized by the max
                let m = self.cumulative.iter().copied().fold(S::neg_infinity(), S::max);
                self.cumulative.iter().map(|&c| ((c - m) * self.eta).exp()).collect()
            }
        };
        let total: S = probs.iter().copied().sum();
        MixedStrategy::new(probs.iter().map(|&p| p / total).collect())
            .expect("weights form a distribution")
    }

    /// Consume one round of full-information feedback.
    pub fn update(&mut self, counterfactual: &[S]) -> Result<(), AgentError> {
        if counterfactual.len() != self.num_actions {
            return Err(AgentError::FeedbackLength {
                want: self.num_actions,
                got: counterfactual.len(),
            });
        }
        if counterfactual.iter().any(|v| !v.is_finite()) {
            return Err(AgentError::NonFinite);
        }

        let strategy = self.act();
        let realized: S =
            strategy.probs().iter().zip(counterfactual).map(|(&p, &v)| p * v).sum();
        self.ledger.realized.push(realized);
        self.ledger.counterfactual.push(counterfactual.to_vec());

        let tol = S::of(1e-9);
        let rescaled: Vec<S> = counterfactual
            .iter()
            .map(|&p| {
                let r = self.bounds.rescale(p);
                if r.abs() > S::one() + tol {
                    return Err(AgentError::OutOfBounds(r.to_f64_lossy()));
                }
                Ok(r.max(-S::one()).min(S::one()))
            })
            .collect::<Result<_, _>>()?;

        match self.kind {
            AgentKind::Mwu => {
                for (w, &p) in self.weights.iter_mut().zip(&rescaled) {
                    *w = *w * (self.eta * p).exp();
                }
                self.renormalize();
            }
            AgentKind::Lmwu => {
                for &p in &rescaled {
                    let step = (self.eta * p).abs();
                    if step >= S::one() {
                        return Err(AgentError::LmwuStep(step.to_f64_lossy()));
                    }
                }
                for (w, &p) in self.weights.iter_mut().zip(&rescaled) {
                    *w = *w * (S::one() + self.eta * p);
                }
                self.renormalize();
            }
            AgentKind::Ftrl | AgentKind::Ftl | AgentKind::Constant(_) => {}
        }
        for (c, &p) in self.cumulative.iter_mut().zip(&rescaled) {
            *c = *c + p;
        }
        self.round += 1;
        Ok(())
    }

    fn renormalize(&mut self) {
        let total: S = self.weights.iter().copied().sum();
        for w in self.weights.iter_mut() {
            *w = *w / total;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_agent(kind: AgentKind, actions: usize, eta: f64) -> AgentState<f64> {
        AgentState::new(kind, actions, eta, PayoffBounds::unit())
    }

    #[test]
    fn round_zero_strategies() {
        let mwu = unit_agent(AgentKind::Mwu, 3, 0.5);
        assert_eq!(mwu.act().probs(), &[1.0 / 3.0; 3]);
        let ftrl = unit_agent(AgentKind::Ftrl, 3, 0.5);
        assert_eq!(ftrl.act().probs(), &[1.0 / 3.0; 3]);
        let ftl = unit_agent(AgentKind::Ftl, 3, 0.5);
        assert_eq!(ftl.act().as_pure(), Some(0));
        let constant = unit_agent(AgentKind::Constant(2), 3, 0.5);
        assert_eq!(constant.act().as_pure(), Some(2));
    }

    #[test]
    fn mwu_one_step_exponential_weights() {
        let mut a = unit_agent(AgentKind::Mwu, 2, 0.5);
        a.update(&[1.0, 0.0]).unwrap();
        let e = 0.5f64.exp();
        let want = [e / (e + 1.0), 1.0 / (e + 1.0)];
        let got = a.act();
        assert!((got.probs()[0] - want[0]).abs() < 1e-12);
        assert!((got.probs()[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn ftl_argmax_and_switching() {
        let mut a = unit_agent(AgentKind::Ftl, 2, 1.0);
        a.update(&[0.2, 0.5]).unwrap();
        assert_eq!(a.act().as_pure(), Some(1));
        // a new action becomes strictly best cumulatively -> switch
        a.update(&[1.0, 0.0]).unwrap();
        assert_eq!(a.act().as_pure(), Some(0));
    }

    #[test]
    fn zero_feedback_leaves_strategy_unchanged() {
        for kind in [AgentKind::Mwu, AgentKind::Lmwu, AgentKind::Ftrl] {
            let mut a = unit_agent(kind, 3, 0.7);
            a.update(&[0.3, -0.1, 0.9]).unwrap();
            let before = a.act();
            a.update(&[0.0, 0.0, 0.0]).unwrap();
            let after = a.act();
            for (b, c) in before.probs().iter().zip(after.probs()) {
                assert!((b - c).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lmwu_rejects_oversized_steps() {
        let mut a = unit_agent(AgentKind::Lmwu, 2, 1.5);
        let err = a.update(&[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, AgentError::LmwuStep(_)));
        // out-of-range payoff under unit bounds
        let mut a = unit_agent(AgentKind::Lmwu, 2, 0.1);
        let err = a.update(&[3.0, 0.0]).unwrap_err();
        assert!(matches!(err, AgentError::OutOfBounds(_)));
    }

    #[test]
    fn rescaling_preserves_argmax() {
        let b = PayoffBounds::new(0.0, 10.0);
        let mut a = AgentState::new(AgentKind::Ftl, 3, 1.0, b);
        a.update(&[2.0, 9.0, 5.0]).unwrap();
        assert_eq!(a.act().as_pure(), Some(1));
    }

    #[test]
    fn best_fixed_action_has_zero_regret() {
        let mut a = unit_agent(AgentKind::Constant(1), 2, 1.0);
        for _ in 0..50 {
            a.update(&[0.1, 0.8]).unwrap();
        }
        assert!(a.ledger.average_regret(50).abs() < 1e-12);
    }

    #[test]
    fn mwu_regret_vanishes_on_random_payoffs() {
        use rand::{Rng, SeedableRng};
        let t = 10_000usize;
        let m = 4usize;
        // theory rate for the regret bound
        let eta = (8.0 * (m as f64).ln() / t as f64).sqrt();
        let mut a = unit_agent(AgentKind::Mwu, m, eta);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..t {
            let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            a.update(&v).unwrap();
        }
        let bound = 2.0 * ((m as f64).ln() / t as f64).sqrt() + 0.05;
        assert!(a.ledger.average_regret(t) <= bound);
    }

    #[test]
    fn ftl_fails_on_alternating_sequence_mwu_does_not() {
        let t = 10_000usize;
        let mut ftl = unit_agent(AgentKind::Ftl, 2, 1.0);
        let eta = (8.0 * 2f64.ln() / t as f64).sqrt();
        let mut mwu = unit_agent(AgentKind::Mwu, 2, eta);
        // classic alternating counterexample: leader is always wrong
        for round in 0..t {
            let v = if round % 2 == 0 { [0.0, 1.0] } else { [1.0, 0.0] };
            ftl.update(&v).unwrap();
            mwu.update(&v).unwrap();
        }
        assert!(ftl.ledger.average_regret(t) > 0.4);
        assert!(mwu.ledger.average_regret(t) <= 0.05);
    }

    #[test]
    fn ftl_locks_onto_permanent_leader() {
        let mut a = unit_agent(AgentKind::Ftl, 3, 1.0);
        for round in 0..200 {
            let v = if round < 20 {
                // noisy prefix
                if round % 2 == 0 { [1.0, 0.0, 0.5] } else { [0.0, 1.0, 0.5] }
            } else {
                [0.0, 0.0, 1.0]
            };
            a.update(&v).unwrap();
        }
        // action 2 is the permanent best-in-hindsight from some prefix on
        for _ in 0..20 {
            assert_eq!(a.act().as_pure(), Some(2));
            a.update(&[0.0, 0.0, 1.0]).unwrap();
        }
    }

    #[test]
    fn consistency_all_kinds_play_dominant_action() {
        // one action strictly dominates every round; by T = 10^4 every agent
        // plays it more than 99% of the time
        let t = 10_000usize;
        for kind in [AgentKind::Mwu, AgentKind::Ftrl, AgentKind::Lmwu, AgentKind::Ftl] {
            let eta = match kind {
                AgentKind::Lmwu => 0.12,
                AgentKind::Ftl => 1.0,
                _ => (8.0 * 2f64.ln() / t as f64).sqrt(),
            };
            let mut a = unit_agent(kind, 2, eta);
            let mut mass = 0.0;
            for _ in 0..t {
                mass += a.act().probs()[1];
                a.update(&[-1.0, 1.0]).unwrap();
            }
            assert!(
                mass / t as f64 > 0.99,
                "{kind:?} played the dominant action {:.4} of the time",
                mass / t as f64
            );
        }
    }

    #[test]
    fn no_regret_trend_decreases_with_horizon() {
        use rand::{Rng, SeedableRng};
        for kind in [AgentKind::Mwu, AgentKind::Ftrl, AgentKind::Lmwu] {
            let mut prev = f64::INFINITY;
            for t in [100usize, 1000, 10_000] {
                let eta = match kind {
                    AgentKind::Lmwu => 0.9 * (2f64.ln() / t as f64).sqrt().min(0.9),
                    _ => (8.0 * 2f64.ln() / t as f64).sqrt(),
                };
                let mut a = unit_agent(kind, 2, eta);
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
                for round in 0..t {
                    // fixed stochastic opponent with a mild edge for action 0
                    let base = if rng.gen_bool(0.6) { [0.6, 0.2] } else { [0.1, 0.4] };
                    let _ = round;
                    a.update(&base).unwrap();
                }
                let r = a.ledger.average_regret(t).max(0.0);
                assert!(r <= prev + 1e-9, "{kind:?} regret not decreasing: {r} after {prev}");
                prev = r;
            }
        }
    }
}
