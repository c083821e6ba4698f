//! Iterated-game simulation: one manipulator policy against two learning
//! agents, with win-rate and margin aggregation over seeded runs.
//!
//! Determinism: a run is fully determined by (inputs, seed); an experiment
//! derives run seeds as `base_seed + run_index`, so results are bit-identical
//! regardless of how many threads execute the runs.

use rand::distributions::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agents::{AgentError, AgentKind, AgentState, PayoffBounds};
use crate::polymatrix::{
    counterfactual_payoffs, expected_utility, manipulation_cost, realized_utility, ActionProfile,
    GameError, MixedStrategy, Player, PolymatrixGame,
};
use crate::scalar::Real;
use crate::synth::ManipulatorPolicy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UtilityMode {
    /// Draw actions from the submitted mixed strategies and record realized
    /// utilities (the experimental protocol).
    Sampled,
    /// Record exact expected utilities; variance-free.
    Expected,
}

#[derive(Debug, Error)]
pub enum ArenaError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

/// One round of a trace.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct TraceRound<S: Real> {
    pub round: usize,
    /// Index into the policy's phases for the complete strategy in effect.
    pub phase: usize,
    pub cost: S,
    pub utilities: [S; 3],
    /// Sampled actions; `None` in expected mode (the manipulator's action is
    /// always pure and recorded).
    pub actions: Option<ActionProfile>,
    pub strategies: (Vec<S>, Vec<S>),
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct GameTrace<S: Real> {
    pub rounds: Vec<TraceRound<S>>,
    /// Time-averaged utilities (U1, U2, U3).
    pub totals: [S; 3],
}

impl<S: Real> GameTrace<S> {
    /// CSV with columns round,u1,u2,u3,cost,a1,a2,a3 (actions -1 in expected
    /// mode).
    pub fn to_csv(&self, manipulator_actions: &[usize]) -> String {
        let mut out = String::from("round,u1,u2,u3,cost,a1,a2,a3\n");
        for (r, a1) in self.rounds.iter().zip(manipulator_actions) {
            let (a2, a3) = match r.actions {
                Some(p) => (p.a2 as i64, p.a3 as i64),
                None => (-1, -1),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.round, r.utilities[0], r.utilities[1], r.utilities[2], r.cost, a1, a2, a3
            ));
        }
        out
    }
}

/// Winning margin of a trace: `min(U1 - U2, U1 - U3)` when player 1 strictly
/// beats both opponents, else `None` (the run is not a win and is excluded
/// from margin aggregation).
pub fn margin<S: Real>(trace: &GameTrace<S>) -> Option<S> {
    let [u1, u2, u3] = trace.totals;
    if u1 > u2 && u1 > u3 {
        Some((u1 - u2).min(u1 - u3))
    } else {
        None
    }
}

/// Payoff bounds each opponent can see under any phase of the policy,
/// used to configure the agents' internal rescaling.
pub fn opponent_bounds<S: Real>(
    game: &PolymatrixGame<S>,
    policy: &ManipulatorPolicy<S>,
) -> Result<(PayoffBounds<S>, PayoffBounds<S>), GameError> {
    let mut lo2 = S::infinity();
    let mut hi2 = S::neg_infinity();
    let mut lo3 = S::infinity();
    let mut hi3 = S::neg_infinity();
    for cs in policy.phases() {
        let in_effect = game.with_replacements(cs)?;
        let (l2, h2) = in_effect.utility_bounds(Player::Two);
        let (l3, h3) = in_effect.utility_bounds(Player::Three);
        lo2 = lo2.min(l2);
        hi2 = hi2.max(h2);
        lo3 = lo3.min(l3);
        hi3 = hi3.max(h3);
    }
    Ok((PayoffBounds::new(lo2, hi2), PayoffBounds::new(lo3, hi3)))
}

fn sample_action<S: Real>(strategy: &MixedStrategy<S>, rng: &mut ChaCha8Rng) -> usize {
    let u: f64 = rand::distributions::Uniform::new(0.0f64, 1.0).sample(rng);
    let mut acc = 0.0f64;
    for (i, &p) in strategy.probs().iter().enumerate() {
        acc += p.to_f64_lossy();
        if u < acc {
            return i;
        }
    }
    strategy.len() - 1
}

/// Play `horizon` rounds of the iterated game.
///
/// Each round: the policy emits the complete strategy for the round, agents
/// emit mixed strategies, utilities are recorded in the chosen mode, and the
/// agents consume counterfactual payoff vectors computed against the
/// opponents' *mixed* strategies (full-information feedback, also in sampled
/// mode).
pub fn run_game<S: Real>(
    game: &PolymatrixGame<S>,
    policy: &ManipulatorPolicy<S>,
    agent2: &mut AgentState<S>,
    agent3: &mut AgentState<S>,
    horizon: usize,
    seed: u64,
    mode: UtilityMode,
) -> Result<GameTrace<S>, ArenaError> {
    if horizon == 0 {
        return Err(ArenaError::EmptyHorizon);
    }
    policy.validate(game)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases = policy.phases();

    // Precompute the per-phase game in effect and its cost.
    let mut in_effect = Vec::new();
    for cs in &phases {
        let g = game.with_replacements(cs)?;
        let cost = manipulation_cost(&cs.a21, &cs.a31, game)?;
        in_effect.push((g, cost));
    }

    let mut rounds = Vec::with_capacity(horizon);
    let mut sums = [S::zero(); 3];
    for t in 1..=horizon {
        let phase = match policy {
            ManipulatorPolicy::Constant(_) => 0,
            ManipulatorPolicy::Batch { .. } => {
                if t <= horizon.div_ceil(2) {
                    0
                } else {
                    1
                }
            }
        };
        let cs = phases[phase];
        let (g, cost) = &in_effect[phase];
        let x = MixedStrategy::pure(cs.action, game.n())?;
        let y = agent2.act();
        let z = agent3.act();

        let v2 = counterfactual_payoffs(g, Player::Two, &x, &z)?;
        let v3 = counterfactual_payoffs(g, Player::Three, &x, &y)?;

        let (utilities, actions) = match mode {
            UtilityMode::Expected => {
                let u1 = expected_utility(g, &x, &y, &z, Player::One, *cost)?;
                let u2 = expected_utility(g, &x, &y, &z, Player::Two, S::zero())?;
                let u3 = expected_utility(g, &x, &y, &z, Player::Three, S::zero())?;
                ([u1, u2, u3], None)
            }
            UtilityMode::Sampled => {
                let a2 = sample_action(&y, &mut rng);
                let a3 = sample_action(&z, &mut rng);
                let profile = ActionProfile::new(cs.action, a2, a3);
                let u1 = realized_utility(g, profile, Player::One, *cost)?;
                let u2 = realized_utility(g, profile, Player::Two, S::zero())?;
                let u3 = realized_utility(g, profile, Player::Three, S::zero())?;
                ([u1, u2, u3], Some(profile))
            }
        };

        agent2.update(&v2)?;
        agent3.update(&v3)?;

        for (s, u) in sums.iter_mut().zip(&utilities) {
            *s = *s + *u;
        }
        rounds.push(TraceRound {
            round: t,
            phase,
            cost: *cost,
            utilities,
            actions,
            strategies: (y.probs().to_vec(), z.probs().to_vec()),
        });
    }

    let t = S::from_usize(horizon).unwrap();
    Ok(GameTrace { rounds, totals: [sums[0] / t, sums[1] / t, sums[2] / t] })
}

/// Agent specification for experiments.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct AgentSpec<S: Real> {
    pub kind: AgentKind,
    /// Learning rate on the rescaled [-1, 1] payoff scale; `None` picks the
    /// kind's default.
    pub eta: Option<S>,
}

impl<S: Real> AgentSpec<S> {
    pub fn new(kind: AgentKind) -> Self {
        Self { kind, eta: None }
    }

    pub fn build(&self, num_actions: usize, bounds: PayoffBounds<S>) -> AgentState<S> {
        match self.eta {
            Some(eta) => AgentState::new(self.kind, num_actions, eta, bounds),
            None => AgentState::with_default_eta(self.kind, num_actions, bounds),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct RunSummary<S: Real> {
    pub seed: u64,
    pub totals: [S; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<S>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct ExperimentStats<S: Real> {
    pub runs: usize,
    pub wins: usize,
    pub win_rate: f64,
    /// Mean margin over winning runs; `None` if player 1 never won.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_margin: Option<S>,
    pub per_run: Vec<RunSummary<S>>,
}

/// Run `n` independent seeded games and aggregate. Runs execute in parallel;
/// aggregation is by run index, so the statistics are reproducible bit for
/// bit.
pub fn run_experiment<S: Real>(
    game: &PolymatrixGame<S>,
    policy: &ManipulatorPolicy<S>,
    agent2: AgentSpec<S>,
    agent3: AgentSpec<S>,
    horizon: usize,
    n: usize,
    base_seed: u64,
    mode: UtilityMode,
) -> Result<ExperimentStats<S>, ArenaError> {
    let (bounds2, bounds3) = opponent_bounds(game, policy)?;
    let summaries: Result<Vec<RunSummary<S>>, ArenaError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i as u64);
            let mut a2 = agent2.build(game.m(), bounds2);
            let mut a3 = agent3.build(game.l(), bounds3);
            let trace = run_game(game, policy, &mut a2, &mut a3, horizon, seed, mode)?;
            Ok(RunSummary { seed, totals: trace.totals, margin: margin(&trace) })
        })
        .collect();
    let per_run = summaries?;

    let wins = per_run.iter().filter(|r| r.margin.is_some()).count();
    let mean_margin = if wins > 0 {
        let total: S = per_run.iter().filter_map(|r| r.margin).sum();
        Some(total / S::from_usize(wins).unwrap())
    } else {
        None
    };
    Ok(ExperimentStats {
        runs: n,
        wins,
        win_rate: wins as f64 / n as f64,
        mean_margin,
        per_run,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct BaselineOutcome<S: Real> {
    pub action: usize,
    pub stats: ExperimentStats<S>,
}

/// Evaluate every pure manipulator action with unmodified matrices and keep
/// the best by win rate, then mean margin, ties to the lowest index.
pub fn best_constant_baseline<S: Real>(
    game: &PolymatrixGame<S>,
    agent2: AgentSpec<S>,
    agent3: AgentSpec<S>,
    horizon: usize,
    n: usize,
    base_seed: u64,
    mode: UtilityMode,
) -> Result<BaselineOutcome<S>, ArenaError> {
    let mut best: Option<BaselineOutcome<S>> = None;
    for action in 0..game.n() {
        let cs = crate::polymatrix::CompleteStrategy::unmodified(game, action)?;
        let policy = ManipulatorPolicy::Constant(cs);
        let stats =
            run_experiment(game, &policy, agent2, agent3, horizon, n, base_seed, mode)?;
        let better = match &best {
            None => true,
            Some(b) => {
                let margin_of = |s: &ExperimentStats<S>| {
                    s.mean_margin.map_or(f64::NEG_INFINITY, |m| m.to_f64_lossy())
                };
                stats.win_rate > b.stats.win_rate + 1e-12
                    || (stats.win_rate >= b.stats.win_rate - 1e-12
                        && margin_of(&stats) > margin_of(&b.stats) + 1e-12)
            }
        };
        if better {
            best = Some(BaselineOutcome { action, stats });
        }
    }
    Ok(best.expect("game has at least one action"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use crate::polymatrix::CompleteStrategy;

    #[test]
    fn all_defect_expected_mode_ties_at_two() {
        let game = games::ipd3::<f64>();
        let policy =
            ManipulatorPolicy::Constant(CompleteStrategy::unmodified(&game, 1).unwrap());
        let (b2, b3) = opponent_bounds(&game, &policy).unwrap();
        let mut a2 = AgentSpec::new(AgentKind::Constant(1)).build(2, b2);
        let mut a3 = AgentSpec::new(AgentKind::Constant(1)).build(2, b3);
        let trace =
            run_game(&game, &policy, &mut a2, &mut a3, 10, 0, UtilityMode::Expected).unwrap();
        for u in trace.totals {
            assert!((u - 2.0).abs() < 1e-12);
        }
        assert!(margin(&trace).is_none(), "exact tie is not a win");
    }

    #[test]
    fn social_distancing_fixture_against_constant_opponents() {
        let fx = games::social_distancing_win_fixture::<f64>(0.1);
        let (b2, b3) = opponent_bounds(&fx.base, &fx.policy).unwrap();
        let mut a2 = AgentSpec::new(AgentKind::Constant(5)).build(12, b2);
        let mut a3 = AgentSpec::new(AgentKind::Constant(5)).build(12, b3);
        let trace = run_game(
            &fx.base,
            &fx.policy,
            &mut a2,
            &mut a3,
            7,
            0,
            UtilityMode::Expected,
        )
        .unwrap();
        assert!((trace.totals[0] - 11.8).abs() < 1e-9);
        assert!((trace.totals[1] - 6.1).abs() < 1e-9);
        assert!((trace.totals[2] - 6.1).abs() < 1e-9);
    }

    #[test]
    fn single_round_sampled_pure_equals_single_shot() {
        let fx = games::ipd3_fixture::<f64>(0.1).unwrap();
        let (b2, b3) = opponent_bounds(&fx.base, &fx.policy).unwrap();
        let mut a2 = AgentSpec::new(AgentKind::Constant(0)).build(2, b2);
        let mut a3 = AgentSpec::new(AgentKind::Constant(0)).build(2, b3);
        let trace = run_game(
            &fx.base,
            &fx.policy,
            &mut a2,
            &mut a3,
            1,
            123,
            UtilityMode::Sampled,
        )
        .unwrap();
        assert_eq!(trace.totals, fx.expected_utilities);
    }

    #[test]
    fn margin_requires_strict_win() {
        let mk = |totals: [f64; 3]| GameTrace { rounds: vec![], totals };
        assert_eq!(margin(&mk([5.0, 3.0, 1.0])), Some(2.0));
        assert_eq!(margin(&mk([3.0, 3.0, 1.0])), None);
        assert_eq!(margin(&mk([1.0, 3.0, 0.0])), None);
    }

    #[test]
    fn cost_deducted_every_round_matrices_modified() {
        let fx = games::ipd3_fixture::<f64>(0.1).unwrap();
        let mut a2 = AgentSpec::new(AgentKind::Mwu).build(2, PayoffBounds::new(-1.0, 9.0));
        let mut a3 = AgentSpec::new(AgentKind::Mwu).build(2, PayoffBounds::new(-1.0, 9.0));
        let trace = run_game(
            &fx.base,
            &fx.policy,
            &mut a2,
            &mut a3,
            5,
            9,
            UtilityMode::Expected,
        )
        .unwrap();
        for r in &trace.rounds {
            assert!((r.cost - fx.expected_cost).abs() < 1e-12);
        }
    }

    #[test]
    fn experiment_reproducible_bit_for_bit() {
        let fx = games::ipd3_fixture::<f64>(0.1).unwrap();
        let spec = AgentSpec::<f64>::new(AgentKind::Mwu);
        let run = || {
            run_experiment(
                &fx.base,
                &fx.policy,
                spec,
                AgentSpec::new(AgentKind::Ftrl),
                50,
                16,
                42,
                UtilityMode::Sampled,
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn one_action_manipulator_baseline_is_trivial() {
        // a 1 x 2 x 2 game: the only manipulator action is selected
        let z: crate::matrix::Matrix<f64> =
            crate::matrix::Matrix::from_rows_f64(&[&[0.0, 0.0]]);
        let sq: crate::matrix::Matrix<f64> =
            crate::matrix::Matrix::from_rows_f64(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let game = crate::polymatrix::PolymatrixGame::new(
            1,
            2,
            2,
            z.clone(),
            z.clone(),
            z.clone(),
            sq.clone(),
            z,
            sq,
        )
        .unwrap();
        let out = best_constant_baseline(
            &game,
            AgentSpec::new(AgentKind::Mwu),
            AgentSpec::new(AgentKind::Mwu),
            20,
            4,
            1,
            UtilityMode::Sampled,
        )
        .unwrap();
        assert_eq!(out.action, 0);
    }
}
