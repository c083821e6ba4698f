//! Three-player polymatrix games.
//!
//! A game is six payoff matrices. For the pair of players (a, b) with a < b,
//! both directed matrices are stored with rows indexed by the action of the
//! lower-numbered player and columns by the higher-numbered one:
//!
//! - `A12`, `A21`: n x m (rows = player 1's action, cols = player 2's)
//! - `A13`, `A31`: n x l
//! - `A23`, `A32`: m x l (rows = player 2's action, cols = player 3's)
//!
//! Player 1 is the manipulator: she may replace `A21` and `A31` each round,
//! paying the sum of entrywise infinity norms of the deviations from the
//! original game as a per-round cost.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Real;

/// Simplex membership tolerance for mixed strategies.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("matrix {name} has shape {got_rows}x{got_cols}, expected {want_rows}x{want_cols}")]
    DimensionMismatch {
        name: &'static str,
        want_rows: usize,
        want_cols: usize,
        got_rows: usize,
        got_cols: usize,
    },
    #[error("action counts must be at least 1")]
    EmptyActionSet,
    #[error("strategy is not a probability distribution: {0}")]
    BadStrategy(String),
    #[error("action {action} out of range for player {player:?} ({len} actions)")]
    ActionOutOfRange { player: Player, action: usize, len: usize },
    #[error("player {0:?} does not pay a manipulation cost; pass zero")]
    CostForLearner(Player),
    #[error("manipulation cost must be finite and nonnegative, got {0}")]
    BadCost(f64),
    #[error("player 1 is the manipulator and receives no learning feedback")]
    ManipulatorHasNoFeedback,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    One,
    Two,
    Three,
}

impl Player {
    pub fn index(self) -> usize {
        match self {
            Player::One => 0,
            Player::Two => 1,
            Player::Three => 2,
        }
    }
}

/// A point on the probability simplex over one player's action set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixedStrategy<S: Real> {
    probs: Vec<S>,
}

impl<S: Real> MixedStrategy<S> {
    pub fn new(probs: Vec<S>) -> Result<Self, GameError> {
        if probs.is_empty() {
            return Err(GameError::BadStrategy("empty vector".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < S::zero()) {
            return Err(GameError::BadStrategy("negative or non-finite entry".into()));
        }
        let total: S = probs.iter().copied().sum();
        if (total - S::one()).abs() > S::of(SIMPLEX_TOL) {
            return Err(GameError::BadStrategy(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    /// Unit vector on `action`.
    pub fn pure(action: usize, len: usize) -> Result<Self, GameError> {
        if action >= len {
            return Err(GameError::BadStrategy(format!("pure action {action} of {len}")));
        }
        let mut probs = vec![S::zero(); len];
        probs[action] = S::one();
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Self {
        let p = S::one() / S::from_usize(len).unwrap();
        Self { probs: vec![p; len] }
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of one pure action, or `None` if the strategy is mixed.
    pub fn as_pure(&self) -> Option<usize> {
        let mut hit = None;
        for (i, &p) in self.probs.iter().enumerate() {
            if (p - S::one()).abs() <= S::of(SIMPLEX_TOL) {
                hit = Some(i);
            } else if p > S::of(SIMPLEX_TOL) {
                return None;
            }
        }
        hit
    }
}

/// One joint action per player.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionProfile {
    pub a1: usize,
    pub a2: usize,
    pub a3: usize,
}

impl ActionProfile {
    pub fn new(a1: usize, a2: usize, a3: usize) -> Self {
        Self { a1, a2, a3 }
    }
}

/// The manipulator's per-round submission: a pure action together with the
/// replacement matrices for the opponents' interactions with her.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Real",
    deserialize = "S: Real + serde::de::DeserializeOwned"
))]
pub struct CompleteStrategy<S: Real> {
    pub action: usize,
    pub a21: Matrix<S>,
    pub a31: Matrix<S>,
}

impl<S: Real> CompleteStrategy<S> {
    /// A complete strategy that leaves the base game untouched.
    pub fn unmodified(game: &PolymatrixGame<S>, action: usize) -> Result<Self, GameError> {
        if action >= game.n() {
            return Err(GameError::ActionOutOfRange {
                player: Player::One,
                action,
                len: game.n(),
            });
        }
        Ok(Self { action, a21: game.a21.clone(), a31: game.a31.clone() })
    }

    pub fn validate(&self, game: &PolymatrixGame<S>) -> Result<(), GameError> {
        if self.action >= game.n() {
            return Err(GameError::ActionOutOfRange {
                player: Player::One,
                action: self.action,
                len: game.n(),
            });
        }
        check_shape("A21", &self.a21, game.n(), game.m())?;
        check_shape("A31", &self.a31, game.n(), game.l())?;
        Ok(())
    }
}

fn check_shape<S: Real>(
    name: &'static str,
    m: &Matrix<S>,
    rows: usize,
    cols: usize,
) -> Result<(), GameError> {
    if m.rows() != rows || m.cols() != cols {
        return Err(GameError::DimensionMismatch {
            name,
            want_rows: rows,
            want_cols: cols,
            got_rows: m.rows(),
            got_cols: m.cols(),
        });
    }
    Ok(())
}

/// The immutable ground-truth game, including the original `A21`/`A31`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGame<S>", into = "RawGame<S>")]
#[serde(bound(
    serialize = "S: Real",
    deserialize = "S: Real + serde::de::DeserializeOwned"
))]
pub struct PolymatrixGame<S: Real> {
    n: usize,
    m: usize,
    l: usize,
    pub a12: Matrix<S>,
    pub a13: Matrix<S>,
    pub a21: Matrix<S>,
    pub a23: Matrix<S>,
    pub a31: Matrix<S>,
    pub a32: Matrix<S>,
    /// Optional human-readable action labels per player, for exports.
    pub labels: Option<[Vec<String>; 3]>,
}

/// Wire format: `{ "n", "m", "l", "A12", ..., "A32" }` with 0-based actions.
#[derive(Serialize, Deserialize)]
#[serde(bound(
    serialize = "S: Real",
    deserialize = "S: Real + serde::de::DeserializeOwned"
))]
struct RawGame<S: Real> {
    n: usize,
    m: usize,
    l: usize,
    #[serde(rename = "A12")]
    a12: Matrix<S>,
    #[serde(rename = "A13")]
    a13: Matrix<S>,
    #[serde(rename = "A21")]
    a21: Matrix<S>,
    #[serde(rename = "A23")]
    a23: Matrix<S>,
    #[serde(rename = "A31")]
    a31: Matrix<S>,
    #[serde(rename = "A32")]
    a32: Matrix<S>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    labels: Option<[Vec<String>; 3]>,
}

impl<S: Real> TryFrom<RawGame<S>> for PolymatrixGame<S> {
    type Error = GameError;

    fn try_from(r: RawGame<S>) -> Result<Self, GameError> {
        let mut g = PolymatrixGame::new(r.n, r.m, r.l, r.a12, r.a13, r.a21, r.a23, r.a31, r.a32)?;
        g.labels = r.labels;
        Ok(g)
    }
}

impl<S: Real> From<PolymatrixGame<S>> for RawGame<S> {
    fn from(g: PolymatrixGame<S>) -> Self {
        RawGame {
            n: g.n,
            m: g.m,
            l: g.l,
            a12: g.a12,
            a13: g.a13,
            a21: g.a21,
            a23: g.a23,
            a31: g.a31,
            a32: g.a32,
            labels: g.labels,
        }
    }
}

impl<S: Real> PolymatrixGame<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        m: usize,
        l: usize,
        a12: Matrix<S>,
        a13: Matrix<S>,
        a21: Matrix<S>,
        a23: Matrix<S>,
        a31: Matrix<S>,
        a32: Matrix<S>,
    ) -> Result<Self, GameError> {
        if n == 0 || m == 0 || l == 0 {
            return Err(GameError::EmptyActionSet);
        }
        check_shape("A12", &a12, n, m)?;
        check_shape("A13", &a13, n, l)?;
        check_shape("A21", &a21, n, m)?;
        check_shape("A23", &a23, m, l)?;
        check_shape("A31", &a31, n, l)?;
        check_shape("A32", &a32, m, l)?;
        Ok(Self { n, m, l, a12, a13, a21, a23, a31, a32, labels: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn actions_of(&self, player: Player) -> usize {
        match player {
            Player::One => self.n,
            Player::Two => self.m,
            Player::Three => self.l,
        }
    }

    pub fn validate_profile(&self, p: ActionProfile) -> Result<(), GameError> {
        for (player, action, len) in [
            (Player::One, p.a1, self.n),
            (Player::Two, p.a2, self.m),
            (Player::Three, p.a3, self.l),
        ] {
            if action >= len {
                return Err(GameError::ActionOutOfRange { player, action, len });
            }
        }
        Ok(())
    }

    /// The game in effect after the manipulator submits `cs`.
    pub fn with_replacements(&self, cs: &CompleteStrategy<S>) -> Result<Self, GameError> {
        cs.validate(self)?;
        let mut g = self.clone();
        g.a21 = cs.a21.clone();
        g.a31 = cs.a31.clone();
        Ok(g)
    }

    /// Minimum and maximum single-shot payoff `player` can see in this game
    /// (cost excluded), scanning all action profiles.
    pub fn utility_bounds(&self, player: Player) -> (S, S) {
        let (own_pair, cross_pair): (&Matrix<S>, &Matrix<S>) = match player {
            Player::One => (&self.a12, &self.a13),
            Player::Two => (&self.a21, &self.a23),
            Player::Three => (&self.a31, &self.a32),
        };
        let mut lo = S::infinity();
        let mut hi = S::neg_infinity();
        match player {
            Player::One => {
                for i in 0..self.n {
                    for j in 0..self.m {
                        for k in 0..self.l {
                            let u = own_pair.get(i, j) + cross_pair.get(i, k);
                            lo = lo.min(u);
                            hi = hi.max(u);
                        }
                    }
                }
            }
            Player::Two => {
                for i in 0..self.n {
                    for j in 0..self.m {
                        for k in 0..self.l {
                            let u = own_pair.get(i, j) + cross_pair.get(j, k);
                            lo = lo.min(u);
                            hi = hi.max(u);
                        }
                    }
                }
            }
            Player::Three => {
                for i in 0..self.n {
                    for j in 0..self.m {
                        for k in 0..self.l {
                            let u = own_pair.get(i, k) + cross_pair.get(j, k);
                            lo = lo.min(u);
                            hi = hi.max(u);
                        }
                    }
                }
            }
        }
        (lo, hi)
    }
}

/// Cost of replacing the original `A21`/`A31` with `new21`/`new31`:
/// `max|new21 - A21_0| + max|new31 - A31_0|`.
pub fn manipulation_cost<S: Real>(
    new21: &Matrix<S>,
    new31: &Matrix<S>,
    base: &PolymatrixGame<S>,
) -> Result<S, GameError> {
    let d2 = new21.inf_norm_diff(&base.a21).ok_or(GameError::DimensionMismatch {
        name: "A21",
        want_rows: base.n,
        want_cols: base.m,
        got_rows: new21.rows(),
        got_cols: new21.cols(),
    })?;
    let d3 = new31.inf_norm_diff(&base.a31).ok_or(GameError::DimensionMismatch {
        name: "A31",
        want_rows: base.n,
        want_cols: base.l,
        got_rows: new31.rows(),
        got_cols: new31.cols(),
    })?;
    Ok(d2 + d3)
}

fn validate_cost<S: Real>(player: Player, cost: S) -> Result<(), GameError> {
    if !cost.is_finite() || cost < S::zero() {
        return Err(GameError::BadCost(cost.to_f64_lossy()));
    }
    if player != Player::One && cost != S::zero() {
        return Err(GameError::CostForLearner(player));
    }
    Ok(())
}

/// Expected utility of `player` in `game` (the game in effect) under mixed
/// strategies, with the manipulator's per-round cost deducted for player 1.
pub fn expected_utility<S: Real>(
    game: &PolymatrixGame<S>,
    x: &MixedStrategy<S>,
    y: &MixedStrategy<S>,
    z: &MixedStrategy<S>,
    player: Player,
    cost: S,
) -> Result<S, GameError> {
    validate_cost(player, cost)?;
    if x.len() != game.n || y.len() != game.m || z.len() != game.l {
        return Err(GameError::BadStrategy("strategy length does not match game".into()));
    }
    let u = match player {
        Player::One => game.a12.bilinear(x.probs(), y.probs())
            + game.a13.bilinear(x.probs(), z.probs())
            - cost,
        Player::Two => game.a21.bilinear(x.probs(), y.probs())
            + game.a23.bilinear(y.probs(), z.probs()),
        Player::Three => game.a31.bilinear(x.probs(), z.probs())
            + game.a32.bilinear(y.probs(), z.probs()),
    };
    Ok(u)
}

/// Realized utility of `player` at a pure action profile.
pub fn realized_utility<S: Real>(
    game: &PolymatrixGame<S>,
    profile: ActionProfile,
    player: Player,
    cost: S,
) -> Result<S, GameError> {
    validate_cost(player, cost)?;
    game.validate_profile(profile)?;
    let ActionProfile { a1, a2, a3 } = profile;
    let u = match player {
        Player::One => game.a12.get(a1, a2) + game.a13.get(a1, a3) - cost,
        Player::Two => game.a21.get(a1, a2) + game.a23.get(a2, a3),
        Player::Three => game.a31.get(a1, a3) + game.a32.get(a2, a3),
    };
    Ok(u)
}

/// Per-action expected payoffs of a learning player against the opponents'
/// submitted mixed strategies; this is the full-information feedback vector
/// the agents consume.
///
/// For player 2 the opponents are `(x, z)`; for player 3 they are `(x, y)`.
pub fn counterfactual_payoffs<S: Real>(
    game: &PolymatrixGame<S>,
    player: Player,
    opp_a: &MixedStrategy<S>,
    opp_b: &MixedStrategy<S>,
) -> Result<Vec<S>, GameError> {
    match player {
        Player::One => Err(GameError::ManipulatorHasNoFeedback),
        Player::Two => {
            let (x, z) = (opp_a, opp_b);
            if x.len() != game.n || z.len() != game.l {
                return Err(GameError::BadStrategy("opponent strategy length".into()));
            }
            Ok((0..game.m)
                .map(|j| {
                    let from_p1: S =
                        (0..game.n).map(|i| x.probs()[i] * game.a21.get(i, j)).sum();
                    from_p1 + game.a23.row_dot(j, z.probs())
                })
                .collect())
        }
        Player::Three => {
            let (x, y) = (opp_a, opp_b);
            if x.len() != game.n || y.len() != game.m {
                return Err(GameError::BadStrategy("opponent strategy length".into()));
            }
            Ok((0..game.l)
                .map(|k| {
                    let from_p1: S =
                        (0..game.n).map(|i| x.probs()[i] * game.a31.get(i, k)).sum();
                    let from_p2: S =
                        (0..game.m).map(|j| y.probs()[j] * game.a32.get(j, k)).sum();
                    from_p1 + from_p2
                })
                .collect())
        }
    }
}

/// Strict dominance of `target` for `player` (2 or 3) against the
/// manipulator's pure action `i_star` and *every* action of the remaining
/// player, certified with an explicit additive slack.
///
/// `candidate` is the proposed replacement matrix for the player's
/// interaction with player 1 (`A21` for player 2, `A31` for player 3);
/// `cross` is the fixed pairwise matrix `A23` (player 2) or `A32` (player 3),
/// always indexed (a2, a3). Comparisons are exact `>=` against `slack`; no
/// hidden tolerance.
pub fn check_type1_dominance<S: Real>(
    player: Player,
    candidate: &Matrix<S>,
    cross: &Matrix<S>,
    i_star: usize,
    target: usize,
    slack: S,
) -> bool {
    match player {
        Player::One => false,
        Player::Two => {
            let (m, l) = (cross.rows(), cross.cols());
            if i_star >= candidate.rows() || target >= m || candidate.cols() != m {
                return false;
            }
            for j in (0..m).filter(|&j| j != target) {
                for k in 0..l {
                    let best = candidate.get(i_star, target) + cross.get(target, k);
                    let alt = candidate.get(i_star, j) + cross.get(j, k);
                    if !(best - alt >= slack) {
                        return false;
                    }
                }
            }
            true
        }
        Player::Three => {
            let (m, l) = (cross.rows(), cross.cols());
            if i_star >= candidate.rows() || target >= l || candidate.cols() != l {
                return false;
            }
            for k in (0..l).filter(|&k| k != target) {
                for j in 0..m {
                    let best = candidate.get(i_star, target) + cross.get(j, target);
                    let alt = candidate.get(i_star, k) + cross.get(j, k);
                    if !(best - alt >= slack) {
                        return false;
                    }
                }
            }
            true
        }
    }
}

/// Strict dominance of `k_star` for player 3 against the pure actions
/// `i_star` of player 1 *and* `j_star` of player 2 (the relaxed, type-II
/// condition).
pub fn check_type2_dominance<S: Real>(
    candidate_a31: &Matrix<S>,
    cross_a32: &Matrix<S>,
    i_star: usize,
    j_star: usize,
    k_star: usize,
    slack: S,
) -> bool {
    let (m, l) = (cross_a32.rows(), cross_a32.cols());
    if i_star >= candidate_a31.rows() || j_star >= m || k_star >= l || candidate_a31.cols() != l {
        return false;
    }
    let best = candidate_a31.get(i_star, k_star) + cross_a32.get(j_star, k_star);
    for k in (0..l).filter(|&k| k != k_star) {
        let alt = candidate_a31.get(i_star, k) + cross_a32.get(j_star, k);
        if !(best - alt >= slack) {
            return false;
        }
    }
    true
}

/// Achieved dominance slack (minimum gap between the target action and the
/// best alternative); `-inf` never occurs for finite matrices. Used by
/// certificate verification to report margins.
pub fn type1_dominance_slack<S: Real>(
    player: Player,
    candidate: &Matrix<S>,
    cross: &Matrix<S>,
    i_star: usize,
    target: usize,
) -> S {
    let mut worst = S::infinity();
    match player {
        Player::One => return S::neg_infinity(),
        Player::Two => {
            let (m, l) = (cross.rows(), cross.cols());
            for j in (0..m).filter(|&j| j != target) {
                for k in 0..l {
                    let gap = candidate.get(i_star, target) + cross.get(target, k)
                        - candidate.get(i_star, j)
                        - cross.get(j, k);
                    worst = worst.min(gap);
                }
            }
        }
        Player::Three => {
            let (m, l) = (cross.rows(), cross.cols());
            for k in (0..l).filter(|&k| k != target) {
                for j in 0..m {
                    let gap = candidate.get(i_star, target) + cross.get(j, target)
                        - candidate.get(i_star, k)
                        - cross.get(j, k);
                    worst = worst.min(gap);
                }
            }
        }
    }
    worst
}

/// Achieved type-II slack for player 3 against `(i_star, j_star)`.
pub fn type2_dominance_slack<S: Real>(
    candidate_a31: &Matrix<S>,
    cross_a32: &Matrix<S>,
    i_star: usize,
    j_star: usize,
    k_star: usize,
) -> S {
    let l = cross_a32.cols();
    let best = candidate_a31.get(i_star, k_star) + cross_a32.get(j_star, k_star);
    let mut worst = S::infinity();
    for k in (0..l).filter(|&k| k != k_star) {
        let alt = candidate_a31.get(i_star, k) + cross_a32.get(j_star, k);
        worst = worst.min(best - alt);
    }
    worst
}
