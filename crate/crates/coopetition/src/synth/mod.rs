//! Policy synthesis: compile dominance-solvability conditions into linear
//! programs over candidate action triples and return certified winning
//! policies.
//!
//! Two formulations exist side by side:
//!
//! - [`builders`] emits the full constraint systems verbatim, with the
//!   opponents' per-action payoff levels (`v2_k`, `v3_j`) as explicit LP
//!   variables. This is the reference formulation, also used for the
//!   `--dump-lp` debug output and for cross-validation.
//! - [`reduced`] substitutes the payoff-level variables out (they are fixed
//!   by equality rows) and collapses each dominance family to one row per
//!   alternative action. The feasible sets are identical; the reduced form
//!   is what the triple loop solves, since it is an order of magnitude
//!   smaller.
//!
//! Every returned certificate is re-verified by exhaustive enumeration
//! ([`verify_certificate`]) before it leaves this module.

pub mod builders;
mod reduced;
mod verify;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use verify::{verify_certificate, CheckRow, CheckSense, VerificationReport, VERIFY_TOL};

use crate::linsolve::{self, Direction, LpError, LpStatus};
use crate::matrix::Matrix;
use crate::polymatrix::{
    manipulation_cost, realized_utility, ActionProfile, CompleteStrategy, GameError, Player,
    PolymatrixGame,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PolicyClass {
    Type1,
    Type2,
    Batch,
}

/// What to optimize over the winning-policy feasible region.
#[derive(Clone, Debug, PartialEq)]
pub enum Objective<S: Real> {
    /// Any feasible point; zero objective.
    Feasibility,
    /// Minimize the manipulation cost `d2 + d3`.
    MinCost,
    /// Maximize the guaranteed winning margin.
    MaxMargin,
    /// Minimize manipulation cost relative to revenue gain; per-triple LPs
    /// minimize cost, the ratio ranks triples.
    MinInefficiency,
    /// Maximize the minimum of the three players' payoffs at the target
    /// profile. Winning is NOT required unless `also_win` is set.
    MaxEgalitarian { also_win: bool },
    /// Arbitrary linear form over (d2, d3, v2, v3), where v2/v3 are the
    /// opponents' payoffs at the target profile.
    Custom {
        d2: S,
        d3: S,
        v2: S,
        v3: S,
        direction: Direction,
    },
}

impl<S: Real> Objective<S> {
    fn requires_winning_rows(&self) -> bool {
        match self {
            Objective::Feasibility | Objective::MinCost | Objective::MinInefficiency => true,
            Objective::Custom { .. } => true,
            // margin rows plus v0 >= 0 already imply the winning rows
            Objective::MaxMargin => false,
            Objective::MaxEgalitarian { also_win } => *also_win,
        }
    }

    fn winning_certified(&self) -> bool {
        match self {
            Objective::MaxEgalitarian { also_win } => *also_win,
            _ => true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SynthesisRequest<'g, S: Real> {
    pub game: &'g PolymatrixGame<S>,
    pub class: PolicyClass,
    pub objective: Objective<S>,
    pub epsilon: S,
    /// Restrict the matrix variables to row `i*` (the manipulator's fixed
    /// action); the default. Off-row entries never help, so feasibility and
    /// optimal cost are unchanged, and the LPs are much smaller.
    pub row_restricted: bool,
}

impl<'g, S: Real> SynthesisRequest<'g, S> {
    pub fn new(game: &'g PolymatrixGame<S>, class: PolicyClass, objective: Objective<S>, epsilon: S) -> Self {
        Self { game, class, objective, epsilon, row_restricted: true }
    }
}

/// A constant or two-phase schedule of complete strategies.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub enum ManipulatorPolicy<S: Real> {
    Constant(CompleteStrategy<S>),
    /// First phase through round `ceil(T/2)`, second phase afterwards.
    Batch {
        first: CompleteStrategy<S>,
        second: CompleteStrategy<S>,
    },
}

impl<S: Real> ManipulatorPolicy<S> {
    /// The complete strategy in effect at 1-based round `t` of `horizon`.
    pub fn strategy_at(&self, t: usize, horizon: usize) -> &CompleteStrategy<S> {
        match self {
            ManipulatorPolicy::Constant(cs) => cs,
            ManipulatorPolicy::Batch { first, second } => {
                if t <= horizon.div_ceil(2) {
                    first
                } else {
                    second
                }
            }
        }
    }

    pub fn phases(&self) -> Vec<&CompleteStrategy<S>> {
        match self {
            ManipulatorPolicy::Constant(cs) => vec![cs],
            ManipulatorPolicy::Batch { first, second } => vec![first, second],
        }
    }

    pub fn validate(&self, game: &PolymatrixGame<S>) -> Result<(), GameError> {
        for cs in self.phases() {
            cs.validate(game)?;
        }
        Ok(())
    }
}

/// Cost/revenue accounting for the inefficiency objective. `ratio_definition`
/// divides by revenue minus the worst-case revenue floor `k_min_revenue`;
/// `ratio_revenue` divides by raw revenue.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct InefficiencyReport<S: Real> {
    pub cost: S,
    pub revenue: S,
    pub k_min_revenue: S,
    pub ratio_definition: S,
    pub ratio_revenue: S,
}

/// A synthesized policy together with everything needed to check it.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct PolicyCertificate<S: Real> {
    pub class: PolicyClass,
    pub policy: ManipulatorPolicy<S>,
    /// Target profile per phase (one entry for constant policies).
    pub triples: Vec<[usize; 3]>,
    /// Total manipulation cost (summed over both phases for batch).
    pub cost: S,
    /// Predicted single-shot utilities (u1, u2, u3) at the target profile of
    /// each phase, manipulation cost deducted from u1.
    pub predicted_utilities: Vec<[S; 3]>,
    pub objective_value: S,
    pub epsilon: S,
    /// Whether the certificate claims the winning inequality (welfare-only
    /// certificates may not).
    pub winning_required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inefficiency: Option<InefficiencyReport<S>>,
    pub verification: VerificationReport<S>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SynthStats {
    pub lps_solved: usize,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct SynthOutcome<S: Real> {
    pub certificate: Option<PolicyCertificate<S>>,
    pub stats: SynthStats,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthesis request: {0}")]
    BadRequest(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("re-verification of a synthesized certificate failed:\n{0}")]
    VerificationFailed(String),
}

/// Worst-case revenue for player 1: `min_{i,j,k} A12(i,j) + A13(i,k)`.
pub fn min_revenue<S: Real>(game: &PolymatrixGame<S>) -> S {
    let mut k = S::infinity();
    for i in 0..game.n() {
        let r2 = game.a12.row(i).iter().copied().fold(S::infinity(), S::min);
        let r3 = game.a13.row(i).iter().copied().fold(S::infinity(), S::min);
        k = k.min(r2 + r3);
    }
    k
}

/// Revenue at a target profile (no cost deduction).
fn revenue_at<S: Real>(game: &PolymatrixGame<S>, t: [usize; 3]) -> S {
    game.a12.get(t[0], t[1]) + game.a13.get(t[0], t[2])
}

struct Candidate<S: Real> {
    triples: Vec<[usize; 3]>,
    /// Key used for cross-triple selection (already oriented so that smaller
    /// is better).
    selection_key: S,
    objective_value: S,
    phases: Vec<(Matrix<S>, Matrix<S>)>,
    inefficiency: Option<InefficiencyReport<S>>,
}

/// Improvement threshold for cross-triple selection; below this, the earlier
/// (lexicographically smaller) triple wins.
const SELECT_TOL: f64 = 1e-9;

/// Enumerate all candidate triples (or triple pairs for batch), solve one LP
/// per candidate, and return the certificate optimizing the requested
/// objective. `None` means every LP was infeasible.
pub fn synthesize<S: Real>(req: &SynthesisRequest<'_, S>) -> Result<SynthOutcome<S>, SynthError> {
    if !(req.epsilon > S::zero()) || !req.epsilon.is_finite() {
        return Err(SynthError::BadRequest(format!(
            "slack epsilon must be positive and finite, got {}",
            req.epsilon
        )));
    }
    if req.class == PolicyClass::Batch {
        match req.objective {
            Objective::Feasibility | Objective::MinCost => {}
            _ => {
                return Err(SynthError::BadRequest(
                    "batch synthesis supports feasibility and min-cost objectives only".into(),
                ))
            }
        }
        return synthesize_batch(req);
    }

    let game = req.game;
    let (n, m, l) = (game.n(), game.m(), game.l());
    let triples: Vec<[usize; 3]> = (0..n)
        .flat_map(|i| (0..m).flat_map(move |j| (0..l).map(move |k| [i, j, k])))
        .collect();

    let results: Vec<(usize, Result<Option<Candidate<S>>, String>)> = triples
        .par_iter()
        .enumerate()
        .map(|(idx, &t)| (idx, solve_triple(req, t)))
        .collect();

    let mut stats = SynthStats { lps_solved: triples.len(), warnings: Vec::new() };
    let mut best: Option<Candidate<S>> = None;
    for (idx, res) in results {
        match res {
            Ok(Some(cand)) => {
                let better = match &best {
                    None => true,
                    Some(b) => cand.selection_key < b.selection_key - S::of(SELECT_TOL),
                };
                if better {
                    best = Some(cand);
                }
            }
            Ok(None) => {}
            Err(w) => stats.warnings.push(format!("triple {:?}: {w}", triples[idx])),
        }
    }

    let certificate = match best {
        None => None,
        Some(cand) => Some(finish_certificate(req, cand)?),
    };
    Ok(SynthOutcome { certificate, stats })
}

fn synthesize_batch<S: Real>(req: &SynthesisRequest<'_, S>) -> Result<SynthOutcome<S>, SynthError> {
    let game = req.game;
    let (n, m, l) = (game.n(), game.m(), game.l());
    let triples: Vec<[usize; 3]> = (0..n)
        .flat_map(|i| (0..m).flat_map(move |j| (0..l).map(move |k| [i, j, k])))
        .collect();
    let pairs: Vec<([usize; 3], [usize; 3])> = triples
        .iter()
        .flat_map(|&a| triples.iter().map(move |&b| (a, b)))
        .collect();

    let results: Vec<(usize, Result<Option<Candidate<S>>, String>)> = pairs
        .par_iter()
        .enumerate()
        .map(|(idx, &(a, b))| (idx, solve_batch_pair(req, a, b)))
        .collect();

    let mut stats = SynthStats { lps_solved: pairs.len(), warnings: Vec::new() };
    let mut best: Option<Candidate<S>> = None;
    for (idx, res) in results {
        match res {
            Ok(Some(cand)) => {
                let better = match &best {
                    None => true,
                    Some(b) => cand.selection_key < b.selection_key - S::of(SELECT_TOL),
                };
                if better {
                    best = Some(cand);
                }
            }
            Ok(None) => {}
            Err(w) => {
                let (a, b) = pairs[idx];
                stats.warnings.push(format!("triple pair {a:?}/{b:?}: {w}"));
            }
        }
    }

    let certificate = match best {
        None => None,
        Some(cand) => Some(finish_certificate(req, cand)?),
    };
    Ok(SynthOutcome { certificate, stats })
}

/// Solve the per-triple LP for a constant (type-I/type-II) policy.
fn solve_triple<S: Real>(
    req: &SynthesisRequest<'_, S>,
    triple: [usize; 3],
) -> Result<Option<Candidate<S>>, String> {
    let sol = if req.row_restricted {
        let lp = reduced::build(req, triple);
        linsolve::solve(&lp.lp).map(|s| (s, reduced::Extract::Reduced(lp)))
    } else {
        let typed = builders::build_constant_lp(
            req.game,
            req.class,
            triple,
            req.epsilon,
            &req.objective,
            false,
        )
        .map_err(|e| e.to_string())?;
        linsolve::solve(&typed.lp).map(|s| (s, reduced::Extract::Faithful(typed)))
    };
    let (sol, extract) = match sol {
        Ok(v) => v,
        Err(LpError::Degenerate(it)) => return Err(format!("degenerate LP after {it} iterations")),
        Err(e) => return Err(e.to_string()),
    };
    match sol.status {
        LpStatus::Infeasible => return Ok(None),
        LpStatus::Unbounded => return Err("objective unbounded over the winning region".into()),
        LpStatus::Optimal | LpStatus::Feasible => {}
    }
    let point = sol.point.as_deref().expect("solved LP carries a point");
    let (a21, a31) = extract.matrices(req.game, triple[0], point);

    let raw_objective = extract.objective_value(&sol, &req.objective);
    let (selection_key, objective_value, inefficiency) =
        selection_key(req, triple, raw_objective, &a21, &a31);

    Ok(Some(Candidate {
        triples: vec![triple],
        selection_key,
        objective_value,
        phases: vec![(a21, a31)],
        inefficiency,
    }))
}

fn solve_batch_pair<S: Real>(
    req: &SynthesisRequest<'_, S>,
    first: [usize; 3],
    second: [usize; 3],
) -> Result<Option<Candidate<S>>, String> {
    let sol = if req.row_restricted {
        let lp = reduced::build_batch(req, first, second);
        linsolve::solve(&lp.lp).map(|s| (s, reduced::BatchExtract::Reduced(lp)))
    } else {
        let typed =
            builders::build_batch_lp(req.game, first, second, req.epsilon, &req.objective, false)
                .map_err(|e| e.to_string())?;
        linsolve::solve(&typed.lp).map(|s| (s, reduced::BatchExtract::Faithful(typed)))
    };
    let (sol, extract) = match sol {
        Ok(v) => v,
        Err(LpError::Degenerate(it)) => return Err(format!("degenerate LP after {it} iterations")),
        Err(e) => return Err(e.to_string()),
    };
    match sol.status {
        LpStatus::Infeasible => return Ok(None),
        LpStatus::Unbounded => return Err("objective unbounded over the winning region".into()),
        LpStatus::Optimal | LpStatus::Feasible => {}
    }
    let point = sol.point.as_deref().expect("solved LP carries a point");
    let phases = extract.matrices(req.game, first[0], second[0], point);

    // Selection for batch: feasibility keeps the first pair; min-cost
    // compares true total cost.
    let cost: S = phases
        .iter()
        .map(|(a21, a31)| manipulation_cost(a21, a31, req.game).expect("shapes validated"))
        .sum();
    let (selection_key, objective_value) = match req.objective {
        Objective::Feasibility => (S::zero(), S::zero()),
        Objective::MinCost => (cost, cost),
        _ => unreachable!("batch objective validated earlier"),
    };

    Ok(Some(Candidate {
        triples: vec![first, second],
        selection_key,
        objective_value,
        phases,
        inefficiency: None,
    }))
}

/// Map a per-triple LP optimum to the cross-triple selection key (smaller is
/// better) and the reported objective value.
fn selection_key<S: Real>(
    req: &SynthesisRequest<'_, S>,
    triple: [usize; 3],
    raw_objective: S,
    a21: &Matrix<S>,
    a31: &Matrix<S>,
) -> (S, S, Option<InefficiencyReport<S>>) {
    match &req.objective {
        Objective::Feasibility => (S::zero(), S::zero(), None),
        Objective::MinCost => (raw_objective, raw_objective, None),
        Objective::MaxMargin | Objective::MaxEgalitarian { .. } => {
            (-raw_objective, raw_objective, None)
        }
        Objective::MinInefficiency => {
            let cost = manipulation_cost(a21, a31, req.game).expect("shapes validated");
            let revenue = revenue_at(req.game, triple);
            let k = min_revenue(req.game);
            let tol = S::of(1e-9);
            let ratio_of = |denom: S| {
                if cost.abs() <= tol {
                    S::zero()
                } else if denom <= tol {
                    S::infinity()
                } else {
                    cost / denom
                }
            };
            let ratio_definition = ratio_of(revenue - k);
            let ratio_revenue = ratio_of(revenue);
            let report = InefficiencyReport {
                cost,
                revenue,
                k_min_revenue: k,
                ratio_definition,
                ratio_revenue,
            };
            (ratio_definition, ratio_definition, Some(report))
        }
        Objective::Custom { direction, .. } => match direction {
            Direction::Minimize | Direction::Feasibility => (raw_objective, raw_objective, None),
            Direction::Maximize => (-raw_objective, raw_objective, None),
        },
    }
}

fn finish_certificate<S: Real>(
    req: &SynthesisRequest<'_, S>,
    cand: Candidate<S>,
) -> Result<PolicyCertificate<S>, SynthError> {
    let game = req.game;
    let phases: Vec<CompleteStrategy<S>> = cand
        .triples
        .iter()
        .zip(&cand.phases)
        .map(|(t, (a21, a31))| CompleteStrategy { action: t[0], a21: a21.clone(), a31: a31.clone() })
        .collect();
    let policy = match req.class {
        PolicyClass::Batch => ManipulatorPolicy::Batch {
            first: phases[0].clone(),
            second: phases[1].clone(),
        },
        _ => ManipulatorPolicy::Constant(phases[0].clone()),
    };

    let mut cost = S::zero();
    let mut predicted = Vec::new();
    for (t, cs) in cand.triples.iter().zip(&phases) {
        let phase_cost = manipulation_cost(&cs.a21, &cs.a31, game)?;
        cost = cost + phase_cost;
        let in_effect = game.with_replacements(cs)?;
        let profile = ActionProfile::new(t[0], t[1], t[2]);
        let u1 = realized_utility(&in_effect, profile, Player::One, phase_cost)?;
        let u2 = realized_utility(&in_effect, profile, Player::Two, S::zero())?;
        let u3 = realized_utility(&in_effect, profile, Player::Three, S::zero())?;
        predicted.push([u1, u2, u3]);
    }

    let mut cert = PolicyCertificate {
        class: req.class,
        policy,
        triples: cand.triples,
        cost,
        predicted_utilities: predicted,
        objective_value: cand.objective_value,
        epsilon: req.epsilon,
        winning_required: req.objective.winning_certified(),
        inefficiency: cand.inefficiency,
        verification: VerificationReport::empty(),
    };
    let report = verify_certificate(game, &cert);
    if !report.passed {
        return Err(SynthError::VerificationFailed(report.to_string()));
    }
    cert.verification = report;
    Ok(cert)
}

/// Largest-margin winning policy of the given constant class.
pub fn synthesize_max_margin<S: Real>(
    game: &PolymatrixGame<S>,
    class: PolicyClass,
    epsilon: S,
) -> Result<SynthOutcome<S>, SynthError> {
    if class == PolicyClass::Batch {
        return Err(SynthError::BadRequest("margin synthesis is for constant classes".into()));
    }
    synthesize(&SynthesisRequest::new(game, class, Objective::MaxMargin, epsilon))
}

/// Lowest inefficiency-ratio winning type-I policy.
pub fn synthesize_min_inefficiency<S: Real>(
    game: &PolymatrixGame<S>,
    epsilon: S,
) -> Result<SynthOutcome<S>, SynthError> {
    synthesize(&SynthesisRequest::new(
        game,
        PolicyClass::Type1,
        Objective::MinInefficiency,
        epsilon,
    ))
}

/// Egalitarian-welfare-maximizing dominance solvable policy. Always exists:
/// dominance can be bought for any profile, and no winning inequality is
/// imposed (set `also_win` to re-add it).
pub fn synthesize_max_egalitarian<S: Real>(
    game: &PolymatrixGame<S>,
    epsilon: S,
    also_win: bool,
) -> Result<SynthOutcome<S>, SynthError> {
    synthesize(&SynthesisRequest::new(
        game,
        PolicyClass::Type1,
        Objective::MaxEgalitarian { also_win },
        epsilon,
    ))
}
