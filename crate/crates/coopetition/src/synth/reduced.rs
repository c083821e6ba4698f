//! Reduced per-triple LPs.
//!
//! The reference systems pin each payoff level `v2_k` by an equality row, so
//! substituting them out is exact. After substitution, the dominance family
//! for an alternative action `j != j*` reads
//!
//!   `A21(i*,j) - A21(i*,j*) <= min_k [A23(j*,k) - A23(j,k)] - eps`
//!
//! which is a single row with a precomputed constant right-hand side (one row
//! per alternative, likewise for player 3). Variables shrink to the two cost
//! scalars and the `i*` rows of the replacement matrices. Feasible sets and
//! optima agree with the reference builders; a property test enforces this.

use crate::linsolve::{Direction, LinearProgram, LpSolution, Relation};
use crate::matrix::Matrix;
use crate::polymatrix::PolymatrixGame;
use crate::scalar::Real;

use super::builders::{BatchLp, TypedLp};
use super::{Objective, PolicyClass, SynthesisRequest};

pub(super) struct ReducedLp<S: Real> {
    pub lp: LinearProgram<S>,
    pub u: Vec<usize>,
    pub w: Vec<usize>,
    /// Constant folded out of a custom objective (from the substituted
    /// payoff levels).
    pub objective_offset: S,
}

pub(super) struct ReducedBatchLp<S: Real> {
    pub lp: LinearProgram<S>,
    pub u1: Vec<usize>,
    pub w1: Vec<usize>,
    pub u2: Vec<usize>,
    pub w2: Vec<usize>,
}

/// Smallest value of `A23(j_star, k) - A23(j, k)` over k: the structural
/// headroom action `j_star` has over `j` before any A21 contribution.
fn cap_p2<S: Real>(game: &PolymatrixGame<S>, j_star: usize, j: usize) -> S {
    (0..game.l())
        .map(|k| game.a23.get(j_star, k) - game.a23.get(j, k))
        .fold(S::infinity(), S::min)
}

fn cap_p3_type1<S: Real>(game: &PolymatrixGame<S>, k_star: usize, k: usize) -> S {
    (0..game.m())
        .map(|j| game.a32.get(j, k_star) - game.a32.get(j, k))
        .fold(S::infinity(), S::min)
}

pub(super) fn build<S: Real>(req: &SynthesisRequest<'_, S>, triple: [usize; 3]) -> ReducedLp<S> {
    let game = req.game;
    let [i_star, j_star, k_star] = triple;
    let (m, l) = (game.m(), game.l());
    let eps = req.epsilon;

    let d2 = 0usize;
    let d3 = 1usize;
    let u: Vec<usize> = (2..2 + m).collect();
    let w: Vec<usize> = (2 + m..2 + m + l).collect();
    let mut next = 2 + m + l;
    let needs_v0 =
        matches!(req.objective, Objective::MaxMargin | Objective::MaxEgalitarian { .. });
    let v0 = needs_v0.then(|| {
        let v = next;
        next += 1;
        v
    });

    let mut lp = LinearProgram::new(direction_of(&req.objective), next);
    lp.bounds[d2] = (S::zero(), S::infinity());
    lp.bounds[d3] = (S::zero(), S::infinity());
    if let (Some(v0), Objective::MaxMargin) = (v0, &req.objective) {
        lp.bounds[v0] = (S::zero(), S::infinity());
    }

    for j in 0..m {
        let base = game.a21.get(i_star, j);
        lp.push_sparse(&[(u[j], S::one()), (d2, -S::one())], Relation::Le, base);
        lp.push_sparse(&[(u[j], -S::one()), (d2, -S::one())], Relation::Le, -base);
    }
    for k in 0..l {
        let base = game.a31.get(i_star, k);
        lp.push_sparse(&[(w[k], S::one()), (d3, -S::one())], Relation::Le, base);
        lp.push_sparse(&[(w[k], -S::one()), (d3, -S::one())], Relation::Le, -base);
    }

    for j in (0..m).filter(|&j| j != j_star) {
        lp.push_sparse(
            &[(u[j], S::one()), (u[j_star], -S::one())],
            Relation::Le,
            cap_p2(game, j_star, j) - eps,
        );
    }
    for k in (0..l).filter(|&k| k != k_star) {
        let cap = match req.class {
            PolicyClass::Type1 => cap_p3_type1(game, k_star, k),
            PolicyClass::Type2 => game.a32.get(j_star, k_star) - game.a32.get(j_star, k),
            PolicyClass::Batch => unreachable!(),
        };
        lp.push_sparse(&[(w[k], S::one()), (w[k_star], -S::one())], Relation::Le, cap - eps);
    }

    let revenue = game.a12.get(i_star, j_star) + game.a13.get(i_star, k_star);
    let v2_const = game.a23.get(j_star, k_star);
    let v3_const = game.a32.get(j_star, k_star);

    if req.objective.requires_winning_rows() {
        lp.push_sparse(
            &[(u[j_star], S::one()), (d2, S::one()), (d3, S::one())],
            Relation::Le,
            revenue - v2_const,
        );
        lp.push_sparse(
            &[(w[k_star], S::one()), (d2, S::one()), (d3, S::one())],
            Relation::Le,
            revenue - v3_const,
        );
    }

    let mut objective_offset = S::zero();
    match &req.objective {
        Objective::Feasibility => {}
        Objective::MinCost | Objective::MinInefficiency => {
            lp.objective[d2] = S::one();
            lp.objective[d3] = S::one();
        }
        Objective::MaxMargin => {
            let v0 = v0.unwrap();
            lp.objective[v0] = S::one();
            lp.push_sparse(
                &[(v0, S::one()), (u[j_star], S::one()), (d2, S::one()), (d3, S::one())],
                Relation::Le,
                revenue - v2_const,
            );
            lp.push_sparse(
                &[(v0, S::one()), (w[k_star], S::one()), (d2, S::one()), (d3, S::one())],
                Relation::Le,
                revenue - v3_const,
            );
        }
        Objective::MaxEgalitarian { .. } => {
            let v0 = v0.unwrap();
            lp.objective[v0] = S::one();
            lp.push_sparse(
                &[(v0, S::one()), (d2, S::one()), (d3, S::one())],
                Relation::Le,
                revenue,
            );
            lp.push_sparse(&[(v0, S::one()), (u[j_star], -S::one())], Relation::Le, v2_const);
            lp.push_sparse(&[(v0, S::one()), (w[k_star], -S::one())], Relation::Le, v3_const);
        }
        Objective::Custom { d2: c2, d3: c3, v2: cv2, v3: cv3, .. } => {
            lp.objective[d2] = *c2;
            lp.objective[d3] = *c3;
            lp.objective[u[j_star]] = lp.objective[u[j_star]] + *cv2;
            lp.objective[w[k_star]] = lp.objective[w[k_star]] + *cv3;
            objective_offset = *cv2 * v2_const + *cv3 * v3_const;
        }
    }

    ReducedLp { lp, u, w, objective_offset }
}

pub(super) fn build_batch<S: Real>(
    req: &SynthesisRequest<'_, S>,
    first: [usize; 3],
    second: [usize; 3],
) -> ReducedBatchLp<S> {
    let game = req.game;
    let (m, l) = (game.m(), game.l());
    let eps = req.epsilon;

    // variables: d2h, d3h, d2t, d3t, then the four rows
    let d = [0usize, 1, 2, 3];
    let u1: Vec<usize> = (4..4 + m).collect();
    let w1: Vec<usize> = (4 + m..4 + m + l).collect();
    let u2: Vec<usize> = (4 + m + l..4 + 2 * m + l).collect();
    let w2: Vec<usize> = (4 + 2 * m + l..4 + 2 * m + 2 * l).collect();
    let mut lp = LinearProgram::new(direction_of(&req.objective), 4 + 2 * m + 2 * l);
    for &v in &d {
        lp.bounds[v] = (S::zero(), S::infinity());
    }

    let push_phase = |lp: &mut LinearProgram<S>,
                          triple: [usize; 3],
                          u: &[usize],
                          w: &[usize],
                          d2: usize,
                          d3: usize| {
        let [i_star, j_star, k_star] = triple;
        for j in 0..m {
            let base = game.a21.get(i_star, j);
            lp.push_sparse(&[(u[j], S::one()), (d2, -S::one())], Relation::Le, base);
            lp.push_sparse(&[(u[j], -S::one()), (d2, -S::one())], Relation::Le, -base);
        }
        for k in 0..l {
            let base = game.a31.get(i_star, k);
            lp.push_sparse(&[(w[k], S::one()), (d3, -S::one())], Relation::Le, base);
            lp.push_sparse(&[(w[k], -S::one()), (d3, -S::one())], Relation::Le, -base);
        }
        for j in (0..m).filter(|&j| j != j_star) {
            lp.push_sparse(
                &[(u[j], S::one()), (u[j_star], -S::one())],
                Relation::Le,
                cap_p2(game, j_star, j) - eps,
            );
        }
        for k in (0..l).filter(|&k| k != k_star) {
            lp.push_sparse(
                &[(w[k], S::one()), (w[k_star], -S::one())],
                Relation::Le,
                cap_p3_type1(game, k_star, k) - eps,
            );
        }
    };
    push_phase(&mut lp, first, &u1, &w1, d[0], d[1]);
    push_phase(&mut lp, second, &u2, &w2, d[2], d[3]);

    let total_revenue = game.a12.get(first[0], first[1])
        + game.a13.get(first[0], first[2])
        + game.a12.get(second[0], second[1])
        + game.a13.get(second[0], second[2]);
    let v2_consts = game.a23.get(first[1], first[2]) + game.a23.get(second[1], second[2]);
    let v3_consts = game.a32.get(first[1], first[2]) + game.a32.get(second[1], second[2]);
    let costs = [(d[0], S::one()), (d[1], S::one()), (d[2], S::one()), (d[3], S::one())];

    let mut row2 = costs.to_vec();
    row2.push((u1[first[1]], S::one()));
    row2.push((u2[second[1]], S::one()));
    lp.push_sparse(&row2, Relation::Le, total_revenue - v2_consts - eps);
    let mut row3 = costs.to_vec();
    row3.push((w1[first[2]], S::one()));
    row3.push((w2[second[2]], S::one()));
    lp.push_sparse(&row3, Relation::Le, total_revenue - v3_consts - eps);

    if matches!(req.objective, Objective::MinCost) {
        for (var, _) in costs {
            lp.objective[var] = S::one();
        }
    }

    ReducedBatchLp { lp, u1, w1, u2, w2 }
}

fn direction_of<S: Real>(objective: &Objective<S>) -> Direction {
    match objective {
        Objective::Feasibility => Direction::Feasibility,
        Objective::MinCost | Objective::MinInefficiency => Direction::Minimize,
        Objective::MaxMargin | Objective::MaxEgalitarian { .. } => Direction::Maximize,
        Objective::Custom { direction, .. } => *direction,
    }
}

/// Rebuilds full replacement matrices from an LP point, for either
/// formulation.
pub(super) enum Extract<S: Real> {
    Reduced(ReducedLp<S>),
    Faithful(TypedLp<S>),
}

impl<S: Real> Extract<S> {
    pub fn matrices(
        &self,
        game: &PolymatrixGame<S>,
        i_star: usize,
        point: &[S],
    ) -> (Matrix<S>, Matrix<S>) {
        match self {
            Extract::Reduced(r) => {
                let mut a21 = game.a21.clone();
                let row: Vec<S> = r.u.iter().map(|&v| point[v]).collect();
                a21.set_row(i_star, &row);
                let mut a31 = game.a31.clone();
                let row: Vec<S> = r.w.iter().map(|&v| point[v]).collect();
                a31.set_row(i_star, &row);
                (a21, a31)
            }
            Extract::Faithful(t) => {
                let mut a21 = game.a21.clone();
                for &(r, c, var) in &t.layout.a21 {
                    a21.set(r, c, point[var]);
                }
                let mut a31 = game.a31.clone();
                for &(r, c, var) in &t.layout.a31 {
                    a31.set(r, c, point[var]);
                }
                (a21, a31)
            }
        }
    }

    pub fn objective_value(&self, sol: &LpSolution<S>, objective: &Objective<S>) -> S {
        if matches!(objective, Objective::Feasibility) {
            return S::zero();
        }
        match self {
            Extract::Reduced(r) => sol.objective_value + r.objective_offset,
            Extract::Faithful(_) => sol.objective_value,
        }
    }
}

pub(super) enum BatchExtract<S: Real> {
    Reduced(ReducedBatchLp<S>),
    Faithful(BatchLp<S>),
}

impl<S: Real> BatchExtract<S> {
    pub fn matrices(
        &self,
        game: &PolymatrixGame<S>,
        i1: usize,
        i2: usize,
        point: &[S],
    ) -> Vec<(Matrix<S>, Matrix<S>)> {
        match self {
            BatchExtract::Reduced(r) => {
                let take = |idx: &[usize]| -> Vec<S> { idx.iter().map(|&v| point[v]).collect() };
                let mut a21h = game.a21.clone();
                a21h.set_row(i1, &take(&r.u1));
                let mut a31h = game.a31.clone();
                a31h.set_row(i1, &take(&r.w1));
                let mut a21t = game.a21.clone();
                a21t.set_row(i2, &take(&r.u2));
                let mut a31t = game.a31.clone();
                a31t.set_row(i2, &take(&r.w2));
                vec![(a21h, a31h), (a21t, a31t)]
            }
            BatchExtract::Faithful(b) => {
                let mut out = Vec::new();
                for lay in [&b.first, &b.second] {
                    let mut a21 = game.a21.clone();
                    for &(r, c, var) in &lay.a21 {
                        a21.set(r, c, point[var]);
                    }
                    let mut a31 = game.a31.clone();
                    for &(r, c, var) in &lay.a31 {
                        a31.set(r, c, point[var]);
                    }
                    out.push((a21, a31));
                }
                out
            }
        }
    }
}
