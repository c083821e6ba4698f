//! Reference LP constructions for winning-policy synthesis.
//!
//! These emit the constraint systems verbatim: the deviation bounds
//! `|A - A0| <= d` expanded into row pairs, equality rows pinning the
//! opponents' per-action payoff levels (`v2_k` for every action of player 3,
//! `v3_j` for every action of player 2, a scalar `v3` for type-II), the
//! strict dominance rows with the additive slack, and the winning rows
//! bounding those levels by the manipulator's revenue minus her cost.

use crate::linsolve::{Direction, LinearProgram, Relation};
use crate::polymatrix::{GameError, PolymatrixGame};
use crate::scalar::Real;

use super::{Objective, PolicyClass};

/// Variable layout of a constructed LP, so callers can build or inspect
/// points.
#[derive(Clone, Debug)]
pub struct LpLayout {
    pub d2: usize,
    pub d3: usize,
    /// `v2_k` for k in 0..l.
    pub v2: Vec<usize>,
    /// `v3_j` for j in 0..m (type-I) or a single scalar (type-II).
    pub v3: Vec<usize>,
    /// (row, col, variable) for every A21 entry that is a variable.
    pub a21: Vec<(usize, usize, usize)>,
    pub a31: Vec<(usize, usize, usize)>,
    pub v0: Option<usize>,
}

impl LpLayout {
    pub fn a21_var(&self, i: usize, j: usize) -> Option<usize> {
        self.a21.iter().find(|&&(r, c, _)| r == i && c == j).map(|&(_, _, v)| v)
    }

    pub fn a31_var(&self, i: usize, k: usize) -> Option<usize> {
        self.a31.iter().find(|&&(r, c, _)| r == i && c == k).map(|&(_, _, v)| v)
    }
}

#[derive(Clone, Debug)]
pub struct TypedLp<S: Real> {
    pub lp: LinearProgram<S>,
    pub layout: LpLayout,
}

/// Batch LPs carry one layout per phase (the `v0` slot is unused).
#[derive(Clone, Debug)]
pub struct BatchLp<S: Real> {
    pub lp: LinearProgram<S>,
    pub first: LpLayout,
    pub second: LpLayout,
}

fn check_triple<S: Real>(game: &PolymatrixGame<S>, t: [usize; 3]) -> Result<(), GameError> {
    game.validate_profile(crate::polymatrix::ActionProfile::new(t[0], t[1], t[2]))
}

/// Allocate matrix-entry variables. Row-restricted mode exposes only row
/// `i_star`; the remaining entries stay at their base values and drop out of
/// the system entirely.
fn alloc_entries(
    next: &mut usize,
    rows: usize,
    cols: usize,
    i_star: usize,
    row_restricted: bool,
) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for r in 0..rows {
        if row_restricted && r != i_star {
            continue;
        }
        for c in 0..cols {
            out.push((r, c, *next));
            *next += 1;
        }
    }
    out
}

/// System (1)+(2) for type-I, (1)+(3) for type-II, with the requested
/// objective attached.
pub fn build_constant_lp<S: Real>(
    game: &PolymatrixGame<S>,
    class: PolicyClass,
    triple: [usize; 3],
    epsilon: S,
    objective: &Objective<S>,
    row_restricted: bool,
) -> Result<TypedLp<S>, GameError> {
    assert!(class != PolicyClass::Batch, "use build_batch_lp");
    check_triple(game, triple)?;
    let [i_star, j_star, k_star] = triple;
    let (m, l) = (game.m(), game.l());

    let mut next = 0usize;
    let d2 = next;
    next += 1;
    let d3 = next;
    next += 1;
    let v2: Vec<usize> = (0..l).map(|_| {
        let v = next;
        next += 1;
        v
    }).collect();
    let v3_len = if class == PolicyClass::Type1 { m } else { 1 };
    let v3: Vec<usize> = (0..v3_len).map(|_| {
        let v = next;
        next += 1;
        v
    }).collect();
    let a21 = alloc_entries(&mut next, game.n(), m, i_star, row_restricted);
    let a31 = alloc_entries(&mut next, game.n(), l, i_star, row_restricted);

    let needs_v0 = matches!(objective, Objective::MaxMargin | Objective::MaxEgalitarian { .. });
    let v0 = needs_v0.then(|| {
        let v = next;
        next += 1;
        v
    });

    let direction = objective_direction(objective);
    let mut lp = LinearProgram::new(direction, next);
    lp.bounds[d2] = (S::zero(), S::infinity());
    lp.bounds[d3] = (S::zero(), S::infinity());
    if let (Some(v0), Objective::MaxMargin) = (v0, objective) {
        lp.bounds[v0] = (S::zero(), S::infinity());
    }
    let layout = LpLayout { d2, d3, v2: v2.clone(), v3: v3.clone(), a21, a31, v0 };

    // deviation rows: x - d <= base and -x - d <= -base
    for &(r, c, var) in &layout.a21 {
        let base = game.a21.get(r, c);
        lp.push_sparse(&[(var, S::one()), (d2, -S::one())], Relation::Le, base);
        lp.push_sparse(&[(var, -S::one()), (d2, -S::one())], Relation::Le, -base);
    }
    for &(r, c, var) in &layout.a31 {
        let base = game.a31.get(r, c);
        lp.push_sparse(&[(var, S::one()), (d3, -S::one())], Relation::Le, base);
        lp.push_sparse(&[(var, -S::one()), (d3, -S::one())], Relation::Le, -base);
    }

    // system (1): player 2's payoff levels against x = e_{i*}
    let a21_star = layout.a21_var(i_star, j_star).expect("target entry is a variable");
    for k in 0..l {
        lp.push_sparse(
            &[(a21_star, S::one()), (v2[k], -S::one())],
            Relation::Eq,
            -game.a23.get(j_star, k),
        );
    }
    for j in (0..m).filter(|&j| j != j_star) {
        let var = layout.a21_var(i_star, j).expect("row entry is a variable");
        for k in 0..l {
            lp.push_sparse(
                &[(var, S::one()), (v2[k], -S::one())],
                Relation::Le,
                -game.a23.get(j, k) - epsilon,
            );
        }
    }

    // system (2) or (3): player 3's payoff levels
    let a31_star = layout.a31_var(i_star, k_star).expect("target entry is a variable");
    match class {
        PolicyClass::Type1 => {
            for j in 0..m {
                lp.push_sparse(
                    &[(a31_star, S::one()), (v3[j], -S::one())],
                    Relation::Eq,
                    -game.a32.get(j, k_star),
                );
            }
            for k in (0..l).filter(|&k| k != k_star) {
                let var = layout.a31_var(i_star, k).expect("row entry is a variable");
                for j in 0..m {
                    lp.push_sparse(
                        &[(var, S::one()), (v3[j], -S::one())],
                        Relation::Le,
                        -game.a32.get(j, k) - epsilon,
                    );
                }
            }
        }
        PolicyClass::Type2 => {
            lp.push_sparse(
                &[(a31_star, S::one()), (v3[0], -S::one())],
                Relation::Eq,
                -game.a32.get(j_star, k_star),
            );
            for k in (0..l).filter(|&k| k != k_star) {
                let var = layout.a31_var(i_star, k).expect("row entry is a variable");
                lp.push_sparse(
                    &[(var, S::one()), (v3[0], -S::one())],
                    Relation::Le,
                    -game.a32.get(j_star, k) - epsilon,
                );
            }
        }
        PolicyClass::Batch => unreachable!(),
    }

    let revenue = game.a12.get(i_star, j_star) + game.a13.get(i_star, k_star);
    let v2_target = v2[k_star];
    let v3_target = if class == PolicyClass::Type1 { v3[j_star] } else { v3[0] };

    if objective.requires_winning_rows() {
        lp.push_sparse(
            &[(v2_target, S::one()), (d2, S::one()), (d3, S::one())],
            Relation::Le,
            revenue,
        );
        lp.push_sparse(
            &[(v3_target, S::one()), (d2, S::one()), (d3, S::one())],
            Relation::Le,
            revenue,
        );
    }

    match objective {
        Objective::Feasibility => {}
        Objective::MinCost | Objective::MinInefficiency => {
            lp.objective[d2] = S::one();
            lp.objective[d3] = S::one();
        }
        Objective::MaxMargin => {
            let v0 = v0.unwrap();
            lp.objective[v0] = S::one();
            lp.push_sparse(
                &[(v0, S::one()), (v2_target, S::one()), (d2, S::one()), (d3, S::one())],
                Relation::Le,
                revenue,
            );
            lp.push_sparse(
                &[(v0, S::one()), (v3_target, S::one()), (d2, S::one()), (d3, S::one())],
                Relation::Le,
                revenue,
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
            lp.push_sparse(&[(v0, S::one()), (v2_target, -S::one())], Relation::Le, S::zero());
            lp.push_sparse(&[(v0, S::one()), (v3_target, -S::one())], Relation::Le, S::zero());
        }
        Objective::Custom { d2: c2, d3: c3, v2: cv2, v3: cv3, .. } => {
            lp.objective[d2] = *c2;
            lp.objective[d3] = *c3;
            lp.objective[v2_target] = lp.objective[v2_target] + *cv2;
            lp.objective[v3_target] = lp.objective[v3_target] + *cv3;
        }
    }

    Ok(TypedLp { lp, layout })
}

/// Doubled two-phase system: each half satisfies the type-I systems for its
/// own triple, and the summed winning rows require player 1's two-phase
/// total to exceed each opponent's by the strict slack.
pub fn build_batch_lp<S: Real>(
    game: &PolymatrixGame<S>,
    first: [usize; 3],
    second: [usize; 3],
    epsilon: S,
    objective: &Objective<S>,
    row_restricted: bool,
) -> Result<BatchLp<S>, GameError> {
    check_triple(game, first)?;
    check_triple(game, second)?;
    let (m, l) = (game.m(), game.l());

    let mut next = 0usize;
    let mut alloc_phase = |i_star: usize| -> LpLayout {
        let d2 = next;
        next += 1;
        let d3 = next;
        next += 1;
        let v2: Vec<usize> = (0..l)
            .map(|_| {
                let v = next;
                next += 1;
                v
            })
            .collect();
        let v3: Vec<usize> = (0..m)
            .map(|_| {
                let v = next;
                next += 1;
                v
            })
            .collect();
        let a21 = alloc_entries(&mut next, game.n(), m, i_star, row_restricted);
        let a31 = alloc_entries(&mut next, game.n(), l, i_star, row_restricted);
        LpLayout { d2, d3, v2, v3, a21, a31, v0: None }
    };
    let lay1 = alloc_phase(first[0]);
    let lay2 = alloc_phase(second[0]);

    let mut lp = LinearProgram::new(objective_direction(objective), next);
    for lay in [&lay1, &lay2] {
        lp.bounds[lay.d2] = (S::zero(), S::infinity());
        lp.bounds[lay.d3] = (S::zero(), S::infinity());
    }

    let push_phase = |lp: &mut LinearProgram<S>, lay: &LpLayout, triple: [usize; 3]| {
        let [i_star, j_star, k_star] = triple;
        for &(r, c, var) in &lay.a21 {
            let base = game.a21.get(r, c);
            lp.push_sparse(&[(var, S::one()), (lay.d2, -S::one())], Relation::Le, base);
            lp.push_sparse(&[(var, -S::one()), (lay.d2, -S::one())], Relation::Le, -base);
        }
        for &(r, c, var) in &lay.a31 {
            let base = game.a31.get(r, c);
            lp.push_sparse(&[(var, S::one()), (lay.d3, -S::one())], Relation::Le, base);
            lp.push_sparse(&[(var, -S::one()), (lay.d3, -S::one())], Relation::Le, -base);
        }
        let a21_star = lay.a21_var(i_star, j_star).unwrap();
        for k in 0..l {
            lp.push_sparse(
                &[(a21_star, S::one()), (lay.v2[k], -S::one())],
                Relation::Eq,
                -game.a23.get(j_star, k),
            );
        }
        for j in (0..m).filter(|&j| j != j_star) {
            let var = lay.a21_var(i_star, j).unwrap();
            for k in 0..l {
                lp.push_sparse(
                    &[(var, S::one()), (lay.v2[k], -S::one())],
                    Relation::Le,
                    -game.a23.get(j, k) - epsilon,
                );
            }
        }
        let a31_star = lay.a31_var(i_star, k_star).unwrap();
        for j in 0..m {
            lp.push_sparse(
                &[(a31_star, S::one()), (lay.v3[j], -S::one())],
                Relation::Eq,
                -game.a32.get(j, k_star),
            );
        }
        for k in (0..l).filter(|&k| k != k_star) {
            let var = lay.a31_var(i_star, k).unwrap();
            for j in 0..m {
                lp.push_sparse(
                    &[(var, S::one()), (lay.v3[j], -S::one())],
                    Relation::Le,
                    -game.a32.get(j, k) - epsilon,
                );
            }
        }
    };
    push_phase(&mut lp, &lay1, first);
    push_phase(&mut lp, &lay2, second);

    let total_revenue = game.a12.get(first[0], first[1])
        + game.a13.get(first[0], first[2])
        + game.a12.get(second[0], second[1])
        + game.a13.get(second[0], second[2]);
    let cost_terms = [
        (lay1.d2, S::one()),
        (lay1.d3, S::one()),
        (lay2.d2, S::one()),
        (lay2.d3, S::one()),
    ];
    let mut row2 = cost_terms.to_vec();
    row2.push((lay1.v2[first[2]], S::one()));
    row2.push((lay2.v2[second[2]], S::one()));
    lp.push_sparse(&row2, Relation::Le, total_revenue - epsilon);
    let mut row3 = cost_terms.to_vec();
    row3.push((lay1.v3[first[1]], S::one()));
    row3.push((lay2.v3[second[1]], S::one()));
    lp.push_sparse(&row3, Relation::Le, total_revenue - epsilon);

    match objective {
        Objective::Feasibility => {}
        Objective::MinCost => {
            for (var, _) in cost_terms {
                lp.objective[var] = S::one();
            }
        }
        _ => panic!("batch LPs support feasibility and min-cost objectives"),
    }

    Ok(BatchLp { lp, first: lay1, second: lay2 })
}

fn objective_direction<S: Real>(objective: &Objective<S>) -> Direction {
    match objective {
        Objective::Feasibility => Direction::Feasibility,
        Objective::MinCost | Objective::MinInefficiency => Direction::Minimize,
        Objective::MaxMargin | Objective::MaxEgalitarian { .. } => Direction::Maximize,
        Objective::Custom { direction, .. } => *direction,
    }
}
