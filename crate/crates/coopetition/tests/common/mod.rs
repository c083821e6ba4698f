//! Shared test fixtures: crafted games and an independent vertex-enumeration
//! oracle for small linear programs.

#![allow(dead_code)]

use coopetition::linsolve::{Direction, LinearProgram, Relation};
use coopetition::matrix::Matrix;
use coopetition::polymatrix::{CompleteStrategy, PolymatrixGame};
use coopetition::synth::ManipulatorPolicy;
use rand::Rng;

/// A 2x2x2 game where no single profile admits a winning constant policy but
/// a two-phase policy wins:
///
/// - player 1's revenue is 4 at (*, 0, 0) and (*, 1, 1), at most 2 elsewhere;
/// - player 3 collects 5 whenever player 2 plays 0 (blocking the first
///   profile), player 2 collects 5 whenever player 3 plays 1 (blocking the
///   second);
/// - the off-diagonal cells leave player 1 too poor to win.
///
/// Splitting the horizon (beat player 2 at (0,0,0), then player 3 at
/// (1,1,1)) sums to 8 minus slack costs against 5 for each opponent.
pub fn batch_only_game() -> PolymatrixGame<f64> {
    let a12 = Matrix::from_rows_f64(&[&[2.0, -2.0], &[0.0, 2.0]]);
    let a13 = Matrix::from_rows_f64(&[&[2.0, 0.0], &[-2.0, 2.0]]);
    let zeros: Matrix<f64> = Matrix::zeros(2, 2);
    let a23 = Matrix::from_rows_f64(&[&[0.0, 5.0], &[0.0, 5.0]]);
    let a32 = Matrix::from_rows_f64(&[&[5.0, 5.0], &[0.0, 0.0]]);
    PolymatrixGame::new(2, 2, 2, a12, a13, zeros.clone(), a23, zeros, a32).unwrap()
}

/// Hand-built winning batch policy for [`batch_only_game`], with a stronger
/// dominance gap in the second phase so stateful learners unlearn the first
/// phase quickly. `eps` is the phase-one gap; phase two uses `10 * eps`.
pub fn batch_only_policy(eps: f64) -> ManipulatorPolicy<f64> {
    let game = batch_only_game();
    let half = eps / 2.0;
    let mut a21_first = game.a21.clone();
    a21_first.set_row(0, &[half, -half]);
    let mut a31_first = game.a31.clone();
    a31_first.set_row(0, &[half, -half]);
    let strong = 5.0 * eps;
    let mut a21_second = game.a21.clone();
    a21_second.set_row(1, &[-strong, strong]);
    let mut a31_second = game.a31.clone();
    a31_second.set_row(1, &[-strong, strong]);
    ManipulatorPolicy::Batch {
        first: CompleteStrategy { action: 0, a21: a21_first, a31: a31_first },
        second: CompleteStrategy { action: 1, a21: a21_second, a31: a31_second },
    }
}

/// A game where player 1's revenue is identically zero while both opponents
/// collect 1 from each other at every profile: no batch pair can win.
pub fn hopeless_game() -> PolymatrixGame<f64> {
    let zeros: Matrix<f64> = Matrix::zeros(2, 2);
    let ones: Matrix<f64> = Matrix::filled(2, 2, 1.0);
    PolymatrixGame::new(
        2,
        2,
        2,
        zeros.clone(),
        zeros.clone(),
        zeros.clone(),
        ones.clone(),
        zeros,
        ones,
    )
    .unwrap()
}

/// Random small game with entries in [-3, 3].
pub fn random_game(rng: &mut impl Rng, n: usize, m: usize, l: usize) -> PolymatrixGame<f64> {
    let mut mat = |r: usize, c: usize| {
        Matrix::from_fn(r, c, |_, _| (rng.gen_range(-30i32..=30) as f64) / 10.0)
    };
    let a12 = mat(n, m);
    let a13 = mat(n, l);
    let a21 = mat(n, m);
    let a23 = mat(m, l);
    let a31 = mat(n, l);
    let a32 = mat(m, l);
    PolymatrixGame::new(n, m, l, a12, a13, a21, a23, a31, a32).unwrap()
}

/// Exhaustive LP oracle: enumerate every selection of `num_vars` active
/// constraints (rows plus finite bounds), solve the resulting square system,
/// keep feasible intersection points, and take the extreme objective value.
/// Valid for LPs whose feasible set is a bounded polytope.
pub struct VertexOracle {
    pub feasible: bool,
    pub objective: f64,
    pub point: Option<Vec<f64>>,
}

pub fn vertex_oracle(lp: &LinearProgram<f64>) -> VertexOracle {
    let v = lp.num_vars();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &lp.constraints {
        rows.push((c.coeffs.clone(), c.rhs));
    }
    for (i, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if lo.is_finite() {
            let mut coeffs = vec![0.0; v];
            coeffs[i] = 1.0;
            rows.push((coeffs, lo));
        }
        if hi.is_finite() {
            let mut coeffs = vec![0.0; v];
            coeffs[i] = 1.0;
            rows.push((coeffs, hi));
        }
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let maximize = lp.direction == Direction::Maximize;
    let n = rows.len();
    let mut choice: Vec<usize> = (0..v).collect();
    if n < v {
        return VertexOracle { feasible: false, objective: f64::NAN, point: None };
    }
    loop {
        if let Some(point) = solve_square(&rows, &choice, v) {
            if lp.max_violation(&point) <= 1e-7 {
                let obj: f64 = lp.objective.iter().zip(&point).map(|(c, x)| c * x).sum();
                let better = match &best {
                    None => true,
                    Some((b, _)) => {
                        if maximize {
                            obj > *b
                        } else {
                            obj < *b
                        }
                    }
                };
                if better {
                    best = Some((obj, point));
                }
            }
        }
        // next combination
        let mut i = v;
        loop {
            if i == 0 {
                return match best {
                    Some((obj, point)) => {
                        VertexOracle { feasible: true, objective: obj, point: Some(point) }
                    }
                    None => VertexOracle { feasible: false, objective: f64::NAN, point: None },
                };
            }
            i -= 1;
            if choice[i] != i + n - v {
                choice[i] += 1;
                for j in i + 1..v {
                    choice[j] = choice[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn solve_square(rows: &[(Vec<f64>, f64)], choice: &[usize], v: usize) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = choice.iter().map(|&r| rows[r].0.clone()).collect();
    let mut b: Vec<f64> = choice.iter().map(|&r| rows[r].1).collect();
    // Gaussian elimination with partial pivoting
    for col in 0..v {
        let (pivot_row, pivot_val) = (col..v)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())?;
        if pivot_val < 1e-9 {
            return None; // singular selection
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for r in 0..v {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c2 in col..v {
                        a[r][c2] -= f * a[col][c2];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..v).map(|i| b[i] / a[i][i]).collect())
}

/// Random box-bounded LP (bounded feasible set, possibly empty).
pub fn random_boxed_lp(rng: &mut impl Rng) -> LinearProgram<f64> {
    let vars = rng.gen_range(2..=6);
    let rows = rng.gen_range(1..=10);
    let dir = if rng.gen_bool(0.5) { Direction::Maximize } else { Direction::Minimize };
    let mut lp = LinearProgram::new(dir, vars);
    for i in 0..vars {
        lp.objective[i] = (rng.gen_range(-20i32..=20) as f64) / 10.0;
        lp.bounds[i] = (-4.0, 4.0);
    }
    for _ in 0..rows {
        let coeffs: Vec<f64> =
            (0..vars).map(|_| (rng.gen_range(-20i32..=20) as f64) / 10.0).collect();
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        let rhs = (rng.gen_range(-40i32..=40) as f64) / 10.0;
        lp.push(coeffs, rel, rhs);
    }
    lp
}
