//! Certificate verification by exhaustive enumeration, independent of the LP
//! path: dominance is re-checked entry by entry, costs and utilities are
//! recomputed from the matrices, and the winning inequalities are evaluated
//! directly.

use serde::Serialize;

use crate::polymatrix::{
    manipulation_cost, realized_utility, type1_dominance_slack, type2_dominance_slack,
    ActionProfile, Player, PolymatrixGame,
};
use crate::scalar::Real;

use super::{ManipulatorPolicy, PolicyCertificate, PolicyClass};

/// Numerical tolerance for verification comparisons. Dominance slacks are
/// accepted at `required - VERIFY_TOL`, matching the LP feasibility
/// tolerance's order of magnitude.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CheckSense {
    /// `achieved >= required - tol`
    AtLeast,
    /// `achieved <= required + tol`
    AtMost,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct CheckRow<S: Real> {
    pub name: String,
    pub sense: CheckSense,
    pub required: S,
    pub achieved: S,
    pub satisfied: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "S: Real"))]
pub struct VerificationReport<S: Real> {
    pub checks: Vec<CheckRow<S>>,
    pub passed: bool,
}

impl<S: Real> VerificationReport<S> {
    pub fn empty() -> Self {
        Self { checks: Vec::new(), passed: true }
    }

    fn push(&mut self, name: impl Into<String>, sense: CheckSense, required: S, achieved: S) {
        let tol = S::of(VERIFY_TOL);
        // clamp infinities (trivially satisfied families) to keep the report
        // serializable
        let achieved = achieved.min(S::of(1e18)).max(S::of(-1e18));
        let satisfied = match sense {
            CheckSense::AtLeast => achieved >= required - tol,
            CheckSense::AtMost => achieved <= required + tol,
        };
        self.passed &= satisfied;
        self.checks.push(CheckRow { name: name.into(), sense, required, achieved, satisfied });
    }
}

impl<S: Real> std::fmt::Display for VerificationReport<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let rel = match c.sense {
                CheckSense::AtLeast => ">=",
                CheckSense::AtMost => "<=",
            };
            writeln!(
                f,
                "[{}] {}: achieved {} {} required {}",
                if c.satisfied { "ok" } else { "VIOLATED" },
                c.name,
                c.achieved,
                rel,
                c.required
            )?;
        }
        write!(f, "overall: {}", if self.passed { "pass" } else { "fail" })
    }
}

/// Re-derive every condition a certificate claims. Never consults the LP.
pub fn verify_certificate<S: Real>(
    game: &PolymatrixGame<S>,
    cert: &PolicyCertificate<S>,
) -> VerificationReport<S> {
    let mut report = VerificationReport::empty();
    let eps = cert.epsilon;

    if let Err(e) = cert.policy.validate(game) {
        report.push(format!("policy shape: {e}"), CheckSense::AtLeast, S::zero(), S::of(-1.0));
        return report;
    }
    let phases = cert.policy.phases();
    let expected_phases = if cert.class == PolicyClass::Batch { 2 } else { 1 };
    if phases.len() != expected_phases
        || cert.triples.len() != expected_phases
        || cert.predicted_utilities.len() != expected_phases
    {
        report.push("phase count", CheckSense::AtLeast, S::zero(), S::of(-1.0));
        return report;
    }
    if matches!(cert.policy, ManipulatorPolicy::Batch { .. }) != (cert.class == PolicyClass::Batch)
    {
        report.push("policy/class agreement", CheckSense::AtLeast, S::zero(), S::of(-1.0));
        return report;
    }

    let mut total_cost = S::zero();
    let mut utilities: Vec<[S; 3]> = Vec::new();
    for (idx, (cs, triple)) in phases.iter().zip(&cert.triples).enumerate() {
        let tag = if expected_phases == 2 { format!(" (phase {})", idx + 1) } else { String::new() };
        let [i_star, j_star, k_star] = *triple;
        if game.validate_profile(ActionProfile::new(i_star, j_star, k_star)).is_err()
            || cs.action != i_star
        {
            report.push(
                format!("target triple in range{tag}"),
                CheckSense::AtLeast,
                S::zero(),
                S::of(-1.0),
            );
            return report;
        }

        let phase_cost = manipulation_cost(&cs.a21, &cs.a31, game).expect("validated shapes");
        total_cost = total_cost + phase_cost;

        // dominance systems, by exhaustive enumeration
        let p2_slack = type1_dominance_slack(Player::Two, &cs.a21, &game.a23, i_star, j_star);
        report.push(
            format!("player 2 dominance (all opposing actions){tag}"),
            CheckSense::AtLeast,
            eps,
            p2_slack,
        );
        match cert.class {
            PolicyClass::Type2 => {
                let p3_slack =
                    type2_dominance_slack(&cs.a31, &game.a32, i_star, j_star, k_star);
                report.push(
                    format!("player 3 dominance (against the target of player 2){tag}"),
                    CheckSense::AtLeast,
                    eps,
                    p3_slack,
                );
            }
            _ => {
                let p3_slack =
                    type1_dominance_slack(Player::Three, &cs.a31, &game.a32, i_star, k_star);
                report.push(
                    format!("player 3 dominance (all opposing actions){tag}"),
                    CheckSense::AtLeast,
                    eps,
                    p3_slack,
                );
            }
        }

        let in_effect = game.with_replacements(cs).expect("validated shapes");
        let profile = ActionProfile::new(i_star, j_star, k_star);
        let u1 = realized_utility(&in_effect, profile, Player::One, phase_cost).unwrap();
        let u2 = realized_utility(&in_effect, profile, Player::Two, S::zero()).unwrap();
        let u3 = realized_utility(&in_effect, profile, Player::Three, S::zero()).unwrap();
        utilities.push([u1, u2, u3]);

        let declared = cert.predicted_utilities[idx];
        let drift = (declared[0] - u1).abs().max((declared[1] - u2).abs()).max((declared[2] - u3).abs());
        report.push(
            format!("declared utilities match matrices{tag}"),
            CheckSense::AtMost,
            S::zero(),
            drift,
        );
    }

    report.push(
        "declared cost matches matrices",
        CheckSense::AtMost,
        S::zero(),
        (cert.cost - total_cost).abs(),
    );

    if cert.winning_required {
        match cert.class {
            PolicyClass::Batch => {
                let u1 = utilities[0][0] + utilities[1][0];
                let u2 = utilities[0][1] + utilities[1][1];
                let u3 = utilities[0][2] + utilities[1][2];
                report.push(
                    "two-phase winning vs player 2 (strict)",
                    CheckSense::AtLeast,
                    eps,
                    u1 - u2,
                );
                report.push(
                    "two-phase winning vs player 3 (strict)",
                    CheckSense::AtLeast,
                    eps,
                    u1 - u3,
                );
            }
            _ => {
                let [u1, u2, u3] = utilities[0];
                report.push("winning vs player 2", CheckSense::AtLeast, S::zero(), u1 - u2);
                report.push("winning vs player 3", CheckSense::AtLeast, S::zero(), u1 - u3);
            }
        }
    }

    report
}
