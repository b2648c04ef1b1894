//! Binary-menu steepening conditions.
//!
//! For a pair `b ▷ a`, the transformation makes the pair steeper when the
//! higher action weakly worsens in every state where the lower action wins,
//! the lower action weakly improves in every state where the higher action
//! wins, and the super-actuarial improvement inequality links each such
//! state pair. Made-steeper is exactly equivalent to robust reduction on
//! the binary menu, and holding for all pairs of a larger menu is
//! sufficient for robust reduction there.
//!
//! The lottery operations express the same binary condition through
//! second-order stochastic dominance of the induced payoff lotteries at a
//! fixed belief.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmp::geq;
use crate::problem::{Belief, CoreError, Transformation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteepeningError {
    #[error("pair is not oriented with the higher action second")]
    OrientationViolated,
    #[error("lottery must have at least one outcome")]
    EmptySupport,
    #[error("lottery probabilities must be nonnegative and sum to 1")]
    InvalidProbabilities,
}

/// States split by which of the two actions pays strictly more.
///
/// `a_states` holds the states where the lower action `a` wins strictly,
/// `b_states` where the higher action `b` wins strictly, `c_states` the
/// ties. Single-crossing puts every `a_states` index below every
/// `b_states` index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePartition {
    pub a_states: Vec<usize>,
    pub b_states: Vec<usize>,
    pub c_states: Vec<usize>,
}

/// Partition states by the sign of `a_θ − b_θ` for a pair with `b ▷ a`.
pub fn partition_states(a: &[f64], b: &[f64], tol: f64) -> Result<StatePartition, SteepeningError> {
    assert_eq!(a.len(), b.len());
    let mut p = StatePartition {
        a_states: Vec::new(),
        b_states: Vec::new(),
        c_states: Vec::new(),
    };
    for s in 0..a.len() {
        if a[s] > b[s] + tol {
            p.a_states.push(s);
        } else if b[s] > a[s] + tol {
            p.b_states.push(s);
        } else {
            p.c_states.push(s);
        }
    }
    match (p.a_states.last(), p.b_states.first()) {
        (Some(&hi_a), Some(&lo_b)) if hi_a > lo_b => Err(SteepeningError::OrientationViolated),
        _ => Ok(p),
    }
}

/// Outcome of the super-actuarial improvement inequality at one state pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SaiOutcome {
    Satisfied,
    Violated,
    /// The high-state denominator `min{b̂_θ', b_θ'} − a_θ'` is not strictly
    /// positive. Treated as a condition failure.
    DegenerateDenominator,
}

impl SaiOutcome {
    pub fn holds(self) -> bool {
        matches!(self, SaiOutcome::Satisfied)
    }
}

/// Super-actuarial improvement at `(theta, theta_high)`:
///
/// `(min{â_θ, a_θ} − b̂_θ)/(a_θ − b_θ) ≥ (b̂_θ' − â_θ')/(min{b̂_θ', b_θ'} − a_θ')`.
///
/// Requires `theta` in the low partition (`a_θ > b_θ`) and `theta_high` in
/// the high one (`b_θ' > a_θ'`).
pub fn super_actuarial_improvement(
    a: &[f64],
    b: &[f64],
    a_post: &[f64],
    b_post: &[f64],
    theta: usize,
    theta_high: usize,
    tol: f64,
) -> SaiOutcome {
    debug_assert!(a[theta] > b[theta] && b[theta_high] > a[theta_high]);
    let den_low = a[theta] - b[theta];
    let den_high = b_post[theta_high].min(b[theta_high]) - a[theta_high];
    if den_low <= tol || den_high <= tol {
        return SaiOutcome::DegenerateDenominator;
    }
    let lhs = (a_post[theta].min(a[theta]) - b_post[theta]) / den_low;
    let rhs = (b_post[theta_high] - a_post[theta_high]) / den_high;
    if geq(lhs, rhs, tol) {
        SaiOutcome::Satisfied
    } else {
        SaiOutcome::Violated
    }
}

/// Is the pair `(a, b)` with `b ▷ a` made steeper by the transformation?
///
/// True iff for every state θ where `a` wins and θ' where `b` wins:
/// `b̂_θ ≤ b_θ`, `â_θ' ≥ a_θ'`, and the super-actuarial improvement
/// inequality holds at `(θ, θ')`.
pub fn made_steeper(a: &[f64], b: &[f64], a_post: &[f64], b_post: &[f64], tol: f64) -> bool {
    let part = match partition_states(a, b, tol) {
        Ok(p) => p,
        Err(_) => return false,
    };
    for &theta in &part.a_states {
        if !geq(b[theta], b_post[theta], tol) {
            return false;
        }
        for &theta_high in &part.b_states {
            if !geq(a_post[theta_high], a[theta_high], tol) {
                return false;
            }
            if !super_actuarial_improvement(a, b, a_post, b_post, theta, theta_high, tol).holds() {
                return false;
            }
        }
    }
    // when one side of the partition is empty the pair has a dominance
    // relation, which validation excludes; the loops then impose nothing
    true
}

/// Does every ordered pair of the menu get made steeper?
///
/// True implies the transformation robustly reduces the chosen action for
/// every belief and every concave increasing utility.
pub fn pairwise_steeper_all(t: &Transformation, tol: f64) -> bool {
    let n = t.problem().n_actions();
    for i in 0..n {
        for j in i + 1..n {
            if !made_steeper(t.pre(i), t.pre(j), t.post(i), t.post(j), tol) {
                return false;
            }
        }
    }
    true
}

/// A finite-support lottery over monetary outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteLottery {
    outcomes: Vec<f64>,
    probabilities: Vec<f64>,
}

impl DiscreteLottery {
    /// Outcomes need not be sorted or distinct; they are sorted and merged.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, SteepeningError> {
        let mut pairs: Vec<(f64, f64)> = pairs.into_iter().filter(|&(_, p)| p != 0.0).collect();
        if pairs.is_empty() {
            return Err(SteepeningError::EmptySupport);
        }
        let total: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if pairs.iter().any(|&(x, p)| !x.is_finite() || p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(SteepeningError::InvalidProbabilities);
        }
        pairs.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
        let mut outcomes: Vec<f64> = Vec::new();
        let mut probabilities: Vec<f64> = Vec::new();
        for (x, p) in pairs {
            match outcomes.last() {
                Some(&last) if (x - last).abs() <= 1e-12 => {
                    *probabilities.last_mut().unwrap() += p;
                }
                _ => {
                    outcomes.push(x);
                    probabilities.push(p);
                }
            }
        }
        Ok(Self {
            outcomes,
            probabilities,
        })
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Cumulative distribution function `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.outcomes
            .iter()
            .zip(&self.probabilities)
            .take_while(|(&o, _)| o <= x)
            .map(|(_, &p)| p)
            .sum()
    }
}

/// Pushforward of a belief through an action's payoff map.
pub fn induced_lottery(payoffs: &[f64], belief: &Belief) -> Result<DiscreteLottery, CoreError> {
    if payoffs.len() != belief.len() {
        return Err(CoreError::ShapeMismatch);
    }
    let pairs = payoffs
        .iter()
        .zip(belief.weights())
        .map(|(&x, &w)| (x, w))
        .collect();
    DiscreteLottery::new(pairs).map_err(|_| CoreError::InvalidBelief)
}

/// `∫ (F_1 − F_2)` evaluated at every candidate point: the merged outcome
/// grid plus the zero crossings of both integrated differences. Returns
/// `(x, d, d_hat)` triples sorted by `x`.
fn integrated_differences(
    l1: &DiscreteLottery,
    l2: &DiscreteLottery,
    l1_post: &DiscreteLottery,
    l2_post: &DiscreteLottery,
) -> Vec<(f64, f64, f64)> {
    let mut xs: Vec<f64> = [l1, l2, l1_post, l2_post]
        .iter()
        .flat_map(|l| l.outcomes.iter().copied())
        .collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);

    // cumulative trapezoid-free integral of a step function: exact
    let at_knots = |hi: &DiscreteLottery, lo: &DiscreteLottery| -> Vec<f64> {
        let mut vals = Vec::with_capacity(xs.len());
        let mut acc = 0.0;
        vals.push(0.0);
        for w in xs.windows(2) {
            acc += (hi.cdf(w[0]) - lo.cdf(w[0])) * (w[1] - w[0]);
            vals.push(acc);
        }
        vals
    };
    let d = at_knots(l1, l2);
    let d_hat = at_knots(l1_post, l2_post);

    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    for k in 0..xs.len() {
        out.push((xs[k], d[k], d_hat[k]));
        if k + 1 == xs.len() {
            break;
        }
        let (x0, x1) = (xs[k], xs[k + 1]);
        for f in [&d, &d_hat] {
            let (f0, f1) = (f[k], f[k + 1]);
            if (f0 < 0.0) != (f1 < 0.0) && f0 != f1 {
                let t = f0 / (f0 - f1);
                let x = x0 + t * (x1 - x0);
                let d_x = d[k] + t * (d[k + 1] - d[k]);
                let d_hat_x = d_hat[k] + t * (d_hat[k + 1] - d_hat[k]);
                out.push((x, d_x, d_hat_x));
            }
        }
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

/// Do the four induced lotteries preserve the dominance implication?
///
/// True iff at every candidate point `∫(F_1 − F_2) ≤ 0` implies
/// `∫(F̂_1 − F̂_2) ≤ 0`, and the ratio condition holds: the supremum of
/// `D̂/D` where `D̂ > 0` is at most its infimum where `D < 0`. Candidate
/// points are the merged outcome grid plus segment zero crossings, which
/// is exact for the sign sets of the piecewise-linear integrals.
pub fn check_lottery_conditions(
    l1: &DiscreteLottery,
    l2: &DiscreteLottery,
    l1_post: &DiscreteLottery,
    l2_post: &DiscreteLottery,
    tol: f64,
) -> bool {
    let samples = integrated_differences(l1, l2, l1_post, l2_post);
    for &(_, d, d_hat) in &samples {
        if d <= tol && d_hat > tol {
            return false;
        }
    }
    let mut sup_neg = f64::NEG_INFINITY;
    let mut inf_pos = f64::INFINITY;
    for &(_, d, d_hat) in &samples {
        if d_hat > tol {
            if d <= tol {
                return false;
            }
            sup_neg = sup_neg.max(d_hat / d);
        }
        if d < -tol {
            inf_pos = inf_pos.min(d_hat / d);
        }
    }
    geq(inf_pos, sup_neg, tol)
}
