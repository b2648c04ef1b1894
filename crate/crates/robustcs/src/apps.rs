//! Worked application presets: insurance demand, risky-asset allocation,
//! repeated prisoner's-dilemma cooperation, risk-aversion lower bounds, and
//! the two-state adjacent-pair sufficiency check.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmp::{geq, gt, EPS};
use crate::problem::{
    validate_problem, validate_transformation, ActionPayoffs, CoreError, MonotoneProblem,
    StateGrid, Transformation,
};
use crate::steepening::{made_steeper, partition_states};
use crate::utility::PiecewiseLinearUtility;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("expected a two-state problem, got {0} states")]
    DimensionError(usize),
    #[error("risk-neutral indifference beliefs are not strictly increasing at position {0}")]
    ConcavityViolation(usize),
    #[error(transparent)]
    Core(#[from] CoreError),
}

/// An insurable loss, a per-unit premium, and the coverage levels on offer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InsuranceSpec {
    pub loss: f64,
    pub price: f64,
    pub coverage: Vec<f64>,
}

impl InsuranceSpec {
    pub fn new(loss: f64, price: f64, coverage: Vec<f64>) -> Result<Self, AppError> {
        if !(loss > 0.0) || !loss.is_finite() {
            return Err(AppError::InvalidParameter(format!(
                "loss must be positive and finite, got {loss}"
            )));
        }
        if !(price > 0.0 && price < 1.0) {
            return Err(AppError::InvalidParameter(format!(
                "price must lie in (0,1), got {price}"
            )));
        }
        if coverage.len() < 2 || coverage.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AppError::InvalidParameter(
                "coverage grid must be sorted strictly increasing with at least two levels".into(),
            ));
        }
        if coverage[0].abs() > EPS || (coverage[coverage.len() - 1] - loss).abs() > EPS {
            return Err(AppError::InvalidParameter(
                "coverage grid must run from 0 to the full loss".into(),
            ));
        }
        Ok(Self {
            loss,
            price,
            coverage,
        })
    }
}

/// Two-state insurance menu: state 0 is the loss state, state 1 the no-loss
/// state. Coverage `c` at price `p` pays `-L + c(1-p)` under a loss and `-pc`
/// otherwise, so fuller coverage is the lower action.
pub fn insurance_problem(spec: &InsuranceSpec) -> Result<MonotoneProblem, AppError> {
    let grid = StateGrid::new(vec![0.0, 1.0])?;
    let actions = spec
        .coverage
        .iter()
        .map(|&c| {
            ActionPayoffs::new(
                format!("coverage={c}"),
                vec![
                    -spec.loss + c * (1.0 - spec.price),
                    -spec.price * c,
                ],
            )
        })
        .collect();
    Ok(validate_problem(grid, actions)?)
}

/// Repricing of an insurance menu: same coverage levels, new price and loss.
pub fn insurance_transformation(
    spec: &InsuranceSpec,
    price_post: f64,
    loss_post: f64,
) -> Result<Transformation, AppError> {
    if !(price_post > 0.0 && price_post < 1.0) || !(loss_post > 0.0) || !loss_post.is_finite() {
        return Err(AppError::InvalidParameter(
            "post price must lie in (0,1) and post loss must be positive".into(),
        ));
    }
    let problem = insurance_problem(spec)?;
    let post = problem
        .actions()
        .iter()
        .map(|a| {
            // Recover the coverage level from the no-loss payoff -p*c.
            let c = -a.payoffs[1] / spec.price;
            vec![-loss_post + c * (1.0 - price_post), -price_post * c]
        })
        .collect();
    Ok(validate_transformation(problem, post)?)
}

/// Closed-form demand condition: coverage demand rises for every risk-averse
/// expected-utility agent only if the per-unit price weakly falls and the loss
/// weakly grows.
pub fn insurance_reduces(p: f64, p_hat: f64, l: f64, l_hat: f64) -> bool {
    geq(p, p_hat, EPS) && geq(l_hat, l, EPS)
}

/// Grid-exact demand condition. On a finite coverage grid the loss-state
/// payoff of every partial coverage level must weakly fall, which binds at the
/// largest partial coverage `c*`: the condition is `p_hat <= p` together with
/// `l_hat - l >= c* (p - p_hat)`. This is strictly stronger than
/// [`insurance_reduces`] whenever the price strictly falls: a price cut with
/// an unchanged loss raises the loss-state payoff of partial coverage, and a
/// sufficiently kink-averse agent then abandons full coverage.
pub fn insurance_reduces_exact(
    p: f64,
    p_hat: f64,
    l: f64,
    l_hat: f64,
    coverage: &[f64],
) -> Result<bool, AppError> {
    let spec = InsuranceSpec::new(l, p, coverage.to_vec())?;
    let c_star = spec
        .coverage
        .iter()
        .rev()
        .find(|&&c| c < l - EPS)
        .copied()
        .unwrap_or(0.0);
    Ok(geq(p, p_hat, EPS) && geq(l_hat - l, c_star * (p - p_hat), EPS))
}

/// A distortion of risky returns sampled on a finite return grid around zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SigmaDistortion {
    pub returns: Vec<f64>,
    pub values: Vec<f64>,
}

impl SigmaDistortion {
    pub fn new(returns: Vec<f64>, values: Vec<f64>) -> Result<Self, AppError> {
        if returns.len() != values.len() || returns.len() < 3 {
            return Err(AppError::InvalidParameter(
                "return grid and distortion values must match and span both signs of zero".into(),
            ));
        }
        if returns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AppError::InvalidParameter(
                "return grid must be sorted strictly increasing".into(),
            ));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(AppError::InvalidParameter(
                "distortion must be strictly increasing".into(),
            ));
        }
        let zero = returns.iter().position(|&r| r.abs() <= EPS);
        let Some(z) = zero else {
            return Err(AppError::InvalidParameter(
                "return grid must contain zero".into(),
            ));
        };
        if z == 0 || z == returns.len() - 1 {
            return Err(AppError::InvalidParameter(
                "return grid needs a strictly negative and a strictly positive point".into(),
            ));
        }
        if values[z].abs() > EPS {
            return Err(AppError::InvalidParameter("sigma(0) must be 0".into()));
        }
        for (&r, &v) in returns.iter().zip(&values) {
            if (r < -EPS && !(v < 0.0)) || (r > EPS && !(v > 0.0)) {
                return Err(AppError::InvalidParameter(format!(
                    "sigma({r}) = {v} must keep the sign of the return"
                )));
            }
        }
        Ok(Self { returns, values })
    }
}

/// Demand in the risky asset cannot rise when the worst proportional penalty
/// on losses outweighs the best proportional reward on gains:
/// `min over r<0 of sigma(r)/r >= max over r>0 of sigma(r)/r`.
pub fn sigma_reduces(sigma: &SigmaDistortion) -> bool {
    let mut min_neg = f64::INFINITY;
    let mut max_pos = f64::NEG_INFINITY;
    for (&r, &v) in sigma.returns.iter().zip(&sigma.values) {
        if r < -EPS {
            min_neg = min_neg.min(v / r);
        } else if r > EPS {
            max_pos = max_pos.max(v / r);
        }
    }
    geq(min_neg, max_pos, EPS)
}

/// Allocation menu for a risky asset: states are realized returns, action
/// `rho` pays `rho * r` in state `r`.
pub fn invest_problem(
    returns: &[f64],
    allocations: &[f64],
) -> Result<MonotoneProblem, AppError> {
    if allocations.len() < 2
        || allocations.windows(2).any(|w| w[0] >= w[1])
        || allocations[0] < 0.0
    {
        return Err(AppError::InvalidParameter(
            "allocations must be sorted strictly increasing and nonnegative".into(),
        ));
    }
    let grid = StateGrid::new(returns.to_vec())?;
    let actions = allocations
        .iter()
        .map(|&rho| {
            ActionPayoffs::new(
                format!("rho={rho}"),
                returns.iter().map(|&r| rho * r).collect(),
            )
        })
        .collect();
    Ok(validate_problem(grid, actions)?)
}

/// Applies a return distortion to an allocation menu: action `rho` now pays
/// `rho * sigma(r)` in state `r`.
pub fn invest_transformation(
    sigma: &SigmaDistortion,
    allocations: &[f64],
) -> Result<Transformation, AppError> {
    let problem = invest_problem(&sigma.returns, allocations)?;
    let post = problem
        .actions()
        .iter()
        .map(|a| {
            // Recover rho from the payoff at the largest return.
            let last = sigma.returns.len() - 1;
            let rho = a.payoffs[last] / sigma.returns[last];
            sigma.values.iter().map(|&v| rho * v).collect()
        })
        .collect();
    Ok(validate_transformation(problem, post)?)
}

/// A grim-trigger repeated prisoner's dilemma before and after a payoff
/// change. Pre-transformation the stage game has cooperation worth 1,
/// defection temptation `beta > 1`, and punishment `-gamma`; the post game has
/// cooperation `alpha_hat`, temptation `beta_hat`, sucker payoff `rho_hat`,
/// and punishment `-gamma_hat`, ranked `beta_hat > alpha_hat > rho_hat >
/// -gamma_hat`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PDSpec {
    pub beta: f64,
    pub gamma: f64,
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub gamma_hat: f64,
    pub rho_hat: f64,
}

impl PDSpec {
    pub fn new(
        beta: f64,
        gamma: f64,
        alpha_hat: f64,
        beta_hat: f64,
        gamma_hat: f64,
        rho_hat: f64,
    ) -> Result<Self, AppError> {
        if !(beta > 1.0) {
            return Err(AppError::InvalidParameter(format!(
                "defection temptation must exceed 1, got {beta}"
            )));
        }
        if !(gamma > 0.0) {
            return Err(AppError::InvalidParameter(format!(
                "punishment weight must be positive, got {gamma}"
            )));
        }
        if !(beta_hat > alpha_hat && alpha_hat > rho_hat && rho_hat > -gamma_hat) {
            return Err(AppError::InvalidParameter(
                "post payoffs must satisfy beta_hat > alpha_hat > rho_hat > -gamma_hat".into(),
            ));
        }
        Ok(Self {
            beta,
            gamma,
            alpha_hat,
            beta_hat,
            gamma_hat,
            rho_hat,
        })
    }
}

/// The induced binary menu for the grim-trigger continuation decision. State 1
/// is "the opponent keeps cooperating". Pre: cooperate = (1,1), defect =
/// (0, beta); post: cooperate = (alpha_hat, alpha_hat), defect = (rho_hat,
/// beta_hat). Cooperation is the lower action, so cooperation surviving every
/// continuation belief is exactly a robust action reduction.
pub fn pd_transformation(spec: &PDSpec) -> Result<Transformation, AppError> {
    let grid = StateGrid::new(vec![0.0, 1.0])?;
    let problem = validate_problem(
        grid,
        vec![
            ActionPayoffs::new("cooperate", vec![1.0, 1.0]),
            ActionPayoffs::new("defect", vec![0.0, spec.beta]),
        ],
    )?;
    let post = problem
        .actions()
        .iter()
        .map(|a| {
            if a.name == "cooperate" {
                vec![spec.alpha_hat, spec.alpha_hat]
            } else {
                vec![spec.rho_hat, spec.beta_hat]
            }
        })
        .collect();
    Ok(validate_transformation(problem, post)?)
}

/// Closed form: the payoff change preserves cooperation at every discount
/// factor iff the sucker payoff weakly falls below zero, cooperation weakly
/// improves past 1, and the temptation either weakly falls or is capped by
/// `(1 - rho_hat)(beta - 1) + alpha_hat`. The punishment term `gamma_hat`
/// never enters.
pub fn pd_cooperation_preserved(spec: &PDSpec) -> bool {
    let harsher_sucker = geq(0.0, spec.rho_hat, EPS);
    let better_cooperation = geq(spec.alpha_hat, 1.0, EPS);
    let temptation_capped = geq(spec.beta, spec.beta_hat, EPS)
        || geq(
            (1.0 - spec.rho_hat) * (spec.beta - 1.0) + spec.alpha_hat,
            spec.beta_hat,
            EPS,
        );
    harsher_sucker && better_cooperation && temptation_capped
}

/// Checks whether composing every payoff with a concave increasing `v`
/// robustly reduces the action, via the ordinal conditions: for every ordered
/// pair of actions and every state where the lower action wins paired with one
/// where the higher action wins, `v` must weakly shrink both payoffs at the
/// low state and weakly inflate both at the high state. When these hold, the
/// steepness ratio inequality follows from concavity alone.
pub fn lower_bound_transform_check(
    problem: &MonotoneProblem,
    v: &PiecewiseLinearUtility,
) -> Result<bool, AppError> {
    use crate::utility::Utility;
    if v.slopes().iter().any(|&s| s <= 0.0) || v.slopes().windows(2).any(|w| w[1] > w[0] + EPS) {
        return Err(AppError::InvalidParameter(
            "v must be concave and strictly increasing".into(),
        ));
    }
    let table = problem.table();
    let n = problem.n_actions();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (table[i], table[j]);
            let part = partition_states(a, b, EPS)
                .map_err(|e| AppError::InvalidParameter(e.to_string()))?;
            for &lo in &part.a_states {
                if !geq(b[lo], v.eval(b[lo]), EPS) || !geq(a[lo], v.eval(a[lo]), EPS) {
                    return Ok(false);
                }
            }
            for &hi in &part.b_states {
                if !geq(v.eval(b[hi]), b[hi], EPS) || !geq(v.eval(a[hi]), a[hi], EPS) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Builds the transformation that replaces every payoff `x` with `v(x)`.
pub fn apply_utility_transform(
    problem: &MonotoneProblem,
    v: &PiecewiseLinearUtility,
) -> Result<Transformation, AppError> {
    use crate::utility::Utility;
    let post = problem
        .actions()
        .iter()
        .map(|a| a.payoffs.iter().map(|&x| v.eval(x)).collect())
        .collect();
    Ok(validate_transformation(problem.clone(), post)?)
}

/// Risk-neutral indifference beliefs between consecutive actions of a
/// two-state menu, in menu order. Strict increase is the two-state analogue of
/// no action being dominated for a risk-neutral agent.
pub fn risk_neutral_chain(problem: &MonotoneProblem) -> Result<Vec<f64>, AppError> {
    if problem.n_states() != 2 {
        return Err(AppError::DimensionError(problem.n_states()));
    }
    let table = problem.table();
    let mut mus = Vec::with_capacity(table.len().saturating_sub(1));
    for w in table.windows(2) {
        let (a, b) = (w[0], w[1]);
        let low_gap = a[0] - b[0];
        let high_gap = b[1] - a[1];
        mus.push(low_gap / (low_gap + high_gap));
    }
    Ok(mus)
}

/// Sufficiency check for two-state menus: if the risk-neutral indifference
/// chain is strictly increasing and every adjacent pair of actions is made
/// steeper, the whole transformation robustly reduces the action.
pub fn two_state_adjacent_steeper(t: &Transformation) -> Result<bool, AppError> {
    let chain = risk_neutral_chain(t.problem())?;
    for (i, w) in chain.windows(2).enumerate() {
        if !gt(w[1], w[0], EPS) {
            return Err(AppError::ConcavityViolation(i));
        }
    }
    let n = t.problem().n_actions();
    for i in 0..n - 1 {
        if !made_steeper(t.pre(i), t.pre(i + 1), t.post(i), t.post(i + 1), EPS) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every-payoff constant shifts: adding `c != 0` to the whole table. Always
/// fails the necessary steepness condition, because a nonzero common shift
/// either raises low-state payoffs of non-minimal actions or lowers high-state
/// payoffs of non-maximal ones.
pub fn constant_shift_transformation(
    problem: &MonotoneProblem,
    c: f64,
) -> Result<Transformation, AppError> {
    let post = problem
        .actions()
        .iter()
        .map(|a| a.payoffs.iter().map(|&x| x + c).collect())
        .collect();
    Ok(validate_transformation(problem.clone(), post)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relevance::relevantly_steeper;
    use crate::steepening::pairwise_steeper_all;
    use crate::utility::Utility;

    fn approx(x: f64, y: f64) -> bool {
        (x - y).abs() < 1e-9
    }

    fn p1() -> MonotoneProblem {
        validate_problem(
            StateGrid::new(vec![0.0, 1.0]).unwrap(),
            vec![
                ActionPayoffs::new("a", vec![1.0, 2.0]),
                ActionPayoffs::new("b", vec![0.0, 4.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn insurance_menu_payoffs() {
        let spec = InsuranceSpec::new(10.0, 0.3, vec![0.0, 5.0, 10.0]).unwrap();
        let p = insurance_problem(&spec).unwrap();
        // Fuller coverage wins the loss state, so the menu sorts descending
        // in coverage.
        assert_eq!(p.actions()[0].name, "coverage=10");
        assert_eq!(p.payoffs(0), &[-3.0, -3.0]);
        assert_eq!(p.payoffs(1), &[-6.5, -1.5]);
        assert_eq!(p.payoffs(2), &[-10.0, 0.0]);
    }

    #[test]
    fn insurance_closed_form_examples() {
        assert!(insurance_reduces(0.3, 0.2, 10.0, 12.0));
        assert!(!insurance_reduces(0.3, 0.35, 10.0, 12.0));
    }

    #[test]
    fn insurance_exact_matches_pairwise_and_necessary_checks() {
        let grid = [0.0, 5.0, 10.0];
        let cases = [
            (0.3, 0.2, 10.0, 12.0),
            (0.3, 0.35, 10.0, 12.0),
            (0.3, 0.2, 10.0, 10.0),
            (0.3, 0.2, 10.0, 10.4),
            (0.3, 0.2, 10.0, 10.5),
            (0.3, 0.3, 10.0, 10.0),
            (0.5, 0.1, 10.0, 11.0),
        ];
        for (p, p_hat, l, l_hat) in cases {
            let exact = insurance_reduces_exact(p, p_hat, l, l_hat, &grid).unwrap();
            let spec = InsuranceSpec::new(l, p, grid.to_vec()).unwrap();
            let computed = match insurance_transformation(&spec, p_hat, l_hat) {
                Ok(t) => pairwise_steeper_all(&t, 1e-9) && relevantly_steeper(&t, 1e-9),
                Err(_) => false,
            };
            assert_eq!(exact, computed, "disagreement at {:?}", (p, p_hat, l, l_hat));
        }
    }

    #[test]
    fn insurance_price_cut_alone_is_not_enough() {
        // Price falls, loss unchanged: the simple closed form says demand
        // rises, but partial coverage gains in the loss state and the
        // necessary condition fails on the finite grid.
        assert!(insurance_reduces(0.3, 0.2, 10.0, 10.0));
        assert!(!insurance_reduces_exact(0.3, 0.2, 10.0, 10.0, &[0.0, 5.0, 10.0]).unwrap());
        let spec = InsuranceSpec::new(10.0, 0.3, vec![0.0, 5.0, 10.0]).unwrap();
        let t = insurance_transformation(&spec, 0.2, 10.0).unwrap();
        assert!(!relevantly_steeper(&t, 1e-9));
    }

    #[test]
    fn sigma_ratio_examples() {
        let rets = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
        let scale = |k: f64, s: f64| {
            SigmaDistortion::new(
                rets.clone(),
                rets.iter()
                    .map(|&r| if r < 0.0 { s * r } else { k * r })
                    .collect(),
            )
            .unwrap()
        };
        assert!(sigma_reduces(&scale(2.0, 3.0)));
        assert!(!sigma_reduces(&scale(2.0, 0.5)));
        let identity = SigmaDistortion::new(rets.clone(), rets.clone()).unwrap();
        assert!(sigma_reduces(&identity));
    }

    #[test]
    fn invest_menu_scaling_matches_pairwise_steepening() {
        let rets = vec![-1.0, -0.5, 0.0, 0.5, 1.0];
        let allocations = [0.0, 1.0, 2.0];
        let steep = SigmaDistortion::new(
            rets.clone(),
            rets.iter()
                .map(|&r| if r < 0.0 { 3.0 * r } else { 2.0 * r })
                .collect(),
        )
        .unwrap();
        let t = invest_transformation(&steep, &allocations).unwrap();
        assert!(sigma_reduces(&steep));
        assert!(pairwise_steeper_all(&t, 1e-9));

        // Softening losses while doubling gains reverses the ratio ordering,
        // and the menu-level sufficient condition fails with it.
        let mild = SigmaDistortion::new(
            rets.clone(),
            rets.iter()
                .map(|&r| if r < 0.0 { 0.5 * r } else { 2.0 * r })
                .collect(),
        )
        .unwrap();
        assert!(!sigma_reduces(&mild));
        let t = invest_transformation(&mild, &allocations).unwrap();
        assert!(!pairwise_steeper_all(&t, 1e-9));
    }

    #[test]
    fn pd_examples() {
        let s1 = PDSpec::new(2.0, 1.0, 1.0, 2.0, 1.0, 0.0).unwrap();
        assert!(pd_cooperation_preserved(&s1));
        let s2 = PDSpec::new(2.0, 1.0, 1.5, 3.0, 2.0, -1.0).unwrap();
        assert!(pd_cooperation_preserved(&s2));
        let s3 = PDSpec::new(2.0, 1.0, 1.0, 2.0, 1.0, 0.1).unwrap();
        assert!(!pd_cooperation_preserved(&s3));
    }

    #[test]
    fn pd_closed_form_matches_binary_steepening() {
        let specs = [
            (2.0, 1.0, 1.0, 2.0, 1.0, 0.0),
            (2.0, 1.0, 1.5, 3.0, 2.0, -1.0),
            (2.0, 1.0, 1.0, 2.0, 1.0, 0.1),
            (3.0, 0.5, 0.9, 3.5, 1.0, -0.2),
            (2.0, 1.0, 1.2, 3.6, 0.5, -0.1),
        ];
        for tuple in specs {
            let spec =
                PDSpec::new(tuple.0, tuple.1, tuple.2, tuple.3, tuple.4, tuple.5).unwrap();
            let closed = pd_cooperation_preserved(&spec);
            let computed = match pd_transformation(&spec) {
                Ok(t) => pairwise_steeper_all(&t, 1e-9),
                Err(_) => false,
            };
            assert_eq!(closed, computed, "disagreement at {tuple:?}");
        }
    }

    #[test]
    fn pd_gamma_hat_is_irrelevant() {
        for g in [0.5, 1.0, 5.0] {
            let spec = PDSpec::new(2.0, 1.0, 1.0, 2.0, g, 0.0).unwrap();
            assert!(pd_cooperation_preserved(&spec));
        }
    }

    #[test]
    fn lower_bound_ordinal_examples() {
        let p = p1();
        let v = crate::utility::KinkedUtility::new(1.5, 0.5).unwrap().to_piecewise();
        assert!(approx(v.eval(2.0), 1.75));
        assert!(!lower_bound_transform_check(&p, &v).unwrap());

        let id = PiecewiseLinearUtility::identity();
        assert!(lower_bound_transform_check(&p, &id).unwrap());

        let shifted = PiecewiseLinearUtility::affine(1.0, 0.5);
        assert!(!lower_bound_transform_check(&p, &shifted).unwrap());
        let t = apply_utility_transform(&p, &shifted).unwrap();
        assert!(!relevantly_steeper(&t, 1e-9));
    }

    #[test]
    fn lower_bound_true_implies_steepness_ratio() {
        // v shrinks low-state payoffs and fixes high ones: kink at 1.5 with a
        // steep segment below keeps v(x) <= x everywhere and v(x) = x above.
        let grid = StateGrid::new(vec![0.0, 1.0]).unwrap();
        let p = validate_problem(
            grid,
            vec![
                ActionPayoffs::new("a", vec![2.0, 3.0]),
                ActionPayoffs::new("b", vec![1.0, 5.0]),
            ],
        )
        .unwrap();
        // Convex slope profiles never construct, so the concavity guard in
        // the checker can only trip on hand-built values.
        assert!(PiecewiseLinearUtility::new(vec![3.0], vec![0.5, 1.0], 3.0).is_err());

        let w = PiecewiseLinearUtility::new(vec![3.0], vec![1.5, 1.0], 3.0).unwrap();
        assert!(approx(w.eval(2.0), 1.5));
        assert!(lower_bound_transform_check(&p, &w).unwrap());
        let t = apply_utility_transform(&p, &w).unwrap();
        assert!(pairwise_steeper_all(&t, 1e-9));
    }

    #[test]
    fn adjacent_chain_and_steepening() {
        let grid = StateGrid::new(vec![0.0, 1.0]).unwrap();
        let p = validate_problem(
            grid,
            vec![
                ActionPayoffs::new("a1", vec![2.0, 3.0]),
                ActionPayoffs::new("a2", vec![1.0, 5.0]),
                ActionPayoffs::new("a3", vec![0.0, 6.0]),
            ],
        )
        .unwrap();
        let chain = risk_neutral_chain(&p).unwrap();
        assert!(approx(chain[0], 1.0 / 3.0));
        assert!(approx(chain[1], 0.5));

        let t = validate_transformation(
            p.clone(),
            vec![vec![2.0, 3.5], vec![0.5, 5.5], vec![-0.5, 6.5]],
        )
        .unwrap();
        assert!(two_state_adjacent_steeper(&t).unwrap());

        let id = Transformation::identity(p);
        assert!(two_state_adjacent_steeper(&id).unwrap());
    }

    #[test]
    fn flat_chain_is_a_concavity_violation() {
        // Middle action exactly on the segment between its neighbours makes
        // consecutive risk-neutral indifference beliefs equal.
        let grid = StateGrid::new(vec![0.0, 1.0]).unwrap();
        let p = validate_problem(
            grid,
            vec![
                ActionPayoffs::new("a1", vec![2.0, 3.0]),
                ActionPayoffs::new("a2", vec![1.0, 4.0]),
                ActionPayoffs::new("a3", vec![0.0, 5.0]),
            ],
        )
        .unwrap();
        let t = Transformation::identity(p);
        match two_state_adjacent_steeper(&t) {
            Err(AppError::ConcavityViolation(0)) => {}
            other => panic!("expected ConcavityViolation(0), got {other:?}"),
        }
    }

    #[test]
    fn constant_shift_always_fails_necessity() {
        let p = p1();
        for c in [0.1, -0.1, 1.0, -1.0] {
            let t = constant_shift_transformation(&p, c).unwrap();
            assert!(!relevantly_steeper(&t, 1e-9), "shift {c} slipped through");
        }
    }
}
