//! Steepening beyond expected utility.
//!
//! Mixture-dominance conditions transport the binary steepening logic to
//! every regular preference over state-payoff vectors: complete,
//! transitive, convex, and strongly monotone. The module evaluates
//! variational and smooth-ambiguity functionals over finite belief grids,
//! probes their regularity numerically, and checks the menu-wide strong
//! set order under any such functional.

use std::sync::Arc;

use rand::Rng;

use crate::cmp::{approx_eq, geq, gt};
use crate::problem::{expected_utility, strong_set_order_dominates, Belief, Transformation};
use crate::utility::{PiecewiseLinearUtility, Utility};

/// A complete preference over state-payoff vectors, represented by a
/// real-valued evaluation.
#[derive(Clone)]
pub enum PreferenceFunctional {
    /// Plain expected utility at a fixed belief.
    Eu {
        belief: Belief,
        u: PiecewiseLinearUtility,
    },
    /// `min_p E_p[u] + c(p)` over a finite belief grid with a nonnegative
    /// cost table. Convexity of the cost is the caller's assertion.
    Variational {
        beliefs: Vec<Belief>,
        costs: Vec<f64>,
        u: PiecewiseLinearUtility,
    },
    /// `Σ_μ π(μ) φ(E_μ[u])` for a second-order prior over a belief grid.
    SmoothAmbiguity {
        beliefs: Vec<Belief>,
        prior: Vec<f64>,
        u: PiecewiseLinearUtility,
        phi: PiecewiseLinearUtility,
    },
    /// An arbitrary evaluation, mainly for sanity-checking the probes.
    Custom {
        n_states: usize,
        eval: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    },
}

impl std::fmt::Debug for PreferenceFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Eu { .. } => write!(f, "Eu"),
            Self::Variational { beliefs, .. } => write!(f, "Variational({} beliefs)", beliefs.len()),
            Self::SmoothAmbiguity { beliefs, .. } => {
                write!(f, "SmoothAmbiguity({} beliefs)", beliefs.len())
            }
            Self::Custom { .. } => write!(f, "Custom"),
        }
    }
}

impl PreferenceFunctional {
    pub fn n_states(&self) -> usize {
        match self {
            Self::Eu { belief, .. } => belief.len(),
            Self::Variational { beliefs, .. } | Self::SmoothAmbiguity { beliefs, .. } => {
                beliefs[0].len()
            }
            Self::Custom { n_states, .. } => *n_states,
        }
    }

    /// Variational preference with a multiplier-style cost: `θ` times the
    /// relative entropy of each grid belief against the reference `q`.
    pub fn multiplier(
        beliefs: Vec<Belief>,
        reference: &Belief,
        theta: f64,
        u: PiecewiseLinearUtility,
    ) -> Self {
        assert!(theta > 0.0);
        let costs = beliefs
            .iter()
            .map(|p| {
                theta
                    * p.weights()
                        .iter()
                        .zip(reference.weights())
                        .map(|(&pi, &qi)| {
                            if pi <= 0.0 {
                                0.0
                            } else if qi <= 0.0 {
                                f64::INFINITY
                            } else {
                                pi * (pi / qi).ln()
                            }
                        })
                        .sum::<f64>()
            })
            .collect();
        Self::Variational { beliefs, costs, u }
    }
}

/// Value of `action` under the functional.
pub fn evaluate(f: &PreferenceFunctional, action: &[f64]) -> f64 {
    match f {
        PreferenceFunctional::Eu { belief, u } => expected_utility(action, belief, u),
        PreferenceFunctional::Variational { beliefs, costs, u } => beliefs
            .iter()
            .zip(costs)
            .map(|(p, &c)| expected_utility(action, p, u) + c)
            .fold(f64::INFINITY, f64::min),
        PreferenceFunctional::SmoothAmbiguity {
            beliefs,
            prior,
            u,
            phi,
        } => beliefs
            .iter()
            .zip(prior)
            .map(|(mu, &pi)| pi * phi.eval(expected_utility(action, mu, u)))
            .sum(),
        PreferenceFunctional::Custom { eval, .. } => eval(action),
    }
}

/// A mixing weight `λ ∈ [0, 1]` with `x_θ > λ a_θ + (1 − λ) b̂_θ` in every
/// state, if one exists.
///
/// Each state contributes a strict linear constraint on `λ`; the witness
/// is the midpoint of the intersected interval.
pub fn dominates_mixture(x: &[f64], a: &[f64], b_post: &[f64]) -> Option<f64> {
    let mut lo = 0.0_f64;
    let mut hi = 1.0_f64;
    for s in 0..x.len() {
        let coeff = a[s] - b_post[s];
        let bound = x[s] - b_post[s];
        if coeff == 0.0 {
            if bound <= 0.0 {
                return None;
            }
        } else if coeff > 0.0 {
            hi = hi.min(bound / coeff);
        } else {
            lo = lo.max(bound / coeff);
        }
    }
    let satisfies = |lam: f64| {
        (0.0..=1.0).contains(&lam)
            && x.iter()
                .enumerate()
                .all(|(s, &v)| v > lam * a[s] + (1.0 - lam) * b_post[s])
    };
    // strict constraints hold in the interior; endpoints cover the cases
    // where a bound comes only from the [0, 1] clamp
    [0.5 * (lo + hi), lo, hi].into_iter().find(|&lam| satisfies(lam))
}

/// Mixture condition carrying steepening to all regular preferences:
/// either the higher action is untouched or it strictly dominates some
/// mixture of the pre lower action and the post higher action, and
/// likewise for the post lower action.
pub fn made_commonly_steeper(
    a: &[f64],
    b: &[f64],
    a_post: &[f64],
    b_post: &[f64],
    tol: f64,
) -> bool {
    let eq = |x: &[f64], y: &[f64]| x.iter().zip(y).all(|(&p, &q)| approx_eq(p, q, tol));
    let b_ok = eq(b, b_post) || dominates_mixture(b, a, b_post).is_some();
    let a_ok = eq(a_post, a) || dominates_mixture(a_post, a, b_post).is_some();
    b_ok && a_ok
}

/// Weak variant: `b ≥ λ a + (1 − λ) b̂` pointwise for some `λ ∈ [0, 1)`,
/// and `â ≥ γ a + (1 − γ) b̂` pointwise for some `γ ∈ [0, 1]`.
pub fn made_weakly_commonly_steeper(
    a: &[f64],
    b: &[f64],
    a_post: &[f64],
    b_post: &[f64],
    tol: f64,
) -> bool {
    // feasible closed interval of weights with x ≥ w·a + (1−w)·b̂ pointwise
    let weight_interval = |x: &[f64]| -> Option<(f64, f64)> {
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64;
        for s in 0..x.len() {
            let coeff = a[s] - b_post[s];
            let bound = x[s] - b_post[s];
            if coeff.abs() <= tol {
                if bound < -tol {
                    return None;
                }
            } else if coeff > 0.0 {
                hi = hi.min(bound / coeff + tol);
            } else {
                lo = lo.max(bound / coeff - tol);
            }
        }
        (lo <= hi).then_some((lo, hi))
    };
    // λ is confined strictly below 1, γ may reach it
    let b_ok = matches!(weight_interval(b), Some((lo, _)) if lo < 1.0);
    let a_ok = weight_interval(a_post).is_some();
    b_ok && a_ok
}

/// One recorded probe failure.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeViolation {
    pub trial: usize,
    pub property: &'static str,
    pub lhs: f64,
    pub rhs: f64,
}

/// Result of sampling regularity properties of a functional.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub trials: usize,
    pub violations: Vec<ProbeViolation>,
    /// Completeness and transitivity hold structurally for any real-valued
    /// evaluation.
    pub representation_is_complete_and_transitive: bool,
}

impl RegularityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample strong monotonicity (`a ≫ b` implies a strictly higher value)
/// and convexity (mixing toward a weakly better action never drops below
/// the worse one) on random payoff vectors.
pub fn regularity_probe<R: Rng>(
    f: &PreferenceFunctional,
    rng: &mut R,
    n_trials: usize,
    tol: f64,
) -> RegularityReport {
    let n = f.n_states();
    let mut violations = Vec::new();
    for trial in 0..n_trials {
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let gaps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
        let a: Vec<f64> = b.iter().zip(&gaps).map(|(&x, &g)| x + g).collect();
        let va = evaluate(f, &a);
        let vb = evaluate(f, &b);
        if !gt(va, vb, tol) {
            violations.push(ProbeViolation {
                trial,
                property: "strong monotonicity",
                lhs: va,
                rhs: vb,
            });
        }
        let (better, worse) = if va >= vb { (&a, &b) } else { (&b, &a) };
        let lambda: f64 = rng.gen_range(0.0..1.0);
        let mix: Vec<f64> = better
            .iter()
            .zip(worse.iter())
            .map(|(&p, &q)| lambda * p + (1.0 - lambda) * q)
            .collect();
        let vmix = evaluate(f, &mix);
        let vworse = va.min(vb);
        if !geq(vmix, vworse, tol) {
            violations.push(ProbeViolation {
                trial,
                property: "convexity",
                lhs: vmix,
                rhs: vworse,
            });
        }
    }
    RegularityReport {
        trials: n_trials,
        violations,
        representation_is_complete_and_transitive: true,
    }
}

/// Outcome of checking a full menu under one functional.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularVerdict {
    pub holds: bool,
    pub pre_optimal: Vec<usize>,
    pub post_optimal: Vec<usize>,
    /// Which sufficient condition held for every ordered pair.
    pub commonly_steeper_all: bool,
    pub weakly_commonly_steeper_all: bool,
}

/// Evaluate the whole menu pre and post under `f` and compare the argmax
/// sets in the strong set order.
pub fn verify_reduction_regular(
    t: &Transformation,
    f: &PreferenceFunctional,
    tie_tol: f64,
) -> RegularVerdict {
    let argmax = |rows: &[&[f64]]| -> Vec<usize> {
        let values: Vec<f64> = rows.iter().map(|r| evaluate(f, r)).collect();
        let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v >= best - tie_tol)
            .map(|(i, _)| i)
            .collect()
    };
    let pre = argmax(&t.pre_table());
    let post = argmax(&t.post_table());
    let holds = strong_set_order_dominates(&pre, &post).unwrap_or(false);
    let n = t.problem().n_actions();
    let mut common = true;
    let mut weak = true;
    for i in 0..n {
        for j in i + 1..n {
            common &= made_commonly_steeper(t.pre(i), t.pre(j), t.post(i), t.post(j), tie_tol);
            weak &= made_weakly_commonly_steeper(t.pre(i), t.pre(j), t.post(i), t.post(j), tie_tol);
        }
    }
    RegularVerdict {
        holds,
        pre_optimal: pre,
        post_optimal: post,
        commonly_steeper_all: common,
        weakly_commonly_steeper_all: weak,
    }
}
