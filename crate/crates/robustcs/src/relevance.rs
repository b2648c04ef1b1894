//! Relevant-action sets, the relevantly-steeper necessity test, and
//! constructive counterexamples.
//!
//! When a transformation fails the necessary condition, a kinked utility
//! and an edge belief exist at which the chosen action provably moves up.
//! The engines here build that witness explicitly: pick the first
//! violation, place the kink at the prescribed payoff, and shrink the
//! upper slope along a geometric schedule until the witness interval of
//! beliefs opens up. Every witness replays through the core evaluation
//! primitives with no reference to how it was found.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cmp::{approx_eq, geq, gt};
use crate::problem::{expected_utility, indifference_belief, optimal_set, Belief, Transformation};
use crate::steepening::{made_steeper, partition_states, super_actuarial_improvement};
use crate::utility::KinkedUtility;

/// Slope schedule for the kinked-utility search: the proofs need the upper
/// slope "sufficiently small", and this makes smallness concrete.
pub const IOTA_SCHEDULE: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelevanceError {
    #[error("no counterexample to construct: the tested condition holds")]
    PreconditionViolated,
    #[error("slope schedule exhausted without a replaying witness")]
    ScheduleExhausted,
    #[error("reached the provably impossible failure configuration")]
    UnreachableCase4,
}

/// Actions surviving weak-domination pruning when attention is restricted
/// to a pair of states.
///
/// `actions` holds menu indices in ascending menu order, which on the
/// restricted pair is a strict chain: low-state payoffs strictly decrease
/// and high-state payoffs strictly increase along it. The first entry is
/// the minimal relevant action, the last the maximal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantSet {
    pub state_pair: (usize, usize),
    pub actions: Vec<usize>,
}

/// Relevant actions of `table` for the state pair `(lo, hi)`.
///
/// An action is pruned when another action weakly dominates it in the two
/// states. Actions with identical restricted payoffs keep only the lowest
/// menu index.
pub fn relevant_set(table: &[&[f64]], lo: usize, hi: usize, tol: f64) -> RelevantSet {
    assert!(lo < hi);
    let n = table.len();
    let mut keep = Vec::new();
    'outer: for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let same = approx_eq(table[j][lo], table[i][lo], tol)
                && approx_eq(table[j][hi], table[i][hi], tol);
            if same {
                if j < i {
                    continue 'outer;
                }
                continue;
            }
            let weakly_above =
                geq(table[j][lo], table[i][lo], tol) && geq(table[j][hi], table[i][hi], tol);
            if weakly_above {
                continue 'outer;
            }
        }
        keep.push(i);
    }
    RelevantSet {
        state_pair: (lo, hi),
        actions: keep,
    }
}

/// Does the transformation become relevantly steeper?
///
/// For every state pair, every relevant action except the minimal one must
/// weakly lose payoff in the low state, and every relevant action except
/// the maximal one must weakly gain in the high state. Relevance is judged
/// on the pre-transformation payoffs. This condition is necessary for a
/// robust reduction on any menu.
pub fn relevantly_steeper(t: &Transformation, tol: f64) -> bool {
    let m = t.problem().n_states();
    let pre = t.pre_table();
    for lo in 0..m {
        for hi in lo + 1..m {
            let rs = relevant_set(&pre, lo, hi, tol);
            for (pos, &idx) in rs.actions.iter().enumerate() {
                if pos > 0 && !geq(t.pre(idx)[lo], t.post(idx)[lo], tol) {
                    return false;
                }
                if pos + 1 < rs.actions.len() && !geq(t.post(idx)[hi], t.pre(idx)[hi], tol) {
                    return false;
                }
            }
        }
    }
    true
}

/// A constructed `(utility, edge belief)` pair certifying that the
/// transformation fails to reduce the chosen action.
///
/// At the witness, `violated_action` is uniquely optimal pre-transformation
/// while `beats_it_post`, a strictly higher action, is strictly better
/// post-transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleWitness {
    pub utility: KinkedUtility,
    pub belief: Belief,
    pub state_pair: (usize, usize),
    pub violated_action: usize,
    pub beats_it_post: usize,
    pub pre_optimal: Vec<usize>,
    /// Failure classification for binary menus (1 through 6), absent for
    /// the general menu engine.
    pub case: Option<u8>,
}

impl CounterexampleWitness {
    /// Recompute everything from scratch: the violated action is uniquely
    /// optimal pre-transformation, and the named higher action strictly
    /// beats it post-transformation.
    pub fn replays(&self, t: &Transformation, tie_tol: f64) -> bool {
        if self.beats_it_post <= self.violated_action {
            return false;
        }
        let pre = optimal_set(&t.pre_table(), &self.belief, &self.utility, tie_tol);
        if pre != vec![self.violated_action] || pre != self.pre_optimal {
            return false;
        }
        let post_best = expected_utility(t.post(self.beats_it_post), &self.belief, &self.utility);
        let post_violated = expected_utility(t.post(self.violated_action), &self.belief, &self.utility);
        gt(post_best, post_violated, tie_tol)
    }
}

/// The first relevantly-steeper violation in lexicographic
/// (state pair, chain position) order.
struct Violation {
    lo: usize,
    hi: usize,
    /// Menu index of the action that should stay uniquely optimal.
    anchor: usize,
    /// Menu index of the next-higher relevant action that overtakes it.
    next_up: usize,
    /// Relevant-set positions of the two, for scanning neighbors.
    chain: Vec<usize>,
    anchor_pos: usize,
    kink: f64,
}

fn first_violation(t: &Transformation, tol: f64) -> Option<Violation> {
    let m = t.problem().n_states();
    let pre = t.pre_table();
    for lo in 0..m {
        for hi in lo + 1..m {
            let rs = relevant_set(&pre, lo, hi, tol);
            for (pos, &idx) in rs.actions.iter().enumerate() {
                if pos > 0 && gt(t.post(idx)[lo], t.pre(idx)[lo], tol) {
                    // low-state rise at a non-minimal relevant action: the
                    // action just below it gets overtaken
                    let anchor = rs.actions[pos - 1];
                    return Some(Violation {
                        lo,
                        hi,
                        anchor,
                        next_up: idx,
                        kink: t.pre(anchor)[lo].min(t.post(idx)[lo]),
                        chain: rs.actions.clone(),
                        anchor_pos: pos - 1,
                    });
                }
                if pos + 1 < rs.actions.len() && gt(t.pre(idx)[hi], t.post(idx)[hi], tol) {
                    // high-state drop at a non-maximal relevant action
                    return Some(Violation {
                        lo,
                        hi,
                        anchor: idx,
                        next_up: rs.actions[pos + 1],
                        kink: t.pre(idx)[hi],
                        chain: rs.actions.clone(),
                        anchor_pos: pos,
                    });
                }
            }
        }
    }
    None
}

/// Construct a replaying witness from the first relevantly-steeper
/// violation.
///
/// The kink sits at the payoff named by the violation branch; the upper
/// slope walks down [`IOTA_SCHEDULE`] until the belief interval pinched
/// between the neighboring indifference beliefs opens up and the candidate
/// replays against the full menu.
pub fn necessity_counterexample(
    t: &Transformation,
    tol: f64,
) -> Result<CounterexampleWitness, RelevanceError> {
    let v = first_violation(t, tol).ok_or(RelevanceError::PreconditionViolated)?;
    let n_states = t.problem().n_states();
    let indiff = |low: &[f64], high: &[f64], u: &KinkedUtility| -> Option<f64> {
        indifference_belief(low, high, v.lo, v.hi, u).ok().flatten()
    };
    for iota in IOTA_SCHEDULE {
        let u = KinkedUtility::new(v.kink, iota).expect("schedule iota is valid");
        // lower edge: the anchor must beat every lower relevant action both
        // pre- and post-transformation
        let mut mu_low: f64 = 0.0;
        let mut ok = true;
        for &j in &v.chain[..v.anchor_pos] {
            let pre = indiff(t.pre(j), t.pre(v.anchor), &u);
            let post = indiff(t.post(j), t.post(v.anchor), &u);
            match (pre, post) {
                (Some(p), Some(q)) => mu_low = mu_low.max(p).max(q),
                _ => ok = false,
            }
        }
        // upper edge: the anchor must beat every higher relevant action
        // pre-transformation
        let mut mu_high: f64 = 1.0;
        for &j in &v.chain[v.anchor_pos + 1..] {
            match indiff(t.pre(v.anchor), t.pre(j), &u) {
                Some(p) => mu_high = mu_high.min(p),
                None => ok = false,
            }
        }
        // the overtaking belief post-transformation
        let mu_hat = match indiff(t.post(v.anchor), t.post(v.next_up), &u) {
            Some(p) => p,
            None => {
                ok = false;
                0.0
            }
        };
        if !ok {
            continue;
        }
        let floor = mu_low.max(mu_hat);
        if floor + tol >= mu_high {
            continue;
        }
        let belief = Belief::edge(n_states, v.lo, v.hi, 0.5 * (floor + mu_high));
        let witness = CounterexampleWitness {
            utility: u,
            belief,
            state_pair: (v.lo, v.hi),
            violated_action: v.anchor,
            beats_it_post: v.next_up,
            pre_optimal: vec![v.anchor],
            case: None,
        };
        if witness.replays(t, tol) {
            return Ok(witness);
        }
    }
    Err(RelevanceError::ScheduleExhausted)
}

/// Construct a replaying witness for a binary menu that is not made
/// steeper.
///
/// The failure at the first bad state pair is classified into one of six
/// configurations, each with its own kink placement; the fourth
/// configuration is provably impossible and reported as an internal error
/// if ever reached. Indices in the witness refer to the two-action menu
/// `[a, b]`.
pub fn binary_necessity_counterexample(
    a: &[f64],
    b: &[f64],
    a_post: &[f64],
    b_post: &[f64],
    tol: f64,
) -> Result<CounterexampleWitness, RelevanceError> {
    if made_steeper(a, b, a_post, b_post, tol) {
        return Err(RelevanceError::PreconditionViolated);
    }
    let part = partition_states(a, b, tol).map_err(|_| RelevanceError::PreconditionViolated)?;
    let floor_kink = a
        .iter()
        .chain(b)
        .chain(a_post)
        .chain(b_post)
        .cloned()
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    for &lo in &part.a_states {
        for &hi in &part.b_states {
            let (case, kink) = if gt(b_post[lo], b[lo], tol) {
                (1, a[lo].min(b_post[lo]))
            } else if gt(a[hi], a_post[hi], tol) {
                (2, a[hi])
            } else {
                if super_actuarial_improvement(a, b, a_post, b_post, lo, hi, tol).holds() {
                    continue;
                }
                let a_rose = gt(a_post[lo], a[lo], tol);
                let b_fell = gt(b[hi], b_post[hi], tol);
                match (a_rose, b_fell) {
                    (false, false) => (3, floor_kink),
                    (true, false) => (5, a[lo]),
                    (false, true) => (6, b_post[hi]),
                    (true, true) => return Err(RelevanceError::UnreachableCase4),
                }
            };
            let iotas: &[f64] = if case == 3 { &[0.5] } else { &IOTA_SCHEDULE };
            for &iota in iotas {
                let u = KinkedUtility::new(kink, iota).expect("schedule iota is valid");
                let mu = indifference_belief(a, b, lo, hi, &u).ok().flatten();
                let mu_hat = indifference_belief(a_post, b_post, lo, hi, &u).ok().flatten();
                if let (Some(mu), Some(mu_hat)) = (mu, mu_hat) {
                    if mu - mu_hat > tol {
                        let belief = Belief::edge(a.len(), lo, hi, 0.5 * (mu + mu_hat));
                        return Ok(CounterexampleWitness {
                            utility: u,
                            belief,
                            state_pair: (lo, hi),
                            violated_action: 0,
                            beats_it_post: 1,
                            pre_optimal: vec![0],
                            case: Some(case),
                        });
                    }
                }
            }
        }
    }
    Err(RelevanceError::ScheduleExhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmp::EPS;
    use crate::problem::{validate_problem, validate_transformation, ActionPayoffs, StateGrid};

    fn menu3() -> crate::problem::MonotoneProblem {
        validate_problem(
            StateGrid::new(vec![0.0, 1.0]).unwrap(),
            vec![
                ActionPayoffs::new("a1", vec![2.0, 3.0]),
                ActionPayoffs::new("a2", vec![1.0, 5.0]),
                ActionPayoffs::new("a3", vec![0.0, 6.0]),
            ],
        )
        .unwrap()
    }

    fn p1() -> crate::problem::MonotoneProblem {
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
    fn relevant_set_examples() {
        let table: Vec<&[f64]> = vec![&[2.0, 3.0], &[1.0, 5.0], &[0.0, 6.0]];
        assert_eq!(relevant_set(&table, 0, 1, EPS).actions, vec![0, 1, 2]);

        let table: Vec<&[f64]> = vec![&[2.0, 3.0], &[1.0, 4.0], &[1.0, 5.0], &[0.0, 6.0]];
        // (1,4) loses to (1,5): equal low state, worse high state
        assert_eq!(relevant_set(&table, 0, 1, EPS).actions, vec![0, 2, 3]);

        let table: Vec<&[f64]> = vec![&[1.0, 2.0]];
        assert_eq!(relevant_set(&table, 0, 1, EPS).actions, vec![0]);
    }

    #[test]
    fn relevant_set_keeps_lowest_duplicate() {
        let table: Vec<&[f64]> = vec![&[2.0, 3.0], &[2.0, 3.0], &[0.0, 6.0]];
        assert_eq!(relevant_set(&table, 0, 1, EPS).actions, vec![0, 2]);
    }

    #[test]
    fn relevantly_steeper_examples() {
        let good = validate_transformation(
            menu3(),
            vec![vec![2.0, 3.5], vec![0.5, 5.5], vec![0.0, 6.5]],
        )
        .unwrap();
        assert!(relevantly_steeper(&good, EPS));

        let bad = validate_transformation(
            menu3(),
            vec![vec![2.0, 3.5], vec![1.2, 5.0], vec![0.0, 6.5]],
        )
        .unwrap();
        assert!(!relevantly_steeper(&bad, EPS));

        let ident = Transformation::identity(menu3());
        assert!(relevantly_steeper(&ident, EPS));
    }

    #[test]
    fn necessity_low_state_violation_replays() {
        let t = validate_transformation(
            menu3(),
            vec![vec![2.0, 3.5], vec![1.2, 5.0], vec![0.0, 6.5]],
        )
        .unwrap();
        let w = necessity_counterexample(&t, EPS).unwrap();
        assert_eq!(w.utility.kink, 1.2);
        assert_eq!((w.violated_action, w.beats_it_post), (0, 1));
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn necessity_high_state_violation_replays() {
        let t = validate_transformation(
            menu3(),
            vec![vec![2.0, 2.9], vec![0.5, 5.5], vec![-0.5, 6.5]],
        )
        .unwrap();
        let w = necessity_counterexample(&t, EPS).unwrap();
        assert_eq!(w.utility.kink, 3.0);
        assert_eq!((w.violated_action, w.beats_it_post), (0, 1));
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn necessity_requires_a_violation() {
        let t = Transformation::identity(menu3());
        assert_eq!(
            necessity_counterexample(&t, EPS),
            Err(RelevanceError::PreconditionViolated)
        );
    }

    #[test]
    fn binary_case1_replays() {
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        let (a_post, b_post) = ([1.0, 3.0], [0.5, 4.0]);
        let w = binary_necessity_counterexample(&a, &b, &a_post, &b_post, EPS).unwrap();
        assert_eq!(w.case, Some(1));
        assert_eq!(w.utility.kink, 0.5);
        let t = validate_transformation(p1(), vec![a_post.to_vec(), b_post.to_vec()]).unwrap();
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn binary_case2_replays() {
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        let (a_post, b_post) = ([1.0, 1.5], [0.0, 4.0]);
        let w = binary_necessity_counterexample(&a, &b, &a_post, &b_post, EPS).unwrap();
        assert_eq!(w.case, Some(2));
        assert_eq!(w.utility.kink, 2.0);
        let t = validate_transformation(p1(), vec![a_post.to_vec(), b_post.to_vec()]).unwrap();
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn binary_case3_risk_neutral_belief() {
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        let (a_post, b_post) = ([1.0, 2.0], [0.0, 6.0]);
        let w = binary_necessity_counterexample(&a, &b, &a_post, &b_post, EPS).unwrap();
        assert_eq!(w.case, Some(3));
        // risk-neutral indifference at 1/3 pre, 1/5 post
        let mu = w.belief.weights()[1];
        assert!(mu > 0.2 && mu < 1.0 / 3.0);
        let t = validate_transformation(p1(), vec![a_post.to_vec(), b_post.to_vec()]).unwrap();
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn binary_case5_replays() {
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        let (a_post, b_post) = ([1.5, 2.0], [0.0, 6.0]);
        let w = binary_necessity_counterexample(&a, &b, &a_post, &b_post, EPS).unwrap();
        assert_eq!(w.case, Some(5));
        assert_eq!(w.utility.kink, 1.0);
        let t = validate_transformation(p1(), vec![a_post.to_vec(), b_post.to_vec()]).unwrap();
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn binary_case6_replays() {
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        let (a_post, b_post) = ([0.2, 2.0], [0.0, 2.5]);
        let w = binary_necessity_counterexample(&a, &b, &a_post, &b_post, EPS).unwrap();
        assert_eq!(w.case, Some(6));
        assert_eq!(w.utility.kink, 2.5);
        let t = validate_transformation(p1(), vec![a_post.to_vec(), b_post.to_vec()]).unwrap();
        assert!(w.replays(&t, EPS));
    }

    #[test]
    fn binary_precondition() {
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        assert_eq!(
            binary_necessity_counterexample(&a, &b, &[1.0, 3.0], &[-1.0, 4.0], EPS),
            Err(RelevanceError::PreconditionViolated)
        );
    }

    #[test]
    fn case4_configuration_satisfies_inequality() {
        // raise â in the low state, lower b̂ in the high state: the
        // inequality then holds mechanically
        let (a, b) = ([1.0, 2.0], [0.0, 4.0]);
        for &(da, db) in &[(0.3, 0.5), (0.8, 1.2), (0.1, 1.9)] {
            let a_post = [1.0 + da, 2.0];
            let b_post = [0.0, 4.0 - db];
            assert!(
                super_actuarial_improvement(&a, &b, &a_post, &b_post, 0, 1, EPS).holds(),
                "da={da} db={db}"
            );
        }
    }
}
