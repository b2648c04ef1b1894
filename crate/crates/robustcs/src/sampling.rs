//! Random instance generators for property tests and oracle sweeps.
//!
//! Every generator returns fully validated problems or transformations, using
//! rejection where a construction is not valid by design.

use rand::Rng;

use crate::cmp::EPS;
use crate::problem::{
    validate_problem, validate_transformation, ActionPayoffs, MonotoneProblem, StateGrid,
    Transformation,
};
use crate::steepening::partition_states;

/// Binary menu `{a, b}` with `b_0 < a_0 <= a_1 < b_1`: the lower action wins
/// the low state, the higher action wins the high state, never dominated.
pub fn random_binary_problem<R: Rng>(rng: &mut R) -> MonotoneProblem {
    let a0 = rng.gen_range(-1.0..1.0);
    let a1 = a0 + rng.gen_range(0.0..1.0);
    let b0 = a0 - rng.gen_range(0.1..1.0);
    let b1 = a1 + rng.gen_range(0.1..1.0);
    validate_problem(
        StateGrid::new(vec![0.0, 1.0]).unwrap(),
        vec![
            ActionPayoffs::new("a", vec![a0, a1]),
            ActionPayoffs::new("b", vec![b0, b1]),
        ],
    )
    .expect("constructed binary menu is valid")
}

/// Two-state chain of `n` actions whose risk-neutral indifference beliefs are
/// strictly increasing: low-state drops grow and high-state gains shrink along
/// the menu, so no action is risk-neutrally dominated.
pub fn random_concave_chain<R: Rng>(rng: &mut R, n_actions: usize) -> MonotoneProblem {
    assert!(n_actions >= 2);
    let mut low = rng.gen_range(-1.0..1.0);
    let mut high = low + rng.gen_range(0.5..1.5);
    let mut drop = rng.gen_range(0.2..0.5);
    let mut gain = rng.gen_range(2.0..3.0);
    let mut actions = Vec::with_capacity(n_actions);
    for i in 0..n_actions {
        actions.push(ActionPayoffs::new(format!("a{i}"), vec![low, high]));
        low -= drop;
        high += gain;
        drop *= rng.gen_range(1.05..1.3);
        gain *= rng.gen_range(0.7..0.95);
    }
    validate_problem(StateGrid::new(vec![0.0, 1.0]).unwrap(), actions)
        .expect("constructed chain is valid")
}

/// Random monotone problem on an integer state grid: strictly increasing
/// slopes through a common interior pivot, plus small jitter. The pivot keeps
/// at least `0.3` away from every state so the jitter can never create
/// dominance or duplicate actions.
pub fn random_problem<R: Rng>(rng: &mut R, n_states: usize, n_actions: usize) -> MonotoneProblem {
    assert!(n_states >= 2 && n_actions >= 2);
    let states: Vec<f64> = (0..n_states).map(|s| s as f64).collect();
    let span = (n_states - 1) as f64;
    let pivot = loop {
        let x = rng.gen_range(0.3..span - 0.3);
        if states.iter().all(|&s| (x - s).abs() >= 0.3) {
            break x;
        }
    };
    let mut slope = rng.gen_range(0.2..0.5);
    let mut actions = Vec::with_capacity(n_actions);
    for i in 0..n_actions {
        let payoffs = states
            .iter()
            .map(|&s| slope * (s - pivot) + rng.gen_range(-0.01..0.01))
            .collect();
        actions.push(ActionPayoffs::new(format!("a{i}"), payoffs));
        slope += rng.gen_range(0.2..0.6);
    }
    validate_problem(StateGrid::new(states).unwrap(), actions)
        .expect("pivot construction is a valid monotone problem")
}

/// A valid transformation that is made steeper by construction: shifts every
/// payoff of a state down by `delta` on a prefix of states that only ever
/// favour lower actions, and up by `delta` on a suffix that only ever favour
/// higher ones. The steepness inequality then holds with equality.
pub fn steepening_shift<R: Rng>(rng: &mut R, problem: &MonotoneProblem) -> Transformation {
    let m = problem.n_states();
    let n = problem.n_actions();
    let table = problem.table();
    let mut low_ok = vec![true; m];
    let mut high_ok = vec![true; m];
    for i in 0..n {
        for j in i + 1..n {
            let part = partition_states(table[i], table[j], EPS)
                .expect("valid problems partition cleanly");
            for &s in &part.a_states {
                high_ok[s] = false;
            }
            for &s in &part.b_states {
                low_ok[s] = false;
            }
        }
    }
    let prefix = low_ok.iter().take_while(|&&ok| ok).count();
    let suffix = high_ok.iter().rev().take_while(|&&ok| ok).count();
    let suffix_start = (m - suffix).max(prefix);
    let delta = rng.gen_range(0.05..1.0);
    let post = problem
        .actions()
        .iter()
        .map(|a| {
            a.payoffs
                .iter()
                .enumerate()
                .map(|(s, &x)| {
                    if s < prefix {
                        x - delta
                    } else if s >= suffix_start {
                        x + delta
                    } else {
                        x
                    }
                })
                .collect()
        })
        .collect();
    validate_transformation(problem.clone(), post).expect("monotone state shift stays valid")
}

/// Random valid transformation: payoff noise with rejection. Returns `None`
/// when no valid draw appears within `attempts`.
pub fn noisy_transformation<R: Rng>(
    rng: &mut R,
    problem: &MonotoneProblem,
    scale: f64,
    attempts: usize,
) -> Option<Transformation> {
    for _ in 0..attempts {
        let post: Vec<Vec<f64>> = problem
            .actions()
            .iter()
            .map(|a| {
                a.payoffs
                    .iter()
                    .map(|&x| x + rng.gen_range(-scale..scale))
                    .collect()
            })
            .collect();
        if let Ok(t) = validate_transformation(problem.clone(), post) {
            return Some(t);
        }
    }
    None
}

/// A transformation of a chain menu that violates the necessary steepness
/// condition: a non-minimal action's low-state payoff is pushed up. Returns
/// `None` if no valid bump exists within `attempts`.
pub fn relevant_violation<R: Rng>(
    rng: &mut R,
    problem: &MonotoneProblem,
    attempts: usize,
) -> Option<Transformation> {
    let n = problem.n_actions();
    if n < 2 {
        return None;
    }
    for _ in 0..attempts {
        let idx = rng.gen_range(1..n);
        let bump = rng.gen_range(0.05..0.3);
        let mut post: Vec<Vec<f64>> = problem.actions().iter().map(|a| a.payoffs.clone()).collect();
        post[idx][0] += bump;
        if let Ok(t) = validate_transformation(problem.clone(), post) {
            return Some(t);
        }
    }
    None
}

/// Binary-menu transformation that is made commonly steeper by construction:
/// the higher action moves away from the lower one along their difference and
/// then down, the lower action moves weakly up.
pub fn commonly_steeper_binary<R: Rng>(rng: &mut R, attempts: usize) -> Option<Transformation> {
    for _ in 0..attempts {
        let p = random_binary_problem(rng);
        let a = p.payoffs(0).to_vec();
        let b = p.payoffs(1).to_vec();
        let s = rng.gen_range(0.0..0.5);
        let d = rng.gen_range(0.0..0.3);
        let e = rng.gen_range(0.0..0.3);
        let b_post: Vec<f64> = b
            .iter()
            .zip(&a)
            .map(|(&bv, &av)| bv + s * (bv - av) - d)
            .collect();
        let a_post: Vec<f64> = a.iter().map(|&av| av + e).collect();
        if let Ok(t) = validate_transformation(p, vec![a_post, b_post]) {
            return Some(t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genprefs::made_commonly_steeper;
    use crate::oracle::rng_from_seed;
    use crate::relevance::relevantly_steeper;
    use crate::steepening::pairwise_steeper_all;

    #[test]
    fn binary_problems_validate() {
        let mut rng = rng_from_seed(1);
        for _ in 0..50 {
            let p = random_binary_problem(&mut rng);
            assert_eq!(p.n_actions(), 2);
        }
    }

    #[test]
    fn concave_chains_have_increasing_indifference_beliefs() {
        let mut rng = rng_from_seed(2);
        for _ in 0..30 {
            let p = random_concave_chain(&mut rng, 4);
            let chain = crate::apps::risk_neutral_chain(&p).unwrap();
            assert!(chain.windows(2).all(|w| w[1] > w[0] + EPS));
        }
    }

    #[test]
    fn pivot_problems_validate_across_sizes() {
        let mut rng = rng_from_seed(3);
        for (m, n) in [(2, 2), (3, 3), (4, 5), (6, 3)] {
            let p = random_problem(&mut rng, m, n);
            assert_eq!((p.n_states(), p.n_actions()), (m, n));
        }
    }

    #[test]
    fn steepening_shifts_are_pairwise_steeper() {
        let mut rng = rng_from_seed(4);
        for _ in 0..30 {
            let p = random_problem(&mut rng, 3, 3);
            let t = steepening_shift(&mut rng, &p);
            assert!(pairwise_steeper_all(&t, 1e-9));
            assert!(relevantly_steeper(&t, 1e-9));
        }
    }

    #[test]
    fn noisy_transformations_validate() {
        let mut rng = rng_from_seed(5);
        let p = random_problem(&mut rng, 3, 3);
        let mut found = 0;
        for _ in 0..20 {
            if noisy_transformation(&mut rng, &p, 0.05, 50).is_some() {
                found += 1;
            }
        }
        assert!(found > 0);
    }

    #[test]
    fn relevant_violations_fail_the_necessary_condition() {
        let mut rng = rng_from_seed(6);
        let mut found = 0;
        for _ in 0..30 {
            let p = random_concave_chain(&mut rng, 3);
            if let Some(t) = relevant_violation(&mut rng, &p, 50) {
                assert!(!relevantly_steeper(&t, 1e-9));
                found += 1;
            }
        }
        assert!(found > 10);
    }

    #[test]
    fn constructed_binaries_are_commonly_steeper() {
        let mut rng = rng_from_seed(7);
        let mut found = 0;
        for _ in 0..50 {
            if let Some(t) = commonly_steeper_binary(&mut rng, 20) {
                assert!(made_commonly_steeper(
                    t.pre(0),
                    t.pre(1),
                    t.post(0),
                    t.post(1),
                    1e-9
                ));
                found += 1;
            }
        }
        assert!(found > 20);
    }
}
