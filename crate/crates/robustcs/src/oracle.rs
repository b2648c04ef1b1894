//! Brute-force verification over finite utility families and belief grids.
//!
//! The sweep enumerates every `(utility, belief)` pair, computes the
//! optimal sets pre- and post-transformation, and checks the strong set
//! order. A `CertifiedHolds` verdict is always relative to the supplied
//! family and grid; a `Refuted` verdict carries a witness that replays
//! through the core primitives. Witness selection is lexicographic-first
//! over the enumeration order (utility-major), independent of whether the
//! sweep runs in parallel.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cmp::geq;
use crate::problem::{
    indifference_belief, optimal_set, strong_set_order_dominates, Belief, Transformation, Verdict,
    VerdictStatus, Witness,
};
use crate::steepening::partition_states;
use crate::utility::{KinkedUtility, PiecewiseLinearUtility, Utility};

/// How a utility family was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    KinkedGrid,
    RandomConcave { seed: u64 },
    Custom,
}

/// A finite stand-in for the class of concave increasing utilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtilityFamily {
    pub members: Vec<PiecewiseLinearUtility>,
    pub provenance: Provenance,
}

impl UtilityFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Kinked utilities with kinks at `n_kinks` evenly spaced interior points
/// of `range`, crossed with the `iotas` list.
pub fn kinked_grid(range: (f64, f64), n_kinks: usize, iotas: &[f64]) -> UtilityFamily {
    let (lo, hi) = range;
    assert!(lo < hi);
    let step = (hi - lo) / (n_kinks as f64 + 1.0);
    let mut members = Vec::new();
    for k in 1..=n_kinks {
        for &iota in iotas {
            members.push(
                KinkedUtility::new(lo + step * k as f64, iota)
                    .expect("valid iota")
                    .to_piecewise(),
            );
        }
    }
    UtilityFamily {
        members,
        provenance: Provenance::KinkedGrid,
    }
}

/// Kinked utilities with kinks at every distinct payoff value of the
/// transformation plus `n_fillers` evenly spaced fillers over the payoff
/// range, crossed with `iotas`. The identity utility is always included
/// so risk-neutral refutations are never missed.
pub fn kinked_family_for(
    t: &Transformation,
    n_fillers: usize,
    iotas: &[f64],
) -> UtilityFamily {
    let mut kinks: Vec<f64> = Vec::new();
    for i in 0..t.problem().n_actions() {
        kinks.extend_from_slice(t.pre(i));
        kinks.extend_from_slice(t.post(i));
    }
    let lo = kinks.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = kinks.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        let step = (hi - lo) / (n_fillers as f64 + 1.0);
        for k in 1..=n_fillers {
            kinks.push(lo + step * k as f64);
        }
    }
    kinks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    kinks.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    let mut members = vec![PiecewiseLinearUtility::identity()];
    for &kink in &kinks {
        for &iota in iotas {
            members.push(KinkedUtility::new(kink, iota).expect("valid iota").to_piecewise());
        }
    }
    UtilityFamily {
        members,
        provenance: Provenance::KinkedGrid,
    }
}

/// The default desk-scale iota list.
pub const DEFAULT_IOTAS: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

/// Default family for a transformation: kinks at all payoff values plus 9
/// fillers, the default iota list, and the identity member.
pub fn default_family(t: &Transformation) -> UtilityFamily {
    kinked_family_for(t, 9, &DEFAULT_IOTAS)
}

/// `n` random concave increasing piecewise-linear utilities, each with
/// `knots` linear pieces over `range`. Deterministic in `seed`.
pub fn random_concave_family(seed: u64, n: usize, knots: usize, range: (f64, f64)) -> UtilityFamily {
    assert!(n >= 1 && knots >= 1 && range.0 < range.1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut members = Vec::with_capacity(n);
    for _ in 0..n {
        let mut breakpoints: Vec<f64> = (0..knots - 1)
            .map(|_| rng.gen_range(range.0..range.1))
            .collect();
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breakpoints.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
        let mut slopes = Vec::with_capacity(breakpoints.len() + 1);
        let mut slope = rng.gen_range(0.5..2.0);
        slopes.push(slope);
        for _ in 0..breakpoints.len() {
            slope *= rng.gen_range(0.3..0.95);
            slopes.push(slope);
        }
        members.push(
            PiecewiseLinearUtility::new(breakpoints, slopes, 0.0).expect("construction is valid"),
        );
    }
    UtilityFamily {
        members,
        provenance: Provenance::RandomConcave { seed },
    }
}

/// A finite stand-in for the belief simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefGrid {
    pub beliefs: Vec<Belief>,
    pub resolution: f64,
}

impl BeliefGrid {
    /// All vertices plus every two-state edge sampled at `resolution`.
    pub fn edges(n_states: usize, resolution: f64) -> Self {
        assert!(resolution > 0.0 && resolution <= 1.0);
        let mut beliefs: Vec<Belief> = (0..n_states).map(|s| Belief::vertex(n_states, s)).collect();
        let steps = (1.0 / resolution).round() as usize;
        for lo in 0..n_states {
            for hi in lo + 1..n_states {
                for k in 1..steps {
                    beliefs.push(Belief::edge(n_states, lo, hi, k as f64 / steps as f64));
                }
            }
        }
        Self {
            beliefs,
            resolution,
        }
    }

    /// The full simplex grid at `resolution` (meant for 2 or 3 states),
    /// vertices first.
    pub fn simplex(n_states: usize, resolution: f64) -> Self {
        assert!((2..=3).contains(&n_states));
        if n_states == 2 {
            return Self::edges(2, resolution);
        }
        let steps = (1.0 / resolution).round() as usize;
        let mut beliefs: Vec<Belief> = (0..n_states).map(|s| Belief::vertex(n_states, s)).collect();
        for i in 0..=steps {
            for j in 0..=steps - i {
                let k = steps - i - j;
                if [i, j, k].iter().filter(|&&c| c == steps).count() == 1 {
                    continue;
                }
                let w = |c: usize| c as f64 / steps as f64;
                beliefs.push(Belief::new(vec![w(i), w(j), w(k)]).expect("grid weights sum to 1"));
            }
        }
        Self {
            beliefs,
            resolution,
        }
    }

    /// Full simplex grid for 2-3 states, vertex-and-edge coverage above.
    pub fn for_states(n_states: usize, resolution: f64) -> Self {
        if n_states <= 3 {
            Self::simplex(n_states, resolution)
        } else {
            Self::edges(n_states, resolution)
        }
    }
}

fn refutation_at(
    t: &Transformation,
    u: &PiecewiseLinearUtility,
    belief: &Belief,
    tie_tol: f64,
) -> Option<(Vec<usize>, Vec<usize>)> {
    let pre = optimal_set(&t.pre_table(), belief, u, tie_tol);
    let post = optimal_set(&t.post_table(), belief, u, tie_tol);
    match strong_set_order_dominates(&pre, &post) {
        Ok(true) => None,
        _ => Some((pre, post)),
    }
}

/// Sweep every `(utility, belief)` pair and check that the pre-optimal set
/// dominates the post-optimal set in the strong set order.
///
/// Returns `Refuted` with the first witness in utility-major enumeration
/// order, else `CertifiedHolds` (over this family and grid only).
pub fn verify_reduction(
    t: &Transformation,
    fam: &UtilityFamily,
    grid: &BeliefGrid,
    tie_tol: f64,
) -> Verdict {
    let n_beliefs = grid.beliefs.len();
    let total = fam.members.len() * n_beliefs;
    let fails = |k: &usize| {
        let (ui, bi) = (k / n_beliefs, k % n_beliefs);
        refutation_at(t, &fam.members[ui], &grid.beliefs[bi], tie_tol).is_some()
    };
    #[cfg(feature = "parallel")]
    let first = (0..total).into_par_iter().find_first(fails);
    #[cfg(not(feature = "parallel"))]
    let first = (0..total).find(|k| fails(k));
    build_verdict(t, fam, grid, tie_tol, first)
}

/// Identical sweep without any parallel dispatch, for benchmarking and
/// determinism checks.
pub fn verify_reduction_sequential(
    t: &Transformation,
    fam: &UtilityFamily,
    grid: &BeliefGrid,
    tie_tol: f64,
) -> Verdict {
    let n_beliefs = grid.beliefs.len();
    let total = fam.members.len() * n_beliefs;
    let first = (0..total).find(|k| {
        let (ui, bi) = (k / n_beliefs, k % n_beliefs);
        refutation_at(t, &fam.members[ui], &grid.beliefs[bi], tie_tol).is_some()
    });
    build_verdict(t, fam, grid, tie_tol, first)
}

fn build_verdict(
    t: &Transformation,
    fam: &UtilityFamily,
    grid: &BeliefGrid,
    tie_tol: f64,
    first_failure: Option<usize>,
) -> Verdict {
    match first_failure {
        None => Verdict::certified(),
        Some(k) => {
            let n_beliefs = grid.beliefs.len();
            let (ui, bi) = (k / n_beliefs, k % n_beliefs);
            let u = fam.members[ui].clone();
            let belief = grid.beliefs[bi].clone();
            let (pre, post) =
                refutation_at(t, &u, &belief, tie_tol).expect("failure index replays");
            Verdict::refuted(Witness {
                utility: u,
                belief,
                pre_optimal: pre,
                post_optimal: post,
            })
        }
    }
}

/// Edge-reduction criterion for a binary menu: for every utility in the
/// family and every low/high state pair where the actions disagree, the
/// pre-transformation indifference belief must not exceed the
/// post-transformation one.
pub fn edge_monotonicity_check(
    a: &[f64],
    b: &[f64],
    a_post: &[f64],
    b_post: &[f64],
    fam: &UtilityFamily,
    tol: f64,
) -> bool {
    let part = match partition_states(a, b, tol) {
        Ok(p) => p,
        Err(_) => return false,
    };
    for u in &fam.members {
        for &lo in &part.a_states {
            for &hi in &part.b_states {
                let mu = indifference_belief(a, b, lo, hi, u as &dyn Utility).ok().flatten();
                let mu_hat = indifference_belief(a_post, b_post, lo, hi, u as &dyn Utility)
                    .ok()
                    .flatten();
                match (mu, mu_hat) {
                    (Some(mu), Some(mu_hat)) => {
                        if !geq(mu_hat, mu, tol) {
                            return false;
                        }
                    }
                    _ => return false,
                }
            }
        }
    }
    true
}

/// Default oracle seed, overridable through the `ROBUSTCS_SEED`
/// environment variable by the CLI layer.
pub const DEFAULT_SEED: u64 = 0x5eed_cafe;

/// Convenience: draw a random concave family seeded from the environment
/// override if present.
pub fn seeded(seed_override: Option<u64>) -> u64 {
    seed_override.unwrap_or(DEFAULT_SEED)
}

/// Combined decision procedure: a theorem-backed certificate when the
/// pairwise sufficient condition holds, a refutation when the sweep or the
/// necessity engine finds one, and an explicit indeterminate verdict in
/// the gap between the two conditions.
pub fn decide_reduction(
    t: &Transformation,
    fam: &UtilityFamily,
    grid: &BeliefGrid,
    tie_tol: f64,
) -> Verdict {
    if crate::steepening::pairwise_steeper_all(t, tie_tol) {
        return Verdict::certified();
    }
    let swept = verify_reduction(t, fam, grid, tie_tol);
    if swept.status == VerdictStatus::Refuted {
        return swept;
    }
    if !crate::relevance::relevantly_steeper(t, tie_tol) {
        if let Ok(w) = crate::relevance::necessity_counterexample(t, tie_tol) {
            let pre = optimal_set(&t.pre_table(), &w.belief, &w.utility, tie_tol);
            let post = optimal_set(&t.post_table(), &w.belief, &w.utility, tie_tol);
            return Verdict::refuted(Witness {
                utility: w.utility.to_piecewise(),
                belief: w.belief,
                pre_optimal: pre,
                post_optimal: post,
            });
        }
    }
    Verdict {
        status: VerdictStatus::IndeterminateSearchExhausted,
        witness: None,
    }
}

/// Deterministic helper used by probes: a reproducible RNG.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sample a random belief on `n_states` states.
pub fn random_belief<R: Rng>(rng: &mut R, n_states: usize) -> Belief {
    let mut w: Vec<f64> = (0..n_states).map(|_| rng.gen_range(0.01..1.0)).collect();
    let sum: f64 = w.iter().sum();
    for x in &mut w {
        *x /= sum;
    }
    let correction = 1.0 - w.iter().sum::<f64>();
    w[0] += correction;
    Belief::new(w).expect("normalized weights")
}
