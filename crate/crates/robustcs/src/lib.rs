//! Robust comparative statics for risk-averse decision makers.
//!
//! A *monotone decision problem* is a finite menu of actions over an ordered
//! state grid, each action paying more money in higher states, with the menu
//! totally ordered by single-crossing. A *transformation* rewrites every
//! action's state-contingent payoffs while preserving the ordinal rankings
//! between states and between actions. The question this crate answers:
//! does the transformation push *every* risk-averse expected-utility
//! maximizer toward a lower action, regardless of her belief or utility?
//!
//! The crate provides three layers of machinery:
//!
//! - **Conditions** ([`steepening`], [`relevance`], [`genprefs`]): the
//!   pairwise "made steeper" test (sufficient, and tight for binary menus),
//!   the "relevantly steeper" test (necessary for any menu), and the
//!   mixture-dominance conditions that extend the sufficiency to variational
//!   and smooth-ambiguity preferences.
//! - **Counterexamples** ([`relevance`]): when a necessary condition fails, a
//!   constructive engine produces a kinked utility and an edge belief at
//!   which the optimal action provably moves *up*, replayable through the
//!   core evaluation primitives.
//! - **Brute force** ([`oracle`]): an exhaustive sweep over finite utility
//!   families and belief grids that certifies or refutes a reduction at desk
//!   scale, used as ground truth for everything else.
//!
//! [`apps`] packages the worked applications (portfolio distortions,
//! insurance, repeated-game cooperation, risk-aversion lower bounds, and the
//! two-state feasible-region geometry), and [`doc`] the JSON document format
//! consumed by the CLI.
//!
//! With the default `parallel` feature the oracle sweep and the sampling
//! probes fan out over rayon; disabling it yields a dependency-free
//! sequential build with identical results, including witness selection.

pub mod apps;
pub mod cmp;
pub mod doc;
pub mod genprefs;
pub mod oracle;
pub mod problem;
pub mod region;
pub mod relevance;
pub mod sampling;
pub mod steepening;
pub mod utility;

pub use problem::{
    expected_utility, indifference_belief, optimal_set, strong_set_order_dominates,
    validate_problem, validate_transformation, ActionPayoffs, Belief, CoreError, MonotoneProblem,
    StateGrid, Transformation, Verdict, VerdictStatus, Witness,
};
pub use utility::{KinkedUtility, PiecewiseLinearUtility, Utility};
