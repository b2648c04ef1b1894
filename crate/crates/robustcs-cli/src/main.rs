//! Command-line front end: reads JSON problem documents, runs the steepening
//! checks, the verification oracle, the counterexample constructors, the
//! region emitter, and the application presets.
//!
//! Exit codes: 0 = condition holds / certified, 1 = condition fails /
//! refuted, 2 = indeterminate, 64 = input error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use robustcs::apps::{
    insurance_reduces, insurance_reduces_exact, insurance_transformation, lower_bound_transform_check,
    pd_cooperation_preserved, sigma_reduces, InsuranceSpec, PDSpec, SigmaDistortion,
};
use robustcs::doc::ProblemDocument;
use robustcs::genprefs::made_commonly_steeper;
use robustcs::oracle::{default_family, random_concave_family, BeliefGrid, DEFAULT_SEED};
use robustcs::region::{region_to_json, regions_to_svg, two_state_feasible_region, RegionCondition};
use robustcs::relevance::{
    binary_necessity_counterexample, necessity_counterexample, relevantly_steeper,
    CounterexampleWitness,
};
use robustcs::steepening::{made_steeper, pairwise_steeper_all, partition_states};
use robustcs::{KinkedUtility, PiecewiseLinearUtility, Transformation, VerdictStatus};

const EXIT_HOLDS: u8 = 0;
const EXIT_FAILS: u8 = 1;
const EXIT_INDETERMINATE: u8 = 2;
const EXIT_INPUT: u8 = 64;

#[derive(Parser)]
#[command(name = "robustcs", about = "Robust comparative statics checks for monotone menus")]
struct Cli {
    /// Tolerance for all inequality checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise and necessary steepening conditions.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Sweep the oracle over a utility family and belief grid.
    Verify {
        path: PathBuf,
        /// Replay the witness embedded in a previous report instead of
        /// searching.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Construct a counterexample when the steepening conditions fail.
    Refute { path: PathBuf },
    /// Emit the feasible-move polygon for one action of a two-state menu.
    Region {
        path: PathBuf,
        #[arg(long)]
        target: usize,
        #[arg(long, value_enum, default_value_t = ConditionArg::Eu)]
        condition: ConditionArg,
        /// Write an SVG rendering here in addition to the JSON report.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Application presets.
    App {
        #[command(subcommand)]
        which: AppKind,
    },
}

#[derive(Subcommand)]
enum CheckKind {
    /// Every ordered pair of actions is made steeper.
    Steeper { path: PathBuf },
    /// The necessary condition: relevant actions steepen per state pair.
    Relevant { path: PathBuf },
    /// Every ordered pair is made commonly steeper (regular preferences).
    Common { path: PathBuf },
}

#[derive(Subcommand)]
enum AppKind {
    /// Insurance repricing: does coverage demand rise for every risk-averse
    /// agent?
    Insurance(InsuranceArgs),
    /// Risky-asset return distortion: is demand never increasing?
    Invest(InvestArgs),
    /// Repeated prisoner's dilemma: is cooperation preserved at every
    /// discount factor?
    Pd(PdArgs),
    /// Composing payoffs with a concave v: the ordinal lower-bound check.
    Lowerbound(LowerBoundArgs),
}

#[derive(Args)]
struct InsuranceArgs {
    #[arg(long)]
    price: f64,
    #[arg(long)]
    price_post: f64,
    #[arg(long)]
    loss: f64,
    #[arg(long)]
    loss_post: f64,
    /// Comma-separated coverage grid (defaults to 0,L/2,L).
    #[arg(long, value_delimiter = ',')]
    coverage: Option<Vec<f64>>,
}

#[derive(Args)]
struct InvestArgs {
    /// Comma-separated return grid containing 0.
    #[arg(long, value_delimiter = ',')]
    returns: Vec<f64>,
    /// Comma-separated distorted returns, aligned with --returns.
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<f64>,
}

#[derive(Args)]
struct PdArgs {
    #[arg(long)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long)]
    alpha_hat: f64,
    #[arg(long)]
    beta_hat: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma_hat: f64,
    #[arg(long)]
    rho_hat: f64,
}

#[derive(Args)]
struct LowerBoundArgs {
    /// Document holding the pre-transformation menu.
    path: PathBuf,
    /// Kink location of v (identity if omitted).
    #[arg(long)]
    kink: Option<f64>,
    /// Slope of v above the kink.
    #[arg(long, default_value_t = 0.5)]
    iota: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConditionArg {
    Eu,
    Regular,
}

#[derive(Serialize)]
struct PairReport {
    lower: String,
    higher: String,
    holds: bool,
    /// Smallest slack of the steepness-ratio inequality over the pair's
    /// low/high state combinations (absent when no combination applies).
    #[serde(skip_serializing_if = "Option::is_none")]
    min_slack: Option<f64>,
}

#[derive(Serialize)]
struct CheckReport {
    command: String,
    holds: bool,
    tol: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pairs: Vec<PairReport>,
}

#[derive(Serialize, Deserialize)]
struct RefuteReport {
    command: String,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<CounterexampleWitness>,
}

fn fail_input(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

fn load_transformation(path: &PathBuf) -> Result<Transformation, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = ProblemDocument::parse(&text).map_err(|e| e.to_string())?;
    doc.to_transformation().map_err(|e| e.to_string())
}

fn pair_slack(t: &Transformation, i: usize, j: usize, tol: f64) -> Option<f64> {
    let (a, b) = (t.pre(i), t.pre(j));
    let (a_post, b_post) = (t.post(i), t.post(j));
    let part = partition_states(a, b, tol).ok()?;
    let mut min_slack: Option<f64> = None;
    for &lo in &part.a_states {
        for &hi in &part.b_states {
            let den_low = a[lo] - b[lo];
            let den_high = b_post[hi].min(b[hi]) - a[hi];
            if den_low <= tol || den_high <= tol {
                continue;
            }
            let lhs = (a_post[lo].min(a[lo]) - b_post[lo]) / den_low;
            let rhs = (b_post[hi] - a_post[hi]) / den_high;
            let slack = lhs - rhs;
            min_slack = Some(min_slack.map_or(slack, |m: f64| m.min(slack)));
        }
    }
    min_slack
}

fn run_check(kind: &CheckKind, tol: f64) -> ExitCode {
    let (label, path) = match kind {
        CheckKind::Steeper { path } => ("check steeper", path),
        CheckKind::Relevant { path } => ("check relevant", path),
        CheckKind::Common { path } => ("check common", path),
    };
    let t = match load_transformation(path) {
        Ok(t) => t,
        Err(e) => return fail_input(e),
    };
    let n = t.problem().n_actions();
    let mut pairs = Vec::new();
    let holds = match kind {
        CheckKind::Steeper { .. } => {
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push(PairReport {
                        lower: t.problem().actions()[i].name.clone(),
                        higher: t.problem().actions()[j].name.clone(),
                        holds: made_steeper(t.pre(i), t.pre(j), t.post(i), t.post(j), tol),
                        min_slack: pair_slack(&t, i, j, tol),
                    });
                }
            }
            pairwise_steeper_all(&t, tol)
        }
        CheckKind::Relevant { .. } => relevantly_steeper(&t, tol),
        CheckKind::Common { .. } => {
            for i in 0..n {
                for j in i + 1..n {
                    pairs.push(PairReport {
                        lower: t.problem().actions()[i].name.clone(),
                        higher: t.problem().actions()[j].name.clone(),
                        holds: made_commonly_steeper(t.pre(i), t.pre(j), t.post(i), t.post(j), tol),
                        min_slack: None,
                    });
                }
            }
            pairs.iter().all(|p| p.holds)
        }
    };
    let report = CheckReport {
        command: label.to_string(),
        holds,
        tol,
        pairs,
    };
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    ExitCode::from(if holds { EXIT_HOLDS } else { EXIT_FAILS })
}

fn env_seed() -> u64 {
    std::env::var("ROBUSTCS_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED)
}

fn run_verify(path: &PathBuf, replay: &Option<PathBuf>, tol: f64) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail_input(format!("{}: {e}", path.display())),
    };
    let doc = match ProblemDocument::parse(&text) {
        Ok(d) => d,
        Err(e) => return fail_input(e),
    };
    let t = match doc.to_transformation() {
        Ok(t) => t,
        Err(e) => return fail_input(e),
    };

    if let Some(report_path) = replay {
        let report_text = match fs::read_to_string(report_path) {
            Ok(r) => r,
            Err(e) => return fail_input(format!("{}: {e}", report_path.display())),
        };
        let report: RefuteReport = match serde_json::from_str(&report_text) {
            Ok(r) => r,
            Err(e) => return fail_input(format!("replay report: {e}")),
        };
        let Some(witness) = report.witness else {
            return fail_input("replay report carries no witness");
        };
        let replays = witness.replays(&t, tol);
        println!(
            "{}",
            serde_json::json!({
                "command": "verify --replay",
                "status": if replays { "Refuted" } else { "WitnessDoesNotReplay" },
                "witness": witness,
            })
        );
        return ExitCode::from(if replays { EXIT_FAILS } else { EXIT_INDETERMINATE });
    }

    let settings = doc.oracle.clone().unwrap_or_default();
    let seed = settings.seed.unwrap_or_else(env_seed);
    let mut fam = default_family(&t);
    let range = t
        .pre_table()
        .iter()
        .chain(t.post_table().iter())
        .flat_map(|r| r.iter())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    fam.members
        .extend(random_concave_family(seed, 8, 4, (range.0 - 1.0, range.1 + 1.0)).members);
    let grid = BeliefGrid::for_states(t.problem().n_states(), settings.belief_resolution);
    let verdict = robustcs::oracle::decide_reduction(&t, &fam, &grid, tol);
    println!(
        "{}",
        serde_json::json!({
            "command": "verify",
            "status": format!("{:?}", verdict.status),
            "witness": verdict.witness,
            "utilities": fam.len(),
            "beliefs": grid.beliefs.len(),
            "seed": seed,
        })
    );
    ExitCode::from(match verdict.status {
        VerdictStatus::CertifiedHolds => EXIT_HOLDS,
        VerdictStatus::Refuted => EXIT_FAILS,
        VerdictStatus::IndeterminateSearchExhausted => EXIT_INDETERMINATE,
    })
}

fn run_refute(path: &PathBuf, tol: f64) -> ExitCode {
    let t = match load_transformation(path) {
        Ok(t) => t,
        Err(e) => return fail_input(e),
    };
    if pairwise_steeper_all(&t, tol) {
        let report = RefuteReport {
            command: "refute".into(),
            status: "ConditionsHold".into(),
            witness: None,
        };
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return ExitCode::from(EXIT_HOLDS);
    }
    let witness = if t.problem().n_actions() == 2 {
        binary_necessity_counterexample(t.pre(0), t.pre(1), t.post(0), t.post(1), tol)
    } else if !relevantly_steeper(&t, tol) {
        necessity_counterexample(&t, tol)
    } else {
        let report = RefuteReport {
            command: "refute".into(),
            status: "IndeterminateSearchExhausted".into(),
            witness: None,
        };
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        return ExitCode::from(EXIT_INDETERMINATE);
    };
    match witness {
        Ok(w) => {
            let report = RefuteReport {
                command: "refute".into(),
                status: "Refuted".into(),
                witness: Some(w),
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::from(EXIT_FAILS)
        }
        Err(e) => {
            let report = RefuteReport {
                command: "refute".into(),
                status: format!("IndeterminateSearchExhausted ({e})"),
                witness: None,
            };
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            ExitCode::from(EXIT_INDETERMINATE)
        }
    }
}

fn run_region(
    path: &PathBuf,
    target: usize,
    condition: ConditionArg,
    svg: &Option<PathBuf>,
) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail_input(format!("{}: {e}", path.display())),
    };
    let doc = match ProblemDocument::parse(&text) {
        Ok(d) => d,
        Err(e) => return fail_input(e),
    };
    let problem = match doc.to_problem() {
        Ok(p) => p,
        Err(e) => return fail_input(e),
    };
    // Post rows already present in the document pin the other actions.
    let moved: Vec<Option<Vec<f64>>> = problem
        .actions()
        .iter()
        .map(|sorted| {
            doc.actions
                .iter()
                .find(|a| a.name == sorted.name)
                .and_then(|a| a.post.clone())
        })
        .collect();
    let cond = match condition {
        ConditionArg::Eu => RegionCondition::Eu,
        ConditionArg::Regular => RegionCondition::Regular,
    };
    match two_state_feasible_region(&problem, &moved, target, cond) {
        Ok(region) => {
            println!("{}", region_to_json(&region));
            if let Some(svg_path) = svg {
                if let Err(e) = fs::write(svg_path, regions_to_svg(std::slice::from_ref(&region))) {
                    return fail_input(format!("{}: {e}", svg_path.display()));
                }
            }
            ExitCode::from(EXIT_HOLDS)
        }
        Err(e) => fail_input(e),
    }
}

fn run_app(which: &AppKind, tol: f64) -> ExitCode {
    match which {
        AppKind::Insurance(a) => {
            let coverage = a
                .coverage
                .clone()
                .unwrap_or_else(|| vec![0.0, a.loss / 2.0, a.loss]);
            let closed = insurance_reduces(a.price, a.price_post, a.loss, a.loss_post);
            let exact =
                match insurance_reduces_exact(a.price, a.price_post, a.loss, a.loss_post, &coverage)
                {
                    Ok(v) => v,
                    Err(e) => return fail_input(e),
                };
            let spec = match InsuranceSpec::new(a.loss, a.price, coverage) {
                Ok(s) => s,
                Err(e) => return fail_input(e),
            };
            let computed = insurance_transformation(&spec, a.price_post, a.loss_post)
                .map(|t| pairwise_steeper_all(&t, tol) && relevantly_steeper(&t, tol))
                .unwrap_or(false);
            println!(
                "{}",
                serde_json::json!({
                    "command": "app insurance",
                    "closed_form_price_and_loss": closed,
                    "grid_exact": exact,
                    "menu_checks": computed,
                })
            );
            ExitCode::from(if exact { EXIT_HOLDS } else { EXIT_FAILS })
        }
        AppKind::Invest(a) => {
            let sigma = match SigmaDistortion::new(a.returns.clone(), a.sigma.clone()) {
                Ok(s) => s,
                Err(e) => return fail_input(e),
            };
            let reduces = sigma_reduces(&sigma);
            println!(
                "{}",
                serde_json::json!({"command": "app invest", "reduces": reduces})
            );
            ExitCode::from(if reduces { EXIT_HOLDS } else { EXIT_FAILS })
        }
        AppKind::Pd(a) => {
            let spec = match PDSpec::new(
                a.beta,
                a.gamma,
                a.alpha_hat,
                a.beta_hat,
                a.gamma_hat,
                a.rho_hat,
            ) {
                Ok(s) => s,
                Err(e) => return fail_input(e),
            };
            let preserved = pd_cooperation_preserved(&spec);
            println!(
                "{}",
                serde_json::json!({"command": "app pd", "cooperation_preserved": preserved})
            );
            ExitCode::from(if preserved { EXIT_HOLDS } else { EXIT_FAILS })
        }
        AppKind::Lowerbound(a) => {
            let text = match fs::read_to_string(&a.path) {
                Ok(t) => t,
                Err(e) => return fail_input(format!("{}: {e}", a.path.display())),
            };
            let doc = match ProblemDocument::parse(&text) {
                Ok(d) => d,
                Err(e) => return fail_input(e),
            };
            let problem = match doc.to_problem() {
                Ok(p) => p,
                Err(e) => return fail_input(e),
            };
            let v = match a.kink {
                Some(k) => match KinkedUtility::new(k, a.iota) {
                    Ok(u) => u.to_piecewise(),
                    Err(e) => return fail_input(e),
                },
                None => PiecewiseLinearUtility::identity(),
            };
            match lower_bound_transform_check(&problem, &v) {
                Ok(ok) => {
                    println!(
                        "{}",
                        serde_json::json!({"command": "app lowerbound", "reduces": ok})
                    );
                    ExitCode::from(if ok { EXIT_HOLDS } else { EXIT_FAILS })
                }
                Err(e) => fail_input(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Check { kind } => run_check(kind, cli.tol),
        Command::Verify { path, replay } => run_verify(path, replay, cli.tol),
        Command::Refute { path } => run_refute(path, cli.tol),
        Command::Region {
            path,
            target,
            condition,
            svg,
        } => run_region(path, *target, *condition, svg),
        Command::App { which } => run_app(which, cli.tol),
    }
}
