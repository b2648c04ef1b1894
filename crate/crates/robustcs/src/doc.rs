//! Document model: JSON-facing problem/transformation descriptions, the
//! preference-functional schema, and oracle settings.
//!
//! Documents round-trip losslessly: parse → serialize → parse is a fixpoint.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genprefs::PreferenceFunctional;
use crate::problem::{
    validate_problem, validate_transformation, ActionPayoffs, Belief, CoreError, MonotoneProblem,
    StateGrid, Transformation,
};
use crate::utility::{KinkedUtility, PiecewiseLinearUtility, UtilityError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {0}")]
    SchemaVersion(u32),
    #[error("document has no post payoffs for action `{0}`")]
    MissingPost(String),
    #[error("functional spec: {0}")]
    BadFunctional(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
}

/// One menu action: payoffs before and (optionally) after the transformation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionDoc {
    pub name: String,
    pub pre: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<Vec<f64>>,
}

/// Serializable utility description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UtilitySpec {
    Identity,
    Kinked { kink: f64, iota: f64 },
    Piecewise {
        breakpoints: Vec<f64>,
        slopes: Vec<f64>,
        anchor: f64,
    },
}

impl UtilitySpec {
    pub fn build(&self) -> Result<PiecewiseLinearUtility, DocError> {
        Ok(match self {
            Self::Identity => PiecewiseLinearUtility::identity(),
            Self::Kinked { kink, iota } => KinkedUtility::new(*kink, *iota)?.to_piecewise(),
            Self::Piecewise {
                breakpoints,
                slopes,
                anchor,
            } => PiecewiseLinearUtility::new(breakpoints.clone(), slopes.clone(), *anchor)?,
        })
    }
}

/// Serializable preference functional description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalSpec {
    Eu {
        belief: Vec<f64>,
        u: UtilitySpec,
    },
    Variational {
        beliefs: Vec<Vec<f64>>,
        costs: Vec<f64>,
        u: UtilitySpec,
    },
    SmoothAmbiguity {
        beliefs: Vec<Vec<f64>>,
        prior: Vec<f64>,
        u: UtilitySpec,
        phi: UtilitySpec,
    },
    Multiplier {
        beliefs: Vec<Vec<f64>>,
        reference: Vec<f64>,
        theta: f64,
        u: UtilitySpec,
    },
}

impl FunctionalSpec {
    pub fn build(&self) -> Result<PreferenceFunctional, DocError> {
        let belief = |w: &Vec<f64>| Belief::new(w.clone()).map_err(DocError::from);
        let beliefs = |ws: &Vec<Vec<f64>>| -> Result<Vec<Belief>, DocError> {
            if ws.is_empty() {
                return Err(DocError::BadFunctional("empty belief grid".into()));
            }
            ws.iter().map(|w| belief(&w.clone())).collect()
        };
        Ok(match self {
            Self::Eu { belief: b, u } => PreferenceFunctional::Eu {
                belief: belief(b)?,
                u: u.build()?,
            },
            Self::Variational { beliefs: bs, costs, u } => {
                if costs.len() != bs.len() || costs.iter().any(|&c| c < 0.0) {
                    return Err(DocError::BadFunctional(
                        "costs must be nonnegative, one per belief".into(),
                    ));
                }
                PreferenceFunctional::Variational {
                    beliefs: beliefs(bs)?,
                    costs: costs.clone(),
                    u: u.build()?,
                }
            }
            Self::SmoothAmbiguity {
                beliefs: bs,
                prior,
                u,
                phi,
            } => {
                if prior.len() != bs.len() || (prior.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(DocError::BadFunctional(
                        "prior must be a distribution over the belief grid".into(),
                    ));
                }
                PreferenceFunctional::SmoothAmbiguity {
                    beliefs: beliefs(bs)?,
                    prior: prior.clone(),
                    u: u.build()?,
                    phi: phi.build()?,
                }
            }
            Self::Multiplier {
                beliefs: bs,
                reference,
                theta,
                u,
            } => {
                if *theta <= 0.0 {
                    return Err(DocError::BadFunctional("theta must be positive".into()));
                }
                PreferenceFunctional::multiplier(beliefs(bs)?, &belief(reference)?, *theta, u.build()?)
            }
        })
    }
}

/// Oracle sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_resolution")]
    pub belief_resolution: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_resolution() -> f64 {
    0.01
}

fn default_tol() -> f64 {
    crate::cmp::EPS
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            seed: None,
            belief_resolution: default_resolution(),
            tol: default_tol(),
        }
    }
}

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemDocument {
    pub schema_version: u32,
    pub states: Vec<f64>,
    pub actions: Vec<ActionDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional: Option<FunctionalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSettings>,
}

impl ProblemDocument {
    pub fn parse(text: &str) -> Result<Self, DocError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| DocError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(DocError::SchemaVersion(doc.schema_version));
        }
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    /// Validated pre-transformation menu. Actions are re-sorted into menu
    /// order by the validator; the document itself is left untouched.
    pub fn to_problem(&self) -> Result<MonotoneProblem, DocError> {
        let grid = StateGrid::new(self.states.clone())?;
        let actions = self
            .actions
            .iter()
            .map(|a| ActionPayoffs::new(a.name.clone(), a.pre.clone()))
            .collect();
        Ok(validate_problem(grid, actions)?)
    }

    /// Validated transformation; every action needs a post row.
    pub fn to_transformation(&self) -> Result<Transformation, DocError> {
        let problem = self.to_problem()?;
        let post = problem
            .actions()
            .iter()
            .map(|sorted| {
                let doc_action = self
                    .actions
                    .iter()
                    .find(|a| a.name == sorted.name)
                    .expect("validated problem only contains document actions");
                doc_action
                    .post
                    .clone()
                    .ok_or_else(|| DocError::MissingPost(sorted.name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(validate_transformation(problem, post)?)
    }

    /// Document for a bare problem (no transformation).
    pub fn from_problem(problem: &MonotoneProblem) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            states: problem.grid().states().to_vec(),
            actions: problem
                .actions()
                .iter()
                .map(|a| ActionDoc {
                    name: a.name.clone(),
                    pre: a.payoffs.clone(),
                    post: None,
                })
                .collect(),
            functional: None,
            oracle: None,
        }
    }

    pub fn from_transformation(t: &Transformation) -> Self {
        let mut doc = Self::from_problem(t.problem());
        for (i, a) in doc.actions.iter_mut().enumerate() {
            a.post = Some(t.post(i).to_vec());
        }
        doc
    }
}
