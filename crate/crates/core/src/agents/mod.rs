//! Policies and the tooling to train and compare them.

mod eval;
mod linear_q;
mod random;
mod rule_based;
mod train;

pub use eval::{evaluate, EntrantStats, EvalError, EvalReport};
pub use linear_q::{
    action_feature_index, feature_index, features, q_value, td_update, Features, GreedyQPolicy, LinearQWeights, PlaySituation,
    Transition, WeightFileError, ACTION_OFFSET, FEATURE_LEN, SCALAR_OFFSET,
};
pub use random::{random_policy, RandomPolicy};
pub use rule_based::{rule_based_policy, RuleBasedPolicy};
pub use train::{
    train_selfplay, CurvePoint, EpsilonSchedule, TrainConfig, TrainError, TrainOutcome,
};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::card::Card;
use crate::env::ObservationVector;

/// Anything that can pick a card from an observation.
///
/// Implementations must return a card whose mask bit is set. Randomness comes
/// only from the supplied rng so that play is reproducible.
pub trait Policy: Send + Sync {
    fn act(&self, observation: &ObservationVector, rng: &mut dyn RngCore) -> Card;
}

impl<P: Policy + ?Sized> Policy for Arc<P> {
    fn act(&self, observation: &ObservationVector, rng: &mut dyn RngCore) -> Card {
        (**self).act(observation, rng)
    }
}

impl<P: Policy + ?Sized> Policy for Box<P> {
    fn act(&self, observation: &ObservationVector, rng: &mut dyn RngCore) -> Card {
        (**self).act(observation, rng)
    }
}

/// Textual policy selector: `random`, `rule`, or `weights:<path>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PolicySpec {
    Random,
    Rule,
    Weights(PathBuf),
}

impl PolicySpec {
    pub fn build(&self) -> Result<Arc<dyn Policy>, WeightFileError> {
        Ok(match self {
            PolicySpec::Random => Arc::new(RandomPolicy),
            PolicySpec::Rule => Arc::new(RuleBasedPolicy),
            PolicySpec::Weights(path) => Arc::new(GreedyQPolicy::new(LinearQWeights::load(path)?)),
        })
    }

    /// Parses a comma-separated list such as `rule,random,random,random`.
    pub fn parse_list(s: &str) -> Result<Vec<PolicySpec>, String> {
        s.split(',').map(|p| p.trim().parse()).collect()
    }
}

impl FromStr for PolicySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(PolicySpec::Random),
            "rule" => Ok(PolicySpec::Rule),
            _ => match s.strip_prefix("weights:") {
                Some(path) if !path.is_empty() => Ok(PolicySpec::Weights(path.into())),
                _ => Err(format!("unknown policy {s:?}; expected random, rule or weights:<path>")),
            },
        }
    }
}

impl TryFrom<String> for PolicySpec {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<PolicySpec> for String {
    fn from(p: PolicySpec) -> String {
        p.to_string()
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Random => f.write_str("random"),
            PolicySpec::Rule => f.write_str("rule"),
            PolicySpec::Weights(p) => write!(f, "weights:{}", p.display()),
        }
    }
}
