//! Linear action-value function over sparse one-hot features.
//!
//! Layout of the 731-dimensional feature vector:
//!
//! | range     | meaning                                                   |
//! |-----------|-----------------------------------------------------------|
//! | 0..520    | `card * 10 + code` one-hot of each card's state code      |
//! | 520..728  | one-hot of `(action, situation)`, see [`PlaySituation`]    |
//! | 728..731  | trick / 13, hearts broken, penalty on the table           |
//!
//! The code-0 ("unknown") slot of each card is reserved and never set, so a
//! feature vector has at most 56 non-zero entries.
//!
//! The action block is split by situation because the state blocks do not
//! depend on the action: with a bare action one-hot the greedy policy would
//! collapse to one fixed card ranking for the whole game.

use std::fs;
use std::io;
use std::path::Path;

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::train::TrainConfig;
use super::Policy;
use crate::card::{Card, DECK_SIZE};
use crate::env::{ObservationVector, CODE_UNKNOWN, NUM_CODES};

pub const ACTION_OFFSET: usize = DECK_SIZE * NUM_CODES;
pub const SCALAR_OFFSET: usize = ACTION_OFFSET + DECK_SIZE * PlaySituation::COUNT;
pub const FEATURE_LEN: usize = SCALAR_OFFSET + 3;

const FILE_FORMAT: &str = "hearts-linear-q";
const FILE_VERSION: u32 = 1;

pub fn feature_index(card: Card, code: u8) -> usize {
    card.index() * NUM_CODES + code as usize
}

/// How a candidate card relates to the trick on the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaySituation {
    Lead = 0,
    /// Follows suit below the current winning card.
    Duck = 1,
    /// Follows suit and currently takes the trick.
    Overtake = 2,
    /// Off-suit card while void in the lead suit.
    Discard = 3,
}

impl PlaySituation {
    pub const COUNT: usize = 4;

    pub fn of(observation: &ObservationVector, action: Card) -> PlaySituation {
        let table = observation.table();
        let Some(&(_, lead_card)) = table.first() else {
            return PlaySituation::Lead;
        };
        let lead = lead_card.suit();
        if action.suit() != lead {
            return PlaySituation::Discard;
        }
        let winning = table.iter().filter(|(_, c)| c.suit() == lead).map(|(_, c)| c.rank()).max();
        if winning.is_some_and(|w| action.rank() < w) {
            PlaySituation::Duck
        } else {
            PlaySituation::Overtake
        }
    }
}

pub fn action_feature_index(action: Card, situation: PlaySituation) -> usize {
    ACTION_OFFSET + action.index() * PlaySituation::COUNT + situation as usize
}

/// Sparse feature vector as `(index, value)` pairs in ascending index order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Features(pub Vec<(usize, f64)>);

impl Features {
    pub fn dot(&self, w: &[f64]) -> f64 {
        self.0.iter().map(|&(i, v)| w[i] * v).sum()
    }

    pub fn nnz(&self) -> usize {
        self.0.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; FEATURE_LEN];
        for &(i, v) in &self.0 {
            dense[i] = v;
        }
        dense
    }
}

pub fn features(observation: &ObservationVector, action: Card) -> Features {
    let mut phi = Vec::with_capacity(56);
    for card in Card::all() {
        let code = observation.card_states[card.index()];
        if code != CODE_UNKNOWN {
            phi.push((feature_index(card, code), 1.0));
        }
    }
    phi.push((action_feature_index(action, PlaySituation::of(observation, action)), 1.0));
    for (k, v) in observation.scalars().into_iter().enumerate() {
        if v != 0.0 {
            phi.push((SCALAR_OFFSET + k, v));
        }
    }
    Features(phi)
}

pub fn q_value(w: &[f64], observation: &ObservationVector, action: Card) -> f64 {
    features(observation, action).dot(w)
}

/// One learning transition. `next` holds the features of every legal action
/// at the learner's next decision point and is ignored when `terminal`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub phi: Features,
    pub reward: f64,
    pub next: Vec<Features>,
    pub terminal: bool,
}

/// Semi-gradient Q-learning step `w += alpha * delta * phi`, with
/// `delta = r + gamma * max_a' w.phi' - w.phi`. Returns `delta`.
///
/// The weights are left untouched when the step would produce a non-finite value.
pub fn td_update(w: &mut [f64], t: &Transition, alpha: f64, gamma: f64) -> Result<f64, String> {
    let bootstrap = if t.terminal || t.next.is_empty() {
        0.0
    } else {
        t.next.iter().map(|f| f.dot(w)).fold(f64::NEG_INFINITY, f64::max)
    };
    let delta = t.reward + gamma * bootstrap - t.phi.dot(w);
    if !delta.is_finite() {
        return Err(format!("non-finite TD error {delta} (reward {})", t.reward));
    }
    for &(i, v) in &t.phi.0 {
        let updated = w[i] + alpha * delta * v;
        if !updated.is_finite() {
            return Err(format!("weight {i} would become {updated}"));
        }
    }
    for &(i, v) in &t.phi.0 {
        w[i] += alpha * delta * v;
    }
    Ok(delta)
}

#[derive(Debug, Error)]
pub enum WeightFileError {
    #[error("cannot access weight file: {0}")]
    Io(#[from] io::Error),
    #[error("weight file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("weight file rejected: {0}")]
    Invalid(String),
}

/// Learned weights together with the configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearQWeights {
    pub w: Vec<f64>,
    pub config: TrainConfig,
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    format: String,
    version: u32,
    feature_len: usize,
    config: TrainConfig,
    weights: Vec<f64>,
}

impl LinearQWeights {
    pub fn zeros(config: TrainConfig) -> LinearQWeights {
        LinearQWeights { w: vec![0.0; FEATURE_LEN], config }
    }

    /// Greedy action: the legal card with the largest Q-value, lowest index on ties.
    pub fn greedy(&self, observation: &ObservationVector) -> Card {
        let mut best: Option<(Card, f64)> = None;
        for card in observation.mask.iter() {
            let q = q_value(&self.w, observation, card);
            if best.map_or(true, |(_, b)| q > b) {
                best = Some((card, q));
            }
        }
        best.expect("empty action mask").0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WeightFile {
            format: FILE_FORMAT.into(),
            version: FILE_VERSION,
            feature_len: FEATURE_LEN,
            config: self.config.clone(),
            weights: self.w.clone(),
        })
        .expect("weights serialize")
    }

    pub fn from_json(text: &str) -> Result<LinearQWeights, WeightFileError> {
        let file: WeightFile = serde_json::from_str(text)?;
        let invalid = |m: String| Err(WeightFileError::Invalid(m));
        if file.format != FILE_FORMAT {
            return invalid(format!("unknown format {:?}", file.format));
        }
        if file.version != FILE_VERSION {
            return invalid(format!("unsupported version {}", file.version));
        }
        if file.feature_len != FEATURE_LEN || file.weights.len() != FEATURE_LEN {
            return invalid(format!(
                "expected {FEATURE_LEN} weights, header says {} and file holds {}",
                file.feature_len,
                file.weights.len()
            ));
        }
        if file.weights.iter().any(|w| !w.is_finite()) {
            return invalid("non-finite weight".into());
        }
        Ok(LinearQWeights { w: file.weights, config: file.config })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), WeightFileError> {
        Ok(fs::write(path, self.to_json())?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<LinearQWeights, WeightFileError> {
        LinearQWeights::from_json(&fs::read_to_string(path)?)
    }
}

/// Plays greedily with respect to learned weights.
#[derive(Debug, Clone)]
pub struct GreedyQPolicy {
    weights: LinearQWeights,
}

impl GreedyQPolicy {
    pub fn new(weights: LinearQWeights) -> GreedyQPolicy {
        GreedyQPolicy { weights }
    }

    pub fn weights(&self) -> &LinearQWeights {
        &self.weights
    }
}

impl Policy for GreedyQPolicy {
    fn act(&self, observation: &ObservationVector, _rng: &mut dyn RngCore) -> Card {
        self.weights.greedy(observation)
    }
}
