//! Epsilon-greedy linear Q-learning for one seat against fixed opponents.

use std::io;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::linear_q::{features, td_update, Features, LinearQWeights, Transition};
use super::{Policy, PolicySpec, WeightFileError};
use crate::card::Card;
use crate::env::{Env, RewardConfig};
use crate::game::{RulesConfig, Seat};
use crate::seed::{self, tag};

/// Linear decay from `start` to `end` over the first `decay_fraction` of training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_fraction: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule { start: 0.5, end: 0.05, decay_fraction: 0.5 }
    }
}

impl EpsilonSchedule {
    pub fn at(&self, game: u64, total_games: u64) -> f64 {
        let horizon = self.decay_fraction * total_games as f64;
        let progress = if horizon <= 0.0 { 1.0 } else { (game as f64 / horizon).min(1.0) };
        self.start + (self.end - self.start) * progress
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub games: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub opponents: Vec<PolicySpec>,
    pub seed: u64,
    pub reward: RewardConfig,
    pub rules: RulesConfig,
    /// Games per point of the training curve.
    pub curve_window: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            games: 100_000,
            alpha: 0.01,
            gamma: 1.0,
            epsilon: EpsilonSchedule::default(),
            opponents: vec![PolicySpec::Random; 3],
            seed: 0,
            reward: RewardConfig::default(),
            rules: RulesConfig::default(),
            curve_window: 1000,
        }
    }
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("cannot build opponent: {0}")]
    Opponent(#[from] WeightFileError),
    #[error("training diverged in game {game}: {detail}")]
    Diverged { game: u64, detail: String },
    #[error("cannot write training curve: {0}")]
    Io(#[from] io::Error),
}

/// Mean adjusted score of the learner over one window of training games.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Number of games played at the end of the window.
    pub game_window: u64,
    pub mean_adjusted_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub weights: LinearQWeights,
    pub curve: Vec<CurvePoint>,
}

impl TrainOutcome {
    pub fn write_curve_csv<W: io::Write>(&self, out: W) -> Result<(), TrainError> {
        let mut writer = csv::Writer::from_writer(out);
        for point in &self.curve {
            writer.serialize(point).map_err(io::Error::from)?;
        }
        writer.flush()?;
        Ok(())
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::Config(m.into()));
        if self.games == 0 {
            return bad("games must be at least 1");
        }
        if self.opponents.len() != 3 {
            return bad("exactly 3 opponents are required");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        let e = &self.epsilon;
        if !(0.0..=1.0).contains(&e.start) || !(0.0..=1.0).contains(&e.end) || !(0.0..=1.0).contains(&e.decay_fraction) {
            return bad("epsilon schedule values must lie in [0, 1]");
        }
        if self.curve_window == 0 {
            return bad("curve_window must be at least 1");
        }
        Ok(())
    }
}

struct Pending {
    phi: Features,
    reward: f64,
}

/// Trains a linear Q-function by playing `config.games` games. The learner's
/// seat rotates with the game index; the three opponents fill the other seats
/// in order.
pub fn train_selfplay(config: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    let opponents: Vec<Arc<dyn Policy>> =
        config.opponents.iter().map(PolicySpec::build).collect::<Result<_, _>>()?;
    let mut weights = LinearQWeights::zeros(config.clone());
    let mut env = Env::new(config.rules, config.reward.build());
    let mut curve = Vec::new();
    let mut window_sum = 0u64;
    let mut window_len = 0u64;

    for game in 0..config.games {
        let learner = Seat::new((game % 4) as usize);
        let epsilon = config.epsilon.at(game, config.games);
        let mut rngs: Vec<_> = (0..4)
            .map(|s| seed::stream(config.seed, &[game, tag::SEAT_POLICY + s]))
            .collect();
        let (mut seat, mut obs) = env.reset(seed::derive_seed(config.seed, &[game, tag::DEAL]));
        let mut pending: Option<Pending> = None;

        let adjusted = loop {
            let card = if seat == learner {
                let candidates: Vec<(Card, Features)> =
                    obs.mask.iter().map(|c| (c, features(&obs, c))).collect();
                if let Some(p) = pending.take() {
                    let t = Transition {
                        phi: p.phi,
                        reward: p.reward,
                        next: candidates.iter().map(|(_, f)| f.clone()).collect(),
                        terminal: false,
                    };
                    td_update(&mut weights.w, &t, config.alpha, config.gamma)
                        .map_err(|detail| TrainError::Diverged { game, detail })?;
                }
                let rng = &mut rngs[seat.index()];
                let chosen = if rng.gen::<f64>() < epsilon {
                    rng.gen_range(0..candidates.len())
                } else {
                    greedy_index(&weights.w, &candidates)
                };
                let (card, phi) = candidates.into_iter().nth(chosen).unwrap();
                pending = Some(Pending { phi, reward: 0.0 });
                card
            } else {
                let opponent = &opponents[(seat.index() + 3 - learner.index()) % 4];
                opponent.act(&obs, &mut rngs[seat.index()])
            };

            let outcome = env.step(card).expect("game in progress");
            if let Some(p) = pending.as_mut() {
                for &(s, r) in &outcome.reward_events {
                    if s == learner {
                        p.reward += r;
                    }
                }
            }
            match outcome.next_observation {
                Some((s, o)) => {
                    seat = s;
                    obs = o;
                }
                None => {
                    if let Some(p) = pending.take() {
                        let t = Transition { phi: p.phi, reward: p.reward, next: vec![], terminal: true };
                        td_update(&mut weights.w, &t, config.alpha, config.gamma)
                            .map_err(|detail| TrainError::Diverged { game, detail })?;
                    }
                    break outcome.info.scores.expect("terminal scores").adjusted[learner.index()];
                }
            }
        };

        window_sum += adjusted as u64;
        window_len += 1;
        if window_len == config.curve_window || game + 1 == config.games {
            curve.push(CurvePoint {
                game_window: game + 1,
                mean_adjusted_score: window_sum as f64 / window_len as f64,
            });
            window_sum = 0;
            window_len = 0;
        }
    }
    Ok(TrainOutcome { weights, curve })
}

fn greedy_index(w: &[f64], candidates: &[(Card, Features)]) -> usize {
    let mut best = 0;
    let mut best_q = f64::NEG_INFINITY;
    for (i, (_, phi)) in candidates.iter().enumerate() {
        let q = phi.dot(w);
        if q > best_q {
            best = i;
            best_q = q;
        }
    }
    best
}

