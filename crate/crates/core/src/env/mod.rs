//! Turn-based multi-agent environment over the rules engine.
//!
//! Exactly one seat acts per step. Each step returns the observation for the
//! next seat to act together with the rewards produced by the step. Illegal
//! actions are not fatal: a uniformly random legal card is played instead and
//! the acting seat is charged the shaper's illegal-action reward.

mod observation;
mod reward;

pub use observation::{
    encode_observation, ObservationVector, CODE_COLLECTED, CODE_ON_TABLE, CODE_OWN_HAND,
    CODE_UNKNOWN, NUM_CODES,
};
pub use reward::{
    DefaultShaper, QueenAverseShaper, RawPenaltyShaper, RewardShaper, ShaperKind,
    DEFAULT_ILLEGAL_PENALTY,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::card::Card;
use crate::game::{new_game, ActionMask, GameState, RulesConfig, Scores, Seat, TrickEvent};
use crate::seed;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnvError {
    #[error("step called before reset")]
    NotStarted,
    #[error("step called after the game ended")]
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    pub illegal_penalty: f64,
    pub shaper: ShaperKind,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig { illegal_penalty: DEFAULT_ILLEGAL_PENALTY, shaper: ShaperKind::Default }
    }
}

impl RewardConfig {
    pub fn build(&self) -> Box<dyn RewardShaper> {
        self.shaper.build(self.illegal_penalty)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub seat: Seat,
    /// The card actually played, after any substitution.
    pub played: Card,
    pub illegal_action_substituted: bool,
    pub trick: Option<TrickEvent>,
    /// Raw and adjusted scores, once the game is over.
    pub scores: Option<Scores>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// The seat asked to act next and its view, or `None` when the game ended.
    pub next_observation: Option<(Seat, ObservationVector)>,
    /// At most one entry per seat, in seat order.
    pub reward_events: Vec<(Seat, f64)>,
    pub done: bool,
    pub info: StepInfo,
}

pub struct Env {
    rules: RulesConfig,
    shaper: Box<dyn RewardShaper>,
    state: Option<GameState>,
    substitute_rng: ChaCha8Rng,
}

impl Env {
    pub fn new(rules: RulesConfig, shaper: Box<dyn RewardShaper>) -> Env {
        Env { rules, shaper, state: None, substitute_rng: seed::stream(0, &[seed::tag::SUBSTITUTE]) }
    }

    /// Deals a new game and returns the view of the seat holding the two of clubs.
    pub fn reset(&mut self, seed: u64) -> (Seat, ObservationVector) {
        let state = new_game(seed, self.rules);
        self.substitute_rng = seed::stream(seed, &[seed::tag::SUBSTITUTE]);
        let seat = state.to_act();
        let obs = encode_observation(&state, seat);
        self.state = Some(state);
        (seat, obs)
    }

    /// Continues from an arbitrary state; `seed` drives illegal-action substitution.
    pub fn reset_to(&mut self, state: GameState, seed: u64) -> Option<(Seat, ObservationVector)> {
        self.substitute_rng = seed::stream(seed, &[seed::tag::SUBSTITUTE]);
        let next = (!state.is_terminal()).then(|| (state.to_act(), encode_observation(&state, state.to_act())));
        self.state = Some(state);
        next
    }

    pub fn state(&self) -> Option<&GameState> {
        self.state.as_ref()
    }

    pub fn step(&mut self, action: Card) -> Result<StepOutcome, EnvError> {
        let state = self.state.as_mut().ok_or(EnvError::NotStarted)?;
        if state.is_terminal() {
            return Err(EnvError::Terminal);
        }
        let seat = state.to_act();
        let mask = state.legal_actions().expect("non-terminal");
        let mut rewards: [Option<f64>; 4] = [None; 4];
        rewards[seat.index()] = Some(0.0);

        let substituted = !mask.is_legal(action);
        let played = if substituted {
            rewards[seat.index()] = Some(self.shaper.on_illegal(seat));
            random_legal(mask, &mut self.substitute_rng)
        } else {
            action
        };

        let trick = state.play(played).expect("played card is legal");
        if let Some(event) = &trick {
            for s in Seat::ALL {
                *rewards[s.index()].get_or_insert(0.0) += self.shaper.on_trick_end(s, event);
            }
        }
        let scores = state.final_scores().ok();
        if let Some(scores) = &scores {
            for s in Seat::ALL {
                *rewards[s.index()].get_or_insert(0.0) +=
                    self.shaper.on_terminal(s, &scores.raw, &scores.adjusted);
            }
        }

        let done = state.is_terminal();
        let next_observation = (!done).then(|| (state.to_act(), encode_observation(state, state.to_act())));
        Ok(StepOutcome {
            next_observation,
            reward_events: Seat::ALL
                .into_iter()
                .filter_map(|s| rewards[s.index()].map(|r| (s, r)))
                .collect(),
            done,
            info: StepInfo { seat, played, illegal_action_substituted: substituted, trick, scores },
        })
    }
}

/// Creates an environment and deals its first game.
pub fn env_reset(
    seed: u64,
    rules: RulesConfig,
    shaper: Box<dyn RewardShaper>,
) -> (Env, Seat, ObservationVector) {
    let mut env = Env::new(rules, shaper);
    let (seat, obs) = env.reset(seed);
    (env, seat, obs)
}

/// A uniformly random legal card. Panics on an empty mask.
pub fn random_legal<R: Rng + ?Sized>(mask: ActionMask, rng: &mut R) -> Card {
    let n = mask.count();
    assert!(n > 0, "empty action mask");
    mask.iter().nth(rng.gen_range(0..n)).expect("index below count")
}
