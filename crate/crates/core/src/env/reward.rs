//! Reward shaping hooks.
//!
//! A shaper turns game events into per-seat rewards. The default shaper gives
//! the trick winner minus the trick's penalty and, at the end of the game,
//! corrects for the moon rule, so a seat's episode return equals minus its
//! adjusted score.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::card::Card;
use crate::game::{Seat, TrickEvent};

pub const DEFAULT_ILLEGAL_PENALTY: f64 = 1.0;

pub trait RewardShaper: Send + Sync {
    /// Reward for `seat` when a trick completes. Called for every seat.
    fn on_trick_end(&self, seat: Seat, trick: &TrickEvent) -> f64;

    /// Reward for `seat` when its action was illegal and got replaced.
    fn on_illegal(&self, seat: Seat) -> f64;

    /// Reward for `seat` once the game is over. Called for every seat.
    fn on_terminal(&self, seat: Seat, raw: &[u32; 4], adjusted: &[u32; 4]) -> f64;
}

/// `-penalty` to the trick winner, plus a moon correction at the end.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefaultShaper {
    pub illegal_penalty: f64,
}

impl Default for DefaultShaper {
    fn default() -> Self {
        DefaultShaper { illegal_penalty: DEFAULT_ILLEGAL_PENALTY }
    }
}

impl RewardShaper for DefaultShaper {
    fn on_trick_end(&self, seat: Seat, trick: &TrickEvent) -> f64 {
        if seat == trick.winner {
            -(trick.penalty as f64)
        } else {
            0.0
        }
    }

    fn on_illegal(&self, _seat: Seat) -> f64 {
        -self.illegal_penalty
    }

    fn on_terminal(&self, seat: Seat, raw: &[u32; 4], adjusted: &[u32; 4]) -> f64 {
        let i = seat.index();
        raw[i] as f64 - adjusted[i] as f64
    }
}

/// Trick penalties only; the moon rule never shows up in the reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPenaltyShaper {
    pub illegal_penalty: f64,
}

impl RewardShaper for RawPenaltyShaper {
    fn on_trick_end(&self, seat: Seat, trick: &TrickEvent) -> f64 {
        DefaultShaper { illegal_penalty: self.illegal_penalty }.on_trick_end(seat, trick)
    }

    fn on_illegal(&self, _seat: Seat) -> f64 {
        -self.illegal_penalty
    }

    fn on_terminal(&self, _: Seat, _: &[u32; 4], _: &[u32; 4]) -> f64 {
        0.0
    }
}

/// Default reward plus an extra charge for taking the queen of spades and a
/// small bonus for every clean trick won.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueenAverseShaper {
    pub illegal_penalty: f64,
    pub queen_extra: f64,
    pub clean_trick_bonus: f64,
}

impl RewardShaper for QueenAverseShaper {
    fn on_trick_end(&self, seat: Seat, trick: &TrickEvent) -> f64 {
        if seat != trick.winner {
            return 0.0;
        }
        let has_queen = trick.cards.iter().any(|&(_, c)| c == Card::QUEEN_OF_SPADES);
        let mut r = -(trick.penalty as f64);
        if has_queen {
            r -= self.queen_extra;
        }
        if trick.penalty == 0 {
            r += self.clean_trick_bonus;
        }
        r
    }

    fn on_illegal(&self, _seat: Seat) -> f64 {
        -self.illegal_penalty
    }

    fn on_terminal(&self, seat: Seat, raw: &[u32; 4], adjusted: &[u32; 4]) -> f64 {
        raw[seat.index()] as f64 - adjusted[seat.index()] as f64
    }
}

/// Built-in shapers selectable by name from configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShaperKind {
    #[default]
    Default,
    Raw,
    QueenAverse,
}

impl ShaperKind {
    pub const NAMES: [&'static str; 3] = ["default", "raw", "queen_averse"];

    pub fn build(self, illegal_penalty: f64) -> Box<dyn RewardShaper> {
        match self {
            ShaperKind::Default => Box::new(DefaultShaper { illegal_penalty }),
            ShaperKind::Raw => Box::new(RawPenaltyShaper { illegal_penalty }),
            ShaperKind::QueenAverse => Box::new(QueenAverseShaper {
                illegal_penalty,
                queen_extra: 5.0,
                clean_trick_bonus: 0.1,
            }),
        }
    }
}

impl FromStr for ShaperKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "default" => Ok(ShaperKind::Default),
            "raw" => Ok(ShaperKind::Raw),
            "queen_averse" => Ok(ShaperKind::QueenAverse),
            _ => Err(format!("unknown reward shaper {s:?}; expected one of {:?}", Self::NAMES)),
        }
    }
}

impl fmt::Display for ShaperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ShaperKind::Default => "default",
            ShaperKind::Raw => "raw",
            ShaperKind::QueenAverse => "queen_averse",
        };
        f.write_str(name)
    }
}
