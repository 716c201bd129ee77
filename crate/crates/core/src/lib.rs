//! Hearts as a multi-agent learning arena.
//!
//! - [`card`] and [`game`]: an exact rules engine with action masks, scoring and
//!   the moon rule.
//! - [`env`]: a turn-based environment with per-seat observations and pluggable
//!   reward shaping.
//! - [`agents`]: random and rule-based baselines, a linear Q-learner trained by
//!   self-play, and an evaluation harness.
//! - [`protocol`]: the newline-delimited JSON wire format used by the server and
//!   clients.

pub mod agents;
pub mod card;
pub mod env;
pub mod game;
pub mod protocol;
pub mod seed;

pub use card::{Card, CardSet, Suit};
pub use game::{ActionMask, GameState, RulesConfig, Seat};
