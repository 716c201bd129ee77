//! Newline-delimited JSON messages exchanged between server and clients.
//!
//! Every message is a single JSON object on one line with a `"type"` tag:
//!
//! ```text
//! {"type":"join","name":"duck","team":"blue"}
//! {"type":"action","game_id":3,"trick_number":1,"card_index":0}
//! ```
//!
//! Masks travel as 13 hex digits; card index 0 is the lowest bit of the last digit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::card::{Card, DECK_SIZE};
use crate::env::ObservationVector;
use crate::game::{ActionMask, NUM_TRICKS, TOTAL_PENALTY};

pub const PROTOCOL_VERSION: u32 = 1;
/// Lines longer than this are rejected by [`LineFramer`].
pub const MAX_LINE_BYTES: usize = 64 * 1024;

pub mod error_code {
    pub const MALFORMED: &str = "MALFORMED";
    pub const KICKED: &str = "KICKED";
    pub const NOT_JOINED: &str = "NOT_JOINED";
    pub const ALREADY_JOINED: &str = "ALREADY_JOINED";
    pub const UNEXPECTED: &str = "UNEXPECTED";
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("malformed message: {detail}")]
    MalformedMessage { detail: String },
}

fn malformed(detail: impl Into<String>) -> ProtocolError {
    ProtocolError::MalformedMessage { detail: detail.into() }
}

/// Observation as sent on the wire: 52 state codes plus
/// `[trick / 13, hearts broken, penalty on table]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireObservation {
    pub card_states: Vec<u8>,
    pub scalars: [f64; 3],
}

impl WireObservation {
    pub fn from_observation(obs: &ObservationVector) -> WireObservation {
        WireObservation { card_states: obs.card_states.to_vec(), scalars: obs.scalars() }
    }

    pub fn to_observation(&self, mask: ActionMask) -> Result<ObservationVector, ProtocolError> {
        let states: [u8; DECK_SIZE] = self
            .card_states
            .as_slice()
            .try_into()
            .map_err(|_| malformed(format!("expected 52 card_states, got {}", self.card_states.len())))?;
        ObservationVector::from_parts(states, self.scalars, mask).map_err(malformed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundEntrant {
    pub name: String,
    pub total_adjusted: u64,
    pub mean_adjusted: f64,
    pub placements: [u64; 4],
    pub kicked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub games: u64,
    pub entrants: Vec<RoundEntrant>,
}

/// Every message of the protocol. Score arrays in `GameResult` are rotated
/// so that index 0 is the recipient's own seat, matching observation offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Join { name: String, team: String },
    Action { game_id: u64, trick_number: u8, card_index: u8 },
    Welcome { player_id: u64, protocol_version: u32 },
    RequestAction { game_id: u64, observation: WireObservation, mask: String, deadline_ms: u64 },
    TrickResult { game_id: u64, winner_offset: u8, penalty: u32 },
    GameResult { game_id: u64, raw: [u32; 4], adjusted: [u32; 4], placements: [u8; 4] },
    Kicked { reason: String },
    RoundResult { summary: RoundSummary },
    Error { code: String, detail: String },
}

impl Message {
    pub fn request_action(game_id: u64, obs: &ObservationVector, deadline_ms: u64) -> Message {
        Message::RequestAction {
            game_id,
            observation: WireObservation::from_observation(obs),
            mask: obs.mask.to_hex(),
            deadline_ms,
        }
    }

    pub fn error(code: &str, detail: impl Into<String>) -> Message {
        Message::Error { code: code.into(), detail: detail.into() }
    }

    /// The observation (with mask) carried by a `RequestAction`.
    pub fn observation(&self) -> Option<Result<ObservationVector, ProtocolError>> {
        match self {
            Message::RequestAction { observation, mask, .. } => Some(
                ActionMask::from_hex(mask)
                    .ok_or_else(|| malformed(format!("bad mask {mask:?}")))
                    .and_then(|m| observation.to_observation(m)),
            ),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        match self {
            Message::Action { trick_number, card_index, .. } => {
                check_trick(*trick_number)?;
                Card::new(*card_index).map_err(|e| malformed(e.to_string()))?;
            }
            Message::RequestAction { deadline_ms, .. } => {
                if *deadline_ms == 0 {
                    return Err(malformed("deadline_ms must be positive"));
                }
                self.observation().expect("request")?;
            }
            Message::TrickResult { winner_offset, penalty, .. } => {
                if *winner_offset > 3 {
                    return Err(malformed(format!("winner_offset {winner_offset} out of range")));
                }
                if *penalty > TOTAL_PENALTY {
                    return Err(malformed(format!("penalty {penalty} out of range")));
                }
            }
            Message::GameResult { raw, adjusted, placements, .. } => {
                if raw.iter().chain(adjusted).any(|&s| s > TOTAL_PENALTY) {
                    return Err(malformed("score out of range"));
                }
                if placements.iter().any(|p| !(1..=4).contains(p)) {
                    return Err(malformed("placement out of range"));
                }
            }
            Message::RoundResult { summary } => {
                if summary.entrants.iter().any(|e| !e.mean_adjusted.is_finite()) {
                    return Err(malformed("non-finite mean"));
                }
            }
            Message::Join { .. } | Message::Welcome { .. } | Message::Kicked { .. } | Message::Error { .. } => {}
        }
        Ok(())
    }
}

fn check_trick(t: u8) -> Result<(), ProtocolError> {
    if (1..=NUM_TRICKS).contains(&t) {
        Ok(())
    } else {
        Err(malformed(format!("trick_number {t} out of range")))
    }
}

/// One JSON object followed by a single `\n`.
pub fn encode_message(message: &Message) -> Vec<u8> {
    let mut line = serde_json::to_vec(message).expect("messages serialize");
    line.push(b'\n');
    line
}

/// Parses one line (with or without its trailing newline) and checks ranges.
pub fn decode_message(line: &[u8]) -> Result<Message, ProtocolError> {
    let line = line.strip_suffix(b"\n").unwrap_or(line);
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    if line.contains(&b'\n') {
        return Err(malformed("embedded newline"));
    }
    let message: Message = serde_json::from_slice(line).map_err(|e| malformed(e.to_string()))?;
    message.validate()?;
    Ok(message)
}

/// Reassembles newline-terminated lines from arbitrary byte chunks.
#[derive(Debug, Default)]
pub struct LineFramer {
    buf: Vec<u8>,
    discarding: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Frame {
    Line(Vec<u8>),
    /// A line exceeded [`MAX_LINE_BYTES`]; its bytes were dropped.
    Overlong,
}

impl LineFramer {
    pub fn new() -> LineFramer {
        LineFramer::default()
    }

    /// Feeds bytes and returns every frame completed by them.
    pub fn push(&mut self, bytes: &[u8]) -> Vec<Frame> {
        let mut frames = Vec::new();
        for chunk in bytes.split_inclusive(|&b| b == b'\n') {
            let complete = chunk.last() == Some(&b'\n');
            let body = if complete { &chunk[..chunk.len() - 1] } else { chunk };
            if !self.discarding {
                self.buf.extend_from_slice(body);
                if self.buf.len() > MAX_LINE_BYTES {
                    self.buf.clear();
                    self.discarding = true;
                    frames.push(Frame::Overlong);
                }
            }
            if complete {
                if !self.discarding {
                    frames.push(Frame::Line(std::mem::take(&mut self.buf)));
                }
                self.discarding = false;
            }
        }
        frames
    }

    /// Bytes of an unfinished line.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }
}
