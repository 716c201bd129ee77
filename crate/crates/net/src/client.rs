//! Reference client: plays a local policy against a server.

use std::io;
use std::time::Duration;

use hearts_core::agents::{PolicySpec, WeightFileError};
use hearts_core::protocol::{decode_message, Frame, Message, RoundSummary, PROTOCOL_VERSION};
use hearts_core::seed;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::net::TcpStream;
use tokio::time::Instant;

use crate::wire::{write_message, FrameReader};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClientConfig {
    pub server: String,
    pub name: String,
    pub team: String,
    pub policy: PolicySpec,
    /// Replies are due this long before the server's deadline.
    pub margin_ms: u64,
    pub seed: u64,
    /// Keep playing after a `RoundResult` instead of exiting.
    pub stay: bool,
}

impl Default for ClientConfig {
    fn default() -> Self {
        ClientConfig {
            server: "127.0.0.1:7878".into(),
            name: "player".into(),
            team: String::new(),
            policy: PolicySpec::Random,
            margin_ms: 200,
            seed: 0,
            stay: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("cannot load policy: {0}")]
    Policy(#[from] WeightFileError),
    #[error("cannot connect to {addr}: {source}")]
    Connect { addr: String, source: io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClientStatus {
    RoundComplete,
    Kicked,
    Disconnected,
    Error(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientSummary {
    pub player_id: Option<u64>,
    pub games: u64,
    pub total_adjusted: u64,
    pub mean_adjusted: f64,
    pub requests: u64,
    /// Replies sent after `deadline - margin`.
    pub late_replies: u64,
    pub errors_received: u64,
    pub status: ClientStatus,
    pub round: Option<RoundSummary>,
}

struct Tally {
    player_id: Option<u64>,
    games: u64,
    total: u64,
    requests: u64,
    late: u64,
    errors: u64,
    round: Option<RoundSummary>,
}

impl Tally {
    fn finish(self, status: ClientStatus) -> ClientSummary {
        ClientSummary {
            player_id: self.player_id,
            games: self.games,
            total_adjusted: self.total,
            mean_adjusted: if self.games == 0 { 0.0 } else { self.total as f64 / self.games as f64 },
            requests: self.requests,
            late_replies: self.late,
            errors_received: self.errors,
            status,
            round: self.round,
        }
    }
}

/// Joins, answers every `RequestAction` in arrival order and returns when
/// the round ends, the client is kicked or the connection drops.
pub async fn run_client(cfg: &ClientConfig) -> Result<ClientSummary, ClientError> {
    let policy = cfg.policy.build()?;
    let stream = TcpStream::connect(&cfg.server)
        .await
        .map_err(|source| ClientError::Connect { addr: cfg.server.clone(), source })?;
    let _ = stream.set_nodelay(true);
    let (read_half, mut write_half) = stream.into_split();
    let mut reader = FrameReader::new(read_half);
    let mut rng = seed::stream(cfg.seed, &[]);
    let mut tally = Tally { player_id: None, games: 0, total: 0, requests: 0, late: 0, errors: 0, round: None };

    let join = Message::Join { name: cfg.name.clone(), team: cfg.team.clone() };
    if let Err(e) = write_message(&mut write_half, &join).await {
        return Ok(tally.finish(ClientStatus::Error(e.to_string())));
    }

    loop {
        let line = match reader.next_frame().await {
            Ok(Some(Frame::Line(l))) => l,
            Ok(Some(Frame::Overlong)) => {
                tracing::warn!("server sent an overlong line");
                continue;
            }
            Ok(None) => return Ok(tally.finish(ClientStatus::Disconnected)),
            Err(e) => return Ok(tally.finish(ClientStatus::Error(e.to_string()))),
        };
        let received = Instant::now();
        let message = match decode_message(&line) {
            Ok(m) => m,
            Err(e) => {
                tracing::warn!("undecodable server line: {e}");
                continue;
            }
        };
        match message {
            Message::Welcome { player_id, protocol_version } => {
                if protocol_version != PROTOCOL_VERSION {
                    let detail = format!("server speaks protocol {protocol_version}, client {PROTOCOL_VERSION}");
                    return Ok(tally.finish(ClientStatus::Error(detail)));
                }
                tally.player_id = Some(player_id);
            }
            ref request @ Message::RequestAction { game_id, deadline_ms, .. } => {
                let obs = match request.observation().expect("request carries an observation") {
                    Ok(o) => o,
                    Err(e) => {
                        tracing::warn!("bad observation for game {game_id}: {e}");
                        continue;
                    }
                };
                tally.requests += 1;
                let card = policy.act(&obs, &mut rng);
                let reply = Message::Action { game_id, trick_number: obs.trick_number, card_index: card.index() as u8 };
                let budget = Duration::from_millis(deadline_ms.saturating_sub(cfg.margin_ms));
                if received.elapsed() > budget {
                    tally.late += 1;
                }
                if let Err(e) = write_message(&mut write_half, &reply).await {
                    return Ok(tally.finish(ClientStatus::Error(e.to_string())));
                }
            }
            Message::GameResult { adjusted, .. } => {
                tally.games += 1;
                tally.total += adjusted[0] as u64;
            }
            Message::Kicked { reason } => {
                tracing::warn!("kicked: {reason}");
                return Ok(tally.finish(ClientStatus::Kicked));
            }
            Message::RoundResult { summary } => {
                tally.round = Some(summary);
                if !cfg.stay {
                    return Ok(tally.finish(ClientStatus::RoundComplete));
                }
            }
            Message::Error { code, detail } => {
                tally.errors += 1;
                tracing::warn!("server error {code}: {detail}");
            }
            Message::TrickResult { .. } | Message::Join { .. } | Message::Action { .. } => {}
        }
    }
}
