//! Long-running server: accepts clients and runs rounds on operator command.

use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use hearts_core::protocol::{decode_message, error_code, Frame, Message, PROTOCOL_VERSION};
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::io::AsyncWriteExt;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::mpsc;
use tokio::task::JoinHandle;

use crate::entrant::{pad_to, Entrant};
use crate::log::ResultsLog;
use crate::remote::{RemoteHandle, Routed};
use crate::table::{run_table_with, TableConfig, TableError, TableResult, TableRun};
use crate::tournament::{bracket_size, run_tournament_with, TournamentResult, TournamentRun};
use crate::wire::FrameReader;

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    pub table: TableConfig,
    /// JSON-lines file that receives one record per game, round and tournament.
    pub results_log: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ServerError {
    #[error("cannot bind {addr}: {source}")]
    Bind { addr: String, source: io::Error },
    #[error("cannot open results log: {0}")]
    Log(io::Error),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("no joined player with id {0}")]
    UnknownPlayer(u64),
    #[error("a table seats at most 4 players, {0} selected")]
    TooManyPlayers(usize),
    #[error("a round is already running")]
    Busy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinedPlayer {
    pub player_id: u64,
    pub name: String,
    pub team: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServerStatus {
    pub joined: Vec<JoinedPlayer>,
    pub round_running: bool,
    pub rounds_completed: u64,
}

/// Operator commands read from the admin console.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdminCommand {
    /// Player ids to seat; empty means the first four joined.
    TableStart(Vec<u64>),
    /// Player ids to enter; empty means everyone joined.
    TournamentStart(Vec<u64>),
    Status,
    Quit,
}

impl AdminCommand {
    pub fn parse(line: &str) -> Result<AdminCommand, String> {
        let words: Vec<&str> = line.split_whitespace().collect();
        let ids = |rest: &[&str]| -> Result<Vec<u64>, String> {
            rest.iter().map(|w| w.parse().map_err(|_| format!("not a player id: {w}"))).collect()
        };
        match words.as_slice() {
            ["table", "start", rest @ ..] => Ok(AdminCommand::TableStart(ids(rest)?)),
            ["tournament", "start", rest @ ..] => Ok(AdminCommand::TournamentStart(ids(rest)?)),
            ["status"] => Ok(AdminCommand::Status),
            ["quit"] | ["exit"] => Ok(AdminCommand::Quit),
            _ => Err(format!(
                "unknown command {:?}; expected `table start [ids]`, `tournament start [ids]`, `status` or `quit`",
                line.trim()
            )),
        }
    }
}

struct Shared {
    cfg: ServerConfig,
    log: Option<ResultsLog>,
    lobby: Mutex<Vec<RemoteHandle>>,
    next_player: AtomicU64,
    next_game_id: AtomicU64,
    rounds_started: AtomicU64,
    rounds_completed: AtomicU64,
    round_lock: tokio::sync::Mutex<()>,
}

/// Control surface of a running server.
pub struct ServerHandle {
    local_addr: SocketAddr,
    shared: Arc<Shared>,
    accept: JoinHandle<()>,
}

/// Binds `addr` and starts accepting clients in the background.
pub async fn serve(addr: &str, cfg: ServerConfig) -> Result<ServerHandle, ServerError> {
    cfg.table.validate()?;
    let log = match &cfg.results_log {
        Some(path) => Some(ResultsLog::open(path).map_err(ServerError::Log)?),
        None => None,
    };
    let listener =
        TcpListener::bind(addr).await.map_err(|source| ServerError::Bind { addr: addr.to_string(), source })?;
    let local_addr = listener.local_addr().map_err(|source| ServerError::Bind { addr: addr.to_string(), source })?;
    let shared = Arc::new(Shared {
        cfg,
        log,
        lobby: Mutex::new(Vec::new()),
        next_player: AtomicU64::new(1),
        next_game_id: AtomicU64::new(1),
        rounds_started: AtomicU64::new(0),
        rounds_completed: AtomicU64::new(0),
        round_lock: tokio::sync::Mutex::new(()),
    });
    let accept_shared = Arc::clone(&shared);
    let accept = tokio::spawn(async move {
        loop {
            match listener.accept().await {
                Ok((stream, peer)) => {
                    let shared = Arc::clone(&accept_shared);
                    tokio::spawn(async move {
                        tracing::debug!(%peer, "connection opened");
                        handle_connection(shared, stream).await;
                        tracing::debug!(%peer, "connection closed");
                    });
                }
                Err(e) => {
                    tracing::warn!("accept failed: {e}");
                    tokio::time::sleep(Duration::from_millis(50)).await;
                }
            }
        }
    });
    Ok(ServerHandle { local_addr, shared, accept })
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn joined(&self) -> Vec<JoinedPlayer> {
        self.shared
            .lobby
            .lock()
            .unwrap()
            .iter()
            .map(|h| JoinedPlayer { player_id: h.id(), name: h.name().to_string(), team: h.team().to_string() })
            .collect()
    }

    /// Polls until at least `n` players have joined or `timeout` passes.
    pub async fn wait_for_players(&self, n: usize, timeout: Duration) -> bool {
        let deadline = tokio::time::Instant::now() + timeout;
        while self.shared.lobby.lock().unwrap().len() < n {
            if tokio::time::Instant::now() >= deadline {
                return false;
            }
            tokio::time::sleep(Duration::from_millis(5)).await;
        }
        true
    }

    pub fn status(&self) -> ServerStatus {
        ServerStatus {
            joined: self.joined(),
            round_running: self.shared.round_lock.try_lock().is_err(),
            rounds_completed: self.shared.rounds_completed.load(Ordering::SeqCst),
        }
    }

    fn select(&self, ids: &[u64], default_len: usize) -> Result<Vec<Entrant>, ServerError> {
        let lobby = self.shared.lobby.lock().unwrap();
        if ids.is_empty() {
            return Ok(lobby.iter().take(default_len).cloned().map(Entrant::remote).collect());
        }
        ids.iter()
            .map(|&id| {
                lobby.iter().find(|h| h.id() == id).cloned().map(Entrant::remote).ok_or(ServerError::UnknownPlayer(id))
            })
            .collect()
    }

    /// Seats up to four joined players, fills the rest with random bots and
    /// plays one table round.
    pub async fn start_table(&self, ids: &[u64]) -> Result<TableResult, ServerError> {
        let _round = self.shared.round_lock.try_lock().map_err(|_| ServerError::Busy)?;
        let mut entrants = self.select(ids, 4)?;
        if entrants.len() > 4 {
            return Err(ServerError::TooManyPlayers(entrants.len()));
        }
        pad_to(&mut entrants, 4);
        let cfg = &self.shared.cfg.table;
        let k = self.shared.rounds_started.fetch_add(1, Ordering::SeqCst);
        let base = self.shared.next_game_id.fetch_add(cfg.n_games, Ordering::SeqCst);
        let run = TableRun { label: format!("table-{k}"), game_id_base: base, log: self.shared.log.as_ref() };
        let result = run_table_with(&entrants, cfg, run).await?;
        self.shared.rounds_completed.fetch_add(1, Ordering::SeqCst);
        Ok(result)
    }

    pub async fn start_tournament(&self, ids: &[u64]) -> Result<TournamentResult, ServerError> {
        let _round = self.shared.round_lock.try_lock().map_err(|_| ServerError::Busy)?;
        let entrants = self.select(ids, usize::MAX)?;
        let cfg = &self.shared.cfg.table;
        let k = self.shared.rounds_started.fetch_add(1, Ordering::SeqCst);
        // A bracket of size n has fewer than n / 2 tables.
        let reserve = cfg.n_games * bracket_size(entrants.len()) as u64;
        let base = self.shared.next_game_id.fetch_add(reserve, Ordering::SeqCst);
        let run = TournamentRun { label: format!("tournament-{k}"), game_id_base: base, log: self.shared.log.as_ref() };
        let result = run_tournament_with(entrants, cfg, run).await?;
        self.shared.rounds_completed.fetch_add(1, Ordering::SeqCst);
        Ok(result)
    }

    /// Runs one console line and returns the text to show the operator.
    /// `None` means the operator asked to quit.
    pub async fn admin(&self, line: &str) -> Option<String> {
        let command = match AdminCommand::parse(line) {
            Ok(c) => c,
            Err(e) => return Some(e),
        };
        Some(match command {
            AdminCommand::Quit => return None,
            AdminCommand::Status => serde_json::to_string(&self.status()).expect("status serializes"),
            AdminCommand::TableStart(ids) => match self.start_table(&ids).await {
                Ok(r) => format_table(&r),
                Err(e) => format!("error: {e}"),
            },
            AdminCommand::TournamentStart(ids) => match self.start_tournament(&ids).await {
                Ok(t) => {
                    let mut out = String::new();
                    for (r, tables) in t.rounds.iter().enumerate() {
                        for (i, table) in tables.iter().enumerate() {
                            out.push_str(&format!("round {r} table {i}\n"));
                            out.push_str(&format_table(&table.result));
                        }
                    }
                    out.push_str(&format!("champion: {}\nfinal order: {}", t.champion, t.final_order.join(", ")));
                    out
                }
                Err(e) => format!("error: {e}"),
            },
        })
    }

    /// Stops accepting connections. Connected clients are dropped.
    pub fn shutdown(&self) {
        self.accept.abort();
        for h in self.shared.lobby.lock().unwrap().drain(..) {
            h.close();
        }
    }
}

pub fn format_table(r: &TableResult) -> String {
    let mut out = format!("{} games\n", r.games);
    for e in &r.entrants {
        out.push_str(&format!(
            "{:<16} total {:>6} mean {:>7.3} places {:?}{}{}\n",
            e.name,
            e.total_adjusted,
            e.mean_adjusted,
            e.placements,
            if e.kicked { " kicked" } else { "" },
            if e.pad { " (pad)" } else { "" },
        ));
    }
    out
}

async fn handle_connection(shared: Arc<Shared>, stream: TcpStream) {
    let _ = stream.set_nodelay(true);
    let (read_half, mut write_half) = stream.into_split();
    let (tx, mut rx) = mpsc::unbounded_channel::<Vec<u8>>();
    let writer = tokio::spawn(async move {
        while let Some(line) = rx.recv().await {
            if write_half.write_all(&line).await.is_err() {
                break;
            }
        }
    });
    let reply = |m: Message| {
        let _ = tx.send(hearts_core::protocol::encode_message(&m));
    };

    let mut reader = FrameReader::new(read_half);
    let mut me: Option<RemoteHandle> = None;
    while let Ok(Some(frame)) = reader.next_frame().await {
        let line = match frame {
            Frame::Line(l) => l,
            Frame::Overlong => {
                reply(Message::error(error_code::MALFORMED, "line too long"));
                continue;
            }
        };
        let message = match decode_message(&line) {
            Ok(m) => m,
            Err(e) => {
                reply(Message::error(error_code::MALFORMED, e.to_string()));
                continue;
            }
        };
        match (message, &me) {
            (Message::Join { name, team }, None) => {
                let id = shared.next_player.fetch_add(1, Ordering::SeqCst);
                let handle = RemoteHandle::new(id, name, team, tx.clone());
                reply(Message::Welcome { player_id: id, protocol_version: PROTOCOL_VERSION });
                shared.lobby.lock().unwrap().push(handle.clone());
                tracing::info!(player_id = id, name = handle.name(), "player joined");
                me = Some(handle);
            }
            (Message::Join { .. }, Some(_)) => reply(Message::error(error_code::ALREADY_JOINED, "already joined")),
            (_, None) => reply(Message::error(error_code::NOT_JOINED, "send join first")),
            (Message::Action { game_id, trick_number, card_index }, Some(h)) => {
                match h.route_action((game_id, trick_number), card_index) {
                    Routed::Delivered => {}
                    Routed::Kicked => reply(Message::error(
                        error_code::KICKED,
                        format!("kicked; action for game {game_id} trick {trick_number} discarded"),
                    )),
                    Routed::Unexpected => reply(Message::error(
                        error_code::UNEXPECTED,
                        format!("no pending request for game {game_id} trick {trick_number}"),
                    )),
                }
            }
            (_, Some(_)) => reply(Message::error(error_code::UNEXPECTED, "clients may only send join and action")),
        }
    }
    if let Some(h) = me {
        h.close();
        shared.lobby.lock().unwrap().retain(|x| x.id() != h.id());
        tracing::info!(player_id = h.id(), "player left");
    }
    writer.abort();
}
