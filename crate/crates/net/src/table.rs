//! Running many seeded games between four entrants.

use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use hearts_core::agents::{Policy, RandomPolicy};
use hearts_core::env::{DefaultShaper, Env, ObservationVector};
use hearts_core::game::{placements, RulesConfig, Seat};
use hearts_core::protocol::{Message, RoundEntrant, RoundSummary};
use hearts_core::seed::{self, tag};
use hearts_core::Card;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entrant::{Endpoint, Entrant};
use crate::log::ResultsLog;
use crate::remote::RemoteHandle;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableConfig {
    pub n_games: u64,
    pub n_parallel: usize,
    pub action_timeout_ms: u64,
    pub grace_ms: u64,
    pub master_seed: u64,
    pub rules: RulesConfig,
    /// Keep every card played in the per-game records.
    pub keep_transcripts: bool,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            n_games: 100,
            n_parallel: 16,
            action_timeout_ms: 2000,
            grace_ms: 250,
            master_seed: 0,
            rules: RulesConfig::default(),
            keep_transcripts: false,
        }
    }
}

impl TableConfig {
    pub fn validate(&self) -> Result<(), TableError> {
        let bad = |m: &str| Err(TableError::Config(m.to_string()));
        if self.n_games == 0 {
            return bad("n_games must be positive");
        }
        if self.n_parallel == 0 {
            return bad("n_parallel must be positive");
        }
        if self.n_parallel as u64 > self.n_games {
            return bad("n_parallel must not exceed n_games");
        }
        if self.action_timeout_ms == 0 || self.grace_ms == 0 {
            return bad("timeouts must be positive");
        }
        Ok(())
    }

    /// Upper bound on how long the server waits for one reply.
    pub fn reply_window(&self) -> Duration {
        Duration::from_millis(self.action_timeout_ms + self.grace_ms)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TableError {
    #[error("invalid table config: {0}")]
    Config(String),
    #[error("a table needs exactly 4 entrants, got {0}")]
    Entrants(usize),
}

/// Who produced a played card.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaySource {
    Local,
    Remote,
    /// The server-side bot standing in for a kicked entrant.
    Bot,
    /// A random legal card replacing an illegal choice.
    Substituted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Play {
    pub seat: u8,
    pub card: Card,
    pub source: PlaySource,
}

/// Per-game record. `seating[s]` is the entrant index in seat `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameTranscript {
    pub game_index: u64,
    pub game_id: u64,
    pub seed: u64,
    pub seating: [usize; 4],
    pub raw: [u32; 4],
    pub adjusted: [u32; 4],
    pub placements: [u8; 4],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub plays: Vec<Play>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrantResult {
    pub name: String,
    pub pad: bool,
    pub total_adjusted: u64,
    pub mean_adjusted: f64,
    pub placements: [u64; 4],
    pub kicked: bool,
    pub illegal_actions: u64,
    pub timeouts: u64,
    pub bot_actions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableResult {
    pub games: u64,
    pub entrants: Vec<EntrantResult>,
    /// Every entrant was kicked; the table was finished by bots.
    pub all_kicked: bool,
    /// Highest number of games that were unfinished at the same time.
    pub max_in_flight: usize,
    pub transcripts: Vec<GameTranscript>,
}

impl TableResult {
    pub fn summary(&self) -> RoundSummary {
        RoundSummary {
            games: self.games,
            entrants: self
                .entrants
                .iter()
                .map(|e| RoundEntrant {
                    name: e.name.clone(),
                    total_adjusted: e.total_adjusted,
                    mean_adjusted: e.mean_adjusted,
                    placements: e.placements,
                    kicked: e.kicked,
                })
                .collect(),
        }
    }
}

/// Extra context when a table runs inside a server or tournament.
#[derive(Default)]
pub struct TableRun<'a> {
    pub label: String,
    /// Added to the game index to form wire `game_id`s.
    pub game_id_base: u64,
    pub log: Option<&'a ResultsLog>,
}

#[derive(Serialize)]
struct GameLogRecord<'a> {
    kind: &'static str,
    table: &'a str,
    seating: [&'a str; 4],
    #[serde(flatten)]
    game: &'a GameTranscript,
}

#[derive(Serialize)]
struct RoundLogRecord<'a> {
    kind: &'static str,
    table: &'a str,
    all_kicked: bool,
    entrants: &'a [EntrantResult],
}

#[derive(Default, Clone, Copy)]
struct Counters {
    illegal: u64,
    timeouts: u64,
    bot: u64,
}

struct GameOutcome {
    transcript: GameTranscript,
    counters: [Counters; 4],
}

struct Shared {
    entrants: Vec<Entrant>,
    cfg: TableConfig,
    game_id_base: u64,
    next_game: AtomicU64,
    in_flight: AtomicUsize,
    max_in_flight: AtomicUsize,
    outcomes: Mutex<Vec<Option<GameOutcome>>>,
}

/// Entrant index sitting in `seat` for game `game` under cyclic rotation.
pub fn entrant_at(seat: Seat, game: u64) -> usize {
    (seat.index() + 4 - (game % 4) as usize) % 4
}

pub async fn run_table(entrants: &[Entrant], cfg: &TableConfig) -> Result<TableResult, TableError> {
    run_table_with(entrants, cfg, TableRun::default()).await
}

pub async fn run_table_with(
    entrants: &[Entrant],
    cfg: &TableConfig,
    run: TableRun<'_>,
) -> Result<TableResult, TableError> {
    cfg.validate()?;
    if entrants.len() != 4 {
        return Err(TableError::Entrants(entrants.len()));
    }
    for h in entrants.iter().filter_map(Entrant::remote_handle) {
        h.begin_round();
    }
    let shared = Arc::new(Shared {
        entrants: entrants.to_vec(),
        cfg: cfg.clone(),
        game_id_base: run.game_id_base,
        next_game: AtomicU64::new(0),
        in_flight: AtomicUsize::new(0),
        max_in_flight: AtomicUsize::new(0),
        outcomes: Mutex::new((0..cfg.n_games).map(|_| None).collect()),
    });

    let workers: Vec<_> = (0..cfg.n_parallel)
        .map(|_| {
            let shared = Arc::clone(&shared);
            tokio::spawn(async move {
                loop {
                    let g = shared.next_game.fetch_add(1, Ordering::SeqCst);
                    if g >= shared.cfg.n_games {
                        break;
                    }
                    let now = shared.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
                    shared.max_in_flight.fetch_max(now, Ordering::SeqCst);
                    let outcome = play_game(&shared, g).await;
                    shared.in_flight.fetch_sub(1, Ordering::SeqCst);
                    shared.outcomes.lock().unwrap()[g as usize] = Some(outcome);
                }
            })
        })
        .collect();
    for w in workers {
        w.await.expect("game worker panicked");
    }

    let outcomes: Vec<GameOutcome> =
        std::mem::take(&mut *shared.outcomes.lock().unwrap()).into_iter().map(|o| o.expect("every game played")).collect();
    let result = aggregate(entrants, cfg, outcomes, shared.max_in_flight.load(Ordering::SeqCst));

    if let Some(log) = run.log {
        for t in &result.transcripts {
            let seating = t.seating.map(|e| entrants[e].name.as_str());
            let rec = GameLogRecord { kind: "game", table: &run.label, seating, game: t };
            if let Err(e) = log.append(&rec) {
                tracing::warn!("results log write failed: {e}");
            }
        }
        let rec =
            RoundLogRecord { kind: "round", table: &run.label, all_kicked: result.all_kicked, entrants: &result.entrants };
        if let Err(e) = log.append(&rec) {
            tracing::warn!("results log write failed: {e}");
        }
    }
    let summary = result.summary();
    for h in entrants.iter().filter_map(Entrant::remote_handle) {
        h.send(&Message::RoundResult { summary: summary.clone() });
    }
    Ok(result)
}

fn aggregate(entrants: &[Entrant], cfg: &TableConfig, outcomes: Vec<GameOutcome>, max_in_flight: usize) -> TableResult {
    let mut totals = [0u64; 4];
    let mut hist = [[0u64; 4]; 4];
    let mut counters = [Counters::default(); 4];
    let mut transcripts = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let t = &o.transcript;
        for s in 0..4 {
            let e = t.seating[s];
            totals[e] += t.adjusted[s] as u64;
            hist[e][t.placements[s] as usize - 1] += 1;
        }
        for e in 0..4 {
            counters[e].illegal += o.counters[e].illegal;
            counters[e].timeouts += o.counters[e].timeouts;
            counters[e].bot += o.counters[e].bot;
        }
        let mut t = o.transcript;
        if !cfg.keep_transcripts {
            t.plays.clear();
        }
        transcripts.push(t);
    }
    let kicked: Vec<bool> =
        entrants.iter().map(|e| e.remote_handle().is_some_and(RemoteHandle::is_kicked)).collect();
    let entrant_results = (0..4)
        .map(|e| EntrantResult {
            name: entrants[e].name.clone(),
            pad: entrants[e].pad,
            total_adjusted: totals[e],
            mean_adjusted: totals[e] as f64 / cfg.n_games as f64,
            placements: hist[e],
            kicked: kicked[e],
            illegal_actions: counters[e].illegal,
            timeouts: counters[e].timeouts,
            bot_actions: counters[e].bot,
        })
        .collect();
    TableResult {
        games: cfg.n_games,
        entrants: entrant_results,
        all_kicked: kicked.iter().all(|&k| k),
        max_in_flight,
        transcripts,
    }
}

enum Missed {
    Timeout,
    Gone,
}

/// Sends one `RequestAction` and waits for the matching reply. Times out
/// after the action timeout plus grace; a timeout or a dropped connection
/// kicks the entrant for the rest of the round, and a kick issued by any
/// other game cancels the wait at once.
pub async fn enforce_deadline_and_kick(
    handle: &RemoteHandle,
    game_id: u64,
    obs: &ObservationVector,
    cfg: &TableConfig,
) -> Option<u8> {
    request_remote(handle, game_id, obs, cfg).await.ok()
}

async fn request_remote(
    handle: &RemoteHandle,
    game_id: u64,
    obs: &ObservationVector,
    cfg: &TableConfig,
) -> Result<u8, Missed> {
    if handle.is_kicked() {
        return Err(Missed::Gone);
    }
    let mut kick = handle.kick_watch();
    let key = (game_id, obs.trick_number);
    let reply = handle.expect_reply(key);
    if !handle.send(&Message::request_action(game_id, obs, cfg.action_timeout_ms)) {
        handle.forget(key);
        handle.kick("disconnected");
        return Err(Missed::Gone);
    }
    tokio::select! {
        r = reply => r.map_err(|_| {
            handle.kick("disconnected");
            Missed::Gone
        }),
        _ = tokio::time::sleep(cfg.reply_window()) => {
            handle.forget(key);
            // Requests that expire together with the one that kicks are
            // cancellations, not further timeouts.
            if handle.kick("action timeout") {
                Err(Missed::Timeout)
            } else {
                Err(Missed::Gone)
            }
        }
        _ = kick.wait_for(|k| *k) => {
            handle.forget(key);
            Err(Missed::Gone)
        }
    }
}

fn rotate<T: Copy>(values: [T; 4], seat: Seat) -> [T; 4] {
    std::array::from_fn(|k| values[(seat.index() + k) % 4])
}

async fn play_game(shared: &Shared, g: u64) -> GameOutcome {
    let cfg = &shared.cfg;
    let master = cfg.master_seed;
    let game_id = shared.game_id_base + g;
    let deal_seed = seed::derive_seed(master, &[g, tag::DEAL]);
    let seating: [usize; 4] = std::array::from_fn(|s| entrant_at(Seat::new(s), g));
    let mut policy_rngs: Vec<_> = (0..4).map(|s| seed::stream(master, &[g, tag::SEAT_POLICY + s])).collect();
    let mut bot_rngs: Vec<_> = (0..4).map(|s| seed::stream(master, &[g, tag::SEAT_BOT + s])).collect();
    let mut counters = [Counters::default(); 4];
    let mut plays = Vec::with_capacity(52);

    let mut env = Env::new(cfg.rules.clone(), Box::new(DefaultShaper::default()));
    let (mut seat, mut obs) = env.reset(deal_seed);
    let scores = loop {
        let e = seating[seat.index()];
        let (card, mut source) = match &shared.entrants[e].endpoint {
            Endpoint::Local(p) => (p.act(&obs, &mut policy_rngs[seat.index()]), PlaySource::Local),
            Endpoint::Remote(h) => match request_remote(h, game_id, &obs, cfg).await {
                Ok(index) => (Card::new(index).expect("validated on decode"), PlaySource::Remote),
                Err(missed) => {
                    if matches!(missed, Missed::Timeout) {
                        counters[e].timeouts += 1;
                    }
                    counters[e].bot += 1;
                    (RandomPolicy.act(&obs, &mut bot_rngs[seat.index()]), PlaySource::Bot)
                }
            },
        };
        let outcome = env.step(card).expect("game in progress");
        if outcome.info.illegal_action_substituted {
            counters[e].illegal += 1;
            source = PlaySource::Substituted;
        }
        plays.push(Play { seat: seat.index() as u8, card: outcome.info.played, source });
        if let Some(trick) = &outcome.info.trick {
            // Let other games in flight make progress even when every
            // entrant is local.
            tokio::task::yield_now().await;
            for s in Seat::ALL {
                if let Some(h) = live_remote(shared, seating[s.index()]) {
                    h.send(&Message::TrickResult {
                        game_id,
                        winner_offset: trick.winner.relative_to(s) as u8,
                        penalty: trick.penalty,
                    });
                }
            }
        }
        match outcome.next_observation {
            Some((s, o)) => (seat, obs) = (s, o),
            None => break outcome.info.scores.expect("terminal scores"),
        }
    };
    let ranks = placements(scores.adjusted);
    for s in Seat::ALL {
        if let Some(h) = live_remote(shared, seating[s.index()]) {
            h.send(&Message::GameResult {
                game_id,
                raw: rotate(scores.raw, s),
                adjusted: rotate(scores.adjusted, s),
                placements: rotate(ranks, s),
            });
        }
    }
    GameOutcome {
        transcript: GameTranscript {
            game_index: g,
            game_id,
            seed: deal_seed,
            seating,
            raw: scores.raw,
            adjusted: scores.adjusted,
            placements: ranks,
            plays,
        },
        counters,
    }
}

fn live_remote(shared: &Shared, e: usize) -> Option<&RemoteHandle> {
    shared.entrants[e].remote_handle().filter(|h| !h.is_kicked())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_cyclic() {
        for g in 0..8u64 {
            let seats: Vec<usize> = Seat::ALL.iter().map(|&s| entrant_at(s, g)).collect();
            let mut sorted = seats.clone();
            sorted.sort();
            assert_eq!(sorted, vec![0, 1, 2, 3]);
            assert_eq!(entrant_at(Seat::new((g % 4) as usize), g), 0);
        }
    }

    #[test]
    fn rotate_puts_recipient_first() {
        assert_eq!(rotate([10, 11, 12, 13], Seat::new(2)), [12, 13, 10, 11]);
    }

    #[test]
    fn config_validation() {
        assert!(TableConfig::default().validate().is_ok());
        let c = TableConfig { n_parallel: 200, ..TableConfig::default() };
        assert!(c.validate().is_err());
        let c = TableConfig { grace_ms: 0, ..TableConfig::default() };
        assert!(c.validate().is_err());
        let c = TableConfig { n_games: 0, n_parallel: 0, ..TableConfig::default() };
        assert!(c.validate().is_err());
    }
}
