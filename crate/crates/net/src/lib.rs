//! Networked play for the Hearts arena: tables of local or remote entrants
//! with per-action deadlines, knockout tournaments, a TCP server and a
//! reference client.
//!
//! Remote entrants that miss a deadline are kicked for the rest of the table
//! round and replaced by a seeded random bot.

mod client;
mod entrant;
mod log;
mod remote;
mod server;
mod table;
mod tournament;
mod wire;

pub use client::{run_client, ClientConfig, ClientError, ClientStatus, ClientSummary};
pub use entrant::{pad_to, Endpoint, Entrant};
pub use log::ResultsLog;
pub use remote::{RemoteHandle, RequestKey, Routed};
pub use server::{
    format_table, serve, AdminCommand, JoinedPlayer, ServerConfig, ServerError, ServerHandle, ServerStatus,
};
pub use table::{
    enforce_deadline_and_kick, entrant_at, run_table, run_table_with, EntrantResult, GameTranscript, Play,
    PlaySource, TableConfig, TableError, TableResult, TableRun,
};
pub use tournament::{
    advance, bracket_size, compare_standings, interleave, rank_table, run_tournament, run_tournament_with,
    BracketTable, Standing, TournamentEntrant, TournamentResult, TournamentRun,
};
pub use wire::{write_message, FrameReader};
