//! Knockout brackets: tables of four, top two of each table advance.

use std::cmp::Ordering;

use hearts_core::seed;
use serde::{Deserialize, Serialize};

use crate::entrant::{pad_to, Entrant};
use crate::log::ResultsLog;
use crate::table::{run_table_with, TableConfig, TableError, TableResult, TableRun};

const COIN_TAG: u64 = 0xC011;

/// What decides the order within one table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Standing {
    pub total_adjusted: u64,
    pub first_places: u64,
    /// Seeded coin; the lower value wins a full tie.
    pub coin: u64,
}

/// Strict order: lower total, then more first places, then the coin.
pub fn compare_standings(a: &Standing, b: &Standing) -> Ordering {
    a.total_adjusted
        .cmp(&b.total_adjusted)
        .then(b.first_places.cmp(&a.first_places))
        .then(a.coin.cmp(&b.coin))
}

/// Indices into `standings`, best first.
pub fn rank_table(standings: &[Standing]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..standings.len()).collect();
    order.sort_by(|&i, &j| compare_standings(&standings[i], &standings[j]).then(i.cmp(&j)));
    order
}

/// The two entrants that advance from a table.
pub fn advance(standings: &[Standing]) -> [usize; 2] {
    let order = rank_table(standings);
    [order[0], order[1]]
}

/// Bracket size for `n` entrants: at least 8, and 4 times a power of two.
pub fn bracket_size(n: usize) -> usize {
    let mut size = 8;
    while size < n {
        size *= 2;
    }
    size
}

/// Table assignment for one round: entrant `i` of the round goes to table
/// `i mod n_tables`.
pub fn interleave(round_entrants: &[usize]) -> Vec<Vec<usize>> {
    let n_tables = round_entrants.len() / 4;
    let mut tables = vec![Vec::with_capacity(4); n_tables];
    for (i, &e) in round_entrants.iter().enumerate() {
        tables[i % n_tables].push(e);
    }
    tables
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketTable {
    /// Global entrant indices in table order.
    pub entrants: Vec<usize>,
    pub standings: Vec<Standing>,
    /// Global entrant indices, best first.
    pub order: Vec<usize>,
    pub result: TableResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentEntrant {
    pub name: String,
    pub pad: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TournamentResult {
    pub entrants: Vec<TournamentEntrant>,
    /// Number of random bots added to fill the bracket.
    pub padded: usize,
    /// `rounds.last()` is the final table.
    pub rounds: Vec<Vec<BracketTable>>,
    pub final_order: Vec<String>,
    pub champion: String,
}

#[derive(Default)]
pub struct TournamentRun<'a> {
    pub label: String,
    pub game_id_base: u64,
    pub log: Option<&'a ResultsLog>,
}

#[derive(Serialize)]
struct TournamentLogRecord<'a> {
    kind: &'static str,
    tournament: &'a str,
    padded: usize,
    final_order: &'a [String],
    champion: &'a str,
}

pub async fn run_tournament(entrants: Vec<Entrant>, cfg: &TableConfig) -> Result<TournamentResult, TableError> {
    run_tournament_with(entrants, cfg, TournamentRun::default()).await
}

/// Plays the whole bracket. Table `t` of round `r` uses the master seed
/// derived from `(cfg.master_seed, r, t)`. Tables run one after another.
pub async fn run_tournament_with(
    mut entrants: Vec<Entrant>,
    cfg: &TableConfig,
    run: TournamentRun<'_>,
) -> Result<TournamentResult, TableError> {
    cfg.validate()?;
    let size = bracket_size(entrants.len());
    let padded = pad_to(&mut entrants, size);
    let mut alive: Vec<usize> = (0..entrants.len()).collect();
    let mut rounds = Vec::new();
    let mut game_id_base = run.game_id_base;

    for round in 0u64.. {
        let mut tables = Vec::new();
        let mut next = Vec::new();
        for (t, seats) in interleave(&alive).into_iter().enumerate() {
            let table_seed = seed::derive_seed(cfg.master_seed, &[round, t as u64]);
            let table_cfg = TableConfig { master_seed: table_seed, ..cfg.clone() };
            let players: Vec<Entrant> = seats.iter().map(|&e| entrants[e].clone()).collect();
            let label = format!("{}r{round}t{t}", prefix(&run.label));
            let result = run_table_with(
                &players,
                &table_cfg,
                TableRun { label, game_id_base, log: run.log },
            )
            .await?;
            game_id_base += cfg.n_games;
            let standings: Vec<Standing> = result
                .entrants
                .iter()
                .enumerate()
                .map(|(i, r)| Standing {
                    total_adjusted: r.total_adjusted,
                    first_places: r.placements[0],
                    coin: seed::derive_seed(table_seed, &[COIN_TAG, i as u64]),
                })
                .collect();
            let order: Vec<usize> = rank_table(&standings).into_iter().map(|i| seats[i]).collect();
            next.extend_from_slice(&order[..2]);
            tables.push(BracketTable { entrants: seats, standings, order, result });
        }
        let is_final = tables.len() == 1;
        rounds.push(tables);
        if is_final {
            break;
        }
        alive = next;
    }

    let final_order: Vec<String> =
        rounds.last().expect("at least one round")[0].order.iter().map(|&e| entrants[e].name.clone()).collect();
    let result = TournamentResult {
        entrants: entrants.iter().map(|e| TournamentEntrant { name: e.name.clone(), pad: e.pad }).collect(),
        padded,
        rounds,
        champion: final_order[0].clone(),
        final_order,
    };
    if let Some(log) = run.log {
        let rec = TournamentLogRecord {
            kind: "tournament",
            tournament: &run.label,
            padded,
            final_order: &result.final_order,
            champion: &result.champion,
        };
        if let Err(e) = log.append(&rec) {
            tracing::warn!("results log write failed: {e}");
        }
    }
    Ok(result)
}

fn prefix(label: &str) -> String {
    if label.is_empty() {
        String::new()
    } else {
        format!("{label}/")
    }
}
