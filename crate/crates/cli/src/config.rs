//! The resolved run configuration: defaults, then the config file, then flags.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use hearts_core::agents::{EpsilonSchedule, PolicySpec, TrainConfig};
use hearts_core::env::{RewardConfig, ShaperKind, DEFAULT_ILLEGAL_PENALTY};
use hearts_core::game::RulesConfig;
use hearts_net::{ClientConfig, TableConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rules: RulesConfig,
    pub env: EnvSection,
    pub reward: RewardSection,
    pub training: TrainingSection,
    pub eval: EvalSection,
    pub table: TableSection,
    pub tournament: TournamentSection,
    pub server: ServerSection,
    pub client: ClientSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    /// Reward charged when an action is illegal and gets substituted.
    pub illegal_penalty: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        EnvSection { illegal_penalty: DEFAULT_ILLEGAL_PENALTY }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub shaper: ShaperKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub games: u64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: EpsilonSchedule,
    pub opponents: Vec<PolicySpec>,
    pub seed: u64,
    pub curve_window: u64,
    pub out: PathBuf,
    pub curve: PathBuf,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainingSection {
            games: t.games,
            alpha: t.alpha,
            gamma: t.gamma,
            epsilon: t.epsilon,
            opponents: t.opponents,
            seed: t.seed,
            curve_window: t.curve_window,
            out: "weights.json".into(),
            curve: "training_curve.csv".into(),
        }
    }
}

/// Shared by `simulate` and `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub games: u64,
    pub seed: u64,
    pub policies: Vec<PolicySpec>,
    pub rotate: bool,
    pub out: PathBuf,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            games: 10_000,
            seed: 0,
            policies: vec![PolicySpec::Random; 4],
            rotate: true,
            out: "results.csv".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TableSection {
    pub n_games: u64,
    pub n_parallel: usize,
    pub action_timeout_ms: u64,
    pub grace_ms: u64,
    pub master_seed: u64,
}

impl Default for TableSection {
    fn default() -> Self {
        let t = TableConfig::default();
        TableSection {
            n_games: t.n_games,
            n_parallel: t.n_parallel,
            action_timeout_ms: t.action_timeout_ms,
            grace_ms: t.grace_ms,
            master_seed: t.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TournamentSection {
    /// Local entrants; fewer than 8 are padded with random bots.
    pub entrants: Vec<PolicySpec>,
    pub out: PathBuf,
    pub results_log: Option<PathBuf>,
}

impl Default for TournamentSection {
    fn default() -> Self {
        TournamentSection {
            entrants: vec![PolicySpec::Rule, PolicySpec::Random],
            out: "tournament.json".into(),
            results_log: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub listen: String,
    pub results_log: Option<PathBuf>,
}

impl Default for ServerSection {
    fn default() -> Self {
        ServerSection { listen: "127.0.0.1:7878".into(), results_log: Some("results.jsonl".into()) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClientSection {
    pub server: String,
    pub name: String,
    pub team: String,
    pub policy: PolicySpec,
    pub margin_ms: u64,
    pub seed: u64,
    pub stay: bool,
}

impl Default for ClientSection {
    fn default() -> Self {
        let c = ClientConfig::default();
        ClientSection {
            server: c.server,
            name: c.name,
            team: c.team,
            policy: c.policy,
            margin_ms: c.margin_ms,
            seed: c.seed,
            stay: c.stay,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| anyhow::anyhow!("invalid config {}: {e}", path.display()))
    }

    pub fn reward(&self) -> RewardConfig {
        RewardConfig { illegal_penalty: self.env.illegal_penalty, shaper: self.reward.shaper }
    }

    pub fn train_config(&self) -> TrainConfig {
        let t = &self.training;
        TrainConfig {
            games: t.games,
            alpha: t.alpha,
            gamma: t.gamma,
            epsilon: t.epsilon,
            opponents: t.opponents.clone(),
            seed: t.seed,
            reward: self.reward(),
            rules: self.rules,
            curve_window: t.curve_window,
        }
    }

    pub fn table_config(&self) -> TableConfig {
        let t = &self.table;
        TableConfig {
            n_games: t.n_games,
            n_parallel: t.n_parallel,
            action_timeout_ms: t.action_timeout_ms,
            grace_ms: t.grace_ms,
            master_seed: t.master_seed,
            rules: self.rules,
            keep_transcripts: false,
        }
    }

    pub fn client_config(&self) -> ClientConfig {
        let c = &self.client;
        ClientConfig {
            server: c.server.clone(),
            name: c.name.clone(),
            team: c.team.clone(),
            policy: c.policy.clone(),
            margin_ms: c.margin_ms,
            seed: c.seed,
            stay: c.stay,
        }
    }

    /// Checks everything a run could trip over before any work starts.
    pub fn validate(&self) -> Result<(), String> {
        if !self.env.illegal_penalty.is_finite() || self.env.illegal_penalty < 0.0 {
            return Err("env.illegal_penalty must be a non-negative number".into());
        }
        self.train_config().validate().map_err(|e| e.to_string())?;
        if self.eval.games == 0 {
            return Err("eval.games must be at least 1".into());
        }
        if self.eval.policies.len() != 4 {
            return Err(format!("eval.policies needs exactly 4 entries, got {}", self.eval.policies.len()));
        }
        self.table_config().validate().map_err(|e| e.to_string())?;
        if self.tournament.entrants.is_empty() {
            return Err("tournament.entrants must not be empty".into());
        }
        if self.server.listen.parse::<SocketAddr>().is_err() {
            return Err(format!("server.listen is not a socket address: {}", self.server.listen));
        }
        if self.client.margin_ms >= self.table.action_timeout_ms {
            return Err("client.margin_ms must be smaller than table.action_timeout_ms".into());
        }
        Ok(())
    }
}
