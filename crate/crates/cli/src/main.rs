//! `hearts`: simulate, train, evaluate, serve, connect and run tournaments.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use hearts_core::agents::{evaluate, train_selfplay, Policy, PolicySpec};
use hearts_core::env::ShaperKind;
use hearts_net::{
    format_table, run_client, run_tournament_with, serve, ClientStatus, Entrant, ResultsLog, ServerConfig,
    TournamentRun,
};
use tokio::io::AsyncBufReadExt;

use config::RunConfig;

#[derive(Parser)]
#[command(name = "hearts", version, about = "Hearts arena: rules engine, learning agents and tournament server")]
struct Cli {
    /// JSON config file. Flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the resolved config as JSON and exit.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Log more (-v info, -vv debug). Logs go to stderr.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play games between four policies and report mean scores.
    Simulate(EvalArgs),
    /// Train linear Q-learning weights against fixed opponents.
    Train(TrainArgs),
    /// Evaluate policies (e.g. trained weights) against others.
    Eval(EvalArgs),
    /// Run the tournament server; admin commands are read from stdin.
    Serve(ServeArgs),
    /// Connect a local policy to a server.
    Connect(ConnectArgs),
    /// Run a knockout tournament between local policies.
    Tournament(TournamentArgs),
}

#[derive(Args)]
struct EvalArgs {
    /// Number of games [eval.games].
    #[arg(long)]
    games: Option<u64>,
    /// Four comma-separated policies: random, rule or weights:<path> [eval.policies].
    #[arg(long)]
    policies: Option<String>,
    /// Master seed [eval.seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Keep every policy in its starting seat instead of rotating [eval.rotate].
    #[arg(long)]
    no_rotate: bool,
    /// CSV report path [eval.out].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Number of training games [training.games].
    #[arg(long)]
    games: Option<u64>,
    /// Master seed [training.seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Step size [training.alpha].
    #[arg(long)]
    alpha: Option<f64>,
    /// Discount [training.gamma].
    #[arg(long)]
    gamma: Option<f64>,
    /// Three comma-separated opponent policies [training.opponents].
    #[arg(long)]
    opponents: Option<String>,
    /// Reward shaper: default, raw or queen_averse [reward.shaper].
    #[arg(long)]
    shaper: Option<ShaperKind>,
    /// Weights file [training.out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training curve CSV [training.curve].
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// Games per table [table.n_games].
    #[arg(long)]
    games: Option<u64>,
    /// Games in flight at once [table.n_parallel].
    #[arg(long)]
    parallel: Option<usize>,
    /// Per-action deadline sent to clients [table.action_timeout_ms].
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Extra wait beyond the deadline before kicking [table.grace_ms].
    #[arg(long)]
    grace_ms: Option<u64>,
    /// Master seed [table.master_seed].
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ServeArgs {
    /// Address to listen on [server.listen].
    #[arg(long)]
    listen: Option<String>,
    /// JSON-lines results log [server.results_log].
    #[arg(long)]
    results_log: Option<PathBuf>,
    #[command(flatten)]
    table: TableArgs,
}

#[derive(Args)]
struct ConnectArgs {
    /// Server address [client.server].
    #[arg(long)]
    server: Option<String>,
    /// Player name [client.name].
    #[arg(long)]
    name: Option<String>,
    /// Team name [client.team].
    #[arg(long)]
    team: Option<String>,
    /// random, rule or weights:<path> [client.policy].
    #[arg(long)]
    policy: Option<PolicySpec>,
    /// Reply this long before the deadline [client.margin_ms].
    #[arg(long)]
    margin_ms: Option<u64>,
    /// Seed for the policy's randomness [client.seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Keep playing after a round ends [client.stay].
    #[arg(long)]
    stay: bool,
}

#[derive(Args)]
struct TournamentArgs {
    /// Comma-separated entrant policies [tournament.entrants].
    #[arg(long)]
    entrants: Option<String>,
    /// JSON result path [tournament.out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines results log [tournament.results_log].
    #[arg(long)]
    results_log: Option<PathBuf>,
    #[command(flatten)]
    table: TableArgs,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn specs(list: Option<String>) -> Result<Option<Vec<PolicySpec>>, String> {
    list.map(|s| PolicySpec::parse_list(&s)).transpose()
}

impl TableArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.table.n_games, self.games);
        set(&mut c.table.n_parallel, self.parallel);
        set(&mut c.table.action_timeout_ms, self.timeout_ms);
        set(&mut c.table.grace_ms, self.grace_ms);
        set(&mut c.table.master_seed, self.seed);
    }
}

/// Applies the subcommand's flags on top of `c`.
fn apply_flags(command: Command, c: &mut RunConfig) -> Result<Kind, String> {
    Ok(match command {
        Command::Simulate(a) => {
            apply_eval(a, c)?;
            Kind::Simulate
        }
        Command::Eval(a) => {
            apply_eval(a, c)?;
            Kind::Eval
        }
        Command::Train(a) => {
            set(&mut c.training.games, a.games);
            set(&mut c.training.seed, a.seed);
            set(&mut c.training.alpha, a.alpha);
            set(&mut c.training.gamma, a.gamma);
            set(&mut c.training.opponents, specs(a.opponents)?);
            set(&mut c.reward.shaper, a.shaper);
            set(&mut c.training.out, a.out);
            set(&mut c.training.curve, a.curve);
            Kind::Train
        }
        Command::Serve(a) => {
            set(&mut c.server.listen, a.listen);
            if a.results_log.is_some() {
                c.server.results_log = a.results_log;
            }
            a.table.apply(c);
            Kind::Serve
        }
        Command::Connect(a) => {
            set(&mut c.client.server, a.server);
            set(&mut c.client.name, a.name);
            set(&mut c.client.team, a.team);
            set(&mut c.client.policy, a.policy);
            set(&mut c.client.margin_ms, a.margin_ms);
            set(&mut c.client.seed, a.seed);
            c.client.stay |= a.stay;
            Kind::Connect
        }
        Command::Tournament(a) => {
            set(&mut c.tournament.entrants, specs(a.entrants)?);
            set(&mut c.tournament.out, a.out);
            if a.results_log.is_some() {
                c.tournament.results_log = a.results_log;
            }
            a.table.apply(c);
            Kind::Tournament
        }
    })
}

fn apply_eval(a: EvalArgs, c: &mut RunConfig) -> Result<(), String> {
    set(&mut c.eval.games, a.games);
    set(&mut c.eval.policies, specs(a.policies)?);
    set(&mut c.eval.seed, a.seed);
    set(&mut c.eval.out, a.out);
    if a.no_rotate {
        c.eval.rotate = false;
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Kind {
    Simulate,
    Train,
    Eval,
    Serve,
    Connect,
    Tournament,
}

fn print_header(c: &RunConfig) {
    println!("# resolved config");
    for line in serde_json::to_string_pretty(c).expect("config serializes").lines() {
        println!("# {line}");
    }
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let keys = serde_json::to_string_pretty(&RunConfig::default()).expect("config serializes");
    let keys = format!("Config file keys and their defaults (flags show the key they override):\n{keys}");
    let matches = Cli::command()
        .after_long_help(keys.clone())
        .mut_subcommands(|s| s.after_long_help(keys.clone()))
        .get_matches();
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => tracing_subscriber::filter::LevelFilter::WARN,
        1 => tracing_subscriber::filter::LevelFilter::INFO,
        _ => tracing_subscriber::filter::LevelFilter::DEBUG,
    };
    tracing_subscriber::fmt().with_writer(std::io::stderr).with_max_level(level).init();

    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => return usage_error(e),
        },
        None => RunConfig::default(),
    };
    let kind = match apply_flags(cli.command, &mut config) {
        Ok(k) => k,
        Err(e) => return usage_error(e),
    };
    if let Err(e) = config.validate() {
        return usage_error(e);
    }
    if cli.dry_run {
        println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    print_header(&config);
    let outcome = match kind {
        Kind::Simulate | Kind::Eval => run_eval(&config),
        Kind::Train => run_train(&config),
        Kind::Serve => run_async(run_serve(&config)),
        Kind::Connect => run_async(run_connect(&config)),
        Kind::Tournament => run_async(run_tournament_cmd(&config)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run_async<F: std::future::Future<Output = anyhow::Result<()>>>(f: F) -> anyhow::Result<()> {
    tokio::runtime::Builder::new_multi_thread().enable_all().build().context("cannot start runtime")?.block_on(f)
}

fn build_policies(specs: &[PolicySpec]) -> anyhow::Result<Vec<Arc<dyn Policy>>> {
    specs.iter().map(|s| s.build().with_context(|| format!("cannot build policy {s}"))).collect()
}

fn run_eval(c: &RunConfig) -> anyhow::Result<()> {
    let e = &c.eval;
    let policies = build_policies(&e.policies)?;
    let refs: [&dyn Policy; 4] = std::array::from_fn(|i| policies[i].as_ref());
    let report = evaluate(refs, e.games, e.seed, e.rotate, c.rules)?;
    let names: Vec<String> = e.policies.iter().map(ToString::to_string).collect();
    println!("{} games", report.games);
    for (i, s) in report.entrants.iter().enumerate() {
        let (lo, hi) = s.ci95();
        println!(
            "{i} {:<24} mean {:>7.3}  95% CI [{lo:.3}, {hi:.3}]  places {:?}  illegal {}",
            names[i], s.mean_adjusted, s.placements, s.illegal_actions
        );
    }
    let file = std::fs::File::create(&e.out).with_context(|| format!("cannot create {}", e.out.display()))?;
    report.write_csv(&names, file)?;
    println!("report written to {}", e.out.display());
    Ok(())
}

fn run_train(c: &RunConfig) -> anyhow::Result<()> {
    let t = &c.training;
    let outcome = train_selfplay(&c.train_config())?;
    outcome.weights.save(&t.out)?;
    let file = std::fs::File::create(&t.curve).with_context(|| format!("cannot create {}", t.curve.display()))?;
    outcome.write_curve_csv(file)?;
    if let (Some(first), Some(last)) = (outcome.curve.first(), outcome.curve.last()) {
        println!(
            "mean adjusted score: {:.3} after {} games, {:.3} after {}",
            first.mean_adjusted_score, first.game_window, last.mean_adjusted_score, last.game_window
        );
    }
    println!("weights written to {}, curve to {}", t.out.display(), t.curve.display());
    Ok(())
}

async fn run_serve(c: &RunConfig) -> anyhow::Result<()> {
    let cfg = ServerConfig { table: c.table_config(), results_log: c.server.results_log.clone() };
    let server = Arc::new(serve(&c.server.listen, cfg).await?);
    println!("listening on {}", server.local_addr());
    println!("commands: table start [ids], tournament start [ids], status, quit");
    let mut lines = tokio::io::BufReader::new(tokio::io::stdin()).lines();
    let mut stdin_open = true;
    loop {
        tokio::select! {
            line = lines.next_line(), if stdin_open => match line? {
                Some(line) if line.trim().is_empty() => {}
                Some(line) if line.trim() == "quit" || line.trim() == "exit" => break,
                Some(line) => {
                    let server = Arc::clone(&server);
                    tokio::spawn(async move {
                        if let Some(out) = server.admin(&line).await {
                            println!("{}", out.trim_end());
                        }
                    });
                }
                None => stdin_open = false,
            },
            _ = tokio::signal::ctrl_c() => break,
        }
    }
    server.shutdown();
    println!("server stopped");
    Ok(())
}

async fn run_connect(c: &RunConfig) -> anyhow::Result<()> {
    let summary = run_client(&c.client_config()).await?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    match summary.status {
        ClientStatus::RoundComplete | ClientStatus::Kicked => Ok(()),
        ClientStatus::Disconnected => anyhow::bail!("server closed the connection"),
        ClientStatus::Error(e) => anyhow::bail!("session failed: {e}"),
    }
}

async fn run_tournament_cmd(c: &RunConfig) -> anyhow::Result<()> {
    let t = &c.tournament;
    let policies = build_policies(&t.entrants)?;
    let entrants: Vec<Entrant> =
        policies.into_iter().zip(&t.entrants).enumerate().map(|(i, (p, s))| Entrant::local(format!("{i}:{s}"), p)).collect();
    let log = t.results_log.as_deref().map(ResultsLog::open).transpose().context("cannot open results log")?;
    let run = TournamentRun { label: "tournament".into(), game_id_base: 1, log: log.as_ref() };
    let result = run_tournament_with(entrants, &c.table_config(), run).await?;
    for (r, tables) in result.rounds.iter().enumerate() {
        for (i, table) in tables.iter().enumerate() {
            println!("round {r} table {i}");
            print!("{}", format_table(&table.result));
        }
    }
    println!("champion: {}", result.champion);
    println!("final order: {}", result.final_order.join(", "));
    std::fs::write(&t.out, serde_json::to_string_pretty(&result)?)
        .with_context(|| format!("cannot write {}", t.out.display()))?;
    println!("result written to {}", t.out.display());
    Ok(())
}
