//! Command-line entry point: REPL, simulation runner, trend tool and server.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::assets::Assets;
use crate::engine::{AgentTurn, EngineConfig, Session};
use crate::policy::{DialogueAction, PolicyMode};
use crate::qlearn::QTable;
use crate::sim::{self, PolicySpec, ProfileSet};
use crate::trend;

#[derive(Debug, Parser)]
#[command(name = "avatar-dm", version, about = "POMDP dialogue manager")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Chat with the agent on stdin/stdout.
    Repl(ReplArgs),
    /// Run simulated users against the agent and write metrics.
    Simulate(SimulateArgs),
    /// Haar DWT and sharp-point count of a numeric CSV column.
    Dwt(DwtArgs),
    /// Serve the HTTP session API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct AssetArgs {
    /// Ontology JSON (defaults to the shipped book portal).
    #[arg(long)]
    pub ontology: Option<PathBuf>,
    /// POMDP model JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Sentiment lexicon TSV.
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Engine configuration JSON; missing fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplArgs {
    #[command(flatten)]
    pub assets: AssetArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub policy: Option<PolicyMode>,
    /// Q-table checkpoint to start from.
    #[arg(long)]
    pub qtable: Option<PathBuf>,
    /// Write the learned Q-table here on exit.
    #[arg(long)]
    pub save_qtable: Option<PathBuf>,
    /// Append every agent turn as one JSON line.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub assets: AssetArgs,
    /// Simulated-user profiles JSON.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub episodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "sim-out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = PolicyMode::HandCrafted)]
    pub policy: PolicyMode,
    /// Also train a policy per profile and compare it with the baselines.
    #[arg(long)]
    pub train_episodes: Option<usize>,
    /// Learning rate used while training.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct DwtArgs {
    /// CSV file; the first column is read, a non-numeric first row is a header.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "AVATAR_DM_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// Directory holding ontology.json, model.json and lexicon.tsv; missing
    /// files fall back to the shipped ones.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    /// Static files (chat client) served for non-API paths.
    #[arg(long)]
    pub static_dir: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

type Failure = Box<dyn std::error::Error>;

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().ansi().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Repl(a) => repl(a, stdin, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Dwt(a) => dwt(a, stdout),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<EngineConfig, Failure> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(serde_json::from_str(&text).map_err(|e| format!("{}: {e}", p.display()))?)
        }
        None => Ok(EngineConfig::default()),
    }
}

fn load_assets(a: &AssetArgs) -> Result<Assets, Failure> {
    Ok(Assets::load(a.ontology.as_deref(), a.model.as_deref(), a.lexicon.as_deref())?)
}

pub fn format_turn(turn: &AgentTurn) -> String {
    format!(
        "AVATAR: {}\n  [action={} emotion={} x={:.3} level={} mode={} reward={:+.2} compound={:+.4} belief={}:{:.3} ncp={} accepted={}]",
        turn.reply,
        turn.action,
        turn.emotion,
        turn.crisp_x,
        turn.level,
        turn.mode,
        turn.reward,
        turn.sentiment.compound,
        turn.belief_top.state,
        turn.belief_top.probability,
        turn.ncp,
        turn.accepted
    )
}

fn repl(args: ReplArgs, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<(), Failure> {
    let assets = load_assets(&args.assets)?;
    let mut config = load_config(args.assets.config.as_deref())?;
    if let Some(p) = args.policy {
        config.policy = p;
    }
    let mut session = match &args.qtable {
        Some(path) => {
            let space = crate::qlearn::StateSpace::new(assets.ontology.len(), crate::ontology::DialogueObservation::ALL.len());
            let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
            let table = QTable::read_csv(BufReader::new(file), space.size(), DialogueAction::ALL.len())?;
            Session::with_qtable(assets, config, args.seed, table)?
        }
        None => Session::new(assets, config, args.seed)?,
    };
    let mut log = match &args.log {
        Some(p) => Some(BufWriter::new(File::create(p).map_err(|e| format!("{}: {e}", p.display()))?)),
        None => None,
    };
    writeln!(stdout, "AVATAR: {}", session.greeting())?;
    let mut line = String::new();
    while !session.ended() {
        write!(stdout, "> ")?;
        stdout.flush()?;
        line.clear();
        if stdin.read_line(&mut line)? == 0 {
            writeln!(stdout)?;
            break;
        }
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let turn = session.step(text)?;
        writeln!(stdout, "{}", format_turn(&turn))?;
        if let Some(w) = log.as_mut() {
            writeln!(w, "{}", serde_json::to_string(&turn)?)?;
        }
    }
    if let Some(mut w) = log {
        w.flush()?;
    }
    if let Some(p) = &args.save_qtable {
        let file = File::create(p).map_err(|e| format!("{}: {e}", p.display()))?;
        session.qtable().write_csv(BufWriter::new(file))?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let assets = load_assets(&args.assets)?;
    let config = load_config(args.assets.config.as_deref())?;
    let set = match &args.profiles {
        Some(p) => ProfileSet::from_json(&fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?)?,
        None => ProfileSet::shipped(),
    };
    let spec = match args.policy {
        PolicyMode::HandCrafted => PolicySpec::HandCrafted,
        PolicyMode::Random => PolicySpec::Random,
        PolicyMode::Learned => return Err("simulate evaluates hand-crafted or random; use --train-episodes for learned".into()),
    };
    let report = sim::run_experiment(&assets, &config, &set, &spec, args.episodes, args.seed)?;
    sim::write_report(&report, &args.out)?;
    sim::write_traces(&report.episodes, &args.out.join("traces.csv"))?;
    writeln!(stdout, "{:<14}{:>10}{:>10}{:>16}{:>12}", "profile", "accuracy", "length", "neutral/pos %", "return")?;
    for r in &report.rows {
        writeln!(
            stdout,
            "{:<14}{:>10.2}{:>10.2}{:>16.2}{:>12.3}",
            r.profile, r.accuracy_pct, r.avg_dialogue_length, r.neutral_positive_pct, r.mean_return
        )?;
    }
    if let Some(train) = args.train_episodes {
        let mut train_cfg = config.clone();
        train_cfg.q.alpha = args.alpha;
        let rows = sim::policy_improvement_report(&assets, &train_cfg, &set, train, args.episodes, args.seed)?;
        sim::write_policy_csv(&rows, &args.out.join("policy.csv"))?;
        writeln!(stdout, "\n{:<14}{:>14}{:>14}{:>14}", "profile", "hand-crafted", "learned", "random")?;
        for r in &rows {
            writeln!(
                stdout,
                "{:<14}{:>14.3}{:>14.3}{:>14.3}",
                r.profile, r.hand_crafted.mean_return, r.learned.mean_return, r.random.mean_return
            )?;
        }
    }
    writeln!(stdout, "wrote {}", args.out.display())?;
    Ok(())
}

/// First CSV column as numbers; a leading non-numeric row is treated as a header.
pub fn read_signal(text: &str) -> Result<Vec<f64>, Failure> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = rec.get(0).unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) => out.push(v),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(format!("row {}: `{field}` is not a number", i + 1).into()),
        }
    }
    Ok(out)
}

fn dwt(args: DwtArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input).map_err(|e| format!("{}: {e}", args.input.display()))?;
    let signal = read_signal(&text)?;
    let result = trend::analyze(&signal)?;
    writeln!(stdout, "{}", serde_json::to_string_pretty(&result)?)?;
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), Failure> {
    let file = |name: &str| args.assets.as_ref().map(|d| d.join(name)).filter(|p| p.exists());
    let assets = Assets::load(
        file("ontology.json").as_deref(),
        file("model.json").as_deref(),
        file("lexicon.tsv").as_deref(),
    )?;
    let config = load_config(args.config.as_deref())?;
    let state = super::AppState::new(assets, config);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(super::serve(state, SocketAddr::new(args.host, args.port), args.static_dir))?;
    Ok(())
}
