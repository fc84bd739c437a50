use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use concierge_core::elicitation::EmotionType;
use concierge_core::fv_store::{FvDatabase, Layer};
use concierge_core::fixtures;
use concierge_core::mstn::{IdleMode, MentalState, TransitionModel, TransitionTable};
use concierge_core::recommend::{GeoPoint, MAX_GRADE};
use concierge_core::session::{Engine, Session, TurnReport, TRANSITION_FILE};
use concierge_core::trace::{parse_context, write_csv, Trace};
use concierge_core::EngineConfig;

#[derive(Parser)]
#[command(name = "concierge", version, about = "Emotion-aware tourist concierge engine")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory holding fv.tsv, spots.tsv, transition_table.tsv and session logs.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Random seed (stochastic idle drift).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    idle_mode: Option<IdleArg>,
    /// Dummy favorite value placed on an empty second axis.
    #[arg(long, global = true, allow_negative_numbers = true)]
    beta: Option<f64>,
    /// Smoothing factor of the feeling profile, in (0, 1].
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Personal FV layer to consult before the default one.
    #[arg(long, global = true)]
    persona: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum IdleArg {
    Deterministic,
    Stochastic,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive dialogue: one case frame per line, optionally `| key=value ...`.
    Repl {
        /// Print turn reports as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Run a trace file and print one CSV row (or JSON report) per turn.
    Eval {
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = EvalFormat::Csv)]
        format: EvalFormat,
        /// Write to this file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Pretty-print a data table.
    Inspect {
        #[arg(value_enum)]
        table: Table,
    },
    /// Read or edit the favorite-value lexicon.
    Fv {
        #[command(subcommand)]
        action: FvAction,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long, env = "CONCIERGE_ADMIN_TOKEN", hide_env_values = true)]
        admin_token: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalFormat {
    Csv,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Transition,
    Groups,
    Spots,
    Fv,
}

#[derive(Subcommand)]
enum FvAction {
    Get { term: String },
    Set {
        term: String,
        #[arg(allow_negative_numbers = true)]
        value: f64,
    },
    /// Merge records from a TAB-separated file (layer, term, value).
    Import {
        file: PathBuf,
        /// Replace the whole lexicon instead of merging.
        #[arg(long)]
        replace: bool,
    },
    /// Write the lexicon in the import format.
    Export { file: Option<PathBuf> },
}

fn build_config(g: &Global) -> Result<EngineConfig> {
    let mut cfg = match &g.config {
        Some(p) => EngineConfig::load(p)?,
        None => EngineConfig::default(),
    };
    cfg.apply_env()?;
    if let Some(d) = &g.data_dir {
        cfg.data_dir = Some(d.clone());
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(m) = g.idle_mode {
        cfg.mstn.idle_mode = match m {
            IdleArg::Deterministic => IdleMode::Deterministic,
            IdleArg::Stochastic => IdleMode::Stochastic,
        };
    }
    if let Some(b) = g.beta {
        cfg.egc.beta = b;
    }
    if let Some(a) = g.alpha {
        cfg.alpha = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = build_config(&cli.global)?;
    let persona = cli.global.persona.clone();
    match cli.command {
        Command::Repl { json } => repl(&Engine::from_config(cfg)?, persona, json),
        Command::Eval { trace, format, output } => eval(&Engine::from_config(cfg)?, persona, &trace, format, output.as_deref()),
        Command::Inspect { table: Table::Transition } => inspect_transition(&cfg),
        Command::Inspect { table } => inspect(&Engine::from_config(cfg)?, table),
        Command::Fv { action } => fv(cfg, persona, action),
        Command::Serve { host, port, admin_token } => {
            let mut cfg = cfg;
            if let Some(h) = host {
                cfg.server.host = h;
            }
            if let Some(p) = port {
                cfg.server.port = p;
            }
            if admin_token.is_some() {
                cfg.server.admin_token = admin_token;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(concierge_service::serve(cfg)).map_err(|e| anyhow::anyhow!(e))
        }
    }
}

fn print_report(out: &mut impl Write, r: &TurnReport) -> io::Result<()> {
    let group = r.chosen_group.map_or("-".to_string(), |g| format!("group {g}"));
    writeln!(out, "turn {}: {} -> {} ({group})", r.turn, r.previous_state, r.new_state)?;
    if let Some(e) = &r.egc {
        let [f1, f2, f3] = e.vector.components();
        writeln!(out, "  egc: ({f1:+.3}, {f2:+.3}, {f3:+.3}) {} intensity {:.3}", e.valence, e.intensity)?;
        if !e.unknown_terms.is_empty() {
            writeln!(out, "  unknown terms: {}", e.unknown_terms.join(", "))?;
        }
    }
    if !r.emotions.is_empty() {
        let list: Vec<String> = r.emotions.iter().map(|e| format!("{} {:.2}", e.emotion.as_str(), e.strength)).collect();
        writeln!(out, "  emotions: {}", list.join(", "))?;
    }
    for (i, s) in r.recommendations.iter().enumerate() {
        writeln!(out, "  {}. {} (distance {:.3})", i + 1, s.name, s.emotion_distance)?;
    }
    Ok(())
}

const REPL_HELP: &str = "\
enter a case frame, e.g.  V(S:I, O:cake, P:eat) | prospect=prospective
context keys: agent, affected (self|other), desirability (desirable|undesirable|n/a),
              prospect (none|prospective|confirmed|disconfirmed), approval (approve|disapprove|n/a)
commands: :idle  :state  :recs [lat lon radius_km]  :help  :quit";

fn repl(engine: &Engine, persona: Option<String>, json: bool) -> Result<()> {
    let mut session = engine.new_session("repl", persona);
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut out = io::stdout().lock();
    if interactive {
        eprintln!("{REPL_HELP}");
    }
    loop {
        if interactive {
            eprint!("[{}]> ", session.state());
            io::stderr().flush()?;
        }
        let mut line = String::new();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let result = match line.split_whitespace().next().unwrap_or("") {
            ":quit" | ":q" => break,
            ":help" => {
                writeln!(out, "{REPL_HELP}")?;
                continue;
            }
            ":state" => {
                writeln!(out, "{}", serde_json::to_string(&session.view())?)?;
                continue;
            }
            ":recs" => {
                recs(&mut out, engine, &session, line)?;
                continue;
            }
            ":idle" => session.post_idle(engine),
            _ => {
                let (frame, ctx) = line.split_once('|').unwrap_or((line, ""));
                match parse_context(ctx) {
                    Ok(c) => session.post_utterance(engine, frame, c),
                    Err(e) => {
                        writeln!(out, "error: {e}")?;
                        continue;
                    }
                }
            }
        };
        match result {
            Ok(r) if json => writeln!(out, "{}", serde_json::to_string(&r)?)?,
            Ok(r) => print_report(&mut out, &r)?,
            Err(e) => writeln!(out, "error [{}]: {e}", e.code())?,
        }
    }
    Ok(())
}

fn recs(out: &mut impl Write, engine: &Engine, session: &Session, line: &str) -> Result<()> {
    let args: Vec<f64> = match line.split_whitespace().skip(1).map(str::parse).collect() {
        Ok(a) => a,
        Err(_) => {
            writeln!(out, "error: usage :recs [lat lon radius_km]")?;
            return Ok(());
        }
    };
    let (here, radius) = match args[..] {
        [] => (None, None),
        [lat, lon] => (Some(GeoPoint::new(lat, lon)), None),
        [lat, lon, r] => (Some(GeoPoint::new(lat, lon)), Some(r)),
        _ => {
            writeln!(out, "error: usage :recs [lat lon radius_km]")?;
            return Ok(());
        }
    };
    let here = match here.transpose() {
        Ok(h) => h,
        Err(e) => {
            writeln!(out, "error: {e}")?;
            return Ok(());
        }
    };
    match session.recommendations(engine, here, radius) {
        Ok(list) => {
            for (i, s) in list.iter().enumerate() {
                let km = s.distance_km.map(|d| format!(", {d:.1} km")).unwrap_or_default();
                writeln!(out, "{}. {} (distance {:.3}{km})", i + 1, s.name, s.emotion_distance)?;
            }
        }
        Err(e) => writeln!(out, "error [{}]: {e}", e.code())?,
    }
    Ok(())
}

fn eval(engine: &Engine, persona: Option<String>, path: &Path, format: EvalFormat, output: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trace = Trace::parse(&text).with_context(|| path.display().to_string())?;
    let (_, reports) = trace.run(engine, "eval", persona)?;
    let mut sink: Box<dyn Write> = match output {
        Some(p) => Box::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        EvalFormat::Csv => write_csv(&mut sink, &trace, &reports)?,
        EvalFormat::Jsonl => {
            for r in &reports {
                writeln!(sink, "{}", serde_json::to_string(r)?)?;
            }
        }
    }
    sink.flush()?;
    Ok(())
}

/// Prints the table as loaded, flagging drifting rows. Works on tables too
/// far off to seed the engine, which is when the check matters most.
fn inspect_transition(cfg: &EngineConfig) -> Result<()> {
    let path = cfg.data_dir.as_ref().map(|d| d.join(TRANSITION_FILE)).filter(|p| p.exists());
    let t = match &path {
        Some(p) => TransitionTable::parse(&fs::read_to_string(p)?).with_context(|| p.display().to_string())?,
        None => fixtures::transition_table(),
    };
    let mut out = io::stdout().lock();
    write!(out, "{:<10}", "from\\to")?;
    for s in MentalState::ALL {
        write!(out, "{:>9}", s.as_str())?;
    }
    writeln!(out, "{:>9}", "sum")?;
    let drifting = t.drifting_rows();
    for from in MentalState::ALL {
        write!(out, "{:<10}", from.as_str())?;
        for to in MentalState::ALL {
            write!(out, "{:>9.3}", t.values[from.index()][to.index()])?;
        }
        let sum = t.row_sum(from);
        let flag = if drifting.iter().any(|(s, _)| *s == from) { "  DRIFT" } else { "" };
        writeln!(out, "{sum:>9.3}{flag}")?;
    }
    match TransitionModel::seed_from_table(&t.values) {
        Ok(model) => {
            writeln!(out, "\nseeded costs (1 - p):")?;
            for from in MentalState::ALL {
                write!(out, "{:<10}", from.as_str())?;
                for to in MentalState::ALL {
                    write!(out, "{:>9.3}", model.cost(from, to))?;
                }
                writeln!(out)?;
            }
        }
        Err(e) => writeln!(out, "\ncannot seed costs: {e}")?,
    }
    if !drifting.is_empty() {
        bail!("{} row(s) drift from 1.0 by more than 0.01", drifting.len());
    }
    Ok(())
}

fn inspect(engine: &Engine, table: Table) -> Result<()> {
    let mut out = io::stdout().lock();
    match table {
        Table::Transition => unreachable!("handled by inspect_transition"),
        Table::Groups => {
            let targets = engine.config.mstn.group_targets;
            for k in 1..=9 {
                let members: Vec<&str> = EmotionType::ALL.iter().filter(|e| e.group() == k).map(|e| e.as_str()).collect();
                writeln!(out, "e{k} -> {:<9} {}", targets.target(k).as_str(), members.join(", "))?;
            }
        }
        Table::Spots => {
            writeln!(
                out,
                "{:<26}{:>9}{:>10}  {:>6}{:>6}{:>6}{:>6}{:>6}{:>6}",
                "name", "lat", "lon", "happy", "angry", "surpr", "sad", "disg", "fear"
            )?;
            for s in &engine.catalog.spots {
                let p = s.profile;
                let g = [p.happy, p.angry, p.surprise, p.sad, p.disgust, p.fear].map(|x| x * MAX_GRADE);
                writeln!(
                    out,
                    "{:<26}{:>9.4}{:>10.4}  {:>6.2}{:>6.2}{:>6.2}{:>6.2}{:>6.2}{:>6.2}",
                    s.name, s.location.lat, s.location.lon, g[0], g[1], g[2], g[3], g[4], g[5]
                )?;
            }
        }
        Table::Fv => {
            let db = engine.fv.snapshot();
            for (layer, term, v) in db.records() {
                writeln!(out, "{layer:<10} {term:<20} {:+.3}", v.get())?;
            }
            writeln!(out, "{} records", db.len())?;
        }
    }
    Ok(())
}

fn fv(cfg: EngineConfig, persona: Option<String>, action: FvAction) -> Result<()> {
    let writes = matches!(action, FvAction::Set { .. } | FvAction::Import { .. });
    if writes && cfg.data_dir.is_none() {
        bail!("editing the lexicon needs --data-dir (or CONCIERGE_DATA_DIR) so the change can be saved");
    }
    let engine = Engine::from_config(cfg)?;
    let layer = match &persona {
        Some(p) => Layer::parse(p)?,
        None => Layer::Default,
    };
    let mut out = io::stdout().lock();
    match action {
        FvAction::Get { term } => {
            let (v, prov) = engine.fv.lookup(&term, persona.as_deref());
            writeln!(out, "{term}\t{}\t{}", v.get(), serde_json::to_value(prov)?.as_str().unwrap_or(""))?;
        }
        FvAction::Set { term, value } => {
            engine.fv.upsert(&term, value, &layer)?;
            writeln!(out, "{}\t{term}\t{value}", layer.as_str())?;
        }
        FvAction::Import { file, replace } => {
            let text = fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let incoming = FvDatabase::parse(&text).with_context(|| file.display().to_string())?;
            let mut db = if replace { FvDatabase::new() } else { engine.fv.snapshot() };
            for (layer, term, v) in incoming.records() {
                db.upsert(term, v.get(), &Layer::parse(layer)?)?;
            }
            let n = incoming.len();
            engine.fv.replace(db)?;
            writeln!(out, "imported {n} records")?;
        }
        FvAction::Export { file } => {
            let text = engine.fv.snapshot().render();
            match file {
                Some(p) => fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
        }
    }
    Ok(())
}
