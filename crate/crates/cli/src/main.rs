use std::io::{self, BufRead, Write};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use thiserror::Error;

use hackbox::compiler::{compile, compile_first, validate_blueprint, LevelBlueprint, PlacementKind};
use hackbox::dsl::parse_document;
use hackbox::env::{random_policy, rollout, EndReason, Env};
use hackbox::geom::Dir;
use hackbox::observe::render_ansi;
use hackbox::protocol;
use hackbox::tasks::{list_tasks, make_task, EnvSpec, Overrides, TaskError};
use hackbox::world::{Action, PromptKind};

#[derive(Parser, Debug)]
#[command(name = "hackbox", version, about = "Procedurally generated gridworld environments")]
struct Cli {
    /// Base seed; instance `i` uses `seed + i`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print only the essential result lines.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and compile a des file, then summarise the level.
    Compile {
        file: String,
        /// Level to compile when the file holds several.
        #[arg(long)]
        level: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Draw seeded instances of a task or des file.
    Sample {
        source: String,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, value_enum, default_value_t = Render::Ansi)]
        render: Render,
    },
    /// Play a task or des file from the terminal, one key per line.
    Play { source: String },
    /// Run episodes with a fixed policy.
    Rollout {
        task: String,
        #[arg(long, default_value_t = 1)]
        episodes: u64,
        #[arg(long, value_enum, default_value_t = Policy::Random)]
        policy: Policy,
        /// Comma-separated observation keys, e.g. `chars_crop`.
        #[arg(long, value_delimiter = ',')]
        obs_keys: Option<Vec<String>>,
        #[arg(long)]
        json: bool,
    },
    /// Compile many seeds and report validity and solvability.
    Check {
        source: String,
        #[arg(long, default_value_t = 100)]
        seeds: u64,
    },
    /// List registered task ids.
    Tasks,
    /// Speak the environment protocol on stdin and stdout.
    Serve,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Render {
    Ansi,
    Json,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Policy {
    Random,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    User(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("output closed")]
    Closed,
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return CliError::Closed;
        }
        CliError::Internal(e.to_string())
    }
}

fn read_des(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::User(format!("{path}: {e}")))
}

fn is_file_source(source: &str) -> bool {
    source.ends_with(".des") || Path::new(source).is_file()
}

fn load_spec(source: &str) -> Result<EnvSpec, CliError> {
    let spec = if is_file_source(source) {
        EnvSpec::from_des(&read_des(source)?)
    } else {
        make_task(source, &Overrides::default())
    };
    spec.map_err(|e| match e {
        TaskError::Dsl(e) => CliError::User(format!("{source}:{e}")),
        e => CliError::User(e.to_string()),
    })
}

fn summary(bp: &LevelBlueprint) -> serde_json::Value {
    let fmt = |c: hackbox::geom::Coord| format!("({},{})", c.x, c.y);
    json!({
        "name": bp.name,
        "width": bp.map_area.width(),
        "height": bp.map_area.height(),
        "start": bp.start_pos.map(fmt),
        "stair_down": bp.stair_down().map(fmt),
        "objects": bp.count(PlacementKind::Object),
        "monsters": bp.count(PlacementKind::Monster),
        "traps": bp.count(PlacementKind::Trap),
        "features": bp.count(PlacementKind::Feature),
    })
}

fn cmd_compile(cli: &Cli, file: &str, level: Option<&str>, as_json: bool) -> Result<(), CliError> {
    let src = read_des(file)?;
    let doc = parse_document(&src).map_err(|e| CliError::User(format!("{file}:{e}")))?;
    let bp = match level {
        Some(l) => compile(&doc, l, cli.seed),
        None => compile_first(&doc, cli.seed),
    }
    .map_err(|e| CliError::User(format!("{file}:{e}")))?;
    let s = summary(&bp);
    let mut out = io::stdout().lock();
    if as_json {
        let mut s = s;
        s["map"] = json!(bp.render().lines().collect::<Vec<_>>());
        writeln!(out, "{s}")?;
        return Ok(());
    }
    for key in ["name", "start", "stair_down", "objects", "monsters", "traps", "features"] {
        match &s[key] {
            serde_json::Value::String(t) => writeln!(out, "{key}: {t}")?,
            serde_json::Value::Null => writeln!(out, "{key}: none")?,
            v => writeln!(out, "{key}: {v}")?,
        }
    }
    writeln!(out, "size: {}x{}", s["width"], s["height"])?;
    if !cli.quiet {
        let a = bp.map_area;
        for row in bp.render().lines().skip(a.y1.max(0) as usize).take(a.height() as usize) {
            writeln!(out, "{}", row.trim_end())?;
        }
    }
    Ok(())
}

fn cmd_sample(cli: &Cli, source: &str, count: u64, render: Render) -> Result<(), CliError> {
    let mut env = Env::new(load_spec(source)?).map_err(|e| CliError::User(e.to_string()))?;
    let mut out = io::stdout().lock();
    for i in 0..count {
        let seed = cli.seed + i;
        let obs = env.reset(seed).map_err(|e| CliError::User(format!("seed {seed}: {e}")))?;
        match render {
            Render::Json => writeln!(out, "{}", json!({ "seed": seed, "obs": obs }))?,
            Render::Ansi => {
                let mut world = env.world().cloned().ok_or_else(|| CliError::Internal("no world".into()))?;
                world.reveal_map();
                writeln!(out, "seed {seed}")?;
                write!(out, "{}", render_ansi(&world))?;
            }
        }
    }
    Ok(())
}

fn vi_dir(key: &str) -> Option<Dir> {
    let name = match key {
        "h" => "w",
        "j" => "s",
        "k" => "n",
        "l" => "e",
        "y" => "nw",
        "u" => "ne",
        "b" => "sw",
        "n" => "se",
        _ => return None,
    };
    Dir::from_name(name)
}

fn key_action(key: &str, prompt: Option<&PromptKind>) -> Option<Action> {
    if let Some(a) = Action::from_name(key) {
        return Some(a);
    }
    match prompt {
        Some(PromptKind::Confirmation { .. }) => match key {
            "y" => return Some(Action::Confirm(true)),
            "n" => return Some(Action::Confirm(false)),
            _ => {}
        },
        Some(PromptKind::ItemSelect { .. }) => {
            let mut it = key.chars();
            if let (Some(c), None) = (it.next(), it.next()) {
                return Some(Action::MenuSelect(c));
            }
        }
        _ => {}
    }
    if let Some(d) = vi_dir(key) {
        return Some(Action::Move(d));
    }
    Some(match key {
        "s" => Action::Search,
        "K" => Action::Kick,
        "o" => Action::Open,
        "e" => Action::Eat,
        "," => Action::PickUp,
        "a" => Action::Apply,
        "W" => Action::Wear,
        "w" => Action::Wield,
        "P" => Action::PutOn,
        "q" => Action::Quaff,
        "z" => Action::Zap,
        "p" => Action::Pray,
        "r" => Action::Read,
        _ => return None,
    })
}

fn end_text(end: &Option<EndReason>) -> String {
    match end {
        None => "none".into(),
        Some(EndReason::Goal) => "goal".into(),
        Some(EndReason::Died { cause }) => format!("died:{cause}"),
        Some(EndReason::FellThrough) => "fell_through".into(),
        Some(EndReason::Timeout) => "timeout".into(),
    }
}

fn cmd_play(cli: &Cli, source: &str) -> Result<(), CliError> {
    let mut env = Env::new(load_spec(source)?).map_err(|e| CliError::User(e.to_string()))?;
    env.reset(cli.seed).map_err(|e| CliError::User(e.to_string()))?;
    let mut out = io::stdout().lock();
    let show = |out: &mut io::StdoutLock, env: &Env| -> io::Result<()> {
        if let Some(w) = env.world() {
            write!(out, "{}", render_ansi(w))?;
        }
        Ok(())
    };
    if !cli.quiet {
        writeln!(out, "keys: hjklyubn move, s search, K kick, o open, e eat, , pickup, a apply,")?;
        writeln!(out, "W wear, w wield, P put on, q quaff, z zap, p pray, r read; or an action name; :q quits")?;
        show(&mut out, &env)?;
    }
    let mut total = 0.0;
    for line in io::stdin().lock().lines() {
        let key = line?.trim().to_string();
        if key == ":q" {
            break;
        }
        if key.is_empty() {
            continue;
        }
        let prompt = env.world().and_then(|w| w.prompt.as_ref()).map(|p| p.kind.clone());
        let Some(mut action) = key_action(&key, prompt.as_ref()) else {
            writeln!(out, "unknown key `{key}`")?;
            continue;
        };
        if let (Some(PromptKind::DirectionSelect { .. }), Action::Direction(d)) = (&prompt, action) {
            action = Action::Move(d);
        }
        match env.step(action) {
            Ok(t) => {
                total += t.reward;
                if !cli.quiet {
                    show(&mut out, &env)?;
                }
                writeln!(out, "reward {:.3} return {total:.3} done {}", t.reward, t.done)?;
                if t.done {
                    writeln!(out, "episode over: {}", end_text(&t.info.end))?;
                    break;
                }
            }
            Err(e) => writeln!(out, "{e}")?,
        }
    }
    Ok(())
}

fn cmd_rollout(cli: &Cli, task: &str, episodes: u64, obs_keys: Option<&[String]>, as_json: bool) -> Result<(), CliError> {
    let mut spec = load_spec(task)?;
    if let Some(keys) = obs_keys {
        let o = Overrides {
            obs_keys: Some(keys.to_vec()),
            ..Overrides::default()
        };
        o.apply(&mut spec).map_err(|e| CliError::User(e.to_string()))?;
    }
    let mut env = Env::new(spec).map_err(|e| CliError::User(e.to_string()))?;
    let mut out = io::stdout().lock();
    let clock = Instant::now();
    let mut steps = 0;
    for i in 0..episodes {
        let seed = cli.seed + i;
        let ep = rollout(&mut env, seed, random_policy(seed)).map_err(|e| CliError::User(format!("seed {seed}: {e}")))?;
        steps += ep.steps;
        if as_json {
            writeln!(out, "{}", serde_json::to_string(&ep).map_err(|e| CliError::Internal(e.to_string()))?)?;
        } else {
            writeln!(
                out,
                "episode {i} seed {seed} return {:.3} steps {} end {}",
                ep.total_reward,
                ep.steps,
                end_text(&ep.end)
            )?;
        }
    }
    if !cli.quiet && !as_json {
        let secs = clock.elapsed().as_secs_f64().max(1e-9);
        writeln!(out, "steps/sec {:.0}", steps as f64 / secs)?;
    }
    Ok(())
}

fn cmd_check(cli: &Cli, source: &str, seeds: u64) -> Result<bool, CliError> {
    let spec = load_spec(source)?;
    let file = is_file_source(source);
    let (mut compiled, mut solvable) = (0, 0);
    let mut out = io::stdout().lock();
    for i in 0..seeds {
        let seed = cli.seed + i;
        let bp = match spec.source.blueprint(seed) {
            Ok(bp) => bp,
            Err(e) => {
                if !cli.quiet {
                    writeln!(out, "seed {seed}: {e}")?;
                }
                continue;
            }
        };
        compiled += 1;
        let mut req = spec.requirements.clone();
        req.solvable = true;
        if file {
            req.stair_down = bp.stair_down().is_some();
        }
        let issues = validate_blueprint(&bp, &req);
        if issues.is_empty() {
            solvable += 1;
        } else if !cli.quiet {
            let text: Vec<String> = issues.iter().map(|i| i.to_string()).collect();
            writeln!(out, "seed {seed}: {}", text.join("; "))?;
        }
    }
    writeln!(out, "compiled: {compiled}/{seeds}")?;
    writeln!(out, "solvable: {solvable}/{seeds}")?;
    Ok(solvable == seeds)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    match &cli.cmd {
        Command::Compile { file, level, json } => cmd_compile(cli, file, level.as_deref(), *json)?,
        Command::Sample { source, count, render } => cmd_sample(cli, source, *count, *render)?,
        Command::Play { source } => cmd_play(cli, source)?,
        Command::Rollout {
            task,
            episodes,
            policy: Policy::Random,
            obs_keys,
            json,
        } => cmd_rollout(cli, task, *episodes, obs_keys.as_deref(), *json)?,
        Command::Check { source, seeds } => return cmd_check(cli, source, *seeds),
        Command::Tasks => {
            let mut out = io::stdout().lock();
            for id in list_tasks() {
                writeln!(out, "{id}")?;
            }
        }
        Command::Serve => protocol::serve(io::stdin().lock(), io::stdout().lock())?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Closed) => ExitCode::SUCCESS,
        Err(e @ CliError::User(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
