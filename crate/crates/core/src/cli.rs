//! The `eif` command line: scene and task generation, episodes, evaluation, SFT export, rendering.
//!
//! Configuration layers, later wins: defaults, `--config` file, `EIF_<FIELD>` environment
//! variables, `--set field=value` and the dedicated flags.

use crate::config::{Config, ConfigError};
use crate::controller::FrontierPolicy;
use crate::eval::{
    annotate_expert, compute_metrics, expert_lengths, read_trace, rebuild_map, run_episode, run_seed_for, run_suite,
    write_trace, PlannerKind, SceneCache, SuiteReport, TraceRecord,
};
use crate::featmap::{extract_frontiers, FrontierParams};
use crate::planner::SubstitutionTable;
use crate::scene::{generate_scene, Scene, SizeClass};
use crate::tasks::{
    emit_sft_samples, generate_substitution_tasks, generate_tasks, read_tasks, write_sft, write_tasks, TaskCounts,
    TaskSpec,
};
use crate::viz::{ascii, render_png, Layers};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "eif", version, about = "Embodied instruction following simulator and evaluation harness")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one config field, e.g. `--set max_hl_steps=20`. Repeatable.
    #[arg(long = "set", value_name = "FIELD=VALUE", global = true)]
    pub set: Vec<String>,
    /// Master seed, threaded into run seeds and task generation.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub frontier_threshold: Option<usize>,
    /// Print the effective config to stderr and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SizeArg {
    Small,
    Large,
    /// Even seeds small, odd seeds large.
    Mixed,
}

impl SizeArg {
    fn for_seed(self, seed: u64) -> SizeClass {
        match self {
            SizeArg::Small => SizeClass::Small,
            SizeArg::Large => SizeClass::Large,
            SizeArg::Mixed if seed.is_multiple_of(2) => SizeClass::Small,
            SizeArg::Mixed => SizeClass::Large,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write generated scenes as JSON files.
    GenScenes {
        /// Seed range `A..B` (half-open) or `A..=B`.
        #[arg(long, value_parser = parse_seeds, default_value = "0..1")]
        seeds: std::ops::Range<u64>,
        #[arg(long, value_enum, default_value_t = SizeArg::Mixed)]
        size: SizeArg,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Generate validated tasks for one or more scenes.
    GenTasks {
        /// Scene JSON files written by gen-scenes.
        #[arg(long = "scene", required = true)]
        scenes: Vec<PathBuf>,
        #[arg(long, default_value_t = 7)]
        n_short: usize,
        #[arg(long, default_value_t = 2)]
        n_long: usize,
        #[arg(long, default_value_t = 1)]
        n_abstract: usize,
        /// Also add tasks that name an absent object with a role-equivalent present.
        #[arg(long)]
        substitution: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one episode and write its trace.
    Run {
        /// Task corpus; `--task` is then an id in it.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Task id, or a task file whose first task is run when no corpus is given.
        #[arg(long)]
        task: String,
        #[arg(long, default_value = "oracle")]
        planner: PlannerKind,
        #[arg(long, default_value = "oracle")]
        controller: FrontierPolicy,
        #[arg(long)]
        trace: PathBuf,
    },
    /// Evaluate a planner/controller pair over a corpus.
    Eval {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value = "oracle")]
        planner: PlannerKind,
        #[arg(long, default_value = "oracle")]
        controller: FrontierPolicy,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long)]
        report: PathBuf,
        /// Per-category metrics as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run the oracle over a corpus and write planner and controller samples as JSONL.
    ExportSft {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw the agent's final map from a trace.
    Render {
        #[arg(long)]
        trace: PathBuf,
        /// `.png` for an image, anything else for ASCII.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        scale: u32,
        /// Color explored cells by their last update weight.
        #[arg(long)]
        heat: bool,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("bad --set `{0}`: expected FIELD=VALUE")]
    BadSet(String),
    #[error("unknown config field `{0}`")]
    UnknownField(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Domain(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn parse_value(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()))
}

/// Effective config from the layered sources.
pub fn resolve_config(
    global: &GlobalOpts,
    env: impl IntoIterator<Item = (String, String)>,
) -> Result<Config, CliError> {
    let base = match &global.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let mut value = serde_json::to_value(&base).expect("config serializes");
    let fields = value.as_object_mut().expect("config is an object");
    let mut set = |key: &str, v: serde_json::Value| -> Result<(), CliError> {
        match fields.get_mut(key) {
            Some(slot) => {
                *slot = v;
                Ok(())
            }
            None => Err(CliError::UnknownField(key.to_string())),
        }
    };
    let mut env: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with("EIF_")).collect();
    env.sort();
    for (k, v) in env {
        let key = k["EIF_".len()..].to_ascii_lowercase();
        if let Err(CliError::UnknownField(_)) = set(&key, parse_value(&v)) {
            eprintln!("warning: ignoring {k}, not a config field");
        }
    }
    for s in &global.set {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::BadSet(s.clone()))?;
        set(k.trim(), parse_value(v.trim()))?;
    }
    if let Some(seed) = global.seed {
        set("seed", seed.into())?;
    }
    if let Some(t) = global.frontier_threshold {
        set("frontier_threshold", t.into())?;
    }
    let cfg: Config = serde_json::from_value(value).map_err(ConfigError::from)?;
    cfg.validate()?;
    Ok(cfg)
}

fn parse_seeds(s: &str) -> Result<std::ops::Range<u64>, String> {
    let bad = || format!("expected A..B or A..=B, got `{s}`");
    let (a, b, inclusive) = match s.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => {
            let (a, b) = s.split_once("..").ok_or_else(bad)?;
            (a, b, false)
        }
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let b = if inclusive { b + 1 } else { b };
    if b <= a {
        return Err(format!("empty seed range `{s}`"));
    }
    Ok(a..b)
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(v).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(io_err(path))
}

fn load_corpus(path: &Path) -> Result<Vec<TaskSpec>, CliError> {
    read_tasks(path).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct EvalReport<'a> {
    planner: String,
    controller: String,
    config: &'a Config,
    report: SuiteReport,
    episodes: Vec<crate::eval::EpisodeResult>,
}

fn execute(cli: Cli, config: Config) -> Result<(), CliError> {
    match cli.command {
        Command::GenScenes { seeds, size, out_dir } => {
            std::fs::create_dir_all(&out_dir).map_err(io_err(&out_dir))?;
            for seed in seeds {
                let class = size.for_seed(seed);
                let scene = generate_scene(seed, class);
                let path = out_dir.join(format!("scene-{seed}-{}.json", serde_json::to_value(class).unwrap().as_str().unwrap()));
                std::fs::write(&path, scene.to_json()).map_err(io_err(&path))?;
                println!("{}", path.display());
            }
        }
        Command::GenTasks { scenes, n_short, n_long, n_abstract, substitution, out } => {
            let counts = TaskCounts { short: n_short, long: n_long, abstract_: n_abstract };
            let table = SubstitutionTable::builtin();
            let mut tasks = Vec::new();
            for path in &scenes {
                let text = std::fs::read_to_string(path).map_err(io_err(path))?;
                let scene = Scene::from_json(&text).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
                tasks.extend(generate_tasks(&scene, counts, config.seed ^ scene.seed, &config));
                if substitution {
                    tasks.extend(generate_substitution_tasks(&scene, table, &config));
                }
            }
            write_tasks(&out, &tasks).map_err(domain)?;
            println!("{} tasks written to {}", tasks.len(), out.display());
        }
        Command::Run { corpus, task, planner, controller, trace } => {
            let (tasks, corpus) = match corpus {
                Some(c) => (load_corpus(&c)?, c),
                None => (load_corpus(Path::new(&task))?, PathBuf::from(&task)),
            };
            let task = if corpus.as_os_str() == task.as_str() {
                tasks.first()
            } else {
                tasks.iter().find(|t| t.id == task)
            }
            .ok_or_else(|| CliError::Domain(format!("no task `{task}` in {}", corpus.display())))?;
            let scene = generate_scene(task.scene_seed, task.scene_size);
            let mut p = planner.build(task, &config).map_err(domain)?;
            let out = run_episode(&scene, task, p.as_mut(), controller, &config, run_seed_for(&config, task));
            let f = File::create(&trace).map_err(io_err(&trace))?;
            write_trace(BufWriter::new(f), &out.trace).map_err(io_err(&trace))?;
            println!("{}", serde_json::to_string_pretty(&out.result).expect("serializable"));
        }
        Command::Eval { corpus, planner, controller, workers, report, csv } => {
            let mut tasks = load_corpus(&corpus)?;
            let scenes = SceneCache::for_tasks(&tasks);
            if tasks.iter().any(|t| t.expert_actions.is_none()) {
                annotate_expert(&mut tasks, &scenes, &config, workers);
            }
            let results = run_suite(&tasks, &scenes, &planner, controller, &config, workers);
            let expert = expert_lengths(&results);
            let suite = compute_metrics(&results, &expert).map_err(domain)?;
            if let Some(csv) = &csv {
                std::fs::write(csv, suite.to_csv()).map_err(io_err(csv))?;
            }
            print!("{}", suite.to_csv());
            let doc = EvalReport {
                planner: planner.to_string(),
                controller: controller.to_string(),
                config: &config,
                report: suite,
                episodes: results,
            };
            write_json(&report, &doc)?;
        }
        Command::ExportSft { corpus, out } => {
            let tasks = load_corpus(&corpus)?;
            let scenes = SceneCache::for_tasks(&tasks);
            let f = File::create(&out).map_err(io_err(&out))?;
            let mut w = BufWriter::new(f);
            let (mut hp, mut lc, mut skipped) = (0, 0, 0);
            for task in &tasks {
                let scene = scenes.get(task);
                let mut p = PlannerKind::Oracle.build(task, &config).map_err(domain)?;
                let ep = run_episode(scene, task, p.as_mut(), FrontierPolicy::Oracle, &config, run_seed_for(&config, task));
                let recs = emit_sft_samples(&ep.trace, task);
                if recs.is_empty() {
                    skipped += 1;
                }
                for r in &recs {
                    match r {
                        crate::tasks::SftRecord::Hp(_) => hp += 1,
                        crate::tasks::SftRecord::Lc(_) => lc += 1,
                    }
                }
                write_sft(&mut w, &recs).map_err(io_err(&out))?;
            }
            w.flush().map_err(io_err(&out))?;
            println!("{hp} planner and {lc} controller records, {skipped} failed episodes skipped");
        }
        Command::Render { trace, out, scale, heat } => {
            let f = File::open(&trace).map_err(io_err(&trace))?;
            let records = read_trace(BufReader::new(f)).map_err(domain)?;
            let Some(TraceRecord::Header { scene_seed, scene_size, config: run_config, .. }) = records.first() else {
                return Err(CliError::Domain("trace does not start with a header".into()));
            };
            let scene = generate_scene(*scene_seed, *scene_size);
            let map = rebuild_map(&scene, &records).map_err(domain)?;
            let frontiers = extract_frontiers(&map, FrontierParams::from_config(run_config));
            let path: Vec<_> = records
                .iter()
                .filter_map(|r| match r {
                    TraceRecord::Header { start, .. } => Some(start.cell),
                    TraceRecord::Action { pose, .. } => Some(pose.cell),
                    _ => None,
                })
                .collect();
            let layers = Layers { frontiers: &frontiers, path: &path, heat };
            if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
                render_png(&map, layers, scale).save(&out).map_err(domain)?;
            } else {
                std::fs::write(&out, ascii(&map, layers, scale as usize)).map_err(io_err(&out))?;
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command, and maps the outcome to an exit code:
/// 0 success, 1 domain error, 2 usage error.
pub fn main_with(args: impl IntoIterator<Item = String>, env: impl IntoIterator<Item = (String, String)>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let config = match resolve_config(&cli.global, env) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cli.global.print_config {
        eprintln!("{}", config.to_json());
        return ExitCode::SUCCESS;
    }
    eprintln!("effective config: {}", serde_json::to_string(&config).expect("serializable"));
    match execute(cli, config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
