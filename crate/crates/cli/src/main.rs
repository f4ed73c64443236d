use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use hrgame::domain::DEFAULT_STATE_CAPACITY;
use hrgame::exec::{Engine, EngineConfig};
use hrgame::explicit::{export_explicit, import_explicit, write_strategy};
use hrgame::game::TurnModel;
use hrgame::pipeline::{build_task_product, synthesize_task};
use hrgame::product::ProductGame;
use hrgame::scenarios::{bench_csv, bench_matrix, run_bench, BenchOptions, Scenario};
use hrgame::solver::synthesize;
use hrgame::{parse, Objective, Player, SolverOptions, StochasticGame};

#[derive(Parser)]
#[command(name = "hrgame", version, about = "Strategy synthesis for human-robot games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario for a task and write the robot's strategy.
    Synth {
        #[arg(long)]
        scenario: PathBuf,
        /// LTLf task; defaults to the scenario's own.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
        /// Strategy file, indexed by product state.
        #[arg(long, default_value = "model.str")]
        out: PathBuf,
        /// Also write the product in explicit form to this directory.
        #[arg(long)]
        product_dir: Option<PathBuf>,
        /// Sweep worker threads (0 = all cores).
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Write a scenario's game (or, with --formula, its product) as explicit files.
    Export {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read explicit files, check them and optionally solve reachability of a label.
    Import {
        #[arg(long)]
        dir: PathBuf,
        /// Label whose states are the target.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        #[arg(long, value_enum)]
        objective: Option<ObjectiveArg>,
    },
    /// Build and solve a matrix of generated pick-and-place worlds.
    Bench {
        /// Object counts, e.g. `1..3` or `1,3`.
        #[arg(long, default_value = "1..3")]
        objects: String,
        #[arg(long, default_value = "5..8")]
        locations: String,
        /// `ratio:R:H` or `prob_termination:P`; repeatable.
        #[arg(long = "turn-model", default_values_t = ["ratio:1:1".to_string(), "prob_termination:0.05".to_string()])]
        turn_models: Vec<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Run cells one after another.
        #[arg(long)]
        sequential: bool,
    },
    /// Run the HTTP play service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "scenarios")]
        scenarios: PathBuf,
        /// Directory with the UI bundle.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Accept human moves during the robot's turn.
        #[arg(long)]
        interruptible: bool,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ObjectiveArg {
    Max,
    Min,
}

impl From<ObjectiveArg> for Objective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Max => Objective::Maximize,
            ObjectiveArg::Min => Objective::Minimize,
        }
    }
}

/// Parses `a..b` (inclusive), `a,b,c` or a single number.
fn parse_list(text: &str) -> Result<Vec<usize>> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().with_context(|| format!("bad range start in '{text}'"))?;
        let b: usize = b.trim_start_matches('=').trim().parse().with_context(|| format!("bad range end in '{text}'"))?;
        if a > b {
            bail!("empty range '{text}'");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|x| x.trim().parse().with_context(|| format!("bad number '{x}'")))
        .collect()
}

fn load_scenario(path: &Path) -> Result<Scenario> {
    Ok(Scenario::from_file(path)?)
}

fn synth(
    scenario: &Path,
    formula: Option<&str>,
    eps: f64,
    objective: Option<Objective>,
    out: &Path,
    product_dir: Option<&Path>,
    threads: usize,
) -> Result<()> {
    let sc = load_scenario(scenario)?;
    let formula = match formula {
        Some(f) => parse(f)?,
        None => sc.formula.clone(),
    };
    let objective = objective.unwrap_or(sc.objective);
    let game: StochasticGame = sc.build_game(DEFAULT_STATE_CAPACITY)?;
    let opts = SolverOptions {
        epsilon: eps,
        objective,
        threads,
        ..SolverOptions::default()
    };
    let done = synthesize_task(&game, &formula, &opts)?;
    write_strategy(&done.product.graph, &done.synthesis.strategy, out)?;
    if let Some(dir) = product_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        export_explicit(&done.product, dir)?;
    }
    println!("scenario: {}", sc.name);
    println!("formula: {formula}");
    println!("objective: {}", if objective == Objective::Maximize { "max" } else { "min" });
    println!("game: {} states, {} transitions", game.num_states(), game.num_transitions());
    println!(
        "product: {} states, {} transitions, {} target",
        done.product.num_states(),
        done.product.num_transitions(),
        done.product.target_states().count()
    );
    println!("iterations: {}", done.synthesis.values.iterations);
    println!("value: {}", done.initial_value());
    println!("strategy: {}", out.display());
    Ok(())
}

fn export(scenario: &Path, formula: Option<&str>, out: &Path) -> Result<()> {
    let sc = load_scenario(scenario)?;
    let game: StochasticGame = sc.build_game(DEFAULT_STATE_CAPACITY)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match formula {
        None => {
            export_explicit(&game, out)?;
            println!("game: {} states written to {}", game.num_states(), out.display());
        }
        Some(f) => {
            let (_, product) = build_task_product(&game, &parse(f)?)?;
            export_explicit(&product, out)?;
            println!("product: {} states written to {}", product.num_states(), out.display());
        }
    }
    Ok(())
}

fn import(dir: &Path, target: Option<&str>, eps: f64, objective: Option<Objective>) -> Result<()> {
    let game: StochasticGame = import_explicit(dir)?;
    let robot = game.graph.player.iter().filter(|&&p| p == Player::Robot).count();
    println!(
        "states: {} ({} robot, {} human)",
        game.num_states(),
        robot,
        game.num_states() - robot
    );
    println!("choices: {}", game.graph.num_choices());
    println!("transitions: {}", game.num_transitions());
    let props: Vec<String> = game.propositions.iter().map(|p| p.to_string()).collect();
    println!("labels: {}", props.join(" "));
    if let Some(name) = target {
        if !game.propositions.iter().any(|p| p.as_str() == name) {
            bail!("no label '{name}' in {}", dir.display());
        }
        let mask = game.labels.iter().map(|l| l.iter().any(|p| p.as_str() == name)).collect();
        let pg = ProductGame::from_graph(game.graph.clone(), mask);
        let opts = SolverOptions {
            epsilon: eps,
            objective: objective.unwrap_or_default(),
            ..SolverOptions::default()
        };
        let syn = synthesize(&pg, &opts)?;
        println!("value: {}", syn.values.values[pg.initial()]);
    }
    Ok(())
}

fn bench(objects: &str, locations: &str, turn_models: &[String], csv: Option<&Path>, eps: f64, sequential: bool) -> Result<()> {
    let tms = turn_models
        .iter()
        .map(|t| t.parse::<TurnModel>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let cells = bench_matrix(&parse_list(objects)?, &parse_list(locations)?, &tms);
    if cells.is_empty() {
        bail!("empty benchmark matrix");
    }
    let opts = BenchOptions {
        solver: SolverOptions {
            epsilon: eps,
            ..SolverOptions::default()
        },
        parallel: !sequential,
        ..BenchOptions::default()
    };
    let rows = run_bench(&cells, &opts)?;
    let text = bench_csv(&rows);
    match csv {
        Some(path) => {
            fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            println!("{} rows written to {}", rows.len(), path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn serve(port: u16, host: &str, scenarios: &Path, static_dir: Option<PathBuf>, eps: f64, interruptible: bool) -> Result<()> {
    let loaded = Scenario::load_dir(scenarios)?;
    let names: Vec<&str> = loaded.iter().map(|s| s.name.as_str()).collect();
    println!("scenarios: {}", names.join(", "));
    let config = EngineConfig {
        epsilon: eps,
        interruptible,
        ..EngineConfig::default()
    };
    let engine = Arc::new(Engine::new(loaded, config));
    let addr: SocketAddr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
    println!("listening on http://{addr}");
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(hrgame_server::serve(addr, engine, static_dir))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            scenario,
            formula,
            eps,
            objective,
            out,
            product_dir,
            threads,
        } => synth(&scenario, formula.as_deref(), eps, objective.map(Into::into), &out, product_dir.as_deref(), threads),
        Command::Export { scenario, formula, out } => export(&scenario, formula.as_deref(), &out),
        Command::Import {
            dir,
            target,
            eps,
            objective,
        } => import(&dir, target.as_deref(), eps, objective.map(Into::into)),
        Command::Bench {
            objects,
            locations,
            turn_models,
            csv,
            eps,
            sequential,
        } => bench(&objects, &locations, &turn_models, csv.as_deref(), eps, sequential),
        Command::Serve {
            port,
            host,
            scenarios,
            static_dir,
            eps,
            interruptible,
        } => serve(port, &host, &scenarios, static_dir, eps, interruptible),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
