use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use uavplan_core::dataset::{builtin_recipe, generate_dataset, BUILTIN_RECIPES};
use uavplan_core::experiment::{run_experiment, ExperimentConfig, Mode, OracleSummary, RunReport};
use uavplan_core::geo::DEFAULT_GRID_CELLS;
use uavplan_core::io::{load_scenario, save_scenario};
use uavplan_core::oracle::DEFAULT_BUDGET;
use uavplan_core::report::{emit_outputs, OutputFormat};
use uavplan_core::{GaConfig, MissionScenario, ObjectiveSelection};

/// Multi-objective mission planner for UAV fleets under ground control stations.
#[derive(Debug, Parser)]
#[command(name = "uavplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the genetic planner on each scenario.
    Solve(RunArgs),
    /// Solve every objective singleton, pair and the full set, then rate them.
    Sweep(RunArgs),
    /// Solve and measure the hypervolume gap to the exact front.
    Compare(RunArgs),
    /// Write built-in synthetic scenarios as JSON files.
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario JSON file (repeatable).
    #[arg(long = "scenario", value_name = "FILE")]
    scenarios: Vec<PathBuf>,
    /// Built-in recipe name, or `all` (repeatable, comma-separated).
    #[arg(long = "recipe", value_name = "NAME", value_delimiter = ',')]
    recipes: Vec<String>,
    /// Master seed; per-repetition seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    population: usize,
    #[arg(long, default_value_t = 100)]
    elite: usize,
    #[arg(long = "mutation-prob", default_value_t = 0.1)]
    mutation_prob: f64,
    /// Generation cap.
    #[arg(long, default_value_t = 300)]
    generations: usize,
    /// Stop after this many generations without an archive change.
    #[arg(long = "stop-generations", default_value_t = 10)]
    stop_generations: usize,
    /// Comma-separated subset of uavs,flight-time,fuel,distance,cost,makespan.
    #[arg(long, default_value = "distance,makespan")]
    objectives: ObjectiveSelection,
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Path-planning grid resolution per axis.
    #[arg(long = "grid-cells", default_value_t = DEFAULT_GRID_CELLS)]
    grid_cells: usize,
    /// Node budget of the exact front search.
    #[arg(long = "oracle-budget", default_value_t = DEFAULT_BUDGET)]
    oracle_budget: u64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Output kinds: csv, report, plot (repeatable, comma-separated).
    #[arg(long = "format", value_delimiter = ',', default_values = ["report", "csv"])]
    formats: Vec<OutputFormat>,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Built-in recipe name, or `all` (repeatable, comma-separated).
    #[arg(
        long = "recipe",
        value_name = "NAME",
        value_delimiter = ',',
        required = true
    )]
    recipes: Vec<String>,
    /// Replaces the recipe's own seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn expand(names: &[String]) -> Vec<String> {
    names
        .iter()
        .flat_map(|n| {
            if n == "all" {
                BUILTIN_RECIPES.iter().map(|s| s.to_string()).collect()
            } else {
                vec![n.clone()]
            }
        })
        .collect()
}

fn generate(name: &str, seed: Option<u64>) -> Result<MissionScenario> {
    let Some(mut recipe) = builtin_recipe(name) else {
        bail!(
            "unknown recipe `{name}` (expected one of {} or all)",
            BUILTIN_RECIPES.join(", ")
        );
    };
    if let Some(seed) = seed {
        recipe.seed = seed;
    }
    Ok(generate_dataset(&recipe)?)
}

fn load_inputs(args: &RunArgs) -> Result<Vec<MissionScenario>> {
    let mut out = Vec::new();
    for path in &args.scenarios {
        let mut s = load_scenario(path)?;
        if s.name.is_empty() {
            s.name = path
                .file_stem()
                .map_or_else(|| "scenario".into(), |n| n.to_string_lossy().into_owned());
        }
        out.push(s);
    }
    for name in expand(&args.recipes) {
        out.push(generate(&name, None)?);
    }
    if out.is_empty() {
        bail!("no input: pass --scenario FILE or --recipe NAME");
    }
    Ok(out)
}

fn print_summary(report: &RunReport) {
    for s in &report.scenarios {
        let mut line = format!(
            "{}: {} solutions, converged at generation {} of {}",
            s.scenario,
            s.archive.len(),
            s.converged_at,
            s.generations
        );
        match (&s.oracle, &s.gap) {
            (Some(OracleSummary::BudgetExceeded { budget }), _) => {
                line += &format!(", exact front over budget ({budget} nodes)");
            }
            (_, Some(gap)) => line += &format!(", hypervolume gap {:.6}", gap.hypervolume),
            _ => {}
        }
        println!("{line}");
    }
}

fn run(args: RunArgs, mode: Mode) -> Result<()> {
    let scenarios = load_inputs(&args)?;
    let config = ExperimentConfig {
        ga: GaConfig {
            population_size: args.population,
            elite_size: args.elite,
            mutation_probability: args.mutation_prob,
            max_generations: args.generations,
            stop_generations: args.stop_generations,
            seed: args.seed,
            objectives: args.objectives,
        },
        repetitions: args.repetitions,
        grid_cells: args.grid_cells,
        oracle_budget: args.oracle_budget,
    };
    let report = run_experiment(&scenarios, &config, mode)?;
    print_summary(&report);
    let written = emit_outputs(&report, &args.formats, &args.out)?;
    print_written(&written);
    Ok(())
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn write_generated(args: GenerateArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut written = Vec::new();
    for name in expand(&args.recipes) {
        let s = generate(&name, args.seed)?;
        let path = Path::new(&args.out).join(format!("{name}.json"));
        save_scenario(&path, &s)?;
        written.push(path);
    }
    print_written(&written);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => run(a, Mode::Solve),
        Command::Sweep(a) => run(a, Mode::SweepObjectives),
        Command::Compare(a) => run(a, Mode::OracleCompare),
        Command::Generate(a) => write_generated(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
