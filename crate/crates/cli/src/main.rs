#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use strip_control::geometry::model_box;

mod output;
mod scenario;
mod sweep;
mod tasks;

use output::{format_float, write_all, Cell, Plot, Table};
use scenario::Scenario;

#[derive(Parser, Debug)]
#[command(name = "strip-control", version, about = "Null-controllability experiments on the strip")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for tasks that draw random states; overrides the scenario's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the scenario's `output`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for sweeps and parallel kernels.
    #[arg(long, global = true, env = "STRIP_CONTROL_WORKERS")]
    workers: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one scenario.
    Run { file: PathBuf },
    /// Run a scenario over the Cartesian product of its `[sweep]` ranges.
    Sweep { file: PathBuf },
    /// Set inspection.
    Geometry {
        #[command(subcommand)]
        action: GeometryCommand,
    },
}

#[derive(Subcommand, Debug)]
enum GeometryCommand {
    /// Print the set's decomposition over the model box as one box per row.
    Dump { file: PathBuf },
}

fn read(file: &Path) -> Result<String> {
    fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))
}

fn load(file: &Path, cli: &Cli) -> Result<Scenario> {
    let mut s = scenario::parse(&read(file)?).with_context(|| format!("parsing {}", file.display()))?;
    if cli.seed.is_some() {
        s.seed = cli.seed;
    }
    scenario::validate(&s)?;
    Ok(s)
}

fn out_dir(cli: &Cli, s: &Scenario) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| s.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    if workers == Some(0) {
        bail!("--workers must be at least 1");
    }
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers.unwrap_or(0)).build()?)
}

fn manifest(command: &str, cli: &Cli, s: &Scenario, extra: serde_json::Value, files: &[&str], start: Instant) -> String {
    let m = json!({
        "tool": "strip-control",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "task": s.task.name(),
        "seed": s.seed,
        "workers": cli.workers,
        "scenario": s,
        "sweep": extra,
        "files": files,
        "wall_time_seconds": start.elapsed().as_secs_f64(),
    });
    serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n"
}

fn run(cli: &Cli, file: &Path) -> Result<()> {
    let start = Instant::now();
    let s = load(file, cli)?;
    let out = pool(cli.workers)?.install(|| tasks::run_task(&s))?;
    let names = ["results.csv", "plot.csv", "manifest.json"];
    let files = [
        (names[0], out.table.to_csv()),
        (names[1], out.plot.to_csv()),
        (names[2], manifest("run", cli, &s, serde_json::Value::Null, &names, start)),
    ];
    for p in write_all(&out_dir(cli, &s), &files)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn run_sweep(cli: &Cli, file: &Path) -> Result<()> {
    let start = Instant::now();
    let text = read(file)?;
    let mut table = scenario::parse_table(&text).with_context(|| format!("parsing {}", file.display()))?;
    let spec = match table.remove("sweep") {
        Some(toml::Value::Table(t)) => t,
        Some(_) => bail!("sweep must be a table"),
        None => bail!("{} has no [sweep] table", file.display()),
    };
    let axes = sweep::axes(&spec)?;
    let points = sweep::expand(&table, &axes)?;

    // Every point is validated before any work starts.
    let scenarios: Vec<Scenario> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut s = scenario::from_table(p.scenario.clone()).with_context(|| format!("sweep point {i}"))?;
            if cli.seed.is_some() {
                s.seed = cli.seed;
            }
            scenario::validate(&s).with_context(|| format!("sweep point {i}"))?;
            Ok(s)
        })
        .collect::<Result<_>>()?;

    let results: Vec<Result<tasks::TaskOutput>> =
        pool(cli.workers)?.install(|| scenarios.par_iter().map(tasks::run_task).collect());

    let mut csv: Option<Table> = None;
    let mut plot = Plot::default();
    for (i, (p, r)) in points.iter().zip(results).enumerate() {
        let r = r.with_context(|| format!("sweep point {i}"))?;
        let digest = r.digest().with_context(|| format!("sweep point {i}"))?;
        let t = csv.get_or_insert_with(|| {
            let mut header: Vec<String> = axes.iter().map(|a| a.key.clone()).collect();
            header.extend(digest.header.iter().cloned());
            Table { header, rows: Vec::new() }
        });
        let mut row: Vec<Cell> = p.coords.iter().map(|(_, v)| Cell::Text(sweep::render(v))).collect();
        row.extend(digest.rows[0].iter().cloned());
        t.push(row);

        let x = sweep::as_number(&p.coords[0].1).unwrap_or(i as f64);
        let series = if p.coords.len() > 1 {
            p.coords[1..]
                .iter()
                .map(|(k, v)| format!("{k}={}", sweep::render(v)))
                .collect::<Vec<_>>()
                .join(";")
        } else {
            r.headline.to_string()
        };
        if let Some(y) = digest.column(r.headline).and_then(|c| digest.rows[0][c].as_f64()) {
            plot.push(x, y, &series);
        }
    }
    let csv = csv.expect("at least one sweep point");
    let base = &scenarios[0];
    let names = ["sweep.csv", "plot.csv", "manifest.json"];
    let sweep_json = json!({
        "axes": axes.iter().map(|a| json!({"key": a.key, "values": a.values})).collect::<Vec<_>>(),
        "points": points.len(),
    });
    let files = [
        (names[0], csv.to_csv()),
        (names[1], plot.to_csv()),
        (names[2], manifest("sweep", cli, base, sweep_json, &names, start)),
    ];
    for p in write_all(&out_dir(cli, base), &files)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn geometry_dump(cli: &Cli, file: &Path) -> Result<()> {
    let s = scenario::parse(&read(file)?).with_context(|| format!("parsing {}", file.display()))?;
    let domain = scenario::domain_of(&s)?;
    let set = scenario::set_of(&s, &domain)?;
    let boxes = set.decompose(&model_box(&domain));
    let mut csv: Vec<String> = (0..domain.dim()).flat_map(|j| [format!("lo_{j}"), format!("hi_{j}")]).collect();
    let mut text = csv.join(",") + "\n";
    for b in &boxes {
        csv = b
            .intervals
            .iter()
            .flat_map(|iv| [format_float(iv.lo), format_float(iv.hi)])
            .collect();
        text.push_str(&csv.join(","));
        text.push('\n');
    }
    match &cli.out_dir {
        Some(dir) => {
            for p in write_all(dir, &[("boxes.csv", text)])? {
                println!("{}", p.display());
            }
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { file } => run(&cli, file),
        Command::Sweep { file } => run_sweep(&cli, file),
        Command::Geometry {
            action: GeometryCommand::Dump { file },
        } => geometry_dump(&cli, file),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
