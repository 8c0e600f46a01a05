use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use loadsim_core::analysis::{
    export_trajectory, histogram2d, histogram_svg, match_actions, pareto_front, pile_names, scatter_svg,
    select_poi_with, trend_tests, Field, PerformancePoint,
};
use loadsim_core::config::{
    build_parameter_grid, enumerate_campaign, run_id, validate_config, ActionParams, Decimal, DefaultPolicy,
    ResolvedConfig,
};
use loadsim_core::sim::{events_csv, run_loading_cycle_with, LoadingRecord, RunOptions};
use loadsim_core::sweep::{
    execute_campaign, read_results, throughput_report, ExecOptions, ResultStore, MANIFEST_FILE, RESULTS_FILE,
};

#[derive(Parser)]
#[command(name = "loadsim", version, about = "Wheel-loader bucket loading simulator and sweep analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a factorial campaign over piles and the action grid.
    Sweep(SweepArgs),
    /// Histograms, scatter plot, Pareto front and trend statistics from a results directory.
    Analyze(AnalyzeArgs),
    /// Print the four points of interest of one pile.
    Poi(PoiArgs),
    /// Re-simulate one run with its time series and export trajectory data and a figure.
    Trajectory(TrajectoryArgs),
    /// Simulate a single loading cycle.
    Run(RunArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ResolvedConfig> {
        match &self.config {
            None => Ok(ResolvedConfig::default()),
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                validate_config(&text, DefaultPolicy::Allow).with_context(|| format!("invalid config {}", path.display()))
            }
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Comma-separated pile names; all configured piles when omitted.
    #[arg(long, value_delimiter = ',')]
    piles: Vec<String>,
    #[arg(long, default_value_t = default_workers())]
    workers: usize,
    #[arg(long)]
    out: PathBuf,
    /// Continue an interrupted campaign in `--out`.
    #[arg(long)]
    resume: bool,
    /// Stop after this many new runs.
    #[arg(long)]
    limit: Option<usize>,
    /// Evaluate only the first N actions of the grid.
    #[arg(long)]
    actions: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Campaign directory holding results.csv.
    #[arg(long)]
    results: PathBuf,
    /// Pile name; every pile in the results when omitted.
    #[arg(long)]
    pile: Option<String>,
    /// Two fields to histogram, e.g. `mass,time`.
    #[arg(long, value_delimiter = ',')]
    hist: Vec<String>,
    /// Bin counts for the histogram axes, e.g. `50,40`.
    #[arg(long, value_delimiter = ',')]
    bins: Vec<usize>,
    /// Write the P_p/P_e scatter plot and Pareto front.
    #[arg(long)]
    scatter: bool,
    /// Target performance `P_p,P_e` for action matching across piles.
    #[arg(long = "match", value_delimiter = ',')]
    target: Vec<f64>,
    /// Normalized matching radius.
    #[arg(long, default_value_t = 0.02)]
    radius: f64,
    /// Output directory; defaults to `<results>/analysis`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PoiArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    pile: String,
    /// Use this run as the Pareto choice instead of the normalized-product pick.
    #[arg(long)]
    pareto: Option<String>,
}

#[derive(Args)]
struct TrajectoryArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long = "run")]
    run_id: String,
    /// Campaign directory whose manifest lists the run; otherwise the configured campaign is searched.
    #[arg(long)]
    results: Option<PathBuf>,
    #[arg(long, default_value = "trajectory")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value = "gravel-30")]
    pile: String,
    /// Eight comma-separated action parameters (α7, α8 in degrees).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Vec<String>,
    /// Write the time series and event list into `--out`.
    #[arg(long)]
    log_series: bool,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Sweep(args) => sweep(args),
        Command::Analyze(args) => analyze(args),
        Command::Poi(args) => poi(args),
        Command::Trajectory(args) => trajectory(args),
        Command::Run(args) => run(args),
    }
}

fn sweep(args: SweepArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let piles = if args.piles.is_empty() {
        cfg.piles.clone()
    } else {
        args.piles
            .iter()
            .map(|name| cfg.pile(name).cloned().with_context(|| format!("unknown pile `{name}`")))
            .collect::<Result<Vec<_>>>()?
    };
    let mut grid = build_parameter_grid(&cfg.grid_values)?;
    if let Some(n) = args.actions {
        grid.truncate(n);
    }
    let manifest = enumerate_campaign(&piles, &grid, &cfg.machine)?;
    let mut store = ResultStore::open(&args.out, &manifest, args.resume)?;
    eprintln!(
        "{} runs, {} already stored, {} workers",
        manifest.len(),
        store.completed().len(),
        args.workers
    );
    let options = ExecOptions {
        workers: args.workers,
        limit: args.limit,
    };
    let summary = execute_campaign(&manifest, &cfg.machine, &cfg.control, options, &mut store)?;
    let report = throughput_report(&summary);
    println!("executed {} runs in {:.1} s ({} remaining)", summary.executed, report.wall_seconds, summary.remaining);
    for (flag, n) in &summary.flags {
        println!("  {flag}: {n}");
    }
    println!(
        "throughput {:.0} runs/core-hour, {:.0} runs/hour wall",
        report.runs_per_core_hour, report.runs_per_wall_hour
    );
    match &summary.results {
        Some(path) => println!("results: {}", path.display()),
        None => println!("campaign incomplete; rerun with --resume"),
    }
    Ok(())
}

fn load_results(dir: &Path) -> Result<Vec<LoadingRecord>> {
    let path = dir.join(RESULTS_FILE);
    read_results(&path).with_context(|| format!("reading {}", path.display()))
}

fn analyze(args: AnalyzeArgs) -> Result<()> {
    let _ = args.config.load()?;
    let records = load_results(&args.results)?;
    let out = args.out.clone().unwrap_or_else(|| args.results.join("analysis"));
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let piles = match &args.pile {
        Some(p) => vec![p.clone()],
        None => pile_names(&records),
    };

    let report = trend_tests(&records);
    fs::write(out.join("trends.txt"), report.to_text())?;
    print!("{}", report.to_text());

    for pile in &piles {
        let rows: Vec<LoadingRecord> = records.iter().filter(|r| &r.pile == pile).cloned().collect();
        ensure!(!rows.is_empty(), "no records for pile `{pile}`");

        if !args.hist.is_empty() {
            ensure!(args.hist.len() == 2, "--hist takes exactly two fields");
            let (xf, yf) = (Field::from_str(&args.hist[0])?, Field::from_str(&args.hist[1])?);
            let (mut xb, mut yb) = (xf.default_bins(), yf.default_bins());
            if let [nx, ny] = args.bins[..] {
                (xb.count, yb.count) = (nx, ny);
            }
            let h = histogram2d(&rows, xf, yf, xb, yb)?;
            let stem = out.join(format!("{pile}_hist_{xf}_{yf}"));
            fs::write(stem.with_extension("csv"), h.to_csv())?;
            fs::write(stem.with_extension("svg"), histogram_svg(&format!("{pile}: {xf} vs {yf}"), &h))?;
            println!("{pile}: histogram of {} runs -> {}.{{csv,svg}}", h.total(), stem.display());
        }

        if args.scatter {
            let points: Vec<PerformancePoint> =
                rows.iter().filter(|r| r.flag.is_finished()).map(PerformancePoint::from).collect();
            let front = pareto_front(&points);
            let poi = select_poi_with(&rows, None);
            let mut csv = String::from("run_id,P_p_kg_per_s,P_e_kg_per_kJ,m_load_kg\n");
            for p in &front {
                csv += &format!("{},{},{},{}\n", p.run_id, p.p_p, p.p_e, p.m_load);
            }
            fs::write(out.join(format!("{pile}_pareto.csv")), csv)?;
            fs::write(out.join(format!("{pile}_scatter.svg")), scatter_svg(pile, &points, &front, poi.as_ref()))?;
            println!("{pile}: {} finished runs, {} on the Pareto front", points.len(), front.len());
        }

        if !args.target.is_empty() {
            ensure!(args.target.len() == 2, "--match takes `P_p,P_e`");
            let others: Vec<Vec<LoadingRecord>> = pile_names(&records)
                .into_iter()
                .filter(|p| p != pile)
                .map(|p| records.iter().filter(|r| r.pile == p).cloned().collect())
                .collect();
            let other_refs: Vec<&[LoadingRecord]> = others.iter().map(Vec::as_slice).collect();
            let m = match_actions(&rows, (args.target[0], args.target[1]), args.radius, &other_refs);
            let mut csv = String::from("pile,run_id,P_p_kg_per_s,P_e_kg_per_kJ,m_load_kg,alpha\n");
            for r in m.source.iter().chain(m.matches.values().flatten()) {
                csv += &format!("{},{},{},{},{},\"{}\"\n", r.pile, r.run_id, r.p_p, r.p_e, r.m_load, r.action.canonical());
            }
            fs::write(out.join(format!("{pile}_matches.csv")), csv)?;
            println!("{pile}: {} runs near ({}, {}), matched on {} other piles", m.source.len(), args.target[0], args.target[1], m.matches.len());
        }
    }
    Ok(())
}

fn poi(args: PoiArgs) -> Result<()> {
    let _ = args.config.load()?;
    let records = load_results(&args.results)?;
    let rows: Vec<LoadingRecord> = records.into_iter().filter(|r| r.pile == args.pile).collect();
    ensure!(!rows.is_empty(), "no records for pile `{}`", args.pile);
    let poi = select_poi_with(&rows, args.pareto.as_deref()).context("no finished runs")?;
    println!("mark,run_id,P_p_kg_per_s,P_e_kg_per_kJ,m_load_kg,alpha");
    for (mark, p) in [
        ("efficiency", &poi.best_efficiency),
        ("productivity", &poi.best_productivity),
        ("pareto", &poi.pareto_choice),
        ("mass", &poi.best_mass),
    ] {
        let action = rows.iter().find(|r| r.run_id == p.run_id).map(|r| r.action.canonical()).unwrap_or_default();
        println!("{mark},{},{:.1},{:.2},{:.0},\"{action}\"", p.run_id, p.p_p, p.p_e, p.m_load);
    }
    Ok(())
}

fn parse_action(values: &[String]) -> Result<ActionParams> {
    ensure!(values.len() == 8, "expected 8 action parameters, got {}", values.len());
    let mut alpha = [Decimal::ZERO; 8];
    for (slot, v) in alpha.iter_mut().zip(values) {
        *slot = Decimal::from_str(v)?;
    }
    Ok(ActionParams::new(alpha)?)
}

/// Pile name and action of `id` from a campaign manifest.
fn find_in_manifest(dir: &Path, id: &str) -> Result<(String, ActionParams)> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let line = text
        .lines()
        .skip(1)
        .find(|l| l.split(',').next() == Some(id))
        .with_context(|| format!("run `{id}` not in {}", path.display()))?;
    let fields: Vec<String> = line.split(',').map(str::to_string).collect();
    ensure!(fields.len() == 11, "malformed manifest row for `{id}`");
    Ok((fields[1].clone(), parse_action(&fields[2..10])?))
}

fn trajectory(args: TrajectoryArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let (pile_name, action) = match &args.results {
        Some(dir) => find_in_manifest(dir, &args.run_id)?,
        None => {
            let grid = build_parameter_grid(&cfg.grid_values)?;
            cfg.piles
                .iter()
                .find_map(|p| grid.iter().find(|a| run_id(p, a) == args.run_id).map(|a| (p.name.clone(), *a)))
                .with_context(|| format!("run `{}` not in the configured campaign", args.run_id))?
        }
    };
    let pile = cfg.pile(&pile_name).with_context(|| format!("pile `{pile_name}` not in config"))?;
    let output = run_loading_cycle_with(pile, &cfg.machine, &action, &cfg.control, 0, RunOptions { log_series: true });
    if output.record.run_id != args.run_id {
        bail!("configuration differs from the campaign: run id is now {}", output.record.run_id);
    }
    let series = output.series.as_ref().expect("series requested");
    let files = export_trajectory(&args.run_id, series, &output.pile, &args.out)?;
    let series_path = args.out.join(format!("{}_series.csv", args.run_id));
    fs::write(&series_path, series.to_csv())?;
    println!(
        "{}: m_load {:.0} kg, t_load {:.2} s, flag {}",
        args.run_id, output.record.m_load, output.record.t_load, output.record.flag
    );
    for p in [&files.tip_csv, &files.surface_csv, &files.svg, &series_path] {
        println!("  {}", p.display());
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = args.config.load()?;
    let pile = cfg.pile(&args.pile).with_context(|| format!("unknown pile `{}`", args.pile))?;
    let action = parse_action(&args.alpha)?;
    let id = run_id(pile, &action);
    let output = run_loading_cycle_with(
        pile,
        &cfg.machine,
        &action,
        &cfg.control,
        loadsim_core::config::run_seed(&id),
        RunOptions { log_series: args.log_series },
    );
    let r = &output.record;
    println!("run_id   {}", r.run_id);
    println!("flag     {}", r.flag);
    println!("m_load   {:.1} kg", r.m_load);
    println!("t_load   {:.2} s", r.t_load);
    println!("W        {:.1} kJ", r.work);
    println!("s_load   {:.3} %", r.s_load);
    println!("P_e      {:.3} kg/kJ", r.p_e);
    println!("P_p      {:.1} kg/s", r.p_p);
    println!("P_b      {:.3}", r.p_b);
    if let Some(series) = &output.series {
        fs::create_dir_all(&args.out)?;
        let series_path = args.out.join(format!("{}_series.csv", r.run_id));
        let events_path = args.out.join(format!("{}_events.csv", r.run_id));
        fs::write(&series_path, series.to_csv())?;
        fs::write(&events_path, events_csv(&output.events))?;
        println!("series   {}", series_path.display());
        println!("events   {}", events_path.display());
    }
    Ok(())
}
