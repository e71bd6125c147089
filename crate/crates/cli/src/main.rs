//! `shellcrack` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use shellcrack::analysis::{buckling_mode, crack_stiffness};
use shellcrack::enrichment::write_comparison_csv;
use shellcrack::io::config::{AnalysisKind, SweepParameter};
use shellcrack::io::table::{
    buckling_table, convergence_table, frequency_table, length_table, parameter_table,
};
use shellcrack::io::{
    parse_config, sample_modeshape, write_modeshape, write_table, ModeShapeGrid, Provenance,
    RunConfig,
};
use shellcrack::verification::{
    all_hard_checks_pass, checks_table, conversion_report, golden_checks,
};
use shellcrack::{
    convergence_study, crack_position_sweep, critical_load_on_mesh, depth_sweep, length_sweep,
    natural_frequencies, presets, Error, ModeSelection, Result, SweepSettings, Technique,
};

#[derive(Parser, Debug)]
#[command(
    name = "shellcrack",
    version,
    about = "Buckling and vibration of cracked thin cylindrical shells"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named preset; overrides the config's `preset` key.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Crack embedding technique.
    #[arg(long, global = true, value_parser = parse_technique)]
    technique: Option<Technique>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Inclusive circumferential mode range, e.g. `1..15`.
    #[arg(long = "n-range", global = true, value_name = "A..B", value_parser = parse_n_range)]
    n_range: Option<[u32; 2]>,
    /// Worker threads for per-mode solves.
    #[arg(long, global = true, value_name = "K")]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Critical buckling load per circumferential mode.
    Buckle,
    /// Natural frequencies per circumferential mode.
    Vibrate,
    /// Critical load over a crack depth, position or length grid.
    Sweep,
    /// Critical load for a sequence of element counts.
    Converge,
    /// Sampled buckling mode shape.
    Modeshape,
    /// Golden-value checks and the conversion-matrix comparison.
    Verify,
}

fn parse_technique(s: &str) -> std::result::Result<Technique, String> {
    match s {
        "conversion" => Ok(Technique::Conversion),
        "spring_set" | "spring-set" => Ok(Technique::SpringSet),
        _ => Err(format!(
            "unknown technique `{s}` (expected conversion or spring_set)"
        )),
    }
}

fn parse_n_range(s: &str) -> std::result::Result<[u32; 2], String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let parse = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a > b {
        return Err(format!("empty range {a}..{b}"));
    }
    Ok([a, b])
}

fn load_config(common: &Common, kind: Option<AnalysisKind>) -> Result<RunConfig> {
    let mut cfg = match (&common.config, &common.preset) {
        (Some(path), preset) => parse_config(path, preset.as_deref())?,
        (None, Some(name)) => RunConfig::preset_only(name)?,
        (None, None) => {
            return Err(Error::Config(format!(
                "need --config or --preset (presets: {})",
                presets::NAMES.join(", ")
            )))
        }
    };
    if let Some(t) = common.technique {
        cfg.technique = t;
    }
    if let Some(dir) = &common.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(r) = common.n_range {
        cfg.analysis.n_range = r;
    }
    if common.jobs.is_some() {
        cfg.solver.jobs = common.jobs;
    }
    if let Some(kind) = kind {
        cfg.analysis.kind = kind;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn written(path: &Path) {
    println!("wrote {}", path.display());
}

/// Canonical resolved config next to the results; its hash is in every header.
fn save_config(cfg: &RunConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("run_config.toml");
    std::fs::write(&path, cfg.to_toml()?)?;
    written(&path);
    Ok(())
}

fn settings(cfg: &RunConfig) -> SweepSettings {
    SweepSettings {
        options: cfg.options(),
        ..SweepSettings::new(cfg.n_elements(), cfg.technique, cfg.analysis.modes())
    }
}

fn selection(cfg: &RunConfig) -> ModeSelection {
    cfg.analysis
        .mode
        .map_or(ModeSelection::Minimum, ModeSelection::Mode)
}

fn buckle(cfg: &RunConfig) -> Result<()> {
    let model = cfg.model()?;
    let mesh = cfg.mesh_for(&model)?;
    let sweep = critical_load_on_mesh(&model, &mesh, cfg.analysis.modes(), &cfg.options())?;
    for f in &sweep.failures {
        warn!("n={}: {}", f.n, f.error);
    }
    let min = sweep.select(ModeSelection::Minimum)?;
    println!(
        "critical n={} lambda={:.6e} normalized_load={:.6}",
        min.n, min.lambda, min.normalized_load
    );
    let path = cfg.output.dir.join("buckling.csv");
    write_table(
        &buckling_table(&sweep),
        &Provenance::from_config(cfg)?,
        &path,
    )?;
    written(&path);
    Ok(())
}

fn vibrate(cfg: &RunConfig) -> Result<()> {
    let model = cfg.model()?;
    let mesh = cfg.mesh_for(&model)?;
    let modes: Vec<u32> = cfg.analysis.modes().collect();
    let result = natural_frequencies(
        &model,
        &mesh,
        &modes,
        cfg.analysis.modes_per_n,
        &cfg.options(),
    )?;
    for f in &result.failures {
        warn!("n={}: {}", f.n, f.error);
    }
    for &n in &modes {
        if let Some(r) = result.lowest_flexural(n) {
            println!("n={n} lowest flexural Omega={:.6}", r.frequency_parameter);
        }
    }
    let path = cfg.output.dir.join("frequencies.csv");
    write_table(
        &frequency_table(&result),
        &Provenance::from_config(cfg)?,
        &path,
    )?;
    written(&path);
    Ok(())
}

fn sweep(cfg: &RunConfig) -> Result<()> {
    let model = cfg.model()?;
    let s = settings(cfg);
    let grid = &cfg.analysis.grid;
    let prov = Provenance::from_config(cfg)?;
    let (table, name) = match cfg.analysis.sweep {
        SweepParameter::Depth => {
            let rows = depth_sweep(&model, grid, &s)?;
            let t = parameter_table("a_over_h", &[(cfg.technique.name(), &rows)], selection(cfg))?;
            (t, "sweep_depth.csv")
        }
        SweepParameter::Position => {
            let rows = crack_position_sweep(&model, grid, &s)?;
            let t = parameter_table(
                "x_c_over_L",
                &[(cfg.technique.name(), &rows)],
                selection(cfg),
            )?;
            (t, "sweep_position.csv")
        }
        SweepParameter::Length => {
            let sweep = length_sweep(&model, grid, &s)?;
            match sweep.asymptote_length {
                Some(l) => println!("load settles from L={l}"),
                None => println!("load has not settled over the length grid"),
            }
            (length_table(&sweep), "sweep_length.csv")
        }
    };
    let path = cfg.output.dir.join(name);
    write_table(&table, &prov, &path)?;
    written(&path);
    Ok(())
}

fn converge(cfg: &RunConfig) -> Result<()> {
    let model = cfg.model()?;
    let rows = convergence_study(
        &model,
        &cfg.analysis.counts,
        cfg.technique,
        cfg.analysis.modes(),
        &cfg.options(),
    )?;
    for r in &rows {
        println!(
            "{} elements: n={} normalized_load={:.6} ({:.3} s)",
            r.n_elements, r.critical_n, r.normalized_load, r.wall_time
        );
    }
    let path = cfg.output.dir.join("convergence.csv");
    write_table(
        &convergence_table(&rows, false),
        &Provenance::from_config(cfg)?,
        &path,
    )?;
    written(&path);
    Ok(())
}

fn modeshape(cfg: &RunConfig) -> Result<()> {
    let model = cfg.model()?;
    let mesh = cfg.mesh_for(&model)?;
    let opts = cfg.options();
    let n = match cfg.analysis.mode {
        Some(n) => n,
        None => {
            critical_load_on_mesh(&model, &mesh, cfg.analysis.modes(), &opts)?
                .select(ModeSelection::Minimum)?
                .n
        }
    };
    let spring = crack_stiffness(&model, &opts)?;
    let row = buckling_mode(&model, &mesh, &spring, n, &opts)?;
    let mut grid = ModeShapeGrid::for_mesh(&mesh);
    if cfg.output.grid_nx > 0 {
        grid.nx = cfg.output.grid_nx;
    }
    grid.ntheta = cfg.output.grid_ntheta;
    grid.scale = cfg.output.scale;
    let surface = sample_modeshape(&model, &mesh, n, &row.mode, &grid, &opts)?;
    info!("{} surface points", surface.points.len());
    println!("mode n={n} normalized_load={:.6}", row.normalized_load);
    let path = cfg.output.dir.join(format!("modeshape_n{n}.csv"));
    write_modeshape(&surface, &Provenance::from_config(cfg)?, &path)?;
    written(&path);
    Ok(())
}

/// Returns whether every hard golden check passed.
fn verify(common: &Common) -> Result<bool> {
    let cfg = match (&common.config, &common.preset) {
        (None, None) => RunConfig::preset_only("table1")?,
        _ => load_config(common, None)?,
    };
    let dir = common.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let mut opts = cfg.options();
    opts.jobs = common.jobs.or(opts.jobs);

    save_config(&cfg, &dir)?;
    let report = conversion_report(&cfg.model()?)?;
    let worst = report.iter().map(|c| c.max_rel_error()).fold(0.0, f64::max);
    let path = dir.join("conversion_comparison.csv");
    write_comparison_csv(std::fs::File::create(&path)?, &report)?;
    println!(
        "conversion matrices: {} comparisons, worst relative error {worst:.3e}",
        report.len()
    );
    written(&path);

    let checks = golden_checks(&opts)?;
    for c in &checks {
        let status = match (c.passed(), c.hard) {
            (true, _) => "ok",
            (false, true) => "FAIL",
            (false, false) => "soft miss",
        };
        println!(
            "{:<32} {:>10.5} vs {:>8.4}  {status}",
            c.name, c.computed, c.expected
        );
    }
    let path = dir.join("golden_checks.csv");
    let prov = Provenance::from_config(&cfg)?.with("check", "golden");
    write_table(&checks_table(&checks), &prov, &path)?;
    written(&path);
    Ok(all_hard_checks_pass(&checks))
}

fn run(cli: &Cli) -> Result<bool> {
    let kind = match cli.command {
        Command::Buckle => AnalysisKind::Buckle,
        Command::Vibrate => AnalysisKind::Vibrate,
        Command::Sweep => AnalysisKind::Sweep,
        Command::Converge => AnalysisKind::Converge,
        Command::Modeshape => AnalysisKind::Modeshape,
        Command::Verify => return verify(&cli.common),
    };
    let cfg = load_config(&cli.common, Some(kind))?;
    save_config(&cfg, &cfg.output.dir)?;
    match cli.command {
        Command::Buckle => buckle(&cfg)?,
        Command::Vibrate => vibrate(&cfg)?,
        Command::Sweep => sweep(&cfg)?,
        Command::Converge => converge(&cfg)?,
        Command::Modeshape => modeshape(&cfg)?,
        Command::Verify => unreachable!("handled above"),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: golden checks failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
