//! The `qcl` command line: bruteforce → pca-fit → optimize → analyze → plot,
//! plus pca-transform and speed-limit.
//!
//! Flags may also come from a `key = value` file given with `--config`;
//! flags on the command line win over the file, which wins over defaults.
//! Exit codes: 0 success, 1 usage, 2 data or schema, 3 not found.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::analysis::{cluster_density_index, overlap_counts, CdiStatus, OverlapSpec, DEFAULT_EPS, DEFAULT_MIN_PTS};
use crate::error::{QclError, Result};
use crate::io::{create_file, csv_writer, fmt_f64, to_json_string, CsvTable};
use crate::landscape::{default_points_per_axis, write_grid_csv, GridSpec, HIGH_FIDELITY};
use crate::optim::GaConfig;
use crate::pca::{CovarianceAccumulator, PcaModel};
use crate::plot::{count_markers, render_svg, PlotStyle};
use crate::qdyn::{estimate_speed_limit, DEFAULT_TIME, SPEED_LIMIT_THRESHOLD};
use crate::runner::{read_records, recorded_time, run_experiment, write_records, Algorithm, ExperimentSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NOT_FOUND: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qcl", version, about = "Single-qubit quantum control landscape toolkit")]
pub struct Cli {
    /// File of `key = value` lines supplying flag defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the fidelity on a regular amplitude grid and stream it to CSV.
    #[command(args_override_self = true)]
    Bruteforce(BruteforceArgs),
    /// Fit two principal components on a grid CSV and save them as JSON.
    #[command(args_override_self = true)]
    PcaFit(PcaFitArgs),
    /// Append pc1/pc2 columns to a CSV using saved loadings.
    #[command(args_override_self = true)]
    PcaTransform(PcaTransformArgs),
    /// Repeat one optimizer under a seed ladder and write the results CSV.
    #[command(args_override_self = true)]
    Optimize(OptimizeArgs),
    /// Cluster density index and overlap counts of projected results.
    #[command(args_override_self = true)]
    Analyze(AnalyzeArgs),
    /// Scatter plot of a CSV as standalone SVG.
    #[command(args_override_self = true)]
    Plot(PlotArgs),
    /// Scan the total time for the shortest one reaching fidelity 0.999.
    #[command(args_override_self = true)]
    SpeedLimit(SpeedLimitArgs),
}

#[derive(Debug, Args)]
pub struct BruteforceArgs {
    #[arg(long)]
    pub n_params: usize,
    /// Points per axis [default: 100 up to three parameters, else 30].
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TIME)]
    pub time: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PcaFitArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PcaTransformArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// sgd, ga, ql, dqn or ppo.
    #[arg(long)]
    pub algo: String,
    #[arg(long)]
    pub n_params: usize,
    #[arg(long, default_value_t = 1000)]
    pub runs: usize,
    /// Base seed; run i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TIME)]
    pub time: f64,
    /// PCA model JSON used to add pc1/pc2.
    #[arg(long)]
    pub loadings: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads [default: logical cores].
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Record per-run wall-clock milliseconds (breaks byte reproducibility).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub sgd_learning_rate: Option<f64>,
    #[arg(long)]
    pub sgd_momentum: Option<f64>,
    #[arg(long)]
    pub sgd_max_iterations: Option<usize>,
    #[arg(long)]
    pub ga_population: Option<usize>,
    #[arg(long)]
    pub ga_generations: Option<usize>,
    #[arg(long)]
    pub ga_mutation_rate: Option<f64>,
    #[arg(long)]
    pub ql_episodes: Option<usize>,
    #[arg(long)]
    pub ql_learning_rate: Option<f64>,
    #[arg(long)]
    pub ql_epsilon: Option<f64>,
    #[arg(long)]
    pub ql_bins: Option<usize>,
    /// Environment-step budget for DQN.
    #[arg(long)]
    pub dqn_steps: Option<usize>,
    /// Environment-step budget for PPO.
    #[arg(long)]
    pub ppo_steps: Option<usize>,
    #[arg(long)]
    pub ppo_rollout: Option<usize>,
    /// Hidden widths for DQN and PPO, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    pub eps: f64,
    #[arg(long, default_value_t = DEFAULT_MIN_PTS)]
    pub min_pts: usize,
    /// Only points with fidelity above this enter the clustering.
    #[arg(long, default_value_t = HIGH_FIDELITY)]
    pub fidelity_min: f64,
    #[arg(long, default_value_t = 0.02)]
    pub overlap_xy: f64,
    #[arg(long, default_value_t = 0.01)]
    pub overlap_f: f64,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Overlap-count CSV [default: next to the report, `_overlap.csv`].
    #[arg(long)]
    pub overlap_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "pc1")]
    pub x: String,
    #[arg(long, default_value = "pc2")]
    pub y: String,
    /// Keep only rows with fidelity above this value.
    #[arg(long)]
    pub filter: Option<f64>,
    #[arg(long, default_value_t = 2.5)]
    pub radius: f64,
    #[arg(long, default_value = "")]
    pub title: String,
}

#[derive(Debug, Args)]
pub struct SpeedLimitArgs {
    #[arg(long, default_value_t = DEFAULT_TIME)]
    pub max_time: f64,
    #[arg(long, default_value_t = 64)]
    pub scan_points: usize,
    /// Pulse segments optimized at each scanned time.
    #[arg(long, default_value_t = 4)]
    pub segments: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional CSV of every scanned time and its best fidelity.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Exit code for an error raised while running a command.
pub fn exit_code(err: &QclError) -> i32 {
    match err {
        QclError::InvalidArgument(_) => EXIT_USAGE,
        QclError::NotFound(_) => EXIT_NOT_FOUND,
        _ => EXIT_DATA,
    }
}

/// Reads `key = value` lines into `--key value` arguments. Underscores in
/// keys become dashes; `true` turns into a bare flag and `false` drops it.
pub fn config_args(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            QclError::InvalidArgument(format!("config line {}: expected `key = value`", i + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() || key == "config" {
            return Err(QclError::InvalidArgument(format!("config line {}: bad key", i + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Splices config-file arguments in front of the user's subcommand flags so
/// that later (user) occurrences override them.
fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = &args[i];
        if a == "--config" {
            config = args.get(i + 1).cloned();
            i += 2;
            continue;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(v.to_string());
        } else if sub.is_none() && !a.starts_with('-') {
            sub = Some(i);
        }
        i += 1;
    }
    let (Some(path), Some(sub)) = (config, sub) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path).map_err(|e| QclError::io(&path, e))?;
    let extra = config_args(&text)?;
    let mut out = args[..=sub].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

/// Parses and runs one invocation, returning the process exit code.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let args: Vec<String> = args.into_iter().collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("qcl: {e}");
            return match e {
                QclError::Io { .. } => EXIT_DATA,
                _ => EXIT_USAGE,
            };
        }
    };
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qcl: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command, writing human-readable output to `out`.
pub fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Bruteforce(a) => bruteforce(a, out),
        Command::PcaFit(a) => pca_fit(a, out),
        Command::PcaTransform(a) => pca_transform(a, out),
        Command::Optimize(a) => optimize(a, out),
        Command::Analyze(a) => analyze(a, out),
        Command::Plot(a) => plot(a, out),
        Command::SpeedLimit(a) => speed_limit(a, out),
    }
}

fn say(out: &mut dyn Write, text: String) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| QclError::io("<stdout>", e))
}

/// File name only, so outputs do not depend on the working directory.
fn label(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(QclError::InvalidArgument(format!("time must be positive, got {t}")));
    }
    Ok(())
}

fn bruteforce(a: BruteforceArgs, out: &mut dyn Write) -> Result<i32> {
    check_time(a.time)?;
    let spec = GridSpec {
        n_params: a.n_params,
        points_per_axis: a.grid.unwrap_or_else(|| default_points_per_axis(a.n_params)),
        range: (a.lo, a.hi),
    };
    spec.validate()?;
    let comments = vec![
        "qcl bruteforce".to_string(),
        format!("n_params = {}", spec.n_params),
        format!("grid = {}", spec.points_per_axis),
        format!("time = {}", fmt_f64(a.time)),
        format!("range = [{}, {}]", fmt_f64(a.lo), fmt_f64(a.hi)),
    ];
    let file = create_file(&a.out)?;
    let summary = write_grid_csv(&spec, a.time, file, &comments)?;
    say(
        out,
        format!(
            "points = {}\nmax fidelity = {:.6}\nfraction above {} = {:.6}",
            summary.count,
            summary.max_fidelity,
            summary.threshold,
            summary.fraction_above()
        ),
    )?;
    Ok(EXIT_OK)
}

/// Streams the amplitude columns of a CSV without holding it in memory.
fn for_each_amplitude_row(path: &Path, mut f: impl FnMut(&[f64]) -> Result<()>) -> Result<usize> {
    let file = std::fs::File::open(path).map_err(|e| QclError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(std::io::BufReader::new(file));
    let header = reader.headers()?.clone();
    let cols: Vec<usize> = (1..)
        .map_while(|k| header.iter().position(|h| h == format!("a{k}")))
        .collect();
    if cols.is_empty() {
        return Err(QclError::schema("a1", "no amplitude columns"));
    }
    let mut row = vec![0.0; cols.len()];
    let mut n = 0;
    for rec in reader.records() {
        let rec = rec?;
        n += 1;
        for (slot, &c) in row.iter_mut().zip(&cols) {
            let cell = rec.get(c).unwrap_or("").trim();
            *slot = cell.parse().map_err(|_| {
                QclError::schema(format!("a{}", c + 1), format!("row {n}: `{cell}` is not a number"))
            })?;
        }
        f(&row)?;
    }
    Ok(cols.len())
}

fn pca_fit(a: PcaFitArgs, out: &mut dyn Write) -> Result<i32> {
    let mut acc: Option<CovarianceAccumulator> = None;
    let dim = for_each_amplitude_row(&a.input, |row| {
        acc.get_or_insert_with(|| CovarianceAccumulator::new(row.len())).push(row)
    })?;
    let acc = acc.unwrap_or_else(|| CovarianceAccumulator::new(dim));
    let mut model = PcaModel::from_accumulator(&acc)?;
    model.source.insert("command".into(), "qcl pca-fit".into());
    model.source.insert("input".into(), label(&a.input));
    model.source.insert("rows".into(), acc.count().to_string());
    model.save(&a.out)?;
    say(
        out,
        format!(
            "rows = {}\nexplained variance = [{:.6}, {:.6}]",
            acc.count(),
            model.explained_variance[0],
            model.explained_variance[1]
        ),
    )?;
    Ok(EXIT_OK)
}

fn pca_transform(a: PcaTransformArgs, out: &mut dyn Write) -> Result<i32> {
    let model = PcaModel::load(&a.model)?;
    let mut table = CsvTable::read(&a.input)?;
    let amp_cols = table.amplitude_columns();
    model.check_dimension(amp_cols.len())?;
    let pc_cols: Vec<usize> = ["pc1", "pc2"]
        .iter()
        .map(|name| match table.column(name) {
            Some(c) => c,
            None => {
                table.header.push(name.to_string());
                table.rows.iter_mut().for_each(|r| r.push(String::new()));
                table.header.len() - 1
            }
        })
        .collect();
    for row in 0..table.rows.len() {
        let amps: Vec<f64> = amp_cols
            .iter()
            .map(|&c| table.float(row, c))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .map_while(|v| v)
            .collect();
        let (x, y) = model.transform_prefix(&amps)?;
        table.rows[row][pc_cols[0]] = fmt_f64(x);
        table.rows[row][pc_cols[1]] = fmt_f64(y);
    }
    let mut comments = table.comments.clone();
    comments.push(format!("qcl pca-transform: model = {}", label(&a.model)));
    let mut w = csv_writer(create_file(&a.out)?, &comments)?;
    w.write_record(&table.header)?;
    for r in &table.rows {
        w.write_record(r)?;
    }
    w.flush().map_err(|e| QclError::io(&a.out, e))?;
    say(out, format!("rows = {}", table.rows.len()))?;
    Ok(EXIT_OK)
}

fn optimize(a: OptimizeArgs, out: &mut dyn Write) -> Result<i32> {
    let algorithm: Algorithm = a.algo.parse()?;
    check_time(a.time)?;
    let mut spec = ExperimentSpec::new(algorithm, a.n_params);
    spec.runs = a.runs;
    spec.base_seed = a.seed;
    spec.total_time = a.time;
    spec.jobs = a.jobs;
    spec.timing = a.timing;
    if let Some(path) = &a.loadings {
        spec.pca = Some(PcaModel::load(path)?);
    }
    let c = &mut spec.configs;
    if let Some(v) = a.sgd_learning_rate {
        c.sgd.learning_rate = v;
    }
    if let Some(v) = a.sgd_momentum {
        c.sgd.momentum = v;
    }
    if let Some(v) = a.sgd_max_iterations {
        c.sgd.max_iterations = v;
    }
    if let Some(v) = a.ga_population {
        c.ga.population_size = v;
    }
    if let Some(v) = a.ga_generations {
        c.ga.max_generations = v;
    }
    if let Some(v) = a.ga_mutation_rate {
        c.ga.mutation_rate = v;
    }
    if let Some(v) = a.ql_episodes {
        c.ql.max_episodes = v;
    }
    if let Some(v) = a.ql_learning_rate {
        c.ql.learning_rate = v;
    }
    if let Some(v) = a.ql_epsilon {
        c.ql.epsilon = v;
    }
    if let Some(v) = a.ql_bins {
        c.ql.bins = v;
    }
    if let Some(v) = a.dqn_steps {
        c.dqn.total_steps = v;
    }
    if let Some(v) = a.ppo_steps {
        c.ppo.total_steps = v;
    }
    if let Some(v) = a.ppo_rollout {
        c.ppo.rollout_len = v;
    }
    if let Some(h) = &a.hidden {
        c.dqn.hidden = h.clone();
        c.ppo.hidden = h.clone();
    }

    let records = run_experiment(&spec)?;
    let mut comments = vec!["qcl optimize".to_string()];
    comments.extend(spec.describe());
    if let Some(path) = &a.loadings {
        comments.push(format!("loadings = {}", label(path)));
    }
    write_records(create_file(&a.out)?, spec.n_params, &records, &comments)?;

    let n = records.len() as f64;
    let mean = records.iter().map(|r| r.fidelity).sum::<f64>() / n;
    let high = records.iter().filter(|r| r.fidelity > HIGH_FIDELITY).count();
    let converged = records.iter().filter(|r| r.converged).count();
    say(
        out,
        format!(
            "runs = {}\nmean fidelity = {mean:.6}\nabove {HIGH_FIDELITY} = {high}\nconverged = {converged}",
            records.len()
        ),
    )?;
    Ok(EXIT_OK)
}

/// `(x, y, fidelity)` rows with both coordinates present. A missing
/// fidelity column counts every row as fidelity 1.
fn xy_points(table: &CsvTable, x: &str, y: &str) -> Result<Vec<(f64, f64, f64)>> {
    if table.rows.is_empty() {
        return Ok(Vec::new());
    }
    let find = |name: &str| {
        table
            .column(name)
            .ok_or_else(|| QclError::schema(name, "column missing"))
    };
    let (xc, yc) = (find(x)?, find(y)?);
    let fc = table.column("fidelity");
    let mut pts = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let (Some(px), Some(py)) = (table.float(row, xc)?, table.float(row, yc)?) else {
            continue;
        };
        let f = match fc {
            Some(c) => table
                .float(row, c)?
                .ok_or_else(|| QclError::schema("fidelity", format!("row {}: empty", row + 1)))?,
            None => 1.0,
        };
        pts.push((px, py, f));
    }
    Ok(pts)
}

fn analyze(a: AnalyzeArgs, out: &mut dyn Write) -> Result<i32> {
    if !(0.0..=1.0).contains(&a.fidelity_min) {
        return Err(QclError::InvalidArgument(format!(
            "fidelity-min must lie in [0, 1], got {}",
            a.fidelity_min
        )));
    }
    let overlap_spec = OverlapSpec {
        eps_xy: a.overlap_xy,
        eps_f: a.overlap_f,
    };
    overlap_spec.validate()?;
    let table = CsvTable::read(&a.input)?;
    if table.column("run").is_some() && !table.rows.is_empty() {
        // results files: re-derive every stored fidelity before trusting it
        let time = recorded_time(&table)?.unwrap_or(DEFAULT_TIME);
        read_records(&table, time)?;
    }
    let all = xy_points(&table, "pc1", "pc2")?;
    let has_fidelity = table.column("fidelity").is_some();
    let kept: Vec<[f64; 2]> = all
        .iter()
        .filter(|p| !has_fidelity || p.2 > a.fidelity_min)
        .map(|p| [p.0, p.1])
        .collect();

    let mut report = cluster_density_index(&kept, a.eps, a.min_pts)?;
    let params = &mut report.params;
    params.insert("command".into(), "qcl analyze".into());
    params.insert("input".into(), label(&a.input).into());
    params.insert("rows".into(), table.rows.len().into());
    params.insert("projected_rows".into(), all.len().into());
    params.insert(
        "fidelity_min".into(),
        if has_fidelity { a.fidelity_min.into() } else { serde_json::Value::Null },
    );
    params.insert("overlap_xy".into(), a.overlap_xy.into());
    params.insert("overlap_f".into(), a.overlap_f.into());
    std::fs::write(&a.out, to_json_string(&report)?).map_err(|e| QclError::io(&a.out, e))?;

    let groups = overlap_counts(&all, &overlap_spec)?;
    let overlap_path = a.overlap_out.clone().unwrap_or_else(|| {
        let stem = a.out.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
        a.out.with_file_name(format!("{stem}_overlap.csv"))
    });
    let comments = vec![
        "qcl analyze overlap".to_string(),
        format!("input = {}", label(&a.input)),
        format!("overlap_xy = {}", a.overlap_xy),
        format!("overlap_f = {}", a.overlap_f),
    ];
    let mut w = csv_writer(create_file(&overlap_path)?, &comments)?;
    w.write_record(["group", "x", "y", "fidelity", "count"])?;
    for (i, g) in groups.iter().enumerate() {
        w.write_record([
            i.to_string(),
            fmt_f64(g.x),
            fmt_f64(g.y),
            fmt_f64(g.fidelity),
            g.count.to_string(),
        ])?;
    }
    w.flush().map_err(|e| QclError::io(&overlap_path, e))?;

    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.6}"));
    say(
        out,
        format!(
            "points = {}\nclusters = {}\nnoise = {}\nA = {}\nD = {}\nL = {}\nCDI = {}\nstatus = {}\noverlap groups = {}",
            kept.len(),
            report.n_clusters,
            report.n_noise,
            show(report.a_bar),
            show(report.d_bar),
            show(report.l_bar),
            show(report.cdi),
            match report.status {
                CdiStatus::Ok => "ok",
                CdiStatus::Empty => "empty",
                CdiStatus::UndefinedCdi => "undefined_cdi",
            },
            groups.len()
        ),
    )?;
    Ok(EXIT_OK)
}

fn plot(a: PlotArgs, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| QclError::io(&a.input, e))?;
    let table = if text.trim().is_empty() {
        CsvTable {
            comments: Vec::new(),
            header: Vec::new(),
            rows: Vec::new(),
        }
    } else {
        CsvTable::parse(&text)?
    };
    let points = xy_points(&table, &a.x, &a.y)?;
    let mut notes = vec![
        "qcl plot".to_string(),
        format!("input = {}", label(&a.input)),
        format!("x = {}, y = {}", a.x, a.y),
        format!("filter = {}", a.filter.map_or("none".into(), |f| f.to_string())),
    ];
    notes.extend(table.comments.iter().map(|c| format!("source: {c}")));
    let style = PlotStyle {
        title: a.title.clone(),
        x_label: a.x.clone(),
        y_label: a.y.clone(),
        marker_radius: a.radius,
        fidelity_min: a.filter,
        notes,
    };
    let svg = render_svg(&points, &style)?;
    std::fs::write(&a.out, &svg).map_err(|e| QclError::io(&a.out, e))?;
    say(out, format!("markers = {}", count_markers(&svg)))?;
    Ok(EXIT_OK)
}

fn speed_limit(a: SpeedLimitArgs, out: &mut dyn Write) -> Result<i32> {
    let ga = GaConfig {
        seed: a.seed,
        ..GaConfig::default()
    };
    let scan = estimate_speed_limit(a.max_time, a.scan_points, a.segments, &ga)?;
    if let Some(path) = &a.out {
        let comments = vec![
            "qcl speed-limit".to_string(),
            format!("max_time = {}", fmt_f64(a.max_time)),
            format!("scan_points = {}", a.scan_points),
            format!("segments = {}", a.segments),
            format!("seed = {}", a.seed),
        ];
        let mut w = csv_writer(create_file(path)?, &comments)?;
        w.write_record(["time", "best_fidelity"])?;
        for (t, f) in &scan.scanned {
            w.write_record([fmt_f64(*t), fmt_f64(*f)])?;
        }
        w.flush().map_err(|e| QclError::io(path, e))?;
    }
    match scan.t_min {
        Some(t) => {
            say(out, format!("T_min = {t:.4}\nrecommended T = {:.4}", 2.0 * t))?;
            Ok(EXIT_OK)
        }
        None => Err(QclError::NotFound(format!(
            "fidelity {SPEED_LIMIT_THRESHOLD} not reached for any T up to {}",
            a.max_time
        ))),
    }
}
