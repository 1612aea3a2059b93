//! Repeated, seeded optimizer runs: run `i` uses seed `base_seed + i`, runs
//! execute in parallel, and results come back ordered by run index.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{QclError, Result};
use crate::io::{csv_writer, fmt_f64, CsvTable};
use crate::optim::{ga_optimize, sgd_optimize, GaConfig, OptimResult, SgdConfig};
use crate::pca::PcaModel;
use crate::qdyn::{transfer_fidelity, DEFAULT_TIME};
use crate::rl::{dqn_train, ppo_train, ql_train, ControlEnv, DqnConfig, PpoConfig, QlConfig, RewardSchedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Sgd,
    Ga,
    Ql,
    Dqn,
    Ppo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [Self::Sgd, Self::Ga, Self::Ql, Self::Dqn, Self::Ppo];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sgd => "sgd",
            Self::Ga => "ga",
            Self::Ql => "ql",
            Self::Dqn => "dqn",
            Self::Ppo => "ppo",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = QclError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| {
                QclError::InvalidArgument(format!(
                    "unknown algorithm `{s}` (expected sgd, ga, ql, dqn or ppo)"
                ))
            })
    }
}

/// Per-algorithm settings; each run overrides the seed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentConfigs {
    pub sgd: SgdConfig,
    pub ga: GaConfig,
    pub ql: QlConfig,
    pub dqn: DqnConfig,
    pub ppo: PpoConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub algorithm: Algorithm,
    pub n_params: usize,
    pub runs: usize,
    pub base_seed: u64,
    pub total_time: f64,
    /// Projection applied to every final pulse.
    pub pca: Option<PcaModel>,
    /// Worker threads; `None` uses every logical core.
    pub jobs: Option<usize>,
    /// Record wall-clock time per run. Off by default so outputs stay
    /// byte-reproducible.
    pub timing: bool,
    pub configs: AgentConfigs,
}

impl ExperimentSpec {
    pub fn new(algorithm: Algorithm, n_params: usize) -> Self {
        Self {
            algorithm,
            n_params,
            runs: 1000,
            base_seed: 0,
            total_time: DEFAULT_TIME,
            pca: None,
            jobs: None,
            timing: false,
            configs: AgentConfigs::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_params == 0 {
            return Err(QclError::InvalidArgument("n_params must be >= 1".into()));
        }
        if self.runs == 0 {
            return Err(QclError::InvalidArgument("runs must be >= 1".into()));
        }
        if !(self.total_time > 0.0) || !self.total_time.is_finite() {
            return Err(QclError::InvalidArgument(format!(
                "total time must be positive, got {}",
                self.total_time
            )));
        }
        if self.jobs == Some(0) {
            return Err(QclError::InvalidArgument("jobs must be >= 1".into()));
        }
        if let Some(model) = &self.pca {
            model.check_dimension(self.n_params)?;
        }
        Ok(())
    }

    pub fn seed_of(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    /// `key = value` lines describing the experiment, for file headers.
    pub fn describe(&self) -> Vec<String> {
        let c = &self.configs;
        let mut lines = vec![
            format!("algorithm = {}", self.algorithm),
            format!("n_params = {}", self.n_params),
            format!("runs = {}", self.runs),
            format!("base_seed = {}", self.base_seed),
            format!("time = {}", fmt_f64(self.total_time)),
            format!("pca = {}", if self.pca.is_some() { "yes" } else { "no" }),
        ];
        lines.push(match self.algorithm {
            Algorithm::Sgd => format!(
                "sgd: learning_rate = {}, momentum = {}, max_iterations = {}, fd_step = {}",
                c.sgd.learning_rate, c.sgd.momentum, c.sgd.max_iterations, c.sgd.fd_step
            ),
            Algorithm::Ga => format!(
                "ga: population = {}, genes = {}, mutation_rate = {}, elite = {}, underdog = {}, generations = {}",
                c.ga.population_size,
                c.ga.gene_values.len(),
                c.ga.mutation_rate,
                c.ga.elite_fraction,
                c.ga.underdog_fraction,
                c.ga.max_generations
            ),
            Algorithm::Ql => format!(
                "ql: learning_rate = {}, discount = {}, epsilon = {}, episodes = {}, bins = {}",
                c.ql.learning_rate, c.ql.discount, c.ql.epsilon, c.ql.max_episodes, c.ql.bins
            ),
            Algorithm::Dqn => format!(
                "dqn: learning_rate = {}, exploration_fraction = {}, discount = {}, buffer = {}, batch = {}, target_update = {}, steps = {}",
                c.dqn.learning_rate,
                c.dqn.exploration_fraction,
                c.dqn.discount,
                c.dqn.buffer_capacity,
                c.dqn.batch_size,
                c.dqn.target_update,
                c.dqn.total_steps
            ),
            Algorithm::Ppo => format!(
                "ppo: learning_rate = {}, entropy_coef = {}, discount = {}, clip = {}, rollout = {}, epochs = {}, steps = {}",
                c.ppo.learning_rate,
                c.ppo.entropy_coef,
                c.ppo.discount,
                c.ppo.clip,
                c.ppo.rollout_len,
                c.ppo.epochs,
                c.ppo.total_steps
            ),
        });
        lines
    }
}

/// Outcome of one run. Agents that hit the target before the last segment
/// return a shorter pulse spanning only the segments applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub amplitudes: Vec<f64>,
    pub fidelity: f64,
    /// PCA coordinates; truncated pulses are projected with the missing
    /// amplitudes at the model mean.
    pub pc: Option<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
    pub millis: u64,
}

impl RunRecord {
    pub fn is_full_length(&self, n_params: usize) -> bool {
        self.amplitudes.len() == n_params
    }
}

fn optimize(spec: &ExperimentSpec, seed: u64) -> Result<OptimResult> {
    let (n, t, c) = (spec.n_params, spec.total_time, &spec.configs);
    match spec.algorithm {
        Algorithm::Sgd => sgd_optimize(n, t, &SgdConfig { seed, ..c.sgd.clone() }),
        Algorithm::Ga => ga_optimize(n, t, &GaConfig { seed, ..c.ga.clone() }),
        Algorithm::Ql => {
            let mut env = ControlEnv::new(n, t, RewardSchedule::tabular())?;
            ql_train(&mut env, &QlConfig { seed, ..c.ql.clone() })
        }
        Algorithm::Dqn => {
            let mut env = ControlEnv::new(n, t, RewardSchedule::deep())?;
            dqn_train(&mut env, &DqnConfig { seed, ..c.dqn.clone() })
        }
        Algorithm::Ppo => {
            let mut env = ControlEnv::new(n, t, RewardSchedule::deep())?;
            ppo_train(&mut env, &PpoConfig { seed, ..c.ppo.clone() })
        }
    }
}

pub fn run_one(spec: &ExperimentSpec, run: usize) -> Result<RunRecord> {
    let seed = spec.seed_of(run);
    let start = Instant::now();
    let result = optimize(spec, seed)?;
    let millis = if spec.timing {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    let amplitudes = result.best_pulse.into_amplitudes();
    let pc = match &spec.pca {
        Some(model) => Some(model.transform_prefix(&amplitudes)?),
        None => None,
    };
    Ok(RunRecord {
        run,
        seed,
        amplitudes,
        fidelity: result.best_fidelity,
        pc,
        iterations: result.iterations_used,
        converged: result.converged,
        millis,
    })
}

/// Runs every seed of the experiment on a worker pool.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let work = || -> Result<Vec<RunRecord>> {
        (0..spec.runs)
            .into_par_iter()
            .map(|i| run_one(spec, i))
            .collect()
    };
    match spec.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| QclError::InvalidArgument(format!("cannot start worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Writes `run,seed,a1..aN,fidelity,pc1,pc2,iters,converged,ms`. Missing
/// trailing amplitudes and absent coordinates are left blank.
pub fn write_records<W: Write>(
    out: W,
    n_params: usize,
    records: &[RunRecord],
    comments: &[String],
) -> Result<()> {
    let mut w = csv_writer(out, comments)?;
    let mut header = vec!["run".to_string(), "seed".to_string()];
    header.extend((1..=n_params).map(|k| format!("a{k}")));
    header.extend(["fidelity", "pc1", "pc2", "iters", "converged", "ms"].map(String::from));
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.run.to_string(), r.seed.to_string()];
        row.extend((0..n_params).map(|k| r.amplitudes.get(k).map_or(String::new(), |a| fmt_f64(*a))));
        row.push(fmt_f64(r.fidelity));
        match r.pc {
            Some((x, y)) => row.extend([fmt_f64(x), fmt_f64(y)]),
            None => row.extend([String::new(), String::new()]),
        }
        row.push(r.iterations.to_string());
        row.push(u8::from(r.converged).to_string());
        row.push(r.millis.to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| QclError::io("<csv>", e))?;
    Ok(())
}

/// Total evolution time recorded in a results file, if any.
pub fn recorded_time(table: &CsvTable) -> Result<Option<f64>> {
    for c in &table.comments {
        if let Some(v) = c.strip_prefix("time = ") {
            return v
                .trim()
                .parse()
                .map(Some)
                .map_err(|_| QclError::schema("time", format!("`{v}` is not a number")));
        }
    }
    Ok(None)
}

fn required(table: &CsvTable, name: &str) -> Result<usize> {
    table
        .column(name)
        .ok_or_else(|| QclError::schema(name, "column missing"))
}

/// Parses a results table, recomputing every fidelity from its amplitudes.
/// A pulse with `k` of `N` amplitudes is evaluated over `k/N` of the total
/// time, as the agents that produced it did.
pub fn read_records(table: &CsvTable, total_time: f64) -> Result<Vec<RunRecord>> {
    let amp_cols = table.amplitude_columns();
    if amp_cols.is_empty() {
        return Err(QclError::schema("a1", "no amplitude columns"));
    }
    let run_c = required(table, "run")?;
    let seed_c = required(table, "seed")?;
    let fid_c = required(table, "fidelity")?;
    let pc1_c = required(table, "pc1")?;
    let pc2_c = required(table, "pc2")?;
    let it_c = required(table, "iters")?;
    let conv_c = required(table, "converged")?;
    let ms_c = required(table, "ms")?;
    let n = amp_cols.len();

    let int = |row: usize, col: usize| -> Result<u64> {
        table.rows[row][col].trim().parse().map_err(|_| {
            QclError::schema(table.header[col].clone(), format!("row {}: not an integer", row + 1))
        })
    };
    let mut out = Vec::with_capacity(table.rows.len());
    for row in 0..table.rows.len() {
        let cells = amp_cols
            .iter()
            .map(|&c| table.float(row, c))
            .collect::<Result<Vec<_>>>()?;
        // blanks may only trail: a truncated pulse, never a gap
        let amplitudes: Vec<f64> = cells.iter().map_while(|c| *c).collect();
        if amplitudes.is_empty() || cells[amplitudes.len()..].iter().any(Option::is_some) {
            return Err(QclError::schema(
                "a1",
                format!("row {}: amplitudes must be a non-empty prefix", row + 1),
            ));
        }
        let fidelity = table
            .float(row, fid_c)?
            .ok_or_else(|| QclError::schema("fidelity", format!("row {}: empty", row + 1)))?;
        let span = total_time * amplitudes.len() as f64 / n as f64;
        let recomputed = transfer_fidelity(&amplitudes, span);
        if (recomputed - fidelity).abs() > 1e-12 {
            return Err(QclError::schema(
                "fidelity",
                format!("row {}: stored {fidelity} but amplitudes give {recomputed}", row + 1),
            ));
        }
        let pc = match (table.float(row, pc1_c)?, table.float(row, pc2_c)?) {
            (Some(x), Some(y)) => Some((x, y)),
            _ => None,
        };
        out.push(RunRecord {
            run: int(row, run_c)? as usize,
            seed: int(row, seed_c)?,
            amplitudes,
            fidelity,
            pc,
            iterations: int(row, it_c)? as usize,
            converged: int(row, conv_c)? != 0,
            millis: int(row, ms_c)?,
        });
    }
    Ok(out)
}

/// Counts of fidelities in `bins` equal-width bins over `[0, 1]`; a
/// fidelity of exactly 1 lands in the last bin.
pub fn fidelity_histogram(fidelities: impl IntoIterator<Item = f64>, bins: usize) -> Result<Vec<usize>> {
    if bins < 2 {
        return Err(QclError::InvalidArgument("histogram needs at least 2 bins".into()));
    }
    let mut counts = vec![0; bins];
    for f in fidelities {
        let k = ((f.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts)
}
