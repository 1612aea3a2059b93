use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{OptimResult, TARGET_INFIDELITY};
use crate::error::{QclError, Result};
use crate::qdyn::{transfer_fidelity, ControlPulse};
use crate::util::{linspace, seeded_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    /// Discrete amplitudes a gene may take, sorted ascending.
    pub gene_values: Vec<f64>,
    /// Per-gene probability of resampling a child's gene.
    pub mutation_rate: f64,
    /// Share of the fittest chromosomes carried over unchanged.
    pub elite_fraction: f64,
    /// Share of the least fit chromosomes carried over for diversity.
    pub underdog_fraction: f64,
    pub max_generations: usize,
    pub target_infidelity: f64,
    pub seed: u64,
    pub record_trace: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 100,
            gene_values: linspace(-1.0, 1.0, 100),
            mutation_rate: 0.3,
            elite_fraction: 0.30,
            underdog_fraction: 0.20,
            max_generations: 50,
            target_infidelity: TARGET_INFIDELITY,
            seed: 0,
            record_trace: false,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(QclError::InvalidArgument(m.to_string()));
        if self.population_size < 2 || self.population_size % 2 != 0 {
            return bad("population size must be even and at least 2");
        }
        if self.gene_values.is_empty()
            || self.gene_values.windows(2).any(|w| w[0] > w[1])
            || self.gene_values.iter().any(|g| !(-1.0..=1.0).contains(g))
        {
            return bad("gene values must be sorted and lie in [-1, 1]");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return bad("mutation rate must lie in [0, 1]");
        }
        if self.elite_fraction < 0.0
            || self.underdog_fraction < 0.0
            || self.elite_fraction + self.underdog_fraction > 1.0 + 1e-12
        {
            return bad("selection fractions must be non-negative and sum to at most 1");
        }
        Ok(())
    }

    fn carried_over(&self) -> (usize, usize) {
        let p = self.population_size as f64;
        let elite = (self.elite_fraction * p).round() as usize;
        let under = ((self.underdog_fraction * p).round() as usize)
            .min(self.population_size - elite);
        (elite, under)
    }
}

#[derive(Debug, Clone)]
struct Chromosome {
    genes: Vec<f64>,
    fitness: f64,
}

/// Evolves a random population of `n_params`-gene chromosomes.
pub fn ga_optimize(n_params: usize, total_time: f64, cfg: &GaConfig) -> Result<OptimResult> {
    cfg.validate()?;
    if n_params == 0 {
        return Err(QclError::InvalidArgument("n_params must be >= 1".into()));
    }
    let mut rng = seeded_rng(cfg.seed);
    let population = (0..cfg.population_size)
        .map(|_| random_genes(n_params, &cfg.gene_values, &mut rng))
        .collect();
    evolve_population(population, total_time, cfg, &mut rng)
}

/// Evolves an explicit starting population; every chromosome must have the
/// same length and the population size must match the config.
pub fn ga_from_population(
    population: Vec<Vec<f64>>,
    total_time: f64,
    cfg: &GaConfig,
) -> Result<OptimResult> {
    cfg.validate()?;
    if population.len() != cfg.population_size {
        return Err(QclError::DimensionMismatch {
            expected: cfg.population_size,
            actual: population.len(),
        });
    }
    let n = population.first().map_or(0, Vec::len);
    if n == 0 || population.iter().any(|c| c.len() != n) {
        return Err(QclError::InvalidArgument(
            "chromosomes must be non-empty and of equal length".into(),
        ));
    }
    let mut rng = seeded_rng(cfg.seed);
    evolve_population(population, total_time, cfg, &mut rng)
}

fn random_genes(n: usize, pool: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| *pool.choose(rng).expect("non-empty pool")).collect()
}

fn evolve_population(
    initial: Vec<Vec<f64>>,
    total_time: f64,
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<OptimResult> {
    ControlPulse::new(initial[0].clone(), total_time)?;
    let evaluate = |genes: Vec<f64>| Chromosome {
        fitness: transfer_fidelity(&genes, total_time),
        genes,
    };
    let mut population: Vec<Chromosome> = initial.into_iter().map(evaluate).collect();
    let (n_elite, n_under) = cfg.carried_over();
    let mut trace = cfg.record_trace.then(Vec::new);
    let mut generation = 0;

    loop {
        // stable: equal fitness keeps insertion order
        population.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
        let best = &population[0];
        if let Some(t) = trace.as_mut() {
            t.push(best.fitness);
        }
        if 1.0 - best.fitness <= cfg.target_infidelity || generation == cfg.max_generations {
            let best = population.swap_remove(0);
            return Ok(OptimResult::new(
                ControlPulse::new(best.genes, total_time)?,
                best.fitness,
                generation,
                cfg.target_infidelity,
                trace,
            ));
        }

        population = breed(&population, n_elite, n_under, cfg, rng, evaluate);
        generation += 1;
    }
}

/// Builds the next generation from a population sorted by descending fitness.
fn breed(
    sorted: &[Chromosome],
    n_elite: usize,
    n_under: usize,
    cfg: &GaConfig,
    rng: &mut ChaCha8Rng,
    evaluate: impl Fn(Vec<f64>) -> Chromosome,
) -> Vec<Chromosome> {
    let size = sorted.len();
    let n_children = size - n_elite - n_under;
    let mut next: Vec<Chromosome> = sorted[..n_elite].to_vec();
    next.extend_from_slice(&sorted[size - n_under..]);
    let survivors = next.len();
    let parents: Vec<Chromosome> = if survivors == 0 {
        sorted.to_vec()
    } else {
        next.clone()
    };

    while next.len() - survivors < n_children {
        let (x, y) = pick_pair(parents.len(), rng);
        let (mut c1, mut c2) = crossover(&parents[x].genes, &parents[y].genes, rng);
        mutate(&mut c1, cfg, rng);
        next.push(evaluate(c1));
        if next.len() - survivors < n_children {
            mutate(&mut c2, cfg, rng);
            next.push(evaluate(c2));
        }
    }
    next
}

fn pick_pair(n: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    if n < 2 {
        return (0, 0);
    }
    let x = rng.gen_range(0..n);
    let mut y = rng.gen_range(0..n - 1);
    if y >= x {
        y += 1;
    }
    (x, y)
}

/// Single-point crossover; a one-gene chromosome is copied.
fn crossover(a: &[f64], b: &[f64], rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    if n < 2 {
        return (a.to_vec(), b.to_vec());
    }
    let cut = rng.gen_range(1..n);
    let mut c1 = a[..cut].to_vec();
    c1.extend_from_slice(&b[cut..]);
    let mut c2 = b[..cut].to_vec();
    c2.extend_from_slice(&a[cut..]);
    (c1, c2)
}

fn mutate(genes: &mut [f64], cfg: &GaConfig, rng: &mut ChaCha8Rng) {
    for g in genes.iter_mut() {
        if rng.gen_bool(cfg.mutation_rate) {
            *g = *cfg.gene_values.choose(rng).expect("non-empty pool");
        }
    }
}
