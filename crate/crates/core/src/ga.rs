//! Generational GA loop: evaluation, tournament selection, crossover or
//! carry-over, mutation, elitist replacement.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::time::Instant;

use log::{debug, warn};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chromosome::{
    check_probability, hierarchy_violations, Chromosome, Encoding, IndexedChromosome, InitParams,
    MutationRates, StandardChromosome,
};
use crate::error::{Error, Result};
use crate::fitness::{cv_fitness, make_folds, Dataset, FitOptions, Folds, Metric};
use crate::predictor_space::{PredictorSpace, TermId};
use crate::report::{final_fit, FinalFit};

/// Stream of the master generator used for genetic operators. Fold
/// assignment uses the seed directly, so both encodings share folds.
const OPERATOR_STREAM: u64 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub p_crossover: f64,
    pub rates: MutationRates,
    pub tournament_size: usize,
    /// Slot count `l` of indexed chromosomes; ignored by the standard encoding.
    pub max_length: usize,
    pub encoding: Encoding,
    pub fitness_metric: Metric,
    pub cv_folds: usize,
    pub elite_count: usize,
    pub rng_seed: u64,
    /// Per-bit inclusion probability for standard initialization.
    pub init_density: f64,
    /// Term labels (`x3`, `x1:x5` or column names) forced into the first
    /// initial member.
    pub seed_terms: Vec<String>,
    pub fit: FitOptions,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 30,
            generations: 250,
            p_crossover: 0.5,
            rates: MutationRates::default(),
            tournament_size: 2,
            max_length: 50,
            encoding: Encoding::Indexed,
            fitness_metric: Metric::CvAic,
            cv_folds: 10,
            elite_count: 1,
            rng_seed: 1,
            init_density: 0.5,
            seed_terms: Vec::new(),
            fit: FitOptions::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config("population_size must be at least 2".into()));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return Err(Error::Config(format!(
                "tournament_size must be in 1..={}",
                self.population_size
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        if self.elite_count >= self.population_size {
            return Err(Error::Config("elite_count must be below population_size".into()));
        }
        if self.encoding == Encoding::Indexed && self.max_length == 0 {
            return Err(Error::Config("max_length must be at least 1".into()));
        }
        for (name, p) in [("p_crossover", self.p_crossover), ("init_density", self.init_density)] {
            check_probability(name, p).map_err(|e| Error::Config(e.to_string()))?;
        }
        self.rates.validate().map_err(|e| Error::Config(e.to_string()))
    }
}

/// Fitness of a term set under one metric.
pub trait FitnessFn: Sync {
    fn metric(&self) -> Metric;
    fn evaluate(&self, terms: &[TermId]) -> Result<f64>;
}

/// Cross-validated logistic-regression fitness on fixed folds.
pub struct CvObjective<'a> {
    pub dataset: &'a Dataset,
    pub space: PredictorSpace,
    pub folds: Folds,
    pub metric: Metric,
    pub fit: FitOptions,
}

impl FitnessFn for CvObjective<'_> {
    fn metric(&self) -> Metric {
        self.metric
    }

    fn evaluate(&self, terms: &[TermId]) -> Result<f64> {
        cv_fitness(self.dataset, terms, &self.space, &self.folds, self.metric, &self.fit)
            .map(|f| f.mean_value)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub requested: usize,
    pub computed: usize,
    pub failures: usize,
}

/// Memoizes fitness by sorted term set. Failed evaluations are cached as
/// `None`, which ranks below every finite fitness.
pub struct Evaluator<F> {
    objective: F,
    cache: HashMap<Vec<TermId>, Option<f64>>,
    pool: Option<rayon::ThreadPool>,
    counts: EvalCounts,
}

impl<F: FitnessFn> Evaluator<F> {
    pub fn new(objective: F, threads: usize) -> Result<Self> {
        let pool = if threads > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::invalid(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Evaluator {
            objective,
            cache: HashMap::new(),
            pool,
            counts: EvalCounts::default(),
        })
    }

    pub fn metric(&self) -> Metric {
        self.objective.metric()
    }

    pub fn counts(&self) -> EvalCounts {
        self.counts
    }

    pub fn objective(&self) -> &F {
        &self.objective
    }

    /// Fitness of every term set, in order. Uncached sets are evaluated
    /// (possibly concurrently); results do not depend on scheduling.
    pub fn evaluate_all(&mut self, sets: &[Vec<TermId>]) -> Vec<Option<f64>> {
        self.counts.requested += sets.len();
        let mut pending: Vec<&Vec<TermId>> = sets.iter().filter(|s| !self.cache.contains_key(*s)).collect();
        pending.sort();
        pending.dedup();
        let objective = &self.objective;
        let run = |s: &&Vec<TermId>| {
            let v = match objective.evaluate(s) {
                Ok(v) => Some(v),
                Err(e) => {
                    debug!("fitness evaluation failed for {} terms: {e}", s.len());
                    None
                }
            };
            ((*s).clone(), v)
        };
        let results: Vec<(Vec<TermId>, Option<f64>)> = match &self.pool {
            Some(pool) => pool.install(|| pending.par_iter().map(run).collect()),
            None => pending.iter().map(run).collect(),
        };
        for (s, v) in results {
            self.counts.computed += 1;
            if v.is_none() {
                self.counts.failures += 1;
            }
            self.cache.insert(s, v);
        }
        sets.iter().map(|s| self.cache[s]).collect()
    }
}

/// Chromosome with its active terms and fitness.
#[derive(Clone, Debug)]
pub struct Scored<C> {
    pub chromosome: C,
    pub terms: Vec<TermId>,
    pub fitness: Option<f64>,
}

/// Ordering with the better member first: fitness (failures last), then
/// fewer terms, then the lexicographically smaller term set.
pub fn compare_members<C>(a: &Scored<C>, b: &Scored<C>, metric: Metric) -> Ordering {
    compare_fitness(a.fitness, b.fitness, metric)
        .then(a.terms.len().cmp(&b.terms.len()))
        .then_with(|| a.terms.cmp(&b.terms))
}

fn compare_fitness(a: Option<f64>, b: Option<f64>, metric: Metric) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => {
            let o = x.total_cmp(&y);
            if metric.maximize() {
                o.reverse()
            } else {
                o
            }
        }
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// Index of the fittest of `size` members drawn without replacement; ties go
/// to the lowest index.
pub fn tournament_select<R: Rng + ?Sized>(
    fitness: &[Option<f64>],
    size: usize,
    metric: Metric,
    rng: &mut R,
) -> Result<usize> {
    if fitness.is_empty() {
        return Err(Error::invalid("tournament on an empty population"));
    }
    if size == 0 || size > fitness.len() {
        return Err(Error::invalid(format!(
            "tournament size {size} for population {}",
            fitness.len()
        )));
    }
    let mut entrants = sample(rng, fitness.len(), size).into_vec();
    entrants.sort_unstable();
    let mut best = entrants[0];
    for &i in &entrants[1..] {
        if compare_fitness(fitness[i], fitness[best], metric) == Ordering::Less {
            best = i;
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    /// Best fitness in this generation; `None` when every member failed.
    pub best_fitness: Option<f64>,
    /// Mean over members with a finite fitness.
    pub mean_fitness: Option<f64>,
    pub best_model_size: usize,
    pub mean_model_size: f64,
    pub repair_overflows: usize,
    pub mutation_noops: usize,
    pub failed_members: usize,
    pub new_evaluations: usize,
    /// Seconds since the run started.
    pub elapsed: f64,
}

/// Genetic-operator counts from producing one generation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BreedLog {
    pub repair_overflows: usize,
    pub mutation_noops: usize,
    pub crossovers: usize,
}

/// Builds the next generation's chromosomes from an evaluated population.
pub fn breed<C: Chromosome, R: Rng + ?Sized>(
    population: &[Scored<C>],
    config: &GaConfig,
    metric: Metric,
    space: &PredictorSpace,
    rng: &mut R,
) -> Result<(Vec<C>, BreedLog)> {
    let n = config.population_size;
    if population.len() != n {
        return Err(Error::invalid(format!("population has {} members, expected {n}", population.len())));
    }
    let mut log = BreedLog::default();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| compare_members(&population[a], &population[b], metric));
    let mut next: Vec<C> = order[..config.elite_count]
        .iter()
        .map(|&i| population[i].chromosome.clone())
        .collect();

    let fitness: Vec<Option<f64>> = population.iter().map(|m| m.fitness).collect();
    while next.len() < n {
        let a = tournament_select(&fitness, config.tournament_size, metric, rng)?;
        let b = tournament_select(&fitness, config.tournament_size, metric, rng)?;
        let (pa, pb) = (&population[a].chromosome, &population[b].chromosome);
        let (mut c1, mut c2) = if rng.random_bool(config.p_crossover) {
            log.crossovers += 1;
            let (c1, c2, repair) = pa.crossover(pb, space, rng)?;
            log.repair_overflows += repair.overflows;
            (c1, c2)
        } else {
            (pa.clone(), pb.clone())
        };
        for c in [&mut c1, &mut c2] {
            let m = c.mutate(&config.rates, space, rng);
            log.mutation_noops += m.noops;
            log.repair_overflows += m.repair.overflows;
        }
        if n - next.len() >= 2 {
            next.push(c1);
            next.push(c2);
        } else {
            next.push(if rng.random_bool(0.5) { c1 } else { c2 });
        }
    }
    Ok((next, log))
}

fn score_population<C: Chromosome, F: FitnessFn>(chromosomes: Vec<C>, evaluator: &mut Evaluator<F>) -> Vec<Scored<C>> {
    let sets: Vec<Vec<TermId>> = chromosomes.iter().map(|c| c.active_terms()).collect();
    let fitness = evaluator.evaluate_all(&sets);
    chromosomes
        .into_iter()
        .zip(sets)
        .zip(fitness)
        .map(|((chromosome, terms), fitness)| Scored {
            chromosome,
            terms,
            fitness,
        })
        .collect()
}

fn generation_stats<C>(
    generation: usize,
    population: &[Scored<C>],
    metric: Metric,
    log: BreedLog,
    new_evaluations: usize,
    elapsed: f64,
) -> GenerationStats {
    let best = population
        .iter()
        .min_by(|a, b| compare_members(a, b, metric))
        .expect("non-empty population");
    let finite: Vec<f64> = population.iter().filter_map(|m| m.fitness).collect();
    GenerationStats {
        generation,
        best_fitness: best.fitness,
        mean_fitness: (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64),
        best_model_size: best.terms.len(),
        mean_model_size: population.iter().map(|m| m.terms.len()).sum::<usize>() as f64 / population.len() as f64,
        repair_overflows: log.repair_overflows,
        mutation_noops: log.mutation_noops,
        failed_members: population.len() - finite.len(),
        new_evaluations,
        elapsed,
    }
}

/// One breeding step followed by evaluation of the new population.
pub fn step_generation<C: Chromosome, F: FitnessFn, R: Rng + ?Sized>(
    population: &[Scored<C>],
    config: &GaConfig,
    space: &PredictorSpace,
    evaluator: &mut Evaluator<F>,
    rng: &mut R,
) -> Result<(Vec<Scored<C>>, BreedLog)> {
    let metric = evaluator.metric();
    let (children, log) = breed(population, config, metric, space, rng)?;
    Ok((score_population(children, evaluator), log))
}

/// Serializable snapshot from which a run continues with identical results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: GaConfig,
    pub generation: usize,
    /// Operator generator position, as a decimal string.
    pub rng_word_pos: String,
    pub population: Vec<String>,
    pub best: String,
    pub history: Vec<GenerationStats>,
    pub elapsed: f64,
}

/// A GA run in progress over one encoding.
pub struct Evolution<'a, C: Chromosome> {
    config: GaConfig,
    dataset: &'a Dataset,
    evaluator: Evaluator<CvObjective<'a>>,
    rng: ChaCha8Rng,
    population: Vec<Scored<C>>,
    best: Option<Scored<C>>,
    history: Vec<GenerationStats>,
    generation: usize,
    started: Instant,
    elapsed_offset: f64,
}

fn resolve_seeds(config: &GaConfig, dataset: &Dataset, space: &PredictorSpace) -> Result<Vec<TermId>> {
    let mut seeds = config
        .seed_terms
        .iter()
        .map(|s| dataset.term_by_name(space, s))
        .collect::<Result<Vec<_>>>()?;
    seeds.sort_unstable();
    seeds.dedup();
    Ok(seeds)
}

impl<'a, C: Chromosome> Evolution<'a, C> {
    /// Validates the inputs, derives the folds and evaluates a seeded initial
    /// population (generation 0).
    pub fn new(config: GaConfig, dataset: &'a Dataset, threads: usize) -> Result<Self> {
        let mut evo = Self::prepare(config, dataset, threads)?;
        let space = evo.space().clone();
        let params = InitParams {
            init_density: evo.config.init_density,
            max_length: evo.config.max_length,
            seeds: Vec::new(),
        };
        let seeds = resolve_seeds(&evo.config, dataset, &space)?;
        let mut init_overflows = 0;
        let mut members = Vec::with_capacity(evo.config.population_size);
        for i in 0..evo.config.population_size {
            let p = if i == 0 && !seeds.is_empty() {
                InitParams {
                    seeds: seeds.clone(),
                    ..params.clone()
                }
            } else {
                params.clone()
            };
            let (c, repair) = C::random(&space, &p, &mut evo.rng)?;
            init_overflows += repair.overflows;
            members.push(c);
        }
        evo.population = score_population(members, &mut evo.evaluator);
        evo.best = Some(evo.current_best().clone());
        let log = BreedLog {
            repair_overflows: init_overflows,
            ..Default::default()
        };
        let stats = generation_stats(
            0,
            &evo.population,
            evo.metric(),
            log,
            evo.evaluator.counts().computed,
            evo.started.elapsed().as_secs_f64(),
        );
        evo.history.push(stats);
        Ok(evo)
    }

    fn prepare(config: GaConfig, dataset: &'a Dataset, threads: usize) -> Result<Self> {
        config.validate()?;
        if C::ENCODING != config.encoding {
            return Err(Error::Config(format!(
                "config encoding {} does not match chromosome type {}",
                config.encoding,
                C::ENCODING
            )));
        }
        dataset.require_both_classes()?;
        let space = dataset.space()?;
        let folds = make_folds(dataset.rows(), config.cv_folds, config.rng_seed)?;
        let objective = CvObjective {
            dataset,
            space,
            folds,
            metric: config.fitness_metric,
            fit: config.fit,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(OPERATOR_STREAM);
        Ok(Evolution {
            evaluator: Evaluator::new(objective, threads)?,
            config,
            dataset,
            rng,
            population: Vec::new(),
            best: None,
            history: Vec::new(),
            generation: 0,
            started: Instant::now(),
            elapsed_offset: 0.0,
        })
    }

    pub fn config(&self) -> &GaConfig {
        &self.config
    }

    pub fn space(&self) -> &PredictorSpace {
        &self.evaluator.objective().space
    }

    pub fn folds(&self) -> &Folds {
        &self.evaluator.objective().folds
    }

    pub fn metric(&self) -> Metric {
        self.config.fitness_metric
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn population(&self) -> &[Scored<C>] {
        &self.population
    }

    /// Best member of any generation so far.
    pub fn best(&self) -> &Scored<C> {
        self.best.as_ref().expect("initialized population")
    }

    pub fn history(&self) -> &[GenerationStats] {
        &self.history
    }

    pub fn eval_counts(&self) -> EvalCounts {
        self.evaluator.counts()
    }

    fn current_best(&self) -> &Scored<C> {
        self.population
            .iter()
            .min_by(|a, b| compare_members(a, b, self.metric()))
            .expect("non-empty population")
    }

    fn elapsed(&self) -> f64 {
        self.elapsed_offset + self.started.elapsed().as_secs_f64()
    }

    pub fn step(&mut self) -> Result<&GenerationStats> {
        let before = self.evaluator.counts();
        let space = self.space().clone();
        let (next, log) = step_generation(&self.population, &self.config, &space, &mut self.evaluator, &mut self.rng)?;
        self.population = next;
        self.generation += 1;
        let candidate = self.current_best();
        if compare_members(candidate, self.best(), self.metric()) == Ordering::Less {
            self.best = Some(candidate.clone());
        }
        let after = self.evaluator.counts();
        if after.failures > before.failures {
            warn!(
                "generation {}: {} fitness evaluation(s) failed and were ranked worst",
                self.generation,
                after.failures - before.failures
            );
        }
        let stats = generation_stats(
            self.generation,
            &self.population,
            self.metric(),
            log,
            after.computed - before.computed,
            self.elapsed(),
        );
        self.history.push(stats);
        Ok(self.history.last().expect("just pushed"))
    }

    /// Steps until `config.generations` have run.
    pub fn run_to_end(&mut self) -> Result<()> {
        while self.generation < self.config.generations {
            self.step()?;
        }
        Ok(())
    }

    /// Hierarchy and (indexed) duplicate violations over the population.
    pub fn population_violations(&self) -> usize {
        let space = self.space();
        self.population
            .iter()
            .filter(|m| m.chromosome.check(space).is_err() || !hierarchy_violations(&m.terms, space).is_empty())
            .count()
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            config: self.config.clone(),
            generation: self.generation,
            rng_word_pos: self.rng.get_word_pos().to_string(),
            population: self.population.iter().map(|m| m.chromosome.to_string()).collect(),
            best: self.best().chromosome.to_string(),
            history: self.history.clone(),
            elapsed: self.elapsed(),
        }
    }

    /// Continues from a checkpoint; subsequent generations match an
    /// uninterrupted run exactly.
    pub fn resume(checkpoint: &Checkpoint, dataset: &'a Dataset, threads: usize) -> Result<Self> {
        let mut evo = Self::prepare(checkpoint.config.clone(), dataset, threads)?;
        let pos: u128 = checkpoint
            .rng_word_pos
            .parse()
            .map_err(|_| Error::Config(format!("bad rng position {:?}", checkpoint.rng_word_pos)))?;
        evo.rng.set_word_pos(pos);
        let space = evo.space().clone();
        let members = checkpoint
            .population
            .iter()
            .map(|s| C::parse(s, &space))
            .collect::<Result<Vec<_>>>()?;
        if members.len() != evo.config.population_size {
            return Err(Error::Config("checkpoint population size does not match its config".into()));
        }
        evo.population = score_population(members, &mut evo.evaluator);
        let best = C::parse(&checkpoint.best, &space)?;
        let mut scored = score_population(vec![best], &mut evo.evaluator);
        evo.best = scored.pop();
        evo.generation = checkpoint.generation;
        evo.history = checkpoint.history.clone();
        evo.elapsed_offset = checkpoint.elapsed;
        Ok(evo)
    }

    pub fn report(&self) -> Result<RunReport> {
        let space = self.space();
        let best = self.best();
        Ok(RunReport {
            config: self.config.clone(),
            n_main: space.n_main(),
            total_terms: space.total_terms(),
            n_rows: self.dataset.rows(),
            fold_sizes: self.folds().sizes(),
            best_chromosome: best.chromosome.to_string(),
            best_terms: best.terms.iter().map(|t| t.get()).collect(),
            best_labels: best.terms.iter().map(|&t| self.dataset.term_label(space, t)).collect(),
            best_fitness: best.fitness,
            final_fit: final_fit(self.dataset, &best.terms, space, &self.config.fit).ok(),
            history: self.history.clone(),
            generations_run: self.generation,
            evaluations: self.evaluator.counts(),
            total_seconds: self.elapsed(),
        })
    }
}

/// Outcome of a complete run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: GaConfig,
    pub n_main: u32,
    pub total_terms: u32,
    pub n_rows: usize,
    pub fold_sizes: Vec<usize>,
    /// Best chromosome seen in any generation, in its text form.
    pub best_chromosome: String,
    pub best_terms: Vec<u32>,
    pub best_labels: Vec<String>,
    pub best_fitness: Option<f64>,
    /// Fit of the best term set on all rows.
    pub final_fit: Option<FinalFit>,
    pub history: Vec<GenerationStats>,
    pub generations_run: usize,
    pub evaluations: EvalCounts,
    pub total_seconds: f64,
}

impl RunReport {
    /// Copy with every wall-clock field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        r.total_seconds = 0.0;
        for g in &mut r.history {
            g.elapsed = 0.0;
        }
        r
    }

    pub fn best_term_ids(&self) -> Vec<TermId> {
        self.best_terms.iter().filter_map(|&t| TermId::new(t)).collect()
    }
}

/// Runs `config.generations` generations with the configured encoding.
pub fn run(config: &GaConfig, dataset: &Dataset) -> Result<RunReport> {
    run_with_threads(config, dataset, default_threads())
}

pub fn run_with_threads(config: &GaConfig, dataset: &Dataset, threads: usize) -> Result<RunReport> {
    match config.encoding {
        Encoding::Standard => run_encoding::<StandardChromosome>(config, dataset, threads),
        Encoding::Indexed => run_encoding::<IndexedChromosome>(config, dataset, threads),
    }
}

fn run_encoding<C: Chromosome>(config: &GaConfig, dataset: &Dataset, threads: usize) -> Result<RunReport> {
    let mut evo = Evolution::<C>::new(config.clone(), dataset, threads)?;
    evo.run_to_end()?;
    evo.report()
}

/// Worker count: available cores, capped by `GA_VARSEL_THREADS` when set.
pub fn default_threads() -> usize {
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var("GA_VARSEL_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => cores.min(cap),
        _ => cores,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate, SimSpec};

    fn t(id: u32) -> TermId {
        TermId::new(id).unwrap()
    }

    #[test]
    fn tournament_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = vec![Some(3.0), Some(1.0), None, Some(2.0)];
        for _ in 0..100 {
            assert_eq!(tournament_select(&f, 4, Metric::CvAic, &mut rng).unwrap(), 1);
            assert_eq!(tournament_select(&f, 4, Metric::CvAuc, &mut rng).unwrap(), 0);
        }
        let two = vec![Some(0.9), Some(0.4)];
        for _ in 0..100 {
            assert_eq!(tournament_select(&two, 2, Metric::CvAuc, &mut rng).unwrap(), 0);
        }
        assert!(tournament_select(&f, 5, Metric::CvAic, &mut rng).is_err());
        assert!(tournament_select(&[], 1, Metric::CvAic, &mut rng).is_err());
        let ties = vec![Some(1.0); 5];
        assert_eq!(tournament_select(&ties, 5, Metric::CvAic, &mut rng).unwrap(), 0);
    }

    #[test]
    fn member_ordering_prefers_smaller_models_on_ties() {
        let m = |fitness, terms: Vec<u32>| Scored {
            chromosome: (),
            terms: terms.into_iter().map(t).collect(),
            fitness,
        };
        let a = m(Some(10.0), vec![1, 2]);
        let b = m(Some(10.0), vec![1]);
        let c = m(Some(10.0), vec![2]);
        let d = m(None, vec![]);
        assert_eq!(compare_members(&b, &a, Metric::CvAic), Ordering::Less);
        assert_eq!(compare_members(&b, &c, Metric::CvAic), Ordering::Less);
        assert_eq!(compare_members(&a, &d, Metric::CvAuc), Ordering::Less);
    }

    #[test]
    fn config_validation() {
        assert!(GaConfig::default().validate().is_ok());
        for bad in [
            GaConfig { population_size: 1, tournament_size: 1, elite_count: 0, ..Default::default() },
            GaConfig { tournament_size: 0, ..Default::default() },
            GaConfig { cv_folds: 1, ..Default::default() },
            GaConfig { elite_count: 30, ..Default::default() },
            GaConfig { p_crossover: 1.5, ..Default::default() },
            GaConfig { max_length: 0, ..Default::default() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    fn small_data(seed: u64) -> Dataset {
        generate(&SimSpec {
            n_main: 4,
            n_samples: 200,
            true_terms: vec![t(1), t(2)],
            threshold: 0.5,
            noise_variance: 1.0,
            rng_seed: seed,
            ..Default::default()
        })
        .unwrap()
        .dataset
        .with_standardization(true)
    }

    fn small_config(encoding: Encoding) -> GaConfig {
        GaConfig {
            population_size: 8,
            generations: 5,
            max_length: 6,
            encoding,
            cv_folds: 4,
            ..Default::default()
        }
    }

    #[test]
    fn zero_generations_reports_initial_best() {
        let d = small_data(1);
        let cfg = GaConfig { generations: 0, ..small_config(Encoding::Indexed) };
        let evo = Evolution::<IndexedChromosome>::new(cfg.clone(), &d, 1).unwrap();
        let initial_best = evo.current_best().terms.clone();
        let r = run(&cfg, &d).unwrap();
        assert_eq!(r.generations_run, 0);
        assert_eq!(r.history.len(), 1);
        assert_eq!(r.best_term_ids(), initial_best);
    }

    #[test]
    fn constant_response_refused() {
        let d = Dataset::new(vec![vec![1.0, 2.0, 3.0, 4.0]], vec![1.0; 4], None).unwrap();
        let err = run(&small_config(Encoding::Standard), &d).unwrap_err();
        assert!(matches!(err, Error::DegenerateData(_)), "{err}");
    }

    #[test]
    fn encoding_mismatch_refused() {
        let d = small_data(1);
        assert!(Evolution::<StandardChromosome>::new(small_config(Encoding::Indexed), &d, 1).is_err());
    }

    #[test]
    fn population_size_constant_and_odd_sizes_fill() {
        let d = small_data(2);
        for encoding in [Encoding::Standard, Encoding::Indexed] {
            let cfg = GaConfig { population_size: 7, elite_count: 2, ..small_config(encoding) };
            let r = run(&cfg, &d).unwrap();
            assert_eq!(r.history.len(), 6);
            let mut evo = Evolution::<IndexedChromosome>::new(GaConfig { encoding: Encoding::Indexed, ..cfg }, &d, 1).unwrap();
            for _ in 0..3 {
                evo.step().unwrap();
                assert_eq!(evo.population().len(), 7);
            }
        }
    }

    #[test]
    fn resume_matches_uninterrupted_run() {
        let d = small_data(3);
        let cfg = GaConfig { generations: 6, ..small_config(Encoding::Indexed) };
        let full = run_with_threads(&cfg, &d, 1).unwrap();
        let mut evo = Evolution::<IndexedChromosome>::new(cfg.clone(), &d, 1).unwrap();
        for _ in 0..3 {
            evo.step().unwrap();
        }
        let cp: Checkpoint = serde_json::from_str(&serde_json::to_string(&evo.checkpoint()).unwrap()).unwrap();
        let mut resumed = Evolution::<IndexedChromosome>::resume(&cp, &d, 1).unwrap();
        resumed.run_to_end().unwrap();
        let r = resumed.report().unwrap();
        assert_eq!(r.best_terms, full.best_terms);
        let strip = |h: &[GenerationStats]| {
            h.iter()
                .map(|g| (g.best_fitness, g.best_model_size, g.mean_model_size.to_bits()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&r.history), strip(&full.history));
    }

    #[test]
    fn threaded_evaluation_matches_serial() {
        let d = small_data(4);
        let cfg = small_config(Encoding::Standard);
        let a = run_with_threads(&cfg, &d, 1).unwrap().without_timing();
        let b = run_with_threads(&cfg, &d, 3).unwrap().without_timing();
        assert_eq!(a, b);
    }

    #[test]
    fn failures_rank_worst() {
        struct Flaky;
        impl FitnessFn for Flaky {
            fn metric(&self) -> Metric {
                Metric::CvAuc
            }
            fn evaluate(&self, terms: &[TermId]) -> Result<f64> {
                if terms.len() % 2 == 1 {
                    Err(Error::Numerical("odd".into()))
                } else {
                    Ok(terms.len() as f64)
                }
            }
        }
        let mut ev = Evaluator::new(Flaky, 1).unwrap();
        let sets = vec![vec![t(1)], vec![t(1), t(2)], vec![t(1)]];
        assert_eq!(ev.evaluate_all(&sets), vec![None, Some(2.0), None]);
        assert_eq!(ev.counts(), EvalCounts { requested: 3, computed: 2, failures: 1 });
        let f = ev.evaluate_all(&sets);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(tournament_select(&f, 3, Metric::CvAuc, &mut rng).unwrap(), 1);
    }
}
