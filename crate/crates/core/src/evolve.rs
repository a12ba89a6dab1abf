//! Age-Fitness Pareto Optimization over material genomes.
//!
//! A genome is a stiffness vector plus the two input-port indices; source
//! and output ports are fixed per run. Every objective is minimized, and
//! genotypic age joins them during truncation so that young lineages are
//! protected from older, better-adapted ones until they catch up.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{evaluate_gate, GateSettings, MaterialDesign, Ports, STIFFNESS_RANGE};
use crate::packing::{build_lattice, relax_fire, LatticeSpec, Packing};
use crate::seeding;
use crate::sentinel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Genome {
    pub stiffness: Vec<f64>,
    pub input_ports: [usize; 2],
}

/// Bounds and mutation settings shared by every genome of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeSpace {
    pub particle_count: usize,
    /// Sites input ports may never occupy (source and output).
    pub reserved: Vec<usize>,
    pub stiffness_range: (f64, f64),
    pub mutation_sigma: f64,
    /// Per-gene perturbation probability of the Gaussian operator.
    pub gene_rate: f64,
}

impl GenomeSpace {
    pub fn new(particle_count: usize, reserved: Vec<usize>, mutation_sigma: f64, gene_rate: Option<f64>) -> Result<Self> {
        let space = Self {
            particle_count,
            reserved,
            stiffness_range: STIFFNESS_RANGE,
            gene_rate: gene_rate.unwrap_or(1.0 / particle_count.max(1) as f64),
            mutation_sigma,
        };
        space.validate_self()?;
        Ok(space)
    }

    fn validate_self(&self) -> Result<()> {
        if self.reserved.iter().any(|&r| r >= self.particle_count) {
            return Err(Error::invalid("reserved site out of range"));
        }
        let free = self.particle_count - self.reserved.iter().collect::<BTreeSet<_>>().len();
        if free < 2 {
            return Err(Error::invalid("fewer than two sites available for input ports"));
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            return Err(Error::invalid(format!("mutation sigma must be >= 0, got {}", self.mutation_sigma)));
        }
        if !(0.0..=1.0).contains(&self.gene_rate) {
            return Err(Error::invalid(format!("gene rate must be in [0, 1], got {}", self.gene_rate)));
        }
        Ok(())
    }

    pub fn validate(&self, genome: &Genome) -> Result<()> {
        if genome.stiffness.len() != self.particle_count {
            return Err(Error::LengthMismatch(genome.stiffness.len(), self.particle_count));
        }
        let (lo, hi) = self.stiffness_range;
        if genome.stiffness.iter().any(|k| !(*k >= lo && *k <= hi)) {
            return Err(Error::invalid("stiffness gene out of bounds"));
        }
        let [a, b] = genome.input_ports;
        if a == b || !self.is_free_site(a) || !self.is_free_site(b) {
            return Err(Error::invalid(format!("invalid input ports {:?}", genome.input_ports)));
        }
        Ok(())
    }

    fn is_free_site(&self, i: usize) -> bool {
        i < self.particle_count && !self.reserved.contains(&i)
    }

    /// A uniformly random site that is neither reserved nor in `taken`.
    fn random_site<R: Rng + ?Sized>(&self, taken: &[usize], rng: &mut R) -> usize {
        loop {
            let i = rng.random_range(0..self.particle_count);
            if self.is_free_site(i) && !taken.contains(&i) {
                return i;
            }
        }
    }

    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        let (lo, hi) = self.stiffness_range;
        let stiffness = (0..self.particle_count).map(|_| rng.random_range(lo..=hi)).collect();
        let a = self.random_site(&[], rng);
        let b = self.random_site(&[a], rng);
        Genome {
            stiffness,
            input_ports: [a, b],
        }
    }

    /// Applies one operator chosen with equal probability: a Gaussian
    /// stiffness perturbation or an input-port move.
    pub fn mutate<R: Rng + ?Sized>(&self, genome: &Genome, rng: &mut R) -> Genome {
        if rng.random_bool(0.5) {
            self.mutate_stiffness(genome, rng)
        } else {
            self.mutate_port(genome, rng)
        }
    }

    /// Perturbs each gene with probability `gene_rate` by `N(0, sigma)`,
    /// clamping to the stiffness bounds.
    pub fn mutate_stiffness<R: Rng + ?Sized>(&self, genome: &Genome, rng: &mut R) -> Genome {
        let (lo, hi) = self.stiffness_range;
        let normal = Normal::new(0.0, self.mutation_sigma).expect("sigma validated");
        let mut child = genome.clone();
        for k in child.stiffness.iter_mut() {
            if rng.random_bool(self.gene_rate) {
                *k = (*k + normal.sample(rng)).clamp(lo, hi);
            }
        }
        child
    }

    /// Moves one input port, chosen uniformly, to a random free site.
    pub fn mutate_port<R: Rng + ?Sized>(&self, genome: &Genome, rng: &mut R) -> Genome {
        let mut child = genome.clone();
        let which = rng.random_range(0..2);
        let other = child.input_ports[1 - which];
        child.input_ports[which] = self.random_site(&[other], rng);
        child
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub id: u64,
    pub genome: Genome,
    pub age: u32,
    #[serde(with = "sentinel::vec")]
    pub objectives: Vec<f64>,
    /// Id of the newcomer that founded this individual's lineage.
    pub lineage_id: u64,
}

impl Individual {
    fn selection_vector(&self) -> Vec<f64> {
        std::iter::once(self.age as f64).chain(self.objectives.iter().copied()).collect()
    }
}

/// Pareto dominance for minimization: `a <= b` everywhere and `a < b`
/// somewhere. NaN compares as worse than everything.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    let key = |x: f64| if x.is_nan() { f64::INFINITY } else { x };
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (key(x), key(y));
        if x > y {
            return Ok(false);
        }
        strict |= x < y;
    }
    Ok(strict)
}

/// Indices of the points not dominated by any other point.
pub fn pareto_front(points: &[Vec<f64>]) -> Result<Vec<usize>> {
    let mut front = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let mut dominated = false;
        for (j, q) in points.iter().enumerate() {
            if i != j && dominates(q, p)? {
                dominated = true;
                break;
            }
        }
        if !dominated {
            front.push(i);
        }
    }
    Ok(front)
}

/// Index of the point closest to the utopia point after min-max
/// normalizing each objective over `points`. Objectives with zero spread
/// normalize to 0.
pub fn knee_point(points: &[Vec<f64>]) -> Result<usize> {
    let first = points.first().ok_or_else(|| Error::invalid("knee point of an empty front"))?;
    let dims = first.len();
    if let Some(p) = points.iter().find(|p| p.len() != dims) {
        return Err(Error::LengthMismatch(p.len(), dims));
    }
    let mut lo = vec![f64::INFINITY; dims];
    let mut hi = vec![f64::NEG_INFINITY; dims];
    for p in points {
        for d in 0..dims {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let distance = |p: &Vec<f64>| -> f64 {
        (0..dims)
            .map(|d| {
                let span = hi[d] - lo[d];
                if span > 0.0 && span.is_finite() {
                    ((p[d] - lo[d]) / span).powi(2)
                } else if p[d] == lo[d] {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .sum()
    };
    Ok((0..points.len())
        .min_by(|&i, &j| distance(&points[i]).total_cmp(&distance(&points[j])))
        .expect("non-empty"))
}

/// Shrinks `pool` to `cap` individuals. Randomly chosen dominated
/// individuals (over age and objectives) go first. When everyone left is
/// non-dominated the oldest goes, worst first objective breaking ties, but
/// the holder of the best value of each objective is always kept.
pub fn truncate<R: Rng + ?Sized>(pool: &mut Vec<Individual>, cap: usize, rng: &mut R) {
    while pool.len() > cap {
        let vectors: Vec<Vec<f64>> = pool.iter().map(Individual::selection_vector).collect();
        let dominated: Vec<usize> = (0..pool.len())
            .filter(|&i| {
                (0..pool.len()).any(|j| j != i && dominates(&vectors[j], &vectors[i]).expect("equal lengths"))
            })
            .collect();
        let victim = if dominated.is_empty() {
            let elites: Vec<usize> = (0..pool[0].objectives.len()).map(|d| best_index_on(pool, d)).collect();
            (0..pool.len())
                .filter(|i| !elites.contains(i))
                .max_by(|&i, &j| {
                    pool[i]
                        .age
                        .cmp(&pool[j].age)
                        .then(first_objective(&pool[i]).total_cmp(&first_objective(&pool[j])))
                })
                .unwrap_or_else(|| (0..pool.len()).max_by_key(|&i| pool[i].age).expect("non-empty"))
        } else {
            dominated[rng.random_range(0..dominated.len())]
        };
        pool.remove(victim);
    }
}

fn objective(ind: &Individual, d: usize) -> f64 {
    let f = ind.objectives[d];
    if f.is_nan() {
        f64::INFINITY
    } else {
        f
    }
}

/// Best value of objective `d`, younger first on ties.
fn best_index_on(pop: &[Individual], d: usize) -> usize {
    (0..pop.len())
        .min_by(|&i, &j| {
            objective(&pop[i], d)
                .total_cmp(&objective(&pop[j], d))
                .then(pop[i].age.cmp(&pop[j].age))
        })
        .expect("non-empty population")
}

fn first_objective(ind: &Individual) -> f64 {
    objective(ind, 0)
}

fn best_index(pop: &[Individual]) -> usize {
    best_index_on(pop, 0)
}

/// Maps a genome to objective values, all minimized.
pub trait Evaluator: Sync {
    fn objective_count(&self) -> usize;

    /// Failures must be reported as `+inf` objectives rather than panics.
    fn evaluate(&self, genome: &Genome, rng: &mut ChaCha8Rng) -> Vec<f64>;

    /// Physics simulations consumed by one evaluation, for bookkeeping.
    fn simulations_per_evaluation(&self) -> u64 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AfpoParams {
    pub population_size: usize,
    pub generations: usize,
    pub seed: u64,
}

impl AfpoParams {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population size must be at least 2"));
        }
        Ok(())
    }
}

/// Everything needed to continue a run, including the selection RNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub generation: usize,
    pub population: Vec<Individual>,
    pub rng: ChaCha8Rng,
    pub next_id: u64,
    #[serde(with = "sentinel")]
    pub best_so_far: f64,
    pub evaluations: u64,
    pub simulations: u64,
}

/// One line of run history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Per-objective minimum over the population.
    #[serde(with = "sentinel::vec")]
    pub best: Vec<f64>,
    /// Per-objective mean over finite values.
    #[serde(with = "sentinel::vec")]
    pub mean: Vec<f64>,
    /// Lowest first objective seen so far in the run.
    #[serde(with = "sentinel")]
    pub best_so_far: f64,
    pub best_id: u64,
    pub best_lineage: u64,
    pub best_age: u32,
    pub lineages: Vec<u64>,
    /// Lineage founded by this generation's newcomer, if any.
    pub newcomer_lineage: Option<u64>,
    /// Age-0 individuals in the pool just before truncation.
    pub age_zero_before_truncation: usize,
    pub failed_evaluations: usize,
    pub evaluations: u64,
    pub simulations: u64,
}

pub struct Evolution<'a, E: Evaluator> {
    params: AfpoParams,
    space: GenomeSpace,
    evaluator: &'a E,
    state: EvolutionState,
}

impl<'a, E: Evaluator> Evolution<'a, E> {
    /// Creates and evaluates a random initial population (generation 0).
    pub fn start(params: AfpoParams, space: GenomeSpace, evaluator: &'a E) -> Result<(Self, GenerationRecord)> {
        params.validate()?;
        let mut rng = seeding::stream(params.seed, &[u64::MAX]);
        let genomes: Vec<Genome> = (0..params.population_size).map(|_| space.random(&mut rng)).collect();
        let pool: Vec<Individual> = genomes
            .into_iter()
            .enumerate()
            .map(|(i, genome)| Individual {
                id: i as u64,
                genome,
                age: 0,
                objectives: Vec::new(),
                lineage_id: i as u64,
            })
            .collect();
        let mut evo = Self {
            params,
            space,
            evaluator,
            state: EvolutionState {
                generation: 0,
                population: Vec::new(),
                rng,
                next_id: params.population_size as u64,
                best_so_far: f64::INFINITY,
                evaluations: 0,
                simulations: 0,
            },
        };
        let failed = evo.evaluate_into(pool);
        let zero = evo.state.population.len();
        let record = evo.record(None, zero, failed);
        Ok((evo, record))
    }

    /// Continues from a saved state.
    pub fn resume(params: AfpoParams, space: GenomeSpace, evaluator: &'a E, state: EvolutionState) -> Result<Self> {
        params.validate()?;
        if state.population.is_empty() {
            return Err(Error::invalid("checkpoint has an empty population"));
        }
        for ind in &state.population {
            space.validate(&ind.genome)?;
            if ind.objectives.len() != evaluator.objective_count() {
                return Err(Error::LengthMismatch(ind.objectives.len(), evaluator.objective_count()));
            }
        }
        Ok(Self {
            params,
            space,
            evaluator,
            state,
        })
    }

    pub fn state(&self) -> &EvolutionState {
        &self.state
    }

    pub fn population(&self) -> &[Individual] {
        &self.state.population
    }

    pub fn generation(&self) -> usize {
        self.state.generation
    }

    pub fn is_finished(&self) -> bool {
        self.state.generation >= self.params.generations
    }

    /// Evaluates `pool` in parallel and appends it to the population.
    /// Returns the number of failed evaluations.
    fn evaluate_into(&mut self, mut pool: Vec<Individual>) -> usize {
        let seed = self.params.seed;
        let generation = self.state.generation as u64;
        let evaluator = self.evaluator;
        let objectives: Vec<Vec<f64>> = pool
            .par_iter()
            .map(|ind| {
                let mut rng = seeding::stream(seed, &[generation, ind.id]);
                let mut obj = evaluator.evaluate(&ind.genome, &mut rng);
                if obj.len() != evaluator.objective_count() {
                    obj = vec![f64::INFINITY; evaluator.objective_count()];
                }
                obj
            })
            .collect();
        let mut failed = 0;
        for (ind, obj) in pool.iter_mut().zip(objectives) {
            failed += usize::from(obj.iter().any(|v| !v.is_finite()));
            ind.objectives = obj;
        }
        self.state.evaluations += pool.len() as u64;
        self.state.simulations += pool.len() as u64 * evaluator.simulations_per_evaluation();
        self.state.population.extend(pool);
        failed
    }

    /// Runs one AFPO generation.
    pub fn step(&mut self) -> GenerationRecord {
        self.state.generation += 1;
        for ind in &mut self.state.population {
            ind.age += 1;
        }
        let target = 2 * self.params.population_size;
        let n_offspring = target.saturating_sub(self.state.population.len() + 1);
        let mut pool = Vec::with_capacity(n_offspring + 1);
        for _ in 0..n_offspring {
            let parent = &self.state.population[self.state.rng.random_range(0..self.state.population.len())];
            let genome = self.space.mutate(&parent.genome, &mut self.state.rng);
            let (age, lineage_id) = (parent.age, parent.lineage_id);
            pool.push(Individual {
                id: self.next_id(),
                genome,
                age,
                objectives: Vec::new(),
                lineage_id,
            });
        }
        let id = self.next_id();
        pool.push(Individual {
            id,
            genome: self.space.random(&mut self.state.rng),
            age: 0,
            objectives: Vec::new(),
            lineage_id: id,
        });
        let failed = self.evaluate_into(pool);
        let zero = self.state.population.iter().filter(|i| i.age == 0).count();
        truncate(&mut self.state.population, self.params.population_size, &mut self.state.rng);
        self.record(Some(id), zero, failed)
    }

    fn next_id(&mut self) -> u64 {
        let id = self.state.next_id;
        self.state.next_id += 1;
        id
    }

    fn record(&mut self, newcomer: Option<u64>, age_zero: usize, failed: usize) -> GenerationRecord {
        let pop = &self.state.population;
        let m = self.evaluator.objective_count();
        let best = (0..m)
            .map(|d| pop.iter().map(|i| i.objectives[d]).fold(f64::INFINITY, f64::min))
            .collect();
        let mean = (0..m)
            .map(|d| {
                let finite: Vec<f64> = pop.iter().map(|i| i.objectives[d]).filter(|v| v.is_finite()).collect();
                if finite.is_empty() {
                    f64::NAN
                } else {
                    finite.iter().sum::<f64>() / finite.len() as f64
                }
            })
            .collect();
        let elite = &pop[best_index(pop)];
        self.state.best_so_far = self.state.best_so_far.min(first_objective(elite));
        let lineages: BTreeSet<u64> = pop.iter().map(|i| i.lineage_id).collect();
        GenerationRecord {
            generation: self.state.generation,
            best,
            mean,
            best_so_far: self.state.best_so_far,
            best_id: elite.id,
            best_lineage: elite.lineage_id,
            best_age: elite.age,
            lineages: lineages.into_iter().collect(),
            newcomer_lineage: newcomer.filter(|id| pop.iter().any(|i| i.lineage_id == *id)),
            age_zero_before_truncation: age_zero,
            failed_evaluations: failed,
            evaluations: self.state.evaluations,
            simulations: self.state.simulations,
        }
    }

    /// Individual with the best first objective.
    pub fn best(&self) -> &Individual {
        &self.state.population[best_index(&self.state.population)]
    }

    /// Members of the current population not dominated on the objectives
    /// alone (age excluded).
    pub fn front(&self) -> Vec<&Individual> {
        let points: Vec<Vec<f64>> = self.state.population.iter().map(|i| i.objectives.clone()).collect();
        pareto_front(&points)
            .expect("objective vectors share a length")
            .into_iter()
            .map(|i| &self.state.population[i])
            .collect()
    }
}

/// Configuration of a gate-design run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolutionConfig {
    pub population_size: usize,
    pub generations: usize,
    pub mutation_sigma: f64,
    /// Per-gene perturbation probability; `None` means one over the genome
    /// length.
    pub gene_rate: Option<f64>,
    /// One frequency for NAND, two for polycomputation.
    pub frequencies: Vec<f64>,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub lattice: LatticeSpec,
    pub source: usize,
    pub output: usize,
    pub gate: GateSettings,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 500,
            mutation_sigma: 0.1,
            gene_rate: None,
            frequencies: vec![10.0],
            seed: 0,
            checkpoint_every: 10,
            lattice: LatticeSpec::default(),
            source: 2,
            output: 26,
            gate: GateSettings::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        self.afpo().validate()?;
        self.lattice.validate()?;
        match self.frequencies.as_slice() {
            [f] if *f > 0.0 => {}
            [a, b] if *a > 0.0 && *b > 0.0 && a != b => {}
            other => {
                return Err(Error::invalid(format!(
                    "need one positive frequency or two distinct ones, got {other:?}"
                )))
            }
        }
        if self.source == self.output {
            return Err(Error::invalid("source and output must differ"));
        }
        self.space().map(|_| ())
    }

    pub fn afpo(&self) -> AfpoParams {
        AfpoParams {
            population_size: self.population_size,
            generations: self.generations,
            seed: self.seed,
        }
    }

    pub fn space(&self) -> Result<GenomeSpace> {
        GenomeSpace::new(
            self.lattice.particle_count(),
            vec![self.source, self.output],
            self.mutation_sigma,
            self.gene_rate,
        )
    }
}

/// Scores a genome by the gate fitness at each configured frequency.
pub struct GateEvaluator {
    pub base: Packing,
    pub source: usize,
    pub output: usize,
    pub settings: GateSettings,
    pub frequencies: Vec<f64>,
}

impl GateEvaluator {
    /// Builds the lattice and relaxes it under uniform unit stiffness as the
    /// starting geometry for every design.
    pub fn from_config(cfg: &EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let lattice = build_lattice(&cfg.lattice)?;
        let uniform = vec![STIFFNESS_RANGE.0; lattice.len()];
        let base = relax_fire(&lattice, &uniform, &cfg.gate.sim.law, &cfg.gate.fire)?;
        Ok(Self {
            base,
            source: cfg.source,
            output: cfg.output,
            settings: cfg.gate,
            frequencies: cfg.frequencies.clone(),
        })
    }

    pub fn design(&self, genome: &Genome) -> MaterialDesign {
        MaterialDesign {
            packing: self.base.clone(),
            stiffness: genome.stiffness.clone(),
            ports: Ports {
                inputs: genome.input_ports,
                source: self.source,
                output: self.output,
            },
        }
    }

    pub fn try_evaluate(&self, genome: &Genome) -> Result<Vec<f64>> {
        let design = self.settings.prepare(&self.design(genome))?;
        let reuse = GateSettings {
            relax: crate::gate::RelaxPolicy::Reuse,
            ..self.settings
        };
        self.frequencies
            .iter()
            .map(|&f| evaluate_gate(&design, &reuse, f).map(|r| r.fitness))
            .collect()
    }
}

impl Evaluator for GateEvaluator {
    fn objective_count(&self) -> usize {
        self.frequencies.len()
    }

    fn evaluate(&self, genome: &Genome, _rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.try_evaluate(genome)
            .unwrap_or_else(|_| vec![f64::INFINITY; self.frequencies.len()])
    }

    fn simulations_per_evaluation(&self) -> u64 {
        4 * self.frequencies.len() as u64
    }
}

/// Self-contained snapshot of a gate-design run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub config: EvolutionConfig,
    pub state: EvolutionState,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn space() -> GenomeSpace {
        GenomeSpace::new(30, vec![2, 26], 0.1, None).unwrap()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 0.2], &[2.0, 0.3]).unwrap());
        assert!(!dominates(&[1.0, 0.2], &[1.0, 0.2]).unwrap());
        assert!(!dominates(&[1.0, 0.4], &[2.0, 0.3]).unwrap());
        assert!(dominates(&[1.0, 0.2], &[1.0, f64::INFINITY]).unwrap());
        assert!(dominates(&[1.0], &[2.0, 0.3]).is_err());
    }

    #[test]
    fn knee_examples() {
        let front = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.2, 0.2]];
        assert_eq!(knee_point(&front).unwrap(), 2);
        assert_eq!(knee_point(&[vec![0.3, 0.4]]).unwrap(), 0);
        assert!(knee_point(&[]).is_err());
    }

    #[test]
    fn random_genomes_are_valid() {
        let s = space();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            s.validate(&s.random(&mut rng)).unwrap();
        }
    }

    #[test]
    fn port_mutation_keeps_ports_distinct_and_unreserved() {
        let s = space();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut g = s.random(&mut rng);
        for _ in 0..2000 {
            let child = s.mutate_port(&g, &mut rng);
            s.validate(&child).unwrap();
            assert_eq!(child.stiffness, g.stiffness);
            let moved = (0..2).filter(|&w| child.input_ports[w] != g.input_ports[w]).count();
            assert!(moved <= 1);
            g = child;
        }
    }

    #[test]
    fn zero_sigma_leaves_stiffness_unchanged() {
        let s = GenomeSpace::new(30, vec![2, 26], 0.0, Some(1.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = s.random(&mut rng);
        assert_eq!(s.mutate_stiffness(&g, &mut rng), g);
    }

    #[test]
    fn perturbation_size_is_half_normal() {
        let s = space();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = Genome {
            stiffness: vec![5.5; 30],
            input_ports: [13, 15],
        };
        let (mut sum, mut count) = (0.0, 0usize);
        for _ in 0..10_000 {
            let child = s.mutate_stiffness(&g, &mut rng);
            for (a, b) in child.stiffness.iter().zip(&g.stiffness) {
                if a != b {
                    sum += (a - b).abs();
                    count += 1;
                }
            }
        }
        let expected = 0.1 * (2.0 / std::f64::consts::PI).sqrt();
        let mean = sum / count as f64;
        assert!((mean - expected).abs() < 0.05 * expected, "mean {mean} vs {expected}");
        // one gene per event on average
        assert!((count as f64 / 10_000.0 - 1.0).abs() < 0.05);
    }

    fn ind(id: u64, age: u32, f: f64) -> Individual {
        Individual {
            id,
            genome: Genome {
                stiffness: vec![1.0; 30],
                input_ports: [13, 15],
            },
            age,
            objectives: vec![f],
            lineage_id: id,
        }
    }

    #[test]
    fn truncation_removes_dominated_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pool = vec![ind(0, 1, 0.2), ind(1, 1, 0.6), ind(2, 1, 0.4), ind(3, 0, 0.4)];
        truncate(&mut pool, 2, &mut rng);
        let ids: Vec<u64> = pool.iter().map(|i| i.id).collect();
        assert_eq!(ids, vec![0, 3]);
    }

    #[test]
    fn truncation_fallback_keeps_the_elite() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut pool = vec![ind(0, 3, 0.1), ind(1, 2, 0.2), ind(2, 1, 0.3), ind(3, 0, 0.4)];
        truncate(&mut pool, 2, &mut rng);
        let ids: Vec<u64> = pool.iter().map(|i| i.id).collect();
        assert_eq!(ids, vec![0, 3]);
    }

    #[test]
    fn truncation_fallback_breaks_age_ties_by_worst_fitness() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pool_of = |objs: &[[f64; 2]]| -> Vec<Individual> {
            objs.iter()
                .enumerate()
                .map(|(i, o)| {
                    let mut x = ind(i as u64, 2, o[0]);
                    x.objectives = o.to_vec();
                    x
                })
                .collect()
        };
        let mut pool = pool_of(&[[0.1, 0.9], [0.5, 0.3], [0.6, 0.2], [0.7, 0.1]]);
        truncate(&mut pool, 3, &mut rng);
        let ids: Vec<u64> = pool.iter().map(|i| i.id).collect();
        // ids 0 and 3 hold the per-objective bests; 2 is worse than 1 on the first
        assert_eq!(ids, vec![0, 1, 3]);
    }

    #[test]
    fn truncation_fallback_keeps_every_objective_elite() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut a = ind(0, 1, 0.1);
        a.objectives = vec![0.1, 0.9];
        let mut b = ind(1, 5, 0.9);
        b.objectives = vec![0.9, 0.1];
        let mut c = ind(2, 0, 0.5);
        c.objectives = vec![0.5, 0.5];
        let mut pool = vec![a, b, c];
        truncate(&mut pool, 2, &mut rng);
        let ids: Vec<u64> = pool.iter().map(|i| i.id).collect();
        assert_eq!(ids, vec![0, 1]);
    }
}
