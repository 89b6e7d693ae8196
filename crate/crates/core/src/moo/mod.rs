//! Controlled-elitist NSGA-II over the bank count and the membership genome.

mod io;
mod select;
mod sort;
mod vary;

pub use io::{read_front, write_archive, write_front, write_history, FrontRow};
pub use select::{controlled_elitist_select, front_quotas, rank_population, tournament, Ranking};
pub use sort::{crowding_distance, dominates, non_dominated_sort};
pub use vary::{vary_pair, Candidate, VariationParams};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycle::DriveCycle;
use crate::fis::{MfGenome, GENOME_LEN};
use crate::sim::{evaluate_objectives, simulate_population, HessDesign, SimError, SimParams};

#[derive(Debug, Error)]
pub enum MooError {
    #[error("invalid optimizer settings: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MooConfig {
    pub population: usize,
    pub generations: usize,
    pub n_sc_min: usize,
    pub n_sc_max: usize,
    pub crossover_rate: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    /// Per-gene mutation probability; defaults to one over the decision
    /// vector length.
    pub mutation_rate: Option<f64>,
    /// Share of the next generation reserved for the first front before it
    /// spills to later fronts; 1.0 is plain NSGA-II elitism.
    pub elite_fraction: f64,
    /// Set from the top-level configuration seed.
    #[serde(skip)]
    pub seed: u64,
}

impl Default for MooConfig {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 30,
            n_sc_min: 1,
            n_sc_max: 120,
            crossover_rate: 0.9,
            eta_c: 15.0,
            eta_m: 20.0,
            mutation_rate: None,
            elite_fraction: 0.7,
            seed: 1,
        }
    }
}

impl MooConfig {
    pub fn validate(&self) -> Result<(), MooError> {
        let bad = |m: String| Err(MooError::Config(m));
        if self.population < 4 || !self.population.is_multiple_of(2) {
            return bad(format!("population {} must be even and at least 4", self.population));
        }
        if self.n_sc_min == 0 || self.n_sc_min > self.n_sc_max {
            return bad(format!(
                "n_sc bounds [{}, {}] must satisfy 1 <= min <= max",
                self.n_sc_min, self.n_sc_max
            ));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return bad(format!("crossover_rate {} must be in [0, 1]", self.crossover_rate));
        }
        if let Some(m) = self.mutation_rate {
            if !(0.0..=1.0).contains(&m) {
                return bad(format!("mutation_rate {m} must be in [0, 1]"));
            }
        }
        if !(self.eta_c >= 0.0 && self.eta_m >= 0.0) {
            return bad("distribution indices must be non-negative".into());
        }
        if !(self.elite_fraction > 0.0 && self.elite_fraction <= 1.0) {
            return bad(format!("elite_fraction {} must be in (0, 1]", self.elite_fraction));
        }
        Ok(())
    }

    fn variation(&self) -> VariationParams {
        VariationParams {
            crossover_rate: self.crossover_rate,
            eta_c: self.eta_c,
            mutation_rate: self
                .mutation_rate
                .unwrap_or(1.0 / (GENOME_LEN + 1) as f64),
            eta_m: self.eta_m,
            n_sc_min: self.n_sc_min,
            n_sc_max: self.n_sc_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub candidate: Candidate,
    /// `[j_laps, j_lifebat]`, both maximized.
    pub objectives: [f64; 2],
    pub avg_cell_current: f64,
    /// Generation in which it was evaluated.
    pub generation: usize,
}

impl Individual {
    pub fn design(&self) -> HessDesign {
        HessDesign {
            n_sc: self.candidate.n_sc,
            genome: MfGenome::new(self.candidate.genes.clone()).expect("genes stay in bounds"),
        }
    }
}

/// 2-D hypervolume dominated by `points` above the reference `(0, 0)`.
pub fn hypervolume(points: &[[f64; 2]]) -> f64 {
    let mut pts: Vec<[f64; 2]> = points
        .iter()
        .copied()
        .filter(|p| p[0] > 0.0 && p[1] > 0.0)
        .collect();
    pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut hv = 0.0;
    let mut best_y = 0.0;
    for p in pts {
        if p[1] > best_y {
            hv += p[0] * (p[1] - best_y);
            best_y = p[1];
        }
    }
    hv
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub hypervolume: f64,
    pub best_laps: f64,
    pub best_lifebat: f64,
    pub front_size: usize,
}

#[derive(Debug, Clone)]
pub struct Optimized {
    /// First front of the final population.
    pub front: Vec<Individual>,
    pub population: Vec<Individual>,
    /// Every evaluated individual in evaluation order.
    pub archive: Vec<Individual>,
    /// Entry `g` describes the population after generation `g`; entry 0 is
    /// the evaluated initial population.
    pub history: Vec<GenerationStats>,
}

fn objectives_of(pop: &[Individual]) -> Vec<[f64; 2]> {
    pop.iter().map(|i| i.objectives).collect()
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let objs = objectives_of(pop);
    let fronts = non_dominated_sort(&objs);
    let f1: Vec<[f64; 2]> = fronts[0].iter().map(|&i| objs[i]).collect();
    GenerationStats {
        generation,
        hypervolume: hypervolume(&f1),
        best_laps: objs.iter().map(|o| o[0]).fold(f64::NEG_INFINITY, f64::max),
        best_lifebat: objs.iter().map(|o| o[1]).fold(f64::NEG_INFINITY, f64::max),
        front_size: f1.len(),
    }
}

fn evaluate(
    candidates: Vec<Candidate>,
    generation: usize,
    cycle: &DriveCycle,
    params: &SimParams,
) -> Result<Vec<Individual>, MooError> {
    let designs: Vec<HessDesign> = candidates
        .iter()
        .map(|c| HessDesign {
            n_sc: c.n_sc,
            genome: MfGenome::new(c.genes.clone()).expect("genes stay in bounds"),
        })
        .collect();
    let results = simulate_population(&designs, cycle, params)?;
    Ok(candidates
        .into_iter()
        .zip(results)
        .map(|(candidate, r)| Individual {
            candidate,
            objectives: evaluate_objectives(&r).to_array(),
            avg_cell_current: r.avg_cell_current,
            generation,
        })
        .collect())
}

/// Run the optimizer. `on_generation` is called with each generation's
/// statistics as soon as they are known.
pub fn optimize_with(
    cfg: &MooConfig,
    cycle: &DriveCycle,
    params: &SimParams,
    mut on_generation: impl FnMut(&GenerationStats),
) -> Result<Optimized, MooError> {
    cfg.validate()?;
    let vp = cfg.variation();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let initial: Vec<Candidate> = (0..cfg.population)
        .map(|k| Candidate {
            n_sc: rng.gen_range(cfg.n_sc_min..=cfg.n_sc_max),
            // one evenly spaced controller among the random ones
            genes: if k == 0 {
                MfGenome::initial().into_genes()
            } else {
                (0..GENOME_LEN).map(|_| rng.gen()).collect()
            },
        })
        .collect();
    let mut pop = evaluate(initial, 0, cycle, params)?;
    let mut archive = pop.clone();
    let mut history = vec![stats(0, &pop)];
    on_generation(&history[0]);

    for gen in 1..=cfg.generations {
        let ranking = rank_population(&objectives_of(&pop));
        let all: Vec<usize> = (0..pop.len()).collect();
        let mut children = Vec::with_capacity(cfg.population);
        while children.len() < cfg.population {
            let a = tournament(&ranking, &all, &mut rng);
            let b = tournament(&ranking, &all, &mut rng);
            let (c1, c2) = vary_pair(&pop[a].candidate, &pop[b].candidate, &vp, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        let offspring = evaluate(children, gen, cycle, params)?;
        archive.extend(offspring.iter().cloned());

        let pool: Vec<Individual> = pop.into_iter().chain(offspring).collect();
        let ranking = rank_population(&objectives_of(&pool));
        let keep = controlled_elitist_select(&ranking, cfg.population, cfg.elite_fraction);
        pop = keep.into_iter().map(|i| pool[i].clone()).collect();

        let s = stats(gen, &pop);
        on_generation(&s);
        history.push(s);
    }

    let objs = objectives_of(&pop);
    let fronts = non_dominated_sort(&objs);
    let front = fronts[0].iter().map(|&i| pop[i].clone()).collect();
    Ok(Optimized {
        front,
        population: pop,
        archive,
        history,
    })
}

pub fn optimize(cfg: &MooConfig, cycle: &DriveCycle, params: &SimParams) -> Result<Optimized, MooError> {
    optimize_with(cfg, cycle, params, |_| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypervolume_of_staircase() {
        // rectangles 3x1, 2x2, 1x3 overlap into 3 + 2 + 1 = 6
        let hv = hypervolume(&[[3.0, 1.0], [2.0, 2.0], [1.0, 3.0]]);
        assert!((hv - 6.0).abs() < 1e-12);
    }

    #[test]
    fn dominated_points_add_nothing() {
        let base = hypervolume(&[[3.0, 1.0], [1.0, 3.0]]);
        assert_eq!(hypervolume(&[[3.0, 1.0], [1.0, 3.0], [1.0, 1.0], [0.0, 5.0]]), base);
    }

    #[test]
    fn config_checks() {
        assert!(MooConfig::default().validate().is_ok());
        let odd = MooConfig {
            population: 41,
            ..MooConfig::default()
        };
        assert!(odd.validate().is_err());
        let zero = MooConfig {
            n_sc_min: 0,
            ..MooConfig::default()
        };
        assert!(zero.validate().is_err());
    }
}
