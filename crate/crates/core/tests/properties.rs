use std::collections::BTreeSet;

use ga_varsel::chromosome::hierarchy_violations;
use ga_varsel::datagen::{generate, write_dataset_csv, SimSpec};
use ga_varsel::fitness::{auc, design_matrix, fit_logistic, make_folds, Dataset, FitOptions};
use ga_varsel::ga::{breed, Evolution, GaConfig, Scored};
use ga_varsel::ingest::{load_delimited, IngestSpec};
use ga_varsel::{
    Chromosome, Encoding, IndexedChromosome, InitParams, Metric, MutationRates, PredictorSpace,
    StandardChromosome, TermDescriptor, TermId,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t(id: u32) -> TermId {
    TermId::new(id).unwrap()
}

fn brute_force_auc(scores: &[f64], labels: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &yi) in labels.iter().enumerate() {
        for (j, &yj) in labels.iter().enumerate() {
            if yi == 1.0 && yj == 0.0 {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

proptest! {
    #[test]
    fn encode_decode_roundtrip(n in 2u32..400, a in 0u32..400, b in 0u32..400) {
        let space = PredictorSpace::new(n, true).unwrap();
        let (i, j) = (a % n + 1, b % n + 1);
        let d = if i == j {
            TermDescriptor::MainEffect(i)
        } else {
            TermDescriptor::Interaction(i.min(j), i.max(j))
        };
        let id = space.encode(d).unwrap();
        prop_assert_eq!(space.decode(id).unwrap(), d);
        prop_assert!(id.get() <= space.total_terms());
    }

    #[test]
    fn auc_matches_pair_counting(
        data in prop::collection::vec((0u8..6, any::<bool>()), 2..30)
    ) {
        let scores: Vec<f64> = data.iter().map(|(s, _)| *s as f64 / 2.0).collect();
        let labels: Vec<f64> = data.iter().map(|(_, y)| *y as u8 as f64).collect();
        let pos = labels.iter().filter(|&&y| y == 1.0).count();
        prop_assume!(pos > 0 && pos < labels.len());
        prop_assert_eq!(auc(&scores, &labels).unwrap(), brute_force_auc(&scores, &labels));
    }

    #[test]
    fn folds_are_balanced_partitions(n in 2usize..500, k_raw in 2usize..20, seed in any::<u64>()) {
        let k = k_raw.min(n);
        let f = make_folds(n, k, seed).unwrap();
        let sizes = f.sizes();
        prop_assert_eq!(sizes.iter().sum::<usize>(), n);
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert_eq!(f, make_folds(n, k, seed).unwrap());
    }

    #[test]
    fn interaction_columns_are_products(seed in any::<u64>(), n_main in 2u32..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..n_main).map(|_| (0..12).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let y: Vec<f64> = (0..12).map(|i| (i % 2) as f64).collect();
        let d = Dataset::new(cols, y, None).unwrap().with_standardization(true);
        let space = d.space().unwrap();
        let terms: Vec<TermId> = space.terms().collect();
        let x = design_matrix(&d, &terms, &space).unwrap();
        for (c, &term) in terms.iter().enumerate() {
            if let TermDescriptor::Interaction(i, j) = space.decode(term).unwrap() {
                let a = d.model_column(i as usize - 1);
                let b = d.model_column(j as usize - 1);
                for r in 0..12 {
                    prop_assert_eq!(x[(r, c + 1)], a[r] * b[r]);
                }
            }
        }
    }

    #[test]
    fn irls_trace_is_monotone_and_aic_exact(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 60;
        let p = 3;
        let mut x = nalgebra::DMatrix::<f64>::zeros(n, p + 1);
        let mut y = vec![0.0; n];
        for r in 0..n {
            x[(r, 0)] = 1.0;
            let mut eta = -0.3;
            for c in 1..=p {
                x[(r, c)] = rng.random_range(-2.0..2.0);
                eta += 0.8 * x[(r, c)];
            }
            y[r] = (rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp())) as u8 as f64;
        }
        let pos = y.iter().sum::<f64>() as usize;
        prop_assume!(pos > 0 && pos < n);
        let fit = fit_logistic(&x, &y, &FitOptions::default()).unwrap();
        for w in fit.log_likelihood_trace.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-10 * (1.0 + w[0].abs()));
        }
        prop_assert_eq!(fit.aic, 2.0 * (p + 1) as f64 - 2.0 * fit.log_likelihood);
        prop_assert!(fit.iterations <= 25);
    }
}

/// Applies one random operator from the encoding's operator set.
fn random_op<C: Chromosome, R: Rng>(c: &mut C, other: &C, space: &PredictorSpace, rng: &mut R) {
    match rng.random_range(0..3) {
        0 => {
            let rates = MutationRates {
                p_mutate: 1.0,
                p_add: rng.random(),
                p_del: rng.random(),
            };
            c.mutate(&rates, space, rng);
        }
        1 => {
            let (a, b, _) = c.crossover(other, space, rng).unwrap();
            *c = if rng.random_bool(0.5) { a } else { b };
        }
        _ => {
            c.repair(space, rng);
        }
    }
}

fn operator_sequences<C: Chromosome>(space: &PredictorSpace, params: &InitParams, sequences: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sequences {
        let (mut c, _) = C::random(space, params, &mut rng).unwrap();
        let (other, _) = C::random(space, params, &mut rng).unwrap();
        for _ in 0..6 {
            random_op(&mut c, &other, space, &mut rng);
            c.check(space).unwrap();
            let terms = c.active_terms();
            assert!(hierarchy_violations(&terms, space).is_empty(), "{c}");
            let mut repaired = c.clone();
            repaired.repair(space, &mut rng);
            assert_eq!(repaired.to_string(), c.to_string(), "repair is idempotent");
        }
    }
}

#[test]
fn standard_operator_sequences_keep_hierarchy() {
    let space = PredictorSpace::new(6, true).unwrap();
    let params = InitParams {
        init_density: 0.3,
        ..Default::default()
    };
    operator_sequences::<StandardChromosome>(&space, &params, 10_000, 11);
}

#[test]
fn indexed_operator_sequences_keep_hierarchy_and_length() {
    let space = PredictorSpace::new(6, true).unwrap();
    for l in [1, 3, 8] {
        let params = InitParams {
            max_length: l,
            ..Default::default()
        };
        operator_sequences::<IndexedChromosome>(&space, &params, 10_000, 12 + l as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(l as u64);
        let (mut c, _) = IndexedChromosome::random(&space, &params, &mut rng).unwrap();
        let (other, _) = IndexedChromosome::random(&space, &params, &mut rng).unwrap();
        for _ in 0..500 {
            random_op(&mut c, &other, &space, &mut rng);
            assert_eq!(c.len(), l);
        }
    }
}

#[test]
fn main_deletion_leaves_no_children() {
    let space = PredictorSpace::new(5, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let full: Vec<TermId> = space.terms().collect();
        let mut c = IndexedChromosome::from_slots(full.iter().map(|&x| Some(x)).collect());
        let pos = rng.random_range(0..c.len());
        let victim = c.slots()[pos].unwrap();
        c.delete_at(&space, pos);
        if space.is_main(victim) {
            let children = space.children_of(victim).unwrap();
            assert!(c.active_terms().iter().all(|t| !children.contains(t)));
        }
        let mut s = StandardChromosome::from_terms(&space, &full).unwrap();
        s.flip(&space, victim);
        if space.is_main(victim) {
            let children = space.children_of(victim).unwrap();
            assert!(s.active_terms().iter().all(|t| !children.contains(t)));
        }
    }
}

#[test]
fn zero_rates_are_identity() {
    let space = PredictorSpace::new(7, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let params = InitParams {
        init_density: 0.4,
        max_length: 10,
        seeds: Vec::new(),
    };
    for _ in 0..1000 {
        let (mut a, _) = StandardChromosome::random(&space, &params, &mut rng).unwrap();
        let before = a.to_string();
        a.mutate(&MutationRates::zero(), &space, &mut rng);
        assert_eq!(a.to_string(), before);
        let (mut b, _) = IndexedChromosome::random(&space, &params, &mut rng).unwrap();
        let before = b.to_string();
        b.mutate(&MutationRates::zero(), &space, &mut rng);
        assert_eq!(b.to_string(), before);
    }
}

fn sim(n_main: u32, terms: Vec<TermId>, seed: u64) -> Dataset {
    generate(&SimSpec {
        n_main,
        n_samples: 300,
        true_terms: terms,
        threshold: 1.0,
        noise_variance: 1.0,
        rng_seed: seed,
        ..Default::default()
    })
    .unwrap()
    .dataset
    .with_standardization(true)
}

fn best_is_monotone<C: Chromosome>(encoding: Encoding, metric: Metric) {
    let d = sim(5, vec![t(1), t(2), t(6)], 21);
    let cfg = GaConfig {
        population_size: 10,
        generations: 50,
        max_length: 8,
        encoding,
        fitness_metric: metric,
        cv_folds: 5,
        p_crossover: 0.9,
        ..Default::default()
    };
    let mut evo = Evolution::<C>::new(cfg, &d, 1).unwrap();
    evo.run_to_end().unwrap();
    let best: Vec<f64> = evo.history().iter().map(|g| g.best_fitness.unwrap()).collect();
    for w in best.windows(2) {
        assert!(!metric.better(w[0], w[1]), "best fitness worsened: {w:?}");
    }
}

#[test]
fn elitism_makes_best_fitness_monotone() {
    best_is_monotone::<StandardChromosome>(Encoding::Standard, Metric::CvAic);
    best_is_monotone::<IndexedChromosome>(Encoding::Indexed, Metric::CvAic);
    best_is_monotone::<IndexedChromosome>(Encoding::Indexed, Metric::CvAuc);
}

#[test]
fn no_crossover_no_mutation_copies_members() {
    let space = PredictorSpace::new(6, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let params = InitParams {
        max_length: 6,
        ..Default::default()
    };
    let population: Vec<Scored<IndexedChromosome>> = (0..9)
        .map(|i| {
            let (c, _) = IndexedChromosome::random(&space, &params, &mut rng).unwrap();
            Scored {
                terms: c.active_terms(),
                chromosome: c,
                fitness: Some(i as f64),
            }
        })
        .collect();
    let cfg = GaConfig {
        population_size: 9,
        p_crossover: 0.0,
        rates: MutationRates::zero(),
        elite_count: 0,
        tournament_size: 3,
        ..Default::default()
    };
    let current: BTreeSet<String> = population.iter().map(|m| m.chromosome.to_string()).collect();
    for _ in 0..50 {
        let (next, log) = breed(&population, &cfg, Metric::CvAic, &space, &mut rng).unwrap();
        assert_eq!(next.len(), 9);
        assert_eq!(log.crossovers, 0);
        assert!(next.iter().all(|c| current.contains(&c.to_string())));
        // the worst member can't win a 3-way tournament
        assert!(next.iter().all(|c| c.to_string() != population[8].chromosome.to_string()));
    }
}

#[test]
fn tournament_of_one_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pop = 10;
    let fitness: Vec<Option<f64>> = (0..pop).map(|i| Some(i as f64)).collect();
    let draws = 100_000;
    let mut counts = vec![0usize; pop];
    for _ in 0..draws {
        counts[ga_varsel::ga::tournament_select(&fitness, 1, Metric::CvAic, &mut rng).unwrap()] += 1;
    }
    let p = 1.0 / pop as f64;
    let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
    for c in counts {
        assert!((c as f64 - draws as f64 * p).abs() < 3.0 * sigma, "{c}");
    }
}

#[test]
fn simulated_csv_roundtrips_exactly() {
    let r = generate(&SimSpec {
        n_main: 4,
        n_samples: 250,
        true_terms: vec![t(1), t(3), t(6)],
        rng_seed: 8,
        ..Default::default()
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    write_dataset_csv(&r.dataset, &path, "y").unwrap();
    let back = load_delimited(&IngestSpec {
        path,
        standardize: false,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(back, r.dataset);
}

#[test]
fn simulated_columns_are_standard_normal() {
    let r = generate(&SimSpec {
        n_main: 10,
        n_samples: 1000,
        true_terms: vec![t(1)],
        rng_seed: 3,
        ..Default::default()
    })
    .unwrap();
    let n = 1000.0;
    for c in 0..10 {
        let col = r.dataset.raw_column(c);
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 3.0 / n.sqrt(), "mean {mean}");
        // sd of the sample variance of N(0,1) is about sqrt(2 / n)
        assert!((var - 1.0).abs() < 3.0 * (2.0 / n).sqrt(), "var {var}");
    }
    assert_eq!(r.positive_rate, r.dataset.response().iter().sum::<f64>() / n);
}

#[test]
fn true_terms_beat_random_competitors() {
    let space = PredictorSpace::new(8, true).unwrap();
    let truth = vec![t(2), t(5), space.encode(TermDescriptor::Interaction(2, 5)).unwrap()];
    let d = generate(&SimSpec {
        n_main: 8,
        n_samples: 1000,
        true_terms: truth.clone(),
        rng_seed: 6,
        ..Default::default()
    })
    .unwrap()
    .dataset
    .with_standardization(true);
    let folds = make_folds(d.rows(), 10, 1).unwrap();
    let score = |terms: &[TermId]| {
        ga_varsel::fitness::cv_fitness(&d, terms, &space, &folds, Metric::CvAuc, &FitOptions::default())
            .unwrap()
            .mean_value
    };
    let true_auc = score(&truth);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let params = InitParams {
        max_length: 3,
        ..Default::default()
    };
    let mut checked = 0;
    while checked < 20 {
        let (c, _) = IndexedChromosome::random(&space, &params, &mut rng).unwrap();
        let terms = c.active_terms();
        if terms.len() != 3 || terms == truth {
            continue;
        }
        assert!(true_auc > score(&terms), "{terms:?}");
        checked += 1;
    }
}
