//! Distributional checks of the stochastic operators and the simulator.

use ga_varsel::datagen::{generate, SimSpec};
use ga_varsel::{Chromosome, MutationRates, PredictorSpace, StandardChromosome, TermDescriptor, TermId};
use ga_varsel::IndexedChromosome;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// 0.999 quantile of chi-square with 14 degrees of freedom.
const CHI2_14_999: f64 = 36.12327368039813;

fn t(id: u32) -> TermId {
    TermId::new(id).unwrap()
}

fn within_3_sigma(hits: usize, trials: usize, p: f64) -> bool {
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    (hits as f64 - trials as f64 * p).abs() <= 3.0 * sigma
}

#[test]
fn indexed_init_count_is_uniform() {
    let space = PredictorSpace::new(5, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let draws = 10_000;
    let mut counts = [0usize; 15];
    for _ in 0..draws {
        let c = IndexedChromosome::random_unrepaired(&space, 15, &[], &mut rng).unwrap();
        counts[c.active_terms().len() - 1] += 1;
    }
    let expected = draws as f64 / 15.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < CHI2_14_999, "chi-square {chi2}");
}

#[test]
fn standard_flip_hits_each_bit_equally() {
    let space = PredictorSpace::new(20, true).unwrap();
    let base = StandardChromosome::from_terms(&space, &[t(1), t(2), t(3)]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let trials = 100_000;
    let rates = MutationRates { p_mutate: 1.0, ..MutationRates::zero() };
    let watched = t(100);
    let mut hits = 0;
    for _ in 0..trials {
        let mut c = base.clone();
        let log = c.mutate(&rates, &space, &mut rng);
        assert_eq!(log.flips, 1);
        if c.contains(watched) {
            hits += 1;
        }
    }
    assert!(within_3_sigma(hits, trials, 1.0 / 210.0), "{hits}");
}

#[test]
fn indexed_mutation_events_are_independent() {
    let space = PredictorSpace::new(20, true).unwrap();
    let slots = (1..=5).map(|i| Some(t(i))).chain(std::iter::repeat_n(None, 5)).collect();
    let base = IndexedChromosome::from_slots(slots);
    let rates = MutationRates { p_mutate: 0.0, p_add: 0.3, p_del: 0.6 };
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let trials = 100_000;
    let mut both = 0;
    for _ in 0..trials {
        let mut c = base.clone();
        let log = c.mutate(&rates, &space, &mut rng);
        if log.additions == 1 && log.deletions == 1 {
            both += 1;
        }
    }
    assert!(within_3_sigma(both, trials, 0.3 * 0.6), "{both}");
}

#[test]
fn three_term_positive_rate_matches_latent_simulation() {
    let space = PredictorSpace::new(4, true).unwrap();
    let i12 = space.encode(TermDescriptor::Interaction(1, 2)).unwrap();
    let n = 100_000;
    let r = generate(&SimSpec {
        n_main: 4,
        n_samples: n,
        true_terms: vec![t(1), t(2), i12],
        rng_seed: 34,
        ..Default::default()
    })
    .unwrap();

    // Direct draw of x1 + x2 + x1 x2 + e with e ~ N(0, 0.02).
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let m = 1_000_000;
    let sd = 0.02f64.sqrt();
    let mut above = 0usize;
    for _ in 0..m {
        let a: f64 = StandardNormal.sample(&mut rng);
        let b: f64 = StandardNormal.sample(&mut rng);
        let e: f64 = StandardNormal.sample(&mut rng);
        if a + b + a * b + sd * e > 2.0 {
            above += 1;
        }
    }
    let p_oracle = above as f64 / m as f64;
    let sigma = (p_oracle * (1.0 - p_oracle) * (1.0 / n as f64 + 1.0 / m as f64)).sqrt();
    assert!(
        (r.positive_rate - p_oracle).abs() <= 3.0 * sigma,
        "{} vs {p_oracle}",
        r.positive_rate
    );
}

#[test]
fn crossover_never_duplicates() {
    let space = PredictorSpace::new(8, true).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..1000 {
        let a = IndexedChromosome::random_unrepaired(&space, 10, &[], &mut rng).unwrap();
        let b = IndexedChromosome::random_unrepaired(&space, 10, &[], &mut rng).unwrap();
        let (c1, c2, _) = a.crossover(&b, &space, &mut rng).unwrap();
        for c in [c1, c2] {
            let mut seen: Vec<TermId> = c.slots().iter().flatten().copied().collect();
            let before = seen.len();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), before, "{c}");
            assert_eq!(c.len(), 10);
        }
    }
}
