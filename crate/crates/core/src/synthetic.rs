//! Seeded synthetic two-class datasets for tests, examples and benchmarks.

use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::data::Dataset;

fn normal(rng: &mut Xoshiro256PlusPlus) -> f64 {
    StandardNormal.sample(rng)
}

fn alternating(n: usize) -> Vec<i8> {
    (0..n).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect()
}

/// Two Gaussian classes in `k` dimensions with correlated noise. The first
/// half of the features carry a mean shift of `+-separation / 2`.
pub fn gaussian_two_class(n: usize, k: usize, separation: f64, seed: u64) -> Dataset {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let scale = 0.6 / (k as f64).sqrt();
    let mixing: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| f64::from(u8::from(i == j)) + scale * normal(&mut rng))
                .collect()
        })
        .collect();
    let informative = k.div_ceil(2);
    let labels = alternating(n);
    let features = labels
        .iter()
        .map(|&y| {
            let z: Vec<f64> = (0..k).map(|_| normal(&mut rng)).collect();
            (0..k)
                .map(|i| {
                    let shift = if i < informative {
                        0.5 * separation * f64::from(y)
                    } else {
                        0.0
                    };
                    shift + mixing[i].iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect()
        })
        .collect();
    Dataset::new(format!("gauss-{n}x{k}-s{seed}"), features, labels)
        .expect("generator output is well formed")
}

/// Two features whose within-class spread runs along `(1, -1)` and whose
/// class means differ along `(1, 1)`. A metric that shrinks the `(1, -1)`
/// direction needs a positive off-diagonal entry, i.e. a negative edge.
pub fn anti_correlated(n: usize, seed: u64) -> Dataset {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let labels = alternating(n);
    let features = labels
        .iter()
        .map(|&y| {
            let along = 0.5 * normal(&mut rng);
            let across = f64::from(y) + 0.05 * normal(&mut rng);
            vec![across + along, across - along]
        })
        .collect();
    Dataset::new(format!("anti-{n}-s{seed}"), features, labels)
        .expect("generator output is well formed")
}

/// Feature 0 equals the label plus small noise; the others are pure noise.
pub fn single_informative(n: usize, k: usize, seed: u64) -> Dataset {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let labels = alternating(n);
    let features = labels
        .iter()
        .map(|&y| {
            (0..k)
                .map(|j| {
                    let noise = normal(&mut rng);
                    if j == 0 {
                        f64::from(y) + 0.1 * noise
                    } else {
                        noise
                    }
                })
                .collect()
        })
        .collect();
    Dataset::new(format!("informative-{n}x{k}-s{seed}"), features, labels)
        .expect("generator output is well formed")
}
