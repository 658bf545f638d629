//! Input builders shared by the criterion benches.

use rand::Rng;
use rand_distr::StandardNormal;
use spreadscope_core::rng::substream;
use spreadscope_core::synth::{simulate_var, VarSpec};
use spreadscope_core::topics::EmbeddingSet;
use spreadscope_core::{Matrix, SeriesMatrix};

/// Two-variable VAR(2) of length `t` with cross effects in both directions.
pub fn var2_series(t: usize, seed: u64) -> SeriesMatrix {
    let spec = VarSpec {
        coeff_matrices: vec![
            Matrix::from_rows(&[vec![0.4, 0.2], vec![0.3, 0.3]]),
            Matrix::from_rows(&[vec![0.1, -0.2], vec![0.0, 0.1]]),
        ],
        intercepts: vec![5.0, 2.0],
        sigma: Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]),
        t,
        seed,
        require_stationary: true,
    };
    simulate_var(&spec).expect("stationary bench VAR")
}

/// Gaussian random walk of length `t`.
pub fn random_walk(t: usize, seed: u64) -> Vec<f64> {
    let mut rng = substream(seed, "bench-walk");
    let mut level = 0.0;
    (0..t)
        .map(|_| {
            level += rng.sample::<f64, _>(StandardNormal);
            level
        })
        .collect()
}

/// `n` vectors of width `dim` drawn around `k` random centres.
pub fn blob_embeddings(n: usize, dim: usize, k: usize, seed: u64) -> EmbeddingSet {
    let mut rng = substream(seed, "bench-blobs");
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let pairs = (0..n).map(|i| {
        let c = &centres[i % k];
        let v: Vec<f64> = c
            .iter()
            .map(|x| x + 0.3 * rng.sample::<f64, _>(StandardNormal))
            .collect();
        (format!("d{i:05}"), v)
    });
    EmbeddingSet::from_pairs(pairs.collect::<Vec<_>>()).expect("bench embeddings")
}
