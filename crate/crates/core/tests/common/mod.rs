//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use lowsnr_raptor::channel::bpsk;
use lowsnr_raptor::codec::{xor_at, Precoder};
use lowsnr_raptor::degree::DegreeDistribution;

/// Published optimized columns `(D, μ_o, Ω, β, η)` for ε = 0.01, as printed
/// (four decimals, so the sums are off by up to 2e-4).
pub const PUBLISHED: [(u32, f64, &[(u32, f64)], f64, f64); 4] = [
    (
        100,
        30.0,
        &[
            (1, 0.0035),
            (2, 0.3493),
            (3, 0.2314),
            (4, 0.0624),
            (5, 0.1115),
            (8, 0.0436),
            (9, 0.0696),
            (20, 0.0286),
            (21, 0.0401),
            (100, 0.0599),
        ],
        10.5821,
        0.9680,
    ),
    (
        100,
        40.0,
        &[
            (1, 0.0034),
            (2, 0.3397),
            (3, 0.2095),
            (4, 0.1256),
            (7, 0.1462),
            (17, 0.0337),
            (18, 0.0495),
            (100, 0.0924),
        ],
        13.5444,
        0.9378,
    ),
    (
        300,
        30.0,
        &[
            (1, 0.0034),
            (2, 0.3574),
            (3, 0.2377),
            (4, 0.0651),
            (5, 0.1036),
            (7, 0.0316),
            (8, 0.0622),
            (13, 0.0382),
            (14, 0.0242),
            (26, 0.0096),
            (27, 0.0292),
            (66, 0.0179),
            (67, 0.0039),
            (300, 0.0158),
        ],
        10.9777,
        0.9908,
    ),
    (
        300,
        40.0,
        &[
            (1, 0.0035),
            (2, 0.3538),
            (3, 0.2338),
            (4, 0.0737),
            (5, 0.0755),
            (6, 0.0262),
            (7, 0.0608),
            (11, 0.0493),
            (12, 0.0255),
            (21, 0.0002),
            (23, 0.0454),
            (57, 0.0072),
            (58, 0.0180),
            (300, 0.0272),
        ],
        14.1800,
        0.9805,
    ),
];

/// A published column rescaled to sum to one.
pub fn published(max_degree: u32, mu_o: f64) -> DegreeDistribution {
    let (d, _, col, _, _) = PUBLISHED
        .iter()
        .find(|c| c.0 == max_degree && c.1 == mu_o)
        .expect("no such column");
    DegreeDistribution::normalized(col.iter().copied(), *d).unwrap()
}

/// Dense `Ω_1..Ω_D` of a published column, unnormalized.
pub fn published_dense(max_degree: u32, mu_o: f64) -> Vec<f64> {
    let (d, _, col, _, _) = PUBLISHED
        .iter()
        .find(|c| c.0 == max_degree && c.1 == mu_o)
        .expect("no such column");
    let mut v = vec![0.0; *d as usize];
    for &(deg, p) in col.iter() {
        v[deg as usize - 1] = p;
    }
    v
}

/// Sample mean and standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Bitwise MAP decisions on the message bits, by enumerating every
/// intermediate word that satisfies the parity checks.
pub fn bitwise_map(pre: &Precoder, neighbours: &[Vec<u32>], llrs: &[f64]) -> Vec<u8> {
    let n = pre.intermediate_len();
    assert!(n <= 20);
    let mut words = Vec::new();
    for w in 0u32..(1 << n) {
        let bits: Vec<u8> = (0..n).map(|i| ((w >> i) & 1) as u8).collect();
        if pre.checks().iter().all(|c| c.iter().fold(0, |a, &v| a ^ bits[v as usize]) == 0) {
            words.push(bits);
        }
    }
    assert_eq!(words.len(), 1 << pre.k());
    let log_like: Vec<f64> = words
        .iter()
        .map(|w| {
            neighbours
                .iter()
                .zip(llrs)
                .map(|(nb, &l)| 0.5 * l * bpsk(xor_at(w, nb)))
                .sum()
        })
        .collect();
    let top = log_like.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut p1 = vec![0.0; pre.k()];
    let mut total = 0.0;
    for (w, &ll) in words.iter().zip(&log_like) {
        let p = (ll - top).exp();
        total += p;
        for (acc, &pos) in p1.iter_mut().zip(pre.info_positions()) {
            if w[pos as usize] == 1 {
                *acc += p;
            }
        }
    }
    p1.iter().map(|&p| (p > 0.5 * total) as u8).collect()
}
