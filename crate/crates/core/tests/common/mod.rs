#![allow(dead_code)]

use fuzzseed::data::Dataset;
use proptest::prelude::*;

pub fn data_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn dataset(rows: &[Vec<f64>]) -> Dataset {
    Dataset::from_rows("fuzz", rows).unwrap()
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Membership straight from the textbook sum, `1 / Σ_j (d_ik / d_ij)^(1/(m-1))`,
/// with coincident points splitting mass evenly.
pub fn membership_oracle(points: &[Vec<f64>], centroids: &[Vec<f64>], m: f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|x| {
            let d: Vec<f64> = centroids.iter().map(|c| sq(x, c)).collect();
            let zeros = d.iter().filter(|&&v| v == 0.0).count();
            if zeros > 0 {
                return d
                    .iter()
                    .map(|&v| if v == 0.0 { 1.0 / zeros as f64 } else { 0.0 })
                    .collect();
            }
            d.iter()
                .map(|&dk| {
                    1.0 / d
                        .iter()
                        .map(|&dj| (dk / dj).powf(1.0 / (m - 1.0)))
                        .sum::<f64>()
                })
                .collect()
        })
        .collect()
}

/// `n` points of dimension `p`, coordinates in [-10, 10].
pub fn points(
    n: impl Into<prop::collection::SizeRange>,
    p: usize,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, p), n)
}

/// Points on a small integer grid, so ties and duplicates are common.
pub fn grid_points(
    n: impl Into<prop::collection::SizeRange>,
    p: usize,
) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec((0i32..5).prop_map(f64::from), p), n)
}

pub fn fuzziness() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![1.5, 2.0, 3.0])
}

/// A dataset with 3..=30 points, 1..=4 features, and a cluster count 2..=min(6, n).
pub fn instance() -> impl Strategy<Value = (Vec<Vec<f64>>, usize)> {
    (1usize..=4)
        .prop_flat_map(|p| points(3..=30, p))
        .prop_flat_map(|pts| {
            let n = pts.len();
            (Just(pts), 2usize..=n.min(6))
        })
}

/// A random row-stochastic `n x k` matrix.
pub fn stochastic(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0.001f64..1.0, k), n).prop_map(|rows| {
        rows.into_iter()
            .map(|r| {
                let s: f64 = r.iter().sum();
                r.into_iter().map(|v| v / s).collect()
            })
            .collect()
    })
}

/// An [`instance`] together with a random membership matrix for it.
pub fn with_membership() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    instance().prop_flat_map(|(pts, k)| {
        let n = pts.len();
        (Just(pts), stochastic(n, k))
    })
}
