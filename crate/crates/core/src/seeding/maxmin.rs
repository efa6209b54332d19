//! Farthest-first (MaxMin) seedings.
//!
//! Both variants pick every seed after the second as the unchosen point whose
//! squared distance to its nearest chosen seed is largest. They differ in the
//! first two seeds:
//!
//! * quadratic: the pair of points at maximum distance, found by scanning all
//!   `i < j` pairs;
//! * linear: the point nearest to the grand mean, then the point farthest from
//!   it.
//!
//! Ties always go to the lowest row index. The quadratic variant recomputes
//! nearest-seed distances from scratch each round and serves as a reference
//! for the incremental linear variant.

use ndarray::ArrayView1;

use super::{check_k, Method, SeedSet};
use crate::data::{grand_mean, sq_dist, Dataset};
use crate::error::{Error, Result};

/// Number of squared-distance evaluations a seeding performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct DistanceCount(pub u64);

struct Counter(u64);

impl Counter {
    fn dist(&mut self, a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
        self.0 += 1;
        sq_dist(a, b)
    }
}

/// Index of the largest score among unchosen rows, lowest index on ties.
fn argmax_unchosen(scores: &[f64], chosen: &[bool]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if chosen[i] {
            continue;
        }
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

pub fn seed_maxmin_linear(d: &Dataset, k: usize) -> Result<SeedSet> {
    maxmin_linear_counted(d, k).map(|(s, _)| s)
}

/// MaxMin Linear, also reporting how many distances were evaluated (`k * n`).
pub fn maxmin_linear_counted(d: &Dataset, k: usize) -> Result<(SeedSet, DistanceCount)> {
    check_k(d, k, 2)?;
    let n = d.n();
    let mut counter = Counter(0);
    let xbar = grand_mean(d);

    let mut first = 0;
    let mut first_d = f64::INFINITY;
    for i in 0..n {
        let dist = counter.dist(xbar.view(), d.point(i));
        if dist < first_d {
            first_d = dist;
            first = i;
        }
    }

    let mut chosen = vec![false; n];
    chosen[first] = true;
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| counter.dist(d.point(first), d.point(i)))
        .collect();
    let second = argmax_unchosen(&nearest, &chosen).expect("k <= n leaves a candidate");
    chosen[second] = true;

    let mut picked = vec![first, second];
    let mut last = second;
    while picked.len() < k {
        for (i, slot) in nearest.iter_mut().enumerate() {
            let dist = counter.dist(d.point(last), d.point(i));
            if dist < *slot {
                *slot = dist;
            }
        }
        last = argmax_unchosen(&nearest, &chosen).expect("k <= n leaves a candidate");
        chosen[last] = true;
        picked.push(last);
    }

    Ok((
        SeedSet::from_indices(Method::MaxMinLinear, d, picked),
        DistanceCount(counter.0),
    ))
}

pub fn seed_maxmin_quadratic(d: &Dataset, k: usize) -> Result<SeedSet> {
    maxmin_quadratic_counted(d, k).map(|(s, _)| s)
}

/// Quadratic MaxMin, reporting the distance evaluations of the pair scan plus
/// the from-scratch completion.
pub fn maxmin_quadratic_counted(d: &Dataset, k: usize) -> Result<(SeedSet, DistanceCount)> {
    check_k(d, k, 2)?;
    let n = d.n();
    let mut counter = Counter(0);
    let mut pair = (0, 1);
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let dist = counter.dist(d.point(i), d.point(j));
            if dist > best {
                best = dist;
                pair = (i, j);
            }
        }
    }
    let (picked, DistanceCount(rest)) = maxmin_quadratic_extend(d, k, &[pair.0, pair.1])?;
    Ok((
        SeedSet::from_indices(Method::MaxMin, d, picked),
        DistanceCount(counter.0 + rest),
    ))
}

/// Completes `initial` to `k` seeds by farthest-first selection, recomputing
/// every unchosen point's nearest-seed distance over all chosen seeds each round.
pub fn maxmin_quadratic_extend(
    d: &Dataset,
    k: usize,
    initial: &[usize],
) -> Result<(Vec<usize>, DistanceCount)> {
    check_k(d, k, initial.len().max(1))?;
    let n = d.n();
    let mut chosen = vec![false; n];
    for &i in initial {
        if i >= n || chosen[i] {
            return Err(Error::InvalidParameter(format!(
                "bad or repeated initial seed index {i}"
            )));
        }
        chosen[i] = true;
    }
    let mut counter = Counter(0);
    let mut picked = initial.to_vec();
    while picked.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..n).filter(|&i| !chosen[i]) {
            let m = picked
                .iter()
                .map(|&c| counter.dist(d.point(i), d.point(c)))
                .fold(f64::INFINITY, f64::min);
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((i, m));
            }
        }
        let (next, _) = best.expect("k <= n leaves a candidate");
        chosen[next] = true;
        picked.push(next);
    }
    Ok((picked, DistanceCount(counter.0)))
}
