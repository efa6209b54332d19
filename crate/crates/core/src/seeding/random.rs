use rand::seq::index::sample;
use rand::Rng;

use super::{check_k, Method, SeedRng, SeedSet};
use crate::data::{sq_dist, Dataset};
use crate::error::Result;

/// The first `k` rows, in file order.
pub fn seed_macqueen_first_k(d: &Dataset, k: usize) -> Result<SeedSet> {
    check_k(d, k, 1)?;
    Ok(SeedSet::from_indices(
        Method::MacQueenFirstK,
        d,
        (0..k).collect(),
    ))
}

/// `k` distinct rows drawn uniformly without replacement.
pub fn seed_macqueen2(d: &Dataset, k: usize, rng: &mut SeedRng) -> Result<SeedSet> {
    check_k(d, k, 1)?;
    let picked = sample(rng, d.n(), k).into_vec();
    let mut s = SeedSet::from_indices(Method::MacQueenRandom, d, picked);
    s.rng = Some(rng.provenance());
    Ok(s)
}

/// K-Means++: uniform first seed, then draws proportional to the squared
/// distance to the nearest seed already chosen.
///
/// If every unchosen point sits on a chosen seed the total weight is zero; the
/// next seed is then drawn uniformly among the unchosen points and
/// `uniform_fallback` is set.
pub fn seed_kmeanspp(d: &Dataset, k: usize, rng: &mut SeedRng) -> Result<SeedSet> {
    check_k(d, k, 1)?;
    let n = d.n();
    let mut chosen = vec![false; n];
    let mut picked = Vec::with_capacity(k);
    let mut fallback = false;

    let first = rng.random_range(0..n);
    chosen[first] = true;
    picked.push(first);
    let mut nearest: Vec<f64> = (0..n)
        .map(|i| sq_dist(d.point(i), d.point(first)))
        .collect();

    while picked.len() < k {
        let total: f64 = (0..n).filter(|&i| !chosen[i]).map(|i| nearest[i]).sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for i in (0..n).filter(|&i| !chosen[i] && nearest[i] > 0.0) {
                acc += nearest[i];
                last_positive = i;
                if target < acc {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave target == acc at the end of the scan.
            pick.unwrap_or(last_positive)
        } else {
            fallback = true;
            let remaining: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        chosen[next] = true;
        picked.push(next);
        for (i, slot) in nearest.iter_mut().enumerate() {
            let dist = sq_dist(d.point(i), d.point(next));
            if dist < *slot {
                *slot = dist;
            }
        }
    }

    let mut s = SeedSet::from_indices(Method::KMeansPlusPlus, d, picked);
    s.rng = Some(rng.provenance());
    s.uniform_fallback = fallback;
    Ok(s)
}
