//! Initialization strategies for FCM.
//!
//! Single-shot strategies return a [`SeedSet`] directly. The relaunch
//! strategies (`faber`, `kmeanspp_x10`) only make sense together with FCM and
//! go through [`seed_repeated`] or [`fit`].

mod maxmin;
mod random;
mod rng;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::engine::{run_fcm, Centroids, FcmConfig, FcmResult};
use crate::error::{Error, Result};

pub use maxmin::{
    maxmin_linear_counted, maxmin_quadratic_counted, maxmin_quadratic_extend, seed_maxmin_linear,
    seed_maxmin_quadratic, DistanceCount,
};
pub use random::{seed_kmeanspp, seed_macqueen2, seed_macqueen_first_k};
pub use rng::{derive_seed, relaunch_seed, RngProvenance, SeedRng, GENERATOR_NAME, SEED_SCHEME};

/// Relaunch count used by `faber` and `kmeanspp_x10`.
pub const DEFAULT_RELAUNCHES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "macqueen1")]
    MacQueenFirstK,
    #[serde(rename = "macqueen2")]
    MacQueenRandom,
    #[serde(rename = "faber")]
    Faber,
    #[serde(rename = "kmeanspp")]
    KMeansPlusPlus,
    #[serde(rename = "kmeanspp_x10")]
    KMeansPlusPlusRepeated,
    #[serde(rename = "maxmin")]
    MaxMin,
    #[serde(rename = "maxmin_linear")]
    MaxMinLinear,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::MacQueenFirstK,
        Method::MacQueenRandom,
        Method::Faber,
        Method::KMeansPlusPlus,
        Method::KMeansPlusPlusRepeated,
        Method::MaxMin,
        Method::MaxMinLinear,
    ];

    /// The five methods of the published comparison, in table order.
    pub const PAPER_SET: [Method; 5] = [
        Method::MacQueenRandom,
        Method::Faber,
        Method::KMeansPlusPlus,
        Method::KMeansPlusPlusRepeated,
        Method::MaxMinLinear,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::MacQueenFirstK => "macqueen1",
            Method::MacQueenRandom => "macqueen2",
            Method::Faber => "faber",
            Method::KMeansPlusPlus => "kmeanspp",
            Method::KMeansPlusPlusRepeated => "kmeanspp_x10",
            Method::MaxMin => "maxmin",
            Method::MaxMinLinear => "maxmin_linear",
        }
    }

    pub fn is_stochastic(self) -> bool {
        !matches!(
            self,
            Method::MacQueenFirstK | Method::MaxMin | Method::MaxMinLinear
        )
    }

    /// Inner single-shot strategy and relaunch count for the relaunch methods.
    pub fn relaunch_of(self) -> Option<(Method, usize)> {
        match self {
            Method::Faber => Some((Method::MacQueenRandom, DEFAULT_RELAUNCHES)),
            Method::KMeansPlusPlusRepeated => Some((Method::KMeansPlusPlus, DEFAULT_RELAUNCHES)),
            _ => None,
        }
    }

    /// Parses a comma-separated list of method ids.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

/// Initial centroids with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSet {
    pub method: Method,
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Rows of the dataset the centroids were copied from.
    pub source_indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<RngProvenance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaunches: Option<usize>,
    /// Index of the relaunch whose run was kept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_relaunch: Option<usize>,
    /// Set when K-Means++ ran out of positive weights and drew uniformly.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub uniform_fallback: bool,
}

impl SeedSet {
    pub(crate) fn from_indices(method: Method, d: &Dataset, indices: Vec<usize>) -> Self {
        SeedSet {
            method,
            k: indices.len(),
            centroids: indices.iter().map(|&i| d.point(i).to_vec()).collect(),
            source_indices: indices,
            rng: None,
            relaunches: None,
            selected_relaunch: None,
            uniform_fallback: false,
        }
    }

    pub fn to_centroids(&self) -> Result<Centroids> {
        Centroids::from_rows(&self.centroids)
    }
}

pub(crate) fn check_k(d: &Dataset, k: usize, min: usize) -> Result<()> {
    if k < min {
        return Err(Error::TooFewClusters { k });
    }
    if k > d.n() {
        return Err(Error::KExceedsN { k, n: d.n() });
    }
    Ok(())
}

fn require_seed(method: Method, rng_seed: Option<u64>) -> Result<u64> {
    rng_seed.ok_or_else(|| Error::InvalidParameter(format!("method {method} needs an RNG seed")))
}

/// Runs one single-shot strategy. Relaunch methods are rejected here; see [`fit`].
pub fn seed(method: Method, d: &Dataset, k: usize, rng_seed: Option<u64>) -> Result<SeedSet> {
    match method {
        Method::MacQueenFirstK => seed_macqueen_first_k(d, k),
        Method::MaxMin => seed_maxmin_quadratic(d, k),
        Method::MaxMinLinear => seed_maxmin_linear(d, k),
        Method::MacQueenRandom => {
            let mut rng = SeedRng::new(require_seed(method, rng_seed)?);
            seed_macqueen2(d, k, &mut rng)
        }
        Method::KMeansPlusPlus => {
            let mut rng = SeedRng::new(require_seed(method, rng_seed)?);
            seed_kmeanspp(d, k, &mut rng)
        }
        Method::Faber | Method::KMeansPlusPlusRepeated => Err(Error::InvalidParameter(format!(
            "{method} relaunches FCM; use the fit path"
        ))),
    }
}

/// A seeding followed by FCM.
#[derive(Debug, Clone, PartialEq)]
pub struct SeededFit {
    pub seeds: SeedSet,
    pub result: FcmResult,
    /// FCM cycles summed over every relaunch (equal to `result.iterations` for single runs).
    pub total_iterations: usize,
    /// Final FW of each relaunch, `None` where the relaunch failed.
    pub relaunch_fw: Vec<Option<f64>>,
}

/// Seeds with `method` and runs FCM. Stochastic methods need `rng_seed`.
pub fn fit(
    method: Method,
    d: &Dataset,
    k: usize,
    cfg: &FcmConfig,
    rng_seed: Option<u64>,
) -> Result<SeededFit> {
    if let Some((inner, relaunches)) = method.relaunch_of() {
        let base = require_seed(method, rng_seed)?;
        let mut out = seed_repeated(inner, d, k, relaunches, base, cfg)?;
        out.seeds.method = method;
        return Ok(out);
    }
    let seeds = seed(method, d, k, rng_seed)?;
    let result = run_fcm(d, &seeds.to_centroids()?, cfg)?;
    Ok(SeededFit {
        total_iterations: result.iterations,
        relaunch_fw: vec![Some(result.fw)],
        seeds,
        result,
    })
}

/// Relaunches `inner` `relaunches` times, each with FCM to convergence, and
/// keeps the run with the smallest final FW (lowest relaunch index on ties).
///
/// Relaunch `r` draws from `relaunch_seed(base_seed, r)`. Failed relaunches are
/// dropped as long as one succeeds.
pub fn seed_repeated(
    inner: Method,
    d: &Dataset,
    k: usize,
    relaunches: usize,
    base_seed: u64,
    cfg: &FcmConfig,
) -> Result<SeededFit> {
    if relaunches == 0 {
        return Err(Error::InvalidParameter(
            "relaunch count must be >= 1".into(),
        ));
    }
    if inner.relaunch_of().is_some() {
        return Err(Error::InvalidParameter(format!("cannot relaunch {inner}")));
    }
    let mut best: Option<(usize, SeedSet, FcmResult)> = None;
    let mut total_iterations = 0;
    let mut relaunch_fw = Vec::with_capacity(relaunches);
    let mut last_err = None;
    for r in 0..relaunches {
        let outcome = seed(inner, d, k, Some(relaunch_seed(base_seed, r)))
            .and_then(|s| Ok((run_fcm(d, &s.to_centroids()?, cfg)?, s)));
        match outcome {
            Ok((result, seeds)) => {
                total_iterations += result.iterations;
                relaunch_fw.push(Some(result.fw));
                if best.as_ref().is_none_or(|(_, _, b)| result.fw < b.fw) {
                    best = Some((r, seeds, result));
                }
            }
            Err(e) => {
                relaunch_fw.push(None);
                last_err = Some(e);
            }
        }
    }
    let Some((winner, mut seeds, result)) = best else {
        return Err(Error::AllRelaunchesFailed {
            relaunches,
            last: Box::new(last_err.expect("at least one relaunch ran")),
        });
    };
    seeds.rng = Some(RngProvenance {
        generator: GENERATOR_NAME.to_string(),
        seed: base_seed,
    });
    seeds.relaunches = Some(relaunches);
    seeds.selected_relaunch = Some(winner);
    Ok(SeededFit {
        seeds,
        result,
        total_iterations,
        relaunch_fw,
    })
}
