//! Fuzzy cluster validity indices.
//!
//! Membership-only indices: partition coefficient (PC) and Chen-Linkens (CL).
//! Inertia-based indices: FRatio = FB/FW, Calinski-Harabasz (FCH),
//! Fukuyama-Sugeno (FS = FW - FB), Xie-Beni (XB) and TSFD = FB/FI.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::data::{sq_dist, Dataset};
use crate::engine::{fuzzy_within, Centroids, FcmResult, MembershipMatrix};
use crate::error::{Error, Result};

/// A real value that may be an infinite sentinel.
///
/// Serializes finite values as JSON numbers and non-finite ones as the strings
/// `"inf"`, `"-inf"` or `"nan"`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Score(pub f64);

impl Score {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_sentinel(self) -> bool {
        !self.0.is_finite()
    }
}

impl From<f64> for Score {
    fn from(v: f64) -> Self {
        Score(v)
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_nan() {
            f.write_str("nan")
        } else if self.0.is_infinite() {
            f.write_str(if self.0 > 0.0 { "inf" } else { "-inf" })
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ScoreVisitor;

        impl Visitor<'_> for ScoreVisitor {
            type Value = Score;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Score, E> {
                Ok(Score(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Score, E> {
                Ok(Score(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Score, E> {
                Ok(Score(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Score, E> {
                match v {
                    "inf" => Ok(Score(f64::INFINITY)),
                    "-inf" => Ok(Score(f64::NEG_INFINITY)),
                    "nan" => Ok(Score(f64::NAN)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(ScoreVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

/// The seven indices, with their optimisation direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Index {
    Pc,
    Cl,
    FRatio,
    Fch,
    Fs,
    Xb,
    Tsfd,
}

impl Index {
    pub const ALL: [Index; 7] = [
        Index::Pc,
        Index::Cl,
        Index::FRatio,
        Index::Fch,
        Index::Fs,
        Index::Xb,
        Index::Tsfd,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Index::Pc => "pc",
            Index::Cl => "cl",
            Index::FRatio => "fratio",
            Index::Fch => "fch",
            Index::Fs => "fs",
            Index::Xb => "xb",
            Index::Tsfd => "tsfd",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Index::Fs | Index::Xb => Direction::Minimize,
            _ => Direction::Maximize,
        }
    }
}

/// Partition coefficient: mean over points of the squared memberships.
pub fn v_pc(u: &MembershipMatrix) -> f64 {
    let u = u.view();
    u.iter().map(|v| v * v).sum::<f64>() / u.nrows() as f64
}

/// Chen-Linkens: mean maximum membership minus the mean pairwise overlap
/// `min(u_ik, u_ij)` averaged over the `K(K-1)/2` cluster pairs.
pub fn v_cl(u: &MembershipMatrix) -> Result<f64> {
    let k = u.k();
    if k < 2 {
        return Err(Error::TooFewClusters { k });
    }
    let view = u.view();
    let n = view.nrows() as f64;
    let compact: f64 = view
        .outer_iter()
        .map(|row| row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / n;
    let mut overlap = 0.0;
    for a in 0..k {
        for b in (a + 1)..k {
            let s: f64 = view.outer_iter().map(|row| row[a].min(row[b])).sum();
            overlap += s / n;
        }
    }
    let pairs = (k * (k - 1) / 2) as f64;
    Ok(compact - overlap / pairs)
}

/// FB / FW, `+inf` when FW is zero.
pub fn v_fratio(fb: f64, fw: f64) -> Score {
    if fw == 0.0 {
        Score(f64::INFINITY)
    } else {
        Score(fb / fw)
    }
}

/// `((n - K) / (K - 1)) * FB / FW`.
pub fn v_fch(fb: f64, fw: f64, n: usize, k: usize) -> Result<Score> {
    if k < 2 {
        return Err(Error::TooFewClusters { k });
    }
    if n <= k {
        return Err(Error::InvalidParameter(format!(
            "FCH needs n > K, got n = {n}, K = {k}"
        )));
    }
    let scale = (n - k) as f64 / (k - 1) as f64;
    Ok(match v_fratio(fb, fw) {
        Score(r) if r.is_finite() => Score(scale * r),
        s => s,
    })
}

pub fn v_fs(fw: f64, fb: f64) -> f64 {
    fw - fb
}

/// Xie-Beni: `FW / (n * min_{j != k} d2(c_j, c_k))`, `+inf` when two centroids coincide.
pub fn v_xb(d: &Dataset, c: &Centroids, u: &MembershipMatrix, m: f64) -> Result<Score> {
    if c.k() < 2 {
        return Err(Error::TooFewClusters { k: c.k() });
    }
    let fw = fuzzy_within(d, c, u, m)?;
    let mut sep = f64::INFINITY;
    for a in 0..c.k() {
        for b in (a + 1)..c.k() {
            sep = sep.min(sq_dist(c.row(a), c.row(b)));
        }
    }
    if sep == 0.0 {
        return Ok(Score(f64::INFINITY));
    }
    Ok(Score(fw / (d.n() as f64 * sep)))
}

/// TSFD = FB / FI, in `[0, 1]`.
pub fn v_tsfd(fb: f64, fi: f64) -> Result<f64> {
    if !(fi > 0.0) {
        return Err(Error::ZeroInertia);
    }
    if fb < 0.0 || fb > fi * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "TSFD needs 0 <= FB <= FI, got FB = {fb}, FI = {fi}"
        )));
    }
    Ok((fb / fi).min(1.0))
}

/// Standardized fuzzy difference `(FB - FW) / FI`.
pub fn sfd(fb: f64, fw: f64, fi: f64) -> Result<f64> {
    if !(fi > 0.0) {
        return Err(Error::ZeroInertia);
    }
    Ok((fb - fw) / fi)
}

/// TSFD through the affine map `(1 + SFD) / 2`, with `FI = FB + FW`.
pub fn tsfd_from_sfd(fb: f64, fw: f64) -> Result<f64> {
    Ok((1.0 + sfd(fb, fw, fb + fw)?) / 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityScores {
    pub pc: Score,
    pub cl: Score,
    pub fratio: Score,
    pub fch: Score,
    pub fs: Score,
    pub xb: Score,
    pub tsfd: Score,
    /// Quality flags, e.g. `fratio_infinite` for a zero FW.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl ValidityScores {
    /// Scores the final partition of a run.
    pub fn compute(d: &Dataset, result: &FcmResult, m: f64) -> Result<Self> {
        Self::from_parts(
            d,
            &result.centroids,
            &result.membership,
            result.fw,
            result.fb,
            result.fi,
            m,
        )
    }

    pub fn from_parts(
        d: &Dataset,
        c: &Centroids,
        u: &MembershipMatrix,
        fw: f64,
        fb: f64,
        fi: f64,
        m: f64,
    ) -> Result<Self> {
        if u.n() != d.n() {
            return Err(Error::Shape(format!(
                "membership has {} rows, data has {}",
                u.n(),
                d.n()
            )));
        }
        let mut flags = Vec::new();
        let fratio = v_fratio(fb, fw);
        if fratio.is_sentinel() {
            flags.push("fratio_infinite".to_string());
        }
        let fch = if d.n() > c.k() {
            v_fch(fb, fw, d.n(), c.k())?
        } else {
            flags.push("fch_undefined".to_string());
            Score(f64::NAN)
        };
        let xb = v_xb(d, c, u, m)?;
        if xb.is_sentinel() {
            flags.push("xb_infinite".to_string());
        }
        let tsfd = v_tsfd(fb, fi)?;
        let alt = (1.0 + sfd(fb, fw, fi)?) / 2.0;
        if (tsfd - alt).abs() > 1e-9 {
            flags.push("tsfd_forms_disagree".to_string());
        }
        Ok(ValidityScores {
            pc: Score(v_pc(u)),
            cl: Score(v_cl(u)?),
            fratio,
            fch,
            fs: Score(v_fs(fw, fb)),
            xb,
            tsfd: Score(tsfd),
            flags,
        })
    }

    pub fn get(&self, index: Index) -> Score {
        match index {
            Index::Pc => self.pc,
            Index::Cl => self.cl,
            Index::FRatio => self.fratio,
            Index::Fch => self.fch,
            Index::Fs => self.fs,
            Index::Xb => self.xb,
            Index::Tsfd => self.tsfd,
        }
    }
}
