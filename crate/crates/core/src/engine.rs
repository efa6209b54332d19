//! Fuzzy C-Means iteration and the fuzzy inertia decomposition `FI = FW + FB`.
//!
//! All distances are squared Euclidean. The objective minimised by the
//! alternating updates is the fuzzy within-inertia
//! `FW = sum_i sum_k u_ik^m d2(x_i, c_k)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::data::{grand_mean, sq_dist, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    /// Fuzziness coefficient, strictly greater than 1.
    pub m: f64,
    /// Stop once the relative change of FW between two cycles falls below this.
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for FcmConfig {
    fn default() -> Self {
        FcmConfig {
            m: 2.0,
            epsilon: 1e-4,
            max_iterations: 1000,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 1.0) || !self.m.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "fuzziness m must be a finite value > 1, got {}",
                self.m
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// `n x K` fuzzy partition; rows are probability vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix(Array2<f64>);

impl MembershipMatrix {
    /// Checks that entries lie in `[0, 1]` and rows sum to one within `1e-9`.
    pub fn new(u: Array2<f64>) -> Result<Self> {
        for (i, row) in u.outer_iter().enumerate() {
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Shape(format!(
                    "membership row {i} has entries outside [0, 1]"
                )));
            }
            let s: f64 = row.sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Shape(format!("membership row {i} sums to {s}")));
            }
        }
        Ok(MembershipMatrix(u))
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.outer_iter().map(|r| r.to_vec()).collect()
    }
}

/// `K x p` matrix of cluster centres.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids(Array2<f64>);

impl Centroids {
    pub fn new(c: Array2<f64>) -> Result<Self> {
        if c.nrows() == 0 {
            return Err(Error::TooFewClusters { k: 0 });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("centroid with non-finite coordinate".into()));
        }
        Ok(Centroids(c))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::Shape("centroid rows differ in length".into()));
        }
        let flat = rows.iter().flatten().copied().collect();
        Self::new(
            Array2::from_shape_vec((rows.len(), p), flat)
                .map_err(|e| Error::Shape(e.to_string()))?,
        )
    }

    pub fn k(&self) -> usize {
        self.0.nrows()
    }

    pub fn p(&self) -> usize {
        self.0.ncols()
    }

    pub fn row(&self, k: usize) -> ArrayView1<'_, f64> {
        self.0.row(k)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.outer_iter().map(|r| r.to_vec()).collect()
    }
}

fn check_shapes(d: &Dataset, c: Option<&Centroids>, u: Option<&MembershipMatrix>) -> Result<()> {
    if let Some(c) = c {
        if c.p() != d.p() {
            return Err(Error::Shape(format!(
                "centroids have {} features, data has {}",
                c.p(),
                d.p()
            )));
        }
    }
    if let Some(u) = u {
        if u.n() != d.n() {
            return Err(Error::Shape(format!(
                "membership has {} rows, data has {}",
                u.n(),
                d.n()
            )));
        }
        if let Some(c) = c {
            if u.k() != c.k() {
                return Err(Error::Shape(format!(
                    "membership has {} columns, {} centroids",
                    u.k(),
                    c.k()
                )));
            }
        }
    }
    Ok(())
}

/// Membership of one point given its squared distances to every centroid.
///
/// A point sitting on one or more centroids splits its mass equally between them.
fn membership_row(d2: &[f64], m: f64, out: &mut [f64]) {
    let zeros = d2.iter().filter(|&&v| v == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        for (o, &v) in out.iter_mut().zip(d2) {
            *o = if v == 0.0 { share } else { 0.0 };
        }
        return;
    }
    // (d_min / d_k)^(1/(m-1)) stays in (0, 1], so nothing overflows for tiny distances.
    let exponent = 1.0 / (m - 1.0);
    let dmin = d2.iter().copied().fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    for (o, &v) in out.iter_mut().zip(d2) {
        *o = (dmin / v).powf(exponent);
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

pub fn update_membership(d: &Dataset, c: &Centroids, m: f64) -> Result<MembershipMatrix> {
    if c.k() < 2 {
        return Err(Error::TooFewClusters { k: c.k() });
    }
    if !(m > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fuzziness m must be > 1, got {m}"
        )));
    }
    check_shapes(d, Some(c), None)?;
    let k = c.k();
    let mut u = Array2::zeros((d.n(), k));
    let mut d2 = vec![0.0; k];
    for (x, mut row) in d.points().outer_iter().zip(u.outer_iter_mut()) {
        for (j, slot) in d2.iter_mut().enumerate() {
            *slot = sq_dist(x, c.row(j));
        }
        membership_row(&d2, m, row.as_slice_mut().expect("standard layout"));
    }
    Ok(MembershipMatrix(u))
}

/// `u_ik^m` for every entry.
fn powered(u: &MembershipMatrix, m: f64) -> Array2<f64> {
    if m == 2.0 {
        u.0.mapv(|v| v * v)
    } else {
        u.0.mapv(|v| v.powf(m))
    }
}

pub fn update_centroids(d: &Dataset, u: &MembershipMatrix, m: f64) -> Result<Centroids> {
    check_shapes(d, None, Some(u))?;
    let w = powered(u, m);
    let mass = w.sum_axis(Axis(0));
    if let Some(cluster) = mass.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::CollapsedCluster { cluster });
    }
    let mut c = w.t().dot(d.points());
    for (mut row, s) in c.outer_iter_mut().zip(mass.iter()) {
        row /= *s;
    }
    Centroids::new(c)
}

/// FW: membership-weighted squared distances of points to centroids.
pub fn fuzzy_within(d: &Dataset, c: &Centroids, u: &MembershipMatrix, m: f64) -> Result<f64> {
    check_shapes(d, Some(c), Some(u))?;
    let w = powered(u, m);
    let mut total = 0.0;
    for (x, wrow) in d.points().outer_iter().zip(w.outer_iter()) {
        for (k, &wk) in wrow.iter().enumerate() {
            total += wk * sq_dist(x, c.row(k));
        }
    }
    Ok(total)
}

/// FB: cluster masses times squared distances of centroids to the grand mean.
pub fn fuzzy_between(d: &Dataset, c: &Centroids, u: &MembershipMatrix, m: f64) -> Result<f64> {
    check_shapes(d, Some(c), Some(u))?;
    let xbar = grand_mean(d);
    let mass = powered(u, m).sum_axis(Axis(0));
    Ok(mass
        .iter()
        .enumerate()
        .map(|(k, s)| s * sq_dist(c.row(k), xbar.view()))
        .sum())
}

/// FI: membership-weighted squared distances of points to the grand mean.
pub fn fuzzy_inertia(d: &Dataset, u: &MembershipMatrix, m: f64) -> Result<f64> {
    check_shapes(d, None, Some(u))?;
    let xbar = grand_mean(d);
    let row_mass: Array1<f64> = powered(u, m).sum_axis(Axis(1));
    Ok(d.points()
        .outer_iter()
        .zip(row_mass.iter())
        .map(|(x, s)| s * sq_dist(x, xbar.view()))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcmResult {
    pub centroids: Centroids,
    pub membership: MembershipMatrix,
    /// Completed membership + centroid update cycles.
    pub iterations: usize,
    /// FW after each cycle.
    pub objective_trace: Vec<f64>,
    pub fw: f64,
    pub fb: f64,
    pub fi: f64,
    pub converged: bool,
}

/// Runs FCM from the given initial centroids.
///
/// Each cycle recomputes memberships, then centroids, then FW. The run stops
/// when `|FW_t - FW_{t-1}| / FW_{t-1} < epsilon` (a previous FW of zero counts
/// as converged) or after `max_iterations` cycles.
pub fn run_fcm(d: &Dataset, seeds: &Centroids, cfg: &FcmConfig) -> Result<FcmResult> {
    cfg.validate()?;
    let k = seeds.k();
    if k < 2 {
        return Err(Error::TooFewClusters { k });
    }
    if k > d.n() {
        return Err(Error::KExceedsN { k, n: d.n() });
    }
    check_shapes(d, Some(seeds), None)?;

    let mut centroids = seeds.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut membership = update_membership(d, &centroids, cfg.m)?;
    for t in 1..=cfg.max_iterations {
        if t > 1 {
            membership = update_membership(d, &centroids, cfg.m)?;
        }
        centroids = update_centroids(d, &membership, cfg.m)?;
        let fw = fuzzy_within(d, &centroids, &membership, cfg.m)?;
        let prev = trace.last().copied();
        trace.push(fw);
        if let Some(prev) = prev {
            if prev == 0.0 || ((fw - prev).abs() / prev) < cfg.epsilon {
                converged = true;
                break;
            }
        }
    }

    let fw = *trace.last().expect("at least one cycle");
    let fb = fuzzy_between(d, &centroids, &membership, cfg.m)?;
    let fi = fuzzy_inertia(d, &membership, cfg.m)?;
    Ok(FcmResult {
        centroids,
        membership,
        iterations: trace.len(),
        objective_trace: trace,
        fw,
        fb,
        fi,
        converged,
    })
}
