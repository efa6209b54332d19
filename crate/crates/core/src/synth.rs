//! Synthetic benchmark data: E1071-style Gaussian clusters and skewed noise
//! added around labelled clusters.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{load_csv, CsvOptions, Dataset};
use crate::error::{Error, Result};
use crate::seeding::SeedRng;

pub use crate::data::write_csv;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub k: usize,
    pub size: usize,
    pub sigma: f64,
    pub dims: usize,
    pub rng_seed: u64,
}

impl GaussianSpec {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.size == 0 || self.dims == 0 {
            return Err(Error::InvalidParameter(
                "k, size and dims must be >= 1".into(),
            ));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be > 0, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

fn default_points_per_label() -> usize {
    5
}

fn default_left_fraction() -> f64 {
    0.25
}

fn default_spread() -> f64 {
    2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    #[serde(default = "default_points_per_label")]
    pub points_per_label: usize,
    /// Probability that a noisy point goes below its label centre.
    #[serde(default = "default_left_fraction")]
    pub left_fraction: f64,
    /// Minimum distance from the centre, in label standard deviations.
    #[serde(default = "default_spread")]
    pub spread_multiplier: f64,
    pub rng_seed: u64,
}

impl NoiseSpec {
    pub fn new(rng_seed: u64) -> Self {
        NoiseSpec {
            points_per_label: default_points_per_label(),
            left_fraction: default_left_fraction(),
            spread_multiplier: default_spread(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points_per_label == 0 {
            return Err(Error::InvalidParameter(
                "points_per_label must be >= 1".into(),
            ));
        }
        if !(self.left_fraction > 0.0 && self.left_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "left_fraction must lie in (0, 1), got {}",
                self.left_fraction
            )));
        }
        if !(self.spread_multiplier >= 0.0) || !self.spread_multiplier.is_finite() {
            return Err(Error::InvalidParameter(
                "spread_multiplier must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// `size` points per cluster `i = 1..=k`, every coordinate drawn from
/// `Normal(i, sigma)`. Labels are the cluster numbers.
pub fn gen_gaussian_clusters(spec: &GaussianSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = SeedRng::new(spec.rng_seed);
    let n = spec.k * spec.size;
    let mut flat = Vec::with_capacity(n * spec.dims);
    let mut labels = Vec::with_capacity(n);
    for i in 1..=spec.k {
        let normal = Normal::new(i as f64, spec.sigma)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        for _ in 0..spec.size {
            flat.extend((0..spec.dims).map(|_| normal.sample(&mut rng)));
            labels.push(i as i64);
        }
    }
    let points =
        Array2::from_shape_vec((n, spec.dims), flat).map_err(|e| Error::Shape(e.to_string()))?;
    Dataset::new(
        format!("gaussian-k{}-s{}-sigma{}", spec.k, spec.size, spec.sigma),
        points,
        Some(labels),
    )
}

/// Centre and sample standard deviation of each feature.
type Moments = (Vec<f64>, Vec<f64>);

fn label_moments(d: &Dataset, labels: &[i64]) -> Result<BTreeMap<i64, Moments>> {
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    let p = d.p();
    let mut out = BTreeMap::new();
    for (label, rows) in groups {
        if rows.len() < 2 {
            return Err(Error::SmallLabel {
                label,
                count: rows.len(),
            });
        }
        let cnt = rows.len() as f64;
        let mut center = vec![0.0; p];
        for &i in &rows {
            for (c, v) in center.iter_mut().zip(d.point(i).iter()) {
                *c += v;
            }
        }
        center.iter_mut().for_each(|c| *c /= cnt);
        let mut sd = vec![0.0; p];
        for &i in &rows {
            for ((s, v), c) in sd.iter_mut().zip(d.point(i).iter()).zip(&center) {
                *s += (v - c) * (v - c);
            }
        }
        sd.iter_mut().for_each(|s| *s = (*s / (cnt - 1.0)).sqrt());
        out.insert(label, (center, sd));
    }
    Ok(out)
}

/// Appends `points_per_label` far-away points to every label.
///
/// For each new point a uniform `r` picks the side: `r <= left_fraction` puts
/// every feature below the label centre, otherwise above. The offset on
/// feature `j` is `spread * sd_j + |Normal(0, sd_j)|`. Original rows keep their
/// order; new rows follow, grouped by ascending label.
pub fn add_skewed_noise(d: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    spec.validate()?;
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    let moments = label_moments(d, labels)?;
    let mut rng = SeedRng::new(spec.rng_seed);

    let extra = moments.len() * spec.points_per_label;
    let p = d.p();
    let mut flat: Vec<f64> = d.points().iter().copied().collect();
    flat.reserve(extra * p);
    let mut out_labels = labels.to_vec();
    for (&label, (center, sd)) in &moments {
        for _ in 0..spec.points_per_label {
            let r: f64 = rng.random();
            let sign = if r <= spec.left_fraction { -1.0 } else { 1.0 };
            for j in 0..p {
                let z: f64 = StandardNormal.sample(&mut rng);
                let offset = spec.spread_multiplier * sd[j] + (z * sd[j]).abs();
                flat.push(center[j] + sign * offset);
            }
            out_labels.push(label);
        }
    }
    let points = Array2::from_shape_vec((d.n() + extra, p), flat)
        .map_err(|e| Error::Shape(e.to_string()))?;
    Dataset::with_columns(
        format!("{}_noised", d.name()),
        d.columns().to_vec(),
        points,
        Some(out_labels),
    )
}

/// A CSV on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSource {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delimiter: Option<char>,
}

impl CsvSource {
    pub fn load(&self, base_dir: &Path) -> Result<Dataset> {
        let delimiter = match self.delimiter {
            None => b',',
            Some(c) if c.is_ascii() => c as u8,
            Some(c) => {
                return Err(Error::InvalidParameter(format!(
                    "delimiter {c:?} is not ASCII"
                )))
            }
        };
        let opts = CsvOptions {
            label_column: self.label_column.clone(),
            delimiter,
        };
        load_csv(base_dir.join(&self.path), &opts)
    }
}

/// Where noise generation takes its labelled input from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseSource {
    Csv(CsvSource),
    Generated(Box<GeneratorSpec>),
}

/// JSON generator specification.
///
/// ```json
/// {"kind": "gaussian", "name": "e1071-3", "k": 3, "size": 50, "sigma": 0.3, "dims": 3, "rng_seed": 1}
/// {"kind": "skewed_noise", "source": {"path": "ruspini.csv", "label_column": "label"}, "rng_seed": 7}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Gaussian {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        #[serde(flatten)]
        spec: GaussianSpec,
    },
    SkewedNoise {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        source: NoiseSource,
        #[serde(flatten)]
        noise: NoiseSpec,
    },
}

impl GeneratorSpec {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            GeneratorSpec::Gaussian { spec, .. } => spec.validate(),
            GeneratorSpec::SkewedNoise { source, noise, .. } => {
                noise.validate()?;
                match source {
                    NoiseSource::Generated(inner) => inner.validate(),
                    NoiseSource::Csv(_) => Ok(()),
                }
            }
        }
    }

    /// Builds the dataset; relative CSV paths resolve against `base_dir`.
    pub fn generate(&self, base_dir: &Path) -> Result<Dataset> {
        self.validate()?;
        match self {
            GeneratorSpec::Gaussian { name, spec } => {
                let d = gen_gaussian_clusters(spec)?;
                Ok(match name {
                    Some(n) => d.renamed(n.clone()),
                    None => d,
                })
            }
            GeneratorSpec::SkewedNoise {
                name,
                source,
                noise,
            } => {
                let base = match source {
                    NoiseSource::Csv(csv) => csv.load(base_dir)?,
                    NoiseSource::Generated(inner) => inner.generate(base_dir)?,
                };
                let d = add_skewed_noise(&base, noise)?;
                Ok(match name {
                    Some(n) => d.renamed(n.clone()),
                    None => d,
                })
            }
        }
    }
}
