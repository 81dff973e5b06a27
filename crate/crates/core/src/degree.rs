//! Output-degree distributions Ω(x) = Σ Ω_d x^d.
//!
//! Distributions are stored sparsely as `(degree, probability)` pairs sorted
//! by degree. Only strictly positive probabilities are kept.
//!
//! The text format is line oriented:
//!
//! ```text
//! # optional comment lines
//! D 100
//! 1 0.0035
//! 2 0.3493
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, RngExt};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance on Σ Ω_d = 1.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    entries: Vec<(u32, f64)>,
    max_degree: u32,
}

impl DegreeDistribution {
    /// Validates and builds a distribution. Zero entries are dropped.
    pub fn new(entries: impl IntoIterator<Item = (u32, f64)>, max_degree: u32) -> Result<Self> {
        let merged = collect_entries(entries, max_degree)?;
        let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::ProbabilitySum {
                sum,
                tolerance: SUM_TOLERANCE,
            });
        }
        Ok(Self {
            entries: merged,
            max_degree,
        })
    }

    /// Builds a distribution from unnormalised weights, rescaling them to sum
    /// to one. Negative weights above `-1e-9` (solver round-off) are treated
    /// as zero.
    pub fn normalized(weights: impl IntoIterator<Item = (u32, f64)>, max_degree: u32) -> Result<Self> {
        let cleaned: Vec<(u32, f64)> = weights
            .into_iter()
            .map(|(d, w)| if w < 0.0 && w > -1e-9 { (d, 0.0) } else { (d, w) })
            .collect();
        let merged = collect_entries(cleaned, max_degree)?;
        let sum: f64 = merged.iter().map(|&(_, p)| p).sum();
        if !(sum > 0.0) {
            return Err(invalid("weights sum to zero"));
        }
        Ok(Self {
            entries: merged.into_iter().map(|(d, p)| (d, p / sum)).collect(),
            max_degree,
        })
    }

    /// The point mass Ω(x) = x^d.
    pub fn singleton(degree: u32) -> Result<Self> {
        Self::new([(degree, 1.0)], degree)
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Nonzero `(d, Ω_d)` pairs in ascending degree.
    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn probability(&self, degree: u32) -> f64 {
        self.entries
            .binary_search_by_key(&degree, |&(d, _)| d)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Dense vector `[Ω_1, ..., Ω_D]`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.max_degree as usize];
        for &(d, p) in &self.entries {
            dense[d as usize - 1] = p;
        }
        dense
    }

    /// β = Ω'(1), the average output-node degree.
    pub fn mean_degree(&self) -> f64 {
        self.entries.iter().map(|&(d, p)| d as f64 * p).sum()
    }

    /// ω_d = d Ω_d / β.
    pub fn to_edge_perspective(&self) -> EdgeDistribution {
        let beta = self.mean_degree();
        EdgeDistribution {
            entries: self
                .entries
                .iter()
                .map(|&(d, p)| (d, d as f64 * p / beta))
                .collect(),
            max_degree: self.max_degree,
        }
    }

    pub fn sampler(&self) -> DegreeSampler {
        let mut cumulative = Vec::with_capacity(self.entries.len());
        let mut acc = 0.0;
        for &(_, p) in &self.entries {
            acc += p;
            cumulative.push(acc);
        }
        DegreeSampler {
            degrees: self.entries.iter().map(|&(d, _)| d).collect(),
            cumulative,
        }
    }

    /// Draws one degree. Prefer [`DegreeSampler`] for repeated draws.
    pub fn sample_degree<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        self.sampler().sample(rng)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "D {}", self.max_degree).unwrap();
        for &(d, p) in &self.entries {
            // `{}` on f64 prints the shortest representation that round-trips.
            writeln!(out, "{d} {p}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut max_degree = None;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let lineno = idx + 1;
            let malformed = |message: &str| Error::Malformed {
                line: lineno,
                message: format!("{message}: {line:?}"),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(malformed("expected two fields"));
            }
            if max_degree.is_none() {
                if fields[0] != "D" {
                    return Err(malformed("expected header `D <max degree>`"));
                }
                let d: u32 = fields[1].parse().map_err(|_| malformed("bad max degree"))?;
                if d == 0 {
                    return Err(malformed("max degree must be positive"));
                }
                max_degree = Some(d);
                continue;
            }
            let d: u64 = fields[0].parse().map_err(|_| malformed("bad degree"))?;
            let p: f64 = fields[1].parse().map_err(|_| malformed("bad probability"))?;
            let max = max_degree.unwrap();
            if d == 0 || d > max as u64 {
                return Err(Error::DegreeOutOfRange {
                    degree: d,
                    max_degree: max,
                });
            }
            entries.push((d as u32, p));
        }
        let max_degree = max_degree.ok_or(Error::Malformed {
            line: 0,
            message: "missing `D` header".into(),
        })?;
        Self::new(entries, max_degree)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_text(&text)
    }

    /// JSON form `{"D": 100, "omega": {"1": 0.0035, ...}}`.
    pub fn to_json(&self) -> DistributionJson {
        DistributionJson {
            max_degree: self.max_degree,
            omega: self.entries.iter().map(|&(d, p)| (d, p)).collect(),
        }
    }

    pub fn from_json(json: &DistributionJson) -> Result<Self> {
        Self::new(json.omega.iter().map(|(&d, &p)| (d, p)), json.max_degree)
    }
}

fn collect_entries(entries: impl IntoIterator<Item = (u32, f64)>, max_degree: u32) -> Result<Vec<(u32, f64)>> {
    if max_degree == 0 {
        return Err(invalid("max degree must be positive"));
    }
    let mut map = BTreeMap::new();
    for (d, p) in entries {
        if d == 0 || d > max_degree {
            return Err(Error::DegreeOutOfRange {
                degree: d as u64,
                max_degree,
            });
        }
        if !p.is_finite() || p < 0.0 {
            return Err(invalid(format!("probability of degree {d} is {p}")));
        }
        if map.insert(d, p).is_some() {
            return Err(invalid(format!("degree {d} listed twice")));
        }
    }
    Ok(map.into_iter().filter(|&(_, p)| p > 0.0).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionJson {
    #[serde(rename = "D")]
    pub max_degree: u32,
    pub omega: BTreeMap<u32, f64>,
}

/// Edge-perspective distribution ω(x) = Ω'(x) / Ω'(1).
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDistribution {
    entries: Vec<(u32, f64)>,
    max_degree: u32,
}

impl EdgeDistribution {
    pub fn new(entries: impl IntoIterator<Item = (u32, f64)>, max_degree: u32) -> Result<Self> {
        let dist = DegreeDistribution::new(entries, max_degree)?;
        Ok(Self {
            entries: dist.entries,
            max_degree,
        })
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn probability(&self, degree: u32) -> f64 {
        self.entries
            .binary_search_by_key(&degree, |&(d, _)| d)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    /// Inverse transform: Ω_d = ω_d β / d with β = 1 / Σ (ω_d / d).
    pub fn to_node_perspective(&self) -> DegreeDistribution {
        let beta = 1.0 / self.entries.iter().map(|&(d, w)| w / d as f64).sum::<f64>();
        DegreeDistribution {
            entries: self
                .entries
                .iter()
                .map(|&(d, w)| (d, w * beta / d as f64))
                .collect(),
            max_degree: self.max_degree,
        }
    }
}

/// Inverse-CDF sampler over the support of a distribution.
#[derive(Debug, Clone)]
pub struct DegreeSampler {
    degrees: Vec<u32>,
    cumulative: Vec<f64>,
}

impl DegreeSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        // Scale by the last cumulative value so rounding never falls off the end.
        let u = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let idx = self.cumulative.partition_point(|&c| c <= u);
        self.degrees[idx.min(self.degrees.len() - 1)]
    }
}
