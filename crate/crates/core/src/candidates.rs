//! Grid enumeration of parameterized constraint candidates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domain::{DomainEvalFn, Family, SharedFn};

/// A semantic-domain constraint: applies to a column when at least a
/// fraction `m` of its values lie within `d_in` of the domain, and flags the
/// values farther than `d_out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sdc {
    pub id: String,
    pub fn_id: String,
    pub d_in: f64,
    pub d_out: f64,
    pub m: f64,
    #[serde(default)]
    pub confidence: f64,
}

impl Sdc {
    pub fn new(fn_id: impl Into<String>, d_in: f64, d_out: f64, m: f64) -> Self {
        let fn_id = fn_id.into();
        Sdc {
            id: candidate_id(&fn_id, d_in, d_out, m),
            fn_id,
            d_in,
            d_out,
            m,
            confidence: 0.0,
        }
    }

    pub fn with_confidence(mut self, confidence: f64) -> Self {
        self.confidence = confidence;
        self
    }

    /// Inner-ball membership (non-strict).
    pub fn inside(&self, distance: f64) -> bool {
        distance <= self.d_in
    }

    /// Outer-ball exclusion. Strict for metric families; for the binary
    /// pattern/validator families a distance equal to `d_out` (= 1, no
    /// match) is already outside.
    pub fn outside(&self, family: Family, distance: f64) -> bool {
        if family.is_binary() {
            distance >= self.d_out && distance > self.d_in
        } else {
            distance > self.d_out
        }
    }

    /// Precondition on inside-count over column length.
    pub fn applies(&self, inside: usize, len: usize) -> bool {
        len > 0 && inside as f64 / len as f64 >= self.m
    }
}

/// Stable content hash of the candidate parameters.
pub fn candidate_id(fn_id: &str, d_in: f64, d_out: f64, m: f64) -> String {
    let mut h = Sha256::new();
    h.update(fn_id.as_bytes());
    for x in [d_in, d_out, m] {
        h.update([0u8]);
        h.update(x.to_bits().to_le_bytes());
    }
    hex::encode(&h.finalize()[..8])
}

/// Radii for one family. With `relative` set, `d_out` entries are offsets
/// added to each `d_in`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    pub d_in: Vec<f64>,
    pub d_out: Vec<f64>,
    #[serde(default)]
    pub relative: bool,
}

impl RadiusGrid {
    fn pairs(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &din in &self.d_in {
            for &dout in &self.d_out {
                let dout = if self.relative { round6(din + dout) } else { dout };
                if dout > din {
                    out.push((din, dout));
                }
            }
        }
        out
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

/// `start, start + step, ..., end` in hundredths, computed from integers so
/// that values like 0.95 are the nearest doubles.
pub fn hundredths(start: u32, end: u32, step: u32) -> Vec<f64> {
    (start..=end).step_by(step as usize).map(|i| i as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Matching percentages, descending.
    pub m_values: Vec<f64>,
    pub radii: BTreeMap<Family, RadiusGrid>,
}

impl Default for GridSpec {
    fn default() -> Self {
        let mut m_values = hundredths(80, 100, 5);
        m_values.reverse();
        let unit = RadiusGrid {
            d_in: hundredths(10, 50, 5),
            d_out: vec![0.9, 0.95, 0.99, 1.0],
            relative: false,
        };
        let mut radii = BTreeMap::new();
        radii.insert(
            Family::Embedding,
            RadiusGrid {
                d_in: hundredths(50, 800, 50),
                d_out: vec![0.5, 1.0, 1.5, 2.0],
                relative: true,
            },
        );
        radii.insert(Family::ScoreTable, unit.clone());
        radii.insert(Family::RandomHash, unit);
        GridSpec { m_values, radii }
    }
}

impl GridSpec {
    /// The `(d_in, d_out)` pairs used for a family. Binary families always
    /// use `(0, 1)`.
    pub fn pairs_for(&self, family: Family) -> Vec<(f64, f64)> {
        if family.is_binary() {
            return vec![(0.0, 1.0)];
        }
        self.radii.get(&family).map(RadiusGrid::pairs).unwrap_or_default()
    }

    pub fn count_for(&self, f: &DomainEvalFn) -> usize {
        self.pairs_for(f.family()).len() * self.m_values.len()
    }
}

/// Lazily enumerates candidates: for each function (in order), every valid
/// `(d_in, d_out)` pair crossed with every `m`.
pub fn enumerate_candidates<'a>(fns: &'a [SharedFn], grid: &'a GridSpec) -> impl Iterator<Item = Sdc> + 'a {
    fns.iter().flat_map(move |f| {
        let pairs = grid.pairs_for(f.family());
        pairs
            .into_iter()
            .flat_map(move |(d_in, d_out)| grid.m_values.iter().map(move |&m| Sdc::new(f.id(), d_in, d_out, m)))
    })
}
