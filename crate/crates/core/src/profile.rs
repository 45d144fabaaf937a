//! Per-function distance profiles of columns.
//!
//! Assessment and detection-set computation ask the same two questions of a
//! column many times over a grid of radii: how many values lie within
//! `d_in`, and does any value lie beyond `d_out`. Sorting a column's
//! distances once answers both in logarithmic and constant time.

use rayon::prelude::*;

use crate::candidates::Sdc;
use crate::corpus::NormalizedValue;
use crate::domain::{DomainEvalFn, Family};

#[derive(Debug, Clone)]
pub(crate) struct ColumnProfile {
    sorted: Vec<f64>,
}

impl ColumnProfile {
    pub fn new(f: &DomainEvalFn, values: &[NormalizedValue]) -> Self {
        let mut sorted: Vec<f64> = values.iter().map(|v| f.eval_distance(v)).collect();
        sorted.sort_by(f64::total_cmp);
        ColumnProfile { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn inside(&self, d_in: f64) -> usize {
        self.sorted.partition_point(|&d| d <= d_in)
    }

    pub fn covered(&self, sdc: &Sdc) -> bool {
        sdc.applies(self.inside(sdc.d_in), self.len())
    }

    pub fn triggered(&self, sdc: &Sdc, family: Family) -> bool {
        self.sorted.last().is_some_and(|&max| sdc.outside(family, max))
    }
}

pub(crate) fn profile_columns(f: &DomainEvalFn, columns: &[Vec<NormalizedValue>]) -> Vec<ColumnProfile> {
    columns.par_iter().map(|values| ColumnProfile::new(f, values)).collect()
}
