//! Job specifications: the line-oriented JSON documents the CLI consumes.
//!
//! Coefficients are written in the canonical polynomial text form, so
//! fixtures are hand-writable and diffs stay readable.

use fpois::chart::{Chart, CotangentChart};
use fpois::error::Error as FpError;
use fpois::formal::{FormalPoisson, FormalTwoForm};
use fpois::poly::parse_poly;
use fpois::series::FormalSeries;
use fpois::tensor::{DiffForm, MultiVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    /// 1-based index of the first direction.
    pub i: usize,
    /// 1-based index of the second direction.
    pub j: usize,
    /// Canonical polynomial text over the base chart.
    pub coeff: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderSpec {
    pub order: usize,
    pub terms: Vec<TermSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JobSpec {
    pub dimension: usize,
    pub truncation_order: usize,
    #[serde(default)]
    pub pi: Vec<OrderSpec>,
    #[serde(default, rename = "B")]
    pub b: Vec<OrderSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl JobSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.dimension == 0 {
            return Err("dimension must be positive".into());
        }
        if self.truncation_order == 0 {
            return Err("truncation_order must be at least 1".into());
        }
        for group in self.pi.iter().chain(self.b.iter()) {
            if group.order > self.truncation_order {
                return Err(format!(
                    "order {} exceeds truncation order {}",
                    group.order, self.truncation_order
                ));
            }
            for t in &group.terms {
                if t.i == 0 || t.j == 0 || t.i > self.dimension || t.j > self.dimension {
                    return Err(format!(
                        "term indices ({}, {}) outside 1..{}",
                        t.i, t.j, self.dimension
                    ));
                }
                if t.i == t.j {
                    return Err(format!("term indices ({}, {}) coincide", t.i, t.j));
                }
            }
        }
        Ok(())
    }

    pub fn cotangent(&self) -> CotangentChart {
        CotangentChart::new(self.dimension)
    }

    /// The bivector series of the `pi` block (not validated as Poisson).
    pub fn pi_series(&self, base: &Arc<Chart>) -> Result<FormalSeries<MultiVector>, FpError> {
        let n = self.truncation_order;
        let mut series = FormalSeries::constant(MultiVector::zero(base, 2), n);
        for group in &self.pi {
            let mut c = series.coeff(group.order).clone();
            for t in &group.terms {
                let coeff = parse_poly(base, &t.coeff)?;
                c = c.add(&MultiVector::single(base, &[t.i - 1, t.j - 1], coeff));
            }
            *series.coeff_mut(group.order) = c;
        }
        Ok(series)
    }

    pub fn poisson(&self, base: &Arc<Chart>) -> Result<FormalPoisson, FpError> {
        FormalPoisson::new(self.pi_series(base)?)
    }

    /// The 2-form series of the `B` block (closedness checked by consumers).
    pub fn b_series(&self, base: &Arc<Chart>) -> Result<FormalTwoForm, FpError> {
        let n = self.truncation_order;
        let mut series = FormalSeries::constant(DiffForm::zero(base, 2), n);
        for group in &self.b {
            let mut c = series.coeff(group.order).clone();
            for t in &group.terms {
                let coeff = parse_poly(base, &t.coeff)?;
                c = c.add(&DiffForm::single(base, &[t.i - 1, t.j - 1], coeff));
            }
            *series.coeff_mut(group.order) = c;
        }
        Ok(series)
    }
}

pub fn load_job(path: &std::path::Path) -> Result<JobSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let job: JobSpec =
        serde_json::from_str(&text).map_err(|e| format!("malformed job spec: {e}"))?;
    job.validate()?;
    Ok(job)
}
