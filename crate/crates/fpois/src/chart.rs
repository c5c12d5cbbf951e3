//! Coordinate charts.
//!
//! A [`Chart`] is an ordered list of distinct coordinate names modelling a
//! single global chart on R^n. A [`CotangentChart`] pairs a base chart
//! `q1..qn` with the induced chart `q1..qn, p1..pn` on its cotangent space,
//! with base coordinate `i` paired to fiber coordinate `i`.

use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

#[derive(Debug, PartialEq, Eq)]
pub struct Chart {
    coords: Vec<String>,
}

impl Chart {
    pub fn new<S: Into<String>>(coords: Vec<S>) -> Result<Arc<Chart>> {
        let coords: Vec<String> = coords.into_iter().map(|c| c.into()).collect();
        for (i, a) in coords.iter().enumerate() {
            if coords[..i].contains(a) {
                return Err(Error::Parse(format!("duplicate coordinate name `{a}`")));
            }
        }
        if coords.is_empty() {
            return Err(Error::Parse("chart has no coordinates".into()));
        }
        Ok(Arc::new(Chart { coords }))
    }

    /// Base chart `q1..qn`.
    pub fn base(n: usize) -> Arc<Chart> {
        Chart::new((1..=n).map(|i| format!("q{i}")).collect()).expect("nonempty")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.coords[idx]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::UnknownCoordinate(name.to_string()))
    }

    pub fn same(a: &Arc<Chart>, b: &Arc<Chart>) -> bool {
        Arc::ptr_eq(a, b) || a == b
    }

    pub fn require_same(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
        if Chart::same(a, b) {
            Ok(())
        } else {
            Err(Error::ChartMismatch(a.to_string(), b.to_string()))
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coords.join(","))
    }
}

/// The chart of T*R^n adapted to the projection onto the base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CotangentChart {
    base: Arc<Chart>,
    total: Arc<Chart>,
}

impl CotangentChart {
    pub fn new(n: usize) -> CotangentChart {
        assert!(n >= 1, "base dimension must be positive");
        let base = Chart::base(n);
        let mut names: Vec<String> = base.coords().to_vec();
        names.extend((1..=n).map(|i| format!("p{i}")));
        let total = Chart::new(names).expect("nonempty");
        CotangentChart { base, total }
    }

    pub fn base_dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &Arc<Chart> {
        &self.base
    }

    pub fn total(&self) -> &Arc<Chart> {
        &self.total
    }

    /// Total-chart index of base coordinate `i` (0-based).
    pub fn q_index(&self, i: usize) -> usize {
        debug_assert!(i < self.base_dim());
        i
    }

    /// Total-chart index of the fiber coordinate paired with base coordinate `i`.
    pub fn p_index(&self, i: usize) -> usize {
        debug_assert!(i < self.base_dim());
        self.base_dim() + i
    }

    pub fn is_fiber_index(&self, idx: usize) -> bool {
        idx >= self.base_dim()
    }

    /// Indices of all fiber coordinates in the total chart.
    pub fn fiber_indices(&self) -> Vec<usize> {
        (self.base_dim()..2 * self.base_dim()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cotangent_pairing() {
        let cc = CotangentChart::new(3);
        assert_eq!(cc.total().dim(), 6);
        assert_eq!(cc.total().name(cc.p_index(0)), "p1");
        assert_eq!(cc.total().name(cc.q_index(2)), "q3");
        assert!(cc.is_fiber_index(4));
        assert!(!cc.is_fiber_index(2));
    }

    #[test]
    fn duplicate_names_rejected() {
        assert!(Chart::new(vec!["x", "x"]).is_err());
    }
}
