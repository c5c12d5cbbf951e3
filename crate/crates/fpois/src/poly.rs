//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Poly`] is a map from exponent vectors to nonzero rational
//! coefficients over a fixed chart. The map is a `BTreeMap`, so iteration
//! order (and therefore every rendered result) is deterministic. The
//! canonical text form sorts terms in descending graded-lex order and writes
//! each one as `num/den * q1^a * p2^b`.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::scalar::{self, Rat};
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;
use std::sync::OnceLock;

/// Optional degree cap from `FPOIS_MAX_DEGREE`; a safety valve for runaway
/// products. Exceeding it aborts the computation with a recognizable panic
/// message that the CLI maps to an internal-error exit.
fn max_degree() -> Option<u32> {
    static CAP: OnceLock<Option<u32>> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var("FPOIS_MAX_DEGREE")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    chart: Arc<Chart>,
    terms: BTreeMap<Vec<u32>, Rat>,
}

impl Poly {
    pub fn zero(chart: &Arc<Chart>) -> Poly {
        Poly {
            chart: chart.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(chart: &Arc<Chart>, c: Rat) -> Poly {
        let mut p = Poly::zero(chart);
        if !c.is_zero() {
            p.terms.insert(vec![0; chart.dim()], c);
        }
        p
    }

    pub fn one(chart: &Arc<Chart>) -> Poly {
        Poly::constant(chart, scalar::one())
    }

    /// The coordinate monomial `x_idx`.
    pub fn var(chart: &Arc<Chart>, idx: usize) -> Poly {
        let mut exps = vec![0; chart.dim()];
        exps[idx] = 1;
        let mut p = Poly::zero(chart);
        p.terms.insert(exps, scalar::one());
        p
    }

    pub fn monomial(chart: &Arc<Chart>, exps: Vec<u32>, c: Rat) -> Poly {
        assert_eq!(exps.len(), chart.dim(), "exponent vector length");
        let mut p = Poly::zero(chart);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Constant term.
    pub fn constant_part(&self) -> Rat {
        let zero_key = vec![0; self.chart.dim()];
        self.terms.get(&zero_key).cloned().unwrap_or_else(Rat::zero)
    }

    /// Some(c) iff the polynomial is the constant c.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                if e.iter().all(|&k| k == 0) {
                    Some(c.clone())
                } else {
                    None
                }
            }
            _ => None,
        }
    }

    fn insert_term(&mut self, exps: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add_ref(&self, other: &Poly) -> Poly {
        assert!(
            Chart::same(&self.chart, &other.chart),
            "poly add across charts"
        );
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub_ref(&self, other: &Poly) -> Poly {
        assert!(
            Chart::same(&self.chart, &other.chart),
            "poly sub across charts"
        );
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn neg_ref(&self) -> Poly {
        let mut out = Poly::zero(&self.chart);
        for (e, c) in &self.terms {
            out.terms.insert(e.clone(), -c.clone());
        }
        out
    }

    pub fn mul_ref(&self, other: &Poly) -> Poly {
        assert!(
            Chart::same(&self.chart, &other.chart),
            "poly mul across charts"
        );
        let mut out = Poly::zero(&self.chart);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                if let Some(cap) = max_degree() {
                    let deg: u32 = exps.iter().sum();
                    if deg > cap {
                        panic!("FPOIS_MAX_DEGREE exceeded: degree {deg} > cap {cap}");
                    }
                }
                out.insert_term(exps, ca * cb);
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.chart);
        }
        let mut out = Poly::zero(&self.chart);
        for (e, k) in &self.terms {
            out.terms.insert(e.clone(), k * c);
        }
        out
    }

    /// Checked addition for the public boundary; internal code uses `+`.
    pub fn checked_add(&self, other: &Poly) -> Result<Poly> {
        Chart::require_same(&self.chart, &other.chart)?;
        Ok(self.add_ref(other))
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly> {
        Chart::require_same(&self.chart, &other.chart)?;
        Ok(self.mul_ref(other))
    }

    /// Exact partial derivative with respect to the coordinate at `idx`.
    pub fn partial(&self, idx: usize) -> Poly {
        assert!(idx < self.chart.dim(), "coordinate index in range");
        let mut out = Poly::zero(&self.chart);
        for (e, c) in &self.terms {
            let k = e[idx];
            if k == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[idx] = k - 1;
            out.insert_term(exps, c * scalar::int(k as i64));
        }
        out
    }

    /// Partial derivative by coordinate name.
    pub fn partial_by_name(&self, name: &str) -> Result<Poly> {
        let idx = self.chart.index_of(name)?;
        Ok(self.partial(idx))
    }

    /// Degree in the coordinates listed in `idxs`.
    pub fn degree_in(&self, idxs: &[usize], exps: &[u32]) -> u32 {
        let _ = self;
        idxs.iter().map(|&i| exps[i]).sum()
    }

    /// The scalar integral `f |-> int_0^1 t^{k-1} f(..., t*x_fiber, ...) dt`,
    /// taken exactly: a monomial of degree `d` in the fiber coordinates is
    /// scaled by `1/(k+d)`.
    pub fn fiber_radial_integral(&self, fiber_idxs: &[usize], k: u32) -> Poly {
        assert!(k >= 1, "radial weight k must be >= 1");
        let mut out = Poly::zero(&self.chart);
        for (e, c) in &self.terms {
            let d = self.degree_in(fiber_idxs, e);
            let w = Rat::new(1.into(), (k as i64 + d as i64).into());
            out.insert_term(e.clone(), c * w);
        }
        out
    }

    /// True iff no term involves any of the given coordinates.
    pub fn independent_of(&self, idxs: &[usize]) -> bool {
        self.terms.keys().all(|e| idxs.iter().all(|&i| e[i] == 0))
    }

    /// Set the listed coordinates to zero.
    pub fn restrict_to_zero(&self, idxs: &[usize]) -> Poly {
        let mut out = Poly::zero(&self.chart);
        for (e, c) in &self.terms {
            if idxs.iter().all(|&i| e[i] == 0) {
                out.insert_term(e.clone(), c.clone());
            }
        }
        out
    }

    /// Substitute the coordinate at `idx` by `g` (a polynomial on the same
    /// chart).
    pub fn substitute(&self, idx: usize, g: &Poly) -> Poly {
        assert!(Chart::same(&self.chart, &g.chart), "substitution chart");
        let max_pow = self.terms.keys().map(|e| e[idx]).max().unwrap_or(0) as usize;
        let mut powers: Vec<Poly> = Vec::with_capacity(max_pow + 1);
        powers.push(Poly::one(&self.chart));
        for _ in 0..max_pow {
            powers.push(powers.last().unwrap().mul_ref(g));
        }
        let mut out = Poly::zero(&self.chart);
        for (e, c) in &self.terms {
            let mut rest = e.clone();
            let k = rest[idx] as usize;
            rest[idx] = 0;
            let base = Poly::monomial(&self.chart, rest, c.clone());
            out = out.add_ref(&base.mul_ref(&powers[k]));
        }
        out
    }

    /// Reinterpret on another chart given a map from old coordinate index to
    /// new coordinate index. Used for pullbacks along projections.
    pub fn map_chart(&self, new_chart: &Arc<Chart>, index_map: &[usize]) -> Poly {
        assert_eq!(index_map.len(), self.chart.dim());
        let mut out = Poly::zero(new_chart);
        for (e, c) in &self.terms {
            let mut exps = vec![0u32; new_chart.dim()];
            for (old, &new) in index_map.iter().enumerate() {
                exps[new] += e[old];
            }
            out.insert_term(exps, c.clone());
        }
        out
    }

    /// Terms in descending graded-lex order (total degree first, then
    /// lexicographic on the exponent vector).
    pub fn sorted_terms(&self) -> Vec<(&Vec<u32>, &Rat)> {
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(ea, _), (eb, _)| {
            let da: u32 = ea.iter().sum();
            let db: u32 = eb.iter().sum();
            db.cmp(&da).then_with(|| eb.cmp(ea))
        });
        terms
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.add_ref(rhs)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.sub_ref(rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_ref(rhs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.neg_ref()
    }
}

fn render_monomial(chart: &Chart, exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in exps.iter().enumerate() {
        if k == 1 {
            parts.push(chart.name(i).to_string());
        } else if k > 1 {
            parts.push(format!("{}^{}", chart.name(i), k));
        }
    }
    parts.join(" * ")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut out = String::new();
        for (i, (exps, coeff)) in self.sorted_terms().into_iter().enumerate() {
            let mono = render_monomial(&self.chart, exps);
            let abs = coeff.abs();
            let body = if mono.is_empty() {
                scalar::render(&abs)
            } else if abs.is_one() {
                mono
            } else {
                format!("{} * {}", scalar::render(&abs), mono)
            };
            if i == 0 {
                if coeff.is_negative() {
                    out.push('-');
                }
            } else if coeff.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            out.push_str(&body);
        }
        write!(f, "{out}")
    }
}

/// Parse the canonical text form produced by `Display`.
pub fn parse_poly(chart: &Arc<Chart>, input: &str) -> Result<Poly> {
    let s = input.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    if s == "0" {
        return Ok(Poly::zero(chart));
    }
    // Split into signed terms at top level; terms contain no parentheses.
    let mut terms: Vec<(bool, String)> = Vec::new();
    let mut cur = String::new();
    let mut neg = s.starts_with('-');
    let body = s.strip_prefix('-').unwrap_or(s);
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if (c == '+' || c == '-') && i > 0 && chars[i - 1] == ' ' {
            terms.push((neg, cur.trim().to_string()));
            cur = String::new();
            neg = c == '-';
        } else {
            cur.push(c);
        }
        i += 1;
    }
    terms.push((neg, cur.trim().to_string()));

    let mut out = Poly::zero(chart);
    for (negated, term) in terms {
        if term.is_empty() {
            return Err(Error::Parse(format!("empty term in `{input}`")));
        }
        let mut coeff = scalar::one();
        let mut exps = vec![0u32; chart.dim()];
        for factor in term.split('*') {
            let factor = factor.trim();
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in `{term}`")));
            }
            if factor
                .chars()
                .next()
                .map(|c| c.is_ascii_digit())
                .unwrap_or(false)
            {
                let c = scalar::parse(factor)
                    .ok_or_else(|| Error::Parse(format!("bad coefficient `{factor}`")))?;
                coeff *= c;
            } else {
                let (name, pow) = match factor.split_once('^') {
                    Some((n, p)) => {
                        let pow: u32 = p
                            .trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad exponent in `{factor}`")))?;
                        (n.trim(), pow)
                    }
                    None => (factor, 1),
                };
                let idx = chart.index_of(name)?;
                exps[idx] += pow;
            }
        }
        if negated {
            coeff = -coeff;
        }
        out.insert_term(exps, coeff);
    }
    Ok(out)
}
