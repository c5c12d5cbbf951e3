//! The Chevalley-Eilenberg multiderivation complex on the cotangent chart,
//! its isomorphism onto vertical forms, and the contracting homotopy.
//!
//! A degree-k cochain attaches a polynomial in all chart coordinates to each
//! strictly increasing tuple of base directions. The differential is
//!
//! ```text
//! (delta D)^{I_{k+1}} = sum_l (-1)^{l-1} d D^{I^l_k} / dp_{i_l}
//! ```
//!
//! which is the coordinate form of the Chevalley-Eilenberg differential taken
//! with the undeformed brackets (zero on the base, canonical against
//! pullbacks). Relabeling base directions `d/dq_I` as vertical differentials
//! `dp_I` turns delta into the vertical de Rham differential; the fiberwise
//! Poincare homotopy then transports back to a contracting homotopy `h` with
//! `delta h + h delta = id` in degrees 1..n, exactly.
//!
//! In degree 0 the identity fails by design: `h(delta f) = f - f|_{p=0}`,
//! the restriction to the zero section. Solvers only invoke `h` in degrees
//! 1 and 2.

use crate::chart::CotangentChart;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Rat;
use crate::tensor::MultiVector;
use std::collections::BTreeMap;
use std::fmt;

/// Element of the degree-k multiderivation complex: base-direction tuples
/// with coefficients in the full chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CECochain {
    cc: CotangentChart,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly>,
}

/// Vertical differential form: fiber-direction tuples (stored by base index)
/// with coefficients in the full chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerticalForm {
    cc: CotangentChart,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly>,
}

macro_rules! fmt_tuples {
    ($prefix:literal) => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if self.degree == 0 {
                return write!(f, "{}", self.component(&[]));
            }
            if self.is_zero() {
                return write!(f, "0");
            }
            let mut first = true;
            for (t, c) in self.comps.iter() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                let dirs: Vec<String> =
                    t.iter().map(|&i| format!("{}{}", $prefix, i + 1)).collect();
                write!(f, "({c}) * {}", dirs.join("∧"))?;
            }
            Ok(())
        }
    };
}

fn insert_sparse(map: &mut BTreeMap<Vec<usize>, Poly>, tuple: Vec<usize>, c: Poly) {
    if c.is_zero() {
        return;
    }
    match map.entry(tuple) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            let sum = o.get().add_ref(&c);
            if sum.is_zero() {
                o.remove();
            } else {
                *o.get_mut() = sum;
            }
        }
    }
}

impl CECochain {
    pub fn zero(cc: &CotangentChart, degree: usize) -> CECochain {
        assert!(
            degree <= cc.base_dim(),
            "cochain degree bounded by base dim"
        );
        CECochain {
            cc: cc.clone(),
            degree,
            comps: BTreeMap::new(),
        }
    }

    /// Degree-0 cochain from a function on the total chart.
    pub fn from_function(cc: &CotangentChart, f: Poly) -> CECochain {
        let mut out = CECochain::zero(cc, 0);
        out.add_term(Vec::new(), f);
        out
    }

    /// Degree-1 cochain from per-direction components.
    pub fn from_components(cc: &CotangentChart, comps: Vec<Poly>) -> CECochain {
        assert_eq!(comps.len(), cc.base_dim());
        let mut out = CECochain::zero(cc, 1);
        for (i, c) in comps.into_iter().enumerate() {
            out.add_term(vec![i], c);
        }
        out
    }

    pub fn add_term(&mut self, tuple: Vec<usize>, c: Poly) {
        debug_assert_eq!(tuple.len(), self.degree);
        debug_assert!(tuple.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(tuple.iter().all(|&i| i < self.cc.base_dim()));
        insert_sparse(&mut self.comps, tuple, c);
    }

    pub fn chart(&self) -> &CotangentChart {
        &self.cc
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, tuple: &[usize]) -> Poly {
        self.comps
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.cc.total()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.comps.iter()
    }

    pub fn add(&self, other: &CECochain) -> CECochain {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (t, c) in &other.comps {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CECochain) -> CECochain {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CECochain {
        CECochain {
            cc: self.cc.clone(),
            degree: self.degree,
            comps: self
                .comps
                .iter()
                .map(|(t, c)| (t.clone(), c.neg_ref()))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> CECochain {
        let mut out = CECochain::zero(&self.cc, self.degree);
        for (t, k) in &self.comps {
            out.add_term(t.clone(), k.scale(c));
        }
        out
    }

    /// Multiply by a function on the total chart (the module structure used
    /// for the linearity-over-the-base laws).
    pub fn mul_poly(&self, f: &Poly) -> CECochain {
        let mut out = CECochain::zero(&self.cc, self.degree);
        for (t, c) in &self.comps {
            out.add_term(t.clone(), c.mul_ref(f));
        }
        out
    }
}

impl fmt::Display for CECochain {
    fmt_tuples!("∂q");
}

impl VerticalForm {
    pub fn zero(cc: &CotangentChart, degree: usize) -> VerticalForm {
        assert!(degree <= cc.base_dim());
        VerticalForm {
            cc: cc.clone(),
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn add_term(&mut self, tuple: Vec<usize>, c: Poly) {
        debug_assert_eq!(tuple.len(), self.degree);
        debug_assert!(tuple.windows(2).all(|w| w[0] < w[1]));
        insert_sparse(&mut self.comps, tuple, c);
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn component(&self, tuple: &[usize]) -> Poly {
        self.comps
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.cc.total()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.comps.iter()
    }

    pub fn add(&self, other: &VerticalForm) -> VerticalForm {
        assert_eq!(self.degree, other.degree);
        let mut out = self.clone();
        for (t, c) in &other.comps {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &VerticalForm) -> VerticalForm {
        let mut out = self.clone();
        for (t, c) in &other.comps {
            out.add_term(t.clone(), c.neg_ref());
        }
        out
    }
}

impl fmt::Display for VerticalForm {
    fmt_tuples!("dp");
}

/// The Chevalley-Eilenberg differential.
pub fn ce_delta(d: &CECochain) -> Result<CECochain> {
    let cc = d.chart();
    let n = cc.base_dim();
    if d.degree() >= n {
        return Err(Error::Degree(format!(
            "delta undefined on top degree {} (base dimension {n})",
            d.degree()
        )));
    }
    let mut out = CECochain::zero(cc, d.degree() + 1);
    // (delta D)^{I} = sum_l (-1)^{l-1} dD^{I minus i_l} / dp_{i_l}
    for tuple in increasing_tuples(n, d.degree() + 1) {
        let mut acc = Poly::zero(cc.total());
        for (l, &i) in tuple.iter().enumerate() {
            let mut rest = tuple.clone();
            rest.remove(l);
            let part = d.component(&rest).partial(cc.p_index(i));
            acc = if l % 2 == 0 {
                acc.add_ref(&part)
            } else {
                acc.sub_ref(&part)
            };
        }
        out.add_term(tuple, acc);
    }
    Ok(out)
}

/// All strictly increasing tuples of the given length from `0..n`.
pub fn increasing_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(n: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(n, len, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(n, len, 0, &mut cur, &mut out);
    out
}

/// Relabel base directions as vertical differentials.
pub fn psi(d: &CECochain) -> VerticalForm {
    let mut out = VerticalForm::zero(d.chart(), d.degree());
    for (t, c) in d.iter() {
        out.add_term(t.clone(), c.clone());
    }
    out
}

/// Inverse relabeling.
pub fn psi_inv(eta: &VerticalForm) -> CECochain {
    let mut out = CECochain::zero(&eta.cc, eta.degree());
    for (t, c) in eta.iter() {
        out.add_term(t.clone(), c.clone());
    }
    out
}

/// Vertical de Rham differential.
pub fn d_ver(eta: &VerticalForm) -> VerticalForm {
    let cc = eta.cc.clone();
    let n = cc.base_dim();
    let mut out = VerticalForm::zero(&cc, eta.degree() + 1);
    for (t, c) in eta.iter() {
        for r in 0..n {
            if t.contains(&r) {
                continue;
            }
            let dc = c.partial(cc.p_index(r));
            if dc.is_zero() {
                continue;
            }
            // insert r in front, then sort: sign = (-1)^{#elements < r in t}
            let mut tuple: Vec<usize> = t.clone();
            let pos = tuple.iter().position(|&j| j > r).unwrap_or(tuple.len());
            tuple.insert(pos, r);
            let signed = if pos % 2 == 0 { dc } else { dc.neg_ref() };
            out.add_term(tuple, signed);
        }
    }
    out
}

/// Fiberwise Poincare homotopy on vertical forms of degree >= 1.
pub fn vertical_homotopy(eta: &VerticalForm) -> Result<VerticalForm> {
    let k = eta.degree();
    if k == 0 {
        return Err(Error::Degree("vertical homotopy needs degree >= 1".into()));
    }
    let cc = eta.cc.clone();
    let fiber = cc.fiber_indices();
    let mut out = VerticalForm::zero(&cc, k - 1);
    for (t, c) in eta.iter() {
        let integrated = c.fiber_radial_integral(&fiber, k as u32);
        for (l, &i) in t.iter().enumerate() {
            let mut rest = t.clone();
            rest.remove(l);
            let p_i = Poly::var(cc.total(), cc.p_index(i));
            let mut term = integrated.mul_ref(&p_i);
            if l % 2 == 1 {
                term = term.neg_ref();
            }
            out.add_term(rest, term);
        }
    }
    Ok(out)
}

/// The contracting homotopy `h = Psi^{-1} h_ver Psi` on cochains of degree
/// >= 1.
pub fn ce_homotopy(d: &CECochain) -> Result<CECochain> {
    if d.degree() == 0 {
        return Err(Error::Degree("homotopy needs degree >= 1".into()));
    }
    Ok(psi_inv(&vertical_homotopy(&psi(d))?))
}

/// Flat-connection horizontal lift: components unchanged, base directions
/// become coordinate directions on the total chart.
pub fn horizontal_lift(d: &CECochain) -> MultiVector {
    let cc = d.chart();
    let mut out = MultiVector::zero(cc.total(), d.degree());
    for (t, c) in d.iter() {
        let total_tuple: Vec<usize> = t.iter().map(|&i| cc.q_index(i)).collect();
        out = out.add(&MultiVector::single(cc.total(), &total_tuple, c.clone()));
    }
    out
}

/// ρ-projection of a multivector on the total chart back to a cochain: keeps
/// pure base-direction components.
pub fn project_to_cochain(x: &MultiVector, cc: &CotangentChart) -> CECochain {
    let mut out = CECochain::zero(cc, x.degree());
    for (t, c) in x.iter() {
        if t.iter().all(|&i| !cc.is_fiber_index(i)) {
            out.add_term(t.clone(), c.clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_poly;
    use crate::scalar::frac;

    fn cc2() -> CotangentChart {
        CotangentChart::new(2)
    }

    #[test]
    fn delta_formula_unfold() {
        let cc = cc2();
        let ch = cc.total();
        // D = p2 d/dq1 -> delta D = -d1^d2 (coefficient of the (0,1) tuple)
        let d = CECochain::from_components(&cc, vec![Poly::var(ch, cc.p_index(1)), Poly::zero(ch)]);
        let dd = ce_delta(&d).unwrap();
        assert_eq!(dd.component(&[0, 1]), Poly::one(ch).neg_ref());
        // D = p1 d/dq1 is closed
        let closed =
            CECochain::from_components(&cc, vec![Poly::var(ch, cc.p_index(0)), Poly::zero(ch)]);
        assert!(ce_delta(&closed).unwrap().is_zero());
        // base-only coefficients: closed
        let basec = CECochain::from_components(
            &cc,
            vec![
                parse_poly(ch, "q1 * q2").unwrap(),
                parse_poly(ch, "q2^2").unwrap(),
            ],
        );
        assert!(ce_delta(&basec).unwrap().is_zero());
    }

    #[test]
    fn delta_rejects_top_degree() {
        let cc = cc2();
        let mut d = CECochain::zero(&cc, 2);
        d.add_term(vec![0, 1], Poly::one(cc.total()));
        assert!(ce_delta(&d).is_err());
    }

    #[test]
    fn psi_relabeling_and_chain_map() {
        let cc = cc2();
        let ch = cc.total();
        let d = CECochain::from_components(&cc, vec![Poly::var(ch, cc.p_index(1)), Poly::zero(ch)]);
        // Psi(p2 d/dq1) = p2 dp1
        let eta = psi(&d);
        assert_eq!(eta.component(&[0]), Poly::var(ch, cc.p_index(1)));
        assert_eq!(psi_inv(&eta), d);
        // d_ver Psi = Psi delta
        let lhs = d_ver(&eta);
        let rhs = psi(&ce_delta(&d).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn vertical_homotopy_weights() {
        let cc = cc2();
        let ch = cc.total();
        // eta = dp1 -> p1
        let mut eta = VerticalForm::zero(&cc, 1);
        eta.add_term(vec![0], Poly::one(ch));
        let h = vertical_homotopy(&eta).unwrap();
        assert_eq!(h.component(&[]), Poly::var(ch, cc.p_index(0)));
        // eta = p2 dp1 -> p1 p2 / 2
        let mut eta = VerticalForm::zero(&cc, 1);
        eta.add_term(vec![0], Poly::var(ch, cc.p_index(1)));
        let h = vertical_homotopy(&eta).unwrap();
        assert_eq!(
            h.component(&[]),
            parse_poly(ch, "p1 * p2").unwrap().scale(&frac(1, 2))
        );
        // eta = dp1^dp2 -> (p1 dp2 - p2 dp1)/2
        let mut eta = VerticalForm::zero(&cc, 2);
        eta.add_term(vec![0, 1], Poly::one(ch));
        let h = vertical_homotopy(&eta).unwrap();
        assert_eq!(
            h.component(&[1]),
            Poly::var(ch, cc.p_index(0)).scale(&frac(1, 2))
        );
        assert_eq!(
            h.component(&[0]),
            Poly::var(ch, cc.p_index(1)).scale(&frac(-1, 2))
        );
    }

    #[test]
    fn homotopy_identity_degree_one() {
        let cc = cc2();
        let ch = cc.total();
        let d = CECochain::from_components(
            &cc,
            vec![
                parse_poly(ch, "p2^2 * q1 + p1").unwrap(),
                parse_poly(ch, "p1 * p2 - q2").unwrap(),
            ],
        );
        // h(delta D) + delta(h D) = D
        let hd = ce_homotopy(&d).unwrap();
        let dhd = ce_delta(&hd).unwrap();
        let dd = ce_delta(&d).unwrap();
        let hdd = ce_homotopy(&dd).unwrap();
        assert_eq!(dhd.add(&hdd), d);
    }

    #[test]
    fn homotopy_solves_closed_degree_one() {
        let cc = cc2();
        let ch = cc.total();
        // closed degree-1 cochain -> b with delta b = D
        let d = CECochain::from_components(
            &cc,
            vec![
                parse_poly(ch, "p1 * p2").unwrap(),
                parse_poly(ch, "1/2 * p1^2").unwrap(),
            ],
        );
        // delta over tuple (0,1): d/dp1 of (p1^2/2) - d/dp2 of (p1 p2) = p1 - p1 = 0
        assert!(ce_delta(&d).unwrap().is_zero());
        let b = ce_homotopy(&d).unwrap();
        let back = ce_delta(&b).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn degree_zero_defect_is_zero_section_restriction() {
        let cc = cc2();
        let ch = cc.total();
        let f = parse_poly(ch, "q1^2 + p1 * q2 + 3 * p2^2").unwrap();
        let d = ce_delta(&CECochain::from_function(&cc, f.clone())).unwrap();
        let hdf = ce_homotopy(&d).unwrap().component(&[]);
        let fiber = cc.fiber_indices();
        let expect = f.sub_ref(&f.restrict_to_zero(&fiber));
        assert_eq!(hdf, expect);
    }

    #[test]
    fn homotopy_linear_over_base() {
        let cc = cc2();
        let ch = cc.total();
        let m = parse_poly(ch, "q1^2 - q2").unwrap();
        let d = CECochain::from_components(
            &cc,
            vec![
                parse_poly(ch, "p1 + p2^2").unwrap(),
                parse_poly(ch, "p1 * p2").unwrap(),
            ],
        );
        let lhs = ce_homotopy(&d.mul_poly(&m)).unwrap();
        let rhs = ce_homotopy(&d).unwrap().mul_poly(&m);
        assert_eq!(lhs, rhs);
        let dl = ce_delta(&d.mul_poly(&m)).unwrap();
        let dr = ce_delta(&d).unwrap().mul_poly(&m);
        assert_eq!(dl, dr);
    }

    #[test]
    fn lift_and_project() {
        let cc = cc2();
        let ch = cc.total();
        let d = CECochain::from_components(
            &cc,
            vec![Poly::var(ch, cc.p_index(0)), parse_poly(ch, "q2").unwrap()],
        );
        let lifted = horizontal_lift(&d);
        // lift(p1 d/dq1 + q2 d/dq2) keeps coefficients, q-directions only
        assert_eq!(lifted.component(&[0]), Poly::var(ch, cc.p_index(0)));
        assert_eq!(lifted.component(&[1]), parse_poly(ch, "q2").unwrap());
        assert_eq!(project_to_cochain(&lifted, &cc), d);
    }
}
