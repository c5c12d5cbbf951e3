//! Multivector fields and differential forms on a chart, with the exterior
//! and Schouten calculus.
//!
//! Degree-k tensors are sparse maps from strictly increasing coordinate-index
//! tuples to polynomial coefficients; antisymmetry is normalized away at
//! storage time. The zero tensor keeps its degree so arithmetic stays total.
//!
//! Normative conventions (all derived values elsewhere assume them):
//!  * contraction: `i_a(X ^ Y) = a(X) Y - a(Y) X`, extended as a degree -1
//!    derivation in the wedge slot;
//!  * Schouten bracket: Lie bracket on vector fields, directional derivative
//!    against functions, extended by graded Leibniz
//!    `[A, B ^ C] = [A,B] ^ C + (-1)^{(a-1) b} B ^ [A,C]`.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Rat;
use crate::series::Coeff;
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Merge two strictly increasing disjoint tuples, returning the merged tuple
/// and the sign of the permutation sorting their concatenation. `None` if
/// they overlap.
fn merge_tuples(a: &[usize], b: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut sign = 1i32;
    let mut i = 0;
    let mut j = 0;
    while i < a.len() && j < b.len() {
        if a[i] == b[j] {
            return None;
        }
        if a[i] < b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            // b[j] jumps over the remaining a[i..]
            if (a.len() - i) % 2 == 1 {
                sign = -sign;
            }
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, sign))
}

/// Shared sparse storage for multivectors and forms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    chart: Arc<Chart>,
    degree: usize,
    comps: BTreeMap<Vec<usize>, Poly>,
}

impl Components {
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Components {
        Components {
            chart: chart.clone(),
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
        self.comps.iter()
    }

    pub fn component(&self, tuple: &[usize]) -> Poly {
        self.comps
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| Poly::zero(&self.chart))
    }

    /// Add `c` to the component at a strictly increasing tuple.
    pub fn add_term(&mut self, tuple: Vec<usize>, c: Poly) {
        debug_assert_eq!(tuple.len(), self.degree);
        debug_assert!(tuple.windows(2).all(|w| w[0] < w[1]), "sorted tuple");
        if c.is_zero() {
            return;
        }
        match self.comps.entry(tuple) {
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

    /// Add `c` against an arbitrary (unsorted, possibly repeating) tuple,
    /// normalizing by antisymmetry.
    pub fn add_term_unsorted(&mut self, tuple: &[usize], c: Poly) {
        if c.is_zero() {
            return;
        }
        let mut idx: Vec<usize> = tuple.to_vec();
        // insertion sort, tracking parity
        let mut sign = 1i32;
        for i in 1..idx.len() {
            let mut j = i;
            while j > 0 && idx[j - 1] > idx[j] {
                idx.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return;
        }
        let signed = if sign < 0 { c.neg_ref() } else { c };
        self.add_term(idx, signed);
    }

    pub fn add(&self, other: &Components) -> Components {
        assert!(Chart::same(&self.chart, &other.chart), "tensor chart");
        assert_eq!(self.degree, other.degree, "tensor degree");
        let mut out = self.clone();
        for (t, c) in &other.comps {
            out.add_term(t.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Components {
        let mut out = Components::zero(&self.chart, self.degree);
        for (t, c) in &self.comps {
            out.comps.insert(t.clone(), c.neg_ref());
        }
        out
    }

    pub fn sub(&self, other: &Components) -> Components {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rat) -> Components {
        let mut out = Components::zero(&self.chart, self.degree);
        if c.is_zero() {
            return out;
        }
        for (t, k) in &self.comps {
            out.comps.insert(t.clone(), k.scale(c));
        }
        out
    }

    pub fn mul_poly(&self, f: &Poly) -> Components {
        let mut out = Components::zero(&self.chart, self.degree);
        for (t, c) in &self.comps {
            let prod = c.mul_ref(f);
            if !prod.is_zero() {
                out.comps.insert(t.clone(), prod);
            }
        }
        out
    }

    fn wedge(&self, other: &Components) -> Components {
        assert!(Chart::same(&self.chart, &other.chart), "wedge chart");
        let deg = self.degree + other.degree;
        let mut out = Components::zero(&self.chart, deg);
        if deg > self.chart.dim() {
            return out;
        }
        for (ta, ca) in &self.comps {
            for (tb, cb) in &other.comps {
                if let Some((t, sign)) = merge_tuples(ta, tb) {
                    let mut c = ca.mul_ref(cb);
                    if sign < 0 {
                        c = c.neg_ref();
                    }
                    out.add_term(t, c);
                }
            }
        }
        out
    }

    /// Contract a degree-1 dual object with coefficients `w` (indexed by
    /// coordinate) into this tensor: sum over positions with alternating
    /// signs.
    fn contract_with(&self, w: &Components) -> Components {
        assert!(Chart::same(&self.chart, &w.chart), "contract chart");
        assert_eq!(w.degree, 1, "contraction argument has degree 1");
        assert!(self.degree >= 1, "cannot contract a degree-0 tensor");
        let mut out = Components::zero(&self.chart, self.degree - 1);
        for (t, c) in &self.comps {
            for (l, &i) in t.iter().enumerate() {
                let wi = w.component(&[i]);
                if wi.is_zero() {
                    continue;
                }
                let mut rest: Vec<usize> = t.clone();
                rest.remove(l);
                let mut coeff = c.mul_ref(&wi);
                if l % 2 == 1 {
                    coeff = coeff.neg_ref();
                }
                out.add_term(rest, coeff);
            }
        }
        out
    }

    fn render(&self, dir: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            let c = self.component(&[]);
            return write!(f, "{c}");
        }
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (t, c) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let dirs: Vec<String> = t
                .iter()
                .map(|&i| format!("{dir}{}", self.chart.name(i)))
                .collect();
            write!(f, "({c}) * {}", dirs.join("∧"))?;
        }
        Ok(())
    }
}

/// Degree-k multivector field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiVector(pub Components);

/// Degree-k differential form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffForm(pub Components);

macro_rules! tensor_common {
    ($T:ident) => {
        impl $T {
            pub fn zero(chart: &Arc<Chart>, degree: usize) -> $T {
                $T(Components::zero(chart, degree))
            }

            pub fn from_function(f: Poly) -> $T {
                let mut c = Components::zero(f.chart(), 0);
                c.add_term(Vec::new(), f);
                $T(c)
            }

            pub fn single(chart: &Arc<Chart>, tuple: &[usize], c: Poly) -> $T {
                let mut out = Components::zero(chart, tuple.len());
                out.add_term_unsorted(tuple, c);
                $T(out)
            }

            pub fn chart(&self) -> &Arc<Chart> {
                self.0.chart()
            }

            pub fn degree(&self) -> usize {
                self.0.degree()
            }

            pub fn is_zero(&self) -> bool {
                self.0.is_zero()
            }

            pub fn component(&self, tuple: &[usize]) -> Poly {
                self.0.component(tuple)
            }

            pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, &Poly)> {
                self.0.iter()
            }

            pub fn add(&self, other: &$T) -> $T {
                $T(self.0.add(&other.0))
            }

            pub fn sub(&self, other: &$T) -> $T {
                $T(self.0.sub(&other.0))
            }

            pub fn neg(&self) -> $T {
                $T(self.0.neg())
            }

            pub fn scale(&self, c: &Rat) -> $T {
                $T(self.0.scale(c))
            }

            pub fn mul_poly(&self, f: &Poly) -> $T {
                $T(self.0.mul_poly(f))
            }

            pub fn wedge(&self, other: &$T) -> $T {
                $T(self.0.wedge(&other.0))
            }

            /// As a degree-0 tensor, the underlying function.
            pub fn as_function(&self) -> Poly {
                assert_eq!(self.degree(), 0, "degree-0 tensor expected");
                self.component(&[])
            }
        }

        impl Coeff for $T {
            fn add_c(&self, other: &Self) -> Self {
                self.add(other)
            }
            fn neg_c(&self) -> Self {
                self.neg()
            }
            fn scale_c(&self, c: &Rat) -> Self {
                self.scale(c)
            }
            fn is_zero_c(&self) -> bool {
                self.is_zero()
            }
            fn zero_like(&self) -> Self {
                $T::zero(self.chart(), self.degree())
            }
        }
    };
}

tensor_common!(MultiVector);
tensor_common!(DiffForm);

impl MultiVector {
    /// The coordinate vector field at `idx`.
    pub fn coordinate(chart: &Arc<Chart>, idx: usize) -> MultiVector {
        MultiVector::single(chart, &[idx], Poly::one(chart))
    }
}

impl DiffForm {
    /// The coordinate differential `dx^idx`.
    pub fn coordinate(chart: &Arc<Chart>, idx: usize) -> DiffForm {
        DiffForm::single(chart, &[idx], Poly::one(chart))
    }
}

impl fmt::Display for MultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.render("∂", f)
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.render("d", f)
    }
}

/// `i_alpha T` for a 1-form against a multivector.
pub fn contract_form(alpha: &DiffForm, t: &MultiVector) -> Result<MultiVector> {
    Chart::require_same(alpha.chart(), t.chart())?;
    if t.degree() == 0 {
        return Err(Error::Degree("contraction of a degree-0 tensor".into()));
    }
    Ok(MultiVector(t.0.contract_with(&alpha.0)))
}

/// `i_X omega` for a vector field against a form.
pub fn contract_vf(x: &MultiVector, omega: &DiffForm) -> Result<DiffForm> {
    Chart::require_same(x.chart(), omega.chart())?;
    if omega.degree() == 0 {
        return Err(Error::Degree("contraction of a degree-0 tensor".into()));
    }
    if x.degree() != 1 {
        return Err(Error::Degree(
            "contraction argument must have degree 1".into(),
        ));
    }
    Ok(DiffForm(omega.0.contract_with(&x.0)))
}

/// Exterior derivative.
pub fn exterior_d(alpha: &DiffForm) -> DiffForm {
    let chart = alpha.chart().clone();
    let mut out = Components::zero(&chart, alpha.degree() + 1);
    for (t, c) in alpha.iter() {
        for i in 0..chart.dim() {
            let dc = c.partial(i);
            if dc.is_zero() {
                continue;
            }
            let mut tuple = Vec::with_capacity(t.len() + 1);
            tuple.push(i);
            tuple.extend_from_slice(t);
            out.add_term_unsorted(&tuple, dc);
        }
    }
    DiffForm(out)
}

/// Pairing of a 1-form with a vector field.
pub fn pair_form_vf(alpha: &DiffForm, x: &MultiVector) -> Poly {
    assert_eq!(alpha.degree(), 1);
    assert_eq!(x.degree(), 1);
    let mut out = Poly::zero(alpha.chart());
    for (t, c) in alpha.iter() {
        out = out.add_ref(&c.mul_ref(&x.component(t)));
    }
    out
}

/// Right derivative of a sorted odd-index tuple: removes `i` and reports the
/// sign `(-1)^{k-l}` of moving it past the factors to its right.
fn odd_right_derivative(tuple: &[usize], i: usize) -> Option<(Vec<usize>, i32)> {
    let pos = tuple.iter().position(|&j| j == i)?;
    let mut rest = tuple.to_vec();
    rest.remove(pos);
    let moved = tuple.len() - 1 - pos;
    let sign = if moved % 2 == 0 { 1 } else { -1 };
    Some((rest, sign))
}

/// The one-sided product entering the Schouten bracket: contract the right
/// odd-derivative of `a` with the coordinate derivative of `b`.
fn schouten_star(a: &MultiVector, b: &MultiVector) -> Components {
    let chart = a.chart();
    let deg = (a.degree() + b.degree()).saturating_sub(1);
    let mut out = Components::zero(chart, deg);
    if a.degree() == 0 {
        return out;
    }
    for (ta, ca) in a.iter() {
        for &i in ta.iter() {
            let (rest, sign1) = odd_right_derivative(ta, i).expect("i in tuple");
            for (tb, cb) in b.iter() {
                let db = cb.partial(i);
                if db.is_zero() {
                    continue;
                }
                if let Some((t, sign2)) = merge_tuples(&rest, tb) {
                    let mut c = ca.mul_ref(&db);
                    if sign1 * sign2 < 0 {
                        c = c.neg_ref();
                    }
                    out.add_term(t, c);
                }
            }
        }
    }
    out
}

/// Schouten bracket of multivector fields: degree `a + b - 1`.
pub fn schouten(a: &MultiVector, b: &MultiVector) -> Result<MultiVector> {
    Chart::require_same(a.chart(), b.chart())?;
    let star_ab = schouten_star(a, b);
    let star_ba = schouten_star(b, a);
    let ia = a.degree() as i64;
    let ib = b.degree() as i64;
    let sign = if ((ia - 1) * (ib - 1)) % 2 == 0 {
        1
    } else {
        -1
    };
    let out = if sign > 0 {
        star_ab.sub(&star_ba)
    } else {
        star_ab.add(&star_ba)
    };
    Ok(MultiVector(out))
}

/// Directional derivative of a function along a vector field.
pub fn vf_apply(x: &MultiVector, f: &Poly) -> Poly {
    assert_eq!(x.degree(), 1, "vector field expected");
    let mut out = Poly::zero(f.chart());
    for (t, c) in x.iter() {
        out = out.add_ref(&c.mul_ref(&f.partial(t[0])));
    }
    out
}

/// Lie derivative of a form along a vector field (Cartan formula).
pub fn lie_form(x: &MultiVector, omega: &DiffForm) -> DiffForm {
    assert_eq!(x.degree(), 1, "vector field expected");
    let d_omega = exterior_d(omega);
    let term2 = contract_vf(x, &d_omega).expect("degree >= 1 after d");
    if omega.degree() == 0 {
        term2
    } else {
        let term1 = exterior_d(&contract_vf(x, omega).expect("degree >= 1"));
        term1.add(&term2)
    }
}

/// Lie derivative of a multivector along a vector field (Schouten bracket).
pub fn lie_multivector(x: &MultiVector, t: &MultiVector) -> MultiVector {
    assert_eq!(x.degree(), 1, "vector field expected");
    schouten(x, t).expect("same chart")
}

/// Evaluate a bivector against two 1-forms: `pi(alpha, beta) = i_beta i_alpha pi`.
pub fn bivector_eval(pi: &MultiVector, alpha: &DiffForm, beta: &DiffForm) -> Poly {
    assert_eq!(pi.degree(), 2);
    let v = contract_form(alpha, pi).expect("degree 2");
    pair_form_vf(beta, &v)
}

/// Antisymmetric component matrix of a degree-2 tensor (forms or bivectors).
pub fn two_tensor_matrix(comps: &Components) -> Vec<Vec<Poly>> {
    assert_eq!(comps.degree(), 2);
    let dim = comps.chart().dim();
    let mut m = vec![vec![Poly::zero(comps.chart()); dim]; dim];
    for (t, c) in comps.iter() {
        m[t[0]][t[1]] = c.clone();
        m[t[1]][t[0]] = c.neg_ref();
    }
    m
}

/// Rebuild a degree-2 tensor from an antisymmetric matrix.
pub fn matrix_to_two_tensor(chart: &Arc<Chart>, m: &[Vec<Poly>]) -> Result<Components> {
    let dim = chart.dim();
    let mut out = Components::zero(chart, 2);
    for a in 0..dim {
        if !m[a][a].is_zero() {
            return Err(Error::Internal(
                "two-tensor matrix has nonzero diagonal".into(),
            ));
        }
        for b in (a + 1)..dim {
            if m[a][b].add_ref(&m[b][a]).is_zero() {
                out.add_term(vec![a, b], m[a][b].clone());
            } else {
                return Err(Error::Internal(
                    "two-tensor matrix is not antisymmetric".into(),
                ));
            }
        }
    }
    Ok(out)
}

/// Determinant of a polynomial matrix by cofactor expansion (exact; intended
/// for the small matrices of chart dimension at most 6 or so).
pub fn poly_det(m: &[Vec<Poly>], chart: &Arc<Chart>) -> Poly {
    let n = m.len();
    if n == 0 {
        return Poly::one(chart);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Poly::zero(chart);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| m[r][c].clone())
                    .collect()
            })
            .collect();
        let mut term = m[0][j].mul_ref(&poly_det(&minor, chart));
        if j % 2 == 1 {
            term = term.neg_ref();
        }
        det = det.add_ref(&term);
    }
    det
}

/// Inverse of a polynomial matrix whose determinant is a nonzero constant.
pub fn poly_matrix_inverse(m: &[Vec<Poly>], chart: &Arc<Chart>) -> Result<Vec<Vec<Poly>>> {
    let n = m.len();
    let det = poly_det(m, chart);
    let det_const = det.as_constant().ok_or(Error::NonConstantDeterminant)?;
    if det_const == Rat::from_integer(0.into()) {
        return Err(Error::DegenerateForm);
    }
    let inv_det = Rat::one() / det_const;
    let mut adj = vec![vec![Poly::zero(chart); n]; n];
    for r in 0..n {
        for c in 0..n {
            let minor: Vec<Vec<Poly>> = (0..n)
                .filter(|&i| i != r)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != c)
                        .map(|j| m[i][j].clone())
                        .collect()
                })
                .collect();
            let mut cof = poly_det(&minor, chart);
            if (r + c) % 2 == 1 {
                cof = cof.neg_ref();
            }
            // adjugate transposes the cofactor matrix
            adj[c][r] = cof.scale(&inv_det);
        }
    }
    Ok(adj)
}
