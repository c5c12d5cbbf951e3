//! Truncated formal power series in the deformation parameter.
//!
//! A [`FormalSeries`] holds coefficients for lambda orders `0..=N` where `N`
//! is the truncation order fixed for the computation; all arithmetic is mod
//! lambda^{N+1}. Mixing truncation orders is an error, never an implicit
//! re-truncation.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Rat;
use num_traits::Zero;

/// Coefficient of a formal series: an additive group element that can be
/// scaled by exact rationals and produce a zero of its own shape.
pub trait Coeff: Clone {
    fn add_c(&self, other: &Self) -> Self;
    fn neg_c(&self) -> Self;
    fn scale_c(&self, c: &Rat) -> Self;
    fn is_zero_c(&self) -> bool;
    fn zero_like(&self) -> Self;
}

impl Coeff for Poly {
    fn add_c(&self, other: &Self) -> Self {
        self.add_ref(other)
    }
    fn neg_c(&self) -> Self {
        self.neg_ref()
    }
    fn scale_c(&self, c: &Rat) -> Self {
        self.scale(c)
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        Poly::zero(self.chart())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSeries<T: Coeff> {
    coeffs: Vec<T>,
}

impl<T: Coeff> FormalSeries<T> {
    /// Series with the given order-0 coefficient and zeros above, truncated
    /// at order `n`.
    pub fn constant(c0: T, n: usize) -> FormalSeries<T> {
        let mut coeffs = Vec::with_capacity(n + 1);
        let zero = c0.zero_like();
        coeffs.push(c0);
        for _ in 0..n {
            coeffs.push(zero.clone());
        }
        FormalSeries { coeffs }
    }

    pub fn zero_of(sample: &T, n: usize) -> FormalSeries<T> {
        FormalSeries::constant(sample.zero_like(), n)
    }

    /// Build from explicit coefficients `0..=N`.
    pub fn from_coeffs(coeffs: Vec<T>) -> FormalSeries<T> {
        assert!(!coeffs.is_empty(), "series needs at least order 0");
        FormalSeries { coeffs }
    }

    /// Single term `lambda^k * c`, truncated at order `n`.
    pub fn single(k: usize, c: T, n: usize) -> FormalSeries<T> {
        let mut s = FormalSeries::zero_of(&c, n);
        if k <= n {
            s.coeffs[k] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &T {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff_mut(&mut self, k: usize) -> &mut T {
        &mut self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_c())
    }

    /// Lowest lambda order with a nonzero coefficient.
    pub fn lowest_order(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero_c())
    }

    pub fn require_same_order<U: Coeff>(&self, other: &FormalSeries<U>) -> Result<()> {
        if self.order() == other.order() {
            Ok(())
        } else {
            Err(Error::OrderMismatch(self.order(), other.order()))
        }
    }

    pub fn add(&self, other: &FormalSeries<T>) -> FormalSeries<T> {
        assert_eq!(self.order(), other.order(), "series order mismatch");
        FormalSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.add_c(b))
                .collect(),
        }
    }

    pub fn sub(&self, other: &FormalSeries<T>) -> FormalSeries<T> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> FormalSeries<T> {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|c| c.neg_c()).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> FormalSeries<T> {
        FormalSeries {
            coeffs: self.coeffs.iter().map(|x| x.scale_c(c)).collect(),
        }
    }

    /// Multiply by lambda^k, truncating at the top.
    pub fn shift(&self, k: usize) -> FormalSeries<T> {
        let n = self.order();
        let mut out = FormalSeries::zero_of(&self.coeffs[0], n);
        for i in 0..=n {
            if i + k <= n {
                out.coeffs[i + k] = self.coeffs[i].clone();
            }
        }
        out
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> FormalSeries<U> {
        FormalSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn try_map<U: Coeff>(&self, f: impl Fn(&T) -> Result<U>) -> Result<FormalSeries<U>> {
        let coeffs: Result<Vec<U>> = self.coeffs.iter().map(f).collect();
        Ok(FormalSeries { coeffs: coeffs? })
    }
}

impl FormalSeries<Poly> {
    pub fn from_scalars(chart: &std::sync::Arc<crate::chart::Chart>, vals: &[Rat]) -> Self {
        FormalSeries::from_coeffs(
            vals.iter()
                .map(|c| Poly::constant(chart, c.clone()))
                .collect(),
        )
    }
}

/// Truncated Cauchy product with an arbitrary bilinear coefficient product.
pub fn cauchy<A: Coeff, B: Coeff, C: Coeff>(
    a: &FormalSeries<A>,
    b: &FormalSeries<B>,
    zero: C,
    prod: impl Fn(&A, &B) -> C,
) -> FormalSeries<C> {
    assert_eq!(a.order(), b.order(), "series order mismatch");
    let n = a.order();
    let mut coeffs = vec![zero; n + 1];
    for i in 0..=n {
        if a.coeffs[i].is_zero_c() {
            continue;
        }
        for j in 0..=(n - i) {
            if b.coeffs[j].is_zero_c() {
                continue;
            }
            let t = prod(&a.coeffs[i], &b.coeffs[j]);
            coeffs[i + j] = coeffs[i + j].add_c(&t);
        }
    }
    FormalSeries::from_coeffs(coeffs)
}

/// Product of scalar-coefficient (function) series.
pub fn series_mul(a: &FormalSeries<Poly>, b: &FormalSeries<Poly>) -> FormalSeries<Poly> {
    cauchy(a, b, a.coeff(0).zero_like(), |x, y| x.mul_ref(y))
}

/// Checked sum for the public boundary; internal code uses `add`.
pub fn checked_add<T: Coeff>(a: &FormalSeries<T>, b: &FormalSeries<T>) -> Result<FormalSeries<T>> {
    a.require_same_order(b)?;
    Ok(a.add(b))
}

/// Checked truncated product of function series.
pub fn checked_mul(a: &FormalSeries<Poly>, b: &FormalSeries<Poly>) -> Result<FormalSeries<Poly>> {
    a.require_same_order(b)?;
    Ok(series_mul(a, b))
}

/// Apply `(id + T)^{-1} = sum_k (-T)^k` truncated at the series order, for a
/// lambda-linear operator `T` that strictly raises lambda order. The raising
/// property is checked on the actual orbit of `x`: if some application fails
/// to raise the lowest order, the operator is rejected.
pub fn neumann_inverse_apply<T: Coeff>(
    op: &dyn Fn(&FormalSeries<T>) -> FormalSeries<T>,
    x: &FormalSeries<T>,
) -> Result<FormalSeries<T>> {
    let n = x.order();
    let mut acc = x.clone();
    let mut out = x.clone();
    for _ in 1..=n {
        let prev_low = acc.lowest_order();
        acc = op(&acc).neg();
        match (prev_low, acc.lowest_order()) {
            (Some(p), Some(q)) if q <= p => return Err(Error::OperatorOrder(q)),
            (_, None) => break,
            _ => {}
        }
        out = out.add(&acc);
    }
    Ok(out)
}

impl Coeff for Rat {
    fn add_c(&self, other: &Self) -> Self {
        self + other
    }
    fn neg_c(&self) -> Self {
        -self
    }
    fn scale_c(&self, c: &Rat) -> Self {
        self * c
    }
    fn is_zero_c(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        Rat::zero()
    }
}
