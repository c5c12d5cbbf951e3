//! Formal Poisson and symplectic structures, gauge transforms and brackets.
//!
//! The normative sign conventions, fixed once here and assumed by every
//! derived value in the crate:
//!  * `pi#(alpha) = i_alpha pi` and `{f,g} = pi(df,dg)`, so on the cotangent
//!    chart with the canonical symplectic form, `{q_i, F} = dF/dp_i`;
//!  * inverting a symplectic form returns the bivector whose component
//!    matrix is minus the inverse of the form's component matrix, which is
//!    exactly what makes the canonical-chart rule above come out.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Rat;
use crate::series::{cauchy, Coeff, FormalSeries};
use crate::tensor::{
    contract_form, contract_vf, exterior_d, lie_form, lie_multivector, matrix_to_two_tensor,
    pair_form_vf, poly_matrix_inverse, two_tensor_matrix, vf_apply, DiffForm, MultiVector,
};
use num_traits::One;
use std::sync::Arc;

pub type FormalFunction = FormalSeries<Poly>;
pub type FormalOneForm = FormalSeries<DiffForm>;
pub type FormalTwoForm = FormalSeries<DiffForm>;
pub type FormalBivector = FormalSeries<MultiVector>;

/// Tensors that admit a Lie derivative along a plain vector field.
pub trait LieDerivative: Coeff {
    fn lie_by(&self, x: &MultiVector) -> Self;
}

impl LieDerivative for Poly {
    fn lie_by(&self, x: &MultiVector) -> Self {
        vf_apply(x, self)
    }
}

impl LieDerivative for MultiVector {
    fn lie_by(&self, x: &MultiVector) -> Self {
        lie_multivector(x, self)
    }
}

impl LieDerivative for DiffForm {
    fn lie_by(&self, x: &MultiVector) -> Self {
        lie_form(x, self)
    }
}

/// A formal vector field with vanishing zeroth order, the generator of a
/// formal diffeomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalVF {
    field: FormalSeries<MultiVector>,
}

impl FormalVF {
    pub fn new(field: FormalSeries<MultiVector>) -> Result<FormalVF> {
        if field.coeffs().iter().any(|c| c.degree() != 1) {
            return Err(Error::Degree(
                "formal vector field must have degree 1".into(),
            ));
        }
        if !field.coeff(0).is_zero() {
            return Err(Error::NonzeroOrderZero("formal vector field"));
        }
        Ok(FormalVF { field })
    }

    pub fn zero(chart: &Arc<Chart>, n: usize) -> FormalVF {
        FormalVF {
            field: FormalSeries::constant(MultiVector::zero(chart, 1), n),
        }
    }

    pub fn series(&self) -> &FormalSeries<MultiVector> {
        &self.field
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.field.coeff(0).chart()
    }

    pub fn order(&self) -> usize {
        self.field.order()
    }

    pub fn is_zero(&self) -> bool {
        self.field.is_zero()
    }

    pub fn neg(&self) -> FormalVF {
        FormalVF {
            field: self.field.neg(),
        }
    }

    pub fn add(&self, other: &FormalVF) -> FormalVF {
        FormalVF {
            field: self.field.add(&other.field),
        }
    }

    pub fn scale(&self, c: &Rat) -> FormalVF {
        FormalVF {
            field: self.field.scale(c),
        }
    }

    /// Apply the vector field as a formal derivation.
    pub fn derive<T: LieDerivative>(&self, t: &FormalSeries<T>) -> FormalSeries<T> {
        lie_series(&self.field, t)
    }
}

/// Formal Lie derivative along a series of fields.
pub fn lie_series<T: LieDerivative>(
    x: &FormalSeries<MultiVector>,
    t: &FormalSeries<T>,
) -> FormalSeries<T> {
    cauchy(x, t, t.coeff(0).zero_like(), |xi, tj| tj.lie_by(xi))
}

/// `exp(L_X) T` truncated at the series order. Requires the zeroth order of
/// `X` to vanish, which makes the sum finite.
pub fn exp_lie<T: LieDerivative>(x: &FormalVF, t: &FormalSeries<T>) -> FormalSeries<T> {
    let mut out = t.clone();
    let mut term = t.clone();
    let n = t.order();
    for m in 1..=n {
        let inv_m = Rat::one() / Rat::from_integer((m as i64).into());
        term = x.derive(&term).scale(&inv_m);
        if term.is_zero() {
            break;
        }
        out = out.add(&term);
    }
    out
}

/// `d` applied per order to a formal function.
pub fn formal_d(f: &FormalFunction) -> FormalOneForm {
    f.map(|c| exterior_d(&DiffForm::from_function(c.clone())))
}

/// `pi#(alpha) = i_alpha pi`, lambda-bilinearly.
pub fn sharp(pi: &FormalBivector, alpha: &FormalOneForm) -> Result<FormalSeries<MultiVector>> {
    pi.require_same_order(alpha)?;
    let zero = MultiVector::zero(pi.coeff(0).chart(), pi.coeff(0).degree().saturating_sub(1));
    Ok(cauchy(alpha, pi, zero, |a, p| {
        contract_form(a, p).expect("degree checked")
    }))
}

/// `B_flat(X) = i_X B`, lambda-bilinearly.
pub fn flat(b: &FormalTwoForm, x: &FormalSeries<MultiVector>) -> Result<FormalOneForm> {
    b.require_same_order(x)?;
    let zero = DiffForm::zero(b.coeff(0).chart(), b.coeff(0).degree().saturating_sub(1));
    Ok(cauchy(x, b, zero, |xi, bj| {
        contract_vf(xi, bj).expect("degree checked")
    }))
}

/// Schouten self-bracket `[pi, pi]` mod lambda^{N+1}; zero iff `pi` is a
/// formal Poisson structure.
pub fn jacobi_residual(pi: &FormalBivector) -> FormalSeries<MultiVector> {
    let zero = MultiVector::zero(pi.coeff(0).chart(), 3);
    cauchy(pi, pi, zero, |a, b| {
        crate::tensor::schouten(a, b).expect("same chart")
    })
}

/// A formal bivector with vanishing Schouten self-bracket, validated at
/// construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalPoisson {
    pi: FormalBivector,
}

impl FormalPoisson {
    pub fn new(pi: FormalBivector) -> Result<FormalPoisson> {
        if pi.coeffs().iter().any(|c| c.degree() != 2) {
            return Err(Error::Degree(
                "formal Poisson structure must have degree 2".into(),
            ));
        }
        let res = jacobi_residual(&pi);
        if !res.is_zero() {
            return Err(Error::Internal(
                "bivector violates the Jacobi identity".into(),
            ));
        }
        Ok(FormalPoisson { pi })
    }

    pub fn zero(chart: &Arc<Chart>, n: usize) -> FormalPoisson {
        FormalPoisson {
            pi: FormalSeries::constant(MultiVector::zero(chart, 2), n),
        }
    }

    pub fn series(&self) -> &FormalBivector {
        &self.pi
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.pi.coeff(0).chart()
    }

    pub fn order(&self) -> usize {
        self.pi.order()
    }

    /// True iff the zeroth order vanishes.
    pub fn vanishes_at_zero(&self) -> bool {
        self.pi.coeff(0).is_zero()
    }

    pub fn require_vanishing_zeroth(&self) -> Result<()> {
        if self.vanishes_at_zero() {
            Ok(())
        } else {
            Err(Error::NonzeroOrderZero("Poisson structure"))
        }
    }

    /// `{f, g} = pi(df, dg)`.
    pub fn bracket(&self, f: &FormalFunction, g: &FormalFunction) -> FormalFunction {
        bracket_of_bivector(&self.pi, f, g)
    }

    pub fn hamiltonian_vf(&self, f: &FormalFunction) -> Result<FormalSeries<MultiVector>> {
        sharp(&self.pi, &formal_d(f))
    }
}

/// `{f, g}` for an arbitrary formal bivector series.
pub fn bracket_of_bivector(
    pi: &FormalBivector,
    f: &FormalFunction,
    g: &FormalFunction,
) -> FormalFunction {
    let x = sharp(pi, &formal_d(f)).expect("orders match");
    let dg = formal_d(g);
    cauchy(&dg, &x, Poly::zero(f.coeff(0).chart()), |a, v| {
        pair_form_vf(a, v)
    })
}

/// A formal series of closed 2-forms whose zeroth order has a constant
/// nonzero component determinant, so that it inverts polynomially.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormalSymplectic {
    omega: FormalTwoForm,
}

impl FormalSymplectic {
    pub fn new(omega: FormalTwoForm) -> Result<FormalSymplectic> {
        if omega.coeffs().iter().any(|c| c.degree() != 2) {
            return Err(Error::Degree(
                "symplectic structure must have degree 2".into(),
            ));
        }
        for (k, c) in omega.coeffs().iter().enumerate() {
            if !exterior_d(c).is_zero() {
                return Err(Error::NotClosed(k));
            }
        }
        // invertibility certificate for the zeroth order
        let chart = omega.coeff(0).chart();
        let m = two_tensor_matrix(&omega.coeff(0).0);
        poly_matrix_inverse(&m, chart)?;
        Ok(FormalSymplectic { omega })
    }

    pub fn series(&self) -> &FormalTwoForm {
        &self.omega
    }

    pub fn chart(&self) -> &Arc<Chart> {
        self.omega.coeff(0).chart()
    }

    pub fn order(&self) -> usize {
        self.omega.order()
    }

    /// Invert to the formal Poisson structure fixed by the bracket
    /// convention: the component matrix is minus the formal inverse of the
    /// form's component matrix.
    pub fn invert(&self) -> Result<FormalPoisson> {
        let chart = self.chart();
        let omega_mats: Vec<Vec<Vec<Poly>>> = self
            .omega
            .coeffs()
            .iter()
            .map(|c| two_tensor_matrix(&c.0))
            .collect();
        let inv_mats = formal_matrix_inverse(&omega_mats, chart)?;
        let coeffs: Result<Vec<MultiVector>> = inv_mats
            .iter()
            .map(|m| Ok(MultiVector(matrix_to_two_tensor(chart, &mat_neg(m))?)))
            .collect();
        FormalPoisson::new(FormalSeries::from_coeffs(coeffs?))
    }

    pub fn bracket(&self, f: &FormalFunction, g: &FormalFunction) -> Result<FormalFunction> {
        Ok(self.invert()?.bracket(f, g))
    }
}

/// A symplectic algebra with its inverse bivector cached, for solvers that
/// take many brackets against one fixed form.
#[derive(Debug, Clone)]
pub struct SymplecticAlgebra {
    omega: FormalSymplectic,
    pi: FormalPoisson,
}

impl SymplecticAlgebra {
    pub fn new(omega: FormalSymplectic) -> Result<SymplecticAlgebra> {
        let pi = omega.invert()?;
        Ok(SymplecticAlgebra { omega, pi })
    }

    pub fn omega(&self) -> &FormalSymplectic {
        &self.omega
    }

    pub fn poisson(&self) -> &FormalPoisson {
        &self.pi
    }

    pub fn bracket(&self, f: &FormalFunction, g: &FormalFunction) -> FormalFunction {
        self.pi.bracket(f, g)
    }

    pub fn hamiltonian_vf(&self, f: &FormalFunction) -> FormalSeries<MultiVector> {
        self.pi.hamiltonian_vf(f).expect("orders match")
    }
}

/// Order-by-order inverse of a formal matrix whose zeroth order has a
/// constant nonzero determinant: `M_0 = A_0^{-1}`,
/// `M_k = -M_0 sum_{j=1..k} A_j M_{k-j}`.
pub fn formal_matrix_inverse(
    mats: &[Vec<Vec<Poly>>],
    chart: &Arc<Chart>,
) -> Result<Vec<Vec<Vec<Poly>>>> {
    let dim = chart.dim();
    let m0 = poly_matrix_inverse(&mats[0], chart)?;
    let mut inv: Vec<Vec<Vec<Poly>>> = vec![m0.clone()];
    for k in 1..mats.len() {
        let mut s = vec![vec![Poly::zero(chart); dim]; dim];
        for j in 1..=k {
            let prod = mat_mul(&mats[j], &inv[k - j], chart);
            s = mat_add(&s, &prod);
        }
        inv.push(mat_neg(&mat_mul(&m0, &s, chart)));
    }
    Ok(inv)
}

fn mat_mul(a: &[Vec<Poly>], b: &[Vec<Poly>], chart: &Arc<Chart>) -> Vec<Vec<Poly>> {
    let n = a.len();
    let mut out = vec![vec![Poly::zero(chart); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if b[k][j].is_zero() {
                    continue;
                }
                out[i][j] = out[i][j].add_ref(&a[i][k].mul_ref(&b[k][j]));
            }
        }
    }
    out
}

fn mat_add(a: &[Vec<Poly>], b: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x.add_ref(y)).collect())
        .collect()
}

fn mat_neg(a: &[Vec<Poly>]) -> Vec<Vec<Poly>> {
    a.iter()
        .map(|r| r.iter().map(|x| x.neg_ref()).collect())
        .collect()
}

/// Check that every order of a formal 2-form is closed.
pub fn require_closed(b: &FormalTwoForm) -> Result<()> {
    for (k, c) in b.coeffs().iter().enumerate() {
        if !exterior_d(c).is_zero() {
            return Err(Error::NotClosed(k));
        }
    }
    Ok(())
}

/// Gauge (B-field) transform `tau_B(pi)` for a formal Poisson structure with
/// vanishing zeroth order and a closed formal 2-form `B`:
/// `tau_B(pi)# = pi# (id + B_flat pi#)^{-1}`, with the Neumann inverse made
/// finite by `pi_0 = 0`.
pub fn gauge(pi: &FormalPoisson, b: &FormalTwoForm) -> Result<FormalPoisson> {
    pi.require_vanishing_zeroth()?;
    pi.series().require_same_order(b)?;
    require_closed(b)?;
    let chart = pi.chart();
    Chart::require_same(chart, b.coeff(0).chart())?;
    let n = pi.order();
    let dim = chart.dim();
    let op = |alpha: &FormalOneForm| -> FormalOneForm {
        let v = sharp(pi.series(), alpha).expect("orders match");
        flat(b, &v).expect("orders match")
    };
    // component matrix of the result, order by order
    let mut mats: Vec<Vec<Vec<Poly>>> = vec![vec![vec![Poly::zero(chart); dim]; dim]; n + 1];
    for a in 0..dim {
        let alpha = FormalSeries::constant(DiffForm::coordinate(chart, a), n);
        let u = crate::series::neumann_inverse_apply(&op, &alpha)?;
        let v = sharp(pi.series(), &u)?;
        for (k, vk) in v.coeffs().iter().enumerate() {
            for bidx in 0..dim {
                mats[k][a][bidx] = vk.component(&[bidx]);
            }
        }
    }
    let coeffs: Result<Vec<MultiVector>> = mats
        .iter()
        .map(|m| Ok(MultiVector(matrix_to_two_tensor(chart, m)?)))
        .collect();
    FormalPoisson::new(FormalSeries::from_coeffs(coeffs?))
}

/// True iff `exp(L_X) pi = pi'` mod lambda^{N+1}.
pub fn check_equivalence_witness(
    pi: &FormalPoisson,
    pi_prime: &FormalPoisson,
    x: &FormalVF,
) -> bool {
    exp_lie(x, pi.series()) == *pi_prime.series()
}
