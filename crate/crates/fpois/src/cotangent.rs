//! The cotangent chart: pullbacks, canonical forms, flat horizontal lifts,
//! the tautological drift field, the integrated symplectic form and fiber
//! translations.
//!
//! The connection is the flat one of the global chart, so horizontal lifts
//! are coefficient-preserving and deterministic. The orientation is
//! `omega_can = sum dq_i ^ dp_i = -d theta_can` for the tautological form
//! `theta_can = sum p_i dq_i`.

use crate::chart::CotangentChart;
use crate::error::{Error, Result};
use crate::formal::{
    exp_lie, sharp, FormalFunction, FormalOneForm, FormalPoisson, FormalSymplectic, FormalTwoForm,
    FormalVF,
};
use crate::poly::Poly;
use crate::scalar::{factorial, Rat};
use crate::series::FormalSeries;
use crate::tensor::{exterior_d, DiffForm, MultiVector};
use num_traits::One;

/// Pull a base-chart polynomial back along the projection.
pub fn rho_pullback_poly(cc: &CotangentChart, f: &Poly) -> Poly {
    let index_map: Vec<usize> = (0..cc.base_dim()).map(|i| cc.q_index(i)).collect();
    f.map_chart(cc.total(), &index_map)
}

/// Pull a base-chart form back along the projection.
pub fn rho_pullback_form(cc: &CotangentChart, alpha: &DiffForm) -> DiffForm {
    let mut out = DiffForm::zero(cc.total(), alpha.degree());
    for (t, c) in alpha.iter() {
        let tuple: Vec<usize> = t.iter().map(|&i| cc.q_index(i)).collect();
        out = out.add(&DiffForm::single(
            cc.total(),
            &tuple,
            rho_pullback_poly(cc, c),
        ));
    }
    out
}

/// Pull a base-chart multivector back to the total chart with the flat lift
/// of every direction.
pub fn lift_multivector(cc: &CotangentChart, x: &MultiVector) -> MultiVector {
    let mut out = MultiVector::zero(cc.total(), x.degree());
    for (t, c) in x.iter() {
        let tuple: Vec<usize> = t.iter().map(|&i| cc.q_index(i)).collect();
        out = out.add(&MultiVector::single(
            cc.total(),
            &tuple,
            rho_pullback_poly(cc, c),
        ));
    }
    out
}

pub fn rho_pullback_function(cc: &CotangentChart, f: &FormalFunction) -> FormalFunction {
    f.map(|c| rho_pullback_poly(cc, c))
}

pub fn rho_pullback_two_form(cc: &CotangentChart, b: &FormalTwoForm) -> FormalTwoForm {
    b.map(|c| rho_pullback_form(cc, c))
}

/// Push a total-chart polynomial down to the base if it does not involve
/// fiber coordinates.
pub fn restrict_to_base(cc: &CotangentChart, f: &Poly) -> Option<Poly> {
    let fiber = cc.fiber_indices();
    if !f.independent_of(&fiber) {
        return None;
    }
    let mut index_map = vec![0usize; cc.total().dim()];
    for i in 0..cc.base_dim() {
        index_map[cc.q_index(i)] = i;
    }
    for &i in &fiber {
        index_map[i] = 0; // never hit
    }
    Some(f.map_chart(cc.base(), &index_map))
}

/// Some(f) with `rho^* f = F` iff every coefficient of `F` is independent of
/// the fiber coordinates.
pub fn is_basic(cc: &CotangentChart, f: &FormalFunction) -> Option<FormalFunction> {
    let coeffs: Option<Vec<Poly>> = f.coeffs().iter().map(|c| restrict_to_base(cc, c)).collect();
    Some(FormalSeries::from_coeffs(coeffs?))
}

/// The tautological 1-form `theta_can = sum p_i dq_i`.
pub fn theta_can(cc: &CotangentChart) -> DiffForm {
    let ch = cc.total();
    let mut out = DiffForm::zero(ch, 1);
    for i in 0..cc.base_dim() {
        out = out
            .add(&DiffForm::coordinate(ch, cc.q_index(i)).mul_poly(&Poly::var(ch, cc.p_index(i))));
    }
    out
}

/// The canonical symplectic form `omega_can = sum dq_i ^ dp_i`.
pub fn omega_can(cc: &CotangentChart) -> DiffForm {
    let ch = cc.total();
    let mut out = DiffForm::zero(ch, 2);
    for i in 0..cc.base_dim() {
        out = out.add(
            &DiffForm::coordinate(ch, cc.q_index(i))
                .wedge(&DiffForm::coordinate(ch, cc.p_index(i))),
        );
    }
    out
}

/// `(theta_can, omega_can)` as plain forms.
pub fn canonical_forms(cc: &CotangentChart) -> (DiffForm, DiffForm) {
    (theta_can(cc), omega_can(cc))
}

pub fn omega_can_series(cc: &CotangentChart, n: usize) -> FormalSymplectic {
    FormalSymplectic::new(FormalSeries::constant(omega_can(cc), n)).expect("canonical form")
}

/// The drift field `Z = hor(pi#(theta_can))` of a base Poisson structure
/// vanishing in zeroth order: polynomial in all coordinates, order >= 1.
pub fn z_field(cc: &CotangentChart, pi: &FormalPoisson) -> Result<FormalVF> {
    pi.require_vanishing_zeroth()?;
    let lifted: FormalSeries<MultiVector> = pi.series().map(|c| lift_multivector(cc, c));
    let theta = FormalSeries::constant(theta_can(cc), pi.order());
    let z = sharp(&lifted, &theta)?;
    FormalVF::new(z)
}

/// The integrated symplectic form `omega = int_0^1 exp(s L_Z) omega_can ds`
/// together with the exact potentials `theta_k = -(1/(k!(k+1))) L_Z^k
/// theta_can` that certify `omega = omega_can + sum d theta_k`.
pub fn omega_from_z(
    cc: &CotangentChart,
    z: &FormalVF,
) -> Result<(FormalSymplectic, Vec<FormalOneForm>)> {
    if !z.series().coeff(0).is_zero() {
        return Err(Error::NonzeroOrderZero("drift field"));
    }
    let n = z.order();
    let omega0 = FormalSeries::constant(omega_can(cc), n);
    let theta0 = FormalSeries::constant(theta_can(cc), n);
    let mut omega = omega0.clone();
    let mut omega_pow = omega0.clone();
    let mut theta_pow = theta0;
    let mut potentials = Vec::with_capacity(n);
    for k in 1..=n {
        omega_pow = z.derive(&omega_pow);
        theta_pow = z.derive(&theta_pow);
        let w = Rat::one() / factorial(k + 1);
        omega = omega.add(&omega_pow.scale(&w));
        let wk = -(Rat::one() / (factorial(k) * Rat::from_integer(((k + 1) as i64).into())));
        potentials.push(theta_pow.scale(&wk));
    }
    // internal consistency: omega - omega_can = sum_k d theta_k, exactly
    let mut exact_sum = FormalSeries::constant(DiffForm::zero(cc.total(), 2), n);
    for pot in &potentials {
        exact_sum = exact_sum.add(&pot.map(exterior_d));
    }
    if omega.sub(&omega0) != exact_sum {
        return Err(Error::Internal(
            "integrated form does not match its exact potentials".into(),
        ));
    }
    Ok((FormalSymplectic::new(omega)?, potentials))
}

/// Fiber translation by a base 1-form: the chart substitution
/// `p_i -> p_i - theta_i(q)`, which satisfies
/// `psi_theta^*(omega_can + rho^* B') = omega_can + rho^* B` whenever
/// `B - B' = d theta`, and commutes with the projection.
#[derive(Debug, Clone)]
pub struct FiberTranslation {
    cc: CotangentChart,
    /// Pulled-back components `theta_i(q)` on the total chart.
    components: Vec<Poly>,
}

pub fn fiber_translation(cc: &CotangentChart, theta: &DiffForm) -> FiberTranslation {
    assert_eq!(theta.degree(), 1, "translation datum is a 1-form");
    let components = (0..cc.base_dim())
        .map(|i| rho_pullback_poly(cc, &theta.component(&[i])))
        .collect();
    FiberTranslation {
        cc: cc.clone(),
        components,
    }
}

impl FiberTranslation {
    /// Pullback on functions: substitute `p_i - theta_i(q)` for `p_i`.
    pub fn apply_poly(&self, f: &Poly) -> Poly {
        let mut out = f.clone();
        for i in 0..self.cc.base_dim() {
            if self.components[i].is_zero() {
                continue;
            }
            let pi = self.cc.p_index(i);
            let replacement = Poly::var(self.cc.total(), pi).sub_ref(&self.components[i]);
            out = out.substitute(pi, &replacement);
        }
        out
    }

    /// Pullback on forms: substituted coefficients, with
    /// `dp_i -> dp_i - d(theta_i)`.
    pub fn apply_form(&self, alpha: &DiffForm) -> DiffForm {
        let ch = self.cc.total();
        let mut out = DiffForm::zero(ch, alpha.degree());
        for (t, c) in alpha.iter() {
            let mut factor = DiffForm::from_function(self.apply_poly(c));
            for &idx in t {
                let one_form = if self.cc.is_fiber_index(idx) {
                    let i = idx - self.cc.base_dim();
                    let dtheta = exterior_d(&DiffForm::from_function(self.components[i].clone()));
                    DiffForm::coordinate(ch, idx).sub(&dtheta)
                } else {
                    DiffForm::coordinate(ch, idx)
                };
                factor = factor.wedge(&one_form);
            }
            out = out.add(&factor);
        }
        out
    }

    pub fn apply_function(&self, f: &FormalFunction) -> FormalFunction {
        f.map(|c| self.apply_poly(c))
    }

    pub fn apply_two_form(&self, b: &FormalTwoForm) -> FormalTwoForm {
        b.map(|c| self.apply_form(c))
    }
}

/// `exp(L_X)` of a formal symplectic structure, revalidated.
pub fn transport_symplectic(x: &FormalVF, omega: &FormalSymplectic) -> Result<FormalSymplectic> {
    FormalSymplectic::new(exp_lie(x, omega.series()))
}
