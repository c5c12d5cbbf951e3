//! Order-by-order deformation solvers along the cotangent projection:
//! Poisson morphisms, commutants, the extracted commutant structure, the
//! classifying action, logarithms and the uniqueness factorization.
//!
//! Every correction is produced by the contracting homotopy of the
//! multiderivation complex and the flat horizontal lift, so solutions are
//! deterministic. The per-order data are always checked against the two
//! cocycle conditions (the morphism residual is delta-closed, the commutant
//! data are delta-closed) before a correction is accepted.

use crate::ce::{ce_delta, ce_homotopy, CECochain};
use crate::chart::CotangentChart;
use crate::cotangent::{
    is_basic, omega_can, restrict_to_base, rho_pullback_poly, rho_pullback_two_form,
};
use crate::error::{Error, Result};
use crate::formal::{
    exp_lie, formal_d, sharp, FormalFunction, FormalPoisson, FormalTwoForm, FormalVF,
    LieDerivative, SymplecticAlgebra,
};
use crate::poly::Poly;
use crate::series::FormalSeries;
use crate::tensor::{contract_form, DiffForm, MultiVector};
use std::sync::Arc;

/// An ordered product of exponential factors `exp(L_{X_1}) ... exp(L_{X_m})`;
/// the leftmost factor is applied last. Composition with the projection
/// pullback is a ring morphism whose zeroth order is the pullback itself.
#[derive(Debug, Clone)]
pub struct FormalDiffeo {
    chart: Arc<crate::chart::Chart>,
    order: usize,
    factors: Vec<FormalVF>,
}

impl FormalDiffeo {
    pub fn identity(chart: &Arc<crate::chart::Chart>, order: usize) -> FormalDiffeo {
        FormalDiffeo {
            chart: chart.clone(),
            order,
            factors: Vec::new(),
        }
    }

    pub fn from_factors(
        chart: &Arc<crate::chart::Chart>,
        order: usize,
        factors: Vec<FormalVF>,
    ) -> FormalDiffeo {
        FormalDiffeo {
            chart: chart.clone(),
            order,
            factors,
        }
    }

    pub fn factors(&self) -> &[FormalVF] {
        &self.factors
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_identity(&self) -> bool {
        self.factors.iter().all(|f| f.is_zero())
    }

    /// Append a factor on the right (applied first).
    pub fn push_right(&mut self, x: FormalVF) {
        if !x.is_zero() {
            self.factors.push(x);
        }
    }

    /// Prepend a factor on the left (applied last).
    pub fn push_left(&mut self, x: FormalVF) {
        if !x.is_zero() {
            self.factors.insert(0, x);
        }
    }

    /// `(exp(L_{X_1}) ... exp(L_{X_m}))^{-1}`: reversed factors, negated.
    pub fn inverse(&self) -> FormalDiffeo {
        FormalDiffeo {
            chart: self.chart.clone(),
            order: self.order,
            factors: self.factors.iter().rev().map(|f| f.neg()).collect(),
        }
    }

    /// Compose: `self` after `other`.
    pub fn compose(&self, other: &FormalDiffeo) -> FormalDiffeo {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        FormalDiffeo {
            chart: self.chart.clone(),
            order: self.order,
            factors,
        }
    }

    /// Apply to any tensor series with a Lie derivative.
    pub fn apply<T: LieDerivative>(&self, t: &FormalSeries<T>) -> FormalSeries<T> {
        let mut out = t.clone();
        for f in self.factors.iter().rev() {
            out = exp_lie(f, &out);
        }
        out
    }
}

/// Generators of the base ring, pulled back to the total chart.
pub fn base_generators(cc: &CotangentChart, n: usize) -> Vec<FormalFunction> {
    (0..cc.base_dim())
        .map(|i| FormalSeries::constant(Poly::var(cc.total(), cc.q_index(i)), n))
        .collect()
}

/// All chart generators of the total ring.
pub fn total_generators(cc: &CotangentChart, n: usize) -> Vec<FormalFunction> {
    (0..cc.total().dim())
        .map(|a| FormalSeries::constant(Poly::var(cc.total(), a), n))
        .collect()
}

/// A solved deformation of the projection pullback into a Poisson morphism,
/// with the per-order residual cochains retained for reporting (all zero on
/// success).
#[derive(Debug, Clone)]
pub struct MorphismSolution {
    pub diffeo: FormalDiffeo,
    pub residual_report: Vec<CECochain>,
}

/// The full morphism defect of `Phi = exp(L_X) rho^*` against `(pi, omega)`
/// on a pair of base coordinate generators:
/// `Phi^{-1} {Phi rho^* q_i, Phi rho^* q_j}_omega - rho^* pi(q_i, q_j)`.
fn morphism_defect(
    cc: &CotangentChart,
    diffeo: &FormalDiffeo,
    pi: &FormalPoisson,
    alg: &SymplecticAlgebra,
    i: usize,
    j: usize,
) -> FormalFunction {
    let n = pi.order();
    let qi = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(i)), n);
    let qj = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(j)), n);
    let fi = diffeo.apply(&qi);
    let fj = diffeo.apply(&qj);
    let br = alg.bracket(&fi, &fj);
    let pulled_back = diffeo.inverse().apply(&br);
    let qi_base = FormalSeries::constant(Poly::var(cc.base(), i), n);
    let qj_base = FormalSeries::constant(Poly::var(cc.base(), j), n);
    let target = pi
        .bracket(&qi_base, &qj_base)
        .map(|c| rho_pullback_poly(cc, c));
    pulled_back.sub(&target)
}

/// The order-(k+1) residual cochain of a partial solution, checked for
/// delta-closedness (below top degree, where the check is vacuous).
pub fn morphism_residual(
    cc: &CotangentChart,
    diffeo: &FormalDiffeo,
    pi: &FormalPoisson,
    alg: &SymplecticAlgebra,
    k: usize,
) -> Result<CECochain> {
    let nb = cc.base_dim();
    let mut r = CECochain::zero(cc, 2);
    for i in 0..nb {
        for j in (i + 1)..nb {
            let defect = morphism_defect(cc, diffeo, pi, alg, i, j);
            for low in 0..=k {
                if !defect.coeff(low).is_zero() {
                    return Err(Error::Internal(format!(
                        "morphism defect has unexpected order-{low} term"
                    )));
                }
            }
            r.add_term(vec![i, j], defect.coeff(k + 1).clone());
        }
    }
    if r.degree() < nb {
        let dr = ce_delta(&r)?;
        if !dr.is_zero() {
            return Err(Error::Internal(
                "morphism residual is not delta-closed".into(),
            ));
        }
    }
    Ok(r)
}

/// Deform `rho^*` into a Poisson morphism `(pi on the base) -> (omega)`,
/// correcting order by order with `X_{k+1} = -hor(h(R_{k+1}))`.
pub fn solve_poisson_morphism(
    cc: &CotangentChart,
    pi: &FormalPoisson,
    alg: &SymplecticAlgebra,
) -> Result<MorphismSolution> {
    pi.require_vanishing_zeroth()?;
    let n = pi.order();
    alg.poisson().series().require_same_order(pi.series())?;
    let mut diffeo = FormalDiffeo::identity(cc.total(), n);
    let mut report = Vec::new();
    for k in 0..n {
        let r = morphism_residual(cc, &diffeo, pi, alg, k)?;
        if r.is_zero() {
            report.push(r);
            continue;
        }
        let xi = ce_homotopy(&r)?.neg();
        let x = crate::ce::horizontal_lift(&xi);
        diffeo.push_right(FormalVF::new(FormalSeries::single(k + 1, x, n))?);
        report.push(morphism_residual(cc, &diffeo, pi, alg, k)?);
    }
    // final full check, including degree-2 monomial products
    verify_poisson_morphism(cc, &diffeo, pi, alg)?;
    Ok(MorphismSolution {
        diffeo,
        residual_report: report,
    })
}

/// The bracket-preservation defect `Phi({f,g}_pi) - {Phi f, Phi g}_omega`
/// for base functions `f, g`.
pub fn morphism_bracket_defect(
    cc: &CotangentChart,
    diffeo: &FormalDiffeo,
    pi: &FormalPoisson,
    alg: &SymplecticAlgebra,
    f_base: &FormalFunction,
    g_base: &FormalFunction,
) -> FormalFunction {
    let lhs = diffeo.apply(&pi.bracket(f_base, g_base).map(|c| rho_pullback_poly(cc, c)));
    let rhs = alg.bracket(
        &diffeo.apply(&f_base.map(|c| rho_pullback_poly(cc, c))),
        &diffeo.apply(&g_base.map(|c| rho_pullback_poly(cc, c))),
    );
    lhs.sub(&rhs)
}

/// Base coordinate generators and their pairwise products.
pub fn base_test_functions(cc: &CotangentChart, n: usize) -> Vec<FormalFunction> {
    let nb = cc.base_dim();
    let mut out = Vec::new();
    for i in 0..nb {
        out.push(FormalSeries::constant(Poly::var(cc.base(), i), n));
    }
    for i in 0..nb {
        for j in i..nb {
            let p = Poly::var(cc.base(), i).mul_ref(&Poly::var(cc.base(), j));
            out.push(FormalSeries::constant(p, n));
        }
    }
    out
}

fn verify_poisson_morphism(
    cc: &CotangentChart,
    diffeo: &FormalDiffeo,
    pi: &FormalPoisson,
    alg: &SymplecticAlgebra,
) -> Result<()> {
    let tests = base_test_functions(cc, pi.order());
    for f in &tests {
        for g in &tests {
            if !morphism_bracket_defect(cc, diffeo, pi, alg, f, g).is_zero() {
                return Err(Error::Internal(
                    "solved morphism fails bracket preservation".into(),
                ));
            }
        }
    }
    Ok(())
}

/// Deform `rho^*` into the commutant of a solved morphism: per order, the
/// cochains `D_i = F_{k+1}(q_i, .)` are delta-closed and the correction
/// components are `b_i = h(D_i)`.
pub fn solve_commutant(
    cc: &CotangentChart,
    morphism: &MorphismSolution,
    alg: &SymplecticAlgebra,
) -> Result<FormalDiffeo> {
    let n = morphism.diffeo.order();
    let nb = cc.base_dim();
    let phi_images: Vec<FormalFunction> = base_generators(cc, n)
        .iter()
        .map(|q| morphism.diffeo.apply(q))
        .collect();
    let mut prime = FormalDiffeo::identity(cc.total(), n);
    for k in 0..n {
        let mut components = Vec::with_capacity(nb);
        let mut all_zero = true;
        for i in 0..nb {
            let qi = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(i)), n);
            let image_i = prime.apply(&qi);
            let mut d = CECochain::zero(cc, 1);
            for (j, phi_j) in phi_images.iter().enumerate() {
                let br = alg.bracket(&image_i, phi_j);
                for low in 0..=k {
                    if !br.coeff(low).is_zero() {
                        return Err(Error::Internal(format!(
                            "commutant defect has unexpected order-{low} term"
                        )));
                    }
                }
                d.add_term(vec![j], br.coeff(k + 1).clone());
            }
            if d.degree() < nb && !ce_delta(&d)?.is_zero() {
                return Err(Error::Internal(
                    "commutant data cochain is not delta-closed".into(),
                ));
            }
            let b = if d.is_zero() {
                Poly::zero(cc.total())
            } else {
                all_zero = false;
                ce_homotopy(&d)?.component(&[])
            };
            components.push(b);
        }
        if all_zero {
            continue;
        }
        let mut x = MultiVector::zero(cc.total(), 1);
        for (i, b) in components.into_iter().enumerate() {
            x = x.add(&MultiVector::single(cc.total(), &[cc.q_index(i)], b));
        }
        prime.push_left(FormalVF::new(FormalSeries::single(k + 1, x, n))?);
    }
    // final commutation check on generators and degree-2 products
    let tests = base_test_functions(cc, n);
    for f in &tests {
        for g in &tests {
            let a = prime.apply(&f.map(|c| rho_pullback_poly(cc, c)));
            let b = morphism.diffeo.apply(&g.map(|c| rho_pullback_poly(cc, c)));
            if !alg.bracket(&a, &b).is_zero() {
                return Err(Error::Internal("commutant images fail to commute".into()));
            }
        }
    }
    Ok(prime)
}

/// Invert `Phi' rho^*` on its image, order by order, peeling one basic
/// coefficient at a time.
pub fn invert_on_image(
    cc: &CotangentChart,
    prime: &FormalDiffeo,
    f: &FormalFunction,
) -> Result<FormalFunction> {
    let n = f.order();
    let mut g = FormalSeries::constant(Poly::zero(cc.base()), n);
    for m in 0..=n {
        let image = prime.apply(&g.map(|c| rho_pullback_poly(cc, c)));
        let residual = f.sub(&image);
        for low in 0..m {
            if !residual.coeff(low).is_zero() {
                return Err(Error::Internal(
                    "image inversion failed to clear lower orders".into(),
                ));
            }
        }
        let c = residual.coeff(m);
        let basic = restrict_to_base(cc, c).ok_or(Error::NotBasic(m))?;
        *g.coeff_mut(m) = basic;
    }
    let image = prime.apply(&g.map(|c| rho_pullback_poly(cc, c)));
    if !f.sub(&image).is_zero() {
        return Err(Error::Internal("image inversion did not converge".into()));
    }
    Ok(g)
}

/// Extract the commutant Poisson structure: `pi'(q_i, q_j) = -g_{ij}` where
/// `Phi' rho^* g_{ij} = {Phi' rho^* q_i, Phi' rho^* q_j}_omega`. The sign
/// makes `Phi'` an anti-Poisson morphism of the result.
pub fn extract_commutant_poisson(
    cc: &CotangentChart,
    prime: &FormalDiffeo,
    alg: &SymplecticAlgebra,
) -> Result<FormalPoisson> {
    let n = prime.order();
    let nb = cc.base_dim();
    let mut mats: Vec<MultiVector> = vec![MultiVector::zero(cc.base(), 2); n + 1];
    for i in 0..nb {
        for j in (i + 1)..nb {
            let qi = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(i)), n);
            let qj = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(j)), n);
            let g_total = alg.bracket(&prime.apply(&qi), &prime.apply(&qj));
            let g = invert_on_image(cc, prime, &g_total)?;
            for (k, c) in g.coeffs().iter().enumerate() {
                mats[k] = mats[k].add(&MultiVector::single(cc.base(), &[i, j], c.neg_ref()));
            }
        }
    }
    FormalPoisson::new(FormalSeries::from_coeffs(mats))
}

/// Everything produced by one run of the classifying action.
#[derive(Debug, Clone)]
pub struct ClassifyingOutcome {
    pub morphism: MorphismSolution,
    pub commutant: FormalDiffeo,
    pub pi_b: FormalPoisson,
    pub omega: SymplecticAlgebra,
}

/// The classifying action on representatives: deform `rho^*` against
/// `omega_can + rho^* B`, solve the commutant, and extract the induced
/// structure. The result vanishes in zeroth order, satisfies Jacobi (checked
/// at construction) and agrees with `pi` in first order.
pub fn classifying_action(
    cc: &CotangentChart,
    b: &FormalTwoForm,
    pi: &FormalPoisson,
) -> Result<ClassifyingOutcome> {
    pi.require_vanishing_zeroth()?;
    crate::formal::require_closed(b)?;
    let n = pi.order();
    let omega = FormalSeries::constant(omega_can(cc), n).add(&rho_pullback_two_form(cc, b));
    let alg = SymplecticAlgebra::new(crate::formal::FormalSymplectic::new(omega)?)?;
    let morphism = solve_poisson_morphism(cc, pi, &alg)?;
    let commutant = solve_commutant(cc, &morphism, &alg)?;
    let pi_b = extract_commutant_poisson(cc, &commutant, &alg)?;
    if !pi_b.vanishes_at_zero() {
        return Err(Error::Internal(
            "classifying action output has nonzero zeroth order".into(),
        ));
    }
    if pi_b.series().coeff(1) != pi.series().coeff(1) {
        return Err(Error::Internal(
            "classifying action violates first-order rigidity".into(),
        ));
    }
    // the extracted structure makes the commutant leg anti-Poisson; checked
    // on generators and degree-2 products like the other bimodule residuals
    let tests = base_test_functions(cc, n);
    for f in &tests {
        for g in &tests {
            if !anti_morphism_bracket_defect(cc, &commutant, &pi_b, &alg, f, g).is_zero() {
                return Err(Error::Internal(
                    "extracted structure fails the anti-Poisson identity".into(),
                ));
            }
        }
    }
    Ok(ClassifyingOutcome {
        morphism,
        commutant,
        pi_b,
        omega: alg,
    })
}

/// Recover the formal vector field `Z` with `exp(L_Z) rho^* q_i = images_i`,
/// using the flat lift to fix the vertical ambiguity to zero.
pub fn log_along_projection(cc: &CotangentChart, images: &[FormalFunction]) -> Result<FormalVF> {
    let nb = cc.base_dim();
    if images.len() != nb {
        return Err(Error::Internal("one image per base coordinate".into()));
    }
    let n = images[0].order();
    for (i, f) in images.iter().enumerate() {
        if *f.coeff(0) != Poly::var(cc.total(), cc.q_index(i)) {
            return Err(Error::NonzeroOrderZero("image correction"));
        }
    }
    let mut z = FormalVF::zero(cc.total(), n);
    for k in 0..n {
        let mut step = MultiVector::zero(cc.total(), 1);
        for (i, target) in images.iter().enumerate() {
            let qi = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(i)), n);
            let current = exp_lie(&z, &qi);
            let defect = target.sub(&current);
            for low in 0..=k {
                if !defect.coeff(low).is_zero() {
                    return Err(Error::Internal(format!(
                        "logarithm defect has unexpected order-{low} term"
                    )));
                }
            }
            step = step.add(&MultiVector::single(
                cc.total(),
                &[cc.q_index(i)],
                defect.coeff(k + 1).clone(),
            ));
        }
        if step.is_zero() {
            continue;
        }
        z = z.add(&FormalVF::new(FormalSeries::single(k + 1, step, n))?);
    }
    for (i, target) in images.iter().enumerate() {
        let qi = FormalSeries::constant(Poly::var(cc.total(), cc.q_index(i)), n);
        if exp_lie(&z, &qi) != *target {
            return Err(Error::Internal("logarithm round trip failed".into()));
        }
    }
    Ok(z)
}

/// The uniqueness factorization of two morphism solutions for the same data:
/// `exp(X_bar) = exp(X_H) exp(X) exp(V)` with `H` a formal function (its
/// hamiltonian field taken against the full symplectic structure) and `V`
/// vertical. Returns `(H, V)`.
pub fn factor_morphism_ambiguity(
    cc: &CotangentChart,
    x_solution: &FormalDiffeo,
    x_bar: &FormalDiffeo,
    alg: &SymplecticAlgebra,
) -> Result<(FormalFunction, FormalVF)> {
    let n = x_solution.order();
    let nb = cc.base_dim();
    let gens = total_generators(cc, n);
    let mut h = FormalSeries::constant(Poly::zero(cc.total()), n);
    let mut v = FormalVF::zero(cc.total(), n);
    let pi0 = alg.poisson().series().coeff(0).clone();
    let x_bar_inv = x_bar.inverse();
    for k in 0..n {
        // composite C = exp(X_H) o Phi_X o exp(V), defect G = C o Phi_Xbar^{-1}
        let ham = hamiltonian_factor(&h, alg)?;
        let mut z_step = MultiVector::zero(cc.total(), 1);
        let mut nonzero = false;
        for (a, gen) in gens.iter().enumerate() {
            let mut val = x_bar_inv.apply(gen);
            val = exp_lie(&v, &val);
            val = x_solution.apply(&val);
            val = ham.apply(&val);
            let defect = val.sub(gen);
            for low in 0..=k {
                if !defect.coeff(low).is_zero() {
                    return Err(Error::Internal(format!(
                        "factorization defect has unexpected order-{low} term"
                    )));
                }
            }
            let c = defect.coeff(k + 1).clone();
            if !c.is_zero() {
                nonzero = true;
            }
            z_step = z_step.add(&MultiVector::single(cc.total(), &[a], c));
        }
        if !nonzero {
            continue;
        }
        // solve delta H_{k+1} = phi_0^* Z_{k+1} with the homotopy
        let d = CECochain::from_components(
            cc,
            (0..nb)
                .map(|i| z_step.component(&[cc.q_index(i)]))
                .collect(),
        );
        if d.degree() < nb && !ce_delta(&d)?.is_zero() {
            return Err(Error::Internal(
                "pullback of the factorization defect is not delta-closed".into(),
            ));
        }
        let h_step = if d.is_zero() {
            Poly::zero(cc.total())
        } else {
            ce_homotopy(&d)?.component(&[])
        };
        // undeformed hamiltonian field of the step
        let dh = DiffForm::from_function(h_step.clone());
        let x0 = contract_form(&crate::tensor::exterior_d(&dh), &pi0)?;
        let v_step = x0.neg().sub(&z_step);
        for i in 0..nb {
            if !v_step.component(&[cc.q_index(i)]).is_zero() {
                return Err(Error::Internal(
                    "vertical correction has base components".into(),
                ));
            }
        }
        *h.coeff_mut(k + 1) = h.coeff(k + 1).add_ref(&h_step);
        v = v.add(&FormalVF::new(FormalSeries::single(k + 1, v_step, n))?);
    }
    // reassembly check on all chart generators
    let ham = hamiltonian_factor(&h, alg)?;
    for gen in &gens {
        let mut val = exp_lie(&v, gen);
        val = x_solution.apply(&val);
        val = ham.apply(&val);
        if val != x_bar.apply(gen) {
            return Err(Error::Internal("factorization reassembly failed".into()));
        }
    }
    Ok((h, v))
}

/// The single-factor formal diffeomorphism generated by the hamiltonian
/// field of `H` with respect to the full symplectic structure.
pub fn hamiltonian_factor(h: &FormalFunction, alg: &SymplecticAlgebra) -> Result<FormalDiffeo> {
    let field = sharp(alg.poisson().series(), &formal_d(h))?;
    let chart = h.coeff(0).chart().clone();
    let mut out = FormalDiffeo::identity(&chart, h.order());
    if !field.is_zero() {
        out.push_right(FormalVF::new(field)?);
    }
    Ok(out)
}

/// `Phi' = exp(L_X') rho^*` is anti-Poisson for `pi'` iff this defect
/// vanishes: `Phi'({f,g}_{pi'}) + {Phi' f, Phi' g}_omega`.
pub fn anti_morphism_bracket_defect(
    cc: &CotangentChart,
    diffeo: &FormalDiffeo,
    pi: &FormalPoisson,
    alg: &SymplecticAlgebra,
    f_base: &FormalFunction,
    g_base: &FormalFunction,
) -> FormalFunction {
    let lhs = diffeo.apply(&pi.bracket(f_base, g_base).map(|c| rho_pullback_poly(cc, c)));
    let rhs = alg.bracket(
        &diffeo.apply(&f_base.map(|c| rho_pullback_poly(cc, c))),
        &diffeo.apply(&g_base.map(|c| rho_pullback_poly(cc, c))),
    );
    lhs.add(&rhs)
}

/// Check recovery of a basic formal function under `is_basic` after applying
/// a diffeo; used by reports.
pub fn image_is_basic(cc: &CotangentChart, f: &FormalFunction) -> bool {
    is_basic(cc, f).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cotangent::{omega_can_series, z_field};
    use crate::formal::FormalSymplectic;
    use crate::poly::parse_poly;
    use crate::scalar::{frac, int};

    fn const_pi(cc: &CotangentChart, n: usize) -> FormalPoisson {
        let base = cc.base();
        let biv = MultiVector::coordinate(base, 0).wedge(&MultiVector::coordinate(base, 1));
        FormalPoisson::new(FormalSeries::single(1, biv, n)).unwrap()
    }

    #[test]
    fn log_identity_and_example() {
        let cc = CotangentChart::new(2);
        let n = 3;
        // images = generators -> Z = 0
        let images = base_generators(&cc, n);
        let z = log_along_projection(&cc, &images).unwrap();
        assert!(z.is_zero());
        // images = (q1 + lambda p1, q2) -> Z = lambda p1 d_q1 exactly
        let ch = cc.total();
        let f1 = FormalSeries::from_coeffs(vec![
            Poly::var(ch, 0),
            Poly::var(ch, cc.p_index(0)),
            Poly::zero(ch),
            Poly::zero(ch),
        ]);
        let f2 = FormalSeries::constant(Poly::var(ch, 1), n);
        let z = log_along_projection(&cc, &[f1, f2]).unwrap();
        let expect = MultiVector::coordinate(ch, 0).mul_poly(&Poly::var(ch, cc.p_index(0)));
        assert_eq!(*z.series().coeff(1), expect);
    }

    #[test]
    fn log_round_trip_constructed() {
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 4;
        let field = FormalSeries::single(
            1,
            MultiVector::coordinate(ch, 0).mul_poly(&parse_poly(ch, "p1 * q2").unwrap()),
            n,
        )
        .add(&FormalSeries::single(
            2,
            MultiVector::coordinate(ch, 1).mul_poly(&parse_poly(ch, "p2^2").unwrap()),
            n,
        ));
        let z = FormalVF::new(field).unwrap();
        let images: Vec<_> = base_generators(&cc, n)
            .iter()
            .map(|g| exp_lie(&z, g))
            .collect();
        let recovered = log_along_projection(&cc, &images).unwrap();
        for g in base_generators(&cc, n) {
            assert_eq!(exp_lie(&recovered, &g), exp_lie(&z, &g));
        }
    }

    #[test]
    fn log_rejects_wrong_zeroth_order() {
        let cc = CotangentChart::new(1);
        let ch = cc.total();
        let images = vec![FormalSeries::constant(Poly::var(ch, 1), 2)];
        assert!(log_along_projection(&cc, &images).is_err());
    }

    #[test]
    fn first_residual_closed_form() {
        // With the identity as partial solution, R_1^{ij} is the order-1
        // coefficient of {rho^* q_i, rho^* q_j}_omega minus rho^* pi_1(q_i, q_j).
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 2;
        let pi = const_pi(&cc, n);
        let dp12 =
            DiffForm::coordinate(ch, cc.p_index(0)).wedge(&DiffForm::coordinate(ch, cc.p_index(1)));
        let omega = FormalSeries::constant(crate::cotangent::omega_can(&cc), n)
            .add(&FormalSeries::single(1, dp12, n));
        let alg = SymplecticAlgebra::new(FormalSymplectic::new(omega).unwrap()).unwrap();
        let id = FormalDiffeo::identity(ch, n);
        let r1 = morphism_residual(&cc, &id, &pi, &alg, 0).unwrap();
        let q1 = FormalSeries::constant(Poly::var(ch, 0), n);
        let q2 = FormalSeries::constant(Poly::var(ch, 1), n);
        let sigma1 = alg.bracket(&q1, &q2).coeff(1).clone();
        let pi1 = pi.series().coeff(1).component(&[0, 1]);
        let expect = sigma1.sub_ref(&crate::cotangent::rho_pullback_poly(&cc, &pi1));
        assert_eq!(r1.component(&[0, 1]), expect);
    }

    #[test]
    fn trivial_morphism_problem() {
        let cc = CotangentChart::new(2);
        let n = 3;
        let pi = FormalPoisson::zero(cc.base(), n);
        let alg = SymplecticAlgebra::new(omega_can_series(&cc, n)).unwrap();
        let sol = solve_poisson_morphism(&cc, &pi, &alg).unwrap();
        assert!(sol.diffeo.is_identity());
        assert!(sol.residual_report.iter().all(|r| r.is_zero()));
    }

    #[test]
    fn self_equivalence_pair_is_solvable() {
        // (pi = lambda d1^d2, omega = omega_can + lambda dp1^dp2)
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 3;
        let pi = const_pi(&cc, n);
        let dp12 =
            DiffForm::coordinate(ch, cc.p_index(0)).wedge(&DiffForm::coordinate(ch, cc.p_index(1)));
        let omega = FormalSeries::constant(crate::cotangent::omega_can(&cc), n)
            .add(&FormalSeries::single(1, dp12, n));
        let alg = SymplecticAlgebra::new(FormalSymplectic::new(omega).unwrap()).unwrap();
        let sol = solve_poisson_morphism(&cc, &pi, &alg).unwrap();
        // residual report is all zero and the bracket identity holds on
        // products, both verified inside the solver; check a sample here
        let f = FormalSeries::constant(parse_poly(cc.base(), "q1 * q2").unwrap(), n);
        let g = FormalSeries::constant(parse_poly(cc.base(), "q1").unwrap(), n);
        assert!(morphism_bracket_defect(&cc, &sol.diffeo, &pi, &alg, &f, &g).is_zero());
    }

    #[test]
    fn commutant_of_trivial_data_is_identity() {
        let cc = CotangentChart::new(2);
        let n = 3;
        let pi = FormalPoisson::zero(cc.base(), n);
        let alg = SymplecticAlgebra::new(omega_can_series(&cc, n)).unwrap();
        let sol = solve_poisson_morphism(&cc, &pi, &alg).unwrap();
        let prime = solve_commutant(&cc, &sol, &alg).unwrap();
        assert!(prime.is_identity());
        let pi_prime = extract_commutant_poisson(&cc, &prime, &alg).unwrap();
        assert!(pi_prime.series().is_zero());
    }

    #[test]
    fn commutant_cross_validates_drift_construction() {
        // For the constant structure, exp(L_Z) rho^* itself commutes with the
        // solved morphism images under omega = omega_can + lambda dp1^dp2.
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 3;
        let pi = const_pi(&cc, n);
        let z = z_field(&cc, &pi).unwrap();
        let dp12 =
            DiffForm::coordinate(ch, cc.p_index(0)).wedge(&DiffForm::coordinate(ch, cc.p_index(1)));
        let omega = FormalSeries::constant(crate::cotangent::omega_can(&cc), n)
            .add(&FormalSeries::single(1, dp12, n));
        let alg = SymplecticAlgebra::new(FormalSymplectic::new(omega).unwrap()).unwrap();
        // rho^* is a morphism gauge-compatible with this omega only through
        // the solver; but the drift exponential must commute with plain
        // pullbacks, which are the k=0 morphism images of the other leg:
        let drift = FormalDiffeo::from_factors(ch, n, vec![z]);
        for f in base_generators(&cc, n) {
            for g in base_generators(&cc, n) {
                let a = drift.apply(&f);
                assert!(alg.bracket(&a, &g).is_zero());
            }
        }
    }

    #[test]
    fn extract_constant_case_is_rigid() {
        // Self-equivalence data for pi = lambda d1^d2: the extracted
        // commutant structure is -lambda d1^d2 (the anti-Poisson sign).
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 3;
        let pi = const_pi(&cc, n);
        let z = z_field(&cc, &pi).unwrap();
        let (omega, _) = crate::cotangent::omega_from_z(&cc, &z).unwrap();
        let alg = SymplecticAlgebra::new(omega).unwrap();
        let prime = FormalDiffeo::from_factors(ch, n, vec![z]);
        let extracted = extract_commutant_poisson(&cc, &prime, &alg).unwrap();
        let expect = pi.series().neg();
        assert_eq!(*extracted.series(), expect);
        // and Phi' is anti-Poisson for the extracted structure
        for f in base_test_functions(&cc, n) {
            for g in base_test_functions(&cc, n) {
                assert!(
                    anti_morphism_bracket_defect(&cc, &prime, &extracted, &alg, &f, &g).is_zero()
                );
            }
        }
    }

    #[test]
    fn image_inversion_detects_non_basic_functions() {
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 2;
        let id = FormalDiffeo::identity(ch, n);
        let f = FormalSeries::constant(Poly::var(ch, cc.p_index(0)), n);
        assert!(matches!(
            invert_on_image(&cc, &id, &f),
            Err(crate::error::Error::NotBasic(0))
        ));
    }

    #[test]
    fn classifying_action_trivial_and_rigidity() {
        let cc = CotangentChart::new(2);
        let n = 3;
        // B = 0, pi = 0 -> 0
        let b0 = FormalSeries::constant(DiffForm::zero(cc.base(), 2), n);
        let out = classifying_action(&cc, &b0, &FormalPoisson::zero(cc.base(), n)).unwrap();
        assert!(out.pi_b.series().is_zero());
        // first-order rigidity for a nontrivial pair
        let b = FormalSeries::constant(
            DiffForm::coordinate(cc.base(), 0)
                .wedge(&DiffForm::coordinate(cc.base(), 1))
                .scale(&int(2)),
            n,
        );
        let pi = const_pi(&cc, n);
        let out = classifying_action(&cc, &b, &pi).unwrap();
        assert_eq!(out.pi_b.series().coeff(1), pi.series().coeff(1));
        assert!(out.pi_b.vanishes_at_zero());
    }

    #[test]
    fn factorization_round_trips() {
        let cc = CotangentChart::new(2);
        let ch = cc.total();
        let n = 3;
        let pi = const_pi(&cc, n);
        let alg = {
            let z = z_field(&cc, &pi).unwrap();
            let (omega, _) = crate::cotangent::omega_from_z(&cc, &z).unwrap();
            SymplecticAlgebra::new(omega).unwrap()
        };
        let sol = solve_poisson_morphism(&cc, &pi, &alg).unwrap();
        // identical solutions factor trivially
        let (h, v) = factor_morphism_ambiguity(&cc, &sol.diffeo, &sol.diffeo, &alg).unwrap();
        assert!(h.is_zero());
        assert!(v.is_zero());
        // perturb by a hamiltonian factor
        let h0 = FormalSeries::single(1, parse_poly(ch, "q1 * p2 + 1/2 * p1^2").unwrap(), n);
        let ham = hamiltonian_factor(&h0, &alg).unwrap();
        let x_bar = ham.compose(&sol.diffeo);
        let (h_rec, v_rec) = factor_morphism_ambiguity(&cc, &sol.diffeo, &x_bar, &alg).unwrap();
        // reassembly is checked inside; the recovered H is nonzero
        assert!(!h_rec.is_zero());
        let _ = v_rec;
        // perturb by a vertical factor on the right
        let vert = FormalVF::new(FormalSeries::single(
            1,
            MultiVector::coordinate(ch, cc.p_index(0)).mul_poly(&parse_poly(ch, "p2").unwrap()),
            n,
        ))
        .unwrap();
        let x_bar2 = sol
            .diffeo
            .compose(&FormalDiffeo::from_factors(ch, n, vec![vert]));
        let (h2, v2) = factor_morphism_ambiguity(&cc, &sol.diffeo, &x_bar2, &alg).unwrap();
        assert!(!v2.is_zero());
        // the perturbed order receives no hamiltonian contribution
        assert!(h2.coeff(1).is_zero());
    }

    #[test]
    fn hamiltonian_factor_of_half_p_squared() {
        // H = lambda p1^2/2 on n=1: X_H(q1) = {H, q1} = -p1, so the factor
        // sends q1 to q1 - lambda p1 under omega_can
        let cc = CotangentChart::new(1);
        let ch = cc.total();
        let n = 2;
        let alg = SymplecticAlgebra::new(omega_can_series(&cc, n)).unwrap();
        let h = FormalSeries::single(1, parse_poly(ch, "p1^2").unwrap().scale(&frac(1, 2)), n);
        let ham = hamiltonian_factor(&h, &alg).unwrap();
        let q1 = FormalSeries::constant(Poly::var(ch, 0), n);
        let moved = ham.apply(&q1);
        assert_eq!(*moved.coeff(1), Poly::var(ch, cc.p_index(0)).neg_ref());
    }
}
