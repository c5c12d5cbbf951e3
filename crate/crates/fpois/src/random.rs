//! Seeded random generators for fuzz suites and property tests.
//!
//! Everything is driven by a `ChaCha8Rng`, so a fixed seed reproduces the
//! same inputs on every platform. Random formal Poisson structures are drawn
//! from a family that is Poisson by construction (single-pair bivector
//! series, optionally conjugated by a formal diffeomorphism and gauged by a
//! closed form); random closed 2-forms combine constant forms with exact
//! ones.

use crate::ce::CECochain;
use crate::chart::{Chart, CotangentChart};
use crate::formal::{exp_lie, gauge, FormalPoisson, FormalTwoForm, FormalVF};
use crate::poly::Poly;
use crate::scalar::{frac, Rat};
use crate::series::FormalSeries;
use crate::tensor::{exterior_d, DiffForm, MultiVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonzero rational.
pub fn random_rat(rng: &mut ChaCha8Rng) -> Rat {
    let num = loop {
        let n = rng.gen_range(-3i64..=3);
        if n != 0 {
            break n;
        }
    };
    let den = rng.gen_range(1i64..=2);
    frac(num, den)
}

/// Sparse polynomial with a few terms of bounded total degree.
pub fn random_poly(
    chart: &Arc<Chart>,
    max_degree: u32,
    max_terms: usize,
    rng: &mut ChaCha8Rng,
) -> Poly {
    let dim = chart.dim();
    let terms = rng.gen_range(1..=max_terms.max(1));
    let mut out = Poly::zero(chart);
    for _ in 0..terms {
        let mut exps = vec![0u32; dim];
        let deg = rng.gen_range(0..=max_degree);
        for _ in 0..deg {
            let i = rng.gen_range(0..dim);
            exps[i] += 1;
        }
        out = out.add_ref(&Poly::monomial(chart, exps, random_rat(rng)));
    }
    out
}

pub fn random_multivector(
    chart: &Arc<Chart>,
    degree: usize,
    max_coeff_degree: u32,
    rng: &mut ChaCha8Rng,
) -> MultiVector {
    let tuples = crate::ce::increasing_tuples(chart.dim(), degree);
    let mut out = MultiVector::zero(chart, degree);
    for t in tuples {
        if rng.gen_bool(0.7) {
            out = out.add(&MultiVector::single(
                chart,
                &t,
                random_poly(chart, max_coeff_degree, 2, rng),
            ));
        }
    }
    out
}

pub fn random_form(
    chart: &Arc<Chart>,
    degree: usize,
    max_coeff_degree: u32,
    rng: &mut ChaCha8Rng,
) -> DiffForm {
    let tuples = crate::ce::increasing_tuples(chart.dim(), degree);
    let mut out = DiffForm::zero(chart, degree);
    for t in tuples {
        if rng.gen_bool(0.7) {
            out = out.add(&DiffForm::single(
                chart,
                &t,
                random_poly(chart, max_coeff_degree, 2, rng),
            ));
        }
    }
    out
}

/// Formal vector field with vanishing zeroth order.
pub fn random_formal_vf(
    chart: &Arc<Chart>,
    n: usize,
    max_coeff_degree: u32,
    rng: &mut ChaCha8Rng,
) -> FormalVF {
    let mut coeffs = vec![MultiVector::zero(chart, 1)];
    for _ in 1..=n {
        coeffs.push(random_multivector(chart, 1, max_coeff_degree, rng));
    }
    FormalVF::new(FormalSeries::from_coeffs(coeffs)).expect("zeroth order vanishes")
}

/// Closed formal 2-form on a chart: constant-coefficient forms plus exact
/// pieces, order by order.
pub fn random_closed_two_form(
    chart: &Arc<Chart>,
    n: usize,
    max_coeff_degree: u32,
    rng: &mut ChaCha8Rng,
) -> FormalTwoForm {
    let mut coeffs = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        let mut c = DiffForm::zero(chart, 2);
        // constant part
        let tuples = crate::ce::increasing_tuples(chart.dim(), 2);
        for t in tuples {
            if rng.gen_bool(0.4) {
                c = c.add(&DiffForm::single(
                    chart,
                    &t,
                    Poly::constant(chart, random_rat(rng)),
                ));
            }
        }
        // exact part
        if rng.gen_bool(0.7) {
            let theta = random_form(chart, 1, max_coeff_degree, rng);
            c = c.add(&exterior_d(&theta));
        }
        coeffs.push(c);
    }
    FormalSeries::from_coeffs(coeffs)
}

/// Formal Poisson structure vanishing in zeroth order: a single-pair
/// bivector series (Poisson for any coefficients), optionally pushed by a
/// formal diffeomorphism and gauged by a random closed form.
pub fn random_poisson_vanishing(
    chart: &Arc<Chart>,
    n: usize,
    max_coeff_degree: u32,
    rng: &mut ChaCha8Rng,
) -> FormalPoisson {
    let dim = chart.dim();
    let mut coeffs = vec![MultiVector::zero(chart, 2)];
    if dim >= 2 {
        let i = rng.gen_range(0..dim - 1);
        let j = rng.gen_range(i + 1..dim);
        let pair = MultiVector::coordinate(chart, i).wedge(&MultiVector::coordinate(chart, j));
        for _ in 1..=n {
            let c = if rng.gen_bool(0.8) {
                random_poly(chart, max_coeff_degree, 2, rng)
            } else {
                Poly::zero(chart)
            };
            coeffs.push(pair.mul_poly(&c));
        }
    } else {
        for _ in 1..=n {
            coeffs.push(MultiVector::zero(chart, 2));
        }
    }
    let mut pi = FormalPoisson::new(FormalSeries::from_coeffs(coeffs)).expect("single-pair series");
    if rng.gen_bool(0.5) {
        let x = random_formal_vf(chart, n, 1, rng);
        pi = FormalPoisson::new(exp_lie(&x, pi.series())).expect("conjugation preserves Jacobi");
    }
    if rng.gen_bool(0.4) {
        let b = random_closed_two_form(chart, n, 1, rng);
        pi = gauge(&pi, &b).expect("gauge preserves Jacobi");
    }
    pi
}

/// The linear so(3)-type structure on a 3-dimensional chart, at order 1.
pub fn so3_poisson(chart: &Arc<Chart>, n: usize) -> FormalPoisson {
    assert_eq!(chart.dim(), 3);
    let d = |i: usize| MultiVector::coordinate(chart, i);
    let q = |i: usize| Poly::var(chart, i);
    let biv = d(1)
        .wedge(&d(2))
        .mul_poly(&q(0))
        .add(&d(2).wedge(&d(0)).mul_poly(&q(1)))
        .add(&d(0).wedge(&d(1)).mul_poly(&q(2)));
    FormalPoisson::new(FormalSeries::single(1, biv, n)).expect("so(3) is Poisson")
}

/// Random cochain of the multiderivation complex.
pub fn random_cochain(
    cc: &CotangentChart,
    degree: usize,
    max_coeff_degree: u32,
    rng: &mut ChaCha8Rng,
) -> CECochain {
    let mut out = CECochain::zero(cc, degree);
    for t in crate::ce::increasing_tuples(cc.base_dim(), degree) {
        if rng.gen_bool(0.8) {
            out.add_term(t, random_poly(cc.total(), max_coeff_degree, 3, rng));
        }
    }
    out
}
