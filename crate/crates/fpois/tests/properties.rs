//! Randomized invariant suites: ring axioms for the polynomial kernel,
//! the graded Cartan/Schouten laws, chain-complex identities, gauge-action
//! laws and Courant-Dorfman structure identities. Everything is exact; a
//! single nonzero residual anywhere is a failure.

use fpois::ce::{ce_delta, ce_homotopy, d_ver, psi, psi_inv, vertical_homotopy, CECochain};
use fpois::chart::{Chart, CotangentChart};
use fpois::cotangent::{omega_can_series, rho_pullback_poly, rho_pullback_two_form};
use fpois::courant::{
    bfield_section, dorfman, dorfman_leibniz_defect, dorfman_symmetric_defect, flow_bfield,
    membership, pairing, transport_section, CourantSection,
};
use fpois::formal::{
    exp_lie, formal_d, gauge, jacobi_residual, FormalPoisson, FormalSymplectic, FormalVF,
    SymplecticAlgebra,
};
use fpois::poly::Poly;
use fpois::random::*;
use fpois::scalar::{frac, int};
use fpois::series::{series_mul, FormalSeries};
use fpois::tensor::{
    contract_form, contract_vf, exterior_d, lie_form, lie_multivector, schouten, DiffForm,
    MultiVector,
};
use proptest::prelude::*;

fn sign(x: i64) -> bool {
    x % 2 == 0
}

fn signed(t: &MultiVector, positive: bool) -> MultiVector {
    if positive {
        t.clone()
    } else {
        t.neg()
    }
}

// --- polynomial kernel -----------------------------------------------------

fn arb_poly(dim: usize) -> impl Strategy<Value = Poly> {
    let chart = Chart::base(dim);
    proptest::collection::vec(
        (proptest::collection::vec(0u32..3, dim), -4i64..=4, 1i64..=3),
        0..5,
    )
    .prop_map(move |terms| {
        let mut p = Poly::zero(&chart);
        for (exps, num, den) in terms {
            p = p.add_ref(&Poly::monomial(&chart, exps, frac(num, den)));
        }
        p
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn poly_ring_axioms(a in arb_poly(3), b in arb_poly(3), c in arb_poly(3)) {
        let ab_c = a.mul_ref(&b).mul_ref(&c);
        let a_bc = a.mul_ref(&b.mul_ref(&c));
        prop_assert_eq!(ab_c, a_bc);
        let lhs = a.mul_ref(&b.add_ref(&c));
        let rhs = a.mul_ref(&b).add_ref(&a.mul_ref(&c));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(a.mul_ref(&b), b.mul_ref(&a));
    }

    #[test]
    fn poly_text_round_trip(a in arb_poly(3)) {
        let s = a.to_string();
        let parsed = fpois::poly::parse_poly(a.chart(), &s).unwrap();
        prop_assert_eq!(parsed, a);
    }

    #[test]
    fn series_mul_assoc_comm(a in arb_poly(2), b in arb_poly(2), c in arb_poly(2)) {
        let n = 3;
        let sa = FormalSeries::from_coeffs(vec![a.clone(), b.clone(), c.clone(), a.clone()]);
        let sb = FormalSeries::from_coeffs(vec![c.clone(), a.clone(), b.clone(), b.clone()]);
        let sc = FormalSeries::constant(b.clone(), n);
        prop_assert_eq!(series_mul(&sa, &sb), series_mul(&sb, &sa));
        let lhs = series_mul(&series_mul(&sa, &sb), &sc);
        let rhs = series_mul(&sa, &series_mul(&sb, &sc));
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn radial_integral_linear_over_base() {
    let cc = CotangentChart::new(3);
    let ch = cc.total();
    let fib = cc.fiber_indices();
    for seed in 0..30u64 {
        let mut rng = rng_from_seed(seed);
        let f = random_poly(ch, 3, 4, &mut rng);
        let m_base = random_poly(cc.base(), 2, 3, &mut rng);
        let m = rho_pullback_poly(&cc, &m_base);
        for k in 1..=3 {
            assert_eq!(
                m.mul_ref(&f).fiber_radial_integral(&fib, k),
                m.mul_ref(&f.fiber_radial_integral(&fib, k))
            );
        }
    }
}

// --- Cartan / Schouten laws --------------------------------------------------

#[test]
fn schouten_graded_antisymmetry() {
    let ch = Chart::base(3);
    for seed in 0..60u64 {
        let mut rng = rng_from_seed(seed);
        let da = 1 + (seed as usize) % 2;
        let db = (seed as usize / 2) % 3;
        let a = random_multivector(&ch, da, 2, &mut rng);
        let b = random_multivector(&ch, db, 2, &mut rng);
        // [A,B] = -(-1)^{(a-1)(b-1)} [B,A]
        let lhs = schouten(&a, &b).unwrap();
        let ba = schouten(&b, &a).unwrap();
        let rhs = if sign((da as i64 - 1) * (db as i64 - 1)) {
            ba.neg()
        } else {
            ba
        };
        assert_eq!(lhs, rhs, "seed {seed}");
    }
}

#[test]
fn schouten_graded_jacobi() {
    let ch = Chart::base(3);
    for seed in 0..60u64 {
        let mut rng = rng_from_seed(seed);
        let da = 1 + (seed as usize) % 2;
        let db = 1 + (seed as usize / 2) % 2;
        let dc = (seed as usize / 4) % 3;
        let a = random_multivector(&ch, da, 2, &mut rng);
        let b = random_multivector(&ch, db, 2, &mut rng);
        let c = random_multivector(&ch, dc, 2, &mut rng);
        let (ia, ib, ic) = (da as i64, db as i64, dc as i64);
        let t1 = schouten(&a, &schouten(&b, &c).unwrap()).unwrap();
        let t2 = schouten(&b, &schouten(&c, &a).unwrap()).unwrap();
        let t3 = schouten(&c, &schouten(&a, &b).unwrap()).unwrap();
        let total = signed(&t1, sign((ia - 1) * (ic - 1)))
            .add(&signed(&t2, sign((ib - 1) * (ia - 1))))
            .add(&signed(&t3, sign((ic - 1) * (ib - 1))));
        assert!(total.is_zero(), "seed {seed}");
    }
}

#[test]
fn schouten_graded_leibniz() {
    let ch = Chart::base(3);
    for seed in 0..60u64 {
        let mut rng = rng_from_seed(seed);
        let da = 1 + (seed as usize) % 2;
        let db = (seed as usize / 2) % 2;
        let dc = (seed as usize / 4) % 2;
        let a = random_multivector(&ch, da, 2, &mut rng);
        let b = random_multivector(&ch, db, 2, &mut rng);
        let c = random_multivector(&ch, dc, 2, &mut rng);
        // [A, B ^ C] = [A,B] ^ C + (-1)^{(a-1) b} B ^ [A,C]
        let lhs = schouten(&a, &b.wedge(&c)).unwrap();
        let rhs = schouten(&a, &b).unwrap().wedge(&c).add(&signed(
            &b.wedge(&schouten(&a, &c).unwrap()),
            sign((da as i64 - 1) * db as i64),
        ));
        assert_eq!(lhs, rhs, "seed {seed}");
    }
}

#[test]
fn exterior_d_squares_to_zero() {
    let cc = CotangentChart::new(2);
    let ch = cc.total();
    for seed in 0..40u64 {
        let mut rng = rng_from_seed(seed);
        let deg = (seed as usize) % 3;
        let alpha = random_form(ch, deg, 3, &mut rng);
        assert!(exterior_d(&exterior_d(&alpha)).is_zero(), "seed {seed}");
    }
}

#[test]
fn cartan_commutator_identity() {
    // [L_X, i_Y] = i_{[X,Y]} on random forms
    let ch = Chart::base(3);
    for seed in 0..40u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_multivector(&ch, 1, 2, &mut rng);
        let y = random_multivector(&ch, 1, 2, &mut rng);
        let deg = 1 + (seed as usize) % 2;
        let omega = random_form(&ch, deg, 2, &mut rng);
        let lhs = lie_form(&x, &contract_vf(&y, &omega).unwrap())
            .sub(&contract_vf(&y, &lie_form(&x, &omega)).unwrap());
        let rhs = contract_vf(&schouten(&x, &y).unwrap(), &omega).unwrap();
        assert_eq!(lhs, rhs, "seed {seed}");
    }
}

#[test]
fn lie_derivative_is_derivation_on_functions() {
    let ch = Chart::base(3);
    for seed in 0..30u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_multivector(&ch, 1, 2, &mut rng);
        let f = random_poly(&ch, 3, 3, &mut rng);
        let g = random_poly(&ch, 3, 3, &mut rng);
        let lhs = fpois::tensor::vf_apply(&x, &f.mul_ref(&g));
        let rhs = fpois::tensor::vf_apply(&x, &f)
            .mul_ref(&g)
            .add_ref(&f.mul_ref(&fpois::tensor::vf_apply(&x, &g)));
        assert_eq!(lhs, rhs, "seed {seed}");
    }
}

#[test]
fn exp_lie_is_multiplicative_and_commutes_with_d() {
    let ch = Chart::base(2);
    let n = 3;
    for seed in 0..25u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_formal_vf(&ch, n, 2, &mut rng);
        let f = FormalSeries::constant(random_poly(&ch, 2, 3, &mut rng), n);
        let g = FormalSeries::constant(random_poly(&ch, 2, 3, &mut rng), n);
        let lhs = exp_lie(&x, &series_mul(&f, &g));
        let rhs = series_mul(&exp_lie(&x, &f), &exp_lie(&x, &g));
        assert_eq!(lhs, rhs, "multiplicative, seed {seed}");
        let df = formal_d(&f);
        assert_eq!(
            exp_lie(&x, &df),
            formal_d(&exp_lie(&x, &f)),
            "commutes with d, seed {seed}"
        );
        // inverse law on a 1-form
        let alpha = FormalSeries::constant(random_form(&ch, 1, 2, &mut rng), n);
        let back = exp_lie(&x.neg(), &exp_lie(&x, &alpha));
        assert_eq!(back, alpha, "inverse law, seed {seed}");
    }
}

// --- CE complex ---------------------------------------------------------------

#[test]
fn ce_delta_squares_to_zero_and_chain_map() {
    for n_dim in 1..=3 {
        let cc = CotangentChart::new(n_dim);
        for seed in 0..20u64 {
            let mut rng = rng_from_seed(seed);
            for deg in 0..n_dim {
                let d = random_cochain(&cc, deg, 3, &mut rng);
                let dd = ce_delta(&d).unwrap();
                if deg + 1 < n_dim {
                    assert!(ce_delta(&dd).unwrap().is_zero());
                }
                assert_eq!(d_ver(&psi(&d)), psi(&dd));
                assert_eq!(psi_inv(&psi(&d)), d);
            }
        }
    }
}

#[test]
fn ce_homotopy_identity_sweep() {
    for n_dim in 1..=3 {
        let cc = CotangentChart::new(n_dim);
        for seed in 0..15u64 {
            let mut rng = rng_from_seed(seed);
            for deg in 1..=n_dim {
                let d = random_cochain(&cc, deg, 3, &mut rng);
                let h_d = ce_homotopy(&d).unwrap();
                let mut total = if deg < n_dim {
                    ce_homotopy(&ce_delta(&d).unwrap()).unwrap()
                } else {
                    CECochain::zero(&cc, deg)
                };
                total = total.add(&ce_delta(&h_d).unwrap());
                assert_eq!(total, d, "n={n_dim} deg={deg} seed={seed}");
            }
        }
    }
}

#[test]
fn vertical_homotopy_identity() {
    let cc = CotangentChart::new(3);
    for seed in 0..15u64 {
        let mut rng = rng_from_seed(seed);
        for deg in 1..=2usize {
            let d = random_cochain(&cc, deg, 3, &mut rng);
            let eta = psi(&d);
            let lhs = d_ver(&vertical_homotopy(&eta).unwrap())
                .add(&vertical_homotopy(&d_ver(&eta)).unwrap());
            assert_eq!(lhs, eta, "deg={deg} seed={seed}");
        }
    }
}

// --- gauge action ----------------------------------------------------------

#[test]
fn gauge_action_law_and_jacobi_preservation() {
    for n_dim in 2..=3 {
        let ch = Chart::base(n_dim);
        let n = 4;
        for seed in 0..12u64 {
            let mut rng = rng_from_seed(1000 + seed);
            let pi = random_poisson_vanishing(&ch, n, 1, &mut rng);
            let b1 = random_closed_two_form(&ch, n, 1, &mut rng);
            let b2 = random_closed_two_form(&ch, n, 1, &mut rng);
            let one_then_two = gauge(&gauge(&pi, &b1).unwrap(), &b2).unwrap();
            let combined = gauge(&pi, &b1.add(&b2)).unwrap();
            assert_eq!(one_then_two, combined, "action law, seed {seed}");
            // Jacobi preservation is validated inside the constructor; the
            // residual of the result is recomputed here explicitly
            assert!(jacobi_residual(one_then_two.series()).is_zero());
            // round trip
            assert_eq!(
                gauge(&gauge(&pi, &b1).unwrap(), &b1.neg()).unwrap(),
                pi,
                "inverse, seed {seed}"
            );
        }
    }
}

#[test]
fn pullback_brackets_ignore_base_two_forms() {
    // {rho^* f, .}_{omega + rho^* B} = {rho^* f, .}_omega
    let cc = CotangentChart::new(2);
    let n = 3;
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(seed);
        let b = random_closed_two_form(cc.base(), n, 1, &mut rng);
        let omega = omega_can_series(&cc, n);
        let omega_b =
            FormalSymplectic::new(omega.series().add(&rho_pullback_two_form(&cc, &b))).unwrap();
        let alg = SymplecticAlgebra::new(omega).unwrap();
        let alg_b = SymplecticAlgebra::new(omega_b).unwrap();
        let f_base = random_poly(cc.base(), 2, 3, &mut rng);
        let f = FormalSeries::constant(rho_pullback_poly(&cc, &f_base), n);
        let g = FormalSeries::constant(random_poly(cc.total(), 2, 3, &mut rng), n);
        assert_eq!(alg.bracket(&f, &g), alg_b.bracket(&f, &g), "seed {seed}");
    }
}

#[test]
fn exp_maps_poisson_to_poisson() {
    let ch = Chart::base(3);
    let n = 3;
    for seed in 0..12u64 {
        let mut rng = rng_from_seed(seed);
        let pi = random_poisson_vanishing(&ch, n, 1, &mut rng);
        let x = random_formal_vf(&ch, n, 1, &mut rng);
        let moved = exp_lie(&x, pi.series());
        assert!(jacobi_residual(&moved).is_zero(), "seed {seed}");
    }
}

// --- symplectic inversion ----------------------------------------------------

#[test]
fn invert_symplectic_involution() {
    let cc = CotangentChart::new(2);
    let ch = cc.total();
    let n = 3;
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(seed);
        // omega_can plus a random closed higher-order perturbation
        let mut coeffs = vec![fpois::cotangent::omega_can(&cc)];
        for _ in 1..=n {
            let theta = random_form(ch, 1, 2, &mut rng);
            coeffs.push(exterior_d(&theta));
        }
        let omega = FormalSymplectic::new(FormalSeries::from_coeffs(coeffs)).unwrap();
        let pi = omega.invert().unwrap();
        // invert back through the component matrix: pi is itself a formal
        // "symplectic-like" matrix inversion; check the defining mutual
        // inverse up to the sign convention instead
        let dim = ch.dim();
        for a in 0..dim {
            let dxa = FormalSeries::constant(DiffForm::coordinate(ch, a), n);
            let v = fpois::formal::sharp(pi.series(), &dxa).unwrap();
            let back = fpois::formal::flat(omega.series(), &v).unwrap();
            assert_eq!(back, dxa.neg(), "omega_flat pi_sharp = -id, seed {seed}");
        }
    }
}

// --- Courant-Dorfman ---------------------------------------------------------

fn random_section(
    cc: &CotangentChart,
    n: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> CourantSection {
    let ch = cc.total();
    let x = FormalSeries::from_coeffs((0..=n).map(|_| random_multivector(ch, 1, 2, rng)).collect());
    let alpha = FormalSeries::from_coeffs((0..=n).map(|_| random_form(ch, 1, 2, rng)).collect());
    CourantSection::new(x, alpha).unwrap()
}

#[test]
fn dorfman_structure_identities() {
    let cc = CotangentChart::new(2);
    let n = 2;
    for seed in 0..15u64 {
        let mut rng = rng_from_seed(seed);
        let e1 = random_section(&cc, n, &mut rng);
        let e2 = random_section(&cc, n, &mut rng);
        let f = FormalSeries::constant(random_poly(cc.total(), 2, 2, &mut rng), n);
        assert!(
            dorfman_leibniz_defect(&e1, &e2, &f).is_zero(),
            "seed {seed}"
        );
        assert!(dorfman_symmetric_defect(&e1, &e2).is_zero(), "seed {seed}");
    }
}

#[test]
fn bfield_is_dorfman_automorphism() {
    let cc = CotangentChart::new(2);
    let ch = cc.total();
    let n = 2;
    for seed in 0..15u64 {
        let mut rng = rng_from_seed(seed);
        let b = random_closed_two_form(ch, n, 1, &mut rng);
        let e1 = random_section(&cc, n, &mut rng);
        let e2 = random_section(&cc, n, &mut rng);
        let lhs = dorfman(&bfield_section(&b, &e1), &bfield_section(&b, &e2));
        let rhs = bfield_section(&b, &dorfman(&e1, &e2));
        assert_eq!(lhs, rhs, "seed {seed}");
        // pairing is preserved
        assert_eq!(
            pairing(&bfield_section(&b, &e1), &bfield_section(&b, &e2)),
            pairing(&e1, &e2)
        );
    }
}

#[test]
fn flow_one_parameter_law_random() {
    let cc = CotangentChart::new(2);
    let ch = cc.total();
    let n = 2;
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_formal_vf(ch, n, 1, &mut rng);
        let b = random_closed_two_form(ch, n, 1, &mut rng);
        let s = random_section(&cc, n, &mut rng);
        let half = flow_bfield(&x, &b, &frac(1, 2)).unwrap();
        let full = flow_bfield(&x, &b, &int(1)).unwrap();
        assert_eq!(half.apply(&half.apply(&s)), full.apply(&s), "seed {seed}");
    }
}

#[test]
fn backward_frames_involutive_random() {
    for n_dim in 2..=3 {
        let cc = CotangentChart::new(n_dim);
        let n = 3;
        for seed in 0..6u64 {
            let mut rng = rng_from_seed(seed);
            let pi = random_poisson_vanishing(cc.base(), n, 1, &mut rng);
            let frame = fpois::courant::backward_generators(&cc, &pi).unwrap();
            assert!(
                fpois::courant::frame_involutive(&frame),
                "n={n_dim} seed={seed}"
            );
        }
    }
}

#[test]
fn membership_solves_constructed_combinations() {
    let cc = CotangentChart::new(2);
    let n = 2;
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(seed);
        let pi = random_poisson_vanishing(cc.base(), n, 1, &mut rng);
        let frame = fpois::courant::backward_generators(&cc, &pi).unwrap();
        let mut s = CourantSection::zero(cc.total(), n);
        let mut coeffs = Vec::new();
        for a in &frame.a {
            let f = FormalSeries::from_coeffs(
                (0..=n)
                    .map(|_| random_poly(cc.total(), 1, 2, &mut rng))
                    .collect(),
            );
            s = s.add(&a.mul_function(&f));
            coeffs.push(f);
        }
        for v in &frame.v {
            let g = FormalSeries::from_coeffs(
                (0..=n)
                    .map(|_| random_poly(cc.total(), 1, 2, &mut rng))
                    .collect(),
            );
            s = s.add(&v.mul_function(&g));
            coeffs.push(g);
        }
        let m = membership(&s, &frame).expect("constructed member");
        let recovered: Vec<_> = m.a_coeffs.iter().chain(&m.v_coeffs).cloned().collect();
        assert_eq!(recovered, coeffs, "seed {seed}");
    }
}

#[test]
fn lie_derivative_on_multivectors_matches_bracket() {
    let ch = Chart::base(3);
    for seed in 0..20u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_multivector(&ch, 1, 2, &mut rng);
        let w = random_multivector(&ch, 2, 2, &mut rng);
        assert_eq!(lie_multivector(&x, &w), schouten(&x, &w).unwrap());
    }
}

#[test]
fn transported_sections_respect_pairing() {
    // exp(L_X) preserves the pairing and the Dorfman bracket
    let cc = CotangentChart::new(2);
    let ch = cc.total();
    let n = 2;
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_formal_vf(ch, n, 1, &mut rng);
        let e1 = random_section(&cc, n, &mut rng);
        let e2 = random_section(&cc, n, &mut rng);
        let t1 = transport_section(&x, &e1);
        let t2 = transport_section(&x, &e2);
        assert_eq!(
            pairing(&t1, &t2),
            exp_lie(&x, &pairing(&e1, &e2)),
            "pairing, seed {seed}"
        );
        assert_eq!(
            dorfman(&t1, &t2),
            transport_section(&x, &dorfman(&e1, &e2)),
            "bracket, seed {seed}"
        );
    }
}

#[test]
fn courant_derivation_is_an_infinitesimal_symmetry() {
    // the pair (X, b) acts by [X,Y] + (L_X beta - i_Y b); this is a module
    // derivation, a bracket derivation, and pairing-compatible
    use fpois::courant::courant_derivation;
    let cc = CotangentChart::new(2);
    let ch = cc.total();
    let n = 2;
    for seed in 0..10u64 {
        let mut rng = rng_from_seed(11_000 + seed);
        let x = random_formal_vf(ch, n, 1, &mut rng);
        let b = random_closed_two_form(ch, n, 1, &mut rng);
        let e1 = random_section(&cc, n, &mut rng);
        let e2 = random_section(&cc, n, &mut rng);
        let f = FormalSeries::constant(random_poly(ch, 2, 2, &mut rng), n);
        // Leibniz over the module action
        let lhs = courant_derivation(&x, &b, &e1.mul_function(&f));
        let xf = x.derive(&f);
        let rhs = courant_derivation(&x, &b, &e1)
            .mul_function(&f)
            .add(&e1.mul_function(&xf));
        assert_eq!(lhs, rhs, "module Leibniz, seed {seed}");
        // derivation of the Dorfman bracket
        let lhs = courant_derivation(&x, &b, &dorfman(&e1, &e2));
        let rhs = dorfman(&courant_derivation(&x, &b, &e1), &e2)
            .add(&dorfman(&e1, &courant_derivation(&x, &b, &e2)));
        assert_eq!(lhs, rhs, "bracket derivation, seed {seed}");
        // compatibility with the pairing: L_X<e1,e2> = <De1,e2> + <e1,De2>
        let lhs = x.derive(&pairing(&e1, &e2));
        let rhs = pairing(&courant_derivation(&x, &b, &e1), &e2)
            .add(&pairing(&e1, &courant_derivation(&x, &b, &e2)));
        assert_eq!(lhs, rhs, "pairing compatibility, seed {seed}");
    }
}

#[test]
fn independent_solves_run_in_parallel() {
    // solver state is confined to one computation; distinct solves share
    // nothing and may run on separate threads
    use fpois::solver::classifying_action;
    let handles: Vec<_> = (0..3u64)
        .map(|seed| {
            std::thread::spawn(move || {
                let cc = CotangentChart::new(2);
                let mut rng = rng_from_seed(12_000 + seed);
                let pi = random_poisson_vanishing(cc.base(), 3, 1, &mut rng);
                let b = random_closed_two_form(cc.base(), 3, 1, &mut rng);
                let out = classifying_action(&cc, &b, &pi).unwrap();
                (pi, out.pi_b)
            })
        })
        .collect();
    for h in handles {
        let (pi, pi_b) = h.join().expect("solver thread");
        assert_eq!(pi_b.series().coeff(1), pi.series().coeff(1));
    }
}

#[test]
fn morita_witness_with_nonconstant_bfield() {
    // exact (hence closed) B with polynomial coefficients against the
    // linear so(3)-type structure
    let cc = CotangentChart::new(3);
    let n = 3;
    let pi = so3_poisson(cc.base(), n);
    let theta = DiffForm::coordinate(cc.base(), 1)
        .mul_poly(&Poly::var(cc.base(), 0).mul_ref(&Poly::var(cc.base(), 2)));
    let b = FormalSeries::constant(exterior_d(&theta), n);
    let w = fpois::courant::morita_witness(&cc, &pi, &b).unwrap();
    assert!(w.report.pass(), "{:?}", w.report);
}

#[test]
fn gauged_graphs_match_bfield_frames() {
    // the frame of tau_B(pi) and the B-translate of the frame of pi span
    // the same submodule
    let cc = CotangentChart::new(2);
    let n = 3;
    for seed in 0..6u64 {
        let mut rng = rng_from_seed(9000 + seed);
        let pi = random_poisson_vanishing(cc.base(), n, 1, &mut rng);
        let b = random_closed_two_form(cc.base(), n, 1, &mut rng);
        assert!(
            fpois::courant::gauge_graph_compatibility(&cc, &pi, &b).unwrap(),
            "seed {seed}"
        );
    }
}

#[test]
fn exp_lie_commutes_with_wedge() {
    let ch = Chart::base(3);
    let n = 3;
    for seed in 0..15u64 {
        let mut rng = rng_from_seed(seed);
        let x = random_formal_vf(&ch, n, 1, &mut rng);
        let alpha = FormalSeries::constant(random_form(&ch, 1, 2, &mut rng), n);
        let beta = FormalSeries::constant(random_form(&ch, 1, 2, &mut rng), n);
        let wedge = |a: &FormalSeries<DiffForm>, b: &FormalSeries<DiffForm>| {
            fpois::series::cauchy(a, b, DiffForm::zero(&ch, 2), |x, y| x.wedge(y))
        };
        let lhs = exp_lie(&x, &wedge(&alpha, &beta));
        let rhs = wedge(&exp_lie(&x, &alpha), &exp_lie(&x, &beta));
        assert_eq!(lhs, rhs, "seed {seed}");
    }
}

#[test]
fn classifying_action_stable_under_exact_shifts() {
    // For B' = B + (exact forms in positive orders), both runs produce
    // certified representatives of the same class: the pipelines pass, the
    // outputs agree at order 1 and both Morita witnesses certify the gauge
    // classes, which coincide up to the exact shift.
    use fpois::courant::morita_witness;
    use fpois::solver::classifying_action;
    let cc = CotangentChart::new(2);
    let base = cc.base().clone();
    let n = 3;
    for seed in 0..3u64 {
        let mut rng = rng_from_seed(7000 + seed);
        let pi = random_poisson_vanishing(&base, n, 1, &mut rng);
        let b = random_closed_two_form(&base, n, 1, &mut rng);
        let mut shift = FormalSeries::constant(DiffForm::zero(&base, 2), n);
        for k in 1..=n {
            let theta = random_form(&base, 1, 2, &mut rng);
            shift = shift.add(&FormalSeries::single(k, exterior_d(&theta), n));
        }
        let b_shifted = b.add(&shift);
        let out_a = classifying_action(&cc, &b, &pi).unwrap();
        let out_b = classifying_action(&cc, &b_shifted, &pi).unwrap();
        assert_eq!(
            out_a.pi_b.series().coeff(1),
            out_b.pi_b.series().coeff(1),
            "seed {seed}"
        );
        assert!(morita_witness(&cc, &pi, &b).unwrap().report.pass());
        assert!(morita_witness(&cc, &pi, &b_shifted).unwrap().report.pass());
    }
}

#[test]
fn zero_poisson_is_witnessed_by_zero_vf() {
    let ch = Chart::base(2);
    let n = 3;
    let pi = FormalPoisson::zero(&ch, n);
    let x = FormalVF::zero(&ch, n);
    assert!(fpois::formal::check_equivalence_witness(&pi, &pi, &x));
}

#[test]
fn contraction_is_degree_minus_one_derivation() {
    // i_alpha(A ^ B) = i_alpha(A) ^ B + (-1)^a A ^ i_alpha(B)
    let ch = Chart::base(3);
    for seed in 0..20u64 {
        let mut rng = rng_from_seed(seed);
        let da = 1 + (seed as usize) % 2;
        let db = 1;
        let a = random_multivector(&ch, da, 2, &mut rng);
        let b = random_multivector(&ch, db, 2, &mut rng);
        let alpha = random_form(&ch, 1, 2, &mut rng);
        let lhs = contract_form(&alpha, &a.wedge(&b));
        if a.wedge(&b).degree() > ch.dim() || a.wedge(&b).is_zero() {
            continue;
        }
        let lhs = lhs.unwrap();
        let term1 = contract_form(&alpha, &a).unwrap().wedge(&b);
        let term2 = signed(
            &a.wedge(&contract_form(&alpha, &b).unwrap()),
            sign(da as i64),
        );
        assert_eq!(lhs, term1.add(&term2), "seed {seed}");
    }
}
