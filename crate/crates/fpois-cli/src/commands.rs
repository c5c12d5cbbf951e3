//! Command implementations. Each returns a deterministic `Report`; input
//! problems surface as `CliError::Input`, broken internal assertions as
//! `CliError::Internal`, and ordinary check failures stay inside the report.

use crate::job::JobSpec;
use crate::report::{series_lines, Report};
use fpois::ce::{ce_delta, ce_homotopy, d_ver, psi, CECochain};
use fpois::chart::CotangentChart;
use fpois::cotangent::omega_can_series;
use fpois::courant::{
    backward_generators, bfield_section, dorfman, dorfman_leibniz_defect, dorfman_symmetric_defect,
    frame_involutive, morita_witness, pairing, self_equivalence, CourantSection,
};
use fpois::error::Error as FpError;
use fpois::formal::{exp_lie, gauge, jacobi_residual, FormalPoisson};
use fpois::random::{
    random_closed_two_form, random_cochain, random_form, random_formal_vf, random_multivector,
    random_poisson_vanishing, random_poly, rng_from_seed,
};
use fpois::series::FormalSeries;
use fpois::solver::classifying_action;
use fpois::tensor::{exterior_d, schouten};
use rayon::prelude::*;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Internal(m) => write!(f, "internal assertion: {m}"),
        }
    }
}

/// Classify library errors: anything that indicates malformed or
/// out-of-contract input is an input error; broken invariants are internal.
fn lift(e: FpError) -> CliError {
    match e {
        FpError::Internal(m) => CliError::Internal(m),
        FpError::NotBasic(k) => CliError::Internal(format!(
            "bracket left the commutant image at lambda order {k}"
        )),
        other => CliError::Input(other.to_string()),
    }
}

fn poisson_input(job: &JobSpec, cc: &CotangentChart) -> Result<FormalPoisson, CliError> {
    let pi = job.poisson(cc.base()).map_err(|e| match e {
        // a Jacobi violation in the input is a bad job, not a broken solver
        FpError::Internal(_) => CliError::Input("pi does not satisfy the Jacobi identity".into()),
        other => lift(other),
    })?;
    pi.require_vanishing_zeroth().map_err(lift)?;
    Ok(pi)
}

pub fn cmd_jacobi(job: &JobSpec) -> Result<Report, CliError> {
    let cc = job.cotangent();
    let mut report = Report::new("jacobi", job.dimension, job.truncation_order);
    let pi = job.pi_series(cc.base()).map_err(lift)?;
    report.push_output("pi", series_lines(&pi, |c| c.is_zero()));
    let residual = jacobi_residual(&pi);
    report.push_output("jacobi_residual", series_lines(&residual, |c| c.is_zero()));
    let pass = residual.is_zero();
    let payload = if pass {
        "0".to_string()
    } else {
        let k = residual.lowest_order().unwrap();
        format!("lambda^{k} * ({})", residual.coeff(k))
    };
    report.push_check("jacobi_residual_zero", pass, payload);
    Ok(report)
}

pub fn cmd_gauge(job: &JobSpec) -> Result<Report, CliError> {
    let cc = job.cotangent();
    let mut report = Report::new("gauge", job.dimension, job.truncation_order);
    let pi = poisson_input(job, &cc)?;
    let b = job.b_series(cc.base()).map_err(lift)?;
    let forward = gauge(&pi, &b).map_err(lift)?;
    let backward = gauge(&pi, &b.neg()).map_err(lift)?;
    report.push_output("tau_B_pi", series_lines(forward.series(), |c| c.is_zero()));
    report.push_output(
        "tau_minus_B_pi",
        series_lines(backward.series(), |c| c.is_zero()),
    );
    let round = gauge(&forward, &b.neg()).map_err(lift)?;
    report.push_check(
        "gauge_round_trip",
        round == pi,
        if round == pi {
            "0".into()
        } else {
            "nonzero".into()
        },
    );
    let residual = jacobi_residual(forward.series());
    report.push_check(
        "gauge_preserves_jacobi",
        residual.is_zero(),
        if residual.is_zero() {
            "0".into()
        } else {
            let k = residual.lowest_order().unwrap();
            format!("lambda^{k} * ({})", residual.coeff(k))
        },
    );
    Ok(report)
}

pub fn cmd_self_equiv(job: &JobSpec) -> Result<Report, CliError> {
    let cc = job.cotangent();
    let mut report = Report::new("self-equiv", job.dimension, job.truncation_order);
    let pi = poisson_input(job, &cc)?;
    let se = self_equivalence(&cc, &pi).map_err(lift)?;
    report.push_output("Z", series_lines(se.z.series(), |c| c.is_zero()));
    report.push_output("omega", series_lines(se.omega.series(), |c| c.is_zero()));
    for (k, theta) in se.potentials.iter().enumerate() {
        report.push_output(
            &format!("theta_{}", k + 1),
            series_lines(theta, |c| c.is_zero()),
        );
    }
    report.extend_checks(&se.report.checks);
    Ok(report)
}

pub fn cmd_classify(job: &JobSpec) -> Result<Report, CliError> {
    let cc = job.cotangent();
    let mut report = Report::new("classify", job.dimension, job.truncation_order);
    let pi = poisson_input(job, &cc)?;
    let b = job.b_series(cc.base()).map_err(lift)?;
    let out = classifying_action(&cc, &b, &pi).map_err(lift)?;
    report.push_output("pi_B", series_lines(out.pi_b.series(), |c| c.is_zero()));
    for (k, r) in out.morphism.residual_report.iter().enumerate() {
        if !r.is_zero() {
            report.push_output(
                &format!("morphism_residual_{}", k + 1),
                vec![format!("{r}")],
            );
        }
    }
    report.push_check(
        "solver_residuals_zero",
        out.morphism.residual_report.iter().all(|r| r.is_zero()),
        "0".into(),
    );
    report.push_check(
        "pi_B_vanishes_at_order_zero",
        out.pi_b.vanishes_at_zero(),
        "0".into(),
    );
    let rigid = out.pi_b.series().coeff(1) == pi.series().coeff(1);
    report.push_check("first_order_rigidity", rigid, "0".into());
    report.push_check(
        "pi_B_jacobi",
        jacobi_residual(out.pi_b.series()).is_zero(),
        "0".into(),
    );
    // cross-certificate: the main-theorem witness for the same data
    let witness = morita_witness(&cc, &pi, &b).map_err(lift)?;
    report.push_output(
        "tau_minus_B_pi",
        series_lines(witness.pi_gauge.series(), |c| c.is_zero()),
    );
    report.push_check(
        "morita_witness_for_gauge_class",
        witness.report.pass(),
        "0".into(),
    );
    Ok(report)
}

pub fn cmd_morita(job: &JobSpec) -> Result<Report, CliError> {
    let cc = job.cotangent();
    let mut report = Report::new("morita", job.dimension, job.truncation_order);
    let pi = poisson_input(job, &cc)?;
    let b = job.b_series(cc.base()).map_err(lift)?;
    let w = morita_witness(&cc, &pi, &b).map_err(lift)?;
    report.push_output(
        "tau_minus_B_pi",
        series_lines(w.pi_gauge.series(), |c| c.is_zero()),
    );
    report.push_output("Z", series_lines(w.z.series(), |c| c.is_zero()));
    report.push_output("omega", series_lines(w.omega.series(), |c| c.is_zero()));
    report.push_output("omega_B", series_lines(w.omega_b.series(), |c| c.is_zero()));
    report.extend_checks(&w.report.checks);
    Ok(report)
}

pub fn cmd_homotopy_check(job: &JobSpec) -> Result<Report, CliError> {
    let cc = job.cotangent();
    let mut report = Report::new("homotopy-check", job.dimension, job.truncation_order);
    let seed = job.seed.unwrap_or(0);
    report.seed = Some(seed);
    let cases = 50usize;
    let n_dim = job.dimension;
    let mut homotopy_failures = 0usize;
    let mut chain_failures = 0usize;
    let mut delta_sq_failures = 0usize;
    for case in 0..cases {
        let mut rng = rng_from_seed(seed.wrapping_add(case as u64));
        for deg in 1..=n_dim {
            let d = random_cochain(&cc, deg, 3, &mut rng);
            let dh = ce_delta(&ce_homotopy(&d).map_err(lift)?).map_err(lift)?;
            let hd = if deg < n_dim {
                ce_homotopy(&ce_delta(&d).map_err(lift)?).map_err(lift)?
            } else {
                CECochain::zero(&cc, deg)
            };
            if dh.add(&hd) != d {
                homotopy_failures += 1;
            }
        }
        for deg in 0..n_dim {
            let d = random_cochain(&cc, deg, 3, &mut rng);
            let dd = ce_delta(&d).map_err(lift)?;
            if d_ver(&psi(&d)) != psi(&dd) {
                chain_failures += 1;
            }
            if deg + 1 < n_dim && !ce_delta(&dd).map_err(lift)?.is_zero() {
                delta_sq_failures += 1;
            }
        }
    }
    report.push_check(
        "homotopy_identity",
        homotopy_failures == 0,
        format!("{homotopy_failures} failures / {cases} cases"),
    );
    report.push_check(
        "chain_map",
        chain_failures == 0,
        format!("{chain_failures} failures / {cases} cases"),
    );
    report.push_check(
        "delta_squared",
        delta_sq_failures == 0,
        format!("{delta_sq_failures} failures / {cases} cases"),
    );
    Ok(report)
}

/// One fuzz case: every module-level invariant on fresh random data.
/// Returns the names of violated invariants.
fn fuzz_case(n_dim: usize, n: usize, seed: u64) -> Result<Vec<&'static str>, FpError> {
    let mut bad = Vec::new();
    let cc = CotangentChart::new(n_dim);
    let base = cc.base().clone();
    let ch = cc.total().clone();
    let mut rng = rng_from_seed(seed);

    // Schouten graded antisymmetry on a (1,2) pair
    let x = random_multivector(&base, 1, 2, &mut rng);
    let w = random_multivector(&base, 2, 2, &mut rng);
    let ab = schouten(&x, &w)?;
    let ba = schouten(&w, &x)?;
    if ab != ba.neg() {
        bad.push("schouten_antisymmetry");
    }

    // d^2 = 0
    let alpha = random_form(&ch, 1, 2, &mut rng);
    if !exterior_d(&exterior_d(&alpha)).is_zero() {
        bad.push("d_squared");
    }

    // gauge action law
    let pi = random_poisson_vanishing(&base, n, 1, &mut rng);
    let b1 = random_closed_two_form(&base, n, 1, &mut rng);
    let b2 = random_closed_two_form(&base, n, 1, &mut rng);
    if gauge(&gauge(&pi, &b1)?, &b2)? != gauge(&pi, &b1.add(&b2))? {
        bad.push("gauge_action_law");
    }

    // exp preserves Jacobi
    let v = random_formal_vf(&base, n, 1, &mut rng);
    if !jacobi_residual(&exp_lie(&v, pi.series())).is_zero() {
        bad.push("exp_preserves_jacobi");
    }

    // homotopy identity in degree 1
    let d = random_cochain(&cc, 1, 3, &mut rng);
    let dh = ce_delta(&ce_homotopy(&d)?)?;
    let hd = if 1 < n_dim {
        ce_homotopy(&ce_delta(&d)?)?
    } else {
        CECochain::zero(&cc, 1)
    };
    if dh.add(&hd) != d {
        bad.push("homotopy_identity");
    }

    // Dorfman identities
    let s1 = CourantSection::new(
        FormalSeries::from_coeffs(
            (0..=n)
                .map(|_| random_multivector(&ch, 1, 2, &mut rng))
                .collect(),
        ),
        FormalSeries::from_coeffs((0..=n).map(|_| random_form(&ch, 1, 2, &mut rng)).collect()),
    )?;
    let s2 = CourantSection::new(
        FormalSeries::from_coeffs(
            (0..=n)
                .map(|_| random_multivector(&ch, 1, 2, &mut rng))
                .collect(),
        ),
        FormalSeries::from_coeffs((0..=n).map(|_| random_form(&ch, 1, 2, &mut rng)).collect()),
    )?;
    let f = FormalSeries::constant(random_poly(&ch, 2, 2, &mut rng), n);
    if !dorfman_leibniz_defect(&s1, &s2, &f).is_zero() {
        bad.push("dorfman_leibniz");
    }
    if !dorfman_symmetric_defect(&s1, &s2).is_zero() {
        bad.push("dorfman_symmetric_part");
    }

    // closed B-fields are Dorfman automorphisms
    let b = random_closed_two_form(&ch, n, 1, &mut rng);
    let lhs = dorfman(&bfield_section(&b, &s1), &bfield_section(&b, &s2));
    let rhs = bfield_section(&b, &dorfman(&s1, &s2));
    if lhs != rhs {
        bad.push("bfield_automorphism");
    }
    if pairing(&bfield_section(&b, &s1), &bfield_section(&b, &s2)) != pairing(&s1, &s2) {
        bad.push("bfield_pairing");
    }

    // backward frames are involutive
    let frame = backward_generators(&cc, &pi)?;
    if !frame_involutive(&frame) {
        bad.push("frame_involutivity");
    }

    // canonical-bracket invariance under pulled-back base forms
    let alg = fpois::formal::SymplecticAlgebra::new(omega_can_series(&cc, n).clone())?;
    let b_base = random_closed_two_form(&base, n, 1, &mut rng);
    let omega_b = fpois::formal::FormalSymplectic::new(
        omega_can_series(&cc, n)
            .series()
            .add(&fpois::cotangent::rho_pullback_two_form(&cc, &b_base)),
    )?;
    let alg_b = fpois::formal::SymplecticAlgebra::new(omega_b)?;
    let f_base = random_poly(&base, 2, 3, &mut rng);
    let fb = FormalSeries::constant(fpois::cotangent::rho_pullback_poly(&cc, &f_base), n);
    let g = FormalSeries::constant(random_poly(&ch, 2, 3, &mut rng), n);
    if alg.bracket(&fb, &g) != alg_b.bracket(&fb, &g) {
        bad.push("pullback_bracket_invariance");
    }

    Ok(bad)
}

pub fn cmd_fuzz(job: &JobSpec) -> Result<Report, CliError> {
    let mut report = Report::new("fuzz", job.dimension, job.truncation_order);
    let seed = job.seed.unwrap_or(0);
    report.seed = Some(seed);
    let cases = 25usize;
    let n = job.truncation_order.min(3);
    let results: Vec<(usize, Result<Vec<&'static str>, FpError>)> = (0..cases)
        .into_par_iter()
        .map(|case| {
            let case_seed = seed.wrapping_mul(1_000_003).wrapping_add(case as u64);
            (case, fuzz_case(job.dimension, n, case_seed))
        })
        .collect();
    // deterministic ordered merge
    let mut ordered = results;
    ordered.sort_by_key(|(case, _)| *case);
    let mut tally: std::collections::BTreeMap<&'static str, usize> = Default::default();
    for (case, outcome) in ordered {
        match outcome {
            Ok(violations) => {
                for v in violations {
                    *tally.entry(v).or_insert(0) += 1;
                }
            }
            Err(e) => {
                return Err(CliError::Internal(format!("fuzz case {case}: {e}")));
            }
        }
    }
    let suites = [
        "schouten_antisymmetry",
        "d_squared",
        "gauge_action_law",
        "exp_preserves_jacobi",
        "homotopy_identity",
        "dorfman_leibniz",
        "dorfman_symmetric_part",
        "bfield_automorphism",
        "bfield_pairing",
        "frame_involutivity",
        "pullback_bracket_invariance",
    ];
    for name in suites {
        let failures = tally.get(name).copied().unwrap_or(0);
        report.push_check(
            name,
            failures == 0,
            format!("{failures} failures / {cases} cases"),
        );
    }
    Ok(report)
}
