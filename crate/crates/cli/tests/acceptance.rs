//! End-to-end acceptance checks. Each test exercises one headline behaviour
//! of the workspace at its stated tolerance and time budget, and prints a
//! single PASS/FAIL line (visible with `--nocapture`).

use std::time::{Duration, Instant};

use gaussianctc::{BsParams, GaussianPrep};
use num_complex::Complex;
use qcore::DensityMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

fn report(number: u32, name: &str, ok: bool, elapsed: Duration, budget: Duration) {
    let verdict = if ok && elapsed <= budget { "PASS" } else { "FAIL" };
    println!(
        "acceptance {number:02} {name}: {verdict} ({:.2}s of {:.0}s budget)",
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    assert!(ok, "acceptance {number:02} {name} failed its tolerance");
    assert!(
        elapsed <= budget,
        "acceptance {number:02} {name} exceeded its {budget:?} budget: {elapsed:?}"
    );
}

fn run_scenario(name: &str) -> cli::ScenarioResult {
    cli::run(&cli::ScenarioConfig::new(name)).unwrap()
}

#[test]
fn acceptance_01_grandfather_loop_settles_on_the_mixed_state() {
    let start = Instant::now();
    let r = run_scenario("grandfather");
    let ok = r.scalars["dist_loop_state_to_mixed"] < 1e-8 && r.scalars["residual"] < 1e-8;
    report(1, "grandfather-fixed-point", ok, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn acceptance_02_underdetermined_loop_admits_both_pure_solutions() {
    let start = Instant::now();
    let r = run_scenario("info-paradox");
    let ok = r.scalars["residual_plus"] < 1e-12
        && r.scalars["residual_minus"] < 1e-12
        && r.scalars["dist_seeded_solution_to_mixed"] < 1e-8;
    report(2, "information-paradox", ok, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn acceptance_03_loop_solver_matches_the_unrolled_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut normal = || {
        // Box-Muller
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    };
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        // Haar-ish 4x4 unitary: QR of a complex Gaussian matrix
        let g = qcore::CMat::from_fn(4, 4, |_, _| Complex::new(normal(), normal()));
        let q = g.qr().q();
        let u = qcore::UnitaryOp::new(vec![2, 2], q).unwrap();
        let circuit = deutsch::CtcCircuit::new(u, vec![2], vec![2]).unwrap();
        let ket = qcore::CVec::from_fn(2, |_, _| Complex::new(normal(), normal()));
        let rho1 = DensityMatrix::from_pure(vec![2], &ket).unwrap();
        let cfg = deutsch::FixedPointConfig {
            noise_eps: 1e-3,
            ..deutsch::FixedPointConfig::default()
        };
        let solved = deutsch::deutsch_output(&circuit, &rho1, &cfg).unwrap();
        let mixed = DensityMatrix::maximally_mixed(vec![2]);
        let unrolled =
            deutsch::unroll_equivalent_circuit(&circuit, &rho1, 500, &mixed, 1e-3).unwrap();
        worst = worst.max(solved.trace_distance(&unrolled).unwrap());
    }
    report(3, "oracle-equivalence", worst < 1e-4, start.elapsed(), Duration::from_secs(60));
}

#[test]
fn acceptance_04_open_loop_breaks_bell_correlations_in_both_formalisms() {
    let start = Instant::now();
    let r = run_scenario("otc-bell");
    let ok = r.scalars["density_dist_to_product"] < 1e-12
        && r.scalars["gaussian_cross_cov_after"] < 1e-12
        && r.scalars["gaussian_marginal_thermal_dev"] < 1e-12;
    report(4, "otc-entanglement-breaking", ok, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn acceptance_05_signalling_audit_separates_proper_and_improper_mixtures() {
    let start = Instant::now();
    let sig = run_scenario("brun-audit");
    let ns = cli::run(
        &cli::ScenarioConfig::new("brun-audit")
            .set("ontology", cli::ParamValue::Text("O_ns".into())),
    )
    .unwrap();
    let axis = cli::run(
        &cli::ScenarioConfig::new("brun-audit")
            .set("box", cli::ParamValue::Text("AxisSwap".into()))
            .set("ontology", cli::ParamValue::Text("AxisAppendix".into())),
    )
    .unwrap();
    let ok = sig.strings["verdict"] == "SignallingPossible"
        && (sig.scalars["helstrom_gap"] - 1.0).abs() < 1e-9
        && ns.strings["verdict"] == "NoSignalling"
        && axis.strings["verdict"] == "NoSignalling";
    report(5, "signalling-audit", ok, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn acceptance_06_single_photon_bunching_curve_and_finite_oracle() {
    let start = Instant::now();
    let mut ok = true;
    for i in 1..=9 {
        let eta = i as f64 / 10.0;
        let stats = fockctc::photon_ctc_stats(eta, FRAC_PI_2).unwrap();
        let expected = 8.0 * eta * (1.0 - eta) / (2.0 - eta);
        let oracle = fockctc::fock_simulate(eta, FRAC_PI_2, 40, 5).unwrap();
        ok &= (stats.g2 - expected).abs() < 1e-12;
        ok &= (stats.mean_n - 1.0).abs() < 1e-12;
        ok &= (oracle.mean_n - 1.0).abs() < 1e-12;
        ok &= (oracle.g2 - expected).abs() < 1e-3;
    }
    report(6, "single-photon-loop", ok, start.elapsed(), Duration::from_secs(10));
}

#[test]
fn acceptance_07_squeezed_input_thermalises_at_the_special_point() {
    let start = Instant::now();
    let cov = gaussianctc::ctc_squeezed_covariance(
        BsParams { eta: 2.0 / 3.0, phi: FRAC_PI_2 },
        1.0,
    );
    let t = f64::cosh(2.0);
    let mut ok = (cov[(0, 0)] - t).abs() < 1e-10
        && (cov[(1, 1)] - t).abs() < 1e-10
        && cov[(0, 1)].abs() < 1e-10
        && cov[(1, 0)].abs() < 1e-10;
    // a trivial loop phase hands the input covariance straight back
    let r = 1.0;
    let back = gaussianctc::ctc_squeezed_covariance(BsParams { eta: 0.4, phi: PI }, r);
    let input = [(-2.0 * r).exp(), 0.0, 0.0, (2.0 * r).exp()];
    for i in 0..2 {
        for j in 0..2 {
            ok &= (back[(i, j)] - input[2 * i + j]).abs() < 1e-10;
        }
    }
    report(7, "squeezed-thermalisation", ok, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn acceptance_08_repeated_weak_measurements_beat_the_uncertainty_bound() {
    let start = Instant::now();
    let mut ok = true;
    for m in 1..=10u32 {
        for r10 in 0..=10 {
            let r = r10 as f64;
            let (var_q, var_p) = gaussianctc::otc_variances(m, r);
            let sim = gaussianctc::otc_circuit_simulate(m, r, Complex::new(0.7, -0.1));
            // relative deviation: Var(P) reaches ~1e8 at r=10, far beyond
            // what an absolute 1e-10 could resolve in f64
            ok &= (sim.cov[(0, 0)] - var_q).abs() / var_q.max(1.0) < 1e-10;
            ok &= (sim.cov[(1, 1)] - var_p).abs() / var_p.max(1.0) < 1e-10;
        }
    }
    let hup = gaussianctc::hup_demo(1, 5.0, Complex::new(1.0, 0.0));
    ok &= hup.sigma_product < 1.0;
    // resource cost: matching ancilla squeezing to the stage count makes the
    // consumed photon number grow exponentially
    let mut last = 0.0f64;
    for n in 1..=12u32 {
        let r = f64::from(n) * f64::ln(2.0) / 2.0;
        let photons = gaussianctc::hup_demo(n, r, Complex::new(0.0, 0.0)).mean_photons_per_arm;
        ok &= n == 1 || photons > 1.8 * last;
        last = photons;
    }
    ok &= last > 1e3;
    report(8, "otc-uncertainty-violation", ok, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn acceptance_09_switched_downconverter_source_statistics() {
    let start = Instant::now();
    let params = fockctc::SpodParams::new(0.01, 50_000).unwrap();
    let stats = fockctc::spod_stats(&params);
    let mut ok = stats.mean_n >= 0.99 && stats.mean_n <= 1.0 && stats.g2 < 1e-3;
    let mc = fockctc::spod_montecarlo(&params, 100_000, 1).unwrap();
    ok &= (mc.mean_n_est - stats.mean_n).abs() <= 3.0 * mc.stderr_mean_n.max(1e-12);
    ok &= (mc.g2_est - stats.g2).abs() <= 3.0 * mc.stderr_g2.max(1e-12);
    report(9, "spod-statistics", ok, start.elapsed(), Duration::from_secs(120));
}

#[test]
fn acceptance_10_kernel_width_limits_of_the_loop_statistics() {
    let start = Instant::now();
    let mut ok = true;

    // sharp kernel reproduces the self-consistent bunching curve; flat kernel
    // suppresses the excess noise entirely
    let sharp = eventop::CommutatorKernel::gaussian(10.0).unwrap();
    let flat = eventop::CommutatorKernel::gaussian(0.01).unwrap();
    for i in 1..=9 {
        let eta = i as f64 / 10.0;
        let expected = 8.0 * eta * (1.0 - eta) / (2.0 - eta);
        let g_sharp = eventop::eo_g2(eta, &sharp, eventop::G2Method::Truncated(5)).unwrap();
        ok &= (g_sharp - expected).abs() < 1e-3;
        let g_flat = eventop::eo_g2(eta, &flat, eventop::G2Method::Truncated(520)).unwrap();
        ok &= g_flat.abs() < 1e-3;
    }

    // the two evaluators agree where both truncations are converged
    for kappa in [1.0, 10.0] {
        let k = eventop::CommutatorKernel::gaussian(kappa).unwrap();
        let x = 30usize.max((5.0 / kappa).ceil() as usize);
        for eta in [0.1f64, 0.5] {
            let decay = ((1e-6 / eta).ln() / (1.0 - eta).ln()).ceil() as usize;
            let n = 60usize.max(2 * x).max(decay);
            let g_d = eventop::eo_g2(eta, &k, eventop::G2Method::Direct(n)).unwrap();
            let g_t = eventop::eo_g2(eta, &k, eventop::G2Method::Truncated(x)).unwrap();
            ok &= (g_d - g_t).abs() < 1e-4;
        }
    }

    // Gaussian moments: thermalised at a sharp kernel, input-up-to-phase at a
    // flat one
    let spec = eventop::TruncationSpec { x: 30, direct_n: 60 };
    let prep = GaussianPrep { alpha: Complex::new(0.0, 0.0), r: 1.0, theta_r: 0.0, theta_s: 0.0 };
    let bs = BsParams { eta: 2.0 / 3.0, phi: FRAC_PI_2 };
    let m_sharp = eventop::eo_gaussian_moments(bs, &prep, &sharp, &spec).unwrap();
    let target = gaussianctc::ctc_squeezed_covariance(bs, 1.0);
    let very_flat = eventop::CommutatorKernel::gaussian(1e-4).unwrap();
    let m_flat = eventop::eo_gaussian_moments(bs, &prep, &very_flat, &spec).unwrap();
    let phi_rot = m_flat.phase.arg();
    let (c, s) = (phi_rot.cos(), phi_rot.sin());
    let rot = nalgebra::Matrix2::new(c, -s, s, c);
    let input = prep.state();
    let rotated = rot * input.cov.fixed_view::<2, 2>(0, 0) * rot.transpose();
    for i in 0..2 {
        for j in 0..2 {
            ok &= (m_sharp.state.cov[(i, j)] - target[(i, j)]).abs() < 1e-6;
            ok &= (m_flat.state.cov[(i, j)] - rotated[(i, j)]).abs() < 1e-6;
        }
    }

    // photon number is conserved across the whole kernel grid
    for kappa in [0.01, 0.1, 1.0, 10.0] {
        let k = eventop::CommutatorKernel::gaussian(kappa).unwrap();
        for eta in [0.1, 0.5, 0.9] {
            let rep = eventop::eo_photon_number(BsParams { eta, phi: FRAC_PI_2 }, &k, &spec)
                .unwrap();
            ok &= (rep.mean_n - 1.0).abs() < 1e-5;
        }
    }

    // the parallel quadruple sum finishes well inside its budget
    let direct_start = Instant::now();
    let g = eventop::eo_g2(0.5, &sharp, eventop::G2Method::Direct(60)).unwrap();
    ok &= g.is_finite() && direct_start.elapsed() < Duration::from_secs(600);

    report(10, "event-operator-limits", ok, start.elapsed(), Duration::from_secs(600));
}

#[test]
fn acceptance_11_rail_amplitudes_sum_to_the_feedback_loop_gain() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut ok = true;
    for _ in 0..100 {
        let eta = 0.05 + 0.9 * rng.gen::<f64>();
        let phi = 2.0 * PI * rng.gen::<f64>();
        let bs = BsParams { eta, phi };
        let j = eventop::loop_coefficients(bs).unwrap();
        let sum: Complex<f64> = j.iter().sum();
        ok &= (sum - gaussianctc::loop_phase(bs)).norm() < 1e-10;
    }
    report(11, "feedback-limit", ok, start.elapsed(), Duration::from_secs(1));
}

#[test]
fn acceptance_12_generalized_formalism_matches_the_extended_circuit() {
    let start = Instant::now();
    let prep_a = GaussianPrep {
        alpha: Complex::new(0.7, -0.2),
        r: 0.4,
        theta_r: 0.9,
        theta_s: 0.25,
    };
    let prep_b = GaussianPrep {
        alpha: Complex::new(0.1, 0.3),
        r: 0.9,
        theta_r: 1.1,
        theta_s: -0.4,
    };
    let bs = BsParams { eta: 0.37, phi: 1.2 };
    let mut ok = true;
    for c10 in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let g = eventop::eo_otc_interpolation(c10, &prep_a, &prep_b, bs, eventop::OtcPath::Generalized)
            .unwrap();
        let c = eventop::eo_otc_interpolation(
            c10,
            &prep_a,
            &prep_b,
            bs,
            eventop::OtcPath::ExtendedCircuit,
        )
        .unwrap();
        for i in 0..4 {
            ok &= (g.joint.mean[i] - c.joint.mean[i]).abs() < 1e-9;
            for j in 0..4 {
                ok &= (g.joint.cov[(i, j)] - c.joint.cov[(i, j)]).abs() < 1e-9;
            }
        }
    }
    report(12, "extended-circuit-crosscheck", ok, start.elapsed(), Duration::from_secs(5));
}

#[test]
fn acceptance_13_boosted_wavepacket_overlap_and_the_degraded_cnot() {
    let start = Instant::now();
    let alpha = 0.45;
    let ideal = relcirc::relativistic_cnot(alpha, 0.0, 0.0, 1.0, 5.0).unwrap();
    let mut ok = (ideal - (1.0 - 2.0 * alpha * alpha)).abs() < 1e-12;
    let reference = relcirc::GaussianEnvelope::new(1.0, 5.0, 0.0, 0.0).unwrap();
    for v in [0.0, 0.3, 0.6, 0.9] {
        let source = relcirc::GaussianEnvelope::new(1.0, 5.0, 0.0, v).unwrap();
        for dx in [0.0, 0.5, 1.5, 3.0] {
            let closed = relcirc::lorentz_overlap(&source, &reference, dx);
            let quad = relcirc::lorentz_overlap_quadrature(&source, &reference, dx);
            ok &= (closed - quad).norm() < 1e-8;
        }
    }
    report(13, "relativistic-cnot", ok, start.elapsed(), Duration::from_secs(10));
}

#[test]
fn acceptance_14_gravitational_offset_decorrelates_at_low_orbit() {
    let start = Instant::now();
    let r = run_scenario("gravity");
    let ok = r.scalars["delta_t"] >= 4e-13
        && r.scalars["delta_t"] <= 6e-13
        && (1.0 - r.scalars["c01"]).abs() > 0.1;
    report(14, "gravity-threshold", ok, start.elapsed(), Duration::from_secs(1));
}
