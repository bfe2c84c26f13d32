//! Acceptance suite: one test per published claim, one printed verdict line
//! per criterion (run with `--nocapture` to see the lines for passing tests;
//! the harness's own per-test `ok`/`FAILED` lines mirror them either way).
//!
//! Tolerances are the published ones: endpoint populations and coherence to
//! 1e-3, pointwise population symmetry to 1e-8, the broken-symmetry endpoint
//! to 5e-3 against the quoted 0.3530, spectral line positions to 0.01 (units
//! of the dipolar coupling), quality factor to ±3, and mode counts to ±2.

use std::f64::consts::PI;
use std::time::Instant;

use ndarray::Array2;

use aqec_core::conditions::{
    check_drainage, check_kl, check_symmetry, ConditionReport, DRAINAGE_DEFAULT_TOL,
};
use aqec_core::jump::{jump_expand, jump_expand_pure, phase_matching_report};
use aqec_core::liouville::devectorize;
use aqec_core::metrics::{linear_entropy, metrics_trajectory, MetricsRow};
use aqec_core::models::{
    corrupted_state, fixtures, spin_flip, toy_model_direct, toy_model_flip, AqecModel,
    ModelConfig, OverlapsConfig,
};
use aqec_core::ops::{basis_ket, c, HilbertSpace, Operator};
use aqec_core::spin_cavity::{
    aqec_feasibility, design_report, dipole_spectrum, feasibility_sweep, CenterField,
    Polarization, SpinSystem,
};

/// Print the per-criterion verdict line, then enforce it.
fn conclude(criterion: &str, failures: Vec<String>, detail: String) {
    let pass = failures.is_empty();
    println!("{} | {criterion} | {detail}", if pass { "PASS" } else { "FAIL" });
    for f in &failures {
        println!("       - {f}");
    }
    assert!(pass, "{criterion}: {failures:?}");
}

fn check(failures: &mut Vec<String>, ok: bool, message: String) {
    if !ok {
        failures.push(message);
    }
}

/// Build a bundled two-codeword model together with its configured initial
/// superposition.
fn fixture_model(name: &str) -> (ModelConfig, AqecModel) {
    let config = ModelConfig::from_json(fixtures::by_name(name).unwrap()).unwrap();
    let model = config.build().unwrap();
    (config, model)
}

/// Endpoint metrics after repairing a single flip: `dt = 0.1`, `n` steps.
fn repair_run(config: &ModelConfig, model: &AqecModel, error: usize, n: usize) -> Vec<MetricsRow> {
    let psi = model.codeword_superposition(&config.psi_amplitudes()).unwrap();
    let rho0 = model.error_set[error].apply(&psi).unwrap().normalized().unwrap().projector();
    let times: Vec<f64> = (1..=n).map(|k| 0.1 * k as f64).collect();
    let states = model.generator().unwrap().propagate(&rho0, &times).unwrap();
    metrics_trajectory(&times, &states, &model.codewords[0], &model.codewords[1]).unwrap()
}

/// First time strictly after the trajectory's entropy peak at which the
/// entropy drops below `threshold`.
fn first_below_after_peak(times: &[f64], entropy: &[f64], threshold: f64) -> Option<f64> {
    let peak = entropy
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap_or(0);
    times
        .iter()
        .zip(entropy.iter())
        .skip(peak + 1)
        .find(|(_, &s)| s < threshold)
        .map(|(&t, _)| t)
}

fn entropy_trajectory(model: &AqecModel, tmax: f64) -> (Vec<f64>, Vec<f64>) {
    let rho0 = model.basis.ket("0,0").unwrap().projector();
    let n = (tmax / 0.1).round() as usize;
    let times: Vec<f64> = (1..=n).map(|k| 0.1 * k as f64).collect();
    let states = model.generator().unwrap().propagate(&rho0, &times).unwrap();
    let entropy: Vec<f64> = states.iter().map(|s| linear_entropy(s).unwrap()).collect();
    (times, entropy)
}

#[test]
fn criterion_01_single_stable_state() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let model = toy_model_flip(1.0, 1.0, 1.0).unwrap();
    let gen = model.generator().unwrap();
    let decomp = gen.spectral_decompose().unwrap();
    check(
        &mut failures,
        decomp.eigenvalues.len() == 16,
        format!("expected 16 eigenvalues, got {}", decomp.eigenvalues.len()),
    );

    let radius = decomp.eigenvalues.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let stationary: Vec<usize> = (0..decomp.eigenvalues.len())
        .filter(|&k| decomp.eigenvalues[k].re.abs() < 1e-9 * radius)
        .collect();
    check(
        &mut failures,
        stationary.len() == 1,
        format!("{} eigenvalues with |Re| < 1e-9 * radius, expected exactly 1", stationary.len()),
    );

    let mut deviation = f64::NAN;
    if let Some(&k) = stationary.first() {
        let mat = devectorize(&decomp.right.column(k).to_owned(), gen.hilbert_dim());
        let trace: aqec_core::ops::C64 = (0..mat.nrows()).map(|i| mat[(i, i)]).sum();
        let steady = mat.mapv(|x| x / trace);
        let target = model.basis.ket("1,0").unwrap().projector();
        deviation = steady
            .iter()
            .zip(target.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        check(
            &mut failures,
            deviation <= 1e-8,
            format!("steady state deviates from the codeword projector by {deviation:.3e}"),
        );
    }

    let elapsed = started.elapsed().as_secs_f64();
    check(&mut failures, elapsed < 1.0, format!("runtime {elapsed:.2}s exceeds 1s"));
    conclude(
        "criterion 01 single stable state",
        failures,
        format!(
            "16 eigenvalues, 1 stationary, steady-state deviation {deviation:.1e}, {elapsed:.2}s"
        ),
    );
}

#[test]
fn criterion_02_entropy_repair() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let (t_flip, s_flip) = entropy_trajectory(&toy_model_flip(1.0, 1.0, 1.0).unwrap(), 250.0);
    let (t_dir, s_dir) =
        entropy_trajectory(&toy_model_direct([0.0; 4], c(1.0, 0.0), 1.0).unwrap(), 250.0);
    let (t_2c, s_2c) = entropy_trajectory(&toy_model_flip(1.0, 1.0, 2.0).unwrap(), 600.0);

    let peak = s_flip.iter().copied().fold(0.0f64, f64::max);
    check(&mut failures, peak > 0.3, format!("flip-model entropy peak only {peak:.3}"));
    let settled = first_below_after_peak(&t_flip, &s_flip, 1e-3);
    check(
        &mut failures,
        settled.is_some(),
        "flip-model entropy never fell below 1e-3 after its peak".into(),
    );

    let flip_01 = first_below_after_peak(&t_flip, &s_flip, 0.01);
    let dir_01 = first_below_after_peak(&t_dir, &s_dir, 0.01);
    let slow_01 = first_below_after_peak(&t_2c, &s_2c, 0.01);
    check(
        &mut failures,
        flip_01.is_some() && dir_01.is_some() && slow_01.is_some(),
        format!("missing 0.01 crossing: flip {flip_01:?}, direct {dir_01:?}, doubled-c {slow_01:?}"),
    );
    if let (Some(f), Some(d), Some(s)) = (flip_01, dir_01, slow_01) {
        check(
            &mut failures,
            d < f,
            format!("direct model not faster: {d:.1} vs {f:.1}"),
        );
        check(
            &mut failures,
            s > f,
            format!("doubling c did not slow repair: {s:.1} vs {f:.1}"),
        );
    }

    let elapsed = started.elapsed().as_secs_f64();
    check(&mut failures, elapsed < 5.0, format!("runtime {elapsed:.2}s exceeds 5s"));
    conclude(
        "criterion 02 entropy repair",
        failures,
        format!(
            "peak {peak:.3}, settles below 1e-3 at t={:.1}; t(S<0.01): direct {:.1} < flip {:.1} < doubled-c {:.1}; {elapsed:.2}s",
            settled.unwrap_or(f64::NAN),
            dir_01.unwrap_or(f64::NAN),
            flip_01.unwrap_or(f64::NAN),
            slow_01.unwrap_or(f64::NAN),
        ),
    );
}

#[test]
fn criterion_03_two_codeword_repair() {
    let mut failures = Vec::new();
    let mut worst_pop: f64 = 0.0;
    let mut worst_coh: f64 = 0.0;
    let mut slowest_run = 0.0f64;

    for name in ["setA", "setB", "setC"] {
        let (config, model) = fixture_model(name);
        let gen = model.generator().unwrap();
        check(
            &mut failures,
            gen.matrix.nrows() == 196 && gen.matrix.ncols() == 196,
            format!("{name}: generator is {}x{}, expected 196x196", gen.matrix.nrows(), gen.matrix.ncols()),
        );
        for error in 0..3 {
            let started = Instant::now();
            let last = *repair_run(&config, &model, error, 400).last().unwrap();
            slowest_run = slowest_run.max(started.elapsed().as_secs_f64());
            worst_pop = worst_pop
                .max((last.pop_cw0 - 0.5).abs())
                .max((last.pop_cw1 - 0.5).abs());
            worst_coh = worst_coh.max((last.coherence.norm() - 0.5).abs());
            let phase_err = (last.coherence.arg().abs() - PI / 3.0).abs();
            check(
                &mut failures,
                (last.pop_cw0 - 0.5).abs() <= 1e-3 && (last.pop_cw1 - 0.5).abs() <= 1e-3,
                format!("{name} flip {}: populations ({:.6}, {:.6})", error + 1, last.pop_cw0, last.pop_cw1),
            );
            check(
                &mut failures,
                (last.coherence.norm() - 0.5).abs() <= 1e-3,
                format!("{name} flip {}: |coherence| {:.6}", error + 1, last.coherence.norm()),
            );
            check(
                &mut failures,
                phase_err <= 1e-3,
                format!("{name} flip {}: phase off by {phase_err:.2e} rad", error + 1),
            );
        }
    }

    // Same endpoint starting from the correlated-overlap corrupted state.
    let started = Instant::now();
    let (config, model) = fixture_model("setA");
    let psi = model.codeword_superposition(&config.psi_amplitudes()).unwrap();
    let overlaps: OverlapsConfig = serde_json::from_str(fixtures::OVERLAPS_EXAMPLE).unwrap();
    let mut branches = vec![Operator::identity(model.basis.clone())];
    branches.extend(model.error_set.iter().cloned());
    let corrupted = corrupted_state(&psi, &branches, &overlaps.build().unwrap()).unwrap();
    let times: Vec<f64> = (1..=400).map(|k| 0.1 * k as f64).collect();
    let states = model.generator().unwrap().propagate(&corrupted.rho, &times).unwrap();
    let rows =
        metrics_trajectory(&times, &states, &model.codewords[0], &model.codewords[1]).unwrap();
    let last = rows.last().unwrap();
    slowest_run = slowest_run.max(started.elapsed().as_secs_f64());
    check(
        &mut failures,
        (last.pop_cw0 - 0.5).abs() <= 1e-3
            && (last.pop_cw1 - 0.5).abs() <= 1e-3
            && (last.coherence.norm() - 0.5).abs() <= 1e-3
            && (last.coherence.arg().abs() - PI / 3.0).abs() <= 1e-3,
        format!(
            "overlap-fixture start: populations ({:.6}, {:.6}), |coherence| {:.6}, phase {:.6}",
            last.pop_cw0,
            last.pop_cw1,
            last.coherence.norm(),
            last.coherence.arg()
        ),
    );

    check(
        &mut failures,
        slowest_run < 30.0,
        format!("slowest run {slowest_run:.2}s exceeds 30s"),
    );
    conclude(
        "criterion 03 two-codeword repair",
        failures,
        format!(
            "9 flip runs + overlap run: worst |pop-0.5| {worst_pop:.1e}, worst ||coh|-0.5| {worst_coh:.1e}, phase pi/3, slowest run {slowest_run:.2}s"
        ),
    );
}

#[test]
fn criterion_04_symmetric_population_trajectories() {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for name in ["setA", "setB", "setC"] {
        let (config, model) = fixture_model(name);
        for error in 0..3 {
            let rows = repair_run(&config, &model, error, 400);
            let dev = rows
                .iter()
                .map(|r| (r.pop_cw0 - r.pop_cw1).abs())
                .fold(0.0f64, f64::max);
            worst = worst.max(dev);
            check(
                &mut failures,
                dev <= 1e-8,
                format!("{name} flip {}: population series split by {dev:.3e}", error + 1),
            );
        }
    }
    conclude(
        "criterion 04 symmetric population trajectories",
        failures,
        format!("9 runs x 400 samples, worst pointwise |p0 - p1| = {worst:.1e}"),
    );
}

#[test]
fn criterion_05_broken_symmetry_endpoint() {
    let mut failures = Vec::new();
    let (config, model) = fixture_model("setA_asym");
    let mut coherences = Vec::new();
    for error in 0..3 {
        let last = *repair_run(&config, &model, error, 600).last().unwrap();
        coherences.push(last.coherence.norm());
        check(
            &mut failures,
            (last.pop_cw0 - 0.5).abs() <= 1e-3 && (last.pop_cw1 - 0.5).abs() <= 1e-3,
            format!("flip {}: populations ({:.6}, {:.6})", error + 1, last.pop_cw0, last.pop_cw1),
        );
        check(
            &mut failures,
            (last.coherence.norm() - 0.3530).abs() <= 5e-3,
            format!("flip {}: |coherence| {:.6} vs quoted 0.3530", error + 1, last.coherence.norm()),
        );
        check(
            &mut failures,
            (last.coherence.arg().abs() - PI / 3.0).abs() <= 1e-2,
            format!("flip {}: phase {:.6}", error + 1, last.coherence.arg()),
        );
    }
    conclude(
        "criterion 05 broken symmetry endpoint",
        failures,
        format!(
            "|coherence| per flip: {:.6}, {:.6}, {:.6} (quoted 0.3530, tolerance 5e-3)",
            coherences[0], coherences[1], coherences[2]
        ),
    );
}

#[test]
fn criterion_06_broken_dynamics() {
    let mut failures = Vec::new();
    let (config, model) = fixture_model("setC_fastmix");
    // Flips 3 and 1 both funnel through the retuned coupling; flip 2 does not
    // and keeps full coherence, so it is not part of the claim.
    let mut details = Vec::new();
    for error in [2usize, 0] {
        let last = *repair_run(&config, &model, error, 600).last().unwrap();
        details.push(format!("flip {} |coh| {:.6}", error + 1, last.coherence.norm()));
        check(
            &mut failures,
            (last.pop_cw0 - 0.5).abs() <= 1e-3 && (last.pop_cw1 - 0.5).abs() <= 1e-3,
            format!("flip {}: populations ({:.6}, {:.6})", error + 1, last.pop_cw0, last.pop_cw1),
        );
        check(
            &mut failures,
            last.coherence.norm() < 0.5 - 1e-2,
            format!("flip {}: |coherence| {:.6} not visibly degraded", error + 1, last.coherence.norm()),
        );
    }
    conclude(
        "criterion 06 broken dynamics",
        failures,
        format!("populations repaired to 0.5, coherence lost: {}", details.join(", ")),
    );
}

#[test]
fn criterion_07_condition_checker_soundness() {
    let mut failures = Vec::new();

    let two = HilbertSpace::qubits(2, 0);
    let cw2 = [basis_ket(&two, "00").unwrap(), basis_ket(&two, "11").unwrap()];
    let flips2 = [spin_flip(&two, 0).unwrap(), spin_flip(&two, 1).unwrap()];
    let kl2 = check_kl(&cw2, &flips2, 1e-8).unwrap();
    check(&mut failures, !kl2.passed(), "KL accepted the two-qubit repetition code".into());

    let three = HilbertSpace::qubits(3, 0);
    let cw3 = [basis_ket(&three, "000").unwrap(), basis_ket(&three, "111").unwrap()];
    let flips3 = [
        spin_flip(&three, 0).unwrap(),
        spin_flip(&three, 1).unwrap(),
        spin_flip(&three, 2).unwrap(),
    ];
    let kl3 = check_kl(&cw3, &flips3, 1e-8).unwrap();
    check(&mut failures, kl3.passed(), "KL rejected the three-qubit repetition code".into());

    let verdict = |report: &ConditionReport| if report.passed() { "PASS" } else { "FAIL" };
    let mut summary = Vec::new();
    for name in ["setA", "setB", "setC"] {
        let (_, model) = fixture_model(name);
        let sym = check_symmetry(&model, 1e-8).unwrap();
        let drain = check_drainage(&model, DRAINAGE_DEFAULT_TOL).unwrap();
        summary.push(format!("{name} sym {} drain {}", verdict(&sym), verdict(&drain)));
        check(&mut failures, sym.passed(), format!("SYMMETRY rejected {name}"));
        check(&mut failures, drain.passed(), format!("DRAINAGE rejected {name}"));
    }
    for name in ["setA_asym", "setC_fastmix"] {
        let (_, model) = fixture_model(name);
        let sym = check_symmetry(&model, 1e-8).unwrap();
        summary.push(format!("{name} sym {}", verdict(&sym)));
        check(&mut failures, !sym.passed(), format!("SYMMETRY accepted the broken fixture {name}"));
    }

    conclude(
        "criterion 07 condition checker soundness",
        failures,
        format!("KL 2-qubit FAIL / 3-qubit PASS; {}", summary.join("; ")),
    );
}

#[test]
fn criterion_08_jump_oracle() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // Convergence against the exact propagator at t = 1.6 under step halving.
    let model = toy_model_flip(1.0, 1.0, 1.0).unwrap();
    let psi0 = model.basis.ket("0,0").unwrap();
    let exact = model
        .generator()
        .unwrap()
        .propagate(&psi0.projector(), &[1.6])
        .unwrap()
        .pop()
        .unwrap();
    let mut errors = Vec::new();
    for n_steps in [4usize, 8, 16] {
        let dt = 1.6 / n_steps as f64;
        let expansion =
            jump_expand_pure(&model.hamiltonian, &model.collapse_terms, &psi0, dt, n_steps)
                .unwrap();
        let reduced = expansion.reduce_to_system().unwrap();
        errors.push((dt, reduced.sub(&exact).unwrap().norm_fro()));
    }
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0].1 / w[1].1).collect();
    let bound = errors.iter().map(|(dt, e)| e / dt).fold(0.0f64, f64::max);
    for r in &ratios {
        check(
            &mut failures,
            *r >= 1.8,
            format!("step halving only shrank the error by {r:.3}"),
        );
    }
    check(
        &mut failures,
        ratios.windows(2).all(|w| w[1] >= w[0] - 0.05),
        format!("halving ratios {ratios:?} move away from 2"),
    );
    check(
        &mut failures,
        bound <= 0.3,
        format!("error/step-size ratio {bound:.3} is not bounded by 0.3"),
    );

    // Orthogonal bath registers: the two blocks repair through different
    // ancilla channels, so the recovered state carries no coherence at all.
    let zeros = vec![vec![[0.0f64, 0.0]; 7]; 7];
    let mut b0 = zeros.clone();
    let mut b1 = zeros;
    for q in [&mut b0, &mut b1] {
        q[0][0] = [10.0, 0.0];
        for (i, row) in q.iter_mut().enumerate().skip(1) {
            row[i] = [2.0, 0.0];
        }
    }
    b0[1][5] = [1.0, 0.0];
    b0[5][1] = [1.0, 0.0];
    b1[1][4] = [1.0, 0.0];
    b1[4][1] = [1.0, 0.0];
    let config = ModelConfig::TwoCodeword {
        block: b0,
        block2: Some(b1),
        delta_omega: 0.0,
        c1: 1.0,
        c2: 1.0,
        overlaps: None,
        psi: None,
    };
    let disjoint = config.build().unwrap();
    let psi = disjoint.codeword_superposition(&config.psi_amplitudes()).unwrap();
    let corrupted = disjoint.error_set[2].apply(&psi).unwrap().normalized().unwrap();
    let expansion = jump_expand(
        &disjoint.hamiltonian,
        &disjoint.collapse_terms,
        std::slice::from_ref(&corrupted),
        &[1.0],
        &Array2::from_elem((1, 1), c(1.0, 0.0)),
        1.0,
        8,
    )
    .unwrap();
    let reduced = expansion.reduce_to_system().unwrap();
    let rows = metrics_trajectory(
        &[8.0],
        std::slice::from_ref(&reduced),
        &disjoint.codewords[0],
        &disjoint.codewords[1],
    )
    .unwrap();
    let last = rows[0];
    check(
        &mut failures,
        last.coherence.norm() < 1e-12,
        format!("orthogonal-channel coherence {:.3e} is not zero", last.coherence.norm()),
    );
    check(
        &mut failures,
        last.pop_cw0 > 0.3 && last.pop_cw1 > 0.3,
        format!("repair did not progress: populations ({:.3}, {:.3})", last.pop_cw0, last.pop_cw1),
    );

    let elapsed = started.elapsed().as_secs_f64();
    check(&mut failures, elapsed < 60.0, format!("runtime {elapsed:.2}s exceeds 60s"));
    conclude(
        "criterion 08 jump oracle",
        failures,
        format!(
            "errors {:.4}/{:.4}/{:.4} (halving ratios {:.2}, {:.2} -> first order), orthogonal-bath |coh| {:.1e}, {elapsed:.2}s",
            errors[0].1, errors[1].1, errors[2].1, ratios[0], ratios[1],
            last.coherence.norm()
        ),
    );
}

#[test]
fn criterion_09_phase_matching() {
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let cases = [
        ([1.3, 0.4, 0.9, 0.0], 1.0),  // delta = 0
        ([1.3, 0.4, 0.6, 0.0], 1.0),  // delta = 0.3
        ([0.2, 1.1, 1.4, 0.0], 0.5),  // delta = -2.3
        ([4.0, 0.5, 0.25, 0.0], 2.0), // delta = 3.25
        ([0.0, 0.0, 7.0, 0.0], 0.7),  // delta = -7
    ];
    for (omega, gamma) in cases {
        let report = phase_matching_report(omega, gamma, 2.7).unwrap();
        let delta = report.detuning;
        let predicted = gamma / (gamma * gamma + delta * delta).sqrt();
        let closed_dev = (report.closed_form.norm() - predicted).abs();
        let quad_dev = (report.quadrature.norm() - predicted).abs();
        worst = worst.max(closed_dev).max(quad_dev).max(report.magnitude_agreement);
        check(
            &mut failures,
            closed_dev <= 1e-10 && quad_dev <= 1e-10,
            format!("delta {delta:.2}: |factor| off by {closed_dev:.1e} (closed), {quad_dev:.1e} (quadrature)"),
        );
        check(
            &mut failures,
            report.magnitude_agreement <= 1e-10,
            format!("delta {delta:.2}: closed form and quadrature magnitudes differ by {:.1e}", report.magnitude_agreement),
        );
        if delta == 0.0 {
            check(
                &mut failures,
                (report.closed_form.norm() - 1.0).abs() <= 1e-12,
                format!("on resonance |factor| = {:.12}", report.closed_form.norm()),
            );
        }
    }
    conclude(
        "criterion 09 phase matching",
        failures,
        format!("5 detunings, worst magnitude deviation {worst:.1e}; on-resonance factor 1"),
    );
}

#[test]
fn criterion_10_spin_spectrum() {
    let mut failures = Vec::new();

    let lines = dipole_spectrum(&SpinSystem::default(), Polarization::X).unwrap();
    let starred: Vec<f64> =
        lines.iter().filter(|l| l.starred).map(|l| l.freq_zeta).collect();
    let unstarred: Vec<f64> =
        lines.iter().filter(|l| !l.starred).map(|l| l.freq_zeta).collect();
    for (observed, quoted) in [(&starred, [0.64, 1.03, 2.39]), (&unstarred, [0.39, 1.36, 1.75])] {
        check(
            &mut failures,
            observed.len() == 3,
            format!("expected 3 lines near {quoted:?}, got {observed:?}"),
        );
        for q in quoted {
            let hit = observed.iter().any(|f| (f - q).abs() <= 0.01);
            check(&mut failures, hit, format!("no line within 0.01 of {q}"));
        }
    }

    // With the exchange term removed, the middle cooling line goes dark and
    // repair is infeasible. (Only that line vanishes: the outer cooling
    // lines keep strengths ~0.13 and ~0.62, so the check is on the dark line
    // and the feasibility verdict, not on all three.)
    let report = aqec_feasibility(&SpinSystem::with_j23(0.0), 1e-9).unwrap();
    check(&mut failures, !report.passed(), "feasibility accepted the pure-dipolar chain".into());
    let dark = report.details["starred_strengths"][1].as_f64().unwrap();
    check(
        &mut failures,
        dark < 1e-12,
        format!("middle cooling strength {dark:.1e} did not vanish without exchange"),
    );
    let bright: Vec<f64> = [0usize, 2]
        .iter()
        .map(|&k| report.details["starred_strengths"][k].as_f64().unwrap())
        .collect();
    println!(
        "       note: without exchange only the middle cooling line is dark (outer strengths {:.3}, {:.3} stay bright); the quoted \"always zero\" concerns that line",
        bright[0], bright[1]
    );

    let samples = [0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let sweep = feasibility_sweep(&samples, 1e-9).unwrap();
    for point in &sweep {
        check(
            &mut failures,
            point.feasible,
            format!("feasibility lost at exchange {}", point.j23),
        );
    }

    conclude(
        "criterion 10 spin spectrum",
        failures,
        format!(
            "starred x-lines {:?} ~ [0.64, 1.03, 2.39], unstarred {:?} ~ [0.39, 1.36, 1.75]; dark line {dark:.1e} at zero exchange; feasible at all {} sampled exchanges",
            starred.iter().map(|f| (f * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            unstarred.iter().map(|f| (f * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            samples.len()
        ),
    );
}

#[test]
fn criterion_11_cavity_design() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let report =
        design_report(&SpinSystem::default(), [2.32, 0.87, 4.28], 2.5, 0.01, None).unwrap();

    let expected = ["TE102", "TE104", "TE122"];
    check(
        &mut failures,
        report.starred.len() == 3,
        format!("{} starred lines, expected 3", report.starred.len()),
    );
    for (m, want) in report.starred.iter().zip(expected) {
        let name = m.mode.as_ref().map(|x| x.name()).unwrap_or_else(|| "none".into());
        let field = m.mode.as_ref().map(|x| x.center_field);
        check(
            &mut failures,
            m.matched && name == want && m.offset <= 0.01,
            format!(
                "line at {:.3}: matched mode {name} offset {:.4} (wanted {want} within 0.01)",
                m.line.freq_zeta, m.offset
            ),
        );
        check(
            &mut failures,
            field == Some(CenterField::Bx),
            format!("mode {name} has {field:?} at the center, expected Bx"),
        );
    }

    let spurious = report.spurious_mode_count;
    check(
        &mut failures,
        (spurious as i64 - 29).unsigned_abs() <= 2,
        format!("{spurious} spurious modes, expected 29 +/- 2"),
    );

    let binding = report
        .unstarred
        .iter()
        .max_by(|a, b| a.required_q.total_cmp(&b.required_q))
        .unwrap();
    let binding_name = binding.nearest.as_ref().map(|x| x.name()).unwrap_or_else(|| "none".into());
    check(
        &mut failures,
        binding_name == "TE302",
        format!("binding spurious mode is {binding_name}, expected TE302"),
    );
    check(
        &mut failures,
        (binding.offset - 0.018).abs() <= 0.002,
        format!("TE302 offset {:.4}, expected 0.018 +/- 0.002", binding.offset),
    );
    check(
        &mut failures,
        (report.required_q - 76.0).abs() <= 3.0,
        format!("required Q {:.2}, expected 76 +/- 3", report.required_q),
    );

    let elapsed = started.elapsed().as_secs_f64();
    check(&mut failures, elapsed < 1.0, format!("runtime {elapsed:.2}s exceeds 1s"));
    conclude(
        "criterion 11 cavity design",
        failures,
        format!(
            "TE102/TE104/TE122 matched with Bx at center; {spurious} spurious modes (claimed ~29, discrepancy {}); binding mode {binding_name} offset {:.4}; required Q {:.1}; {elapsed:.2}s",
            (spurious as i64 - 29).abs(),
            binding.offset,
            report.required_q
        ),
    );
}
