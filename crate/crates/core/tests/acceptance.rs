//! Acceptance criteria, one test each. Every test prints a single
//! `PASS|FAIL [k] ...` line with the measured values and its runtime.

use std::f64::consts::PI;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use dichain::amplitude::{evolve, AmplitudeField, MacroSystem};
use dichain::fit::richardson_order;
use dichain::harness::{
    run_ansatz_scaling, run_convergence, run_generation, run_generation_control,
    run_residual_scaling, CarrierSpec, EnvelopeShape, ExperimentConfig, ExperimentKind, FamilySpec,
    Numerics, Outputs, ScalingReport, WaveSelection,
};
use dichain::microsim::{integrate, shadow_energy, SimConfig};
use dichain::model::{hamiltonian_energy, ChainParams, LatticeState, PotentialCoeffs};
use dichain::resonance::{
    acoustic_acoustic_scan, acoustic_optical_mismatch, family_params,
    find_acoustic_optical_resonance, optical_closure_margin, solve_family_ratio,
    third_order_margin,
};
use dichain::spectrum::{dispersion_det, group_velocity, omega, polarization, Branch, Wave};
use dichain::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Serializes the criteria so runtimes are measured without contention.
static SERIAL: Mutex<()> = Mutex::new(());

fn verdict(id: u32, name: &str, ok: bool, started: Instant, budget: Duration, details: &str) {
    let took = started.elapsed();
    let pass = ok && took <= budget;
    println!(
        "{} [{id}] {name}: {details}; runtime {:.2}s (budget {}s)",
        if pass { "PASS" } else { "FAIL" },
        took.as_secs_f64(),
        budget.as_secs()
    );
    assert!(pass, "criterion {id} failed");
}

fn p0() -> ChainParams {
    ChainParams::harmonic(1.0, 2.0, 1.0, 1.0)
}

/// The linear part of `p0` with fixed quadratic and cubic terms.
fn p0_nonlinear() -> ChainParams {
    ChainParams {
        v1: PotentialCoeffs::new(1.0, 0.5, 0.2),
        v2: PotentialCoeffs::new(2.0, -0.3, 0.1),
        w1: PotentialCoeffs::new(1.0, -0.4, 0.1),
        w2: PotentialCoeffs::new(1.0, 0.3, 0.0),
    }
}

/// Linear part of the family `a = 1, gamma = 2, b = 2`; the quadratic
/// on-site terms give unit coupling ratio.
fn family_base() -> ChainParams {
    let mut p = family_params(1.0, 2.0, 2.0);
    p.w1.k2 = -1.0;
    p.w2.k2 = 3.0;
    p
}

fn random_params(rng: &mut ChaCha8Rng) -> ChainParams {
    loop {
        let p = ChainParams::harmonic(
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.2..3.0),
            rng.gen_range(0.1..3.0),
            rng.gen_range(0.1..3.0),
        );
        let p = if p.c2() > p.c1() {
            p
        } else {
            ChainParams::harmonic(p.v2.k1, p.v1.k1, p.w2.k1, p.w1.k1)
        };
        if p.validate().is_ok() {
            return p;
        }
    }
}

fn config(kind: ExperimentKind, params: ChainParams, waves: WaveSelection) -> ExperimentConfig {
    let cfg = ExperimentConfig {
        kind,
        params,
        eps: vec![0.1, 0.0707, 0.05, 0.0354, 0.025],
        beta: 1.5,
        tau0: 1.0,
        envelope: EnvelopeShape::default(),
        waves: Some(waves),
        numerics: Numerics::default(),
        seed: 0,
        outputs: Outputs::default(),
    };
    cfg.validate().expect("valid config");
    cfg
}

fn p0_single() -> WaveSelection {
    WaveSelection::Carriers(vec![CarrierSpec {
        branch: Branch::Acoustic,
        theta: 0.3,
        amplitude: [1.0, 0.0],
    }])
}

fn p0_pair() -> WaveSelection {
    WaveSelection::Carriers(vec![
        CarrierSpec {
            branch: Branch::Acoustic,
            theta: 0.3,
            amplitude: [1.0, 0.0],
        },
        CarrierSpec {
            branch: Branch::Optical,
            theta: 1.0,
            amplitude: [0.8, 0.3],
        },
    ])
}

fn family(amplitudes: [f64; 2]) -> WaveSelection {
    WaveSelection::ResonantFamily(FamilySpec {
        gamma: 2.0,
        c: 1.0,
        a: 1.0,
        amplitudes,
    })
}

fn describe(r: &ScalingReport) -> String {
    let rows: Vec<String> = r
        .rows
        .iter()
        .map(|x| format!("{}:{:.4e}", x.eps, x.value))
        .collect();
    format!(
        "{} exponent {:.3} (fit residual {:.3}, without largest eps {:.3}) [{}]",
        r.quantity,
        r.exponent,
        r.fit_residual,
        r.exponent_without_largest,
        rows.join(" ")
    )
}

#[test]
fn criterion_1_dispersion_identities() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_det, mut worst_vg) = (0.0f64, 0.0f64);
    let h = 1e-5;
    for _ in 0..20 {
        let p = random_params(&mut rng);
        for i in 0..1000 {
            let th = -PI + 2.0 * PI * i as f64 / 999.0;
            for b in [Branch::Acoustic, Branch::Optical] {
                worst_det = worst_det.max(dispersion_det(&p, omega(&p, b, th), th).norm());
                let fd = (omega(&p, b, th + h) - omega(&p, b, th - h)) / (2.0 * h);
                worst_vg = worst_vg.max((group_velocity(&p, b, th) - fd).abs());
            }
        }
    }
    let ok = worst_det <= 1e-10 && worst_vg <= 1e-8;
    let d = format!("max |det H| {worst_det:.2e} (<= 1e-10), max group velocity deviation {worst_vg:.2e} (<= 1e-8)");
    verdict(
        1,
        "dispersion identities",
        ok,
        start,
        Duration::from_secs(1),
        &d,
    );
}

#[test]
fn criterion_2_resonance_existence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let ratio = solve_family_ratio(2.0, 1.0).unwrap().unwrap_or(f64::NAN);
    let p = family_params(1.0, 2.0, ratio);
    let (wm, wp) = (
        omega(&p, Branch::Acoustic, 0.0),
        omega(&p, Branch::Optical, 0.0),
    );
    let target = 2.0 * 2f64.sqrt();
    let family_ok = (ratio - 2.0).abs() <= 1e-12
        && (2.0 * wm - target).abs() <= 1e-12
        && (wp - target).abs() <= 1e-12;
    let roots = find_acoustic_optical_resonance(&p0());
    let root = roots.first().copied().unwrap_or(f64::NAN);
    let mismatch = acoustic_optical_mismatch(&p0(), root).abs();
    let ok = family_ok && mismatch <= 1e-12 && (root - 1.1146).abs() < 1e-3;
    let d = format!(
        "b/a = {ratio:.15}, 2w-(0) = {:.15}, w+(0) = {wp:.15}; P0 root {root:.12} with |mismatch| {mismatch:.2e}",
        2.0 * wm
    );
    verdict(
        2,
        "resonance existence",
        ok,
        start,
        Duration::from_secs(1),
        &d,
    );
}

#[test]
fn criterion_3_impossibility_scans() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut min_closure, mut min_third) = (f64::INFINITY, f64::INFINITY);
    for _ in 0..50 {
        let p = random_params(&mut rng);
        min_closure = min_closure.min(optical_closure_margin(&p));
        min_third = min_third.min(third_order_margin(&p));
    }
    let max_g = [1.1, 1.5, 2.0, 3.0, 5.0]
        .iter()
        .map(|&g| acoustic_acoustic_scan(g).max_g)
        .fold(f64::MIN, f64::max);
    let ok = min_closure > 0.0 && min_third > 0.0 && max_g <= 1e-12;
    let d = format!(
        "min optical closure margin {min_closure:.3e}, min third-order margin {min_third:.3e}, max acoustic-acoustic g {max_g:.2e}"
    );
    verdict(
        3,
        "impossibility scans",
        ok,
        start,
        Duration::from_secs(5),
        &d,
    );
}

fn plane_wave(p: &ChainParams, k: usize, cells: usize, amp: f64, t: f64) -> LatticeState {
    let theta = 2.0 * PI * k as f64 / cells as f64;
    let w = polarization(p, Branch::Acoustic, theta);
    let mut s = LatticeState::zeros(cells);
    for j in 0..cells {
        let e = Complex64::from_polar(amp, w.omega * t + theta * j as f64);
        for c in 0..2 {
            s.pos[j][c] = 2.0 * (w.right[c] * e).re;
            s.vel[j][c] = 2.0 * (w.right[c] * Complex64::new(0.0, w.omega) * e).re;
        }
    }
    s.t = t;
    s
}

fn random_state(rng: &mut ChaCha8Rng, cells: usize, amp: f64) -> LatticeState {
    let mut s = LatticeState::zeros(cells);
    for j in 0..cells {
        for c in 0..2 {
            s.pos[j][c] = amp * rng.gen_range(-1.0..1.0);
            s.vel[j][c] = amp * rng.gen_range(-1.0..1.0);
        }
    }
    s
}

#[test]
fn criterion_4_microsim() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let p = p0();
    let (n, t_end) = (32, 10.0);
    let exact = plane_wave(&p, 3, n, 0.1, t_end);
    let err = |dt: f64| {
        let s = integrate(
            &p,
            &plane_wave(&p, 3, n, 0.1, 0.0),
            &SimConfig::new(dt, t_end, usize::MAX),
            |_| {},
        )
        .unwrap();
        s.pos
            .iter()
            .zip(&exact.pos)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max)
    };
    let ratio = err(0.02) / err(0.01);

    // Nonlinear chain whose interaction forces derive from one potential.
    let ph = ChainParams {
        v1: PotentialCoeffs::new(1.0, 0.2, 0.1),
        v2: PotentialCoeffs::new(2.0, 0.4, 0.2),
        w1: PotentialCoeffs::new(1.0, -0.3, 0.1),
        w2: PotentialCoeffs::new(1.0, 0.25, 0.05),
    };
    assert!(ph.is_hamiltonian());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s0 = random_state(&mut rng, 64, 0.05);
    let dt = 0.02;
    let (e0, h0) = (hamiltonian_energy(&s0, &ph), shadow_energy(&ph, &s0, dt));
    let (mut drift, mut raw) = (0.0f64, 0.0f64);
    integrate(&ph, &s0, &SimConfig::new(dt, 500.0, 1), |s| {
        drift = drift.max(((shadow_energy(&ph, s, dt) - h0) / h0).abs());
        raw = raw.max(((hamiltonian_energy(s, &ph) - e0) / e0).abs());
    })
    .unwrap();

    let mut reversal = 0.0f64;
    for q in [p0(), p0_nonlinear()] {
        let s0 = random_state(&mut rng, 64, 0.05);
        let cfg = SimConfig::new(0.02, 50.0, usize::MAX);
        let mut s = integrate(&q, &s0, &cfg, |_| {}).unwrap();
        s.vel.iter_mut().for_each(|v| *v = [-v[0], -v[1]]);
        let back = integrate(&q, &s, &cfg, |_| {}).unwrap();
        let e = back
            .pos
            .iter()
            .zip(&s0.pos)
            .map(|(a, b)| (a[0] - b[0]).abs().max((a[1] - b[1]).abs()))
            .fold(0.0, f64::max);
        reversal = reversal.max(e);
    }
    let ok = (3.6..=4.4).contains(&ratio) && drift <= 1e-6 && reversal <= 1e-8;
    let d = format!(
        "dt-halving error ratio {ratio:.4}; modified-energy drift {drift:.2e} (plain energy fluctuation {raw:.2e}); time-reversal error {reversal:.2e}"
    );
    verdict(4, "microsim", ok, start, Duration::from_secs(30), &d);
}

#[test]
fn criterion_5_approximation_scalings() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (label, params, waves) in [
        ("P0 pair", p0_nonlinear(), p0_pair()),
        ("resonant family", family_base(), family([1.0, 1.0])),
    ] {
        let gap = run_ansatz_scaling(&config(
            ExperimentKind::AnsatzScaling,
            params,
            waves.clone(),
        ))
        .unwrap();
        let res =
            run_residual_scaling(&config(ExperimentKind::ResidualScaling, params, waves)).unwrap();
        let spread = gap.extra("linf_over_eps_spread").unwrap();
        let sens = res.extra("h0_doubling_change").unwrap();
        ok &= gap.passed
            && res.passed
            && (gap.exponent - 1.5).abs() <= 0.1
            && res.exponent >= 2.4
            && spread <= 2.0
            && sens < 0.05;
        details.push(format!(
            "{label}: {}; {}; sup/eps spread {spread:.3}; h0 doubling change {sens:.2e}",
            describe(&gap),
            describe(&res)
        ));
    }
    verdict(
        5,
        "approximation scalings",
        ok,
        start,
        Duration::from_secs(120),
        &details.join(" | "),
    );
}

#[test]
fn criterion_6_error_convergence() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    for (label, params, waves) in [
        ("P0 acoustic", p0_nonlinear(), p0_single()),
        ("resonant family", family_base(), family([1.0, 1.0])),
    ] {
        let r = run_convergence(&config(ExperimentKind::Convergence, params, waves)).unwrap();
        ok &= r.passed && r.exponent >= 1.3 && r.fit_residual <= 0.1;
        details.push(format!("{label}: {}", describe(&r)));
    }
    verdict(
        6,
        "error convergence",
        ok,
        start,
        Duration::from_secs(900),
        &details.join(" | "),
    );
}

#[test]
fn criterion_7_wave_generation() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let mut cfg = config(
        ExperimentKind::Generation,
        family_base(),
        family([1.0, 0.0]),
    );
    cfg.eps = vec![0.05];
    let gen = run_generation(&cfg).unwrap();
    let run = &gen.runs[0];

    let mut linear = cfg.clone();
    linear.params = family_params(1.0, 2.0, 2.0);
    let lin = run_generation(&linear).unwrap();
    let lin_peak = lin.runs[0].series.iter().map(|x| x.1).fold(0.0, f64::max);

    let mut control_params = p0();
    control_params.w1.k2 = -1.0;
    control_params.w2.k2 = 3.0;
    let control = run_generation_control(&config(
        ExperimentKind::GenerationControl,
        control_params,
        p0_single(),
    ))
    .unwrap();
    let spread = control.extra("mass_over_eps2_spread").unwrap();

    let ok = gen.passed
        && run.discrepancy <= 0.2
        && lin.passed
        && lin_peak <= 1e-6 * 0.05
        && control.passed;
    let d = format!(
        "eps 0.05: envelope discrepancy {:.4} (<= 0.2), optical mass {:.2e} -> {:.4e} (predicted {:.4e}); \
         linear control peak optical mass {lin_peak:.2e}; non-resonant control mass/eps^2 spread {spread:.3} [{}]",
        run.discrepancy,
        run.initial_mass,
        run.final_mass,
        run.predicted_mass,
        control.rows.iter().map(|r| format!("{}:{:.3e}", r.eps, r.value)).collect::<Vec<_>>().join(" ")
    );
    verdict(
        7,
        "wave generation",
        ok,
        start,
        Duration::from_secs(300),
        &d,
    );
}

/// Sup distance between two field sets.
fn field_distance(a: &[AmplitudeField], b: &[AmplitudeField]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.values()
                .iter()
                .zip(y.values())
                .map(|(u, v)| (u - v).norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Classical Runge-Kutta on `a1' = k1 conj(a1) a2, a2' = k2 a1^2` with a
/// fine fixed step.
fn reference_ode(
    k1: Complex64,
    k2: Complex64,
    a: [Complex64; 2],
    tau: f64,
    steps: usize,
) -> [Complex64; 2] {
    let f = |x: [Complex64; 2]| [k1 * x[0].conj() * x[1], k2 * x[0] * x[0]];
    let h = tau / steps as f64;
    let mut x = a;
    for _ in 0..steps {
        let s1 = f(x);
        let s2 = f([x[0] + 0.5 * h * s1[0], x[1] + 0.5 * h * s1[1]]);
        let s3 = f([x[0] + 0.5 * h * s2[0], x[1] + 0.5 * h * s2[1]]);
        let s4 = f([x[0] + h * s3[0], x[1] + h * s3[1]]);
        for c in 0..2 {
            x[c] += h / 6.0 * (s1[c] + 2.0 * s2[c] + 2.0 * s3[c] + s4[c]);
        }
    }
    x
}

#[test]
fn criterion_8_amplitude_solver() {
    let _g = SERIAL.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let l = 40.0;
    let c = |re: f64, im: f64| Complex64::new(re, im);

    let p = p0();
    let waves = vec![
        Wave::new(&p, Branch::Acoustic, 0.3),
        Wave::new(&p, Branch::Optical, 1.0),
    ];
    let sys = MacroSystem::non_resonant(&p, waves).unwrap();
    let a0 = vec![
        AmplitudeField::sech(256, l, c(1.0, 0.0), 1.0).unwrap(),
        AmplitudeField::sech(256, l, c(0.4, -0.2), 0.6).unwrap(),
    ];
    let traj = evolve(&sys, &a0, 1.0, 1e-3).unwrap();
    let mut l2_dev = 0.0f64;
    for (k, f0) in a0.iter().enumerate() {
        for snap in traj.snapshots() {
            l2_dev = l2_dev.max((snap[k].l2_norm() - f0.l2_norm()).abs() / f0.l2_norm());
        }
        for tau in [0.123, 0.5, 0.777] {
            l2_dev = l2_dev
                .max((traj.at(tau).unwrap()[k].l2_norm() - f0.l2_norm()).abs() / f0.l2_norm());
        }
    }

    let base = family_base();
    let spec = FamilySpec {
        gamma: 2.0,
        c: 0.9,
        a: 1.0,
        amplitudes: [1.0, 1.0],
    };
    let (pr, w1, w2) = dichain::harness::family_chain(&base, &spec, 4096).unwrap();
    let sys = MacroSystem::resonant(&pr, w1, w2).unwrap();
    let a0 = vec![
        AmplitudeField::sech(256, l, c(0.5, 0.0), 1.0).unwrap(),
        AmplitudeField::sech(256, l, c(0.3, 0.2), 0.7)
            .unwrap()
            .translated(5.0),
    ];
    let finals: Vec<Vec<AmplitudeField>> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&h| evolve(&sys, &a0, 1.0, h).unwrap().final_fields().to_vec())
        .collect();
    let order = richardson_order(
        field_distance(&finals[0], &finals[1]),
        field_distance(&finals[1], &finals[2]),
        2.0,
    );

    let (pz, w1, w2) =
        dichain::harness::family_chain(&base, &FamilySpec { c: 1.0, ..spec }, 4096).unwrap();
    let sys = MacroSystem::resonant(&pz, w1, w2).unwrap();
    assert_eq!(sys.velocities, vec![0.0, 0.0]);
    let a0 = vec![
        AmplitudeField::sech(64, l, c(1.0, 0.0), 1.0).unwrap(),
        AmplitudeField::sech(64, l, c(0.5, 0.5), 0.5).unwrap(),
    ];
    let fin = evolve(&sys, &a0, 1.0, 1e-3)
        .unwrap()
        .final_fields()
        .to_vec();
    let mut ode_err = 0.0f64;
    for j in (0..64).step_by(4) {
        let r = reference_ode(
            sys.k1,
            sys.k2,
            [a0[0].values()[j], a0[1].values()[j]],
            1.0,
            100_000,
        );
        ode_err = ode_err
            .max((fin[0].values()[j] - r[0]).norm())
            .max((fin[1].values()[j] - r[1]).norm());
    }
    let ok = l2_dev <= 1e-10 && order >= 2.0 && ode_err <= 1e-8;
    let d = format!(
        "transport L2 relative deviation {l2_dev:.2e} (<= 1e-10); resonant self-convergence order {order:.5} (>= 2); \
         zero-wavenumber pointwise error {ode_err:.2e} (<= 1e-8)"
    );
    verdict(
        8,
        "amplitude solver",
        ok,
        start,
        Duration::from_secs(60),
        &d,
    );
}
