//! Acceptance suite: one test per criterion, each printing a pass/fail line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use kinklab::experiments::{self, SolverParams};
use kinklab::field::{self, Grid};
use kinklab::kink::KinkProfile;
use kinklab::linalg::symmetric_eigenvalues;
use kinklab::multikink::{self, MultikinkConfig};
use kinklab::nbody;
use kinklab::num::linear_fit;
use kinklab::potential::Potential;
use kinklab::rng::SplitMix64;
use std::sync::OnceLock;

const PI: f64 = std::f64::consts::PI;

fn phi4() -> (KinkProfile, Potential) {
    let p = Potential::phi4();
    (KinkProfile::build(&p, 15.0, 4096).unwrap(), p)
}

fn sine_gordon() -> (KinkProfile, Potential) {
    let p = Potential::sine_gordon();
    (KinkProfile::build(&p, 15.0, 4096).unwrap(), p)
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "{criterion} {}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "{criterion} failed: {detail}");
}

#[test]
fn a1_kink_constants() {
    let (p4, _) = phi4();
    let (sg, _) = sine_gordon();
    let errs = [
        (p4.kappa - 2.0).abs(),
        (p4.mass - 2.0 / 3.0).abs(),
        (sg.kappa - 4.0 / PI).abs(),
        (sg.mass - 8.0 / (PI * PI)).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0f64, f64::max);
    report(
        "A1 kink constants",
        worst <= 1e-6,
        &format!("max |error| = {worst:.3e} (tolerance 1e-6)"),
    );
}

#[test]
fn a2_profile_asymptotics() {
    let (p4, _) = phi4();
    let (sg, _) = sine_gordon();
    let s4 = p4.check_identities().tail_slope;
    let ssg = sg.check_identities().tail_slope;
    report(
        "A2 profile asymptotics",
        s4 <= -2.9 && ssg <= -2.9,
        &format!("second-order residual slopes: phi4 {s4:.3}, sine-Gordon {ssg:.3} (<= -2.9)"),
    );
}

#[test]
fn a3_force_law() {
    let mut detail = String::new();
    let mut ok = true;
    for (name, (prof, _)) in [("phi4", phi4()), ("sine_gordon", sine_gordon())] {
        for (y, tol) in [(10.0, 1e-2), (14.0, 1e-3)] {
            let cfg = MultikinkConfig::at_rest(vec![-y / 2.0, y / 2.0]).unwrap();
            let f = multikink::interaction_force(&prof, &cfg, 1);
            let asym = multikink::force_asymptotic(prof.kappa, &cfg, 1);
            let rel = ((f - asym) / asym).abs();
            ok &= rel <= tol;
            detail.push_str(&format!("{name} y={y}: {rel:.2e} (<= {tol:.0e}); "));
        }
    }
    report("A3 force law", ok, &detail);
}

#[test]
fn a4_energy_expansion() {
    // The shared O(dx^2) quadrature bias cancels against the measured
    // single-kink energy; the residual then decays with the stated slope.
    let (prof, p) = phi4();
    let gaps = [8.0, 9.0, 10.0, 11.0, 12.0];
    let rows = experiments::energy_sweep(&prof, &p, &gaps, 0.01);
    let log_eps: Vec<f64> = gaps.iter().map(|y| -y).collect();
    let log_err: Vec<f64> = rows.iter().map(|r| r.residual.ln()).collect();
    let (slope, _) = linear_fit(&log_eps, &log_err);
    report(
        "A4 energy expansion",
        slope >= 1.8,
        &format!("log-log slope of |E - expansion| vs e^-y = {slope:.3} (>= 1.8)"),
    );
}

#[test]
fn a5_spectral_identities() {
    let mut worst_lap: f64 = 0.0;
    let mut worst_eig: f64 = 0.0;
    for n in 2..=12 {
        let lap = nbody::dirichlet_laplacian(n);
        let sig = nbody::sigma(n);
        for v in lap.mul_vec(&sig) {
            worst_lap = worst_lap.max((v - 1.0).abs());
        }
        let eig = symmetric_eigenvalues(&nbody::interaction_matrix(n));
        for (l, e) in eig.iter().enumerate() {
            worst_eig = worst_eig.max((e - (l * (l + 1)) as f64).abs());
        }
    }
    report(
        "A5 spectral identities",
        worst_lap <= 1e-12 && worst_eig <= 1e-9,
        &format!("max |D sigma - 1| = {worst_lap:.2e} (<= 1e-12), max |eig - l(l+1)| = {worst_eig:.2e} (<= 1e-9), n <= 12"),
    );
}

#[test]
fn a6_toda_exactness_and_law() {
    let mass = 2.0 / 3.0;
    // exact parabolic residual
    let mut worst_res: f64 = 0.0;
    for n in 2..=5 {
        let s = nbody::explicit_parabolic(n, mass, 2.0, 1.0, 0.0);
        let (da, dp) = nbody::toda_rhs(&s);
        for k in 1..=n {
            let kf = k as f64;
            let nf = n as f64;
            worst_res = worst_res.max((da[k - 1] + (nf + 1.0 - 2.0 * kf)).abs());
            worst_res = worst_res.max((dp[k - 1] - mass * (nf + 1.0 - 2.0 * kf)).abs());
        }
    }
    // perturbed escape trajectories at t = 1e4; escape directions realized by
    // the zero-momentum zero-energy (separatrix for n = 3) completion
    let mut rng = SplitMix64::new(99);
    let mut worst_dev: f64 = 0.0;
    for n in [2usize, 3] {
        let mut s = nbody::explicit_parabolic(n, mass, 2.0, 10.0, 0.0);
        for a in &mut s.positions {
            *a += 1e-2 * rng.next_symmetric();
        }
        s.positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let s = nbody::escape_projection(&s).unwrap();
        let traj = nbody::integrate(&s, 1e4, 1e-12, &[]).unwrap();
        assert!(traj.collision.is_none());
        let (y_pred, _) = nbody::asymptotic_law(n, mass, 2.0, 1e4);
        for (g, yp) in traj.final_state.gaps().iter().zip(&y_pred) {
            worst_dev = worst_dev.max((g - yp).abs());
        }
    }
    report(
        "A6 Toda exactness and law",
        worst_res <= 1e-14 && worst_dev <= 0.05,
        &format!("parabolic residual {worst_res:.2e} (<= 1e-14), law deviation at t=1e4 {worst_dev:.2e} (<= 0.05)"),
    );
}

#[test]
fn a7_solver_quality() {
    let (prof, p) = phi4();

    // stationary kink (the scheme's own equilibrium) to t = 50
    let grid = Grid::with_spacing(-60.0, 60.0, 0.05);
    let cfg = MultikinkConfig::at_rest(vec![0.0]).unwrap();
    let s0 = field::relax_to_discrete_stationary(&p, &multikink::synthesize(&prof, &cfg, grid).unwrap());
    let phi0 = s0.phi.clone();
    let (s_end, rec) = field::evolve(&p, &s0, 50.0, 0.04, 1.0, |_| Ok(())).unwrap();
    let drift = s_end
        .phi
        .iter()
        .zip(&phi0)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let e_drift_1 = rec.relative_energy_drift();

    // 2-kink run to t = 100 at dx = 0.05, dt = 0.04
    let pair = MultikinkConfig::at_rest(vec![-6.0, 6.0]).unwrap();
    let grid2 = Grid::with_spacing(-115.0, 115.0, 0.05);
    let s2 = multikink::synthesize(&prof, &pair, grid2).unwrap();
    let (_, rec2) = field::evolve(&p, &s2, 100.0, 0.04, 2.0, |_| Ok(())).unwrap();
    let e_drift_2 = rec2.relative_energy_drift();

    // spatial convergence of a boosted kink under dx halving
    let rows = experiments::convergence_study(&prof, &p, &[0.1, 0.05], 0.5, 10.0);
    let order = (rows[0].error / rows[1].error).log2();

    // finite propagation speed: compact perturbation, light cone fattened by
    // the dispersive boundary layer of the discretization
    let gridc = Grid::with_spacing(-40.0, 40.0, 0.05);
    let base = field::FieldState::vacuum(gridc, 1, 0.0);
    let mut pert = base.clone();
    for (i, x) in gridc.nodes().enumerate() {
        if (-2.0..=2.0).contains(&x) {
            pert.phi[i] += 0.01 * (1.0 + (x * PI / 2.0).cos());
        }
    }
    let t = 10.0;
    let (a, _) = field::evolve(&p, &base, t, 0.04, t, |_| Ok(())).unwrap();
    let (b, _) = field::evolve(&p, &pert, t, 0.04, t, |_| Ok(())).unwrap();
    let margin = 4.0;
    let mut leak: f64 = 0.0;
    for (i, x) in gridc.nodes().enumerate() {
        if x < -2.0 - t - margin || x > 2.0 + t + margin {
            leak = leak.max((a.phi[i] - b.phi[i]).abs());
        }
    }

    let ok = drift <= 1e-6 && e_drift_1 <= 1e-7 && e_drift_2 <= 1e-7 && order >= 1.9 && leak <= 1e-12;
    report(
        "A7 solver quality",
        ok,
        &format!(
            "stationary drift {drift:.2e} (<= 1e-6), energy drift {:.2e} (<= 1e-7), convergence order {order:.2} (>= 1.9), locality leak {leak:.2e} (<= 1e-12)",
            e_drift_1.max(e_drift_2)
        ),
    );
}

// The A8 launch is shared with A10.
fn a8_launch() -> &'static experiments::LaunchResult {
    static RUN: OnceLock<experiments::LaunchResult> = OnceLock::new();
    RUN.get_or_init(|| {
        let (prof, p) = phi4();
        let t_launch = experiments::time_for_gap(2, prof.mass, prof.kappa, 12.0);
        let t_run = 3.05 * t_launch;
        experiments::launch_parabolic(&prof, &p, 2, t_launch, t_run, &SolverParams::default())
            .expect("A8 launch run")
    })
}

#[test]
fn a8_asymptotic_law_desk_scale() {
    // The (t+t*)|g| trend clause is expected to fail: the bare-ansatz launch
    // step-excites the kinks' internal shape modes (and the mass-edge tail),
    // whose decay times vastly exceed any safe window, leaving a frozen floor
    // under |g|_E. The distance-to-family proxy (printed as supplementary
    // diagnostics) does contract. See the decisions ledger for the analysis.
    let (prof, _) = phi4();
    let result = a8_launch();
    let rep = experiments::verify_asymptotics(&result.series, prof.mass, prof.kappa);
    let ok = rep.window_ratio >= 4.0
        && rep.max_gap_deviation <= 0.1
        && rep.max_velocity_deviation <= 0.1
        && rep.trend_non_increasing();
    report(
        "A8 asymptotic law (desk scale)",
        ok,
        &format!(
            "window ratio {:.2} (>= 4), gap dev {:.3e} (<= 0.1), velocity dev {:.3e} (<= 0.1), (t+t*)|g| trend {:.3e} -> {:.3e} (non-increasing required; frozen internal-mode floor), (t+t*)sqrt(|g|^2+rho) trend {:.3e} -> {:.3e}",
            rep.window_ratio,
            rep.max_gap_deviation,
            rep.max_velocity_deviation,
            rep.weighted_g_first_half,
            rep.weighted_g_second_half,
            rep.weighted_distance_first_half,
            rep.weighted_distance_second_half
        ),
    );
}

#[test]
fn a9_cluster_construction_desk_scale() {
    let (prof, p) = phi4();
    let horizon = 40.0;
    let result =
        experiments::construct_cluster(&prof, &p, &[12.0], horizon, &SolverParams::default())
            .expect("A9 shooting run");
    let miss = (result.achieved_gaps[0] - 12.0).abs();
    // envelope (e^{y0} + t^2) d(t) within a factor 10 of its initial value
    let l = (12.0f64).exp();
    let env: Vec<f64> = result
        .series
        .samples
        .iter()
        .map(|s| {
            let t = horizon - s.t;
            (l + t * t) * (s.g_norm * s.g_norm + s.rho)
        })
        .collect();
    let env0 = env[0];
    let factor = env
        .iter()
        .map(|e| (e / env0).max(env0 / e))
        .fold(1.0f64, f64::max);
    report(
        "A9 cluster construction (desk scale)",
        miss <= 0.05 && factor <= 10.0,
        &format!(
            "|fitted y(0) - 12| = {miss:.3e} (<= 0.05), envelope factor {factor:.2} (<= 10), {} map evaluations",
            result.map_evaluations
        ),
    );
}

#[test]
fn a10_modulation_fidelity() {
    let result = a8_launch();
    let series = &result.series;
    let m = series.samples.len();
    // five-point interior stencil: skip the first/last two samples
    let mut worst_mv: f64 = 0.0;
    let mut worst_pf: f64 = 0.0;
    for i in 2..m - 2 {
        for k in 0..series.n {
            worst_mv = worst_mv.max(series.momentum_mismatch[i][k]);
            worst_pf = worst_pf.max(series.force_mismatch[i][k]);
        }
    }
    report(
        "A10 modulation fidelity",
        worst_mv <= 10.0 && worst_pf <= 20.0,
        &format!(
            "max |Mv - p| / rho = {worst_mv:.2} (<= 10), max |p' - F| (-log rho)/rho = {worst_pf:.2} (<= 20)"
        ),
    );
}

#[test]
fn a11_euler_solver() {
    // homogeneous branch exact to 1e-12
    let t0 = 5.0;
    let n = 3;
    let b0 = vec![0.4, -0.3, 0.2];
    let zero = |_: f64| vec![0.0; 3];
    let sol = nbody::euler_solve(n, t0, &b0, Box::new(zero), Box::new(zero)).unwrap();
    let legendre = nbody::legendre_vectors(n);
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let mut worst_hom: f64 = 0.0;
    for &t in &[0.0, 3.0, 30.0, 100.0] {
        let (b, _) = sol.eval(t);
        for (l, p) in legendre.iter().enumerate() {
            let b0_l = dot(&b0, p) / dot(p, p);
            let exact = t0.powi(l as i32) * b0_l * (t0 + t).powi(-(l as i32));
            let got = dot(&b, p) / dot(p, p);
            worst_hom = worst_hom.max((got - exact).abs());
        }
    }

    // forced modes l = 0, 1, 2: back-substitution residual on [0, 100]
    let forced = nbody::euler_solve(
        n,
        t0,
        &b0,
        Box::new(move |t: f64| {
            vec![(t0 + t).powi(-3), 0.3 * (t0 + t).powi(-4), 0.1 * (t0 + t).powi(-3)]
        }),
        Box::new(move |t: f64| {
            vec![0.5 * (t0 + t).powi(-3), (t0 + t).powi(-4), 0.2 * (t0 + t).powi(-3)]
        }),
    )
    .unwrap();
    let u = nbody::interaction_matrix(n);
    let h = 1e-2;
    let mut worst_res: f64 = 0.0;
    for &t in &[1.0, 10.0, 50.0, 100.0] {
        // five-point derivative of the returned solution
        let stencil: Vec<(Vec<f64>, Vec<f64>)> = (-2..=2)
            .map(|j| forced.eval(t + j as f64 * h))
            .collect();
        let (b, w) = forced.eval(t);
        let f_t = [(t0 + t).powi(-3), 0.3 * (t0 + t).powi(-4), 0.1 * (t0 + t).powi(-3)];
        let g_t = [0.5 * (t0 + t).powi(-3), (t0 + t).powi(-4), 0.2 * (t0 + t).powi(-3)];
        let ub = u.mul_vec(&b);
        let d5 = |vals: [f64; 5]| {
            (vals[0] - 8.0 * vals[1] + 8.0 * vals[3] - vals[4]) / (12.0 * h)
        };
        for j in 0..n {
            let db = d5([
                stencil[0].0[j],
                stencil[1].0[j],
                stencil[2].0[j],
                stencil[3].0[j],
                stencil[4].0[j],
            ]);
            let dw = d5([
                stencil[0].1[j],
                stencil[1].1[j],
                stencil[2].1[j],
                stencil[3].1[j],
                stencil[4].1[j],
            ]);
            worst_res = worst_res.max((db - w[j] - f_t[j]).abs());
            worst_res = worst_res.max((dw - ub[j] / ((t0 + t) * (t0 + t)) - g_t[j]).abs());
        }
    }
    report(
        "A11 Euler solver",
        worst_hom <= 1e-12 && worst_res <= 1e-8,
        &format!("homogeneous error {worst_hom:.2e} (<= 1e-12), forced residual {worst_res:.2e} (<= 1e-8)"),
    );
}
