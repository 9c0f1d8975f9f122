//! End-to-end experiment driver: near-parabolic cluster launches, backward
//! shooting construction of clusters with prescribed initial positions, and
//! verification of the asymptotic separation law against PDE runs.
//!
//! Every run validates the safe-window rule first: the boundary must be
//! farther from the outermost kink than the run duration plus a margin, so
//! that boundary effects (propagation speed one) cannot reach the kinks.

use crate::error::{Error, Result};
use crate::exec::map_items;
use crate::field::{self, FieldState, Grid, RunRecord};
use crate::kink::KinkProfile;
use crate::modulation::{ModulationSeries, Tracker};
use crate::multikink::{self, MultikinkConfig};
use crate::nbody;
use crate::num::linear_fit;
use crate::potential::Potential;

/// Spatial/temporal resolution of an experiment.
#[derive(Clone, Copy, Debug)]
pub struct SolverParams {
    pub dx: f64,
    pub dt: f64,
    pub sample_dt: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            dx: 0.05,
            dt: 0.04,
            sample_dt: 1.0,
        }
    }
}

/// Margin added to the safe-window distance (in addition to the mandated 5).
const SAFE_WINDOW_EXTRA: f64 = 2.0;

/// Check the safe-window rule: the run of length `t_run` must keep boundary
/// influence away from kinks that stay within [-a_extent, a_extent].
pub fn validate_safe_window(grid: &Grid, a_extent: f64, t_run: f64) -> Result<()> {
    let left = -a_extent - grid.x_left;
    let right = grid.x_right - a_extent;
    let need = t_run + 5.0;
    if left < need || right < need {
        return Err(Error::Domain(format!(
            "safe-window violation: boundary distance ({:.1}, {:.1}) < t_run + 5 = {need:.1}",
            left, right
        )));
    }
    Ok(())
}

/// Launch time at which the explicit law gives the prescribed widest gap.
pub fn time_for_gap(n: usize, mass: f64, kappa: f64, gap: f64) -> f64 {
    // widest gap is at k = floor(n/2) (sigma_k maximal -> gap minimal at the
    // center; the widest is at k = 1 or n-1, sigma smallest)
    let k = 1.max(n - 1); // k(n-k) minimal at the edges
    let k = if n >= 2 { 1 } else { k };
    let sig = mass * (k * (n - k)) as f64 / 2.0;
    (gap / 2.0 + 0.5 * sig.ln()).exp() / kappa
}

// ---------------------------------------------------------------------------
// choose_boost
// ---------------------------------------------------------------------------

/// Outgoing Lorentz parameters v_{T,k} = ((2k-n-1)/2) lambda sqrt(rho(a_T))
/// with lambda chosen by bisection so that E(H(a_T, v_T)) = n M to 1e-8.
pub fn choose_boost(
    prof: &KinkProfile,
    p: &Potential,
    a_t: &[f64],
    grid: Grid,
) -> Result<Vec<f64>> {
    let n = a_t.len();
    let rest = MultikinkConfig::at_rest(a_t.to_vec())?;
    let rho = rest.proximity();
    if rho > 1e-2 {
        return Err(Error::Domain(format!(
            "choose_boost needs rho(a_T) <= 1e-2, got {rho:.3e}"
        )));
    }
    let sqrt_rho = rho.sqrt();
    // Target n times the single-kink energy measured on the same grid: the
    // O(dx^2) quadrature bias then cancels between the two sides, which
    // matters once rho is below the bias scale.
    let single = {
        let cfg = MultikinkConfig::at_rest(vec![0.0])?;
        let s = multikink::synthesize(prof, &cfg, grid)?;
        multikink::total_energy(p, &s).value
    };
    let target = n as f64 * single;
    let velocities = |lambda: f64| -> Vec<f64> {
        (1..=n)
            .map(|k| (2.0 * k as f64 - n as f64 - 1.0) / 2.0 * lambda * sqrt_rho)
            .collect()
    };
    let energy_gap = |lambda: f64| -> Result<f64> {
        let cfg = MultikinkConfig::new(a_t.to_vec(), velocities(lambda))?;
        let state = multikink::synthesize(prof, &cfg, grid)?;
        Ok(multikink::total_energy(p, &state).value - target)
    };

    let (mut lo, mut hi) = (0.1, 10.0);
    let mut f_lo = energy_gap(lo)?;
    let mut f_hi = energy_gap(hi)?;
    while f_lo.signum() == f_hi.signum() {
        lo *= 0.5;
        hi *= 2.0;
        if lo < 1e-3 || hi > 1e3 {
            return Err(Error::BoostSelection { lo, hi });
        }
        f_lo = energy_gap(lo)?;
        f_hi = energy_gap(hi)?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = energy_gap(mid)?;
        if f_mid.abs() <= 1e-8 {
            return Ok(velocities(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(velocities(0.5 * (lo + hi)))
}

// ---------------------------------------------------------------------------
// exit_time_map
// ---------------------------------------------------------------------------

/// Shooting data: target gaps at t = 0, backward horizon, search box and the
/// exit threshold 2n e^{-L1}.
#[derive(Clone, Debug)]
pub struct ShootingProblem {
    pub target_gaps: Vec<f64>,
    pub horizon: f64,
    pub box_lo: f64,
    pub box_hi: f64,
    pub exit_threshold: f64,
}

impl ShootingProblem {
    /// L1 = min y0 - 2 and L2 = max y0 + 4; threshold 2n e^{-L1}.
    pub fn new(target_gaps: Vec<f64>, horizon: f64) -> ShootingProblem {
        let n = target_gaps.len() + 1;
        let min_y = target_gaps.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_y = target_gaps.iter().cloned().fold(0.0f64, f64::max);
        let box_lo = min_y - 2.0;
        let box_hi = max_y + 4.0;
        ShootingProblem {
            target_gaps,
            horizon,
            box_lo,
            box_hi,
            exit_threshold: 2.0 * n as f64 * (-box_lo).exp(),
        }
    }

    pub fn n(&self) -> usize {
        self.target_gaps.len() + 1
    }
}

/// One evaluation of the exit-time map.
#[derive(Clone, Debug)]
pub struct ExitMapEval {
    /// Fitted gaps at the exit time T1 (at t = 0 when the threshold is never
    /// crossed).
    pub gaps: Vec<f64>,
    pub t1: f64,
    /// Modulation series of the reversed run (tau = T - t).
    pub series: ModulationSeries,
}

/// Evolve H(a_T, v_T) backward over [0, T] (time reversal + forward leapfrog)
/// while tracking modulation; return the fitted gaps at the exit time.
pub fn exit_time_map(
    prof: &KinkProfile,
    p: &Potential,
    problem: &ShootingProblem,
    y_t: &[f64],
    params: &SolverParams,
) -> Result<ExitMapEval> {
    let n = problem.n();
    assert_eq!(y_t.len(), n - 1);
    let t_horizon = problem.horizon;

    // positions with barycenter zero
    let mut a_t = vec![0.0; n];
    for k in 1..n {
        a_t[k] = a_t[k - 1] + y_t[k - 1];
    }
    let mean = a_t.iter().sum::<f64>() / n as f64;
    for a in &mut a_t {
        *a -= mean;
    }

    let extent = a_t.iter().fold(0.0f64, |m, &a| m.max(a.abs()));
    // the collar must satisfy both the safe-window rule and the boundary
    // vacuum-matching tolerance (kink tails decay like kappa e^{-distance})
    let collar = (t_horizon + 5.0 + SAFE_WINDOW_EXTRA).max(16.0);
    let half_span = extent + collar;
    let grid = Grid::with_spacing(-half_span, half_span, params.dx);
    validate_safe_window(&grid, extent, t_horizon)?;

    let v_t = choose_boost(prof, p, &a_t, grid)?;
    let cfg = MultikinkConfig::new(a_t, v_t)?;
    let state = multikink::synthesize(prof, &cfg, grid)?;

    // backward evolution: reverse time, then march forward for T
    let reversed = state.time_reverse();
    let mut tracker = Tracker::new(prof, n);
    field::evolve(p, &reversed, t_horizon, params.dt, params.sample_dt, |st| {
        tracker.observe(st)
    })
    .map_err(|e| Error::MapEvaluation {
        t: tracker.failed_at.unwrap_or(f64::NAN),
        reason: e.to_string(),
    })?;
    let series = tracker.finish();

    // first reversed-run sample where rho-tilde exceeds the threshold
    let mut hit = None;
    for (i, s) in series.samples.iter().enumerate() {
        let rho_gaps: f64 = s
            .a
            .windows(2)
            .map(|w| (-(w[1] - w[0])).exp())
            .sum();
        if rho_gaps > problem.exit_threshold {
            hit = Some(i);
            break;
        }
    }
    let idx = hit.unwrap_or(series.samples.len() - 1);
    let t1 = match hit {
        Some(_) => t_horizon - series.samples[idx].t,
        None => 0.0,
    };
    let gaps: Vec<f64> = series.samples[idx]
        .a
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    Ok(ExitMapEval { gaps, t1, series })
}

// ---------------------------------------------------------------------------
// construct_cluster
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct ClusterResult {
    /// Gaps of the multikink data at time T that shoot to the target.
    pub y_t: Vec<f64>,
    /// Configuration at t = 0 in original time orientation.
    pub config0: MultikinkConfig,
    /// Modulation series of the accepted backward run (tau = T - t).
    pub series: ModulationSeries,
    pub map_evaluations: usize,
    pub achieved_gaps: Vec<f64>,
}

const SEARCH_BUDGET: usize = 40;
const CLUSTER_TOL_POS: f64 = 0.05;

/// Solve Psi(y_T) = y_0 for the backward-shooting data: bisection for n = 2,
/// Broyden with a sign-box fallback for n = 3.
pub fn construct_cluster(
    prof: &KinkProfile,
    p: &Potential,
    target_gaps: &[f64],
    horizon: f64,
    params: &SolverParams,
) -> Result<ClusterResult> {
    let n = target_gaps.len() + 1;
    if !(2..=3).contains(&n) {
        return Err(Error::Domain(format!(
            "construct_cluster supports n in {{2, 3}}, got {n}"
        )));
    }
    let min_y = target_gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_y < 10.0 {
        return Err(Error::Domain(format!(
            "construct_cluster needs min gap >= 10, got {min_y}"
        )));
    }
    let problem = ShootingProblem::new(target_gaps.to_vec(), horizon);
    let mut evals = 0usize;
    #[allow(unused_assignments)]
    let mut best: Option<(Vec<f64>, ExitMapEval)> = None;

    let eval = |y_t: &[f64], evals: &mut usize| -> Result<ExitMapEval> {
        if *evals >= SEARCH_BUDGET {
            return Err(Error::SearchBudget { evals: *evals });
        }
        *evals += 1;
        exit_time_map(prof, p, &problem, y_t, params)
    };

    if n == 2 {
        // Guarded secant on the scalar map (Psi is close to the identity in
        // the weak-interaction regime), falling back to bracket bisection.
        let target = target_gaps[0];
        let (mut lo, mut hi) = (problem.box_lo, problem.box_hi);
        let (mut f_lo, mut f_hi) = (f64::NAN, f64::NAN);
        let mut y1 = target;
        let mut e1 = eval(&[y1], &mut evals)?;
        let mut f1 = e1.gaps[0] - target;
        loop {
            best = Some((vec![y1], e1.clone()));
            if f1.abs() <= 0.5 * CLUSTER_TOL_POS {
                break;
            }
            if f1 > 0.0 {
                hi = y1;
                f_hi = f1;
            } else {
                lo = y1;
                f_lo = f1;
            }
            // secant with unit slope on the first step
            let mut y2 = if f_lo.is_nan() || f_hi.is_nan() {
                y1 - f1
            } else {
                lo - f_lo * (hi - lo) / (f_hi - f_lo)
            };
            if !(lo < y2 && y2 < hi) {
                y2 = 0.5 * (lo + hi);
            }
            e1 = eval(&[y2], &mut evals)?;
            f1 = e1.gaps[0] - target;
            y1 = y2;
        }
    } else {
        // Broyden iteration on Psi(y_T) - y_0 with identity-scaled initial
        // Jacobian; fall back to coordinatewise sign-box shrinking on stall.
        let d = n - 1;
        let mut jac = crate::linalg::Matrix::identity(d);
        let mut y = target_gaps.to_vec();
        for v in &mut y {
            *v += 0.5; // backward runs shrink the gaps: start slightly wide
        }
        let mut e = eval(&y, &mut evals)?;
        let mut f: Vec<f64> = e
            .gaps
            .iter()
            .zip(target_gaps)
            .map(|(g, t)| g - t)
            .collect();
        let mut box_lo = vec![problem.box_lo; d];
        let mut box_hi = vec![problem.box_hi; d];
        loop {
            let norm = f.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            best = Some((y.clone(), e.clone()));
            if norm <= 0.5 * CLUSTER_TOL_POS {
                break;
            }
            let step = crate::linalg::lu_solve(&jac, &f);
            let mut y_new: Vec<f64> = match &step {
                Some(s) => y.iter().zip(s).map(|(yi, si)| yi - si).collect(),
                None => y.clone(),
            };
            let inside = y_new
                .iter()
                .enumerate()
                .all(|(i, &v)| v >= box_lo[i] && v <= box_hi[i]);
            if step.is_none() || !inside {
                // sign-box shrink toward the consistent sub-box
                for i in 0..d {
                    if f[i] > 0.0 {
                        box_hi[i] = y[i];
                    } else {
                        box_lo[i] = y[i];
                    }
                }
                y_new = box_lo
                    .iter()
                    .zip(&box_hi)
                    .map(|(l, h)| 0.5 * (l + h))
                    .collect();
                jac = crate::linalg::Matrix::identity(d);
            }
            let e_new = eval(&y_new, &mut evals)?;
            let f_new: Vec<f64> = e_new
                .gaps
                .iter()
                .zip(target_gaps)
                .map(|(g, t)| g - t)
                .collect();
            // Broyden good update: J += (df - J dy) dy^T / (dy . dy)
            let dy: Vec<f64> = y_new.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dy_norm: f64 = dy.iter().map(|v| v * v).sum();
            if dy_norm > 1e-20 {
                let jdy = jac.mul_vec(&dy);
                for r in 0..d {
                    let coeff = (f_new[r] - f[r] - jdy[r]) / dy_norm;
                    for c in 0..d {
                        jac[(r, c)] += coeff * dy[c];
                    }
                }
            }
            y = y_new;
            e = e_new;
            f = f_new;
        }
    }

    let (y_t, eval_final) = best.expect("search produced an iterate");
    let last = eval_final
        .series
        .samples
        .last()
        .ok_or_else(|| Error::MapEvaluation {
            t: 0.0,
            reason: "empty tracked series".into(),
        })?;
    let achieved: Vec<f64> = last.a.windows(2).map(|w| w[1] - w[0]).collect();
    for (got, want) in achieved.iter().zip(target_gaps) {
        if (got - want).abs() > CLUSTER_TOL_POS {
            return Err(Error::MapEvaluation {
                t: 0.0,
                reason: format!(
                    "converged search missed target: |{got:.4} - {want:.4}| > {CLUSTER_TOL_POS}"
                ),
            });
        }
    }
    // un-reverse the velocities for the t = 0 configuration
    let config0 = MultikinkConfig::new(
        last.a.clone(),
        last.v.iter().map(|v| -v).collect(),
    )?;
    Ok(ClusterResult {
        y_t,
        config0,
        series: eval_final.series,
        map_evaluations: evals,
        achieved_gaps: achieved,
    })
}

// ---------------------------------------------------------------------------
// launch_parabolic
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct LaunchResult {
    pub t_launch: f64,
    pub series: ModulationSeries,
    pub record: RunRecord,
    pub final_state: FieldState,
}

/// Synthesize the explicit-parabolic configuration at `t_launch`, evolve
/// forward for `t_run` and track the modulation parameters.
pub fn launch_parabolic(
    prof: &KinkProfile,
    p: &Potential,
    n: usize,
    t_launch: f64,
    t_run: f64,
    params: &SolverParams,
) -> Result<LaunchResult> {
    let toda0 = nbody::explicit_parabolic(n, prof.mass, prof.kappa, t_launch, 0.0);
    let velocities: Vec<f64> = toda0.momenta.iter().map(|pk| pk / prof.mass).collect();
    let cfg = MultikinkConfig::new(toda0.positions.clone(), velocities)?;

    // extent of the outermost kink at the end of the run, from the law
    let toda_end = nbody::explicit_parabolic(n, prof.mass, prof.kappa, t_launch + t_run, 0.0);
    let extent = toda_end
        .positions
        .iter()
        .fold(0.0f64, |m, &a| m.max(a.abs()))
        + 1.0;
    let collar = (t_run + 5.0 + SAFE_WINDOW_EXTRA).max(16.0);
    let half_span = extent + collar;
    let grid = Grid::with_spacing(-half_span, half_span, params.dx);
    validate_safe_window(&grid, extent, t_run)?;

    let state = multikink::synthesize(prof, &cfg, grid)?;
    let mut tracker = Tracker::new(prof, n);
    let (final_state, record) =
        field::evolve(p, &state, t_run, params.dt, params.sample_dt, |st| {
            tracker.observe(st)
        })?;
    Ok(LaunchResult {
        t_launch,
        series: tracker.finish(),
        record,
        final_state,
    })
}

// ---------------------------------------------------------------------------
// verify_asymptotics
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, serde::Serialize)]
pub struct VerificationReport {
    pub n: usize,
    /// Fitted time offset of the law (the run clock starts at zero).
    pub t_star: f64,
    /// (t_max + t*) / (t_min + t*) of the verified window.
    pub window_ratio: f64,
    /// max_k |y_k(t) - (2 log(kappa (t+t*)) - log(M k(n-k)/2))| on the final
    /// half-window.
    pub max_gap_deviation: f64,
    /// max_k |(t+t*) v_k(t) + (n+1-2k)| on the final half-window.
    pub max_velocity_deviation: f64,
    /// Regression slope of (t+t*) |g|_E over the final half-window, and the
    /// means of its two halves (the trend is non-increasing when the second
    /// half does not exceed the first).
    pub weighted_g_slope: f64,
    pub weighted_g_first_half: f64,
    pub weighted_g_second_half: f64,
    /// Supplementary diagnostic: means of (t+t*) sqrt(|g|_E^2 + rho), the
    /// weighted distance-to-family proxy, over the same two halves.
    pub weighted_distance_first_half: f64,
    pub weighted_distance_second_half: f64,
    /// False when the gaps fail to be nondecreasing (collapsing run: the law
    /// does not apply).
    pub monotone_gaps: bool,
}

impl VerificationReport {
    pub fn trend_non_increasing(&self) -> bool {
        self.weighted_g_second_half <= self.weighted_g_first_half * 1.05
    }
}

fn law_gap(mass: f64, kappa: f64, n: usize, k: usize, t: f64) -> f64 {
    2.0 * (kappa * t).ln() - (mass * (k * (n - k)) as f64 / 2.0).ln()
}

/// Compare a tracked series against the separation law with a single fitted
/// time offset t*.
pub fn verify_asymptotics(series: &ModulationSeries, mass: f64, kappa: f64) -> VerificationReport {
    let n = series.n;
    let samples = &series.samples;
    assert!(samples.len() >= 8, "series too short to verify");
    let gaps_of = |s: &crate::modulation::ModulationSample| -> Vec<f64> {
        s.a.windows(2).map(|w| w[1] - w[0]).collect()
    };

    let mut monotone = true;
    for k in 0..n - 1 {
        let mut prev = f64::NEG_INFINITY;
        for s in samples {
            let y = gaps_of(s)[k];
            if y < prev - 1e-9 {
                monotone = false;
            }
            prev = y;
        }
    }

    // least-squares fit of the scalar offset t* by golden-section search on
    // the summed squared gap deviation
    let sse = |t_star: f64| -> f64 {
        let mut acc = 0.0;
        for s in samples {
            let t = s.t + t_star;
            if t <= 0.0 {
                return f64::INFINITY;
            }
            for (k, y) in gaps_of(s).iter().enumerate() {
                let d = y - law_gap(mass, kappa, n, k + 1, t);
                acc += d * d;
            }
        }
        acc
    };
    let (mut lo, mut hi): (f64, f64) = (1e-3, 1e7);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    // golden section in log space
    let (mut llo, mut lhi) = (lo.ln(), hi.ln());
    for _ in 0..200 {
        let m1 = lhi - phi * (lhi - llo);
        let m2 = llo + phi * (lhi - llo);
        if sse(m1.exp()) < sse(m2.exp()) {
            lhi = m2;
        } else {
            llo = m1;
        }
    }
    lo = llo.exp();
    hi = lhi.exp();
    let t_star = 0.5 * (lo + hi);

    let t_min = samples.first().unwrap().t;
    let t_max = samples.last().unwrap().t;
    let window_ratio = (t_max + t_star) / (t_min + t_star);

    // deviations over the final half-window
    let t_half = 0.5 * (t_min + t_max);
    let mut max_gap_dev: f64 = 0.0;
    let mut max_vel_dev: f64 = 0.0;
    let mut window: Vec<(f64, f64, f64)> = Vec::new(); // (t, (t+t*)|g|, (t+t*)sqrt(|g|^2+rho))
    for s in samples {
        if s.t < t_half {
            continue;
        }
        let t = s.t + t_star;
        for (k, y) in gaps_of(s).iter().enumerate() {
            max_gap_dev = max_gap_dev.max((y - law_gap(mass, kappa, n, k + 1, t)).abs());
        }
        for (k, v) in s.v.iter().enumerate() {
            let expected = n as f64 + 1.0 - 2.0 * (k + 1) as f64;
            max_vel_dev = max_vel_dev.max((t * v + expected).abs());
        }
        let d_proxy = (s.g_norm * s.g_norm + s.rho).sqrt();
        window.push((s.t, t * s.g_norm, t * d_proxy));
    }
    let ts: Vec<f64> = window.iter().map(|w| w.0).collect();
    let ws: Vec<f64> = window.iter().map(|w| w.1).collect();
    let ds: Vec<f64> = window.iter().map(|w| w.2).collect();
    let (slope, _) = if ts.len() >= 2 {
        linear_fit(&ts, &ws)
    } else {
        (0.0, 0.0)
    };
    let half = ws.len() / 2;
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    VerificationReport {
        n,
        t_star,
        window_ratio,
        max_gap_deviation: max_gap_dev,
        max_velocity_deviation: max_vel_dev,
        weighted_g_slope: slope,
        weighted_g_first_half: mean(&ws[..half]),
        weighted_g_second_half: mean(&ws[half..]),
        weighted_distance_first_half: mean(&ds[..half]),
        weighted_distance_second_half: mean(&ds[half..]),
        monotone_gaps: monotone,
    }
}

// ---------------------------------------------------------------------------
// sweeps (data-parallel)
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct ForceRow {
    pub y: f64,
    pub f_quadrature: f64,
    pub f_asymptotic: f64,
    pub relative_error: f64,
}

fn force_at_gap(prof: &KinkProfile, y: f64) -> ForceRow {
    let cfg = MultikinkConfig::at_rest(vec![-y / 2.0, y / 2.0]).expect("ascending");
    let f = multikink::interaction_force(prof, &cfg, 1);
    let asym = multikink::force_asymptotic(prof.kappa, &cfg, 1);
    ForceRow {
        y,
        f_quadrature: f,
        f_asymptotic: asym,
        relative_error: ((f - asym) / asym).abs(),
    }
}

/// Kink-antikink force across a range of gaps (parallel over gaps).
pub fn force_sweep(prof: &KinkProfile, gaps: &[f64]) -> Vec<ForceRow> {
    map_items(gaps, |&y| force_at_gap(prof, y))
}

/// Sequential reference path of `force_sweep` (benchmark baseline).
pub fn force_sweep_seq(prof: &KinkProfile, gaps: &[f64]) -> Vec<ForceRow> {
    crate::exec::map_items_seq(gaps, |&y| force_at_gap(prof, y))
}

#[derive(Clone, Copy, Debug)]
pub struct EnergyRow {
    pub y: f64,
    pub e_quadrature: f64,
    pub e_expansion: f64,
    pub residual: f64,
}

/// Pair energy against the two-term expansion across gaps; the measured
/// single-kink energy on the same grid replaces nM so that the shared
/// discretization bias cancels.
pub fn energy_sweep(prof: &KinkProfile, p: &Potential, gaps: &[f64], dx: f64) -> Vec<EnergyRow> {
    let grid = Grid::with_spacing(-40.0, 40.0, dx);
    let single = {
        let cfg = MultikinkConfig::at_rest(vec![0.0]).expect("single");
        let s = multikink::synthesize(prof, &cfg, grid).expect("grid covers");
        multikink::total_energy(p, &s).value
    };
    map_items(gaps, |&y| {
        let cfg = MultikinkConfig::at_rest(vec![-y / 2.0, y / 2.0]).expect("ascending");
        let s = multikink::synthesize(prof, &cfg, grid).expect("grid covers");
        let e = multikink::total_energy(p, &s).value;
        let expansion = 2.0 * single - 2.0 * prof.kappa * prof.kappa * (-y).exp();
        EnergyRow {
            y,
            e_quadrature: e,
            e_expansion: expansion,
            residual: (e - expansion).abs(),
        }
    })
}

#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub error: f64,
}

/// Sup-norm error of a boosted kink against the traveling profile after time
/// `t_run`, for each resolution (parallel over resolutions).
pub fn convergence_study(
    prof: &KinkProfile,
    p: &Potential,
    dxs: &[f64],
    v: f64,
    t_run: f64,
) -> Vec<ConvergenceRow> {
    map_items(dxs, |&dx| {
        let half = t_run + 15.0 + v * t_run;
        let grid = Grid::with_spacing(-half, half, dx);
        let cfg = MultikinkConfig::new(vec![0.0], vec![v]).expect("config");
        let s0 = multikink::synthesize(prof, &cfg, grid).expect("grid covers");
        let (s, _) = field::evolve(p, &s0, t_run, 0.8 * dx, t_run, |_| Ok(())).expect("run");
        let gamma = 1.0 / (1.0 - v * v).sqrt();
        let mut err: f64 = 0.0;
        for (i, x) in grid.nodes().enumerate() {
            // exclude the boundary-pinned collar
            if x.abs() > half - 5.0 {
                continue;
            }
            let exact = -prof.h_at(gamma * (x - v * t_run));
            err = err.max((s.phi[i] - exact).abs());
        }
        ConvergenceRow { dx, error: err }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi4() -> (KinkProfile, Potential) {
        let p = Potential::phi4();
        (KinkProfile::build(&p, 15.0, 4096).unwrap(), p)
    }

    fn fast_params() -> SolverParams {
        SolverParams {
            dx: 0.05,
            dt: 0.04,
            sample_dt: 0.5,
        }
    }

    #[test]
    fn boost_selection_properties() {
        let (prof, p) = phi4();
        let a_t = [-6.0, 6.0];
        let grid = Grid::with_spacing(-40.0, 40.0, 0.02);
        let v = choose_boost(&prof, &p, &a_t, grid).unwrap();
        // sum v = 0 exactly, equal spacing, outgoing
        assert_eq!(v[0], -v[1]);
        assert!(v[1] > 0.0);
        // E = nM to 1e-8, with nM measured as n single-kink energies on the
        // same grid (the shared quadrature bias cancels)
        let cfg = MultikinkConfig::new(a_t.to_vec(), v.clone()).unwrap();
        let s = multikink::synthesize(&prof, &cfg, grid).unwrap();
        let e = multikink::total_energy(&p, &s).value;
        let single = {
            let c1 = MultikinkConfig::at_rest(vec![0.0]).unwrap();
            let s1 = multikink::synthesize(&prof, &c1, grid).unwrap();
            multikink::total_energy(&p, &s1).value
        };
        assert!((e - 2.0 * single).abs() <= 1e-8, "E - 2M = {:.3e}", e - 2.0 * single);
        assert!((single - prof.mass).abs() <= 1e-4);
        // within 20% of the explicit-law speed kappa e^{-y/2} / sqrt(M/2)
        let law = prof.kappa * (-6.0f64).exp() / (prof.mass / 2.0).sqrt();
        assert!((v[1] - law).abs() <= 0.2 * law, "v = {}, law = {law}", v[1]);
    }

    #[test]
    fn boost_spacing_constant_for_three() {
        let (prof, p) = phi4();
        let a_t = [-12.0, 0.0, 12.0];
        let grid = Grid::with_spacing(-60.0, 60.0, 0.05);
        let v = choose_boost(&prof, &p, &a_t, grid).unwrap();
        assert!((v.iter().sum::<f64>()).abs() < 1e-15);
        let d1 = v[1] - v[0];
        let d2 = v[2] - v[1];
        assert!((d1 - d2).abs() <= 1e-12 * d1.abs());
    }

    #[test]
    fn exit_map_identity_for_huge_separation() {
        // threshold never crossed: T1 = 0, returned gaps = gaps at t = 0
        let (prof, p) = phi4();
        let problem = ShootingProblem::new(vec![12.0], 5.0);
        let eval = exit_time_map(&prof, &p, &problem, &[20.0], &fast_params()).unwrap();
        assert_eq!(eval.t1, 0.0);
        // over 5 time units a huge-gap pair barely moves
        assert!((eval.gaps[0] - 20.0).abs() < 0.05, "gap {}", eval.gaps[0]);
    }

    #[test]
    fn exit_map_monotone_smoke() {
        let (prof, p) = phi4();
        let problem = ShootingProblem::new(vec![12.0], 10.0);
        let e1 = exit_time_map(&prof, &p, &problem, &[11.5], &fast_params()).unwrap();
        let e2 = exit_time_map(&prof, &p, &problem, &[12.5], &fast_params()).unwrap();
        assert!(e2.gaps[0] > e1.gaps[0]);
    }

    #[test]
    fn cluster_two_kinks_short_horizon() {
        let (prof, p) = phi4();
        let result = construct_cluster(&prof, &p, &[12.0], 15.0, &fast_params()).unwrap();
        assert!((result.achieved_gaps[0] - 12.0).abs() <= 0.05);
        assert!(result.map_evaluations <= 40);
        // outgoing at t = 0 in original orientation
        let v0 = result.config0.velocities();
        assert!(v0[0] < 0.0 && v0[1] > 0.0, "v0 = {v0:?}");
    }

    #[test]
    fn weak_interaction_cluster_converges_quickly() {
        let (prof, p) = phi4();
        let result = construct_cluster(&prof, &p, &[20.0], 10.0, &fast_params()).unwrap();
        assert!((result.achieved_gaps[0] - 20.0).abs() <= 0.05);
        assert!(result.map_evaluations <= 6, "evals {}", result.map_evaluations);
    }

    #[test]
    fn launch_single_antikink_is_stationary() {
        let (prof, p) = phi4();
        let result = launch_parabolic(&prof, &p, 1, 50.0, 10.0, &fast_params()).unwrap();
        let a0 = result.series.samples[0].a[0];
        for s in &result.series.samples {
            assert!((s.a[0] - a0).abs() <= 1e-6);
        }
    }

    #[test]
    fn launched_pair_separates() {
        let (prof, p) = phi4();
        let t0 = time_for_gap(2, prof.mass, prof.kappa, 12.0);
        let result = launch_parabolic(&prof, &p, 2, t0, 30.0, &fast_params()).unwrap();
        let first = &result.series.samples[0];
        let last = result.series.samples.last().unwrap();
        assert!(last.a[1] - last.a[0] > first.a[1] - first.a[0]);
        // outgoing throughout
        for s in result.series.samples.iter().skip(1) {
            assert!(s.v[1] > 0.0, "t = {}", s.t);
        }
    }

    #[test]
    fn reversed_launch_approaches() {
        let (prof, p) = phi4();
        let t0 = time_for_gap(2, prof.mass, prof.kappa, 11.0);
        let toda0 = nbody::explicit_parabolic(2, prof.mass, prof.kappa, t0, 0.0);
        let velocities: Vec<f64> = toda0.momenta.iter().map(|pk| pk / prof.mass).collect();
        let cfg = MultikinkConfig::new(toda0.positions.clone(), velocities).unwrap();
        let grid = Grid::with_spacing(-40.0, 40.0, 0.05);
        let state = multikink::synthesize(&prof, &cfg, grid).unwrap().time_reverse();
        let mut tracker = Tracker::new(&prof, 2);
        field::evolve(&p, &state, 20.0, 0.04, 1.0, |st| tracker.observe(st)).unwrap();
        let series = tracker.finish();
        let first = &series.samples[0];
        let last = series.samples.last().unwrap();
        assert!(
            last.a[1] - last.a[0] < first.a[1] - first.a[0],
            "attractive interaction must pull the reversed pair together"
        );
    }

    #[test]
    fn cluster_roundtrip_reproduces_backward_trajectory() {
        // forward evolution from the backward-run endpoint returns to the
        // shooting data (leapfrog reversibility at the experiment level)
        let (prof, p) = phi4();
        let horizon = 15.0;
        let a_t = [-6.2, 6.2];
        let grid = Grid::with_spacing(-30.0, 30.0, 0.05);
        let v_t = choose_boost(&prof, &p, &a_t, grid).unwrap();
        let cfg = MultikinkConfig::new(a_t.to_vec(), v_t).unwrap();
        let s_t = multikink::synthesize(&prof, &cfg, grid).unwrap();
        let (back_end, _) =
            field::evolve(&p, &s_t.time_reverse(), horizon, 0.04, horizon, |_| Ok(())).unwrap();
        let state0 = back_end.time_reverse();
        let (fwd_end, _) = field::evolve(
            &p,
            &field::FieldState { time: 0.0, ..state0 },
            horizon,
            0.04,
            horizon,
            |_| Ok(()),
        )
        .unwrap();
        let mut err: f64 = 0.0;
        for i in 0..s_t.phi.len() {
            err = err.max((fwd_end.phi[i] - s_t.phi[i]).abs());
            err = err.max((fwd_end.phidot[i] - s_t.phidot[i]).abs());
        }
        assert!(err <= 1e-5, "roundtrip error {err:.3e}");
    }

    #[test]
    fn verify_on_exact_toda_series() {
        // a series generated from the explicit law matches with t* equal to
        // the clock offset and deviations at quadrature level
        let (prof, _) = phi4();
        let (mass, kappa) = (prof.mass, prof.kappa);
        let offset = 60.0;
        let mut samples = Vec::new();
        for i in 0..=200 {
            let tau = i as f64 * 2.0;
            let s = nbody::explicit_parabolic(2, mass, kappa, offset + tau, 0.0);
            samples.push(crate::modulation::ModulationSample {
                t: tau,
                a: s.positions.clone(),
                v: s.momenta.iter().map(|p| p / mass).collect(),
                p: s.momenta.clone(),
                g_norm: 0.0,
                g_norm_local: 0.0,
                rho: 0.0,
            });
        }
        let series = ModulationSeries {
            n: 2,
            samples,
            momentum_mismatch: vec![vec![0.0; 2]; 201],
            force_mismatch: vec![vec![0.0; 2]; 201],
        };
        let report = verify_asymptotics(&series, mass, kappa);
        assert!(report.monotone_gaps);
        assert!((report.t_star - offset).abs() <= 1e-3 * offset);
        assert!(report.max_gap_deviation <= 1e-6);
        assert!(report.max_velocity_deviation <= 1e-6);
    }

    #[test]
    fn verify_flags_collapsing_run() {
        let (prof, _) = phi4();
        let (mass, kappa) = (prof.mass, prof.kappa);
        let mut samples = Vec::new();
        for i in 0..=50 {
            let tau = i as f64;
            let s = nbody::explicit_parabolic(2, mass, kappa, 120.0 - tau, 0.0);
            samples.push(crate::modulation::ModulationSample {
                t: tau,
                a: s.positions.clone(),
                v: s.momenta.iter().map(|p| -p / mass).collect(),
                p: s.momenta.clone(),
                g_norm: 0.0,
                g_norm_local: 0.0,
                rho: 0.0,
            });
        }
        let series = ModulationSeries {
            n: 2,
            samples,
            momentum_mismatch: vec![vec![0.0; 2]; 51],
            force_mismatch: vec![vec![0.0; 2]; 51],
        };
        let report = verify_asymptotics(&series, mass, kappa);
        assert!(!report.monotone_gaps);
    }

    #[test]
    fn sweeps_parallel_equals_sequential() {
        let (prof, _) = phi4();
        let gaps: Vec<f64> = (0..8).map(|i| 9.0 + 0.5 * i as f64).collect();
        let par = force_sweep(&prof, &gaps);
        let seq = force_sweep_seq(&prof, &gaps);
        for (a, b) in par.iter().zip(&seq) {
            assert_eq!(a.f_quadrature.to_bits(), b.f_quadrature.to_bits());
        }
    }

    #[test]
    fn convergence_study_second_order() {
        let (prof, p) = phi4();
        let rows = convergence_study(&prof, &p, &[0.1, 0.05], 0.5, 10.0);
        let order = (rows[0].error / rows[1].error).log2();
        assert!(order >= 1.9, "order {order:.2}: {rows:?}");
    }
}
