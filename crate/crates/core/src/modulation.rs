//! Modulation decomposition phi = H(a, v) + g with the 2n orthogonality
//! conditions <g, alpha_k> = <g, beta_k> = 0, localized momenta, and the
//! tracking of modulation parameters along a run.
//!
//! alpha = J d_a H and beta = J d_v H are the symplectically rotated tangent
//! vectors of the boosted-kink family; the unique orthogonal parameters are
//! found by a damped Newton iteration on the residual map with its analytic
//! Jacobian.

use crate::error::{Error, Result};
use crate::field::{FieldState, Grid};
use crate::kink::KinkProfile;
use crate::multikink::{self, MultikinkConfig};
use crate::num::{centered_derivative, five_point_derivative, simpson_product};

/// A sampled field pair (first, second) on a grid.
#[derive(Clone, Debug)]
pub struct Pair {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl Pair {
    fn zeros(n: usize) -> Pair {
        Pair {
            first: vec![0.0; n],
            second: vec![0.0; n],
        }
    }
}

/// L2 x L2 inner product of two pairs by Simpson quadrature.
pub fn pair_inner(u: &Pair, v: &Pair, dx: f64) -> f64 {
    simpson_product(&u.first, &v.first, dx) + simpson_product(&u.second, &v.second, dx)
}

/// All tangent-family fields of one boosted kink sampled on a grid.
pub struct TangentFields {
    pub h: Pair,
    pub da_h: Pair,
    pub dv_h: Pair,
    pub alpha: Pair,
    pub beta: Pair,
    pub da_alpha: Pair,
    pub dv_alpha: Pair,
    pub da_beta: Pair,
    pub dv_beta: Pair,
}

/// Sample the boosted kink H(a, v), its parameter derivatives and the
/// symplectic tangent vectors alpha, beta (with their parameter derivatives)
/// on the grid. Second derivatives of the profile come from the stationary
/// equation d2H = U'(H).
pub fn tangent_fields(prof: &KinkProfile, a: f64, v: f64, grid: &Grid) -> TangentFields {
    debug_assert!(v.abs() < 1.0);
    let n = grid.n_nodes();
    let gamma = 1.0 / (1.0 - v * v).sqrt();
    let (g1, g2) = (gamma, gamma * gamma);
    let (g3, g4) = (g2 * gamma, g2 * g2);
    let (g5, g6, g7) = (g4 * gamma, g4 * g2, g4 * g3);

    let mut out = TangentFields {
        h: Pair::zeros(n),
        da_h: Pair::zeros(n),
        dv_h: Pair::zeros(n),
        alpha: Pair::zeros(n),
        beta: Pair::zeros(n),
        da_alpha: Pair::zeros(n),
        dv_alpha: Pair::zeros(n),
        da_beta: Pair::zeros(n),
        dv_beta: Pair::zeros(n),
    };
    for (i, x) in grid.nodes().enumerate() {
        let xi = x - a;
        let h0 = prof.h_at(g1 * xi);
        let h1 = prof.dh_at(g1 * xi);
        let h2 = prof.potential().du(h0);
        let h3 = prof.potential().d2u(h0) * h1;

        out.h.first[i] = h0;
        out.h.second[i] = -v * g1 * h1;

        out.da_h.first[i] = -g1 * h1;
        out.da_h.second[i] = v * g2 * h2;

        out.dv_h.first[i] = g3 * v * xi * h1;
        out.dv_h.second[i] = -g3 * h1 - g4 * v * v * xi * h2;

        out.alpha.first[i] = v * g2 * h2;
        out.alpha.second[i] = g1 * h1;

        out.beta.first[i] = -g3 * h1 - g4 * v * v * xi * h2;
        out.beta.second[i] = -g3 * v * xi * h1;

        out.da_alpha.first[i] = -v * g3 * h3;
        out.da_alpha.second[i] = -g2 * h2;

        out.dv_alpha.first[i] = g2 * h2 + 2.0 * g4 * v * v * h2 + g5 * v * v * xi * h3;
        out.dv_alpha.second[i] = g3 * v * h1 + g4 * v * xi * h2;

        out.da_beta.first[i] = g4 * h2 + g4 * v * v * h2 + g5 * v * v * xi * h3;
        out.da_beta.second[i] = g3 * v * h1 + g4 * v * xi * h2;

        out.dv_beta.first[i] = -3.0 * g5 * v * h1
            - (g6 * v + 4.0 * g6 * v * v * v + 2.0 * g4 * v) * xi * h2
            - g7 * v * v * v * xi * xi * h3;
        out.dv_beta.second[i] =
            -(3.0 * g5 * v * v + g3) * xi * h1 - g6 * v * v * xi * xi * h2;
    }
    out
}

/// Tangent vectors (alpha_k, beta_k) of every kink in a configuration.
pub fn tangent_vectors(
    prof: &KinkProfile,
    cfg: &MultikinkConfig,
    grid: &Grid,
) -> Vec<(Pair, Pair)> {
    (0..cfg.n())
        .map(|k| {
            let f = tangent_fields(prof, cfg.positions()[k], cfg.velocities()[k], grid);
            (f.alpha, f.beta)
        })
        .collect()
}

/// Result of a converged modulation fit.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub config: MultikinkConfig,
    /// Residual pair g = state - H(a, v).
    pub residual: Pair,
    /// The 2n orthogonality residuals (<g, alpha_k>, <g, beta_k>)_k.
    pub orth_residuals: Vec<f64>,
    /// |g|_E = sqrt( |gdot|^2 + |dx g|^2 + |g|^2 ).
    pub energy_norm_g: f64,
    pub iterations: usize,
}

struct Residuals {
    gamma: Vec<f64>,
    residual: Pair,
    fields: Vec<TangentFields>,
}

fn eval_residuals(
    prof: &KinkProfile,
    state: &FieldState,
    a: &[f64],
    v: &[f64],
) -> Residuals {
    let grid = &state.grid;
    let n = a.len();
    let nodes = grid.n_nodes();
    let dx = grid.dx();

    let fields: Vec<TangentFields> = (0..n)
        .map(|k| tangent_fields(prof, a[k], v[k], grid))
        .collect();

    // g = state - H(a, v) with H = 1 + sum (-1)^k (H_k + 1)
    let mut residual = Pair::zeros(nodes);
    for i in 0..nodes {
        let mut phi = 1.0;
        let mut phidot = 0.0;
        for (k, f) in fields.iter().enumerate() {
            let s = MultikinkConfig::sign(k + 1);
            phi += s * (f.h.first[i] + 1.0);
            phidot += s * f.h.second[i];
        }
        residual.first[i] = state.phi[i] - phi;
        residual.second[i] = state.phidot[i] - phidot;
    }

    let mut gamma = vec![0.0; 2 * n];
    for k in 0..n {
        gamma[k] = pair_inner(&residual, &fields[k].alpha, dx);
        gamma[n + k] = pair_inner(&residual, &fields[k].beta, dx);
    }
    Residuals {
        gamma,
        residual,
        fields,
    }
}

/// Analytic Jacobian of the residual map at (a, v); ordering is rows
/// (alpha_1..alpha_n, beta_1..beta_n) by columns (a_1..a_n, v_1..v_n).
fn newton_jacobian(res: &Residuals, dx: f64) -> crate::linalg::Matrix {
    let n = res.fields.len();
    let mut jac = crate::linalg::Matrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        let fk = &res.fields[k];
        for j in 0..n {
            let fj = &res.fields[j];
            let s = MultikinkConfig::sign(j + 1);
            // d/da_j <g, alpha_k> and d/dv_j <g, alpha_k>
            jac[(k, j)] = -s * pair_inner(&fj.da_h, &fk.alpha, dx);
            jac[(k, n + j)] = -s * pair_inner(&fj.dv_h, &fk.alpha, dx);
            // d/da_j <g, beta_k> and d/dv_j <g, beta_k>
            jac[(n + k, j)] = -s * pair_inner(&fj.da_h, &fk.beta, dx);
            jac[(n + k, n + j)] = -s * pair_inner(&fj.dv_h, &fk.beta, dx);
        }
        jac[(k, k)] += pair_inner(&res.residual, &fk.da_alpha, dx);
        jac[(k, n + k)] += pair_inner(&res.residual, &fk.dv_alpha, dx);
        jac[(n + k, k)] += pair_inner(&res.residual, &fk.da_beta, dx);
        jac[(n + k, n + k)] += pair_inner(&res.residual, &fk.dv_beta, dx);
    }
    jac
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

const FIT_TOL: f64 = 1e-10;
const FIT_MAX_ITER: usize = 50;
const DAMPING_FLOOR: f64 = 1.0 / 1024.0;

/// Damped Newton iteration for the orthogonal modulation parameters.
pub fn fit(
    prof: &KinkProfile,
    state: &FieldState,
    guess: &MultikinkConfig,
) -> Result<Decomposition> {
    let n = guess.n();
    let dx = state.grid.dx();
    let mut a = guess.positions().to_vec();
    let mut v = guess.velocities().to_vec();

    if n == 0 {
        // Vacuum sector: nothing to fit, g is the deviation from 1.
        let res = eval_residuals(prof, state, &a, &v);
        return Ok(decomposition_from(res, a, v, state, 0));
    }

    let mut res = eval_residuals(prof, state, &a, &v);
    let mut norm = max_abs(&res.gamma);
    for iter in 0..FIT_MAX_ITER {
        if norm <= FIT_TOL {
            return Ok(decomposition_from(res, a, v, state, iter));
        }
        let jac = newton_jacobian(&res, dx);
        let rhs: Vec<f64> = res.gamma.iter().map(|g| -g).collect();
        let delta = crate::linalg::lu_solve(&jac, &rhs)
            .ok_or_else(|| Error::FitDivergence("singular Newton system".into()))?;

        // backtracking with halving down to the damping floor
        let mut lambda = 1.0;
        loop {
            let a_try: Vec<f64> = a
                .iter()
                .zip(&delta[..n])
                .map(|(&ai, &d)| ai + lambda * d)
                .collect();
            let v_try: Vec<f64> = v
                .iter()
                .zip(&delta[n..])
                .map(|(&vi, &d)| vi + lambda * d)
                .collect();
            let admissible = a_try.windows(2).all(|w| w[1] >= w[0])
                && v_try.iter().all(|val| val.abs() < 1.0);
            if admissible {
                let res_try = eval_residuals(prof, state, &a_try, &v_try);
                let norm_try = max_abs(&res_try.gamma);
                if norm_try < norm || norm_try <= FIT_TOL {
                    a = a_try;
                    v = v_try;
                    res = res_try;
                    norm = norm_try;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < DAMPING_FLOOR {
                return Err(Error::FitDivergence(format!(
                    "residual stalled at {norm:.3e} after damping floor"
                )));
            }
        }
    }
    if norm <= FIT_TOL {
        return Ok(decomposition_from(res, a, v, state, FIT_MAX_ITER));
    }
    Err(Error::FitDivergence(format!(
        "no convergence in {FIT_MAX_ITER} iterations (residual {norm:.3e})"
    )))
}

fn decomposition_from(
    res: Residuals,
    a: Vec<f64>,
    v: Vec<f64>,
    state: &FieldState,
    iterations: usize,
) -> Decomposition {
    let dx = state.grid.dx();
    let dg = centered_derivative(&res.residual.first, dx);
    let norm_sq = simpson_product(&res.residual.second, &res.residual.second, dx)
        + simpson_product(&dg, &dg, dx)
        + simpson_product(&res.residual.first, &res.residual.first, dx);
    Decomposition {
        config: MultikinkConfig::new(a, v).expect("fit result admissible"),
        residual: res.residual,
        orth_residuals: res.gamma,
        energy_norm_g: norm_sq.max(0.0).sqrt(),
        iterations,
    }
}

/// |g|_E restricted to [x_lo, x_hi] (snapped to an even node count).
pub fn energy_norm_windowed(dec: &Decomposition, grid: &Grid, x_lo: f64, x_hi: f64) -> f64 {
    let dx = grid.dx();
    let mut i0 = (((x_lo - grid.x_left) / dx).floor().max(0.0)) as usize;
    let mut i1 = (((x_hi - grid.x_left) / dx).ceil() as usize).min(grid.n_cells);
    if (i1 - i0) % 2 == 1 {
        i1 -= 1;
    }
    if i1 <= i0 + 2 {
        i0 = i1.saturating_sub(2);
    }
    let dg = centered_derivative(&dec.residual.first, dx);
    let norm_sq = simpson_product(
        &dec.residual.second[i0..=i1],
        &dec.residual.second[i0..=i1],
        dx,
    ) + simpson_product(&dg[i0..=i1], &dg[i0..=i1], dx)
        + simpson_product(
            &dec.residual.first[i0..=i1],
            &dec.residual.first[i0..=i1],
            dx,
        );
    norm_sq.max(0.0).sqrt()
}

/// Zero-crossing initial guess: a_k at the interpolated transversal zeros of
/// phi, v = 0. Errors if the crossing count does not match n.
pub fn initial_guess(state: &FieldState, n: usize) -> Result<MultikinkConfig> {
    let mut crossings = Vec::new();
    let phi = &state.phi;
    for i in 0..phi.len() - 1 {
        let (u, w) = (phi[i], phi[i + 1]);
        if u == 0.0 {
            let prev = if i > 0 { phi[i - 1] } else { w };
            if prev * w < 0.0 {
                crossings.push(state.grid.node(i));
            }
        } else if u * w < 0.0 {
            let frac = -u / (w - u);
            crossings.push(state.grid.node(i) + frac * state.grid.dx());
        }
    }
    if crossings.len() != n {
        return Err(Error::SectorMismatch {
            expected: n,
            found: crossings.len(),
        });
    }
    MultikinkConfig::at_rest(crossings)
}

/// Quintic smoothstep cutoff: 1 below 1/3, 0 above 2/3, C^2 in between.
pub fn smooth_cutoff(x: f64) -> f64 {
    if x <= 1.0 / 3.0 {
        1.0
    } else if x >= 2.0 / 3.0 {
        0.0
    } else {
        let s = 3.0 * (x - 1.0 / 3.0);
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// The window function chi_k of kink k (1-based) built from cutoff
/// differences; for n = 1 it is identically one.
pub fn window_chi(a: &[f64], k: usize, x: f64) -> f64 {
    let n = a.len();
    debug_assert!(k >= 1 && k <= n);
    if n == 1 {
        return 1.0;
    }
    let right = |k: usize| smooth_cutoff((x - a[k - 1]) / (a[k] - a[k - 1]));
    if k == 1 {
        right(1)
    } else if k == n {
        1.0 - right(n - 1)
    } else {
        right(k) - right(k - 1)
    }
}

/// Localized momentum p_k = -<(-1)^k dx H_k + chi_k dx g, phidot>.
pub fn localized_momentum(
    prof: &KinkProfile,
    state: &FieldState,
    dec: &Decomposition,
    k: usize,
) -> f64 {
    let grid = &state.grid;
    let a = dec.config.positions();
    let v = dec.config.velocities();
    let gamma = 1.0 / (1.0 - v[k - 1] * v[k - 1]).sqrt();
    let dg = centered_derivative(&dec.residual.first, grid.dx());
    let s = MultikinkConfig::sign(k);
    let integrand: Vec<f64> = grid
        .nodes()
        .enumerate()
        .map(|(i, x)| {
            let dxh = gamma * prof.dh_at(gamma * (x - a[k - 1]));
            let chi = window_chi(a, k, x);
            -(s * dxh + chi * dg[i]) * state.phidot[i]
        })
        .collect();
    crate::num::simpson(&integrand, grid.dx())
}

/// One tracked sample of a run.
#[derive(Clone, Debug)]
pub struct ModulationSample {
    pub t: f64,
    pub a: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    /// |g|_E over the full grid (retains all emitted radiation).
    pub g_norm: f64,
    /// |g|_E over the kink window [a_1 - W, a_n + W], W = 15: the residual
    /// that stays dynamically coupled to the kinks.
    pub g_norm_local: f64,
    pub rho: f64,
}

/// Time series of modulation parameters with Newton-law diagnostics.
#[derive(Clone, Debug)]
pub struct ModulationSeries {
    pub n: usize,
    pub samples: Vec<ModulationSample>,
    /// |M v_k - p_k| / rho per sample and kink.
    pub momentum_mismatch: Vec<Vec<f64>>,
    /// |p_k' - F_k(a)| (-log rho) / rho per sample and kink.
    pub force_mismatch: Vec<Vec<f64>>,
}

impl ModulationSeries {
    /// Fixed CSV column order: t, a_1..a_n, v_1..v_n, p_1..p_n, g_norm,
    /// g_norm_local, rho, mvp_1..mvp_n, pf_1..pf_n.
    pub fn to_csv(&self) -> String {
        let n = self.n;
        let mut out = String::from("t");
        for k in 1..=n {
            out.push_str(&format!(",a_{k}"));
        }
        for k in 1..=n {
            out.push_str(&format!(",v_{k}"));
        }
        for k in 1..=n {
            out.push_str(&format!(",p_{k}"));
        }
        out.push_str(",g_norm,g_norm_local,rho");
        for k in 1..=n {
            out.push_str(&format!(",mvp_{k}"));
        }
        for k in 1..=n {
            out.push_str(&format!(",pf_{k}"));
        }
        out.push('\n');
        for (i, s) in self.samples.iter().enumerate() {
            out.push_str(&format!("{}", s.t));
            for val in s.a.iter().chain(&s.v).chain(&s.p) {
                out.push_str(&format!(",{val}"));
            }
            out.push_str(&format!(",{},{},{}", s.g_norm, s.g_norm_local, s.rho));
            for val in self.momentum_mismatch[i].iter().chain(&self.force_mismatch[i]) {
                out.push_str(&format!(",{val}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Observer that fits every sampled state, warm-starting from the previous
/// frame, and assembles a `ModulationSeries`.
pub struct Tracker<'a> {
    prof: &'a KinkProfile,
    n: usize,
    warm: Option<MultikinkConfig>,
    samples: Vec<ModulationSample>,
    /// Optional error context recorded on divergence.
    pub failed_at: Option<f64>,
}

impl<'a> Tracker<'a> {
    pub fn new(prof: &'a KinkProfile, n: usize) -> Tracker<'a> {
        Tracker {
            prof,
            n,
            warm: None,
            samples: Vec::new(),
            failed_at: None,
        }
    }

    pub fn observe(&mut self, state: &FieldState) -> Result<()> {
        let guess = match &self.warm {
            Some(cfg) => cfg.clone(),
            None => initial_guess(state, self.n)?,
        };
        let dec = fit(self.prof, state, &guess).map_err(|e| {
            self.failed_at = Some(state.time);
            match e {
                Error::FitDivergence(msg) => {
                    Error::FitDivergence(format!("t = {}: {msg}", state.time))
                }
                other => other,
            }
        })?;
        let p: Vec<f64> = (1..=self.n)
            .map(|k| localized_momentum(self.prof, state, &dec, k))
            .collect();
        let g_norm_local = if self.n > 0 {
            const KINK_WINDOW: f64 = 15.0;
            energy_norm_windowed(
                &dec,
                &state.grid,
                dec.config.positions()[0] - KINK_WINDOW,
                dec.config.positions()[self.n - 1] + KINK_WINDOW,
            )
        } else {
            dec.energy_norm_g
        };
        self.samples.push(ModulationSample {
            t: state.time,
            a: dec.config.positions().to_vec(),
            v: dec.config.velocities().to_vec(),
            p,
            g_norm: dec.energy_norm_g,
            g_norm_local,
            rho: dec.config.proximity(),
        });
        self.warm = Some(dec.config);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Finish the pass: compute p' by five-point differences of the sampled
    /// series and the Newton-law mismatch diagnostics.
    pub fn finish(self) -> ModulationSeries {
        let n = self.n;
        let samples = self.samples;
        let mass = self.prof.mass;
        let m_samples = samples.len();
        let mut momentum_mismatch = vec![vec![0.0; n]; m_samples];
        let mut force_mismatch = vec![vec![0.0; n]; m_samples];
        if m_samples >= 5 {
            let dt = samples[1].t - samples[0].t;
            for k in 0..n {
                let p_series: Vec<f64> = samples.iter().map(|s| s.p[k]).collect();
                let dp = five_point_derivative(&p_series, dt);
                for (i, s) in samples.iter().enumerate() {
                    let rho = s.rho.max(1e-300);
                    momentum_mismatch[i][k] = (mass * s.v[k] - s.p[k]).abs() / rho;
                    let cfg = MultikinkConfig::at_rest(s.a.clone())
                        .expect("tracked positions ascending");
                    let f = multikink::interaction_force(self.prof, &cfg, k + 1);
                    force_mismatch[i][k] = (dp[i] - f).abs() * (-rho.ln()) / rho;
                }
            }
        }
        ModulationSeries {
            n,
            samples,
            momentum_mismatch,
            force_mismatch,
        }
    }
}
