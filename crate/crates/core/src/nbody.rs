//! The attractive-Toda n-body reduction and its linear-algebra toolkit.
//!
//! The reduced dynamics of n kink positions is
//!
//!   a_k' = p_k / M,   p_k' = 2 kappa^2 ( e^{-(a_{k+1}-a_k)} - e^{-(a_k-a_{k-1})} ),
//!
//! with a_0 = -inf, a_{n+1} = +inf. It conserves total momentum and the
//! Hamiltonian sum p^2/2M - 2 kappa^2 sum e^{-y_k} (the attractive well is a
//! negative potential), and has the exact parabolic solution
//!
//!   a_{k+1} - a_k = 2 log(kappa t) - log(M k(n-k)/2),
//!   p_k = -M (n+1-2k)/t,
//!
//! on which the Hamiltonian vanishes identically. The spectral pieces
//! (discrete Dirichlet Laplacian, sigma vector, interaction matrix with its
//! Legendre eigenbasis, bounded Euler-equation solver) support the asymptotic
//! analysis around that solution.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::num::{adaptive_simpson, adaptive_simpson_to_inf, kahan_dot};
use crate::ode::integrate_dp45;

/// Positions and momenta of the n-body reduction.
#[derive(Clone, Debug)]
pub struct TodaState {
    pub positions: Vec<f64>,
    pub momenta: Vec<f64>,
    pub time: f64,
    pub mass: f64,
    pub kappa: f64,
}

impl TodaState {
    pub fn new(
        positions: Vec<f64>,
        momenta: Vec<f64>,
        time: f64,
        mass: f64,
        kappa: f64,
    ) -> Result<TodaState> {
        if positions.len() != momenta.len() {
            return Err(Error::Domain("positions/momenta length mismatch".into()));
        }
        if positions.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("positions must be ascending".into()));
        }
        if positions.iter().chain(&momenta).any(|x| !x.is_finite()) {
            return Err(Error::Domain("non-finite n-body state".into()));
        }
        Ok(TodaState {
            positions,
            momenta,
            time,
            mass,
            kappa,
        })
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.gaps().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn total_momentum(&self) -> f64 {
        self.momenta.iter().sum()
    }

    /// H = sum p^2 / 2M - 2 kappa^2 sum e^{-y_k}.
    pub fn energy(&self) -> f64 {
        let kinetic: f64 = self.momenta.iter().map(|p| p * p).sum::<f64>() / (2.0 * self.mass);
        let potential: f64 = self.gaps().iter().map(|y| (-y).exp()).sum();
        kinetic - 2.0 * self.kappa * self.kappa * potential
    }
}

/// Right-hand side (da, dp) of the attractive-Toda system.
pub fn toda_rhs(s: &TodaState) -> (Vec<f64>, Vec<f64>) {
    let n = s.n();
    let gaps = s.gaps();
    let da: Vec<f64> = s.momenta.iter().map(|p| p / s.mass).collect();
    let c = 2.0 * s.kappa * s.kappa;
    let dp: Vec<f64> = (0..n)
        .map(|k| {
            let right = if k + 1 < n { (-gaps[k]).exp() } else { 0.0 };
            let left = if k > 0 { (-gaps[k - 1]).exp() } else { 0.0 };
            c * (right - left)
        })
        .collect();
    (da, dp)
}

/// The exact parabolic solution at time t > 0 with prescribed barycenter.
pub fn explicit_parabolic(n: usize, mass: f64, kappa: f64, t: f64, center: f64) -> TodaState {
    assert!(t > 0.0, "parabolic solution needs t > 0");
    let mut positions = vec![0.0; n];
    for k in 1..n {
        let gap = 2.0 * (kappa * t).ln() - (mass * k as f64 * (n - k) as f64 / 2.0).ln();
        positions[k] = positions[k - 1] + gap;
    }
    let mean: f64 = positions.iter().sum::<f64>() / n.max(1) as f64;
    for a in &mut positions {
        *a += center - mean;
    }
    let momenta: Vec<f64> = (1..=n)
        .map(|k| -mass * (n as f64 + 1.0 - 2.0 * k as f64) / t)
        .collect();
    TodaState {
        positions,
        momenta,
        time: t,
        mass,
        kappa,
    }
}

/// Predicted gaps and velocities of the asymptotic law at time t.
pub fn asymptotic_law(n: usize, mass: f64, kappa: f64, t: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(t > 0.0);
    let gaps: Vec<f64> = (1..n)
        .map(|k| 2.0 * (kappa * t).ln() - (mass * k as f64 * (n - k) as f64 / 2.0).ln())
        .collect();
    let velocities: Vec<f64> = (1..=n)
        .map(|k| -(n as f64 + 1.0 - 2.0 * k as f64) / t)
        .collect();
    (gaps, velocities)
}

/// Sampled n-body trajectory with conservation diagnostics.
#[derive(Clone, Debug)]
pub struct TodaTrajectory {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
    pub momenta: Vec<Vec<f64>>,
    pub final_state: TodaState,
    /// Time of the collision event (min gap < 0.5), if the run stopped early.
    pub collision: Option<f64>,
    pub max_momentum_drift: f64,
    pub max_energy_drift: f64,
}

/// Integrate the Toda system to `t_final` with the adaptive embedded 5(4)
/// scheme, sampling at `sample_times`. Stops with a collision event when the
/// minimum gap drops below 0.5.
pub fn integrate(
    s: &TodaState,
    t_final: f64,
    tol: f64,
    sample_times: &[f64],
) -> Result<TodaTrajectory> {
    assert!(t_final > s.time, "t_final must exceed the state time");
    let n = s.n();
    let mass = s.mass;
    let kappa = s.kappa;
    let pack = |st: &TodaState| -> Vec<f64> {
        st.positions
            .iter()
            .chain(&st.momenta)
            .copied()
            .collect()
    };
    let unpack = |t: f64, y: &[f64]| TodaState {
        positions: y[..n].to_vec(),
        momenta: y[n..].to_vec(),
        time: t,
        mass,
        kappa,
    };

    let c = 2.0 * kappa * kappa;
    let mut rhs = move |_t: f64, y: &[f64], dy: &mut [f64]| {
        for k in 0..n {
            dy[k] = y[n + k] / mass;
            let right = if k + 1 < n {
                (-(y[k + 1] - y[k])).exp()
            } else {
                0.0
            };
            let left = if k > 0 { (-(y[k] - y[k - 1])).exp() } else { 0.0 };
            dy[n + k] = c * (right - left);
        }
    };

    let p0 = s.total_momentum();
    let e0 = s.energy();
    let mut traj = TodaTrajectory {
        times: Vec::new(),
        positions: Vec::new(),
        momenta: Vec::new(),
        final_state: s.clone(),
        collision: None,
        max_momentum_drift: 0.0,
        max_energy_drift: 0.0,
    };

    let record = |t: f64, y: &[f64], traj: &mut TodaTrajectory| {
        let st = unpack(t, y);
        traj.max_momentum_drift = traj.max_momentum_drift.max((st.total_momentum() - p0).abs());
        traj.max_energy_drift = traj.max_energy_drift.max((st.energy() - e0).abs());
        traj.times.push(t);
        traj.positions.push(st.positions.clone());
        traj.momenta.push(st.momenta.clone());
    };

    record(s.time, &pack(s), &mut traj);
    let mut on_output = |t: f64, y: &[f64]| record(t, y, &mut traj);
    let mut collided_at: Option<f64> = None;
    let mut stop = |t: f64, y: &[f64]| {
        let min_gap = (0..n.saturating_sub(1))
            .map(|k| y[k + 1] - y[k])
            .fold(f64::INFINITY, f64::min);
        if min_gap < 0.5 {
            collided_at = Some(t);
            true
        } else {
            false
        }
    };
    let (t_end, y_end, stopped) = integrate_dp45(
        &mut rhs,
        s.time,
        &pack(s),
        t_final,
        tol,
        sample_times,
        &mut on_output,
        &mut stop,
    )?;
    let final_state = unpack(t_end, &y_end);
    traj.max_momentum_drift = traj
        .max_momentum_drift
        .max((final_state.total_momentum() - p0).abs());
    traj.max_energy_drift = traj.max_energy_drift.max((final_state.energy() - e0).abs());
    traj.final_state = final_state;
    if stopped {
        traj.collision = collided_at;
    }
    Ok(traj)
}

/// Replace the momenta of `s` by the escape-consistent (parabolic) momenta
/// for its positions: zero total momentum, zero energy, outgoing, and -- for
/// n = 3 -- on the separatrix between the two gap-collapse fates, found by
/// bisection on the one remaining free momentum parameter. Positions are kept.
///
/// For n = 2 the constraints determine the momenta outright; for n >= 4 the
/// parabolic completion is not implemented.
pub fn escape_projection(s: &TodaState) -> Result<TodaState> {
    let n = s.n();
    let mass = s.mass;
    let potential: f64 = 2.0 * s.kappa * s.kappa
        * s.gaps().iter().map(|y| (-y).exp()).sum::<f64>();
    match n {
        2 => {
            let p = (mass * potential).sqrt();
            TodaState::new(
                s.positions.clone(),
                vec![-p, p],
                s.time,
                mass,
                s.kappa,
            )
        }
        3 => {
            // p2 = lambda; p1 + p3 = -lambda; sum p^2 = 2 M V
            // => p1, p3 roots of z^2 + lambda z + (lambda^2 - M V) = 0.
            let with_lambda = |lambda: f64| -> TodaState {
                let disc = (4.0 * mass * potential - 3.0 * lambda * lambda).max(0.0);
                let p1 = 0.5 * (-lambda - disc.sqrt());
                let p3 = 0.5 * (-lambda + disc.sqrt());
                TodaState {
                    positions: s.positions.clone(),
                    momenta: vec![p1, lambda, p3],
                    time: s.time,
                    mass,
                    kappa: s.kappa,
                }
            };
            // gap-imbalance at the end of the run: positive means the first
            // gap ran ahead (middle body pushed right too hard)
            let imbalance = |lambda: f64| -> Result<f64> {
                let st = with_lambda(lambda);
                let traj = integrate(&st, 1e4, 1e-12, &[])?;
                let gaps = traj.final_state.gaps();
                Ok(gaps[0] - gaps[1])
            };
            let cap = (4.0 * mass * potential / 3.0).sqrt() * 0.999;
            let (mut lo, mut hi) = (-cap, cap);
            let (s_lo, s_hi) = (imbalance(lo)?, imbalance(hi)?);
            if s_lo.signum() == s_hi.signum() {
                return Err(Error::Domain(
                    "escape projection: no separatrix bracket".into(),
                ));
            }
            for _ in 0..90 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let s_mid = imbalance(mid)?;
                if s_mid.signum() == s_lo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(with_lambda(0.5 * (lo + hi)))
        }
        _ => Err(Error::Domain(format!(
            "escape projection implemented for n in {{2, 3}}, got {n}"
        ))),
    }
}

/// Spectral data of the linearization around the parabolic solution.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub n: usize,
    /// (n-1) x (n-1) discrete Dirichlet Laplacian, tridiag(-1, 2, -1).
    pub laplacian: Matrix,
    /// sigma_k = k(n-k)/2, k = 1..n-1.
    pub sigma: Vec<f64>,
    /// mu0 = 1 / (sigma . 1) = 12 / ((n+1) n (n-1)).
    pub mu0: f64,
    /// Critical point of z -> 1 . e^{-z} on the hyperplane sigma . z = 0.
    pub z_cr: Vec<f64>,
    pub lambda_cr: f64,
    /// n x n interaction matrix with u_{k,k+1} = -k(n-k) and zero row sums.
    pub interaction: Matrix,
    /// Legendre vectors P_0 .. P_{n-1} (eigenvectors of the interaction
    /// matrix with eigenvalues l(l+1)).
    pub legendre: Vec<Vec<f64>>,
    /// A = kappa sqrt(2) / sqrt(M).
    pub a_const: f64,
}

pub fn dirichlet_laplacian(n: usize) -> Matrix {
    let m = n.saturating_sub(1);
    let mut lap = Matrix::zeros(m, m);
    for i in 0..m {
        lap[(i, i)] = 2.0;
        if i + 1 < m {
            lap[(i, i + 1)] = -1.0;
            lap[(i + 1, i)] = -1.0;
        }
    }
    lap
}

pub fn sigma(n: usize) -> Vec<f64> {
    (1..n).map(|k| (k * (n - k)) as f64 / 2.0).collect()
}

pub fn mu0(n: usize) -> f64 {
    12.0 / ((n + 1) as f64 * n as f64 * (n as f64 - 1.0))
}

/// (lambda_cr, z_cr): the Lagrange-multiplier critical point of
/// 1 . e^{-z} on the hyperplane sigma . z = 0, i.e. e^{-z_cr} = lambda_cr sigma.
pub fn critical_point(n: usize) -> (f64, Vec<f64>) {
    let sig = sigma(n);
    if sig.is_empty() {
        return (1.0, Vec::new());
    }
    let mu = mu0(n);
    let sig_log_sig: f64 = sig.iter().map(|&s| s * s.ln()).sum();
    let lambda_cr = (-mu * sig_log_sig).exp();
    let z_cr: Vec<f64> = sig.iter().map(|&s| -(lambda_cr * s).ln()).collect();
    (lambda_cr, z_cr)
}

/// The n x n interaction matrix: u_{k,k+1} = u_{k+1,k} = -k(n-k), diagonal
/// fixed by zero row sums.
pub fn interaction_matrix(n: usize) -> Matrix {
    let mut u = Matrix::zeros(n, n);
    for k in 1..n {
        let off = -((k * (n - k)) as f64);
        u[(k - 1, k)] = off;
        u[(k, k - 1)] = off;
    }
    for k in 0..n {
        let mut row_off = 0.0;
        for j in 0..n {
            if j != k {
                row_off += u[(k, j)];
            }
        }
        u[(k, k)] = -row_off;
    }
    u
}

/// Legendre vectors by modified Gram-Schmidt on the monomial vectors
/// (0^l, 1^l, ..., (n-1)^l), with compensated-summation inner products and a
/// re-orthogonalization pass (the monomials are badly conditioned by n = 12).
pub fn legendre_vectors(n: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    for l in 0..n {
        let mut v: Vec<f64> = if l == 0 {
            vec![1.0; n]
        } else {
            (0..n).map(|j| (j as f64).powi(l as i32)).collect()
        };
        for _pass in 0..2 {
            for prev in &basis {
                let coeff = kahan_dot(&v, prev) / kahan_dot(prev, prev);
                for (vi, pi) in v.iter_mut().zip(prev) {
                    *vi -= coeff * pi;
                }
            }
        }
        basis.push(v);
    }
    basis
}

impl SpectralData {
    pub fn new(n: usize, mass: f64, kappa: f64) -> SpectralData {
        let (lambda_cr, z_cr) = critical_point(n);
        SpectralData {
            n,
            laplacian: dirichlet_laplacian(n),
            sigma: sigma(n),
            mu0: if n >= 2 { mu0(n) } else { f64::INFINITY },
            z_cr,
            lambda_cr,
            interaction: interaction_matrix(n),
            legendre: legendre_vectors(n),
            a_const: kappa * 2.0f64.sqrt() / mass.sqrt(),
        }
    }
}

/// Bounded solution of the mode-decoupled Euler system
///
///   b_l' = w_l + f_l,   w_l' = l(l+1) (t0+t)^{-2} b_l + g_l,
///
/// obtained by projecting vector forcings F, G onto the Legendre modes and
/// assembling the explicit particular solution plus the decaying homogeneous
/// branch t0^l (b_{0,l} - b_l^p(0)) (t0+t)^{-l}.
pub struct EulerSolution {
    t0: f64,
    n: usize,
    legendre: Vec<Vec<f64>>,
    norms_sq: Vec<f64>,
    /// homogeneous coefficients t0^l (b_{0,l} - b_l^p(0)) per mode
    hom: Vec<f64>,
    forcing_f: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    forcing_g: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    quad_tol: f64,
}

const EULER_QUAD_TOL: f64 = 1e-12;

impl EulerSolution {
    fn f_mode(&self, l: usize, t: f64) -> f64 {
        kahan_dot(&(self.forcing_f)(t), &self.legendre[l]) / self.norms_sq[l]
    }

    fn g_mode(&self, l: usize, t: f64) -> f64 {
        kahan_dot(&(self.forcing_g)(t), &self.legendre[l]) / self.norms_sq[l]
    }

    /// Particular solution (b_l^p, w_l^p) at time t, by variation of
    /// parameters on the fundamental pair (t0+t)^{-l}, (t0+t)^{l+1} with the
    /// forcing derivative integrated by parts (the Wronskian is 2l+1). Note
    /// the minus sign on the f-term of the tail integrand: differentiating
    /// back shows this sign is required for b' = w + f to hold on the l >= 1
    /// modes.
    fn particular(&self, l: usize, t: f64) -> (f64, f64) {
        let t0 = self.t0;
        let lf = l as f64;
        let tl = t0 + t;
        let inner = |s: f64| {
            (lf + 1.0) * (t0 + s).powi(l as i32) * self.f_mode(l, s)
                - (t0 + s).powi(l as i32 + 1) * self.g_mode(l, s)
        };
        let outer = |s: f64| {
            -lf * (t0 + s).powi(-(l as i32) - 1) * self.f_mode(l, s)
                - (t0 + s).powi(-(l as i32)) * self.g_mode(l, s)
        };
        let i_inner = adaptive_simpson(&inner, 0.0, t, self.quad_tol).unwrap_or(0.0);
        let i_outer = adaptive_simpson_to_inf(&outer, t, self.quad_tol).unwrap_or(0.0);
        let bp = tl.powi(-(l as i32)) / (2.0 * lf + 1.0) * i_inner
            + tl.powi(l as i32 + 1) / (2.0 * lf + 1.0) * i_outer;
        let wp = -lf * tl.powi(-(l as i32) - 1) / (2.0 * lf + 1.0) * i_inner
            + (lf + 1.0) * tl.powi(l as i32) / (2.0 * lf + 1.0) * i_outer;
        (bp, wp)
    }

    /// Mode coefficients (b_l(t), w_l(t)).
    pub fn mode(&self, l: usize, t: f64) -> (f64, f64) {
        let lf = l as f64;
        let tl = self.t0 + t;
        let (bp, wp) = self.particular(l, t);
        let decay = tl.powi(-(l as i32));
        (
            self.hom[l] * decay + bp,
            -lf * self.hom[l] * decay / tl + wp,
        )
    }

    /// Full vectors (B(t), W(t)).
    pub fn eval(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let mut b = vec![0.0; self.n];
        let mut w = vec![0.0; self.n];
        for l in 0..self.n {
            let (bl, wl) = self.mode(l, t);
            for j in 0..self.n {
                b[j] += bl * self.legendre[l][j];
                w[j] += wl * self.legendre[l][j];
            }
        }
        (b, w)
    }
}

/// Solve B' = W + F, W' = (t0+t)^{-2} U B + G for the unique bounded solution
/// with B(0) = b0. Forcings are sampled callables; G must decay like
/// (t0+t)^{-2} (checked on tail samples).
pub fn euler_solve(
    n: usize,
    t0: f64,
    b0: &[f64],
    forcing_f: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    forcing_g: Box<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
) -> Result<EulerSolution> {
    assert!(t0 >= 1.0, "euler_solve needs t0 >= 1");
    assert_eq!(b0.len(), n);

    // admissibility: |G(t)| (t0+t)^2 bounded on sampled tail
    let mut bound0: f64 = 0.0;
    let mut bound_far: f64 = 0.0;
    for k in 1..=8 {
        let t = 10.0f64.powi(k) - t0;
        if t <= 0.0 {
            continue;
        }
        let g = forcing_g(t);
        let norm = g.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let weighted = norm * (t0 + t) * (t0 + t);
        if k <= 2 {
            bound0 = bound0.max(weighted);
        } else {
            bound_far = bound_far.max(weighted);
        }
    }
    if bound_far > 100.0 * (bound0 + 1e-12) {
        return Err(Error::InadmissibleForcing);
    }

    let legendre = legendre_vectors(n);
    let norms_sq: Vec<f64> = legendre.iter().map(|p| kahan_dot(p, p)).collect();
    let mut sol = EulerSolution {
        t0,
        n,
        legendre,
        norms_sq,
        hom: vec![0.0; n],
        forcing_f,
        forcing_g,
        quad_tol: EULER_QUAD_TOL,
    };
    for l in 0..n {
        let b0_l = kahan_dot(b0, &sol.legendre[l]) / sol.norms_sq[l];
        let (bp0, _) = sol.particular(l, 0.0);
        sol.hom[l] = t0.powi(l as i32) * (b0_l - bp0);
    }
    Ok(sol)
}
