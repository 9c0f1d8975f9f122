//! Static kink profiles, the interaction constant kappa and the rest mass M.
//!
//! The profile H solves the Bogomolny equation dH/dx = sqrt(2 U(H)) with
//! H(0) = 0 and connects the vacua -1 and 1. Its exponential tail
//! 1 - H(x) ~ kappa e^{-x} carries the interaction constant
//!
//!   kappa = exp( int_0^1 ( 1/sqrt(2U(y)) - 1/(1-y) ) dy ),
//!
//! and the rest mass is M = |dH/dx|_{L^2}^2 = 2 int_0^1 sqrt(2U(y)) dy.

use crate::error::{Error, Result};
use crate::num::{adaptive_simpson, cubic_interp_uniform, exp_pair_fit, linear_fit, simpson};
use crate::ode::integrate_dp45;
use crate::potential::Potential;

/// Below this distance from the vacuum the kappa integrand switches to its
/// quadratic Taylor form: evaluating 1/sqrt(2U(y)) directly at s = 1 - y
/// carries rounding noise ~ eps/s^3 (the vacuum is a double zero of U), which
/// already reaches 1e-2 relative at s = 1e-5 for the sine-Gordon potential.
const TAYLOR_CUTOFF: f64 = 1e-2;

/// Inside [1 - NOISE_BAND_WIDTH, 1 - TAYLOR_CUTOFF] the residual noise still
/// defeats adaptive refinement, so that band uses a fixed composite Simpson
/// rule (noise integrates to ~1e-13 there, truncation is negligible).
const NOISE_BAND_WIDTH: f64 = 1e-1;
const NOISE_BAND_SAMPLES: usize = 2049;

/// Tabulated kink profile with tail data.
#[derive(Clone, Debug)]
pub struct KinkProfile {
    potential: Potential,
    x_max: f64,
    dx: f64,
    /// H at the uniform nodes of [-x_max, x_max].
    h: Vec<f64>,
    /// dH/dx at the same nodes (right-hand side of the Bogomolny equation).
    dh: Vec<f64>,
    pub kappa: f64,
    pub mass: f64,
}

/// Taylor coefficients (c0, c1, c2) of g(1-s) = c0 + c1 s + c2 s^2 + O(s^3)
/// at the vacuum, where g(y) = 1/sqrt(2U(y)) - 1/(1-y). The fourth and fifth
/// derivatives of U are estimated from centered differences of U'''.
fn vacuum_series(p: &Potential) -> (f64, f64, f64) {
    let d3 = p.d3u(1.0);
    let h = 1e-3;
    let d4 = (p.d3u(1.0 + h) - p.d3u(1.0 - h)) / (2.0 * h);
    let d5 = (p.d3u(1.0 + h) - 2.0 * d3 + p.d3u(1.0 - h)) / (h * h);
    let c0 = d3 / 6.0;
    let c1 = (d3 * d3 - d4) / 24.0;
    let c2 = d5 / 120.0 - d3 * d4 / 48.0 + 5.0 * d3 * d3 * d3 / 432.0;
    (c0, c1, c2)
}

/// Integrand of the kappa integral, g(y) = 1/sqrt(2U(y)) - 1/(1-y), written in
/// the cancellation-reduced form (s^2 - 2U)/(s sqrt(2U) (s + sqrt(2U))) with
/// s = 1 - y, plus the quadratic Taylor fallback at the endpoint.
fn kappa_integrand(p: &Potential, y: f64) -> f64 {
    let s = 1.0 - y;
    if s < TAYLOR_CUTOFF {
        let (c0, c1, c2) = vacuum_series(p);
        return c0 + s * (c1 + s * c2);
    }
    let root = p.bogomolny_speed(y);
    (s * s - 2.0 * p.u(y)) / (s * root * (s + root))
}

/// int_a^b of the kappa integrand with a fixed composite Simpson rule,
/// immune to the rounding noise near the vacuum.
fn kappa_fixed_band(p: &Potential, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = NOISE_BAND_SAMPLES;
    let h = (b - a) / (n - 1) as f64;
    let vals: Vec<f64> = (0..n).map(|i| kappa_integrand(p, a + i as f64 * h)).collect();
    simpson(&vals, h)
}

/// int_0^psi ( 1/sqrt(2U) - 1/(1-y) ) dy for psi in [0, 1], with the noisy
/// vacuum band on a fixed rule and the Taylor series on [1 - cutoff, 1].
fn kappa_integral_to(p: &Potential, psi: f64) -> Result<f64> {
    let band_start = 1.0 - NOISE_BAND_WIDTH;
    let taylor_start = 1.0 - TAYLOR_CUTOFF;
    let mut total = adaptive_simpson(&|y| kappa_integrand(p, y), 0.0, psi.min(band_start), 1e-12)?;
    if psi > band_start {
        total += kappa_fixed_band(p, band_start, psi.min(taylor_start));
    }
    if psi > taylor_start {
        // exact integral of the quadratic series over [taylor_start, psi]
        let (c0, c1, c2) = vacuum_series(p);
        let s_hi = 1.0 - taylor_start;
        let s_lo = 1.0 - psi;
        let anti = |s: f64| s * (c0 + s * (c1 / 2.0 + s * c2 / 3.0));
        total += anti(s_hi) - anti(s_lo);
    }
    Ok(total)
}

/// kappa = exp( int_0^1 ( 1/sqrt(2U) - 1/(1-y) ) dy ).
pub fn interaction_constant(p: &Potential) -> Result<f64> {
    Ok(kappa_integral_to(p, 1.0)?.exp())
}

/// G(psi) = int_0^psi dy / sqrt(2U(y)), the inverse of the profile H.
///
/// Computed through the same endpoint splitting as the kappa integral:
/// G(psi) = -log(1 - psi) + int_0^psi ( 1/sqrt(2U) - 1/(1-y) ) dy,
/// and extended to negative psi by oddness.
pub fn bogomolny_coordinate(p: &Potential, psi: f64) -> Result<f64> {
    if psi.abs() >= 1.0 {
        return Err(Error::Domain(format!("psi = {psi} outside (-1, 1)")));
    }
    if psi < 0.0 {
        return Ok(-bogomolny_coordinate(p, -psi)?);
    }
    Ok(-(1.0 - psi).ln() + kappa_integral_to(p, psi)?)
}

/// Rest mass computed three ways: |dH/dx|^2 from the table, the quadrature
/// 2 int_0^1 sqrt(2U), and 2 int U(H) dx from the table. The three values must
/// agree to 1e-8; the quadrature value is returned.
pub fn rest_mass(prof: &KinkProfile) -> Result<f64> {
    let p = prof.potential();
    let quad = 2.0 * adaptive_simpson(&|y| p.bogomolny_speed(y), 0.0, 1.0, 1e-13)?;

    let grad_sq: Vec<f64> = prof.dh.iter().map(|d| d * d).collect();
    let by_gradient = simpson(&grad_sq, prof.dx);

    let u_of_h: Vec<f64> = prof.h.iter().map(|&h| p.u(h)).collect();
    let by_potential = 2.0 * simpson(&u_of_h, prof.dx);

    let values = [by_gradient, quad, by_potential];
    let spread = values
        .iter()
        .flat_map(|a| values.iter().map(move |b| (a - b).abs()))
        .fold(0.0f64, f64::max);
    if spread > 1e-8 {
        return Err(Error::MassConsistency(values));
    }
    Ok(quad)
}

impl KinkProfile {
    /// Tabulate H by integrating the Bogomolny equation from H(0) = 0 and
    /// extending by oddness, then populate kappa and the rest mass.
    pub fn build(p: &Potential, x_max: f64, n_points: usize) -> Result<KinkProfile> {
        assert!(x_max >= 10.0, "build requires x_max >= 10");
        assert!(n_points >= 512, "build requires n_points >= 512");
        let half = n_points / 2;
        let dx = x_max / half as f64;

        // Forward integration over [0, x_max], landing on every node.
        let nodes: Vec<f64> = (1..=half).map(|i| i as f64 * dx).collect();
        let mut h_right = vec![0.0; half + 1];
        let mut idx = 1;
        let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = p.bogomolny_speed(y[0].clamp(-1.0, 1.0));
        };
        let (reached, _, _) = integrate_dp45(
            &mut rhs,
            0.0,
            &[0.0],
            x_max,
            1e-12,
            &nodes,
            &mut |_t, y: &[f64]| {
                h_right[idx] = y[0].min(1.0);
                idx += 1;
            },
            &mut |_, _| false,
        )
        .map_err(|_| Error::IntegrationStall {
            reached: (idx - 1) as f64 * dx,
            requested: x_max,
        })?;
        if idx != half + 1 {
            return Err(Error::IntegrationStall {
                reached,
                requested: x_max,
            });
        }

        let n_nodes = 2 * half + 1;
        let mut h = vec![0.0; n_nodes];
        let mut dh = vec![0.0; n_nodes];
        for i in 0..=half {
            let value = h_right[i];
            h[half + i] = value;
            h[half - i] = -value;
            let slope = p.bogomolny_speed(value);
            dh[half + i] = slope;
            dh[half - i] = slope;
        }

        let mut prof = KinkProfile {
            potential: p.clone(),
            x_max,
            dx,
            h,
            dh,
            kappa: 0.0,
            mass: 0.0,
        };
        prof.kappa = interaction_constant(p)?;
        prof.mass = rest_mass(&prof)?;
        Ok(prof)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.h
            .iter()
            .zip(&self.dh)
            .enumerate()
            .map(move |(i, (&h, &dh))| (-self.x_max + i as f64 * self.dx, h, dh))
    }

    /// H at an arbitrary point: cubic interpolation inside the window, the
    /// first-order tail 1 - kappa e^{-|x|} in [x_max - 1, x_max + 5], vacuum
    /// beyond.
    pub fn h_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        if ax <= self.x_max - 1.0 {
            cubic_interp_uniform(-self.x_max, self.dx, &self.h, x)
        } else if ax <= self.x_max + 5.0 {
            sign * (1.0 - self.kappa * (-ax).exp())
        } else {
            sign
        }
    }

    /// dH/dx at an arbitrary point, with the matching tail kappa e^{-|x|}.
    pub fn dh_at(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax <= self.x_max - 1.0 {
            cubic_interp_uniform(-self.x_max, self.dx, &self.dh, x)
        } else if ax <= self.x_max + 5.0 {
            self.kappa * (-ax).exp()
        } else {
            0.0
        }
    }

    /// d2H/dx2 via the stationary equation d2H/dx2 = U'(H).
    pub fn d2h_at(&self, x: f64) -> f64 {
        self.potential.du(self.h_at(x))
    }

    /// d3H/dx3 = U''(H) dH/dx.
    pub fn d3h_at(&self, x: f64) -> f64 {
        self.potential.d2u(self.h_at(x)) * self.dh_at(x)
    }

    /// Lorentz-boosted kink evaluation: returns the field pair
    /// ( H(gamma (x-a)), -v gamma dH(gamma (x-a)) ).
    pub fn eval_boosted(&self, a: f64, v: f64, x: f64) -> (f64, f64) {
        debug_assert!(v.abs() < 1.0);
        let gamma = 1.0 / (1.0 - v * v).sqrt();
        let xi = gamma * (x - a);
        (self.h_at(xi), -v * gamma * self.dh_at(xi))
    }

    /// Fit kappa from the tail 1 - H(x) ~ kappa e^{-x} + B e^{-2x} over [5, 8].
    pub fn tail_fit_kappa(&self) -> f64 {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (x, h, _) in self.nodes() {
            if (5.0..=8.0).contains(&x) {
                xs.push(x);
                ys.push(1.0 - h);
            }
        }
        exp_pair_fit(&xs, &ys).0
    }

    /// Profile identities: the reduced-force integral, the translation zero
    /// mode of the linearization, and the second-order tail residual slope.
    pub fn check_identities(&self) -> IdentityReport {
        let p = &self.potential;
        let kappa = self.kappa;
        let d3_1 = p.d3u(1.0);

        // (i) int dH (U''(H) - 1) e^x dx = -2 kappa, with the analytic
        // first-order tail correction beyond the table window.
        let integrand: Vec<f64> = self
            .nodes()
            .map(|(x, h, dh)| dh * (p.d2u(h) - 1.0) * x.exp())
            .collect();
        let tail = -kappa * kappa * d3_1 * (-self.x_max).exp();
        let reduced_force = simpson(&integrand, self.dx) + tail;

        // (ii) max-norm of L(dH) = -d2(dH) + U''(H) dH on the grid.
        let mut second = vec![0.0; self.dh.len()];
        for i in 1..self.dh.len() - 1 {
            second[i] = (self.dh[i + 1] - 2.0 * self.dh[i] + self.dh[i - 1]) / (self.dx * self.dx);
        }
        let mut zero_mode_max: f64 = 0.0;
        for (i, (_, h, dh)) in self.nodes().enumerate() {
            if i == 0 || i == self.h.len() - 1 {
                continue;
            }
            zero_mode_max = zero_mode_max.max((-second[i] + p.d2u(h) * dh).abs());
        }

        // (iii) slope of log |H - 1 + kappa e^{-x} - (kappa^2 U'''(1)/6) e^{-2x}|.
        let hi = 8.0f64.min(self.x_max - 2.0);
        let mut xs = Vec::new();
        let mut logs = Vec::new();
        for (x, h, _) in self.nodes() {
            if x >= 3.0 && x <= hi {
                let r = h - 1.0 + kappa * (-x).exp() - kappa * kappa * d3_1 / 6.0 * (-2.0 * x).exp();
                if r.abs() > 1e-300 {
                    xs.push(x);
                    logs.push(r.abs().ln());
                }
            }
        }
        let (tail_slope, _) = linear_fit(&xs, &logs);

        IdentityReport {
            reduced_force,
            reduced_force_expected: -2.0 * kappa,
            zero_mode_max,
            tail_slope,
        }
    }

    /// Maximum of the Bogomolny residual |dH - sqrt(2U(H))| over the nodes.
    pub fn bogomolny_residual(&self) -> f64 {
        self.nodes()
            .map(|(_, h, dh)| (dh - self.potential.bogomolny_speed(h)).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct IdentityReport {
    pub reduced_force: f64,
    pub reduced_force_expected: f64,
    pub zero_mode_max: f64,
    pub tail_slope: f64,
}
