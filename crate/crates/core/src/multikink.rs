//! Multikink configurations: alternating-sign superpositions of boosted kinks
//! with positions a_1 <= ... <= a_n and Lorentz parameters v_k, their
//! energies, interaction forces and the two-term energy expansion.
//!
//! Sign convention: phi = 1 + sum_k (-1)^k (H_k + 1) with k starting at 1,
//! so n = 1 is a single antikink and the sector is (1, (-1)^n).

use crate::error::{Error, Result};
use crate::field::{FieldState, Grid};
use crate::kink::KinkProfile;
use crate::num::{centered_derivative, simpson};
use crate::potential::Potential;

/// Ordered positions and velocities of n alternating (anti)kinks.
#[derive(Clone, Debug, PartialEq)]
pub struct MultikinkConfig {
    positions: Vec<f64>,
    velocities: Vec<f64>,
}

impl MultikinkConfig {
    pub fn new(positions: Vec<f64>, velocities: Vec<f64>) -> Result<MultikinkConfig> {
        if positions.len() != velocities.len() {
            return Err(Error::Domain(
                "positions and velocities must have equal length".into(),
            ));
        }
        if positions.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Domain("positions must be ascending".into()));
        }
        if velocities.iter().any(|v| v.abs() >= 1.0) {
            return Err(Error::Domain("velocities must lie in (-1, 1)".into()));
        }
        Ok(MultikinkConfig {
            positions,
            velocities,
        })
    }

    pub fn at_rest(positions: Vec<f64>) -> Result<MultikinkConfig> {
        let n = positions.len();
        MultikinkConfig::new(positions, vec![0.0; n])
    }

    pub fn vacuum() -> MultikinkConfig {
        MultikinkConfig {
            positions: Vec::new(),
            velocities: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    /// Gaps y_k = a_{k+1} - a_k, k = 1..n-1.
    pub fn gaps(&self) -> Vec<f64> {
        self.positions.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Proximity weight rho = sum e^{-y_k} + sum v_k^2.
    pub fn proximity(&self) -> f64 {
        let gaps: f64 = self.gaps().iter().map(|y| (-y).exp()).sum();
        let vels: f64 = self.velocities.iter().map(|v| v * v).sum();
        gaps + vels
    }

    /// The topological sector (1, (-1)^n).
    pub fn sector(&self) -> (i8, i8) {
        (1, if self.n() % 2 == 0 { 1 } else { -1 })
    }

    /// Sign (-1)^k of the k-th transition (k is 1-based).
    pub fn sign(k: usize) -> f64 {
        if k % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Sample the multikink pair H(a, v) on a grid.
pub fn synthesize(prof: &KinkProfile, cfg: &MultikinkConfig, grid: Grid) -> Result<FieldState> {
    if cfg.n() > 0 {
        let need_left = cfg.positions[0] - 8.0;
        let need_right = cfg.positions[cfg.n() - 1] + 8.0;
        if grid.x_left > need_left || grid.x_right < need_right {
            return Err(Error::GridCoverage {
                x_left: grid.x_left,
                x_right: grid.x_right,
                need_left,
                need_right,
            });
        }
    }
    let mut phi = vec![1.0; grid.n_nodes()];
    let mut phidot = vec![0.0; grid.n_nodes()];
    for (i, x) in grid.nodes().enumerate() {
        for k in 1..=cfg.n() {
            let (h, hdot) = prof.eval_boosted(cfg.positions[k - 1], cfg.velocities[k - 1], x);
            let s = MultikinkConfig::sign(k);
            phi[i] += s * (h + 1.0);
            phidot[i] += s * hdot;
        }
    }
    FieldState::new(grid, phi, phidot, 0.0, cfg.sector())
}

/// Pointwise multikink field value (first component only).
pub fn multikink_value(prof: &KinkProfile, cfg: &MultikinkConfig, x: f64) -> f64 {
    let mut phi = 1.0;
    for k in 1..=cfg.n() {
        let (h, _) = prof.eval_boosted(cfg.positions[k - 1], cfg.velocities[k - 1], x);
        phi += MultikinkConfig::sign(k) * (h + 1.0);
    }
    phi
}

/// An energy or momentum value together with the boundary density that gauges
/// domain-truncation quality (above 1e-10 the value carries a truncation
/// warning).
#[derive(Clone, Copy, Debug)]
pub struct Measured {
    pub value: f64,
    pub boundary_density: f64,
}

impl Measured {
    pub fn truncated(&self) -> bool {
        self.boundary_density > 1e-10
    }
}

fn boundary_density(p: &Potential, state: &FieldState) -> f64 {
    let density = crate::field::energy_density(p, state);
    density[0].abs().max(density[density.len() - 1].abs())
}

/// Total energy by Simpson quadrature of 1/2 phidot^2 + 1/2 (dphi)^2 + U(phi).
pub fn total_energy(p: &Potential, state: &FieldState) -> Measured {
    Measured {
        value: crate::field::discrete_energy(p, state),
        boundary_density: boundary_density(p, state),
    }
}

/// Total momentum P = -int phidot dphi dx.
pub fn total_momentum(p: &Potential, state: &FieldState) -> Measured {
    let dphi = centered_derivative(&state.phi, state.grid.dx());
    let integrand: Vec<f64> = state
        .phidot
        .iter()
        .zip(&dphi)
        .map(|(&pd, &dp)| -pd * dp)
        .collect();
    Measured {
        value: simpson(&integrand, state.grid.dx()),
        boundary_density: boundary_density(p, state),
    }
}

/// Quadrature spacing for interaction-force inner products.
const FORCE_DX: f64 = 0.01;
/// Padding beyond the outermost kinks for force quadrature.
const FORCE_PAD: f64 = 12.0;

/// Interaction force on the k-th kink (k is 1-based):
/// F_k = (-1)^k < dx H_k, U'(H(a, v)) - sum_j (-1)^j U'(H_j) >.
pub fn interaction_force(prof: &KinkProfile, cfg: &MultikinkConfig, k: usize) -> f64 {
    assert!(k >= 1 && k <= cfg.n(), "kink index out of range");
    let p = prof.potential();
    let a = cfg.positions();
    let v = cfg.velocities();
    let grid = Grid::with_spacing(a[0] - FORCE_PAD, a[cfg.n() - 1] + FORCE_PAD, FORCE_DX);
    let dx = grid.dx();

    let gamma_k = 1.0 / (1.0 - v[k - 1] * v[k - 1]).sqrt();
    let integrand: Vec<f64> = grid
        .nodes()
        .map(|x| {
            let mut phi = 1.0;
            let mut sum_du = 0.0;
            for j in 1..=cfg.n() {
                let (h, _) = prof.eval_boosted(a[j - 1], v[j - 1], x);
                let s = MultikinkConfig::sign(j);
                phi += s * (h + 1.0);
                sum_du += s * p.du(h);
            }
            let dxh_k = gamma_k * prof.dh_at(gamma_k * (x - a[k - 1]));
            dxh_k * (p.du(phi) - sum_du)
        })
        .collect();
    MultikinkConfig::sign(k) * simpson(&integrand, dx)
}

/// First-order force law 2 kappa^2 (e^{-y_k} - e^{-y_{k-1}}) with the
/// conventions y_0 = y_n = +infinity.
pub fn force_asymptotic(kappa: f64, cfg: &MultikinkConfig, k: usize) -> f64 {
    assert!(k >= 1 && k <= cfg.n(), "kink index out of range");
    let gaps = cfg.gaps();
    let right = if k < cfg.n() { (-gaps[k - 1]).exp() } else { 0.0 };
    let left = if k > 1 { (-gaps[k - 2]).exp() } else { 0.0 };
    2.0 * kappa * kappa * (right - left)
}

/// Two-term energy expansion nM + (M/2) sum v_k^2 - 2 kappa^2 sum e^{-y_k}.
pub fn energy_expansion(kappa: f64, mass: f64, cfg: &MultikinkConfig) -> f64 {
    let kinetic: f64 = cfg.velocities().iter().map(|v| v * v).sum();
    let gaps: f64 = cfg.gaps().iter().map(|y| (-y).exp()).sum();
    cfg.n() as f64 * mass + 0.5 * mass * kinetic - 2.0 * kappa * kappa * gaps
}

/// Distance proxy to the n-kink family: fits orthogonal modulation parameters
/// from the zero-crossing initial guess and reports
/// |state - H(a, v)|_E^2 + rho(a, v) at the fitted point.
pub fn distance_to_family(
    prof: &KinkProfile,
    state: &FieldState,
    n: usize,
) -> Result<(f64, MultikinkConfig)> {
    let guess = crate::modulation::initial_guess(state, n)?;
    let dec = crate::modulation::fit(prof, state, &guess).map_err(|e| match e {
        Error::FitDivergence(_) => Error::NoNearbyMultikink,
        other => other,
    })?;
    let value = dec.energy_norm_g * dec.energy_norm_g + dec.config.proximity();
    Ok((value, dec.config))
}
