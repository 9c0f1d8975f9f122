//! Self-interaction potentials and their standing hypotheses.
//!
//! A valid potential U is even, strictly positive on (-1, 1), vanishes at the
//! vacua +/-1 and is normalized by U''(+/-1) = 1. Built-in models carry exact
//! analytic derivatives; custom potentials can be loaded from a plain-text
//! column table with cubic interpolation.

use crate::error::{Error, Result};
use crate::num::cubic_interp_uniform;
use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Potential {
    name: String,
    u: ScalarFn,
    du: ScalarFn,
    d2u: ScalarFn,
    d3u: ScalarFn,
}

impl std::fmt::Debug for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Potential").field("name", &self.name).finish()
    }
}

impl Potential {
    pub fn builtin(model_id: &str) -> Result<Potential> {
        match model_id {
            "phi4" => Ok(Self::phi4()),
            "sine_gordon" | "sine-gordon" | "sg" => Ok(Self::sine_gordon()),
            other => Err(Error::UnsupportedModel(other.to_string())),
        }
    }

    /// U(phi) = (1/8)(1 - phi^2)^2.
    pub fn phi4() -> Potential {
        Potential {
            name: "phi4".into(),
            u: Arc::new(|p| {
                let w = 1.0 - p * p;
                0.125 * w * w
            }),
            du: Arc::new(|p| 0.5 * (p * p * p - p)),
            d2u: Arc::new(|p| 0.5 * (3.0 * p * p - 1.0)),
            d3u: Arc::new(|p| 3.0 * p),
        }
    }

    /// U(phi) = (1/pi^2)(1 + cos(pi phi)).
    pub fn sine_gordon() -> Potential {
        Potential {
            name: "sine_gordon".into(),
            u: Arc::new(|p| (1.0 + (PI * p).cos()) / (PI * PI)),
            du: Arc::new(|p| -(PI * p).sin() / PI),
            d2u: Arc::new(|p| -(PI * p).cos()),
            d3u: Arc::new(|p| PI * (PI * p).sin()),
        }
    }

    pub fn custom(
        name: &str,
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3u: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Potential {
        Potential {
            name: name.into(),
            u: Arc::new(u),
            du: Arc::new(du),
            d2u: Arc::new(d2u),
            d3u: Arc::new(d3u),
        }
    }

    /// Load a tabulated potential from a plain-text column file.
    ///
    /// Each non-comment line holds `phi U U' U'' U'''` (whitespace separated)
    /// on a uniform, strictly increasing phi grid. Values between nodes are
    /// obtained by cubic interpolation.
    pub fn from_table_file(name: &str, path: &Path) -> Result<Potential> {
        let text = std::fs::read_to_string(path)?;
        Self::from_table_str(name, &text)
    }

    pub fn from_table_str(name: &str, text: &str) -> Result<Potential> {
        let mut phi = Vec::new();
        let mut cols: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::Config(format!(
                    "potential table line {}: expected 5 columns, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mut parsed = [0.0; 5];
            for (k, field) in fields.iter().enumerate() {
                parsed[k] = field.parse::<f64>().map_err(|_| {
                    Error::Config(format!("potential table line {}: bad number", lineno + 1))
                })?;
            }
            phi.push(parsed[0]);
            for k in 0..4 {
                cols[k].push(parsed[k + 1]);
            }
        }
        if phi.len() < 8 {
            return Err(Error::Config("potential table needs at least 8 rows".into()));
        }
        let x0 = phi[0];
        let h = phi[1] - phi[0];
        for w in phi.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
                return Err(Error::Config("potential table grid must be uniform".into()));
            }
        }
        let xn = *phi.last().unwrap();
        let make = |vals: Vec<f64>, clamp_val: f64| -> ScalarFn {
            Arc::new(move |p: f64| {
                if p < x0 || p > xn {
                    clamp_val
                } else {
                    cubic_interp_uniform(x0, h, &vals, p)
                }
            })
        };
        Ok(Potential {
            name: name.into(),
            u: make(cols[0].clone(), 0.0),
            du: make(cols[1].clone(), 0.0),
            d2u: make(cols[2].clone(), 1.0),
            d3u: make(cols[3].clone(), 0.0),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn u(&self, phi: f64) -> f64 {
        (self.u)(phi)
    }

    pub fn du(&self, phi: f64) -> f64 {
        (self.du)(phi)
    }

    pub fn d2u(&self, phi: f64) -> f64 {
        (self.d2u)(phi)
    }

    pub fn d3u(&self, phi: f64) -> f64 {
        (self.d3u)(phi)
    }

    /// sqrt(2 U(phi)), clamped at zero against interpolation undershoot.
    pub fn bogomolny_speed(&self, phi: f64) -> f64 {
        (2.0 * self.u(phi)).max(0.0).sqrt()
    }

    /// Check the standing hypotheses on `n_samples` points of [-2, 2].
    pub fn validate(&self, n_samples: usize, tol: f64) -> ValidationReport {
        assert!(n_samples >= 16, "validate needs n_samples >= 16");
        let mut rep = ValidationReport::default();

        // Vacuum normalization.
        rep.vacuum_value = self.u(1.0).abs().max(self.u(-1.0).abs());
        rep.vacuum_curvature = (self.d2u(1.0) - 1.0).abs().max((self.d2u(-1.0) - 1.0).abs());

        let h_small = 1e-4;
        for i in 0..=n_samples {
            let phi = -2.0 + 4.0 * i as f64 / n_samples as f64;
            let even = (self.u(phi) - self.u(-phi)).abs() / (1.0 + self.u(phi).abs());
            rep.evenness = rep.evenness.max(even);

            if phi.abs() < 1.0 - 1e-9 && phi.abs() > 1e-9 {
                rep.interior_min = rep.interior_min.min(self.u(phi));
            }

            // Derivative consistency against centered differences; skip points
            // whose stencil would leave the validation window.
            if phi.abs() <= 2.0 - 2.0 * h_small {
                let fd1 = (self.u(phi + h_small) - self.u(phi - h_small)) / (2.0 * h_small);
                let fd2 = (self.du(phi + h_small) - self.du(phi - h_small)) / (2.0 * h_small);
                let fd3 = (self.d2u(phi + h_small) - self.d2u(phi - h_small)) / (2.0 * h_small);
                rep.derivative_mismatch = rep
                    .derivative_mismatch
                    .max((self.du(phi) - fd1).abs())
                    .max((self.d2u(phi) - fd2).abs())
                    .max((self.d3u(phi) - fd3).abs());
            }
        }
        // Centered differences are O(h^2); widen the derivative gate accordingly.
        rep.derivative_tol = (100.0 * h_small * h_small).max(tol);
        rep.tol = tol;
        rep
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub evenness: f64,
    pub vacuum_value: f64,
    pub vacuum_curvature: f64,
    /// Minimum of U over the sampled interior of (-1, 1); must stay positive.
    pub interior_min: f64,
    pub derivative_mismatch: f64,
    pub derivative_tol: f64,
    pub tol: f64,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport {
            evenness: 0.0,
            vacuum_value: 0.0,
            vacuum_curvature: 0.0,
            interior_min: f64::INFINITY,
            derivative_mismatch: 0.0,
            derivative_tol: 0.0,
            tol: 0.0,
        }
    }
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.evenness <= self.tol
            && self.vacuum_value <= self.tol
            && self.vacuum_curvature <= self.tol
            && self.interior_min > 0.0
            && self.derivative_mismatch <= self.derivative_tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi4_values() {
        let p = Potential::phi4();
        assert!((p.u(0.0) - 0.125).abs() < 1e-15);
        assert!(p.u(1.0).abs() < 1e-15);
        assert!((p.d2u(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sine_gordon_values() {
        let p = Potential::sine_gordon();
        assert!((p.u(0.0) - 2.0 / (PI * PI)).abs() < 1e-15);
        assert!(p.u(1.0).abs() < 1e-15);
        assert!((p.d2u(-1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_model_errors() {
        assert!(matches!(
            Potential::builtin("phi6"),
            Err(Error::UnsupportedModel(_))
        ));
    }

    #[test]
    fn builtins_validate() {
        assert!(Potential::phi4().validate(256, 1e-10).passes());
        assert!(Potential::sine_gordon().validate(256, 1e-10).passes());
    }

    #[test]
    fn broken_normalization_fails() {
        // U''(1) = 2 instead of 1
        let p = Potential::custom(
            "bad",
            |x| 0.25 * (1.0 - x * x) * (1.0 - x * x),
            |x| x * x * x - x,
            |x| 3.0 * x * x - 1.0,
            |x| 6.0 * x,
        );
        let rep = p.validate(64, 1e-10);
        assert!(!rep.passes());
        assert!(rep.vacuum_curvature > 0.5);
    }

    #[test]
    fn evenness_on_validation_window() {
        for p in [Potential::phi4(), Potential::sine_gordon()] {
            for i in 0..=400 {
                let phi = -2.0 + i as f64 * 0.01;
                let diff = (p.u(phi) - p.u(-phi)).abs();
                assert!(diff <= 1e-14 * (1.0 + p.u(phi).abs()));
            }
        }
    }

    #[test]
    fn tabulated_potential_roundtrip() {
        let exact = Potential::phi4();
        let mut table = String::new();
        let n = 400;
        for i in 0..=n {
            let phi = -2.0 + 4.0 * i as f64 / n as f64;
            table.push_str(&format!(
                "{} {} {} {} {}\n",
                phi,
                exact.u(phi),
                exact.du(phi),
                exact.d2u(phi),
                exact.d3u(phi)
            ));
        }
        let tab = Potential::from_table_str("phi4_table", &table).unwrap();
        for i in 0..=100 {
            let phi = -1.95 + 3.9 * i as f64 / 100.0;
            assert!((tab.u(phi) - exact.u(phi)).abs() < 1e-7);
        }
    }

    #[test]
    fn second_order_derivative_convergence() {
        // du matches centered differences of u at O(h^2): error ratio ~ 100.
        let p = Potential::sine_gordon();
        let phi = 0.3;
        let mut errs = Vec::new();
        for &h in &[1e-3, 1e-4] {
            let fd = (p.u(phi + h) - p.u(phi - h)) / (2.0 * h);
            errs.push((fd - p.du(phi)).abs());
        }
        assert!(errs[1] < errs[0] / 50.0, "errors: {errs:?}");
    }
}
