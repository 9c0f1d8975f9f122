//! Adaptive embedded Runge-Kutta 5(4) (Dormand-Prince) for small ODE systems.
//!
//! Used for the Bogomolny profile equation and the attractive-Toda n-body
//! system. Steps are clipped so that requested output times are hit exactly.

use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_SCALE: f64 = 0.2;
const MAX_SCALE: f64 = 5.0;

const A: [&[f64]; 6] = [
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step from (t, y) with step h.
/// Returns (y5, error_estimate) where y5 is the 5th-order solution.
fn dp_step<F>(f: &mut F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    let mut k0 = vec![0.0; n];
    f(t, y, &mut k0);
    k.push(k0);

    let mut tmp = vec![0.0; n];
    for (s, row) in A.iter().enumerate() {
        for i in 0..n {
            let mut acc = 0.0;
            for (j, &c) in row.iter().enumerate() {
                acc += c * k[j][i];
            }
            tmp[i] = y[i] + h * acc;
        }
        let mut ks = vec![0.0; n];
        f(t + C[s] * h, &tmp, &mut ks);
        k.push(ks);
    }
    // Stage 6 position is the 5th-order solution (FSAL): tmp holds y5 here.
    let y5 = tmp;

    let mut err = vec![0.0; n];
    for i in 0..n {
        let mut acc4 = 0.0;
        for (j, &bj) in B4.iter().enumerate() {
            acc4 += bj * k[j][i];
        }
        err[i] = y5[i] - (y[i] + h * acc4);
    }
    (y5, err)
}

/// Integrate y' = f(t, y) from `t0` to `t_end`, invoking `on_output` at every
/// time in `output_times` (sorted, within (t0, t_end]). `stop` may end the
/// integration early (e.g. a collision event); the returned flag records it.
#[allow(clippy::too_many_arguments)]
pub fn integrate_dp45<F, O, S>(
    f: &mut F,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    tol: f64,
    output_times: &[f64],
    on_output: &mut O,
    stop: &mut S,
) -> Result<(f64, Vec<f64>, bool)>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(f64, &[f64]),
    S: FnMut(f64, &[f64]) -> bool,
{
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = ((t_end - t0) / 100.0).min(0.1).max(1e-6);
    let mut out_idx = 0;
    while out_idx < output_times.len() && output_times[out_idx] <= t0 {
        out_idx += 1;
    }

    let mut rejects_in_a_row = 0;
    while t < t_end {
        // done up to rounding of the final clipped step
        if t_end - t <= 1e-12 * t_end.abs().max(1.0) {
            t = t_end;
            break;
        }
        let mut target = t_end;
        if out_idx < output_times.len() {
            target = target.min(output_times[out_idx]);
        }
        let h_try = h.min(target - t);
        if h_try < 1e-14 * t.abs().max(1.0) {
            return Err(Error::TodaStiffness { t });
        }

        let (y_new, err) = dp_step(f, t, &y, h_try);
        let mut err_norm: f64 = 0.0;
        for i in 0..y.len() {
            let sc = tol + tol * y[i].abs().max(y_new[i].abs());
            err_norm = err_norm.max((err[i] / sc).abs());
        }

        if err_norm <= 1.0 {
            t += h_try;
            y = y_new;
            rejects_in_a_row = 0;
            if out_idx < output_times.len() && (t - output_times[out_idx]).abs() < 1e-12 {
                on_output(t, &y);
                out_idx += 1;
            }
            if stop(t, &y) {
                return Ok((t, y, true));
            }
            let scale = if err_norm == 0.0 {
                MAX_SCALE
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_SCALE, MAX_SCALE)
            };
            h = h_try * scale;
        } else {
            rejects_in_a_row += 1;
            if rejects_in_a_row > 60 {
                return Err(Error::TodaStiffness { t });
            }
            h = h_try * (SAFETY * err_norm.powf(-0.2)).clamp(MIN_SCALE, 1.0);
        }
    }
    Ok((t, y, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let (_, y, _) = integrate_dp45(
            &mut f,
            0.0,
            &[1.0],
            5.0,
            1e-12,
            &[],
            &mut |_, _| {},
            &mut |_, _| false,
        )
        .unwrap();
        assert!((y[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_period() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let (_, y, _) = integrate_dp45(
            &mut f,
            0.0,
            &[1.0, 0.0],
            20.0 * std::f64::consts::PI,
            1e-12,
            &[],
            &mut |_, _| {},
            &mut |_, _| false,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-8);
        assert!(y[1].abs() < 1e-8);
    }

    #[test]
    fn output_times_are_hit() {
        let mut f = |_t: f64, y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let outs = [0.5, 1.0, 1.5];
        let mut seen = Vec::new();
        integrate_dp45(
            &mut f,
            0.0,
            &[1.0],
            2.0,
            1e-10,
            &outs,
            &mut |t, y: &[f64]| seen.push((t, y[0])),
            &mut |_, _| false,
        )
        .unwrap();
        assert_eq!(seen.len(), 3);
        for (t, v) in seen {
            assert!((v - t.exp()).abs() < 1e-8);
        }
    }
}
