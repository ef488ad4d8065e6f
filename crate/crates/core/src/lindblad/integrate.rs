//! Adaptive embedded Runge-Kutta integrator (Dormand–Prince 5(4)) over
//! dense complex matrices, with elementwise error control and dense output
//! at uniformly spaced sample times.

use super::linalg::CMat;

#[derive(Clone, Debug)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    /// Output samples (including t = 0 and t = duration).
    pub n_outputs: usize,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { rtol: 1e-9, atol: 1e-11, n_outputs: 64, max_steps: 2_000_000 }
    }
}

// Dormand–Prince coefficients (the autonomous RHS needs no c-nodes).
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates ẏ = f(y) from 0 to `duration`, returning `(t, y)` samples at
/// `n_outputs` uniformly spaced times. Errors with the underflow time if the
/// controller cannot make progress.
pub fn integrate_adaptive<F>(
    y0: &CMat,
    duration: f64,
    ctrl: &StepControl,
    f: F,
) -> Result<Vec<(f64, CMat)>, f64>
where
    F: Fn(&CMat) -> CMat,
{
    let n_out = ctrl.n_outputs.max(2);
    let mut outputs = Vec::with_capacity(n_out);
    outputs.push((0.0, y0.clone()));
    if duration == 0.0 {
        outputs.push((0.0, y0.clone()));
        return Ok(outputs);
    }
    let out_times: Vec<f64> =
        (1..n_out).map(|k| duration * k as f64 / (n_out - 1) as f64).collect();
    let mut next_out = 0usize;

    let mut t = 0.0;
    let mut y = y0.clone();
    let mut h = duration / 100.0;
    let h_min = duration * 1e-14;

    let mut steps = 0usize;
    while t < duration {
        steps += 1;
        if steps > ctrl.max_steps || h < h_min {
            return Err(t);
        }
        // Land exactly on the next output time and on the end point.
        let mut target = duration;
        if next_out < out_times.len() {
            target = out_times[next_out];
        }
        if t + h > target {
            h = target - t;
        }

        // Stages.
        let mut k: Vec<CMat> = Vec::with_capacity(7);
        k.push(f(&y));
        #[allow(clippy::needless_range_loop)]
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    ys.axpy(h * a, kj);
                }
            }
            k.push(f(&ys));
        }
        let mut y5 = y.clone();
        let mut err_mat = CMat::zeros_rect(y.rows, y.cols);
        for (s, ks) in k.iter().enumerate() {
            if B5[s] != 0.0 {
                y5.axpy(h * B5[s], ks);
            }
            let d = B5[s] - B4[s];
            if d != 0.0 {
                err_mat.axpy(h * d, ks);
            }
        }
        let scale = ctrl.atol + ctrl.rtol * y5.max_abs().max(y.max_abs());
        let err = err_mat.max_abs() / scale;

        if err <= 1.0 {
            t += h;
            y = y5;
            if next_out < out_times.len() && (t - out_times[next_out]).abs() < 1e-12 * duration
            {
                outputs.push((t, y.clone()));
                next_out += 1;
            }
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
    }
    // Guarantee the final sample is present.
    if outputs.last().map(|(tt, _)| (tt - duration).abs() > 1e-9 * duration) == Some(true) {
        outputs.push((duration, y));
    }
    Ok(outputs)
}
