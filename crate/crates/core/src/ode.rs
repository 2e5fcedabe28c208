//! Embedded Dormand–Prince 5(4) stepper with adaptive step-size control.
//!
//! Shared by the Ermakov integrator and the phase-space ensemble
//! propagator, each driving it with its own right-hand side. Spans end
//! exactly on the requested endpoint so callers can stitch segments with
//! discontinuous coefficients without interpolating across the
//! discontinuity.

use thiserror::Error;

/// Failure modes of a single integration span.
#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum OdeError {
    /// A non-finite value survived step-size reduction.
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    /// The controller pushed the step below resolvable size.
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    /// More accepted+rejected steps than the configured budget.
    #[error("step budget exhausted at t = {t}")]
    StepBudgetExhausted { t: f64 },
    /// The observer asked to stop (state left the admissible region).
    #[error("integration aborted by the observer at t = {t}")]
    Aborted { t: f64 },
}

/// Tolerances and limits for [`integrate_span`].
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; `f64::INFINITY` when unrestricted.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 2_000_000,
        }
    }
}

// Dormand-Prince RK5(4)7M coefficients.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
// Fifth-order weights; also the last stage row (FSAL).
const B5: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// b5 - b4, used for the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, ks: &[&[f64; N]], ws: &[f64]) -> [f64; N] {
    let mut out = *y;
    for (k, w) in ks.iter().zip(ws) {
        for i in 0..N {
            out[i] += h * w * k[i];
        }
    }
    out
}

/// Hairer-style starting step estimate.
fn initial_step<const N: usize>(
    rhs: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    span: f64,
    ctrl: &StepControl,
) -> f64 {
    let sc: Vec<f64> = y0
        .iter()
        .map(|&y| ctrl.abs_tol + ctrl.rel_tol * y.abs())
        .collect();
    let rms = |v: &[f64; N]| -> f64 {
        let s: f64 = v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum();
        (s / N as f64).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = axpy(y0, h0, &[f0], &[1.0]);
    let f1 = rhs(t0 + h0, &y1);
    let mut diff = [0.0; N];
    for i in 0..N {
        diff[i] = f1[i] - f0[i];
    }
    let d2 = rms(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span).min(ctrl.max_step)
}

/// Integrate `dy/dt = rhs(t, y)` from `t0` to `t1 >= t0`, landing exactly
/// on `t1`. The observer sees every accepted step (not the initial
/// point); returning `false` aborts with [`OdeError::Aborted`].
pub fn integrate_span<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    t0: f64,
    y0: [f64; N],
    t1: f64,
    ctrl: &StepControl,
    mut observe: impl FnMut(f64, &[f64; N]) -> bool,
) -> Result<[f64; N], OdeError> {
    debug_assert!(t1 >= t0);
    if t1 <= t0 {
        return Ok(y0);
    }

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(&rhs, t, &y, &k1, t1 - t0, ctrl);
    let mut steps = 0usize;
    let mut just_rejected = false;

    while t < t1 {
        steps += 1;
        if steps > ctrl.max_steps {
            return Err(OdeError::StepBudgetExhausted { t });
        }
        let remaining = t1 - t;
        let mut h_step = h.min(ctrl.max_step);
        let lands_on_end = h_step >= remaining;
        if lands_on_end {
            h_step = remaining;
        }
        if h_step <= t.abs().max(1.0) * 1e-15 {
            return Err(OdeError::StepSizeUnderflow { t });
        }

        let k2 = rhs(t + C[1] * h_step, &axpy(&y, h_step, &[&k1], &A2));
        let k3 = rhs(t + C[2] * h_step, &axpy(&y, h_step, &[&k1, &k2], &A3));
        let k4 = rhs(t + C[3] * h_step, &axpy(&y, h_step, &[&k1, &k2, &k3], &A4));
        let k5 = rhs(t + C[4] * h_step, &axpy(&y, h_step, &[&k1, &k2, &k3, &k4], &A5));
        let k6 = rhs(
            t + C[5] * h_step,
            &axpy(&y, h_step, &[&k1, &k2, &k3, &k4, &k5], &A6),
        );
        let y5 = axpy(&y, h_step, &[&k1, &k2, &k3, &k4, &k5, &k6], &B5);
        let k7 = rhs(t + C[6] * h_step, &y5);

        let finite = y5.iter().all(|v| v.is_finite()) && k7.iter().all(|v| v.is_finite());
        if !finite {
            // Shrink hard; if the step is already tiny, give up.
            if h_step <= t.abs().max(1.0) * 1e-13 {
                return Err(OdeError::NonFinite { t });
            }
            h = h_step * 0.1;
            just_rejected = true;
            continue;
        }

        let mut err_sq = 0.0;
        for i in 0..N {
            let e = h_step
                * (E[0] * k1[i]
                    + E[2] * k3[i]
                    + E[3] * k4[i]
                    + E[4] * k5[i]
                    + E[5] * k6[i]
                    + E[6] * k7[i]);
            let sc = ctrl.abs_tol + ctrl.rel_tol * y[i].abs().max(y5[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            t = if lands_on_end { t1 } else { t + h_step };
            y = y5;
            k1 = k7;
            if !observe(t, &y) {
                return Err(OdeError::Aborted { t });
            }
            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if just_rejected {
                factor = factor.min(1.0);
            }
            just_rejected = false;
            h = h_step * factor;
        } else {
            h = h_step * (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            just_rejected = true;
        }
    }

    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_matches_closed_form() {
        let ctrl = StepControl::default();
        let y = integrate_span(|_t, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 3.0, &ctrl, |_, _| true)
            .unwrap();
        assert!((y[0] - (-3.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator_one_period() {
        let omega = 2.0;
        let ctrl = StepControl::default();
        let period = std::f64::consts::TAU / omega;
        let y = integrate_span(
            |_t, y: &[f64; 2]| [y[1], -omega * omega * y[0]],
            0.0,
            [1.0, 0.0],
            period,
            &ctrl,
            |_, _| true,
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9, "y = {:?}", y);
        assert!(y[1].abs() < 1e-9);
    }

    #[test]
    fn lands_exactly_on_endpoint() {
        let ctrl = StepControl::default();
        let mut last_t = f64::NAN;
        let t1 = std::f64::consts::FRAC_PI_4;
        integrate_span(
            |_t, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            t1,
            &ctrl,
            |t, _| {
                last_t = t;
                true
            },
        )
        .unwrap();
        assert_eq!(last_t, t1);
    }

    #[test]
    fn observer_abort_is_reported() {
        let ctrl = StepControl::default();
        let got = integrate_span(
            |_t, y: &[f64; 1]| [y[0]],
            0.0,
            [1.0],
            10.0,
            &ctrl,
            |_t, y| y[0] < 5.0,
        );
        assert!(matches!(got, Err(OdeError::Aborted { .. })));
    }

    #[test]
    fn max_step_bounds_sample_spacing() {
        let ctrl = StepControl {
            max_step: 0.01,
            ..StepControl::default()
        };
        let mut prev = 0.0;
        let mut max_dt: f64 = 0.0;
        integrate_span(
            |_t, _y: &[f64; 1]| [0.0],
            0.0,
            [1.0],
            1.0,
            &ctrl,
            |t, _| {
                max_dt = max_dt.max(t - prev);
                prev = t;
                true
            },
        )
        .unwrap();
        assert!(max_dt <= 0.01 + 1e-12);
    }

    #[test]
    fn zero_span_is_identity() {
        let ctrl = StepControl::default();
        let y = integrate_span(
            |_t, y: &[f64; 1]| [y[0]],
            2.0,
            [3.5],
            2.0,
            &ctrl,
            |_, _| true,
        )
        .unwrap();
        assert_eq!(y, [3.5]);
    }
}
