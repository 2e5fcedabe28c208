//! Closed-form solutions of the Ermakov equation.
//!
//! For a constant signed squared frequency the equation has an exact
//! Pinney solution built from the two fundamental solutions of the
//! associated linear oscillator. Three branches are kept separate for
//! numerical stability: trigonometric (ω² > 0), hyperbolic (ω² < 0), and
//! the free-flight polynomial limit (ω² = 0).

use super::{apply_delta_kick, ErmakovError, FrequencySchedule, ScalingState, SegmentKind};

/// Time-of-flight scaling factor b_TOF(t) = √(1 + ω₀²t²) after suddenly
/// switching the trap off from equilibrium.
pub fn b_tof(t: f64, omega0: f64) -> f64 {
    (1.0 + (omega0 * t).powi(2)).sqrt()
}

/// Rate of change of [`b_tof`]: ω₀²t/√(1 + ω₀²t²).
pub fn b_tof_dot(t: f64, omega0: f64) -> f64 {
    omega0 * omega0 * t / b_tof(t, omega0)
}

/// Adiabatic scaling factor b_ad = √(ω₀/ω). Undefined for an inverted
/// trap.
pub fn b_adiabatic(omega: f64, omega0: f64) -> Result<f64, ErmakovError> {
    if omega <= 0.0 {
        return Err(ErmakovError::Domain(format!(
            "adiabatic scaling factor needs omega > 0, got {omega}"
        )));
    }
    Ok((omega0 / omega).sqrt())
}

/// Exact constant-frequency evolution of (b, ḃ) over an elapsed time `s`
/// from initial data (b₀, ḃ₀), for signed `omega_sq`:
///
/// * ω² > 0: b = √[(b₀cos ωs + (ḃ₀/ω)sin ωs)² + (ω₀/(b₀ω))² sin² ωs]
/// * ω² < 0: the same with cosh/sinh and ω → ω_I = √(−ω²)
/// * ω² = 0: b = √[(b₀ + ḃ₀s)² + (ω₀/b₀)² s²]
///
/// The derivative is returned analytically. Requires b₀ > 0.
pub fn b_const_freq(s: f64, b0: f64, b0_dot: f64, omega_sq: f64, omega0: f64) -> (f64, f64) {
    debug_assert!(b0 > 0.0);
    if omega_sq > 0.0 {
        let w = omega_sq.sqrt();
        let (sin, cos) = (w * s).sin_cos();
        let u = b0 * cos + b0_dot / w * sin;
        let u_dot = -b0 * w * sin + b0_dot * cos;
        let q = omega0 / (b0 * w);
        let b = (u * u + (q * sin).powi(2)).sqrt();
        let b_dot = (u * u_dot + q * q * w * sin * cos) / b;
        (b, b_dot)
    } else if omega_sq < 0.0 {
        let w = (-omega_sq).sqrt();
        let sh = (w * s).sinh();
        let ch = (w * s).cosh();
        let u = b0 * ch + b0_dot / w * sh;
        let u_dot = b0 * w * sh + b0_dot * ch;
        let q = omega0 / (b0 * w);
        let b = (u * u + (q * sh).powi(2)).sqrt();
        let b_dot = (u * u_dot + q * q * w * sh * ch) / b;
        (b, b_dot)
    } else {
        let u = b0 + b0_dot * s;
        let q = omega0 / b0;
        let b = (u * u + (q * s).powi(2)).sqrt();
        let b_dot = (u * b0_dot + q * q * s) / b;
        (b, b_dot)
    }
}

/// Backward-propagated scaling factor for a confining trap: the solution
/// with b(t_F) = b_F, ḃ(t_F) = 0 evaluated at `t <= t_F`:
/// b(t) = √[b_F² + ((ω₀/(b_Fω))² − b_F²) sin²(ω(t − t_F))].
pub fn b_const_freq_backward(t: f64, b_f: f64, omega: f64, t_f: f64, omega0: f64) -> f64 {
    debug_assert!(omega > 0.0 && b_f > 0.0);
    let s = (omega * (t - t_f)).sin();
    (b_f * b_f + ((omega0 / (b_f * omega)).powi(2) - b_f * b_f) * s * s).sqrt()
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    t_start: f64,
    t_end: f64,
    b0: f64,
    b0_dot: f64,
    omega_sq: f64,
}

/// Exact piecewise Pinney solution of a piecewise-constant schedule with
/// embedded kicks, built analytically segment by segment (no numerical
/// integration anywhere).
#[derive(Debug, Clone)]
pub struct PiecewiseClosedForm {
    pieces: Vec<Piece>,
    omega0: f64,
    final_state: ScalingState,
}

impl PiecewiseClosedForm {
    /// Fails with [`ErmakovError::SmoothSegmentUnsupported`] if the
    /// schedule contains non-constant segments.
    pub fn new(
        schedule: &FrequencySchedule,
        initial: ScalingState,
    ) -> Result<Self, ErmakovError> {
        schedule.validate()?;
        if initial.b <= 0.0 {
            return Err(ErmakovError::SingularState {
                t: initial.t,
                b: initial.b,
                floor: 0.0,
            });
        }
        let omega0 = schedule.omega0;
        let mut pieces = Vec::new();
        let mut state = initial;
        let mut kicks = schedule.kicks.iter().copied().peekable();

        // Kicks exactly at the start of the schedule.
        while let Some(&(tk, kick)) = kicks.peek() {
            if tk <= 0.0 {
                state = apply_delta_kick(state, kick);
                kicks.next();
            } else {
                break;
            }
        }

        let mut seg_start = 0.0;
        for seg in &schedule.segments {
            let SegmentKind::Constant { omega_sq } = seg.kind else {
                return Err(ErmakovError::SmoothSegmentUnsupported);
            };
            let seg_end = seg_start + seg.duration;
            let mut span_start = seg_start;
            loop {
                let next_kick = kicks.peek().copied().filter(|&(tk, _)| tk <= seg_end);
                let span_end = next_kick.map_or(seg_end, |(tk, _)| tk);
                if span_end > span_start {
                    pieces.push(Piece {
                        t_start: initial.t + span_start,
                        t_end: initial.t + span_end,
                        b0: state.b,
                        b0_dot: state.b_dot,
                        omega_sq,
                    });
                    let (b, b_dot) =
                        b_const_freq(span_end - span_start, state.b, state.b_dot, omega_sq, omega0);
                    state = ScalingState {
                        b,
                        b_dot,
                        t: initial.t + span_end,
                    };
                }
                match next_kick {
                    Some((_, kick)) => {
                        state = apply_delta_kick(state, kick);
                        kicks.next();
                        span_start = span_end;
                        if span_end >= seg_end {
                            break;
                        }
                    }
                    None => break,
                }
            }
            seg_start = seg_end;
        }
        state.t = initial.t + schedule.total_duration();

        Ok(Self {
            pieces,
            omega0,
            final_state: state,
        })
    }

    /// Evaluate (b, ḃ) at absolute time `t`, clamped to the covered span.
    pub fn eval(&self, t: f64) -> (f64, f64) {
        if self.pieces.is_empty() {
            return (self.final_state.b, self.final_state.b_dot);
        }
        // Last piece whose start is <= t; ties at internal boundaries
        // resolve to the later piece (post-kick state).
        let idx = match self
            .pieces
            .partition_point(|p| p.t_start <= t)
        {
            0 => 0,
            k => k - 1,
        };
        let p = self.pieces[idx];
        let s = (t - p.t_start).clamp(0.0, p.t_end - p.t_start);
        b_const_freq(s, p.b0, p.b0_dot, p.omega_sq, self.omega0)
    }

    pub fn final_state(&self) -> ScalingState {
        self.final_state
    }
}
