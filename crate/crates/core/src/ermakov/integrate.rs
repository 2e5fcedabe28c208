//! Adaptive integration of the Ermakov equation over a schedule.
//!
//! The integrator steps segment by segment, landing exactly on segment
//! boundaries and kick times (discontinuous ω²(t) invalidates step
//! interpolation). δ-kicks are applied as exact maps on (b, ḃ) between
//! spans, never resolved as narrow pulses inside the stepper.

use super::{
    apply_delta_kick, ermakov_invariant, ErmakovError, FrequencySchedule, ScalingState,
    SegmentKind, Trajectory, TrajectoryEvent, TrajectoryPiece, TrajectorySample,
};
use crate::ode::{integrate_span, OdeError, StepControl};

/// Tolerances and safeguards for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Crossing this floor is an error, not a clamp: the ω₀²/b³ term is
    /// singular and silent clamping would corrupt results.
    pub b_floor: f64,
    pub max_step: f64,
    pub max_steps_per_segment: usize,
    /// When nonzero, forces at least this many accepted steps per
    /// segment (dense output for closed-form comparisons and plots).
    pub min_samples_per_segment: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            b_floor: 1e-9,
            max_step: f64::INFINITY,
            max_steps_per_segment: 2_000_000,
            min_samples_per_segment: 0,
        }
    }
}

impl IntegratorConfig {
    /// Config with the given relative tolerance and a matching absolute
    /// tolerance two decades tighter.
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol: rel_tol * 1e-2,
            ..Self::default()
        }
    }

    pub fn dense(mut self, min_samples_per_segment: usize) -> Self {
        self.min_samples_per_segment = min_samples_per_segment;
        self
    }
}

/// Adaptive integration of the Ermakov equation through `schedule`,
/// starting from `initial`. Schedule times are relative to `initial.t`.
/// Records every accepted step, all boundary events, and the Ermakov
/// constant at each sample.
pub fn integrate(
    schedule: &FrequencySchedule,
    initial: ScalingState,
    config: &IntegratorConfig,
) -> Result<Trajectory, ErmakovError> {
    schedule.validate()?;
    if initial.b <= config.b_floor {
        return Err(ErmakovError::SingularState {
            t: initial.t,
            b: initial.b,
            floor: config.b_floor,
        });
    }

    let omega0 = schedule.omega0;
    let mut traj = Trajectory::new(omega0);
    let mut state = initial;
    let mut kicks = schedule.kicks.iter().copied().peekable();

    let first_omega_sq = schedule
        .segments
        .first()
        .map_or(schedule.omega_final_sq, |seg| seg.omega_sq_at(0.0, omega0));
    traj.samples.push(TrajectorySample {
        t: state.t,
        b: state.b,
        b_dot: state.b_dot,
        omega_sq: first_omega_sq,
    });
    traj.alpha_log
        .push(ermakov_invariant(&state, first_omega_sq, omega0));

    // Kicks at the very start of the schedule.
    while let Some(&(tk, kick)) = kicks.peek() {
        if tk <= 0.0 {
            let before = state.b_dot;
            state = apply_delta_kick(state, kick);
            traj.events.push(TrajectoryEvent::Kick {
                t: state.t,
                kappa: kick.kappa,
                b: state.b,
                b_dot_before: before,
                b_dot_after: state.b_dot,
            });
            kicks.next();
        } else {
            break;
        }
    }

    let mut seg_start = 0.0;
    for (segment_index, seg) in schedule.segments.iter().enumerate() {
        if segment_index > 0 {
            traj.events.push(TrajectoryEvent::SegmentSwitch {
                t: initial.t + seg_start,
                segment_index,
            });
        }
        let seg_end = seg_start + seg.duration;
        let constant_omega_sq = match seg.kind {
            SegmentKind::Constant { omega_sq } => Some(omega_sq),
            _ => None,
        };
        let mut max_step = config.max_step;
        if config.min_samples_per_segment > 0 && seg.duration > 0.0 {
            max_step = max_step.min(seg.duration / config.min_samples_per_segment as f64);
        }
        let ctrl = StepControl {
            rel_tol: config.rel_tol,
            abs_tol: config.abs_tol,
            max_step,
            max_steps: config.max_steps_per_segment,
        };

        let mut span_start = seg_start;
        loop {
            let next_kick = kicks.peek().copied().filter(|&(tk, _)| tk <= seg_end);
            let span_end = next_kick.map_or(seg_end, |(tk, _)| tk);

            if span_end > span_start {
                let piece_first_sample = traj.samples.len();
                let piece = TrajectoryPiece {
                    t_start: initial.t + span_start,
                    t_end: initial.t + span_end,
                    b_start: state.b,
                    b_dot_start: state.b_dot,
                    constant_omega_sq,
                    first_sample: piece_first_sample,
                    last_sample: piece_first_sample,
                };

                let seg_origin = initial.t + seg_start;
                let rhs = |t: f64, y: &[f64; 2]| {
                    let s = t - seg_origin;
                    let w2 = seg.omega_sq_at(s, omega0);
                    let b = y[0];
                    [y[1], omega0 * omega0 / (b * b * b) - w2 * b]
                };

                let mut floor_hit: Option<(f64, f64)> = None;
                let result = integrate_span(
                    rhs,
                    initial.t + span_start,
                    [state.b, state.b_dot],
                    initial.t + span_end,
                    &ctrl,
                    |t, y| {
                        if y[0] < config.b_floor {
                            floor_hit = Some((t, y[0]));
                            return false;
                        }
                        let w2 = seg.omega_sq_at(t - seg_origin, omega0);
                        traj.samples.push(TrajectorySample {
                            t,
                            b: y[0],
                            b_dot: y[1],
                            omega_sq: w2,
                        });
                        traj.alpha_log.push(ermakov_invariant(
                            &ScalingState {
                                b: y[0],
                                b_dot: y[1],
                                t,
                            },
                            w2,
                            omega0,
                        ));
                        true
                    },
                );

                let y_end = match result {
                    Ok(y) => y,
                    Err(OdeError::Aborted { t }) => {
                        let (t, b) = floor_hit.unwrap_or((t, f64::NAN));
                        return Err(ErmakovError::SingularState {
                            t,
                            b,
                            floor: config.b_floor,
                        });
                    }
                    Err(OdeError::NonFinite { t }) => {
                        return Err(ErmakovError::NumericOverflow { t })
                    }
                    Err(OdeError::StepSizeUnderflow { t }) => {
                        return Err(ErmakovError::StepSizeUnderflow { t })
                    }
                    Err(OdeError::StepBudgetExhausted { t }) => {
                        return Err(ErmakovError::StepBudgetExhausted { t })
                    }
                };
                state = ScalingState {
                    b: y_end[0],
                    b_dot: y_end[1],
                    t: initial.t + span_end,
                };
                let mut piece = piece;
                piece.last_sample = traj.samples.len();
                traj.pieces.push(piece);
            }

            match next_kick {
                Some((tk, kick)) => {
                    let before = state.b_dot;
                    state = apply_delta_kick(state, kick);
                    traj.events.push(TrajectoryEvent::Kick {
                        t: initial.t + tk,
                        kappa: kick.kappa,
                        b: state.b,
                        b_dot_before: before,
                        b_dot_after: state.b_dot,
                    });
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
    traj.set_final_state(state);
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ermakov::{b_const_freq, b_tof, SegmentLaw};

    fn free_flight(duration: f64) -> FrequencySchedule {
        let mut s = FrequencySchedule::new(1.0, 1.0);
        s.push_segment(SegmentLaw::constant(0.0, duration));
        s
    }

    #[test]
    fn free_segment_reaches_sqrt_two() {
        let traj = integrate(
            &free_flight(1.0),
            ScalingState::initial(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let fin = traj.final_state();
        assert!((fin.b - 2.0f64.sqrt()).abs() < 1e-9, "b = {}", fin.b);
        assert!((fin.b_dot - 1.0 / 2.0f64.sqrt()).abs() < 1e-9);
        assert_eq!(fin.t, 1.0);
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let mut sched = FrequencySchedule::new(1.0, 1.0);
        sched.push_segment(SegmentLaw::constant(1.0, 7.0));
        let traj = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        for s in &traj.samples {
            assert!((s.b - 1.0).abs() < 1e-10);
            assert!(s.b_dot.abs() < 1e-10);
        }
    }

    #[test]
    fn inverted_segment_matches_closed_form() {
        // Frozen from the closed-form expansion law:
        // b(1) = √(1 + 2 sinh²(1)) = 1.93963803094382303…
        let mut sched = FrequencySchedule::new(1.0, 1.0);
        sched.push_segment(SegmentLaw::constant(-1.0, 1.0));
        let traj = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let expected = (1.0 + 2.0 * 1.0f64.sinh().powi(2)).sqrt();
        assert!((expected - 1.939_638_030_943_823).abs() < 1e-14);
        assert!(
            (traj.final_state().b - expected).abs() < 1e-9,
            "b = {}",
            traj.final_state().b
        );
    }

    #[test]
    fn kick_at_interior_time_freezes_expansion() {
        let mut sched = FrequencySchedule::new(1.0, 0.25);
        sched.push_segment(SegmentLaw::constant(0.0, 1.0));
        sched.push_segment(SegmentLaw::constant(0.25, 6.0));
        sched.push_kick(1.0, 0.5);
        let traj = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let fin = traj.final_state();
        assert!((fin.b - 2.0f64.sqrt()).abs() < 1e-8, "b = {}", fin.b);
        assert!(fin.b_dot.abs() < 1e-8);
        // One kick event, one segment switch.
        assert_eq!(traj.events.len(), 2);
        assert!(traj
            .events
            .iter()
            .any(|e| matches!(e, TrajectoryEvent::Kick { .. })));
    }

    #[test]
    fn samples_strictly_increasing_and_positive() {
        let mut sched = FrequencySchedule::new(1.0, 0.25);
        sched.push_segment(SegmentLaw::constant(0.0, 1.0));
        sched.push_segment(SegmentLaw::constant(-4.0, 0.3));
        sched.push_segment(SegmentLaw::constant(9.0, 2.0));
        sched.push_kick(1.3, 1.1);
        let traj = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig::default(),
        )
        .unwrap();
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        assert!(traj.samples.iter().all(|s| s.b > 0.0));
        assert_eq!(traj.alpha_log.len(), traj.samples.len());
    }

    #[test]
    fn b_floor_crossing_is_an_error() {
        // A strong attractive pulse drives b through zero.
        let mut sched = FrequencySchedule::new(1.0, 1.0);
        sched.push_segment(SegmentLaw::constant(0.0, 2.0));
        sched.push_segment(SegmentLaw::constant(400.0, 2.0));
        let got = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig {
                b_floor: 0.5,
                ..IntegratorConfig::default()
            },
        );
        match got {
            Err(ErmakovError::SingularState { t, .. }) => assert!(t > 2.0),
            other => panic!("expected singular-state error, got {other:?}"),
        }
    }

    #[test]
    fn long_inverted_evolution_overflows_with_an_error() {
        let mut sched = FrequencySchedule::new(1.0, 1.0);
        sched.push_segment(SegmentLaw::constant(-4.0, 400.0));
        let got = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig::default(),
        );
        assert!(
            matches!(
                got,
                Err(ErmakovError::NumericOverflow { .. })
                    | Err(ErmakovError::StepSizeUnderflow { .. })
            ),
            "{got:?}"
        );
    }

    #[test]
    fn dense_sampling_forces_min_samples() {
        let sched = free_flight(1.0);
        let cfg = IntegratorConfig::default().dense(128);
        let traj = integrate(&sched, ScalingState::initial(), &cfg).unwrap();
        assert!(traj.samples.len() >= 128, "{} samples", traj.samples.len());
    }

    #[test]
    fn numeric_agrees_with_pinney_on_a_mixed_schedule() {
        let mut sched = FrequencySchedule::new(1.0, 1.0);
        sched.push_segment(SegmentLaw::constant(-2.25, 0.8));
        sched.push_segment(SegmentLaw::constant(0.0, 0.5));
        sched.push_segment(SegmentLaw::constant(6.25, 1.1));
        let traj = integrate(
            &sched,
            ScalingState::initial(),
            &IntegratorConfig::default(),
        )
        .unwrap();

        // Chain the closed form by hand.
        let (b1, d1) = b_const_freq(0.8, 1.0, 0.0, -2.25, 1.0);
        let (b2, d2) = b_const_freq(0.5, b1, d1, 0.0, 1.0);
        let (b3, d3) = b_const_freq(1.1, b2, d2, 6.25, 1.0);
        let fin = traj.final_state();
        assert!((fin.b - b3).abs() < 1e-9 * b3, "b {} vs {}", fin.b, b3);
        assert!((fin.b_dot - d3).abs() < 1e-8);
    }

    #[test]
    fn tof_comparison_along_whole_trajectory() {
        let traj = integrate(
            &free_flight(3.0),
            ScalingState::initial(),
            &IntegratorConfig::default().dense(100),
        )
        .unwrap();
        for s in &traj.samples {
            let expected = b_tof(s.t, 1.0);
            assert!((s.b - expected).abs() < 1e-9 * expected);
        }
    }
}
