//! Independent verification layer: invariant-drift audits, closed-form
//! vs numeric diffs, and a seeded classical Monte Carlo ensemble.
//!
//! The ensemble integrates Hamilton's equations ṙ = p, ṗ = −ω²(t)r for
//! every sample — not the Ermakov equation — so it is a structurally
//! different code path from everything it checks. Sampling is
//! reproducible: ChaCha8 keyed by a 64-bit seed, one counter stream per
//! sample index, Gaussian draws by the Box–Muller transform (fixed
//! stream length, no rejection). Parallel and serial runs produce
//! bitwise-identical results because per-sample streams are independent
//! and the moment accumulation is done serially in index order.

use rand_chacha::rand_core::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::ermakov::{
    ermakov_invariant, ermakov_invariant_scale, integrate, ErmakovError, FrequencySchedule,
    IntegratorConfig, PiecewiseClosedForm, ScalingState, Trajectory,
};
use crate::ode::{integrate_span, OdeError, StepControl};
use crate::phasespace::{
    evolve, map_from_scaling_state, GaussianState, PhaseSpaceError,
};
use crate::protocol::ProtocolSpec;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error(transparent)]
    Ermakov(#[from] ErmakovError),
    #[error(transparent)]
    PhaseSpace(#[from] PhaseSpaceError),
    #[error("sample {index} diverged (non-finite phase-space point) near t = {t:.6}")]
    SampleOverflow { index: usize, t: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Paper-printed variant of the δ-STA terminal trap frequency (the form
/// with b_F³ in the correction's numerator). Kept only for side-by-side
/// comparison with the ansatz-derived
/// [`crate::protocol::delta_sta_terminal_omega_sq`]; protocols never use
/// it.
pub fn delta_sta_terminal_omega_sq_printed(omega0: f64, b_f: f64, t_k: f64, n: u32) -> f64 {
    let nf = n as f64;
    (omega0 / (b_f * b_f)).powi(2) - nf * (nf + 1.0) * (b_f - 1.0) * b_f.powi(3) / (t_k * t_k)
}

/// Maximum relative Ermakov-invariant drift over one trajectory piece.
/// Kicks and segment switches legitimately reset the reference; smooth
/// segments (where α is not conserved) are skipped.
pub fn invariant_drift_per_piece(trajectory: &Trajectory) -> Vec<f64> {
    let omega0 = trajectory.omega0;
    let mut out = Vec::new();
    for piece in &trajectory.pieces {
        let Some(omega_sq) = piece.constant_omega_sq else {
            continue;
        };
        let start = ScalingState {
            b: piece.b_start,
            b_dot: piece.b_dot_start,
            t: piece.t_start,
        };
        let alpha_ref = ermakov_invariant(&start, omega_sq, omega0);
        // Normalize by the invariant's term scale: α is a cancellation
        // of terms that grow like b² on expanding segments, so dividing
        // by |α_ref| alone would measure nothing but f64 rounding of
        // the evaluation once b is large. For confining segments all
        // terms are positive and this is exactly |α(segment start)|.
        let norm_ref = alpha_ref
            .abs()
            .max(ermakov_invariant_scale(&start, omega_sq, omega0));
        let mut worst: f64 = 0.0;
        for sample in &trajectory.samples[piece.first_sample..piece.last_sample] {
            let here = ScalingState {
                b: sample.b,
                b_dot: sample.b_dot,
                t: sample.t,
            };
            let alpha = ermakov_invariant(&here, omega_sq, omega0);
            let norm = norm_ref.max(ermakov_invariant_scale(&here, omega_sq, omega0));
            worst = worst.max((alpha - alpha_ref).abs() / norm);
        }
        out.push(worst);
    }
    out
}

/// Maximum relative invariant drift over all constant-ω² pieces.
pub fn check_invariant_drift(trajectory: &Trajectory) -> f64 {
    invariant_drift_per_piece(trajectory)
        .into_iter()
        .fold(0.0, f64::max)
}

/// Integrate the schedule numerically and evaluate the piecewise Pinney
/// solution at every sample (at least 100 per segment); returns the
/// maximum relative |Δb|. Fails on schedules with smooth segments.
pub fn compare_closed_form(
    schedule: &FrequencySchedule,
    initial: ScalingState,
    config: &IntegratorConfig,
) -> Result<f64, VerifyError> {
    let closed = PiecewiseClosedForm::new(schedule, initial)?;
    let dense = config.dense(config.min_samples_per_segment.max(110));
    let trajectory = integrate(schedule, initial, &dense)?;
    let mut worst: f64 = 0.0;
    for sample in &trajectory.samples {
        let (b_closed, _) = closed.eval(sample.t);
        worst = worst.max((sample.b - b_closed).abs() / b_closed);
    }
    Ok(worst)
}

/// Reproducible ensemble settings. RNG algorithm: ChaCha8, a
/// counter-based generator keyed by the 64-bit `seed`; sample i draws
/// from stream i, so the stream is fully determined by
/// (`seed`, `n_samples`) and is identical in serial and parallel runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl EnsembleConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
        }
    }
}

/// Empirical second moments (about zero — the states are zero-mean by
/// construction) with jackknife standard errors over 20 blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalCovariance {
    pub sigma_rr: f64,
    pub sigma_rp: f64,
    pub sigma_pp: f64,
    pub se_rr: f64,
    pub se_rp: f64,
    pub se_pp: f64,
    pub n_samples: usize,
}

impl EmpiricalCovariance {
    pub fn det(&self) -> f64 {
        self.sigma_rr * self.sigma_pp - self.sigma_rp * self.sigma_rp
    }
}

const JACKKNIFE_BLOCKS: usize = 20;

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    const SCALE: f64 = 1.0 / 9_007_199_254_740_992.0; // 2^-53
    let u1 = ((rng.next_u64() >> 11) as f64 + 1.0) * SCALE; // (0, 1]
    let u2 = (rng.next_u64() >> 11) as f64 * SCALE; // [0, 1)
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = std::f64::consts::TAU * u2;
    (radius * angle.cos(), radius * angle.sin())
}

/// Draw the phase-space point for sample `index` from the initial
/// Gaussian via its Cholesky factor.
fn draw_sample(initial: &GaussianState, seed: u64, index: usize) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let (z1, z2) = gaussian_pair(&mut rng);
    let l11 = initial.sigma_rr.sqrt();
    let l21 = initial.sigma_rp / l11;
    let l22 = (initial.sigma_pp - initial.sigma_rp * initial.sigma_rp / initial.sigma_rr).sqrt();
    (l11 * z1, l21 * z1 + l22 * z2)
}

/// Hamilton's equations through the schedule for one phase-space point,
/// with kick maps p → p − κr at the kick times.
fn propagate_point(
    schedule: &FrequencySchedule,
    mut r: f64,
    mut p: f64,
    ctrl: &StepControl,
) -> Result<(f64, f64), OdeError> {
    let omega0 = schedule.omega0;
    let mut kicks = schedule.kicks.iter().copied().peekable();
    while let Some(&(tk, kick)) = kicks.peek() {
        if tk <= 0.0 {
            p -= kick.kappa * r;
            kicks.next();
        } else {
            break;
        }
    }
    let mut seg_start = 0.0;
    for seg in &schedule.segments {
        let seg_end = seg_start + seg.duration;
        let mut span_start = seg_start;
        loop {
            let next_kick = kicks.peek().copied().filter(|&(tk, _)| tk <= seg_end);
            let span_end = next_kick.map_or(seg_end, |(tk, _)| tk);
            if span_end > span_start {
                let rhs = |t: f64, y: &[f64; 2]| {
                    let w2 = seg.omega_sq_at(t - seg_start, omega0);
                    [y[1], -w2 * y[0]]
                };
                let y = integrate_span(rhs, span_start, [r, p], span_end, ctrl, |_, _| true)?;
                r = y[0];
                p = y[1];
            }
            match next_kick {
                Some((_, kick)) => {
                    p -= kick.kappa * r;
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
    Ok((r, p))
}

/// Draw `n_samples` points from the initial Gaussian, push each through
/// Hamilton's equations for the schedule, and return the empirical
/// covariance with jackknife standard errors. Fixed (seed, config) gives
/// a bitwise-identical result, in parallel or serial.
pub fn ensemble_propagate(
    schedule: &FrequencySchedule,
    initial: &GaussianState,
    config: &EnsembleConfig,
) -> Result<EmpiricalCovariance, VerifyError> {
    if config.n_samples < 2 {
        return Err(VerifyError::Config(format!(
            "ensemble needs at least 2 samples, got {}",
            config.n_samples
        )));
    }
    schedule.validate().map_err(VerifyError::Ermakov)?;
    let ctrl = StepControl {
        rel_tol: config.rel_tol,
        abs_tol: config.abs_tol,
        ..StepControl::default()
    };

    let points: Vec<(f64, f64)> = (0..config.n_samples)
        .into_par_iter()
        .map(|i| {
            let (r0, p0) = draw_sample(initial, config.seed, i);
            propagate_point(schedule, r0, p0, &ctrl).map_err(|e| {
                let t = match e {
                    OdeError::NonFinite { t }
                    | OdeError::StepSizeUnderflow { t }
                    | OdeError::StepBudgetExhausted { t }
                    | OdeError::Aborted { t } => t,
                };
                VerifyError::SampleOverflow { index: i, t }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    for (i, &(r, p)) in points.iter().enumerate() {
        if !r.is_finite() || !p.is_finite() {
            return Err(VerifyError::SampleOverflow {
                index: i,
                t: schedule.total_duration(),
            });
        }
    }

    // Serial accumulation in index order keeps results bitwise stable.
    let n = config.n_samples;
    let blocks = JACKKNIFE_BLOCKS.min(n);
    let mut block_sums = vec![[0.0f64; 3]; blocks];
    let mut block_counts = vec![0usize; blocks];
    for (i, &(r, p)) in points.iter().enumerate() {
        let blk = i * blocks / n;
        block_sums[blk][0] += r * r;
        block_sums[blk][1] += r * p;
        block_sums[blk][2] += p * p;
        block_counts[blk] += 1;
    }
    let mut total = [0.0f64; 3];
    for sums in &block_sums {
        for k in 0..3 {
            total[k] += sums[k];
        }
    }
    let mean = [
        total[0] / n as f64,
        total[1] / n as f64,
        total[2] / n as f64,
    ];

    // Jackknife over leave-one-block-out estimates.
    let mut se = [0.0f64; 3];
    for k in 0..3 {
        let theta: Vec<f64> = (0..blocks)
            .map(|j| (total[k] - block_sums[j][k]) / (n - block_counts[j]) as f64)
            .collect();
        let theta_bar = theta.iter().sum::<f64>() / blocks as f64;
        let var = theta
            .iter()
            .map(|t| (t - theta_bar).powi(2))
            .sum::<f64>()
            * (blocks as f64 - 1.0)
            / blocks as f64;
        se[k] = var.sqrt();
    }

    Ok(EmpiricalCovariance {
        sigma_rr: mean[0],
        sigma_rp: mean[1],
        sigma_pp: mean[2],
        se_rr: se[0],
        se_rp: se[1],
        se_pp: se[2],
        n_samples: n,
    })
}

/// Pass/fail thresholds for [`verify_protocol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub b_residual: f64,
    pub b_dot_residual: f64,
    pub invariant_drift: f64,
    /// Ensemble gate in combined standard errors.
    pub ensemble_sigmas: f64,
    pub stationarity_periods: u32,
    pub stationarity_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            b_residual: 1e-6,
            b_dot_residual: 1e-6,
            invariant_drift: 1e-9,
            ensemble_sigmas: 5.0,
            stationarity_periods: 10,
            stationarity_tol: 1e-6,
        }
    }
}

/// One named check inside a report.
#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Structured verification outcome; serializes to one `criterion` line
/// per check.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub protocol: String,
    pub final_b_error: f64,
    pub final_b_dot_residual: f64,
    pub max_invariant_drift: f64,
    pub stationarity_error: f64,
    pub oracle_covariance_error: Option<f64>,
    pub criteria: Vec<CriterionResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    /// Key: value serialization, one criterion per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("trapctl-verification-report v1\n");
        out.push_str(&format!("protocol: {}\n", self.protocol));
        for c in &self.criteria {
            out.push_str(&format!(
                "criterion {}: value {:.10e} threshold {:.10e} pass {}\n",
                c.name, c.value, c.threshold, c.pass
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.passed() { "pass" } else { "fail" }
        ));
        out
    }
}

/// Optional Monte Carlo leg of [`verify_protocol`]. The initial state
/// must be stationary in the reference trap (σ_rp = 0, σ_pp = ω₀²σ_rr):
/// the scale-invariant transport predicts covariances only for such
/// inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleCheck {
    pub initial: GaussianState,
    pub config: EnsembleConfig,
}

/// Forward-integrate a designed protocol and check it lands on its
/// predicted final state, conserves the invariant per segment, and stays
/// put for `stationarity_periods` of the final trap. Optionally compares
/// the symplectic covariance prediction against the Monte Carlo
/// ensemble. Pure function of its inputs: identical inputs give
/// identical reports.
pub fn verify_protocol(
    spec: &ProtocolSpec,
    thresholds: &Thresholds,
    integrator: &IntegratorConfig,
    ensemble: Option<&EnsembleCheck>,
) -> Result<VerificationReport, VerifyError> {
    let traj = integrate(&spec.schedule, ScalingState::initial(), integrator)?;
    let fin = traj.final_state();
    let final_b_error = (fin.b - spec.predicted_final.b).abs();
    let final_b_dot_residual = (fin.b_dot - spec.predicted_final.b_dot).abs();
    let mut max_drift = check_invariant_drift(&traj);

    // Hold in the final trap for the stationarity window.
    let omega_final_sq = spec.schedule.omega_final_sq;
    let stationarity_error = if omega_final_sq > 0.0 && thresholds.stationarity_periods > 0 {
        let period = std::f64::consts::TAU / omega_final_sq.sqrt();
        let mut hold = FrequencySchedule::new(spec.schedule.omega0, omega_final_sq);
        hold.push_segment(crate::ermakov::SegmentLaw::constant(
            omega_final_sq,
            thresholds.stationarity_periods as f64 * period,
        ));
        let hold_traj = integrate(&hold, fin, &integrator.dense(256))?;
        max_drift = max_drift.max(check_invariant_drift(&hold_traj));
        hold_traj
            .samples
            .iter()
            .map(|s| (s.b - spec.predicted_final.b).abs())
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    let mut criteria = vec![
        CriterionResult {
            name: "final_b_error".into(),
            value: final_b_error,
            threshold: thresholds.b_residual,
            pass: final_b_error <= thresholds.b_residual,
        },
        CriterionResult {
            name: "final_b_dot_residual".into(),
            value: final_b_dot_residual,
            threshold: thresholds.b_dot_residual,
            pass: final_b_dot_residual <= thresholds.b_dot_residual,
        },
        CriterionResult {
            name: "invariant_drift".into(),
            value: max_drift,
            threshold: thresholds.invariant_drift,
            pass: max_drift <= thresholds.invariant_drift,
        },
        CriterionResult {
            name: "stationarity".into(),
            value: stationarity_error,
            threshold: thresholds.stationarity_tol,
            pass: stationarity_error <= thresholds.stationarity_tol,
        },
    ];

    let mut oracle_covariance_error = None;
    if let Some(check) = ensemble {
        let omega0 = spec.schedule.omega0;
        let init = &check.initial;
        let stationary = init.sigma_rp == 0.0
            && (init.sigma_pp / init.sigma_rr - omega0 * omega0).abs() <= 1e-9 * omega0 * omega0;
        if !stationary {
            return Err(VerifyError::Config(
                "ensemble comparison requires an initial state stationary at omega0 \
                 (sigma_rp = 0, sigma_pp = omega0^2 sigma_rr)"
                    .into(),
            ));
        }
        let predicted = evolve(init, &map_from_scaling_state(&fin))?;
        let empirical = ensemble_propagate(&spec.schedule, init, &check.config)?;
        let distances = [
            (empirical.sigma_rr - predicted.sigma_rr).abs() / empirical.se_rr,
            (empirical.sigma_rp - predicted.sigma_rp).abs() / empirical.se_rp,
            (empirical.sigma_pp - predicted.sigma_pp).abs() / empirical.se_pp,
        ];
        let worst = distances.into_iter().fold(0.0, f64::max);
        oracle_covariance_error = Some(worst);
        criteria.push(CriterionResult {
            name: "ensemble_covariance_sigmas".into(),
            value: worst,
            threshold: thresholds.ensemble_sigmas,
            pass: worst <= thresholds.ensemble_sigmas,
        });
    }

    Ok(VerificationReport {
        protocol: spec.label().to_string(),
        final_b_error,
        final_b_dot_residual,
        max_invariant_drift: max_drift,
        stationarity_error,
        oracle_covariance_error,
        criteria,
    })
}
