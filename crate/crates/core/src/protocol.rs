//! Closed-form construction of every protocol family: exact delta-kick
//! cooling over free flight or an inverted trap, the long-time
//! approximation, positive-frequency bang-bang, constant-nonadiabaticity
//! drives, kick-assisted shortcuts of polynomial order n, and
//! finite-pulse bang-bang — plus the comparison ratios between them.
//!
//! Every constructor targets a stationary final state (b_F, ḃ = 0) of a
//! trap ω_F = ω₀/b_F². Compression targets (b_F < 1) are rejected: the
//! design formulas assume expansion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::ermakov::{b_tof, b_tof_dot, FrequencySchedule, ScalingState, SegmentLaw};

/// Errors from protocol constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("{param} = {value} is outside the valid domain: requires {requirement}")]
    Domain {
        param: &'static str,
        value: f64,
        requirement: &'static str,
    },
    /// Carries the violated inequality so callers can print actionable
    /// bounds (e.g. the minimum usable pulse frequency).
    #[error("infeasible parameters: requires {constraint} (bound {bound:.6}, got {actual:.6})")]
    Infeasible {
        constraint: String,
        bound: f64,
        actual: f64,
    },
}

/// Protocol family tags, stable across the CLI and file formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolFamily {
    DkcFree,
    /// Conventional far-field approximation (κ = 1/t_k); kept as a
    /// negative control — it misses the target at short t_k.
    DkcFreeLongtime,
    DkcInverted,
    BangBangPositive,
    ConstantMu,
    DeltaSta,
    FiniteDkcFree,
    FiniteDkcInverted,
}

impl ProtocolFamily {
    pub const ALL: [ProtocolFamily; 8] = [
        ProtocolFamily::DkcFree,
        ProtocolFamily::DkcFreeLongtime,
        ProtocolFamily::DkcInverted,
        ProtocolFamily::BangBangPositive,
        ProtocolFamily::ConstantMu,
        ProtocolFamily::DeltaSta,
        ProtocolFamily::FiniteDkcFree,
        ProtocolFamily::FiniteDkcInverted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolFamily::DkcFree => "dkc-free",
            ProtocolFamily::DkcFreeLongtime => "dkc-free-longtime",
            ProtocolFamily::DkcInverted => "dkc-inverted",
            ProtocolFamily::BangBangPositive => "bangbang-positive",
            ProtocolFamily::ConstantMu => "constant-mu",
            ProtocolFamily::DeltaSta => "delta-sta",
            ProtocolFamily::FiniteDkcFree => "finite-dkc-free",
            ProtocolFamily::FiniteDkcInverted => "finite-dkc-inverted",
        }
    }
}

impl fmt::Display for ProtocolFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown protocol family `{s}`"))
    }
}

/// A designed protocol: the schedule, the named design scalars that
/// produced it, and the state it is predicted to reach.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSpec {
    pub family: ProtocolFamily,
    pub schedule: FrequencySchedule,
    pub design_params: BTreeMap<String, f64>,
    pub predicted_final: ScalingState,
    /// Formula provenance lines recorded by the constructor.
    pub provenance: Vec<String>,
}

impl ProtocolSpec {
    pub fn label(&self) -> &'static str {
        self.family.name()
    }

    pub fn omega_final(&self) -> f64 {
        self.schedule.omega_final_sq.max(0.0).sqrt()
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect()
}

/// Final trap frequency whose ground state has the width reached at
/// scaling factor b_F: ω_F = ω₀/b_F².
pub fn final_frequency(b_f: f64, omega0: f64) -> Result<f64, ProtocolError> {
    if !(b_f > 0.0) {
        return Err(ProtocolError::Domain {
            param: "b_F",
            value: b_f,
            requirement: "b_F > 0",
        });
    }
    Ok(omega0 / (b_f * b_f))
}

/// Exact pulse strength κ = ḃ/b bringing the cloud to rest in the trap
/// ω₀/b², for any scale-invariant evolution.
pub fn dkc_kick_exact(state: &ScalingState) -> f64 {
    debug_assert!(state.b > 0.0);
    state.b_dot / state.b
}

/// Exact kick strength after free time of flight t_k:
/// κ = ω₀²t_k/(1 + ω₀²t_k²).
pub fn dkc_kick_exact_tof(t_k: f64, omega0: f64) -> f64 {
    omega0 * omega0 * t_k / (1.0 + (omega0 * t_k).powi(2))
}

/// Long-time (far-field) kick condition κ = 1/t_k. Off by a factor of
/// two at t_k = 1/ω₀; agrees with the exact condition only for
/// t_k ≫ 1/ω₀.
pub fn dkc_kick_longtime_tof(t_k: f64) -> Result<f64, ProtocolError> {
    if !(t_k > 0.0) {
        return Err(ProtocolError::Domain {
            param: "t_k",
            value: t_k,
            requirement: "t_k > 0",
        });
    }
    Ok(1.0 / t_k)
}

fn require_expansion(b_f: f64) -> Result<(), ProtocolError> {
    if !(b_f > 1.0) {
        return Err(ProtocolError::Domain {
            param: "b_F",
            value: b_f,
            requirement: "b_F > 1 (free flight cannot compress)",
        });
    }
    Ok(())
}

/// Free-flight DKC: release, expand for t_k = √(b_F² − 1)/ω₀, then kick
/// with κ = ω₀√(b_F² − 1)/b_F² and trap at ω_F = ω₀/b_F².
pub fn design_dkc_free(b_f: f64, omega0: f64) -> Result<ProtocolSpec, ProtocolError> {
    require_expansion(b_f)?;
    let t_k = (b_f * b_f - 1.0).sqrt() / omega0;
    let kappa = omega0 * (b_f * b_f - 1.0).sqrt() / (b_f * b_f);
    let omega_f = omega0 / (b_f * b_f);

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::constant(0.0, t_k));
    schedule.push_kick(t_k, kappa);

    Ok(ProtocolSpec {
        family: ProtocolFamily::DkcFree,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("t_k", t_k),
            ("kappa", kappa),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t_k,
        },
        provenance: vec![
            "t_k = sqrt(b_F^2 - 1)/omega0".into(),
            "kappa = omega0*sqrt(b_F^2 - 1)/b_F^2".into(),
            "omega_F = omega0/b_F^2".into(),
        ],
    })
}

/// Free-flight DKC with the long-time kick κ = 1/t_k instead of the
/// exact one. Misses the target for t_k of order 1/ω₀.
pub fn design_dkc_free_longtime(b_f: f64, omega0: f64) -> Result<ProtocolSpec, ProtocolError> {
    let mut spec = design_dkc_free(b_f, omega0)?;
    let t_k = spec.design_params["t_k"];
    let kappa = dkc_kick_longtime_tof(t_k)?;
    spec.family = ProtocolFamily::DkcFreeLongtime;
    spec.schedule.kicks.clear();
    spec.schedule.push_kick(t_k, kappa);
    spec.design_params.insert("kappa".into(), kappa);
    spec.provenance = vec![
        "t_k = sqrt(b_F^2 - 1)/omega0".into(),
        "kappa = 1/t_k (far-field approximation)".into(),
        "omega_F = omega0/b_F^2".into(),
    ];
    Ok(spec)
}

/// Trap-inversion DKC: quench to ω² = −ω_I², expand for
/// t_k = (1/ω_I)·arcsinh√((b_F²−1)/(ω₀²/ω_I²+1)), then kick with the
/// exact strength
/// κ = (ω_I/2)(ω₀²+ω_I²)sinh(2ω_I t_k)/(ω_I²+(ω₀²+ω_I²)sinh²(ω_I t_k)).
pub fn design_dkc_inverted(
    b_f: f64,
    omega_i: f64,
    omega0: f64,
) -> Result<ProtocolSpec, ProtocolError> {
    require_expansion(b_f)?;
    if !(omega_i > 0.0) {
        return Err(ProtocolError::Domain {
            param: "omega_I",
            value: omega_i,
            requirement: "omega_I > 0",
        });
    }
    let ratio = (omega0 / omega_i).powi(2);
    let t_k = ((b_f * b_f - 1.0) / (ratio + 1.0)).sqrt().asinh() / omega_i;
    let sh = (omega_i * t_k).sinh();
    let kappa = 0.5 * omega_i * (omega0 * omega0 + omega_i * omega_i) * (2.0 * omega_i * t_k).sinh()
        / (omega_i * omega_i + (omega0 * omega0 + omega_i * omega_i) * sh * sh);
    let omega_f = omega0 / (b_f * b_f);

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::constant(-omega_i * omega_i, t_k));
    schedule.push_kick(t_k, kappa);

    Ok(ProtocolSpec {
        family: ProtocolFamily::DkcInverted,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("omega_I", omega_i),
            ("t_k", t_k),
            ("kappa", kappa),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t_k,
        },
        provenance: vec![
            "t_k = arcsinh(sqrt((b_F^2 - 1)/(omega0^2/omega_I^2 + 1)))/omega_I".into(),
            "kappa = (omega_I/2)(omega0^2 + omega_I^2)sinh(2 omega_I t_k) \
             / (omega_I^2 + (omega0^2 + omega_I^2)sinh^2(omega_I t_k))"
                .into(),
            "omega_F = omega0/b_F^2".into(),
        ],
    })
}

/// Positive-frequency bang-bang: quench to the geometric mean
/// ω₁ = √(ω₀ω_F), hold for a quarter period t₁ = π/(2ω₁), then quench to
/// ω_F = ω₁²/ω₀. No kick needed.
pub fn design_bangbang_positive(
    omega0: f64,
    omega_f: f64,
) -> Result<ProtocolSpec, ProtocolError> {
    if !(omega_f > 0.0 && omega_f < omega0) {
        return Err(ProtocolError::Domain {
            param: "omega_F",
            value: omega_f,
            requirement: "0 < omega_F < omega0 (expansion only)",
        });
    }
    let omega1 = (omega0 * omega_f).sqrt();
    let t1 = std::f64::consts::FRAC_PI_2 / omega1;
    let b_f = (omega0 / omega_f).sqrt();

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::constant(omega0 * omega_f, t1));

    Ok(ProtocolSpec {
        family: ProtocolFamily::BangBangPositive,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("omega_1", omega1),
            ("t_1", t1),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t1,
        },
        provenance: vec![
            "omega_1 = sqrt(omega0*omega_F)".into(),
            "t_1 = pi/(2*omega_1)".into(),
        ],
    })
}

/// Shortest stopping time of the constant-μ drive as conventionally
/// quoted: t₁ = ((1 − ω_F/ω₀)/ω_F)·√(1 + 4π²/ln²(ω_F/ω₀)).
pub fn constant_mu_shortest_stop(omega0: f64, omega_f: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let log_ratio = (omega_f / omega0).ln();
    (1.0 - omega_f / omega0) / omega_f * (1.0 + 4.0 * pi * pi / (log_ratio * log_ratio)).sqrt()
}

/// Exact ramp length t_F whose n-th rate-zero lands on its endpoint, so
/// the sudden switch to ω_F leaves the state stationary:
/// t_F(n) = ((N − 1)/(2ω₀))·√(1 + 4n²π²/ln²N) with N = ω₀/ω_F.
///
/// Derived from the closed solution of the ramp (ω ∝ 1/(1 + at) turns
/// the linear oscillator into an Euler equation; ḃ = 0 exactly at
/// ν·ln(1 + at) = nπ with ν = √(ω₀²/a² − ¼), where b = √(ω₀/ω(t))).
pub fn constant_mu_stop_time(omega0: f64, omega_f: f64, n_stop: u32) -> f64 {
    let pi = std::f64::consts::PI;
    let n_ratio = omega0 / omega_f;
    let ln_n = n_ratio.ln();
    let k = n_stop as f64;
    (n_ratio - 1.0) / (2.0 * omega0) * (1.0 + 4.0 * k * k * pi * pi / (ln_n * ln_n)).sqrt()
}

/// Constant-nonadiabaticity drive ω(t) = ω₀t_F/(t_F + (ω₀/ω_F − 1)t),
/// ramping ω₀ → ω_F over t_F with |ω̇|/ω² = μ = (1 − ω_F/ω₀)/(ω_F t_F)
/// held fixed. Returns the protocol, μ, and the shortest stopping time
/// t₁ at which ḃ = 0 and b = √(ω₀/ω_F) (choose t_F = t₁ to land
/// stationary).
pub fn design_constant_mu(
    omega0: f64,
    omega_f: f64,
    t_f: f64,
) -> Result<(ProtocolSpec, f64, f64), ProtocolError> {
    if !(omega_f > 0.0 && omega_f < omega0) {
        return Err(ProtocolError::Domain {
            param: "omega_F",
            value: omega_f,
            requirement: "0 < omega_F < omega0",
        });
    }
    if !(t_f > 0.0) {
        return Err(ProtocolError::Domain {
            param: "t_F",
            value: t_f,
            requirement: "t_F > 0",
        });
    }
    let mu = (1.0 - omega_f / omega0) / (omega_f * t_f);
    let t1 = constant_mu_shortest_stop(omega0, omega_f);
    let b_f = (omega0 / omega_f).sqrt();

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::constant_mu(omega0 / omega_f, t_f));

    let spec = ProtocolSpec {
        family: ProtocolFamily::ConstantMu,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("t_F", t_f),
            ("mu", mu),
            ("t_1", t1),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t_f,
        },
        provenance: vec![
            "omega(t) = omega0*t_F/(t_F + (omega0/omega_F - 1)t)".into(),
            "mu = (1 - omega_F/omega0)/(omega_F*t_F)".into(),
            "t_1 = ((1 - omega_F/omega0)/omega_F)*sqrt(1 + 4 pi^2/ln^2(omega_F/omega0))".into(),
        ],
    };
    Ok((spec, mu, t1))
}

/// Time-gain ratio of the shortest constant-μ stop over free-flight DKC
/// as a function of N = ω₀/ω_F:
/// t₁/t_F^DKC = √((N − 1)(1 + 4π²/ln²N)).
pub fn adiabatic_gain_ratio(n: f64) -> Result<f64, ProtocolError> {
    if !(n > 1.0) {
        return Err(ProtocolError::Domain {
            param: "N",
            value: n,
            requirement: "N > 1",
        });
    }
    let pi = std::f64::consts::PI;
    let ln_n = n.ln();
    Ok(((n - 1.0) * (1.0 + 4.0 * pi * pi / (ln_n * ln_n))).sqrt())
}

/// Golden-section search for the minimum of a unimodal scalar function.
fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let xm = 0.5 * (a + b);
    (xm, f(xm))
}

/// Minimizer of [`adiabatic_gain_ratio`] over a bracket, by
/// golden-section search to 1e-6 in N. Returns (N*, ratio*).
pub fn adiabatic_gain_minimum_on(a: f64, b: f64) -> (f64, f64) {
    debug_assert!(a > 1.0 && b > a);
    golden_section_min(|n| adiabatic_gain_ratio(n).unwrap(), a, b, 1e-6)
}

/// Minimizer of the gain ratio on the default bracket [1.01, 100].
pub fn adiabatic_gain_minimum() -> (f64, f64) {
    adiabatic_gain_minimum_on(1.01, 100.0)
}

/// Terminal trap frequency squared of the δ-STA law, from the ansatz:
/// ω(t_k)² = ω₀²/b_F⁴ − n(n+1)(b_F−1)/(t_k²·b_F).
pub fn delta_sta_terminal_omega_sq(omega0: f64, b_f: f64, t_k: f64, n: u32) -> f64 {
    let nf = n as f64;
    (omega0 / (b_f * b_f)).powi(2) - nf * (nf + 1.0) * (b_f - 1.0) / (t_k * t_k * b_f)
}

/// Kick-assisted shortcut of polynomial order n ≥ 1: drive the trap
/// along ω(t)² = ω₀²/b⁴ − b̈/b for the ansatz
/// b(t) = 1 + (b_F − 1)(t/t_k)^(n+1), then kick with
/// κ = (n+1)(b_F − 1)/(t_k·b_F) and trap at ω_F = ω₀/b_F². For n ≥ 2 the
/// drive starts continuously at ω(0) = ω₀ (no initial quench); for n = 1
/// it does not.
pub fn design_delta_sta(
    omega0: f64,
    omega_f: f64,
    t_k: f64,
    n: u32,
) -> Result<ProtocolSpec, ProtocolError> {
    if n < 1 {
        return Err(ProtocolError::Domain {
            param: "n",
            value: n as f64,
            requirement: "n >= 1",
        });
    }
    if !(omega_f > 0.0 && omega_f < omega0) {
        return Err(ProtocolError::Domain {
            param: "omega_F",
            value: omega_f,
            requirement: "0 < omega_F < omega0",
        });
    }
    if !(t_k > 0.0) {
        return Err(ProtocolError::Domain {
            param: "t_k",
            value: t_k,
            requirement: "t_k > 0",
        });
    }
    let b_f = (omega0 / omega_f).sqrt();
    let kappa = (n as f64 + 1.0) * (b_f - 1.0) / (t_k * b_f);

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::polynomial_sta(b_f, n, t_k));
    schedule.push_kick(t_k, kappa);

    Ok(ProtocolSpec {
        family: ProtocolFamily::DeltaSta,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("t_k", t_k),
            ("n", n as f64),
            ("kappa", kappa),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t_k,
        },
        provenance: vec![
            "b(t) = 1 + (b_F - 1)(t/t_k)^(n+1)".into(),
            "omega(t)^2 = omega0^2/b^4 - b''/b".into(),
            "kappa = (n+1)(b_F - 1)/(t_k*b_F)".into(),
        ],
    })
}

/// Finite-pulse DKC over free flight: free expansion for
/// t_k = (1/ω₀)√(b_F² − 1 + ((1 − b_F²)/b_F²)(ω₀/ω_k)²), then a pulse at
/// ω_k for τ_k = (1/ω_k)arcsin√((b_F² − 1)/(b_F⁴ω_k²/ω₀² − 1)). No
/// δ-kick: the pulse is an ordinary segment.
pub fn design_finite_dkc_free(
    omega0: f64,
    omega_f: f64,
    omega_k: f64,
) -> Result<ProtocolSpec, ProtocolError> {
    if !(omega_f > 0.0 && omega_f < omega0) {
        return Err(ProtocolError::Domain {
            param: "omega_F",
            value: omega_f,
            requirement: "0 < omega_F < omega0",
        });
    }
    let b_f = (omega0 / omega_f).sqrt();
    let bound = omega0 / b_f;
    if !(omega_k >= bound) {
        return Err(ProtocolError::Infeasible {
            constraint: "omega_k >= omega0/b_F".into(),
            bound,
            actual: omega_k,
        });
    }
    let bf2 = b_f * b_f;
    let t_k = ((bf2 - 1.0) * (1.0 - (omega0 / (b_f * omega_k)).powi(2))).sqrt() / omega0;
    let asin_arg_sq = (bf2 - 1.0) / (bf2 * bf2 * (omega_k / omega0).powi(2) - 1.0);
    let tau_k = asin_arg_sq.sqrt().asin() / omega_k;
    let kick_strength = tau_k * omega_k * omega_k;

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::constant(0.0, t_k));
    schedule.push_segment(SegmentLaw::constant(omega_k * omega_k, tau_k));

    Ok(ProtocolSpec {
        family: ProtocolFamily::FiniteDkcFree,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("omega_k", omega_k),
            ("t_k", t_k),
            ("tau_k", tau_k),
            ("kick_strength", kick_strength),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t_k + tau_k,
        },
        provenance: vec![
            "t_k = sqrt(b_F^2 - 1 + ((1 - b_F^2)/b_F^2)(omega0/omega_k)^2)/omega0".into(),
            "tau_k = arcsin(sqrt((b_F^2 - 1)/(b_F^4 omega_k^2/omega0^2 - 1)))/omega_k".into(),
        ],
    })
}

/// Finite-pulse DKC with trap inversion: expand in ω² = −ω_I² for
/// t_k = (1/ω_I)arcsinh√(v₁(b_F²−1)(b_F²v₂−1)/(b_F²(v₁+v₂)(v₁+1))), then
/// pulse at ω_k for
/// τ_k = (1/ω_k)arcsin√(v₂(b_F²−1)(b_F²v₁+1)/((v₁+v₂)(b_F⁴v₂−1))), with
/// v₁ = (ω_I/ω₀)², v₂ = (ω_k/ω₀)².
pub fn design_finite_dkc_inverted(
    omega0: f64,
    omega_f: f64,
    omega_i: f64,
    omega_k: f64,
) -> Result<ProtocolSpec, ProtocolError> {
    if !(omega_f > 0.0 && omega_f < omega0) {
        return Err(ProtocolError::Domain {
            param: "omega_F",
            value: omega_f,
            requirement: "0 < omega_F < omega0",
        });
    }
    if !(omega_i > 0.0) {
        return Err(ProtocolError::Domain {
            param: "omega_I",
            value: omega_i,
            requirement: "omega_I > 0",
        });
    }
    let b_f = (omega0 / omega_f).sqrt();
    let bf2 = b_f * b_f;
    let v1 = (omega_i / omega0).powi(2);
    let v2 = (omega_k / omega0).powi(2);

    let bound = omega0 / bf2;
    if !(omega_k > bound) {
        return Err(ProtocolError::Infeasible {
            constraint: "omega_k > omega0/b_F^2".into(),
            bound,
            actual: omega_k,
        });
    }
    let asin_arg_sq = v2 * (bf2 - 1.0) * (bf2 * v1 + 1.0) / ((v1 + v2) * (bf2 * bf2 * v2 - 1.0));
    if asin_arg_sq > 1.0 {
        return Err(ProtocolError::Infeasible {
            constraint: "arcsin argument <= 1: omega_k too small to stop the inverted expansion"
                .into(),
            bound: 1.0,
            actual: asin_arg_sq,
        });
    }
    let t_k = (v1 * (bf2 - 1.0) * (bf2 * v2 - 1.0) / (bf2 * (v1 + v2) * (v1 + 1.0)))
        .sqrt()
        .asinh()
        / omega_i;
    let tau_k = asin_arg_sq.sqrt().asin() / omega_k;
    let kick_strength = tau_k * omega_k * omega_k;

    let mut schedule = FrequencySchedule::new(omega0, omega_f * omega_f);
    schedule.push_segment(SegmentLaw::constant(-omega_i * omega_i, t_k));
    schedule.push_segment(SegmentLaw::constant(omega_k * omega_k, tau_k));

    Ok(ProtocolSpec {
        family: ProtocolFamily::FiniteDkcInverted,
        schedule,
        design_params: params(&[
            ("b_F", b_f),
            ("omega_I", omega_i),
            ("omega_k", omega_k),
            ("t_k", t_k),
            ("tau_k", tau_k),
            ("kick_strength", kick_strength),
            ("omega_F", omega_f),
        ]),
        predicted_final: ScalingState {
            b: b_f,
            b_dot: 0.0,
            t: t_k + tau_k,
        },
        provenance: vec![
            "v_1 = (omega_I/omega0)^2, v_2 = (omega_k/omega0)^2".into(),
            "t_k = arcsinh(sqrt(v_1(b_F^2-1)(b_F^2 v_2 - 1)/(b_F^2(v_1+v_2)(v_1+1))))/omega_I"
                .into(),
            "tau_k = arcsin(sqrt(v_2(b_F^2-1)(b_F^2 v_1 + 1)/((v_1+v_2)(b_F^4 v_2 - 1))))/omega_k"
                .into(),
        ],
    })
}

/// Leading-order corrections for applying the instantaneous-kick
/// strength as a finite pulse after TOF to b_F:
/// δb_k = ((b_F² − 1)/b_F³)(ω₀/ω_k)² and
/// ḃ_F = (√(b_F² − 1)/b_F⁵)·ω₀(ω₀/ω_k)².
pub fn finite_pulse_drift(
    b_f: f64,
    omega0: f64,
    omega_k: f64,
) -> Result<(f64, f64), ProtocolError> {
    require_expansion(b_f)?;
    if !(omega_k > 0.0) {
        return Err(ProtocolError::Domain {
            param: "omega_k",
            value: omega_k,
            requirement: "omega_k > 0",
        });
    }
    let r2 = (omega0 / omega_k).powi(2);
    let bf2 = b_f * b_f;
    let delta_b = (bf2 - 1.0) / (b_f * bf2) * r2;
    let b_dot_final = (bf2 - 1.0).sqrt() / b_f.powi(5) * omega0 * r2;
    Ok((delta_b, b_dot_final))
}

/// Long-time comparison ratios between trap-inversion DKC and free-TOF
/// DKC at a common expansion time t_F (all three use the stated
/// long-time approximations):
///
/// * width ratio (1/2)√(1/ω₀² + 1/ω_I²)·e^(ω_I t_F)/t_F,
/// * pulse-strength ratio 1/(ω_I t_F),
/// * expansion-time ratio (ω₀/(ω_I b_F))·ln(2b_F/√(ω₀²/ω_I² + 1)) with
///   b_F from the exponential growth law.
pub fn squeezing_and_pulse_ratios(omega0: f64, omega_i: f64, t_f: f64) -> (f64, f64, f64) {
    debug_assert!(omega0 > 0.0 && omega_i > 0.0 && t_f > 0.0);
    let root = (1.0 / (omega0 * omega0) + 1.0 / (omega_i * omega_i)).sqrt();
    let width_ratio = 0.5 * root * (omega_i * t_f).exp() / t_f;
    let pulse_ratio = 1.0 / (omega_i * t_f);
    let b_f = 0.5 * ((omega0 / omega_i).powi(2) + 1.0).sqrt() * (omega_i * t_f).exp();
    let time_ratio = omega0 / (omega_i * b_f)
        * (2.0 * b_f / ((omega0 / omega_i).powi(2) + 1.0).sqrt()).ln();
    (width_ratio, pulse_ratio, time_ratio)
}

/// State reached by free TOF at the designed kick time of
/// [`design_dkc_free`], handy for cross-checks.
pub fn tof_state_at(t_k: f64, omega0: f64) -> ScalingState {
    ScalingState {
        b: b_tof(t_k, omega0),
        b_dot: b_tof_dot(t_k, omega0),
        t: t_k,
    }
}
